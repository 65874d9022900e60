#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "taxoqa/dump.hpp"
#include "taxoqa/metrics.hpp"
#include "taxoqa/stats.hpp"
#include "taxoqa/taxonomy.hpp"

namespace taxoqa::analysis {

// Path similarity between every pair of concepts; disconnected pairs get 0.
stats::Matrix taxonomy_similarity(const Taxonomy& taxonomy, const std::vector<ConceptId>& concepts);

struct HierarchyRsaOptions {
    std::size_t subsets = 100;
    std::size_t subset_size = 100;
    std::uint64_t seed = 0;
    // Ridge-regularize near-singular covariances when whitening.
    bool ridge = false;
};

struct HierarchyRsaReport {
    std::vector<ConceptId> concepts;
    stats::RsaResult vlm_taxonomy;
    stats::RsaResult lm_taxonomy;
    stats::RsaResult vlm_lm;
    stats::Matrix vlm_similarity;
    stats::Matrix lm_similarity;
    stats::Matrix taxonomy_similarity;
    HierarchyRsaOptions options;
};

// Whitens both unembedding dumps over all their rows, then compares the
// cosine matrices of the taxonomy concepts with each other and with path similarity.
HierarchyRsaReport hierarchy_rsa_report(const EmbeddingDump& vlm, const EmbeddingDump& lm, const Taxonomy& taxonomy,
                                        const HierarchyRsaOptions& options = {});

struct StaticDeltaRow {
    ConceptId hyponym;
    ConceptId hypernym;
    std::vector<ConceptId> negatives;
    double delta_a = 0;
    std::optional<double> delta_b;
};

struct StaticDeltaReport {
    std::vector<StaticDeltaRow> rows;
    // Pairs without enough negative candidates, "hyponym:hypernym".
    std::vector<std::string> skipped;
    double mean_a = 0;
    std::optional<double> mean_b;
    std::optional<stats::TTestResult> t_test;
    std::uint64_t seed = 0;
};

// Delta = cos(hyponym, hypernym) - mean cos(hyponym, negative) per pair, with
// negatives drawn as for minimal pairs. A second dump reuses the same draws.
StaticDeltaReport static_delta_report(const EmbeddingDump& a, const EmbeddingDump* b, const Taxonomy& taxonomy,
                                      std::uint64_t seed);

struct SimilarityFeatures {
    std::string instance_id;
    double sim_hyper = 0;
    double sim_neg_max = 0;
    double delta = 0;
    std::size_t layer = 0;
};

// Substituted instances with a "No" positive whose original was answered
// correctly; the value is whether the instance itself was judged correct.
std::vector<std::pair<std::string, int>> odds_subset(const InstanceSet& results);

// Features for the requested instances from one contextual layer dump. The
// hyponym similarity is the maximum over its mentions.
std::vector<SimilarityFeatures> similarity_features(const EmbeddingDump& layer_dump,
                                                    const std::vector<std::string>& instance_ids);

struct LayerOdds {
    std::size_t layer = 0;
    std::size_t n = 0;
    stats::RegressionResult fit;
    double odds_ratio = 1;
    double ci_low = 1;
    double ci_high = 1;
    double p_value = 1;
};

struct LayerwiseOddsReport {
    std::vector<LayerOdds> layers;
    std::vector<std::vector<SimilarityFeatures>> features;
    std::size_t n_instances = 0;
};

// Logistic regression of correctness on delta, one fit per layer.
LayerwiseOddsReport layerwise_odds_report(const std::vector<EmbeddingDump>& layer_dumps, const InstanceSet& results);
// Same, with explicit (instance_id, correct) pairs.
LayerwiseOddsReport layerwise_odds_report(const std::vector<EmbeddingDump>& layer_dumps,
                                          const std::vector<std::pair<std::string, int>>& subset);

struct SeparabilityReport {
    stats::PcaResult pca;
    stats::SvmResult svm;
    Eigen::MatrixXd coordinates;
    std::vector<std::string> instance_ids;
    // +1 hypernym substitution, -1 negative substitution.
    std::vector<int> labels;
};

SeparabilityReport separability_report(const EmbeddingDump& question_dump, const stats::SvmOptions& svm = {});

struct VisualOptions {
    bool exclude_leaf_images = true;
};

struct VisualSimilarityRecord {
    ConceptId hyponym;
    ConceptId hypernym;
    double viz_sim = 0;
    double cond_acc = 0;
    std::size_t leaf_images = 0;
    std::size_t prototype_images = 0;
};

struct VisualReport {
    std::vector<VisualSimilarityRecord> records;
    std::optional<stats::GroupedRegressionResult> regression;
    double median_viz_sim = 0;
    std::map<ConceptId, double> cohesion;
    std::vector<std::string> skipped;
    // Audit trail: dump rows averaged into each prototype, keyed "hyponym:hypernym".
    std::map<std::string, std::vector<std::size_t>> prototype_rows;
};

using PairKey = std::pair<ConceptId, ConceptId>;

// Conditional accuracy per (hyponym, hypernym) pair from a metrics report.
std::map<PairKey, double> conditional_accuracy_by_pair(const MetricsReport& report);

// Members of every hypernym among the taxonomy's leaves.
std::map<ConceptId, std::vector<ConceptId>> leaf_membership(const Taxonomy& taxonomy);

VisualReport visual_similarity_report(const EmbeddingDump& vision_dump,
                                      const std::map<ConceptId, std::vector<ConceptId>>& membership,
                                      const std::map<PairKey, double>& cond_acc, const VisualOptions& options = {});

double median(std::vector<double> values);
// Fraction of the hypernym's pairs with similarity strictly above the median of all pairs.
double cohesion(const std::map<PairKey, double>& pair_sims, const ConceptId& hypernym);

// Report serialisation.
nlohmann::ordered_json to_json(const HierarchyRsaReport& r);
nlohmann::ordered_json to_json(const StaticDeltaReport& r);
nlohmann::ordered_json to_json(const LayerwiseOddsReport& r);
nlohmann::ordered_json to_json(const SeparabilityReport& r);
nlohmann::ordered_json to_json(const VisualReport& r);
nlohmann::ordered_json to_json(const stats::RegressionResult& r);

std::string matrix_csv(const stats::Matrix& m);
std::string static_delta_csv(const StaticDeltaReport& r);
std::string layer_odds_csv(const LayerwiseOddsReport& r);
std::string coordinates_csv(const SeparabilityReport& r);
std::string visual_csv(const VisualReport& r);

}  // namespace taxoqa::analysis
