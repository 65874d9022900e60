#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "taxoqa/taxonomy.hpp"

namespace taxoqa {

struct InstanceResult {
    std::string instance_id;
    bool positive_correct = false;
    std::array<bool, 4> negatives_correct{};
    std::size_t substitution_depth = 0;
    ConceptId source_leaf;
    // Positive-question target (the hypernym for substituted instances).
    ConceptId target;
    // Ground truth of the positive question is "Yes".
    bool positive_gold_yes = true;
    // Empty for originals.
    std::string parent_instance_id;
};

// correct(): positive and all four negatives answered correctly.
int judge_instance(const InstanceResult& r);

// Originals (depth 0) plus their substituted instances keyed by original id.
class InstanceSet {
public:
    InstanceSet() = default;
    // Throws DataError when a substituted result names an unknown parent.
    static InstanceSet build(std::vector<InstanceResult> results);

    const std::vector<InstanceResult>& originals() const noexcept { return originals_; }
    const std::vector<InstanceResult>& substituted(const std::string& original_id) const;
    std::size_t substituted_count() const noexcept;

private:
    std::vector<InstanceResult> originals_;
    std::map<std::string, std::vector<InstanceResult>> substituted_;
};

// A mergeable numerator/denominator pair.
struct Ratio {
    double numerator = 0;
    double denominator = 0;

    Ratio& operator+=(const Ratio& o) {
        numerator += o.numerator;
        denominator += o.denominator;
        return *this;
    }
    std::optional<double> value() const {
        if (denominator <= 0) return std::nullopt;
        return numerator / denominator;
    }
};

struct MetricCounts {
    Ratio overall;
    Ratio conditional;
    Ratio hierarchical;

    MetricCounts& operator+=(const MetricCounts& o) {
        overall += o.overall;
        conditional += o.conditional;
        hierarchical += o.hierarchical;
        return *this;
    }
};

MetricCounts metric_counts(const InstanceSet& s);

double overall_accuracy(const InstanceSet& s);
// nullopt when no correctly answered original has substituted instances.
std::optional<double> conditional_accuracy(const InstanceSet& s);
double hierarchical_consistency(const InstanceSet& s);

struct BreakdownRow {
    std::string key;
    std::size_t instances = 0;
    std::size_t correct = 0;
    // Conditional on the parent original being correct; absent when undefined.
    std::size_t conditioned = 0;
    std::size_t conditioned_correct = 0;
};

struct MetricsReport {
    double overall = 0;
    std::optional<double> conditional;
    double hierarchical_consistency = 0;
    std::size_t n_originals = 0;
    std::size_t n_substituted = 0;
    // Originals judged correct that have at least one substituted instance.
    std::size_t n_conditioned = 0;
    std::vector<BreakdownRow> per_depth;
    std::vector<BreakdownRow> per_hypernym;
    // Keyed "leaf:hypernym"; feeds the visual-similarity regression.
    std::vector<BreakdownRow> per_pair;
};

MetricsReport compute_metrics(const InstanceSet& s);

nlohmann::ordered_json to_json(const MetricsReport& r);
std::string breakdown_csv(const std::vector<BreakdownRow>& rows, std::string_view key_name);

}  // namespace taxoqa
