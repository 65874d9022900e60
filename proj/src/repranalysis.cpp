#include "taxoqa/repranalysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "taxoqa/questgen.hpp"

namespace taxoqa::analysis {

using nlohmann::ordered_json;
using stats::Matrix;

namespace {

constexpr double kZ975 = 1.959963984540054;

void require_role(const EmbeddingDump& d, DumpRole role) {
    if (d.manifest.role != role)
        throw DataError("dump for '" + d.manifest.model_id + "' has role '" + std::string(to_string(d.manifest.role)) +
                        "', expected '" + std::string(to_string(role)) + "'");
}

// First row per label.
std::map<std::string, Eigen::Index> label_index(const EmbeddingDump& d) {
    std::map<std::string, Eigen::Index> out;
    for (std::size_t i = 0; i < d.manifest.labels.size(); ++i)
        out.emplace(d.manifest.labels[i], static_cast<Eigen::Index>(i));
    return out;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0) throw NumericError("cosine of a zero vector");
    return a.dot(b) / (na * nb);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

ordered_json rsa_json(const stats::RsaResult& r) {
    ordered_json j;
    j["mean"] = r.mean;
    j["sd"] = r.sd ? ordered_json(*r.sd) : ordered_json(nullptr);
    return j;
}

// Non-finite values serialise as null.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json numbers(const std::vector<double>& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

}  // namespace

Matrix taxonomy_similarity(const Taxonomy& taxonomy, const std::vector<ConceptId>& concepts) {
    const auto n = static_cast<Eigen::Index>(concepts.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double s = 0;
            try {
                s = taxonomy.path_similarity(concepts[static_cast<std::size_t>(i)], concepts[static_cast<std::size_t>(j)]);
            } catch (const UnknownConceptError&) {
                throw;
            } catch (const DataError&) {
                s = 0;
            }
            m(i, j) = m(j, i) = s;
        }
    }
    return Matrix(std::move(m), concepts, concepts);
}

HierarchyRsaReport hierarchy_rsa_report(const EmbeddingDump& vlm, const EmbeddingDump& lm, const Taxonomy& taxonomy,
                                        const HierarchyRsaOptions& options) {
    require_role(vlm, DumpRole::kUnembedding);
    require_role(lm, DumpRole::kUnembedding);
    const auto vi = label_index(vlm);
    const auto li = label_index(lm);
    std::set<ConceptId> in_vlm, in_lm;
    for (const auto& c : taxonomy.concepts()) {
        if (vi.contains(c)) in_vlm.insert(c);
        if (li.contains(c)) in_lm.insert(c);
    }
    if (in_vlm != in_lm) throw DataError("unembedding dumps cover different taxonomy concepts");
    if (in_vlm.size() < 3) throw DataError("unembedding dumps cover fewer than three taxonomy concepts");

    HierarchyRsaReport r;
    r.options = options;
    r.concepts.assign(in_vlm.begin(), in_vlm.end());
    const stats::WhitenOptions wopt{options.ridge};
    auto concept_cosines = [&](const EmbeddingDump& d, const std::map<std::string, Eigen::Index>& idx) {
        const Matrix w = stats::whiten(d.payload, wopt);
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(r.concepts.size()), w.cols());
        for (std::size_t k = 0; k < r.concepts.size(); ++k)
            rows.row(static_cast<Eigen::Index>(k)) = w.values.row(idx.at(r.concepts[k]));
        return stats::pairwise_cosine(Matrix(std::move(rows), r.concepts));
    };
    r.vlm_similarity = concept_cosines(vlm, vi);
    r.lm_similarity = concept_cosines(lm, li);
    r.taxonomy_similarity = taxonomy_similarity(taxonomy, r.concepts);

    const std::size_t size = std::min(options.subset_size, r.concepts.size());
    const std::size_t subsets = size == r.concepts.size() ? 0 : options.subsets;
    r.vlm_taxonomy = stats::rsa(r.vlm_similarity, r.taxonomy_similarity, subsets, size, options.seed);
    r.lm_taxonomy = stats::rsa(r.lm_similarity, r.taxonomy_similarity, subsets, size, options.seed);
    r.vlm_lm = stats::rsa(r.vlm_similarity, r.lm_similarity, subsets, size, options.seed);
    return r;
}

StaticDeltaReport static_delta_report(const EmbeddingDump& a, const EmbeddingDump* b, const Taxonomy& taxonomy,
                                      std::uint64_t seed) {
    require_role(a, DumpRole::kStatic);
    if (b) require_role(*b, DumpRole::kStatic);
    const auto ai = label_index(a);
    std::map<std::string, Eigen::Index> bi;
    if (b) bi = label_index(*b);
    auto vec = [](const EmbeddingDump& d, const std::map<std::string, Eigen::Index>& idx, const ConceptId& c) {
        auto it = idx.find(c);
        if (it == idx.end())
            throw DataError("static dump for '" + d.manifest.model_id + "' has no embedding for concept '" + c + "'");
        return Eigen::VectorXd(d.payload.values.row(it->second).transpose());
    };
    auto delta = [&](const EmbeddingDump& d, const std::map<std::string, Eigen::Index>& idx, const ConceptId& hypo,
                     const ConceptId& hyper, const std::vector<ConceptId>& negs) {
        const Eigen::VectorXd h = vec(d, idx, hypo);
        double neg = 0;
        for (const auto& n : negs) neg += cosine(h, vec(d, idx, n));
        return cosine(h, vec(d, idx, hyper)) - neg / static_cast<double>(negs.size());
    };

    StaticDeltaReport r;
    r.seed = seed;
    std::vector<double> da, db;
    for (const auto& [hypo, hyper] : taxonomy.hyponym_hypernym_pairs()) {
        auto negs = taxomps_negative_concepts(taxonomy, hypo, hyper, seed);
        if (!negs) {
            r.skipped.push_back(hypo + ":" + hyper);
            continue;
        }
        StaticDeltaRow row{hypo, hyper, *negs, delta(a, ai, hypo, hyper, *negs), std::nullopt};
        da.push_back(row.delta_a);
        if (b) {
            row.delta_b = delta(*b, bi, hypo, hyper, *negs);
            db.push_back(*row.delta_b);
        }
        r.rows.push_back(std::move(row));
    }
    if (r.rows.empty()) throw DataError("no hyponym-hypernym pair has enough negative candidates");
    r.mean_a = std::accumulate(da.begin(), da.end(), 0.0) / static_cast<double>(da.size());
    if (b) {
        r.mean_b = std::accumulate(db.begin(), db.end(), 0.0) / static_cast<double>(db.size());
        if (da.size() >= 2) r.t_test = stats::paired_t_test(da, db);
    }
    return r;
}

std::vector<std::pair<std::string, int>> odds_subset(const InstanceSet& results) {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& orig : results.originals()) {
        if (judge_instance(orig) != 1) continue;
        for (const auto& sub : results.substituted(orig.instance_id))
            if (!sub.positive_gold_yes) out.emplace_back(sub.instance_id, judge_instance(sub));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SimilarityFeatures> similarity_features(const EmbeddingDump& layer_dump,
                                                    const std::vector<std::string>& instance_ids) {
    require_role(layer_dump, DumpRole::kLayerwiseContextual);
    struct Rows {
        std::vector<Eigen::Index> hyponym;
        std::vector<Eigen::Index> hypernym;
        std::vector<Eigen::Index> negatives;
    };
    std::map<std::string, Rows> by_instance;
    const auto& meta = layer_dump.manifest.row_meta;
    for (std::size_t i = 0; i < meta.size(); ++i) {
        auto& rows = by_instance[meta[i].instance_id];
        const auto idx = static_cast<Eigen::Index>(i);
        if (meta[i].kind == "hyponym")
            rows.hyponym.push_back(idx);
        else if (meta[i].kind == "hypernym")
            rows.hypernym.push_back(idx);
        else
            rows.negatives.push_back(idx);
    }
    const std::size_t layer = layer_dump.manifest.layer.value_or(0);
    const auto& v = layer_dump.payload.values;
    std::vector<SimilarityFeatures> out;
    for (const auto& id : instance_ids) {
        auto it = by_instance.find(id);
        if (it == by_instance.end() || it->second.hyponym.empty() || it->second.hypernym.empty() ||
            it->second.negatives.empty())
            throw DataError("layer " + std::to_string(layer) + " dump cannot resolve the hyponym, hypernym and negative "
                            "mentions of instance '" + id + "'");
        const auto& rows = it->second;
        // Best match over hyponym mentions against one comparison row.
        auto best = [&](Eigen::Index target) {
            double m = -std::numeric_limits<double>::infinity();
            for (auto h : rows.hyponym) m = std::max(m, cosine(v.row(h).transpose(), v.row(target).transpose()));
            return m;
        };
        SimilarityFeatures f;
        f.instance_id = id;
        f.layer = layer;
        f.sim_hyper = -std::numeric_limits<double>::infinity();
        for (auto h : rows.hypernym) f.sim_hyper = std::max(f.sim_hyper, best(h));
        f.sim_neg_max = -std::numeric_limits<double>::infinity();
        for (auto n : rows.negatives) f.sim_neg_max = std::max(f.sim_neg_max, best(n));
        f.delta = f.sim_hyper - f.sim_neg_max;
        out.push_back(f);
    }
    return out;
}

LayerwiseOddsReport layerwise_odds_report(const std::vector<EmbeddingDump>& layer_dumps, const InstanceSet& results) {
    return layerwise_odds_report(layer_dumps, odds_subset(results));
}

LayerwiseOddsReport layerwise_odds_report(const std::vector<EmbeddingDump>& layer_dumps,
                                          const std::vector<std::pair<std::string, int>>& subset) {
    if (layer_dumps.empty()) throw DataError("no layer dumps given");
    if (subset.empty()) throw DataError("no instances qualify for the layerwise analysis");
    std::vector<const EmbeddingDump*> ordered;
    for (const auto& d : layer_dumps) {
        require_role(d, DumpRole::kLayerwiseContextual);
        ordered.push_back(&d);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto* x, const auto* y) { return *x->manifest.layer < *y->manifest.layer; });
    for (std::size_t i = 0; i < ordered.size(); ++i)
        if (*ordered[i]->manifest.layer != i)
            throw DataError("layer dumps must cover layers 0.." + std::to_string(ordered.size() - 1) +
                            " exactly once; found layer " + std::to_string(*ordered[i]->manifest.layer));
    const std::string model = ordered.front()->manifest.model_id;
    for (const auto* d : ordered)
        if (d->manifest.model_id != model) throw DataError("layer dumps come from different models");

    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& [id, ok] : subset) {
        ids.push_back(id);
        labels.push_back(ok);
    }

    LayerwiseOddsReport r;
    r.n_instances = ids.size();
    for (const auto* d : ordered) {
        auto feats = similarity_features(*d, ids);
        Eigen::MatrixXd x(static_cast<Eigen::Index>(feats.size()), 1);
        for (std::size_t i = 0; i < feats.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = feats[i].delta;
        LayerOdds lo;
        lo.layer = *d->manifest.layer;
        lo.n = feats.size();
        lo.fit = stats::logistic_fit(Matrix(x), labels);
        const double b = lo.fit.coefficients[1], se = lo.fit.standard_errors[1];
        lo.odds_ratio = lo.fit.odds_ratios[1];
        lo.p_value = lo.fit.p_values[1];
        lo.ci_low = std::isfinite(se) ? std::exp(b - kZ975 * se) : 0.0;
        lo.ci_high = std::isfinite(se) ? std::exp(b + kZ975 * se) : std::numeric_limits<double>::infinity();
        r.layers.push_back(std::move(lo));
        r.features.push_back(std::move(feats));
    }
    return r;
}

SeparabilityReport separability_report(const EmbeddingDump& question_dump, const stats::SvmOptions& svm) {
    require_role(question_dump, DumpRole::kQuestionFinal);
    SeparabilityReport r;
    for (const auto& m : question_dump.manifest.row_meta) {
        r.instance_ids.push_back(m.instance_id);
        r.labels.push_back(m.kind == "hypernym" ? 1 : -1);
    }
    const bool pos = std::count(r.labels.begin(), r.labels.end(), 1) > 0;
    const bool neg = std::count(r.labels.begin(), r.labels.end(), -1) > 0;
    if (!pos || !neg) throw NumericError("separability needs both hypernym and negative questions");
    r.pca = stats::pca(question_dump.payload, 2);
    r.coordinates = r.pca.project(question_dump.payload.values);
    r.svm = stats::svm_fit(Matrix(r.coordinates), r.labels, svm);
    return r;
}

std::map<PairKey, double> conditional_accuracy_by_pair(const MetricsReport& report) {
    std::map<PairKey, double> out;
    for (const auto& row : report.per_pair) {
        if (row.conditioned == 0) continue;
        const auto colon = row.key.find(':');
        out[{row.key.substr(0, colon), row.key.substr(colon + 1)}] =
            static_cast<double>(row.conditioned_correct) / static_cast<double>(row.conditioned);
    }
    return out;
}

std::map<ConceptId, std::vector<ConceptId>> leaf_membership(const Taxonomy& taxonomy) {
    std::map<ConceptId, std::vector<ConceptId>> out;
    for (const auto& leaf : taxonomy.leaves())
        for (const auto& h : taxonomy.hypernym_chain(leaf)) out[h].push_back(leaf);
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw NumericError("median of an empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2;
}

double cohesion(const std::map<PairKey, double>& pair_sims, const ConceptId& hypernym) {
    std::vector<double> all;
    for (const auto& [k, v] : pair_sims) all.push_back(v);
    std::size_t pairs = 0, above = 0;
    if (!all.empty()) {
        const double med = median(all);
        for (const auto& [k, v] : pair_sims)
            if (k.second == hypernym) {
                ++pairs;
                above += v > med;
            }
    }
    if (pairs == 0) throw DataError("hypernym '" + hypernym + "' has no pairs");
    return static_cast<double>(above) / static_cast<double>(pairs);
}

VisualReport visual_similarity_report(const EmbeddingDump& vision_dump,
                                      const std::map<ConceptId, std::vector<ConceptId>>& membership,
                                      const std::map<PairKey, double>& cond_acc, const VisualOptions& options) {
    require_role(vision_dump, DumpRole::kVisionPatch);
    std::map<ConceptId, std::vector<std::size_t>> images;
    const auto& meta = vision_dump.manifest.row_meta;
    for (std::size_t i = 0; i < meta.size(); ++i) images[meta[i].concept_id].push_back(i);
    const auto& v = vision_dump.payload.values;

    VisualReport r;
    std::map<PairKey, double> sims;
    for (const auto& [pair, acc] : cond_acc) {
        const auto& [hypo, hyper] = pair;
        const std::string key = hypo + ":" + hyper;
        auto leaf = images.find(hypo);
        auto members = membership.find(hyper);
        if (leaf == images.end() || members == membership.end()) {
            r.skipped.push_back(key);
            continue;
        }
        std::vector<std::size_t> proto_rows;
        for (const auto& m : members->second) {
            if (options.exclude_leaf_images && m == hypo) continue;
            auto it = images.find(m);
            if (it != images.end()) proto_rows.insert(proto_rows.end(), it->second.begin(), it->second.end());
        }
        std::sort(proto_rows.begin(), proto_rows.end());
        proto_rows.erase(std::unique(proto_rows.begin(), proto_rows.end()), proto_rows.end());
        if (proto_rows.empty()) {
            r.skipped.push_back(key);
            continue;
        }
        Eigen::VectorXd proto = Eigen::VectorXd::Zero(v.cols());
        for (auto row : proto_rows) proto += v.row(static_cast<Eigen::Index>(row)).transpose();
        proto /= static_cast<double>(proto_rows.size());
        double sim = 0;
        for (auto row : leaf->second) sim += cosine(v.row(static_cast<Eigen::Index>(row)).transpose(), proto);
        sim /= static_cast<double>(leaf->second.size());

        r.records.push_back({hypo, hyper, sim, acc, leaf->second.size(), proto_rows.size()});
        r.prototype_rows[key] = std::move(proto_rows);
        sims[pair] = sim;
    }
    if (r.records.empty()) throw DataError("no (hyponym, hypernym) pair has both leaf and prototype images");

    std::vector<double> all;
    for (const auto& [k, s] : sims) all.push_back(s);
    r.median_viz_sim = median(all);
    std::set<ConceptId> hypernyms;
    for (const auto& rec : r.records) hypernyms.insert(rec.hypernym);
    for (const auto& h : hypernyms) r.cohesion[h] = cohesion(sims, h);

    std::vector<stats::GroupedRecord> reg;
    for (const auto& rec : r.records) reg.push_back({rec.hypernym, rec.viz_sim, rec.cond_acc});
    try {
        r.regression = stats::grouped_regression(reg);
    } catch (const NumericError&) {
        r.regression.reset();
    }
    return r;
}

ordered_json to_json(const stats::RegressionResult& r) {
    ordered_json j;
    j["coefficients"] = numbers(r.coefficients);
    j["standard_errors"] = numbers(r.standard_errors);
    j["statistics"] = numbers(r.statistics);
    j["p_values"] = numbers(r.p_values);
    if (!r.odds_ratios.empty()) j["odds_ratios"] = numbers(r.odds_ratios);
    j["dropped"] = r.dropped;
    j["converged"] = r.converged;
    j["separation"] = r.separation;
    j["n_iterations"] = r.n_iterations;
    return j;
}

ordered_json to_json(const HierarchyRsaReport& r) {
    ordered_json j;
    j["n_concepts"] = r.concepts.size();
    j["subsets"] = r.options.subsets;
    j["subset_size"] = r.options.subset_size;
    j["seed"] = r.options.seed;
    j["vlm_taxonomy"] = rsa_json(r.vlm_taxonomy);
    j["lm_taxonomy"] = rsa_json(r.lm_taxonomy);
    j["vlm_lm"] = rsa_json(r.vlm_lm);
    return j;
}

ordered_json to_json(const StaticDeltaReport& r) {
    ordered_json j;
    j["seed"] = r.seed;
    j["n_pairs"] = r.rows.size();
    j["skipped"] = r.skipped;
    j["mean_delta_a"] = r.mean_a;
    j["mean_delta_b"] = r.mean_b ? ordered_json(*r.mean_b) : ordered_json(nullptr);
    if (r.t_test) {
        j["t_test"] = {{"t", number(r.t_test->t)}, {"p", number(r.t_test->p)}, {"df", r.t_test->df}};
    } else {
        j["t_test"] = nullptr;
    }
    return j;
}

ordered_json to_json(const LayerwiseOddsReport& r) {
    ordered_json j;
    j["n_instances"] = r.n_instances;
    ordered_json layers = ordered_json::array();
    for (const auto& l : r.layers) {
        ordered_json o;
        o["layer"] = l.layer;
        o["n"] = l.n;
        o["odds_ratio"] = number(l.odds_ratio);
        o["ci_low"] = number(l.ci_low);
        o["ci_high"] = number(l.ci_high);
        o["p_value"] = number(l.p_value);
        o["fit"] = to_json(l.fit);
        layers.push_back(std::move(o));
    }
    j["layers"] = std::move(layers);
    return j;
}

ordered_json to_json(const SeparabilityReport& r) {
    ordered_json j;
    j["n"] = r.labels.size();
    j["n_hypernym"] = std::count(r.labels.begin(), r.labels.end(), 1);
    j["n_negative"] = std::count(r.labels.begin(), r.labels.end(), -1);
    j["explained_variance"] = numbers(r.pca.explained_variance);
    j["total_variance"] = r.pca.total_variance;
    j["svm_error"] = r.svm.svm_error;
    j["svm_c"] = r.svm.regularization_c;
    j["svm_weights"] = numbers(std::vector<double>(r.svm.weights.data(), r.svm.weights.data() + r.svm.weights.size()));
    j["svm_bias"] = r.svm.bias;
    return j;
}

ordered_json to_json(const VisualReport& r) {
    ordered_json j;
    j["n_pairs"] = r.records.size();
    j["skipped"] = r.skipped;
    j["median_viz_sim"] = r.median_viz_sim;
    ordered_json records = ordered_json::array();
    for (const auto& rec : r.records)
        records.push_back({{"hyponym", rec.hyponym},
                           {"hypernym", rec.hypernym},
                           {"viz_sim", number(rec.viz_sim)},
                           {"cond_acc", number(rec.cond_acc)},
                           {"leaf_images", rec.leaf_images},
                           {"prototype_images", rec.prototype_images}});
    j["records"] = std::move(records);
    if (r.regression) {
        ordered_json reg = to_json(r.regression->global);
        ordered_json groups = ordered_json::object();
        for (const auto& [g, fit] : r.regression->groups)
            groups[g] = {{"intercept", fit.intercept}, {"slope", fit.slope}, {"n", fit.n}, {"own_fit", fit.own_fit}};
        reg["groups"] = std::move(groups);
        j["regression"] = std::move(reg);
    } else {
        j["regression"] = nullptr;
    }
    ordered_json coh = ordered_json::object();
    for (const auto& [h, c] : r.cohesion) coh[h] = c;
    j["cohesion"] = std::move(coh);
    return j;
}

std::string matrix_csv(const Matrix& m) {
    std::ostringstream out;
    out.precision(10);
    out << "label";
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        out << ',' << csv_field(static_cast<std::size_t>(j) < m.col_labels.size() ? m.col_labels[static_cast<std::size_t>(j)]
                                                                                  : "#" + std::to_string(j));
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << csv_field(m.row_name(i));
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << m.values(i, j);
        out << '\n';
    }
    return out.str();
}

std::string static_delta_csv(const StaticDeltaReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << "hyponym,hypernym,negatives,delta_a,delta_b\n";
    for (const auto& row : r.rows) {
        std::string negs;
        for (const auto& n : row.negatives) negs += (negs.empty() ? "" : ";") + n;
        out << csv_field(row.hyponym) << ',' << csv_field(row.hypernym) << ',' << csv_field(negs) << ','
            << row.delta_a << ',';
        if (row.delta_b) out << *row.delta_b;
        out << '\n';
    }
    return out.str();
}

std::string layer_odds_csv(const LayerwiseOddsReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << "layer,n,coefficient,standard_error,odds_ratio,ci_low,ci_high,p_value,converged,separation\n";
    for (const auto& l : r.layers)
        out << l.layer << ',' << l.n << ',' << l.fit.coefficients[1] << ',' << l.fit.standard_errors[1] << ','
            << l.odds_ratio << ',' << l.ci_low << ',' << l.ci_high << ',' << l.p_value << ','
            << (l.fit.converged ? "true" : "false") << ',' << (l.fit.separation ? "true" : "false") << '\n';
    return out.str();
}

std::string coordinates_csv(const SeparabilityReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << "instance_id,class,pc1,pc2\n";
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        out << csv_field(r.instance_ids[i]) << ',' << (r.labels[i] > 0 ? "hypernym" : "negative") << ','
            << r.coordinates(row, 0) << ',' << r.coordinates(row, 1) << '\n';
    }
    return out.str();
}

std::string visual_csv(const VisualReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << "hyponym,hypernym,viz_sim,cond_acc,leaf_images,prototype_images\n";
    for (const auto& rec : r.records)
        out << csv_field(rec.hyponym) << ',' << csv_field(rec.hypernym) << ',' << rec.viz_sim << ',' << rec.cond_acc
            << ',' << rec.leaf_images << ',' << rec.prototype_images << '\n';
    return out.str();
}

}  // namespace taxoqa::analysis
