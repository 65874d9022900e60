#include "taxoqa/metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace taxoqa {

int judge_instance(const InstanceResult& r) {
    if (!r.positive_correct) return 0;
    return std::all_of(r.negatives_correct.begin(), r.negatives_correct.end(), [](bool b) { return b; })
               ? 1
               : 0;
}

InstanceSet InstanceSet::build(std::vector<InstanceResult> results) {
    InstanceSet s;
    std::vector<InstanceResult> subs;
    for (auto& r : results) {
        if (r.parent_instance_id.empty())
            s.originals_.push_back(std::move(r));
        else
            subs.push_back(std::move(r));
    }
    std::sort(s.originals_.begin(), s.originals_.end(),
              [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
    for (std::size_t i = 1; i < s.originals_.size(); ++i)
        if (s.originals_[i].instance_id == s.originals_[i - 1].instance_id)
            throw DataError("duplicate instance '" + s.originals_[i].instance_id + "'");
    std::set<std::string> ids;
    for (const auto& o : s.originals_) ids.insert(o.instance_id);
    for (auto& r : subs) {
        const bool known = ids.contains(r.parent_instance_id);
        if (!known)
            throw DataError("substituted instance '" + r.instance_id + "' names unknown parent '" +
                            r.parent_instance_id + "'");
        s.substituted_[r.parent_instance_id].push_back(std::move(r));
    }
    for (auto& [id, list] : s.substituted_)
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
    return s;
}

const std::vector<InstanceResult>& InstanceSet::substituted(const std::string& original_id) const {
    static const std::vector<InstanceResult> kNone;
    auto it = substituted_.find(original_id);
    return it == substituted_.end() ? kNone : it->second;
}

std::size_t InstanceSet::substituted_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [id, list] : substituted_) n += list.size();
    return n;
}

MetricCounts metric_counts(const InstanceSet& s) {
    MetricCounts c;
    for (const auto& orig : s.originals()) {
        const int base = judge_instance(orig);
        const auto& subs = s.substituted(orig.instance_id);
        int sub_correct = 0;
        for (const auto& sub : subs) sub_correct += judge_instance(sub);
        const bool all_subs = sub_correct == static_cast<int>(subs.size());

        c.overall.numerator += base + sub_correct;
        c.overall.denominator += 1 + static_cast<double>(subs.size());
        if (base == 1 && !subs.empty()) {
            c.conditional.numerator += sub_correct;
            c.conditional.denominator += static_cast<double>(subs.size());
        }
        c.hierarchical.numerator += (base == 1 && all_subs) ? 1 : 0;
        c.hierarchical.denominator += 1;
    }
    return c;
}

double overall_accuracy(const InstanceSet& s) {
    auto v = metric_counts(s).overall.value();
    if (!v) throw DataError("overall accuracy of an empty instance set");
    return *v;
}

std::optional<double> conditional_accuracy(const InstanceSet& s) { return metric_counts(s).conditional.value(); }

double hierarchical_consistency(const InstanceSet& s) {
    auto v = metric_counts(s).hierarchical.value();
    if (!v) throw DataError("hierarchical consistency of an empty instance set");
    return *v;
}

MetricsReport compute_metrics(const InstanceSet& s) {
    MetricsReport r;
    const auto c = metric_counts(s);
    r.overall = overall_accuracy(s);
    r.conditional = c.conditional.value();
    r.hierarchical_consistency = hierarchical_consistency(s);
    r.n_originals = s.originals().size();
    r.n_substituted = s.substituted_count();

    std::map<std::string, BreakdownRow> depth, hyper, pair;
    auto add = [](BreakdownRow& row, int ok, bool conditioned) {
        ++row.instances;
        row.correct += ok;
        if (conditioned) {
            ++row.conditioned;
            row.conditioned_correct += ok;
        }
    };
    for (const auto& orig : s.originals()) {
        const int base = judge_instance(orig);
        const auto& subs = s.substituted(orig.instance_id);
        if (base == 1 && !subs.empty()) ++r.n_conditioned;
        add(depth["0"], base, false);
        for (const auto& sub : subs) {
            const int ok = judge_instance(sub);
            add(depth[std::to_string(sub.substitution_depth)], ok, base == 1);
            add(hyper[sub.target], ok, base == 1);
            add(pair[sub.source_leaf + ":" + sub.target], ok, base == 1);
        }
    }
    auto flatten = [](std::map<std::string, BreakdownRow>& m) {
        std::vector<BreakdownRow> rows;
        for (auto& [k, row] : m) {
            row.key = k;
            rows.push_back(row);
        }
        return rows;
    };
    r.per_depth = flatten(depth);
    std::sort(r.per_depth.begin(), r.per_depth.end(),
              [](const auto& a, const auto& b) { return std::stoul(a.key) < std::stoul(b.key); });
    r.per_hypernym = flatten(hyper);
    r.per_pair = flatten(pair);
    return r;
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["overall"] = r.overall;
    j["conditional"] = r.conditional ? nlohmann::ordered_json(*r.conditional) : nlohmann::ordered_json(nullptr);
    j["hierarchical_consistency"] = r.hierarchical_consistency;
    j["counts"] = {{"n_originals", r.n_originals},
                   {"n_substituted", r.n_substituted},
                   {"n_conditioned", r.n_conditioned}};
    return j;
}

std::string breakdown_csv(const std::vector<BreakdownRow>& rows, std::string_view key_name) {
    std::ostringstream out;
    out.precision(17);
    out << key_name << ",instances,correct,accuracy,conditioned,conditioned_correct,conditional_accuracy\n";
    for (const auto& row : rows) {
        out << '"' << row.key << "\"," << row.instances << ',' << row.correct << ','
            << (row.instances ? static_cast<double>(row.correct) / static_cast<double>(row.instances) : 0.0)
            << ',' << row.conditioned << ',' << row.conditioned_correct << ',';
        if (row.conditioned)
            out << static_cast<double>(row.conditioned_correct) / static_cast<double>(row.conditioned);
        out << '\n';
    }
    return out.str();
}

}  // namespace taxoqa
