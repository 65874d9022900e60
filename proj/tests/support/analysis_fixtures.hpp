#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "taxoqa/dump.hpp"
#include "taxoqa/random.hpp"
#include "taxoqa/taxonomy.hpp"

// Synthetic embedding dumps with planted structure.
namespace taxoqa::testing::analysis_fixtures {

inline EmbeddingDump make_dump(DumpRole role, Eigen::MatrixXd values, std::vector<std::string> labels,
                        std::vector<RowMeta> meta = {}, std::optional<std::size_t> layer = std::nullopt) {
    EmbeddingDump d;
    d.manifest.model_id = "toy";
    d.manifest.role = role;
    d.manifest.layer = layer;
    d.manifest.rows = static_cast<std::size_t>(values.rows());
    d.manifest.dims = static_cast<std::size_t>(values.cols());
    d.manifest.labels = labels;
    d.manifest.row_meta = std::move(meta);
    d.payload = stats::Matrix(std::move(values), std::move(labels));
    return d;
}

inline Eigen::VectorXd gaussian(Rng& rng, Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

// Each concept is its own random vector plus those of all its ancestors, so
// cosine similarity follows the hierarchy.
inline EmbeddingDump hierarchical_unembedding(const Taxonomy& t, Eigen::Index dims, double noise, std::uint64_t seed) {
    Rng rng(seed);
    std::map<ConceptId, Eigen::VectorXd> own;
    for (const auto& c : t.concepts()) own[c] = gaussian(rng, dims);
    std::vector<std::string> labels;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(t.concepts().size()) + 20, dims);
    Eigen::Index r = 0;
    for (const auto& c : t.concepts()) {
        Eigen::VectorXd v = own[c];
        for (const auto& a : t.ancestors(c)) v += own[a];
        m.row(r++) = (v + noise * gaussian(rng, dims)).transpose();
        labels.push_back(c);
    }
    // Extra vocabulary rows outside the taxonomy.
    for (int k = 0; k < 20; ++k) {
        m.row(r++) = gaussian(rng, dims).transpose();
        labels.push_back("tok" + std::to_string(k));
    }
    return make_dump(DumpRole::kUnembedding, std::move(m), std::move(labels));
}

// Four rows per instance in 4-D: hyponym (1,0,0,0), a second hyponym mention
// along the fourth axis, hypernym at cosine sh and negative at cosine sn. The
// second mention is orthogonal to both, so it only wins when a cosine is negative.
inline EmbeddingDump similarity_layer(const std::vector<std::string>& ids, const std::vector<double>& sh,
                               const std::vector<double>& sn, std::size_t layer) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(ids.size() * 4), 4);
    std::vector<RowMeta> meta;
    std::vector<std::string> labels;
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        m.row(r++) << 1, 0, 0, 0;
        m.row(r++) << 0, 0, 0, 1;
        m.row(r++) << sh[i], std::sqrt(1 - sh[i] * sh[i]), 0, 0;
        m.row(r++) << sn[i], 0, std::sqrt(1 - sn[i] * sn[i]), 0;
        meta.push_back({ids[i], "leaf", 0, "hyponym", "positive", "", {}, {}});
        meta.push_back({ids[i], "leaf", 1, "hyponym", "positive", "", {}, {}});
        meta.push_back({ids[i], "hyper", 0, "hypernym", "positive", "", {}, {}});
        meta.push_back({ids[i], "neg", 0, "negative", "neg1", "", {}, {}});
        for (int k = 0; k < 4; ++k) labels.push_back(ids[i]);
    }
    return make_dump(DumpRole::kLayerwiseContextual, std::move(m), std::move(labels), std::move(meta), layer);
}

struct LayerFixture {
    std::vector<EmbeddingDump> dumps;
    std::vector<std::pair<std::string, int>> subset;
    std::vector<double> informative_delta;
};

// Layer 1 deltas drive correctness through a logistic link; layer 0 is unrelated.
inline LayerFixture layer_fixture(std::size_t n, double slope, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> ids;
    std::vector<double> sh0, sn0, sh1, sn1;
    LayerFixture f;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("x" + std::to_string(i));
        sh0.push_back(0.05 + 0.9 * rng.uniform());
        sn0.push_back(0.05 + 0.9 * rng.uniform());
        sh1.push_back(0.05 + 0.9 * rng.uniform());
        sn1.push_back(0.05 + 0.9 * rng.uniform());
        const double delta = sh1.back() - sn1.back();
        f.informative_delta.push_back(delta);
        const double p = 1 / (1 + std::exp(-slope * delta));
        f.subset.emplace_back(ids.back(), rng.uniform() < p ? 1 : 0);
    }
    // Deliberately out of order.
    f.dumps.push_back(similarity_layer(ids, sh1, sn1, 1));
    f.dumps.push_back(similarity_layer(ids, sh0, sn0, 0));
    return f;
}

inline EmbeddingDump question_dump(std::size_t per_class, double offset, std::uint64_t seed, const Eigen::MatrixXd* rot = nullptr) {
    Rng rng(seed);
    const Eigen::Index dims = 10;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(2 * per_class), dims);
    std::vector<RowMeta> meta;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const bool hyper = i % 2 == 0;
        Eigen::VectorXd v = gaussian(rng, dims);
        v(0) += hyper ? offset : -offset;
        m.row(static_cast<Eigen::Index>(i)) = v.transpose();
        meta.push_back({"q" + std::to_string(i), "", 0, hyper ? "hypernym" : "negative", "", "", {}, {}});
        labels.push_back("q" + std::to_string(i));
    }
    if (rot) m = m * *rot;
    return make_dump(DumpRole::kQuestionFinal, std::move(m), std::move(labels), std::move(meta));
}

inline constexpr const char* kVisualTaxonomy =
    "dog: canine, mammal\nwolf: canine, mammal\ncat: feline, mammal\nlion: feline, mammal\n";

// Two images per leaf of kVisualTaxonomy: dog e1, wolf e3, cat and lion e2.
// By hand: canine pairs 0, feline pairs 1, dog and wolf to mammal 0, cat and
// lion to mammal 1/sqrt(3).
inline EmbeddingDump visual_dump() {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(8, 3);
    std::vector<RowMeta> meta;
    std::vector<std::string> labels;
    const std::vector<std::pair<std::string, int>> leaves = {{"dog", 0}, {"wolf", 2}, {"cat", 1}, {"lion", 1}};
    Eigen::Index r = 0;
    for (const auto& [leaf, axis] : leaves)
        for (int k = 0; k < 2; ++k) {
            m(r, axis) = 1.0;
            meta.push_back({"", leaf, 0, "", "", leaf + std::to_string(k), {}, {}});
            labels.push_back(leaf);
            ++r;
        }
    return make_dump(DumpRole::kVisionPatch, m, labels, meta);
}

}  // namespace taxoqa::testing::analysis_fixtures
