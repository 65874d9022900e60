#include "doctest.h"

#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "support/analysis_fixtures.hpp"
#include "support/metric_fixtures.hpp"
#include "support/test_support.hpp"
#include "taxoqa/questgen.hpp"
#include "taxoqa/repranalysis.hpp"

using namespace taxoqa;
using namespace taxoqa::analysis;
using taxoqa::testing::fixture_taxonomy;
using taxoqa::testing::taxonomy_from;
using namespace taxoqa::testing::analysis_fixtures;

namespace {

double cos(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

}  // namespace

TEST_CASE("taxonomy_similarity") {
    const auto& t = fixture_taxonomy();
    const auto m = taxonomy_similarity(t, {"dog", "wolf", "cat", "apple", "mammal"});
    CHECK(m.values(0, 0) == 1.0);
    CHECK(m.values(0, 1) == doctest::Approx(1.0 / 3));  // dog-canine-wolf
    CHECK(m.values(0, 2) == doctest::Approx(1.0 / 5));  // via mammal
    CHECK(m.values(0, 4) == doctest::Approx(1.0 / 3));
    CHECK(m.values(0, 3) == 0.0);  // animal and food trees never meet
    CHECK(m.values == m.values.transpose());
    CHECK_THROWS_AS(taxonomy_similarity(t, {"dog", "unicorn"}), UnknownConceptError);
}

TEST_CASE("hierarchy RSA") {
    const auto& t = fixture_taxonomy();
    const auto a = hierarchical_unembedding(t, 12, 0.0, 1);
    HierarchyRsaOptions opt;
    opt.subsets = 20;
    opt.subset_size = 30;
    opt.seed = 5;

    SUBCASE("identical and linearly transformed dumps agree perfectly") {
        // Whitening removes any invertible linear map up to a rotation, which cosine ignores.
        Rng rng(8);
        Eigen::MatrixXd A(12, 12);
        for (Eigen::Index i = 0; i < 12; ++i)
            for (Eigen::Index j = 0; j < 12; ++j) A(i, j) = rng.normal();
        auto b = a;
        b.payload.values = a.payload.values * A;
        const auto r = hierarchy_rsa_report(a, b, t, opt);
        CHECK(r.vlm_lm.mean == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.vlm_taxonomy.mean == doctest::Approx(r.lm_taxonomy.mean).epsilon(1e-9));
        CHECK((r.vlm_similarity.values - r.lm_similarity.values).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(r.vlm_taxonomy.per_subset.size() == 20);
        CHECK(r.vlm_taxonomy.sd.has_value());
        CHECK(r.concepts.size() == t.concepts().size());
    }
    SUBCASE("agreement with the taxonomy falls as noise grows") {
        std::vector<double> ladder;
        for (double noise : {0.0, 2.0, 8.0}) {
            const auto n = hierarchical_unembedding(t, 12, noise, 2);
            ladder.push_back(hierarchy_rsa_report(n, n, t, opt).vlm_taxonomy.mean);
        }
        CHECK(ladder[0] > 0.3);
        CHECK(ladder[0] > ladder[1]);
        CHECK(ladder[1] > ladder[2]);
        CHECK(std::abs(ladder[2]) < 0.2);
    }
    SUBCASE("mismatched concept sets") {
        auto b = a;
        b.manifest.labels[0] = "zzz";
        b.payload.row_labels[0] = "zzz";
        CHECK_THROWS_AS(hierarchy_rsa_report(a, b, t, opt), DataError);
        auto s = a;
        s.manifest.role = DumpRole::kStatic;
        CHECK_THROWS_AS(hierarchy_rsa_report(s, a, t, opt), DataError);
    }
    SUBCASE("more dimensions than rows needs the ridge option") {
        const auto wide = hierarchical_unembedding(taxonomy_from("a: b, c\nd: b, c\ne: c\n"), 40, 0.0, 3);
        CHECK_THROWS_AS(hierarchy_rsa_report(wide, wide, taxonomy_from("a: b, c\nd: b, c\ne: c\n")),
                        stats::RankDeficientError);
    }
}

TEST_CASE("static delta") {
    const auto& t = fixture_taxonomy();
    const auto a = hierarchical_unembedding(t, 12, 0.5, 4);
    const auto a_static = make_dump(DumpRole::kStatic, a.payload.values, a.manifest.labels);

    SUBCASE("deltas match a direct recomputation") {
        const auto r = static_delta_report(a_static, nullptr, t, 11);
        CHECK(r.rows.size() + r.skipped.size() == t.hyponym_hypernym_pairs().size());
        REQUIRE(!r.rows.empty());
        std::map<std::string, Eigen::VectorXd> vec;
        for (std::size_t i = 0; i < a.manifest.labels.size(); ++i)
            vec[a.manifest.labels[i]] = a.payload.values.row(static_cast<Eigen::Index>(i)).transpose();
        double total = 0;
        for (const auto& row : r.rows) {
            const auto negs = taxomps_negative_concepts(t, row.hyponym, row.hypernym, 11);
            REQUIRE(negs);
            CHECK(*negs == row.negatives);
            double neg = 0;
            for (const auto& n : *negs) neg += cos(vec[row.hyponym], vec[n]);
            const double expected = cos(vec[row.hyponym], vec[row.hypernym]) - neg / static_cast<double>(negs->size());
            CHECK(row.delta_a == doctest::Approx(expected).epsilon(1e-12));
            total += expected;
        }
        CHECK(r.mean_a == doctest::Approx(total / static_cast<double>(r.rows.size())));
        // Hierarchical vectors put hypernyms closer than unrelated concepts.
        CHECK(r.mean_a > 0.1);
        CHECK_FALSE(r.t_test);
    }
    SUBCASE("identical models give t = 0 and p = 1") {
        const auto r = static_delta_report(a_static, &a_static, t, 11);
        REQUIRE(r.t_test);
        CHECK(r.t_test->t == 0.0);
        CHECK(r.t_test->p == 1.0);
        CHECK(*r.mean_b == r.mean_a);
    }
    SUBCASE("paired test against a direct t statistic") {
        const auto noisy = hierarchical_unembedding(t, 12, 3.0, 4);
        const auto b = make_dump(DumpRole::kStatic, noisy.payload.values, noisy.manifest.labels);
        const auto r = static_delta_report(a_static, &b, t, 11);
        std::vector<double> d;
        for (const auto& row : r.rows) d.push_back(row.delta_a - *row.delta_b);
        const double n = static_cast<double>(d.size());
        const double md = std::accumulate(d.begin(), d.end(), 0.0) / n;
        double ss = 0;
        for (double v : d) ss += (v - md) * (v - md);
        const double tt = md / std::sqrt(ss / (n - 1) / n);
        boost::math::students_t dist(n - 1);
        const double p = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(tt)));
        REQUIRE(r.t_test);
        CHECK(r.t_test->t == doctest::Approx(tt).epsilon(1e-10));
        CHECK(r.t_test->p == doctest::Approx(p).epsilon(1e-8));
        CHECK(r.mean_a > *r.mean_b);
    }
    SUBCASE("copies and orthogonal negatives give delta 1") {
        // One leaf per tree, every concept gets its tree's one-hot vector: the
        // hyponym copies its hypernym and all negatives come from other trees.
        const auto small = taxonomy_from("a1: a\nb1: b\nc1: c\nd1: d\ne1: e\n");
        std::vector<std::string> labels;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(10, 5);
        Eigen::Index r = 0;
        for (const auto& c : small.concepts()) {
            m(r++, c[0] - 'a') = 1.0;
            labels.push_back(c);
        }
        const auto d = make_dump(DumpRole::kStatic, m.topRows(r), labels);
        const auto rep = static_delta_report(d, nullptr, small, 1);
        REQUIRE(rep.rows.size() == 5);
        for (const auto& row : rep.rows) CHECK(row.delta_a == doctest::Approx(1.0));
    }
    SUBCASE("missing concept") {
        auto broken = a_static;
        broken.manifest.labels[3] = "zzz";
        CHECK_THROWS_AS(static_delta_report(broken, nullptr, t, 11), DataError);
    }
}

TEST_CASE("similarity features") {
    const auto d = similarity_layer({"a", "b"}, {0.6, -0.2}, {0.3, 0.5}, 2);
    const auto f = similarity_features(d, {"b", "a"});
    REQUIRE(f.size() == 2);
    CHECK(f[0].instance_id == "b");
    CHECK(f[0].layer == 2);
    // "a": the first mention carries both planted cosines.
    CHECK(f[1].sim_hyper == doctest::Approx(0.6));
    CHECK(f[1].sim_neg_max == doctest::Approx(0.3));
    CHECK(f[1].delta == doctest::Approx(0.3));
    // "b": the orthogonal mention's 0 beats the planted -0.2.
    CHECK(f[0].sim_hyper == doctest::Approx(0.0));
    CHECK(f[0].sim_neg_max == doctest::Approx(0.5));
    CHECK(f[0].delta == doctest::Approx(-0.5));
    CHECK_THROWS_AS(similarity_features(d, {"c"}), DataError);
}

TEST_CASE("odds subset") {
    // x0 correct with two substitutions, x1 wrong with one.
    auto results = taxoqa::testing::results_from_chains({{true, true, false}, {false, true}});
    for (auto& r : results)
        if (r.substitution_depth > 0) r.positive_gold_yes = r.instance_id == "x0@2" ? true : false;
    const auto s = odds_subset(InstanceSet::build(results));
    // x0@2 has a "Yes" positive and x1's original failed.
    REQUIRE(s.size() == 1);
    CHECK(s[0] == std::pair<std::string, int>{"x0@1", 1});
}

TEST_CASE("layerwise odds") {
    SUBCASE("informative layer") {
        const auto f = layer_fixture(400, 4.0, 21);
        const auto r = layerwise_odds_report(f.dumps, f.subset);
        REQUIRE(r.layers.size() == 2);
        CHECK(r.layers[0].layer == 0);
        CHECK(r.layers[1].layer == 1);
        CHECK(r.n_instances == 400);
        CHECK(r.layers[1].odds_ratio > 1.0);
        CHECK(r.layers[1].p_value < 0.05);
        CHECK(r.layers[1].ci_low > 1.0);
        CHECK(r.layers[1].ci_low < r.layers[1].odds_ratio);
        CHECK(r.layers[1].odds_ratio < r.layers[1].ci_high);

        // Same fit as regressing directly on the planted deltas.
        Eigen::MatrixXd x(400, 1);
        std::vector<int> y;
        for (std::size_t i = 0; i < 400; ++i) {
            x(static_cast<Eigen::Index>(i), 0) = f.informative_delta[i];
            y.push_back(f.subset[i].second);
        }
        const auto direct = stats::logistic_fit(stats::Matrix(x), y);
        CHECK(r.layers[1].fit.coefficients[1] == doctest::Approx(direct.coefficients[1]).epsilon(1e-5));
        const double b = direct.coefficients[1], se = direct.standard_errors[1];
        CHECK(r.layers[1].ci_low == doctest::Approx(std::exp(b - 1.959963984540054 * se)).epsilon(1e-5));
        CHECK(r.layers[1].ci_high == doctest::Approx(std::exp(b + 1.959963984540054 * se)).epsilon(1e-5));
    }
    SUBCASE("uninformative layers cover OR = 1") {
        int covered = 0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto f = layer_fixture(200, 4.0, 100 + s);
            const auto r = layerwise_odds_report(f.dumps, f.subset);
            covered += r.layers[0].ci_low <= 1.0 && 1.0 <= r.layers[0].ci_high;
        }
        CHECK(covered >= 18);
    }
    SUBCASE("layer set must be 0..L-1") {
        auto f = layer_fixture(50, 1.0, 3);
        f.dumps[0].manifest.layer = 5;
        CHECK_THROWS_AS(layerwise_odds_report(f.dumps, f.subset), DataError);
        CHECK_THROWS_AS(layerwise_odds_report({}, f.subset), DataError);
    }
}

TEST_CASE("separability") {
    SUBCASE("well separated classes") {
        const auto r = separability_report(question_dump(60, 8.0, 1));
        CHECK(r.svm.svm_error == 0.0);
        CHECK(r.coordinates.cols() == 2);
        CHECK(std::count(r.labels.begin(), r.labels.end(), 1) == 60);
    }
    SUBCASE("indistinguishable classes") {
        const auto r = separability_report(question_dump(100, 0.0, 2));
        CHECK(r.svm.svm_error > 0.3);
    }
    SUBCASE("rotation invariance") {
        Rng rng(3);
        Eigen::MatrixXd g(10, 10);
        for (Eigen::Index i = 0; i < 10; ++i)
            for (Eigen::Index j = 0; j < 10; ++j) g(i, j) = rng.normal();
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
        const auto a = separability_report(question_dump(60, 1.5, 4));
        const auto b = separability_report(question_dump(60, 1.5, 4, &q));
        CHECK((a.pca.explained_variance[0]) == doctest::Approx(b.pca.explained_variance[0]).epsilon(1e-9));
        CHECK((a.pca.explained_variance[1]) == doctest::Approx(b.pca.explained_variance[1]).epsilon(1e-9));
        CHECK((a.coordinates.cwiseAbs() - b.coordinates.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(a.svm.svm_error == doctest::Approx(b.svm.svm_error).epsilon(0.02));
    }
    SUBCASE("one class only") {
        auto d = question_dump(5, 1.0, 5);
        for (auto& m : d.manifest.row_meta) m.kind = "negative";
        CHECK_THROWS_AS(separability_report(d), NumericError);
    }
}

TEST_CASE("visual similarity") {
    const auto t = taxonomy_from(kVisualTaxonomy);
    const auto membership = leaf_membership(t);
    CHECK(membership.at("canine") == std::vector<ConceptId>{"dog", "wolf"});
    CHECK(membership.at("mammal") == std::vector<ConceptId>{"cat", "dog", "lion", "wolf"});

    const auto dump = visual_dump();

    std::map<PairKey, double> acc;
    for (const auto& [leaf, hyper] : t.hyponym_hypernym_pairs()) acc[{leaf, hyper}] = 0.5;
    acc[{"horse", "mammal"}] = 0.9;

    const auto rep = visual_similarity_report(dump, membership, acc);
    REQUIRE(rep.records.size() == 8);
    CHECK(rep.skipped == std::vector<std::string>{"horse:mammal"});
    std::map<std::string, double> sim;
    for (const auto& rec : rep.records) sim[rec.hyponym + ":" + rec.hypernym] = rec.viz_sim;
    CHECK(sim["dog:canine"] == doctest::Approx(0.0));
    CHECK(sim["wolf:canine"] == doctest::Approx(0.0));
    CHECK(sim["cat:feline"] == doctest::Approx(1.0));
    CHECK(sim["lion:feline"] == doctest::Approx(1.0));
    CHECK(sim["dog:mammal"] == doctest::Approx(0.0));
    CHECK(sim["cat:mammal"] == doctest::Approx(1 / std::sqrt(3.0)));
    CHECK(sim["lion:mammal"] == doctest::Approx(1 / std::sqrt(3.0)));
    CHECK(rep.median_viz_sim == doctest::Approx(0.5 / std::sqrt(3.0)));
    CHECK(rep.cohesion.at("canine") == 0.0);
    CHECK(rep.cohesion.at("feline") == 1.0);
    CHECK(rep.cohesion.at("mammal") == 0.5);
    CHECK(rep.regression.has_value());

    // Audit: cat:mammal averages the dog, wolf and lion images, never its own.
    CHECK(rep.prototype_rows.at("cat:mammal") == std::vector<std::size_t>{0, 1, 2, 3, 6, 7});
    for (const auto& rec : rep.records) CHECK(rec.leaf_images == 2);

    VisualOptions incl;
    incl.exclude_leaf_images = false;
    const auto with_leaf = visual_similarity_report(dump, membership, acc, incl);
    for (const auto& rec : with_leaf.records)
        if (rec.hyponym == "dog" && rec.hypernym == "canine") CHECK(rec.viz_sim == doctest::Approx(1 / std::sqrt(2.0)));
}

TEST_CASE("cohesion and median by hand") {
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 2, 3}) == 2.5);
    CHECK_THROWS_AS(median({}), NumericError);
    const std::map<PairKey, double> s = {
        {{"a", "h"}, 0.9}, {{"b", "h"}, 0.5}, {{"c", "h"}, 0.1}, {{"d", "g"}, 0.5}, {{"e", "g"}, 0.7}};
    // Median 0.5; a value equal to the median does not count.
    CHECK(cohesion(s, "h") == doctest::Approx(1.0 / 3));
    CHECK(cohesion(s, "g") == doctest::Approx(0.5));
    CHECK_THROWS_AS(cohesion(s, "x"), DataError);
}

TEST_CASE("conditional accuracy by pair") {
    MetricsReport m;
    m.per_pair = {{"dog:canine", 4, 3, 2, 1}, {"cat:feline", 1, 0, 0, 0}};
    const auto c = conditional_accuracy_by_pair(m);
    REQUIRE(c.size() == 1);
    CHECK(c.at({"dog", "canine"}) == 0.5);
}

TEST_CASE("report serialisation") {
    const auto f = layer_fixture(60, 2.0, 9);
    const auto r = layerwise_odds_report(f.dumps, f.subset);
    const auto j = to_json(r);
    CHECK(j["layers"].size() == 2);
    CHECK(j["layers"][1]["layer"] == 1);
    const auto csv = layer_odds_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.rfind("layer,n,coefficient", 0) == 0);

    stats::Matrix sm(Eigen::MatrixXd::Identity(2, 2), {"a,b", "c"}, {"a,b", "c"});
    CHECK(matrix_csv(sm) == "label,\"a,b\",c\n\"a,b\",1,0\nc,0,1\n");
}
