#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include "support/test_support.hpp"
#include "taxoqa/lexicon.hpp"
#include "taxoqa/questgen.hpp"

using namespace taxoqa;
using taxoqa::testing::fixture_taxonomy;
using taxoqa::testing::taxonomy_from;

namespace {

std::size_t occurrences(const std::string& text, const std::string& word) {
    const std::regex re("\\b" + word + "\\b");
    return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re),
                                                  std::sregex_iterator()));
}

QAInstance dog_instance() {
    QAInstance inst;
    inst.instance_id = "2370001:1:exist";
    inst.scene_id = "2370001";
    inst.description = "There is a brown dog on a yellow surfboard.";
    inst.positive = instantiate_question(QuestionType::kExist, "dog", std::nullopt);
    inst.source_leaf = "dog";
    return inst;
}

SceneGraph dog_scene() {
    SceneGraph s;
    s.scene_id = "2370001";
    s.objects = {{"1", "dog", {"brown"}, {{"on", "2"}}}, {"2", "surfboard", {"yellow"}, {}}};
    return s;
}

}  // namespace

TEST_CASE("instantiate_question: reference examples") {
    const auto a = instantiate_question(QuestionType::kExist, "dog", std::nullopt);
    CHECK(a.text == "Are there any dogs?");
    CHECK(a.gold == Answer::kYes);
    const auto b = instantiate_question(QuestionType::kExistAttr, "boat", std::string("white"));
    CHECK(b.text == "Are there any boats that are white?");
    CHECK(b.gold == Answer::kYes);
    const auto c = instantiate_question(QuestionType::kExistMaterialNotC, "fork", std::string("metal"));
    CHECK(c.text == "Are there forks that are not made of metal?");
    CHECK(c.gold == Answer::kNo);
}

TEST_CASE("instantiate_question: every type renders its template once") {
    for (auto t : scene_question_types()) {
        std::optional<std::string> attr;
        if (requires_attribute(t)) attr = std::string("red");
        const auto q = instantiate_question(t, "box", attr);
        CHECK(q.gold == (is_counterfactual(t) ? Answer::kNo : Answer::kYes));
        const auto name = std::string(to_string(t));
        CHECK(is_counterfactual(t) == (name.back() == 'C'));
        CHECK(occurrences(q.text, "box") + occurrences(q.text, "boxes") == 1);
        CHECK(q.text.back() == '?');
        if (attr) CHECK(occurrences(q.text, "red") == 1);
        CHECK(parse_question_type(name) == t);
    }
    CHECK(scene_question_types().size() == kSceneQuestionTypeCount);
}

TEST_CASE("instantiate_question: errors") {
    CHECK_THROWS_AS(instantiate_question(QuestionType::kExistAttr, "dog", std::nullopt), MissingAttributeError);
    CHECK_THROWS_AS(instantiate_question(QuestionType::kExist, "dog", std::string("brown")), MissingAttributeError);
    CHECK_THROWS_AS(instantiate_question(QuestionType::kTaxomps, "dog", std::nullopt), UnsupportedTypeError);
    CHECK_THROWS_AS(parse_question_type("existSomething"), UnsupportedTypeError);
}

TEST_CASE("pluralize") {
    CHECK(pluralize("dog") == "dogs");
    CHECK(pluralize("dish") == "dishes");
    CHECK(pluralize("sheep") == "sheep");
    CHECK(pluralize("box") == "boxes");
    CHECK(pluralize("berry") == "berries");
    CHECK(pluralize("toy") == "toys");
    CHECK(pluralize("knife") == "knives");
    CHECK(pluralize("person") == "people");
    CHECK(pluralize("tomato") == "tomatoes");
    CHECK(pluralize("tennis racket") == "tennis rackets");
    CHECK(pluralize("jeans") == "jeans");
    CHECK(pluralize(pluralize("jeans")) == "jeans");
}

TEST_CASE("indefinite articles") {
    CHECK(with_indefinite_article("cat") == "a cat");
    CHECK(with_indefinite_article("animal") == "an animal");
    CHECK(with_indefinite_article("umbrella") == "an umbrella");
    CHECK(with_indefinite_article("unicorn") == "a unicorn");
    CHECK(with_indefinite_article("hour") == "an hour");
}

TEST_CASE("substitute_hypernyms: chain of four") {
    const auto& t = fixture_taxonomy();
    const auto subs = substitute_hypernyms(dog_instance(), dog_scene(), t, 11);
    REQUIRE(subs.size() == 4);
    const auto& chain = t.hypernym_chain("dog");
    for (std::size_t i = 0; i < subs.size(); ++i) {
        CHECK(subs[i].substitution_depth == i + 1);
        CHECK(subs[i].positive.target == chain[i]);
        CHECK(subs[i].positive.gold == Answer::kYes);
        CHECK(subs[i].description == dog_instance().description);
        CHECK(subs[i].parent_instance_id == dog_instance().instance_id);
        CHECK(subs[i].negatives.size() == kNegativesPerQuestion);
    }
    CHECK(subs[1].positive.text == "Are there any mammals?");
    // The text differs only in the surface form of the target.
    for (const auto& s : subs) {
        std::string expected = dog_instance().positive.text;
        expected.replace(expected.find("dogs"), 4, pluralize(s.positive.target));
        CHECK(s.positive.text == expected);
    }
}

TEST_CASE("substitute_hypernyms: empty chain and substituted input") {
    const auto t = taxonomy_from("rock:\ndog: animal\ncat: animal\napple: fruit\ncar: vehicle\nfork: tool\n");
    QAInstance inst = dog_instance();
    inst.source_leaf = "rock";
    inst.positive = instantiate_question(QuestionType::kExist, "rock", std::nullopt);
    SceneGraph s;
    s.objects = {{"1", "rock", {}, {}}};
    CHECK(substitute_hypernyms(inst, s, t, 1).empty());
    inst.substitution_depth = 1;
    CHECK_THROWS_AS(substitute_hypernyms(inst, s, t, 1), DataError);
}

TEST_CASE("substitute_hypernyms: negatives stay wrong relative to the leaf at every depth") {
    const auto& t = fixture_taxonomy();
    const auto leaf_chain = t.hypernym_chain("dog");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        for (const auto& sub : substitute_hypernyms(dog_instance(), dog_scene(), t, seed)) {
            for (const auto& n : sub.negatives) {
                CHECK(n.target != "dog");
                CHECK(std::find(leaf_chain.begin(), leaf_chain.end(), n.target) == leaf_chain.end());
                CHECK_FALSE(t.is_strict_hypernym(n.target, "surfboard"));
                CHECK(n.target != "surfboard");
            }
        }
    }
}

TEST_CASE("sample_negatives: forced, insufficient, deterministic") {
    // Pool for dog: everything outside dog's chain.
    const auto four = taxonomy_from("dog: animal\napple:\ncar:\nfork:\nlamp:\n");
    const auto q = instantiate_question(QuestionType::kExist, "dog", std::nullopt);
    const auto forced = sample_negatives(q, ConceptSet{"dog"}, four, 3);
    REQUIRE(forced);
    std::set<std::string> got;
    for (const auto& n : *forced) {
        got.insert(n.target);
        CHECK(n.gold == Answer::kNo);
        CHECK(n.qtype == q.qtype);
        CHECK(n.attribute == q.attribute);
    }
    CHECK(got == std::set<std::string>{"apple", "car", "fork", "lamp"});

    const auto three = taxonomy_from("dog: animal\napple:\ncar:\nfork:\n");
    CHECK_FALSE(sample_negatives(q, ConceptSet{"dog"}, three, 3));

    const auto ten = taxonomy_from("dog: animal\na1:\na2:\na3:\na4:\na5:\na6:\na7:\na8:\na9:\na10:\n");
    REQUIRE(ten.negative_candidates("dog", {"dog"}).size() == 10);
    const auto r1 = sample_negatives(q, ConceptSet{"dog"}, ten, 7);
    const auto r2 = sample_negatives(q, ConceptSet{"dog"}, ten, 7);
    REQUIRE(r1);
    CHECK(*r1 == *r2);
    std::set<std::string> distinct;
    for (const auto& n : *r1) distinct.insert(n.target);
    CHECK(distinct.size() == 4);
}

TEST_CASE("sample_negatives draws each candidate with equal frequency") {
    const auto ten = taxonomy_from("dog: animal\na1:\na2:\na3:\na4:\na5:\na6:\na7:\na8:\na9:\na10:\n");
    const auto q = instantiate_question(QuestionType::kExist, "dog", std::nullopt);
    std::map<std::string, int> hits;
    const int trials = 20000;
    for (int s = 0; s < trials; ++s) {
        const auto negs = sample_negatives(q, ConceptSet{"dog"}, ten, static_cast<std::uint64_t>(s));
        for (const auto& n : *negs) ++hits[n.target];
    }
    REQUIRE(hits.size() == 10);
    // Each candidate appears with probability 0.4; 5 standard deviations.
    const double expected = trials * 0.4, sd = std::sqrt(trials * 0.4 * 0.6);
    for (const auto& [c, h] : hits) CHECK_MESSAGE(std::abs(h - expected) < 5 * sd, c);
}

TEST_CASE("synthesize_questions: held and unheld attributes") {
    const SceneObject lamp{"5", "lamp", {"white", "on", "metal"}, {}};
    const auto qs = synthesize_questions(lamp);
    std::map<QuestionType, Question> by;
    for (const auto& q : qs) by.emplace(q.qtype, q);
    CHECK(qs.size() == 13);
    CHECK(by.at(QuestionType::kExistAttr).attribute == "white");
    CHECK(by.at(QuestionType::kExistAttrC).attribute != "white");
    CHECK(by.at(QuestionType::kExistAttrNot).attribute != "white");
    CHECK(by.at(QuestionType::kExistAttrNotC).attribute == "white");
    CHECK(by.at(QuestionType::kExistThat).text == "Are there any lamps in the picture that are on?");
    CHECK(by.at(QuestionType::kExistThatC).text == "Is there a lamp that is off?");
    CHECK(by.at(QuestionType::kExistThatNotC).text == "Is there a lamp in the image that is not on?");
    CHECK(by.at(QuestionType::kExistMaterial).text == "Do you see a lamp that is made of metal?");
    CHECK(by.at(QuestionType::kExistMaterialNotC).text == "Are there lamps that are not made of metal?");
    CHECK(by.at(QuestionType::kExistMaterialC).attribute != "metal");
    CHECK(qs == synthesize_questions(lamp));

    const SceneObject plain{"1", "dog", {}, {}};
    const auto only = synthesize_questions(plain);
    REQUIRE(only.size() == 1);
    CHECK(only[0].qtype == QuestionType::kExist);
}

namespace {

// Brute force: among allotments with each entry floor or ceil of its exact
// share, capped by availability and summing to the quota, the minimum squared
// deviation from the exact shares.
double best_deviation(const std::vector<std::size_t>& counts, std::size_t quota) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const std::size_t n = counts.size();
    double best = 1e300;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::size_t sum = 0;
        double dev = 0;
        bool ok = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double exact = quota * counts[i] / total;
            const std::size_t v = static_cast<std::size_t>(std::floor(exact)) + ((mask >> i) & 1u);
            ok = ok && v <= counts[i];
            sum += v;
            dev += (v - exact) * (v - exact);
        }
        if (ok && sum == quota) best = std::min(best, dev);
    }
    return best;
}

double deviation(const std::vector<std::size_t>& counts, const std::vector<std::size_t>& allot, std::size_t quota) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    double dev = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double exact = quota * counts[i] / total;
        dev += (allot[i] - exact) * (allot[i] - exact);
    }
    return dev;
}

std::map<std::string, std::vector<QAInstance>> typed_scene(const std::string& id,
                                                           const std::vector<std::pair<QuestionType, int>>& mix) {
    std::vector<QAInstance> v;
    for (const auto& [t, n] : mix)
        for (int i = 0; i < n; ++i) {
            QAInstance inst;
            inst.instance_id = id + ":" + std::to_string(v.size());
            inst.scene_id = id;
            inst.positive.qtype = t;
            v.push_back(inst);
        }
    return {{id, v}};
}

}  // namespace

TEST_CASE("largest_remainder_allotment matches enumeration") {
    CHECK(largest_remainder_allotment({60, 20}, 40) == std::vector<std::size_t>{30, 10});
    CHECK(best_deviation({60, 20}, 40) == 0.0);
    CHECK(largest_remainder_allotment({5, 5}, 40) == std::vector<std::size_t>{5, 5});

    Rng rng(99);
    for (int round = 0; round < 500; ++round) {
        std::vector<std::size_t> counts(1 + rng.below(8));
        for (auto& c : counts) c = 1 + rng.below(30);
        const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
        const std::size_t quota = 1 + rng.below(total);
        const auto got = largest_remainder_allotment(counts, quota);
        CHECK(std::accumulate(got.begin(), got.end(), std::size_t{0}) == quota);
        for (std::size_t i = 0; i < counts.size(); ++i) CHECK(got[i] <= counts[i]);
        CHECK(deviation(counts, got, quota) == doctest::Approx(best_deviation(counts, quota)).epsilon(1e-12));
    }
}

TEST_CASE("balance_sample") {
    const auto small = typed_scene("a", {{QuestionType::kExist, 10}});
    CHECK(balance_sample(small, 40, 1).size() == 10);

    const auto big = typed_scene("b", {{QuestionType::kExist, 60}, {QuestionType::kExistAttr, 20}});
    const auto picked = balance_sample(big, 40, 1);
    REQUIRE(picked.size() == 40);
    const auto exist = std::count_if(picked.begin(), picked.end(),
                                     [](const QAInstance& i) { return i.positive.qtype == QuestionType::kExist; });
    CHECK(exist == 30);
    CHECK(picked == balance_sample(big, 40, 1));
    CHECK(picked != balance_sample(big, 40, 2));
    // Input order is preserved.
    CHECK(std::is_sorted(picked.begin(), picked.end(), [](const QAInstance& x, const QAInstance& y) {
        return std::stoi(x.instance_id.substr(2)) < std::stoi(y.instance_id.substr(2));
    }));
}

TEST_CASE("taxomps: question text and negatives") {
    const auto& t = fixture_taxonomy();
    CHECK(taxomps_question("cat", "feline", Answer::kYes).text == "Is it true that a cat is a feline?");
    CHECK(taxomps_question("cat", "animal", Answer::kYes).text == "Is it true that a cat is an animal?");
    CHECK(taxomps_question("cat", "vehicle", Answer::kNo).text == "Is it true that a cat is a vehicle?");

    const auto r = generate_taxomps(t, 42);
    CHECK(r.instances.size() + r.skipped.size() == t.hyponym_hypernym_pairs().size());
    bool saw_vehicle = false;
    for (const auto& inst : r.instances) {
        CHECK(inst.negatives.size() == 4);
        CHECK(inst.description.empty());
        CHECK(inst.positive.gold == Answer::kYes);
        const auto& chain = t.hypernym_chain(inst.source_leaf);
        CHECK(chain.at(inst.substitution_depth - 1) == inst.positive.target);
        std::set<std::string> distinct;
        for (const auto& n : inst.negatives) {
            distinct.insert(n.target);
            CHECK(n.gold == Answer::kNo);
            CHECK(std::find(chain.begin(), chain.end(), n.target) == chain.end());
            CHECK(n.target != inst.source_leaf);
            for (const auto& tag : t.attribute_signature(inst.positive.target))
                CHECK(t.attribute_signature(n.target).contains(tag));
            if (inst.source_leaf == "cat" && n.target == "vehicle") {
                saw_vehicle = true;
                CHECK(n.text == "Is it true that a cat is a vehicle?");
            }
        }
        CHECK(distinct.size() == 4);
    }
    (void)saw_vehicle;
    CHECK(r.instances == generate_taxomps(t, 42).instances);
}

TEST_CASE("taxomps: 276 pairs give 1380 questions") {
    // 69 leaves with four-step chains spread over separate trees.
    std::ostringstream text;
    for (int leaf = 0; leaf < 69; ++leaf) {
        const int tree = leaf % 3;
        text << "leaf" << leaf << ": mid" << leaf << ", grp" << tree << "_" << leaf % 6 << ", top" << tree
             << ", root" << tree << "\n";
    }
    const auto t = taxonomy_from(text.str());
    REQUIRE(t.hyponym_hypernym_pairs().size() == 276);
    const auto r = generate_taxomps(t, 5);
    CHECK(r.skipped.empty());
    REQUIRE(r.instances.size() == 276);
    std::size_t questions = 0;
    for (const auto& inst : r.instances) questions += 1 + inst.negatives.size();
    CHECK(questions == 1380);
}

TEST_CASE("dataset records round trip") {
    const auto& t = fixture_taxonomy();
    auto inst = dog_instance();
    inst.negatives = *sample_negatives(inst.positive, dog_scene(), t, 3);
    std::vector<QAInstance> all{inst};
    for (auto& s : substitute_hypernyms(inst, dog_scene(), t, 3)) all.push_back(s);
    std::ostringstream out;
    write_dataset(out, all);
    std::istringstream in(out.str());
    CHECK(read_dataset(in) == all);

    const auto j = to_json(inst);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys.at(0) == "instance_id");
    CHECK(keys.at(1) == "scene_id");

    std::istringstream bad(out.str() + "{not json\n");
    try {
        read_dataset(bad);
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == all.size() + 1);
    }
}
