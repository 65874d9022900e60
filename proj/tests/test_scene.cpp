#include "doctest.h"

#include <map>
#include <regex>
#include <set>

#include "support/test_support.hpp"
#include "taxoqa/scene.hpp"

using namespace taxoqa;
using nlohmann::json;
using taxoqa::testing::fixture_path;
using taxoqa::testing::fixture_taxonomy;

namespace {

SceneObject make(std::string id, std::string name, std::vector<std::string> attrs = {},
                 std::vector<Relation> rels = {}) {
    return SceneObject{std::move(id), std::move(name), std::move(attrs), std::move(rels)};
}

SceneGraph scene_of(std::vector<SceneObject> objects) {
    SceneGraph s;
    s.scene_id = "s";
    s.objects = std::move(objects);
    return s;
}

std::size_t count_word(const std::string& text, const std::string& word) {
    const std::regex re("\\b" + word + "\\b");
    return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re),
                                                  std::sregex_iterator()));
}

}  // namespace

TEST_CASE("parse: minimal document") {
    const auto doc = json::parse(R"({"1": {"objects": {"7": {"name": "dog"}}}})");
    const auto scenes = parse_scene_graphs(doc);
    REQUIRE(scenes.size() == 1);
    CHECK(scenes[0].scene_id == "1");
    REQUIRE(scenes[0].objects.size() == 1);
    CHECK(scenes[0].objects[0].name == "dog");
    CHECK(scenes[0].objects[0].attributes.empty());
}

TEST_CASE("parse: dangling relation target") {
    const auto doc = json::parse(
        R"({"1": {"objects": {"7": {"name": "dog", "relations": [{"name": "on", "object": "8"}]}}}})");
    CHECK_THROWS_AS(parse_scene_graphs(doc), DanglingRelationError);
}

TEST_CASE("parse: schema errors name the offending path") {
    try {
        parse_scene_graphs(json::parse(R"({"1": {"objects": {"7": {"attributes": []}}}})"));
        FAIL("expected schema error");
    } catch (const SchemaError& e) {
        CHECK(e.path() == "/1/objects/7/name");
    }
    try {
        parse_scene_graphs(json::parse(R"({"1": {"objects": {"7": {"name": "dog", "attributes": [3]}}}})"));
        FAIL("expected schema error");
    } catch (const SchemaError& e) {
        CHECK(e.path() == "/1/objects/7/attributes/0");
    }
    CHECK_THROWS_AS(parse_scene_graphs(json::parse(R"({"1": {"objects": {}}})")), SchemaError);
    CHECK_THROWS_AS(parse_scene_graphs(json::parse(R"([1, 2])")), SchemaError);
}

TEST_CASE("parse: five-object fixture and lossless round trip") {
    const auto scenes = parse_scene_graph_file(fixture_path("scenes/2370001.json"));
    REQUIRE(scenes.size() == 1);
    const auto& s = scenes[0];
    CHECK(s.objects.size() == 5);
    const auto& dog = s.object("1");
    CHECK(dog.name == "dog");
    REQUIRE(dog.relations.size() == 1);
    CHECK(s.object(dog.relations[0].target_object_id).name == "surfboard");

    const json again = {{s.scene_id, scene_to_json(s)}};
    const auto reparsed = parse_scene_graphs(again);
    REQUIRE(reparsed.size() == 1);
    CHECK(reparsed[0] == s);
}

TEST_CASE("round trip holds for random scenes") {
    Rng rng(77);
    const auto& t = fixture_taxonomy();
    for (int i = 0; i < 50; ++i) {
        const auto s = taxoqa::testing::random_scene(rng, t, "r" + std::to_string(i), 12);
        const auto back = parse_scene_graphs(json{{s.scene_id, scene_to_json(s)}});
        REQUIRE(back.size() == 1);
        CHECK(back[0] == s);
    }
}

TEST_CASE("filter_scene") {
    std::vector<SceneObject> many;
    for (int i = 0; i < 21; ++i) many.push_back(make(std::to_string(100 + i), "thing" + std::to_string(i)));
    CHECK(filter_scene(scene_of(many)).reason == FilterReason::kTooManyObjects);
    many.pop_back();
    CHECK(filter_scene(scene_of(many)).accepted);

    const auto dup = scene_of({make("1", "dog"), make("2", "dog")});
    const auto v = filter_scene(dup);
    CHECK_FALSE(v.accepted);
    CHECK(v.reason == FilterReason::kDuplicateLabels);

    const auto ok = filter_scene(scene_of({make("1", "dog"), make("2", "table"), make("3", "cup")}));
    CHECK(ok.accepted);
    CHECK(ok.reason == FilterReason::kOk);
}

TEST_CASE("filter_scene accepts <=20 distinct and rejects 21+ across sizes") {
    for (std::size_t n = 1; n <= 30; ++n) {
        std::vector<SceneObject> objs;
        for (std::size_t i = 0; i < n; ++i) objs.push_back(make(std::to_string(1000 + i), "o" + std::to_string(i)));
        CHECK(filter_scene(scene_of(objs)).accepted == (n <= 20));
    }
}

TEST_CASE("filter_question") {
    const auto& t = fixture_taxonomy();
    const auto s = scene_of({make("1", "dog"), make("2", "table")});
    CHECK(filter_question(s, t, {{"1", "2"}, "yes"}).reason == FilterReason::kMultiObjectQuestion);
    CHECK(filter_question(s, t, {{"1"}, "yes"}).reason == FilterReason::kOk);
    CHECK(filter_question(s, t, {{"1"}, "brown"}).reason == FilterReason::kUnsupportedAnswerType);

    const auto pets = scene_of({make("1", "dog"), make("2", "cat")});
    CHECK(filter_question(pets, t, {{"1"}, "no"}).reason == FilterReason::kHypernymOverlap);

    // Another object named by one of the target's hypernyms.
    const auto named = scene_of({make("1", "dog"), make("2", "animal")});
    CHECK(filter_question(named, t, {{"1"}, "yes"}).reason == FilterReason::kHypernymOverlap);
    CHECK(filter_question(named, t, {{"2"}, "yes"}).reason == FilterReason::kHypernymOverlap);

    // Objects outside the taxonomy carry no hypernyms.
    const auto sky = scene_of({make("1", "dog"), make("2", "sky")});
    CHECK(filter_question(sky, t, {{"1"}, "yes"}).accepted);
}

TEST_CASE("render: single object") {
    CHECK(render_description(scene_of({make("1", "dog", {"brown"})})) == "There is a brown dog.");
    CHECK(render_description(scene_of({make("1", "apple", {})})) == "There is an apple.");
    CHECK(render_description(scene_of({make("1", "cat", {"orange"})})) == "There is an orange cat.");
    CHECK(render_description(scene_of({make("1", "jeans", {"blue"})})) == "There are blue jeans.");
}

TEST_CASE("render: relation folds into the subject's introduction") {
    const auto s = scene_of({make("1", "dog", {"brown"}, {{"on", "2"}}), make("2", "surfboard", {"yellow"})});
    const auto text = render_description(s);
    CHECK(text == "There is a brown dog on a yellow surfboard.");
    CHECK(text.find("dog on a yellow surfboard") != std::string::npos);
}

TEST_CASE("render: later relations and known targets") {
    const auto s = scene_of({make("1", "table", {}, {}), make("2", "cup", {"white"}, {{"on", "1"}, {"near", "3"}}),
                             make("3", "man", {}, {{"has", "4"}}), make("4", "hat", {"black"})});
    CHECK(render_description(s) ==
          "There is a table. There is a white cup on the table. The cup is near a man. "
          "The man has a black hat.");
}

TEST_CASE("render: deterministic and complete on the bundled fixtures") {
    const auto& t = fixture_taxonomy();
    for (const auto& entry : std::filesystem::directory_iterator(fixture_path("scenes"))) {
        for (const auto& s : parse_scene_graph_file(entry.path().string())) {
            const auto a = render_description(s, 1);
            CHECK(a == render_description(s, 1));
            // Each object is introduced once, each attribute stated once.
            std::map<std::string, std::size_t> expected_attr;
            std::set<std::string> predicates;
            for (const auto& o : s.objects) {
                for (const auto& at : o.attributes) ++expected_attr[at];
                for (const auto& r : o.relations) predicates.insert(r.predicate);
            }
            for (const auto& [attr, n] : expected_attr) {
                bool shared = false;
                for (const auto& p : predicates) shared = shared || count_word(p, attr) > 0;
                if (!shared) CHECK_MESSAGE(count_word(a, attr) == n, attr << " in " << a);
            }
            for (const auto& o : s.objects) CHECK(count_word(a, o.name) >= 1);
            // No taxonomy concept outside the scene is mentioned.
            const auto names = s.concept_names();
            for (const auto& c : t.concepts())
                if (!names.contains(c)) CHECK_MESSAGE(count_word(a, c) == 0, c << " in " << a);
        }
    }
}

TEST_CASE("render mentions no absent concept on random scenes") {
    const auto& t = fixture_taxonomy();
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto s = taxoqa::testing::random_scene(rng, t, "r", 20);
        const auto text = render_description(s);
        const auto names = s.concept_names();
        for (const auto& c : t.concepts())
            if (!names.contains(c)) CHECK_MESSAGE(count_word(text, c) == 0, c << " in " << text);
        std::size_t relations = 0;
        for (const auto& o : s.objects) relations += o.relations.size();
        CHECK(count_word(text, "near") == relations);
    }
}
