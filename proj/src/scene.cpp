#include "taxoqa/scene.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "taxoqa/lexicon.hpp"
#include "text_util.hpp"

namespace taxoqa {

using nlohmann::json;

const SceneObject& SceneGraph::object(std::string_view object_id) const {
    auto it = std::lower_bound(objects.begin(), objects.end(), object_id,
                               [](const SceneObject& o, std::string_view id) { return o.object_id < id; });
    if (it == objects.end() || it->object_id != object_id)
        throw DataError("scene '" + scene_id + "' has no object '" + std::string(object_id) + "'");
    return *it;
}

ConceptSet SceneGraph::concept_names() const {
    ConceptSet out;
    for (const auto& o : objects) out.insert(o.name);
    return out;
}

std::string_view to_string(FilterReason reason) {
    switch (reason) {
        case FilterReason::kOk: return "ok";
        case FilterReason::kTooManyObjects: return "too_many_objects";
        case FilterReason::kDuplicateLabels: return "duplicate_labels";
        case FilterReason::kMultiObjectQuestion: return "multi_object_question";
        case FilterReason::kHypernymOverlap: return "hypernym_overlap";
        case FilterReason::kUnsupportedAnswerType: return "unsupported_answer_type";
    }
    return "unknown";
}

namespace {

const json& require(const json& node, const char* key, const std::string& path) {
    auto it = node.find(key);
    if (it == node.end()) throw SchemaError(path + "/" + key, "missing field");
    return *it;
}

std::string require_string(const json& node, const char* key, const std::string& path) {
    const auto& v = require(node, key, path);
    if (!v.is_string()) throw SchemaError(path + "/" + key, "expected a string");
    return v.get<std::string>();
}

}  // namespace

SceneGraph parse_scene_graph(std::string_view scene_id, const json& body) {
    const std::string path = "/" + std::string(scene_id);
    if (!body.is_object()) throw SchemaError(path, "expected an object");
    SceneGraph scene;
    scene.scene_id = std::string(scene_id);
    if (auto img = body.find("image"); img != body.end()) {
        if (!img->is_string()) throw SchemaError(path + "/image", "expected a string");
        scene.image = img->get<std::string>();
    }
    const auto& objects = require(body, "objects", path);
    if (!objects.is_object()) throw SchemaError(path + "/objects", "expected an object keyed by id");
    if (objects.empty()) throw SchemaError(path + "/objects", "scene has no objects");

    for (const auto& [id, obj] : objects.items()) {
        const std::string opath = path + "/objects/" + id;
        if (!obj.is_object()) throw SchemaError(opath, "expected an object");
        SceneObject so;
        so.object_id = id;
        so.name = text::join(text::split_words(require_string(obj, "name", opath)), " ");
        if (so.name.empty()) throw SchemaError(opath + "/name", "empty name");
        if (auto attrs = obj.find("attributes"); attrs != obj.end()) {
            if (!attrs->is_array()) throw SchemaError(opath + "/attributes", "expected an array");
            for (std::size_t i = 0; i < attrs->size(); ++i) {
                const auto& a = (*attrs)[i];
                if (!a.is_string())
                    throw SchemaError(opath + "/attributes/" + std::to_string(i), "expected a string");
                so.attributes.push_back(text::join(text::split_words(a.get<std::string>()), " "));
            }
        }
        if (auto rels = obj.find("relations"); rels != obj.end()) {
            if (!rels->is_array()) throw SchemaError(opath + "/relations", "expected an array");
            for (std::size_t i = 0; i < rels->size(); ++i) {
                const std::string rpath = opath + "/relations/" + std::to_string(i);
                const auto& r = (*rels)[i];
                if (!r.is_object()) throw SchemaError(rpath, "expected an object");
                so.relations.push_back({text::join(text::split_words(require_string(r, "name", rpath)), " "),
                                        require_string(r, "object", rpath)});
            }
        }
        scene.objects.push_back(std::move(so));
    }
    std::sort(scene.objects.begin(), scene.objects.end(),
              [](const SceneObject& a, const SceneObject& b) { return a.object_id < b.object_id; });

    for (const auto& o : scene.objects)
        for (std::size_t i = 0; i < o.relations.size(); ++i) {
            const auto& target = o.relations[i].target_object_id;
            auto it = std::lower_bound(scene.objects.begin(), scene.objects.end(), target,
                                       [](const SceneObject& x, const std::string& id) { return x.object_id < id; });
            const bool found = it != scene.objects.end() && it->object_id == target;
            if (!found)
                throw DanglingRelationError(path + "/objects/" + o.object_id + "/relations/" +
                                            std::to_string(i) + ": relation target '" + target +
                                            "' is not an object of the scene");
        }
    return scene;
}

std::vector<SceneGraph> parse_scene_graphs(const json& document) {
    if (!document.is_object()) throw SchemaError("", "expected an object keyed by scene id");
    std::vector<SceneGraph> scenes;
    for (const auto& [id, body] : document.items()) scenes.push_back(parse_scene_graph(id, body));
    std::sort(scenes.begin(), scenes.end(),
              [](const SceneGraph& a, const SceneGraph& b) { return a.scene_id < b.scene_id; });
    return scenes;
}

std::vector<SceneGraph> parse_scene_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scene-graph file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path, 0, e.what());
    }
    try {
        return parse_scene_graphs(doc);
    } catch (const SchemaError& e) {
        throw SchemaError(path + ":" + e.path(), e.what());
    }
}

json scene_to_json(const SceneGraph& scene) {
    json objects = json::object();
    for (const auto& o : scene.objects) {
        json rels = json::array();
        for (const auto& r : o.relations) rels.push_back({{"name", r.predicate}, {"object", r.target_object_id}});
        objects[o.object_id] = {{"name", o.name}, {"attributes", o.attributes}, {"relations", rels}};
    }
    json body = {{"objects", objects}};
    if (!scene.image.empty()) body["image"] = scene.image;
    return body;
}

FilterVerdict filter_scene(const SceneGraph& scene, std::size_t max_objects) {
    if (scene.objects.size() > max_objects) return FilterVerdict::reject(FilterReason::kTooManyObjects);
    std::set<std::string_view> names;
    for (const auto& o : scene.objects)
        if (!names.insert(o.name).second) return FilterVerdict::reject(FilterReason::kDuplicateLabels);
    return FilterVerdict::ok();
}

FilterVerdict filter_question(const SceneGraph& scene, const Taxonomy& taxonomy,
                              const QuestionRef& question) {
    const std::set<std::string> mentioned(question.object_ids.begin(), question.object_ids.end());
    if (mentioned.size() != 1) return FilterVerdict::reject(FilterReason::kMultiObjectQuestion);
    const auto answer = text::to_lower(text::trim(question.answer));
    if (answer != "yes" && answer != "no")
        return FilterVerdict::reject(FilterReason::kUnsupportedAnswerType);

    const auto& target = scene.object(*mentioned.begin());
    auto hypernyms_of = [&](const std::string& name) {
        return taxonomy.contains(name) ? taxonomy.ancestors(name) : ConceptSet{};
    };
    const auto target_hypers = hypernyms_of(target.name);
    for (const auto& other : scene.objects) {
        if (other.object_id == target.object_id) continue;
        auto other_hypers = hypernyms_of(other.name);
        if (other_hypers.contains(target.name)) return FilterVerdict::reject(FilterReason::kHypernymOverlap);
        other_hypers.insert(other.name);
        for (const auto& h : target_hypers)
            if (other_hypers.contains(h)) return FilterVerdict::reject(FilterReason::kHypernymOverlap);
    }
    return FilterVerdict::ok();
}

namespace {

// Finite-verb predicates that do not take a copula.
bool is_finite_verb(std::string_view predicate) {
    static const std::set<std::string, std::less<>> verbs = {
        "has", "have", "contains", "covers", "holds", "wears", "eats", "carries", "shows", "surrounds",
    };
    const auto words = text::split_words(predicate);
    return !words.empty() && verbs.contains(words.front());
}

std::string noun_phrase(const SceneObject& o) {
    std::vector<std::string> words = o.attributes;
    words.push_back(o.name);
    return with_indefinite_article(text::join(words, " "));
}

std::string verb_for(const SceneObject& subject, std::string_view predicate) {
    const bool plural = is_plural_only(subject.name);
    if (is_finite_verb(predicate)) {
        if (plural && predicate.starts_with("has")) return "have" + std::string(predicate.substr(3));
        return std::string(predicate);
    }
    return std::string(plural ? "are " : "is ") + std::string(predicate);
}

}  // namespace

std::string render_description(const SceneGraph& scene, std::uint64_t /*seed*/) {
    std::set<std::string_view> introduced;
    std::vector<std::string> sentences;

    auto reference = [&](const SceneObject& target) {
        if (introduced.insert(target.object_id).second) return noun_phrase(target);
        return "the " + target.name;
    };
    auto capitalize = [](std::string s) {
        if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
        return s;
    };

    for (const auto& o : scene.objects) {
        std::size_t next_relation = 0;
        if (introduced.insert(o.object_id).second) {
            std::string s = (is_plural_only(o.name) ? "There are " : "There is ") + noun_phrase(o);
            if (!o.relations.empty()) {
                const auto& r = o.relations.front();
                s += (is_finite_verb(r.predicate) ? " that " + verb_for(o, r.predicate) : " " + r.predicate);
                s += " " + reference(scene.object(r.target_object_id));
                next_relation = 1;
            }
            sentences.push_back(s + ".");
        }
        for (std::size_t i = next_relation; i < o.relations.size(); ++i) {
            const auto& r = o.relations[i];
            sentences.push_back(capitalize("the " + o.name) + " " + verb_for(o, r.predicate) + " " +
                                reference(scene.object(r.target_object_id)) + ".");
        }
    }
    return text::join(sentences, " ");
}

}  // namespace taxoqa
