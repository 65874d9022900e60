#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "taxoqa/taxonomy.hpp"

namespace taxoqa {

struct Relation {
    std::string predicate;
    std::string target_object_id;

    bool operator==(const Relation&) const = default;
};

struct SceneObject {
    std::string object_id;
    ConceptId name;
    std::vector<std::string> attributes;  // annotation order
    std::vector<Relation> relations;

    bool operator==(const SceneObject&) const = default;
};

// Objects are kept sorted by object_id.
struct SceneGraph {
    std::string scene_id;
    std::vector<SceneObject> objects;
    // Optional image reference for VQA-mode evaluation.
    std::string image;

    const SceneObject& object(std::string_view object_id) const;
    ConceptSet concept_names() const;

    bool operator==(const SceneGraph&) const = default;
};

enum class FilterReason {
    kOk,
    kTooManyObjects,
    kDuplicateLabels,
    kMultiObjectQuestion,
    kHypernymOverlap,
    kUnsupportedAnswerType,
};

std::string_view to_string(FilterReason reason);

struct FilterVerdict {
    bool accepted = true;
    FilterReason reason = FilterReason::kOk;

    static FilterVerdict ok() { return {}; }
    static FilterVerdict reject(FilterReason r) { return {false, r}; }
};

// The parts of a question that the question-level filter inspects: the scene
// objects it mentions and its answer.
struct QuestionRef {
    std::vector<std::string> object_ids;
    std::string answer;
};

class SchemaError : public DataError {
public:
    SchemaError(const std::string& path, const std::string& what)
        : DataError(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class DanglingRelationError : public DataError {
public:
    using DataError::DataError;
};

// GQA scene-graph JSON: {scene_id: {objects: {id: {name, attributes, relations: [{name, object}]}}}}.
// Layout fields (x, y, w, h, width, height) are ignored. Scenes come back sorted by id.
std::vector<SceneGraph> parse_scene_graphs(const nlohmann::json& document);
std::vector<SceneGraph> parse_scene_graph_file(const std::string& path);
// Parses a single scene body ({objects: ...}).
SceneGraph parse_scene_graph(std::string_view scene_id, const nlohmann::json& body);

// Inverse of parse_scene_graphs for the consumed fields.
nlohmann::json scene_to_json(const SceneGraph& scene);

FilterVerdict filter_scene(const SceneGraph& scene, std::size_t max_objects = 20);

FilterVerdict filter_question(const SceneGraph& scene, const Taxonomy& taxonomy,
                              const QuestionRef& question);

// Template rendering, ordered by object_id. Each object is introduced once with
// all of its attributes; each relation is stated once. The first relation of an
// object folds into its introduction: "There is a brown dog on a yellow surfboard."
// The seed is accepted for interface stability; the current template set has no
// random choices.
std::string render_description(const SceneGraph& scene, std::uint64_t seed = 0);

// Version tag of the template set, recorded in build manifests.
inline constexpr std::string_view kTemplateVersion = "describe-v1";

}  // namespace taxoqa
