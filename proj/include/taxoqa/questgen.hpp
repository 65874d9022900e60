#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "taxoqa/scene.hpp"
#include "taxoqa/taxonomy.hpp"

namespace taxoqa {

// The 13 yes/no question types, plus the taxonomic minimal-pair form.
enum class QuestionType {
    kExist,
    kExistAttr,
    kExistAttrNot,
    kExistAttrC,
    kExistAttrNotC,
    kExistThat,
    kExistThatNot,
    kExistThatC,
    kExistThatNotC,
    kExistMaterial,
    kExistMaterialNot,
    kExistMaterialC,
    kExistMaterialNotC,
    kTaxomps,
};

inline constexpr std::size_t kSceneQuestionTypeCount = 13;
inline constexpr std::size_t kNegativesPerQuestion = 4;

std::string_view to_string(QuestionType type);
QuestionType parse_question_type(std::string_view name);
// The 13 scene question types in declaration order.
const std::vector<QuestionType>& scene_question_types();

bool requires_attribute(QuestionType type);
// Counterfactual types, answered "No" for the positive sample.
bool is_counterfactual(QuestionType type);

enum class Answer { kYes, kNo };
std::string_view to_string(Answer a);
Answer parse_answer(std::string_view text);

struct Question {
    QuestionType qtype = QuestionType::kExist;
    ConceptId target;
    std::optional<std::string> attribute;
    std::string text;
    Answer gold = Answer::kYes;

    bool operator==(const Question&) const = default;
};

struct QAInstance {
    std::string instance_id;
    std::string scene_id;
    std::string description;
    Question positive;
    std::vector<Question> negatives;
    std::size_t substitution_depth = 0;
    ConceptId source_leaf;
    // Empty for unsubstituted instances.
    std::string parent_instance_id;
    // Image reference carried over from the scene, for VQA-mode evaluation.
    std::string image;

    bool operator==(const QAInstance&) const = default;
};

class UnsupportedTypeError : public DataError {
public:
    using DataError::DataError;
};

class MissingAttributeError : public DataError {
public:
    using DataError::DataError;
};

// Renders the template for `qtype` about `target`. The attribute must be given
// exactly when the type requires one; material types take the material noun.
Question instantiate_question(QuestionType qtype, std::string_view target,
                              const std::optional<std::string>& attribute);
Question instantiate_question(QuestionType qtype, const SceneObject& object,
                              const std::optional<std::string>& attribute);

// "Is it true that a cat is a feline?"
Question taxomps_question(std::string_view hyponym, std::string_view hypernym, Answer gold);

// Signature tags a negative replacement must carry for this question.
TagSet required_tags(const Question& q);

// Draws 4 distinct negative targets uniformly without replacement from the
// candidate pool of `anchor` (defaults to q.target) with respect to the scene.
// Returns nullopt when fewer than 4 candidates exist.
std::optional<std::vector<Question>> sample_negatives(const Question& q, const ConceptSet& scene_concepts,
                                                      const Taxonomy& taxonomy, std::uint64_t seed,
                                                      std::string_view anchor = {});
std::optional<std::vector<Question>> sample_negatives(const Question& q, const SceneGraph& scene,
                                                      const Taxonomy& taxonomy, std::uint64_t seed);

// Every feasible question about `object` (one per type at most), with the
// attribute chosen deterministically from the object's annotations and the
// fixed vocabularies. Negatives are not attached.
std::vector<Question> synthesize_questions(const SceneObject& object);

struct SubstitutionOptions {
    // Draw fresh negatives per depth; otherwise reuse the original's negative targets.
    bool resample_per_depth = true;
};

// One instance per hypernym of inst.source_leaf, depth = 1-based chain position.
// Depths whose negative pool is too small are skipped.
std::vector<QAInstance> substitute_hypernyms(const QAInstance& inst, const SceneGraph& scene,
                                             const Taxonomy& taxonomy, std::uint64_t seed,
                                             const SubstitutionOptions& options = {});

// Keeps at most `quota` instances per scene, apportioning the quota across
// question types by largest remainder. Output is grouped by scene id and keeps
// the input order within a scene.
std::vector<QAInstance> balance_sample(const std::map<std::string, std::vector<QAInstance>>& per_scene,
                                       std::size_t quota, std::uint64_t seed);

// Per-type allotment used by balance_sample; exposed for testing.
std::vector<std::size_t> largest_remainder_allotment(const std::vector<std::size_t>& counts,
                                                     std::size_t quota);

// Negative replacement concepts for a (hyponym, hypernym) minimal pair:
// no scene, signature must cover the hypernym's signature.
std::optional<std::vector<ConceptId>> taxomps_negative_concepts(const Taxonomy& taxonomy,
                                                                std::string_view hyponym,
                                                                std::string_view hypernym,
                                                                std::uint64_t seed);

struct TaxompsResult {
    std::vector<QAInstance> instances;
    // Pairs skipped for lack of negative candidates, "hyponym:hypernym".
    std::vector<std::string> skipped;
};

TaxompsResult generate_taxomps(const Taxonomy& taxonomy, std::uint64_t seed);

// Dataset records: one JSON object per line, stable field order.
nlohmann::ordered_json to_json(const Question& q);
nlohmann::ordered_json to_json(const QAInstance& inst);
Question question_from_json(const nlohmann::json& j);
QAInstance instance_from_json(const nlohmann::json& j);

void write_dataset(std::ostream& out, const std::vector<QAInstance>& instances);
std::vector<QAInstance> read_dataset(std::istream& in, std::string_view source_name = "<dataset>");
std::vector<QAInstance> read_dataset_file(const std::string& path);

}  // namespace taxoqa
