#include "taxoqa/questgen.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "taxoqa/lexicon.hpp"
#include "taxoqa/random.hpp"
#include "text_util.hpp"

namespace taxoqa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct TypeInfo {
    QuestionType type;
    std::string_view name;
};

constexpr std::array<TypeInfo, 14> kTypes = {{
    {QuestionType::kExist, "exist"},
    {QuestionType::kExistAttr, "existAttr"},
    {QuestionType::kExistAttrNot, "existAttrNot"},
    {QuestionType::kExistAttrC, "existAttrC"},
    {QuestionType::kExistAttrNotC, "existAttrNotC"},
    {QuestionType::kExistThat, "existThat"},
    {QuestionType::kExistThatNot, "existThatNot"},
    {QuestionType::kExistThatC, "existThatC"},
    {QuestionType::kExistThatNotC, "existThatNotC"},
    {QuestionType::kExistMaterial, "existMaterial"},
    {QuestionType::kExistMaterialNot, "existMaterialNot"},
    {QuestionType::kExistMaterialC, "existMaterialC"},
    {QuestionType::kExistMaterialNotC, "existMaterialNotC"},
    {QuestionType::kTaxomps, "taxomps"},
}};

}  // namespace

std::string_view to_string(QuestionType type) {
    for (const auto& t : kTypes)
        if (t.type == type) return t.name;
    return "unknown";
}

QuestionType parse_question_type(std::string_view name) {
    for (const auto& t : kTypes)
        if (t.name == name) return t.type;
    throw UnsupportedTypeError("unsupported question type '" + std::string(name) + "'");
}

const std::vector<QuestionType>& scene_question_types() {
    static const std::vector<QuestionType> types = [] {
        std::vector<QuestionType> v;
        for (std::size_t i = 0; i < kSceneQuestionTypeCount; ++i) v.push_back(kTypes[i].type);
        return v;
    }();
    return types;
}

bool requires_attribute(QuestionType type) {
    return type != QuestionType::kExist && type != QuestionType::kTaxomps;
}

bool is_counterfactual(QuestionType type) {
    switch (type) {
        case QuestionType::kExistAttrC:
        case QuestionType::kExistAttrNotC:
        case QuestionType::kExistThatC:
        case QuestionType::kExistThatNotC:
        case QuestionType::kExistMaterialC:
        case QuestionType::kExistMaterialNotC:
            return true;
        default:
            return false;
    }
}

std::string_view to_string(Answer a) { return a == Answer::kYes ? "Yes" : "No"; }

Answer parse_answer(std::string_view text) {
    const auto t = text::to_lower(text::trim(text));
    if (t == "yes") return Answer::kYes;
    if (t == "no") return Answer::kNo;
    throw DataError("expected Yes or No, got '" + std::string(text) + "'");
}

Question instantiate_question(QuestionType qtype, std::string_view target,
                              const std::optional<std::string>& attribute) {
    if (qtype == QuestionType::kTaxomps)
        throw UnsupportedTypeError("taxomps questions are built with taxomps_question()");
    if (requires_attribute(qtype) && !attribute)
        throw MissingAttributeError(std::string("question type '") + std::string(to_string(qtype)) +
                                    "' requires an attribute");
    if (!requires_attribute(qtype) && attribute)
        throw MissingAttributeError(std::string("question type '") + std::string(to_string(qtype)) +
                                    "' takes no attribute");

    const std::string plural = pluralize(target);
    const std::string single = with_indefinite_article(target);
    const std::string attr = attribute.value_or("");
    std::string text;
    switch (qtype) {
        case QuestionType::kExist: text = "Are there any " + plural + "?"; break;
        case QuestionType::kExistAttr: text = "Are there any " + plural + " that are " + attr + "?"; break;
        case QuestionType::kExistAttrNot:
            text = "Are there " + plural + " in this scene that are not " + attr + "?";
            break;
        case QuestionType::kExistAttrC: text = "Do you see " + plural + " that are " + attr + "?"; break;
        case QuestionType::kExistAttrNotC: text = "Do you see " + single + " that is not " + attr + "?"; break;
        case QuestionType::kExistThat:
            text = "Are there any " + plural + " in the picture that are " + attr + "?";
            break;
        case QuestionType::kExistThatNot:
        case QuestionType::kExistThatNotC:
            text = "Is there " + single + " in the image that is not " + attr + "?";
            break;
        case QuestionType::kExistThatC: text = "Is there " + single + " that is " + attr + "?"; break;
        case QuestionType::kExistMaterial: text = "Do you see " + single + " that is made of " + attr + "?"; break;
        case QuestionType::kExistMaterialNot:
            text = "Is there " + single + " that is not made of " + attr + "?";
            break;
        case QuestionType::kExistMaterialC: text = "Are there any " + attr + " " + plural + "?"; break;
        case QuestionType::kExistMaterialNotC:
            text = "Are there " + plural + " that are not made of " + attr + "?";
            break;
        case QuestionType::kTaxomps: break;
    }
    return Question{qtype, std::string(target), attribute, std::move(text),
                    is_counterfactual(qtype) ? Answer::kNo : Answer::kYes};
}

Question instantiate_question(QuestionType qtype, const SceneObject& object,
                              const std::optional<std::string>& attribute) {
    return instantiate_question(qtype, object.name, attribute);
}

Question taxomps_question(std::string_view hyponym, std::string_view hypernym, Answer gold) {
    std::string text = "Is it true that " + with_indefinite_article(hyponym) + " is " +
                       with_indefinite_article(hypernym) + "?";
    return Question{QuestionType::kTaxomps, std::string(hypernym), std::nullopt, std::move(text), gold};
}

TagSet required_tags(const Question& q) {
    if (!q.attribute) return {};
    if (auto cls = attribute_class(*q.attribute)) return {std::string(*cls)};
    return {};
}

namespace {

std::vector<Question> make_negatives(const Question& q, const std::vector<ConceptId>& targets) {
    std::vector<Question> out;
    out.reserve(targets.size());
    for (const auto& c : targets) {
        Question n = instantiate_question(q.qtype, c, q.attribute);
        n.gold = Answer::kNo;
        out.push_back(std::move(n));
    }
    return out;
}

}  // namespace

std::optional<std::vector<Question>> sample_negatives(const Question& q, const ConceptSet& scene_concepts,
                                                      const Taxonomy& taxonomy, std::uint64_t seed,
                                                      std::string_view anchor) {
    if (q.qtype == QuestionType::kTaxomps)
        throw UnsupportedTypeError("use taxomps_negative_concepts() for minimal-pair questions");
    const std::string_view a = anchor.empty() ? std::string_view(q.target) : anchor;
    const auto pool = taxonomy.negative_candidates(a, scene_concepts, required_tags(q));
    if (pool.size() < kNegativesPerQuestion) return std::nullopt;
    Rng rng(seed);
    const auto picked = rng.sample(std::span<const ConceptId>(pool), kNegativesPerQuestion);
    return make_negatives(q, picked);
}

std::optional<std::vector<Question>> sample_negatives(const Question& q, const SceneGraph& scene,
                                                      const Taxonomy& taxonomy, std::uint64_t seed) {
    return sample_negatives(q, scene.concept_names(), taxonomy, seed);
}

namespace {

std::vector<std::string> held_in_class(const SceneObject& o, std::string_view cls) {
    std::vector<std::string> out;
    for (const auto& a : o.attributes) {
        auto c = attribute_class(a);
        if (c && *c == cls) {
            std::string surface = cls == kMaterialTag ? material_noun(a) : a;
            if (std::find(out.begin(), out.end(), surface) == out.end()) out.push_back(std::move(surface));
        }
    }
    return out;
}

// Deterministic pick among vocabulary entries the object does not hold.
std::optional<std::string> pick_unheld(const std::vector<std::string>& vocabulary,
                                       const std::vector<std::string>& held, std::string_view salt) {
    std::vector<std::string> options;
    for (const auto& v : vocabulary)
        if (std::find(held.begin(), held.end(), v) == held.end()) options.push_back(v);
    if (options.empty()) return std::nullopt;
    return options[mix64(fnv1a(salt)) % options.size()];
}

}  // namespace

std::vector<Question> synthesize_questions(const SceneObject& object) {
    std::vector<Question> out;
    auto emit = [&](QuestionType t, std::optional<std::string> attr) {
        out.push_back(instantiate_question(t, object.name, attr));
    };
    auto salt = [&](QuestionType t) { return object.name + "|" + std::string(to_string(t)); };

    emit(QuestionType::kExist, std::nullopt);

    const auto colors = held_in_class(object, kColorTag);
    if (!colors.empty()) {
        emit(QuestionType::kExistAttr, colors.front());
        if (auto a = pick_unheld(color_vocabulary(), colors, salt(QuestionType::kExistAttrNot)))
            emit(QuestionType::kExistAttrNot, *a);
        if (auto a = pick_unheld(color_vocabulary(), colors, salt(QuestionType::kExistAttrC)))
            emit(QuestionType::kExistAttrC, *a);
        if (colors.size() == 1) emit(QuestionType::kExistAttrNotC, colors.front());
    }

    const auto states = held_in_class(object, kStateTag);
    // A state is usable when its antonym is known and not also annotated.
    std::optional<std::string> state, opposite;
    for (const auto& s : states) {
        auto anti = state_antonym(s);
        if (anti && std::find(states.begin(), states.end(), *anti) == states.end()) {
            state = s;
            opposite = anti;
            break;
        }
    }
    if (state) {
        emit(QuestionType::kExistThat, *state);
        emit(QuestionType::kExistThatNot, *opposite);
        emit(QuestionType::kExistThatC, *opposite);
        emit(QuestionType::kExistThatNotC, *state);
    }

    const auto materials = held_in_class(object, kMaterialTag);
    if (!materials.empty()) {
        emit(QuestionType::kExistMaterial, materials.front());
        if (auto a = pick_unheld(material_vocabulary(), materials, salt(QuestionType::kExistMaterialNot)))
            emit(QuestionType::kExistMaterialNot, *a);
        if (auto a = pick_unheld(material_vocabulary(), materials, salt(QuestionType::kExistMaterialC)))
            emit(QuestionType::kExistMaterialC, *a);
        if (materials.size() == 1) emit(QuestionType::kExistMaterialNotC, materials.front());
    }
    return out;
}

std::vector<QAInstance> substitute_hypernyms(const QAInstance& inst, const SceneGraph& scene,
                                             const Taxonomy& taxonomy, std::uint64_t seed,
                                             const SubstitutionOptions& options) {
    if (inst.substitution_depth != 0)
        throw DataError("instance '" + inst.instance_id + "' is already substituted");
    const auto& chain = taxonomy.hypernym_chain(inst.source_leaf);
    const auto scene_concepts = scene.concept_names();
    std::vector<QAInstance> out;
    for (std::size_t depth = 1; depth <= chain.size(); ++depth) {
        QAInstance sub = inst;
        sub.instance_id = inst.instance_id + "@" + std::to_string(depth);
        sub.parent_instance_id = inst.instance_id;
        sub.substitution_depth = depth;
        sub.positive = instantiate_question(inst.positive.qtype, chain[depth - 1], inst.positive.attribute);
        sub.positive.gold = inst.positive.gold;
        if (options.resample_per_depth) {
            auto negs = sample_negatives(sub.positive, scene_concepts, taxonomy,
                                         derive_seed(seed, sub.instance_id), inst.source_leaf);
            if (!negs) continue;
            sub.negatives = std::move(*negs);
        }
        out.push_back(std::move(sub));
    }
    return out;
}

std::vector<std::size_t> largest_remainder_allotment(const std::vector<std::size_t>& counts,
                                                     std::size_t quota) {
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (total <= quota) return counts;
    std::vector<std::size_t> allot(counts.size());
    std::vector<std::size_t> remainder(counts.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        allot[i] = quota * counts[i] / total;
        remainder[i] = quota * counts[i] % total;
        assigned += allot[i];
    }
    std::vector<std::size_t> order(counts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < quota; ++k, ++assigned) ++allot[order[k]];
    return allot;
}

std::vector<QAInstance> balance_sample(const std::map<std::string, std::vector<QAInstance>>& per_scene,
                                       std::size_t quota, std::uint64_t seed) {
    std::vector<QAInstance> out;
    for (const auto& [scene_id, instances] : per_scene) {
        if (instances.size() <= quota) {
            out.insert(out.end(), instances.begin(), instances.end());
            continue;
        }
        std::map<QuestionType, std::vector<std::size_t>> by_type;
        for (std::size_t i = 0; i < instances.size(); ++i) by_type[instances[i].positive.qtype].push_back(i);
        std::vector<std::size_t> counts;
        for (const auto& [t, idx] : by_type) counts.push_back(idx.size());
        const auto allot = largest_remainder_allotment(counts, quota);

        Rng rng(derive_seed(seed, scene_id));
        std::vector<std::size_t> keep;
        std::size_t k = 0;
        for (auto& [t, idx] : by_type) {
            auto chosen = rng.sample(std::span<const std::size_t>(idx), allot[k++]);
            keep.insert(keep.end(), chosen.begin(), chosen.end());
        }
        std::sort(keep.begin(), keep.end());
        for (auto i : keep) out.push_back(instances[i]);
    }
    return out;
}

std::optional<std::vector<ConceptId>> taxomps_negative_concepts(const Taxonomy& taxonomy,
                                                                std::string_view hyponym,
                                                                std::string_view hypernym,
                                                                std::uint64_t seed) {
    const auto pool = taxonomy.negative_candidates(hyponym, {}, taxonomy.attribute_signature(hypernym));
    if (pool.size() < kNegativesPerQuestion) return std::nullopt;
    Rng rng(derive_seed(seed, "taxomps:" + std::string(hyponym) + ":" + std::string(hypernym)));
    return rng.sample(std::span<const ConceptId>(pool), kNegativesPerQuestion);
}

TaxompsResult generate_taxomps(const Taxonomy& taxonomy, std::uint64_t seed) {
    TaxompsResult result;
    for (const auto& [hypo, hyper] : taxonomy.hyponym_hypernym_pairs()) {
        auto negs = taxomps_negative_concepts(taxonomy, hypo, hyper, seed);
        if (!negs) {
            result.skipped.push_back(hypo + ":" + hyper);
            continue;
        }
        QAInstance inst;
        inst.instance_id = "taxomps:" + hypo + ":" + hyper;
        inst.scene_id = "taxomps";
        inst.positive = taxomps_question(hypo, hyper, Answer::kYes);
        for (const auto& n : *negs) inst.negatives.push_back(taxomps_question(hypo, n, Answer::kNo));
        const auto& chain = taxonomy.hypernym_chain(hypo);
        inst.substitution_depth =
            static_cast<std::size_t>(std::find(chain.begin(), chain.end(), hyper) - chain.begin()) + 1;
        inst.source_leaf = hypo;
        result.instances.push_back(std::move(inst));
    }
    return result;
}

ordered_json to_json(const Question& q) {
    ordered_json j;
    j["qtype"] = to_string(q.qtype);
    j["target"] = q.target;
    j["attribute"] = q.attribute ? ordered_json(*q.attribute) : ordered_json(nullptr);
    j["text"] = q.text;
    j["gold"] = to_string(q.gold);
    return j;
}

ordered_json to_json(const QAInstance& inst) {
    ordered_json j;
    j["instance_id"] = inst.instance_id;
    j["scene_id"] = inst.scene_id;
    j["description"] = inst.description;
    j["positive"] = to_json(inst.positive);
    ordered_json negs = ordered_json::array();
    for (const auto& n : inst.negatives) negs.push_back(to_json(n));
    j["negatives"] = std::move(negs);
    j["substitution_depth"] = inst.substitution_depth;
    j["source_leaf"] = inst.source_leaf;
    j["parent_instance_id"] = inst.parent_instance_id.empty() ? ordered_json(nullptr)
                                                              : ordered_json(inst.parent_instance_id);
    if (!inst.image.empty()) j["image"] = inst.image;
    return j;
}

Question question_from_json(const json& j) {
    Question q;
    q.qtype = parse_question_type(j.at("qtype").get<std::string>());
    q.target = j.at("target").get<std::string>();
    if (auto it = j.find("attribute"); it != j.end() && !it->is_null()) q.attribute = it->get<std::string>();
    q.text = j.at("text").get<std::string>();
    q.gold = parse_answer(j.at("gold").get<std::string>());
    return q;
}

QAInstance instance_from_json(const json& j) {
    QAInstance inst;
    inst.instance_id = j.at("instance_id").get<std::string>();
    inst.scene_id = j.at("scene_id").get<std::string>();
    inst.description = j.at("description").get<std::string>();
    inst.positive = question_from_json(j.at("positive"));
    for (const auto& n : j.at("negatives")) inst.negatives.push_back(question_from_json(n));
    if (inst.negatives.size() != kNegativesPerQuestion)
        throw DataError("instance '" + inst.instance_id + "' must have exactly 4 negatives");
    inst.substitution_depth = j.at("substitution_depth").get<std::size_t>();
    inst.source_leaf = j.at("source_leaf").get<std::string>();
    if (auto it = j.find("parent_instance_id"); it != j.end() && !it->is_null())
        inst.parent_instance_id = it->get<std::string>();
    if (auto it = j.find("image"); it != j.end()) inst.image = it->get<std::string>();
    return inst;
}

void write_dataset(std::ostream& out, const std::vector<QAInstance>& instances) {
    for (const auto& inst : instances) out << to_json(inst).dump() << '\n';
}

std::vector<QAInstance> read_dataset(std::istream& in, std::string_view source_name) {
    std::vector<QAInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(instance_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(std::string(source_name), line_no, e.what());
        } catch (const DataError& e) {
            throw ParseError(std::string(source_name), line_no, e.what());
        }
    }
    return out;
}

std::vector<QAInstance> read_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset '" + path + "'");
    return read_dataset(in, path);
}

}  // namespace taxoqa
