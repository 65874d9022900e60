#include "taxoqa/lexicon.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "text_util.hpp"

namespace taxoqa {

namespace {

const std::map<std::string, std::string, std::less<>>& irregular_plurals() {
    static const std::map<std::string, std::string, std::less<>> table = {
        {"calf", "calves"},       {"child", "children"},   {"deer", "deer"},
        {"fish", "fish"},         {"foot", "feet"},        {"goose", "geese"},
        {"half", "halves"},       {"knife", "knives"},     {"leaf", "leaves"},
        {"life", "lives"},        {"loaf", "loaves"},      {"man", "men"},
        {"mouse", "mice"},        {"ox", "oxen"},          {"person", "people"},
        {"scarf", "scarves"},     {"sheep", "sheep"},      {"shelf", "shelves"},
        {"species", "species"},   {"tooth", "teeth"},      {"wife", "wives"},
        {"wolf", "wolves"},       {"woman", "women"},      {"moose", "moose"},
        {"aircraft", "aircraft"}, {"series", "series"},    {"cactus", "cacti"},
        {"bison", "bison"},       {"salmon", "salmon"},    {"trout", "trout"},
    };
    return table;
}

const std::set<std::string, std::less<>>& plural_only() {
    static const std::set<std::string, std::less<>> words = {
        "clothes", "glasses", "goggles", "jeans", "pajamas", "pants", "people",
        "scissors", "shorts", "sunglasses", "tongs", "trousers", "headphones",
        "binoculars", "pliers", "leggings", "men", "women", "children",
    };
    return words;
}

// o-final nouns taking -es.
const std::set<std::string, std::less<>>& o_es() {
    static const std::set<std::string, std::less<>> words = {
        "buffalo", "echo", "hero", "mango", "mosquito", "potato", "tomato", "torpedo", "volcano",
    };
    return words;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

std::string pluralize_word(std::string_view w) {
    if (w.empty()) return {};
    if (auto it = irregular_plurals().find(w); it != irregular_plurals().end()) return it->second;
    if (plural_only().contains(w)) return std::string(w);
    // Already an irregular plural form.
    for (const auto& [sing, plur] : irregular_plurals())
        if (plur == w) return std::string(w);
    std::string s(w);
    auto ends = [&](std::string_view suf) { return s.size() >= suf.size() && s.ends_with(suf); };
    if (ends("s") || ends("x") || ends("z") || ends("ch") || ends("sh")) return s + "es";
    if (s.size() >= 2 && s.back() == 'y' && !is_vowel(s[s.size() - 2]))
        return s.substr(0, s.size() - 1) + "ies";
    if (s.back() == 'o' && o_es().contains(s)) return s + "es";
    return s + "s";
}

// Words starting with a vowel letter but a consonant sound, and the reverse.
bool consonant_sound_exception(std::string_view w) {
    static const std::vector<std::string_view> prefixes = {
        "uni", "use", "usu", "uten", "euro", "ewe", "one", "once", "ufo", "ukulele", "urin",
    };
    return std::any_of(prefixes.begin(), prefixes.end(),
                       [&](std::string_view p) { return w.starts_with(p); });
}

bool vowel_sound_exception(std::string_view w) {
    static const std::vector<std::string_view> prefixes = {"hour", "honest", "honor", "heir", "herb"};
    return std::any_of(prefixes.begin(), prefixes.end(),
                       [&](std::string_view p) { return w.starts_with(p); });
}

}  // namespace

std::string pluralize(std::string_view noun) {
    const auto words = text::split_words(noun);
    if (words.empty()) return {};
    auto out = words;
    out.back() = pluralize_word(words.back());
    return text::join(out, " ");
}

bool is_plural_only(std::string_view noun) {
    const auto words = text::split_words(noun);
    return !words.empty() && plural_only().contains(words.back());
}

std::string_view indefinite_article(std::string_view next_word) {
    const auto w = text::to_lower(next_word);
    if (vowel_sound_exception(w)) return "an";
    if (consonant_sound_exception(w)) return "a";
    return text::starts_with_vowel_letter(w) ? "an" : "a";
}

std::string with_indefinite_article(std::string_view phrase) {
    if (is_plural_only(phrase)) return std::string(phrase);
    return std::string(indefinite_article(phrase)) + " " + std::string(phrase);
}

const std::vector<std::string>& color_vocabulary() {
    static const std::vector<std::string> colors = {
        "beige", "black", "blue", "brown", "gold", "gray", "green", "orange",
        "pink",  "purple", "red", "silver", "tan", "white", "yellow",
    };
    return colors;
}

const std::vector<std::string>& material_vocabulary() {
    static const std::vector<std::string> materials = {
        "brick", "ceramic", "concrete", "cotton", "glass", "lace", "leather", "metal",
        "paper", "plastic", "porcelain", "rubber", "steel", "stone", "wood", "wool",
    };
    return materials;
}

std::string material_noun(std::string_view attribute) {
    static const std::map<std::string, std::string, std::less<>> adjectives = {
        {"wooden", "wood"}, {"woolen", "wool"}, {"metallic", "metal"}, {"stone", "stone"},
        {"leather", "leather"}, {"glass", "glass"},
    };
    if (auto it = adjectives.find(attribute); it != adjectives.end()) return it->second;
    return std::string(attribute);
}

namespace {

const std::map<std::string, std::string, std::less<>>& antonyms() {
    static const std::map<std::string, std::string, std::less<>> table = [] {
        const std::vector<std::pair<std::string, std::string>> pairs = {
            {"on", "off"},         {"open", "closed"},  {"full", "empty"},     {"wet", "dry"},
            {"clean", "dirty"},    {"large", "small"},  {"tall", "short"},     {"standing", "sitting"},
            {"lit", "unlit"},      {"old", "new"},      {"young", "old"},      {"bare", "covered"},
            {"cloudy", "clear"},   {"calm", "rough"},   {"thick", "thin"},     {"long", "short"},
        };
        std::map<std::string, std::string, std::less<>> m;
        for (const auto& [a, b] : pairs) {
            m.emplace(a, b);
            m.emplace(b, a);
        }
        return m;
    }();
    return table;
}

}  // namespace

std::optional<std::string> state_antonym(std::string_view attribute) {
    if (auto it = antonyms().find(attribute); it != antonyms().end()) return it->second;
    return std::nullopt;
}

std::optional<std::string_view> attribute_class(std::string_view attribute) {
    const auto& colors = color_vocabulary();
    if (std::binary_search(colors.begin(), colors.end(), attribute)) return kColorTag;
    const auto& materials = material_vocabulary();
    if (std::binary_search(materials.begin(), materials.end(), material_noun(attribute)))
        return kMaterialTag;
    if (antonyms().contains(attribute)) return kStateTag;
    return std::nullopt;
}

}  // namespace taxoqa
