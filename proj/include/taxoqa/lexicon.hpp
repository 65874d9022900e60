#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace taxoqa {

// English surface-form helpers shared by the scene renderer and question
// templates. Multi-word nouns inflect on their head (last word).

std::string pluralize(std::string_view noun);

// True for nouns that only occur in plural form ("jeans", "scissors").
bool is_plural_only(std::string_view noun);

// "an" before vowel-initial surface forms, "a" otherwise, with exceptions
// for silent-h and /ju:/-initial words ("an hour", "a unicorn").
std::string_view indefinite_article(std::string_view next_word);

// "a dog", "an orange cat". Plural-only nouns get no article.
std::string with_indefinite_article(std::string_view phrase);

// Attribute classes used for the negative-sampling signature check.
inline constexpr std::string_view kColorTag = "color";
inline constexpr std::string_view kMaterialTag = "material";
inline constexpr std::string_view kStateTag = "state";

// Classifies a scene-graph attribute. Unknown attributes have no class.
std::optional<std::string_view> attribute_class(std::string_view attribute);

// Noun form of a material attribute ("wooden" -> "wood"); identity otherwise.
std::string material_noun(std::string_view attribute);

// Fixed vocabularies, sorted.
const std::vector<std::string>& color_vocabulary();
const std::vector<std::string>& material_vocabulary();

// Opposite of a state attribute ("on" -> "off"), when one is known.
std::optional<std::string> state_antonym(std::string_view attribute);

}  // namespace taxoqa
