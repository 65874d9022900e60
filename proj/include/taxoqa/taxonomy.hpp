#pragma once

#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "taxoqa/error.hpp"

namespace taxoqa {

using ConceptId = std::string;
using TagSet = std::set<std::string, std::less<>>;
using ConceptSet = std::set<ConceptId, std::less<>>;

class CycleError : public DataError {
public:
    explicit CycleError(const std::string& concept_id)
        : DataError("hypernym cycle through '" + concept_id + "'") {}
};

class BlocklistError : public DataError {
public:
    using DataError::DataError;
};

// Reference hypernym taxonomy. Each leaf record stores its hypernym chain,
// nearest hypernym first. Consecutive chain entries define the hypernym edges
// (leaf -> chain[0] -> chain[1] -> ...). Immutable after loading.
//
// Text format, one record per line:
//   dog: canine, mammal, vertebrate, animal
//   @attrs dog: color, material
//   @blocklist: entity, material, conveyance
// '#' starts a comment. A leaf with an empty chain is written "leaf:".
class Taxonomy {
public:
    Taxonomy() = default;

    static Taxonomy load(std::istream& in, std::string_view source_name = "<taxonomy>");
    static Taxonomy load_file(const std::string& path);

    // Leaves in id order.
    std::vector<ConceptId> leaves() const;
    // Every concept referenced anywhere (leaves and hypernyms), in id order.
    const ConceptSet& concepts() const noexcept { return concepts_; }
    std::size_t chain_count() const noexcept { return chains_.size(); }

    bool contains(std::string_view id) const;
    bool is_leaf(std::string_view id) const;

    // Stored chain for a leaf. Throws UnknownConceptError for anything else.
    const std::vector<ConceptId>& hypernym_chain(std::string_view leaf) const;

    // For a leaf, membership in its stored chain. For a hypernym-only concept,
    // membership in its transitive closure over hypernym edges. Never reflexive.
    bool is_strict_hypernym(std::string_view hyper, std::string_view hypo) const;

    // Stored chain (leaves) united with the transitive closure of hypernym edges.
    ConceptSet ancestors(std::string_view id) const;
    // Every concept that has `id` among its ancestors.
    ConceptSet descendants(std::string_view id) const;

    // 1 / (1 + d), d = shortest undirected path length in hypernym edges.
    double path_similarity(std::string_view a, std::string_view b) const;
    // Undirected hop distance; throws DataError when disconnected.
    std::size_t path_length(std::string_view a, std::string_view b) const;

    // Concepts allowed as negative replacements for `target`:
    //   - not the target and not comparable to it (ancestor or descendant),
    //   - not a scene concept, nor an ancestor or descendant of one,
    //   - signature contains every tag in `required_tags`.
    // Returned sorted by id. An empty result is a valid outcome.
    std::vector<ConceptId> negative_candidates(std::string_view target,
                                               const ConceptSet& scene_concepts,
                                               const TagSet& required_tags = {}) const;

    const TagSet& attribute_signature(std::string_view id) const;
    const ConceptSet& blocklist() const noexcept { return blocklist_; }

    // (leaf, hypernym) pairs for every chain position, sorted.
    std::vector<std::pair<ConceptId, ConceptId>> hyponym_hypernym_pairs() const;

    // Canonical text form; load(serialize()) reproduces the taxonomy.
    std::string serialize() const;

private:
    void add_chain(ConceptId leaf, std::vector<ConceptId> chain);
    void validate(std::string_view source_name) const;
    void build_indices();

    std::map<ConceptId, std::vector<ConceptId>, std::less<>> chains_;
    std::map<ConceptId, std::size_t, std::less<>> chain_lines_;
    std::map<ConceptId, TagSet, std::less<>> signatures_;
    ConceptSet blocklist_;
    ConceptSet concepts_;
    // Direct hypernym edges child -> parents, and the undirected adjacency.
    std::map<ConceptId, ConceptSet, std::less<>> parents_;
    std::map<ConceptId, ConceptSet, std::less<>> adjacency_;
    std::map<ConceptId, ConceptSet, std::less<>> ancestors_;
    std::map<ConceptId, ConceptSet, std::less<>> descendants_;
};

}  // namespace taxoqa
