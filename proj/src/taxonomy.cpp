#include "taxoqa/taxonomy.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <sstream>

#include "text_util.hpp"

namespace taxoqa {

namespace {

std::string normalize_id(std::string_view raw, std::string_view source, std::size_t line) {
    const auto words = text::split_words(raw);
    if (words.empty()) throw ParseError(std::string(source), line, "empty concept id");
    std::string id = text::join(words, " ");
    for (char c : id)
        if (c >= 'A' && c <= 'Z')
            throw ParseError(std::string(source), line, "concept id '" + id + "' must be lowercase");
    return id;
}

std::vector<std::string> parse_id_list(std::string_view raw, std::string_view source,
                                       std::size_t line) {
    std::vector<std::string> out;
    for (const auto& piece : text::split_trimmed(raw, ','))
        out.push_back(normalize_id(piece, source, line));
    return out;
}

}  // namespace

Taxonomy Taxonomy::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open taxonomy file '" + path + "'");
    return load(in, path);
}

Taxonomy Taxonomy::load(std::istream& in, std::string_view source_name) {
    Taxonomy t;
    std::map<ConceptId, std::size_t, std::less<>> attr_lines;
    std::string raw;
    std::size_t line_no = 0;
    const std::string source(source_name);
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;

        const auto colon = line.find(':');
        if (colon == std::string_view::npos)
            throw ParseError(source, line_no, "expected ':' in record");
        const auto head = text::trim(line.substr(0, colon));
        const auto body = line.substr(colon + 1);

        if (head == "@blocklist") {
            for (auto& id : parse_id_list(body, source, line_no)) t.blocklist_.insert(std::move(id));
        } else if (head.starts_with("@attrs")) {
            const auto id = normalize_id(head.substr(6), source, line_no);
            if (attr_lines.contains(id))
                throw ParseError(source, line_no, "duplicate @attrs record for '" + id + "'");
            attr_lines.emplace(id, line_no);
            auto& sig = t.signatures_[id];
            for (const auto& tag : text::split_trimmed(body, ',')) sig.insert(text::to_lower(tag));
        } else if (head.starts_with("@")) {
            throw ParseError(source, line_no, "unknown directive '" + std::string(head) + "'");
        } else {
            auto leaf = normalize_id(head, source, line_no);
            if (t.chains_.contains(leaf))
                throw ParseError(source, line_no, "duplicate chain record for '" + leaf + "'");
            t.chain_lines_.emplace(leaf, line_no);
            t.add_chain(std::move(leaf), parse_id_list(body, source, line_no));
        }
    }

    for (const auto& [id, line] : attr_lines)
        if (!t.concepts_.contains(id))
            throw ParseError(source, line, "@attrs for concept '" + id + "' not referenced by any chain");

    t.validate(source_name);
    t.build_indices();
    return t;
}

void Taxonomy::add_chain(ConceptId leaf, std::vector<ConceptId> chain) {
    concepts_.insert(leaf);
    for (const auto& c : chain) concepts_.insert(c);
    chains_.emplace(std::move(leaf), std::move(chain));
}

void Taxonomy::validate(std::string_view source_name) const {
    const std::string source(source_name);
    for (const auto& [leaf, chain] : chains_) {
        const auto line = chain_lines_.at(leaf);
        ConceptSet seen{leaf};
        for (const auto& c : chain) {
            if (!seen.insert(c).second) throw CycleError(c);
        }
        for (const auto& c : seen)
            if (blocklist_.contains(c))
                throw BlocklistError(source + ":" + std::to_string(line) + ": blocklisted concept '" +
                                     c + "' in chain of '" + leaf + "'");
    }

    // Cycle check over the union of edges.
    std::map<ConceptId, ConceptSet, std::less<>> parents;
    for (const auto& [leaf, chain] : chains_) {
        const ConceptId* child = &leaf;
        for (const auto& c : chain) {
            parents[*child].insert(c);
            child = &c;
        }
    }
    enum class Mark { kNone, kActive, kDone };
    std::map<std::string_view, Mark> marks;
    // Iterative DFS; frames hold (node, next-parent iterator).
    for (const auto& root : concepts_) {
        if (marks[root] != Mark::kNone) continue;
        std::vector<std::pair<std::string_view, ConceptSet::const_iterator>> stack;
        static const ConceptSet kEmpty;
        auto parents_of = [&](std::string_view id) -> const ConceptSet& {
            auto it = parents.find(id);
            return it == parents.end() ? kEmpty : it->second;
        };
        stack.emplace_back(root, parents_of(root).begin());
        marks[root] = Mark::kActive;
        while (!stack.empty()) {
            auto& [node, it] = stack.back();
            const auto& ps = parents_of(node);
            if (it == ps.end()) {
                marks[node] = Mark::kDone;
                stack.pop_back();
                continue;
            }
            const std::string_view next = *it++;
            auto& m = marks[next];
            if (m == Mark::kActive) throw CycleError(std::string(next));
            if (m == Mark::kNone) {
                m = Mark::kActive;
                stack.emplace_back(next, parents_of(next).begin());
            }
        }
    }
}

void Taxonomy::build_indices() {
    for (const auto& c : concepts_) {
        signatures_[c];  // every concept gets a (possibly empty) signature
        parents_[c];
        adjacency_[c];
    }
    for (const auto& [leaf, chain] : chains_) {
        const ConceptId* child = &leaf;
        for (const auto& c : chain) {
            parents_[*child].insert(c);
            adjacency_[*child].insert(c);
            adjacency_[c].insert(*child);
            child = &c;
        }
    }
    // Acyclic, so a memoized walk terminates.
    std::function<const ConceptSet&(const ConceptId&)> closure = [&](const ConceptId& id) -> const ConceptSet& {
        if (auto it = ancestors_.find(id); it != ancestors_.end()) return it->second;
        ConceptSet acc;
        for (const auto& p : parents_.at(id)) {
            acc.insert(p);
            const auto& up = closure(p);
            acc.insert(up.begin(), up.end());
        }
        return ancestors_.emplace(id, std::move(acc)).first->second;
    };
    for (const auto& c : concepts_) closure(c);
    for (const auto& c : concepts_) descendants_[c];
    for (const auto& [c, ancs] : ancestors_)
        for (const auto& a : ancs) descendants_[a].insert(c);
}

std::vector<ConceptId> Taxonomy::leaves() const {
    std::vector<ConceptId> out;
    out.reserve(chains_.size());
    for (const auto& [leaf, chain] : chains_) out.push_back(leaf);
    return out;
}

bool Taxonomy::contains(std::string_view id) const { return concepts_.find(id) != concepts_.end(); }

bool Taxonomy::is_leaf(std::string_view id) const { return chains_.find(id) != chains_.end(); }

const std::vector<ConceptId>& Taxonomy::hypernym_chain(std::string_view leaf) const {
    auto it = chains_.find(leaf);
    if (it == chains_.end()) throw UnknownConceptError(std::string(leaf));
    return it->second;
}

bool Taxonomy::is_strict_hypernym(std::string_view hyper, std::string_view hypo) const {
    if (!contains(hyper)) throw UnknownConceptError(std::string(hyper));
    if (!contains(hypo)) throw UnknownConceptError(std::string(hypo));
    if (auto it = chains_.find(hypo); it != chains_.end())
        return std::find(it->second.begin(), it->second.end(), hyper) != it->second.end();
    return ancestors_.find(hypo)->second.contains(hyper);
}

ConceptSet Taxonomy::ancestors(std::string_view id) const {
    auto it = ancestors_.find(id);
    if (it == ancestors_.end()) throw UnknownConceptError(std::string(id));
    return it->second;
}

ConceptSet Taxonomy::descendants(std::string_view id) const {
    auto it = descendants_.find(id);
    if (it == descendants_.end()) throw UnknownConceptError(std::string(id));
    return it->second;
}

std::size_t Taxonomy::path_length(std::string_view a, std::string_view b) const {
    if (!contains(a)) throw UnknownConceptError(std::string(a));
    if (!contains(b)) throw UnknownConceptError(std::string(b));
    if (a == b) return 0;
    std::map<std::string_view, std::size_t> dist{{a, 0}};
    std::deque<std::string_view> queue{a};
    while (!queue.empty()) {
        const auto node = queue.front();
        queue.pop_front();
        const auto d = dist[node];
        for (const auto& next : adjacency_.find(node)->second) {
            if (dist.contains(next)) continue;
            if (next == b) return d + 1;
            dist.emplace(next, d + 1);
            queue.push_back(next);
        }
    }
    throw DataError("concepts '" + std::string(a) + "' and '" + std::string(b) +
                    "' are not connected in the taxonomy");
}

double Taxonomy::path_similarity(std::string_view a, std::string_view b) const {
    return 1.0 / (1.0 + static_cast<double>(path_length(a, b)));
}

std::vector<ConceptId> Taxonomy::negative_candidates(std::string_view target,
                                                     const ConceptSet& scene_concepts,
                                                     const TagSet& required_tags) const {
    if (!contains(target)) throw UnknownConceptError(std::string(target));
    ConceptSet excluded;
    auto exclude_related = [&](std::string_view id) {
        excluded.emplace(id);
        if (auto it = ancestors_.find(id); it != ancestors_.end())
            excluded.insert(it->second.begin(), it->second.end());
        if (auto it = descendants_.find(id); it != descendants_.end())
            excluded.insert(it->second.begin(), it->second.end());
        if (auto it = chains_.find(id); it != chains_.end())
            excluded.insert(it->second.begin(), it->second.end());
    };
    exclude_related(target);
    for (const auto& s : scene_concepts) exclude_related(s);

    std::vector<ConceptId> out;
    for (const auto& c : concepts_) {
        if (excluded.contains(c)) continue;
        const auto& sig = signatures_.find(c)->second;
        if (!std::includes(sig.begin(), sig.end(), required_tags.begin(), required_tags.end()))
            continue;
        out.push_back(c);
    }
    return out;
}

const TagSet& Taxonomy::attribute_signature(std::string_view id) const {
    auto it = signatures_.find(id);
    if (it == signatures_.end()) throw UnknownConceptError(std::string(id));
    return it->second;
}

std::vector<std::pair<ConceptId, ConceptId>> Taxonomy::hyponym_hypernym_pairs() const {
    std::set<std::pair<ConceptId, ConceptId>> pairs;
    for (const auto& [leaf, chain] : chains_)
        for (const auto& h : chain) pairs.emplace(leaf, h);
    return {pairs.begin(), pairs.end()};
}

std::string Taxonomy::serialize() const {
    std::ostringstream out;
    if (!blocklist_.empty()) {
        out << "@blocklist:";
        bool first = true;
        for (const auto& b : blocklist_) out << (first ? " " : ", ") << b, first = false;
        out << '\n';
    }
    for (const auto& [leaf, chain] : chains_) {
        out << leaf << ':';
        for (std::size_t i = 0; i < chain.size(); ++i) out << (i ? ", " : " ") << chain[i];
        out << '\n';
    }
    for (const auto& [id, sig] : signatures_) {
        if (sig.empty()) continue;
        out << "@attrs " << id << ':';
        bool first = true;
        for (const auto& tag : sig) out << (first ? " " : ", ") << tag, first = false;
        out << '\n';
    }
    return out.str();
}

}  // namespace taxoqa
