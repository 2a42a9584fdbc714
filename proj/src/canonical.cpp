// Blank-node canonical labeling.
//
// Colour refinement over the blank nodes (colour = hash of own colour plus
// the sorted signatures of incident triples), then individualisation of the
// first non-singleton colour class with branching over its members. Among
// branches, the one whose relabelled N-Triples lines sort smallest wins.
// Members related to an already explored one by a transposition that is an
// automorphism are skipped; their branches yield identical results.

#include "patchr/rdf.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_set>

namespace patchr::rdf {

namespace {

std::uint64_t fnv1a(std::uint64_t seed, std::string_view bytes) {
    std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

class Canonicalizer {
public:
    explicit Canonicalizer(const std::set<Triple>& triples) : set_(triples) {
        triples_.assign(triples.begin(), triples.end());
        std::set<std::string> labels;
        for (const Triple& t : triples_) {
            if (t.subject.is_blank()) labels.insert(t.subject.value());
            if (t.object.is_blank()) labels.insert(t.object.value());
        }
        blanks_.assign(labels.begin(), labels.end());
        for (std::size_t i = 0; i < blanks_.size(); ++i) index_.emplace(blanks_[i], i);
        incidence_.resize(blanks_.size());
        for (std::size_t t = 0; t < triples_.size(); ++t) {
            std::unordered_set<std::size_t> seen;
            for (const Term* term : {&triples_[t].subject, &triples_[t].object}) {
                if (term->is_blank()) {
                    std::size_t b = index_.at(term->value());
                    if (seen.insert(b).second) incidence_[b].push_back(t);
                }
            }
        }
    }

    std::map<std::string, std::string> run() {
        std::map<std::string, std::string> labels;
        if (blanks_.empty()) return labels;
        std::vector<std::uint64_t> colors(blanks_.size(), 0);
        Leaf best = search(colors);
        std::vector<std::size_t> order(blanks_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return best.colors[a] < best.colors[b]; });
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            labels.emplace(blanks_[order[rank]], "b" + std::to_string(rank));
        }
        return labels;
    }

private:
    struct Leaf {
        std::vector<std::string> lines;
        std::vector<std::uint64_t> colors;
    };

    std::string encode(const Term& term, std::size_t self,
                       const std::vector<std::uint64_t>& colors) const {
        if (!term.is_blank()) return term.to_ntriples();
        std::size_t b = index_.at(term.value());
        if (b == self) return "@";
        return "#" + hex(colors[b]);
    }

    static std::size_t distinct(const std::vector<std::uint64_t>& colors) {
        return std::set<std::uint64_t>(colors.begin(), colors.end()).size();
    }

    std::vector<std::uint64_t> refine(std::vector<std::uint64_t> colors) const {
        std::size_t classes = distinct(colors);
        for (;;) {
            std::vector<std::uint64_t> next(colors.size());
            for (std::size_t b = 0; b < blanks_.size(); ++b) {
                std::vector<std::string> sigs;
                sigs.reserve(incidence_[b].size());
                for (std::size_t t : incidence_[b]) {
                    const Triple& tr = triples_[t];
                    sigs.push_back(encode(tr.subject, b, colors) + " " + tr.predicate.to_ntriples() +
                                   " " + encode(tr.object, b, colors));
                }
                std::sort(sigs.begin(), sigs.end());
                std::uint64_t h = fnv1a(colors[b], "colour");
                for (const std::string& s : sigs) h = fnv1a(h, s + "\n");
                next[b] = h;
            }
            std::size_t next_classes = distinct(next);
            colors = std::move(next);
            if (next_classes == classes) return colors;
            classes = next_classes;
        }
    }

    std::vector<std::string> render(const std::vector<std::uint64_t>& colors) const {
        std::vector<std::size_t> order(blanks_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return colors[a] < colors[b]; });
        std::vector<std::string> rank_label(blanks_.size());
        for (std::size_t r = 0; r < order.size(); ++r) rank_label[order[r]] = "_:b" + std::to_string(r);
        auto enc = [&](const Term& term) {
            return term.is_blank() ? rank_label[index_.at(term.value())] : term.to_ntriples();
        };
        std::vector<std::string> lines;
        lines.reserve(triples_.size());
        for (const Triple& t : triples_) {
            lines.push_back(enc(t.subject) + " " + t.predicate.to_ntriples() + " " + enc(t.object) + " .");
        }
        std::sort(lines.begin(), lines.end());
        return lines;
    }

    Term swap(const Term& term, const std::string& a, const std::string& b) const {
        if (!term.is_blank()) return term;
        if (term.value() == a) return Term::blank(b);
        if (term.value() == b) return Term::blank(a);
        return term;
    }

    bool transposition_is_automorphism(std::size_t x, std::size_t y) const {
        const std::string& a = blanks_[x];
        const std::string& b = blanks_[y];
        for (std::size_t b_idx : {x, y}) {
            for (std::size_t t : incidence_[b_idx]) {
                const Triple& tr = triples_[t];
                Triple moved(swap(tr.subject, a, b), tr.predicate, swap(tr.object, a, b));
                if (!set_.contains(moved)) return false;
            }
        }
        return true;
    }

    Leaf search(const std::vector<std::uint64_t>& start) const {
        std::vector<std::uint64_t> colors = refine(start);
        std::map<std::uint64_t, std::vector<std::size_t>> classes;
        for (std::size_t b = 0; b < colors.size(); ++b) classes[colors[b]].push_back(b);

        const std::vector<std::size_t>* target = nullptr;
        for (const auto& [color, members] : classes) {
            if (members.size() > 1) {
                target = &members;
                break;
            }
        }
        if (!target) return Leaf{render(colors), colors};

        std::optional<Leaf> best;
        std::vector<std::size_t> explored;
        for (std::size_t member : *target) {
            bool redundant = std::any_of(explored.begin(), explored.end(), [&](std::size_t rep) {
                return transposition_is_automorphism(rep, member);
            });
            if (redundant) continue;
            std::vector<std::uint64_t> branch = colors;
            branch[member] = fnv1a(colors[member], "individualised");
            Leaf leaf = search(branch);
            if (!best || leaf.lines < best->lines) best = std::move(leaf);
            explored.push_back(member);
        }
        return std::move(*best);
    }

    const std::set<Triple>& set_;
    std::vector<Triple> triples_;
    std::vector<std::string> blanks_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> incidence_;
};

}  // namespace

std::map<std::string, std::string> canonical_blank_labels(const std::set<Triple>& triples) {
    return Canonicalizer(triples).run();
}

std::set<Triple> relabel_blanks(const std::set<Triple>& triples,
                                const std::map<std::string, std::string>& labels) {
    auto map_term = [&](const Term& term) {
        if (!term.is_blank()) return term;
        auto it = labels.find(term.value());
        return it == labels.end() ? term : Term::blank(it->second);
    };
    std::set<Triple> out;
    for (const Triple& t : triples) out.emplace(map_term(t.subject), t.predicate, map_term(t.object));
    return out;
}

bool isomorphic(const std::set<Triple>& a, const std::set<Triple>& b) {
    if (a.size() != b.size()) return false;
    return relabel_blanks(a, canonical_blank_labels(a)) == relabel_blanks(b, canonical_blank_labels(b));
}

}  // namespace patchr::rdf
