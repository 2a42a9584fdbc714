#include "patchr/turtle.hpp"

#include <algorithm>

namespace patchr::rdf {

std::string render_term(const Term& term, const PrefixMap& prefixes, std::set<std::string>* used) {
    auto iri = [&](const std::string& value) {
        if (auto pn = prefixes.compact(value)) {
            if (used) used->insert(pn->first);
            return pn->first + ":" + pn->second;
        }
        return "<" + value + ">";
    };
    switch (term.kind()) {
    case TermKind::Iri:
        return iri(term.value());
    case TermKind::BlankNode:
        return "_:" + term.value();
    case TermKind::Literal: {
        std::string out = "\"" + escape_string(term.value()) + "\"";
        if (!term.language().empty()) {
            out += "@" + term.language();
        } else if (term.datatype() != kXsdString) {
            out += "^^" + iri(term.datatype());
        }
        return out;
    }
    }
    return {};
}

namespace {

struct NtLess {
    bool operator()(const Term& a, const Term& b) const {
        if (a == b) return false;
        std::string na = a.to_ntriples();
        std::string nb = b.to_ntriples();
        return na != nb ? na < nb : a < b;
    }
};

using PredicateGroups = std::map<Term, std::vector<Term>, NtLess>;

class Writer {
public:
    Writer(const Graph& graph, const PrefixMap& prefixes) : prefixes_(prefixes) {
        std::set<Triple> triples = relabel_blanks(graph.triples(), canonical_blank_labels(graph.triples()));
        for (const Triple& t : triples) {
            subjects_[t.subject][t.predicate].push_back(t.object);
            if (t.object.is_blank()) {
                ++refcount_[t.object.value()];
                parent_.insert_or_assign(t.object.value(), t.subject);
            }
        }
        for (auto& [subject, groups] : subjects_) {
            for (auto& [predicate, objects] : groups) std::sort(objects.begin(), objects.end(), NtLess{});
        }
        choose_inlined();
    }

    std::string run() {
        std::string body;
        bool first = true;
        for (const auto& [subject, groups] : subjects_) {
            if (subject.is_blank() && inlined_.contains(subject.value())) continue;
            if (!first) body += "\n";
            first = false;
            body += render_term(subject, prefixes_, &used_) + " ";
            body += render_groups(groups, 2);
            body += " .\n";
        }
        if (body.empty()) return {};
        std::string header;
        for (const auto& [label, ns] : sorted_used_prefixes()) {
            header += "@prefix " + label + ": <" + ns + "> .\n";
        }
        if (!header.empty()) header += "\n";
        return header + body;
    }

private:
    std::vector<std::pair<std::string, std::string>> sorted_used_prefixes() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& entry : prefixes_.entries()) {
            if (used_.contains(entry.first)) out.push_back(entry);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    void choose_inlined() {
        for (const auto& [label, count] : refcount_) {
            if (count == 1) inlined_.insert(label);
        }
        // Break reference cycles among inlining candidates by keeping the
        // smallest label of each cycle as a labelled node.
        bool changed = true;
        while (changed) {
            changed = false;
            for (const std::string& start : inlined_) {
                std::set<std::string> path{start};
                std::string current = start;
                bool cycle = false;
                for (;;) {
                    const Term& up = parent_.at(current);
                    if (!up.is_blank() || !inlined_.contains(up.value())) break;
                    if (up.value() == start) {
                        cycle = true;
                        break;
                    }
                    if (!path.insert(up.value()).second) break;
                    current = up.value();
                }
                if (cycle) {
                    inlined_.erase(*path.begin());
                    changed = true;
                    break;
                }
            }
        }
    }

    std::string render_object(const Term& object, std::size_t indent) {
        if (!object.is_blank() || !inlined_.contains(object.value())) {
            return render_term(object, prefixes_, &used_);
        }
        auto it = subjects_.find(object);
        if (it == subjects_.end()) return "[]";
        std::string inner(indent + 2, ' ');
        return "[\n" + inner + render_groups(it->second, indent + 2) + "\n" + std::string(indent, ' ') + "]";
    }

    std::string render_groups(const PredicateGroups& groups, std::size_t indent) {
        std::string out;
        bool first = true;
        for (const auto& [predicate, objects] : groups) {
            if (!first) out += " ;\n" + std::string(indent, ' ');
            first = false;
            out += predicate.value() == kRdfType ? std::string("a") : render_term(predicate, prefixes_, &used_);
            out += " ";
            for (std::size_t i = 0; i < objects.size(); ++i) {
                if (i) out += " , ";
                out += render_object(objects[i], indent);
            }
        }
        return out;
    }

    const PrefixMap& prefixes_;
    std::map<Term, PredicateGroups, NtLess> subjects_;
    std::map<std::string, std::size_t> refcount_;
    std::map<std::string, Term> parent_;
    std::set<std::string> inlined_;
    std::set<std::string> used_;
};

}  // namespace

std::string serialize_turtle(const Graph& graph, const PrefixMap& prefixes) {
    if (graph.empty()) return {};
    return Writer(graph, prefixes).run();
}

}  // namespace patchr::rdf
