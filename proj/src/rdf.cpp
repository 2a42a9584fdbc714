#include "patchr/rdf.hpp"

#include "patchr/error.hpp"

#include <algorithm>
#include <cstdio>

namespace patchr::rdf {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }

bool is_forbidden_iri_char(unsigned char c) {
    if (c <= 0x20 || c == 0x7F) return true;
    switch (c) {
    case '<': case '>': case '"': case '{': case '}':
    case '|': case '^': case '`': case '\\':
        return true;
    default:
        return false;
    }
}

}  // namespace

bool is_absolute_iri(std::string_view value) {
    if (value.empty() || !is_alpha(value.front())) return false;
    for (unsigned char c : value) {
        if (is_forbidden_iri_char(c)) return false;
    }
    for (std::size_t i = 1; i < value.size(); ++i) {
        char c = value[i];
        if (c == ':') return true;
        if (!is_alnum(c) && c != '+' && c != '-' && c != '.') return false;
    }
    return false;
}

bool is_blank_label(std::string_view label) {
    return !label.empty() &&
           std::all_of(label.begin(), label.end(), [](char c) { return is_alnum(c) || c == '_'; });
}

bool is_language_tag(std::string_view tag) {
    // [a-zA-Z]+ ('-' [a-zA-Z0-9]+)*
    std::size_t i = 0;
    while (i < tag.size() && is_alpha(tag[i])) ++i;
    if (i == 0) return false;
    while (i < tag.size()) {
        if (tag[i] != '-') return false;
        std::size_t start = ++i;
        while (i < tag.size() && is_alnum(tag[i])) ++i;
        if (i == start) return false;
    }
    return true;
}

Iri::Iri(std::string value) : value_(std::move(value)) {
    if (!is_absolute_iri(value_)) {
        throw Error(ErrorCode::InvalidTerm, "not an absolute IRI: '" + value_ + "'");
    }
}

Term Term::iri(std::string value) {
    if (!is_absolute_iri(value)) {
        throw Error(ErrorCode::InvalidTerm, "not an absolute IRI: '" + value + "'");
    }
    return Term(TermKind::Iri, std::move(value), {}, {});
}

Term Term::blank(std::string label) {
    if (!is_blank_label(label)) {
        throw Error(ErrorCode::InvalidTerm, "invalid blank node label: '" + label + "'");
    }
    return Term(TermKind::BlankNode, std::move(label), {}, {});
}

Term Term::literal(std::string lexical, std::string datatype) {
    if (datatype.empty()) datatype = kXsdString;
    if (!is_absolute_iri(datatype)) {
        throw Error(ErrorCode::InvalidTerm, "literal datatype is not an absolute IRI: '" + datatype + "'");
    }
    if (datatype == kLangString) {
        throw Error(ErrorCode::InvalidTerm, "rdf:langString literal requires a language tag");
    }
    return Term(TermKind::Literal, std::move(lexical), std::move(datatype), {});
}

Term Term::lang_literal(std::string lexical, std::string language) {
    if (!is_language_tag(language)) {
        throw Error(ErrorCode::InvalidTerm, "invalid language tag: '" + language + "'");
    }
    return Term(TermKind::Literal, std::move(lexical), kLangString, std::move(language));
}

Iri Term::as_iri() const {
    if (!is_iri()) {
        throw Error(ErrorCode::InvalidTerm, "expected an IRI, got " + to_ntriples());
    }
    return Iri(value_);
}

std::string escape_string(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char c : text) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (c < 0x20 || c == 0x7F) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04X", c);
                out += buf;
            } else {
                out += static_cast<char>(c);
            }
        }
    }
    return out;
}

std::string Term::to_ntriples() const {
    switch (kind_) {
    case TermKind::Iri:
        return "<" + value_ + ">";
    case TermKind::BlankNode:
        return "_:" + value_;
    case TermKind::Literal: {
        std::string out = "\"" + escape_string(value_) + "\"";
        if (!language_.empty()) {
            out += "@" + language_;
        } else if (datatype_ != kXsdString) {
            out += "^^<" + datatype_ + ">";
        }
        return out;
    }
    }
    return {};
}

Triple::Triple(Term s, Term p, Term o)
    : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {
    if (subject.is_literal()) {
        throw Error(ErrorCode::InvalidTerm, "literal in subject position: " + subject.to_ntriples());
    }
    if (!predicate.is_iri()) {
        throw Error(ErrorCode::InvalidTerm, "predicate must be an IRI: " + predicate.to_ntriples());
    }
}

std::string Triple::to_ntriples() const {
    return subject.to_ntriples() + " " + predicate.to_ntriples() + " " + object.to_ntriples() + " .";
}

bool Graph::insert(const Triple& triple) {
    if (!triples_.insert(triple).second) return false;
    by_subject_[triple.subject].insert(triple);
    by_predicate_[triple.predicate].insert(triple);
    by_object_[triple.object].insert(triple);
    return true;
}

bool Graph::erase(const Triple& triple) {
    if (triples_.erase(triple) == 0) return false;
    auto drop = [&](Index& index, const Term& key) {
        auto it = index.find(key);
        it->second.erase(triple);
        if (it->second.empty()) index.erase(it);
    };
    drop(by_subject_, triple.subject);
    drop(by_predicate_, triple.predicate);
    drop(by_object_, triple.object);
    return true;
}

std::set<Triple> Graph::match(const std::optional<Term>& s, const std::optional<Term>& p,
                              const std::optional<Term>& o) const {
    const std::set<Triple>* candidates = &triples_;
    static const std::set<Triple> kNone;
    auto narrow = [&](const Index& index, const std::optional<Term>& key) {
        if (!key) return;
        auto it = index.find(*key);
        const std::set<Triple>* found = it == index.end() ? &kNone : &it->second;
        if (found->size() < candidates->size()) candidates = found;
    };
    narrow(by_subject_, s);
    narrow(by_predicate_, p);
    narrow(by_object_, o);

    std::set<Triple> out;
    for (const Triple& t : *candidates) {
        if ((!s || t.subject == *s) && (!p || t.predicate == *p) && (!o || t.object == *o)) {
            out.insert(t);
        }
    }
    return out;
}

bool Graph::index_consistent() const {
    auto check = [&](const Index& index, auto key_of) {
        std::size_t total = 0;
        for (const auto& [key, members] : index) {
            if (members.empty()) return false;
            for (const Triple& t : members) {
                if (!(key_of(t) == key) || !triples_.contains(t)) return false;
            }
            total += members.size();
        }
        return total == triples_.size();
    };
    return check(by_subject_, [](const Triple& t) -> const Term& { return t.subject; }) &&
           check(by_predicate_, [](const Triple& t) -> const Term& { return t.predicate; }) &&
           check(by_object_, [](const Triple& t) -> const Term& { return t.object; });
}

std::set<Triple> graph_match(const Graph& graph, const std::optional<Term>& s,
                             const std::optional<Term>& p, const std::optional<Term>& o) {
    return graph.match(s, p, o);
}

bool is_prefix_label(std::string_view label) {
    if (label.empty()) return true;
    if (!is_alpha(label.front())) return false;
    if (label.back() == '.') return false;
    return std::all_of(label.begin(), label.end(),
                       [](char c) { return is_alnum(c) || c == '_' || c == '-' || c == '.'; });
}

bool is_safe_local_name(std::string_view local) {
    if (local.empty()) return true;
    if (local.front() == '.' || local.front() == '-' || local.back() == '.') return false;
    return std::all_of(local.begin(), local.end(),
                       [](char c) { return is_alnum(c) || c == '_' || c == '-' || c == '.'; });
}

PrefixMap::PrefixMap() {
    entries_ = {
        {"rdf", std::string(ns::rdf)},   {"xsd", std::string(ns::xsd)},
        {"pro", std::string(ns::pro)},   {"guo", std::string(ns::guo)},
        {"prv", std::string(ns::prv)},   {"void", std::string(ns::void_)},
        {"foaf", std::string(ns::foaf)}, {"dbp", std::string(ns::dbp)},
        {"dbo", std::string(ns::dbo)},
    };
}

PrefixMap PrefixMap::empty_map() { return PrefixMap(NoBuiltins{}); }

void PrefixMap::set(const std::string& label, const std::string& namespace_iri) {
    if (!is_prefix_label(label)) {
        throw Error(ErrorCode::InvalidTerm, "invalid prefix label: '" + label + "'");
    }
    if (namespace_iri.empty()) {
        throw Error(ErrorCode::InvalidTerm, "empty namespace for prefix '" + label + "'");
    }
    for (auto& entry : entries_) {
        if (entry.first == label) {
            entry.second = namespace_iri;
            return;
        }
    }
    entries_.emplace_back(label, namespace_iri);
}

std::optional<std::string> PrefixMap::find(std::string_view label) const {
    for (const auto& [l, ns] : entries_) {
        if (l == label) return ns;
    }
    return std::nullopt;
}

std::optional<std::pair<std::string, std::string>> PrefixMap::compact(std::string_view iri) const {
    const std::pair<std::string, std::string>* best = nullptr;
    for (const auto& entry : entries_) {
        const std::string& ns = entry.second;
        if (iri.size() < ns.size() || iri.compare(0, ns.size(), ns) != 0) continue;
        if (!is_safe_local_name(iri.substr(ns.size()))) continue;
        if (!best || ns.size() > best->second.size() ||
            (ns.size() == best->second.size() && entry.first < best->first)) {
            best = &entry;
        }
    }
    if (!best) return std::nullopt;
    return std::make_pair(best->first, std::string(iri.substr(best->second.size())));
}

std::vector<std::string> canonical_ntriples(const std::set<Triple>& triples) {
    std::vector<std::string> lines;
    lines.reserve(triples.size());
    for (const Triple& t : triples) {
        if (t.subject.is_blank() || t.object.is_blank()) {
            throw Error(ErrorCode::Canonicalization,
                        "blank node in triple to canonicalize: " + t.to_ntriples());
        }
        lines.push_back(t.to_ntriples());
    }
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    return lines;
}

std::vector<std::string> canonical_ntriples(const std::vector<Triple>& triples) {
    return canonical_ntriples(std::set<Triple>(triples.begin(), triples.end()));
}

}  // namespace patchr::rdf
