#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace patchr::rdf {

namespace ns {
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view pro = "http://purl.org/hpi/patchr#";
inline constexpr std::string_view guo = "http://webr3.org/owl/guo#";
inline constexpr std::string_view prv = "http://purl.org/net/provenance/ns#";
inline constexpr std::string_view void_ = "http://rdfs.org/ns/void#";
inline constexpr std::string_view foaf = "http://xmlns.com/foaf/0.1/";
inline constexpr std::string_view dbp = "http://dbpedia.org/resource/";
inline constexpr std::string_view dbo = "http://dbpedia.org/ontology/";
}  // namespace ns

inline const std::string kRdfType = std::string(ns::rdf) + "type";
inline const std::string kXsdString = std::string(ns::xsd) + "string";
inline const std::string kLangString = std::string(ns::rdf) + "langString";

// Absolute IRI: a scheme followed by ':' and no whitespace, control
// characters or any of <>"{}|^`\ .
bool is_absolute_iri(std::string_view value);
bool is_blank_label(std::string_view label);
bool is_language_tag(std::string_view tag);

// Strong type for an absolute IRI. Construction validates.
class Iri {
public:
    explicit Iri(std::string value);

    const std::string& str() const noexcept { return value_; }

    auto operator<=>(const Iri&) const = default;
    bool operator==(const Iri&) const = default;

private:
    std::string value_;
};

enum class TermKind { Iri, BlankNode, Literal };

class Term {
public:
    static Term iri(std::string value);
    static Term iri(const Iri& value) { return iri(value.str()); }
    static Term blank(std::string label);
    // Plain literals carry xsd:string.
    static Term literal(std::string lexical, std::string datatype = kXsdString);
    static Term lang_literal(std::string lexical, std::string language);

    TermKind kind() const noexcept { return kind_; }
    bool is_iri() const noexcept { return kind_ == TermKind::Iri; }
    bool is_blank() const noexcept { return kind_ == TermKind::BlankNode; }
    bool is_literal() const noexcept { return kind_ == TermKind::Literal; }

    // IRI string, blank label or lexical form depending on kind().
    const std::string& value() const noexcept { return value_; }
    const std::string& datatype() const noexcept { return datatype_; }
    const std::string& language() const noexcept { return language_; }

    Iri as_iri() const;

    std::string to_ntriples() const;

    auto operator<=>(const Term&) const = default;
    bool operator==(const Term&) const = default;

private:
    Term(TermKind kind, std::string value, std::string datatype, std::string language)
        : kind_(kind), value_(std::move(value)), datatype_(std::move(datatype)),
          language_(std::move(language)) {}

    TermKind kind_;
    std::string value_;
    std::string datatype_;
    std::string language_;
};

struct Triple {
    Term subject;
    Term predicate;
    Term object;

    // Throws Error(InvalidTerm) for a literal subject or non-IRI predicate.
    Triple(Term s, Term p, Term o);

    std::string to_ntriples() const;

    auto operator<=>(const Triple&) const = default;
    bool operator==(const Triple&) const = default;
};

// Indexed set of triples with an optional graph name.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::optional<Iri> name) : name_(std::move(name)) {}

    const std::optional<Iri>& name() const noexcept { return name_; }
    void set_name(std::optional<Iri> name) { name_ = std::move(name); }

    // Returns false when the triple was already present.
    bool insert(const Triple& triple);
    // Returns false when the triple was absent.
    bool erase(const Triple& triple);
    bool contains(const Triple& triple) const { return triples_.contains(triple); }

    std::size_t size() const noexcept { return triples_.size(); }
    bool empty() const noexcept { return triples_.empty(); }
    const std::set<Triple>& triples() const noexcept { return triples_; }
    auto begin() const { return triples_.begin(); }
    auto end() const { return triples_.end(); }

    // Unbound positions match anything.
    std::set<Triple> match(const std::optional<Term>& s, const std::optional<Term>& p,
                           const std::optional<Term>& o) const;

    // True iff each index holds exactly the member triples under the right key.
    bool index_consistent() const;

    bool operator==(const Graph& other) const {
        return name_ == other.name_ && triples_ == other.triples_;
    }

private:
    using Index = std::map<Term, std::set<Triple>>;

    std::optional<Iri> name_;
    std::set<Triple> triples_;
    Index by_subject_;
    Index by_predicate_;
    Index by_object_;
};

std::set<Triple> graph_match(const Graph& graph, const std::optional<Term>& s,
                             const std::optional<Term>& p, const std::optional<Term>& o);

// Ordered label -> namespace map. Default-constructed maps hold the
// built-in prefixes (rdf, xsd, pro, guo, prv, void, foaf, dbp, dbo).
class PrefixMap {
public:
    PrefixMap();
    static PrefixMap empty_map();

    // Replaces the namespace when the label already exists.
    void set(const std::string& label, const std::string& namespace_iri);
    std::optional<std::string> find(std::string_view label) const;
    // Longest namespace whose remainder is a serializable local name.
    std::optional<std::pair<std::string, std::string>> compact(std::string_view iri) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
        return entries_;
    }

    bool operator==(const PrefixMap&) const = default;

private:
    struct NoBuiltins {};
    explicit PrefixMap(NoBuiltins) {}

    std::vector<std::pair<std::string, std::string>> entries_;
};

bool is_prefix_label(std::string_view label);
// Local names the serializers are willing to emit after a prefix.
bool is_safe_local_name(std::string_view local);

// Sorted, de-duplicated N-Triples lines. Throws Error(Canonicalization) on
// blank nodes.
std::vector<std::string> canonical_ntriples(const std::set<Triple>& triples);
std::vector<std::string> canonical_ntriples(const std::vector<Triple>& triples);

// Relabels blank nodes to b0, b1, ... so that isomorphic triple sets map to
// identical results regardless of their input labels.
std::map<std::string, std::string> canonical_blank_labels(const std::set<Triple>& triples);
std::set<Triple> relabel_blanks(const std::set<Triple>& triples,
                                const std::map<std::string, std::string>& labels);

// Equal up to blank-node relabeling.
bool isomorphic(const std::set<Triple>& a, const std::set<Triple>& b);
inline bool isomorphic(const Graph& a, const Graph& b) {
    return isomorphic(a.triples(), b.triples());
}

std::string escape_string(std::string_view text);

}  // namespace patchr::rdf

template <>
struct std::hash<patchr::rdf::Iri> {
    std::size_t operator()(const patchr::rdf::Iri& iri) const noexcept {
        return std::hash<std::string>{}(iri.str());
    }
};
