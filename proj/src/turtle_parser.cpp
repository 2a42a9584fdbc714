#include "patchr/turtle.hpp"

#include "patchr/error.hpp"

#include <cstdint>

namespace patchr::rdf {

namespace {

constexpr std::size_t kMaxNesting = 256;

enum class Tok {
    End,
    IriRef,      // text = raw IRI between the brackets, escapes decoded
    PrefixedName,// text = "prefix:local" (local unescaped)
    BlankLabel,  // text = label after "_:"
    String,      // text = decoded lexical form
    AtWord,      // text = word after '@'
    KeywordA,
    Dot,
    Semicolon,
    Comma,
    LBracket,
    RBracket,
    Carets,
};

struct Token {
    Tok type = Tok::End;
    std::string text;
    std::string raw;
    std::size_t line = 1;
    std::size_t column = 1;
};

bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_name_start(unsigned char c) { return is_alpha(c) || c == '_' || c >= 0x80; }
bool is_name_char(unsigned char c) {
    return is_name_start(c) || is_digit(c) || c == '-' || c == '.';
}
bool is_local_char(unsigned char c) { return is_name_char(c) || c == ':' || c == '%'; }

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Offset of the first byte that breaks UTF-8 well-formedness, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        std::uint32_t cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return i;
        }
        if (i + len > s.size()) return i;
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return i;
            cp = (cp << 6) | (cc & 0x3F);
        }
        bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
        if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
        i += len;
    }
    return std::string_view::npos;
}

class Lexer {
public:
    explicit Lexer(std::string_view input) : in_(input) {}

    Token next() {
        skip_space();
        Token tok;
        tok.line = line_;
        tok.column = column_;
        if (at_end()) return tok;

        std::size_t start = pos_;
        unsigned char c = peek();
        switch (c) {
        case '<': tok.type = Tok::IriRef; tok.text = lex_iri(tok); break;
        case '"':
        case '\'': tok.type = Tok::String; tok.text = lex_string(tok); break;
        case '@': {
            advance();
            std::string word;
            while (!at_end() && (is_alpha(peek()) || is_digit(peek()) || peek() == '-')) word += static_cast<char>(advance());
            if (word.empty()) fail(tok, "@", "expected a directive or language tag after '@'");
            tok.type = Tok::AtWord;
            tok.text = word;
            break;
        }
        case '.': advance(); tok.type = Tok::Dot; break;
        case ';': advance(); tok.type = Tok::Semicolon; break;
        case ',': advance(); tok.type = Tok::Comma; break;
        case '[': advance(); tok.type = Tok::LBracket; break;
        case ']': advance(); tok.type = Tok::RBracket; break;
        case '^':
            advance();
            if (at_end() || peek() != '^') fail(tok, "^", "expected '^^'");
            advance();
            tok.type = Tok::Carets;
            break;
        case '(':
        case ')':
            fail(tok, std::string(1, static_cast<char>(c)), "collections are not supported");
            break;
        default:
            if (c == '_' && pos_ + 1 < in_.size() && in_[pos_ + 1] == ':') {
                advance();
                advance();
                tok.type = Tok::BlankLabel;
                tok.text = lex_blank_label(tok);
            } else if (is_digit(c) || c == '+' || c == '-') {
                fail(tok, std::string(1, static_cast<char>(c)), "numeric literals are not supported");
            } else if (is_name_start(c) || c == ':') {
                lex_name(tok);
            } else {
                fail(tok, std::string(1, static_cast<char>(c)), "unexpected character");
            }
        }
        tok.raw = std::string(in_.substr(start, pos_ - start));
        return tok;
    }

    [[noreturn]] void fail(const Token& at, const std::string& token, const std::string& message) const {
        throw ParseError(ErrorCode::Syntax, at.line, at.column, token, message);
    }

private:
    bool at_end() const { return pos_ >= in_.size(); }
    unsigned char peek() const { return static_cast<unsigned char>(in_[pos_]); }
    unsigned char advance() {
        unsigned char c = static_cast<unsigned char>(in_[pos_++]);
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    void skip_space() {
        while (!at_end()) {
            unsigned char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::uint32_t lex_hex(const Token& tok, int digits) {
        std::uint32_t cp = 0;
        for (int i = 0; i < digits; ++i) {
            if (at_end()) fail(tok, "\\u", "truncated unicode escape");
            unsigned char h = advance();
            cp <<= 4;
            if (is_digit(h)) cp |= h - '0';
            else if (h >= 'a' && h <= 'f') cp |= h - 'a' + 10;
            else if (h >= 'A' && h <= 'F') cp |= h - 'A' + 10;
            else fail(tok, std::string(1, static_cast<char>(h)), "invalid hex digit in unicode escape");
        }
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail(tok, "\\u", "escape is not a Unicode scalar value");
        return cp;
    }

    std::string lex_iri(const Token& tok) {
        advance();  // '<'
        std::string out;
        for (;;) {
            if (at_end()) fail(tok, "<", "unterminated IRI");
            unsigned char c = advance();
            if (c == '>') break;
            if (c == '\\') {
                if (at_end()) fail(tok, "\\", "truncated escape in IRI");
                unsigned char e = advance();
                if (e == 'u') append_utf8(out, lex_hex(tok, 4));
                else if (e == 'U') append_utf8(out, lex_hex(tok, 8));
                else fail(tok, std::string("\\") + static_cast<char>(e), "invalid escape in IRI");
                continue;
            }
            if (c <= 0x20 || c == '<' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' || c == '`') {
                fail(tok, std::string(1, static_cast<char>(c)), "character not allowed in IRI");
            }
            out += static_cast<char>(c);
        }
        return out;
    }

    std::string lex_string(const Token& tok) {
        unsigned char quote = advance();
        bool long_form = pos_ + 1 < in_.size() && in_[pos_] == static_cast<char>(quote) &&
                         in_[pos_ + 1] == static_cast<char>(quote);
        if (long_form) {
            advance();
            advance();
        }
        std::string out;
        for (;;) {
            if (at_end()) fail(tok, std::string(1, static_cast<char>(quote)), "unterminated string");
            unsigned char c = advance();
            if (c == quote) {
                if (!long_form) break;
                if (pos_ + 1 < in_.size() && in_[pos_] == static_cast<char>(quote) &&
                    in_[pos_ + 1] == static_cast<char>(quote)) {
                    advance();
                    advance();
                    // Quotes directly before the closing delimiter belong to the content.
                    while (!at_end() && peek() == quote) {
                        out += static_cast<char>(quote);
                        advance();
                    }
                    break;
                }
                out += static_cast<char>(c);
                continue;
            }
            if (c == '\\') {
                if (at_end()) fail(tok, "\\", "truncated escape in string");
                unsigned char e = advance();
                switch (e) {
                case 't': out += '\t'; break;
                case 'b': out += '\b'; break;
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                case 'f': out += '\f'; break;
                case '"': out += '"'; break;
                case '\'': out += '\''; break;
                case '\\': out += '\\'; break;
                case 'u': append_utf8(out, lex_hex(tok, 4)); break;
                case 'U': append_utf8(out, lex_hex(tok, 8)); break;
                default: fail(tok, std::string("\\") + static_cast<char>(e), "invalid escape in string");
                }
                continue;
            }
            if (!long_form && (c == '\n' || c == '\r')) fail(tok, "\\n", "newline in single-line string");
            out += static_cast<char>(c);
        }
        return out;
    }

    std::string lex_blank_label(const Token& tok) {
        std::string label;
        if (at_end() || !(is_name_start(peek()) || is_digit(peek()))) fail(tok, "_:", "empty blank node label");
        while (!at_end() && is_name_char(peek())) label += static_cast<char>(advance());
        while (!label.empty() && label.back() == '.') {
            label.pop_back();
            retreat();
        }
        return label;
    }

    void lex_name(Token& tok) {
        std::string prefix;
        while (!at_end() && is_name_char(peek())) prefix += static_cast<char>(advance());
        if (at_end() || peek() != ':') {
            while (!prefix.empty() && prefix.back() == '.') {
                prefix.pop_back();
                retreat();
            }
            if (prefix == "a") {
                tok.type = Tok::KeywordA;
                return;
            }
            if (prefix == "true" || prefix == "false") fail(tok, prefix, "boolean literals are not supported");
            fail(tok, prefix.empty() ? std::string(1, static_cast<char>(peek())) : prefix,
                 "unexpected bare word (expected prefixed name)");
        }
        advance();  // ':'
        std::string local;
        std::size_t trailing_dots = 0;
        while (!at_end()) {
            unsigned char c = peek();
            if (c == '\\') {
                advance();
                if (at_end()) fail(tok, "\\", "truncated escape in local name");
                unsigned char e = advance();
                static constexpr std::string_view kEscapable = "_~.-!$&'()*+,;=/?#@%";
                if (kEscapable.find(static_cast<char>(e)) == std::string_view::npos) {
                    fail(tok, std::string("\\") + static_cast<char>(e), "invalid escape in local name");
                }
                local += static_cast<char>(e);
                trailing_dots = 0;
            } else if (is_local_char(c)) {
                local += static_cast<char>(advance());
                trailing_dots = c == '.' ? trailing_dots + 1 : 0;
            } else {
                break;
            }
        }
        for (; trailing_dots > 0; --trailing_dots) {
            local.pop_back();
            retreat();
        }
        tok.type = Tok::PrefixedName;
        tok.text = prefix + ":" + local;
    }

    // Only used to give back '.' characters, which never span lines.
    void retreat() {
        --pos_;
        --column_;
    }

    std::string_view in_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

bool has_scheme(std::string_view iri) {
    if (iri.empty() || !is_alpha(static_cast<unsigned char>(iri[0]))) return false;
    for (std::size_t i = 1; i < iri.size(); ++i) {
        char c = iri[i];
        if (c == ':') return true;
        if (!is_alpha(static_cast<unsigned char>(c)) && !is_digit(static_cast<unsigned char>(c)) && c != '+' &&
            c != '-' && c != '.') {
            return false;
        }
    }
    return false;
}

std::string remove_dot_segments(std::string path) {
    std::vector<std::string> out;
    std::size_t i = 0;
    bool absolute = !path.empty() && path[0] == '/';
    bool trailing = false;
    while (i <= path.size()) {
        std::size_t j = path.find('/', i);
        if (j == std::string::npos) j = path.size();
        std::string seg = path.substr(i, j - i);
        trailing = false;
        if (seg == "..") {
            if (!out.empty()) out.pop_back();
            trailing = true;
        } else if (seg == ".") {
            trailing = true;
        } else if (!(seg.empty() && i == 0 && absolute)) {
            out.push_back(seg);
        }
        i = j + 1;
    }
    std::string result = absolute ? "/" : "";
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (k) result += "/";
        result += out[k];
    }
    if (trailing && (result.empty() || result.back() != '/')) result += "/";
    return result;
}

// Reference resolution for the reference forms that occur in practice:
// absolute, fragment-only, network-path, absolute-path and relative-path.
std::string resolve(std::string_view reference, const std::optional<std::string>& base) {
    if (has_scheme(reference) || !base) return std::string(reference);
    const std::string& b = *base;
    std::size_t scheme_end = b.find(':');
    if (scheme_end == std::string::npos) return std::string(reference);
    std::string scheme = b.substr(0, scheme_end + 1);
    std::string rest = b.substr(scheme_end + 1);
    std::string authority;
    std::string path = rest;
    if (rest.rfind("//", 0) == 0) {
        std::size_t slash = rest.find_first_of("/?#", 2);
        authority = rest.substr(0, slash == std::string::npos ? rest.size() : slash);
        path = slash == std::string::npos ? "" : rest.substr(slash);
    }
    std::string base_no_fragment = b.substr(0, b.find('#'));
    if (reference.empty()) return base_no_fragment;
    if (reference[0] == '#') return base_no_fragment + std::string(reference);
    if (reference.rfind("//", 0) == 0) return scheme + std::string(reference);
    std::string path_only = path.substr(0, path.find_first_of("?#"));
    if (reference[0] == '?') return scheme + authority + path_only + std::string(reference);
    if (reference[0] == '/') return scheme + authority + remove_dot_segments(std::string(reference));
    std::size_t last = path_only.rfind('/');
    std::string dir = last == std::string::npos ? (authority.empty() ? "" : "/") : path_only.substr(0, last + 1);
    return scheme + authority + remove_dot_segments(dir + std::string(reference));
}

class Parser {
public:
    Parser(std::string_view input, std::optional<std::string> base)
        : lexer_(input), base_(std::move(base)) {}

    ParsedDocument run() {
        advance();
        while (tok_.type != Tok::End) statement();
        return {std::move(graph_), std::move(prefixes_)};
    }

private:
    void advance() { tok_ = lexer_.next(); }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(ErrorCode::Syntax, tok_.line, tok_.column, describe(tok_), message);
    }

    static std::string describe(const Token& t) {
        if (t.type == Tok::End) return "<end of input>";
        return t.raw.size() > 64 ? t.raw.substr(0, 64) + "..." : t.raw;
    }

    void expect(Tok type, const char* what) {
        if (tok_.type != type) fail(std::string("expected ") + what);
        advance();
    }

    void statement() {
        if (tok_.type == Tok::AtWord) {
            directive();
            return;
        }
        seen_triples_ = true;
        triples();
        expect(Tok::Dot, "'.' at end of statement");
    }

    void directive() {
        Token at = tok_;
        if (at.text == "prefix") {
            advance();
            if (tok_.type != Tok::PrefixedName || tok_.text.back() != ':') fail("expected a prefix label ending in ':'");
            std::string label = tok_.text.substr(0, tok_.text.size() - 1);
            if (!is_prefix_label(label)) fail("invalid prefix label");
            advance();
            if (tok_.type != Tok::IriRef) fail("expected <namespace IRI>");
            std::string ns = absolute(tok_, tok_.text);
            advance();
            expect(Tok::Dot, "'.' after @prefix directive");
            prefixes_.set(label, ns);
        } else if (at.text == "base") {
            if (seen_triples_ || seen_base_) fail("@base is only allowed once, before the first statement");
            seen_base_ = true;
            advance();
            if (tok_.type != Tok::IriRef) fail("expected <base IRI>");
            base_ = absolute(tok_, tok_.text);
            advance();
            expect(Tok::Dot, "'.' after @base directive");
        } else {
            fail("unknown directive '@" + at.text + "'");
        }
    }

    std::string absolute(const Token& at, const std::string& reference) const {
        std::string iri = resolve(reference, base_);
        if (!is_absolute_iri(iri)) {
            throw ParseError(ErrorCode::RelativeIri, at.line, at.column, describe(at),
                             "IRI is not absolute after base resolution: '" + iri + "'");
        }
        return iri;
    }

    Term fresh_blank() { return Term::blank("b" + std::to_string(next_blank_++)); }

    Term labelled_blank(const std::string& label) {
        auto it = blank_labels_.find(label);
        if (it != blank_labels_.end()) return it->second;
        Term t = fresh_blank();
        blank_labels_.emplace(label, t);
        return t;
    }

    Term iri_term() {
        Token at = tok_;
        if (tok_.type == Tok::IriRef) {
            advance();
            return Term::iri(absolute(at, at.text));
        }
        if (tok_.type == Tok::PrefixedName) {
            std::size_t colon = at.text.find(':');
            std::string prefix = at.text.substr(0, colon);
            auto ns = prefixes_.find(prefix);
            if (!ns) {
                throw ParseError(ErrorCode::UndefinedPrefix, at.line, at.column, describe(at),
                                 "undefined prefix '" + prefix + "'");
            }
            std::string iri = *ns + at.text.substr(colon + 1);
            if (!is_absolute_iri(iri)) {
                throw ParseError(ErrorCode::Syntax, at.line, at.column, describe(at),
                                 "prefixed name expands to an invalid IRI");
            }
            advance();
            return Term::iri(iri);
        }
        fail("expected an IRI");
    }

    void triples() {
        if (tok_.type == Tok::LBracket) {
            Term subject = fresh_blank();
            advance();
            if (tok_.type == Tok::RBracket) {
                advance();
                predicate_object_list(subject, 0);
                return;
            }
            predicate_object_list(subject, 1);
            expect(Tok::RBracket, "']'");
            if (tok_.type != Tok::Dot) predicate_object_list(subject, 0);
            return;
        }
        Term subject = tok_.type == Tok::BlankLabel ? blank_subject() : iri_term();
        predicate_object_list(subject, 0);
    }

    Term blank_subject() {
        Term t = labelled_blank(tok_.text);
        advance();
        return t;
    }

    void predicate_object_list(const Term& subject, std::size_t depth) {
        for (;;) {
            Term predicate = verb();
            object_list(subject, predicate, depth);
            if (tok_.type != Tok::Semicolon) return;
            while (tok_.type == Tok::Semicolon) advance();
            if (tok_.type == Tok::Dot || tok_.type == Tok::RBracket) return;
        }
    }

    Term verb() {
        if (tok_.type == Tok::KeywordA) {
            advance();
            return Term::iri(kRdfType);
        }
        if (tok_.type != Tok::IriRef && tok_.type != Tok::PrefixedName) fail("expected a predicate");
        return iri_term();
    }

    void object_list(const Term& subject, const Term& predicate, std::size_t depth) {
        for (;;) {
            Term object = parse_object(depth);
            graph_.insert(Triple(subject, predicate, object));
            if (tok_.type != Tok::Comma) return;
            advance();
        }
    }

    Term parse_object(std::size_t depth) {
        switch (tok_.type) {
        case Tok::IriRef:
        case Tok::PrefixedName:
            return iri_term();
        case Tok::BlankLabel: {
            Term t = labelled_blank(tok_.text);
            advance();
            return t;
        }
        case Tok::LBracket: {
            if (depth + 1 > kMaxNesting) fail("blank node nesting too deep");
            Term node = fresh_blank();
            advance();
            if (tok_.type != Tok::RBracket) predicate_object_list(node, depth + 1);
            expect(Tok::RBracket, "']'");
            return node;
        }
        case Tok::String:
            return literal();
        default:
            fail("expected an object");
        }
    }

    Term literal() {
        Token at = tok_;
        std::string lexical = tok_.text;
        advance();
        if (tok_.type == Tok::AtWord) {
            std::string lang = tok_.text;
            if (!is_language_tag(lang)) fail("invalid language tag");
            advance();
            return Term::lang_literal(std::move(lexical), std::move(lang));
        }
        if (tok_.type == Tok::Carets) {
            advance();
            Token dt_at = tok_;
            Term datatype = iri_term();
            if (datatype.value() == kLangString) {
                throw ParseError(ErrorCode::Syntax, dt_at.line, dt_at.column, describe(dt_at),
                                 "rdf:langString requires a language tag");
            }
            return Term::literal(std::move(lexical), datatype.value());
        }
        (void)at;
        return Term::literal(std::move(lexical));
    }

    Lexer lexer_;
    Token tok_;
    std::optional<std::string> base_;
    Graph graph_;
    PrefixMap prefixes_;
    std::map<std::string, Term> blank_labels_;
    std::size_t next_blank_ = 0;
    bool seen_triples_ = false;
    bool seen_base_ = false;
};

}  // namespace

ParsedDocument parse_turtle(std::string_view document, const std::optional<std::string>& base) {
    std::size_t bad = find_invalid_utf8(document);
    if (bad != std::string_view::npos) {
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i < bad; ++i) {
            if (document[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\x%02X", static_cast<unsigned char>(document[bad]));
        throw ParseError(ErrorCode::Syntax, line, column, buf, "invalid UTF-8");
    }
    std::optional<std::string> resolved_base;
    if (base) {
        if (!is_absolute_iri(*base)) {
            throw ParseError(ErrorCode::RelativeIri, 1, 1, *base, "base IRI is not absolute");
        }
        resolved_base = *base;
    }
    try {
        return Parser(document, resolved_base).run();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        // Term construction rejected something the lexer let through.
        throw ParseError(ErrorCode::Syntax, 1, 1, "", e.what());
    }
}

}  // namespace patchr::rdf
