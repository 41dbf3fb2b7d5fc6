#include "forge/lex.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace forge::lex {

std::string to_string(TokClass c) {
    switch (c) {
        case TokClass::keyword: return "keyword";
        case TokClass::identifier: return "identifier";
        case TokClass::function_name: return "function_name";
        case TokClass::op: return "operator";
        case TokClass::delimiter: return "delimiter";
        case TokClass::literal: return "literal";
        case TokClass::comment: return "comment";
        case TokClass::whitespace: return "whitespace";
    }
    return "?";
}

bool is_c_keyword(std::string_view word) {
    static const std::unordered_set<std::string_view> kw = {
        "auto",     "break",    "case",     "char",   "const",    "continue", "default",
        "do",       "double",   "else",     "enum",   "extern",   "float",    "for",
        "goto",     "if",       "inline",   "int",    "long",     "register", "restrict",
        "return",   "short",    "signed",   "sizeof", "static",   "struct",   "switch",
        "typedef",  "union",    "unsigned", "void",   "volatile", "while",    "bool",
        "true",     "false",    "class",    "namespace", "new",   "delete",   "template",
        "typename", "public",   "private",  "protected", "using", "nullptr",  "this",
    };
    return kw.count(word) > 0;
}

namespace {

inline bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
inline bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }
inline bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}
inline bool is_delim(unsigned char c) {
    return c == '(' || c == ')' || c == '{' || c == '}' || c == '[' || c == ']' || c == ';' ||
           c == ',';
}

}  // namespace

LexResult lex_code(const std::string& src) {
    LexResult res;
    const std::size_t n = src.size();
    std::size_t i = 0;

    auto emit = [&](TokClass cls, std::size_t begin, std::size_t end) {
        res.tokens.push_back(LexToken{cls, begin, end});
    };

    while (i < n) {
        const std::size_t start = i;
        unsigned char c = src[i];

        if (is_space(c)) {
            while (i < n && is_space(static_cast<unsigned char>(src[i]))) ++i;
            emit(TokClass::whitespace, start, i);
            continue;
        }

        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            emit(TokClass::comment, start, i);
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            i += 2;
            bool closed = false;
            while (i < n) {
                if (src[i] == '*' && i + 1 < n && src[i + 1] == '/') {
                    i += 2;
                    closed = true;
                    break;
                }
                ++i;
            }
            if (!closed) res.recoverable_error = true;
            emit(TokClass::comment, start, i);
            continue;
        }

        if (c == '"' || c == '\'') {
            char quote = static_cast<char>(c);
            ++i;
            bool closed = false;
            while (i < n) {
                if (src[i] == '\\' && i + 1 < n) {
                    i += 2;
                    continue;
                }
                if (src[i] == quote) {
                    ++i;
                    closed = true;
                    break;
                }
                if (src[i] == '\n') break;  // strings do not span lines
                ++i;
            }
            if (!closed) res.recoverable_error = true;
            emit(TokClass::literal, start, i);
            continue;
        }

        if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit((unsigned char)src[i + 1]))) {
            ++i;
            while (i < n) {
                unsigned char d = src[i];
                if (std::isalnum(d) || d == '.' || d == '_') {
                    ++i;
                } else if ((d == '+' || d == '-') && i > start &&
                           (src[i - 1] == 'e' || src[i - 1] == 'E')) {
                    ++i;  // exponent sign
                } else {
                    break;
                }
            }
            emit(TokClass::literal, start, i);
            continue;
        }

        if (is_ident_start(c)) {
            while (i < n && is_ident_char(static_cast<unsigned char>(src[i]))) ++i;
            std::string_view word = std::string_view(src).substr(start, i - start);
            TokClass cls = is_c_keyword(word) ? TokClass::keyword : TokClass::identifier;
            if (cls == TokClass::identifier) {
                std::size_t j = i;
                while (j < n && is_space(static_cast<unsigned char>(src[j]))) ++j;
                if (j < n && src[j] == '(') cls = TokClass::function_name;
            }
            emit(cls, start, i);
            continue;
        }

        if (is_delim(c)) {
            ++i;
            emit(TokClass::delimiter, start, i);
            continue;
        }

        // operators, longest match first; any other byte falls through as a
        // single-character operator so span coverage stays lossless
        static const std::array<std::string_view, 19> two_plus = {
            "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==",
            "!=",  "&&",  "||", "+=", "-=", "*=", "/=", "%=", "::",
        };
        std::size_t matched = 1;
        for (std::string_view op : two_plus) {
            if (src.compare(start, op.size(), op) == 0) {
                matched = op.size();
                break;
            }
        }
        i = start + matched;
        emit(TokClass::op, start, i);
    }
    return res;
}

}  // namespace forge::lex
