#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace forge::lex {

enum class TokClass {
    keyword,
    identifier,
    function_name,
    op,
    delimiter,
    literal,
    comment,
    whitespace,
};

std::string to_string(TokClass c);

struct LexToken {
    TokClass cls;
    std::size_t begin = 0;  // byte span into the source
    std::size_t end = 0;
    std::string_view lexeme(const std::string& src) const {
        return std::string_view(src).substr(begin, end - begin);
    }
};

struct LexResult {
    std::vector<LexToken> tokens;
    // set when a string/char/comment ran to end-of-input unterminated
    bool recoverable_error = false;
};

// Lossless C-family lexer: token spans are non-overlapping, ordered, and
// cover the input exactly, so concatenating lexemes reproduces the source
// byte for byte. An identifier whose next non-whitespace character is '('
// is reclassified as function_name; keywords are never reclassified.
LexResult lex_code(const std::string& source);

bool is_c_keyword(std::string_view word);

}  // namespace forge::lex
