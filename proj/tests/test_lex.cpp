#include <doctest.h>

#include <string>

#include "forge/lex.hpp"
#include "forge/rng.hpp"

using namespace forge;
using namespace forge::lex;

namespace {

std::string concat_lexemes(const std::string& src, const LexResult& r) {
    std::string out;
    for (const LexToken& t : r.tokens) out += std::string(t.lexeme(src));
    return out;
}

std::vector<std::pair<TokClass, std::string>> classes_of(const std::string& src,
                                                         bool keep_ws = false) {
    std::vector<std::pair<TokClass, std::string>> out;
    for (const LexToken& t : lex_code(src).tokens) {
        if (!keep_ws && t.cls == TokClass::whitespace) continue;
        out.emplace_back(t.cls, std::string(t.lexeme(src)));
    }
    return out;
}

// random C-ish snippet generator for the losslessness property
std::string random_snippet(Rng& rng) {
    static const char* pieces[] = {
        "int ",      "x",     " = ",    "a + b;", "if (",    "n > 0",  ") {\n",  "}\n",
        "strcpy(",   "dst, ", "src);",  "// c\n", "/* b */", "\"s t\"", "'c'",   "0x1f",
        "3.14e-2 ",  "->",    "<<= ",   "i++;",   "\t",      "\n",     "foo(",   "bar)",
        "while(1)",  "%=",    "::",     "u8_name", "_tmp",   "return 0;", "#include <a.h>\n",
        "/* unterminated", "\"unterminated", "char c = 'q';", "£§",   "a||b",   "y&&z",
    };
    std::string s;
    std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) s += pieces[rng.below(std::size(pieces))];
    return s;
}

}  // namespace

TEST_CASE("lexer classifies a simple declaration") {
    auto got = classes_of("int x = a + b;");
    std::vector<std::pair<TokClass, std::string>> want = {
        {TokClass::keyword, "int"},   {TokClass::identifier, "x"}, {TokClass::op, "="},
        {TokClass::identifier, "a"},  {TokClass::op, "+"},         {TokClass::identifier, "b"},
        {TokClass::delimiter, ";"},
    };
    CHECK(got == want);
}

TEST_CASE("lexer reclassifies call targets as function names") {
    auto got = classes_of("foo(bar)");
    std::vector<std::pair<TokClass, std::string>> want = {
        {TokClass::function_name, "foo"},
        {TokClass::delimiter, "("},
        {TokClass::identifier, "bar"},
        {TokClass::delimiter, ")"},
    };
    CHECK(got == want);

    // whitespace between name and paren is ignored; keywords are not demoted
    CHECK(classes_of("baz  (1)")[0].first == TokClass::function_name);
    CHECK(classes_of("if (x)")[0].first == TokClass::keyword);
    CHECK(classes_of("sizeof(x)")[0].first == TokClass::keyword);
}

TEST_CASE("lexer handles empty input") { CHECK(lex_code("").tokens.empty()); }

TEST_CASE("lexer literal and comment forms") {
    CHECK(classes_of("\"a b\"")[0].first == TokClass::literal);
    CHECK(classes_of("'x'")[0].first == TokClass::literal);
    CHECK(classes_of("0x1F")[0].first == TokClass::literal);
    CHECK(classes_of("3.14e-2")[0].first == TokClass::literal);
    CHECK(classes_of(".5f")[0].first == TokClass::literal);
    auto line = classes_of("x // trailing note");
    REQUIRE(line.size() == 2);
    CHECK(line[1].first == TokClass::comment);
    CHECK(classes_of("/* block */ y")[0].first == TokClass::comment);
}

TEST_CASE("lexer flags unterminated constructs but lexes to end") {
    LexResult r = lex_code("\"never closed");
    CHECK(r.recoverable_error);
    REQUIRE(r.tokens.size() == 1);
    CHECK(r.tokens[0].cls == TokClass::literal);
    CHECK(concat_lexemes("\"never closed", r) == "\"never closed");

    LexResult c = lex_code("/* open comment");
    CHECK(c.recoverable_error);
    CHECK(c.tokens[0].cls == TokClass::comment);
}

TEST_CASE("lexer multi-character operators are single tokens") {
    auto got = classes_of("a <<= b->c != d");
    REQUIRE(got.size() == 7);
    CHECK(got[1] == std::pair<TokClass, std::string>{TokClass::op, "<<="});
    CHECK(got[3] == std::pair<TokClass, std::string>{TokClass::op, "->"});
    CHECK(got[5] == std::pair<TokClass, std::string>{TokClass::op, "!="});
}

TEST_CASE("lexer losslessness on fixtures") {
    const char* fixtures[] = {
        "int main(void) {\n  char buf[64];\n  strcpy(buf, argv[1]); /* risky */\n  return 0;\n}",
        "", "   \t\n", "x=y", "a+++b", "\"str with \\\" escape\"", "// only a comment",
        "for (int i = 0; i < n; ++i) sum += arr[i];",
    };
    for (const char* f : fixtures) {
        LexResult r = lex_code(f);
        CHECK(concat_lexemes(f, r) == f);
        // spans are ordered and non-overlapping
        for (std::size_t i = 1; i < r.tokens.size(); ++i)
            CHECK(r.tokens[i].begin == r.tokens[i - 1].end);
    }
}

TEST_CASE("lexer losslessness and determinism on random snippets") {
    Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
        std::string src = random_snippet(rng);
        LexResult a = lex_code(src);
        CHECK(concat_lexemes(src, a) == src);
        LexResult b = lex_code(src);
        REQUIRE(a.tokens.size() == b.tokens.size());
        for (std::size_t k = 0; k < a.tokens.size(); ++k) {
            CHECK(a.tokens[k].cls == b.tokens[k].cls);
            CHECK(a.tokens[k].begin == b.tokens[k].begin);
        }
    }
}
