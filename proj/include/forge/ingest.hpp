#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/lex.hpp"
#include "forge/unicode.hpp"

namespace forge::ingest {

enum class Casing { preserve, lowercase };

// One surface token with its byte span in the source text. For code tokens,
// lex_index points at the LexToken that produced it (several tokens may share
// one lex_index, e.g. the words of a comment or string literal).
struct TokenSpan {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;
    int lex_index = -1;
};

// Whitespace-and-punctuation word tokenizer for text modality: alnum/underscore
// runs are words, every other non-space character is its own token.
std::vector<TokenSpan> tokenize_text(const std::string& text, Casing casing);

struct CodeTokens {
    std::vector<TokenSpan> tokens;
    lex::LexResult lexed;
};

// Code tokenization rides on the lexer: every non-whitespace lexeme becomes a
// token (comments and string literals are split on internal whitespace, all
// parts aligned to the producing lexeme). Case is always preserved.
CodeTokens tokenize_code(const std::string& source);

std::vector<std::string> tokenize(const std::string& normalized, corpus::Modality modality,
                                  Casing casing);

struct Tokenizer {
    static constexpr int PAD = 0;
    static constexpr int CLS = 1;
    static constexpr int SEP = 2;
    static constexpr int MASK = 3;
    static constexpr int UNK = 4;
    static constexpr int num_specials = 5;

    std::vector<std::string> vocab;  // specials occupy ids 0..4
    std::unordered_map<std::string, int> index;
    Casing casing = Casing::lowercase;

    int size() const { return static_cast<int>(vocab.size()); }
    int id_of(const std::string& tok) const {
        auto it = index.find(tok);
        return it == index.end() ? UNK : it->second;
    }
    const std::string& token(int id) const { return vocab.at(static_cast<std::size_t>(id)); }
    static bool is_special(int id) { return id >= 0 && id < num_specials; }
};

// Frequency-ordered vocabulary from the documents' modality-aware tokens:
// specials + tokens with count >= min_count, ordered by (count desc, token
// asc), truncated to max_size entries overall.
Tokenizer build_vocab(const std::vector<corpus::Document>& docs, int min_count, int max_size,
                      Casing casing = Casing::lowercase);

struct TokenSequence {
    std::vector<int> ids;
    int length() const { return static_cast<int>(ids.size()); }
};

// CLS + ids + SEP, OOV -> UNK, truncated to max_len keeping CLS/SEP, PAD-filled
// to max_len when pad_to_max.
TokenSequence encode(const Tokenizer& tk, const std::vector<std::string>& tokens, int max_len,
                     bool pad_to_max = false);
std::vector<std::string> decode(const Tokenizer& tk, const TokenSequence& seq);

// CLS + query + SEP + document + SEP for the cross encoder; the document side
// is truncated first to fit max_len. Empty queries are rejected.
TokenSequence encode_pair(const Tokenizer& tk, const std::vector<std::string>& query_tokens,
                          const std::vector<std::string>& doc_tokens, int max_len);

void save_vocab(const std::string& path, const Tokenizer& tk);
Tokenizer load_vocab(const std::string& path, Casing casing = Casing::lowercase);

// Modality-aware wrappers used by the pipeline.
std::string normalize_document(const std::string& raw, corpus::Modality modality,
                               uni::NormalizeReport* report = nullptr);
std::vector<TokenSpan> tokenize_document(const corpus::Document& doc, Casing casing);

}  // namespace forge::ingest
