#include "forge/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "forge/util.hpp"

namespace forge::ingest {

namespace {

const char* kSpecialNames[] = {"<pad>", "<cls>", "<sep>", "<mask>", "<unk>"};

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline bool word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

}  // namespace

std::vector<TokenSpan> tokenize_text(const std::string& text, Casing casing) {
    std::vector<TokenSpan> out;
    std::size_t i = 0, n = text.size();
    while (i < n) {
        unsigned char c = text[i];
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (word_char(c)) {
            while (i < n && word_char(static_cast<unsigned char>(text[i]))) ++i;
        } else {
            ++i;  // punctuation and operator characters are single tokens
        }
        std::string tok = text.substr(start, i - start);
        if (casing == Casing::lowercase) tok = lower_ascii(std::move(tok));
        out.push_back(TokenSpan{std::move(tok), start, i, -1});
    }
    return out;
}

CodeTokens tokenize_code(const std::string& source) {
    CodeTokens ct;
    ct.lexed = lex::lex_code(source);
    for (std::size_t li = 0; li < ct.lexed.tokens.size(); ++li) {
        const lex::LexToken& lt = ct.lexed.tokens[li];
        if (lt.cls == lex::TokClass::whitespace) continue;
        // split on internal whitespace (comments / string literals)
        std::size_t i = lt.begin;
        while (i < lt.end) {
            if (std::isspace(static_cast<unsigned char>(source[i]))) {
                ++i;
                continue;
            }
            std::size_t start = i;
            while (i < lt.end && !std::isspace(static_cast<unsigned char>(source[i]))) ++i;
            ct.tokens.push_back(
                TokenSpan{source.substr(start, i - start), start, i, static_cast<int>(li)});
        }
    }
    return ct;
}

std::vector<std::string> tokenize(const std::string& normalized, corpus::Modality modality,
                                  Casing casing) {
    std::vector<std::string> out;
    if (modality == corpus::Modality::code) {
        CodeTokens ct = tokenize_code(normalized);
        out.reserve(ct.tokens.size());
        for (auto& t : ct.tokens) out.push_back(std::move(t.text));
    } else {
        auto spans = tokenize_text(normalized, casing);
        out.reserve(spans.size());
        for (auto& t : spans) out.push_back(std::move(t.text));
    }
    return out;
}

Tokenizer build_vocab(const std::vector<corpus::Document>& docs, int min_count, int max_size,
                      Casing casing) {
    if (min_count < 1) throw_config("build_vocab: min_count must be >= 1");
    if (max_size < Tokenizer::num_specials + 1)
        throw_config("build_vocab: max_size must be at least " +
                     std::to_string(Tokenizer::num_specials + 1));

    std::map<std::string, std::int64_t> counts;  // ordered map fixes ties deterministically
    for (const corpus::Document& d : docs) {
        for (std::string& tok : tokenize(d.content, d.modality, casing)) counts[tok] += 1;
    }

    std::vector<std::pair<std::string, std::int64_t>> items;
    items.reserve(counts.size());
    for (auto& kv : counts)
        if (kv.second >= min_count) items.emplace_back(kv.first, kv.second);
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Tokenizer tk;
    tk.casing = casing;
    for (const char* s : kSpecialNames) tk.vocab.emplace_back(s);
    std::size_t cap = static_cast<std::size_t>(max_size) - Tokenizer::num_specials;
    for (std::size_t i = 0; i < items.size() && i < cap; ++i) tk.vocab.push_back(items[i].first);
    for (std::size_t i = 0; i < tk.vocab.size(); ++i) tk.index[tk.vocab[i]] = static_cast<int>(i);
    return tk;
}

TokenSequence encode(const Tokenizer& tk, const std::vector<std::string>& tokens, int max_len,
                     bool pad_to_max) {
    if (max_len < 2) throw_config("encode: max_len must be >= 2");
    TokenSequence seq;
    std::size_t payload = std::min(tokens.size(), static_cast<std::size_t>(max_len - 2));
    seq.ids.reserve(pad_to_max ? static_cast<std::size_t>(max_len) : payload + 2);
    seq.ids.push_back(Tokenizer::CLS);
    for (std::size_t i = 0; i < payload; ++i) seq.ids.push_back(tk.id_of(tokens[i]));
    seq.ids.push_back(Tokenizer::SEP);
    if (pad_to_max)
        while (seq.ids.size() < static_cast<std::size_t>(max_len)) seq.ids.push_back(Tokenizer::PAD);
    return seq;
}

TokenSequence encode_pair(const Tokenizer& tk, const std::vector<std::string>& query_tokens,
                          const std::vector<std::string>& doc_tokens, int max_len) {
    if (max_len < 3) throw_config("encode_pair: max_len must be >= 3");
    if (query_tokens.empty())
        throw ForgeError(Status::runtime, "encode_pair: empty query");
    // budget: CLS + q + SEP + d + SEP; query truncated only if it alone overflows
    std::size_t q_cap = std::min(query_tokens.size(), static_cast<std::size_t>(max_len - 3));
    std::size_t d_cap = std::min(doc_tokens.size(),
                                 static_cast<std::size_t>(max_len) - 3 - q_cap);
    TokenSequence seq;
    seq.ids.reserve(q_cap + d_cap + 3);
    seq.ids.push_back(Tokenizer::CLS);
    for (std::size_t i = 0; i < q_cap; ++i) seq.ids.push_back(tk.id_of(query_tokens[i]));
    seq.ids.push_back(Tokenizer::SEP);
    for (std::size_t i = 0; i < d_cap; ++i) seq.ids.push_back(tk.id_of(doc_tokens[i]));
    seq.ids.push_back(Tokenizer::SEP);
    return seq;
}

std::vector<std::string> decode(const Tokenizer& tk, const TokenSequence& seq) {
    std::vector<std::string> out;
    for (int id : seq.ids) {
        if (id == Tokenizer::PAD || id == Tokenizer::CLS || id == Tokenizer::SEP) continue;
        out.push_back(tk.token(id));
    }
    return out;
}

void save_vocab(const std::string& path, const Tokenizer& tk) {
    std::ostringstream out;
    for (std::size_t i = Tokenizer::num_specials; i < tk.vocab.size(); ++i)
        out << tk.vocab[i] << '\n';
    write_file(path, out.str());
}

Tokenizer load_vocab(const std::string& path, Casing casing) {
    Tokenizer tk;
    tk.casing = casing;
    for (const char* s : kSpecialNames) tk.vocab.emplace_back(s);
    for (std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        tk.vocab.push_back(std::move(line));
    }
    for (std::size_t i = 0; i < tk.vocab.size(); ++i) tk.index[tk.vocab[i]] = static_cast<int>(i);
    return tk;
}

std::string normalize_document(const std::string& raw, corpus::Modality modality,
                               uni::NormalizeReport* report) {
    return uni::normalize_text(raw, modality == corpus::Modality::text, report);
}

std::vector<TokenSpan> tokenize_document(const corpus::Document& doc, Casing casing) {
    if (doc.modality == corpus::Modality::code) return tokenize_code(doc.content).tokens;
    return tokenize_text(doc.content, casing);
}

}  // namespace forge::ingest
