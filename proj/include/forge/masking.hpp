#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/ingest.hpp"
#include "forge/rng.hpp"

namespace forge::mask {

inline constexpr int kIgnore = -1;

struct MaskingConfig {
    double mlm_prob = 0.10;
    double mask_frac = 0.8;    // replaced by <mask>
    double random_frac = 0.1;  // replaced by a random non-special token
    double keep_frac = 0.1;    // left as-is but still predicted
    void validate() const;
};

struct MaskedExample {
    std::vector<int> input_ids;
    std::vector<int> labels;  // gold id at masked positions, kIgnore elsewhere
    std::vector<std::size_t> masked_positions;
};

// independent per-position masking over non-special positions (dynamic MLM)
MaskedExample mask_dynamic(const ingest::TokenSequence& seq, const MaskingConfig& cfg,
                           int vocab_size, Rng& rng);

// Whole-unit code masking: the selection unit is the lexeme, not the encoder
// position. Eligible units are identifiers, function names, operators, and
// literals; keywords, delimiters and comments are never selected. One policy
// draw applies to all encoder positions of a selected unit.
MaskedExample mask_code(const ingest::TokenSequence& seq, const ingest::CodeTokens& code,
                        const MaskingConfig& cfg, int vocab_size, Rng& rng);

enum class TargetCategory { noun, verb, identifier, function_name, op };

std::string to_string(TargetCategory c);
TargetCategory target_category_from_string(const std::string& s);

struct EvalRecord {
    std::string content;
    corpus::Modality modality = corpus::Modality::text;
    std::size_t target_start = 0;  // byte span into content
    std::size_t target_end = 0;
    TargetCategory category = TargetCategory::noun;
    std::string gold;  // surface form
    std::string doc_id;
};

// Masks exactly the target span (protocol-checked): the span must align with
// token boundaries, and a code target must lex to an allowed class;
// delimiters/keywords/comments raise a protocol violation.
MaskedExample make_eval_example(const EvalRecord& record, const ingest::Tokenizer& tk,
                                int max_len);

struct EvalCensus {
    std::int64_t noun_records = 0;
    std::int64_t unique_nouns = 0;
    std::int64_t verb_records = 0;
    std::int64_t unique_verbs = 0;
    std::int64_t code_records = 0;
    std::int64_t unique_identifiers = 0;
    std::int64_t unique_operators = 0;
    std::vector<std::string> shortfalls;  // categories that could not be filled
};

struct EvalSetRequest {
    std::int64_t nouns = 0;
    std::int64_t verbs = 0;
    std::int64_t code = 0;
};

// Bootstrap eval-record generation from a corpus slice using the bundled
// suffix+stoplist tagger (approximate by design; exact annotations come from
// the synthetic generator or user-provided record files).
std::pair<std::vector<EvalRecord>, EvalCensus> generate_eval_set(
    const std::vector<corpus::Document>& docs, const EvalSetRequest& request);

EvalCensus census_of(const std::vector<EvalRecord>& records);

enum class PosTag { noun, verb, other };
PosTag heuristic_tag(const std::string& word);

std::vector<EvalRecord> load_eval_records(const std::string& path);
void save_eval_records(const std::string& path, const std::vector<EvalRecord>& records);
std::string census_to_json(const EvalCensus& census);

}  // namespace forge::mask
