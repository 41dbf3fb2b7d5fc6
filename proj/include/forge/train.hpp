#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/curriculum.hpp"
#include "forge/encoder.hpp"
#include "forge/masking.hpp"

namespace forge::train {

struct TraceEntry {
    std::int64_t step = 0;
    std::string task;
    double loss = 0.0;
    double lr = 0.0;
};

void write_trace(const std::string& path, const std::vector<TraceEntry>& entries);

// progress callback: (stage, step, key, value)
using LogFn = std::function<void(const std::string&, std::int64_t, const std::string&, double)>;

struct PreparedDoc {
    std::string id;
    corpus::Category category = corpus::Category::seed;
    corpus::Modality modality = corpus::Modality::text;
    ingest::TokenSequence seq;
    ingest::CodeTokens code;  // populated for code modality
};

PreparedDoc prepare_doc(const corpus::Document& doc, const ingest::Tokenizer& tk, int max_len);

// masked-example construction used by both training and held-out evaluation;
// returns nullopt when the document has nothing maskable
std::optional<mask::MaskedExample> mask_prepared(const PreparedDoc& doc,
                                                 const mask::MaskingConfig& cfg, int vocab_size,
                                                 Rng& rng);

// ppl_c = exp(mean negative log-likelihood over masked positions of category c)
curriculum::PerplexityStats held_out_perplexity(
    const nn::Params<float>& params,
    const std::map<corpus::Category, std::vector<mask::MaskedExample>>& batches);

struct CurriculumTraceEntry {
    std::int64_t step = 0;
    double progress = 0.0;
    curriculum::Phase phase = curriculum::Phase::early;
    curriculum::SourceWeights weights;
    std::optional<curriculum::PerplexityStats> ppl;
};

void write_curriculum_trace(const std::string& path,
                            const std::vector<CurriculumTraceEntry>& entries);

struct MlmTrainOptions {
    nn::TrainConfig cfg;
    mask::MaskingConfig masking;
    curriculum::PhaseSchedule schedule;
    curriculum::FeedbackConfig feedback;
    filterbal::BalancePlan balance;
    int ppl_refresh_every = 200;
    bool use_ppl_feedback = true;
    std::uint64_t seed = 42;
    int workers = 1;
};

struct TrainResult {
    std::vector<TraceEntry> trace;
    std::vector<CurriculumTraceEntry> curriculum_trace;
    double final_loss = 0.0;
    std::int64_t steps_run = 0;
    int best_epoch = -1;  // fine-tuning only
};

// curriculum-sampled dynamic-masking MLM pretraining
TrainResult train_mlm(nn::Params<float>& params, const std::vector<PreparedDoc>& train_docs,
                      const std::map<corpus::Category, std::vector<mask::MaskedExample>>&
                          held_out_batches,
                      const MlmTrainOptions& opts, const LogFn& log = nullptr);

// fixed-example MLM loop (tests, overfit contracts)
TrainResult train_mlm_fixed(nn::Params<float>& params,
                            const std::vector<mask::MaskedExample>& examples,
                            const nn::TrainConfig& cfg, std::uint64_t seed, int workers = 1,
                            const LogFn& log = nullptr);

struct BiPair {
    std::string query_id;
    std::string doc_id;
    std::vector<int> query_ids;
    std::vector<int> doc_ids;
};

struct BiTrainOptions {
    nn::TrainConfig cfg;
    double tau = 0.1;
    bool mine_hard_negatives = true;
    int hard_negatives_per_query = 2;
    int mine_refresh_epochs = 1;
    double val_fraction = 0.1;
    std::uint64_t seed = 42;
    int workers = 1;
};

TrainResult train_bi(nn::Params<float>& params, const std::vector<BiPair>& pairs,
                     const BiTrainOptions& opts, const LogFn& log = nullptr);

struct CrossExample {
    std::vector<int> pair_ids;
    int label = 0;
};

struct FineTuneOptions {
    nn::TrainConfig cfg;
    double val_fraction = 0.1;
    std::uint64_t seed = 42;
    int workers = 1;
};

TrainResult train_cross(nn::Params<float>& params, const std::vector<CrossExample>& examples,
                        const FineTuneOptions& opts, const LogFn& log = nullptr);

struct NerExample {
    std::vector<int> ids;
    std::vector<int> labels;  // mask::kIgnore on specials
};

TrainResult train_ner(nn::Params<float>& params, const std::vector<NerExample>& examples,
                      const FineTuneOptions& opts, const LogFn& log = nullptr);

struct VulnExample {
    std::vector<int> ids;
    int label = 0;
};

TrainResult train_vuln(nn::Params<float>& params, const std::vector<VulnExample>& examples,
                       const FineTuneOptions& opts, const LogFn& log = nullptr);

}  // namespace forge::train
