#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forge/retrieval.hpp"

namespace forge::metrics {

using retrieval::QueryRelevance;
using retrieval::RankedList;

// ---------------------------------------------------------------------------
// MLM top-n

struct RankedPrediction {
    std::vector<int> ranked_tokens;  // best-first, length >= max requested n
    int gold = 0;
    std::string category;  // "objects" | "verbs" | "code"
};

struct TopNReport {
    std::vector<int> ns;
    // category -> n -> accuracy in [0,1]
    std::map<std::string, std::map<int, double>> accuracy;
    std::map<std::string, std::int64_t> examples;
};

TopNReport topn_accuracy(const std::vector<RankedPrediction>& predictions,
                         const std::vector<int>& ns = {1, 2, 3, 4, 5, 10});

// ---------------------------------------------------------------------------
// retrieval metrics (binary relevance)

std::optional<double> average_precision(const RankedList& ranking,
                                        const std::set<std::string>& relevant);

struct RetrievalReport {
    double map = 0.0;
    double r_at_1 = 0.0;
    double mrr_at_10 = 0.0;
    std::optional<double> ndcg_at_10;  // bi-encoder reports omit it
    std::vector<std::string> flagged_queries;
};

double mrr_at_k(const std::map<std::string, RankedList>& rankings, const QueryRelevance& qrels,
                int k = 10, std::vector<std::string>* flagged = nullptr);
double ndcg_at_k(const std::map<std::string, RankedList>& rankings, const QueryRelevance& qrels,
                 int k = 10, std::vector<std::string>* flagged = nullptr);
double recall_at_1(const std::map<std::string, RankedList>& rankings,
                   const QueryRelevance& qrels, std::vector<std::string>* flagged = nullptr);
double mean_average_precision(const std::map<std::string, RankedList>& rankings,
                              const QueryRelevance& qrels,
                              std::vector<std::string>* flagged = nullptr);

RetrievalReport evaluate_retrieval(const std::map<std::string, RankedList>& rankings,
                                   const QueryRelevance& qrels, bool include_ndcg);

// ---------------------------------------------------------------------------
// classification

struct ClassificationReport {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool zero_denominator = false;  // P or R had an empty denominator

    static ClassificationReport from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn,
                                            std::int64_t tn);
};

ClassificationReport binary_cls_metrics(const std::vector<int>& golds,
                                        const std::vector<int>& predictions);

enum class NerMode { token, span };

struct NerReport {
    ClassificationReport micro;
    std::map<std::string, ClassificationReport> per_label;
};

// BIO sequences ("O", "B-Malware", "I-Malware", ...). Token mode scores entity
// types position-wise over non-O positions; span mode requires exact boundary
// and type matches after BIO decoding.
NerReport ner_prf(const std::vector<std::vector<std::string>>& gold,
                  const std::vector<std::vector<std::string>>& predicted, NerMode mode);

struct Span {
    std::string label;
    std::size_t begin = 0;  // token positions, end exclusive
    std::size_t end = 0;
    bool operator<(const Span& o) const {
        return std::tie(begin, end, label) < std::tie(o.begin, o.end, o.label);
    }
    bool operator==(const Span& o) const {
        return begin == o.begin && end == o.end && label == o.label;
    }
};

std::vector<Span> decode_bio(const std::vector<std::string>& tags);

// ---------------------------------------------------------------------------
// report emitters, schema field names the mirrored table

std::string emit_table3_mlm(const TopNReport& report, const std::string& config_hash = "");
std::string emit_cross_encoder(const RetrievalReport& report,
                               const std::string& config_hash = "");
std::string emit_bi_encoder(const RetrievalReport& report, const std::string& config_hash = "");
std::string emit_ner(const NerReport& span_mode, const NerReport& token_mode,
                     const std::string& config_hash = "");
std::string emit_vuln(const ClassificationReport& report, const std::string& config_hash = "");

}  // namespace forge::metrics
