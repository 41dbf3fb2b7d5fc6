#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "forge/encoder.hpp"

namespace forge::retrieval {

struct EmbeddingIndex {
    std::vector<std::string> ids;
    nn::Tensor<float> matrix;  // (N, d), unit-norm rows
    std::string checkpoint_hash;
    int format_version = 1;

    std::size_t size() const { return ids.size(); }
    int dim() const { return matrix.cols; }
};

struct ScoredDoc {
    std::string id;
    double score = 0.0;
};
using RankedList = std::vector<ScoredDoc>;

using QueryRelevance = std::map<std::string, std::set<std::string>>;

EmbeddingIndex build_index(const nn::Params<float>& params,
                           const std::vector<corpus::Document>& docs,
                           const ingest::Tokenizer& tk, int max_len,
                           const std::string& checkpoint_hash, int workers = 1);

// exact top-k by cosine (dot of unit vectors), descending, ties broken by
// ascending doc id; k > N returns all N
RankedList search_topk(const EmbeddingIndex& index, const std::vector<float>& query_embedding,
                       int k);

// top-k most similar corpus items per query, excluding that query's positives;
// shortfall flagged when fewer than k remain
std::vector<std::vector<std::string>> mine_hard_negatives(
    const nn::Params<float>& params,
    const std::vector<std::pair<std::string, std::vector<int>>>& queries,
    const std::vector<std::pair<std::string, std::vector<int>>>& corpus, int k,
    const std::map<std::string, std::set<std::string>>& exclusions, int workers = 1,
    bool* shortfall = nullptr);

using DocContentFn = std::function<std::string(const std::string& doc_id)>;

// scores every candidate with the cross encoder, reorders descending (stable
// tie-break by prior rank) and keeps the top k2
RankedList rerank(const nn::Params<float>& cross_params, const ingest::Tokenizer& tk,
                  const std::string& query_text, const RankedList& candidates, int k2,
                  const DocContentFn& content, int max_len, int workers = 1);

struct TwoStageResult {
    RankedList stage1;  // bi-encoder candidates (diagnostics)
    RankedList final;
};

TwoStageResult two_stage_retrieve(const EmbeddingIndex& index,
                                  const nn::Params<float>& bi_params,
                                  const nn::Params<float>& cross_params,
                                  const ingest::Tokenizer& tk, const std::string& query_text,
                                  int k1, int k2, const DocContentFn& content, int max_len,
                                  int workers = 1);

void save_index(const std::string& path, const EmbeddingIndex& index);
EmbeddingIndex load_index(const std::string& path);

QueryRelevance load_qrels(const std::string& path);
void save_qrels(const std::string& path, const QueryRelevance& qrels);

}  // namespace forge::retrieval
