#pragma once

#include <map>
#include <string>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/filterbal.hpp"
#include "forge/masking.hpp"
#include "forge/retrieval.hpp"

namespace forge::synth {

// Seeded generator for the desk-scale corpus plus every downstream annotation
// (eval records, qrels, NER labels, vulnerability labels). Planted structure
// is recorded as ground truth so each evaluation has an exact oracle.
struct SynthSpec {
    std::map<corpus::Category, int> docs_per_category = {
        {corpus::Category::seed, 350},      {corpus::Category::web, 450},
        {corpus::Category::reasoning, 150}, {corpus::Category::instruction, 150},
        {corpus::Category::code_vuln, 180}, {corpus::Category::dialogue, 180},
        {corpus::Category::baseline, 120},  {corpus::Category::synthetic, 120},
    };
    double dup_rate = 0.05;      // fraction of docs given a planted near-duplicate
    int rel_pairs = 300;         // planted query/document relevance pairs
    int eval_queries = 100;      // retrieval eval query count (subset of pairs)
    int distractor_docs = 120;   // retrieval corpus padding
    int adversarial_train = 60;  // decoy pairs used to train the cross encoder
    int adversarial_eval = 50;   // decoy fixtures for the two-stage comparison
    int ner_train = 400;
    int ner_test = 120;
    int vuln_train = 400;
    int vuln_test = 120;
    std::int64_t eval_nouns = 150;
    std::int64_t eval_verbs = 90;
    std::int64_t eval_code = 100;
    std::uint64_t seed = 42;

    void validate() const;
};

struct TrainPair {
    std::string query_id, query, doc_id, doc;
};

struct CrossPair {
    std::string query, doc;
    int label = 0;
};

struct NerSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> labels;  // BIO tags aligned with tokens
};

struct VulnSample {
    std::string content;
    int label = 0;  // 1 = vulnerable
};

struct SynthResult {
    std::vector<corpus::Document> raw_docs;  // includes retrieval docs and planted dups
    corpus::DatasetSplit split;
    std::vector<std::string> lexicon;
    std::vector<filterbal::LabeledDoc> seed_labels;
    std::vector<mask::EvalRecord> eval_records;

    std::vector<corpus::Document> retrieval_docs;
    std::vector<std::pair<std::string, std::string>> queries;  // (id, text)
    retrieval::QueryRelevance qrels;
    std::vector<std::pair<std::string, std::string>> adv_queries;
    retrieval::QueryRelevance adv_qrels;
    std::vector<TrainPair> train_pairs;
    std::vector<CrossPair> cross_pairs;

    std::vector<NerSentence> ner_train, ner_test;
    std::vector<VulnSample> vuln_train, vuln_test;

    std::vector<std::pair<std::string, std::string>> planted_duplicates;  // (orig, dup)
};

SynthResult generate_synthetic(const SynthSpec& spec);

// writes raw.jsonl, split.json, lexicon.txt, seed_labels.jsonl,
// eval_records.jsonl, retrieval_docs.jsonl, queries.jsonl, qrels.jsonl,
// adversarial_{queries,qrels}.jsonl, pairs_train.jsonl, cross_train.jsonl,
// ner_{train,test}.jsonl, vuln_{train,test}.jsonl, truth.json
void write_synthetic(const std::string& dir, const SynthResult& result);

std::vector<NerSentence> load_ner_file(const std::string& path);
std::vector<VulnSample> load_vuln_file(const std::string& path);
std::vector<TrainPair> load_train_pairs(const std::string& path);
std::vector<CrossPair> load_cross_pairs(const std::string& path);
std::vector<std::pair<std::string, std::string>> load_queries(const std::string& path);

}  // namespace forge::synth
