#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "forge/corpus.hpp"

namespace forge::filterbal {

struct KeywordLexicon {
    std::unordered_set<std::string> terms;  // lowercase, normalized like corpus text
    int min_hits = 2;
};

enum class Label { relevant, irrelevant };

struct LabeledDoc {
    std::string content;
    Label label = Label::relevant;
};

// Multinomial naive Bayes with Laplace smoothing; deterministic and trainable
// from tens of examples.
struct RelevanceClassifier {
    double log_prior_rel = 0.0;
    double log_prior_irr = 0.0;
    double alpha = 1.0;
    std::int64_t total_rel = 0;  // token totals per class
    std::int64_t total_irr = 0;
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts;  // token -> (rel, irr)

    std::size_t vocab_size() const { return counts.size(); }
    double log_likelihood(const std::string& token, Label cls) const;
};

struct BalancePlan {
    std::map<corpus::Category, double> weight;        // w_c = min(cap, t_c / s_c)
    std::map<corpus::Category, double> target_share;  // t_c
    double cap = 10.0;
    // expected share after renormalizing w_c * s_c
    std::map<corpus::Category, double> sampled_share;
};

// token occurrences (with multiplicity) present in the lexicon
int keyword_score(const std::vector<std::string>& tokens, const KeywordLexicon& lexicon);

RelevanceClassifier train_classifier(const std::vector<LabeledDoc>& docs, double alpha = 1.0);

// posterior P(relevant) in log space; out-of-vocabulary tokens are ignored
double classify_relevance(const RelevanceClassifier& clf, const std::vector<std::string>& tokens);

struct FilterDrop {
    std::string id;
    int keyword_hits = 0;
    double posterior = 0.0;
};

struct FilterReport {
    std::vector<FilterDrop> drops;
};

// keep iff keyword_score >= lexicon.min_hits OR posterior >= tau
std::pair<std::vector<corpus::Document>, FilterReport> filter_corpus(
    const std::vector<corpus::Document>& docs, const KeywordLexicon& lexicon,
    const RelevanceClassifier& clf, double tau);

BalancePlan compute_balance_weights(const corpus::CorpusManifest& manifest,
                                    const std::map<corpus::Category, double>& targets,
                                    double cap);

KeywordLexicon load_lexicon(const std::string& path, int min_hits);
std::vector<LabeledDoc> load_labeled_docs(const std::string& path);
void save_filter_report(const std::string& path, const FilterReport& report);

}  // namespace forge::filterbal
