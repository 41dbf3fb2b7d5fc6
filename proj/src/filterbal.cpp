#include "forge/filterbal.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "forge/ingest.hpp"
#include "forge/util.hpp"

namespace forge::filterbal {

double RelevanceClassifier::log_likelihood(const std::string& token, Label cls) const {
    auto it = counts.find(token);
    if (it == counts.end())
        throw ForgeError(Status::runtime, "token not in classifier vocabulary: " + token);
    double v = static_cast<double>(vocab_size());
    std::int64_t c = cls == Label::relevant ? it->second.first : it->second.second;
    std::int64_t total = cls == Label::relevant ? total_rel : total_irr;
    return std::log((static_cast<double>(c) + alpha) / (static_cast<double>(total) + alpha * v));
}

int keyword_score(const std::vector<std::string>& tokens, const KeywordLexicon& lexicon) {
    int hits = 0;
    for (const std::string& t : tokens)
        if (lexicon.terms.count(t)) ++hits;
    return hits;
}

RelevanceClassifier train_classifier(const std::vector<LabeledDoc>& docs, double alpha) {
    if (alpha <= 0.0) throw_config("train_classifier: alpha must be > 0");
    RelevanceClassifier clf;
    clf.alpha = alpha;
    std::int64_t n_rel = 0, n_irr = 0;
    for (const LabeledDoc& d : docs) {
        bool rel = d.label == Label::relevant;
        (rel ? n_rel : n_irr) += 1;
        for (const std::string& tok :
             ingest::tokenize(d.content, corpus::Modality::text, ingest::Casing::lowercase)) {
            auto& c = clf.counts[tok];
            (rel ? c.first : c.second) += 1;
            (rel ? clf.total_rel : clf.total_irr) += 1;
        }
    }
    if (n_rel == 0 || n_irr == 0)
        throw ForgeError(Status::runtime,
                         "train_classifier: need at least one document per label");
    double n = static_cast<double>(n_rel + n_irr);
    clf.log_prior_rel = std::log(static_cast<double>(n_rel) / n);
    clf.log_prior_irr = std::log(static_cast<double>(n_irr) / n);
    return clf;
}

double classify_relevance(const RelevanceClassifier& clf, const std::vector<std::string>& tokens) {
    double lr = clf.log_prior_rel;
    double li = clf.log_prior_irr;
    for (const std::string& t : tokens) {
        if (!clf.counts.count(t)) continue;  // OOV ignored
        lr += clf.log_likelihood(t, Label::relevant);
        li += clf.log_likelihood(t, Label::irrelevant);
    }
    // stable two-class softmax
    double m = std::max(lr, li);
    double er = std::exp(lr - m), ei = std::exp(li - m);
    return er / (er + ei);
}

std::pair<std::vector<corpus::Document>, FilterReport> filter_corpus(
    const std::vector<corpus::Document>& docs, const KeywordLexicon& lexicon,
    const RelevanceClassifier& clf, double tau) {
    std::vector<corpus::Document> kept;
    FilterReport report;
    for (const corpus::Document& d : docs) {
        auto tokens = ingest::tokenize(d.content, d.modality, ingest::Casing::lowercase);
        int hits = keyword_score(tokens, lexicon);
        double posterior = classify_relevance(clf, tokens);
        if (hits >= lexicon.min_hits || posterior >= tau) {
            kept.push_back(d);
        } else {
            report.drops.push_back(FilterDrop{d.id, hits, posterior});
        }
    }
    return {kept, report};
}

BalancePlan compute_balance_weights(const corpus::CorpusManifest& manifest,
                                    const std::map<corpus::Category, double>& targets,
                                    double cap) {
    if (cap <= 0.0) throw_config("compute_balance_weights: cap must be > 0");
    double tsum = 0.0;
    for (const auto& [cat, t] : targets) {
        if (!manifest.per_category.count(cat))
            throw_config("balance target for absent category: " + corpus::to_string(cat));
        tsum += t;
    }
    if (std::abs(tsum - 1.0) > 1e-9)
        throw_config("balance targets must sum to 1 (got " + std::to_string(tsum) + ")");

    std::int64_t total = 0;
    for (const auto& [cat, ct] : manifest.per_category) {
        std::int64_t n = ct.code_tokens + ct.text_tokens;
        if (n <= 0)
            throw_config("category with zero tokens cannot be balanced: " +
                         corpus::to_string(cat));
        if (!targets.count(cat))
            throw_config("balance targets must cover category: " + corpus::to_string(cat));
        total += n;
    }
    if (total == 0) throw_config("compute_balance_weights: empty manifest");

    BalancePlan plan;
    plan.cap = cap;
    plan.target_share = targets;
    double norm = 0.0;
    for (const auto& [cat, ct] : manifest.per_category) {
        double share = static_cast<double>(ct.code_tokens + ct.text_tokens) /
                       static_cast<double>(total);
        double w = std::min(cap, targets.at(cat) / share);
        plan.weight[cat] = w;
        norm += w * share;
    }
    for (const auto& [cat, ct] : manifest.per_category) {
        double share = static_cast<double>(ct.code_tokens + ct.text_tokens) /
                       static_cast<double>(total);
        plan.sampled_share[cat] = plan.weight[cat] * share / norm;
    }
    return plan;
}

KeywordLexicon load_lexicon(const std::string& path, int min_hits) {
    KeywordLexicon lex;
    lex.min_hits = min_hits;
    for (std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        for (char& c : line) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        lex.terms.insert(line);
    }
    if (lex.terms.empty()) throw_config("empty keyword lexicon: " + path);
    return lex;
}

std::vector<LabeledDoc> load_labeled_docs(const std::string& path) {
    std::vector<LabeledDoc> out;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        LabeledDoc d;
        d.content = j.at("content").get<std::string>();
        std::string label = j.at("label").get<std::string>();
        if (label == "relevant")
            d.label = Label::relevant;
        else if (label == "irrelevant")
            d.label = Label::irrelevant;
        else
            throw_config("labeled doc with unknown label: " + label);
        out.push_back(std::move(d));
    }
    return out;
}

void save_filter_report(const std::string& path, const FilterReport& report) {
    std::ostringstream out;
    for (const FilterDrop& d : report.drops) {
        nlohmann::json j = {
            {"id", d.id}, {"keyword_hits", d.keyword_hits}, {"posterior", d.posterior}};
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

}  // namespace forge::filterbal
