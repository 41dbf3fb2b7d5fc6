#include "forge/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <json.hpp>

#include "forge/common.hpp"

namespace forge::metrics {

using nlohmann::json;

TopNReport topn_accuracy(const std::vector<RankedPrediction>& predictions,
                         const std::vector<int>& ns) {
    if (ns.empty()) throw_config("topn_accuracy: no n values");
    int max_n = *std::max_element(ns.begin(), ns.end());
    TopNReport report;
    report.ns = ns;

    std::map<std::string, std::map<int, std::int64_t>> hits;
    for (const RankedPrediction& p : predictions) {
        if (static_cast<int>(p.ranked_tokens.size()) < max_n)
            throw ForgeError(Status::runtime,
                             "evaluation error: prediction list shorter than max n");
        report.examples[p.category] += 1;
        int rank = -1;
        for (int i = 0; i < max_n; ++i) {
            if (p.ranked_tokens[static_cast<std::size_t>(i)] == p.gold) {
                rank = i + 1;
                break;
            }
        }
        for (int n : ns)
            if (rank > 0 && rank <= n) hits[p.category][n] += 1;
    }
    for (const auto& [cat, total] : report.examples) {
        for (int n : ns) {
            std::int64_t h = hits.count(cat) && hits[cat].count(n) ? hits[cat][n] : 0;
            report.accuracy[cat][n] =
                total > 0 ? static_cast<double>(h) / static_cast<double>(total) : 0.0;
        }
    }
    return report;
}

std::optional<double> average_precision(const RankedList& ranking,
                                        const std::set<std::string>& relevant) {
    if (relevant.empty()) return std::nullopt;  // excluded from mAP, flagged by callers
    std::int64_t seen_relevant = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (!relevant.count(ranking[i].id)) continue;
        ++seen_relevant;
        sum += static_cast<double>(seen_relevant) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(relevant.size());
}

double mean_average_precision(const std::map<std::string, RankedList>& rankings,
                              const QueryRelevance& qrels,
                              std::vector<std::string>* flagged) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& [qid, ranking] : rankings) {
        auto it = qrels.find(qid);
        if (it == qrels.end() || it->second.empty()) {
            if (flagged) flagged->push_back(qid);
            continue;
        }
        auto ap = average_precision(ranking, it->second);
        sum += *ap;
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

double mrr_at_k(const std::map<std::string, RankedList>& rankings, const QueryRelevance& qrels,
                int k, std::vector<std::string>* flagged) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& [qid, ranking] : rankings) {
        auto it = qrels.find(qid);
        if (it == qrels.end()) {
            if (flagged) flagged->push_back(qid);
            continue;
        }
        double rr = 0.0;
        for (std::size_t i = 0; i < ranking.size() && i < static_cast<std::size_t>(k); ++i) {
            if (it->second.count(ranking[i].id)) {
                rr = 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
        sum += rr;
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

double ndcg_at_k(const std::map<std::string, RankedList>& rankings, const QueryRelevance& qrels,
                 int k, std::vector<std::string>* flagged) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& [qid, ranking] : rankings) {
        auto it = qrels.find(qid);
        if (it == qrels.end() || it->second.empty()) {
            if (flagged) flagged->push_back(qid);
            continue;
        }
        double dcg = 0.0;
        for (std::size_t i = 0; i < ranking.size() && i < static_cast<std::size_t>(k); ++i)
            if (it->second.count(ranking[i].id))
                dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        double idcg = 0.0;
        std::size_t ideal = std::min<std::size_t>(it->second.size(),
                                                  static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < ideal; ++i)
            idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        sum += idcg > 0 ? dcg / idcg : 0.0;
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

double recall_at_1(const std::map<std::string, RankedList>& rankings,
                   const QueryRelevance& qrels, std::vector<std::string>* flagged) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& [qid, ranking] : rankings) {
        auto it = qrels.find(qid);
        if (it == qrels.end()) {
            if (flagged) flagged->push_back(qid);
            continue;
        }
        if (ranking.empty()) {
            if (flagged) flagged->push_back(qid);
            ++n;
            continue;
        }
        sum += it->second.count(ranking[0].id) ? 1.0 : 0.0;
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

RetrievalReport evaluate_retrieval(const std::map<std::string, RankedList>& rankings,
                                   const QueryRelevance& qrels, bool include_ndcg) {
    RetrievalReport r;
    r.map = mean_average_precision(rankings, qrels, &r.flagged_queries);
    r.r_at_1 = recall_at_1(rankings, qrels, nullptr);
    r.mrr_at_10 = mrr_at_k(rankings, qrels, 10, nullptr);
    if (include_ndcg) r.ndcg_at_10 = ndcg_at_k(rankings, qrels, 10, nullptr);
    std::sort(r.flagged_queries.begin(), r.flagged_queries.end());
    r.flagged_queries.erase(std::unique(r.flagged_queries.begin(), r.flagged_queries.end()),
                            r.flagged_queries.end());
    return r;
}

ClassificationReport ClassificationReport::from_counts(std::int64_t tp, std::int64_t fp,
                                                       std::int64_t fn, std::int64_t tn) {
    ClassificationReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.tn = tn;
    std::int64_t total = tp + fp + fn + tn;
    r.accuracy = total > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
    if (tp + fp > 0) {
        r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    } else {
        r.zero_denominator = true;
    }
    if (tp + fn > 0) {
        r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    } else {
        r.zero_denominator = true;
    }
    if (r.precision + r.recall > 0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

ClassificationReport binary_cls_metrics(const std::vector<int>& golds,
                                        const std::vector<int>& predictions) {
    if (golds.empty() || golds.size() != predictions.size())
        throw ForgeError(Status::runtime,
                         "evaluation error: empty or misaligned binary labels");
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        if (golds[i] != 0 && golds[i] != 1) throw_config("binary labels must be 0/1");
        if (predictions[i] != 0 && predictions[i] != 1)
            throw_config("binary predictions must be 0/1");
        if (golds[i] == 1 && predictions[i] == 1) ++tp;
        else if (golds[i] == 0 && predictions[i] == 1) ++fp;
        else if (golds[i] == 1 && predictions[i] == 0) ++fn;
        else ++tn;
    }
    return ClassificationReport::from_counts(tp, fp, fn, tn);
}

std::vector<Span> decode_bio(const std::vector<std::string>& tags) {
    std::vector<Span> spans;
    std::size_t i = 0;
    while (i < tags.size()) {
        const std::string& t = tags[i];
        if (t.size() < 3 || (t[0] != 'B' && t[0] != 'I') || t[1] != '-') {
            ++i;
            continue;
        }
        // an I- after O or a different type starts a new span (conlleval style)
        std::string label = t.substr(2);
        std::size_t begin = i;
        ++i;
        while (i < tags.size() && tags[i].size() >= 3 && tags[i][0] == 'I' &&
               tags[i][1] == '-' && tags[i].substr(2) == label)
            ++i;
        spans.push_back(Span{label, begin, i});
    }
    return spans;
}

namespace {

std::string type_of(const std::string& tag) {
    if (tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-')
        return tag.substr(2);
    return "";  // O or malformed
}

}  // namespace

NerReport ner_prf(const std::vector<std::vector<std::string>>& gold,
                  const std::vector<std::vector<std::string>>& predicted, NerMode mode) {
    if (gold.size() != predicted.size())
        throw ForgeError(Status::runtime, "evaluation error: sequence count mismatch");
    std::map<std::string, std::array<std::int64_t, 3>> counts;  // label -> tp, fp, fn
    std::int64_t tn = 0;

    for (std::size_t s = 0; s < gold.size(); ++s) {
        if (gold[s].size() != predicted[s].size())
            throw ForgeError(Status::runtime,
                             "evaluation error: length mismatch in sequence " +
                                 std::to_string(s));
        if (mode == NerMode::token) {
            for (std::size_t i = 0; i < gold[s].size(); ++i) {
                std::string g = type_of(gold[s][i]);
                std::string p = type_of(predicted[s][i]);
                if (g.empty() && p.empty()) {
                    ++tn;
                    continue;
                }
                if (!g.empty() && g == p) {
                    counts[g][0] += 1;
                } else {
                    if (!g.empty()) counts[g][2] += 1;  // missed gold type
                    if (!p.empty()) counts[p][1] += 1;  // spurious prediction
                }
            }
        } else {
            auto gs = decode_bio(gold[s]);
            auto ps = decode_bio(predicted[s]);
            std::set<Span> gset(gs.begin(), gs.end());
            std::set<Span> pset(ps.begin(), ps.end());
            for (const Span& sp : gs) {
                if (pset.count(sp)) counts[sp.label][0] += 1;
                else counts[sp.label][2] += 1;
            }
            for (const Span& sp : ps)
                if (!gset.count(sp)) counts[sp.label][1] += 1;
        }
    }

    NerReport report;
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (const auto& [label, c] : counts) {
        report.per_label[label] = ClassificationReport::from_counts(c[0], c[1], c[2], 0);
        tp += c[0];
        fp += c[1];
        fn += c[2];
    }
    report.micro = ClassificationReport::from_counts(tp, fp, fn, mode == NerMode::token ? tn : 0);
    return report;
}

// ---------------------------------------------------------------------------

namespace {

json base(const std::string& schema, const std::string& config_hash) {
    json j;
    j["schema"] = schema;
    if (!config_hash.empty()) j["config_hash"] = config_hash;
    return j;
}

}  // namespace

std::string emit_table3_mlm(const TopNReport& report, const std::string& config_hash) {
    json j = base("table3_mlm", config_hash);
    json topn = json::object();
    for (int n : report.ns) {
        json row = json::object();
        for (const std::string cat : {"objects", "verbs", "code"}) {
            auto it = report.accuracy.find(cat);
            row[cat] = it != report.accuracy.end() && it->second.count(n)
                           ? it->second.at(n)
                           : 0.0;
        }
        topn[std::to_string(n)] = row;
    }
    j["topn"] = topn;
    json ex = json::object();
    for (const auto& [cat, n] : report.examples) ex[cat] = n;
    j["examples"] = ex;
    return j.dump(2) + "\n";
}

std::string emit_cross_encoder(const RetrievalReport& report, const std::string& config_hash) {
    json j = base("table_cross_encoder", config_hash);
    j["metrics"] = {{"mAP", report.map},
                    {"R@1", report.r_at_1},
                    {"NDCG@10", report.ndcg_at_10.value_or(0.0)},
                    {"MRR@10", report.mrr_at_10}};
    if (!report.flagged_queries.empty()) j["flagged_queries"] = report.flagged_queries;
    return j.dump(2) + "\n";
}

std::string emit_bi_encoder(const RetrievalReport& report, const std::string& config_hash) {
    json j = base("table_bi_encoder", config_hash);
    j["metrics"] = {{"mAP", report.map},
                    {"R@1", report.r_at_1},
                    {"MRR@10", report.mrr_at_10}};
    if (!report.flagged_queries.empty()) j["flagged_queries"] = report.flagged_queries;
    return j.dump(2) + "\n";
}

namespace {

json ner_mode_json(const NerReport& r) {
    json per = json::object();
    for (const auto& [label, c] : r.per_label)
        per[label] = {{"f1", c.f1}, {"recall", c.recall}, {"precision", c.precision}};
    return json{{"f1", r.micro.f1},
                {"recall", r.micro.recall},
                {"precision", r.micro.precision},
                {"per_label", per}};
}

}  // namespace

std::string emit_ner(const NerReport& span_mode, const NerReport& token_mode,
                     const std::string& config_hash) {
    json j = base("table_ner", config_hash);
    j["span"] = ner_mode_json(span_mode);
    j["token"] = ner_mode_json(token_mode);
    return j.dump(2) + "\n";
}

std::string emit_vuln(const ClassificationReport& report, const std::string& config_hash) {
    json j = base("table_vuln", config_hash);
    j["metrics"] = {{"accuracy", report.accuracy},
                    {"f1", report.f1},
                    {"recall", report.recall},
                    {"precision", report.precision}};
    j["counts"] = {{"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}, {"tn", report.tn}};
    return j.dump(2) + "\n";
}

}  // namespace forge::metrics
