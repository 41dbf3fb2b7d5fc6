#include "forge/retrieval.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "forge/util.hpp"

namespace forge::retrieval {

EmbeddingIndex build_index(const nn::Params<float>& params,
                           const std::vector<corpus::Document>& docs,
                           const ingest::Tokenizer& tk, int max_len,
                           const std::string& checkpoint_hash, int workers) {
    if (docs.empty()) throw_missing("build_index: empty document set");
    EmbeddingIndex index;
    index.checkpoint_hash = checkpoint_hash;
    index.ids.reserve(docs.size());
    for (const auto& d : docs) index.ids.push_back(d.id);
    index.matrix = nn::Tensor<float>(static_cast<int>(docs.size()), params.cfg.d_model);

    parallel_for(docs.size(), workers, [&](std::size_t i) {
        const corpus::Document& d = docs[i];
        auto tokens = ingest::tokenize(d.content, d.modality, tk.casing);
        auto seq = ingest::encode(tk, tokens, max_len);
        std::vector<float> e;
        try {
            e = nn::embed(params, seq.ids);
        } catch (const ForgeError& err) {
            throw ForgeError(Status::runtime,
                             "indexing error for document " + d.id + ": " + err.what());
        }
        std::memcpy(index.matrix.row(static_cast<int>(i)), e.data(),
                    e.size() * sizeof(float));
    });
    return index;
}

RankedList search_topk(const EmbeddingIndex& index, const std::vector<float>& query_embedding,
                       int k) {
    if (k < 1) throw_config("search_topk: k must be >= 1");
    if (static_cast<int>(query_embedding.size()) != index.dim())
        throw_config("search_topk: query dimension mismatch");
    RankedList all;
    all.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const float* row = index.matrix.row(static_cast<int>(i));
        double s = 0;
        for (int j = 0; j < index.dim(); ++j)
            s += static_cast<double>(row[j]) * query_embedding[static_cast<std::size_t>(j)];
        all.push_back(ScoredDoc{index.ids[i], s});
    }
    std::sort(all.begin(), all.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (static_cast<std::size_t>(k) < all.size()) all.resize(static_cast<std::size_t>(k));
    return all;
}

std::vector<std::vector<std::string>> mine_hard_negatives(
    const nn::Params<float>& params,
    const std::vector<std::pair<std::string, std::vector<int>>>& queries,
    const std::vector<std::pair<std::string, std::vector<int>>>& corpus, int k,
    const std::map<std::string, std::set<std::string>>& exclusions, int workers,
    bool* shortfall) {
    if (k < 1) throw_config("mine_hard_negatives: k must be >= 1");
    std::vector<std::vector<float>> doc_embs(corpus.size());
    parallel_for(corpus.size(), workers, [&](std::size_t i) {
        doc_embs[i] = nn::embed(params, corpus[i].second);
    });
    std::vector<std::vector<std::string>> out(queries.size());
    bool any_short = false;
    parallel_for(queries.size(), workers, [&](std::size_t qi) {
        std::vector<float> qe = nn::embed(params, queries[qi].second);
        auto excl = exclusions.find(queries[qi].first);
        RankedList scored;
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            if (excl != exclusions.end() && excl->second.count(corpus[d].first)) continue;
            double s = 0;
            for (std::size_t j = 0; j < qe.size(); ++j) s += qe[j] * doc_embs[d][j];
            scored.push_back(ScoredDoc{corpus[d].first, s});
        }
        std::sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        if (scored.size() < static_cast<std::size_t>(k)) any_short = true;
        for (std::size_t j = 0; j < scored.size() && j < static_cast<std::size_t>(k); ++j)
            out[qi].push_back(scored[j].id);
    });
    if (shortfall) *shortfall = any_short;
    return out;
}

RankedList rerank(const nn::Params<float>& cross_params, const ingest::Tokenizer& tk,
                  const std::string& query_text, const RankedList& candidates, int k2,
                  const DocContentFn& content, int max_len, int workers) {
    if (candidates.empty()) throw_config("rerank: empty candidate list");
    if (k2 < 1 || static_cast<std::size_t>(k2) > candidates.size())
        throw_config("rerank: k2 must be in [1, candidate count]");
    auto query_tokens = ingest::tokenize(query_text, corpus::Modality::text, tk.casing);

    std::vector<double> scores(candidates.size());
    parallel_for(candidates.size(), workers, [&](std::size_t i) {
        auto doc_tokens = ingest::tokenize(content(candidates[i].id), corpus::Modality::text,
                                           tk.casing);
        auto pair = ingest::encode_pair(tk, query_tokens, doc_tokens, max_len);
        scores[i] = nn::cross_score(cross_params, pair.ids);
    });

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];  // stable: ties keep prior rank
    });
    RankedList out;
    out.reserve(static_cast<std::size_t>(k2));
    for (int i = 0; i < k2; ++i) {
        std::size_t idx = order[static_cast<std::size_t>(i)];
        out.push_back(ScoredDoc{candidates[idx].id, scores[idx]});
    }
    return out;
}

TwoStageResult two_stage_retrieve(const EmbeddingIndex& index,
                                  const nn::Params<float>& bi_params,
                                  const nn::Params<float>& cross_params,
                                  const ingest::Tokenizer& tk, const std::string& query_text,
                                  int k1, int k2, const DocContentFn& content, int max_len,
                                  int workers) {
    if (k2 > k1) throw_config("two_stage_retrieve: k2 must be <= k1");
    auto tokens = ingest::tokenize(query_text, corpus::Modality::text, tk.casing);
    auto seq = ingest::encode(tk, tokens, max_len);
    std::vector<float> qe = nn::embed(bi_params, seq.ids);
    TwoStageResult res;
    res.stage1 = search_topk(index, qe, k1);
    res.final = rerank(cross_params, tk, query_text, res.stage1,
                       std::min<int>(k2, static_cast<int>(res.stage1.size())), content,
                       max_len, workers);
    return res;
}

namespace {
constexpr char kMagic[9] = "FORGEIDX";
}

void save_index(const std::string& path, const EmbeddingIndex& index) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_runtime("cannot open index for writing: " + path);
    out.write(kMagic, 8);
    std::uint32_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), 4);
    std::uint64_t n = index.size();
    std::uint32_t d = static_cast<std::uint32_t>(index.dim());
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&d), 4);
    std::uint32_t hlen = static_cast<std::uint32_t>(index.checkpoint_hash.size());
    out.write(reinterpret_cast<const char*>(&hlen), 4);
    out.write(index.checkpoint_hash.data(), hlen);
    out.write(reinterpret_cast<const char*>(index.matrix.a.data()),
              static_cast<std::streamsize>(index.matrix.count() * sizeof(float)));
    for (const std::string& id : index.ids) {
        std::uint32_t len = static_cast<std::uint32_t>(id.size());
        out.write(reinterpret_cast<const char*>(&len), 4);
        out.write(id.data(), len);
    }
    if (!out) throw_runtime("short write on index: " + path);
}

EmbeddingIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_missing("cannot open index: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw_runtime("not an index file: " + path);
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw_runtime("unsupported index format version");
    std::uint64_t n = 0;
    std::uint32_t d = 0, hlen = 0;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&d), 4);
    in.read(reinterpret_cast<char*>(&hlen), 4);
    EmbeddingIndex index;
    index.checkpoint_hash.resize(hlen);
    in.read(index.checkpoint_hash.data(), hlen);
    index.matrix = nn::Tensor<float>(static_cast<int>(n), static_cast<int>(d));
    in.read(reinterpret_cast<char*>(index.matrix.a.data()),
            static_cast<std::streamsize>(index.matrix.count() * sizeof(float)));
    index.ids.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint32_t len = 0;
        in.read(reinterpret_cast<char*>(&len), 4);
        std::string id(len, '\0');
        in.read(id.data(), len);
        index.ids.push_back(std::move(id));
    }
    if (!in) throw_runtime("truncated index file: " + path);
    // unit-norm invariant
    for (int r = 0; r < index.matrix.rows; ++r) {
        double norm = 0;
        const float* row = index.matrix.row(r);
        for (int j = 0; j < index.matrix.cols; ++j) norm += row[j] * row[j];
        if (std::abs(std::sqrt(norm) - 1.0) > 1e-5)
            throw_runtime("index row " + std::to_string(r) + " is not unit-norm");
    }
    return index;
}

QueryRelevance load_qrels(const std::string& path) {
    QueryRelevance q;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        auto& s = q[j.at("query_id").get<std::string>()];
        for (const auto& id : j.at("relevant_doc_ids")) s.insert(id.get<std::string>());
    }
    return q;
}

void save_qrels(const std::string& path, const QueryRelevance& qrels) {
    std::ostringstream out;
    for (const auto& [qid, docs] : qrels) {
        nlohmann::json j = {{"query_id", qid},
                            {"relevant_doc_ids",
                             std::vector<std::string>(docs.begin(), docs.end())}};
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

}  // namespace forge::retrieval
