#include "forge/dedup.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "forge/ingest.hpp"
#include "forge/rng.hpp"
#include "forge/util.hpp"

namespace forge::dedup {

namespace {

// per-permutation universal-ish hash: odd multiplier + xor constant, finished
// with a splitmix round
inline std::uint64_t perm_hash(std::uint64_t x, std::uint64_t mul, std::uint64_t add) {
    std::uint64_t z = x * mul + add;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct PermTable {
    std::vector<std::uint64_t> mul, add;
};

PermTable make_perms(int perms, std::uint64_t seed) {
    PermTable t;
    Rng rng = derive_rng(seed, "minhash-perms");
    t.mul.reserve(perms);
    t.add.reserve(perms);
    for (int i = 0; i < perms; ++i) {
        t.mul.push_back(rng.next_u64() | 1ULL);
        t.add.push_back(rng.next_u64());
    }
    return t;
}

}  // namespace

ShingleSet shingle(const std::vector<std::string>& tokens, int k, const std::string& doc_id) {
    if (k < 1) throw_config("shingle: k must be >= 1");
    ShingleSet s;
    s.doc_id = doc_id;
    s.k = k;
    if (tokens.size() < static_cast<std::size_t>(k)) return s;
    for (std::size_t i = 0; i + k <= tokens.size(); ++i) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int j = 0; j < k; ++j) {
            h = fnv1a64(tokens[i + j], h);
            h = fnv1a64("\x1f", h);  // separator so [ab,c] != [a,bc]
        }
        s.shingles.insert(h);
    }
    return s;
}

MinHashSignature minhash_signature(const ShingleSet& s, int perms, std::uint64_t seed) {
    if (perms < 1) throw_config("minhash_signature: perms must be >= 1");
    if (s.shingles.empty())
        throw ForgeError(Status::runtime, "unshingleable document: " + s.doc_id);
    PermTable t = make_perms(perms, seed);
    MinHashSignature sig;
    sig.doc_id = s.doc_id;
    sig.seed = seed;
    sig.values.assign(static_cast<std::size_t>(perms), ~0ULL);
    for (std::uint64_t x : s.shingles) {
        for (int i = 0; i < perms; ++i) {
            std::uint64_t h = perm_hash(x, t.mul[i], t.add[i]);
            if (h < sig.values[i]) sig.values[i] = h;
        }
    }
    return sig;
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.perms() != b.perms() || a.seed != b.seed)
        throw ForgeError(Status::runtime, "incompatible minhash signatures (perms/seed mismatch)");
    if (a.values.empty()) throw ForgeError(Status::runtime, "empty minhash signature");
    int match = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] == b.values[i]) ++match;
    return static_cast<double>(match) / static_cast<double>(a.values.size());
}

double exact_jaccard(const ShingleSet& a, const ShingleSet& b, bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (a.shingles.empty() && b.shingles.empty()) {
        if (degenerate) *degenerate = true;
        return 1.0;
    }
    const auto& small = a.shingles.size() <= b.shingles.size() ? a.shingles : b.shingles;
    const auto& large = a.shingles.size() <= b.shingles.size() ? b.shingles : a.shingles;
    std::size_t inter = 0;
    for (std::uint64_t x : small)
        if (large.count(x)) ++inter;
    std::size_t uni = a.shingles.size() + b.shingles.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::pair<std::string, std::string>> lsh_candidates(
    const std::vector<MinHashSignature>& signatures, int bands, int rows) {
    if (bands < 1 || rows < 1) throw_config("lsh_candidates: bands and rows must be >= 1");
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    for (std::size_t d = 0; d < signatures.size(); ++d) {
        const MinHashSignature& sig = signatures[d];
        if (sig.perms() != bands * rows)
            throw_config("lsh_candidates: bands*rows (" + std::to_string(bands * rows) +
                         ") != perms (" + std::to_string(sig.perms()) + ")");
        for (int b = 0; b < bands; ++b) {
            std::uint64_t h = fnv1a64_u64(static_cast<std::uint64_t>(b));
            for (int r = 0; r < rows; ++r)
                h = fnv1a64_u64(sig.values[static_cast<std::size_t>(b * rows + r)], h);
            buckets[h].push_back(d);
        }
    }
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& [h, ids] : buckets) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                const std::string& a = signatures[ids[i]].doc_id;
                const std::string& b = signatures[ids[j]].doc_id;
                if (a == b) continue;
                pairs.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
            }
        }
    }
    return {pairs.begin(), pairs.end()};
}

double char_similarity(const std::string& a, const std::string& b) {
    if (a.empty() && b.empty()) return 1.0;
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0) return 0.0;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    double dist = static_cast<double>(prev[m]);
    return 1.0 - dist / static_cast<double>(std::max(n, m));
}

std::pair<std::vector<corpus::Document>, DedupReport> dedup_corpus(
    const std::vector<corpus::Document>& documents, const DedupConfig& cfg) {
    if (cfg.bands * cfg.rows != cfg.perms)
        throw_config("dedup: bands*rows must equal perms");

    DedupReport report;
    std::unordered_map<std::string, std::size_t> order;  // stable input order
    for (std::size_t i = 0; i < documents.size(); ++i) order[documents[i].id] = i;

    // shingles and signatures, intra-modality, parallel per document
    std::vector<ShingleSet> sets(documents.size());
    std::vector<int> shingleable(documents.size(), 0);
    parallel_for(documents.size(), cfg.workers, [&](std::size_t i) {
        const corpus::Document& d = documents[i];
        bool code = d.modality == corpus::Modality::code;
        auto tokens = ingest::tokenize(d.content, d.modality, ingest::Casing::lowercase);
        sets[i] = shingle(tokens, code ? cfg.k_code : cfg.k_text, d.id);
        shingleable[i] = sets[i].shingles.empty() ? 0 : 1;
    });

    std::vector<MinHashSignature> sigs(documents.size());
    parallel_for(documents.size(), cfg.workers, [&](std::size_t i) {
        if (shingleable[i]) sigs[i] = minhash_signature(sets[i], cfg.perms, cfg.seed);
    });

    for (std::size_t i = 0; i < documents.size(); ++i)
        if (!shingleable[i]) report.unshingleable.push_back(documents[i].id);

    // candidates per modality so text never pairs with code
    std::unordered_map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < documents.size(); ++i) index_of[documents[i].id] = i;
    std::vector<std::pair<std::string, std::string>> candidates;
    for (corpus::Modality mod : {corpus::Modality::text, corpus::Modality::code}) {
        std::vector<MinHashSignature> group;
        for (std::size_t i = 0; i < documents.size(); ++i)
            if (shingleable[i] && documents[i].modality == mod) group.push_back(sigs[i]);
        auto pairs = lsh_candidates(group, cfg.bands, cfg.rows);
        candidates.insert(candidates.end(), pairs.begin(), pairs.end());
    }
    // deterministic confirmation order: earlier kept-candidate first
    std::sort(candidates.begin(), candidates.end(),
              [&](const auto& p, const auto& q) {
                  auto key = [&](const std::pair<std::string, std::string>& pr) {
                      std::size_t a = order[pr.first], b = order[pr.second];
                      return std::make_pair(std::min(a, b), std::max(a, b));
                  };
                  return key(p) < key(q);
              });

    // first occurrence wins: the later document of a confirmed pair is dropped,
    // and a dropped document cannot knock out further docs itself
    std::unordered_set<std::string> dropped;
    for (const auto& [ida, idb] : candidates) {
        bool a_first = order[ida] < order[idb];
        const std::string& keep_id = a_first ? ida : idb;
        const std::string& drop_id = a_first ? idb : ida;
        if (dropped.count(keep_id) || dropped.count(drop_id)) continue;
        std::size_t ik = index_of[keep_id], id_ = index_of[drop_id];
        double est = estimate_jaccard(sigs[ik], sigs[id_]);
        if (est < cfg.candidate_threshold) continue;
        const std::string& ca = documents[ik].content;
        const std::string& cb = documents[id_].content;
        double sim = char_similarity(ca.substr(0, cfg.char_prefix), cb.substr(0, cfg.char_prefix));
        if (sim < cfg.confirm_threshold) continue;
        dropped.insert(drop_id);
        report.drops.push_back(DropRecord{drop_id, keep_id, est, sim});
    }

    std::vector<corpus::Document> kept;
    kept.reserve(documents.size() - dropped.size());
    for (const corpus::Document& d : documents) {
        if (dropped.count(d.id)) continue;
        if (!cfg.keep_unshingleable && sets[index_of[d.id]].shingles.empty()) continue;
        kept.push_back(d);
    }
    return {kept, report};
}

void save_drop_report(const std::string& path, const DedupReport& report) {
    std::ostringstream out;
    for (const DropRecord& r : report.drops) {
        nlohmann::json j = {{"dropped", r.dropped},
                            {"kept", r.kept},
                            {"est_jaccard", r.est_jaccard},
                            {"char_sim", r.char_sim}};
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

}  // namespace forge::dedup
