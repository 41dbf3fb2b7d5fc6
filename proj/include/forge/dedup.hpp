#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "forge/corpus.hpp"

namespace forge::dedup {

struct ShingleSet {
    std::string doc_id;
    int k = 5;
    std::unordered_set<std::uint64_t> shingles;
};

struct MinHashSignature {
    std::string doc_id;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> values;  // one minimum per permutation
    int perms() const { return static_cast<int>(values.size()); }
};

struct DedupConfig {
    int k_text = 5;
    int k_code = 10;
    int perms = 256;
    int bands = 32;
    int rows = 8;
    double candidate_threshold = 0.8;
    double confirm_threshold = 0.85;
    std::uint64_t seed = 0;
    std::size_t char_prefix = 4096;    // character-similarity cost bound
    bool keep_unshingleable = true;    // docs too short to shingle
    int workers = 1;
};

struct DropRecord {
    std::string dropped;
    std::string kept;
    double est_jaccard = 0.0;
    double char_sim = 0.0;
};

struct DedupReport {
    std::vector<DropRecord> drops;
    std::vector<std::string> unshingleable;
};

// k-token shingles hashed to 64 bits; fewer than k tokens yields an empty set.
ShingleSet shingle(const std::vector<std::string>& tokens, int k, const std::string& doc_id = "");

// values[i] = min over shingles of the i-th seeded hash. Throws on an empty
// shingle set ("unshingleable document"); the corpus-level pass handles that
// per config instead.
MinHashSignature minhash_signature(const ShingleSet& s, int perms, std::uint64_t seed);

// fraction of matching slots; requires same perms and seed
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

// |A∩B| / |A∪B|; the both-empty pair is defined as 1.0 and flagged degenerate
double exact_jaccard(const ShingleSet& a, const ShingleSet& b, bool* degenerate = nullptr);

// banded LSH candidate pairs (sorted, no self-pairs); bands*rows must equal perms
std::vector<std::pair<std::string, std::string>> lsh_candidates(
    const std::vector<MinHashSignature>& signatures, int bands, int rows);

// 1 − levenshtein/max(len); both empty -> 1.0
double char_similarity(const std::string& a, const std::string& b);

std::pair<std::vector<corpus::Document>, DedupReport> dedup_corpus(
    const std::vector<corpus::Document>& documents, const DedupConfig& cfg);

void save_drop_report(const std::string& path, const DedupReport& report);

}  // namespace forge::dedup
