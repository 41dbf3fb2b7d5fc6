#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forge/common.hpp"

namespace forge::corpus {

enum class Category {
    seed,
    web,
    reasoning,
    instruction,
    code_vuln,
    dialogue,
    baseline,
    synthetic,
};

enum class Tier { high, medium, low };

enum class Modality { text, code };

const std::vector<Category>& all_categories();
std::string to_string(Category c);
std::string to_string(Tier t);
std::string to_string(Modality m);
Category category_from_string(const std::string& s);
Modality modality_from_string(const std::string& s);

// Quality tiers are fixed per category except `synthetic`, which is
// configurable at ingest time.
Tier tier_of(Category c, Tier synthetic_tier = Tier::medium);

struct Document {
    std::string id;
    Category source = Category::seed;
    Modality modality = Modality::text;
    std::string content;                      // NFC-normalized before downstream use
    std::optional<std::int64_t> token_count;  // set by ingest
};

struct StageCounter {
    std::int64_t documents_in = 0;
    std::int64_t documents_out = 0;
    std::int64_t documents_dropped = 0;
};

struct CategoryTokens {
    std::int64_t code_tokens = 0;
    std::int64_t text_tokens = 0;
};

struct CorpusManifest {
    std::string tokenizer_version;
    std::map<Category, CategoryTokens> per_category;
    CategoryTokens totals;
    std::map<std::string, StageCounter> stage_counters;
};

struct DatasetSplit {
    std::set<std::string> train;
    std::set<std::string> test;
};

struct SplitReport {
    std::vector<std::string> overlap;        // ids in both train and test
    std::vector<std::string> out_of_corpus;  // referenced ids missing from the corpus
    bool valid() const { return overlap.empty() && out_of_corpus.empty(); }
};

// Per-category token accounting split by modality. Permutation-invariant and
// safe as a parallel reduction (integer sums). Throws on a document whose
// token_count is unset, naming the id.
CorpusManifest build_manifest(const std::vector<Document>& documents);

SplitReport validate_split(const DatasetSplit& split, const std::set<std::string>& corpus_ids);

// JSON-Lines corpus file I/O. Duplicate ids are rejected on load.
std::vector<Document> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<Document>& docs);

std::string manifest_to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const std::string& json_text);

void save_split(const std::string& path, const DatasetSplit& split);
DatasetSplit load_split(const std::string& path);

}  // namespace forge::corpus
