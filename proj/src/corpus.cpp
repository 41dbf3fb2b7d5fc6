#include "forge/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "forge/util.hpp"

namespace forge::corpus {

using nlohmann::json;

const std::vector<Category>& all_categories() {
    static const std::vector<Category> cats = {
        Category::seed,      Category::web,       Category::reasoning, Category::instruction,
        Category::code_vuln, Category::dialogue,  Category::baseline,  Category::synthetic,
    };
    return cats;
}

std::string to_string(Category c) {
    switch (c) {
        case Category::seed: return "seed";
        case Category::web: return "web";
        case Category::reasoning: return "reasoning";
        case Category::instruction: return "instruction";
        case Category::code_vuln: return "code_vuln";
        case Category::dialogue: return "dialogue";
        case Category::baseline: return "baseline";
        case Category::synthetic: return "synthetic";
    }
    return "?";
}

std::string to_string(Tier t) {
    switch (t) {
        case Tier::high: return "high";
        case Tier::medium: return "medium";
        case Tier::low: return "low";
    }
    return "?";
}

std::string to_string(Modality m) { return m == Modality::text ? "text" : "code"; }

Category category_from_string(const std::string& s) {
    for (Category c : all_categories())
        if (to_string(c) == s) return c;
    throw_config("unknown source category: " + s);
}

Modality modality_from_string(const std::string& s) {
    if (s == "text") return Modality::text;
    if (s == "code") return Modality::code;
    throw_config("unknown modality: " + s);
}

Tier tier_of(Category c, Tier synthetic_tier) {
    switch (c) {
        case Category::seed:
        case Category::code_vuln:
        case Category::baseline: return Tier::high;
        case Category::reasoning:
        case Category::instruction:
        case Category::dialogue: return Tier::medium;
        case Category::web: return Tier::low;
        case Category::synthetic: return synthetic_tier;
    }
    return Tier::medium;
}

CorpusManifest build_manifest(const std::vector<Document>& documents) {
    CorpusManifest m;
    m.tokenizer_version = kTokenizerVersion;
    for (const Document& d : documents) {
        if (!d.token_count.has_value())
            throw ForgeError(Status::runtime,
                             "accounting error: document has no token count: " + d.id);
        CategoryTokens& ct = m.per_category[d.source];
        if (d.modality == Modality::code)
            ct.code_tokens += *d.token_count;
        else
            ct.text_tokens += *d.token_count;
    }
    for (const auto& [cat, ct] : m.per_category) {
        m.totals.code_tokens += ct.code_tokens;
        m.totals.text_tokens += ct.text_tokens;
    }
    return m;
}

SplitReport validate_split(const DatasetSplit& split, const std::set<std::string>& corpus_ids) {
    SplitReport r;
    for (const std::string& id : split.test)
        if (split.train.count(id)) r.overlap.push_back(id);
    for (const std::string& id : split.train)
        if (!corpus_ids.count(id)) r.out_of_corpus.push_back(id);
    for (const std::string& id : split.test)
        if (!corpus_ids.count(id)) r.out_of_corpus.push_back(id);
    return r;
}

std::vector<Document> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_missing("cannot open corpus: " + path);
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw_runtime("corpus parse error at " + path + ":" + std::to_string(lineno) + ": " +
                          e.what());
        }
        Document d;
        d.id = j.at("id").get<std::string>();
        d.source = category_from_string(j.at("source").get<std::string>());
        d.modality = modality_from_string(j.at("modality").get<std::string>());
        d.content = j.at("content").get<std::string>();
        if (j.contains("token_count")) d.token_count = j["token_count"].get<std::int64_t>();
        if (!seen.insert(d.id).second)
            throw_runtime("duplicate document id in corpus: " + d.id);
        docs.push_back(std::move(d));
    }
    return docs;
}

void save_corpus(const std::string& path, const std::vector<Document>& docs) {
    std::ostringstream out;
    for (const Document& d : docs) {
        json j;
        j["id"] = d.id;
        j["source"] = to_string(d.source);
        j["modality"] = to_string(d.modality);
        j["content"] = d.content;
        if (d.token_count.has_value()) j["token_count"] = *d.token_count;
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

std::string manifest_to_json(const CorpusManifest& m) {
    json cats = json::array();
    for (const auto& [cat, ct] : m.per_category) {
        cats.push_back({{"category", to_string(cat)},
                        {"code_tokens", ct.code_tokens},
                        {"text_tokens", ct.text_tokens}});
    }
    json stages = json::object();
    for (const auto& [name, sc] : m.stage_counters) {
        stages[name] = {{"documents_in", sc.documents_in},
                        {"documents_out", sc.documents_out},
                        {"documents_dropped", sc.documents_dropped}};
    }
    json j = {{"tokenizer_version", m.tokenizer_version},
              {"categories", cats},
              {"totals",
               {{"code_tokens", m.totals.code_tokens}, {"text_tokens", m.totals.text_tokens}}},
              {"stage_counters", stages}};
    return j.dump(2) + "\n";
}

CorpusManifest manifest_from_json(const std::string& text) {
    json j = json::parse(text);
    CorpusManifest m;
    m.tokenizer_version = j.value("tokenizer_version", "");
    for (const auto& c : j.at("categories")) {
        CategoryTokens ct;
        ct.code_tokens = c.at("code_tokens").get<std::int64_t>();
        ct.text_tokens = c.at("text_tokens").get<std::int64_t>();
        m.per_category[category_from_string(c.at("category").get<std::string>())] = ct;
    }
    m.totals.code_tokens = j.at("totals").at("code_tokens").get<std::int64_t>();
    m.totals.text_tokens = j.at("totals").at("text_tokens").get<std::int64_t>();
    if (j.contains("stage_counters")) {
        for (auto it = j["stage_counters"].begin(); it != j["stage_counters"].end(); ++it) {
            StageCounter sc;
            sc.documents_in = it.value().at("documents_in").get<std::int64_t>();
            sc.documents_out = it.value().at("documents_out").get<std::int64_t>();
            sc.documents_dropped = it.value().at("documents_dropped").get<std::int64_t>();
            m.stage_counters[it.key()] = sc;
        }
    }
    return m;
}

void save_split(const std::string& path, const DatasetSplit& split) {
    json j;
    j["train"] = std::vector<std::string>(split.train.begin(), split.train.end());
    j["test"] = std::vector<std::string>(split.test.begin(), split.test.end());
    write_file(path, j.dump(2) + "\n");
}

DatasetSplit load_split(const std::string& path) {
    json j = json::parse(read_file(path));
    DatasetSplit s;
    for (const auto& id : j.at("train")) s.train.insert(id.get<std::string>());
    for (const auto& id : j.at("test")) s.test.insert(id.get<std::string>());
    return s;
}

}  // namespace forge::corpus
