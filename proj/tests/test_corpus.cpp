#include <doctest.h>

#include <cstdio>

#include "forge/corpus.hpp"
#include "forge/rng.hpp"

using namespace forge;
using namespace forge::corpus;

namespace {
Document doc(std::string id, Category cat, Modality mod, std::int64_t tokens) {
    Document d;
    d.id = std::move(id);
    d.source = cat;
    d.modality = mod;
    d.token_count = tokens;
    return d;
}
}  // namespace

TEST_CASE("build_manifest sums per category and modality") {
    std::vector<Document> docs = {
        doc("a", Category::seed, Modality::text, 10),
        doc("b", Category::seed, Modality::text, 20),
        doc("c", Category::seed, Modality::code, 5),
    };
    CorpusManifest m = build_manifest(docs);
    CHECK(m.per_category.at(Category::seed).text_tokens == 30);
    CHECK(m.per_category.at(Category::seed).code_tokens == 5);
    CHECK(m.totals.text_tokens == 30);
    CHECK(m.totals.code_tokens == 5);
}

TEST_CASE("build_manifest on empty input is all zeros") {
    CorpusManifest m = build_manifest({});
    CHECK(m.per_category.empty());
    CHECK(m.totals.code_tokens == 0);
    CHECK(m.totals.text_tokens == 0);
}

TEST_CASE("build_manifest reproduces the published per-category accounting") {
    // one text + one code document per category, planted with the reference
    // token counts; checks the summation columns of the manifest schema
    std::vector<Document> docs = {
        doc("s.c", Category::seed, Modality::code, 9406451),
        doc("s.t", Category::seed, Modality::text, 256859788),
        doc("w.c", Category::web, Modality::code, 268993),
        doc("w.t", Category::web, Modality::text, 12231942693LL),
        doc("r.t", Category::reasoning, Modality::text, 3229293),
        doc("i.c", Category::instruction, Modality::code, 61590),
        doc("i.t", Category::instruction, Modality::text, 2336218),
        doc("v.c", Category::code_vuln, Modality::code, 2146875),
        doc("d.c", Category::dialogue, Modality::code, 41503749),
        doc("d.t", Category::dialogue, Modality::text, 56871556),
        doc("b.t", Category::baseline, Modality::text, 1072798637),
    };
    CorpusManifest m = build_manifest(docs);
    CHECK(m.totals.code_tokens == 53387658LL);
    // the text column genuinely sums to this (hand-added)
    CHECK(m.totals.text_tokens == 13624038185LL);
}

TEST_CASE("build_manifest rejects documents without token counts") {
    Document d;
    d.id = "nocount";
    CHECK_THROWS_WITH_AS(static_cast<void>(build_manifest({d})),
                         doctest::Contains("nocount"), ForgeError);
}

TEST_CASE("build_manifest is permutation invariant") {
    Rng rng(7);
    std::vector<Document> docs;
    for (int i = 0; i < 200; ++i) {
        auto cat = all_categories()[rng.below(all_categories().size())];
        auto mod = rng.bernoulli(0.3) ? Modality::code : Modality::text;
        docs.push_back(doc("d" + std::to_string(i), cat, mod, (std::int64_t)rng.below(1000)));
    }
    CorpusManifest before = build_manifest(docs);
    rng.shuffle(docs);
    CorpusManifest after = build_manifest(docs);
    CHECK(manifest_to_json(before) == manifest_to_json(after));

    // totals equal sums of per-category entries
    std::int64_t code = 0, text = 0;
    for (auto& [c, ct] : after.per_category) {
        code += ct.code_tokens;
        text += ct.text_tokens;
    }
    CHECK(code == after.totals.code_tokens);
    CHECK(text == after.totals.text_tokens);
}

TEST_CASE("validate_split flags overlap and out-of-corpus ids") {
    std::set<std::string> corpus_ids = {"a", "b", "c"};
    SplitReport ok = validate_split({{"a", "b"}, {"c"}}, corpus_ids);
    CHECK(ok.valid());

    SplitReport overlap = validate_split({{"a", "b"}, {"b"}}, corpus_ids);
    CHECK(overlap.overlap == std::vector<std::string>{"b"});

    SplitReport oob = validate_split({{"a"}, {"z"}}, {"a", "b"});
    CHECK(oob.out_of_corpus == std::vector<std::string>{"z"});
    CHECK_FALSE(oob.valid());
}

TEST_CASE("validate_split empty-overlap iff disjoint (property)") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        DatasetSplit s;
        std::set<std::string> corpus_ids;
        for (int i = 0; i < 30; ++i) {
            std::string id = "x" + std::to_string(rng.below(40));
            corpus_ids.insert(id);
            if (rng.bernoulli(0.5)) s.train.insert(id);
            if (rng.bernoulli(0.3)) s.test.insert(id);
        }
        bool disjoint = true;
        for (auto& id : s.test)
            if (s.train.count(id)) disjoint = false;
        CHECK(validate_split(s, corpus_ids).overlap.empty() == disjoint);
    }
}

TEST_CASE("corpus jsonl round-trips and rejects duplicate ids") {
    std::string path = "test_corpus_tmp.jsonl";
    std::vector<Document> docs = {
        doc("a", Category::web, Modality::text, 3),
        doc("b", Category::code_vuln, Modality::code, 7),
    };
    docs[0].content = "hello \"quoted\" text";
    docs[1].content = "int main() { return 0; }";
    docs[1].token_count.reset();
    save_corpus(path, docs);
    auto loaded = load_corpus(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].id == "a");
    CHECK(loaded[0].content == docs[0].content);
    CHECK(loaded[0].token_count == 3);
    CHECK_FALSE(loaded[1].token_count.has_value());
    CHECK(loaded[1].source == Category::code_vuln);

    docs.push_back(doc("a", Category::web, Modality::text, 1));
    save_corpus(path, docs);
    CHECK_THROWS(static_cast<void>(load_corpus(path)));
    std::remove(path.c_str());
}

TEST_CASE("manifest json round-trip keeps counters") {
    CorpusManifest m = build_manifest({doc("a", Category::seed, Modality::text, 12)});
    m.stage_counters["dedup"] = StageCounter{10, 8, 2};
    CorpusManifest back = manifest_from_json(manifest_to_json(m));
    CHECK(back.totals.text_tokens == 12);
    CHECK(back.stage_counters.at("dedup").documents_dropped == 2);
    CHECK(back.stage_counters.at("dedup").documents_in ==
          back.stage_counters.at("dedup").documents_out +
              back.stage_counters.at("dedup").documents_dropped);
}

TEST_CASE("quality tiers are fixed per category") {
    CHECK(tier_of(Category::seed) == Tier::high);
    CHECK(tier_of(Category::code_vuln) == Tier::high);
    CHECK(tier_of(Category::baseline) == Tier::high);
    CHECK(tier_of(Category::reasoning) == Tier::medium);
    CHECK(tier_of(Category::instruction) == Tier::medium);
    CHECK(tier_of(Category::dialogue) == Tier::medium);
    CHECK(tier_of(Category::web) == Tier::low);
    CHECK(tier_of(Category::synthetic, Tier::low) == Tier::low);
    CHECK(tier_of(Category::synthetic, Tier::high) == Tier::high);
}
