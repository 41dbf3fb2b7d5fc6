#include <doctest.h>

#include <filesystem>

#include "forge/dedup.hpp"
#include "forge/ingest.hpp"
#include "forge/synth.hpp"
#include "forge/util.hpp"

using namespace forge;
using namespace forge::synth;

namespace {
SynthSpec small_spec() {
    SynthSpec s;
    s.docs_per_category = {
        {corpus::Category::seed, 30},      {corpus::Category::web, 30},
        {corpus::Category::reasoning, 12}, {corpus::Category::instruction, 12},
        {corpus::Category::code_vuln, 18}, {corpus::Category::dialogue, 12},
        {corpus::Category::baseline, 12},  {corpus::Category::synthetic, 12},
    };
    s.dup_rate = 0.2;
    s.rel_pairs = 20;
    s.eval_queries = 10;
    s.distractor_docs = 10;
    s.adversarial_train = 5;
    s.adversarial_eval = 5;
    s.ner_train = 20;
    s.ner_test = 8;
    s.vuln_train = 20;
    s.vuln_test = 8;
    s.eval_nouns = 10;
    s.eval_verbs = 6;
    s.eval_code = 8;
    s.seed = 99;
    return s;
}
}  // namespace

TEST_CASE("synthetic generation is deterministic for a fixed seed") {
    SynthSpec spec = small_spec();
    SynthResult a = generate_synthetic(spec);
    SynthResult b = generate_synthetic(spec);
    REQUIRE(a.raw_docs.size() == b.raw_docs.size());
    for (std::size_t i = 0; i < a.raw_docs.size(); ++i) {
        CHECK(a.raw_docs[i].id == b.raw_docs[i].id);
        CHECK(a.raw_docs[i].content == b.raw_docs[i].content);
    }
    spec.seed = 100;
    SynthResult c = generate_synthetic(spec);
    bool any_diff = c.raw_docs.size() != a.raw_docs.size();
    for (std::size_t i = 0; !any_diff && i < a.raw_docs.size(); ++i)
        any_diff |= a.raw_docs[i].content != c.raw_docs[i].content;
    CHECK(any_diff);
}

TEST_CASE("planted duplicate count follows the rate and pairs are recorded") {
    SynthSpec spec = small_spec();
    SynthResult r = generate_synthetic(spec);
    // 0.2 * 138 category docs = 28 (rounded)
    std::size_t eligible = 0;
    for (auto& [cat, n] : spec.docs_per_category) eligible += static_cast<std::size_t>(n);
    CHECK(r.planted_duplicates.size() ==
          static_cast<std::size_t>(spec.dup_rate * static_cast<double>(eligible) + 0.5));
    // each pair exists in the corpus and the dup is catchable by dedup defaults
    std::map<std::string, std::string> content;
    for (const auto& d : r.raw_docs) content[d.id] = d.content;
    for (const auto& [orig, dup] : r.planted_duplicates) {
        REQUIRE(content.count(orig));
        REQUIRE(content.count(dup));
        CHECK(dedup::char_similarity(content[orig].substr(0, 4096),
                                     content[dup].substr(0, 4096)) >= 0.85);
    }
}

TEST_CASE("dedup catches the synthetic planted duplicates") {
    SynthSpec spec = small_spec();
    SynthResult r = generate_synthetic(spec);
    dedup::DedupConfig cfg;
    auto [kept, report] = dedup::dedup_corpus(r.raw_docs, cfg);
    std::set<std::string> dropped;
    for (const auto& d : report.drops) dropped.insert(d.dropped);
    for (const auto& [orig, dup] : r.planted_duplicates) CHECK(dropped.count(dup));
}

TEST_CASE("planted relevance pairs appear in qrels one-to-one") {
    SynthResult r = generate_synthetic(small_spec());
    CHECK(r.train_pairs.size() == 20);
    CHECK(r.qrels.size() == r.train_pairs.size());
    for (const auto& p : r.train_pairs) {
        REQUIRE(r.qrels.count(p.query_id));
        CHECK(r.qrels.at(p.query_id) == std::set<std::string>{p.doc_id});
    }
    CHECK(r.queries.size() == 10);
    // every referenced doc exists in the retrieval collection
    std::set<std::string> ids;
    for (const auto& d : r.retrieval_docs) ids.insert(d.id);
    for (const auto& [qid, rel] : r.qrels)
        for (const auto& id : rel) CHECK(ids.count(id));
    for (const auto& [qid, rel] : r.adv_qrels)
        for (const auto& id : rel) CHECK(ids.count(id));
}

TEST_CASE("eval records align with token boundaries and lex classes") {
    SynthResult r = generate_synthetic(small_spec());
    CHECK(!r.eval_records.empty());
    ingest::Tokenizer tk = ingest::build_vocab(r.raw_docs, 1, 4000);
    int checked = 0;
    for (const auto& rec : r.eval_records) {
        mask::MaskedExample ex = mask::make_eval_example(rec, tk, 256);
        CHECK(!ex.masked_positions.empty());
        for (std::size_t p : ex.masked_positions) CHECK(ex.labels[p] != mask::kIgnore);
        ++checked;
    }
    CHECK(checked == static_cast<int>(r.eval_records.size()));
    // gold surfaces are in-vocabulary so the eval is non-degenerate
    for (const auto& rec : r.eval_records)
        if (rec.modality == corpus::Modality::text)
            CHECK(tk.id_of(rec.gold) != ingest::Tokenizer::UNK);
}

TEST_CASE("split is valid and test ids cover eval sources") {
    SynthResult r = generate_synthetic(small_spec());
    std::set<std::string> corpus_ids;
    for (const auto& d : r.raw_docs) corpus_ids.insert(d.id);
    auto report = corpus::validate_split(r.split, corpus_ids);
    CHECK(report.valid());
    for (const auto& rec : r.eval_records)
        if (!rec.doc_id.empty()) CHECK(r.split.test.count(rec.doc_id));
}

TEST_CASE("ner sentences align tokens and labels; vuln labels are balanced") {
    SynthResult r = generate_synthetic(small_spec());
    CHECK(r.ner_train.size() == 20);
    CHECK(r.ner_test.size() == 8);
    for (const auto& s : r.ner_train) {
        REQUIRE(s.tokens.size() == s.labels.size());
        bool has_entity = false;
        for (std::size_t i = 0; i < s.labels.size(); ++i) {
            const std::string& l = s.labels[i];
            CHECK((l == "O" || l[0] == 'B' || l[0] == 'I'));
            has_entity |= l != "O";
            if (l[0] == 'I') {
                REQUIRE(i > 0);
                CHECK(s.labels[i - 1].substr(1) == l.substr(1));
            }
        }
        CHECK(has_entity);
    }
    int pos = 0;
    for (const auto& v : r.vuln_train) pos += v.label;
    CHECK(pos == 10);  // alternating labels, half vulnerable
    // vulnerable samples carry an unchecked copy; safe ones do not
    for (const auto& v : r.vuln_train) {
        bool has_vuln_marker = v.content.find("strcpy(buf") != std::string::npos ||
                               v.content.find("strcat(buf") != std::string::npos ||
                               v.content.find("sprintf(buf, \"%s\"") != std::string::npos ||
                               v.content.find("gets(buf)") != std::string::npos ||
                               (v.content.find("memcpy(buf") != std::string::npos &&
                                v.content.find("if (n <") == std::string::npos);
        CHECK(has_vuln_marker == (v.label == 1));
    }
}

TEST_CASE("synthetic file tree round-trips through the loaders") {
    SynthResult r = generate_synthetic(small_spec());
    std::string dir = "synth_tmp_out";
    write_synthetic(dir, r);

    auto docs = corpus::load_corpus(dir + "/raw.jsonl");
    CHECK(docs.size() == r.raw_docs.size());
    auto split = corpus::load_split(dir + "/split.json");
    CHECK(split.train.size() == r.split.train.size());
    auto records = mask::load_eval_records(dir + "/eval_records.jsonl");
    CHECK(records.size() == r.eval_records.size());
    auto pairs = load_train_pairs(dir + "/pairs_train.jsonl");
    CHECK(pairs.size() == r.train_pairs.size());
    auto cross = load_cross_pairs(dir + "/cross_train.jsonl");
    CHECK(cross.size() == r.cross_pairs.size());
    auto ner = load_ner_file(dir + "/ner_train.jsonl");
    CHECK(ner.size() == r.ner_train.size());
    auto vuln = load_vuln_file(dir + "/vuln_test.jsonl");
    CHECK(vuln.size() == r.vuln_test.size());
    auto queries = load_queries(dir + "/queries.jsonl");
    CHECK(queries.size() == r.queries.size());
    auto qrels = retrieval::load_qrels(dir + "/qrels.jsonl");
    CHECK(qrels == r.qrels);
    CHECK(file_exists(dir + "/truth.json"));
    CHECK(file_exists(dir + "/lexicon.txt"));

    // byte-identical rewrite (generator determinism through serialization)
    std::string dir2 = "synth_tmp_out2";
    write_synthetic(dir2, generate_synthetic(small_spec()));
    CHECK(read_file(dir + "/raw.jsonl") == read_file(dir2 + "/raw.jsonl"));
    CHECK(read_file(dir + "/eval_records.jsonl") == read_file(dir2 + "/eval_records.jsonl"));

    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("synth spec validation") {
    SynthSpec s = small_spec();
    s.dup_rate = 1.5;
    CHECK_THROWS_AS(static_cast<void>(generate_synthetic(s)), ForgeError);
    s = small_spec();
    s.eval_queries = s.rel_pairs + 1;
    CHECK_THROWS_AS(static_cast<void>(generate_synthetic(s)), ForgeError);
}
