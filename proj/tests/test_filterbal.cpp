#include <doctest.h>

#include <cmath>

#include "forge/filterbal.hpp"
#include "forge/ingest.hpp"
#include "forge/rng.hpp"

using namespace forge;
using namespace forge::filterbal;
using corpus::Category;
using corpus::Document;
using corpus::Modality;

namespace {
std::vector<std::string> toks(const std::string& s) {
    return ingest::tokenize(s, Modality::text, ingest::Casing::lowercase);
}
Document doc(std::string id, std::string content) {
    Document d;
    d.id = std::move(id);
    d.modality = Modality::text;
    d.content = std::move(content);
    return d;
}
}  // namespace

TEST_CASE("keyword_score counts with multiplicity") {
    KeywordLexicon lex;
    lex.terms = {"malware"};
    CHECK(keyword_score(toks("malware uses malware"), lex) == 2);
    CHECK(keyword_score({}, lex) == 0);
    CHECK(keyword_score(toks("nothing matches here"), lex) == 0);
}

TEST_CASE("train_classifier reproduces hand-computed smoothed estimates") {
    // relevant = "a a", irrelevant = "b b", alpha = 1, vocab {a, b}
    std::vector<LabeledDoc> data = {{"a a", Label::relevant}, {"b b", Label::irrelevant}};
    RelevanceClassifier clf = train_classifier(data, 1.0);
    CHECK(clf.vocab_size() == 2);
    // P(a|rel) = (2+1)/(2+2) = 0.75
    CHECK(std::exp(clf.log_likelihood("a", Label::relevant)) == doctest::Approx(0.75));
    CHECK(std::exp(clf.log_likelihood("a", Label::irrelevant)) == doctest::Approx(0.25));
    CHECK(std::exp(clf.log_likelihood("b", Label::relevant)) == doctest::Approx(0.25));
    CHECK(std::exp(clf.log_likelihood("b", Label::irrelevant)) == doctest::Approx(0.75));
}

TEST_CASE("train_classifier symmetry under label swap") {
    std::vector<LabeledDoc> data = {{"x y x", Label::relevant}, {"z w z", Label::irrelevant}};
    std::vector<LabeledDoc> mirrored = {{"x y x", Label::irrelevant}, {"z w z", Label::relevant}};
    RelevanceClassifier a = train_classifier(data);
    RelevanceClassifier b = train_classifier(mirrored);
    CHECK(a.log_likelihood("x", Label::relevant) ==
          doctest::Approx(b.log_likelihood("x", Label::irrelevant)));
    CHECK(a.log_likelihood("z", Label::irrelevant) ==
          doctest::Approx(b.log_likelihood("z", Label::relevant)));
}

TEST_CASE("train_classifier requires both labels") {
    CHECK_THROWS(static_cast<void>(train_classifier({{"a", Label::relevant}})));
    CHECK_THROWS(static_cast<void>(train_classifier({}, 1.0)));
    CHECK_THROWS_AS(static_cast<void>(train_classifier(
                        {{"a", Label::relevant}, {"b", Label::irrelevant}}, 0.0)),
                    ForgeError);
}

TEST_CASE("classify_relevance hand-computed posteriors") {
    std::vector<LabeledDoc> data = {{"a a", Label::relevant}, {"b b", Label::irrelevant}};
    RelevanceClassifier clf = train_classifier(data, 1.0);
    // uniform priors; posterior("a") = 0.75*0.5/(0.75*0.5 + 0.25*0.5) = 0.75
    CHECK(classify_relevance(clf, toks("a")) == doctest::Approx(0.75));
    CHECK(classify_relevance(clf, toks("b")) == doctest::Approx(0.25));
    // empty and OOV-only docs fall back to the prior
    CHECK(classify_relevance(clf, {}) == doctest::Approx(0.5));
    CHECK(classify_relevance(clf, toks("zzz qqq")) == doctest::Approx(0.5));
}

TEST_CASE("classifier posteriors over the two classes sum to 1") {
    std::vector<LabeledDoc> data = {{"threat actor exploits flaw", Label::relevant},
                                    {"recipe for pancake batter", Label::irrelevant},
                                    {"patch the vulnerable server", Label::relevant}};
    RelevanceClassifier clf = train_classifier(data);
    Rng rng(3);
    std::vector<std::string> words = {"threat", "pancake", "server", "flaw", "batter", "zzz"};
    for (int t = 0; t < 30; ++t) {
        std::vector<std::string> d;
        for (std::size_t i = 0; i < rng.below(6); ++i)
            d.push_back(words[rng.below(words.size())]);
        double p = classify_relevance(clf, d);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        // complement probability computed by swapping labels
        std::vector<LabeledDoc> sw;
        for (auto& ld : data)
            sw.push_back({ld.content, ld.label == Label::relevant ? Label::irrelevant
                                                                  : Label::relevant});
        double q = classify_relevance(train_classifier(sw), d);
        CHECK(p + q == doctest::Approx(1.0));
    }
}

TEST_CASE("filter_corpus keeps on keyword OR posterior, boundary inclusive") {
    std::vector<LabeledDoc> seed = {{"malware exploit", Label::relevant},
                                    {"cooking recipes", Label::irrelevant}};
    RelevanceClassifier clf = train_classifier(seed);
    KeywordLexicon lex;
    lex.terms = {"malware", "exploit"};
    lex.min_hits = 2;

    // enough keyword hits, posterior irrelevant -> kept (disjunction)
    std::vector<Document> docs = {doc("k", "malware exploit cooking recipes cooking recipes")};
    auto [kept, rep] = filter_corpus(docs, lex, clf, 0.99);
    CHECK(kept.size() == 1);

    // 0 hits, posterior exactly at tau -> kept (inclusive boundary)
    std::vector<Document> boundary = {doc("b", "unseen words only")};
    double prior = classify_relevance(clf, toks("unseen words only"));
    auto [kept2, rep2] = filter_corpus(boundary, lex, clf, prior);
    CHECK(kept2.size() == 1);

    // 0 hits, posterior just below tau -> dropped, report carries both scores
    auto [kept3, rep3] = filter_corpus(boundary, lex, clf, prior + 1e-9);
    CHECK(kept3.empty());
    REQUIRE(rep3.drops.size() == 1);
    CHECK(rep3.drops[0].id == "b");
    CHECK(rep3.drops[0].keyword_hits == 0);
    CHECK(rep3.drops[0].posterior == doctest::Approx(prior));
}

TEST_CASE("filter_corpus is monotone in keyword hits") {
    std::vector<LabeledDoc> seed = {{"alpha beta", Label::relevant},
                                    {"gamma delta", Label::irrelevant}};
    RelevanceClassifier clf = train_classifier(seed);
    KeywordLexicon lex;
    lex.terms = {"alpha"};
    lex.min_hits = 1;
    std::vector<Document> kept_doc = {doc("x", "alpha gamma delta gamma delta")};
    auto [kept, rep] = filter_corpus(kept_doc, lex, clf, 0.9999);
    REQUIRE(kept.size() == 1);
    // adding more lexicon hits can never drop it
    std::vector<Document> more = {doc("x", "alpha alpha alpha gamma delta gamma delta")};
    auto [kept2, rep2] = filter_corpus(more, lex, clf, 0.9999);
    CHECK(kept2.size() == 1);
}

namespace {
corpus::CorpusManifest manifest_with(std::map<Category, std::int64_t> tokens) {
    corpus::CorpusManifest m;
    for (auto& [cat, n] : tokens) m.per_category[cat].text_tokens = n;
    return m;
}
}  // namespace

TEST_CASE("compute_balance_weights arithmetic") {
    // shares (0.9, 0.1), targets (0.5, 0.5), cap 10 -> w = (0.5556, 5.0)
    auto m = manifest_with({{Category::web, 900}, {Category::seed, 100}});
    BalancePlan plan = compute_balance_weights(
        m, {{Category::web, 0.5}, {Category::seed, 0.5}}, 10.0);
    CHECK(plan.weight.at(Category::web) == doctest::Approx(0.5 / 0.9));
    CHECK(plan.weight.at(Category::seed) == doctest::Approx(5.0));
    CHECK(plan.sampled_share.at(Category::web) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(plan.sampled_share.at(Category::seed) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("compute_balance_weights: equal shares give unit weights") {
    auto m = manifest_with({{Category::web, 250}, {Category::seed, 250},
                            {Category::dialogue, 250}, {Category::baseline, 250}});
    std::map<Category, double> targets = {{Category::web, 0.25},
                                          {Category::seed, 0.25},
                                          {Category::dialogue, 0.25},
                                          {Category::baseline, 0.25}};
    BalancePlan plan = compute_balance_weights(m, targets, 10.0);
    for (auto& [cat, w] : plan.weight) CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("compute_balance_weights caps minority upweighting") {
    auto m = manifest_with({{Category::web, 999}, {Category::seed, 1}});
    BalancePlan plan = compute_balance_weights(
        m, {{Category::web, 0.5}, {Category::seed, 0.5}}, 10.0);
    CHECK(plan.weight.at(Category::seed) == 10.0);  // 0.5/0.001 clipped at cap
}

TEST_CASE("compute_balance_weights validates inputs") {
    auto m = manifest_with({{Category::web, 10}});
    CHECK_THROWS_AS(static_cast<void>(compute_balance_weights(
                        m, {{Category::seed, 1.0}}, 10.0)),
                    ForgeError);  // target for absent category
    CHECK_THROWS_AS(static_cast<void>(compute_balance_weights(
                        m, {{Category::web, 0.7}}, 10.0)),
                    ForgeError);  // targets must sum to 1
}

TEST_CASE("uncapped renormalized shares match targets (property)") {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        std::map<Category, std::int64_t> tokens;
        std::map<Category, double> targets;
        std::vector<Category> cats = {Category::seed, Category::web, Category::dialogue};
        double tsum = 0;
        std::vector<double> raw;
        for (auto c : cats) {
            tokens[c] = 100 + static_cast<std::int64_t>(rng.below(900));
            raw.push_back(0.1 + rng.uniform());
            tsum += raw.back();
        }
        for (std::size_t i = 0; i < cats.size(); ++i) targets[cats[i]] = raw[i] / tsum;
        // huge cap: nothing clips, so sampled shares must equal targets
        BalancePlan plan = compute_balance_weights(manifest_with(tokens), targets, 1e9);
        for (auto c : cats)
            CHECK(std::abs(plan.sampled_share.at(c) - targets.at(c)) < 1e-9);
    }
}
