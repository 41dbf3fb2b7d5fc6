#include <doctest.h>

#include <cmath>

#include "forge/curriculum.hpp"

using namespace forge;
using namespace forge::curriculum;
using corpus::Category;
using filterbal::BalancePlan;

namespace {

BalancePlan plan_with(std::map<Category, double> shares) {
    BalancePlan p;
    p.sampled_share = std::move(shares);
    for (auto& [c, s] : p.sampled_share) p.weight[c] = 1.0;
    return p;
}

double weight_sum(const SourceWeights& w) {
    double s = 0;
    for (auto& [c, v] : w.p) s += v;
    return s;
}

}  // namespace

TEST_CASE("phase_of boundaries belong to the later phase") {
    PhaseSchedule s;  // e1=0.3 e2=0.8
    CHECK(phase_of(0.0, s) == Phase::early);
    CHECK(phase_of(0.2999, s) == Phase::early);
    CHECK(phase_of(0.3, s) == Phase::mid);
    CHECK(phase_of(0.7999, s) == Phase::mid);
    CHECK(phase_of(0.8, s) == Phase::late);
    CHECK(phase_of(1.0, s) == Phase::late);
    CHECK_THROWS(static_cast<void>(phase_of(-0.01, s)));
    CHECK_THROWS(static_cast<void>(phase_of(1.01, s)));
    PhaseSchedule bad;
    bad.e1 = 0.9;
    bad.e2 = 0.5;
    CHECK_THROWS_AS(static_cast<void>(phase_of(0.5, bad)), ForgeError);
}

TEST_CASE("blend_factor ramps and endpoints") {
    PhaseSchedule s;
    CHECK(blend_factor(0.0, s) == 0.0);
    CHECK(blend_factor(0.15, s) == 0.0);
    // midpoint of the mid phase
    CHECK(blend_factor(0.55, s) == doctest::Approx(0.5));
    CHECK(blend_factor(1.0, s) == doctest::Approx(s.lambda_late));
}

TEST_CASE("blend_factor is continuous at phase boundaries") {
    PhaseSchedule s;
    const double eps = 1e-9;
    CHECK(std::abs(blend_factor(s.e1 - eps, s) - blend_factor(s.e1, s)) < 1e-6);
    CHECK(std::abs(blend_factor(s.e2 - eps, s) - blend_factor(s.e2, s)) < 1e-6);
    // exact boundary values
    CHECK(blend_factor(s.e1, s) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(blend_factor(s.e2, s) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("source_weights at progress 0 equal the quality prior exactly") {
    // seed=high(3), dialogue=medium(2), web=low(1): prior = (1/2, 1/3, 1/6)
    BalancePlan plan = plan_with(
        {{Category::seed, 0.1}, {Category::dialogue, 0.3}, {Category::web, 0.6}});
    PhaseSchedule s;
    FeedbackConfig fb;
    // perplexity present but inactive outside mid phase
    PerplexityStats ppl;
    ppl.ppl = {{Category::seed, 5.0}, {Category::dialogue, 50.0}, {Category::web, 500.0}};
    SourceWeights w = source_weights(0.0, s, plan, ppl, fb);
    CHECK(w.p.at(Category::seed) == doctest::Approx(3.0 / 6.0));
    CHECK(w.p.at(Category::dialogue) == doctest::Approx(2.0 / 6.0));
    CHECK(w.p.at(Category::web) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("source_weights blends prior and balanced shares") {
    // two categories, Q=(0.75,0.25) via tiers high/low, U=(0.5,0.5), λ=0.5
    BalancePlan plan = plan_with({{Category::seed, 0.5}, {Category::web, 0.5}});
    PhaseSchedule s;
    s.e1 = 0.2;
    s.e2 = 0.8;  // λ=0.5 at progress 0.5
    FeedbackConfig fb;
    SourceWeights w = source_weights(0.5, s, plan, std::nullopt, fb);
    CHECK(w.p.at(Category::seed) == doctest::Approx(0.625));
    CHECK(w.p.at(Category::web) == doctest::Approx(0.375));
}

TEST_CASE("equal perplexities leave mid-phase weights at the blend") {
    BalancePlan plan = plan_with({{Category::seed, 0.5}, {Category::web, 0.5}});
    PhaseSchedule s;
    s.e1 = 0.2;
    s.e2 = 0.8;
    FeedbackConfig fb;
    PerplexityStats ppl;
    ppl.ppl = {{Category::seed, 33.0}, {Category::web, 33.0}};
    SourceWeights with = source_weights(0.5, s, plan, ppl, fb);
    SourceWeights without = source_weights(0.5, s, plan, std::nullopt, fb);
    CHECK(with.p.at(Category::seed) == doctest::Approx(without.p.at(Category::seed)));
    CHECK(with.p.at(Category::web) == doctest::Approx(without.p.at(Category::web)));
}

TEST_CASE("source_weights always a probability distribution") {
    Rng rng(31);
    PhaseSchedule s;
    FeedbackConfig fb;
    std::vector<Category> cats = {Category::seed, Category::web, Category::dialogue,
                                  Category::reasoning, Category::code_vuln};
    for (int trial = 0; trial < 300; ++trial) {
        std::map<Category, double> shares;
        double sum = 0;
        for (auto c : cats) {
            shares[c] = 0.01 + rng.uniform();
            sum += shares[c];
        }
        for (auto& [c, v] : shares) v /= sum;
        std::optional<PerplexityStats> ppl;
        if (rng.bernoulli(0.5)) {
            PerplexityStats st;
            for (auto c : cats) st.ppl[c] = std::exp(rng.uniform() * 8.0);
            ppl = st;
        }
        double progress = rng.uniform();
        SourceWeights w = source_weights(progress, s, plan_with(shares), ppl, fb);
        CHECK(std::abs(weight_sum(w) - 1.0) <= 1e-12);
        for (auto& [c, v] : w.p) CHECK(v >= 0.0);
    }
}

TEST_CASE("mid-phase feedback is monotone: raising a category's ppl never lowers its weight") {
    Rng rng(47);
    PhaseSchedule s;
    FeedbackConfig fb;
    std::vector<Category> all = {Category::seed,      Category::web,     Category::dialogue,
                                 Category::reasoning, Category::code_vuln, Category::baseline,
                                 Category::instruction, Category::synthetic};
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng.below(7);
        std::map<Category, double> shares;
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            shares[all[i]] = 0.01 + rng.uniform();
            sum += shares[all[i]];
        }
        for (auto& [c, v] : shares) v /= sum;
        PerplexityStats ppl;
        for (auto& [c, v] : shares) ppl.ppl[c] = std::exp(rng.uniform() * 10.0 - 1.0);
        double progress = s.e1 + rng.uniform() * (s.e2 - s.e1 - 1e-9);
        BalancePlan plan = plan_with(shares);
        SourceWeights before = source_weights(progress, s, plan, ppl, fb);

        // raise one category's perplexity by a random factor
        auto it = ppl.ppl.begin();
        std::advance(it, static_cast<long>(rng.below(ppl.ppl.size())));
        Category raised = it->first;
        PerplexityStats raised_ppl = ppl;
        raised_ppl.ppl[raised] *= 1.0 + rng.uniform() * 50.0;
        SourceWeights after = source_weights(progress, s, plan, raised_ppl, fb);
        CHECK(after.p.at(raised) >= before.p.at(raised) - 1e-12);
    }
}

TEST_CASE("weights at progress 0 favor high tiers over low tiers") {
    Rng rng(53);
    PhaseSchedule s;
    FeedbackConfig fb;
    for (int trial = 0; trial < 50; ++trial) {
        std::map<Category, double> shares = {{Category::seed, 0.05 + rng.uniform() * 0.9}};
        shares[Category::web] = 1.0 - shares[Category::seed];
        SourceWeights w = source_weights(0.0, s, plan_with(shares), std::nullopt, fb);
        CHECK(w.p.at(Category::seed) >= w.p.at(Category::web));
    }
}

TEST_CASE("sample_batch draws follow the weights") {
    SourceWeights w;
    w.p = {{Category::seed, 0.7}, {Category::web, 0.3}};
    std::map<Category, std::vector<std::string>> pools = {
        {Category::seed, {"s0", "s1", "s2", "s3", "s4"}},
        {Category::web, {"w0", "w1", "w2", "w3", "w4"}},
    };
    Rng rng = derive_rng(1, "sample-test");
    int seed_picks = 0, total = 10000;
    for (int i = 0; i < total; ++i) {
        auto batch = sample_batch(w, pools, 1, rng);
        if (batch[0][0] == 's') ++seed_picks;
    }
    CHECK(std::abs(seed_picks / double(total) - 0.7) <= 0.02);
}

TEST_CASE("sample_batch determinism and single-category behavior") {
    SourceWeights w;
    w.p = {{Category::seed, 1.0}};
    std::map<Category, std::vector<std::string>> pools = {{Category::seed, {"a", "b", "c"}}};
    Rng r1 = derive_rng(9, "batch");
    Rng r2 = derive_rng(9, "batch");
    auto b1 = sample_batch(w, pools, 8, r1);
    auto b2 = sample_batch(w, pools, 8, r2);
    CHECK(b1 == b2);
    for (auto& id : b1) CHECK((id == "a" || id == "b" || id == "c"));

    // without replacement within the batch until the pool re-arms
    Rng r3 = derive_rng(10, "batch");
    auto b3 = sample_batch(w, pools, 3, r3);
    std::set<std::string> uniq(b3.begin(), b3.end());
    CHECK(uniq.size() == 3);
}

TEST_CASE("sample_batch rejects positive-weight empty pools") {
    SourceWeights w;
    w.p = {{Category::seed, 1.0}};
    std::map<Category, std::vector<std::string>> pools;
    Rng rng(1);
    CHECK_THROWS(static_cast<void>(sample_batch(w, pools, 1, rng)));
    std::map<Category, std::vector<std::string>> pools2 = {{Category::seed, {}}};
    CHECK_THROWS(static_cast<void>(sample_batch(w, pools2, 1, rng)));
}
