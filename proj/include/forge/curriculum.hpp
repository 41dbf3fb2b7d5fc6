#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/filterbal.hpp"
#include "forge/rng.hpp"

namespace forge::curriculum {

enum class Phase { early, mid, late };

std::string to_string(Phase p);

struct PhaseSchedule {
    double e1 = 0.3;          // early/mid boundary (training-progress fraction)
    double e2 = 0.8;          // mid/late boundary
    double lambda_late = 0.3; // blend value at progress 1.0
    void validate() const;
};

struct SourceWeights {
    std::map<corpus::Category, double> p;  // sums to 1
    double progress = 0.0;
};

struct PerplexityStats {
    std::map<corpus::Category, double> ppl;  // held-out perplexity, > 0
    std::int64_t step = 0;
    std::vector<corpus::Category> excluded;  // categories with no masked positions
};

// interval membership; boundaries belong to the later phase
Phase phase_of(double progress, const PhaseSchedule& s);

// 0 on early, linear 0->1 across mid, linear 1->lambda_late across late;
// continuous everywhere
double blend_factor(double progress, const PhaseSchedule& s);

struct FeedbackConfig {
    double eta = 0.5;
    double clip = 2.0;
    corpus::Tier synthetic_tier = corpus::Tier::medium;
};

// base_c = (1-λ)·Q_c + λ·U_c with Q the tier-score prior (high=3, medium=2,
// low=1 over present categories) and U the balanced size-proportional
// distribution from the BalancePlan. Perplexity feedback multiplies base_c by
// exp(eta·clamp(log ppl_c − mean log ppl, ±clip)) during the mid phase only,
// then renormalizes.
SourceWeights source_weights(double progress, const PhaseSchedule& s,
                             const filterbal::BalancePlan& plan,
                             const std::optional<PerplexityStats>& ppl,
                             const FeedbackConfig& fb);

// categories drawn i.i.d. from the weights; documents uniformly without
// replacement within a batch (the pool re-arms across batches, and also if a
// category exhausts mid-batch). Deterministic for a fixed rng state.
std::vector<std::string> sample_batch(const SourceWeights& weights,
                                      const std::map<corpus::Category, std::vector<std::string>>& pools,
                                      int batch_size, Rng& rng);

}  // namespace forge::curriculum
