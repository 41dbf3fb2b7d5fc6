#include "forge/curriculum.hpp"

#include <algorithm>
#include <cmath>

namespace forge::curriculum {

std::string to_string(Phase p) {
    switch (p) {
        case Phase::early: return "early";
        case Phase::mid: return "mid";
        case Phase::late: return "late";
    }
    return "?";
}

void PhaseSchedule::validate() const {
    if (!(0.0 < e1 && e1 < e2 && e2 < 1.0))
        throw_config("phase schedule requires 0 < e1 < e2 < 1");
}

Phase phase_of(double progress, const PhaseSchedule& s) {
    s.validate();
    if (!(progress >= 0.0 && progress <= 1.0))
        throw ForgeError(Status::runtime,
                         "progress outside [0,1]: " + std::to_string(progress));
    if (progress < s.e1) return Phase::early;
    if (progress < s.e2) return Phase::mid;
    return Phase::late;
}

double blend_factor(double progress, const PhaseSchedule& s) {
    switch (phase_of(progress, s)) {
        case Phase::early: return 0.0;
        case Phase::mid: return (progress - s.e1) / (s.e2 - s.e1);
        case Phase::late: return 1.0 + (s.lambda_late - 1.0) * (progress - s.e2) / (1.0 - s.e2);
    }
    return 0.0;
}

namespace {

double tier_score(corpus::Tier t) {
    switch (t) {
        case corpus::Tier::high: return 3.0;
        case corpus::Tier::medium: return 2.0;
        case corpus::Tier::low: return 1.0;
    }
    return 2.0;
}

}  // namespace

SourceWeights source_weights(double progress, const PhaseSchedule& s,
                             const filterbal::BalancePlan& plan,
                             const std::optional<PerplexityStats>& ppl,
                             const FeedbackConfig& fb) {
    Phase phase = phase_of(progress, s);
    double lambda = blend_factor(progress, s);
    if (plan.sampled_share.empty()) throw_config("source_weights: empty balance plan");

    // quality prior over present categories
    std::map<corpus::Category, double> q;
    double qsum = 0.0;
    for (const auto& [cat, share] : plan.sampled_share) {
        double sc = tier_score(corpus::tier_of(cat, fb.synthetic_tier));
        q[cat] = sc;
        qsum += sc;
    }
    for (auto& [cat, v] : q) v /= qsum;

    SourceWeights w;
    w.progress = progress;
    double sum = 0.0;
    for (const auto& [cat, share] : plan.sampled_share) {
        double base = (1.0 - lambda) * q[cat] + lambda * share;
        w.p[cat] = base;
        sum += base;
    }
    for (auto& [cat, v] : w.p) v /= sum;

    if (ppl.has_value() && phase == Phase::mid) {
        for (const auto& [cat, v] : ppl->ppl) {
            if (!w.p.count(cat))
                throw_config("perplexity stats name a category missing from the balance plan: " +
                             corpus::to_string(cat));
            if (!(v > 0.0) || !std::isfinite(v))
                throw_config("perplexity must be finite and positive");
        }
        double mean_log = 0.0;
        int n = 0;
        for (const auto& [cat, v] : ppl->ppl) {
            mean_log += std::log(v);
            ++n;
        }
        if (n > 0) {
            mean_log /= n;
            double fsum = 0.0;
            for (auto& [cat, v] : w.p) {
                auto it = ppl->ppl.find(cat);
                if (it != ppl->ppl.end()) {
                    double centered = std::log(it->second) - mean_log;
                    double clamped = std::clamp(centered, -fb.clip, fb.clip);
                    v *= std::exp(fb.eta * clamped);
                }
                fsum += v;
            }
            for (auto& [cat, v] : w.p) v /= fsum;
        }
    }
    return w;
}

std::vector<std::string> sample_batch(
    const SourceWeights& weights,
    const std::map<corpus::Category, std::vector<std::string>>& pools, int batch_size,
    Rng& rng) {
    if (batch_size < 1) throw_config("sample_batch: batch_size must be >= 1");
    // cdf over categories in deterministic (map) order
    std::vector<std::pair<corpus::Category, double>> cdf;
    double acc = 0.0;
    for (const auto& [cat, p] : weights.p) {
        if (p <= 0.0) continue;
        auto it = pools.find(cat);
        if (it == pools.end() || it->second.empty())
            throw ForgeError(Status::runtime, "positive-weight category has an empty pool: " +
                                                  corpus::to_string(cat));
        acc += p;
        cdf.emplace_back(cat, acc);
    }
    if (cdf.empty()) throw_config("sample_batch: no category has positive weight");

    // without replacement within the batch, re-armed when exhausted
    std::map<corpus::Category, std::vector<std::size_t>> available;
    std::vector<std::string> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) {
        double u = rng.uniform() * acc;
        corpus::Category cat = cdf.back().first;
        for (const auto& [c, edge] : cdf) {
            if (u < edge) {
                cat = c;
                break;
            }
        }
        auto& avail = available[cat];
        if (avail.empty()) {
            const auto& pool = pools.at(cat);
            avail.resize(pool.size());
            for (std::size_t k = 0; k < pool.size(); ++k) avail[k] = k;
        }
        std::size_t pick = static_cast<std::size_t>(rng.below(avail.size()));
        batch.push_back(pools.at(cat)[avail[pick]]);
        avail[pick] = avail.back();
        avail.pop_back();
    }
    return batch;
}

}  // namespace forge::curriculum
