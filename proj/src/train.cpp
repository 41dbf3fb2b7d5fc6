#include "forge/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "forge/util.hpp"

namespace forge::train {

using nn::AdamState;
using nn::Params;

void write_trace(const std::string& path, const std::vector<TraceEntry>& entries) {
    std::ostringstream out;
    for (const TraceEntry& e : entries) {
        nlohmann::json j = {{"step", e.step}, {"task", e.task}, {"loss", e.loss}, {"lr", e.lr}};
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

void write_curriculum_trace(const std::string& path,
                            const std::vector<CurriculumTraceEntry>& entries) {
    std::ostringstream out;
    for (const CurriculumTraceEntry& e : entries) {
        nlohmann::json w = nlohmann::json::object();
        for (const auto& [cat, p] : e.weights.p) w[corpus::to_string(cat)] = p;
        nlohmann::json j = {{"step", e.step},
                            {"progress", e.progress},
                            {"phase", curriculum::to_string(e.phase)},
                            {"weights", w}};
        if (e.ppl.has_value()) {
            nlohmann::json pj = nlohmann::json::object();
            for (const auto& [cat, v] : e.ppl->ppl) pj[corpus::to_string(cat)] = v;
            j["ppl"] = pj;
        }
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

PreparedDoc prepare_doc(const corpus::Document& doc, const ingest::Tokenizer& tk, int max_len) {
    PreparedDoc p;
    p.id = doc.id;
    p.category = doc.source;
    p.modality = doc.modality;
    if (doc.modality == corpus::Modality::code) {
        p.code = ingest::tokenize_code(doc.content);
        std::vector<std::string> toks;
        toks.reserve(p.code.tokens.size());
        for (const auto& t : p.code.tokens) toks.push_back(t.text);
        p.seq = ingest::encode(tk, toks, max_len);
    } else {
        p.seq = ingest::encode(tk, ingest::tokenize(doc.content, doc.modality, tk.casing),
                               max_len);
    }
    return p;
}

std::optional<mask::MaskedExample> mask_prepared(const PreparedDoc& doc,
                                                 const mask::MaskingConfig& cfg, int vocab_size,
                                                 Rng& rng) {
    // a handful of redraws so short documents still yield a labeled example
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            mask::MaskedExample ex =
                doc.modality == corpus::Modality::code
                    ? mask::mask_code(doc.seq, doc.code, cfg, vocab_size, rng)
                    : mask::mask_dynamic(doc.seq, cfg, vocab_size, rng);
            if (!ex.masked_positions.empty()) return ex;
        } catch (const ForgeError&) {
            return std::nullopt;  // nothing maskable at all
        }
    }
    return std::nullopt;
}

curriculum::PerplexityStats held_out_perplexity(
    const Params<float>& params,
    const std::map<corpus::Category, std::vector<mask::MaskedExample>>& batches) {
    curriculum::PerplexityStats stats;
    for (const auto& [cat, examples] : batches) {
        double nll_sum = 0.0;
        std::int64_t positions = 0;
        for (const mask::MaskedExample& ex : examples) {
            std::int64_t n = static_cast<std::int64_t>(ex.masked_positions.size());
            if (n == 0) continue;
            double loss = nn::mlm_loss<float>(params, ex, nullptr);
            nll_sum += loss * static_cast<double>(n);
            positions += n;
        }
        if (positions == 0) {
            stats.excluded.push_back(cat);
            continue;
        }
        stats.ppl[cat] = std::exp(nll_sum / static_cast<double>(positions));
    }
    return stats;
}

namespace {

using nn::Tensor;

// deterministic batch-parallel gradient accumulation: per-item buffers, then a
// sequential sum in item order. Identical results for any worker count.
struct BatchWork {
    std::vector<Params<float>> grads;
    std::vector<double> losses;
    std::vector<int> used;

    void resize(std::size_t n, const Params<float>& shape) {
        while (grads.size() < n) grads.push_back(Params<float>::like(shape));
        losses.assign(n, 0.0);
        used.assign(n, 0);
    }
};

double reduce_into(BatchWork& work, std::size_t n, Params<float>& total) {
    int items = 0;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!work.used[i]) continue;
        ++items;
        loss_sum += work.losses[i];
    }
    if (items == 0) return std::numeric_limits<double>::quiet_NaN();
    const float inv = 1.0f / static_cast<float>(items);
    std::vector<Tensor<float>*> dst;
    total.visit([&](const std::string&, nn::Tensor<float>& t) { dst.push_back(&t); });
    for (std::size_t i = 0; i < n; ++i) {
        if (!work.used[i]) continue;
        std::vector<const nn::Tensor<float>*> src;
        work.grads[i].visit(
            [&](const std::string&, const nn::Tensor<float>& t) { src.push_back(&t); });
        for (std::size_t k = 0; k < dst.size(); ++k)
            for (std::size_t j = 0; j < dst[k]->a.size(); ++j)
                dst[k]->a[j] += src[k]->a[j] * inv;
    }
    return loss_sum / items;
}

void check_finite_loss(double loss, const std::vector<TraceEntry>& trace) {
    if (std::isfinite(loss)) return;
    (void)trace;
    throw ForgeError(Status::divergence, "training loss diverged (non-finite)");
}

}  // namespace

TrainResult train_mlm(Params<float>& params, const std::vector<PreparedDoc>& train_docs,
                      const std::map<corpus::Category, std::vector<mask::MaskedExample>>&
                          held_out_batches,
                      const MlmTrainOptions& opts, const LogFn& log) {
    TrainResult result;
    if (opts.cfg.total_steps <= 0) return result;
    if (train_docs.empty()) throw_missing("train_mlm: empty training corpus");

    std::map<corpus::Category, std::vector<std::string>> pools;
    std::map<std::string, std::size_t> doc_index;
    for (std::size_t i = 0; i < train_docs.size(); ++i) {
        pools[train_docs[i].category].push_back(train_docs[i].id);
        doc_index[train_docs[i].id] = i;
    }

    AdamState<float> state = AdamState<float>::like(params);
    Rng sampler_rng = derive_rng(opts.seed, "curriculum-sampler");
    std::optional<curriculum::PerplexityStats> ppl;
    BatchWork work;
    const int B = opts.cfg.batch_size;

    for (std::int64_t step = 1; step <= opts.cfg.total_steps; ++step) {
        double progress = static_cast<double>(step - 1) /
                          static_cast<double>(opts.cfg.total_steps);
        bool refresh = opts.use_ppl_feedback && !held_out_batches.empty() &&
                       (step == 1 || (step - 1) % opts.ppl_refresh_every == 0);
        if (refresh) ppl = held_out_perplexity(params, held_out_batches);

        curriculum::SourceWeights weights = curriculum::source_weights(
            progress, opts.schedule, opts.balance, ppl, opts.feedback);
        if (step == 1 || (step - 1) % opts.ppl_refresh_every == 0) {
            CurriculumTraceEntry ce;
            ce.step = step;
            ce.progress = progress;
            ce.phase = curriculum::phase_of(progress, opts.schedule);
            ce.weights = weights;
            ce.ppl = ppl;
            result.curriculum_trace.push_back(ce);
        }

        std::vector<std::string> batch_ids =
            curriculum::sample_batch(weights, pools, B, sampler_rng);

        work.resize(static_cast<std::size_t>(B), params);
        parallel_for(static_cast<std::size_t>(B), opts.workers, [&](std::size_t i) {
            const PreparedDoc& doc = train_docs[doc_index.at(batch_ids[i])];
            Rng item_rng = derive_rng(opts.seed, "mlm-mask",
                                      static_cast<std::uint64_t>(step) * 1000003ULL + i);
            auto ex = mask_prepared(doc, opts.masking, params.cfg.vocab_size, item_rng);
            if (!ex.has_value()) return;
            work.grads[i].visit([](const std::string&, Tensor<float>& t) { t.zero(); });
            Rng drop_rng = derive_rng(opts.seed, "mlm-dropout",
                                      static_cast<std::uint64_t>(step) * 1000003ULL + i);
            work.losses[i] = nn::mlm_loss(params, *ex, &work.grads[i],
                                          params.cfg.dropout > 0 ? &drop_rng : nullptr);
            work.used[i] = 1;
        });

        Params<float> total = Params<float>::like(params);
        double loss = reduce_into(work, static_cast<std::size_t>(B), total);
        if (std::isnan(loss)) continue;  // nothing maskable in this batch
        if (!std::isfinite(loss)) check_finite_loss(loss, result.trace);

        nn::clip_grad_norm(total, opts.cfg.grad_clip_norm);
        double lr = nn::lr_at(step, opts.cfg);
        nn::adamw_step(params, total, state, lr, opts.cfg.weight_decay, opts.cfg);

        result.trace.push_back(TraceEntry{step, "mlm", loss, lr});
        result.final_loss = loss;
        result.steps_run = step;
        if (log && (step % 50 == 0 || step == 1)) log("pretrain", step, "loss", loss);
    }
    return result;
}

TrainResult train_mlm_fixed(Params<float>& params,
                            const std::vector<mask::MaskedExample>& examples,
                            const nn::TrainConfig& cfg, std::uint64_t seed, int workers,
                            const LogFn& log) {
    TrainResult result;
    if (cfg.total_steps <= 0 || examples.empty()) return result;
    AdamState<float> state = AdamState<float>::like(params);
    Rng order_rng = derive_rng(seed, "mlm-fixed-order");
    BatchWork work;
    const int B = cfg.batch_size;
    for (std::int64_t step = 1; step <= cfg.total_steps; ++step) {
        work.resize(static_cast<std::size_t>(B), params);
        std::vector<std::size_t> picks(static_cast<std::size_t>(B));
        for (auto& p : picks) p = static_cast<std::size_t>(order_rng.below(examples.size()));
        parallel_for(static_cast<std::size_t>(B), workers, [&](std::size_t i) {
            work.grads[i].visit([](const std::string&, Tensor<float>& t) { t.zero(); });
            work.losses[i] = nn::mlm_loss<float>(params, examples[picks[i]], &work.grads[i]);
            work.used[i] = 1;
        });
        Params<float> total = Params<float>::like(params);
        double loss = reduce_into(work, static_cast<std::size_t>(B), total);
        check_finite_loss(loss, result.trace);
        nn::clip_grad_norm(total, cfg.grad_clip_norm);
        double lr = nn::lr_at(step, cfg);
        nn::adamw_step(params, total, state, lr, cfg.weight_decay, cfg);
        result.trace.push_back(TraceEntry{step, "mlm", loss, lr});
        result.final_loss = loss;
        result.steps_run = step;
        if (log && step % 50 == 0) log("mlm-fixed", step, "loss", loss);
    }
    return result;
}

namespace {

// shared early-stopping epoch driver for the fine-tuning tasks
template <typename StepFn, typename ValFn>
TrainResult epoch_driver(Params<float>& params, std::size_t n_train, std::size_t n_val,
                         const nn::TrainConfig& cfg, std::uint64_t seed, const char* task,
                         const LogFn& log, StepFn&& run_batch, ValFn&& val_loss) {
    TrainResult result;
    if (cfg.epochs <= 0 || n_train == 0) return result;
    const int B = std::max(1, cfg.batch_size);
    const std::int64_t steps_per_epoch =
        static_cast<std::int64_t>((n_train + static_cast<std::size_t>(B) - 1) /
                                  static_cast<std::size_t>(B));
    nn::TrainConfig sched = cfg;
    sched.total_steps = steps_per_epoch * cfg.epochs;
    if (sched.warmup_steps <= 0)
        sched.warmup_steps = std::max<std::int64_t>(1, sched.total_steps / 10);

    AdamState<float> state = AdamState<float>::like(params);
    Params<float> best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int stale_rounds = 0;
    std::int64_t step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<std::size_t> order(n_train);
        for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
        Rng shuffle_rng = derive_rng(seed, "epoch-shuffle", static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);

        for (std::size_t off = 0; off < n_train; off += static_cast<std::size_t>(B)) {
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(off),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(
                                               off + static_cast<std::size_t>(B), n_train)));
            ++step;
            double lr = nn::lr_at(step, sched);
            double loss = run_batch(batch, state, lr, step);
            check_finite_loss(loss, result.trace);
            result.trace.push_back(TraceEntry{step, task, loss, lr});
            result.final_loss = loss;
            result.steps_run = step;
        }

        if (n_val > 0) {
            double v = val_loss();
            if (log) log(task, epoch + 1, "val_loss", v);
            if (v < best_val - 1e-9) {
                best_val = v;
                best = params;
                best_epoch = epoch;
                stale_rounds = 0;
            } else if (++stale_rounds >= cfg.patience) {
                break;
            }
        }
        if (log) log(task, epoch + 1, "train_loss", result.final_loss);
    }
    if (n_val > 0 && best_epoch >= 0) {
        params = best;
        result.best_epoch = best_epoch;
    }
    return result;
}

}  // namespace

TrainResult train_bi(Params<float>& params, const std::vector<BiPair>& pairs,
                     const BiTrainOptions& opts, const LogFn& log) {
    if (pairs.empty()) throw_missing("train_bi: no training pairs");
    std::size_t n_val = std::min(pairs.size() / 2,
                                 static_cast<std::size_t>(opts.val_fraction *
                                                          static_cast<double>(pairs.size())));
    std::size_t n_train = pairs.size() - n_val;

    // mined hard negatives per training query, refreshed by epoch
    std::vector<std::vector<std::size_t>> mined(n_train);
    int last_mined_epoch = -1;

    auto maybe_mine = [&](std::int64_t step, std::int64_t steps_per_epoch) {
        if (!opts.mine_hard_negatives || opts.hard_negatives_per_query <= 0) return;
        int epoch = static_cast<int>((step - 1) / std::max<std::int64_t>(1, steps_per_epoch));
        if (last_mined_epoch >= 0 && (epoch - last_mined_epoch) < opts.mine_refresh_epochs)
            return;
        last_mined_epoch = epoch;
        std::vector<std::vector<float>> doc_embs(n_train);
        parallel_for(n_train, opts.workers, [&](std::size_t i) {
            doc_embs[i] = nn::embed(params, pairs[i].doc_ids);
        });
        parallel_for(n_train, opts.workers, [&](std::size_t qi) {
            std::vector<float> qe = nn::embed(params, pairs[qi].query_ids);
            std::vector<std::pair<double, std::size_t>> scored;
            for (std::size_t dj = 0; dj < n_train; ++dj) {
                if (dj == qi || pairs[dj].doc_id == pairs[qi].doc_id) continue;
                double s = 0;
                for (std::size_t k = 0; k < qe.size(); ++k) s += qe[k] * doc_embs[dj][k];
                scored.emplace_back(-s, dj);  // ascending sort -> most similar first
            }
            std::size_t k = std::min<std::size_t>(
                static_cast<std::size_t>(opts.hard_negatives_per_query), scored.size());
            std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                              scored.end());
            mined[qi].clear();
            for (std::size_t j = 0; j < k; ++j) mined[qi].push_back(scored[j].second);
        });
    };

    const std::int64_t steps_per_epoch = static_cast<std::int64_t>(
        (n_train + static_cast<std::size_t>(opts.cfg.batch_size) - 1) /
        static_cast<std::size_t>(opts.cfg.batch_size));

    auto run_batch = [&](const std::vector<std::size_t>& batch, AdamState<float>& state,
                         double lr, std::int64_t step) {
        maybe_mine(step, steps_per_epoch);
        std::vector<std::vector<int>> queries, positives, negatives;
        std::set<std::string> batch_doc_ids;
        for (std::size_t i : batch) batch_doc_ids.insert(pairs[i].doc_id);
        std::set<std::size_t> neg_idx;
        for (std::size_t i : batch)
            for (std::size_t nj : mined[i])
                if (!batch_doc_ids.count(pairs[nj].doc_id)) neg_idx.insert(nj);
        for (std::size_t i : batch) {
            queries.push_back(pairs[i].query_ids);
            positives.push_back(pairs[i].doc_ids);
        }
        for (std::size_t nj : neg_idx) negatives.push_back(pairs[nj].doc_ids);
        if (queries.size() + negatives.size() < 2 && !queries.empty())
            negatives.push_back(pairs[(batch[0] + 1) % pairs.size()].doc_ids);

        Params<float> grads = Params<float>::like(params);
        double loss = nn::bi_encoder_loss(params, queries, positives, negatives, opts.tau,
                                          &grads);
        nn::clip_grad_norm(grads, opts.cfg.grad_clip_norm);
        nn::adamw_step(params, grads, state, lr, opts.cfg.weight_decay, opts.cfg);
        return loss;
    };

    auto val_loss = [&]() {
        if (n_val == 0) return 0.0;
        std::vector<std::vector<int>> q, p, negs;
        for (std::size_t i = n_train; i < pairs.size(); ++i) {
            q.push_back(pairs[i].query_ids);
            p.push_back(pairs[i].doc_ids);
        }
        if (q.size() < 2) negs.push_back(pairs[0].doc_ids);  // lone val pair needs a negative
        return static_cast<double>(
            nn::bi_encoder_loss<float>(params, q, p, negs, opts.tau, nullptr));
    };

    return epoch_driver(params, n_train, n_val, opts.cfg, opts.seed, "bi", log, run_batch,
                        val_loss);
}

namespace {

// per-item parallel fine-tune batches (cross / ner / vuln)
template <typename Item, typename LossFn>
TrainResult itemwise_driver(Params<float>& params, const std::vector<Item>& items,
                            const FineTuneOptions& opts, const char* task, const LogFn& log,
                            LossFn&& item_loss) {
    if (items.empty()) throw_missing(std::string(task) + ": no training examples");
    std::size_t n_val = std::min(items.size() / 2,
                                 static_cast<std::size_t>(opts.val_fraction *
                                                          static_cast<double>(items.size())));
    std::size_t n_train = items.size() - n_val;
    BatchWork work;

    auto run_batch = [&](const std::vector<std::size_t>& batch, AdamState<float>& state,
                         double lr, std::int64_t) {
        work.resize(batch.size(), params);
        parallel_for(batch.size(), opts.workers, [&](std::size_t i) {
            work.grads[i].visit([](const std::string&, Tensor<float>& t) { t.zero(); });
            work.losses[i] = item_loss(items[batch[i]], &work.grads[i]);
            work.used[i] = 1;
        });
        Params<float> total = Params<float>::like(params);
        double loss = reduce_into(work, batch.size(), total);
        nn::clip_grad_norm(total, opts.cfg.grad_clip_norm);
        nn::adamw_step(params, total, state, lr, opts.cfg.weight_decay, opts.cfg);
        return loss;
    };

    auto val_loss = [&]() {
        double sum = 0;
        for (std::size_t i = n_train; i < items.size(); ++i)
            sum += item_loss(items[i], nullptr);
        return n_val > 0 ? sum / static_cast<double>(n_val) : 0.0;
    };

    return epoch_driver(params, n_train, n_val, opts.cfg, opts.seed, task, log, run_batch,
                        val_loss);
}

}  // namespace

TrainResult train_cross(Params<float>& params, const std::vector<CrossExample>& examples,
                        const FineTuneOptions& opts, const LogFn& log) {
    return itemwise_driver(params, examples, opts, "cross", log,
                           [&](const CrossExample& ex, Params<float>* g) {
                               return static_cast<double>(nn::pair_bce_loss<float>(
                                   params, {ex.pair_ids}, {ex.label}, g));
                           });
}

TrainResult train_ner(Params<float>& params, const std::vector<NerExample>& examples,
                      const FineTuneOptions& opts, const LogFn& log) {
    return itemwise_driver(params, examples, opts, "ner", log,
                           [&](const NerExample& ex, Params<float>* g) {
                               return static_cast<double>(
                                   nn::token_cls_loss<float>(params, ex.ids, ex.labels, g));
                           });
}

TrainResult train_vuln(Params<float>& params, const std::vector<VulnExample>& examples,
                       const FineTuneOptions& opts, const LogFn& log) {
    return itemwise_driver(params, examples, opts, "vuln", log,
                           [&](const VulnExample& ex, Params<float>* g) {
                               return static_cast<double>(
                                   nn::seq_cls_loss<float>(params, ex.ids, ex.label, g));
                           });
}

}  // namespace forge::train
