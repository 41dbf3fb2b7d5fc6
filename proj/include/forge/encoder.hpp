#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "forge/common.hpp"
#include "forge/ingest.hpp"
#include "forge/masking.hpp"
#include "forge/tensor.hpp"

namespace forge::nn {

struct EncoderConfig {
    int vocab_size = 0;
    int d_model = 64;
    int n_heads = 4;
    int n_layers = 2;
    int d_ff = 128;
    int max_len = 1024;
    double dropout = 0.0;
    bool tie_mlm = false;       // MLM output head shares the token embedding
    int n_token_labels = 11;    // BIO-expanded entity label count
    void validate() const;
};

template <typename T>
struct LayerParams {
    Tensor<T> wq, wk, wv, wo;              // (d, d)
    Tensor<T> bq, bk, bv, bo;              // (1, d)
    Tensor<T> ln1_g, ln1_b, ln2_g, ln2_b;  // (1, d)
    Tensor<T> w1, b1;                      // (f, d), (1, f)
    Tensor<T> w2, b2;                      // (d, f), (1, d)
};

template <typename T>
struct Params {
    EncoderConfig cfg;
    Tensor<T> tok_emb;            // (V, d)
    Tensor<T> pos_emb;            // (max_len, d)
    std::vector<LayerParams<T>> layers;
    Tensor<T> lnf_g, lnf_b;       // final layer norm
    Tensor<T> mlm_w;              // (V, d); empty when tied
    Tensor<T> mlm_b;              // (1, V)
    Tensor<T> cross_w, cross_b;   // (1, d), (1, 1)
    Tensor<T> tok_w, tok_b;       // (n_labels, d), (1, n_labels)
    Tensor<T> seq_w, seq_b;       // (2, d), (1, 2)

    static Params init(const EncoderConfig& cfg, Rng& rng);
    static Params like(const Params& other);  // zeroed, same shapes
    std::size_t num_params() const;

    template <typename F>
    void visit(F&& f) {
        f("tok_emb", tok_emb);
        f("pos_emb", pos_emb);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            std::string p = "layer" + std::to_string(l) + ".";
            auto& L = layers[l];
            f(p + "wq", L.wq); f(p + "bq", L.bq);
            f(p + "wk", L.wk); f(p + "bk", L.bk);
            f(p + "wv", L.wv); f(p + "bv", L.bv);
            f(p + "wo", L.wo); f(p + "bo", L.bo);
            f(p + "ln1_g", L.ln1_g); f(p + "ln1_b", L.ln1_b);
            f(p + "ln2_g", L.ln2_g); f(p + "ln2_b", L.ln2_b);
            f(p + "w1", L.w1); f(p + "b1", L.b1);
            f(p + "w2", L.w2); f(p + "b2", L.b2);
        }
        f("lnf_g", lnf_g); f("lnf_b", lnf_b);
        if (!cfg.tie_mlm) f("mlm_w", mlm_w);
        f("mlm_b", mlm_b);
        f("cross_w", cross_w); f("cross_b", cross_b);
        f("tok_w", tok_w); f("tok_b", tok_b);
        f("seq_w", seq_w); f("seq_b", seq_b);
    }
    template <typename F>
    void visit(F&& f) const {
        const_cast<Params<T>*>(this)->visit(
            [&](const std::string& n, Tensor<T>& t) { f(n, static_cast<const Tensor<T>&>(t)); });
    }
};

template <typename To, typename From>
Params<To> convert_params(const Params<From>& src);

// ---------------------------------------------------------------------------
// forward / backward

template <typename T>
struct LayerCache {
    Tensor<T> x_in;               // (T, d) input to the layer
    Tensor<T> n1;                 // LN1 output
    Tensor<T> ln1_xhat;           // normalized pre-scale
    std::vector<T> ln1_rstd;
    Tensor<T> q, k, v;            // (T, d)
    std::vector<Tensor<T>> probs; // per head (T, T)
    Tensor<T> ctx;                // (T, d)
    Tensor<T> x1;                 // after attention residual
    Tensor<T> n2;
    Tensor<T> ln2_xhat;
    std::vector<T> ln2_rstd;
    Tensor<T> f1;                 // pre-activation (T, f)
    Tensor<T> g;                  // gelu(f1)
    std::vector<T> drop_attn, drop_ff;  // inverted-dropout masks, empty when off
};

template <typename T>
struct SeqCache {
    std::vector<int> ids;
    std::vector<std::uint8_t> real;  // 1 for non-PAD positions
    Tensor<T> x0;
    std::vector<T> drop_emb;
    std::vector<LayerCache<T>> layers;
    Tensor<T> xf;        // input to final LN
    Tensor<T> h;         // final hidden states (T, d)
    Tensor<T> lnf_xhat;
    std::vector<T> lnf_rstd;
};

// Hidden states for a (possibly padded) sequence. PAD positions are excluded
// from attention targets; rows over real positions normalize to 1. Pass an
// rng to enable dropout (training mode).
template <typename T>
Tensor<T> forward_encode(const Params<T>& params, const std::vector<int>& ids,
                         SeqCache<T>* cache = nullptr, Rng* dropout_rng = nullptr);

template <typename T>
void backward_encode(const Params<T>& params, const SeqCache<T>& cache, const Tensor<T>& d_h,
                     Params<T>& grads);

// ---------------------------------------------------------------------------
// heads

// mean cross-entropy over labeled positions; fills grads when given
template <typename T>
T mlm_loss(const Params<T>& params, const mask::MaskedExample& ex, Params<T>* grads,
           Rng* dropout_rng = nullptr);

// logits rows for the given positions (evaluation path)
template <typename T>
Tensor<T> mlm_logits(const Params<T>& params, const std::vector<int>& input_ids,
                     const std::vector<std::size_t>& positions);

// mean-pooled, L2-normalized sequence embedding
template <typename T>
std::vector<T> embed(const Params<T>& params, const std::vector<int>& ids);

// InfoNCE over unit-vector similarities: candidates are all positives plus
// the shared negatives; query i's target is positive i. Returns gradients
// w.r.t. the embeddings themselves.
template <typename T>
T contrastive_loss_embeddings(const std::vector<std::vector<T>>& queries,
                              const std::vector<std::vector<T>>& positives,
                              const std::vector<std::vector<T>>& negatives, double tau,
                              std::vector<std::vector<T>>* d_queries = nullptr,
                              std::vector<std::vector<T>>* d_positives = nullptr,
                              std::vector<std::vector<T>>* d_negatives = nullptr);

// full bi-encoder loss: encode -> pool -> normalize -> InfoNCE; grads into params
template <typename T>
T bi_encoder_loss(const Params<T>& params, const std::vector<std::vector<int>>& query_ids,
                  const std::vector<std::vector<int>>& positive_ids,
                  const std::vector<std::vector<int>>& negative_ids, double tau,
                  Params<T>* grads, Rng* dropout_rng = nullptr);

template <typename T>
T cross_logit(const Params<T>& params, const std::vector<int>& pair_ids);

// sigmoid of the scoring vector against the first-position hidden state
template <typename T>
T cross_score(const Params<T>& params, const std::vector<int>& pair_ids);

template <typename T>
T pair_bce_loss(const Params<T>& params, const std::vector<std::vector<int>>& pair_ids,
                const std::vector<int>& labels, Params<T>* grads, Rng* dropout_rng = nullptr);

// token-wise cross entropy; labels use mask::kIgnore for skipped positions
template <typename T>
T token_cls_loss(const Params<T>& params, const std::vector<int>& ids,
                 const std::vector<int>& labels, Params<T>* grads, Rng* dropout_rng = nullptr);

template <typename T>
std::vector<int> token_cls_predict(const Params<T>& params, const std::vector<int>& ids);

template <typename T>
T seq_cls_loss(const Params<T>& params, const std::vector<int>& ids, int label, Params<T>* grads,
               Rng* dropout_rng = nullptr);

template <typename T>
int seq_cls_predict(const Params<T>& params, const std::vector<int>& ids);

// ---------------------------------------------------------------------------
// optimization

struct TrainConfig {
    int batch_size = 16;
    double learning_rate = 5e-5;
    double weight_decay = 0.01;
    int warmup_steps = 0;
    int total_steps = 0;
    double grad_clip_norm = 1.0;
    int epochs = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int patience = 3;  // early-stopping validation rounds
};

// linear warmup then linear decay; steps past total clamp to 0 (flagged)
double lr_at(std::int64_t step, const TrainConfig& cfg, bool* clamped = nullptr);

// returns the pre-clip global L2 norm; scales in place when above max_norm
template <typename T>
double clip_grad_norm(Params<T>& grads, double max_norm);

template <typename T>
struct AdamState {
    Params<T> m;
    Params<T> v;
    std::int64_t t = 0;
    static AdamState like(const Params<T>& params) {
        AdamState s;
        s.m = Params<T>::like(params);
        s.v = Params<T>::like(params);
        return s;
    }
};

template <typename T>
void adamw_step(Params<T>& params, const Params<T>& grads, AdamState<T>& state, double lr,
                double weight_decay, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// verification

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t probes = 0;
    std::string worst_tensor;
};

// central differences on randomly probed coordinates vs analytic gradients
template <typename T>
GradCheckResult finite_diff_check(Params<T> params,
                                  const std::function<T(const Params<T>&)>& loss_fn,
                                  const Params<T>& analytic, int probe_count, double eps,
                                  Rng& rng);

// ---------------------------------------------------------------------------
// checkpoints (32-bit float container regardless of compute precision)

// entity categories: Malware, Indicator, System, Organization, Vulnerability,
// BIO-expanded plus O
const std::vector<std::string>& bio_label_set();
int bio_label_id(const std::string& tag);

struct CheckpointMeta {
    EncoderConfig cfg;
    std::string vocab_hash;
    int format_version = 1;
};

void save_checkpoint(const std::string& path, const Params<float>& params,
                     const std::string& vocab_hash);
Params<float> load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

#include "forge/encoder_impl.tcc"

}  // namespace forge::nn
