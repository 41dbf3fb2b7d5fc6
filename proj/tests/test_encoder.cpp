#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "forge/encoder.hpp"

using namespace forge;
using namespace forge::nn;
using ingest::Tokenizer;

namespace {

EncoderConfig tiny_cfg(int vocab = 50, bool tie = false, int n_labels = 6) {
    EncoderConfig c;
    c.vocab_size = vocab;
    c.d_model = 16;
    c.n_heads = 2;
    c.n_layers = 1;
    c.d_ff = 32;
    c.max_len = 32;
    c.tie_mlm = tie;
    c.n_token_labels = n_labels;
    return c;
}

std::vector<int> random_ids(Rng& rng, int len, int vocab) {
    std::vector<int> ids;
    ids.push_back(Tokenizer::CLS);
    for (int i = 0; i < len; ++i)
        ids.push_back(Tokenizer::num_specials +
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab - 5))));
    ids.push_back(Tokenizer::SEP);
    return ids;
}

template <typename T>
void zero_head(Tensor<T>& w, Tensor<T>& b) {
    w.zero();
    b.zero();
}

}  // namespace

TEST_CASE("encoder config validation") {
    EncoderConfig c = tiny_cfg();
    c.validate();
    c.d_model = 15;  // not divisible by heads
    CHECK_THROWS_AS(c.validate(), ForgeError);
    c = tiny_cfg();
    c.vocab_size = 4;
    CHECK_THROWS_AS(c.validate(), ForgeError);
}

TEST_CASE("forward shape, attention normalization, determinism") {
    Rng rng = derive_rng(1, "init");
    Params<double> p = Params<double>::init(tiny_cfg(), rng);
    Rng data_rng(3);
    std::vector<int> ids = random_ids(data_rng, 9, 50);
    ids.push_back(Tokenizer::PAD);
    ids.push_back(Tokenizer::PAD);

    SeqCache<double> cache;
    Tensor<double> h = forward_encode(p, ids, &cache);
    CHECK(h.rows == static_cast<int>(ids.size()));
    CHECK(h.cols == 16);

    // attention rows over real targets sum to 1; PAD columns carry zero mass
    for (const auto& P : cache.layers[0].probs) {
        for (int t = 0; t < P.rows; ++t) {
            double sum = 0;
            for (int u = 0; u < P.cols; ++u) {
                if (!cache.real[static_cast<std::size_t>(u)]) CHECK(P.at(t, u) == 0.0);
                sum += P.at(t, u);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        }
    }

    Tensor<double> h2 = forward_encode(p, ids);
    for (std::size_t i = 0; i < h.a.size(); ++i) CHECK(h.a[i] == h2.a[i]);

    // a PAD-only tail does not perturb non-PAD outputs
    std::vector<int> no_pad(ids.begin(), ids.end() - 2);
    Tensor<double> h3 = forward_encode(p, no_pad);
    for (int t = 0; t < h3.rows; ++t)
        for (int j = 0; j < h3.cols; ++j) CHECK(h3.at(t, j) == h.at(t, j));

    // shape errors
    std::vector<int> too_long(40, Tokenizer::UNK);
    CHECK_THROWS(static_cast<void>(forward_encode(p, too_long)));
    CHECK_THROWS(static_cast<void>(forward_encode(p, std::vector<int>{})));
    CHECK_THROWS(static_cast<void>(
        forward_encode(p, std::vector<int>{Tokenizer::PAD, Tokenizer::PAD})));
}

TEST_CASE("loss floors: uniform logits give ln(class count)") {
    Rng rng = derive_rng(2, "init");
    Params<double> p = Params<double>::init(tiny_cfg(50, false, 6), rng);
    Rng data_rng(5);
    std::vector<int> ids = random_ids(data_rng, 8, 50);

    zero_head(p.mlm_w, p.mlm_b);
    mask::MaskedExample ex;
    ex.input_ids = ids;
    ex.labels.assign(ids.size(), mask::kIgnore);
    ex.labels[2] = ids[2];
    ex.labels[4] = ids[4];
    ex.input_ids[2] = Tokenizer::MASK;
    ex.input_ids[4] = Tokenizer::MASK;
    CHECK(mlm_loss<double>(p, ex, nullptr) ==
          doctest::Approx(std::log(50.0)).epsilon(1e-9));

    zero_head(p.tok_w, p.tok_b);
    std::vector<int> labels(ids.size(), mask::kIgnore);
    labels[1] = 3;
    labels[2] = 0;
    CHECK(token_cls_loss<double>(p, ids, labels, nullptr) ==
          doctest::Approx(std::log(6.0)).epsilon(1e-9));

    zero_head(p.cross_w, p.cross_b);
    CHECK(pair_bce_loss<double>(p, {ids}, {1}, nullptr) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(cross_score(p, ids) == 0.5);  // zero scoring vector -> exactly 0.5

    zero_head(p.seq_w, p.seq_b);
    CHECK(seq_cls_loss<double>(p, ids, 0, nullptr) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("hand-computed loss values via forced logits") {
    Rng rng = derive_rng(3, "init");
    Params<double> p = Params<double>::init(tiny_cfg(8), rng);
    Rng data_rng(7);
    std::vector<int> ids = random_ids(data_rng, 4, 8);

    // mlm: logits equal mlm_b when mlm_w = 0; 3 live entries, rest strongly negative
    p.mlm_w.zero();
    p.mlm_b.fill(-1e9f);
    p.mlm_b.a[5] = 0.5;
    p.mlm_b.a[6] = -0.2;
    p.mlm_b.a[7] = 1.1;
    mask::MaskedExample ex;
    ex.input_ids = ids;
    ex.labels.assign(ids.size(), mask::kIgnore);
    ex.labels[1] = 6;  // gold is the -0.2 entry
    ex.input_ids[1] = Tokenizer::MASK;
    double z5 = 0.5, z6 = -0.2, z7 = 1.1;
    double lse = std::log(std::exp(z5) + std::exp(z6) + std::exp(z7));
    CHECK(mlm_loss<double>(p, ex, nullptr) == doctest::Approx(lse - z6).epsilon(1e-9));

    // confident one-hot logits drive the loss to ~0
    p.mlm_b.a[6] = 40.0;
    CHECK(mlm_loss<double>(p, ex, nullptr) < 1e-10);

    // seq head with logits (1, -1), label 0 -> ln(1 + e^-2)
    p.seq_w.zero();
    p.seq_b.a[0] = 1.0;
    p.seq_b.a[1] = -1.0;
    CHECK(seq_cls_loss<double>(p, ids, 0, nullptr) ==
          doctest::Approx(std::log(1.0 + std::exp(-2.0))).epsilon(1e-9));

    // token head, two positions with different golds -> mean of the two CEs
    p.tok_w.zero();
    p.tok_b.fill(-1e9f);
    p.tok_b.a[0] = 0.3;
    p.tok_b.a[1] = -0.6;
    p.tok_b.a[2] = 0.9;
    std::vector<int> labels(ids.size(), mask::kIgnore);
    labels[1] = 0;
    labels[2] = 2;
    double lse3 = std::log(std::exp(0.3) + std::exp(-0.6) + std::exp(0.9));
    double expected = ((lse3 - 0.3) + (lse3 - 0.9)) / 2.0;
    CHECK(token_cls_loss<double>(p, ids, labels, nullptr) ==
          doctest::Approx(expected).epsilon(1e-9));

    // pair bce vs its own logit: loss(label=1) = ln(1 + e^-z)
    Rng rng2 = derive_rng(4, "init2");
    Params<double> q = Params<double>::init(tiny_cfg(8), rng2);
    double z = cross_logit(q, ids);
    CHECK(pair_bce_loss<double>(q, {ids}, {1}, nullptr) ==
          doctest::Approx(std::log1p(std::exp(-z))).epsilon(1e-9));
    CHECK(cross_score(q, ids) == doctest::Approx(1.0 / (1.0 + std::exp(-z))));
    CHECK(cross_score(q, ids) > 0.0);
    CHECK(cross_score(q, ids) < 1.0);
}

TEST_CASE("contrastive loss hand values and gradients on raw embeddings") {
    // q·d+ = 0.9, q·d- = 0.1, tau = 1 -> ln(1 + e^-0.8)
    std::vector<double> qv = {1.0, 0.0};
    std::vector<double> pv = {0.9, std::sqrt(1.0 - 0.81)};
    std::vector<double> nv = {0.1, std::sqrt(1.0 - 0.01)};
    double loss = contrastive_loss_embeddings<double>({qv}, {pv}, {nv}, 1.0);
    CHECK(loss == doctest::Approx(std::log(1.0 + std::exp(-0.8))).epsilon(1e-9));

    // all-equal similarities over N candidates -> ln N
    std::vector<std::vector<double>> qs = {{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}};
    double l2 = contrastive_loss_embeddings<double>(qs, qs, {}, 0.7);
    CHECK(l2 == doctest::Approx(std::log(3.0)).epsilon(1e-9));

    // positive similarity >> negatives drives the loss to ~0
    std::vector<double> far = {-1.0, 0.0};
    double l3 = contrastive_loss_embeddings<double>({qv}, {qv}, {far}, 0.05);
    CHECK(l3 < 1e-10);

    CHECK_THROWS_AS(static_cast<void>(
                        contrastive_loss_embeddings<double>({qv}, {pv}, {nv}, 0.0)),
                    ForgeError);

    // finite-difference check on the embedding-level gradients
    std::vector<std::vector<double>> Q = {{0.3, -0.8}, {0.6, 0.5}};
    std::vector<std::vector<double>> P = {{0.9, 0.1}, {-0.4, 0.8}};
    std::vector<std::vector<double>> N = {{0.2, 0.7}};
    std::vector<std::vector<double>> dQ, dP, dN;
    contrastive_loss_embeddings<double>(Q, P, N, 0.5, &dQ, &dP, &dN);
    const double eps = 1e-6;
    auto numeric = [&](std::vector<std::vector<double>>& mat, std::size_t i, std::size_t k) {
        mat[i][k] += eps;
        double lp = contrastive_loss_embeddings<double>(Q, P, N, 0.5);
        mat[i][k] -= 2 * eps;
        double lm = contrastive_loss_embeddings<double>(Q, P, N, 0.5);
        mat[i][k] += eps;
        return (lp - lm) / (2 * eps);
    };
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(numeric(Q, i, k) == doctest::Approx(dQ[i][k]).epsilon(1e-5));
            CHECK(numeric(P, i, k) == doctest::Approx(dP[i][k]).epsilon(1e-5));
        }
    CHECK(numeric(N, 0, 0) == doctest::Approx(dN[0][0]).epsilon(1e-5));
}

TEST_CASE("embed is unit-norm and deterministic") {
    Rng rng = derive_rng(5, "init");
    Params<double> p = Params<double>::init(tiny_cfg(), rng);
    Rng data_rng(11);
    std::vector<int> ids = random_ids(data_rng, 7, 50);
    auto e1 = embed(p, ids);
    auto e2 = embed(p, ids);
    CHECK(e1 == e2);
    double norm = 0, cos = 0;
    for (std::size_t j = 0; j < e1.size(); ++j) {
        norm += e1[j] * e1[j];
        cos += e1[j] * e2[j];
    }
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(cos == doctest::Approx(1.0).epsilon(1e-9));
    // PAD-only input is an embedding error
    CHECK_THROWS(static_cast<void>(embed(p, std::vector<int>{0, 0, 0})));
}

// -------------------------------------------------------------------------
// gradient checks: all five heads on the d=16, L=1, H=2 config

namespace {

struct HeadCheck {
    const char* name;
    std::function<double(const Params<double>&, Params<double>*)> run;
};

GradCheckResult check_head(const HeadCheck& head, Params<double> params, int probes,
                           std::uint64_t seed) {
    Params<double> grads = Params<double>::like(params);
    head.run(params, &grads);
    Rng rng = derive_rng(seed, "gradcheck");
    return finite_diff_check<double>(
        params, [&](const Params<double>& p) { return head.run(p, nullptr); }, grads, probes,
        1e-5, rng);
}

}  // namespace

TEST_CASE("gradient correctness for every loss head (double precision)") {
    Rng rng = derive_rng(6, "init");
    Params<double> params = Params<double>::init(tiny_cfg(50, false, 6), rng);
    Rng data_rng(13);

    mask::MaskedExample ex;
    ex.input_ids = random_ids(data_rng, 10, 50);
    ex.labels.assign(ex.input_ids.size(), mask::kIgnore);
    for (std::size_t pos : {2u, 5u, 7u}) {
        ex.labels[pos] = ex.input_ids[pos];
        ex.input_ids[pos] = Tokenizer::MASK;
    }
    ex.input_ids[5] = 9;  // a random-replacement slot

    std::vector<std::vector<int>> queries = {random_ids(data_rng, 5, 50),
                                             random_ids(data_rng, 6, 50)};
    std::vector<std::vector<int>> positives = {random_ids(data_rng, 6, 50),
                                               random_ids(data_rng, 4, 50)};
    std::vector<std::vector<int>> negatives = {random_ids(data_rng, 5, 50)};

    std::vector<std::vector<int>> pairs = {random_ids(data_rng, 8, 50),
                                           random_ids(data_rng, 9, 50)};
    std::vector<int> pair_labels = {1, 0};

    std::vector<int> ner_ids = random_ids(data_rng, 9, 50);
    std::vector<int> ner_labels(ner_ids.size(), mask::kIgnore);
    ner_labels[1] = 0;
    ner_labels[3] = 4;
    ner_labels[6] = 2;

    std::vector<int> vuln_ids = random_ids(data_rng, 8, 50);

    std::vector<HeadCheck> heads = {
        {"mlm",
         [&](const Params<double>& p, Params<double>* g) { return mlm_loss(p, ex, g); }},
        {"bi",
         [&](const Params<double>& p, Params<double>* g) {
             return bi_encoder_loss(p, queries, positives, negatives, 0.5, g);
         }},
        {"cross",
         [&](const Params<double>& p, Params<double>* g) {
             return pair_bce_loss(p, pairs, pair_labels, g);
         }},
        {"ner",
         [&](const Params<double>& p, Params<double>* g) {
             return token_cls_loss(p, ner_ids, ner_labels, g);
         }},
        {"vuln",
         [&](const Params<double>& p, Params<double>* g) {
             return seq_cls_loss(p, vuln_ids, 1, g);
         }},
    };

    for (std::size_t i = 0; i < heads.size(); ++i) {
        GradCheckResult res = check_head(heads[i], params, 60, 100 + i);
        INFO("head: " << heads[i].name << " worst tensor: " << res.worst_tensor);
        CHECK(res.max_rel_error < 1e-4);
    }
}

TEST_CASE("gradient check covers the tied-embedding MLM head") {
    Rng rng = derive_rng(7, "init");
    Params<double> params = Params<double>::init(tiny_cfg(40, true), rng);
    Rng data_rng(17);
    mask::MaskedExample ex;
    ex.input_ids = random_ids(data_rng, 8, 40);
    ex.labels.assign(ex.input_ids.size(), mask::kIgnore);
    ex.labels[3] = ex.input_ids[3];
    ex.input_ids[3] = Tokenizer::MASK;

    Params<double> grads = Params<double>::like(params);
    mlm_loss(params, ex, &grads);
    Rng probe_rng = derive_rng(18, "gradcheck");
    GradCheckResult res = finite_diff_check<double>(
        params, [&](const Params<double>& p) { return mlm_loss<double>(p, ex, nullptr); },
        grads, 60, 1e-5, probe_rng);
    CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("corrupted gradient fails the finite-difference check (negative control)") {
    Rng rng = derive_rng(8, "init");
    Params<double> params = Params<double>::init(tiny_cfg(), rng);
    Rng data_rng(19);
    std::vector<int> ids = random_ids(data_rng, 8, 50);

    Params<double> grads = Params<double>::like(params);
    seq_cls_loss(params, ids, 0, &grads);
    // double the largest-magnitude coordinate
    double best = 0;
    Tensor<double>* best_t = nullptr;
    std::size_t best_i = 0;
    grads.visit([&](const std::string&, Tensor<double>& t) {
        for (std::size_t i = 0; i < t.a.size(); ++i)
            if (std::abs(t.a[i]) > best) {
                best = std::abs(t.a[i]);
                best_t = &t;
                best_i = i;
            }
    });
    REQUIRE(best_t != nullptr);
    best_t->a[best_i] *= 2.0;

    // probe exhaustively enough to hit the corrupted coordinate
    Rng probe_rng = derive_rng(20, "gradcheck");
    GradCheckResult res = finite_diff_check<double>(
        params,
        [&](const Params<double>& p) { return seq_cls_loss<double>(p, ids, 0, nullptr); },
        grads, 60, 1e-5, probe_rng);
    CHECK(res.max_rel_error > 1e-4);
}

TEST_CASE("lr schedule: warmup then linear decay") {
    TrainConfig cfg;
    cfg.learning_rate = 5e-5;
    cfg.warmup_steps = 10;
    cfg.total_steps = 100;
    CHECK(lr_at(0, cfg) == 0.0);
    CHECK(lr_at(10, cfg) == doctest::Approx(5e-5));
    CHECK(lr_at(55, cfg) == doctest::Approx(2.5e-5));
    CHECK(lr_at(100, cfg) == doctest::Approx(0.0));
    bool clamped = false;
    CHECK(lr_at(101, cfg, &clamped) == 0.0);
    CHECK(clamped);
    // peak equals the configured base; schedule is piecewise linear
    double peak = 0;
    for (int s = 0; s <= 100; ++s) peak = std::max(peak, lr_at(s, cfg));
    CHECK(peak == doctest::Approx(5e-5));
    // continuity probes at the knee
    CHECK(lr_at(9, cfg) == doctest::Approx(4.5e-5));
    CHECK(lr_at(11, cfg) == doctest::Approx(5e-5 * 89.0 / 90.0));
}

TEST_CASE("clip_grad_norm scales only above the threshold") {
    Rng rng = derive_rng(9, "init");
    Params<double> g = Params<double>::like(Params<double>::init(tiny_cfg(), rng));
    // single nonzero gradient of 2.0 -> scaled to 1.0
    g.seq_b.a[0] = 2.0;
    double norm = clip_grad_norm(g, 1.0);
    CHECK(norm == doctest::Approx(2.0));
    CHECK(g.seq_b.a[0] == doctest::Approx(1.0));

    // below the threshold: unchanged
    g.seq_b.a[0] = 0.5;
    norm = clip_grad_norm(g, 1.0);
    CHECK(norm == doctest::Approx(0.5));
    CHECK(g.seq_b.a[0] == 0.5);

    // never increases magnitudes; post-clip norm <= max + 1e-9
    Rng rg(21);
    Params<double> big = Params<double>::like(g);
    big.visit([&](const std::string&, Tensor<double>& t) {
        for (double& v : t.a) v = rg.normal();
    });
    Params<double> before = big;
    clip_grad_norm(big, 1.0);
    double post = 0;
    std::vector<const Tensor<double>*> bt, at;
    before.visit([&](const std::string&, const Tensor<double>& t) { bt.push_back(&t); });
    big.visit([&](const std::string&, const Tensor<double>& t) { at.push_back(&t); });
    for (std::size_t i = 0; i < bt.size(); ++i)
        for (std::size_t k = 0; k < bt[i]->a.size(); ++k) {
            CHECK(std::abs(at[i]->a[k]) <= std::abs(bt[i]->a[k]) + 1e-15);
            post += at[i]->a[k] * at[i]->a[k];
        }
    CHECK(std::sqrt(post) <= 1.0 + 1e-9);

    g.seq_b.a[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(static_cast<void>(clip_grad_norm(g, 1.0)), ForgeError);
}

TEST_CASE("adamw single-step closed forms") {
    Rng rng = derive_rng(10, "init");
    Params<double> p = Params<double>::init(tiny_cfg(), rng);
    TrainConfig cfg;

    // zero gradient, zero weight decay -> unchanged
    Params<double> zero_g = Params<double>::like(p);
    AdamState<double> st = AdamState<double>::like(p);
    Params<double> before = p;
    adamw_step(p, zero_g, st, 0.1, 0.0, cfg);
    CHECK(p.seq_w.a[0] == before.seq_w.a[0]);
    CHECK(p.tok_emb.a[5] == before.tok_emb.a[5]);

    // p=0, g=1, lr=0.1, wd=0, first step -> p ≈ -0.1
    p.seq_b.a[0] = 0.0;
    Params<double> g1 = Params<double>::like(p);
    g1.seq_b.a[0] = 1.0;
    AdamState<double> st2 = AdamState<double>::like(p);
    adamw_step(p, g1, st2, 0.1, 0.0, cfg);
    CHECK(p.seq_b.a[0] == doctest::Approx(-0.1).epsilon(1e-6));

    // decoupled decay: zero gradient shrinks p by (1 - lr*wd)
    double v0 = 0.8;
    p.seq_b.a[1] = v0;
    Params<double> zg = Params<double>::like(p);
    AdamState<double> st3 = AdamState<double>::like(p);
    adamw_step(p, zg, st3, 0.1, 0.01, cfg);
    CHECK(p.seq_b.a[1] == doctest::Approx(v0 * (1.0 - 0.1 * 0.01)).epsilon(1e-12));
}

TEST_CASE("checkpoint container round-trips bit-exactly") {
    Rng rng = derive_rng(11, "init");
    EncoderConfig cfg = tiny_cfg(60);
    cfg.n_token_labels = 11;
    Params<float> p = Params<float>::init(cfg, rng);
    std::string path = "test_ckpt_tmp.bin";
    save_checkpoint(path, p, "abc123");

    CheckpointMeta meta;
    Params<float> q = load_checkpoint(path, &meta);
    CHECK(meta.vocab_hash == "abc123");
    CHECK(meta.cfg.vocab_size == 60);
    CHECK(meta.cfg.n_token_labels == 11);

    std::vector<const Tensor<float>*> pt, qt;
    p.visit([&](const std::string&, const Tensor<float>& t) { pt.push_back(&t); });
    q.visit([&](const std::string&, const Tensor<float>& t) { qt.push_back(&t); });
    REQUIRE(pt.size() == qt.size());
    for (std::size_t i = 0; i < pt.size(); ++i) {
        REQUIRE(pt[i]->a.size() == qt[i]->a.size());
        for (std::size_t k = 0; k < pt[i]->a.size(); ++k) CHECK(pt[i]->a[k] == qt[i]->a[k]);
    }
    std::remove(path.c_str());
}

TEST_CASE("float/double parameter conversion preserves structure") {
    Rng rng = derive_rng(12, "init");
    Params<float> pf = Params<float>::init(tiny_cfg(), rng);
    Params<double> pd = convert_params<double>(pf);
    CHECK(pd.num_params() == pf.num_params());
    CHECK(pd.tok_emb.a[7] == doctest::Approx(static_cast<double>(pf.tok_emb.a[7])));
    Params<float> back = convert_params<float>(pd);
    CHECK(back.layers[0].wq.a[3] == pf.layers[0].wq.a[3]);
}

TEST_CASE("dropout is seeded, applied in training mode only") {
    Rng rng = derive_rng(13, "init");
    EncoderConfig cfg = tiny_cfg();
    cfg.dropout = 0.5;
    Params<double> p = Params<double>::init(cfg, rng);
    Rng data_rng(23);
    std::vector<int> ids = random_ids(data_rng, 6, 50);

    // eval mode (no rng): deterministic, no dropout
    Tensor<double> h1 = forward_encode(p, ids);
    Tensor<double> h2 = forward_encode(p, ids);
    for (std::size_t i = 0; i < h1.a.size(); ++i) CHECK(h1.a[i] == h2.a[i]);

    // training mode: same seed -> same output; different draw -> different
    Rng d1 = derive_rng(1, "drop");
    Rng d2 = derive_rng(1, "drop");
    Tensor<double> t1 = forward_encode<double>(p, ids, nullptr, &d1);
    Tensor<double> t2 = forward_encode<double>(p, ids, nullptr, &d2);
    for (std::size_t i = 0; i < t1.a.size(); ++i) CHECK(t1.a[i] == t2.a[i]);
    Tensor<double> t3 = forward_encode<double>(p, ids, nullptr, &d1);
    bool any_diff = false;
    for (std::size_t i = 0; i < t1.a.size(); ++i) any_diff |= t1.a[i] != t3.a[i];
    CHECK(any_diff);
}
