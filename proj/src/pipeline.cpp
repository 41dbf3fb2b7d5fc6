#include "forge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "forge/corpus.hpp"
#include "forge/dedup.hpp"
#include "forge/filterbal.hpp"
#include "forge/masking.hpp"
#include "forge/metrics.hpp"
#include "forge/retrieval.hpp"
#include "forge/sha256.hpp"
#include "forge/synth.hpp"
#include "forge/train.hpp"
#include "forge/util.hpp"

namespace forge::pipeline {

using config::RunConfig;
using corpus::Document;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// run manifests: provenance chain per command

class Manifest {
  public:
    Manifest(const RunConfig& cfg, std::string command)
        : command_(std::move(command)),
          config_hash_(cfg.hash()),
          seed_(cfg.get_int("seed")),
          start_(std::chrono::steady_clock::now()) {}

    void input(const std::string& name, const std::string& path) {
        if (!path.empty()) inputs_.push_back({name, path});
    }
    void output(const std::string& name, const std::string& path) {
        if (!path.empty()) outputs_.push_back({name, path});
    }

    void write(const std::string& primary_output) const {
        json j;
        j["command"] = command_;
        j["version"] = kVersion;
        j["config_hash"] = config_hash_;
        j["seed"] = seed_;
        json in = json::object(), out = json::object();
        for (const auto& [name, path] : inputs_)
            in[name] = {{"path", path}, {"sha256", sha256_file_hex(path)}};
        for (const auto& [name, path] : outputs_)
            out[name] = {{"path", path}, {"sha256", sha256_file_hex(path)}};
        j["inputs"] = in;
        j["outputs"] = out;
        j["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_file(primary_output + ".run.json", j.dump(2) + "\n");
    }

  private:
    std::string command_;
    std::string config_hash_;
    std::int64_t seed_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::pair<std::string, std::string>> outputs_;
};

std::string require_path(const RunConfig& cfg, const std::string& key) {
    const std::string& v = cfg.get_string(key);
    if (v.empty()) throw_config("required config key is empty: " + key);
    return v;
}

ingest::Casing casing_of(const RunConfig& cfg) {
    const std::string& c = cfg.get_string("ingest.casing");
    if (c == "lowercase") return ingest::Casing::lowercase;
    if (c == "preserve") return ingest::Casing::preserve;
    throw_config("ingest.casing must be lowercase or preserve");
}

corpus::Tier synthetic_tier_of(const RunConfig& cfg) {
    const std::string& t = cfg.get_string("ingest.synthetic_tier");
    if (t == "high") return corpus::Tier::high;
    if (t == "medium") return corpus::Tier::medium;
    if (t == "low") return corpus::Tier::low;
    throw_config("ingest.synthetic_tier must be high/medium/low");
}

// stage-counter chaining: each corpus-writing stage appends its counters to
// the chain carried alongside the corpus file
std::map<std::string, corpus::StageCounter> load_stage_chain(const std::string& corpus_path) {
    std::map<std::string, corpus::StageCounter> chain;
    std::string path = corpus_path + ".stages.json";
    if (!file_exists(path)) return chain;
    json j = json::parse(read_file(path));
    for (auto it = j.begin(); it != j.end(); ++it) {
        corpus::StageCounter sc;
        sc.documents_in = it.value().at("documents_in").get<std::int64_t>();
        sc.documents_out = it.value().at("documents_out").get<std::int64_t>();
        sc.documents_dropped = it.value().at("documents_dropped").get<std::int64_t>();
        chain[it.key()] = sc;
    }
    return chain;
}

void save_stage_chain(const std::string& corpus_path,
                      const std::map<std::string, corpus::StageCounter>& chain) {
    json j = json::object();
    for (const auto& [name, sc] : chain)
        j[name] = {{"documents_in", sc.documents_in},
                   {"documents_out", sc.documents_out},
                   {"documents_dropped", sc.documents_dropped}};
    write_file(corpus_path + ".stages.json", j.dump(2) + "\n");
}

int workers_of(const RunConfig& cfg) {
    return static_cast<int>(cfg.get_int("workers"));
}

// ---------------------------------------------------------------------------
// commands

void cmd_synth(const RunConfig& cfg, const LogFn& log) {
    std::string out_dir = require_path(cfg, "synth.out");
    synth::SynthSpec spec;
    spec.docs_per_category = {
        {corpus::Category::seed, (int)cfg.get_int("synth.docs_seed")},
        {corpus::Category::web, (int)cfg.get_int("synth.docs_web")},
        {corpus::Category::reasoning, (int)cfg.get_int("synth.docs_reasoning")},
        {corpus::Category::instruction, (int)cfg.get_int("synth.docs_instruction")},
        {corpus::Category::code_vuln, (int)cfg.get_int("synth.docs_code_vuln")},
        {corpus::Category::dialogue, (int)cfg.get_int("synth.docs_dialogue")},
        {corpus::Category::baseline, (int)cfg.get_int("synth.docs_baseline")},
        {corpus::Category::synthetic, (int)cfg.get_int("synth.docs_synthetic")},
    };
    spec.dup_rate = cfg.get_number("synth.dup_rate");
    spec.rel_pairs = (int)cfg.get_int("synth.rel_pairs");
    spec.eval_queries = (int)cfg.get_int("synth.eval_queries");
    spec.distractor_docs = (int)cfg.get_int("synth.distractors");
    spec.adversarial_train = (int)cfg.get_int("synth.adv_train");
    spec.adversarial_eval = (int)cfg.get_int("synth.adv_eval");
    spec.ner_train = (int)cfg.get_int("synth.ner_train");
    spec.ner_test = (int)cfg.get_int("synth.ner_test");
    spec.vuln_train = (int)cfg.get_int("synth.vuln_train");
    spec.vuln_test = (int)cfg.get_int("synth.vuln_test");
    spec.eval_nouns = cfg.get_int("synth.eval_nouns");
    spec.eval_verbs = cfg.get_int("synth.eval_verbs");
    spec.eval_code = cfg.get_int("synth.eval_code");
    spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));

    Manifest manifest(cfg, "synth");
    synth::SynthResult result = synth::generate_synthetic(spec);
    synth::write_synthetic(out_dir, result);
    if (log) log("synth", 0, "documents", static_cast<double>(result.raw_docs.size()));
    for (const char* f : {"raw.jsonl", "split.json", "eval_records.jsonl", "qrels.jsonl",
                          "retrieval_docs.jsonl", "ner_train.jsonl", "vuln_train.jsonl"})
        manifest.output(f, out_dir + "/" + f);
    manifest.write(out_dir + "/synth");
}

void cmd_ingest(const RunConfig& cfg, const LogFn& log) {
    std::string in = require_path(cfg, "ingest.in");
    std::string out = require_path(cfg, "ingest.out");
    std::string vocab_path = require_path(cfg, "ingest.vocab");
    ingest::Casing casing = casing_of(cfg);

    Manifest manifest(cfg, "ingest");
    manifest.input("raw", in);

    std::vector<Document> docs = corpus::load_corpus(in);
    std::vector<uni::NormalizeReport> reports(docs.size());
    parallel_for(docs.size(), workers_of(cfg), [&](std::size_t i) {
        docs[i].content = ingest::normalize_document(docs[i].content, docs[i].modality,
                                                     &reports[i]);
    });

    ingest::Tokenizer tk = ingest::build_vocab(docs, (int)cfg.get_int("ingest.min_count"),
                                               (int)cfg.get_int("ingest.max_vocab"), casing);
    parallel_for(docs.size(), workers_of(cfg), [&](std::size_t i) {
        docs[i].token_count = static_cast<std::int64_t>(
            ingest::tokenize(docs[i].content, docs[i].modality, casing).size());
    });

    corpus::save_corpus(out, docs);
    ingest::save_vocab(vocab_path, tk);

    auto chain = load_stage_chain(in);
    corpus::StageCounter sc;
    sc.documents_in = static_cast<std::int64_t>(docs.size());
    sc.documents_out = sc.documents_in;
    chain["ingest"] = sc;
    save_stage_chain(out, chain);

    uni::NormalizeReport total;
    for (const auto& r : reports) {
        total.invalid_bytes_replaced += r.invalid_bytes_replaced;
        total.controls_stripped += r.controls_stripped;
        total.whitespace_runs_collapsed += r.whitespace_runs_collapsed;
    }
    const std::string& report_path = cfg.get_string("ingest.report");
    if (!report_path.empty()) {
        json j = {{"documents", docs.size()},
                  {"vocab_size", tk.size()},
                  {"invalid_bytes_replaced", total.invalid_bytes_replaced},
                  {"controls_stripped", total.controls_stripped},
                  {"whitespace_runs_collapsed", total.whitespace_runs_collapsed}};
        write_file(report_path, j.dump(2) + "\n");
        manifest.output("report", report_path);
    }
    if (log) log("ingest", 0, "vocab_size", tk.size());
    manifest.output("corpus", out);
    manifest.output("vocab", vocab_path);
    manifest.write(out);
}

void cmd_dedup(const RunConfig& cfg, const LogFn& log) {
    std::string in = require_path(cfg, "dedup.in");
    std::string out = require_path(cfg, "dedup.out");
    std::string report_path = require_path(cfg, "dedup.report");

    Manifest manifest(cfg, "dedup");
    manifest.input("corpus", in);

    dedup::DedupConfig dc;
    dc.perms = (int)cfg.get_int("dedup.perms");
    dc.bands = (int)cfg.get_int("dedup.bands");
    dc.rows = (int)cfg.get_int("dedup.rows");
    dc.candidate_threshold = cfg.get_number("dedup.cand");
    dc.confirm_threshold = cfg.get_number("dedup.confirm");
    dc.k_text = (int)cfg.get_int("dedup.k_text");
    dc.k_code = (int)cfg.get_int("dedup.k_code");
    dc.char_prefix = static_cast<std::size_t>(cfg.get_int("dedup.char_prefix"));
    dc.keep_unshingleable = cfg.get_bool("dedup.keep_unshingleable");
    dc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    dc.workers = workers_of(cfg);

    std::vector<Document> docs = corpus::load_corpus(in);
    auto [kept, report] = dedup::dedup_corpus(docs, dc);
    corpus::save_corpus(out, kept);
    dedup::save_drop_report(report_path, report);

    auto chain = load_stage_chain(in);
    corpus::StageCounter sc;
    sc.documents_in = static_cast<std::int64_t>(docs.size());
    sc.documents_out = static_cast<std::int64_t>(kept.size());
    sc.documents_dropped = sc.documents_in - sc.documents_out;
    chain["dedup"] = sc;
    save_stage_chain(out, chain);

    if (log) log("dedup", 0, "dropped", static_cast<double>(report.drops.size()));
    manifest.output("corpus", out);
    manifest.output("report", report_path);
    manifest.write(out);
}

void cmd_filter(const RunConfig& cfg, const LogFn& log) {
    std::string in = require_path(cfg, "filter.in");
    std::string out = require_path(cfg, "filter.out");
    std::string report_path = require_path(cfg, "filter.report");
    std::string lexicon_path = require_path(cfg, "filter.lexicon");
    std::string labels_path = require_path(cfg, "filter.seed_labels");

    Manifest manifest(cfg, "filter");
    manifest.input("corpus", in);
    manifest.input("lexicon", lexicon_path);
    manifest.input("seed_labels", labels_path);

    filterbal::KeywordLexicon lexicon =
        filterbal::load_lexicon(lexicon_path, (int)cfg.get_int("filter.min_hits"));
    filterbal::RelevanceClassifier clf = filterbal::train_classifier(
        filterbal::load_labeled_docs(labels_path), cfg.get_number("filter.alpha"));

    std::vector<Document> docs = corpus::load_corpus(in);
    auto [kept, report] = filterbal::filter_corpus(docs, lexicon, clf,
                                                   cfg.get_number("filter.tau"));
    corpus::save_corpus(out, kept);
    filterbal::save_filter_report(report_path, report);

    auto chain = load_stage_chain(in);
    corpus::StageCounter sc;
    sc.documents_in = static_cast<std::int64_t>(docs.size());
    sc.documents_out = static_cast<std::int64_t>(kept.size());
    sc.documents_dropped = sc.documents_in - sc.documents_out;
    chain["filter"] = sc;
    save_stage_chain(out, chain);

    if (log) log("filter", 0, "dropped", static_cast<double>(report.drops.size()));
    manifest.output("corpus", out);
    manifest.output("report", report_path);
    manifest.write(out);
}

void cmd_stats(const RunConfig& cfg, const LogFn& log) {
    std::string in = require_path(cfg, "stats.in");
    Manifest manifest(cfg, "stats");
    manifest.input("corpus", in);

    std::vector<Document> docs = corpus::load_corpus(in);
    for (Document& d : docs) {
        if (!d.token_count.has_value())
            d.token_count = static_cast<std::int64_t>(
                ingest::tokenize(d.content, d.modality, ingest::Casing::lowercase).size());
    }
    corpus::CorpusManifest m = corpus::build_manifest(docs);
    m.stage_counters = load_stage_chain(in);
    std::string text = corpus::manifest_to_json(m);
    const std::string& out = cfg.get_string("stats.out");
    if (!out.empty()) {
        write_file(out, text);
        manifest.output("manifest", out);
        manifest.write(out);
    }
    if (log) log("stats", 0, "documents", static_cast<double>(docs.size()));
}

nn::EncoderConfig encoder_config_from(const RunConfig& cfg, int vocab_size) {
    nn::EncoderConfig ec;
    ec.vocab_size = vocab_size;
    ec.d_model = (int)cfg.get_int("train.mlm.d");
    ec.n_heads = (int)cfg.get_int("train.mlm.heads");
    ec.n_layers = (int)cfg.get_int("train.mlm.layers");
    ec.d_ff = (int)cfg.get_int("train.mlm.ff");
    ec.max_len = (int)cfg.get_int("train.mlm.max_len");
    ec.dropout = cfg.get_number("train.mlm.dropout");
    ec.tie_mlm = cfg.get_bool("train.mlm.tie_mlm");
    ec.n_token_labels = static_cast<int>(nn::bio_label_set().size());
    return ec;
}

nn::TrainConfig train_config_from(const RunConfig& cfg, const std::string& section) {
    nn::TrainConfig tc;
    tc.batch_size = (int)cfg.get_int(section + ".batch");
    tc.learning_rate = cfg.get_number(section + ".lr");
    tc.weight_decay = cfg.get_number(section + ".wd");
    tc.warmup_steps = (int)cfg.get_int(section + ".warmup");
    tc.grad_clip_norm = cfg.get_number(section + ".grad_clip");
    if (cfg.get_string(section + ".batch").empty()) throw_config("bad section " + section);
    return tc;
}

void cmd_pretrain(const RunConfig& cfg, const LogFn& log) {
    std::string corpus_path = require_path(cfg, "train.mlm.corpus");
    std::string vocab_path = require_path(cfg, "train.mlm.vocab");
    std::string out = require_path(cfg, "train.mlm.out");

    Manifest manifest(cfg, "pretrain");
    manifest.input("corpus", corpus_path);
    manifest.input("vocab", vocab_path);

    ingest::Tokenizer tk = ingest::load_vocab(vocab_path, casing_of(cfg));
    std::vector<Document> docs = corpus::load_corpus(corpus_path);

    // honor the split: train on train ids, hold out test ids for perplexity
    corpus::DatasetSplit split;
    const std::string& split_path = cfg.get_string("train.mlm.split");
    if (!split_path.empty()) {
        manifest.input("split", split_path);
        split = corpus::load_split(split_path);
        std::set<std::string> ids;
        for (const Document& d : docs) ids.insert(d.id);
        corpus::SplitReport rep = corpus::validate_split(split, ids);
        if (!rep.overlap.empty())
            throw_protocol("train/test split overlap (validate_split): " + rep.overlap[0]);
    } else {
        for (const Document& d : docs) split.train.insert(d.id);
    }

    std::vector<const Document*> train_docs, test_docs;
    for (const Document& d : docs) {
        if (split.train.count(d.id)) train_docs.push_back(&d);
        else if (split.test.count(d.id)) test_docs.push_back(&d);
        else train_docs.push_back(&d);  // unlisted ids train by default
    }
    if (train_docs.empty()) throw_missing("pretrain: no training documents");

    const int max_len = (int)cfg.get_int("train.mlm.max_len");
    std::vector<train::PreparedDoc> prepared(train_docs.size());
    parallel_for(train_docs.size(), workers_of(cfg), [&](std::size_t i) {
        prepared[i] = train::prepare_doc(*train_docs[i], tk, max_len);
    });

    // balance plan over the training slice (uniform targets by default)
    std::vector<Document> counted;
    counted.reserve(train_docs.size());
    for (const Document* d : train_docs) {
        Document c = *d;
        if (!c.token_count.has_value())
            c.token_count = static_cast<std::int64_t>(
                ingest::tokenize(c.content, c.modality, tk.casing).size());
        counted.push_back(std::move(c));
    }
    corpus::CorpusManifest cm = corpus::build_manifest(counted);
    std::map<corpus::Category, double> targets;
    for (const auto& [cat, ct] : cm.per_category)
        targets[cat] = 1.0 / static_cast<double>(cm.per_category.size());
    filterbal::BalancePlan plan = filterbal::compute_balance_weights(
        cm, targets, cfg.get_number("train.mlm.balance_cap"));

    // held-out masked batches per category, statically masked with a fixed stream
    std::map<corpus::Category, std::vector<mask::MaskedExample>> held;
    mask::MaskingConfig mc;
    mc.mlm_prob = cfg.get_number("train.mlm.mlm_prob");
    mc.mask_frac = cfg.get_number("train.mlm.mask_frac");
    mc.random_frac = cfg.get_number("train.mlm.random_frac");
    mc.keep_frac = cfg.get_number("train.mlm.keep_frac");
    std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    const int heldout_per_cat = (int)cfg.get_int("curriculum.heldout_docs");
    std::map<corpus::Category, int> held_counts;
    for (const Document* d : test_docs) {
        if (held_counts[d->source] >= heldout_per_cat) continue;
        train::PreparedDoc pd = train::prepare_doc(*d, tk, max_len);
        Rng hrng = derive_rng(seed, "heldout-mask", fnv1a64(d->id));
        auto ex = train::mask_prepared(pd, mc, tk.size(), hrng);
        if (!ex.has_value()) continue;
        held[d->source].push_back(*ex);
        held_counts[d->source] += 1;
    }

    Rng init_rng = derive_rng(seed, "encoder-init");
    nn::Params<float> params =
        nn::Params<float>::init(encoder_config_from(cfg, tk.size()), init_rng);

    train::MlmTrainOptions opts;
    opts.cfg = train_config_from(cfg, "train.mlm");
    opts.cfg.total_steps = (int)cfg.get_int("train.mlm.steps");
    if (opts.cfg.warmup_steps <= 0)
        opts.cfg.warmup_steps = std::max(1, opts.cfg.total_steps / 10);
    opts.masking = mc;
    opts.schedule.e1 = cfg.get_number("curriculum.e1");
    opts.schedule.e2 = cfg.get_number("curriculum.e2");
    opts.schedule.lambda_late = cfg.get_number("curriculum.lambda_late");
    opts.feedback.eta = cfg.get_number("curriculum.eta");
    opts.feedback.clip = cfg.get_number("curriculum.clip");
    opts.feedback.synthetic_tier = synthetic_tier_of(cfg);
    opts.balance = plan;
    opts.ppl_refresh_every = (int)cfg.get_int("curriculum.refresh");
    opts.use_ppl_feedback = cfg.get_bool("curriculum.feedback");
    opts.seed = seed;
    opts.workers = workers_of(cfg);

    train::TrainResult result = train::train_mlm(params, prepared, held, opts, log);

    nn::save_checkpoint(out, params, sha256_file_hex(vocab_path));
    manifest.output("checkpoint", out);
    const std::string& trace_path = cfg.get_string("train.mlm.trace");
    if (!trace_path.empty()) {
        train::write_trace(trace_path, result.trace);
        manifest.output("trace", trace_path);
    }
    const std::string& curr_path = cfg.get_string("curriculum.trace");
    if (!curr_path.empty()) {
        train::write_curriculum_trace(curr_path, result.curriculum_trace);
        manifest.output("curriculum_trace", curr_path);
    }
    manifest.write(out);
}

struct LoadedModel {
    nn::Params<float> params;
    nn::CheckpointMeta meta;
};

LoadedModel load_model(const std::string& ckpt_path) {
    LoadedModel m;
    m.params = nn::load_checkpoint(ckpt_path, &m.meta);
    return m;
}

void save_finetuned(const RunConfig& cfg, Manifest& manifest, const std::string& out,
                    const nn::Params<float>& params, const std::string& vocab_hash,
                    const std::string& trace_key, const train::TrainResult& result) {
    nn::save_checkpoint(out, params, vocab_hash);
    manifest.output("checkpoint", out);
    const std::string& trace_path = cfg.get_string(trace_key);
    if (!trace_path.empty()) {
        train::write_trace(trace_path, result.trace);
        manifest.output("trace", trace_path);
    }
    manifest.write(out);
}

void cmd_finetune_bi(const RunConfig& cfg, const LogFn& log) {
    std::string ckpt = require_path(cfg, "train.bi.ckpt");
    std::string pairs_path = require_path(cfg, "train.bi.pairs");
    std::string vocab_path = require_path(cfg, "train.mlm.vocab");
    std::string out = require_path(cfg, "train.bi.out");

    Manifest manifest(cfg, "finetune-bi");
    manifest.input("checkpoint", ckpt);
    manifest.input("pairs", pairs_path);
    manifest.input("vocab", vocab_path);

    LoadedModel m = load_model(ckpt);
    ingest::Tokenizer tk = ingest::load_vocab(vocab_path, casing_of(cfg));
    int max_len = std::min((int)cfg.get_int("train.bi.max_len"), m.meta.cfg.max_len);

    std::vector<train::BiPair> pairs;
    for (const synth::TrainPair& p : synth::load_train_pairs(pairs_path)) {
        train::BiPair bp;
        bp.query_id = p.query_id;
        bp.doc_id = p.doc_id;
        bp.query_ids =
            ingest::encode(tk, ingest::tokenize(p.query, corpus::Modality::text, tk.casing),
                           max_len)
                .ids;
        bp.doc_ids =
            ingest::encode(tk, ingest::tokenize(p.doc, corpus::Modality::text, tk.casing),
                           max_len)
                .ids;
        pairs.push_back(std::move(bp));
    }

    train::BiTrainOptions opts;
    opts.cfg = train_config_from(cfg, "train.bi");
    opts.cfg.epochs = (int)cfg.get_int("train.bi.epochs");
    opts.cfg.patience = (int)cfg.get_int("train.bi.patience");
    opts.tau = cfg.get_number("train.bi.tau");
    opts.mine_hard_negatives = cfg.get_bool("train.bi.mine_hn");
    opts.hard_negatives_per_query = (int)cfg.get_int("train.bi.hn_k");
    opts.mine_refresh_epochs = (int)cfg.get_int("train.bi.hn_refresh");
    opts.val_fraction = cfg.get_number("train.bi.val_frac");
    opts.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    opts.workers = workers_of(cfg);

    train::TrainResult result = train::train_bi(m.params, pairs, opts, log);
    save_finetuned(cfg, manifest, out, m.params, m.meta.vocab_hash, "train.bi.trace", result);
}

void cmd_finetune_cross(const RunConfig& cfg, const LogFn& log) {
    std::string ckpt = require_path(cfg, "train.cross.ckpt");
    std::string pairs_path = require_path(cfg, "train.cross.pairs");
    std::string vocab_path = require_path(cfg, "train.mlm.vocab");
    std::string out = require_path(cfg, "train.cross.out");

    Manifest manifest(cfg, "finetune-cross");
    manifest.input("checkpoint", ckpt);
    manifest.input("pairs", pairs_path);
    manifest.input("vocab", vocab_path);

    LoadedModel m = load_model(ckpt);
    ingest::Tokenizer tk = ingest::load_vocab(vocab_path, casing_of(cfg));
    int max_len = std::min((int)cfg.get_int("train.cross.max_len"), m.meta.cfg.max_len);

    std::vector<train::CrossExample> examples;
    for (const synth::CrossPair& p : synth::load_cross_pairs(pairs_path)) {
        train::CrossExample ex;
        ex.label = p.label;
        ex.pair_ids = ingest::encode_pair(
                          tk, ingest::tokenize(p.query, corpus::Modality::text, tk.casing),
                          ingest::tokenize(p.doc, corpus::Modality::text, tk.casing), max_len)
                          .ids;
        examples.push_back(std::move(ex));
    }

    train::FineTuneOptions opts;
    opts.cfg = train_config_from(cfg, "train.cross");
    opts.cfg.epochs = (int)cfg.get_int("train.cross.epochs");
    opts.cfg.patience = (int)cfg.get_int("train.cross.patience");
    opts.val_fraction = cfg.get_number("train.cross.val_frac");
    opts.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    opts.workers = workers_of(cfg);

    train::TrainResult result = train::train_cross(m.params, examples, opts, log);
    save_finetuned(cfg, manifest, out, m.params, m.meta.vocab_hash, "train.cross.trace",
                   result);
}

std::vector<train::NerExample> encode_ner(const std::vector<synth::NerSentence>& sentences,
                                          const ingest::Tokenizer& tk, int max_len) {
    std::vector<train::NerExample> out;
    for (const synth::NerSentence& s : sentences) {
        train::NerExample ex;
        ingest::TokenSequence seq = ingest::encode(tk, s.tokens, max_len);
        ex.ids = seq.ids;
        ex.labels.assign(ex.ids.size(), mask::kIgnore);
        std::size_t payload = std::min(s.tokens.size(),
                                       static_cast<std::size_t>(max_len - 2));
        for (std::size_t i = 0; i < payload; ++i)
            ex.labels[i + 1] = nn::bio_label_id(s.labels[i]);
        out.push_back(std::move(ex));
    }
    return out;
}

void cmd_finetune_ner(const RunConfig& cfg, const LogFn& log) {
    std::string ckpt = require_path(cfg, "train.ner.ckpt");
    std::string train_path = require_path(cfg, "train.ner.train");
    std::string vocab_path = require_path(cfg, "train.mlm.vocab");
    std::string out = require_path(cfg, "train.ner.out");

    Manifest manifest(cfg, "finetune-ner");
    manifest.input("checkpoint", ckpt);
    manifest.input("train", train_path);
    manifest.input("vocab", vocab_path);

    LoadedModel m = load_model(ckpt);
    ingest::Tokenizer tk = ingest::load_vocab(vocab_path, casing_of(cfg));
    int max_len = std::min((int)cfg.get_int("train.ner.max_len"), m.meta.cfg.max_len);
    auto examples = encode_ner(synth::load_ner_file(train_path), tk, max_len);

    train::FineTuneOptions opts;
    opts.cfg = train_config_from(cfg, "train.ner");
    opts.cfg.epochs = (int)cfg.get_int("train.ner.epochs");
    opts.cfg.patience = (int)cfg.get_int("train.ner.patience");
    opts.val_fraction = cfg.get_number("train.ner.val_frac");
    opts.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    opts.workers = workers_of(cfg);

    train::TrainResult result = train::train_ner(m.params, examples, opts, log);
    save_finetuned(cfg, manifest, out, m.params, m.meta.vocab_hash, "train.ner.trace", result);
}

void cmd_finetune_vuln(const RunConfig& cfg, const LogFn& log) {
    std::string ckpt = require_path(cfg, "train.vuln.ckpt");
    std::string train_path = require_path(cfg, "train.vuln.train");
    std::string vocab_path = require_path(cfg, "train.mlm.vocab");
    std::string out = require_path(cfg, "train.vuln.out");

    Manifest manifest(cfg, "finetune-vuln");
    manifest.input("checkpoint", ckpt);
    manifest.input("train", train_path);
    manifest.input("vocab", vocab_path);

    LoadedModel m = load_model(ckpt);
    ingest::Tokenizer tk = ingest::load_vocab(vocab_path, casing_of(cfg));
    int max_len = std::min((int)cfg.get_int("train.vuln.max_len"), m.meta.cfg.max_len);

    std::vector<train::VulnExample> examples;
    for (const synth::VulnSample& v : synth::load_vuln_file(train_path)) {
        train::VulnExample ex;
        ex.label = v.label;
        ex.ids = ingest::encode(tk,
                                ingest::tokenize(v.content, corpus::Modality::code, tk.casing),
                                max_len)
                     .ids;
        examples.push_back(std::move(ex));
    }

    train::FineTuneOptions opts;
    opts.cfg = train_config_from(cfg, "train.vuln");
    opts.cfg.epochs = (int)cfg.get_int("train.vuln.epochs");
    opts.cfg.patience = (int)cfg.get_int("train.vuln.patience");
    opts.val_fraction = cfg.get_number("train.vuln.val_frac");
    opts.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    opts.workers = workers_of(cfg);

    train::TrainResult result = train::train_vuln(m.params, examples, opts, log);
    save_finetuned(cfg, manifest, out, m.params, m.meta.vocab_hash, "train.vuln.trace",
                   result);
}

void validate_eval_split(const RunConfig& cfg, Manifest& manifest,
                         const std::vector<mask::EvalRecord>* records) {
    const std::string& split_path = cfg.get_string("eval.split");
    if (split_path.empty()) return;
    manifest.input("split", split_path);
    corpus::DatasetSplit split = corpus::load_split(split_path);
    // internal consistency first ("strictly excluded" rule)
    corpus::DatasetSplit probe = split;
    std::set<std::string> all;
    for (const auto& id : split.train) all.insert(id);
    for (const auto& id : split.test) all.insert(id);
    corpus::SplitReport rep = corpus::validate_split(probe, all);
    if (!rep.overlap.empty())
        throw_protocol("evaluation protocol violation (validate_split): train/test overlap on " +
                       rep.overlap[0]);
    if (records) {
        for (const auto& r : *records)
            if (!r.doc_id.empty() && split.train.count(r.doc_id))
                throw_protocol("evaluation protocol violation: eval record drawn from training "
                               "document " + r.doc_id);
    }
}

void cmd_eval_mlm(const RunConfig& cfg, const LogFn& log) {
    std::string ckpt = require_path(cfg, "eval.ckpt");
    std::string records_path = require_path(cfg, "eval.records");
    std::string vocab_path = require_path(cfg, "eval.vocab");
    std::string report_path = require_path(cfg, "eval.report");

    Manifest manifest(cfg, "eval-mlm");
    manifest.input("checkpoint", ckpt);
    manifest.input("records", records_path);
    manifest.input("vocab", vocab_path);

    auto records = mask::load_eval_records(records_path);
    validate_eval_split(cfg, manifest, &records);

    LoadedModel m = load_model(ckpt);
    ingest::Tokenizer tk = ingest::load_vocab(vocab_path, casing_of(cfg));
    int max_len = m.meta.cfg.max_len;

    std::vector<metrics::RankedPrediction> preds(records.size());
    parallel_for(records.size(), workers_of(cfg), [&](std::size_t i) {
        const mask::EvalRecord& r = records[i];
        mask::MaskedExample ex = mask::make_eval_example(r, tk, max_len);
        if (ex.masked_positions.size() != 1)
            throw_protocol("eval record must mask exactly one position (gold: " + r.gold + ")");
        nn::Tensor<float> logits =
            nn::mlm_logits(m.params, ex.input_ids, ex.masked_positions);
        const float* row = logits.row(0);
        std::vector<int> order;
        order.reserve(static_cast<std::size_t>(tk.size()) - ingest::Tokenizer::num_specials);
        for (int id = ingest::Tokenizer::num_specials; id < tk.size(); ++id)
            order.push_back(id);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            float za = row[a], zb = row[b];
            if (za != zb) return za > zb;
            return a < b;
        });
        metrics::RankedPrediction p;
        p.ranked_tokens = std::move(order);
        p.gold = ex.labels[ex.masked_positions[0]];
        switch (r.category) {
            case mask::TargetCategory::noun: p.category = "objects"; break;
            case mask::TargetCategory::verb: p.category = "verbs"; break;
            default: p.category = "code"; break;
        }
        preds[i] = std::move(p);
    });

    metrics::TopNReport report = metrics::topn_accuracy(preds);
    write_file(report_path, metrics::emit_table3_mlm(report, cfg.hash()));
    manifest.output("report", report_path);

    const std::string& census_path = cfg.get_string("eval.census");
    if (!census_path.empty()) {
        write_file(census_path, mask::census_to_json(mask::census_of(records)));
        manifest.output("census", census_path);
    }
    if (log)
        log("eval-mlm", 0, "examples", static_cast<double>(records.size()));
    manifest.write(report_path);
}

void cmd_eval_retrieval(const RunConfig& cfg, const LogFn& log) {
    std::string bi_ckpt = require_path(cfg, "eval.bi");
    std::string docs_path = require_path(cfg, "eval.docs");
    std::string queries_path = require_path(cfg, "eval.queries");
    std::string qrels_path = require_path(cfg, "eval.qrels");
    std::string vocab_path = require_path(cfg, "eval.vocab");
    std::string bi_report_path = require_path(cfg, "eval.bi_report");

    Manifest manifest(cfg, "eval-retrieval");
    manifest.input("bi_checkpoint", bi_ckpt);
    manifest.input("docs", docs_path);
    manifest.input("queries", queries_path);
    manifest.input("qrels", qrels_path);
    manifest.input("vocab", vocab_path);
    validate_eval_split(cfg, manifest, nullptr);

    LoadedModel bi = load_model(bi_ckpt);
    ingest::Tokenizer tk = ingest::load_vocab(vocab_path, casing_of(cfg));
    std::vector<Document> docs = corpus::load_corpus(docs_path);
    auto queries = synth::load_queries(queries_path);
    retrieval::QueryRelevance qrels = retrieval::load_qrels(qrels_path);

    int max_len = std::min((int)cfg.get_int("eval.max_len"), bi.meta.cfg.max_len);
    retrieval::EmbeddingIndex index = retrieval::build_index(
        bi.params, docs, tk, max_len, sha256_file_hex(bi_ckpt), workers_of(cfg));

    int k1 = (int)cfg.get_int("eval.k1");
    if (k1 <= 0 || k1 > static_cast<int>(docs.size())) k1 = static_cast<int>(docs.size());
    int k2 = (int)cfg.get_int("eval.k2");
    k2 = std::min(k2, k1);

    std::map<std::string, std::string> content;
    for (const Document& d : docs) content[d.id] = d.content;
    auto content_fn = [&](const std::string& id) { return content.at(id); };

    std::map<std::string, retrieval::RankedList> stage1_rankings;
    std::vector<retrieval::RankedList> stage1(queries.size());
    parallel_for(queries.size(), workers_of(cfg), [&](std::size_t i) {
        auto toks = ingest::tokenize(queries[i].second, corpus::Modality::text, tk.casing);
        auto seq = ingest::encode(tk, toks, max_len);
        stage1[i] = retrieval::search_topk(index, nn::embed(bi.params, seq.ids), k1);
    });
    for (std::size_t i = 0; i < queries.size(); ++i)
        stage1_rankings[queries[i].first] = stage1[i];

    metrics::RetrievalReport bi_report =
        metrics::evaluate_retrieval(stage1_rankings, qrels, false);
    write_file(bi_report_path, metrics::emit_bi_encoder(bi_report, cfg.hash()));
    manifest.output("bi_report", bi_report_path);
    if (log) log("eval-retrieval", 0, "bi_mrr10", bi_report.mrr_at_10);

    const std::string& cross_ckpt = cfg.get_string("eval.cross");
    if (!cross_ckpt.empty()) {
        std::string cross_report_path = require_path(cfg, "eval.cross_report");
        manifest.input("cross_checkpoint", cross_ckpt);
        LoadedModel cross = load_model(cross_ckpt);
        std::map<std::string, retrieval::RankedList> two_stage;
        std::vector<retrieval::RankedList> reranked(queries.size());
        parallel_for(queries.size(), workers_of(cfg), [&](std::size_t i) {
            reranked[i] = retrieval::rerank(cross.params, tk, queries[i].second, stage1[i],
                                            std::min(k2, (int)stage1[i].size()), content_fn,
                                            max_len, 1);
        });
        for (std::size_t i = 0; i < queries.size(); ++i)
            two_stage[queries[i].first] = reranked[i];
        metrics::RetrievalReport cr = metrics::evaluate_retrieval(two_stage, qrels, true);
        write_file(cross_report_path, metrics::emit_cross_encoder(cr, cfg.hash()));
        manifest.output("cross_report", cross_report_path);
        if (log) log("eval-retrieval", 0, "two_stage_mrr10", cr.mrr_at_10);
    }
    manifest.write(bi_report_path);
}

void cmd_eval_ner(const RunConfig& cfg, const LogFn& log) {
    std::string ckpt = require_path(cfg, "eval.ckpt");
    std::string test_path = require_path(cfg, "eval.ner_test");
    std::string vocab_path = require_path(cfg, "eval.vocab");
    std::string report_path = require_path(cfg, "eval.report");

    Manifest manifest(cfg, "eval-ner");
    manifest.input("checkpoint", ckpt);
    manifest.input("test", test_path);
    manifest.input("vocab", vocab_path);
    validate_eval_split(cfg, manifest, nullptr);

    LoadedModel m = load_model(ckpt);
    ingest::Tokenizer tk = ingest::load_vocab(vocab_path, casing_of(cfg));
    auto sentences = synth::load_ner_file(test_path);
    int max_len = m.meta.cfg.max_len;

    std::vector<std::vector<std::string>> gold(sentences.size()), pred(sentences.size());
    parallel_for(sentences.size(), workers_of(cfg), [&](std::size_t i) {
        const synth::NerSentence& s = sentences[i];
        ingest::TokenSequence seq = ingest::encode(tk, s.tokens, max_len);
        std::vector<int> out = nn::token_cls_predict(m.params, seq.ids);
        std::size_t payload = std::min(s.tokens.size(), static_cast<std::size_t>(max_len - 2));
        std::vector<std::string> g(s.labels.begin(),
                                   s.labels.begin() + static_cast<std::ptrdiff_t>(payload));
        std::vector<std::string> p;
        for (std::size_t t = 0; t < payload; ++t)
            p.push_back(nn::bio_label_set()[static_cast<std::size_t>(out[t + 1])]);
        gold[i] = std::move(g);
        pred[i] = std::move(p);
    });

    metrics::NerReport span = metrics::ner_prf(gold, pred, metrics::NerMode::span);
    metrics::NerReport token = metrics::ner_prf(gold, pred, metrics::NerMode::token);
    write_file(report_path, metrics::emit_ner(span, token, cfg.hash()));
    manifest.output("report", report_path);
    if (log) log("eval-ner", 0, "span_f1", span.micro.f1);
    manifest.write(report_path);
}

void cmd_eval_vuln(const RunConfig& cfg, const LogFn& log) {
    std::string ckpt = require_path(cfg, "eval.ckpt");
    std::string test_path = require_path(cfg, "eval.vuln_test");
    std::string vocab_path = require_path(cfg, "eval.vocab");
    std::string report_path = require_path(cfg, "eval.report");

    Manifest manifest(cfg, "eval-vuln");
    manifest.input("checkpoint", ckpt);
    manifest.input("test", test_path);
    manifest.input("vocab", vocab_path);
    validate_eval_split(cfg, manifest, nullptr);

    LoadedModel m = load_model(ckpt);
    ingest::Tokenizer tk = ingest::load_vocab(vocab_path, casing_of(cfg));
    auto samples = synth::load_vuln_file(test_path);
    int max_len = m.meta.cfg.max_len;

    std::vector<int> golds(samples.size()), preds(samples.size());
    parallel_for(samples.size(), workers_of(cfg), [&](std::size_t i) {
        auto seq = ingest::encode(
            tk, ingest::tokenize(samples[i].content, corpus::Modality::code, tk.casing),
            max_len);
        golds[i] = samples[i].label;
        preds[i] = nn::seq_cls_predict(m.params, seq.ids);
    });

    metrics::ClassificationReport report = metrics::binary_cls_metrics(golds, preds);
    write_file(report_path, metrics::emit_vuln(report, cfg.hash()));
    manifest.output("report", report_path);
    if (log) log("eval-vuln", 0, "accuracy", report.accuracy);
    manifest.write(report_path);
}

void cmd_index(const RunConfig& cfg, const LogFn& log) {
    std::string ckpt = require_path(cfg, "index.ckpt");
    std::string corpus_path = require_path(cfg, "index.corpus");
    std::string out = require_path(cfg, "index.out");

    Manifest manifest(cfg, "index");
    manifest.input("checkpoint", ckpt);
    manifest.input("corpus", corpus_path);
    manifest.input("vocab", require_path(cfg, "train.mlm.vocab"));

    LoadedModel m = load_model(ckpt);
    ingest::Tokenizer tk =
        ingest::load_vocab(require_path(cfg, "train.mlm.vocab"), casing_of(cfg));
    std::vector<Document> docs = corpus::load_corpus(corpus_path);
    int max_len = std::min((int)cfg.get_int("index.max_len"), m.meta.cfg.max_len);
    retrieval::EmbeddingIndex index = retrieval::build_index(
        m.params, docs, tk, max_len, sha256_file_hex(ckpt), workers_of(cfg));
    retrieval::save_index(out, index);
    if (log) log("index", 0, "documents", static_cast<double>(docs.size()));
    manifest.output("index", out);
    manifest.write(out);
}

void cmd_retrieve(const RunConfig& cfg, const LogFn& log) {
    std::string index_path = require_path(cfg, "retrieve.index");
    std::string docs_path = require_path(cfg, "retrieve.docs");
    std::string bi_ckpt = require_path(cfg, "retrieve.bi");
    std::string query_path = require_path(cfg, "retrieve.query_file");
    std::string out = require_path(cfg, "retrieve.out");

    Manifest manifest(cfg, "retrieve");
    manifest.input("index", index_path);
    manifest.input("docs", docs_path);
    manifest.input("bi_checkpoint", bi_ckpt);
    manifest.input("queries", query_path);
    manifest.input("vocab", require_path(cfg, "train.mlm.vocab"));

    retrieval::EmbeddingIndex index = retrieval::load_index(index_path);
    LoadedModel bi = load_model(bi_ckpt);
    ingest::Tokenizer tk =
        ingest::load_vocab(require_path(cfg, "train.mlm.vocab"), casing_of(cfg));
    std::vector<Document> docs = corpus::load_corpus(docs_path);
    std::map<std::string, std::string> content;
    for (const Document& d : docs) content[d.id] = d.content;
    auto content_fn = [&](const std::string& id) { return content.at(id); };
    auto queries = synth::load_queries(query_path);

    const std::string& cross_ckpt = cfg.get_string("retrieve.cross");
    std::optional<LoadedModel> cross;
    if (!cross_ckpt.empty()) {
        manifest.input("cross_checkpoint", cross_ckpt);
        cross = load_model(cross_ckpt);
    }

    int k1 = std::min((int)cfg.get_int("retrieve.k1"), (int)index.size());
    int k2 = std::min((int)cfg.get_int("retrieve.k2"), k1);
    int max_len = std::min((int)cfg.get_int("retrieve.max_len"), bi.meta.cfg.max_len);

    std::ostringstream os;
    for (const auto& [qid, text] : queries) {
        auto toks = ingest::tokenize(text, corpus::Modality::text, tk.casing);
        auto seq = ingest::encode(tk, toks, max_len);
        retrieval::RankedList stage1 =
            retrieval::search_topk(index, nn::embed(bi.params, seq.ids), k1);
        retrieval::RankedList final_list = stage1;
        if (cross.has_value())
            final_list = retrieval::rerank(cross->params, tk, text, stage1,
                                           std::min(k2, (int)stage1.size()), content_fn,
                                           max_len, workers_of(cfg));
        json results = json::array();
        for (const auto& sd : final_list)
            results.push_back({{"doc_id", sd.id}, {"score", sd.score}});
        json s1 = json::array();
        for (const auto& sd : stage1) s1.push_back({{"doc_id", sd.id}, {"score", sd.score}});
        json line = {{"query_id", qid}, {"results", results}, {"stage1", s1}};
        os << line.dump() << '\n';
    }
    write_file(out, os.str());
    if (log) log("retrieve", 0, "queries", static_cast<double>(queries.size()));
    manifest.output("results", out);
    manifest.write(out);
}

}  // namespace

const std::vector<std::string>& command_list() {
    static const std::vector<std::string> cmds = {
        "synth",         "ingest",        "dedup",        "filter",       "stats",
        "pretrain",      "finetune-bi",   "finetune-cross", "finetune-ner", "finetune-vuln",
        "eval-mlm",      "eval-retrieval", "eval-ner",    "eval-vuln",    "index",
        "retrieve",
    };
    return cmds;
}

void run_command(const RunConfig& cfg, const std::string& command, const LogFn& log) {
    if (command == "synth") return cmd_synth(cfg, log);
    if (command == "ingest") return cmd_ingest(cfg, log);
    if (command == "dedup") return cmd_dedup(cfg, log);
    if (command == "filter") return cmd_filter(cfg, log);
    if (command == "stats") return cmd_stats(cfg, log);
    if (command == "pretrain") return cmd_pretrain(cfg, log);
    if (command == "finetune-bi") return cmd_finetune_bi(cfg, log);
    if (command == "finetune-cross") return cmd_finetune_cross(cfg, log);
    if (command == "finetune-ner") return cmd_finetune_ner(cfg, log);
    if (command == "finetune-vuln") return cmd_finetune_vuln(cfg, log);
    if (command == "eval-mlm") return cmd_eval_mlm(cfg, log);
    if (command == "eval-retrieval") return cmd_eval_retrieval(cfg, log);
    if (command == "eval-ner") return cmd_eval_ner(cfg, log);
    if (command == "eval-vuln") return cmd_eval_vuln(cfg, log);
    if (command == "index") return cmd_index(cfg, log);
    if (command == "retrieve") return cmd_retrieve(cfg, log);
    throw_config("unknown command: " + command);
}

}  // namespace forge::pipeline
