#include "forge/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "forge/sha256.hpp"
#include "forge/util.hpp"

namespace forge::config {

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> keys = {
        // globals
        {"seed", ValueType::integer, "42"},
        {"workers", ValueType::integer, "1"},

        // ingest
        {"ingest.in", ValueType::string, ""},
        {"ingest.out", ValueType::string, ""},
        {"ingest.vocab", ValueType::string, ""},
        {"ingest.report", ValueType::string, ""},
        {"ingest.min_count", ValueType::integer, "1"},
        {"ingest.max_vocab", ValueType::integer, "65536"},
        {"ingest.casing", ValueType::string, "lowercase"},
        {"ingest.synthetic_tier", ValueType::string, "medium"},

        // dedup
        {"dedup.in", ValueType::string, ""},
        {"dedup.out", ValueType::string, ""},
        {"dedup.report", ValueType::string, ""},
        {"dedup.perms", ValueType::integer, "256"},
        {"dedup.bands", ValueType::integer, "32"},
        {"dedup.rows", ValueType::integer, "8"},
        {"dedup.cand", ValueType::number, "0.8"},
        {"dedup.confirm", ValueType::number, "0.85"},
        {"dedup.k_text", ValueType::integer, "5"},
        {"dedup.k_code", ValueType::integer, "10"},
        {"dedup.char_prefix", ValueType::integer, "4096"},
        {"dedup.keep_unshingleable", ValueType::boolean, "true"},

        // filter
        {"filter.in", ValueType::string, ""},
        {"filter.out", ValueType::string, ""},
        {"filter.report", ValueType::string, ""},
        {"filter.lexicon", ValueType::string, ""},
        {"filter.seed_labels", ValueType::string, ""},
        {"filter.tau", ValueType::number, "0.6"},
        {"filter.min_hits", ValueType::integer, "2"},
        {"filter.alpha", ValueType::number, "1.0"},

        // stats
        {"stats.in", ValueType::string, ""},
        {"stats.out", ValueType::string, ""},

        // curriculum
        {"curriculum.e1", ValueType::number, "0.3"},
        {"curriculum.e2", ValueType::number, "0.8"},
        {"curriculum.lambda_late", ValueType::number, "0.3"},
        {"curriculum.eta", ValueType::number, "0.5"},
        {"curriculum.clip", ValueType::number, "2.0"},
        {"curriculum.refresh", ValueType::integer, "200"},
        {"curriculum.feedback", ValueType::boolean, "true"},
        {"curriculum.heldout_docs", ValueType::integer, "8"},
        {"curriculum.trace", ValueType::string, ""},

        // mlm pretraining (Table-2 defaults: batch 16, lr 5e-5, wd 0.01, p 0.10)
        {"train.mlm.corpus", ValueType::string, ""},
        {"train.mlm.vocab", ValueType::string, ""},
        {"train.mlm.split", ValueType::string, ""},
        {"train.mlm.out", ValueType::string, ""},
        {"train.mlm.trace", ValueType::string, ""},
        {"train.mlm.steps", ValueType::integer, "1000"},
        {"train.mlm.batch", ValueType::integer, "16"},
        {"train.mlm.lr", ValueType::number, "5e-5"},
        {"train.mlm.wd", ValueType::number, "0.01"},
        {"train.mlm.warmup", ValueType::integer, "0"},
        {"train.mlm.mlm_prob", ValueType::number, "0.10"},
        {"train.mlm.mask_frac", ValueType::number, "0.8"},
        {"train.mlm.random_frac", ValueType::number, "0.1"},
        {"train.mlm.keep_frac", ValueType::number, "0.1"},
        {"train.mlm.grad_clip", ValueType::number, "1.0"},
        {"train.mlm.balance_cap", ValueType::number, "10.0"},
        {"train.mlm.d", ValueType::integer, "64"},
        {"train.mlm.heads", ValueType::integer, "4"},
        {"train.mlm.layers", ValueType::integer, "2"},
        {"train.mlm.ff", ValueType::integer, "128"},
        {"train.mlm.max_len", ValueType::integer, "1024"},
        {"train.mlm.dropout", ValueType::number, "0.0"},
        {"train.mlm.tie_mlm", ValueType::boolean, "false"},

        // bi-encoder fine-tuning
        {"train.bi.ckpt", ValueType::string, ""},
        {"train.bi.pairs", ValueType::string, ""},
        {"train.bi.out", ValueType::string, ""},
        {"train.bi.trace", ValueType::string, ""},
        {"train.bi.epochs", ValueType::integer, "20"},
        {"train.bi.batch", ValueType::integer, "8"},
        {"train.bi.lr", ValueType::number, "1e-5"},
        {"train.bi.wd", ValueType::number, "0.001"},
        {"train.bi.warmup", ValueType::integer, "0"},
        {"train.bi.tau", ValueType::number, "0.1"},
        {"train.bi.mine_hn", ValueType::boolean, "true"},
        {"train.bi.hn_k", ValueType::integer, "2"},
        {"train.bi.hn_refresh", ValueType::integer, "1"},
        {"train.bi.patience", ValueType::integer, "3"},
        {"train.bi.val_frac", ValueType::number, "0.1"},
        {"train.bi.grad_clip", ValueType::number, "1.0"},
        {"train.bi.max_len", ValueType::integer, "1024"},

        // cross-encoder fine-tuning
        {"train.cross.ckpt", ValueType::string, ""},
        {"train.cross.pairs", ValueType::string, ""},
        {"train.cross.out", ValueType::string, ""},
        {"train.cross.trace", ValueType::string, ""},
        {"train.cross.epochs", ValueType::integer, "20"},
        {"train.cross.batch", ValueType::integer, "8"},
        {"train.cross.lr", ValueType::number, "1e-5"},
        {"train.cross.wd", ValueType::number, "0.001"},
        {"train.cross.warmup", ValueType::integer, "0"},
        {"train.cross.patience", ValueType::integer, "3"},
        {"train.cross.val_frac", ValueType::number, "0.1"},
        {"train.cross.grad_clip", ValueType::number, "1.0"},
        {"train.cross.max_len", ValueType::integer, "1024"},

        // ner fine-tuning (batch 8, lr 1e-5, wd 0.001, 20 epochs, clip 1.0)
        {"train.ner.ckpt", ValueType::string, ""},
        {"train.ner.train", ValueType::string, ""},
        {"train.ner.out", ValueType::string, ""},
        {"train.ner.trace", ValueType::string, ""},
        {"train.ner.epochs", ValueType::integer, "20"},
        {"train.ner.batch", ValueType::integer, "8"},
        {"train.ner.lr", ValueType::number, "1e-5"},
        {"train.ner.wd", ValueType::number, "0.001"},
        {"train.ner.warmup", ValueType::integer, "0"},
        {"train.ner.patience", ValueType::integer, "3"},
        {"train.ner.val_frac", ValueType::number, "0.1"},
        {"train.ner.grad_clip", ValueType::number, "1.0"},
        {"train.ner.max_len", ValueType::integer, "1024"},

        // vulnerability fine-tuning (wd 0.01, 10 epochs)
        {"train.vuln.ckpt", ValueType::string, ""},
        {"train.vuln.train", ValueType::string, ""},
        {"train.vuln.out", ValueType::string, ""},
        {"train.vuln.trace", ValueType::string, ""},
        {"train.vuln.epochs", ValueType::integer, "10"},
        {"train.vuln.batch", ValueType::integer, "8"},
        {"train.vuln.lr", ValueType::number, "1e-5"},
        {"train.vuln.wd", ValueType::number, "0.01"},
        {"train.vuln.warmup", ValueType::integer, "0"},
        {"train.vuln.patience", ValueType::integer, "3"},
        {"train.vuln.val_frac", ValueType::number, "0.1"},
        {"train.vuln.grad_clip", ValueType::number, "1.0"},
        {"train.vuln.max_len", ValueType::integer, "1024"},

        // evaluation
        {"eval.ckpt", ValueType::string, ""},
        {"eval.records", ValueType::string, ""},
        {"eval.report", ValueType::string, ""},
        {"eval.census", ValueType::string, ""},
        {"eval.split", ValueType::string, ""},
        {"eval.vocab", ValueType::string, ""},
        {"eval.docs", ValueType::string, ""},
        {"eval.queries", ValueType::string, ""},
        {"eval.qrels", ValueType::string, ""},
        {"eval.bi", ValueType::string, ""},
        {"eval.cross", ValueType::string, ""},
        {"eval.k1", ValueType::integer, "0"},
        {"eval.k2", ValueType::integer, "10"},
        {"eval.bi_report", ValueType::string, ""},
        {"eval.cross_report", ValueType::string, ""},
        {"eval.ner_test", ValueType::string, ""},
        {"eval.vuln_test", ValueType::string, ""},
        {"eval.max_len", ValueType::integer, "1024"},

        // synthetic generation
        {"synth.out", ValueType::string, ""},
        {"synth.docs_seed", ValueType::integer, "350"},
        {"synth.docs_web", ValueType::integer, "450"},
        {"synth.docs_reasoning", ValueType::integer, "150"},
        {"synth.docs_instruction", ValueType::integer, "150"},
        {"synth.docs_code_vuln", ValueType::integer, "180"},
        {"synth.docs_dialogue", ValueType::integer, "180"},
        {"synth.docs_baseline", ValueType::integer, "120"},
        {"synth.docs_synthetic", ValueType::integer, "120"},
        {"synth.dup_rate", ValueType::number, "0.05"},
        {"synth.rel_pairs", ValueType::integer, "300"},
        {"synth.eval_queries", ValueType::integer, "100"},
        {"synth.distractors", ValueType::integer, "120"},
        {"synth.adv_train", ValueType::integer, "60"},
        {"synth.adv_eval", ValueType::integer, "50"},
        {"synth.ner_train", ValueType::integer, "400"},
        {"synth.ner_test", ValueType::integer, "120"},
        {"synth.vuln_train", ValueType::integer, "400"},
        {"synth.vuln_test", ValueType::integer, "120"},
        {"synth.eval_nouns", ValueType::integer, "150"},
        {"synth.eval_verbs", ValueType::integer, "90"},
        {"synth.eval_code", ValueType::integer, "100"},

        // index / retrieve
        {"index.ckpt", ValueType::string, ""},
        {"index.corpus", ValueType::string, ""},
        {"index.out", ValueType::string, ""},
        {"index.max_len", ValueType::integer, "1024"},
        {"retrieve.index", ValueType::string, ""},
        {"retrieve.docs", ValueType::string, ""},
        {"retrieve.bi", ValueType::string, ""},
        {"retrieve.cross", ValueType::string, ""},
        {"retrieve.query_file", ValueType::string, ""},
        {"retrieve.k1", ValueType::integer, "100"},
        {"retrieve.k2", ValueType::integer, "10"},
        {"retrieve.out", ValueType::string, ""},
        {"retrieve.max_len", ValueType::integer, "1024"},
    };
    return keys;
}

const KeySpec& RunConfig::spec_for(const std::string& key) {
    for (const KeySpec& s : schema())
        if (key == s.key) return s;
    throw_config("unknown config key: " + key);
}

RunConfig RunConfig::defaults() {
    RunConfig c;
    for (const KeySpec& s : schema()) c.values_[s.key] = s.default_value;
    return c;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

void check_type(const KeySpec& spec, const std::string& value) {
    switch (spec.type) {
        case ValueType::string: return;
        case ValueType::integer: {
            std::size_t pos = 0;
            try {
                (void)std::stoll(value, &pos);
            } catch (...) {
                pos = 0;
            }
            if (pos != value.size() || value.empty())
                throw_config(std::string("config key ") + spec.key +
                             " expects an integer, got: " + value);
            return;
        }
        case ValueType::number: {
            std::size_t pos = 0;
            try {
                (void)std::stod(value, &pos);
            } catch (...) {
                pos = 0;
            }
            if (pos != value.size() || value.empty())
                throw_config(std::string("config key ") + spec.key +
                             " expects a number, got: " + value);
            return;
        }
        case ValueType::boolean:
            if (value != "true" && value != "false")
                throw_config(std::string("config key ") + spec.key +
                             " expects true/false, got: " + value);
            return;
    }
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
    std::string section;
    std::size_t lineno = 0;
    for (const std::string& raw : read_lines(path)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw_config(path + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw_config(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!section.empty()) key = section + "." + key;
        set(key, value);
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const KeySpec& spec = spec_for(key);
    check_type(spec, value);
    values_[key] = value;
}

const std::string& RunConfig::get_string(const std::string& key) const {
    (void)spec_for(key);
    return values_.at(key);
}

std::int64_t RunConfig::get_int(const std::string& key) const {
    return std::stoll(get_string(key));
}

double RunConfig::get_number(const std::string& key) const {
    return std::stod(get_string(key));
}

bool RunConfig::get_bool(const std::string& key) const { return get_string(key) == "true"; }

std::string RunConfig::canonical_dump() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
    return out.str();
}

std::string RunConfig::hash() const { return sha256_hex(canonical_dump()); }

}  // namespace forge::config
