#include "forge/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "forge/ingest.hpp"
#include "forge/rng.hpp"
#include "forge/util.hpp"

namespace forge::synth {

using corpus::Category;
using corpus::Document;
using corpus::Modality;
using nlohmann::json;

namespace {

const std::vector<std::string>& noun_bank() {
    static const std::vector<std::string> v = {
        "firewall",  "malware",   "botnet",    "ransomware", "payload",   "rootkit",
        "keylogger", "honeypot",  "sandbox",   "backdoor",   "trojan",    "worm",
        "phishing",  "spyware",   "scanner",   "packet",     "protocol",  "gateway",
        "endpoint",  "server",    "cluster",   "database",   "credential", "password",
        "token",     "certificate", "cipher",  "patch",      "advisory",  "bulletin",
        "incident",  "breach",    "audit",     "telemetry",  "beacon",    "implant",
        "dropper",   "loader",    "campaign",  "actor",      "analyst",   "attacker",
        "defender",  "network",   "subnet",    "router",     "proxy",     "tunnel",
        "kernel",    "driver",    "registry",  "process",    "socket",    "buffer",
        "heap",      "stack",     "pointer",   "exploit",    "signature", "quarantine",
    };
    return v;
}

const std::vector<std::string>& verb_bank() {
    static const std::vector<std::string> v = {
        "encrypts",   "decrypts",  "exploits",  "bypasses",  "executes",  "injects",
        "scans",      "patches",   "mitigates", "deploys",   "detects",   "blocks",
        "steals",     "compromises", "infects", "exfiltrates", "escalates", "spoofs",
        "intercepts", "launches",  "installs",  "propagates", "connects", "downloads",
        "uploads",    "monitors",  "disables",  "enables",   "triggers",  "overwrites",
        "corrupts",   "floods",    "hijacks",   "probes",    "leaks",     "validates",
    };
    return v;
}

const std::vector<std::string>& adj_bank() {
    static const std::vector<std::string> v = {
        "malicious", "critical",  "remote",    "local",   "privileged", "unpatched",
        "encrypted", "obfuscated", "persistent", "lateral", "rogue",    "stealthy",
        "vulnerable", "hardened", "legacy",    "covert",
    };
    return v;
}

const std::vector<std::string>& component_bank() {
    static const std::vector<std::string> v = {
        "routeros",  "webstack", "mailgate", "dbcore",   "authsvc",  "filesync",
        "netagent",  "logship",  "vpnhub",   "certmgr",  "buildbot", "pkgcache",
    };
    return v;
}

struct EntityPools {
    std::vector<std::string> malware = {"emotet",    "wannacry", "stuxnet", "mirai",
                                        "zeus",      "conficker", "petya",  "ryuk",
                                        "trickbot",  "qakbot",   "dridex",  "locky"};
    std::vector<std::string> indicator = {"ip_192_0_2_1",  "ip_198_51_100_7",
                                          "md5_e99a18c4",  "sha256_9f86d081",
                                          "domain_updates_evil", "url_hxxp_payload",
                                          "port_4444",     "mutex_gh0st"};
    std::vector<std::string> system = {"windows_server", "linux_kernel", "apache_httpd",
                                       "openssl_lib",    "kubernetes_node",
                                       "android_runtime"};
    std::vector<std::string> organization = {"acme_corp", "globex_bank", "initech_labs",
                                             "umbrella_group", "cyberdyne_systems"};
    // two-token vulnerability surfaces exercise the BIO span machinery
    std::vector<std::pair<std::string, std::string>> vulnerability = {
        {"buffer", "overflow"},   {"sql", "injection"},   {"race", "condition"},
        {"heap", "corruption"},   {"path", "traversal"},  {"integer", "overflow"}};
};

struct SentenceGen {
    std::vector<std::string> tokens;
    // slot index -> category for eval annotation
    std::vector<std::pair<std::size_t, mask::TargetCategory>> slots;
};

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
    return v[rng.below(v.size())];
}

SentenceGen make_sentence(Rng& rng) {
    SentenceGen s;
    auto noun = [&](bool annotate = true) {
        if (annotate) s.slots.emplace_back(s.tokens.size(), mask::TargetCategory::noun);
        s.tokens.push_back(pick(noun_bank(), rng));
    };
    auto verb = [&]() {
        s.slots.emplace_back(s.tokens.size(), mask::TargetCategory::verb);
        s.tokens.push_back(pick(verb_bank(), rng));
    };
    auto adj = [&]() { s.tokens.push_back(pick(adj_bank(), rng)); };
    auto word = [&](const char* w) { s.tokens.push_back(w); };

    switch (rng.below(6)) {
        case 0:
            word("the");
            adj();
            noun();
            verb();
            word("the");
            noun();
            break;
        case 1:
            word("a");
            noun();
            verb();
            word("every");
            noun();
            word("via");
            word("the");
            noun();
            break;
        case 2:
            word("analysts");
            word("report");
            word("that");
            word("the");
            noun();
            verb();
            word("the");
            adj();
            noun();
            break;
        case 3:
            word("when");
            word("the");
            noun();
            verb();
            word("the");
            noun();
            word(",");
            word("the");
            adj();
            noun();
            word("fails");
            break;
        case 4:
            word("the");
            noun();
            word("in");
            word("the");
            adj();
            noun();
            verb();
            word("its");
            noun();
            break;
        default:
            word("every");
            adj();
            noun();
            verb();
            word("a");
            noun();
            word("before");
            word("the");
            noun();
            break;
    }
    s.tokens.push_back(".");
    return s;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i && tokens[i] != "." && tokens[i] != ",") out += ' ';
        else if (i && (tokens[i] == "." || tokens[i] == ",")) {
            // punctuation binds to the previous word
        }
        out += tokens[i];
    }
    return out;
}

// byte span of token `index` inside join_tokens(tokens)
std::pair<std::size_t, std::size_t> token_span(const std::vector<std::string>& tokens,
                                               std::size_t index) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i && tokens[i] != "." && tokens[i] != ",") pos += 1;
        if (i == index) return {pos, pos + tokens[i].size()};
        pos += tokens[i].size();
    }
    throw_runtime("token_span: index out of range");
}

struct CodeGen {
    std::string content;
    bool vulnerable = false;
};

CodeGen make_function(Rng& rng, bool vulnerable) {
    static const std::vector<std::string> fn_names = {
        "parse_header", "copy_packet", "read_frame",  "handle_request", "load_config",
        "decode_block", "write_entry", "fetch_chunk", "scan_input",     "merge_buffers",
        "format_reply", "store_token", "check_magic", "route_message",  "dump_state"};
    static const std::vector<std::string> vars = {"src", "input", "data", "msg", "frame",
                                                  "req", "line",  "blob"};
    static const std::vector<std::string> vuln_lines = {
        "strcpy(buf, %V%);",
        "strcat(buf, %V%);",
        "sprintf(buf, \"%s\", %V%);",
        "gets(buf);",
        "memcpy(buf, %V%, n);",
    };
    static const std::vector<std::string> safe_lines = {
        "strncpy(buf, %V%, sizeof(buf) - 1);",
        "snprintf(buf, sizeof(buf), \"%s\", %V%);",
        "if (n < sizeof(buf)) memcpy(buf, %V%, n);",
        "fgets(buf, sizeof(buf), stdin);",
        "buf[0] = 0;",
    };
    const std::string fn = pick(fn_names, rng) + "_" + std::to_string(rng.below(100));
    const std::string var = pick(vars, rng);
    std::string body = vulnerable ? pick(vuln_lines, rng) : pick(safe_lines, rng);
    std::size_t at;
    while ((at = body.find("%V%")) != std::string::npos) body.replace(at, 3, var);

    std::ostringstream os;
    os << "int " << fn << "(const char *" << var << ", int n) {\n";
    os << "    char buf[" << (32 << rng.below(3)) << "];\n";
    if (rng.bernoulli(0.5)) os << "    int count = n;\n";
    os << "    " << body << "\n";
    if (rng.bernoulli(0.4)) os << "    // " << (vulnerable ? "copies caller data" : "bounded write") << "\n";
    os << "    return " << (rng.bernoulli(0.5) ? "n" : "0") << ";\n}\n";
    CodeGen g;
    g.content = os.str();
    g.vulnerable = vulnerable;
    return g;
}

NerSentence make_ner_sentence(const EntityPools& pools, Rng& rng) {
    NerSentence s;
    auto o = [&](const char* w) {
        s.tokens.push_back(w);
        s.labels.push_back("O");
    };
    auto ent1 = [&](const std::vector<std::string>& pool, const char* type) {
        s.tokens.push_back(pick(pool, rng));
        s.labels.push_back(std::string("B-") + type);
    };
    auto vuln = [&]() {
        const auto& v = pick(pools.vulnerability, rng);
        s.tokens.push_back(v.first);
        s.labels.push_back("B-Vulnerability");
        s.tokens.push_back(v.second);
        s.labels.push_back("I-Vulnerability");
    };

    switch (rng.below(5)) {
        case 0:
            o("the");
            ent1(pools.malware, "Malware");
            o("campaign");
            o("targeted");
            ent1(pools.organization, "Organization");
            o("through");
            o("a");
            vuln();
            break;
        case 1:
            o("a");
            vuln();
            o("in");
            ent1(pools.system, "System");
            o("enabled");
            o("remote");
            o("access");
            break;
        case 2:
            o("observed");
            o("indicators");
            o("included");
            ent1(pools.indicator, "Indicator");
            o("during");
            o("the");
            ent1(pools.malware, "Malware");
            o("outbreak");
            break;
        case 3:
            ent1(pools.organization, "Organization");
            o("patched");
            ent1(pools.system, "System");
            o("against");
            ent1(pools.malware, "Malware");
            break;
        default:
            o("telemetry");
            o("linked");
            ent1(pools.indicator, "Indicator");
            o("to");
            o("a");
            vuln();
            o("in");
            ent1(pools.system, "System");
            break;
    }
    o(".");
    return s;
}

std::string doc_id(const char* prefix, int n) { return std::string(prefix) + std::to_string(n); }

std::size_t dup_rate_to_count(double rate, std::size_t eligible) {
    return static_cast<std::size_t>(rate * static_cast<double>(eligible) + 0.5);
}

}  // namespace

void SynthSpec::validate() const {
    for (const auto& [cat, n] : docs_per_category)
        if (n < 0) throw_config("synth: negative document count");
    if (dup_rate < 0.0 || dup_rate > 1.0) throw_config("synth: dup_rate must be in [0,1]");
    if (eval_queries > rel_pairs)
        throw_config("synth: eval_queries cannot exceed rel_pairs");
    if (rel_pairs < 0 || adversarial_train < 0 || adversarial_eval < 0)
        throw_config("synth: negative counts");
}

SynthResult generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    SynthResult out;
    EntityPools pools;
    Rng rng = derive_rng(spec.seed, "synth");

    // --- plain corpus documents per category -------------------------------
    std::vector<std::size_t> dup_eligible;
    for (const auto& [cat, count] : spec.docs_per_category) {
        for (int i = 0; i < count; ++i) {
            Document d;
            d.id = corpus::to_string(cat) + "_" + std::to_string(i);
            d.source = cat;
            bool code_doc = cat == Category::code_vuln ||
                            (cat == Category::dialogue && rng.bernoulli(0.4));
            if (code_doc) {
                d.modality = Modality::code;
                CodeGen g = make_function(rng, rng.bernoulli(0.5));
                d.content = g.content;
            } else {
                d.modality = Modality::text;
                int n_sent = 4 + static_cast<int>(rng.below(5));
                std::string content;
                for (int s = 0; s < n_sent; ++s) {
                    if (s) content += ' ';
                    content += join_tokens(make_sentence(rng).tokens);
                }
                // web docs carry mild noise the normalizer has to clean up
                if (cat == Category::web && rng.bernoulli(0.3)) content += "  \t ";
                d.content = content;
            }
            dup_eligible.push_back(out.raw_docs.size());
            out.raw_docs.push_back(std::move(d));
        }
    }

    // --- relevance pairs, distractors, adversarial fixtures ----------------
    int total_pairs = spec.rel_pairs;
    for (int i = 0; i < total_pairs; ++i) {
        std::string entity = "cve_2026_" + std::to_string(1000 + i);
        std::string component =
            pick(component_bank(), rng) + std::to_string(rng.below(10));
        std::string noun1 = pick(noun_bank(), rng);
        std::string verb = pick(verb_bank(), rng);

        TrainPair p;
        p.query_id = doc_id("q", i);
        p.doc_id = doc_id("rel", i);
        p.query = "how does " + entity + " affect " + component + " deployments";
        p.doc = entity + " is a critical flaw in " + component + " that " + verb +
                " the " + noun1 + " layer. vendors shipped a patch for " + component + ".";
        out.train_pairs.push_back(p);

        Document d;
        d.id = p.doc_id;
        d.source = Category::instruction;
        d.modality = Modality::text;
        d.content = p.doc;
        out.retrieval_docs.push_back(d);
        out.qrels[p.query_id] = {p.doc_id};
        if (i < spec.eval_queries) out.queries.emplace_back(p.query_id, p.query);

        out.cross_pairs.push_back(CrossPair{p.query, p.doc, 1});
        if (i > 0)
            out.cross_pairs.push_back(
                CrossPair{p.query, out.train_pairs[static_cast<std::size_t>(i - 1)].doc, 0});
    }
    for (int i = 0; i < spec.distractor_docs; ++i) {
        Document d;
        d.id = doc_id("dis", i);
        d.source = Category::web;
        d.modality = Modality::text;
        d.content = join_tokens(make_sentence(rng).tokens) + " " +
                    join_tokens(make_sentence(rng).tokens);
        out.retrieval_docs.push_back(d);
    }

    // adversarial decoys: near-verbatim copies of the query plus a marker the
    // cross encoder can learn; positives are ordinary paraphrases
    auto make_adversarial = [&](int index, bool train_fixture) {
        std::string entity = "cve_2027_" + std::to_string(2000 + index +
                                                          (train_fixture ? 0 : 5000));
        std::string component = pick(component_bank(), rng) + std::to_string(rng.below(10));
        std::string qid = train_fixture ? doc_id("advtq", index) : doc_id("advq", index);
        std::string query = "mitigation guidance for " + entity + " in " + component;
        std::string pos_id = (train_fixture ? doc_id("advtp", index) : doc_id("advp", index));
        std::string decoy_id = (train_fixture ? doc_id("advtd", index) : doc_id("advd", index));
        std::string positive = "apply the vendor fix so " + component +
                               " is protected against " + entity + " going forward.";
        std::string decoy = "mitigation guidance for " + entity + " in " + component +
                            " archived duplicate notice withdrawn";
        Document dp, dd;
        dp.id = pos_id;
        dp.source = Category::instruction;
        dp.modality = Modality::text;
        dp.content = positive;
        dd.id = decoy_id;
        dd.source = Category::web;
        dd.modality = Modality::text;
        dd.content = decoy;
        out.retrieval_docs.push_back(dp);
        out.retrieval_docs.push_back(dd);
        if (train_fixture) {
            out.cross_pairs.push_back(CrossPair{query, positive, 1});
            out.cross_pairs.push_back(CrossPair{query, decoy, 0});
        } else {
            out.adv_queries.emplace_back(qid, query);
            out.adv_qrels[qid] = {pos_id};
        }
    };
    for (int i = 0; i < spec.adversarial_train; ++i) make_adversarial(i, true);
    for (int i = 0; i < spec.adversarial_eval; ++i) make_adversarial(i, false);

    // retrieval docs join the corpus so the vocabulary covers their tokens
    for (const Document& d : out.retrieval_docs) out.raw_docs.push_back(d);

    // --- NER sentences (also corpus documents, train split) ----------------
    auto emit_ner = [&](int count, std::vector<NerSentence>& dst, const char* prefix) {
        for (int i = 0; i < count; ++i) {
            NerSentence s = make_ner_sentence(pools, rng);
            Document d;
            d.id = doc_id(prefix, i);
            d.source = Category::reasoning;
            d.modality = Modality::text;
            d.content = join_tokens(s.tokens);
            out.raw_docs.push_back(d);
            dst.push_back(std::move(s));
        }
    };
    emit_ner(spec.ner_train, out.ner_train, "nertrain");
    emit_ner(spec.ner_test, out.ner_test, "nertest");

    // --- vulnerability classification samples ------------------------------
    auto emit_vuln = [&](int count, std::vector<VulnSample>& dst, const char* prefix) {
        for (int i = 0; i < count; ++i) {
            CodeGen g = make_function(rng, i % 2 == 0);
            VulnSample v;
            v.content = g.content;
            v.label = g.vulnerable ? 1 : 0;
            dst.push_back(v);
            Document d;
            d.id = doc_id(prefix, i);
            d.source = Category::code_vuln;
            d.modality = Modality::code;
            d.content = g.content;
            out.raw_docs.push_back(d);
        }
    };
    emit_vuln(spec.vuln_train, out.vuln_train, "vulntrain");
    emit_vuln(spec.vuln_test, out.vuln_test, "vulntest");

    // --- planted near-duplicates -------------------------------------------
    // a one-or-two-token tail keeps shingle Jaccard high enough to be caught
    // on even the shortest documents
    std::size_t dup_count = dup_rate_to_count(spec.dup_rate, dup_eligible.size());
    for (std::size_t i = 0; i < dup_count; ++i) {
        const Document& orig = out.raw_docs[dup_eligible[i]];
        Document dup = orig;
        dup.id = orig.id + "__dup";
        if (dup.modality == Modality::text) {
            dup.content += " updated.";
        } else {
            dup.content += "// rev\n";
        }
        out.planted_duplicates.emplace_back(orig.id, dup.id);
        out.raw_docs.push_back(std::move(dup));
    }

    // --- dataset split: test docs feed MLM eval records and held-out ppl ---
    std::set<std::string> test_ids;
    for (const auto& [cat, count] : spec.docs_per_category) {
        int reserve = std::max(1, count / 6);
        for (int i = 0; i < reserve && i < count; ++i)
            test_ids.insert(corpus::to_string(cat) + "_" + std::to_string(i));
    }
    for (int i = 0; i < spec.ner_test; ++i) test_ids.insert(doc_id("nertest", i));
    for (int i = 0; i < spec.vuln_test; ++i) test_ids.insert(doc_id("vulntest", i));
    for (const Document& d : out.raw_docs) {
        if (test_ids.count(d.id)) out.split.test.insert(d.id);
        else out.split.train.insert(d.id);
    }

    // --- MLM eval records from test-split sentences -------------------------
    std::int64_t nouns = 0, verbs = 0, code = 0;
    for (const Document& d : out.raw_docs) {
        if (!out.split.test.count(d.id)) continue;
        if (d.modality == Modality::text) {
            if (nouns >= spec.eval_nouns && verbs >= spec.eval_verbs) continue;
            // regenerate a fresh annotated sentence rather than re-parsing
            SentenceGen s = make_sentence(rng);
            if (s.slots.empty()) continue;
            bool want_verb = verbs < spec.eval_verbs;
            const std::pair<std::size_t, mask::TargetCategory>* slot = nullptr;
            for (const auto& sl : s.slots) {
                if (want_verb && sl.second == mask::TargetCategory::verb) {
                    slot = &sl;
                    break;
                }
                if (!want_verb && sl.second == mask::TargetCategory::noun) {
                    slot = &sl;
                    break;
                }
            }
            if (!slot) slot = &s.slots.front();
            mask::EvalRecord r;
            r.content = join_tokens(s.tokens);
            r.modality = Modality::text;
            auto span = token_span(s.tokens, slot->first);
            r.target_start = span.first;
            r.target_end = span.second;
            r.category = slot->second;
            r.gold = s.tokens[slot->first];
            r.doc_id = d.id;
            (r.category == mask::TargetCategory::verb ? verbs : nouns) += 1;
            out.eval_records.push_back(std::move(r));
        } else if (code < spec.eval_code) {
            auto ct = ingest::tokenize_code(d.content);
            // choose a function name, identifier, or operator target
            int pick_idx = -1;
            int want = static_cast<int>(code % 3);  // rotate target classes
            auto cls_of = [&](std::size_t i) {
                return ct.lexed.tokens[static_cast<std::size_t>(ct.tokens[i].lex_index)].cls;
            };
            for (std::size_t i = 0; i < ct.tokens.size(); ++i) {
                lex::TokClass c = cls_of(i);
                if (want == 0 && c == lex::TokClass::function_name) pick_idx = (int)i;
                if (want == 1 && c == lex::TokClass::identifier) pick_idx = (int)i;
                if (want == 2 && c == lex::TokClass::op) pick_idx = (int)i;
                if (pick_idx >= 0) break;
            }
            if (pick_idx < 0) continue;
            const auto& tok = ct.tokens[static_cast<std::size_t>(pick_idx)];
            lex::TokClass c = cls_of(static_cast<std::size_t>(pick_idx));
            mask::EvalRecord r;
            r.content = d.content;
            r.modality = Modality::code;
            r.target_start = tok.begin;
            r.target_end = tok.end;
            r.gold = tok.text;
            r.doc_id = d.id;
            r.category = c == lex::TokClass::function_name ? mask::TargetCategory::function_name
                         : c == lex::TokClass::identifier  ? mask::TargetCategory::identifier
                                                           : mask::TargetCategory::op;
            out.eval_records.push_back(std::move(r));
            ++code;
        }
    }

    // --- filter assets -------------------------------------------------------
    out.lexicon = {"malware", "exploit",  "vulnerability", "firewall", "ransomware",
                   "botnet",  "phishing", "breach",        "patch",    "backdoor",
                   "trojan",  "payload",  "credential",    "rootkit",  "overflow"};
    for (int i = 0; i < 30; ++i) {
        filterbal::LabeledDoc rel;
        rel.content = join_tokens(make_sentence(rng).tokens);
        rel.label = filterbal::Label::relevant;
        out.seed_labels.push_back(rel);
        filterbal::LabeledDoc irr;
        static const char* offtopic[] = {
            "the recipe calls for flour sugar and butter",
            "the orchestra rehearsed the symphony all evening",
            "the garden needs watering twice a week in summer",
            "the championship match went into extra time",
            "fresh pasta tastes better with homemade sauce",
        };
        irr.content = offtopic[rng.below(std::size(offtopic))];
        irr.label = filterbal::Label::irrelevant;
        out.seed_labels.push_back(irr);
    }

    return out;
}

void write_synthetic(const std::string& dir, const SynthResult& result) {
    std::filesystem::create_directories(dir);
    auto path = [&](const char* name) { return dir + "/" + name; };

    corpus::save_corpus(path("raw.jsonl"), result.raw_docs);
    corpus::save_split(path("split.json"), result.split);

    std::ostringstream lex;
    for (const auto& term : result.lexicon) lex << term << '\n';
    write_file(path("lexicon.txt"), lex.str());

    std::ostringstream labels;
    for (const auto& d : result.seed_labels) {
        json j = {{"content", d.content},
                  {"label", d.label == filterbal::Label::relevant ? "relevant" : "irrelevant"}};
        labels << j.dump() << '\n';
    }
    write_file(path("seed_labels.jsonl"), labels.str());

    mask::save_eval_records(path("eval_records.jsonl"), result.eval_records);
    corpus::save_corpus(path("retrieval_docs.jsonl"), result.retrieval_docs);

    auto write_queries = [&](const char* name,
                             const std::vector<std::pair<std::string, std::string>>& qs) {
        std::ostringstream os;
        for (const auto& [id, text] : qs) {
            json j = {{"query_id", id}, {"content", text}};
            os << j.dump() << '\n';
        }
        write_file(path(name), os.str());
    };
    write_queries("queries.jsonl", result.queries);
    write_queries("adversarial_queries.jsonl", result.adv_queries);
    retrieval::save_qrels(path("qrels.jsonl"), result.qrels);
    retrieval::save_qrels(path("adversarial_qrels.jsonl"), result.adv_qrels);

    std::ostringstream pairs;
    for (const auto& p : result.train_pairs) {
        json j = {{"query_id", p.query_id},
                  {"query", p.query},
                  {"doc_id", p.doc_id},
                  {"doc", p.doc}};
        pairs << j.dump() << '\n';
    }
    write_file(path("pairs_train.jsonl"), pairs.str());

    std::ostringstream cross;
    for (const auto& p : result.cross_pairs) {
        json j = {{"query", p.query}, {"doc", p.doc}, {"label", p.label}};
        cross << j.dump() << '\n';
    }
    write_file(path("cross_train.jsonl"), cross.str());

    auto write_ner = [&](const char* name, const std::vector<NerSentence>& data) {
        std::ostringstream os;
        for (const auto& s : data) {
            json j = {{"tokens", s.tokens}, {"labels", s.labels}};
            os << j.dump() << '\n';
        }
        write_file(path(name), os.str());
    };
    write_ner("ner_train.jsonl", result.ner_train);
    write_ner("ner_test.jsonl", result.ner_test);

    auto write_vuln = [&](const char* name, const std::vector<VulnSample>& data) {
        std::ostringstream os;
        for (const auto& v : data) {
            json j = {{"content", v.content}, {"label", v.label}};
            os << j.dump() << '\n';
        }
        write_file(path(name), os.str());
    };
    write_vuln("vuln_train.jsonl", result.vuln_train);
    write_vuln("vuln_test.jsonl", result.vuln_test);

    json truth;
    json dups = json::array();
    for (const auto& [orig, dup] : result.planted_duplicates)
        dups.push_back({{"kept", orig}, {"dup", dup}});
    truth["planted_duplicates"] = dups;
    truth["counts"] = {{"raw_docs", result.raw_docs.size()},
                       {"eval_records", result.eval_records.size()},
                       {"train_pairs", result.train_pairs.size()},
                       {"queries", result.queries.size()},
                       {"ner_train", result.ner_train.size()},
                       {"vuln_train", result.vuln_train.size()}};
    write_file(path("truth.json"), truth.dump(2) + "\n");
}

std::vector<NerSentence> load_ner_file(const std::string& path) {
    std::vector<NerSentence> out;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        NerSentence s;
        for (const auto& t : j.at("tokens")) s.tokens.push_back(t.get<std::string>());
        for (const auto& l : j.at("labels")) s.labels.push_back(l.get<std::string>());
        if (s.tokens.size() != s.labels.size())
            throw_runtime("ner file: tokens/labels length mismatch in " + path);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<VulnSample> load_vuln_file(const std::string& path) {
    std::vector<VulnSample> out;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        out.push_back(VulnSample{j.at("content").get<std::string>(),
                                 j.at("label").get<int>()});
    }
    return out;
}

std::vector<TrainPair> load_train_pairs(const std::string& path) {
    std::vector<TrainPair> out;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        TrainPair p;
        p.query_id = j.at("query_id").get<std::string>();
        p.query = j.at("query").get<std::string>();
        p.doc_id = j.at("doc_id").get<std::string>();
        p.doc = j.at("doc").get<std::string>();
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<CrossPair> load_cross_pairs(const std::string& path) {
    std::vector<CrossPair> out;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        out.push_back(CrossPair{j.at("query").get<std::string>(),
                                j.at("doc").get<std::string>(), j.at("label").get<int>()});
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> load_queries(const std::string& path) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        out.emplace_back(j.at("query_id").get<std::string>(),
                         j.at("content").get<std::string>());
    }
    return out;
}

}  // namespace forge::synth
