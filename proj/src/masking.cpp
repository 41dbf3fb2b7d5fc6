#include "forge/masking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "forge/lex.hpp"
#include "forge/util.hpp"

namespace forge::mask {

using ingest::Tokenizer;

void MaskingConfig::validate() const {
    if (!(mlm_prob > 0.0 && mlm_prob < 1.0) && mlm_prob != 1.0)
        throw_config("mlm_prob must be in (0,1]");
    if (std::abs(mask_frac + random_frac + keep_frac - 1.0) > 1e-9)
        throw_config("replacement policy fractions must sum to 1");
    if (mask_frac < 0 || random_frac < 0 || keep_frac < 0)
        throw_config("replacement policy fractions must be nonnegative");
}

namespace {

// one policy draw: 0=mask, 1=random, 2=keep
int draw_policy(const MaskingConfig& cfg, Rng& rng) {
    double u = rng.uniform();
    if (u < cfg.mask_frac) return 0;
    if (u < cfg.mask_frac + cfg.random_frac) return 1;
    return 2;
}

int random_regular_token(int vocab_size, Rng& rng) {
    int span = vocab_size - Tokenizer::num_specials;
    if (span <= 0) throw_config("vocabulary has no regular tokens");
    return Tokenizer::num_specials + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
}

void apply_selection(MaskedExample& ex, const std::vector<std::size_t>& positions,
                     const MaskingConfig& cfg, int vocab_size, Rng& rng) {
    int policy = draw_policy(cfg, rng);
    for (std::size_t p : positions) {
        ex.labels[p] = ex.input_ids[p];
        switch (policy) {
            case 0: ex.input_ids[p] = Tokenizer::MASK; break;
            case 1: ex.input_ids[p] = random_regular_token(vocab_size, rng); break;
            default: break;  // keep
        }
        ex.masked_positions.push_back(p);
    }
}

}  // namespace

MaskedExample mask_dynamic(const ingest::TokenSequence& seq, const MaskingConfig& cfg,
                           int vocab_size, Rng& rng) {
    cfg.validate();
    MaskedExample ex;
    ex.input_ids = seq.ids;
    ex.labels.assign(seq.ids.size(), kIgnore);
    bool any_maskable = false;
    for (std::size_t p = 0; p < seq.ids.size(); ++p) {
        if (Tokenizer::is_special(seq.ids[p])) continue;
        any_maskable = true;
        if (rng.uniform() < cfg.mlm_prob) apply_selection(ex, {p}, cfg, vocab_size, rng);
    }
    if (!any_maskable)
        throw ForgeError(Status::runtime, "mask_dynamic: sequence has no maskable positions");
    std::sort(ex.masked_positions.begin(), ex.masked_positions.end());
    return ex;
}

MaskedExample mask_code(const ingest::TokenSequence& seq, const ingest::CodeTokens& code,
                        const MaskingConfig& cfg, int vocab_size, Rng& rng) {
    cfg.validate();
    // payload position p (0-based within code.tokens) sits at sequence index p+1
    std::size_t payload = 0;
    for (int id : seq.ids)
        if (!Tokenizer::is_special(id)) ++payload;

    // group encoder positions by lexeme, keeping only eligible unit classes
    std::map<int, std::vector<std::size_t>> unit_positions;
    for (std::size_t p = 0; p < payload && p < code.tokens.size(); ++p) {
        int li = code.tokens[p].lex_index;
        if (li < 0) continue;
        lex::TokClass cls = code.lexed.tokens[static_cast<std::size_t>(li)].cls;
        if (cls == lex::TokClass::keyword || cls == lex::TokClass::delimiter ||
            cls == lex::TokClass::comment || cls == lex::TokClass::whitespace)
            continue;
        unit_positions[li].push_back(p + 1);
    }
    if (unit_positions.empty())
        throw ForgeError(Status::runtime, "mask_code: no eligible lexemes to mask");

    MaskedExample ex;
    ex.input_ids = seq.ids;
    ex.labels.assign(seq.ids.size(), kIgnore);
    for (const auto& [li, positions] : unit_positions) {
        if (rng.uniform() < cfg.mlm_prob)
            apply_selection(ex, positions, cfg, vocab_size, rng);
    }
    std::sort(ex.masked_positions.begin(), ex.masked_positions.end());
    return ex;
}

std::string to_string(TargetCategory c) {
    switch (c) {
        case TargetCategory::noun: return "noun";
        case TargetCategory::verb: return "verb";
        case TargetCategory::identifier: return "identifier";
        case TargetCategory::function_name: return "function_name";
        case TargetCategory::op: return "operator";
    }
    return "?";
}

TargetCategory target_category_from_string(const std::string& s) {
    if (s == "noun") return TargetCategory::noun;
    if (s == "verb") return TargetCategory::verb;
    if (s == "identifier") return TargetCategory::identifier;
    if (s == "function_name") return TargetCategory::function_name;
    if (s == "operator") return TargetCategory::op;
    throw_config("unknown eval target category: " + s);
}

MaskedExample make_eval_example(const EvalRecord& record, const ingest::Tokenizer& tk,
                                int max_len) {
    bool is_code = record.modality == corpus::Modality::code;
    bool code_category = record.category == TargetCategory::identifier ||
                         record.category == TargetCategory::function_name ||
                         record.category == TargetCategory::op;
    if (is_code != code_category)
        throw_protocol("eval record category " + to_string(record.category) +
                       " is inconsistent with modality " + corpus::to_string(record.modality));
    if (record.target_end <= record.target_start || record.target_end > record.content.size())
        throw_protocol("eval record target span is out of range");

    std::vector<ingest::TokenSpan> spans;
    const lex::LexResult* lexed = nullptr;
    ingest::CodeTokens code;
    if (is_code) {
        code = ingest::tokenize_code(record.content);
        spans = code.tokens;
        lexed = &code.lexed;
    } else {
        spans = ingest::tokenize_text(record.content, tk.casing);
    }

    // the target span must align exactly with token boundaries
    std::vector<std::size_t> target_tokens;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (spans[i].begin >= record.target_start && spans[i].end <= record.target_end)
            target_tokens.push_back(i);
        else if (spans[i].begin < record.target_end && spans[i].end > record.target_start)
            throw_protocol("eval target span does not align with token boundaries");
    }
    if (target_tokens.empty() || spans[target_tokens.front()].begin != record.target_start ||
        spans[target_tokens.back()].end != record.target_end)
        throw_protocol("eval target span does not align with token boundaries");

    if (is_code) {
        // targeted masking must not touch preserved structural classes
        for (std::size_t ti : target_tokens) {
            int li = spans[ti].lex_index;
            lex::TokClass cls = lexed->tokens[static_cast<std::size_t>(li)].cls;
            if (cls == lex::TokClass::keyword || cls == lex::TokClass::delimiter ||
                cls == lex::TokClass::comment)
                throw_protocol("protocol violation: code eval target lexes to preserved class " +
                               lex::to_string(cls));
        }
    }

    std::vector<std::string> tokens;
    tokens.reserve(spans.size());
    for (const auto& s : spans) tokens.push_back(s.text);
    ingest::TokenSequence seq = ingest::encode(tk, tokens, max_len);

    // gold surface must tokenize to the same number of tokens as the span
    auto gold_tokens = ingest::tokenize(record.gold, record.modality, tk.casing);
    if (gold_tokens.size() != target_tokens.size())
        throw_protocol("gold surface does not tokenize to the target span length");

    MaskedExample ex;
    ex.input_ids = seq.ids;
    ex.labels.assign(seq.ids.size(), kIgnore);
    for (std::size_t k = 0; k < target_tokens.size(); ++k) {
        std::size_t pos = target_tokens[k] + 1;  // CLS offset
        if (pos + 1 >= ex.input_ids.size())
            throw_protocol("eval target was truncated away by max_len");
        ex.input_ids[pos] = Tokenizer::MASK;
        ex.labels[pos] = tk.id_of(gold_tokens[k]);
        ex.masked_positions.push_back(pos);
    }
    return ex;
}

PosTag heuristic_tag(const std::string& word) {
    static const std::unordered_set<std::string> stop = {
        "the", "a",  "an",  "of",   "to",   "in", "on",  "via", "and", "or",   "with",
        "for", "by", "from", "at",  "as",   "is", "are", "was", "were", "this", "that",
        "its", "be", "been", "has", "have", "had", "will", "would", "can", "could", "into",
    };
    static const std::unordered_set<std::string> verbs = {
        "encrypt",  "decrypt",   "exploit",  "bypass",   "execute", "inject",   "scan",
        "patch",    "mitigate",  "deploy",   "detect",   "block",   "steal",    "compromise",
        "infect",   "exfiltrate", "escalate", "spoof",   "intercept", "launch", "install",
        "propagate", "connect",  "download", "upload",   "send",    "receive",  "target",
        "harden",   "monitor",   "disable",  "enable",   "trigger", "overwrite", "corrupt",
        "flood",    "hijack",    "probe",    "leak",     "validate", "sanitize", "quarantine",
    };
    if (word.empty() || !std::isalpha(static_cast<unsigned char>(word[0]))) return PosTag::other;
    std::string w = word;
    for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (stop.count(w)) return PosTag::other;
    auto strip_s = [&](const std::string& x) {
        return (x.size() > 2 && x.back() == 's') ? x.substr(0, x.size() - 1) : x;
    };
    if (verbs.count(w) || verbs.count(strip_s(w))) return PosTag::verb;
    auto ends_with = [&](const char* suf) {
        std::string_view sv = suf;
        return w.size() > sv.size() + 1 && w.compare(w.size() - sv.size(), sv.size(), sv) == 0;
    };
    if (ends_with("ates") || ends_with("izes") || ends_with("ifies")) return PosTag::verb;
    return PosTag::noun;
}

namespace {

struct SentenceSpan {
    std::size_t begin;
    std::size_t end;
};

std::vector<SentenceSpan> split_sentences(const std::string& text) {
    std::vector<SentenceSpan> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '.' || text[i] == '!' || text[i] == '?') {
            out.push_back({start, i + 1});
            start = i + 1;
        }
    }
    if (start < text.size()) out.push_back({start, text.size()});
    return out;
}

}  // namespace

std::pair<std::vector<EvalRecord>, EvalCensus> generate_eval_set(
    const std::vector<corpus::Document>& docs, const EvalSetRequest& request) {
    std::vector<EvalRecord> records;
    std::int64_t nouns = 0, verbs = 0, code = 0;

    for (const corpus::Document& d : docs) {
        if (d.modality == corpus::Modality::code) {
            if (code >= request.code) continue;
            auto ct = ingest::tokenize_code(d.content);
            // prefer function names, then identifiers, then operators
            int best = -1;
            auto rank = [](lex::TokClass c) {
                if (c == lex::TokClass::function_name) return 0;
                if (c == lex::TokClass::identifier) return 1;
                if (c == lex::TokClass::op) return 2;
                return 9;
            };
            for (std::size_t i = 0; i < ct.tokens.size(); ++i) {
                lex::TokClass cls =
                    ct.lexed.tokens[static_cast<std::size_t>(ct.tokens[i].lex_index)].cls;
                if (rank(cls) == 9) continue;
                if (best < 0 || rank(cls) < rank(ct.lexed.tokens[static_cast<std::size_t>(
                                    ct.tokens[static_cast<std::size_t>(best)].lex_index)].cls))
                    best = static_cast<int>(i);
            }
            if (best < 0) continue;
            const auto& tok = ct.tokens[static_cast<std::size_t>(best)];
            lex::TokClass cls =
                ct.lexed.tokens[static_cast<std::size_t>(tok.lex_index)].cls;
            EvalRecord r;
            r.content = d.content;
            r.modality = corpus::Modality::code;
            r.target_start = tok.begin;
            r.target_end = tok.end;
            r.gold = tok.text;
            r.doc_id = d.id;
            r.category = cls == lex::TokClass::function_name ? TargetCategory::function_name
                         : cls == lex::TokClass::identifier  ? TargetCategory::identifier
                                                             : TargetCategory::op;
            records.push_back(std::move(r));
            ++code;
        } else {
            for (const SentenceSpan& sent : split_sentences(d.content)) {
                bool need_noun = nouns < request.nouns;
                bool need_verb = verbs < request.verbs;
                if (!need_noun && !need_verb) break;
                std::string sentence = d.content.substr(sent.begin, sent.end - sent.begin);
                auto spans = ingest::tokenize_text(sentence, ingest::Casing::preserve);
                const ingest::TokenSpan* noun_pick = nullptr;
                const ingest::TokenSpan* verb_pick = nullptr;
                for (const auto& t : spans) {
                    PosTag tag = heuristic_tag(t.text);
                    if (tag == PosTag::noun && !noun_pick) noun_pick = &t;
                    if (tag == PosTag::verb && !verb_pick) verb_pick = &t;
                }
                // one target per record; verbs are rarer, fill them first
                const ingest::TokenSpan* pick = nullptr;
                TargetCategory cat = TargetCategory::noun;
                if (need_verb && verb_pick) {
                    pick = verb_pick;
                    cat = TargetCategory::verb;
                } else if (need_noun && noun_pick) {
                    pick = noun_pick;
                    cat = TargetCategory::noun;
                }
                if (!pick) continue;
                EvalRecord r;
                r.content = sentence;
                r.modality = corpus::Modality::text;
                r.target_start = pick->begin;
                r.target_end = pick->end;
                r.gold = pick->text;
                r.doc_id = d.id;
                r.category = cat;
                records.push_back(std::move(r));
                (cat == TargetCategory::verb ? verbs : nouns) += 1;
            }
        }
    }

    EvalCensus census = census_of(records);
    if (nouns < request.nouns)
        census.shortfalls.push_back("nouns: requested " + std::to_string(request.nouns) +
                                    ", produced " + std::to_string(nouns));
    if (verbs < request.verbs)
        census.shortfalls.push_back("verbs: requested " + std::to_string(request.verbs) +
                                    ", produced " + std::to_string(verbs));
    if (code < request.code)
        census.shortfalls.push_back("code: requested " + std::to_string(request.code) +
                                    ", produced " + std::to_string(code));
    return {records, census};
}

EvalCensus census_of(const std::vector<EvalRecord>& records) {
    EvalCensus c;
    std::set<std::string> nouns, verbs, idents, ops;
    for (const EvalRecord& r : records) {
        switch (r.category) {
            case TargetCategory::noun:
                ++c.noun_records;
                nouns.insert(r.gold);
                break;
            case TargetCategory::verb:
                ++c.verb_records;
                verbs.insert(r.gold);
                break;
            case TargetCategory::identifier:
            case TargetCategory::function_name:
                ++c.code_records;
                idents.insert(r.gold);
                break;
            case TargetCategory::op:
                ++c.code_records;
                ops.insert(r.gold);
                break;
        }
    }
    c.unique_nouns = static_cast<std::int64_t>(nouns.size());
    c.unique_verbs = static_cast<std::int64_t>(verbs.size());
    c.unique_identifiers = static_cast<std::int64_t>(idents.size());
    c.unique_operators = static_cast<std::int64_t>(ops.size());
    return c;
}

std::vector<EvalRecord> load_eval_records(const std::string& path) {
    std::vector<EvalRecord> out;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        EvalRecord r;
        r.content = j.at("content").get<std::string>();
        r.modality = corpus::modality_from_string(j.at("modality").get<std::string>());
        r.target_start = j.at("target_start").get<std::size_t>();
        r.target_end = j.at("target_end").get<std::size_t>();
        r.category = target_category_from_string(j.at("category").get<std::string>());
        r.gold = j.at("gold").get<std::string>();
        if (j.contains("doc_id")) r.doc_id = j["doc_id"].get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

void save_eval_records(const std::string& path, const std::vector<EvalRecord>& records) {
    std::ostringstream out;
    for (const EvalRecord& r : records) {
        nlohmann::json j = {{"content", r.content},
                            {"modality", corpus::to_string(r.modality)},
                            {"target_start", r.target_start},
                            {"target_end", r.target_end},
                            {"category", to_string(r.category)},
                            {"gold", r.gold}};
        if (!r.doc_id.empty()) j["doc_id"] = r.doc_id;
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

std::string census_to_json(const EvalCensus& c) {
    nlohmann::json j = {
        {"schema", "census_mlm_eval"},
        {"nouns", {{"sentences", c.noun_records}, {"unique", c.unique_nouns}}},
        {"verbs", {{"sentences", c.verb_records}, {"unique", c.unique_verbs}}},
        {"code",
         {{"snippets", c.code_records},
          {"unique_identifiers", c.unique_identifiers},
          {"unique_operators", c.unique_operators}}},
    };
    if (!c.shortfalls.empty()) j["shortfalls"] = c.shortfalls;
    return j.dump(2) + "\n";
}

}  // namespace forge::mask
