#include "forge/encoder.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "forge/util.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace forge::nn {

using nlohmann::json;

void EncoderConfig::validate() const {
    if (vocab_size < ingest::Tokenizer::num_specials + 1)
        throw_config("encoder: vocab_size must include specials plus at least one token");
    if (d_model < 1 || n_heads < 1 || n_layers < 1 || d_ff < 1)
        throw_config("encoder: all dimensions must be >= 1");
    if (d_model % n_heads != 0) throw_config("encoder: d_model must be divisible by n_heads");
    if (max_len < 2) throw_config("encoder: max_len must be >= 2");
    if (dropout < 0.0 || dropout >= 1.0) throw_config("encoder: dropout must be in [0,1)");
    if (n_token_labels < 1) throw_config("encoder: n_token_labels must be >= 1");
}

double lr_at(std::int64_t step, const TrainConfig& cfg, bool* clamped) {
    if (clamped) *clamped = false;
    if (step < 0) throw_config("lr_at: negative step");
    const double base = cfg.learning_rate;
    const std::int64_t warm = cfg.warmup_steps, total = cfg.total_steps;
    if (step > total) {
        if (clamped) *clamped = true;
        return 0.0;
    }
    if (warm > 0 && step <= warm) return base * static_cast<double>(step) / static_cast<double>(warm);
    if (total <= warm) return base;
    return base * static_cast<double>(total - step) / static_cast<double>(total - warm);
}

const std::vector<std::string>& bio_label_set() {
    static const std::vector<std::string> labels = {
        "O",
        "B-Malware","I-Malware",
        "B-Indicator","I-Indicator",
        "B-System","I-System",
        "B-Organization","I-Organization",
        "B-Vulnerability","I-Vulnerability",
    };
    return labels;
}

int bio_label_id(const std::string& tag) {
    const auto& labels = bio_label_set();
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == tag) return static_cast<int>(i);
    throw_config("unknown BIO label: " + tag);
}

namespace {

json config_to_json(const EncoderConfig& c) {
    return json{{"vocab_size", c.vocab_size}, {"d_model", c.d_model},
                {"n_heads", c.n_heads},       {"n_layers", c.n_layers},
                {"d_ff", c.d_ff},             {"max_len", c.max_len},
                {"dropout", c.dropout},       {"tie_mlm", c.tie_mlm},
                {"n_token_labels", c.n_token_labels}};
}

EncoderConfig config_from_json(const json& j) {
    EncoderConfig c;
    c.vocab_size = j.at("vocab_size").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.n_layers = j.at("n_layers").get<int>();
    c.d_ff = j.at("d_ff").get<int>();
    c.max_len = j.at("max_len").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.tie_mlm = j.at("tie_mlm").get<bool>();
    c.n_token_labels = j.at("n_token_labels").get<int>();
    return c;
}

constexpr char kMagic[9] = "FORGECKP";

}  // namespace

void save_checkpoint(const std::string& path, const Params<float>& params,
                     const std::string& vocab_hash) {
    json tensors = json::array();
    std::size_t offset = 0;
    params.visit([&](const std::string& name, const Tensor<float>& t) {
        tensors.push_back({{"name", name}, {"rows", t.rows}, {"cols", t.cols},
                           {"offset", offset}});
        offset += t.count();
    });
    json header = {{"format_version", 1},
                   {"config", config_to_json(params.cfg)},
                   {"vocab_hash", vocab_hash},
                   {"dtype", "f32le"},
                   {"tensors", tensors}};
    std::string htxt = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_runtime("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 8);
    std::uint64_t hlen = htxt.size();
    out.write(reinterpret_cast<const char*>(&hlen), 8);
    out.write(htxt.data(), static_cast<std::streamsize>(htxt.size()));
    params.visit([&](const std::string&, const Tensor<float>& t) {
        out.write(reinterpret_cast<const char*>(t.a.data()),
                  static_cast<std::streamsize>(t.count() * sizeof(float)));
    });
    if (!out) throw_runtime("short write on checkpoint: " + path);
}

Params<float> load_checkpoint(const std::string& path, CheckpointMeta* meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_missing("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw_runtime("not a checkpoint file: " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 8);
    std::string htxt(hlen, '\0');
    in.read(htxt.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw_runtime("truncated checkpoint header: " + path);
    json header = json::parse(htxt);
    if (header.at("format_version").get<int>() != 1)
        throw_runtime("unsupported checkpoint format version");

    EncoderConfig cfg = config_from_json(header.at("config"));
    Rng dummy(0);
    Params<float> params = Params<float>::init(cfg, dummy);
    std::size_t expected = 0;
    params.visit([&](const std::string&, Tensor<float>& t) { expected += t.count(); });

    // tensors are stored in visit order; verify names line up
    std::size_t i = 0;
    bool names_ok = true;
    params.visit([&](const std::string& name, Tensor<float>& t) {
        const json& meta_t = header.at("tensors").at(i);
        if (meta_t.at("name").get<std::string>() != name ||
            meta_t.at("rows").get<int>() != t.rows || meta_t.at("cols").get<int>() != t.cols)
            names_ok = false;
        ++i;
    });
    if (!names_ok || i != header.at("tensors").size())
        throw_runtime("checkpoint tensor table does not match the configuration");

    params.visit([&](const std::string& name, Tensor<float>& t) {
        in.read(reinterpret_cast<char*>(t.a.data()),
                static_cast<std::streamsize>(t.count() * sizeof(float)));
        if (!in) throw_runtime("truncated checkpoint tensor: " + name);
    });
    if (meta) {
        meta->cfg = cfg;
        meta->vocab_hash = header.at("vocab_hash").get<std::string>();
        meta->format_version = 1;
    }
    return params;
}

}  // namespace forge::nn
