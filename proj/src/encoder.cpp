#include "af/encoder.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

namespace af::encoder {

namespace {

using nlohmann::json;

size_t parse_block_index(const std::string& s, const std::string& what) {
    size_t k = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw StrategyError("bad block index '" + s + "' in " + what);
    }
    return k;
}

struct TensorSpec {
    std::string block;
    std::string name;
    std::vector<size_t> shape;
};

std::vector<TensorSpec> canonical_tensor_specs(const EncoderConfig& cfg) {
    const size_t d = cfg.hidden_dim;
    const size_t f = cfg.ffn_dim;
    std::vector<TensorSpec> specs;
    specs.push_back({"emb", "tok", {cfg.vocab_size, d}});
    specs.push_back({"emb", "pos", {cfg.max_seq_len, d}});
    for (size_t k = 1; k <= cfg.num_layers; ++k) {
        const std::string b = block_name(k);
        specs.push_back({b, "ln1_g", {d}});
        specs.push_back({b, "ln1_b", {d}});
        specs.push_back({b, "wq", {d, d}});
        specs.push_back({b, "bq", {d}});
        specs.push_back({b, "wk", {d, d}});
        specs.push_back({b, "bk", {d}});
        specs.push_back({b, "wv", {d, d}});
        specs.push_back({b, "bv", {d}});
        specs.push_back({b, "wo", {d, d}});
        specs.push_back({b, "bo", {d}});
        specs.push_back({b, "ln2_g", {d}});
        specs.push_back({b, "ln2_b", {d}});
        specs.push_back({b, "w1", {d, f}});
        specs.push_back({b, "b1", {f}});
        specs.push_back({b, "w2", {f, d}});
        specs.push_back({b, "b2", {d}});
    }
    return specs;
}

json config_to_json(const EncoderConfig& cfg) {
    return json{{"num_layers", cfg.num_layers},   {"hidden_dim", cfg.hidden_dim},
                {"num_heads", cfg.num_heads},     {"ffn_dim", cfg.ffn_dim},
                {"vocab_size", cfg.vocab_size},   {"max_seq_len", cfg.max_seq_len},
                {"ln_eps", cfg.ln_eps}};
}

EncoderConfig config_from_json(const json& j) {
    EncoderConfig cfg;
    cfg.num_layers = j.at("num_layers").get<size_t>();
    cfg.hidden_dim = j.at("hidden_dim").get<size_t>();
    cfg.num_heads = j.at("num_heads").get<size_t>();
    cfg.ffn_dim = j.at("ffn_dim").get<size_t>();
    cfg.vocab_size = j.at("vocab_size").get<size_t>();
    cfg.max_seq_len = j.at("max_seq_len").get<size_t>();
    cfg.ln_eps = j.at("ln_eps").get<double>();
    cfg.validate();
    return cfg;
}

constexpr char kMagic[4] = {'A', 'F', 'M', '1'};

template <typename T>
void save_model_impl(const std::string& path, const EncoderModel<T>& model) {
    const std::vector<TensorSpec> specs = canonical_tensor_specs(model.config);

    json tensors = json::array();
    size_t offset = 0;
    for (const TensorSpec& s : specs) {
        const Tensor<T>& t = model.params.at(s.block, s.name);
        const size_t nbytes = t.data.size() * sizeof(T);
        tensors.push_back(json{{"block", s.block},
                               {"name", s.name},
                               {"shape", t.shape},
                               {"offset", offset},
                               {"nbytes", nbytes}});
        offset += nbytes;
    }
    const json header = {{"format", 1},
                         {"dtype", dtype_name<T>()},
                         {"config", config_to_json(model.config)},
                         {"tensors", tensors}};
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out.write(kMagic, 4);
    const uint64_t hlen = header_str.size();
    unsigned char lenbuf[8];
    for (int i = 0; i < 8; ++i) {
        lenbuf[i] = static_cast<unsigned char>((hlen >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(lenbuf), 8);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const TensorSpec& s : specs) {
        const Tensor<T>& t = model.params.at(s.block, s.name);
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(T)));
    }
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

template <typename T>
EncoderModel<T> load_model_impl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw ParseError(path + ": not a model file (bad magic)");
    }
    unsigned char lenbuf[8];
    in.read(reinterpret_cast<char*>(lenbuf), 8);
    if (!in) {
        throw ParseError(path + ": truncated header length");
    }
    uint64_t hlen = 0;
    for (int i = 0; i < 8; ++i) {
        hlen |= static_cast<uint64_t>(lenbuf[i]) << (8 * i);
    }
    std::string header_str(hlen, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(hlen));
    if (!in) {
        throw ParseError(path + ": truncated header");
    }

    json header;
    try {
        header = json::parse(header_str);
    } catch (const json::exception& e) {
        throw ParseError(path + ": bad header json: " + e.what());
    }
    if (header.at("dtype").get<std::string>() != dtype_name<T>()) {
        throw ConfigError(path + ": dtype is " + header.at("dtype").get<std::string>() +
                          ", expected " + dtype_name<T>());
    }

    EncoderModel<T> model;
    model.config = config_from_json(header.at("config"));
    const std::vector<TensorSpec> specs = canonical_tensor_specs(model.config);
    const json& tensors = header.at("tensors");
    if (tensors.size() != specs.size()) {
        throw ParseError(path + ": unexpected tensor count");
    }

    std::string current_block;
    for (size_t i = 0; i < specs.size(); ++i) {
        const TensorSpec& s = specs[i];
        const json& tj = tensors[i];
        if (tj.at("block").get<std::string>() != s.block ||
            tj.at("name").get<std::string>() != s.name ||
            tj.at("shape").get<std::vector<size_t>>() != s.shape) {
            throw ParseError(path + ": tensor " + std::to_string(i) +
                             " does not match the declared config");
        }
        if (s.block != current_block) {
            model.params.add_block(s.block);
            current_block = s.block;
        }
        Tensor<T> t;
        t.shape = s.shape;
        size_t numel = 1;
        for (const size_t dim : s.shape) {
            numel *= dim;
        }
        t.data.resize(numel);
        if (tj.at("nbytes").get<size_t>() != numel * sizeof(T)) {
            throw ParseError(path + ": tensor byte count mismatch at index " + std::to_string(i));
        }
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(numel * sizeof(T)));
        if (!in) {
            throw ParseError(path + ": truncated tensor data");
        }
        model.params.add(s.block, s.name, std::move(t));
    }
    return model;
}

} // namespace

std::string to_string(const FreezeStrategy& s) {
    switch (s.kind) {
        case FreezeStrategy::Kind::Full:
            return "full";
        case FreezeStrategy::Kind::FrontHalf:
            return "front_half";
        case FreezeStrategy::Kind::BackHalf:
            return "back_half";
        case FreezeStrategy::Kind::RealignOnly:
            return "realign_only:" + std::to_string(s.block);
        case FreezeStrategy::Kind::FreezeOnly:
            return "freeze_only:" + std::to_string(s.block);
    }
    throw StrategyError("unreachable freeze strategy kind");
}

FreezeStrategy freeze_strategy_from_string(const std::string& s) {
    if (s == "full") {
        return FreezeStrategy::full();
    }
    if (s == "front_half") {
        return FreezeStrategy::front_half();
    }
    if (s == "back_half") {
        return FreezeStrategy::back_half();
    }
    const size_t colon = s.find(':');
    if (colon != std::string::npos) {
        const std::string head = s.substr(0, colon);
        const size_t k = parse_block_index(s.substr(colon + 1), s);
        if (head == "realign_only") {
            return FreezeStrategy::realign_only(k);
        }
        if (head == "freeze_only") {
            return FreezeStrategy::freeze_only(k);
        }
    }
    throw StrategyError("unknown freeze strategy '" + s + "'");
}

FreezeMask apply_freeze(const FreezeStrategy& strategy, size_t num_layers) {
    if (num_layers < 2) {
        throw StrategyError("freezing needs num_layers >= 2");
    }
    FreezeMask mask;
    switch (strategy.kind) {
        case FreezeStrategy::Kind::Full:
            break;
        case FreezeStrategy::Kind::FrontHalf:
            mask.frozen_blocks.insert("emb");
            for (size_t k = 1; k <= num_layers / 2; ++k) {
                mask.frozen_blocks.insert(block_name(k));
            }
            break;
        case FreezeStrategy::Kind::BackHalf:
            for (size_t k = num_layers / 2 + 1; k <= num_layers; ++k) {
                mask.frozen_blocks.insert(block_name(k));
            }
            break;
        case FreezeStrategy::Kind::RealignOnly:
            if (strategy.block > num_layers) {
                throw StrategyError("realign_only block " + std::to_string(strategy.block) +
                                    " out of range 0.." + std::to_string(num_layers));
            }
            for (size_t k = 0; k <= num_layers; ++k) {
                if (k != strategy.block) {
                    mask.frozen_blocks.insert(block_name(k));
                }
            }
            break;
        case FreezeStrategy::Kind::FreezeOnly:
            if (strategy.block > num_layers) {
                throw StrategyError("freeze_only block " + std::to_string(strategy.block) +
                                    " out of range 0.." + std::to_string(num_layers));
            }
            mask.frozen_blocks.insert(block_name(strategy.block));
            break;
    }
    return mask;
}

void save_model_file(const std::string& path, const EncoderModel<float>& model) {
    save_model_impl(path, model);
}

void save_model_file(const std::string& path, const EncoderModel<double>& model) {
    save_model_impl(path, model);
}

template <>
EncoderModel<float> load_model_file<float>(const std::string& path) {
    return load_model_impl<float>(path);
}

template <>
EncoderModel<double> load_model_file<double>(const std::string& path) {
    return load_model_impl<double>(path);
}

} // namespace af::encoder
