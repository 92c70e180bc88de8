#include "sembed/encoder.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "sembed/errors.hpp"
#include "sembed/rng.hpp"

namespace sembed {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStddev = 0.02;
constexpr char kMagic[4] = {'S', 'E', 'M', 'B'};

void fill_normal(Tensor& t, Rng& rng) {
  // bypasses mutable_values tracking guard: only used during init
  for (auto& v : t.mutable_values()) v = rng.normal(0.0, kInitStddev);
}

}  // namespace

void EncoderConfig::validate() const {
  std::string problems;
  auto complain = [&](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };
  if (vocab_size < 1) complain("vocab_size must be >= 1");
  if (hidden_dim < 1) complain("hidden_dim must be >= 1");
  if (num_layers < 1) complain("num_layers must be >= 1");
  if (num_heads < 1) complain("num_heads must be >= 1");
  if (ff_dim < 1) complain("ff_dim must be >= 1");
  if (max_len < 3) complain("max_len must be >= 3");
  if (num_heads >= 1 && hidden_dim % num_heads != 0) {
    complain("hidden_dim must be divisible by num_heads");
  }
  if (!problems.empty()) {
    throw ConfigError("invalid encoder config: " + problems);
  }
}

EncoderModel EncoderModel::allocate(const EncoderConfig& config) {
  config.validate();
  EncoderModel m;
  m.config_ = config;
  const std::size_t h = config.hidden_dim;
  m.token_embedding = Tensor({config.vocab_size, h});
  m.position_embedding = Tensor({config.max_len, h});
  m.layers.resize(config.num_layers);
  for (auto& layer : m.layers) {
    layer.ln1_gain = Tensor({h});
    layer.ln1_bias = Tensor({h});
    layer.wq = Tensor({h, h});
    layer.bq = Tensor({h});
    layer.wk = Tensor({h, h});
    layer.bk = Tensor({h});
    layer.wv = Tensor({h, h});
    layer.bv = Tensor({h});
    layer.wo = Tensor({h, h});
    layer.bo = Tensor({h});
    layer.ln2_gain = Tensor({h});
    layer.ln2_bias = Tensor({h});
    layer.w1 = Tensor({h, config.ff_dim});
    layer.b1 = Tensor({config.ff_dim});
    layer.w2 = Tensor({config.ff_dim, h});
    layer.b2 = Tensor({h});
  }
  m.final_gain = Tensor({h});
  m.final_bias = Tensor({h});
  return m;
}

EncoderModel EncoderModel::init(const EncoderConfig& config) {
  EncoderModel m = allocate(config);
  Rng rng(config.seed);
  // draws happen in canonical parameter order; layer norms stay (1, 0)
  for (auto& [name, param] : m.named_parameters()) {
    const bool is_layer_norm = name.find(".ln") != std::string::npos ||
                               name.rfind("final_norm", 0) == 0;
    if (is_layer_norm) {
      const bool is_gain = name.ends_with(".gain");
      for (auto& v : param->mutable_values()) v = is_gain ? 1.0 : 0.0;
    } else {
      fill_normal(*param, rng);
    }
  }
  return m;
}

std::vector<std::pair<std::string, Tensor*>> EncoderModel::named_parameters() {
  std::vector<std::pair<std::string, Tensor*>> out;
  out.reserve(4 + layers.size() * 16);
  out.emplace_back("embeddings.token", &token_embedding);
  out.emplace_back("embeddings.position", &position_embedding);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string p = "layers." + std::to_string(i) + ".";
    EncoderLayer& l = layers[i];
    out.emplace_back(p + "ln1.gain", &l.ln1_gain);
    out.emplace_back(p + "ln1.bias", &l.ln1_bias);
    out.emplace_back(p + "attn.wq", &l.wq);
    out.emplace_back(p + "attn.bq", &l.bq);
    out.emplace_back(p + "attn.wk", &l.wk);
    out.emplace_back(p + "attn.bk", &l.bk);
    out.emplace_back(p + "attn.wv", &l.wv);
    out.emplace_back(p + "attn.bv", &l.bv);
    out.emplace_back(p + "attn.wo", &l.wo);
    out.emplace_back(p + "attn.bo", &l.bo);
    out.emplace_back(p + "ln2.gain", &l.ln2_gain);
    out.emplace_back(p + "ln2.bias", &l.ln2_bias);
    out.emplace_back(p + "ffn.w1", &l.w1);
    out.emplace_back(p + "ffn.b1", &l.b1);
    out.emplace_back(p + "ffn.w2", &l.w2);
    out.emplace_back(p + "ffn.b2", &l.b2);
  }
  out.emplace_back("final_norm.gain", &final_gain);
  out.emplace_back("final_norm.bias", &final_bias);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>>
EncoderModel::named_parameters() const {
  auto mut = const_cast<EncoderModel*>(this)->named_parameters();
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mut.size());
  for (auto& [name, t] : mut) out.emplace_back(std::move(name), t);
  return out;
}

std::size_t EncoderModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_parameters()) n += t->size();
  return n;
}

bool EncoderModel::all_finite() const {
  for (const auto& [name, t] : named_parameters()) {
    if (!t->all_finite()) return false;
  }
  return true;
}

Tensor encoder_forward(const EncoderModel& model, const TokenBatch& batch) {
  const EncoderConfig& cfg = model.config();
  const std::size_t b = batch.batch, t = batch.seq_len, h = cfg.hidden_dim;
  if (b == 0 || t == 0) throw InputError("encoder_forward: empty batch");
  if (t > cfg.max_len) {
    throw InputError("encoder_forward: sequence length " + std::to_string(t) +
                     " exceeds max_len " + std::to_string(cfg.max_len));
  }
  for (int id : batch.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw InputError("encoder_forward: token id " + std::to_string(id) +
                       " out of range for vocab of " +
                       std::to_string(cfg.vocab_size));
    }
  }

  std::vector<int> pos_ids(b * t);
  for (std::size_t i = 0; i < b * t; ++i) {
    pos_ids[i] = static_cast<int>(i % t);
  }
  Tensor x = add(embedding_lookup(model.token_embedding, batch.ids),
                 embedding_lookup(model.position_embedding, pos_ids));

  for (const EncoderLayer& layer : model.layers) {
    Tensor norm1 = layer_norm(x, layer.ln1_gain, layer.ln1_bias,
                              kLayerNormEps);
    Tensor q = add_rowwise(matmul(norm1, layer.wq), layer.bq);
    Tensor k = add_rowwise(matmul(norm1, layer.wk), layer.bk);
    Tensor v = add_rowwise(matmul(norm1, layer.wv), layer.bv);
    Tensor attn = masked_attention(q, k, v, batch.mask, b, t,
                                   model.config().num_heads);
    x = add(x, add_rowwise(matmul(attn, layer.wo), layer.bo));

    Tensor norm2 = layer_norm(x, layer.ln2_gain, layer.ln2_bias,
                              kLayerNormEps);
    Tensor inner = gelu(add_rowwise(matmul(norm2, layer.w1), layer.b1));
    x = add(x, add_rowwise(matmul(inner, layer.w2), layer.b2));
  }
  x = layer_norm(x, model.final_gain, model.final_bias, kLayerNormEps);
  return reshape(x, {b, t, h});
}

// --- checkpoint io -----------------------------------------------------------

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>((v >> 8) & 0xFF);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out += static_cast<char>((bits >> (8 * i)) & 0xFF);
  }
}

class Reader {
 public:
  Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::string take(std::size_t n, const char* what) {
    if (pos_ + n > bytes_.size()) {
      throw CheckpointError(CheckpointFault::Truncated,
                            std::string("checkpoint truncated while reading ") +
                                what);
    }
    std::string out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint16_t u16(const char* what) {
    auto s = take(2, what);
    return static_cast<std::uint16_t>(static_cast<unsigned char>(s[0]) |
                                      (static_cast<unsigned char>(s[1]) << 8));
  }

  std::uint32_t u32(const char* what) {
    auto s = take(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    }
    return v;
  }

  std::uint8_t u8(const char* what) {
    return static_cast<std::uint8_t>(take(1, what)[0]);
  }

  double f64(const char* what) {
    auto s = take(8, what);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
      bits = (bits << 8) |
             static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    }
    return std::bit_cast<double>(bits);
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json config_to_json(const EncoderConfig& c) {
  return nlohmann::json{
      {"vocab_size", c.vocab_size}, {"hidden_dim", c.hidden_dim},
      {"num_layers", c.num_layers}, {"num_heads", c.num_heads},
      {"ff_dim", c.ff_dim},         {"max_len", c.max_len},
      {"seed", c.seed}};
}

EncoderConfig config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  try {
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.num_layers = j.at("num_layers").get<std::size_t>();
    c.num_heads = j.at("num_heads").get<std::size_t>();
    c.ff_dim = j.at("ff_dim").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(CheckpointFault::Corrupt,
                          std::string("bad checkpoint config: ") + e.what());
  }
  return c;
}

}  // namespace

void save_checkpoint(const EncoderModel& model, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  const std::string cfg = config_to_json(model.config()).dump();
  put_u32(out, static_cast<std::uint32_t>(cfg.size()));
  out += cfg;
  for (const auto& [name, t] : model.named_parameters()) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    out += static_cast<char>(t->rank());
    for (std::size_t d : t->shape()) {
      put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (double v : t->values()) put_f64(out, v);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot open checkpoint for write: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw InputError("failed writing checkpoint: " + path);
}

EncoderModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));

  if (r.take(4, "magic") != std::string(kMagic, 4)) {
    throw CheckpointError(CheckpointFault::BadMagic,
                          "not a checkpoint file (bad magic): " + path);
  }
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointFault::BadVersion,
                          "unsupported checkpoint version " +
                              std::to_string(version));
  }
  const std::uint32_t cfg_len = r.u32("config length");
  const std::string cfg_text = r.take(cfg_len, "config");
  nlohmann::json cfg_json = nlohmann::json::parse(cfg_text, nullptr, false);
  if (cfg_json.is_discarded()) {
    throw CheckpointError(CheckpointFault::Corrupt,
                          "checkpoint config is not valid JSON");
  }
  EncoderConfig config = config_from_json(cfg_json);
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw CheckpointError(CheckpointFault::Corrupt, e.what());
  }

  EncoderModel model = EncoderModel::allocate(config);
  for (auto& [name, t] : model.named_parameters()) {
    const std::uint16_t name_len = r.u16("parameter name length");
    const std::string got = r.take(name_len, "parameter name");
    if (got != name) {
      throw CheckpointError(CheckpointFault::Corrupt,
                            "unexpected parameter '" + got + "', wanted '" +
                                name + "'");
    }
    const std::uint8_t ndim = r.u8("ndim");
    if (ndim != t->rank()) {
      throw CheckpointError(CheckpointFault::Corrupt,
                            "parameter '" + name + "' has wrong rank");
    }
    for (std::size_t d = 0; d < t->rank(); ++d) {
      if (r.u32("dimension") != t->shape()[d]) {
        throw CheckpointError(CheckpointFault::Corrupt,
                              "parameter '" + name + "' has wrong shape");
      }
    }
    auto& vals = t->mutable_values();
    for (auto& v : vals) v = r.f64("parameter data");
  }
  if (!r.exhausted()) {
    throw CheckpointError(CheckpointFault::Corrupt,
                          "trailing bytes after last parameter");
  }
  return model;
}

}  // namespace sembed
