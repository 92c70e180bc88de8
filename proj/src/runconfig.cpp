#include "sembed/runconfig.hpp"

#include <charconv>
#include <fstream>

#include "sembed/errors.hpp"

namespace sembed {

namespace {

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(),
                                   out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "' wants an unsigned integer, got '" +
                      value + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(),
                                   out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "' wants an unsigned integer, got '" +
                      value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' wants a real number, got '" + value +
                      "'");
  }
}

std::vector<std::size_t> parse_k_grid(const std::string& value) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    if (comma == std::string::npos) comma = value.size();
    const std::string item = value.substr(start, comma - start);
    if (item.empty()) {
      throw ConfigError("k_grid has an empty entry in '" + value + "'");
    }
    out.push_back(parse_size("k_grid", item));
    start = comma + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

void RunConfig::assign(const std::string& key, const std::string& value) {
  if (key == "hidden_dim") hidden_dim = parse_size(key, value);
  else if (key == "num_layers") num_layers = parse_size(key, value);
  else if (key == "num_heads") num_heads = parse_size(key, value);
  else if (key == "ff_dim") ff_dim = parse_size(key, value);
  else if (key == "max_len") max_len = parse_size(key, value);
  else if (key == "vocab_max_size") vocab_max_size = parse_size(key, value);
  else if (key == "setup") train.setup = parse_setup(value);
  else if (key == "epochs_nli") train.epochs_nli = parse_size(key, value);
  else if (key == "batch_nli") train.batch_nli = parse_size(key, value);
  else if (key == "epochs_sts") train.epochs_sts = parse_size(key, value);
  else if (key == "batch_sts_single") {
    train.batch_sts_single = parse_size(key, value);
  } else if (key == "batch_sts_two_step") {
    train.batch_sts_two_step = parse_size(key, value);
  } else if (key == "learning_rate") {
    train.learning_rate = parse_real(key, value);
  } else if (key == "warmup_fraction") {
    train.warmup_fraction = parse_real(key, value);
  } else if (key == "weight_decay") {
    train.weight_decay = parse_real(key, value);
  } else if (key == "seed") {
    train.seed = parse_u64(key, value);
    seed_set = true;
  } else if (key == "pooling") {
    try {
      train.pooling = parse_pooling(value);
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "mnrl_scale") {
    train.loss.mnrl_scale = parse_real(key, value);
  } else if (key == "sts_score_max") {
    train.loss.sts_score_max = parse_real(key, value);
  } else if (key == "minkowski_p") {
    knn.p = parse_real(key, value);
  } else if (key == "k_grid") {
    knn.k_grid = parse_k_grid(value);
  } else if (key == "nli") nli_path = value;
  else if (key == "sts") sts_path = value;
  else if (key == "train") train_path = value;
  else if (key == "val") val_path = value;
  else if (key == "test") test_path = value;
  else if (key == "out") out_path = value;
  else if (key == "init") init_path = value;
  else if (key == "trace") trace_path = value;
  else if (key == "csv") csv_path = value;
  else if (key == "md") md_path = value;
  else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::validate() const {
  std::string problems;
  auto complain = [&](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };
  if (hidden_dim < 1) complain("hidden_dim must be >= 1");
  if (num_layers < 1) complain("num_layers must be >= 1");
  if (num_heads < 1) complain("num_heads must be >= 1");
  if (ff_dim < 1) complain("ff_dim must be >= 1");
  if (max_len < 3) complain("max_len must be >= 3");
  if (num_heads >= 1 && hidden_dim % num_heads != 0) {
    complain("hidden_dim must be divisible by num_heads");
  }
  if (vocab_max_size < 5) complain("vocab_max_size must be >= 5");
  try {
    train.validate();
  } catch (const ConfigError& e) {
    complain(e.what());
  }
  if (!(knn.p >= 1.0)) complain("minkowski_p must be >= 1");
  for (std::size_t k : knn.k_grid) {
    if (k == 0) {
      complain("k_grid entries must be positive");
      break;
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
}

EncoderConfig RunConfig::encoder_config(std::size_t vocab_size,
                                        std::uint64_t seed) const {
  EncoderConfig cfg;
  cfg.vocab_size = vocab_size;
  cfg.hidden_dim = hidden_dim;
  cfg.num_layers = num_layers;
  cfg.num_heads = num_heads;
  cfg.ff_dim = ff_dim;
  cfg.max_len = max_len;
  cfg.seed = seed;
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not key=value: '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " has an empty key");
    }
    try {
      cfg.assign(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (config line " +
                        std::to_string(line_no) + ")");
    }
  }
  return cfg;
}

}  // namespace sembed
