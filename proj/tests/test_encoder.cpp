#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "sembed/encoder.hpp"
#include "sembed/errors.hpp"
#include "sembed/gradcheck.hpp"
#include "sembed/losses.hpp"
#include "sembed/pooling.hpp"
#include "sembed/rng.hpp"

using namespace sembed;

namespace {

EncoderConfig toy_config() {
  EncoderConfig cfg;
  cfg.vocab_size = 100;
  cfg.hidden_dim = 32;
  cfg.num_layers = 2;
  cfg.num_heads = 4;
  cfg.ff_dim = 64;
  cfg.max_len = 16;
  cfg.seed = 42;
  return cfg;
}

bool params_identical(const EncoderModel& a, const EncoderModel& b) {
  auto pa = a.named_parameters();
  auto pb = b.named_parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].first != pb[i].first) return false;
    if (pa[i].second->values() != pb[i].second->values()) return false;
  }
  return true;
}

TokenBatch make_batch(const std::vector<std::vector<int>>& rows,
                      std::size_t width) {
  TokenBatch b;
  b.batch = rows.size();
  b.seq_len = width;
  b.ids.assign(b.batch * width, kPadId);
  b.mask.assign(b.batch * width, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    b.lengths.push_back(static_cast<int>(rows[r].size()));
    for (std::size_t t = 0; t < rows[r].size(); ++t) {
      b.ids[r * width + t] = rows[r][t];
      b.mask[r * width + t] = 1;
    }
  }
  return b;
}

}  // namespace

TEST_CASE("config validation lists every violation") {
  EncoderConfig bad;
  bad.vocab_size = 0;
  bad.hidden_dim = 6;
  bad.num_layers = 1;
  bad.num_heads = 4;
  bad.ff_dim = 0;
  bad.max_len = 2;
  try {
    bad.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("vocab_size") != std::string::npos);
    CHECK(msg.find("ff_dim") != std::string::npos);
    CHECK(msg.find("max_len") != std::string::npos);
    CHECK(msg.find("divisible") != std::string::npos);
  }
}

TEST_CASE("init is bit-reproducible per seed and sensitive to it") {
  EncoderConfig cfg = toy_config();
  EncoderModel a = EncoderModel::init(cfg);
  EncoderModel b = EncoderModel::init(cfg);
  CHECK(params_identical(a, b));
  CHECK(a.all_finite());

  cfg.seed = 43;
  EncoderModel c = EncoderModel::init(cfg);
  CHECK_FALSE(params_identical(a, c));
}

TEST_CASE("parameter count matches the closed-form formula") {
  EncoderConfig cfg = toy_config();
  EncoderModel m = EncoderModel::init(cfg);
  const std::size_t h = cfg.hidden_dim, ff = cfg.ff_dim;
  const std::size_t per_layer = 2 * h             // ln1
                                + 4 * (h * h + h)  // q,k,v,o projections
                                + 2 * h            // ln2
                                + h * ff + ff + ff * h + h;  // ffn
  const std::size_t expected = cfg.vocab_size * h + cfg.max_len * h +
                               cfg.num_layers * per_layer + 2 * h;
  CHECK(m.parameter_count() == expected);
  CHECK(m.parameter_count() == 20864);  // worked out by hand for this config
}

TEST_CASE("forward produces [B, T, h] and is deterministic") {
  EncoderModel m = EncoderModel::init(toy_config());
  TokenBatch batch = make_batch({{1, 5, 7, 2}, {1, 9, 2, 0}}, 4);
  batch.mask[7] = 0;  // second row has 3 real tokens
  Tensor out = encoder_forward(m, batch);
  CHECK(out.shape() == std::vector<std::size_t>{2, 4, 32});
  CHECK(out.all_finite());
  Tensor again = encoder_forward(m, batch);
  CHECK(out.values() == again.values());
}

TEST_CASE("forward rejects out-of-range ids and overlong sequences") {
  EncoderModel m = EncoderModel::init(toy_config());
  TokenBatch bad_id = make_batch({{1, 100, 2}}, 3);
  CHECK_THROWS_AS(encoder_forward(m, bad_id), InputError);
  TokenBatch long_batch = make_batch({{1, 5, 2}}, 20);
  CHECK_THROWS_AS(encoder_forward(m, long_batch), InputError);
}

TEST_CASE("padding invariance: extra PAD columns leave real positions alone") {
  Rng rng(5);
  for (std::size_t layers : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
    EncoderConfig cfg = toy_config();
    cfg.num_layers = layers;
    cfg.seed = 100 + layers;
    EncoderModel m = EncoderModel::init(cfg);
    std::vector<int> row = {1, 5, 9, 2};
    TokenBatch narrow = make_batch({row}, 4);
    TokenBatch wide = make_batch({row}, 9);
    Tensor a = encoder_forward(m, narrow);
    Tensor b = encoder_forward(m, wide);
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t j = 0; j < cfg.hidden_dim; ++j) {
        CHECK(std::fabs(a.values()[t * cfg.hidden_dim + j] -
                        b.values()[t * cfg.hidden_dim + j]) < 1e-10);
      }
    }
  }
}

TEST_CASE("permuting batch rows permutes outputs identically") {
  EncoderModel m = EncoderModel::init(toy_config());
  TokenBatch fwd = make_batch({{1, 5, 2}, {1, 9, 2}, {1, 17, 2}}, 3);
  TokenBatch rev = make_batch({{1, 17, 2}, {1, 9, 2}, {1, 5, 2}}, 3);
  Tensor a = encoder_forward(m, fwd);
  Tensor b = encoder_forward(m, rev);
  const std::size_t row = 3 * 32;
  for (std::size_t j = 0; j < row; ++j) {
    CHECK(a.values()[0 * row + j] == b.values()[2 * row + j]);
    CHECK(a.values()[1 * row + j] == b.values()[1 * row + j]);
    CHECK(a.values()[2 * row + j] == b.values()[0 * row + j]);
  }
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  EncoderModel m = EncoderModel::init(toy_config());
  const std::string path = "ckpt_roundtrip.bin";
  save_checkpoint(m, path);
  EncoderModel loaded = load_checkpoint(path);
  CHECK(loaded.config() == m.config());
  CHECK(params_identical(m, loaded));
  std::remove(path.c_str());
}

TEST_CASE("checkpoint load failures are distinct") {
  EncoderConfig cfg = toy_config();
  cfg.num_layers = 1;
  EncoderModel m = EncoderModel::init(cfg);
  const std::string path = "ckpt_corrupt.bin";
  save_checkpoint(m, path);

  auto slurp = [&] {
    std::ifstream f(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
  };
  auto spit = [&](const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };
  const std::string original = slurp();

  std::string bad_magic = original;
  bad_magic[0] = 'X';
  spit(bad_magic);
  try {
    load_checkpoint(path);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(e.fault() == CheckpointFault::BadMagic);
  }

  std::string bad_version = original;
  bad_version[4] = 9;
  spit(bad_version);
  try {
    load_checkpoint(path);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(e.fault() == CheckpointFault::BadVersion);
  }

  spit(original.substr(0, original.size() / 2));
  try {
    load_checkpoint(path);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(e.fault() == CheckpointFault::Truncated);
  }

  std::remove(path.c_str());
}

TEST_CASE("golden checkpoint loads and re-saves byte-identically") {
  const std::string golden = std::string(SEMBED_GOLDEN_DIR) + "/encoder_v1.ckpt";
  EncoderModel m = load_checkpoint(golden);
  CHECK(m.config().hidden_dim == 16);
  CHECK(m.config().num_layers == 2);
  CHECK(m.config().num_heads == 2);
  CHECK(m.config().vocab_size == 50);
  CHECK(m.all_finite());

  const std::string copy = "golden_resave.bin";
  save_checkpoint(m, copy);
  std::ifstream a(golden, std::ios::binary), b(copy, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)),
                 std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)),
                 std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  std::remove(copy.c_str());
}

TEST_CASE("end-to-end gradient check through encoder, pooling and loss") {
  EncoderConfig cfg;
  cfg.vocab_size = 20;
  cfg.hidden_dim = 16;
  cfg.num_layers = 2;
  cfg.num_heads = 2;
  cfg.ff_dim = 24;
  cfg.max_len = 8;
  cfg.seed = 7;
  EncoderModel model = EncoderModel::init(cfg);
  TokenBatch anchors = make_batch({{1, 4, 9, 2}, {1, 11, 2, 0}}, 4);
  anchors.mask[7] = 0;
  TokenBatch others = make_batch({{1, 5, 2, 0}, {1, 13, 7, 2}}, 4);
  others.mask[3] = 0;
  const std::vector<double> gold = {4.0, 1.5};

  Rng coord_rng(99);
  auto params = model.named_parameters();
  for (auto& [name, param] : params) {
    auto f = [&, target = param](Tape& tape, const Tensor& x) -> Tensor {
      (void)tape;
      EncoderModel probe = model;
      for (auto& [n2, p2] : probe.named_parameters()) {
        if (p2->values().data() == target->values().data()) {
          *p2 = x;
        }
      }
      Tensor ea = pool(encoder_forward(probe, anchors), anchors.mask,
                       PoolingStrategy::Mean);
      Tensor eb = pool(encoder_forward(probe, others), others.mask,
                       PoolingStrategy::Mean);
      return cosine_similarity_loss(ea, eb, gold, 5.0);
    };
    // a handful of coordinates per tensor keeps the suite quick
    std::vector<std::size_t> coords;
    for (int i = 0; i < 4; ++i) coords.push_back(coord_rng.index(param->size()));
    auto report = finite_diff_check(f, *param, 1e-5, coords);
    INFO("parameter " << name << " worst coord " << report.worst_index);
    CHECK(report.max_rel_error < 1e-4);
  }
}
