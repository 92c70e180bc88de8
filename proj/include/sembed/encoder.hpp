#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sembed/tensor.hpp"
#include "sembed/tokenizer.hpp"

namespace sembed {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_layers = 0;
  std::size_t num_heads = 0;
  std::size_t ff_dim = 0;
  std::size_t max_len = 0;
  std::uint64_t seed = 0;

  // Throws ConfigError listing every violation.
  void validate() const;

  bool operator==(const EncoderConfig&) const = default;
};

struct EncoderLayer {
  Tensor ln1_gain, ln1_bias;
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln2_gain, ln2_bias;
  Tensor w1, b1, w2, b2;
};

// Toy pre-norm transformer encoder. Parameters are plain tensors; training
// watches them on a tape, evaluation uses them untracked.
class EncoderModel {
 public:
  // Weights from a seeded normal(0, 0.02) drawn in canonical parameter
  // order; layer-norm gains 1, biases 0. Bit-reproducible per seed.
  static EncoderModel init(const EncoderConfig& config);
  // Zero-filled parameters with the right shapes (checkpoint loading).
  static EncoderModel allocate(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }

  // Canonical name order (documented in the README); pointers stay valid
  // while the model is alive.
  std::vector<std::pair<std::string, Tensor*>> named_parameters();
  std::vector<std::pair<std::string, const Tensor*>> named_parameters() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  Tensor token_embedding;
  Tensor position_embedding;
  std::vector<EncoderLayer> layers;
  Tensor final_gain, final_bias;

 private:
  EncoderConfig config_;
};

// Token-level hidden states [B x T x h]. Pre-norm residual blocks, additive
// -1e9 on masked-off attention logits, final layer norm.
Tensor encoder_forward(const EncoderModel& model, const TokenBatch& batch);

// Checkpoint file: "SEMB" magic, u32 version, u32 JSON-config length, the
// config, then every parameter in canonical order as
// (u16 name length, name, u8 ndim, u32 dims..., little-endian f64 data).
void save_checkpoint(const EncoderModel& model, const std::string& path);
EncoderModel load_checkpoint(const std::string& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace sembed
