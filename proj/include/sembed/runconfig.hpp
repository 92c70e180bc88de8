#pragma once

#include <string>

#include "sembed/encoder.hpp"
#include "sembed/evaluation.hpp"
#include "sembed/trainer.hpp"

namespace sembed {

// Merged run configuration: encoder + training + knn + loss settings plus
// file paths. Parsed from plain-text key=value files ('#' starts a comment);
// unknown keys are hard errors. CLI flags override file values.
struct RunConfig {
  // encoder (vocab_size is derived from the built vocabulary at train time)
  std::size_t hidden_dim = 32;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t ff_dim = 64;
  std::size_t max_len = 32;
  std::size_t vocab_max_size = 5000;

  TrainConfig train;
  KnnConfig knn;

  bool seed_set = false;  // true once any source supplied a seed

  // paths; empty = not set
  std::string nli_path;
  std::string sts_path;
  std::string train_path;
  std::string val_path;
  std::string test_path;
  std::string out_path;
  std::string init_path;
  std::string trace_path;
  std::string csv_path;
  std::string md_path;

  // Applies one key=value assignment; ConfigError on unknown keys or
  // unparsable values.
  void assign(const std::string& key, const std::string& value);

  // Every non-path field checked; ConfigError lists the violations.
  void validate() const;

  EncoderConfig encoder_config(std::size_t vocab_size,
                               std::uint64_t seed) const;

  static RunConfig from_file(const std::string& path);
};

}  // namespace sembed
