#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sembed/datasets.hpp"
#include "sembed/encoder.hpp"
#include "sembed/losses.hpp"
#include "sembed/pooling.hpp"
#include "sembed/tokenizer.hpp"

namespace sembed {

enum class TrainSetup { Nli, Sts, TwoStep };

// CLI names: "nli", "sts", "two-step".
TrainSetup parse_setup(const std::string& name);
std::string setup_name(TrainSetup setup);

struct TrainConfig {
  TrainSetup setup = TrainSetup::TwoStep;
  std::size_t epochs_nli = 1;
  std::size_t batch_nli = 4;
  std::size_t epochs_sts = 4;
  std::size_t batch_sts_single = 8;  // unstated upstream; 8 for symmetry
  std::size_t batch_sts_two_step = 8;
  double learning_rate = 2e-5;
  double warmup_fraction = 0.1;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
  PoolingStrategy pooling = PoolingStrategy::Mean;
  LossConfig loss;

  void validate() const;
};

// Per-batch loss values in step order.
struct TrainTrace {
  std::vector<double> losses;
};

struct TwoStepTrace {
  TrainTrace nli;
  TrainTrace sts;
};

// Siamese MNRL training over (anchor, positive, negative) triplets.
// Shuffles with a seeded generator each epoch, drops the final short batch,
// steps AdamW under the linear warmup/decay schedule, and verifies the
// parameters stay finite after every step.
TrainTrace train_nli(EncoderModel& model, const Vocabulary& vocab,
                     const std::vector<TripletExample>& triplets,
                     const TrainConfig& cfg);

// Cosine-regression training over scored sentence pairs.
TrainTrace train_sts(EncoderModel& model, const Vocabulary& vocab,
                     const std::vector<ScoredPair>& pairs,
                     const TrainConfig& cfg, std::size_t batch_size);

// NLI pass then STS pass with fresh optimizer state in between.
TwoStepTrace train_two_step(EncoderModel& model, const Vocabulary& vocab,
                            const std::vector<TripletExample>& triplets,
                            const std::vector<ScoredPair>& pairs,
                            const TrainConfig& cfg);

// CSV with a "step,loss" header.
void write_loss_trace_csv(const TrainTrace& trace, const std::string& path);

}  // namespace sembed
