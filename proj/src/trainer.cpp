#include "sembed/trainer.hpp"

#include <cstdio>
#include <fstream>

#include "sembed/errors.hpp"
#include "sembed/optim.hpp"
#include "sembed/rng.hpp"

namespace sembed {

namespace {

constexpr std::uint64_t kNliShuffleStream = 0x6e6c69;  // distinct streams
constexpr std::uint64_t kStsShuffleStream = 0x737473;

std::vector<Tensor*> raw_params(EncoderModel& model) {
  std::vector<Tensor*> out;
  for (auto& [name, t] : model.named_parameters()) out.push_back(t);
  return out;
}

// One optimizer step from the grads currently attached to the params.
void apply_step(std::vector<Tensor*>& params, AdamWState& state,
                std::uint64_t step_index, std::uint64_t total_steps,
                const TrainConfig& cfg) {
  std::vector<const std::vector<double>*> grads;
  grads.reserve(params.size());
  for (Tensor* p : params) grads.push_back(&p->grad());
  const double lr = lr_schedule(step_index, total_steps, cfg.learning_rate,
                                cfg.warmup_fraction);
  adamw_step(params, grads, state, lr, 0.9, 0.999, 1e-8, cfg.weight_decay);
  for (Tensor* p : params) {
    p->detach();
    if (!p->all_finite()) {
      throw NumericError("optimizer produced a non-finite parameter at step " +
                         std::to_string(state.step_count()));
    }
  }
}

Tensor encode_and_pool(const EncoderModel& model, const Vocabulary& vocab,
                       const std::vector<std::string>& texts,
                       PoolingStrategy pooling) {
  TokenBatch batch = encode_batch(texts, vocab, model.config().max_len);
  return pool(encoder_forward(model, batch), batch.mask, pooling);
}

}  // namespace

TrainSetup parse_setup(const std::string& name) {
  if (name == "nli") return TrainSetup::Nli;
  if (name == "sts") return TrainSetup::Sts;
  if (name == "two-step") return TrainSetup::TwoStep;
  throw InputError("unknown training setup '" + name +
                   "' (expected nli, sts or two-step)");
}

std::string setup_name(TrainSetup setup) {
  switch (setup) {
    case TrainSetup::Nli: return "nli";
    case TrainSetup::Sts: return "sts";
    case TrainSetup::TwoStep: return "two-step";
  }
  throw ContractError("corrupt TrainSetup value");
}

void TrainConfig::validate() const {
  std::string problems;
  auto complain = [&](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };
  if (epochs_nli < 1) complain("epochs_nli must be >= 1");
  if (batch_nli < 1) complain("batch_nli must be >= 1");
  if (epochs_sts < 1) complain("epochs_sts must be >= 1");
  if (batch_sts_single < 1) complain("batch_sts_single must be >= 1");
  if (batch_sts_two_step < 1) complain("batch_sts_two_step must be >= 1");
  if (!(learning_rate > 0.0)) complain("learning_rate must be > 0");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) {
    complain("warmup_fraction must be in [0, 1)");
  }
  if (weight_decay < 0.0) complain("weight_decay must be >= 0");
  try {
    loss.validate();
  } catch (const ConfigError& e) {
    complain(e.what());
  }
  if (!problems.empty()) {
    throw ConfigError("invalid training config: " + problems);
  }
}

TrainTrace train_nli(EncoderModel& model, const Vocabulary& vocab,
                     const std::vector<TripletExample>& triplets,
                     const TrainConfig& cfg) {
  cfg.validate();
  if (triplets.empty()) throw InputError("train_nli: empty dataset");
  std::vector<Tensor*> params = raw_params(model);
  AdamWState state(params);
  Rng shuffle_rng(Rng::derive(cfg.seed, kNliShuffleStream));

  const std::size_t batches_per_epoch = triplets.size() / cfg.batch_nli;
  const std::uint64_t total_steps = cfg.epochs_nli * batches_per_epoch;
  TrainTrace trace;
  trace.losses.reserve(total_steps);

  std::vector<std::size_t> order(triplets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs_nli; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t b = 0; b + cfg.batch_nli <= triplets.size();
         b += cfg.batch_nli) {
      std::vector<std::string> anchors, positives, negatives;
      for (std::size_t i = 0; i < cfg.batch_nli; ++i) {
        const TripletExample& ex = triplets[order[b + i]];
        anchors.push_back(ex.anchor);
        positives.push_back(ex.positive);
        negatives.push_back(ex.negative);
      }
      Tape tape;
      for (Tensor* p : params) tape.watch(*p);
      Tensor loss = mnrl_loss(
          encode_and_pool(model, vocab, anchors, cfg.pooling),
          encode_and_pool(model, vocab, positives, cfg.pooling),
          encode_and_pool(model, vocab, negatives, cfg.pooling),
          cfg.loss.mnrl_scale);
      tape.backward(loss);
      apply_step(params, state, step, total_steps, cfg);
      ++step;
      trace.losses.push_back(loss.scalar_value());
    }
  }
  return trace;
}

TrainTrace train_sts(EncoderModel& model, const Vocabulary& vocab,
                     const std::vector<ScoredPair>& pairs,
                     const TrainConfig& cfg, std::size_t batch_size) {
  cfg.validate();
  if (batch_size < 1) throw InputError("train_sts: batch_size must be >= 1");
  if (pairs.empty()) throw InputError("train_sts: empty dataset");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].score < 0.0 || pairs[i].score > cfg.loss.sts_score_max) {
      throw InputError("train_sts: score " + std::to_string(pairs[i].score) +
                       " outside [0, " +
                       std::to_string(cfg.loss.sts_score_max) +
                       "] at record " + std::to_string(i));
    }
  }
  std::vector<Tensor*> params = raw_params(model);
  AdamWState state(params);
  Rng shuffle_rng(Rng::derive(cfg.seed, kStsShuffleStream));

  const std::size_t batches_per_epoch = pairs.size() / batch_size;
  const std::uint64_t total_steps = cfg.epochs_sts * batches_per_epoch;
  TrainTrace trace;
  trace.losses.reserve(total_steps);

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs_sts; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t b = 0; b + batch_size <= pairs.size(); b += batch_size) {
      std::vector<std::string> left, right;
      std::vector<double> gold;
      for (std::size_t i = 0; i < batch_size; ++i) {
        const ScoredPair& ex = pairs[order[b + i]];
        left.push_back(ex.sentence1);
        right.push_back(ex.sentence2);
        gold.push_back(ex.score);
      }
      Tape tape;
      for (Tensor* p : params) tape.watch(*p);
      Tensor loss = cosine_similarity_loss(
          encode_and_pool(model, vocab, left, cfg.pooling),
          encode_and_pool(model, vocab, right, cfg.pooling), gold,
          cfg.loss.sts_score_max);
      tape.backward(loss);
      apply_step(params, state, step, total_steps, cfg);
      ++step;
      trace.losses.push_back(loss.scalar_value());
    }
  }
  return trace;
}

TwoStepTrace train_two_step(EncoderModel& model, const Vocabulary& vocab,
                            const std::vector<TripletExample>& triplets,
                            const std::vector<ScoredPair>& pairs,
                            const TrainConfig& cfg) {
  if (triplets.empty()) throw InputError("train_two_step: empty NLI dataset");
  if (pairs.empty()) throw InputError("train_two_step: empty STS dataset");
  TwoStepTrace trace;
  trace.nli = train_nli(model, vocab, triplets, cfg);
  // fresh optimizer state: train_sts builds its own
  trace.sts = train_sts(model, vocab, pairs, cfg, cfg.batch_sts_two_step);
  return trace;
}

void write_loss_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open loss trace for write: " + path);
  out << "step,loss\n";
  for (std::size_t i = 0; i < trace.losses.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, trace.losses[i]);
    out << buf;
  }
}

}  // namespace sembed
