#include "sembed/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "sembed/datasets.hpp"
#include "sembed/errors.hpp"
#include "sembed/evaluation.hpp"
#include "sembed/report.hpp"
#include "sembed/runconfig.hpp"
#include "sembed/trainer.hpp"

namespace sembed::cli {

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value pairs from --set
  std::optional<std::uint64_t> seed_flag;
};

RunConfig build_config(const CommonOpts& opts) {
  RunConfig cfg = opts.config_path.empty()
                      ? RunConfig{}
                      : RunConfig::from_file(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set wants key=value, got '" + kv + "'");
    }
    cfg.assign(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed_flag) {
    cfg.train.seed = *opts.seed_flag;
    cfg.seed_set = true;
  } else if (!cfg.seed_set) {
    if (const char* env = std::getenv("SEMBED_SEED")) {
      cfg.assign("seed", env);
    }
  }
  std::printf("root seed: %llu\n",
              static_cast<unsigned long long>(cfg.train.seed));
  return cfg;
}

std::string default_vocab_path(const std::string& ckpt) {
  return ckpt + ".vocab";
}

// --- train ----------------------------------------------------------------

struct TrainOpts {
  CommonOpts common;
  std::string setup;
  std::string nli_path, sts_path, out_path, init_path, vocab_path, trace_path;
};

int cmd_train(const TrainOpts& opts) {
  RunConfig cfg = build_config(opts.common);
  try {
    cfg.train.setup = parse_setup(opts.setup);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  if (!opts.nli_path.empty()) cfg.nli_path = opts.nli_path;
  if (!opts.sts_path.empty()) cfg.sts_path = opts.sts_path;
  if (!opts.out_path.empty()) cfg.out_path = opts.out_path;
  if (!opts.init_path.empty()) cfg.init_path = opts.init_path;
  if (!opts.trace_path.empty()) cfg.trace_path = opts.trace_path;
  cfg.validate();

  const bool needs_nli = cfg.train.setup != TrainSetup::Sts;
  const bool needs_sts = cfg.train.setup != TrainSetup::Nli;
  if (needs_nli && cfg.nli_path.empty()) {
    throw ConfigError("--nli is required for setup " +
                      setup_name(cfg.train.setup));
  }
  if (needs_sts && cfg.sts_path.empty()) {
    throw ConfigError("--sts is required for setup " +
                      setup_name(cfg.train.setup));
  }
  if (cfg.out_path.empty()) throw ConfigError("--out is required");

  std::vector<TripletExample> triplets;
  std::vector<ScoredPair> pairs;
  if (needs_nli) triplets = load_triplets(cfg.nli_path);
  if (needs_sts) pairs = load_scored_pairs(cfg.sts_path);

  EncoderModel model;
  Vocabulary vocab;
  if (!cfg.init_path.empty()) {
    model = load_checkpoint(cfg.init_path);
    const std::string vocab_path = opts.vocab_path.empty()
                                       ? default_vocab_path(cfg.init_path)
                                       : opts.vocab_path;
    vocab = Vocabulary::load(vocab_path);
    const EncoderConfig& got = model.config();
    if (got.hidden_dim != cfg.hidden_dim ||
        got.num_layers != cfg.num_layers ||
        got.num_heads != cfg.num_heads || got.ff_dim != cfg.ff_dim ||
        got.max_len != cfg.max_len) {
      throw ConfigError("--init checkpoint config does not match the run "
                        "config (checkpoint: hidden_dim=" +
                        std::to_string(got.hidden_dim) + ", num_layers=" +
                        std::to_string(got.num_layers) + ", num_heads=" +
                        std::to_string(got.num_heads) + ", ff_dim=" +
                        std::to_string(got.ff_dim) + ", max_len=" +
                        std::to_string(got.max_len) + ")");
    }
  } else {
    std::vector<std::string> corpus;
    for (const auto& t : triplets) {
      corpus.push_back(t.anchor);
      corpus.push_back(t.positive);
      corpus.push_back(t.negative);
    }
    for (const auto& p : pairs) {
      corpus.push_back(p.sentence1);
      corpus.push_back(p.sentence2);
    }
    vocab = build_vocab(corpus, cfg.vocab_max_size);
    model = EncoderModel::init(
        cfg.encoder_config(vocab.size(), cfg.train.seed));
  }

  TrainTrace combined;
  switch (cfg.train.setup) {
    case TrainSetup::Nli:
      combined = train_nli(model, vocab, triplets, cfg.train);
      break;
    case TrainSetup::Sts:
      combined = train_sts(model, vocab, pairs, cfg.train,
                           cfg.train.batch_sts_single);
      break;
    case TrainSetup::TwoStep: {
      TwoStepTrace two = train_two_step(model, vocab, triplets, pairs,
                                        cfg.train);
      combined.losses = two.nli.losses;
      combined.losses.insert(combined.losses.end(), two.sts.losses.begin(),
                             two.sts.losses.end());
      break;
    }
  }

  save_checkpoint(model, cfg.out_path);
  vocab.save(default_vocab_path(cfg.out_path));
  if (!cfg.trace_path.empty()) write_loss_trace_csv(combined, cfg.trace_path);

  const double final_loss = combined.losses.empty() ? 0.0
                                                    : combined.losses.back();
  std::printf("trained %s: %zu steps, final batch loss %.6f, checkpoint %s\n",
              setup_name(cfg.train.setup).c_str(), combined.losses.size(),
              final_loss, cfg.out_path.c_str());
  return 0;
}

// --- shared embedder construction -------------------------------------------

struct EmbedderOpts {
  std::string model_path, vocab_path, wordvecs_path, buckets_path;
  std::string pooling = "mean";
};

// Returns the embedder plus the pooling label used in reports.
std::pair<Embedder, std::string> build_embedder(const EmbedderOpts& opts) {
  const bool has_model = !opts.model_path.empty();
  const bool has_wordvecs = !opts.wordvecs_path.empty();
  if (has_model == has_wordvecs) {
    throw ConfigError("exactly one of --model and --wordvecs is required");
  }
  if (has_model) {
    EncoderModel model = load_checkpoint(opts.model_path);
    const std::string vocab_path = opts.vocab_path.empty()
                                       ? default_vocab_path(opts.model_path)
                                       : opts.vocab_path;
    Vocabulary vocab = Vocabulary::load(vocab_path);
    PoolingStrategy pooling;
    try {
      pooling = parse_pooling(opts.pooling);
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
    return {make_encoder_embedder(std::move(model), std::move(vocab),
                                  pooling),
            opts.pooling};
  }
  WordVectorTable table = load_vectors(opts.wordvecs_path);
  if (!opts.buckets_path.empty()) load_buckets(table, opts.buckets_path);
  return {make_wordvec_embedder(std::move(table)), "avg"};
}

// --- eval ----------------------------------------------------------------------

struct EvalOpts {
  CommonOpts common;
  EmbedderOpts embedder;
  std::string data_path;                      // sts
  std::string train_path, val_path, test_path;  // cls
  std::string csv_path, md_path;
};

void emit_metrics(const ReportTable& table, const std::string& csv_path,
                  const std::string& md_path) {
  if (!csv_path.empty()) write_text_file(csv_path, to_csv(table));
  if (!md_path.empty()) write_text_file(md_path, to_markdown(table));
}

int cmd_eval_sts(const EvalOpts& opts) {
  RunConfig cfg = build_config(opts.common);
  cfg.validate();
  auto [embedder, pooling_label] = build_embedder(opts.embedder);
  if (opts.data_path.empty()) throw ConfigError("--data is required");
  const auto pairs = load_scored_pairs(opts.data_path);
  EvalReport report;
  report.embedding_similarity = embedding_similarity_score(embedder, pairs);
  std::printf("pairs: %zu\n", pairs.size());
  std::printf("pooling: %s\n", pooling_label.c_str());
  std::printf("embedding_similarity: %.6f\n", *report.embedding_similarity);
  ReportTable table;
  table.header = {"metric", "value"};
  table.rows = {
      {"pairs", std::to_string(pairs.size())},
      {"pooling", pooling_label},
      {"embedding_similarity", format_real(*report.embedding_similarity)}};
  emit_metrics(table, opts.csv_path, opts.md_path);
  return 0;
}

int cmd_eval_cls(const EvalOpts& opts) {
  RunConfig cfg = build_config(opts.common);
  cfg.validate();
  auto [embedder, pooling_label] = build_embedder(opts.embedder);
  if (opts.train_path.empty() || opts.val_path.empty() ||
      opts.test_path.empty()) {
    throw ConfigError("--train, --val and --test are all required");
  }
  DatasetSplit<LabeledText> splits;
  splits.train = load_labeled(opts.train_path);
  splits.validation = load_labeled(opts.val_path);
  splits.test = load_labeled(opts.test_path);
  const ClassifyResult result = classify_dataset(embedder, splits, cfg.knn);
  EvalReport report;
  report.accuracy = result.accuracy;
  report.chosen_k = result.chosen_k;
  std::printf("pooling: %s\n", pooling_label.c_str());
  std::printf("chosen_k: %zu\n", *report.chosen_k);
  std::printf("validation_accuracy: %.6f\n", result.validation_accuracy);
  std::printf("accuracy: %.6f\n", *report.accuracy);
  ReportTable table;
  table.header = {"metric", "value"};
  table.rows = {{"pooling", pooling_label},
                {"chosen_k", std::to_string(*report.chosen_k)},
                {"validation_accuracy", format_real(result.validation_accuracy)},
                {"accuracy", format_real(*report.accuracy)}};
  emit_metrics(table, opts.csv_path, opts.md_path);
  return 0;
}

// --- report pairs ----------------------------------------------------------------

struct ReportPairsOpts {
  CommonOpts common;
  EmbedderOpts embedder;
  std::string pairs_path;
  std::string csv_path;
};

int cmd_report_pairs(const ReportPairsOpts& opts) {
  build_config(opts.common);
  auto [embedder, pooling_label] = build_embedder(opts.embedder);
  if (opts.pairs_path.empty()) throw ConfigError("--pairs is required");
  const auto pairs = load_sentence_pairs(opts.pairs_path);
  const auto rows = pairwise_cosine_report(embedder, pairs);
  ReportTable table;
  table.header = {"sentence1", "sentence2", "cosine"};
  for (const auto& row : rows) {
    table.rows.push_back({row.text1, row.text2, format_real(row.cosine)});
  }
  std::fputs(to_markdown(table).c_str(), stdout);
  if (!opts.csv_path.empty()) write_text_file(opts.csv_path, to_csv(table));
  return 0;
}

// --- compare ----------------------------------------------------------------------

struct CompareOpts {
  CommonOpts common;
  std::string manifest_path;
  std::string csv_path, md_path;
};

int cmd_compare(const CompareOpts& opts) {
  RunConfig cfg = build_config(opts.common);
  cfg.validate();
  if (opts.manifest_path.empty()) throw ConfigError("--manifest is required");
  std::ifstream in(opts.manifest_path);
  if (!in) throw ConfigError("cannot open manifest: " + opts.manifest_path);
  nlohmann::json manifest = nlohmann::json::parse(in, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    throw ConfigError("manifest is not a JSON object");
  }
  if (!manifest.contains("models") || !manifest["models"].is_array()) {
    throw ConfigError("manifest needs a \"models\" array");
  }

  std::vector<ScoredPair> sts_pairs;
  if (manifest.contains("sts")) {
    sts_pairs = load_scored_pairs(manifest["sts"].get<std::string>());
  }
  struct ClsSet {
    std::string name;
    DatasetSplit<LabeledText> splits;
  };
  std::vector<ClsSet> cls_sets;
  if (manifest.contains("classification")) {
    for (const auto& entry : manifest["classification"]) {
      ClsSet set;
      set.name = entry.at("name").get<std::string>();
      set.splits.train = load_labeled(entry.at("train").get<std::string>());
      set.splits.validation = load_labeled(entry.at("val").get<std::string>());
      set.splits.test = load_labeled(entry.at("test").get<std::string>());
      cls_sets.push_back(std::move(set));
    }
  }

  ReportTable table;
  table.header = {"model", "pooling", "embedding_similarity"};
  for (const auto& set : cls_sets) table.header.push_back(set.name);

  bool any_failure = false;
  for (const auto& entry : manifest["models"]) {
    std::vector<std::string> row;
    const std::string name = entry.value("name", "(unnamed)");
    row.push_back(name);
    try {
      EmbedderOpts eopts;
      eopts.model_path = entry.value("checkpoint", "");
      eopts.vocab_path = entry.value("vocab", "");
      eopts.wordvecs_path = entry.value("wordvecs", "");
      eopts.buckets_path = entry.value("buckets", "");
      eopts.pooling = entry.value("pooling", "mean");
      auto [embedder, pooling_label] = build_embedder(eopts);
      row.push_back(pooling_label);
      row.push_back(sts_pairs.empty()
                        ? std::string("-")
                        : format_real(embedding_similarity_score(embedder,
                                                                 sts_pairs)));
      for (const auto& set : cls_sets) {
        const ClassifyResult r = classify_dataset(embedder, set.splits,
                                                  cfg.knn);
        row.push_back(format_real(r.accuracy) + " (k=" +
                      std::to_string(r.chosen_k) + ")");
      }
    } catch (const std::exception& e) {
      any_failure = true;
      row.resize(1);
      row.push_back("error");
      row.push_back(std::string("error: ") + e.what());
      for (std::size_t i = 0; i < cls_sets.size(); ++i) row.push_back("error");
    }
    table.rows.push_back(std::move(row));
  }

  std::fputs(to_markdown(table).c_str(), stdout);
  if (!opts.csv_path.empty()) write_text_file(opts.csv_path, to_csv(table));
  if (!opts.md_path.empty()) {
    write_text_file(opts.md_path, to_markdown(table));
  }
  return any_failure ? 1 : 0;
}

// --- synth ----------------------------------------------------------------------

struct SynthOpts {
  CommonOpts common;
  std::string out_dir;
  SynthSpec spec;
};

int cmd_synth(const SynthOpts& opts) {
  RunConfig cfg = build_config(opts.common);
  SynthSpec spec = opts.spec;
  spec.seed = cfg.train.seed;
  if (opts.out_dir.empty()) throw ConfigError("--out-dir is required");
  SynthData data = synth_generate(spec);
  const std::string dir = opts.out_dir + "/";
  save_triplets(data.triplets, dir + "triplets.jsonl");
  save_scored_pairs(data.pairs, dir + "pairs.jsonl");
  save_labeled(data.labeled.train, dir + "labeled_train.jsonl");
  save_labeled(data.labeled.validation, dir + "labeled_val.jsonl");
  save_labeled(data.labeled.test, dir + "labeled_test.jsonl");
  std::printf("wrote %zu triplets, %zu pairs, %zu/%zu/%zu labeled to %s\n",
              data.triplets.size(), data.pairs.size(),
              data.labeled.train.size(), data.labeled.validation.size(),
              data.labeled.test.size(), opts.out_dir.c_str());
  return 0;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path,
                  "key=value configuration file");
  cmd->add_option("--set", opts.overrides,
                  "override a config key (key=value, repeatable)");
  cmd->add_option("--seed", opts.seed_flag, "root seed (overrides config)");
}

void add_embedder(CLI::App* cmd, EmbedderOpts& opts) {
  cmd->add_option("--model", opts.model_path, "encoder checkpoint");
  cmd->add_option("--vocab", opts.vocab_path,
                  "vocabulary file (default: checkpoint path + .vocab)");
  cmd->add_option("--wordvecs", opts.wordvecs_path, "word-vector text file");
  cmd->add_option("--buckets", opts.buckets_path,
                  "subword bucket vectors for OOV words");
  cmd->add_option("--pooling", opts.pooling, "cls|mean|max (default mean)");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"siamese sentence-embedding trainer and benchmark"};
  app.require_subcommand(1);

  TrainOpts train_opts;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train an encoder with a siamese objective");
  add_common(train_cmd, train_opts.common);
  train_cmd->add_option("--setup", train_opts.setup, "nli|sts|two-step")
      ->required();
  train_cmd->add_option("--nli", train_opts.nli_path, "NLI triplets (JSONL)");
  train_cmd->add_option("--sts", train_opts.sts_path,
                        "scored pairs (JSONL)");
  train_cmd->add_option("--out", train_opts.out_path, "checkpoint to write");
  train_cmd->add_option("--init", train_opts.init_path,
                        "resume from this checkpoint");
  train_cmd->add_option("--vocab", train_opts.vocab_path,
                        "vocabulary for --init (default: init path + .vocab)");
  train_cmd->add_option("--trace", train_opts.trace_path,
                        "write per-batch loss CSV here");

  EvalOpts eval_sts_opts, eval_cls_opts;
  CLI::App* eval_cmd = app.add_subcommand("eval", "benchmark an embedder");
  eval_cmd->require_subcommand(1);
  CLI::App* sts_cmd = eval_cmd->add_subcommand(
      "sts", "Spearman embedding-similarity against gold scores");
  add_common(sts_cmd, eval_sts_opts.common);
  add_embedder(sts_cmd, eval_sts_opts.embedder);
  sts_cmd->add_option("--data", eval_sts_opts.data_path,
                      "scored pairs (JSONL)");
  sts_cmd->add_option("--csv", eval_sts_opts.csv_path, "CSV report path");
  sts_cmd->add_option("--md", eval_sts_opts.md_path, "markdown report path");
  CLI::App* cls_cmd = eval_cmd->add_subcommand(
      "cls", "KNN classification accuracy with validated k");
  add_common(cls_cmd, eval_cls_opts.common);
  add_embedder(cls_cmd, eval_cls_opts.embedder);
  cls_cmd->add_option("--train", eval_cls_opts.train_path,
                      "labeled train split (JSONL)");
  cls_cmd->add_option("--val", eval_cls_opts.val_path,
                      "labeled validation split (JSONL)");
  cls_cmd->add_option("--test", eval_cls_opts.test_path,
                      "labeled test split (JSONL)");
  cls_cmd->add_option("--csv", eval_cls_opts.csv_path, "CSV report path");
  cls_cmd->add_option("--md", eval_cls_opts.md_path, "markdown report path");

  ReportPairsOpts report_opts;
  CLI::App* report_cmd = app.add_subcommand("report", "tabular reports");
  report_cmd->require_subcommand(1);
  CLI::App* pairs_cmd = report_cmd->add_subcommand(
      "pairs", "cosine similarity table for sentence pairs");
  add_common(pairs_cmd, report_opts.common);
  add_embedder(pairs_cmd, report_opts.embedder);
  pairs_cmd->add_option("--pairs", report_opts.pairs_path,
                        "sentence pairs (JSONL)");
  pairs_cmd->add_option("--csv", report_opts.csv_path, "CSV report path");

  CompareOpts compare_opts;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "evaluate a manifest of models on every metric");
  add_common(compare_cmd, compare_opts.common);
  compare_cmd->add_option("--manifest", compare_opts.manifest_path,
                          "JSON manifest of models and datasets");
  compare_cmd->add_option("--csv", compare_opts.csv_path, "CSV report path");
  compare_cmd->add_option("--md", compare_opts.md_path,
                          "markdown report path");

  SynthOpts synth_opts;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "generate the synthetic topic-word datasets");
  add_common(synth_cmd, synth_opts.common);
  synth_cmd->add_option("--out-dir", synth_opts.out_dir, "output directory");
  synth_cmd->add_option("--topics", synth_opts.spec.topics, "topic count");
  synth_cmd->add_option("--words-per-topic",
                        synth_opts.spec.words_per_topic, "vocab per topic");
  synth_cmd->add_option("--sentence-len", synth_opts.spec.sentence_len,
                        "words per sentence");
  synth_cmd->add_option("--triplets", synth_opts.spec.triplet_count,
                        "triplet count");
  synth_cmd->add_option("--pairs", synth_opts.spec.pair_count,
                        "scored pair count");
  synth_cmd->add_option("--labeled", synth_opts.spec.labeled_count,
                        "labeled text count");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // drop program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_opts);
    if (sts_cmd->parsed()) return cmd_eval_sts(eval_sts_opts);
    if (cls_cmd->parsed()) return cmd_eval_cls(eval_cls_opts);
    if (pairs_cmd->parsed()) return cmd_report_pairs(report_opts);
    if (compare_cmd->parsed()) return cmd_compare(compare_opts);
    if (synth_cmd->parsed()) return cmd_synth(synth_opts);
    std::fprintf(stderr, "no command selected\n");
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc));
  for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace sembed::cli
