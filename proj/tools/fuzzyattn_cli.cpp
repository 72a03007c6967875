// Command-line front end: synthesize a corpus, train, evaluate, explain, and
// run ablation sweeps. Exit codes: 0 success, 2 usage/config error, 3 numeric
// failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "fuzzyattn/analysis.hpp"
#include "fuzzyattn/checkpoint.hpp"
#include "fuzzyattn/metrics.hpp"
#include "fuzzyattn/pair_model.hpp"
#include "fuzzyattn/synth.hpp"
#include "fuzzyattn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fuzzyattn;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

json metrics_to_json(const EvalResult& r) {
  json j{{"accuracy", r.accuracy}, {"recall", r.recall},
         {"precision", r.precision}, {"f1", r.f1},
         {"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}};
  j["roc_auc"] = r.roc_auc ? json(*r.roc_auc) : json(nullptr);
  j["pr_auc"] = r.pr_auc ? json(*r.pr_auc) : json(nullptr);
  return j;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a_bytes(buf, static_cast<std::size_t>(in.gcount()), h);
    if (!in) break;
  }
  return h;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ContractError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// shared train/eval plumbing

struct ModelFlags {
  int depth = 3;
  std::int64_t d_model = 64;
  std::int64_t ffn = 128;
  std::int64_t rules = 10;
  std::int64_t head_hidden = 64;
  std::string structure = "time-first";
  std::string attn = "fuzzy";  // single kind or comma list, one per layer
};

std::vector<AttentionKind> parse_attention(const std::string& spec, int depth) {
  std::vector<AttentionKind> kinds;
  std::string token;
  std::stringstream ss(spec);
  while (std::getline(ss, token, ',')) kinds.push_back(attention_kind_from(token));
  if (kinds.size() == 1) kinds.assign(static_cast<size_t>(depth), kinds.front());
  if (kinds.size() != static_cast<size_t>(depth)) {
    throw ContractError("--attn lists " + std::to_string(kinds.size()) +
                        " kinds for depth " + std::to_string(depth));
  }
  return kinds;
}

EncoderConfig encoder_config_for(const ModelFlags& flags, const TrialSet& set) {
  EncoderConfig config;
  config.depth = flags.depth;
  config.d_model = flags.d_model;
  config.ffn_hidden = flags.ffn;
  config.rules = flags.rules;
  config.structure = structure_from(flags.structure);
  config.attention_kinds = parse_attention(flags.attn, flags.depth);
  const std::int64_t t_count = set.t_samples();
  if (config.structure == InputStructure::kChannelFirst) {
    config.max_tokens = ChannelLayout::kFeatures;
    config.token_features = t_count;
  } else {
    config.max_tokens = t_count;
    config.token_features = ChannelLayout::kFeatures;
  }
  config.validate();
  return config;
}

json run_config_json(const EncoderConfig& encoder, const OptimConfig& optim,
                     std::int64_t head_hidden, std::uint64_t seed) {
  return json{{"encoder", encoder_config_to_json(encoder)},
              {"optim", optim_config_to_json(optim)},
              {"head_hidden", head_hidden},
              {"seed", seed}};
}

struct LoadedModel {
  PairClassifier model;
  json config;
};

LoadedModel model_from_checkpoint(const std::string& path) {
  CheckpointData data = load_checkpoint(path);
  const json& config = data.manifest.at("config");
  EncoderConfig encoder = encoder_config_from_json(config.at("encoder"));
  PairClassifier model(encoder, config.at("head_hidden").get<std::int64_t>(),
                       config.at("seed").get<std::uint64_t>());
  ParamList params = model.parameters();
  apply_checkpoint(data, params);
  return {std::move(model), config};
}

void check_dataset_compat(const PairClassifier& model, const TrialSet& set) {
  const EncoderConfig& config = model.encoder().config();
  const std::int64_t t_count = set.t_samples();
  const std::int64_t want_tokens = config.structure == InputStructure::kChannelFirst
                                       ? ChannelLayout::kFeatures
                                       : t_count;
  const std::int64_t want_features = config.structure == InputStructure::kChannelFirst
                                         ? t_count
                                         : ChannelLayout::kFeatures;
  if (config.max_tokens != want_tokens || config.token_features != want_features) {
    throw ContractError("checkpoint was built for a different epoch geometry "
                        "than this dataset");
  }
}

struct TrainOutputs {
  TrainResult result;
  json config;
};

TrainOutputs run_training(PairClassifier& model, const TrialSet& set,
                          const OptimConfig& optim, std::int64_t head_hidden) {
  TrainOutputs out;
  out.config = run_config_json(model.encoder().config(), optim, head_hidden,
                               optim.seed);
  out.result = train(model, set, optim);
  return out;
}

void write_history(const std::string& path, const json& config,
                   const std::vector<EpochRecord>& history) {
  std::string text;
  json head{{"format", "history"},
            {"version", 1},
            {"seed", config.at("seed")},
            {"config_hash",
             hash_hex(fnv1a_bytes(config.dump().data(), config.dump().size()))}};
  text += head.dump() + "\n";
  for (const EpochRecord& r : history) {
    json line{{"epoch", r.epoch},
              {"lr", r.lr},
              {"train_loss", r.train_loss},
              {"val", metrics_to_json(r.val)}};
    text += line.dump() + "\n";
  }
  write_text(path, text);
}

// ---------------------------------------------------------------------------
// subcommands

struct SynthArgs {
  int dyads = 10;
  int per_condition = 20;
  std::uint64_t seed = 1;
  std::string output;
  GenConfig gen;
};

int cmd_synth(const SynthArgs& args) {
  TrialSet set = build_dataset(args.seed, args.dyads, args.per_condition, args.gen);
  write_ftrial(args.output, set);

  std::size_t positives = 0;
  for (const Trial& t : set.trials) positives += t.label == 1 ? 1 : 0;
  json summary{{"file", args.output},
               {"trials", set.trials.size()},
               {"positives", positives},
               {"negatives", set.trials.size() - positives},
               {"t_samples", set.t_samples()},
               {"features", ChannelLayout::kFeatures},
               {"probe_accuracy", probe_accuracy(set)},
               {"seed", args.seed}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string out_dir = "run";
  ModelFlags model;
  OptimConfig optim;
};

int cmd_train(const TrainArgs& args) {
  TrialSet set = read_ftrial(args.data);
  EncoderConfig encoder = encoder_config_for(args.model, set);
  PairClassifier model(encoder, args.model.head_hidden, args.optim.seed);

  fs::create_directories(args.out_dir);
  TrainOutputs outputs = run_training(model, set, args.optim, args.model.head_hidden);
  const TrainResult& result = outputs.result;

  json digest{{"epochs", result.history.size()},
              {"best_epoch", result.best_epoch},
              {"best_val", metrics_to_json(result.best_val)},
              {"final_train_loss",
               result.history.empty() ? 0.0 : result.history.back().train_loss}};
  ParamList params = model.parameters();
  const std::string ckpt_path = (fs::path(args.out_dir) / "checkpoint.fckpt").string();
  save_checkpoint(ckpt_path, outputs.config, params, digest);

  write_history((fs::path(args.out_dir) / "history.jsonl").string(), outputs.config,
                result.history);

  json manifest{{"format", "run-manifest"},
                {"version", 1},
                {"created_at", iso_timestamp()},
                {"command", "train"},
                {"dataset", args.data},
                {"dataset_hash", hash_hex(file_hash(args.data))},
                {"seed", args.optim.seed},
                {"config", outputs.config},
                {"config_hash", hash_hex(fnv1a_bytes(outputs.config.dump().data(),
                                                     outputs.config.dump().size()))},
                {"split",
                 json{{"train", result.split.train},
                      {"val", result.split.val},
                      {"test", result.split.test}}}};
  write_text((fs::path(args.out_dir) / "run_manifest.json").string(),
             manifest.dump(2) + "\n");

  json report{{"best_epoch", result.best_epoch},
              {"best_val", metrics_to_json(result.best_val)},
              {"checkpoint", ckpt_path}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

struct EvalArgs {
  std::string data;
  std::string checkpoint;
  std::string out_dir = "eval";
  std::string split = "all";
};

int cmd_eval(const EvalArgs& args) {
  TrialSet set = read_ftrial(args.data);
  LoadedModel loaded = model_from_checkpoint(args.checkpoint);
  check_dataset_compat(loaded.model, set);

  std::vector<int> indices;
  if (args.split == "all") {
    for (size_t i = 0; i < set.trials.size(); ++i) indices.push_back(static_cast<int>(i));
  } else {
    const std::uint64_t seed = loaded.config.at("seed").get<std::uint64_t>();
    SplitIndices split = split_trials(static_cast<std::int64_t>(set.trials.size()), seed);
    if (args.split == "train") indices = split.train;
    else if (args.split == "val") indices = split.val;
    else if (args.split == "test") indices = split.test;
    else throw ContractError("--split must be one of all/train/val/test");
  }

  const std::vector<double> scores = pair_scores(loaded.model, set, indices);
  std::vector<int> labels;
  for (int i : indices) labels.push_back(set.trials[static_cast<size_t>(i)].label);
  const EvalResult metrics = classification_metrics(scores, labels);

  fs::create_directories(args.out_dir);
  const std::string config_hash =
      hash_hex(fnv1a_bytes(loaded.config.dump().data(), loaded.config.dump().size()));

  json report{{"format", "eval"},
              {"version", 1},
              {"seed", loaded.config.at("seed")},
              {"config_hash", config_hash},
              {"split", args.split},
              {"n", indices.size()},
              {"metrics", metrics_to_json(metrics)}};
  write_text((fs::path(args.out_dir) / "eval.json").string(), report.dump(2) + "\n");

  std::string lines;
  json head{{"format", "predictions"},
            {"version", 1},
            {"seed", loaded.config.at("seed")},
            {"config_hash", config_hash}};
  lines += head.dump() + "\n";
  for (size_t i = 0; i < indices.size(); ++i) {
    const Trial& t = set.trials[static_cast<size_t>(indices[i])];
    const int pred = scores[i] >= 0.5 ? 1 : 0;
    json line{{"dyad", t.dyad},
              {"trial", t.trial_id},
              {"label", t.label},
              {"score", scores[i]},
              {"pred", pred},
              {"correct", pred == t.label},
              {"image_type", t.image_type},
              {"relationship", t.relationship}};
    lines += line.dump() + "\n";
  }
  write_text((fs::path(args.out_dir) / "predictions.jsonl").string(), lines);

  std::cout << report.dump(2) << "\n";
  return 0;
}

struct ExplainArgs {
  std::string data;
  std::string checkpoint;
  std::string output = "explanation.json";
  int sample = 0;
  int layer = -1;  // -1: deepest fuzzy layer
  int top_k = 3;
};

int cmd_explain(const ExplainArgs& args) {
  TrialSet set = read_ftrial(args.data);
  LoadedModel loaded = model_from_checkpoint(args.checkpoint);
  check_dataset_compat(loaded.model, set);
  if (args.sample < 0 || args.sample >= static_cast<int>(set.trials.size())) {
    throw ContractError("--sample " + std::to_string(args.sample) +
                        " out of range for " + std::to_string(set.trials.size()) +
                        " trials");
  }
  const int layer = args.layer >= 0 ? args.layer : default_explain_layer(loaded.model);
  const InputStructure structure = loaded.model.encoder().config().structure;

  const SampleExplanation sample =
      explain_sample(set.trials[static_cast<size_t>(args.sample)], loaded.model,
                     layer, args.top_k);
  const GroupRuleMap map = group_rule_map(set, loaded.model, layer);
  const std::vector<Prototype> prototypes = center_prototypes(loaded.model, layer);
  const IbsGroupResult ibs = ibs_group_test(set, loaded.model);

  json sample_json{{"trial", sample.trial_id}, {"label", sample.label}, {"rules", json::array()}};
  for (const RuleReportEntry& r : sample.rules) {
    json tops = json::array();
    for (int tok : r.top_tokens) {
      tops.push_back(json{{"token", tok},
                          {"label", sample.token_labels[static_cast<size_t>(tok)]}});
    }
    sample_json["rules"].push_back(json{
        {"rule", r.rule + 1}, {"firing_strength", r.strength}, {"top", tops}});
  }

  json proto_json = json::array();
  const InputStructure raw_structure = structure == InputStructure::kChannelFirst
                                           ? InputStructure::kTimeFirst
                                           : InputStructure::kChannelFirst;
  for (const Prototype& p : prototypes) {
    json entry{{"rule", p.rule + 1},
               {"center", p.center},
               {"layer_input", p.layer_input},
               {"residual", p.residual}};
    if (!p.raw_input.empty()) {
      entry["raw_input"] = p.raw_input;
      entry["raw_labels"] = token_labels_for(
          raw_structure, static_cast<std::int64_t>(p.raw_input.size()));
    } else {
      entry["raw_input"] = nullptr;
    }
    proto_json.push_back(std::move(entry));
  }

  auto ibs_json = [](const IbsMetricTest& m) {
    return json{{"t", m.test.t},         {"p", m.test.p},
                {"df", m.test.df},       {"mean_h1", m.mean_h1},
                {"mean_h0", m.mean_h0},  {"n_h1", m.n_h1},
                {"n_h0", m.n_h0},        {"degenerate", m.test.degenerate}};
  };

  const std::string config_hash =
      hash_hex(fnv1a_bytes(loaded.config.dump().data(), loaded.config.dump().size()));
  json report{{"format", "explanation"},
              {"version", 1},
              {"seed", loaded.config.at("seed")},
              {"config_hash", config_hash},
              {"structure", to_string(structure)},
              {"layer", layer},
              {"sample", sample_json},
              {"group_t_map",
               json{{"t", map.t}, {"p", map.p}, {"token_labels", map.token_labels}}},
              {"prototypes", proto_json},
              {"ibs",
               json{{"pearson", ibs_json(ibs.pearson)},
                    {"cosine", ibs_json(ibs.cosine)},
                    {"euclidean", ibs_json(ibs.euclidean)}}}};
  write_text(args.output, report.dump(2) + "\n");
  std::cout << "wrote " << args.output << "\n";
  return 0;
}

struct AblateArgs {
  std::string data;
  std::string grid;
  std::vector<std::int64_t> values;
  std::string out_dir = "ablate";
  ModelFlags model;
  OptimConfig optim;
};

int cmd_ablate(const AblateArgs& args) {
  TrialSet set = read_ftrial(args.data);
  fs::create_directories(args.out_dir);

  struct Cell {
    std::string label;
    ModelFlags flags;
  };
  std::vector<Cell> cells;
  if (args.grid == "replace") {
    // every non-empty subset of layers replaced by the rule-based attention
    const int depth = args.model.depth;
    for (int mask = 1; mask < (1 << depth); ++mask) {
      std::string label, attn;
      for (int layer = 0; layer < depth; ++layer) {
        const bool fuzzy = mask & (1 << layer);
        if (fuzzy) label += (label.empty() ? "" : "+") + std::to_string(layer + 1);
        attn += (layer ? "," : "") + std::string(fuzzy ? "fuzzy" : "dot");
      }
      Cell cell{label, args.model};
      cell.flags.attn = attn;
      cells.push_back(std::move(cell));
    }
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
      return std::count(a.label.begin(), a.label.end(), '+') <
             std::count(b.label.begin(), b.label.end(), '+');
    });
  } else if (args.grid == "rules") {
    if (args.values.empty()) throw ContractError("ablate: --values required for the rules grid");
    for (std::int64_t r : args.values) {
      Cell cell{std::to_string(r), args.model};
      cell.flags.rules = r;
      cells.push_back(std::move(cell));
    }
  } else if (args.grid == "depth") {
    if (args.values.empty()) throw ContractError("ablate: --values required for the depth grid");
    for (std::int64_t d : args.values) {
      Cell cell{std::to_string(d), args.model};
      cell.flags.depth = static_cast<int>(d);
      cells.push_back(std::move(cell));
    }
  } else {
    throw ContractError("ablate: --grid must be replace, rules or depth");
  }
  if (cells.empty()) throw ContractError("ablate: empty grid");

  json config_probe = optim_config_to_json(args.optim);
  const std::string config_hash = hash_hex(
      fnv1a_bytes(config_probe.dump().data(), config_probe.dump().size()));

  std::string csv = "# format=ablate version=1 seed=" +
                    std::to_string(args.optim.seed) + " config_hash=" + config_hash +
                    "\n";
  csv += "grid,cell,accuracy,recall,precision,f1,roc_auc,pr_auc\n";
  // shortest round-trip decimals, so the table reloads losslessly
  auto num = [](double v) { return json(v).dump(); };
  auto field = [&](const std::optional<double>& v) {
    return v ? num(*v) : std::string("");
  };
  for (const Cell& cell : cells) {
    EncoderConfig encoder = encoder_config_for(cell.flags, set);
    PairClassifier model(encoder, cell.flags.head_hidden, args.optim.seed);
    TrainResult result = train(model, set, args.optim);
    const EvalResult metrics = evaluate(model, set, result.split.test);
    csv += args.grid + "," + cell.label + "," + num(metrics.accuracy) + "," +
           num(metrics.recall) + "," + num(metrics.precision) + "," +
           num(metrics.f1) + "," + field(metrics.roc_auc) + "," +
           field(metrics.pr_auc) + "\n";
    std::cout << args.grid << "[" << cell.label << "] done\n";
  }
  write_text((fs::path(args.out_dir) / "sweep.csv").string(), csv);
  std::cout << "wrote " << (fs::path(args.out_dir) / "sweep.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // training churns through large short-lived buffers; keep them on the heap
  // instead of bouncing mmap/munmap every batch
  mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
#endif
  CLI::App app{"Rule-based attention workbench for paired two-stream recordings"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--dyads", synth_args.dyads, "number of dyads")->check(CLI::PositiveNumber);
  synth->add_option("--per-condition", synth_args.per_condition,
                    "trials per condition per dyad")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_args.seed, "corpus seed");
  synth->add_option("-o,--output", synth_args.output, "output .ftrial path")->required();
  synth->add_option("--amplitude", synth_args.gen.amplitude, "response amplitude");
  synth->add_option("--amplitude-shift", synth_args.gen.amplitude_shift,
                    "extra amplitude under the positive condition");
  synth->add_option("--noise-sd", synth_args.gen.noise_sd, "white noise sd");
  synth->add_option("--jitter-sd", synth_args.gen.jitter_sd, "amplitude jitter sd");
  synth->add_option("--couple-h1", synth_args.gen.couple_h1, "coupling, positive trials");
  synth->add_option("--couple-h0", synth_args.gen.couple_h0, "coupling, negative trials");
  synth->add_option("--drift", synth_args.gen.drift_amplitude, "drift amplitude");
  synth->add_option("--window", synth_args.gen.window_seconds, "epoch window seconds");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a classifier");
  train_cmd->add_option("--data", train_args.data, "input .ftrial corpus")->required();
  train_cmd->add_option("-o,--out", train_args.out_dir, "output directory");
  train_cmd->add_option("--depth", train_args.model.depth)->check(CLI::PositiveNumber);
  train_cmd->add_option("--d-model", train_args.model.d_model)->check(CLI::PositiveNumber);
  train_cmd->add_option("--ffn", train_args.model.ffn)->check(CLI::PositiveNumber);
  train_cmd->add_option("--rules", train_args.model.rules)->check(CLI::PositiveNumber);
  train_cmd->add_option("--head-hidden", train_args.model.head_hidden)->check(CLI::PositiveNumber);
  train_cmd->add_option("--structure", train_args.model.structure,
                        "channel-first or time-first");
  train_cmd->add_option("--attn", train_args.model.attn,
                        "attention kind per layer (single value or comma list)");
  train_cmd->add_option("--epochs", train_args.optim.max_epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--warmup", train_args.optim.warmup_epochs);
  train_cmd->add_option("--batch", train_args.optim.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--base-lr", train_args.optim.base_lr);
  train_cmd->add_option("--weight-decay", train_args.optim.weight_decay);
  train_cmd->add_option("--seed", train_args.optim.seed);

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--data", eval_args.data)->required();
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();
  eval_cmd->add_option("-o,--out", eval_args.out_dir, "output directory");
  eval_cmd->add_option("--split", eval_args.split, "all/train/val/test");

  ExplainArgs explain_args;
  CLI::App* explain_cmd = app.add_subcommand("explain", "interpretability report");
  explain_cmd->add_option("--data", explain_args.data)->required();
  explain_cmd->add_option("--checkpoint", explain_args.checkpoint)->required();
  explain_cmd->add_option("-o,--output", explain_args.output, "report path");
  explain_cmd->add_option("--sample", explain_args.sample, "trial index to explain");
  explain_cmd->add_option("--layer", explain_args.layer,
                          "fuzzy layer index (default: deepest)");
  explain_cmd->add_option("--top-k", explain_args.top_k)->check(CLI::PositiveNumber);

  AblateArgs ablate_args;
  ablate_args.optim.max_epochs = 60;
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "run an ablation grid");
  ablate_cmd->add_option("--data", ablate_args.data)->required();
  ablate_cmd->add_option("--grid", ablate_args.grid, "replace, rules or depth")->required();
  ablate_cmd->add_option("--values", ablate_args.values,
                         "grid values (rules/depth grids)")->delimiter(',');
  ablate_cmd->add_option("-o,--out", ablate_args.out_dir, "output directory");
  ablate_cmd->add_option("--depth", ablate_args.model.depth)->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--d-model", ablate_args.model.d_model)->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--ffn", ablate_args.model.ffn)->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--rules", ablate_args.model.rules)->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--structure", ablate_args.model.structure);
  ablate_cmd->add_option("--epochs", ablate_args.optim.max_epochs)->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--warmup", ablate_args.optim.warmup_epochs);
  ablate_cmd->add_option("--batch", ablate_args.optim.batch_size)->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--base-lr", ablate_args.optim.base_lr);
  ablate_cmd->add_option("--seed", ablate_args.optim.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(synth_args);
    if (*train_cmd) return cmd_train(train_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*explain_cmd) return cmd_explain(explain_args);
    if (*ablate_cmd) return cmd_ablate(ablate_args);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
