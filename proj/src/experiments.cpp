#include "pico/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pico/baseline.hpp"
#include "pico/error.hpp"
#include "pico/io.hpp"

namespace pico {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok)
      throw ValidationError(std::string("config: unknown key '") + key + "' in " + where);
  }
}

json train_to_json(const TrainConfig& t) {
  return {
      {"epochs", t.epochs},           {"learning_rate", t.learning_rate},
      {"beta1", t.beta1},             {"beta2", t.beta2},
      {"adam_eps", t.adam_eps},       {"grad_clip_norm", t.grad_clip_norm},
      {"freeze_library", t.freeze_library}, {"batch", t.batch},
  };
}

TrainConfig train_from_json(const json& obj, const TrainConfig& defaults) {
  check_keys(obj, "train section",
             {"epochs", "learning_rate", "beta1", "beta2", "adam_eps", "grad_clip_norm",
              "freeze_library", "batch"});
  TrainConfig t = defaults;
  t.epochs = obj.value("epochs", t.epochs);
  t.learning_rate = obj.value("learning_rate", t.learning_rate);
  t.beta1 = obj.value("beta1", t.beta1);
  t.beta2 = obj.value("beta2", t.beta2);
  t.adam_eps = obj.value("adam_eps", t.adam_eps);
  t.grad_clip_norm = obj.value("grad_clip_norm", t.grad_clip_norm);
  t.freeze_library = obj.value("freeze_library", t.freeze_library);
  t.batch = obj.value("batch", t.batch);
  return t;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  train.freeze_library = true;
  pretrain.epochs = 30;
  pretrain.batch = 64;
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds = {"reconstruct", "gap_ablation",
                                                 "compare_baselines", "latent"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw ValidationError("config: unknown kind '" + kind + "'");
  if (domain != "blockworld" && domain != "dialpad")
    throw ValidationError("config: unknown domain '" + domain + "'");
  if (format != "csv" && format != "json")
    throw ValidationError("config: unknown format '" + format + "'");
  if (seeds.empty()) throw ValidationError("config: seeds must be non-empty");
  if (threads < 1) throw ValidationError("config: threads must be >= 1");
  if (dataset.n < 2) throw ValidationError("config: dataset.n must be >= 2");
  if (dataset.train_fraction <= 0.0 || dataset.train_fraction >= 1.0)
    throw ValidationError("config: dataset.train_fraction must lie in (0, 1)");
  if (dataset.n_train < 1 || dataset.n_test < 1)
    throw ValidationError("config: dataset.n_train/n_test must be >= 1");
  if (dataset.keys < dataset.sketch_len || dataset.sketch_len < 1)
    throw ValidationError("config: need keys >= sketch_len >= 1");
  if (dataset.noise_std < 0.0) throw ValidationError("config: noise_std must be >= 0");
  if (model.encoder_dim < 1 || model.hidden_dim < 1)
    throw ValidationError("config: model dims must be >= 1");
  train.validate();
  pretrain.validate();
}

std::string ExperimentConfig::to_json_string() const {
  json j = {
      {"kind", kind},
      {"domain", domain},
      {"out_dir", out_dir},
      {"seeds", seeds},
      {"threads", threads},
      {"format", format},
      {"dataset",
       {{"n", dataset.n},
        {"train_fraction", dataset.train_fraction},
        {"n_train", dataset.n_train},
        {"n_test", dataset.n_test},
        {"keys", dataset.keys},
        {"sketch_len", dataset.sketch_len},
        {"noise_std", dataset.noise_std},
        {"seed", dataset.seed},
        {"generate", dataset.generate},
        {"file", dataset.file},
        {"train_file", dataset.train_file},
        {"test_file", dataset.test_file}}},
      {"model",
       {{"encoder_dim", model.encoder_dim},
        {"hidden_dim", model.hidden_dim},
        {"primitive_hidden", model.primitive_hidden}}},
      {"train", train_to_json(train)},
      {"pretrain", train_to_json(pretrain)},
  };
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"kind", "domain", "out_dir", "seeds", "threads", "format", "dataset", "model",
              "train", "pretrain"});
  ExperimentConfig cfg;
  cfg.kind = j.value("kind", cfg.kind);
  cfg.domain = j.value("domain", cfg.domain);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.threads = j.value("threads", cfg.threads);
  cfg.format = j.value("format", cfg.format);
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_keys(d, "dataset section",
               {"n", "train_fraction", "n_train", "n_test", "keys", "sketch_len", "noise_std",
                "seed", "generate", "file", "train_file", "test_file"});
    cfg.dataset.n = d.value("n", cfg.dataset.n);
    cfg.dataset.train_fraction = d.value("train_fraction", cfg.dataset.train_fraction);
    cfg.dataset.n_train = d.value("n_train", cfg.dataset.n_train);
    cfg.dataset.n_test = d.value("n_test", cfg.dataset.n_test);
    cfg.dataset.keys = d.value("keys", cfg.dataset.keys);
    cfg.dataset.sketch_len = d.value("sketch_len", cfg.dataset.sketch_len);
    cfg.dataset.noise_std = d.value("noise_std", cfg.dataset.noise_std);
    cfg.dataset.seed = d.value("seed", cfg.dataset.seed);
    cfg.dataset.generate = d.value("generate", cfg.dataset.generate);
    cfg.dataset.file = d.value("file", cfg.dataset.file);
    cfg.dataset.train_file = d.value("train_file", cfg.dataset.train_file);
    cfg.dataset.test_file = d.value("test_file", cfg.dataset.test_file);
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, "model section", {"encoder_dim", "hidden_dim", "primitive_hidden"});
    cfg.model.encoder_dim = m.value("encoder_dim", cfg.model.encoder_dim);
    cfg.model.hidden_dim = m.value("hidden_dim", cfg.model.hidden_dim);
    if (m.contains("primitive_hidden"))
      cfg.model.primitive_hidden = m.at("primitive_hidden").get<std::vector<int>>();
  }
  if (j.contains("train")) cfg.train = train_from_json(j.at("train"), cfg.train);
  if (j.contains("pretrain")) cfg.pretrain = train_from_json(j.at("pretrain"), cfg.pretrain);
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  return from_json_string(io::read_text_file(path));
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = fnv1a64(to_json_string());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- building blocks ---------------------------------------------------------

namespace detail {

std::string primitive_name(const std::string& domain, int label) {
  if (domain == "blockworld") {
    static const char* names[] = {"reach", "grasp", "lift"};
    if (label >= 0 && label < 3) return names[label];
  }
  return "key" + std::to_string(label);
}

std::vector<PrimitivePolicy> pretrain_library(std::span<const Demonstration> demos,
                                              const DatasetInfo& info, const ModelParams& model,
                                              const TrainConfig& pretrain_cfg,
                                              std::uint64_t seed) {
  std::vector<PrimitivePolicy> policies;
  MlpConfig mlp{info.state_dim, info.action_dim, model.primitive_hidden};
  NoiseConfig noise{info.action_noise_std};
  for (int label = 0; label < info.num_primitives; ++label) {
    auto segments = segments_with_label(demos, label);
    TrainConfig cfg = pretrain_cfg;
    cfg.seed = seed ^ fnv1a64("bc-" + std::to_string(label));
    policies.push_back(pretrain_primitive(primitive_name(info.domain, label), segments, noise,
                                          cfg, mlp));
  }
  return policies;
}

PicoNetwork build_network(const std::vector<const PrimitivePolicy*>& slot_policies,
                          const std::vector<int>& gap_slots, const DatasetInfo& info,
                          const ModelParams& model, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.state_dim = info.state_dim;
  cfg.action_dim = info.action_dim;
  cfg.encoder_dim = model.encoder_dim;
  cfg.hidden_dim = model.hidden_dim;
  cfg.primitive_hidden = model.primitive_hidden;
  Rng rng = Rng::stream(seed, "init");
  PicoNetwork net = PicoNetwork::with_controller(cfg, rng);
  for (std::size_t slot = 0; slot < slot_policies.size(); ++slot) {
    bool is_gap = std::find(gap_slots.begin(), gap_slots.end(), static_cast<int>(slot)) !=
                  gap_slots.end();
    if (is_gap)
      net.add_random_primitive({"gap_" + std::to_string(slot), PrimitiveOrigin::gap}, rng);
    else
      net.add_primitive(*slot_policies[slot], rng);
  }
  return net;
}

PicoEvaluation evaluate_pico(const PicoNetwork& net, std::span<const Demonstration> demos) {
  if (demos.empty()) throw ValidationError("evaluate_pico: empty evaluation set");
  std::vector<std::vector<int>> pred_labels, true_labels;
  std::vector<std::vector<Tensor>> pred_actions, true_actions;
  PicoEvaluation eval;
  for (const Demonstration& demo : demos) {
    auto records = net.rollout(demo.states);
    std::vector<Tensor> blended;
    blended.reserve(records.size());
    for (const auto& rec : records) blended.push_back(rec.blended_action);
    pred_labels.push_back(predict_labels(records));
    true_labels.push_back(demo.labels);
    pred_actions.push_back(std::move(blended));
    true_actions.push_back(demo.actions);
    eval.rollouts.push_back(std::move(records));
  }
  eval.report = evaluate_labels_and_actions(pred_labels, true_labels, pred_actions, true_actions,
                                            net.library_size());
  return eval;
}

}  // namespace detail

// --- experiment driver ---------------------------------------------------------

namespace {

namespace fs = std::filesystem;

struct RunUnit {
  std::string condition;  // "all" or "drop_<name>"; "-" when not applicable
  std::uint64_t seed = 0;
  int drop_label = -1;  // gap ablation only
};

Dataset load_or_generate_blockworld(const ExperimentConfig& cfg) {
  if (!cfg.dataset.file.empty()) return io::read_dataset_file(cfg.dataset.file);
  if (!cfg.dataset.generate)
    throw ValidationError("config: dataset.generate is false and no dataset.file given");
  return generate_blockworld(cfg.dataset.n, cfg.dataset.seed, NoiseConfig{cfg.dataset.noise_std});
}

std::pair<Dataset, Dataset> load_or_generate_dialpad(const ExperimentConfig& cfg) {
  if (!cfg.dataset.train_file.empty() && !cfg.dataset.test_file.empty())
    return {io::read_dataset_file(cfg.dataset.train_file),
            io::read_dataset_file(cfg.dataset.test_file)};
  if (!cfg.dataset.generate)
    throw ValidationError("config: dataset.generate is false and no dataset files given");
  NoiseConfig noise{cfg.dataset.noise_std};
  Dataset train = generate_dialpad(cfg.dataset.n_train, cfg.dataset.keys, cfg.dataset.sketch_len,
                                   cfg.dataset.seed ^ fnv1a64("dial-train"), noise);
  Dataset test = generate_dialpad(cfg.dataset.n_test, cfg.dataset.keys, cfg.dataset.sketch_len,
                                  cfg.dataset.seed ^ fnv1a64("dial-test"), noise);
  return {std::move(train), std::move(test)};
}

std::vector<std::vector<std::string>> history_rows(const TrainingHistory& history) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"epoch", "train_loss", "val_loss", "val_label_accuracy"});
  for (std::size_t e = 0; e < history.epochs.size(); ++e) {
    const EpochStats& s = history.epochs[e];
    rows.push_back({std::to_string(e), io::format_double(s.train_loss),
                    s.val_loss ? io::format_double(*s.val_loss) : "",
                    s.val_label_accuracy ? io::format_double(*s.val_label_accuracy) : ""});
  }
  return rows;
}

// Per-unit artifacts land in <out>/<tag>; returns rows for the metrics table.
struct UnitOutput {
  std::vector<MetricRow> rows;
  std::vector<std::string> files;
};

UnitOutput run_blockworld_unit(const ExperimentConfig& cfg, const Dataset& dataset,
                               const RunUnit& unit, const fs::path& out_dir) {
  auto [train, test] = split_dataset(dataset, cfg.dataset.train_fraction, unit.seed);

  TrainConfig pretrain_cfg = cfg.pretrain;
  auto policies =
      detail::pretrain_library(train.demos, dataset.info, cfg.model, pretrain_cfg, unit.seed);

  std::vector<const PrimitivePolicy*> slots;
  for (const auto& p : policies) slots.push_back(&p);
  std::vector<int> gap_slots;
  if (unit.drop_label >= 0) gap_slots.push_back(unit.drop_label);

  PicoNetwork net = detail::build_network(slots, gap_slots, dataset.info, cfg.model, unit.seed);

  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = unit.seed;
  TrainingHistory history = train_pico(net, train.demos, train_cfg, test.demos);

  auto eval = detail::evaluate_pico(net, test.demos);

  MetricRow row;
  row.method = "pico";
  row.condition = unit.condition;
  row.seed = unit.seed;
  row.label_accuracy = eval.report.label_accuracy;
  row.action_mse = eval.report.action_mse;
  row.train_loss = history.epochs.back().train_loss;

  if (unit.drop_label >= 0) {
    // How much of the dropped skill the gap slot claims, and how well the gap
    // policy reproduces the skill against the pretrained reference.
    long long claimed = 0, total = 0;
    for (std::size_t i = 0; i < test.demos.size(); ++i) {
      const Demonstration& demo = test.demos[i];
      const auto& records = eval.rollouts[i];
      for (std::size_t t = 0; t < demo.labels.size(); ++t) {
        if (demo.labels[t] != unit.drop_label) continue;
        ++total;
        if (records[t].label == unit.drop_label) ++claimed;
      }
    }
    auto held_out = segments_with_label(test.demos, unit.drop_label);
    double gap_sq = 0.0, ref_sq = 0.0;
    long long count = 0;
    Tape tape(false);
    Session session(tape, net.params());
    for (const StateAction& sa : held_out) {
      Value gap_pred = net.primitive_forward(session, unit.drop_label,
                                             session.tape().constant(sa.state));
      Tensor ref_pred = policies[static_cast<std::size_t>(unit.drop_label)].forward(sa.state);
      for (int d = 0; d < sa.action.size(); ++d) {
        double gd = gap_pred.tensor()[d] - sa.action[d];
        double rd = ref_pred[d] - sa.action[d];
        gap_sq += gd * gd;
        ref_sq += rd * rd;
        ++count;
      }
    }
    row.gap_claim_fraction = total > 0 ? static_cast<double>(claimed) / total : 0.0;
    row.gap_action_mse = count > 0 ? gap_sq / count : 0.0;
    row.ref_action_mse = count > 0 ? ref_sq / count : 0.0;
  }

  UnitOutput out;
  fs::path unit_dir = out_dir / (unit.condition + "_seed" + std::to_string(unit.seed));
  fs::create_directories(unit_dir);
  io::write_checkpoint_file(net, unit_dir / "checkpoint.jsonl");
  io::write_csv(history_rows(history), unit_dir / "history.csv");
  out.files.push_back((unit_dir / "checkpoint.jsonl").lexically_relative(out_dir).string());
  out.files.push_back((unit_dir / "history.csv").lexically_relative(out_dir).string());
  out.rows.push_back(std::move(row));
  return out;
}

UnitOutput run_compare_unit(const ExperimentConfig& cfg, const Dataset& train,
                            const Dataset& test, const RunUnit& unit, const fs::path& out_dir) {
  UnitOutput out;
  fs::path unit_dir = out_dir / ("seed" + std::to_string(unit.seed));
  fs::create_directories(unit_dir);

  // PICO with a ground-truth pretrained, frozen library.
  auto policies = detail::pretrain_library(train.demos, train.info, cfg.model, cfg.pretrain,
                                           unit.seed);
  std::vector<const PrimitivePolicy*> slots;
  for (const auto& p : policies) slots.push_back(&p);
  PicoNetwork net = detail::build_network(slots, {}, train.info, cfg.model, unit.seed);
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = unit.seed;
  TrainingHistory history = train_pico(net, train.demos, train_cfg, test.demos);
  auto eval = detail::evaluate_pico(net, test.demos);

  MetricRow pico_row;
  pico_row.method = "pico";
  pico_row.condition = "-";
  pico_row.seed = unit.seed;
  pico_row.label_accuracy = eval.report.label_accuracy;
  pico_row.action_mse = eval.report.action_mse;
  pico_row.train_loss = history.epochs.back().train_loss;
  out.rows.push_back(pico_row);

  io::write_checkpoint_file(net, unit_dir / "checkpoint.jsonl");
  io::write_csv(history_rows(history), unit_dir / "history.csv");
  out.files.push_back((unit_dir / "checkpoint.jsonl").lexically_relative(out_dir).string());
  out.files.push_back((unit_dir / "history.csv").lexically_relative(out_dir).string());

  // CTC baseline: sketch-aligned emissions, then per-label cloning.
  CtcModelConfig ctc_cfg;
  ctc_cfg.state_dim = train.info.state_dim;
  ctc_cfg.num_labels = train.info.num_primitives;
  ctc_cfg.encoder_dim = cfg.model.encoder_dim;
  ctc_cfg.hidden_dim = cfg.model.hidden_dim;
  MlpConfig policy_mlp{train.info.state_dim, train.info.action_dim, cfg.model.primitive_hidden};
  TrainConfig ctc_train = cfg.train;
  ctc_train.seed = unit.seed;
  CtcBaseline baseline = train_ctc_baseline(train.demos, ctc_train, ctc_cfg, policy_mlp);
  EvaluationReport ctc_report = evaluate_ctc(baseline, test.demos);

  MetricRow ctc_row;
  ctc_row.method = "ctc";
  ctc_row.condition = "-";
  ctc_row.seed = unit.seed;
  ctc_row.label_accuracy = ctc_report.label_accuracy;
  ctc_row.action_mse = ctc_report.action_mse;
  ctc_row.train_loss = 0.0;
  out.rows.push_back(ctc_row);
  return out;
}

std::vector<std::vector<std::string>> metrics_rows(const std::string& kind,
                                                   const std::string& domain,
                                                   const std::vector<MetricRow>& rows) {
  std::vector<std::vector<std::string>> table;
  table.push_back({"kind", "domain", "method", "condition", "seed", "label_accuracy",
                   "action_mse", "train_loss", "gap_claim_fraction", "gap_action_mse",
                   "ref_action_mse"});
  for (const MetricRow& r : rows) {
    table.push_back({kind, domain, r.method, r.condition, std::to_string(r.seed),
                     io::format_double(r.label_accuracy), io::format_double(r.action_mse),
                     io::format_double(r.train_loss),
                     r.gap_claim_fraction ? io::format_double(*r.gap_claim_fraction) : "",
                     r.gap_action_mse ? io::format_double(*r.gap_action_mse) : "",
                     r.ref_action_mse ? io::format_double(*r.ref_action_mse) : ""});
  }
  return table;
}

std::vector<Aggregate> aggregate_rows(const std::vector<MetricRow>& rows) {
  // Group by (method, condition) preserving first-appearance order.
  std::vector<std::pair<std::string, std::string>> groups;
  for (const MetricRow& r : rows) {
    auto key = std::make_pair(r.method, r.condition);
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  auto stats = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    double stddev = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
    return std::make_pair(mean, stddev);
  };
  std::vector<Aggregate> out;
  for (const auto& [method, condition] : groups) {
    std::vector<double> acc, mse;
    for (const MetricRow& r : rows)
      if (r.method == method && r.condition == condition) {
        acc.push_back(r.label_accuracy);
        mse.push_back(r.action_mse);
      }
    auto [am, as] = stats(acc);
    out.push_back({method, condition, "label_accuracy", am, as, static_cast<int>(acc.size())});
    auto [mm, ms] = stats(mse);
    out.push_back({method, condition, "action_mse", mm, ms, static_cast<int>(mse.size())});
  }
  return out;
}

std::string summary_table(const std::string& kind, const std::vector<Aggregate>& aggregates,
                          bool plain) {
  const char* bold = plain ? "" : "\033[1m";
  const char* reset = plain ? "" : "\033[0m";
  std::ostringstream os;
  os << bold << "method      condition     label accuracy      action MSE" << reset << '\n';
  // Pair up the two metrics per group.
  for (std::size_t i = 0; i + 1 < aggregates.size(); i += 2) {
    const Aggregate& acc = aggregates[i];
    const Aggregate& mse = aggregates[i + 1];
    char line[160];
    std::snprintf(line, sizeof line, "%-11s %-13s %6.3f +/- %5.3f  %9.6f +/- %8.6f (n=%d)",
                  acc.method.c_str(), acc.condition.c_str(), acc.mean, acc.stddev, mse.mean,
                  mse.stddev, acc.n);
    os << line << '\n';
  }
  os << "(" << kind << ")\n";
  return os.str();
}

json schema_json() {
  return json{
      {"columns",
       {{{"name", "kind"}, {"desc", "experiment kind"}},
        {{"name", "domain"}, {"desc", "demonstration domain"}},
        {{"name", "method"}, {"desc", "pico or ctc"}},
        {{"name", "condition"}, {"desc", "all, drop_<primitive>, or - when not applicable"}},
        {{"name", "seed"}, {"desc", "run seed"}},
        {{"name", "label_accuracy"}, {"desc", "matching labels / total comparisons on the test set"}},
        {{"name", "action_mse"},
         {"desc", "mean squared error of predicted vs observed actions on the test set"}},
        {{"name", "train_loss"}, {"desc", "reconstruction loss of the final training epoch"}},
        {{"name", "gap_claim_fraction"},
         {"desc", "fraction of dropped-skill timesteps labeled as the gap slot"}},
        {{"name", "gap_action_mse"},
         {"desc", "gap policy MSE on held-out segments of the dropped skill"}},
        {{"name", "ref_action_mse"},
         {"desc", "pretrained reference policy MSE on the same segments"}}}},
      {"double_format", "%.10g"},
  };
}

bool plain_output() {
  const char* no_color = std::getenv("NO_COLOR");
  const char* plain = std::getenv("PICO_PLAIN");
  return (no_color && *no_color) || (plain && *plain);
}

}  // namespace

std::vector<std::string> generate_dataset_files(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::path out_dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");
  std::vector<std::string> files;
  if (cfg.domain == "blockworld") {
    Dataset ds = generate_blockworld(cfg.dataset.n, cfg.dataset.seed,
                                     NoiseConfig{cfg.dataset.noise_std});
    fs::path path = out_dir / "blockworld.jsonl";
    io::write_dataset_file(ds, path);
    files.push_back(path.string());
  } else {
    auto [train, test] = load_or_generate_dialpad(cfg);
    fs::path train_path = out_dir / "dialpad_train.jsonl";
    fs::path test_path = out_dir / "dialpad_test.jsonl";
    io::write_dataset_file(train, train_path);
    io::write_dataset_file(test, test_path);
    files.push_back(train_path.string());
    files.push_back(test_path.string());
  }
  return files;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  auto started = std::chrono::steady_clock::now();

  fs::path out_dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

  ExperimentResult result;
  result.config = cfg;

  // Assemble run units.
  std::vector<RunUnit> units;
  Dataset blockworld_ds;
  Dataset dial_train, dial_test;
  if (cfg.kind == "compare_baselines") {
    if (cfg.domain != "dialpad")
      throw ValidationError("config: compare_baselines runs on the dialpad domain");
    std::tie(dial_train, dial_test) = load_or_generate_dialpad(cfg);
    for (std::uint64_t seed : cfg.seeds) units.push_back({"-", seed, -1});
  } else if (cfg.kind == "gap_ablation") {
    if (cfg.domain != "blockworld")
      throw ValidationError("config: gap_ablation runs on the blockworld domain");
    blockworld_ds = load_or_generate_blockworld(cfg);
    for (std::uint64_t seed : cfg.seeds) units.push_back({"all", seed, -1});
    for (int label = 0; label < blockworld_ds.info.num_primitives; ++label)
      for (std::uint64_t seed : cfg.seeds)
        units.push_back(
            {"drop_" + detail::primitive_name(cfg.domain, label), seed, label});
  } else {  // reconstruct, latent
    if (cfg.domain != "blockworld")
      throw ValidationError("config: " + cfg.kind + " runs on the blockworld domain");
    blockworld_ds = load_or_generate_blockworld(cfg);
    std::vector<std::uint64_t> seeds =
        cfg.kind == "latent" ? std::vector<std::uint64_t>{cfg.seeds.front()} : cfg.seeds;
    for (std::uint64_t seed : seeds) units.push_back({"all", seed, -1});
  }

  // Execute units, optionally in parallel; outputs keep unit order.
  std::vector<UnitOutput> outputs(units.size());
  auto run_unit = [&](std::size_t i) {
    const RunUnit& unit = units[i];
    if (cfg.kind == "compare_baselines")
      outputs[i] = run_compare_unit(cfg, dial_train, dial_test, unit, out_dir);
    else
      outputs[i] = run_blockworld_unit(cfg, blockworld_ds, unit, out_dir);
  };
  int threads = std::min<int>(cfg.threads, static_cast<int>(units.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < units.size(); ++i) run_unit(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next.fetch_add(1); i < units.size(); i = next.fetch_add(1))
            run_unit(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (auto& unit_out : outputs) {
    for (auto& row : unit_out.rows) result.rows.push_back(std::move(row));
    for (auto& f : unit_out.files) result.files.push_back(std::move(f));
  }
  result.aggregates = aggregate_rows(result.rows);

  // Metric tables.
  auto table = metrics_rows(cfg.kind, cfg.domain, result.rows);
  io::write_csv(table, out_dir / "metrics.csv");
  result.files.push_back("metrics.csv");
  std::vector<std::vector<std::string>> agg_table;
  agg_table.push_back({"method", "condition", "metric", "mean", "std", "n"});
  for (const Aggregate& a : result.aggregates)
    agg_table.push_back({a.method, a.condition, a.metric, io::format_double(a.mean),
                         io::format_double(a.stddev), std::to_string(a.n)});
  io::write_csv(agg_table, out_dir / "summary.csv");
  result.files.push_back("summary.csv");

  if (cfg.format == "json") {
    json rows_json = json::array();
    for (std::size_t r = 1; r < table.size(); ++r) {
      json obj;
      for (std::size_t c = 0; c < table[0].size(); ++c) obj[table[0][c]] = table[r][c];
      rows_json.push_back(std::move(obj));
    }
    io::write_text_file(out_dir / "metrics.json", rows_json.dump(2) + "\n");
    result.files.push_back("metrics.json");
  }

  io::write_text_file(out_dir / "summary.txt", summary_table(cfg.kind, result.aggregates, true));
  result.files.push_back("summary.txt");
  io::write_text_file(out_dir / "metrics_schema.json", schema_json().dump(2) + "\n");
  result.files.push_back("metrics_schema.json");

  auto finished = std::chrono::steady_clock::now();
  result.wall_clock_seconds = std::chrono::duration<double>(finished - started).count();

  json manifest = {
      {"config_hash", cfg.hash()},
      {"tool_version", kToolVersion},
      {"kind", cfg.kind},
      {"wall_clock_seconds", result.wall_clock_seconds},
      {"files", result.files},
      {"rows", json::array()},
  };
  for (std::size_t r = 1; r < table.size(); ++r) {
    json obj;
    for (std::size_t c = 0; c < table[0].size(); ++c) obj[table[0][c]] = table[r][c];
    manifest["rows"].push_back(std::move(obj));
  }
  io::write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

  return result;
}

LatentProjection run_latent(const ExperimentConfig& cfg,
                            const std::filesystem::path& checkpoint_path,
                            const std::filesystem::path& out_csv) {
  cfg.validate();
  PicoNetwork net = io::read_checkpoint_file(checkpoint_path);

  Dataset test;
  if (cfg.domain == "blockworld") {
    Dataset ds = load_or_generate_blockworld(cfg);
    auto [train, split_test] = split_dataset(ds, cfg.dataset.train_fraction, cfg.seeds.front());
    test = std::move(split_test);
  } else {
    auto [train, dial_test] = load_or_generate_dialpad(cfg);
    test = std::move(dial_test);
  }
  if (test.demos.empty()) throw ValidationError("run_latent: empty test set");
  if (test.info.state_dim != net.config().state_dim)
    throw DimensionError("run_latent: checkpoint state_dim " +
                         std::to_string(net.config().state_dim) + " vs dataset " +
                         std::to_string(test.info.state_dim));

  std::vector<std::vector<double>> hiddens;
  std::vector<int> labels;
  for (const Demonstration& demo : test.demos) {
    auto records = net.rollout(demo.states);
    for (std::size_t t = 0; t < records.size(); ++t) {
      hiddens.push_back(records[t].hidden.data());
      labels.push_back(demo.labels[t]);
    }
  }
  Tensor points({static_cast<int>(hiddens.size()), net.config().hidden_dim});
  for (std::size_t i = 0; i < hiddens.size(); ++i)
    for (int j = 0; j < net.config().hidden_dim; ++j)
      points.at(static_cast<int>(i), j) = hiddens[i][static_cast<std::size_t>(j)];

  LatentProjection proj = pca_project(points, labels);

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"x", "y", "label"});
  for (int i = 0; i < proj.coords.rows(); ++i)
    rows.push_back({io::format_double(proj.coords.at(i, 0)),
                    io::format_double(proj.coords.at(i, 1)),
                    std::to_string(proj.labels[static_cast<std::size_t>(i)])});
  fs::path parent = out_csv.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  io::write_csv(rows, out_csv);
  return proj;
}

std::string format_summary(const ExperimentResult& result, bool plain) {
  return summary_table(result.config.kind, result.aggregates, plain);
}

bool plain_output_env() { return plain_output(); }

std::string inspect_dataset(const std::filesystem::path& path) {
  Dataset ds = io::read_dataset_file(path);
  int t_min = 0, t_max = 0;
  std::map<std::vector<int>, int> sketches;
  for (std::size_t i = 0; i < ds.demos.size(); ++i) {
    int t = ds.demos[i].length();
    if (i == 0) {
      t_min = t_max = t;
    } else {
      t_min = std::min(t_min, t);
      t_max = std::max(t_max, t);
    }
    sketches[ds.demos[i].sketch.labels()]++;
  }
  std::ostringstream os;
  os << "domain=" << ds.info.domain << " n=" << ds.demos.size()
     << " state_dim=" << ds.info.state_dim << " action_dim=" << ds.info.action_dim
     << " K=" << ds.info.num_primitives << " T=[" << t_min << "," << t_max << "]"
     << " noise_std=" << io::format_double(ds.info.action_noise_std)
     << " distinct_sketches=" << sketches.size() << '\n';
  return os.str();
}

}  // namespace pico
