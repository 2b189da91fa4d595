#include "pico/cli.hpp"

#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "pico/error.hpp"
#include "pico/experiments.hpp"
#include "pico/io.hpp"

namespace pico {

namespace {

ExperimentConfig load_config(const std::string& config_path, const std::string& seed_list,
                             const std::string& out_dir, int threads, const std::string& format) {
  ExperimentConfig cfg =
      config_path.empty() ? ExperimentConfig() : ExperimentConfig::from_file(config_path);
  if (!seed_list.empty()) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(seed_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        seeds.push_back(std::stoull(item));
      } catch (const std::exception&) {
        throw ValidationError("--seed-list: cannot parse '" + item + "'");
      }
    }
    if (seeds.empty()) throw ValidationError("--seed-list: no seeds given");
    cfg.seeds = seeds;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads > 0) cfg.threads = threads;
  if (!format.empty()) cfg.format = format;
  cfg.validate();
  return cfg;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pico: skill segmentation and imitation learning experiments"};
  app.require_subcommand(1);

  std::string config_path, seed_list, out_dir, format;
  int threads = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON");
    cmd->add_option("--seed-list", seed_list, "comma-separated run seeds");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--threads", threads, "worker threads for independent runs");
    cmd->add_option("--format", format, "metric output format: csv or json");
  };

  CLI::App* cmd_generate = app.add_subcommand("generate", "write dataset files");
  add_common(cmd_generate);

  CLI::App* cmd_run = app.add_subcommand("run", "run the configured experiment");
  add_common(cmd_run);

  std::string checkpoint_path, latent_out;
  CLI::App* cmd_latent =
      app.add_subcommand("latent", "project metacontroller hidden states to 2-D");
  add_common(cmd_latent);
  cmd_latent->add_option("--checkpoint", checkpoint_path, "trained checkpoint")->required();
  cmd_latent->add_option("--csv", latent_out, "output CSV path (default <out>/latent.csv)");

  std::string inspect_path;
  CLI::App* cmd_inspect = app.add_subcommand("inspect", "summarize a dataset file");
  cmd_inspect->add_option("file", inspect_path, "dataset file")->required();

  std::vector<std::string> cli_args(args.rbegin(), args.rend());  // CLI11 wants reversed
  try {
    app.parse(cli_args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends.
      std::ostringstream help;
      int code = app.exit(e, help, help);
      out << help.str();
      return code;
    }
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (cmd_generate->parsed()) {
      ExperimentConfig cfg = load_config(config_path, seed_list, out_dir, threads, format);
      auto files = generate_dataset_files(cfg);
      for (const auto& f : files) out << f << '\n' << inspect_dataset(f);
      return kExitOk;
    }
    if (cmd_run->parsed()) {
      ExperimentConfig cfg = load_config(config_path, seed_list, out_dir, threads, format);
      ExperimentResult result = run_experiment(cfg);
      out << format_summary(result, plain_output_env());
      out << "wrote " << result.files.size() << " files to " << cfg.out_dir << '\n';
      return kExitOk;
    }
    if (cmd_latent->parsed()) {
      ExperimentConfig cfg = load_config(config_path, seed_list, out_dir, threads, format);
      std::filesystem::path csv = latent_out.empty()
                                      ? std::filesystem::path(cfg.out_dir) / "latent.csv"
                                      : std::filesystem::path(latent_out);
      LatentProjection proj = run_latent(cfg, checkpoint_path, csv);
      out << "wrote " << proj.coords.rows() << " points to " << csv.string()
          << " (explained variance " << io::format_double(proj.explained_ratio[0]) << ", "
          << io::format_double(proj.explained_ratio[1]) << ")\n";
      return kExitOk;
    }
    if (cmd_inspect->parsed()) {
      out << inspect_dataset(inspect_path);
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  err << "error: no subcommand\n";
  return kExitConfig;
}

}  // namespace pico
