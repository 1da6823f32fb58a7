// Batch front-end: shadow-map generation, metric evaluation and forward smoke tests.

#include "spotlight/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using spotlight::cli::ReportFormat;
using spotlight::cli::RunConfig;

/// Dilation flags shared by generate; a config file is applied first, then flags.
struct DilationFlags {
  std::string config_file;
  int max_radius = 30;
  std::string spotlights = "tl,br";
  int degenerate_radius = -1;
  CLI::Option* max_radius_opt = nullptr;
  CLI::Option* spotlights_opt = nullptr;
  CLI::Option* degenerate_opt = nullptr;

  spotlight::DilationConfig resolve() const {
    spotlight::DilationConfig cfg;
    if (!config_file.empty()) cfg = spotlight::load_dilation_config(config_file);
    if (max_radius_opt->count() > 0) cfg.max_radius = max_radius;
    if (spotlights_opt->count() > 0) cfg.spotlights = spotlight::parse_corner_list(spotlights);
    if (degenerate_opt->count() > 0) cfg.degenerate_radius = degenerate_radius;
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spotlight-shifting shadow maps, COD metrics and reference forward passes"};
  app.require_subcommand(1);

  RunConfig run;
  std::string format = "csv";
  DilationFlags dilation;

  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", run.threads, "Worker threads")
        ->envname("SPOTLIGHT_THREADS")
        ->check(CLI::PositiveNumber);
  };

  auto* generate = app.add_subcommand("generate", "Synthesize co-supervision shadow maps for a mask directory");
  generate->add_option("--input", run.input, "Directory of 8-bit grayscale PNG masks")
      ->required()
      ->envname("SPOTLIGHT_INPUT");
  generate->add_option("--output", run.output, "Directory for shadow maps and manifest.json")
      ->required()
      ->envname("SPOTLIGHT_OUTPUT");
  generate->add_option("--config", dilation.config_file, "Key-value dilation config file")
      ->envname("SPOTLIGHT_CONFIG");
  dilation.max_radius_opt = generate->add_option("--max-radius", dilation.max_radius, "Largest disk radius (default 30)")
                                ->envname("SPOTLIGHT_MAX_RADIUS");
  dilation.spotlights_opt = generate->add_option("--spotlights", dilation.spotlights, "Corner list (default tl,br)")
                                ->envname("SPOTLIGHT_SPOTLIGHTS");
  dilation.degenerate_opt =
      generate->add_option("--degenerate-radius", dilation.degenerate_radius, "Radius when all distances are equal")
          ->envname("SPOTLIGHT_DEGENERATE_RADIUS");
  add_threads(generate);

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth (S, E, Fw, MAE)");
  evaluate->add_option("--pred", run.pred, "Prediction PNG directory")->required()->envname("SPOTLIGHT_PRED");
  evaluate->add_option("--gt", run.gt, "Ground-truth PNG directory")->required()->envname("SPOTLIGHT_GT");
  evaluate->add_option("--output", run.output, "Directory for the report (stdout if omitted)")
      ->envname("SPOTLIGHT_OUTPUT");
  evaluate->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->envname("SPOTLIGHT_FORMAT");
  add_threads(evaluate);

  auto* smoke = app.add_subcommand("smoke", "Seeded forward pass with per-stage shapes and checksums");
  smoke->add_option("--output", run.output, "Directory for smoke.txt (and params with --export-params)")
      ->envname("SPOTLIGHT_OUTPUT");
  smoke->add_option("--seed", run.network.seed, "Parameter seed")->envname("SPOTLIGHT_SEED");
  smoke->add_option("--pyramid-seed", run.pyramid_seed, "Input pyramid seed")->envname("SPOTLIGHT_PYRAMID_SEED");
  smoke->add_option("--heads", run.network.heads, "Attention heads")->envname("SPOTLIGHT_HEADS");
  smoke->add_option("--decoder-channels", run.network.decoder_channels, "Decoder width")
      ->envname("SPOTLIGHT_DECODER_CHANNELS");
  smoke->add_option("--attention-channels", run.network.attention_channels, "Attention width per stage")
      ->envname("SPOTLIGHT_ATTENTION_CHANNELS");
  smoke->add_option("--size", run.network.base_size, "Spatial size of x1 (multiple of 8)")
      ->envname("SPOTLIGHT_SIZE");
  smoke->add_option("--params", run.params, "Load parameters from an archive stem instead of the seed");
  smoke->add_flag("--export-params", run.export_params, "Write params.json/params.bin into --output");

  CLI11_PARSE(app, argc, argv);
  run.format = format == "json" ? ReportFormat::Json : ReportFormat::Csv;

  if (generate->parsed()) {
    try {
      run.dilation = dilation.resolve();
    } catch (const std::exception& e) {
      std::cerr << "generate: " << e.what() << '\n';
      return spotlight::cli::kExitError;
    }
    return spotlight::cli::cmd_generate(run, std::cout, std::cerr);
  }
  if (evaluate->parsed()) return spotlight::cli::cmd_evaluate(run, std::cout, std::cerr);
  return spotlight::cli::cmd_smoke(run, std::cout, std::cerr);
}
