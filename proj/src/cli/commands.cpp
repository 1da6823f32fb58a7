#include "spotlight/cli/commands.hpp"

#include "spotlight/image_io.hpp"
#include "spotlight/metrics.hpp"
#include "spotlight/nn/archive.hpp"
#include "spotlight/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace spotlight::cli {
namespace {

namespace fs = std::filesystem;

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

int cmd_generate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.dilation.validate();
    if (cfg.input.empty() || cfg.output.empty()) throw DomainError("generate needs --input and --output");
    if (!fs::is_directory(cfg.input)) throw IoError("not a directory: " + cfg.input.string());
    const auto files = list_pngs(cfg.input);
    if (files.empty()) throw IoError("no PNG masks in " + cfg.input.string());
    fs::create_directories(cfg.output);

    struct Outcome {
      std::optional<std::vector<SpotlightSummary>> spotlights;
      std::string error;
    };
    std::vector<Outcome> outcomes(files.size());
    parallel_for(files.size(), cfg.threads, [&](std::size_t i) {
      try {
        const auto gt = BinaryMask::from_gray(read_gray_png(files[i]));
        auto result = synthesize_cosupervision(gt, cfg.dilation);
        write_gray_png(cfg.output / files[i].filename(), result.target.to_gray());
        outcomes[i].spotlights = std::move(result.spotlights);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    });

    nlohmann::ordered_json manifest;
    manifest["max_radius"] = cfg.dilation.max_radius;
    manifest["degenerate_radius"] = cfg.dilation.effective_degenerate_radius();
    manifest["spotlights"] = to_string(cfg.dilation.spotlights);
    auto entries = nlohmann::ordered_json::array();
    auto failures = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < files.size(); ++i) {
      const std::string name = files[i].filename().string();
      if (!outcomes[i].spotlights) {
        err << "generate: " << name << ": " << outcomes[i].error << '\n';
        failures.push_back({{"file", name}, {"error", outcomes[i].error}});
        continue;
      }
      nlohmann::ordered_json entry;
      entry["file"] = name;
      auto lights = nlohmann::ordered_json::array();
      for (const auto& s : *outcomes[i].spotlights) {
        nlohmann::ordered_json l;
        l["corner"] = to_string(s.corner);
        l["x"] = s.spotlight.x;
        l["y"] = s.spotlight.y;
        l["edge_pixels"] = s.edge_pixels;
        l["min_radius"] = s.min_radius;
        l["max_radius"] = s.max_radius;
        l["mean_radius"] = s.mean_radius;
        l["shadow_pixels"] = s.shadow_pixels;
        lights.push_back(std::move(l));
      }
      entry["spotlights"] = std::move(lights);
      entries.push_back(std::move(entry));
    }
    const std::size_t written = entries.size();
    const bool clean = failures.empty();
    manifest["files"] = std::move(entries);
    manifest["errors"] = std::move(failures);
    write_text(cfg.output / "manifest.json", manifest.dump(2) + '\n');
    out << "generate: wrote " << written << " of " << files.size() << " shadow maps to " << cfg.output.string()
        << '\n';
    return clean ? kExitOk : kExitPartial;
  } catch (const std::exception& e) {
    err << "generate: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.pred.empty() || cfg.gt.empty()) throw DomainError("evaluate needs --pred and --gt");
    const auto report = metrics::evaluate_directory(cfg.pred, cfg.gt, cfg.threads);
    for (const auto& m : report.missing_predictions) err << "evaluate: no prediction for " << m << '\n';
    for (const auto& m : report.extra_predictions) err << "evaluate: no ground truth for " << m << '\n';
    for (const auto& f : report.failed) err << "evaluate: skipped " << f << '\n';

    const std::string text = cfg.format == ReportFormat::Json ? metrics::to_json(report) : metrics::to_csv(report);
    if (cfg.output.empty()) {
      out << text;
    } else {
      fs::create_directories(cfg.output);
      write_text(cfg.output / (cfg.format == ReportFormat::Json ? "metrics.json" : "metrics.csv"), text);
      char line[160];
      std::snprintf(line, sizeof(line), "S_alpha=%.4f E_phi=%.4f Fw_beta=%.4f MAE=%.4f (n=%zu)\n", report.s_measure,
                    report.e_measure, report.weighted_f, report.mae, report.count);
      out << line;
    }
    if (report.count == 0) return kExitError;
    // a ground truth without a prediction would silently shrink the benchmark
    return report.ok() && report.missing_predictions.empty() ? kExitOk : kExitPartial;
  } catch (const std::exception& e) {
    err << "evaluate: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_smoke(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const nn::NetworkParams<float> params =
        cfg.params.empty() ? nn::make_network_params<float>(cfg.network) : nn::load_params<float>(cfg.params);
    const auto pyramid = nn::make_pyramid<float>(params.config, cfg.pyramid_seed);
    const auto result = nn::forward(pyramid, params);

    std::ostringstream listing;
    auto line = [&](const std::string& stage, const nn::Shape& shape, const auto& values) {
      char buf[192];
      std::snprintf(buf, sizeof(buf), "%-22s %-12s checksum=%s sum=%.6e\n", stage.c_str(), shape.str().c_str(),
                    hex(checksum(values)).c_str(), static_cast<double>(values.sum()));
      listing << buf;
    };
    const int h = result.prediction.rows();
    const int w = result.prediction.cols();
    line("shadow_head.psi", result.psi.shape(), result.psi.matrix());
    line("shadow_head.p_s", {1, h, w}, result.shadow);
    for (std::size_t l = 0; l < 4; ++l) {
      line("paa.f" + std::to_string(l + 1), result.refined[l].shape(), result.refined[l].matrix());
    }
    for (std::size_t l = 0; l < 4; ++l) {
      line("encd.f" + std::to_string(l + 1) + "'", result.aggregated[l].shape(), result.aggregated[l].matrix());
    }
    line("encd.p_gt", {1, h, w}, result.prediction);

    out << listing.str();
    if (!cfg.output.empty()) {
      fs::create_directories(cfg.output);
      write_text(cfg.output / "smoke.txt", listing.str());
      if (cfg.export_params) nn::save_params(cfg.output / "params", params);
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "smoke: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace spotlight::cli
