// tihom: periodic homogenization on anisotropic patterns.
//
// Exit codes: 0 converged, 2 not converged, 1 configuration or I/O error.

#include "tihom/errors.hpp"
#include "tihom/experiment.hpp"
#include "tihom/field_io.hpp"
#include "tihom/image.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace {

constexpr int kConverged = 0;
constexpr int kFailed = 1;
constexpr int kNotConverged = 2;

int run_errors(const std::string& field_path, const std::string& reference_path, const std::string& image_path,
               bool printed) {
  const tihom::FieldFile a = tihom::read_field(field_path);
  const tihom::FieldFile b = tihom::read_field(reference_path);
  if (!(a.lattice == b.lattice)) {
    throw tihom::IngestionError("fields live on different patterns: " + a.lattice.to_string() + " vs " +
                                b.lattice.to_string());
  }
  if (a.components != b.components) throw tihom::IngestionError("fields have different component counts");
  if (a.domain != b.domain) throw tihom::IngestionError("fields are in different domains");
  const tihom::StrainField fa = a.as_strain(), fb = b.as_strain();
  const tihom::MandelVec none = tihom::MandelVec::Zero(a.components);
  const auto met = tihom::error_metrics(fa, &fb, none, nullptr,
                                        printed ? tihom::ElogForm::Printed : tihom::ElogForm::Difference);
  const auto& e = *met.e_log;
  nlohmann::ordered_json out;
  out["matrix"] = a.lattice.to_string();
  out["m"] = a.lattice.size();
  out["e_l2"] = *met.e_l2;
  out["e_log_max"] = *std::max_element(e.begin(), e.end());
  out["e_log_mean"] = tihom::pairwise_sum(e.data(), e.size()) / static_cast<double>(e.size());
  if (!image_path.empty()) {
    tihom::write_ppm(image_path, tihom::render_smith_grid(a.lattice, e));
    out["image"] = image_path;
  }
  std::cout << out.dump(2) << "\n";
  return kConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral periodic homogenization on integer pattern lattices"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  auto* solve = app.add_subcommand("solve", "Solve the cell problem described by a JSON config");
  solve->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  solve->add_option("--output-dir", output_dir, "Override the artifact directory");

  auto* sweep = app.add_subcommand("sweep-alpha", "Optimise the de la Vallee Poussin slopes against e_eff");
  sweep->add_option("config", config_path, "Experiment config with a sweep block")->required()->check(CLI::ExistingFile);
  sweep->add_option("--output-dir", output_dir, "Override the artifact directory");

  std::string matrix;
  auto* info = app.add_subcommand("pattern-info", "Summarise a pattern matrix");
  info->add_option("--matrix", matrix, "Row-major integer matrix, e.g. \"[[128,272],[0,128]]\"")->required();

  std::string field_path, reference_path, image_path;
  bool printed = false;
  auto* errors = app.add_subcommand("errors", "Compare a strain field with a reference field");
  errors->add_option("--field", field_path, "Strain field (PFLD)")->required();
  errors->add_option("--reference", reference_path, "Reference strain field (PFLD)")->required();
  errors->add_option("--image", image_path, "Write the e_log image (PPM)");
  errors->add_flag("--printed-form", printed, "Use log(1 + |eps + eps_ref|) for e_log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kFailed;
  }

  try {
    if (*solve || *sweep) {
      auto cfg = tihom::ExperimentConfig::from_file(config_path);
      if (!output_dir.empty()) cfg.output.directory = output_dir;
      if (*solve) {
        const auto res = tihom::run_solve(cfg);
        std::cout << res.report.dump(2) << "\n";
        return res.solve.converged ? kConverged : kNotConverged;
      }
      const auto res = tihom::sweep_alpha(cfg);
      std::cout << res.report.dump(2) << "\n";
      return res.best.solve.converged ? kConverged : kNotConverged;
    }
    if (*info) {
      std::cout << tihom::pattern_info(tihom::PatternMatrix::parse(matrix)).dump(2) << "\n";
      return kConverged;
    }
    return run_errors(field_path, reference_path, image_path, printed);
  } catch (const tihom::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kFailed;
}
