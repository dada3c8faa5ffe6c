// Command-line front end: generating vectors, experiment runs, field
// diagnostics. Exit codes: 0 ok, 2 usage/config, 3 I/O, 4 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "domainuq/config.hpp"
#include "domainuq/error.hpp"
#include "domainuq/format.hpp"
#include "domainuq/harness.hpp"
#include "domainuq/lattice.hpp"
#include "domainuq/parallel.hpp"
#include "domainuq/random_field.hpp"
#include "domainuq/report.hpp"

namespace {

using namespace domainuq;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

int exit_code_for(const Error& e) {
  if (e.kind() == ErrorKind::Io) return kExitIo;
  return e.is_usage() ? kExitUsage : kExitNumerical;
}

struct CbcArgs {
  std::uint64_t n = 0;
  std::size_t s = 0;
  double theta = 0.0;
  double c_weights = 1e-6;
  int alpha = 2;
  double sigma_min = 1.0;
  double rho = 1.0;
  std::string out;
  std::string history;
};

int cmd_cbc(const CbcArgs& a, unsigned threads) {
  if (!is_prime(a.n)) {
    std::cerr << "error: n must be prime (got " << a.n << ")\n";
    return kExitUsage;
  }
  field::FieldSpec spec;
  spec.theta = a.theta;
  spec.amplitude = a.c_weights;
  spec.s = a.s;
  const auto params = lattice::build_spod_params(spec, a.alpha, 2, a.sigma_min, a.rho, a.c_weights);
  const auto result = lattice::cbc_run(a.n, a.s, params, lattice::CbcMethod::Auto, threads);
  const int alpha = lattice::effective_alpha(a.alpha);
  if (!a.history.empty()) harness::write_text_file(a.history, lattice::cbc_history_csv(result));
  const std::string e2_line = "e2 = " + format_double(result.e2_after.back()) + "\n";
  if (a.out.empty()) {
    std::cout << lattice::generating_vector_text(result.rule, alpha);
    std::cerr << e2_line;
  } else {
    lattice::save_generating_vector(a.out, result.rule, alpha);
    std::cout << e2_line;
  }
  return kExitOk;
}

std::string output_stem(const std::string& config_path, const harness::ExperimentConfig& config) {
  std::ifstream in(config_path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_object() && j.contains("output")) {
    const auto& o = j.at("output");
    if (!o.is_object()) throw Error(ErrorKind::Config, "output must be an object");
    for (const auto& [key, value] : o.items()) {
      if (key != "stem") throw Error(ErrorKind::Config, "unknown key '" + key + "' in output");
    }
    if (o.contains("stem")) {
      if (!o.at("stem").is_string()) throw Error(ErrorKind::Config, "output.stem must be a string");
      const auto stem = o.at("stem").get<std::string>();
      if (stem.empty() || stem.find('/') != std::string::npos) {
        throw Error(ErrorKind::Config, "output.stem must be a plain file name");
      }
      return stem;
    }
  }
  std::string stem = harness::to_string(config.experiment);
  for (auto& ch : stem) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return stem;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, unsigned threads) {
  harness::ExperimentConfig config;
  std::string stem;
  try {
    config = harness::load_config(config_path);
    stem = output_stem(config_path, config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory '" << out_dir << "': " << ec.message() << '\n';
    return kExitIo;
  }
  harness::RunOptions options;
  options.threads = threads;
  options.progress = [](const std::string& msg) { std::cerr << "[run] " << msg << '\n'; };
  const auto report = harness::run_experiment(config, options);
  const auto base = (std::filesystem::path(out_dir) / stem).string();
  harness::write_text_file(base + ".csv", harness::results_csv(report));
  harness::write_text_file(base + ".svg", harness::results_svg(report));
  std::cout << "fitted_rate " << (report.fitted_rate ? format_double(*report.fitted_rate) : std::string("none"))
            << '\n';
  if (report.zero_reference) std::cout << "warning: reference quantity is zero; errors are absolute\n";
  return kExitOk;
}

struct FieldDiagArgs {
  double theta = 0.0;
  double c = 0.0;
  std::size_t s = 100;
  int grid = field::kDefaultVerificationGrid;
  std::size_t samples = 64;
};

int cmd_field_diag(const FieldDiagArgs& a) {
  field::FieldSpec spec;
  spec.theta = a.theta;
  spec.amplitude = a.c;
  spec.s = a.s;
  spec.validate();
  const auto b = field::b_sequence(spec);
  for (std::size_t j = 0; j < std::min<std::size_t>(5, b.b.size()); ++j) {
    std::cout << "b_" << j + 1 << " = " << format_double(b.b[j]) << '\n';
  }
  std::cout << "xi_b = " << format_double(b.xi_b) << '\n';
  const auto bounds = field::sigma_bounds(spec, a.grid, a.samples);
  std::cout << "sigma_min = " << format_double(bounds.sigma_min) << '\n';
  std::cout << "sigma_max = " << format_double(bounds.sigma_max) << '\n';
  const double min_det = field::min_det_jacobian(spec, a.grid, a.samples);
  std::cout << "min_det_J = " << format_double(min_det) << '\n';
  std::cout << "det_J_positive = " << (min_det > 0.0 ? "yes" : "no") << '\n';
  if (bounds.near_degenerate) std::cout << "warning: sigma_min < 0.1, mapping is close to degenerate\n";
  if (bounds.sigma_max > 1.0 + b.xi_b + 1e-10) std::cout << "warning: sigma_max exceeds 1 + xi_b\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice-rule QMC for elliptic problems on randomly perturbed domains"};
  app.require_subcommand(1);
  unsigned threads_flag = 0;
  app.add_option("--threads", threads_flag, "worker threads (default: $DOMAINUQ_THREADS or 1)");

  CbcArgs cbc;
  auto* cbc_cmd = app.add_subcommand("cbc", "construct a generating vector by the CBC algorithm");
  cbc_cmd->add_option("--n", cbc.n, "number of lattice points (prime)")->required();
  cbc_cmd->add_option("--s", cbc.s, "dimension")->required();
  cbc_cmd->add_option("--theta", cbc.theta, "decay rate of the fluctuations")->required();
  cbc_cmd->add_option("--c-weights", cbc.c_weights, "amplitude used in the weights")->capture_default_str();
  cbc_cmd->add_option("--alpha", cbc.alpha, "smoothness (2, 4 or 6)")->capture_default_str();
  cbc_cmd->add_option("--sigma-min", cbc.sigma_min)->capture_default_str();
  cbc_cmd->add_option("--rho", cbc.rho)->capture_default_str();
  cbc_cmd->add_option("--out", cbc.out, "generating-vector file (default: stdout)");
  cbc_cmd->add_option("--history", cbc.history, "CSV of e2 after each component");

  std::string config_path;
  std::string out_dir = ".";
  auto* run_cmd = app.add_subcommand("run", "run an experiment described by a JSON config");
  run_cmd->add_option("--config", config_path, "experiment config")->required();
  run_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();

  FieldDiagArgs diag;
  auto* diag_cmd = app.add_subcommand("field-diag", "print diagnostics of the perturbation field");
  diag_cmd->add_option("--theta", diag.theta)->required();
  diag_cmd->add_option("--c", diag.c)->required();
  diag_cmd->add_option("--s", diag.s)->capture_default_str();
  diag_cmd->add_option("--grid", diag.grid, "verification grid points per side")->capture_default_str();
  diag_cmd->add_option("--samples", diag.samples, "parameter samples")->capture_default_str();

  for (auto* sub : {cbc_cmd, run_cmd, diag_cmd}) {
    sub->add_option("--threads", threads_flag, "worker threads (default: $DOMAINUQ_THREADS or 1)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const unsigned threads = resolve_threads(threads_flag);
    if (*cbc_cmd) return cmd_cbc(cbc, threads);
    if (*run_cmd) return cmd_run(config_path, out_dir, threads);
    if (*diag_cmd) return cmd_field_diag(diag);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
