#pragma once

// End-to-end experiments: QMC convergence of the source and capacity
// problems, the dimension-truncation study and the FEM h-study.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "domainuq/config.hpp"
#include "domainuq/error.hpp"
#include "domainuq/fem/mesh.hpp"
#include "domainuq/fem/norms.hpp"
#include "domainuq/fem/solve.hpp"
#include "domainuq/format.hpp"
#include "domainuq/lattice.hpp"
#include "domainuq/parallel.hpp"
#include "domainuq/random_field.hpp"

namespace domainuq::harness {

struct RunOptions {
  unsigned threads = 1;
  std::function<void(const std::string&)> progress;  ///< optional status messages
};

struct ExtraColumn {
  std::string name;
  std::vector<double> values;
};

struct ConvergenceReport {
  Experiment experiment = Experiment::SourceField;
  std::string axis_name;
  std::vector<double> axis_values;
  std::vector<double> errors;
  std::vector<ExtraColumn> extra;
  std::optional<double> fitted_rate;  ///< empty when fewer than 3 positive errors
  std::optional<double> expected_rate;
  bool zero_reference = false;  ///< reference quantity vanished; errors are absolute
  nlohmann::json metadata;      ///< config echo
};

/// -slope of the least-squares line through (log axis, log error), over the
/// entries with positive error.
inline double fit_rate(std::span<const double> axis, std::span<const double> errors) {
  if (axis.size() != errors.size()) throw Error(ErrorKind::InvalidArgument, "axis and errors differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (errors[i] > 0.0 && axis[i] > 0.0) {
      lx.push_back(std::log(axis[i]));
      ly.push_back(std::log(errors[i]));
    }
  }
  if (lx.size() < 3) throw Error(ErrorKind::InsufficientPoints, "rate fit needs at least 3 positive errors");
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientPoints, "rate fit needs distinct axis values");
  return -sxy / sxx;
}

namespace detail {

inline void finish(ConvergenceReport& r) {
  try {
    r.fitted_rate = fit_rate(r.axis_values, r.errors);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientPoints) throw;
    r.fitted_rate.reset();
  }
}

inline std::string describe_point(std::size_t i, std::span<const double> y) {
  std::string s = "lattice point i = " + std::to_string(i) + ", y = (";
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (j > 0) s += ", ";
    s += format_double(y[j], 6);
  }
  return s + ")";
}

/// Runs fn and tags any library error with the lattice point it came from.
template <class Fn>
auto at_point(std::size_t i, std::span<const double> y, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), e.detail() + " at " + describe_point(i, y));
  }
}

/// Context shared by the QMC experiments: base mesh, weights and a cache of
/// generating vectors.
class QmcContext {
 public:
  QmcContext(const ExperimentConfig& config, const RunOptions& options)
      : config_(config),
        options_(options),
        base_(std::make_shared<const fem::Mesh>(fem::structured_mesh(config.mesh_m))),
        params_(lattice::build_spod_params(config.field, config.qmc.alpha, 2, config.qmc.sigma_min, config.qmc.rho,
                                           config.qmc.weight_amplitude)) {}

  const fem::Mesh& mesh() const { return *base_; }
  std::shared_ptr<const fem::Mesh> mesh_ptr() const { return base_; }

  const lattice::LatticeRule& rule(std::uint64_t n, std::size_t s) {
    const auto key = std::make_pair(n, s);
    auto it = rules_.find(key);
    if (it == rules_.end()) {
      report("constructing generating vector n = " + std::to_string(n) + ", s = " + std::to_string(s));
      it = rules_.emplace(key, lattice::cbc_run(n, s, params_, lattice::CbcMethod::Auto, options_.threads).rule)
               .first;
    }
    return it->second;
  }

  /// Lattice mean of a per-point vector quantity computed from y.
  std::vector<double> lattice_mean(std::uint64_t n, std::size_t width,
                                   const std::function<std::vector<double>(std::span<const double>)>& sample) {
    const auto& r = rule(n, config_.integration_dimension());
    report("sampling n = " + std::to_string(n));
    return ordered_mean(n, width, options_.threads, [&](std::size_t i) {
      const auto y = r.point(i);
      return at_point(i, y, [&] { return sample(y); });
    });
  }

  void report(const std::string& msg) const {
    if (options_.progress) options_.progress(msg);
  }

 private:
  const ExperimentConfig& config_;
  const RunOptions& options_;
  std::shared_ptr<const fem::Mesh> base_;
  lattice::SpodWeightParams params_;
  std::map<std::pair<std::uint64_t, std::size_t>, lattice::LatticeRule> rules_;
};

inline ConvergenceReport new_report(const ExperimentConfig& config, std::string axis_name) {
  ConvergenceReport r;
  r.experiment = config.experiment;
  r.axis_name = std::move(axis_name);
  r.metadata = to_json(config);
  return r;
}

/// Mean over n for each n in the list plus the reference, without
/// recomputing the reference when it also appears in the list.
inline std::map<std::uint64_t, std::vector<double>> means_over_n(
    QmcContext& ctx, const ExperimentConfig& config, std::size_t width,
    const std::function<std::vector<double>(std::span<const double>)>& sample) {
  std::map<std::uint64_t, std::vector<double>> out;
  for (auto n : config.qmc.n_list) out.emplace(n, ctx.lattice_mean(n, width, sample));
  if (!out.count(config.qmc.reference_n)) {
    out.emplace(config.qmc.reference_n, ctx.lattice_mean(config.qmc.reference_n, width, sample));
  }
  return out;
}

inline void require(const ExperimentConfig& config, std::initializer_list<Experiment> kinds, const char* fn) {
  for (auto k : kinds) {
    if (config.experiment == k) return;
  }
  throw Error(ErrorKind::Config, std::string(fn) + " cannot run a " + to_string(config.experiment) + " config");
}

}  // namespace detail

/// Relative L1 error of the lattice mean of the pulled-back solution,
/// normalized by the L2 norm of the reference mean.
inline ConvergenceReport run_source_field(const ExperimentConfig& config, const RunOptions& options = {}) {
  detail::require(config, {Experiment::SourceField}, "run_source_field");
  config.validate();
  detail::QmcContext ctx(config, options);
  const auto f = source_function(config.source);
  const auto solver = config.solver();
  const auto base = ctx.mesh_ptr();
  auto means = detail::means_over_n(ctx, config, base->vertex_count(), [&](std::span<const double> y) {
    return fem::solve_source(fem::map_mesh(base, config.field, y), f, solver).nodal_values;
  });
  const auto& ref = means.at(config.qmc.reference_n);
  const double ref_l2 = fem::norms(*base, ref).l2;

  auto report = detail::new_report(config, "n");
  report.zero_reference = !(ref_l2 > 0.0);
  for (auto n : config.qmc.n_list) {
    const auto& mean = means.at(n);
    std::vector<double> diff(mean.size());
    for (std::size_t v = 0; v < diff.size(); ++v) diff[v] = mean[v] - ref[v];
    const double l1 = fem::norms(*base, diff).l1;
    report.axis_values.push_back(static_cast<double>(n));
    report.errors.push_back(report.zero_reference ? l1 : l1 / ref_l2);
  }
  detail::finish(report);
  return report;
}

/// Relative error of the lattice mean of G(u) = ||grad u||.
inline ConvergenceReport run_source_qoi(const ExperimentConfig& config, const RunOptions& options = {}) {
  detail::require(config, {Experiment::SourceQoi}, "run_source_qoi");
  config.validate();
  detail::QmcContext ctx(config, options);
  const auto f = source_function(config.source);
  const auto solver = config.solver();
  const auto base = ctx.mesh_ptr();
  auto means = detail::means_over_n(ctx, config, 1, [&](std::span<const double> y) {
    const auto sol = fem::solve_source(fem::map_mesh(base, config.field, y), f, solver);
    return std::vector<double>{fem::qoi_grad_norm(sol, config.qoi_domain)};
  });
  const double ref = means.at(config.qmc.reference_n)[0];

  auto report = detail::new_report(config, "n");
  report.zero_reference = !(std::abs(ref) > 0.0);
  for (auto n : config.qmc.n_list) {
    const double diff = std::abs(means.at(n)[0] - ref);
    report.axis_values.push_back(static_cast<double>(n));
    report.errors.push_back(report.zero_reference ? diff : diff / std::abs(ref));
  }
  detail::finish(report);
  return report;
}

/// Relative error of the lattice mean of the capacity; the mean reciprocity
/// defect |1 - cap cap_conj| is reported alongside.
inline ConvergenceReport run_capacity(const ExperimentConfig& config, const RunOptions& options = {}) {
  detail::require(config, {Experiment::Capacity}, "run_capacity");
  config.validate();
  if (config.field.family != field::Family::CosineVertical) {
    throw Error(ErrorKind::Config, "the capacity experiment needs the cosine_vertical family");
  }
  detail::QmcContext ctx(config, options);
  const auto solver = config.solver();
  const auto base = ctx.mesh_ptr();
  auto means = detail::means_over_n(ctx, config, 2, [&](std::span<const double> y) {
    const auto [u, v] = fem::solve_capacity_pair(fem::map_mesh(base, config.field, y), solver);
    const double cap = fem::capacity(u);
    const double cap_conj = fem::capacity(v);
    return std::vector<double>{cap, std::abs(1.0 - cap * cap_conj)};
  });
  const double ref = means.at(config.qmc.reference_n)[0];

  auto report = detail::new_report(config, "n");
  report.zero_reference = !(std::abs(ref) > 0.0);
  ExtraColumn recip{"reciprocity_err", {}};
  for (auto n : config.qmc.n_list) {
    const double diff = std::abs(means.at(n)[0] - ref);
    report.axis_values.push_back(static_cast<double>(n));
    report.errors.push_back(report.zero_reference ? diff : diff / std::abs(ref));
    recip.values.push_back(means.at(n)[1]);
  }
  report.extra.push_back(std::move(recip));
  detail::finish(report);
  return report;
}

/// Estimates ||E[u_{s_ref}] - E[u_s]||_{L1} for each s in the list with one
/// lattice rule in s_ref dimensions; truncation sets y_j = 0 for j > s.
inline ConvergenceReport run_dim_truncation(const ExperimentConfig& config, const RunOptions& options = {}) {
  detail::require(config, {Experiment::DimTruncation}, "run_dim_truncation");
  config.validate();
  detail::QmcContext ctx(config, options);
  const auto f = source_function(config.source);
  const auto solver = config.solver();
  const auto base = ctx.mesh_ptr();
  const std::size_t nv = base->vertex_count();
  const auto& s_list = config.truncation.s_list;
  const std::size_t s_ref = config.integration_dimension();

  // one block of nv entries per truncation level, the full dimension last
  const auto mean = ctx.lattice_mean(config.truncation.n, nv * (s_list.size() + 1), [&](std::span<const double> y) {
    std::vector<double> out;
    out.reserve(nv * (s_list.size() + 1));
    std::vector<double> yt(y.begin(), y.end());
    for (std::size_t k = 0; k <= s_list.size(); ++k) {
      const std::size_t s = k < s_list.size() ? s_list[k] : s_ref;
      std::fill(yt.begin() + static_cast<std::ptrdiff_t>(s), yt.end(), 0.0);
      std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(s), yt.begin());
      const auto sol = fem::solve_source(fem::map_mesh(base, config.field, yt), f, solver);
      out.insert(out.end(), sol.nodal_values.begin(), sol.nodal_values.end());
    }
    return out;
  });

  auto report = detail::new_report(config, "s");
  const std::span<const double> ref(mean.data() + nv * s_list.size(), nv);
  for (std::size_t k = 0; k < s_list.size(); ++k) {
    std::vector<double> diff(nv);
    for (std::size_t v = 0; v < nv; ++v) diff[v] = ref[v] - mean[k * nv + v];
    report.axis_values.push_back(static_cast<double>(s_list[k]));
    report.errors.push_back(fem::norms(*base, diff).l1);
  }
  report.expected_rate = 2.0 * config.field.theta - 3.0;
  detail::finish(report);
  return report;
}

/// Mean over sampled y of ||u_{h_ref} - u_h||_{L1} on the reference square,
/// with u_h interpolated onto the nested reference mesh.
inline ConvergenceReport run_fem_h(const ExperimentConfig& config, const RunOptions& options = {}) {
  detail::require(config, {Experiment::FemH}, "run_fem_h");
  config.validate();
  const auto f = source_function(config.source);
  const auto solver = config.solver();
  const auto& m_list = config.fem_h.m_list;
  const auto fine = std::make_shared<const fem::Mesh>(fem::structured_mesh(config.fem_h.reference_m));
  std::vector<std::shared_ptr<const fem::Mesh>> coarse;
  for (int m : m_list) coarse.push_back(std::make_shared<const fem::Mesh>(fem::structured_mesh(m)));
  const auto ys = field::diagnostic_samples(config.field.s, config.fem_h.samples);
  if (options.progress) options.progress("solving " + std::to_string(ys.size()) + " samples");

  const auto mean = ordered_mean(ys.size(), m_list.size(), options.threads, [&](std::size_t i) {
    return detail::at_point(i, ys[i], [&] {
      const auto ref = fem::solve_source(fem::map_mesh(fine, config.field, ys[i]), f, solver);
      std::vector<double> errs;
      for (std::size_t k = 0; k < m_list.size(); ++k) {
        const auto sol = fem::solve_source(fem::map_mesh(coarse[k], config.field, ys[i]), f, solver);
        auto diff = fem::prolongate(*coarse[k], sol.nodal_values, *fine);
        for (std::size_t v = 0; v < diff.size(); ++v) diff[v] = ref.nodal_values[v] - diff[v];
        errs.push_back(fem::norms(*fine, diff).l1);
      }
      return errs;
    });
  });

  auto report = detail::new_report(config, "m");
  for (std::size_t k = 0; k < m_list.size(); ++k) {
    report.axis_values.push_back(static_cast<double>(m_list[k]));
    report.errors.push_back(mean[k]);
  }
  report.expected_rate = 2.0;
  detail::finish(report);
  return report;
}

inline ConvergenceReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {}) {
  switch (config.experiment) {
    case Experiment::SourceField: return run_source_field(config, options);
    case Experiment::SourceQoi: return run_source_qoi(config, options);
    case Experiment::Capacity: return run_capacity(config, options);
    case Experiment::DimTruncation: return run_dim_truncation(config, options);
    case Experiment::FemH: return run_fem_h(config, options);
  }
  throw Error(ErrorKind::Config, "unknown experiment");
}

}  // namespace domainuq::harness
