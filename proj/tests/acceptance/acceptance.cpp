// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit code
// is nonzero when any selected criterion fails.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "domainuq/combinatorics.hpp"
#include "domainuq/config.hpp"
#include "domainuq/fem/mesh.hpp"
#include "domainuq/fem/norms.hpp"
#include "domainuq/fem/solve.hpp"
#include "domainuq/format.hpp"
#include "domainuq/harness.hpp"
#include "domainuq/lattice.hpp"
#include "domainuq/multi_index.hpp"
#include "domainuq/report.hpp"

#ifndef DOMAINUQ_SOURCE_DIR
#define DOMAINUQ_SOURCE_DIR "."
#endif

namespace {

using namespace domainuq;
using combinatorics::BigInt;
using combinatorics::Rational;
using Clock = std::chrono::steady_clock;

const double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed sub-checks so a criterion reports the first few of them.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok) {
      if (failures_.size() < 5) failures_.push_back(what);
      ++failed_;
    }
  }
  Outcome outcome(const std::string& summary) const {
    Outcome o{failed_ == 0, summary};
    if (failed_ > 0) {
      o.detail += "; " + std::to_string(failed_) + " of " + std::to_string(count_) + " checks failed:";
      for (const auto& f : failures_) o.detail += " [" + f + "]";
    }
    return o;
  }

 private:
  std::size_t count_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) { return format_double(x, 4); }

// ---------------------------------------------------------------- criterion 1

std::vector<MultiIndex> multi_indices(std::size_t dims, unsigned max_order) {
  std::vector<MultiIndex> out;
  std::function<void(std::size_t, unsigned, MultiIndex)> rec = [&](std::size_t j, unsigned left, MultiIndex m) {
    if (j > dims) {
      out.push_back(m);
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      MultiIndex next = m;
      next.set(j, v);
      rec(j + 1, left - v, next);
    }
  };
  rec(1, max_order, MultiIndex{});
  return out;
}

Outcome criterion_identities() {
  using namespace combinatorics;
  const auto t0 = Clock::now();
  Checks c;
  for (unsigned nu = 0; nu <= 10; ++nu) {
    for (unsigned w = 0; w <= nu; ++w) {
      for (unsigned mu = 0; w + mu <= nu; ++mu) {
        BigInt lhs = 0;
        for (unsigned m = w; m <= nu; ++m) lhs += binomial(nu, m) * stirling2(m, w) * stirling2(nu - m, mu);
        c.expect(lhs == binomial(w + mu, w) * stirling2(nu, w + mu), "Stirling convolution");
      }
    }
    for (unsigned m = 0; m <= nu; ++m) {
      BigInt lhs = 0;
      for (unsigned k = 0; k <= nu - m; ++k) lhs += binomial(nu, k) * stirling2(nu - k, m);
      c.expect(lhs == stirling2(nu + 1, m + 1), "Stirling sum to S(nu+1, m+1)");
    }
  }
  for (unsigned k = 0; k <= 10; ++k) {
    for (unsigned l = 0; l <= 10; ++l) {
      c.expect(delannoy(2, MultiIndex{{1, k}, {2, l}}) == delannoy_closed_form(k, l),
               "Delannoy k=" + std::to_string(k) + " l=" + std::to_string(l));
    }
  }
  const auto tau = seq_tau(30);
  for (const auto& m : multi_indices(3, 8)) {
    if (m.is_zero()) continue;
    BigInt lhs = 0;
    const unsigned om = m.order();
    for_each_below(m, [&](const MultiIndex& w) {
      if (w == m) return;
      const unsigned ow = w.order();
      lhs += tau[ow] * combinatorics::factorial(ow) * combinatorics::factorial(om - ow + 1) * binomial(m, w);
    });
    c.expect(lhs == tau[om] * combinatorics::factorial(om), "renewal property");
  }
  const auto a = seq_a(20);
  const auto ap = seq_a_prime(20);
  for (unsigned k = 0; k <= 20; ++k) c.expect(ap[k] == Rational(combinatorics::factorial(k)) * a[k], "a'_k = k! a_k");
  for (unsigned k = 1; k <= 30; ++k) {
    const double exact = tau[k].convert_to<double>();
    c.expect(std::abs(seq_tau_closed_form(k) - exact) <= 1e-12 * exact, "tau closed form k=" + std::to_string(k));
  }
  for (unsigned d : {2u, 3u}) {
    for (const auto& m : multi_indices(3, 6)) {
      const unsigned om = m.order();
      c.expect(seq_p(m, d) <= 2 * tau[om] * order_factor(om, d), "P_m bound");
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 5.0, "runtime " + fmt(secs) + " s >= 5 s");
  return c.outcome("identity suite in " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 2

double order_factor_double(unsigned l, int d) {
  double r = 1.0;
  for (unsigned i = d; i <= l + d - 1; ++i) r *= i;
  return r;
}

double weight_brute(const lattice::SpodWeightParams& p, const std::vector<std::size_t>& u) {
  std::vector<int> m(u.size(), 1);
  double total = 0.0;
  while (true) {
    unsigned order = 0;
    double prod = 1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      order += m[i];
      prod *= p.gamma_jm[u[i] - 1][m[i] - 1];
    }
    total += order_factor_double(order, p.d) * prod;
    std::size_t i = 0;
    while (i < m.size() && m[i] == p.alpha) m[i++] = 1;
    if (i == m.size()) break;
    ++m[i];
  }
  return total;
}

double e2_brute(const lattice::LatticeRule& rule, const lattice::SpodWeightParams& p) {
  const std::size_t s = rule.dimension();
  double total = 0.0;
  for (std::uint64_t k = 0; k < rule.n; ++k) {
    for (unsigned mask = 1; mask < (1u << s); ++mask) {
      std::vector<std::size_t> u;
      double prod = 1.0;
      for (std::size_t j = 0; j < s; ++j) {
        if (mask & (1u << j)) {
          u.push_back(j + 1);
          prod *= lattice::korobov_kernel(p.alpha, static_cast<double>((k * rule.z[j]) % rule.n) / rule.n);
        }
      }
      total += weight_brute(p, u) * prod;
    }
  }
  return total / static_cast<double>(rule.n);
}

lattice::SpodWeightParams desk_weights(std::size_t s, double theta) {
  field::FieldSpec spec;
  spec.theta = theta;
  spec.amplitude = std::sqrt(1.5);
  spec.s = s;
  return lattice::build_spod_params(spec, 2, 2, 1.0, 1.0, 1e-6);
}

Outcome criterion_spod_oracle() {
  const auto t0 = Clock::now();
  Checks c;
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  for (std::uint64_t n : {7, 19, 37}) {
    for (std::size_t s = 1; s <= 3; ++s) {
      // random per-dimension factors and the field-derived ones
      lattice::SpodWeightParams random;
      random.alpha = 2;
      random.d = 2;
      random.gamma_jm.assign(s, std::vector<double>(2));
      random.beta.assign(s, 1.0);
      std::uniform_real_distribution<double> u(0.05, 1.0);
      for (auto& row : random.gamma_jm) {
        for (auto& g : row) g = u(rng);
      }
      for (const auto& p : {random, desk_weights(s, 2.5)}) {
        std::uniform_int_distribution<std::uint64_t> zdist(1, n - 1);
        for (int trial = 0; trial < 4; ++trial) {
          lattice::LatticeRule rule{n, {}};
          for (std::size_t j = 0; j < s; ++j) rule.z.push_back(zdist(rng));
          const double fast = lattice::worst_case_error_sq(rule, p).e_squared;
          const double slow = e2_brute(rule, p);
          const double rel = std::abs(fast - slow) / std::abs(slow);
          worst = std::max(worst, rel);
          c.expect(rel <= 1e-12, "n=" + std::to_string(n) + " s=" + std::to_string(s) + " rel " + fmt(rel));
        }
        if (s == 1) {
          const double gamma = weight_brute(p, {1});
          for (std::uint64_t z = 1; z < n; ++z) {
            const double e2 = lattice::worst_case_error_sq(lattice::LatticeRule{n, {z}}, p).e_squared;
            const double analytic = gamma * kPi * kPi / (3.0 * n * n);
            const double rel = std::abs(e2 - analytic) / analytic;
            worst = std::max(worst, rel);
            c.expect(rel <= 1e-12, "s=1 analytic n=" + std::to_string(n) + " rel " + fmt(rel));
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 10.0, "runtime " + fmt(secs) + " s >= 10 s");
  return c.outcome("max rel. deviation " + fmt(worst) + " in " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_cbc() {
  const auto t0 = Clock::now();
  Checks c;
  const std::uint64_t n = 101;
  const std::size_t s = 5;
  const auto p = desk_weights(s, 2.5);
  const auto rule = lattice::cbc_construct(n, s, p);
  const double e2 = lattice::worst_case_error_sq(rule, p).e_squared;
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<std::uint64_t> zdist(1, n - 1);
  double best_random = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 200; ++trial) {
    lattice::LatticeRule r{n, {}};
    for (std::size_t j = 0; j < s; ++j) r.z.push_back(zdist(rng));
    const double er = lattice::worst_case_error_sq(r, p).e_squared;
    best_random = std::min(best_random, er);
    c.expect(e2 <= er, "random vector " + std::to_string(trial) + " has e2 " + fmt(er));
  }
  lattice::LatticeRule alt = rule;
  for (std::uint64_t z = 1; z < n; ++z) {
    alt.z.back() = z;
    const double ez = lattice::worst_case_error_sq(alt, p).e_squared;
    c.expect(e2 <= ez * (1.0 + 1e-12), "last component z=" + std::to_string(z) + " gives " + fmt(ez));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 30.0, "runtime " + fmt(secs) + " s >= 30 s");
  std::ostringstream z;
  for (auto zj : rule.z) z << (z.tellp() > 0 ? "," : "") << zj;
  return c.outcome("z = (" + z.str() + "), e2 = " + fmt(e2) + ", best of 200 random = " + fmt(best_random) +
                   " in " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_manufactured() {
  const auto t0 = Clock::now();
  Checks c;
  auto exact = [](const fem::Point& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
  auto grad = [](const fem::Point& x) {
    return fem::Point{kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]),
                      kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1])};
  };
  auto rhs = [&](const fem::Point& x) { return 2.0 * kPi * kPi * exact(x); };
  std::vector<double> hs, l2, h1;
  for (int m : {8, 16, 32, 64}) {
    auto base = std::make_shared<const fem::Mesh>(fem::structured_mesh(m));
    const std::vector<double> y{0.0};
    field::FieldSpec spec;
    spec.theta = 2.5;
    spec.s = 1;
    const auto sol = fem::solve_source(fem::map_mesh(base, spec, y), rhs);
    const auto err = fem::errors_vs_exact(*base, sol.nodal_values, exact, grad);
    hs.push_back(m);
    l2.push_back(err.l2);
    h1.push_back(err.h1_semi);
  }
  const double rate_l2 = harness::fit_rate(hs, l2);
  const double rate_h1 = harness::fit_rate(hs, h1);
  c.expect(rate_l2 >= 1.8 && rate_l2 <= 2.2, "L2 rate " + fmt(rate_l2));
  c.expect(rate_h1 >= 0.8 && rate_h1 <= 1.2, "H1 rate " + fmt(rate_h1));
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "runtime " + fmt(secs) + " s >= 60 s");
  return c.outcome("L2 rate " + fmt(rate_l2) + ", H1 rate " + fmt(rate_h1) + " in " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion_capacity_exact() {
  Checks c;
  auto base = std::make_shared<const fem::Mesh>(fem::structured_mesh(16));
  const auto square = fem::map_mesh(base, [](const fem::Point& x) { return x; });
  const auto [u, v] = fem::solve_capacity_pair(square);
  const double cap = fem::capacity(u), conj = fem::capacity(v);
  c.expect(std::abs(cap - 1.0) <= 1e-12, "square cap " + format_double(cap));
  c.expect(std::abs(conj - 1.0) <= 1e-12, "square conjugate cap " + format_double(conj));

  const auto rect = fem::map_mesh(base, [](const fem::Point& x) { return fem::Point{x[0], 0.5 * x[1]}; });
  const auto [ur, vr] = fem::solve_capacity_pair(rect);
  const double cap_r = fem::capacity(ur), conj_r = fem::capacity(vr);
  c.expect(std::abs(cap_r - 2.0) <= 1e-12, "rectangle cap " + format_double(cap_r));
  c.expect(std::abs(conj_r - 0.5) <= 1e-12, "rectangle conjugate cap " + format_double(conj_r));
  c.expect(std::abs(cap_r * conj_r - 1.0) <= 1e-12, "rectangle product " + format_double(cap_r * conj_r));
  return c.outcome("square (" + format_double(cap) + ", " + format_double(conj) + "), rectangle (" +
                   format_double(cap_r) + ", " + format_double(conj_r) + ")");
}

// ------------------------------------------------------------ criteria 6 to 8

harness::ExperimentConfig qmc_config(const std::string& experiment, double theta, std::size_t s) {
  nlohmann::json j{
      {"schema_version", 1},
      {"experiment", experiment},
      {"field", {{"theta", theta}, {"c", std::sqrt(1.5)}, {"s", s}}},
      {"mesh_m", 16},
      {"qmc", {{"n_list", {67, 131, 257, 521, 1031, 2053, 4099}}, {"reference_n", 16411}}},
  };
  return harness::config_from_json(j);
}

Outcome qmc_rates(const std::string& experiment, std::size_t s, const std::vector<double>& minimum) {
  const auto t0 = Clock::now();
  Checks c;
  const std::vector<double> thetas{2.1, 2.5, 3.0};
  std::vector<double> rates;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const auto report = harness::run_experiment(qmc_config(experiment, thetas[k], s));
    const double rate = report.fitted_rate.value_or(std::nan(""));
    rates.push_back(rate);
    c.expect(rate >= minimum[k], "theta " + fmt(thetas[k]) + " rate " + fmt(rate) + " < " + fmt(minimum[k]));
  }
  c.expect(rates[0] < rates[1] && rates[1] < rates[2], "rates not increasing in theta");
  const double secs = seconds_since(t0);
  c.expect(secs < 1800.0, "runtime " + fmt(secs) + " s >= 30 min");
  return c.outcome("rates " + fmt(rates[0]) + ", " + fmt(rates[1]) + ", " + fmt(rates[2]) + " for theta 2.1, 2.5, 3 in " +
                   fmt(secs) + " s");
}

Outcome criterion_source_qmc() { return qmc_rates("SOURCE_FIELD", 20, {0.7, 0.9, 1.3}); }

Outcome criterion_capacity_qmc() { return qmc_rates("CAPACITY", 10, {0.4, 0.8, 1.4}); }

Outcome criterion_truncation() {
  const auto t0 = Clock::now();
  Checks c;
  nlohmann::json j{
      {"schema_version", 1},
      {"experiment", "DIM_TRUNCATION"},
      {"field", {{"theta", 2.1}, {"c", std::sqrt(1.5)}, {"s", 64}}},
      {"mesh_m", 16},
      {"truncation", {{"s_list", {2, 4, 8, 16, 32}}, {"s_ref", 64}, {"n", 4099}}},
  };
  const auto report = harness::run_experiment(harness::config_from_json(j));
  const double rate = report.fitted_rate.value_or(std::nan(""));
  c.expect(rate >= 0.9 && rate <= 1.6, "rate " + fmt(rate) + " outside [0.9, 1.6]");
  const double secs = seconds_since(t0);
  c.expect(secs < 1200.0, "runtime " + fmt(secs) + " s >= 20 min");
  std::string errs;
  for (double e : report.errors) errs += (errs.empty() ? "" : ", ") + fmt(e);
  return c.outcome("rate " + fmt(rate) + " (2 theta - 3 = " + fmt(*report.expected_rate) + "), errors " + errs +
                   " in " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion_cross_validation() {
  const auto t0 = Clock::now();
  Checks c;
  auto base = std::make_shared<const fem::Mesh>(fem::structured_mesh(16));
  const fem::SolverSettings settings;
  const double limit = 10.0 * settings.tolerance;
  auto f = [](const fem::Point& x) { return x[1]; };
  double worst = 0.0;
  for (std::size_t s = 1; s <= 4; ++s) {
    field::FieldSpec spec;
    spec.theta = 2.1;
    spec.amplitude = std::sqrt(1.5);
    spec.s = s;
    const auto rule = lattice::cbc_construct(5, s, desk_weights(s, 2.1));
    for (std::uint64_t i = 0; i < 5; ++i) {
      const auto y = rule.point(i);
      const auto mapped = fem::map_mesh(base, spec, y);
      const auto direct = fem::solve_source(mapped, f, settings);
      const auto pulled = fem::solve_source_reference(mapped, spec, f, fem::JacobianModel::ElementAffine, settings);
      double sum = 0.0;
      for (std::size_t v = 0; v < direct.nodal_values.size(); ++v) {
        const double d = direct.nodal_values[v] - pulled.nodal_values[v];
        sum += d * d;
      }
      const double diff = std::sqrt(sum);
      worst = std::max(worst, diff);
      c.expect(diff <= limit, "s=" + std::to_string(s) + " i=" + std::to_string(i) + " diff " + fmt(diff));
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "runtime " + fmt(secs) + " s >= 60 s");
  return c.outcome("max nodal l2 difference " + fmt(worst) + " (limit " + fmt(limit) + ") in " + fmt(secs) + " s");
}

// --------------------------------------------------------------- criterion 10

Outcome criterion_determinism() {
  const auto t0 = Clock::now();
  Checks c;
  const std::filesystem::path dir = std::filesystem::path(DOMAINUQ_SOURCE_DIR) / "configs";
  std::vector<std::filesystem::path> configs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  c.expect(!configs.empty(), "no configs found in " + dir.string());
  for (const auto& path : configs) {
    const auto config = harness::load_config(path.string());
    std::vector<std::string> csv, svg;
    for (unsigned threads : {1u, 1u, 4u, 4u}) {
      harness::RunOptions options;
      options.threads = threads;
      const auto report = harness::run_experiment(config, options);
      csv.push_back(harness::results_csv(report));
      svg.push_back(harness::results_svg(report));
    }
    for (std::size_t k = 1; k < csv.size(); ++k) {
      c.expect(csv[k] == csv[0], path.filename().string() + " CSV differs in run " + std::to_string(k));
      c.expect(svg[k] == svg[0], path.filename().string() + " SVG differs in run " + std::to_string(k));
    }
  }
  // generating-vector history CSV
  std::vector<std::string> hist;
  for (unsigned threads : {1u, 1u, 4u, 4u}) {
    hist.push_back(lattice::cbc_history_csv(
        lattice::cbc_run(1031, 20, desk_weights(20, 2.1), lattice::CbcMethod::Auto, threads)));
  }
  for (std::size_t k = 1; k < hist.size(); ++k) c.expect(hist[k] == hist[0], "CBC history differs");
  const double secs = seconds_since(t0);
  return c.outcome(std::to_string(configs.size()) + " configs, 4 runs each (threads 1, 1, 4, 4) in " + fmt(secs) +
                   " s");
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list{
      {"combinatorial identities", criterion_identities},
      {"SPOD worst-case error oracle", criterion_spod_oracle},
      {"CBC sanity", criterion_cbc},
      {"FEM manufactured solution", criterion_manufactured},
      {"capacity exactness", criterion_capacity_exact},
      {"source QMC convergence", criterion_source_qmc},
      {"capacity QMC convergence", criterion_capacity_qmc},
      {"dimension truncation", criterion_truncation},
      {"solve-path cross-validation", criterion_cross_validation},
      {"determinism", criterion_determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10); default: all")
      ->check(CLI::Range(1, static_cast<int>(criteria().size())));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (std::size_t k = 0; k < criteria().size(); ++k) {
    if (only != 0 && static_cast<int>(k + 1) != only) continue;
    const auto& [name, fn] = criteria()[k];
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << name << "): " << o.detail
              << std::endl;
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
