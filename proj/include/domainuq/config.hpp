#pragma once

// Experiment configuration and its JSON form. Parsing rejects unknown keys
// and validates every physical parameter; serialization fills in defaults so
// that the dumped document is a complete, canonical record of a run.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "domainuq/error.hpp"
#include "domainuq/fem/norms.hpp"
#include "domainuq/fem/solve.hpp"
#include "domainuq/lattice.hpp"
#include "domainuq/numerics.hpp"
#include "domainuq/random_field.hpp"

namespace domainuq::harness {

inline constexpr int kSchemaVersion = 1;

enum class Experiment { SourceField, SourceQoi, Capacity, DimTruncation, FemH };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::SourceField: return "SOURCE_FIELD";
    case Experiment::SourceQoi: return "SOURCE_QOI";
    case Experiment::Capacity: return "CAPACITY";
    case Experiment::DimTruncation: return "DIM_TRUNCATION";
    case Experiment::FemH: return "FEM_H";
  }
  return "?";
}

inline Experiment experiment_from_string(const std::string& s) {
  for (auto e : {Experiment::SourceField, Experiment::SourceQoi, Experiment::Capacity, Experiment::DimTruncation,
                 Experiment::FemH}) {
    if (s == to_string(e)) return e;
  }
  throw Error(ErrorKind::Config, "unknown experiment '" + s + "'");
}

/// Source term of the Dirichlet problem.
enum class Source {
  X2,    ///< f(x) = x2
  Sine,  ///< f(x) = 2 pi^2 sin(pi x1) sin(pi x2)
};

inline fem::SourceFunction source_function(Source s) {
  if (s == Source::X2) return [](const fem::Point& x) { return x[1]; };
  return [](const fem::Point& x) {
    return 2.0 * std::numbers::pi * std::numbers::pi * std::sin(std::numbers::pi * x[0]) *
           std::sin(std::numbers::pi * x[1]);
  };
}

struct QmcSettings {
  std::vector<std::uint64_t> n_list;
  std::uint64_t reference_n = 32003;
  int alpha = 2;
  double weight_amplitude = 1e-6;
  double sigma_min = 1.0;
  double rho = 1.0;
};

struct TruncationSettings {
  std::vector<std::size_t> s_list;
  std::size_t s_ref = 0;  ///< 0: use field.s
  std::uint64_t n = 4099;
};

struct FemHSettings {
  std::vector<int> m_list;
  int reference_m = 128;
  std::size_t samples = 5;  ///< diagnostic lattice points, the first is y = 0
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Experiment experiment = Experiment::SourceField;
  field::FieldSpec field;
  int mesh_m = 16;
  Source source = Source::X2;
  QmcSettings qmc;
  TruncationSettings truncation;
  FemHSettings fem_h;
  double solver_tolerance = 1e-10;
  fem::LoadQuadrature load_quadrature = fem::LoadQuadrature::Centroid;
  fem::GradientDomain qoi_domain = fem::GradientDomain::Mapped;

  fem::SolverSettings solver() const {
    fem::SolverSettings s;
    s.tolerance = solver_tolerance;
    s.load = load_quadrature;
    return s;
  }

  /// Field dimension actually integrated over.
  std::size_t integration_dimension() const {
    if (experiment == Experiment::DimTruncation && truncation.s_ref != 0) return truncation.s_ref;
    return field.s;
  }

  void validate() const;
};

namespace detail {

inline bool is_power_of_two(long long m) { return m > 0 && (m & (m - 1)) == 0; }

inline void check_mesh_m(int m, const std::string& what) {
  if (m < 2 || !is_power_of_two(m)) {
    throw Error(ErrorKind::Config, what + " = " + std::to_string(m) + " must be a power of two >= 2");
  }
}

inline void check_prime(std::uint64_t n, const std::string& what) {
  if (!is_prime(n)) throw Error(ErrorKind::NotPrime, what + " = " + std::to_string(n) + ": n must be prime");
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw Error(ErrorKind::Config, "unsupported schema_version " + std::to_string(schema_version));
  }
  field.validate();
  detail::check_mesh_m(mesh_m, "mesh_m");
  if (!(solver_tolerance > 0.0 && solver_tolerance < 1.0)) throw Error(ErrorKind::Config, "solver tolerance in (0,1)");
  lattice::check_alpha(lattice::effective_alpha(qmc.alpha));
  if (!(qmc.weight_amplitude > 0.0)) throw Error(ErrorKind::Config, "weight_amplitude must be positive");
  if (!(qmc.sigma_min > 0.0 && qmc.sigma_min <= 1.0)) throw Error(ErrorKind::Config, "sigma_min must lie in (0,1]");
  if (!(qmc.rho >= 1.0)) throw Error(ErrorKind::Config, "rho must be >= 1");

  switch (experiment) {
    case Experiment::SourceField:
    case Experiment::SourceQoi:
    case Experiment::Capacity: {
      if (qmc.n_list.empty()) throw Error(ErrorKind::Config, "qmc.n_list must not be empty");
      for (std::size_t i = 0; i < qmc.n_list.size(); ++i) {
        detail::check_prime(qmc.n_list[i], "qmc.n_list entry");
        if (i > 0 && qmc.n_list[i] <= qmc.n_list[i - 1]) {
          throw Error(ErrorKind::Config, "qmc.n_list must be strictly increasing");
        }
      }
      detail::check_prime(qmc.reference_n, "qmc.reference_n");
      if (qmc.reference_n < qmc.n_list.back()) {
        throw Error(ErrorKind::Config, "qmc.reference_n must not be smaller than the largest n");
      }
      break;
    }
    case Experiment::DimTruncation: {
      const std::size_t s_ref = integration_dimension();
      if (truncation.s_list.empty()) throw Error(ErrorKind::Config, "truncation.s_list must not be empty");
      for (std::size_t i = 0; i < truncation.s_list.size(); ++i) {
        if (truncation.s_list[i] == 0) throw Error(ErrorKind::DimensionZero, "truncation.s_list entries must be >= 1");
        if (i > 0 && truncation.s_list[i] <= truncation.s_list[i - 1]) {
          throw Error(ErrorKind::Config, "truncation.s_list must be strictly increasing");
        }
      }
      if (truncation.s_list.back() > s_ref) throw Error(ErrorKind::Config, "truncation.s_list exceeds s_ref");
      detail::check_prime(truncation.n, "truncation.n");
      break;
    }
    case Experiment::FemH: {
      if (fem_h.m_list.empty()) throw Error(ErrorKind::Config, "fem_h.m_list must not be empty");
      detail::check_mesh_m(fem_h.reference_m, "fem_h.reference_m");
      for (std::size_t i = 0; i < fem_h.m_list.size(); ++i) {
        detail::check_mesh_m(fem_h.m_list[i], "fem_h.m_list entry");
        if (i > 0 && fem_h.m_list[i] <= fem_h.m_list[i - 1]) {
          throw Error(ErrorKind::Config, "fem_h.m_list must be strictly increasing");
        }
      }
      if (fem_h.m_list.back() > fem_h.reference_m) throw Error(ErrorKind::Config, "fem_h.m_list exceeds reference_m");
      if (fem_h.samples == 0) throw Error(ErrorKind::Config, "fem_h.samples must be >= 1");
      break;
    }
  }
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json field;
  field::to_json(field, c.field);
  nlohmann::json j{
      {"schema_version", c.schema_version},
      {"experiment", to_string(c.experiment)},
      {"field", field},
      {"mesh_m", c.mesh_m},
      {"source", c.source == Source::X2 ? "x2" : "sine"},
      {"qmc",
       {{"n_list", c.qmc.n_list},
        {"reference_n", c.qmc.reference_n},
        {"alpha", c.qmc.alpha},
        {"weight_amplitude", c.qmc.weight_amplitude},
        {"sigma_min", c.qmc.sigma_min},
        {"rho", c.qmc.rho}}},
      {"solver",
       {{"tolerance", c.solver_tolerance},
        {"load_quadrature", c.load_quadrature == fem::LoadQuadrature::Centroid ? "centroid" : "edge_midpoint"}}},
      {"qoi_domain", c.qoi_domain == fem::GradientDomain::Mapped ? "mapped" : "reference"},
  };
  if (c.experiment == Experiment::DimTruncation) {
    j["truncation"] = {{"s_list", c.truncation.s_list}, {"s_ref", c.integration_dimension()}, {"n", c.truncation.n}};
  }
  if (c.experiment == Experiment::FemH) {
    j["fem_h"] = {{"m_list", c.fem_h.m_list}, {"reference_m", c.fem_h.reference_m}, {"samples", c.fem_h.samples}};
  }
  return j;
}

/// Single-line canonical form (sorted keys, shortest round-trip numbers).
inline std::string canonical_json(const ExperimentConfig& c) { return to_json(c).dump(); }

/// Keys accepted at the top level besides the experiment description.
inline const std::set<std::string>& output_keys() {
  static const std::set<std::string> keys{"output"};
  return keys;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  std::set<std::string> top{"schema_version", "experiment", "field",  "mesh_m",     "source",
                            "qmc",            "truncation", "fem_h",  "solver",     "qoi_domain"};
  top.insert(output_keys().begin(), output_keys().end());
  detail::reject_unknown(j, top, "config");
  ExperimentConfig c;
  try {
    if (!j.contains("schema_version")) throw Error(ErrorKind::Config, "missing schema_version");
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != kSchemaVersion) {
      throw Error(ErrorKind::Config, "unsupported schema_version " + std::to_string(c.schema_version));
    }
    c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    c.field = j.at("field").get<field::FieldSpec>();
    c.mesh_m = j.value("mesh_m", c.mesh_m);
    if (j.contains("source")) {
      const auto s = j.at("source").get<std::string>();
      if (s == "x2") {
        c.source = Source::X2;
      } else if (s == "sine") {
        c.source = Source::Sine;
      } else {
        throw Error(ErrorKind::Config, "unknown source '" + s + "'");
      }
    }
    if (j.contains("qmc")) {
      const auto& q = j.at("qmc");
      detail::reject_unknown(q, {"n_list", "reference_n", "alpha", "weight_amplitude", "sigma_min", "rho"}, "qmc");
      c.qmc.n_list = q.value("n_list", c.qmc.n_list);
      c.qmc.reference_n = q.value("reference_n", c.qmc.reference_n);
      c.qmc.alpha = q.value("alpha", c.qmc.alpha);
      c.qmc.weight_amplitude = q.value("weight_amplitude", c.qmc.weight_amplitude);
      c.qmc.sigma_min = q.value("sigma_min", c.qmc.sigma_min);
      c.qmc.rho = q.value("rho", c.qmc.rho);
    }
    if (j.contains("truncation")) {
      const auto& t = j.at("truncation");
      detail::reject_unknown(t, {"s_list", "s_ref", "n"}, "truncation");
      c.truncation.s_list = t.value("s_list", c.truncation.s_list);
      c.truncation.s_ref = t.value("s_ref", c.truncation.s_ref);
      c.truncation.n = t.value("n", c.truncation.n);
    }
    if (j.contains("fem_h")) {
      const auto& f = j.at("fem_h");
      detail::reject_unknown(f, {"m_list", "reference_m", "samples"}, "fem_h");
      c.fem_h.m_list = f.value("m_list", c.fem_h.m_list);
      c.fem_h.reference_m = f.value("reference_m", c.fem_h.reference_m);
      c.fem_h.samples = f.value("samples", c.fem_h.samples);
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      detail::reject_unknown(s, {"tolerance", "load_quadrature"}, "solver");
      c.solver_tolerance = s.value("tolerance", c.solver_tolerance);
      const auto quad = s.value("load_quadrature", std::string("centroid"));
      if (quad == "centroid") {
        c.load_quadrature = fem::LoadQuadrature::Centroid;
      } else if (quad == "edge_midpoint") {
        c.load_quadrature = fem::LoadQuadrature::EdgeMidpoint;
      } else {
        throw Error(ErrorKind::Config, "unknown load_quadrature '" + quad + "'");
      }
    }
    if (j.contains("qoi_domain")) {
      const auto d = j.at("qoi_domain").get<std::string>();
      if (d == "mapped") {
        c.qoi_domain = fem::GradientDomain::Mapped;
      } else if (d == "reference") {
        c.qoi_domain = fem::GradientDomain::Reference;
      } else {
        throw Error(ErrorKind::Config, "unknown qoi_domain '" + d + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config: ") + e.what());
  }
  if (c.experiment == Experiment::DimTruncation && c.truncation.s_ref != 0) c.field.s = c.truncation.s_ref;
  c.validate();
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace domainuq::harness
