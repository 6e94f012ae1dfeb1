#pragma once

// Declarative experiment configuration: JSON with nested [re, im] literals,
// named operator presets, and full validation before any compute.

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcov/errors.hpp"
#include "dcov/harness.hpp"
#include "dcov/linalg.hpp"

namespace dcov {

using Json = nlohmann::json;

namespace cfg {

inline Complex parse_complex(const Json& j, const std::string& where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw ConfigError(where + ": expected a number or an [re, im] pair");
}

inline ComplexVector parse_vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(where + ": expected a non-empty array of [re, im] pairs");
  ComplexVector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Index>(i)) = parse_complex(j[i], where);
  return v;
}

inline ComplexMatrix parse_matrix_literal(const Json& j,
                                          const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(where + ": expected a nested array of [re, im] pairs");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(where + ": empty matrix row");
  ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError(where + ": ragged matrix literal");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          parse_complex(j[r][c], where);
  }
  return m;
}

inline ComplexMatrix preset_operator(const std::string& name, Index dim,
                                     const std::string& where) {
  if (name == "identity") return identity_op(dim);
  if (name == "pauli_x") return pauli_x();
  if (name == "pauli_y") return pauli_y();
  if (name == "pauli_z") return pauli_z();
  if (name == "raising") return raising_op();
  if (name == "lowering") return lowering_op();
  if (name == "zero") return ComplexMatrix::Zero(dim, dim);
  throw ConfigError(where + ": unknown operator preset '" + name + "'");
}

// Operator spec: "pauli_z" | {"preset": "pauli_z", "scale": 0.4}
// | {"matrix": [[[re,im],...],...]} | a raw nested array literal.
inline ComplexMatrix parse_operator(const Json& j, Index dim,
                                    const std::string& where) {
  ComplexMatrix m;
  if (j.is_string()) {
    m = preset_operator(j.get<std::string>(), dim, where);
  } else if (j.is_object()) {
    double scale = 1.0;
    if (j.contains("scale")) {
      if (!j["scale"].is_number())
        throw ConfigError(where + ".scale: expected a real number");
      scale = j["scale"].get<double>();
    }
    if (j.contains("preset"))
      m = preset_operator(j["preset"].get<std::string>(), dim, where);
    else if (j.contains("matrix"))
      m = parse_matrix_literal(j["matrix"], where + ".matrix");
    else
      throw ConfigError(where + ": operator object needs 'preset' or 'matrix'");
    m *= scale;
  } else if (j.is_array()) {
    m = parse_matrix_literal(j, where);
  } else {
    throw ConfigError(where + ": cannot parse operator spec");
  }
  if (m.rows() != dim || m.cols() != dim)
    throw ConfigError(where + ": operator is " + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()) + ", expected dim " +
                      std::to_string(dim));
  return m;
}

inline MasterVariant parse_variant(const std::string& s,
                                   const std::string& where) {
  if (s == "generic_gksl") return MasterVariant::GenericGksl;
  if (s == "interacting_eq60") return MasterVariant::InteractingEq60;
  if (s == "von_neumann") return MasterVariant::VonNeumann;
  throw ConfigError(where + ": unknown reference variant '" + s + "'");
}

inline std::string variant_name(MasterVariant v) {
  switch (v) {
    case MasterVariant::GenericGksl: return "generic_gksl";
    case MasterVariant::InteractingEq60: return "interacting_eq60";
    case MasterVariant::VonNeumann: return "von_neumann";
  }
  return "?";
}

}  // namespace cfg

struct ExperimentConfig {
  SystemSpec spec;
  InitialCondition initial;
  WindowConfig window;
  MicroMode mode = MicroMode::Free;
  Index record_stride = 1;
  long ensemble_size = 1000;
  std::uint64_t seed = 1;
  int workers = 0;
  MasterVariant reference_variant = MasterVariant::GenericGksl;
  std::string output_dir = "out";

  // sweep block (optional)
  bool has_sweep = false;
  SweepConfig sweep;

  // noise diagnostics block (optional)
  long noise_check_samples = 100000;
  long noise_check_lags = 5;
  double noise_check_dt = 1e-3;

  Json resolved;  // the fully resolved config, embedded in every output
};

inline ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig cfg;

  if (!j.contains("dims") || !j["dims"].contains("dimA") ||
      !j["dims"].contains("dimB"))
    throw ConfigError("config: dims.dimA and dims.dimB are required");
  cfg.spec.dims.dim_a = j["dims"]["dimA"].get<Index>();
  cfg.spec.dims.dim_b = j["dims"]["dimB"].get<Index>();
  if (cfg.spec.dims.dim_a < 1 || cfg.spec.dims.dim_b < 1)
    throw ConfigError("config: dims must be >= 1");

  const Json ops = j.value("operators", Json::object());
  cfg.spec.h_a = ops.contains("hA")
                     ? cfg::parse_operator(ops["hA"], cfg.spec.dims.dim_a,
                                           "operators.hA")
                     : ComplexMatrix::Zero(cfg.spec.dims.dim_a,
                                           cfg.spec.dims.dim_a);
  cfg.spec.h_b = ops.contains("hB")
                     ? cfg::parse_operator(ops["hB"], cfg.spec.dims.dim_b,
                                           "operators.hB")
                     : ComplexMatrix::Zero(cfg.spec.dims.dim_b,
                                           cfg.spec.dims.dim_b);
  if (ops.contains("lOps"))
    for (std::size_t i = 0; i < ops["lOps"].size(); ++i)
      cfg.spec.l_ops.push_back(cfg::parse_operator(
          ops["lOps"][i], cfg.spec.dims.dim_a,
          "operators.lOps[" + std::to_string(i) + "]"));
  if (ops.contains("mOps"))
    for (std::size_t i = 0; i < ops["mOps"].size(); ++i)
      cfg.spec.m_ops.push_back(cfg::parse_operator(
          ops["mOps"][i], cfg.spec.dims.dim_b,
          "operators.mOps[" + std::to_string(i) + "]"));
  if (ops.contains("interaction"))
    for (std::size_t i = 0; i < ops["interaction"].size(); ++i) {
      const auto& p = ops["interaction"][i];
      const std::string where = "operators.interaction[" + std::to_string(i) + "]";
      if (!p.contains("a") || !p.contains("b"))
        throw ConfigError(where + ": needs 'a' and 'b' operators");
      cfg.spec.interaction.push_back(
          {cfg::parse_operator(p["a"], cfg.spec.dims.dim_a, where + ".a"),
           cfg::parse_operator(p["b"], cfg.spec.dims.dim_b, where + ".b")});
    }

  // noise block
  const Index na = static_cast<Index>(cfg.spec.l_ops.size());
  const Index nb = static_cast<Index>(cfg.spec.m_ops.size());
  ComplexMatrix saa = ComplexMatrix::Zero(na, na);
  ComplexMatrix sbb = ComplexMatrix::Zero(nb, nb);
  ComplexMatrix sab = ComplexMatrix::Zero(na, nb);
  NoiseKind kind = NoiseKind::Real;
  if (j.contains("noise")) {
    const Json& nj = j["noise"];
    if (nj.contains("sigmaAA"))
      saa = cfg::parse_matrix_literal(nj["sigmaAA"], "noise.sigmaAA");
    if (nj.contains("sigmaBB"))
      sbb = cfg::parse_matrix_literal(nj["sigmaBB"], "noise.sigmaBB");
    if (nj.contains("sigmaAB"))
      sab = cfg::parse_matrix_literal(nj["sigmaAB"], "noise.sigmaAB");
    const std::string ks = nj.value("kind", "real");
    if (ks == "real")
      kind = NoiseKind::Real;
    else if (ks == "circular")
      kind = NoiseKind::Circular;
    else
      throw ConfigError("noise.kind: expected 'real' or 'circular'");
  }
  if (saa.rows() != na || sbb.rows() != nb ||
      sab.rows() != na || sab.cols() != nb)
    throw ConfigError(
        "noise: sigma block dimensions must match lOps/mOps counts");
  try {
    cfg.spec.noise = build_noise_model(saa, sbb, sab, kind);
  } catch (const IndefiniteCovarianceError& e) {
    throw IndefiniteCovarianceError(
        std::string("noise block rejected: ") + e.what());
  }

  // initial state
  if (j.contains("initial")) {
    const Json& ij = j["initial"];
    const std::string ks = ij.value("kind", "fixed");
    if (ks == "random_haar") {
      cfg.initial.random_haar = true;
    } else if (ks != "fixed") {
      throw ConfigError("initial.kind: expected 'fixed' or 'random_haar'");
    }
    if (!cfg.initial.random_haar) {
      if (!ij.contains("x") || !ij.contains("y"))
        throw ConfigError("initial: x and y are required unless random_haar");
      cfg.initial.x = cfg::parse_vector(ij["x"], "initial.x");
      cfg.initial.y = cfg::parse_vector(ij["y"], "initial.y");
    }
  } else {
    throw ConfigError("config: initial block is required");
  }

  // micro block
  long micro_steps = 0;
  if (j.contains("micro")) {
    const Json& mj = j["micro"];
    const std::string ms = mj.value("mode", "free");
    if (ms == "free")
      cfg.mode = MicroMode::Free;
    else if (ms == "interacting")
      cfg.mode = MicroMode::Interacting;
    else
      throw ConfigError("micro.mode: expected 'free' or 'interacting'");
    cfg.record_stride = mj.value("recordStride", Index{1});
    if (cfg.record_stride < 1)
      throw ConfigError("micro.recordStride must be >= 1");
    micro_steps = mj.value("steps", 0L);
    if (micro_steps < 0) throw ConfigError("micro.steps must be >= 1");
  }

  // window block
  if (j.contains("window")) {
    const Json& wj = j["window"];
    if (!wj.contains("epsilon"))
      throw ConfigError("window.epsilon is required");
    cfg.window.epsilon = wj["epsilon"].get<double>();
    cfg.window.c_delta = wj.value("cDelta", 1.0);
    cfg.window.c_delta_t = wj.value("cDeltaT", 0.25);
    if (j.contains("micro") && j["micro"].contains("dt")) {
      const double dt = j["micro"]["dt"].get<double>();
      if (dt <= 0) throw ConfigError("micro.dt must be positive");
      cfg.window.c_delta_t = dt / (cfg.window.epsilon * cfg.window.epsilon);
    }
    if (!wj.contains("tauGrid"))
      throw ConfigError("window.tauGrid is required");
    for (const auto& t : wj["tauGrid"])
      cfg.window.tau_grid.push_back(t.get<double>());
  } else {
    throw ConfigError("config: window block is required");
  }

  cfg.ensemble_size = j.value("ensembleSize", 1000L);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.workers = j.value("workers", 0);
  cfg.output_dir = j.value("outputDir", std::string("out"));
  if (j.contains("reference") && j["reference"].contains("variant"))
    cfg.reference_variant = cfg::parse_variant(
        j["reference"]["variant"].get<std::string>(), "reference.variant");

  if (j.contains("sweep")) {
    const Json& sj = j["sweep"];
    cfg.has_sweep = true;
    if (!sj.contains("epsilons"))
      throw ConfigError("sweep.epsilons is required");
    for (const auto& e : sj["epsilons"])
      cfg.sweep.epsilons.push_back(e.get<double>());
    cfg.sweep.c_delta = cfg.window.c_delta;
    cfg.sweep.c_delta_t = cfg.window.c_delta_t;
    cfg.sweep.ensemble_size = sj.value("ensembleSize", cfg.ensemble_size);
    cfg.sweep.tau_grid = cfg.window.tau_grid;
    cfg.sweep.reference_variant =
        sj.contains("referenceVariant")
            ? cfg::parse_variant(sj["referenceVariant"].get<std::string>(),
                                 "sweep.referenceVariant")
            : cfg.reference_variant;
    cfg.sweep.bootstrap_resamples = sj.value("bootstrapResamples", 200L);
    cfg.sweep.seed = cfg.seed;
    cfg.sweep.workers = cfg.workers;
    cfg.sweep.mode = cfg.mode;
    cfg.sweep.validate();
    for (double eps : cfg.sweep.epsilons) {
      WindowConfig w{eps, cfg.sweep.c_delta, cfg.sweep.c_delta_t,
                     cfg.sweep.tau_grid};
      w.validate();
    }
  }

  if (j.contains("noiseCheck")) {
    const Json& nj = j["noiseCheck"];
    cfg.noise_check_samples = nj.value("samples", 100000L);
    cfg.noise_check_lags = nj.value("lags", 5L);
    cfg.noise_check_dt = nj.value("dt", 1e-3);
  }

  // validate everything up front: spec Hermiticity/counts, window scales,
  // the dt stability guard, and the initial state
  cfg.spec.validate();
  cfg.window.validate();
  cfg.initial.validate(cfg.spec.dims);
  const double guard = 0.1 / std::max(cfg.spec.hamiltonian_norm_bound(), 1e-12);
  if (cfg.window.dt_micro() > guard)
    throw ConfigError("micro step dt = " + std::to_string(cfg.window.dt_micro()) +
                      " exceeds the stability guard 0.1/||H|| = " +
                      std::to_string(guard));
  if (micro_steps > 0) {
    // explicit step budget must cover the last window
    long needed = cfg.window.window_steps();
    for (double t : cfg.window.tau_grid)
      needed = std::max(needed,
                        cfg.window.tau_step_index(t) + cfg.window.window_steps());
    if (micro_steps < needed)
      throw ConfigError("micro.steps = " + std::to_string(micro_steps) +
                        " does not cover the last window (needs " +
                        std::to_string(needed) + " steps)");
  }

  cfg.resolved = j;
  cfg.resolved["_resolved"] = {
      {"dt", cfg.window.dt_micro()},
      {"delta", cfg.window.delta()},
      {"deltaEffective", cfg.window.delta_effective()},
      {"mode", cfg.mode == MicroMode::Free ? "free" : "interacting"},
      {"referenceVariant", cfg::variant_name(cfg.reference_variant)},
      {"ensembleSize", cfg.ensemble_size},
      {"seed", cfg.seed},
  };
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace dcov
