#pragma once

// Batch subcommands behind the CLI: simulate / reference / sweep /
// noise-check / validate. Exit codes: 0 success, 2 validation error,
// 3 numerical blowup, 4 inconclusive statistics.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "dcov/config.hpp"
#include "dcov/report.hpp"

namespace dcov {

struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

namespace detail {

inline ExperimentConfig load_with_overrides(const std::string& config_path,
                                            const CliOverrides& ov) {
  ExperimentConfig cfg = load_config(config_path);
  if (ov.out_dir) cfg.output_dir = *ov.out_dir;
  if (ov.seed) {
    cfg.seed = *ov.seed;
    cfg.sweep.seed = *ov.seed;
    cfg.resolved["_resolved"]["seed"] = *ov.seed;
  }
  if (ov.workers) {
    cfg.workers = *ov.workers;
    cfg.sweep.workers = *ov.workers;
  }
  return cfg;
}

inline int guard(const std::function<int()>& body) {
  try {
    return body();
  } catch (const NumericalBlowupError& e) {
    std::cerr << "error (numerical blowup): " << e.what() << "\n";
    return 3;
  } catch (const NormCollapseError& e) {
    std::cerr << "error (numerical blowup): " << e.what() << "\n";
    return 3;
  } catch (const InconclusiveSweepError& e) {
    std::cerr << "error (inconclusive statistics): " << e.what() << "\n";
    return 4;
  } catch (const DegenerateTraceError& e) {
    std::cerr << "error (degenerate trace): " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", eps);
  std::string s = buf;
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

}  // namespace detail

inline int cmd_validate(const std::string& config_path,
                        const CliOverrides& ov = {}) {
  return detail::guard([&] {
    const ExperimentConfig cfg = detail::load_with_overrides(config_path, ov);
    std::cout << "config ok: dims " << cfg.spec.dims.dim_a << "x"
              << cfg.spec.dims.dim_b << ", " << cfg.spec.l_ops.size()
              << " A channel(s), " << cfg.spec.m_ops.size()
              << " B channel(s), dt=" << fmt17(cfg.window.dt_micro())
              << ", delta=" << fmt17(cfg.window.delta_effective()) << "\n";
    return 0;
  });
}

inline int cmd_simulate(const std::string& config_path,
                        const CliOverrides& ov = {}) {
  return detail::guard([&] {
    const ExperimentConfig cfg = detail::load_with_overrides(config_path, ov);
    std::filesystem::create_directories(cfg.output_dir);
    const PointResult point =
        run_point(cfg.spec, cfg.window, cfg.ensemble_size,
                  cfg.reference_variant, cfg.initial, cfg.seed, cfg.workers,
                  false, cfg.mode);
    const SeriesExport ex =
        make_pipeline_export(point, cfg.window.epsilon, cfg.seed);
    const auto dir = std::filesystem::path(cfg.output_dir);
    write_series_csv(dir / "series.csv", ex, cfg.resolved);
    write_series_json(dir / "series.json", ex, cfg.resolved);
    const SeriesExport rex =
        make_reference_export(point.reference, cfg.window.epsilon, cfg.seed);
    write_series_csv(dir / "reference.csv", rex, cfg.resolved);
    std::cout << "simulate: sup-tau error " << fmt17(point.sup_error)
              << ", max SE " << fmt17(point.max_se) << ", wrote "
              << (dir / "series.csv").string() << "\n";
    return 0;
  });
}

inline int cmd_reference(const std::string& config_path,
                         const CliOverrides& ov = {}) {
  return detail::guard([&] {
    const ExperimentConfig cfg = detail::load_with_overrides(config_path, ov);
    std::filesystem::create_directories(cfg.output_dir);
    const MasterEquationSpec mspec =
        make_master_spec(cfg.spec, cfg.reference_variant);
    const MasterSeries series = integrate_master(
        cfg.initial.reference_rho0(cfg.spec.dims), mspec, cfg.window.tau_grid);
    const PositivityReport monitor = positivity_monitor(series);
    const SeriesExport ex =
        make_reference_export(series, cfg.window.epsilon, cfg.seed);
    const auto dir = std::filesystem::path(cfg.output_dir);
    write_series_csv(dir / "reference.csv", ex, cfg.resolved);
    write_series_json(dir / "reference.json", ex, cfg.resolved);
    std::cout << "reference: " << series.rhos.size() << " tau points, "
              << "hermitize events " << series.hermitize_events
              << (monitor.any_flagged ? ", POSITIVITY FLAGGED" : "") << "\n";
    return 0;
  });
}

inline int cmd_sweep(const std::string& config_path,
                     const CliOverrides& ov = {}) {
  return detail::guard([&] {
    ExperimentConfig cfg = detail::load_with_overrides(config_path, ov);
    if (!cfg.has_sweep)
      throw ConfigError("sweep: config has no sweep block");
    std::filesystem::create_directories(cfg.output_dir);
    const auto dir = std::filesystem::path(cfg.output_dir);

    // per-epsilon series files alongside the scaling report
    for (double eps : cfg.sweep.epsilons) {
      WindowConfig window{eps, cfg.sweep.c_delta, cfg.sweep.c_delta_t,
                          cfg.sweep.tau_grid};
      const PointResult point =
          run_point(cfg.spec, window, cfg.sweep.ensemble_size,
                    cfg.sweep.reference_variant, cfg.initial, cfg.sweep.seed,
                    cfg.sweep.workers, false, cfg.sweep.mode);
      const SeriesExport ex = make_pipeline_export(point, eps, cfg.sweep.seed);
      write_series_csv(dir / ("series_" + detail::eps_tag(eps) + ".csv"), ex,
                       cfg.resolved);
    }
    const ScalingReport report = run_sweep(cfg.sweep, cfg.spec, cfg.initial);
    write_scaling_report(dir / "scaling_report.json", report, cfg.resolved);
    write_plot_dat(dir / "plot.dat", report);
    std::cout << "sweep: slope " << fmt17(report.fitted_slope) << " CI ["
              << fmt17(report.slope_ci_lo) << ", " << fmt17(report.slope_ci_hi)
              << "], " << report.resolved_count << "/"
              << report.per_epsilon.size() << " points resolved\n";
    return 0;
  });
}

inline int cmd_noise_check(const std::string& config_path,
                           const CliOverrides& ov = {}) {
  return detail::guard([&] {
    const ExperimentConfig cfg = detail::load_with_overrides(config_path, ov);
    std::filesystem::create_directories(cfg.output_dir);
    RngStream stream(cfg.seed, 0);
    const auto rows =
        markov_diagnostics(cfg.spec.noise, cfg.noise_check_dt,
                           cfg.noise_check_lags, cfg.noise_check_samples,
                           stream);
    write_markov_table(std::filesystem::path(cfg.output_dir) / "noise_check.csv",
                       rows, cfg.noise_check_dt, cfg.resolved);
    // lag-0 should reproduce Sigma_joint; lags >= 1 should vanish
    double worst_zero = 0.0, worst_lagged = 0.0;
    for (const auto& row : rows) {
      for (Index i = 0; i < row.estimate.rows(); ++i)
        for (Index j = 0; j < row.estimate.cols(); ++j) {
          const double se = std::max(row.se(i, j), 1e-300);
          const Complex target =
              row.lag == 0 ? cfg.spec.noise.joint(i, j) : Complex(0, 0);
          const double pull = std::abs(row.estimate(i, j) - target) / se;
          if (row.lag == 0)
            worst_zero = std::max(worst_zero, pull);
          else
            worst_lagged = std::max(worst_lagged, pull);
        }
    }
    std::cout << "noise-check: lag-0 worst pull " << fmt17(worst_zero)
              << " SE, lagged worst pull " << fmt17(worst_lagged)
              << " SE, table written\n";
    return 0;
  });
}

}  // namespace dcov
