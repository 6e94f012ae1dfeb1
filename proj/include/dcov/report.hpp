#pragma once

// CSV / JSON / plot.dat writers. Numbers carry 17 significant digits so
// outputs round-trip exactly; every file embeds the resolved config and the
// artifact version.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcov/config.hpp"
#include "dcov/harness.hpp"
#include "dcov/version.hpp"

namespace dcov {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline void csv_matrix_header(std::ofstream& out, const std::string& prefix,
                              Index dim) {
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j)
      out << "," << prefix << "_re_" << i << "_" << j
          << "," << prefix << "_im_" << i << "_" << j;
}

inline void csv_matrix_row(std::ofstream& out, const ComplexMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      out << "," << fmt17(m(i, j).real()) << "," << fmt17(m(i, j).imag());
}

}  // namespace detail

struct SeriesExport {
  std::vector<double> taus;
  std::vector<ComplexMatrix> c_means;   // empty for reference exports
  std::vector<ComplexMatrix> rhos;
  std::vector<double> traces;
  std::vector<double> min_eigs;
  std::vector<double> max_ses;
  std::string source;                    // "pipeline" or "reference"
  double epsilon = 0.0, delta = 0.0, dt = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
};

inline SeriesExport make_pipeline_export(const PointResult& point,
                                         double epsilon, std::uint64_t seed) {
  SeriesExport ex;
  ex.source = "pipeline";
  ex.epsilon = epsilon;
  ex.delta = point.ensemble.delta_effective;
  ex.dt = point.ensemble.dt;
  ex.n_samples = point.ensemble.ensemble_size;
  ex.seed = seed;
  for (std::size_t k = 0; k < point.density.size(); ++k) {
    ex.taus.push_back(point.density[k].tau);
    ex.c_means.push_back(point.ensemble.estimates[k].c_mean());
    ex.rhos.push_back(point.density[k].rho);
    ex.traces.push_back(point.density[k].trace);
    ex.min_eigs.push_back(point.density[k].min_eig);
    ex.max_ses.push_back(point.density[k].max_se);
  }
  return ex;
}

inline SeriesExport make_reference_export(const MasterSeries& series,
                                          double epsilon, std::uint64_t seed) {
  SeriesExport ex;
  ex.source = "reference";
  ex.epsilon = epsilon;
  ex.seed = seed;
  for (std::size_t k = 0; k < series.rhos.size(); ++k) {
    ex.taus.push_back(series.times[k]);
    ex.c_means.push_back(series.rhos[k]);  // column-aligned with pipeline CSVs
    ex.rhos.push_back(series.rhos[k]);
    ex.traces.push_back(series.rhos[k].trace().real());
    ex.min_eigs.push_back(min_eigenvalue(series.rhos[k]));
    ex.max_ses.push_back(0.0);
  }
  return ex;
}

inline void write_series_csv(const std::filesystem::path& path,
                             const SeriesExport& ex, const Json& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# dcov " << kVersion << "\n";
  out << "# source=" << ex.source << " epsilon=" << fmt17(ex.epsilon)
      << " delta=" << fmt17(ex.delta) << " dt=" << fmt17(ex.dt)
      << " nSamples=" << ex.n_samples << " seed=" << ex.seed << "\n";
  out << "# config=" << config.dump() << "\n";
  const Index dim = ex.rhos.empty() ? 0 : ex.rhos[0].rows();
  out << "tau";
  detail::csv_matrix_header(out, "C", dim);
  detail::csv_matrix_header(out, "rho", dim);
  out << ",trace,min_eigenvalue,max_SE\n";
  for (std::size_t k = 0; k < ex.taus.size(); ++k) {
    out << fmt17(ex.taus[k]);
    detail::csv_matrix_row(out, ex.c_means[k]);
    detail::csv_matrix_row(out, ex.rhos[k]);
    out << "," << fmt17(ex.traces[k]) << "," << fmt17(ex.min_eigs[k]) << ","
        << fmt17(ex.max_ses[k]) << "\n";
  }
}

inline void write_series_json(const std::filesystem::path& path,
                              const SeriesExport& ex, const Json& config) {
  Json doc;
  doc["meta"] = {{"version", kVersion},
                 {"source", ex.source},
                 {"epsilon", ex.epsilon},
                 {"delta", ex.delta},
                 {"dt", ex.dt},
                 {"nSamples", ex.n_samples},
                 {"seed", ex.seed},
                 {"config", config}};
  Json rows = Json::array();
  for (std::size_t k = 0; k < ex.taus.size(); ++k) {
    rows.push_back({{"tau", ex.taus[k]},
                    {"C", detail::matrix_to_json(ex.c_means[k])},
                    {"rho", detail::matrix_to_json(ex.rhos[k])},
                    {"trace", ex.traces[k]},
                    {"minEigenvalue", ex.min_eigs[k]},
                    {"maxSE", ex.max_ses[k]}});
  }
  doc["rows"] = rows;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

inline void write_scaling_report(const std::filesystem::path& path,
                                 const ScalingReport& report,
                                 const Json& config) {
  Json doc;
  doc["meta"] = {{"version", kVersion}, {"config", config}};
  Json per = Json::array();
  for (const auto& pt : report.per_epsilon)
    per.push_back({{"epsilon", pt.epsilon},
                   {"error", pt.error},
                   {"maxSE", pt.max_se},
                   {"resolved", pt.resolved}});
  doc["perEpsilon"] = per;
  doc["fittedSlope"] = report.fitted_slope;
  doc["fittedLogIntercept"] = report.fitted_log_intercept;
  doc["slopeCI"] = {report.slope_ci_lo, report.slope_ci_hi};
  doc["resolvedCount"] = report.resolved_count;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

inline void write_plot_dat(const std::filesystem::path& path,
                           const ScalingReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# epsilon error max_se\n";
  for (const auto& pt : report.per_epsilon)
    out << fmt17(pt.epsilon) << " " << fmt17(pt.error) << " "
        << fmt17(pt.max_se) << "\n";
}

inline void write_markov_table(const std::filesystem::path& path,
                               const std::vector<LagRow>& rows,
                               double dt, const Json& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# dcov " << kVersion << "\n";
  out << "# dt=" << fmt17(dt) << "\n";
  out << "# config=" << config.dump() << "\n";
  out << "lag,i,j,re,im,se\n";
  for (const auto& row : rows)
    for (Index i = 0; i < row.estimate.rows(); ++i)
      for (Index j = 0; j < row.estimate.cols(); ++j)
        out << row.lag << "," << i << "," << j << ","
            << fmt17(row.estimate(i, j).real()) << ","
            << fmt17(row.estimate(i, j).imag()) << ","
            << fmt17(row.se(i, j)) << "\n";
}

}  // namespace dcov
