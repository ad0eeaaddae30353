#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "corrint/cli/sweep.hpp"

namespace corrint::cli {

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1a", "fig1b", "fig2", "fig3", "fig4a",
                                            "fig4b", "fig5",  "fig6", "fig7"};
  return ids;
}

struct FigureOverrides {
  std::optional<std::vector<double>> sigma;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<Method>> methods;
  std::optional<unsigned> workers;
};

/// Wall-clock budget used to pick sim replication counts when none is given.
inline constexpr double kSimBudgetSeconds = 480.0;
inline constexpr std::size_t kSimMinReps = 20;
inline constexpr std::size_t kSimMaxReps = 2000;

/// Rough cost of one replication of every sim group in the sweep, dominated
/// by the dense Cholesky factorization (m^3 / 3 flops at ~2 Gflop/s).
inline double sim_seconds_per_rep(const SweepSpec& spec) {
  double total = 0.0;
  for (const auto& b : spec.blocks) {
    if (std::find(b.methods.begin(), b.methods.end(), Method::sim) == b.methods.end()) continue;
    std::vector<std::string> seen;
    for (double x : spec.grid) {
      for (std::size_t k = 0; k < detail::n_curves(b); ++k) {
        const Block c = detail::resolve(b, spec.axis, x, k);
        const Window w = detail::sim_window(c, spec.sim);
        const std::string key = detail::sim_group_key(c, w.half_width);
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
        seen.push_back(key);
        const double copies = c.quantity == Quantity::temporal && c.mobility != "static" ? 2.0 : 1.0;
        const double m = copies * c.net.lambda * w.volume(c.net.n);
        total += (m * m * m / 3.0) / 2e9 + 1e-6 * m;
      }
    }
  }
  return total;
}

inline std::size_t auto_sim_reps(const SweepSpec& spec) {
  const double per = sim_seconds_per_rep(spec);
  if (per <= 0) return kSimMaxReps;
  const double r = std::floor(kSimBudgetSeconds / per);
  return static_cast<std::size_t>(std::clamp(r, double(kSimMinReps), double(kSimMaxReps)));
}

namespace detail {

inline Block base_block(Quantity q, int n, double lambda) {
  Block b;
  b.quantity = q;
  b.net = NetworkParams{n, lambda, 1.0, 4.0, 1e-3};
  b.shadowing = ShadowingParams{6.0, 0.1};
  b.curve = "sigma";
  b.curve_values = {3.0, 6.0, 9.0};
  b.methods = {Method::analytic_full, Method::numint};
  return b;
}

inline const char* kSigmaNote = "sigma curve set {3,6,9} is a chosen default; override with --sigma";
inline const char* kVmaxNote = "v_max is the radius R of the CIM displacement ball";

}  // namespace detail

/// Default recipe for a figure id, before overrides.
inline SweepSpec figure_recipe(const std::string& id) {
  using detail::base_block;
  SweepSpec s;
  s.name = id;
  const std::vector<double> deltas{0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.045, 0.05};
  const std::vector<double> vmax{0.01, 0.02, 0.03, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.5};
  if (id == "fig1a" || id == "fig1b") {
    s.axis = Axis::delta;
    s.grid = deltas;
    s.blocks = {id == "fig1a" ? base_block(Quantity::spatial, 1, 60) : base_block(Quantity::spatial, 2, 2000)};
    s.notes = {detail::kSigmaNote};
  } else if (id == "fig2") {
    s.axis = Axis::d_cor;
    s.grid = {0.02, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5};
    s.blocks = {base_block(Quantity::spatial, 2, 2000)};
    s.notes = {detail::kSigmaNote, "receiver separation fixed at delta = 0.01 km"};
  } else if (id == "fig3") {
    s.axis = Axis::sigma;
    s.grid = {1.5, 2, 2.5, 3, 4, 5, 6, 8, 10, 12};
    Block b = base_block(Quantity::spatial, 2, 2000);
    b.curve.clear();
    b.curve_values.clear();
    b.methods = {Method::analytic_full, Method::analytic_simplified, Method::analytic_bound, Method::numint};
    s.blocks = {b};
    s.notes = {"receiver separation fixed at delta = 0.01 km (a chosen value)"};
  } else if (id == "fig4a" || id == "fig4b") {
    s.axis = Axis::v_max;
    s.grid = vmax;
    s.blocks = {id == "fig4a" ? base_block(Quantity::temporal, 1, 60) : base_block(Quantity::temporal, 2, 2000)};
    s.notes = {detail::kSigmaNote, detail::kVmaxNote, "tau = 1"};
  } else if (id == "fig5") {
    s.axis = Axis::tau;
    s.grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    Block a = base_block(Quantity::temporal, 1, 60), b = base_block(Quantity::temporal, 2, 2000);
    a.label = "n1";
    b.label = "n2";
    a.mobility = b.mobility = "bm";
    s.blocks = {a, b};
    s.notes = {detail::kSigmaNote, "Brownian mobility with per-axis variance 0.0025 per slot",
               "two parameter sets are reported for this figure (n=1, lambda=60 and n=2, lambda=2000); "
               "both are emitted as blocks n1 and n2"};
  } else if (id == "fig6") {
    s.axis = Axis::lambda;
    s.grid = {250, 500, 1000, 1500, 2000, 3000, 4000, 6000};
    s.blocks = {base_block(Quantity::temporal, 2, 2000)};
    s.notes = {detail::kSigmaNote, detail::kVmaxNote, "CIM with v_max = 0.05, tau = 1"};
  } else if (id == "fig7") {
    s.axis = Axis::sigma;
    s.grid = {3, 4, 5, 6, 7, 8, 9, 10, 12};
    Block a = base_block(Quantity::temporal, 1, 60), b = base_block(Quantity::temporal, 2, 3600);
    a.label = "n1";
    b.label = "n2";
    a.curve = b.curve = "d_cor";
    a.curve_values = b.curve_values = {0.05, 0.1, 0.2};
    s.blocks = {a, b};
    s.notes = {detail::kVmaxNote, "CIM with v_max = 0.05, tau = 1",
               "lambda = 60 for n=1 and 3600 for n=2 so that lambda^n match"};
  } else {
    throw InvalidConfig("unknown figure id '" + id + "'");
  }
  return s;
}

inline SweepSpec figure_spec(const std::string& id, const FigureOverrides& o = {}) {
  SweepSpec s = figure_recipe(id);
  if (o.sigma) {
    if (s.axis == Axis::sigma) {
      s.grid = *o.sigma;
    } else {
      for (auto& b : s.blocks)
        if (b.curve == "sigma") b.curve_values = *o.sigma;
    }
  }
  if (o.methods) {
    for (auto& b : s.blocks) b.methods = *o.methods;
  }
  if (o.seed) s.seed = *o.seed;
  if (o.workers) s.workers = *o.workers;
  s.validate();
  s.sim.reps = o.reps ? *o.reps : auto_sim_reps(s);
  s.validate();
  return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << text;
  f.close();
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

struct FigureRun {
  std::filesystem::path path;
  SweepResult result;
};

/// Runs a figure recipe and writes <out_dir>/<id>.csv.
inline FigureRun run_figure(const std::string& id, const FigureOverrides& o, const std::filesystem::path& out_dir) {
  const SweepSpec s = figure_spec(id, o);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto path = out_dir / (id + ".csv");
  write_file(path, "");  // fail before the expensive part
  FigureRun run{path, run_sweep(s)};
  write_file(run.path, run.result.csv());
  return run;
}

}  // namespace corrint::cli
