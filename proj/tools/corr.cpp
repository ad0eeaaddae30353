// corr: figure recipes, parameter sweeps and plotting from the command line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "corrint/cli/figures.hpp"
#include "corrint/cli/svg.hpp"

namespace {

using namespace corrint;
using namespace corrint::cli;

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kNumerical = 3;

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_name<Method>(n));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot read '" + path + "'");
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int report(const SweepResult& r, const std::string& where) {
  std::fprintf(stderr, "wrote %s (%zu rows, %zu invalid cells, %zu numerical failures)\n", where.c_str(),
               r.table.rows.size(), r.invalid_cells, r.numerical_failures);
  return r.numerical_failures ? kNumerical : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial and temporal interference correlation toolkit"};
  app.require_subcommand(1);

  auto* fig = app.add_subcommand("figure", "Run a figure recipe and write <out>/<id>.csv");
  std::string fig_id, fig_out = ".";
  std::vector<double> fig_sigma;
  std::vector<std::string> fig_methods;
  std::size_t fig_reps = 0;
  std::uint64_t fig_seed = 0;
  unsigned fig_workers = 0;
  fig->add_option("id", fig_id, "Figure id (fig1a fig1b fig2 fig3 fig4a fig4b fig5 fig6 fig7)")->required();
  fig->add_option("--out", fig_out, "Output directory");
  fig->add_option("--sigma", fig_sigma, "Sigma values (curves, or the grid when sigma is the axis)")->delimiter(',');
  fig->add_option("--method", fig_methods, "Methods to evaluate")->delimiter(',');
  auto* reps_opt = fig->add_option("--reps", fig_reps, "Simulation replications");
  auto* seed_opt = fig->add_option("--seed", fig_seed, "Root seed");
  auto* workers_opt = fig->add_option("--workers", fig_workers, "Concurrent grid cells");

  auto* sw = app.add_subcommand("sweep", "Run a sweep from a JSON config or an emitted CSV header");
  std::string sw_config, sw_out, sw_axis;
  std::vector<std::string> sw_methods, sw_set;
  std::vector<double> sw_grid;
  std::size_t sw_reps = 0;
  std::uint64_t sw_seed = 0;
  unsigned sw_workers = 0;
  sw->add_option("--config", sw_config, "JSON config, or a CSV whose first line holds the params")->required();
  sw->add_option("--out", sw_out, "Output CSV (default: stdout)");
  sw->add_option("--method", sw_methods, "Methods for every block")->delimiter(',');
  auto* axis_opt = sw->add_option("--axis", sw_axis, "Axis parameter");
  auto* grid_opt = sw->add_option("--grid", sw_grid, "Axis grid")->delimiter(',');
  axis_opt->needs(grid_opt);
  sw->add_option("--set", sw_set, "Fixed parameter for every block, as name=value (repeatable)");
  auto* sw_reps_opt = sw->add_option("--reps", sw_reps, "Simulation replications");
  auto* sw_seed_opt = sw->add_option("--seed", sw_seed, "Root seed");
  auto* sw_workers_opt = sw->add_option("--workers", sw_workers, "Concurrent grid cells");

  auto* plot = app.add_subcommand("plot", "Render an emitted CSV as an SVG line chart");
  std::string plot_in, plot_out;
  plot->add_option("input", plot_in, "CSV file")->required();
  plot->add_option("output", plot_out, "SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (fig->parsed()) {
      FigureOverrides o;
      if (!fig_sigma.empty()) o.sigma = fig_sigma;
      if (!fig_methods.empty()) o.methods = parse_methods(fig_methods);
      if (*reps_opt) o.reps = fig_reps;
      if (*seed_opt) o.seed = fig_seed;
      if (*workers_opt) o.workers = fig_workers;
      const FigureRun run = run_figure(fig_id, o, fig_out);
      return report(run.result, run.path.string());
    }
    if (sw->parsed()) {
      SweepSpec spec = parse_config(read_file(sw_config));
      if (!sw_methods.empty()) {
        const auto ms = parse_methods(sw_methods);
        for (auto& b : spec.blocks) b.methods = ms;
      }
      if (*axis_opt) {
        spec.axis = parse_name<Axis>(sw_axis);
        spec.grid = sw_grid;
      } else if (*grid_opt) {
        spec.grid = sw_grid;
      }
      for (const auto& kv : sw_set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidConfig("--set expects name=value, got '" + kv + "'");
        double v;
        try {
          v = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
          throw InvalidConfig("--set value is not a number: '" + kv + "'");
        }
        for (auto& b : spec.blocks) set_param(b, kv.substr(0, eq), v);
      }
      if (*sw_reps_opt) spec.sim.reps = sw_reps;
      if (*sw_seed_opt) spec.seed = sw_seed;
      if (*sw_workers_opt) spec.workers = sw_workers;
      spec.validate();
      if (!sw_out.empty()) write_file(sw_out, "");
      const SweepResult r = run_sweep(spec);
      if (sw_out.empty()) {
        std::cout << r.csv();
        return r.numerical_failures ? kNumerical : kOk;
      }
      write_file(sw_out, r.csv());
      return report(r, sw_out);
    }
    if (plot->parsed()) {
      render_plot_file(plot_in, plot_out);
      std::fprintf(stderr, "wrote %s\n", plot_out.c_str());
      return kOk;
    }
  } catch (const InvalidConfig& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return kInvalid;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kInvalid;
  } catch (const PlotError& e) {
    std::fprintf(stderr, "plot error: %s\n", e.what());
    return kInvalid;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "invalid parameters: %s\n", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  }
  return kOk;
}
