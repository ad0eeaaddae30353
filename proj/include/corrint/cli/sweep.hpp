#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "corrint/analytic.hpp"
#include "corrint/cli/csv.hpp"
#include "corrint/errors.hpp"
#include "corrint/numint.hpp"
#include "corrint/sim.hpp"

namespace corrint::cli {

using json = nlohmann::ordered_json;

struct InvalidConfig : Error {
  using Error::Error;
};

enum class Quantity { spatial, temporal };
enum class Axis { delta, sigma, d_cor, v_max, tau, lambda };
enum class Method { analytic_full, analytic_simplified, analytic_bound, numint, sim };

namespace detail {

template <class E>
struct Names {
  static const std::vector<std::pair<E, const char*>>& table();
};

template <>
inline const std::vector<std::pair<Quantity, const char*>>& Names<Quantity>::table() {
  static const std::vector<std::pair<Quantity, const char*>> t{{Quantity::spatial, "spatial"},
                                                               {Quantity::temporal, "temporal"}};
  return t;
}
template <>
inline const std::vector<std::pair<Axis, const char*>>& Names<Axis>::table() {
  static const std::vector<std::pair<Axis, const char*>> t{{Axis::delta, "delta"},   {Axis::sigma, "sigma"},
                                                           {Axis::d_cor, "d_cor"},   {Axis::v_max, "v_max"},
                                                           {Axis::tau, "tau"},       {Axis::lambda, "lambda"}};
  return t;
}
template <>
inline const std::vector<std::pair<Method, const char*>>& Names<Method>::table() {
  static const std::vector<std::pair<Method, const char*>> t{{Method::analytic_full, "analytic_full"},
                                                             {Method::analytic_simplified, "analytic_simplified"},
                                                             {Method::analytic_bound, "analytic_bound"},
                                                             {Method::numint, "numint"},
                                                             {Method::sim, "sim"}};
  return t;
}

}  // namespace detail

template <class E>
const char* name_of(E e) {
  for (const auto& [v, s] : detail::Names<E>::table())
    if (v == e) return s;
  return "?";
}

template <class E>
E parse_name(const std::string& s) {
  for (const auto& [v, name] : detail::Names<E>::table())
    if (s == name) return v;
  throw InvalidConfig("unknown name '" + s + "'");
}

inline bool stochastic(Method m) { return m == Method::numint || m == Method::sim; }

/// One family of columns sharing a quantity and fixed parameters. The
/// optional curve parameter splits the family into one column per value.
struct Block {
  std::string label;
  Quantity quantity = Quantity::spatial;
  NetworkParams net;
  ShadowingParams shadowing;
  double delta = 0.01;
  std::string mobility = "cim";  // static | cim | rw | bm
  double v_max = 0.05;           // radius of the CIM / RW displacement ball
  double sigma_v2 = 0.0025;
  int tau = 1;
  bool printed_slope_factor = false;
  bool allow_out_of_validity = false;
  std::string curve;
  std::vector<double> curve_values;
  std::vector<Method> methods;
};

struct NumintSettings {
  double target_rel_se = 0.01;
  std::size_t min_samples = 100'000;
  std::size_t max_samples = 4'000'000;
  std::size_t batch_size = 20'000;
};

struct SimSettings {
  std::size_t reps = 200;
  /// Zero selects default_window per parameter set.
  double half_width = 0.0;
  bool share_mac = false;
};

struct SweepSpec {
  std::string name;
  std::vector<std::string> notes;
  Axis axis = Axis::delta;
  std::vector<double> grid;
  std::vector<Block> blocks;
  std::uint64_t seed = 20240601;
  NumintSettings numint;
  SimSettings sim;
  unsigned workers = 1;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Parameter plumbing

inline const std::vector<std::string>& settable_params() {
  static const std::vector<std::string> names{"delta", "sigma", "d_cor", "v_max", "tau", "sigma_v2",
                                              "lambda", "p", "alpha", "eps0", "n"};
  return names;
}

inline void set_param(Block& b, const std::string& name, double v) {
  auto as_int = [&](const char* what) {
    if (v != std::floor(v)) throw InvalidConfig(std::string(what) + " must be an integer");
    return static_cast<int>(v);
  };
  if (name == "delta") b.delta = v;
  else if (name == "sigma") b.shadowing.sigma = v;
  else if (name == "d_cor") b.shadowing.d_cor = v;
  else if (name == "v_max") b.v_max = v;
  else if (name == "tau") b.tau = as_int("tau");
  else if (name == "sigma_v2") b.sigma_v2 = v;
  else if (name == "lambda") b.net.lambda = v;
  else if (name == "p") b.net.p = v;
  else if (name == "alpha") b.net.alpha = v;
  else if (name == "eps0") b.net.eps0 = v;
  else if (name == "n") b.net.n = as_int("n");
  else throw InvalidConfig("unknown parameter '" + name + "'");
}

/// Whether varying the named parameter changes the block's quantity.
inline bool param_relevant(const Block& b, const std::string& name) {
  if (name == "delta") return b.quantity == Quantity::spatial;
  if (name == "tau") return b.quantity == Quantity::temporal && b.mobility != "static";
  if (name == "v_max") return b.quantity == Quantity::temporal && (b.mobility == "cim" || b.mobility == "rw");
  if (name == "sigma_v2") return b.quantity == Quantity::temporal && b.mobility == "bm";
  return true;
}

inline MobilityModel make_mobility(const Block& b) {
  if (b.mobility == "static") return mobility::Static{};
  if (b.mobility == "cim") return mobility::CIM{b.v_max};
  if (b.mobility == "rw") return mobility::RW{b.v_max};
  if (b.mobility == "bm") return mobility::BM{b.sigma_v2};
  throw InvalidConfig("unknown mobility '" + b.mobility + "'");
}

inline TemporalQuery make_temporal_query(const Block& b) {
  TemporalQuery q;
  q.tau = b.tau;
  q.mobility = make_mobility(b);
  q.printed_slope_factor = b.printed_slope_factor;
  return q;
}

inline void check_sorted_nonempty(const std::vector<double>& v, const std::string& what) {
  if (v.empty()) throw InvalidConfig(what + " is empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw InvalidConfig(what + " must be strictly increasing");
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidConfig(what + " has a non-finite entry");
  }
}

inline void SweepSpec::validate() const {
  check_sorted_nonempty(grid, "grid");
  if (blocks.empty()) throw InvalidConfig("no blocks");
  if (sim.reps < 2) throw InvalidConfig("sim.reps must be at least 2");
  if (numint.batch_size == 0 || numint.max_samples < numint.batch_size) {
    throw InvalidConfig("numint.max_samples must be at least numint.batch_size > 0");
  }
  if (!(numint.target_rel_se > 0)) throw InvalidConfig("numint.target_rel_se must be positive");
  if (workers == 0) throw InvalidConfig("workers must be positive");
  if (!(sim.half_width >= 0)) throw InvalidConfig("sim.half_width must be nonnegative");
  std::vector<std::string> labels;
  for (const auto& b : blocks) {
    if (b.methods.empty()) throw InvalidConfig("block '" + b.label + "' has no methods");
    if (std::find(labels.begin(), labels.end(), b.label) != labels.end()) {
      throw InvalidConfig("duplicate block label '" + b.label + "'");
    }
    labels.push_back(b.label);
    if (b.label.find_first_of(",\n[]/") != std::string::npos) throw InvalidConfig("bad block label");
    if (!b.curve.empty()) {
      if (std::find(settable_params().begin(), settable_params().end(), b.curve) == settable_params().end()) {
        throw InvalidConfig("unknown curve parameter '" + b.curve + "'");
      }
      if (b.curve == name_of(axis)) throw InvalidConfig("curve parameter equals the axis");
      check_sorted_nonempty(b.curve_values, "curve values");
    } else if (!b.curve_values.empty()) {
      throw InvalidConfig("curve values given without a curve parameter");
    }
    make_mobility(b);
    if (!(b.tau >= 1)) throw InvalidConfig("tau must be at least 1");
    if (b.net.n != 1 && b.net.n != 2) throw InvalidConfig("n must be 1 or 2");
  }
  if (axis == Axis::tau) {
    for (double x : grid)
      if (x != std::floor(x) || x < 1) throw InvalidConfig("tau grid must hold positive integers");
  }
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const Block& b) {
  json j;
  j["label"] = b.label;
  j["quantity"] = name_of(b.quantity);
  j["n"] = b.net.n;
  j["lambda"] = b.net.lambda;
  j["p"] = b.net.p;
  j["alpha"] = b.net.alpha;
  j["eps0"] = b.net.eps0;
  j["sigma"] = b.shadowing.sigma;
  j["d_cor"] = b.shadowing.d_cor;
  j["delta"] = b.delta;
  j["mobility"] = b.mobility;
  j["v_max"] = b.v_max;
  j["sigma_v2"] = b.sigma_v2;
  j["tau"] = b.tau;
  j["printed_slope_factor"] = b.printed_slope_factor;
  j["allow_out_of_validity"] = b.allow_out_of_validity;
  j["curve"] = b.curve;
  j["curve_values"] = b.curve_values;
  json ms = json::array();
  for (auto m : b.methods) ms.push_back(name_of(m));
  j["methods"] = ms;
  return j;
}

inline json to_json(const SweepSpec& s) {
  json j;
  j["name"] = s.name;
  j["notes"] = s.notes;
  j["axis"] = name_of(s.axis);
  j["grid"] = s.grid;
  j["seed"] = s.seed;
  j["workers"] = s.workers;
  j["numint"] = {{"target_rel_se", s.numint.target_rel_se},
                 {"min_samples", s.numint.min_samples},
                 {"max_samples", s.numint.max_samples},
                 {"batch_size", s.numint.batch_size}};
  j["sim"] = {{"reps", s.sim.reps}, {"half_width", s.sim.half_width}, {"share_mac", s.sim.share_mac}};
  json bs = json::array();
  for (const auto& b : s.blocks) bs.push_back(to_json(b));
  j["blocks"] = bs;
  return j;
}

namespace detail {

inline const std::vector<std::string>& block_keys() {
  static const std::vector<std::string> k{"label", "quantity", "n", "lambda", "p", "alpha", "eps0",
                                          "sigma", "d_cor", "delta", "mobility", "v_max", "sigma_v2",
                                          "tau", "printed_slope_factor", "allow_out_of_validity",
                                          "curve", "curve_values", "methods"};
  return k;
}

inline std::vector<Method> parse_methods(const json& j) {
  std::vector<Method> out;
  for (const auto& m : j) out.push_back(parse_name<Method>(m.get<std::string>()));
  return out;
}

inline void read_block(const json& j, Block& b) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "label") b.label = v.get<std::string>();
    else if (k == "quantity") b.quantity = parse_name<Quantity>(v.get<std::string>());
    else if (k == "mobility") b.mobility = v.get<std::string>();
    else if (k == "printed_slope_factor") b.printed_slope_factor = v.get<bool>();
    else if (k == "allow_out_of_validity") b.allow_out_of_validity = v.get<bool>();
    else if (k == "curve") b.curve = v.get<std::string>();
    else if (k == "curve_values") b.curve_values = v.get<std::vector<double>>();
    else if (k == "methods") b.methods = parse_methods(v);
    else set_param(b, k, v.get<double>());
  }
}

}  // namespace detail

/// Accepts either the canonical form with a "blocks" array or a single-block
/// form where block fields sit at the top level. Unknown keys are rejected.
inline SweepSpec from_json(const json& j) {
  if (!j.is_object()) throw InvalidConfig("config must be a JSON object");
  try {
    SweepSpec s;
    Block top;
    bool has_top_fields = false;
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "name") s.name = v.get<std::string>();
      else if (k == "notes") s.notes = v.get<std::vector<std::string>>();
      else if (k == "axis") s.axis = parse_name<Axis>(v.get<std::string>());
      else if (k == "grid") s.grid = v.get<std::vector<double>>();
      else if (k == "seed") s.seed = v.get<std::uint64_t>();
      else if (k == "workers") s.workers = v.get<unsigned>();
      else if (k == "numint") {
        for (auto nt = v.begin(); nt != v.end(); ++nt) {
          if (nt.key() == "target_rel_se") s.numint.target_rel_se = nt.value().get<double>();
          else if (nt.key() == "min_samples") s.numint.min_samples = nt.value().get<std::size_t>();
          else if (nt.key() == "max_samples") s.numint.max_samples = nt.value().get<std::size_t>();
          else if (nt.key() == "batch_size") s.numint.batch_size = nt.value().get<std::size_t>();
          else throw InvalidConfig("unknown numint key '" + nt.key() + "'");
        }
      } else if (k == "sim") {
        for (auto st = v.begin(); st != v.end(); ++st) {
          if (st.key() == "reps") s.sim.reps = st.value().get<std::size_t>();
          else if (st.key() == "half_width") s.sim.half_width = st.value().get<double>();
          else if (st.key() == "share_mac") s.sim.share_mac = st.value().get<bool>();
          else throw InvalidConfig("unknown sim key '" + st.key() + "'");
        }
      } else if (k == "blocks") {
        for (const auto& bj : v) {
          Block b;
          detail::read_block(bj, b);
          s.blocks.push_back(b);
        }
      } else if (std::find(detail::block_keys().begin(), detail::block_keys().end(), k) !=
                 detail::block_keys().end()) {
        has_top_fields = true;
      } else {
        throw InvalidConfig("unknown key '" + k + "'");
      }
    }
    if (has_top_fields) {
      if (!s.blocks.empty()) throw InvalidConfig("block fields given both at top level and in 'blocks'");
      json tj = json::object();
      for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& bk = detail::block_keys();
        if (std::find(bk.begin(), bk.end(), it.key()) != bk.end()) tj[it.key()] = it.value();
      }
      detail::read_block(tj, top);
      s.blocks.push_back(top);
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }
}

/// Reads a JSON config, or the embedded header of a previously emitted CSV.
inline SweepSpec parse_config(const std::string& text) {
  std::string body = text;
  if (text.rfind(kParamsPrefix, 0) == 0) {
    const auto eol = text.find('\n');
    body = text.substr(std::string(kParamsPrefix).size(),
                       eol == std::string::npos ? std::string::npos : eol - std::string(kParamsPrefix).size());
  }
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------
// Evaluation

struct CellError {
  std::string kind;
  bool numerical = false;
};

inline CellError classify(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ToleranceFailure&) {
    return {"tolerance", true};
  } catch (const QuadratureFailure&) {
    return {"quadrature", true};
  } catch (const SingularKernel&) {
    return {"singular_kernel", true};
  } catch (const NonFiniteSample&) {
    return {"non_finite", true};
  } catch (const MatrixTooLarge&) {
    return {"guard", false};
  } catch (const OutOfValidity&) {
    return {"out_of_validity", false};
  } catch (const DerivativeUndefined&) {
    return {"derivative_undefined", false};
  } catch (const DegenerateSample&) {
    return {"degenerate", false};
  } catch (const InvalidConfig&) {
    return {"invalid_param", false};
  } catch (const PreconditionError&) {
    return {"precondition", false};
  } catch (const DomainError&) {
    return {"domain", false};
  } catch (...) {
    return {"internal", true};
  }
}

struct Cell {
  bool ok = false;
  double value = 0.0;
  double se = 0.0;
  CellError error;
};

struct SweepResult {
  Table table;
  std::size_t numerical_failures = 0;
  std::size_t invalid_cells = 0;
  std::string csv() const { return write_csv(table); }
};

namespace detail {

/// Runs tasks on up to `workers` threads; each task owns its output slot.
inline void run_tasks(const std::vector<std::function<void()>>& tasks, unsigned workers) {
  if (workers <= 1 || tasks.size() <= 1) {
    for (const auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) tasks[i]();
  };
  std::vector<std::future<void>> fs;
  for (unsigned w = 0; w < std::min<std::size_t>(workers, tasks.size()); ++w) {
    fs.push_back(std::async(std::launch::async, worker));
  }
  for (auto& f : fs) f.get();
}

inline std::string curve_suffix(const Block& b, std::size_t k) {
  if (b.curve.empty()) return "";
  return "[" + b.curve + "=" + format_number(b.curve_values[k]) + "]";
}

inline std::size_t n_curves(const Block& b) { return b.curve.empty() ? 1 : b.curve_values.size(); }

inline Block resolve(const Block& b, Axis axis, double x, std::size_t k) {
  Block c = b;
  set_param(c, name_of(axis), x);
  if (!b.curve.empty()) set_param(c, b.curve, b.curve_values[k]);
  return c;
}

inline std::string sim_group_key(const Block& c, double half_width) {
  std::string k = std::to_string(c.net.n) + "|" + format_number(c.net.lambda) + "|" + format_number(c.net.p) +
                  "|" + format_number(c.net.alpha) + "|" + format_number(c.net.eps0) + "|" +
                  format_number(c.shadowing.d_cor) + "|" + format_number(half_width);
  if (c.quantity == Quantity::temporal) {
    k += "|" + c.mobility + "|" + std::to_string(c.tau) + "|" + format_number(c.v_max) + "|" +
         format_number(c.sigma_v2) + "|" + format_number(c.delta);
  }
  return k;
}

inline Window sim_window(const Block& c, const SimSettings& s) {
  if (s.half_width > 0) {
    Window w;
    w.half_width = s.half_width;
    return w;
  }
  return default_window(c.net, c.shadowing);
}

}  // namespace detail

inline IntegralBudget cell_budget(const SweepSpec& s, std::uint64_t seed) {
  IntegralBudget b;
  b.n_samples = s.numint.max_samples;
  b.batch_size = s.numint.batch_size;
  b.min_samples = s.numint.min_samples;
  b.target_rel_se = s.numint.target_rel_se;
  b.seed = seed;
  return b;
}

inline Cell evaluate_deterministic(const Block& c, Method m) {
  Cell out;
  if (c.quantity == Quantity::spatial) {
    const Variant v = m == Method::analytic_full ? Variant::full
                      : m == Method::analytic_simplified ? Variant::simplified
                                                         : Variant::upper_bound;
    out.value = spatial_corr_asym(c.net, c.shadowing, {c.delta, c.allow_out_of_validity}, v).value;
  } else {
    if (m == Method::analytic_bound) throw PreconditionError("no bound variant for the temporal coefficient");
    const Variant v = m == Method::analytic_full ? Variant::full : Variant::simplified;
    out.value = temporal_corr_asym(c.net, c.shadowing, make_temporal_query(c), v).value;
  }
  out.ok = true;
  return out;
}

inline Cell evaluate_numint(const Block& c, const IntegralBudget& budget) {
  const Estimate e = c.quantity == Quantity::spatial
                         ? spatial_corr_num(c.net, c.shadowing, c.delta, budget)
                         : temporal_corr_num(c.net, c.shadowing, make_temporal_query(c), budget);
  return {true, e.mean, e.std_err, {}};
}

/// Evaluates every (method, grid point, curve) cell. Failures become error
/// markers in the affected cells; the rest of the sweep still runs.
inline SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t G = spec.grid.size();
  // cells[b][method index][grid][curve]
  std::vector<std::vector<std::vector<std::vector<Cell>>>> cells(spec.blocks.size());
  std::vector<std::function<void()>> tasks;

  for (std::size_t bi = 0; bi < spec.blocks.size(); ++bi) {
    const Block& b = spec.blocks[bi];
    const std::size_t K = detail::n_curves(b);
    const std::uint64_t block_seed = derive_seed(spec.seed, bi);
    cells[bi].assign(b.methods.size(), std::vector<std::vector<Cell>>(G, std::vector<Cell>(K)));
    const bool axis_ok = param_relevant(b, name_of(spec.axis));
    const bool curve_ok = b.curve.empty() || param_relevant(b, b.curve);

    for (std::size_t mi = 0; mi < b.methods.size(); ++mi) {
      const Method m = b.methods[mi];
      auto& slots = cells[bi][mi];
      if (!axis_ok || !curve_ok) {
        for (auto& row : slots)
          for (auto& cell : row) cell.error = {"invalid_axis", false};
        continue;
      }
      if (m == Method::sim) {
        // Group cells that can share replications: spatial over (sigma, delta),
        // temporal over sigma.
        struct Group {
          Block proto;
          Window w;
          std::vector<std::pair<std::size_t, std::size_t>> members;
          std::vector<SpatialPoint> points;
          std::vector<double> sigmas;
        };
        std::vector<Group> groups;
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < G; ++i) {
          for (std::size_t k = 0; k < K; ++k) {
            try {
              const Block c = detail::resolve(b, spec.axis, spec.grid[i], k);
              c.net.validate();
              c.shadowing.validate();
              const Window w = detail::sim_window(c, spec.sim);
              const std::string key = detail::sim_group_key(c, w.half_width);
              auto [it, fresh] = index.emplace(key, groups.size());
              if (fresh) groups.push_back({c, w, {}, {}, {}});
              Group& g = groups[it->second];
              g.members.emplace_back(i, k);
              g.points.push_back({c.shadowing.sigma, c.delta});
              g.sigmas.push_back(c.shadowing.sigma);
            } catch (...) {
              slots[i][k].error = classify(std::current_exception());
            }
          }
        }
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
          tasks.push_back([&spec, &slots, g = groups[gi], seed = derive_seed(block_seed, 0x5100ull + gi)] {
            try {
              std::vector<Estimate> est;
              if (g.proto.quantity == Quantity::spatial) {
                est = estimate_spatial_corr_grid(g.proto.net, g.proto.shadowing.d_cor, g.points, g.w, spec.sim.reps,
                                                 seed);
              } else {
                est = estimate_temporal_corr_sigmas(g.proto.net, g.proto.shadowing.d_cor, g.sigmas,
                                                    make_temporal_query(g.proto), g.w, spec.sim.reps, seed,
                                                    SimOptions{spec.sim.share_mac});
              }
              for (std::size_t j = 0; j < g.members.size(); ++j) {
                auto [i, k] = g.members[j];
                slots[i][k] = {true, est[j].mean, est[j].std_err, {}};
              }
            } catch (...) {
              const CellError e = classify(std::current_exception());
              for (auto [i, k] : g.members) slots[i][k] = {false, 0.0, 0.0, e};
            }
          });
        }
        continue;
      }
      for (std::size_t i = 0; i < G; ++i) {
        for (std::size_t k = 0; k < K; ++k) {
          Cell* slot = &slots[i][k];
          const std::uint64_t seed = derive_seed(block_seed, i * K + k);
          tasks.push_back([&spec, &b, slot, m, i, k, seed] {
            try {
              const Block c = detail::resolve(b, spec.axis, spec.grid[i], k);
              *slot = m == Method::numint ? evaluate_numint(c, cell_budget(spec, seed)) : evaluate_deterministic(c, m);
            } catch (...) {
              *slot = {false, 0.0, 0.0, classify(std::current_exception())};
            }
          });
        }
      }
    }
  }
  detail::run_tasks(tasks, spec.workers);

  SweepResult res;
  res.table.params_json = to_json(spec).dump();
  res.table.columns.push_back(name_of(spec.axis));
  for (const auto& b : spec.blocks) {
    const std::string prefix = b.label.empty() ? "" : b.label + "/";
    for (Method m : b.methods) {
      for (std::size_t k = 0; k < detail::n_curves(b); ++k) {
        res.table.columns.push_back(prefix + name_of(m) + detail::curve_suffix(b, k));
        if (stochastic(m)) res.table.columns.push_back(prefix + name_of(m) + "_se" + detail::curve_suffix(b, k));
      }
    }
  }
  for (std::size_t i = 0; i < G; ++i) {
    std::vector<std::string> row{format_number(spec.grid[i])};
    for (std::size_t bi = 0; bi < spec.blocks.size(); ++bi) {
      const Block& b = spec.blocks[bi];
      for (std::size_t mi = 0; mi < b.methods.size(); ++mi) {
        for (std::size_t k = 0; k < detail::n_curves(b); ++k) {
          const Cell& c = cells[bi][mi][i][k];
          if (c.ok) {
            row.push_back(format_number(c.value));
          } else {
            row.push_back(error_marker(c.error.kind));
            (c.error.numerical ? res.numerical_failures : res.invalid_cells)++;
          }
          if (stochastic(b.methods[mi])) row.push_back(c.ok ? format_number(c.se) : error_marker(c.error.kind));
        }
      }
    }
    res.table.rows.push_back(std::move(row));
  }
  return res;
}

/// Column index by exact name, or throws.
inline std::size_t column_index(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return i;
  throw Error("no column '" + name + "'");
}

/// Numeric column (nullopt at error markers).
inline std::vector<std::optional<double>> column(const Table& t, const std::string& name) {
  const std::size_t c = column_index(t, name);
  std::vector<std::optional<double>> out;
  for (const auto& r : t.rows) out.push_back(cell_value(r[c]));
  return out;
}

}  // namespace corrint::cli
