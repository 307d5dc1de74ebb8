// Command-line front end: experiment groups, one-off trajectory runs, and
// report generation.  Every run writes CSV data plus JSON result/manifest
// files under the output directory; the exit code is zero only when every
// registered check passes.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcflab/exact.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/grid.hpp"
#include "mcflab/harness.hpp"
#include "mcflab/io.hpp"
#include "mcflab/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mcflab;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 2026;
  int jobs = 0;  // 0 = one thread per experiment, capped by the hardware
  std::map<std::string, std::string> overrides;
};

Config load_config(const GlobalOpts& g) {
  Config cfg;
  if (!g.config_path.empty()) cfg = Config::parse_file(g.config_path);
  for (const auto& [k, v] : g.overrides) cfg.set(k, v);
  return cfg;
}

int effective_jobs(const GlobalOpts& g, std::size_t n_ids) {
  if (g.jobs > 0) return g.jobs;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(std::min<std::size_t>(hw, n_ids));
}

int run_group(const GlobalOpts& g, const std::vector<std::string>& ids) {
  const Config cfg = load_config(g);
  const auto results =
      run_suite(ids, cfg, g.out_dir, g.seed, effective_jobs(g, ids.size()));
  std::cout << format_report_text(results);
  for (const auto& r : results) {
    if (!r.pass) return 1;
  }
  return 0;
}

std::string grid_help() {
  return "grid as lo:hi:count, e.g. -10:10:200";
}

std::vector<double> parse_grid(const std::string& text) {
  double lo = 0, hi = 0;
  long count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' ||
      count < 2) {
    throw std::invalid_argument("bad grid spec '" + text + "'; " + grid_help());
  }
  return uniform_grid(lo, hi, static_cast<std::size_t>(count));
}

void write_trajectory(const fs::path& dir, const FlowTrajectory& tr,
                      const GlobalOpts& g, const std::string& command,
                      const char* time_col, const char* space_col,
                      const char* value_col) {
  fs::create_directories(dir);
  CsvTable snap;
  snap.kind = "trajectory-snapshots";
  snap.columns = {time_col, space_col, value_col};
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    for (std::size_t j = 0; j < tr.grid.size(); ++j) {
      snap.add_row({tr.times[i], tr.grid[j], tr.states[i][j]});
    }
  }
  write_csv(dir / "snapshots.csv", snap);

  RunManifest m;
  m.command = command;
  m.seed = g.seed;
  m.config = load_config(g).entries();
  m.outputs.push_back({"snapshots.csv", sha256_file(dir / "snapshots.csv")});
  m.extra["steps"] = std::to_string(tr.steps);
  m.extra["max_residual"] = std::to_string(tr.max_residual);
  m.extra["max_newton_iters"] = std::to_string(tr.max_newton_iters);
  if (tr.halt) {
    m.extra["halt_t"] = std::to_string(tr.halt->t);
    m.extra["halt_node"] = std::to_string(tr.halt->node);
  }
  // named run.json: manifest.json is reserved for experiment directories,
  // where a result file must sit next to it
  atomic_write(dir / "run.json", m.to_json());
  std::cout << "wrote " << (dir / "snapshots.csv").string() << " ("
            << tr.times.size() << " snapshots, " << tr.steps << " steps)\n";
}

// One-off trajectory described on the command line.
struct DirectRun {
  std::string gauge;  // radial | graph | rescaled
  std::string init = "cylinder";
  std::string bc = "follow";  // follow | pinned
  int n = 3;
  double t0 = -4.0;
  double t1 = -1.0;
  double dt = 1e-3;
  std::string grid = "-10:10:201";
  std::string out_name = "flow-run";
};

int run_direct(const GlobalOpts& g, const DirectRun& d) {
  const Dimension dim(d.n);
  const auto grid = parse_grid(d.grid);
  SolverControl ctrl;
  ctrl.dt = d.dt;
  const std::size_t steps =
      static_cast<std::size_t>((d.t1 - d.t0) / d.dt + 0.5);
  ctrl.snapshot_every = std::max<std::size_t>(1, steps / 40);
  const fs::path dir = fs::path(g.out_dir) / d.out_name;
  const std::string command = "flow --gauge " + d.gauge + " --init " + d.init;

  if (d.gauge == "radial") {
    if (d.init != "cylinder") {
      throw std::invalid_argument("radial runs start from --init cylinder");
    }
    RadialProfile p0;
    p0.dim = dim;
    p0.t = d.t0;
    p0.z = grid;
    p0.r.assign(grid.size(), cylinder_radius(dim, d.t0));
    BoundaryPair bc;
    if (d.bc == "follow") {
      auto ref = [dim](double t) { return cylinder_radius(dim, t); };
      bc.left = BoundaryCondition::following(ref);
      bc.right = BoundaryCondition::following(ref);
    } else {
      bc.left = BoundaryCondition::pinned(p0.r.front());
      bc.right = BoundaryCondition::pinned(p0.r.back());
    }
    const auto tr = evolve_radial(p0, d.t0, d.t1, bc, ctrl);
    write_trajectory(dir, tr, g, command, "t", "z", "r");
    return 0;
  }
  if (d.gauge == "graph") {
    GraphProfile p0;
    p0.dim = dim;
    p0.t = d.t0;
    p0.r = grid;
    p0.f.resize(grid.size());
    BoundaryPair bc;
    bc.left = BoundaryCondition::axis();
    if (d.init == "sphere") {
      auto height = [dim](double r, double t) {
        const double R = sphere_radius(dim, 1.0, t);
        return -std::sqrt(R * R - r * r);
      };
      if (grid.front() != 0.0 ||
          grid.back() >= sphere_radius(dim, 1.0, d.t0)) {
        throw std::invalid_argument(
            "sphere init needs a grid [0, r_hi] with r_hi inside the sphere");
      }
      for (std::size_t i = 0; i < grid.size(); ++i) {
        p0.f[i] = height(grid[i], d.t0);
      }
      const double edge = grid.back();
      bc.right = d.bc == "follow"
                     ? BoundaryCondition::following(
                           [height, edge](double t) { return height(edge, t); })
                     : BoundaryCondition::pinned(p0.f.back());
    } else if (d.init == "bowl") {
      const auto bowl = solve_bowl(dim, 1.0, grid.back() + 5.0);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        p0.f[i] = bowl.height(grid[i]);
      }
      const double edge = p0.f.back();
      bc.right = d.bc == "follow"
                     ? BoundaryCondition::following(
                           [edge](double t) { return edge + t; })
                     : BoundaryCondition::pinned(edge);
    } else {
      throw std::invalid_argument("graph runs start from sphere or bowl");
    }
    const auto tr = evolve_graph(p0, d.t0, d.t1, bc, ctrl);
    write_trajectory(dir, tr, g, command, "t", "r", "f");
    return 0;
  }
  throw std::invalid_argument("direct runs use --gauge radial or graph");
}

void print_eigentable(int n) {
  const Dimension dim(n);
  std::cout << "eigenvalues of the rescaled-cylinder stability operator, n = "
            << n << "\n";
  std::cout << "  l  d  multiplicity  eigenvalue\n";
  for (int l = 0; l <= 6; ++l) {
    for (int d = 0; d <= 3; ++d) {
      std::printf("  %d  %d  %12d  %+.10f\n", l, d, harmonic_multiplicity(dim, d),
                  eigenvalue(dim, l, d));
    }
  }
}

int project_trajectory(const GlobalOpts& g, const std::string& path) {
  const CsvTable in = read_csv(path);
  if (in.columns.size() != 3) {
    throw std::invalid_argument(
        "trajectory file must have three columns: tau,z,rho");
  }
  // Rows arrive grouped by time, z ascending within a group.
  std::vector<double> taus;
  std::vector<std::vector<double>> zs, us;
  for (const auto& row : in.rows) {
    if (taus.empty() || row[0] != taus.back()) {
      taus.push_back(row[0]);
      zs.emplace_back();
      us.emplace_back();
    }
    zs.back().push_back(row[1]);
    us.back().push_back(row[2] - 2.0);
  }
  CsvTable out;
  out.kind = "mode-norms";
  out.columns = {"tau", "u_plus", "u_zero", "u_minus"};
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const auto parts = split_profile_norms(zs[i], us[i]);
    out.add_row({taus[i], parts[0], parts[1], parts[2]});
  }
  const fs::path dir = fs::path(g.out_dir) / "spectrum";
  fs::create_directories(dir);
  write_csv(dir / "mode_norms.csv", out);
  std::cout << "wrote " << (dir / "mode_norms.csv").string() << " ("
            << taus.size() << " times)\n";
  return 0;
}

void emit_bowl_profile(const GlobalOpts& g, int n, double c, double r_max) {
  const auto bowl = solve_bowl(Dimension(n), c, r_max);
  const fs::path dir = fs::path(g.out_dir) / "soliton";
  fs::create_directories(dir);
  CsvTable table;
  table.kind = "bowl-profile";
  table.columns = {"r", "f", "f_r"};
  for (std::size_t i = 0; i < bowl.profile.r.size(); ++i) {
    table.add_row({bowl.profile.r[i], bowl.profile.f[i],
                   bowl.slope(bowl.profile.r[i])});
  }
  write_csv(dir / "bowl_profile.csv", table);
  ordered_json meta;
  meta["family"] = "translating-bowl";
  meta["n"] = n;
  meta["c"] = c;
  meta["r_max"] = r_max;
  meta["tip_second_derivative"] = bowl.tip_second_derivative;
  meta["slope_ratio_at_rmax"] = bowl.slope_ratio_at_rmax;
  meta["max_ode_residual"] = bowl.max_ode_residual;
  atomic_write(dir / "bowl.json", meta.dump(2) + "\n");
  std::cout << "wrote " << (dir / "bowl_profile.csv").string() << "\n";
}

void emit_shrinker_profile(const GlobalOpts& g, int n, double a) {
  const auto s = solve_shrinker(Dimension(n), a);
  const fs::path dir = fs::path(g.out_dir) / "shrinker";
  fs::create_directories(dir);
  CsvTable table;
  table.kind = "shrinker-profile";
  table.columns = {"y", "u", "phi"};
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    table.add_row({s.y[i], s.u[i], s.phi[i]});
  }
  write_csv(dir / "shrinker_profile.csv", table);
  ordered_json meta;
  meta["family"] = "ancient-ovaloid-profile";
  meta["n"] = n;
  meta["a"] = a;
  meta["u_at_origin"] = s.u_at_origin;
  meta["slope_at_origin"] = s.slope_at_origin;
  meta["tip_curvature"] = s.tip_curvature;
  meta["max_ode_residual"] = s.max_ode_residual;
  meta["concave"] = s.concave;
  atomic_write(dir / "shrinker.json", meta.dump(2) + "\n");
  std::cout << "wrote " << (dir / "shrinker_profile.csv").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mcflab: a numerical laboratory for rotationally symmetric mean "
      "curvature flow"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--out-dir", g.out_dir, "output directory (default: out)");
  app.add_option("--seed", g.seed, "base seed for all random draws");
  app.add_option("--jobs", g.jobs, "concurrent experiments (0 = auto)");

  // soliton
  auto* soliton = app.add_subcommand(
      "soliton", "translating bowl: profile tables and flow experiments");
  int sol_n = 3;
  double sol_c = 1.0, sol_rmax = 120.0;
  bool sol_profile_only = false;
  soliton->add_option("--n", sol_n, "surface dimension");
  soliton->add_option("--c", sol_c, "translation speed");
  soliton->add_option("--r-max", sol_rmax, "profile extent");
  soliton->add_flag("--profile-only", sol_profile_only,
                    "emit the profile without running experiments");

  // shrinker
  auto* shrinker = app.add_subcommand(
      "shrinker", "ancient ovaloid profile: tables and barrier experiments");
  int shr_n = 3;
  double shr_a = 10.0;
  bool shr_profile_only = false;
  shrinker->add_option("--n", shr_n, "surface dimension");
  shrinker->add_option("--a", shr_a, "profile parameter");
  shrinker->add_flag("--profile-only", shr_profile_only,
                     "emit the profile without running experiments");

  // flow
  auto* flow = app.add_subcommand(
      "flow", "unrescaled solver experiments, or a one-off run via --gauge");
  DirectRun direct;
  flow->add_option("--gauge", direct.gauge,
                   "run one trajectory instead of the experiments: radial | "
                   "graph");
  flow->add_option("--init", direct.init, "cylinder | sphere | bowl");
  flow->add_option("--bc", direct.bc, "follow | pinned");
  flow->add_option("--grid", direct.grid, grid_help());
  flow->add_option("--n", direct.n, "surface dimension");
  flow->add_option("--t0", direct.t0, "start time");
  flow->add_option("--t1", direct.t1, "end time");
  flow->add_option("--dt", direct.dt, "time step");
  flow->add_option("--out", direct.out_name, "run directory name");

  // rescaled
  auto* rescaled = app.add_subcommand(
      "rescaled", "rescaled-cylinder experiments: decay and Gaussian area");
  double rs_tau = -1.0, rs_dt = -1.0, rs_amp = -1.0;
  long rs_nodes = -1;
  bool rs_snapshots = false;
  rescaled->add_option("--tau-end", rs_tau, "rescaled-time horizon");
  rescaled->add_option("--dt", rs_dt, "time step");
  rescaled->add_option("--nodes", rs_nodes, "grid nodes on [-12, 12]");
  rescaled->add_option("--amplitude", rs_amp, "perturbation sup amplitude");
  rescaled->add_flag("--snapshots", rs_snapshots,
                     "also write snapshots.csv (tau,z,rho)");

  // spectrum
  auto* spectrum = app.add_subcommand(
      "spectrum", "stability spectrum: eigentable, gaps, projections");
  int sp_n = 3;
  std::string sp_traj;
  bool sp_table_only = false;
  spectrum->add_option("--n", sp_n, "surface dimension for the printed table");
  spectrum->add_option("--trajectory", sp_traj,
                       "project a (tau,z,rho) snapshot file onto the "
                       "unstable/neutral/stable split");
  spectrum->add_flag("--table-only", sp_table_only,
                     "print the eigentable and exit");

  // neck
  auto* neck = app.add_subcommand(
      "neck", "tilted-neck certification and improvement experiments");
  std::string neck_mode = "certify";
  double neck_L = -1.0, neck_eps = -1.0;
  neck->add_option("--mode", neck_mode, "certify | improve | sweep-L")
      ->check(CLI::IsMember({"certify", "improve", "sweep-L"}));
  neck->add_option("--L", neck_L, "slab length for the improvement runs");
  neck->add_option("--eps", neck_eps, "input envelope amplitude");

  // sweep + report
  auto* sweep = app.add_subcommand(
      "sweep", "run every experiment and write the combined report");
  auto* report = app.add_subcommand(
      "report", "summarize recorded results under --out-dir");

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough();  // accept the global flags after the subcommand too
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (soliton->parsed()) {
      emit_bowl_profile(g, sol_n, sol_c, sol_rmax);
      if (sol_profile_only) return 0;
      return run_group(g, {"bowl-translation", "rrz-asymptotics"});
    }
    if (shrinker->parsed()) {
      emit_shrinker_profile(g, shr_n, shr_a);
      if (shr_profile_only) return 0;
      return run_group(g, {"shrinker-bounds"});
    }
    if (flow->parsed()) {
      if (!direct.gauge.empty()) return run_direct(g, direct);
      return run_group(g, {"exact-oracles", "vanishing-time", "harnack-signs"});
    }
    if (rescaled->parsed()) {
      if (rs_tau > 0) g.overrides["rescaled-decay.tau-end"] = std::to_string(rs_tau);
      if (rs_dt > 0) g.overrides["rescaled-decay.dt"] = std::to_string(rs_dt);
      if (rs_nodes > 0) g.overrides["rescaled-decay.nodes"] = std::to_string(rs_nodes);
      if (rs_amp > 0) g.overrides["rescaled-decay.amplitude"] = std::to_string(rs_amp);
      if (rs_snapshots) g.overrides["rescaled-decay.snapshots"] = "true";
      return run_group(g, {"rescaled-decay", "gaussian-area"});
    }
    if (spectrum->parsed()) {
      print_eigentable(sp_n);
      if (sp_table_only) return 0;
      if (!sp_traj.empty()) return project_trajectory(g, sp_traj);
      return run_group(g, {"spectral-table"});
    }
    if (neck->parsed()) {
      if (neck_L > 0) g.overrides["neck-improvement.L"] = std::to_string(neck_L);
      if (neck_eps > 0) g.overrides["neck-improvement.eps"] = std::to_string(neck_eps);
      if (neck_mode == "certify") return run_group(g, {"neck-certify"});
      if (neck_mode == "improve") {
        if (!g.overrides.count("neck-improvement.sweep-seeds")) {
          g.overrides["neck-improvement.sweep-seeds"] = "0";
        }
        return run_group(g, {"neck-mode-law", "neck-improvement"});
      }
      return run_group(g, {"neck-improvement"});  // sweep-L
    }
    if (sweep->parsed()) {
      const Config cfg = load_config(g);
      const auto& ids = experiment_ids();
      auto results =
          run_suite(ids, cfg, g.out_dir, g.seed, effective_jobs(g, ids.size()));
      results = emit_report(g.out_dir);
      std::cout << format_report_text(results);
      for (const auto& r : results) {
        if (!r.pass) return 1;
      }
      return 0;
    }
    if (report->parsed()) {
      const auto results = emit_report(g.out_dir);
      std::cout << format_report_text(results);
      for (const auto& r : results) {
        if (!r.pass) return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "mcflab: " << e.what() << "\n";
    return 2;
  }
  return 2;  // unreachable: a subcommand is required
}
