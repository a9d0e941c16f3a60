// itobench: command-line harness for the iterated time-ordering propagator
// library. Every subcommand runs a deterministic, optionally parallel sweep
// and writes CSV data plus a JSON run manifest.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <itoprop/itoprop.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ito;

namespace {

constexpr const char* kVersion = "0.3.0";

struct RunContext {
  std::string command;
  std::string config_path;
  fs::path out_dir = ".";
  int threads = 1;
  std::uint64_t seed = 1;
  std::string preset = "desk";
  ExperimentConfig cfg;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t_start = std::chrono::steady_clock::now();

  bool paper() const { return preset == "paper"; }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  }

  fs::path out_path(const std::string& name) { return out_dir / name; }

  CsvWriter open_csv(const std::string& name) {
    fs::create_directories(out_dir);
    CsvWriter w((out_dir / name).string());
    w.metadata("command", command);
    w.metadata("version", kVersion);
    w.metadata("config_hash", std::to_string(cfg.hash()));
    w.metadata("seed", seed);
    w.metadata("preset", preset);
    outputs.push_back(name);
    return w;
  }

  void write_resolved_config() {
    fs::create_directories(out_dir);
    const std::string name = command + ".resolved.ini";
    std::ofstream out(out_dir / name);
    out << cfg.canonical_dump();
    outputs.push_back(name);
  }

  void write_manifest() {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["config_hash"] = std::to_string(cfg.hash());
    m["seed"] = seed;
    m["threads"] = threads;
    m["preset"] = preset;
    m["config_file"] = config_path;
    m["outputs"] = outputs;
    m["wall_time_s"] = elapsed();
    std::ofstream out(out_dir / (command + ".manifest.json"));
    out << m.dump(2) << '\n';
  }
};

std::vector<double> list_or(const ExperimentConfig& cfg, const std::string& sec, const std::string& key,
                            std::vector<double> dflt) {
  return cfg.has(sec, key) ? cfg.get_list(sec, key) : dflt;
}

// ---------------------------------------------------------------------------
// ito-bench: driven harmonic oscillator accuracy/cost sweep vs closed form
// ---------------------------------------------------------------------------

DrivenHoModel ho_from_config(const ExperimentConfig& cfg) {
  DrivenHoModel m;
  m.mass = cfg.get_double_or("model", "mass", m.mass);
  m.omega = cfg.get_double_or("model", "omega", m.omega);
  m.e0 = cfg.get_double_or("model", "e0", m.e0);
  m.omega_l = cfg.get_double_or("model", "omega_l", m.omega_l);
  m.t_final = cfg.get_double_or("model", "t_final", m.t_final);
  m.n_ho = int(cfg.get_int_or("model", "n_ho", m.n_ho));
  return m;
}

struct HoBenchCell {
  int n_t = 0, m = 0;
  bool pwc = false;
  double mean_iter = 0.0, error = 0.0, wall = 0.0;
  std::uint64_t matvecs = 0;
};

HoBenchCell run_ho_cell(const DrivenHoModel& model, int n_t, int m_order, bool pwc) {
  HoBenchCell cell;
  cell.n_t = n_t;
  cell.m = m_order;
  cell.pwc = pwc;
  const auto t0 = std::chrono::steady_clock::now();
  const Generator gen = model.generator();
  const HoOperators ops = ho_operators(model.n_ho, model.mass, model.omega);
  PropagateOptions opt;
  opt.method = pwc ? Method::PWC : Method::ITO;
  opt.ito.m_order = m_order;
  const Trajectory tr =
      propagate(gen, 0.0, model.t_final, n_t, opt, model.ground_state(), {{ops.x, 1}, {ops.p, 1}});
  double dev = 0.0;
  for (std::size_t i = 0; i < tr.observable_times.size(); ++i) {
    const auto [x, p] = driven_ho_analytic(model, tr.observable_times[i]);
    dev = std::max(dev, std::abs(tr.observables[0][i].real() - x));
    dev = std::max(dev, std::abs(tr.observables[1][i].real() - p));
  }
  cell.error = dev;
  cell.mean_iter = tr.mean_iterations;
  cell.matvecs = tr.matvecs;
  cell.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

int cmd_ito_bench(RunContext& ctx) {
  const DrivenHoModel model = ho_from_config(ctx.cfg);
  const std::vector<double> nt_list =
      list_or(ctx.cfg, "sweep", "n_t", ctx.paper() ? std::vector<double>{500, 700, 900, 1100, 1300, 1500, 1900, 2100, 3000}
                                                   : std::vector<double>{500, 900, 1500, 2100, 3000});
  const std::vector<double> m_list = list_or(ctx.cfg, "sweep", "m", {8});
  const bool include_pwc = ctx.cfg.get_bool_or("sweep", "include_pwc", false);

  struct Coord {
    int n_t, m;
    bool pwc;
  };
  std::vector<Coord> coords;
  for (double nt : nt_list)
    for (double m : m_list) coords.push_back({int(nt), int(m), false});
  if (include_pwc)
    for (double nt : nt_list) coords.push_back({int(nt), 0, true});

  const auto cells = run_parallel<HoBenchCell>(int(coords.size()), ctx.threads, [&](int i) {
    const Coord& c = coords[std::size_t(i)];
    return run_ho_cell(model, c.n_t, c.m, c.pwc);
  });

  CsvWriter w = ctx.open_csv("ito_bench.csv");
  w.header({"method", "n_t", "m", "mean_n_iter", "matvecs", "error", "wall_time_s"});
  for (const auto& c : cells)
    w.row({c.pwc ? "pwc" : "ito", std::to_string(c.n_t), std::to_string(c.m), CsvWriter::num(c.mean_iter),
           std::to_string(c.matvecs), CsvWriter::num(c.error), CsvWriter::num(c.wall)});
  return 0;
}

// ---------------------------------------------------------------------------
// Qudit construction shared by compare / dynamics / maps / qsl
// ---------------------------------------------------------------------------

QuditModel qudit_from_config(const ExperimentConfig& cfg) {
  QuditModel m;
  m.n_levels = int(cfg.get_int_or("model", "n_levels", m.n_levels));
  m.omega0 = kTwoPi * cfg.get_double_or("model", "omega0_ghz", m.omega0 / kTwoPi);
  m.beta = kTwoPi * cfg.get_double_or("model", "beta_ghz", m.beta / kTwoPi);
  m.t1 = cfg.get_double_or("model", "t1_ns", m.t1);
  m.t2_star = cfg.get_double_or("model", "t2_star_ns", m.t2_star);
  m.omega_rabi = kTwoPi * cfg.get_double_or("model", "omega_rabi_ghz", m.omega_rabi / kTwoPi);
  m.p = cfg.get_double_or("model", "p", m.p);
  m.q = cfg.get_double_or("model", "q", m.q);
  return m;
}

int cmd_compare(RunContext& ctx) {
  QuditModel model = qudit_from_config(ctx.cfg);
  const double t_final = ctx.cfg.get_double_or("run", "t_final", 150.0);
  const int ref_nt = int(ctx.cfg.get_int_or("reference", "n_t", 10000));
  const int ref_m = int(ctx.cfg.get_int_or("reference", "m", 10));
  const bool rwa = ctx.cfg.get_bool_or("run", "rwa", false);
  const std::vector<double> nt_list =
      list_or(ctx.cfg, "sweep", "n_t", {400, 625, 1000, 1250, 2000, 2500, 5000});

  const Generator gen = model.interaction_generator(rwa);
  const QuantumState psi0 = model.basis_state(0);

  PropagateOptions ref_opt;
  ref_opt.ito.m_order = ref_m;
  ref_opt.record_populations = true;
  const Trajectory ref = propagate(gen, 0.0, t_final, ref_nt, ref_opt, psi0);

  struct Row {
    int n_t = 0;
    double mismatch = 0.0, wall = 0.0;
  };
  const auto rows = run_parallel<Row>(int(nt_list.size()), ctx.threads, [&](int i) {
    Row r;
    r.n_t = int(nt_list[std::size_t(i)]);
    if (ref_nt % r.n_t != 0)
      throw std::runtime_error("compare: reference n_t must be a multiple of each sweep n_t");
    const auto t0 = std::chrono::steady_clock::now();
    PropagateOptions opt;
    opt.method = Method::PWC;
    opt.record_populations = true;
    const Trajectory tr = propagate(gen, 0.0, t_final, r.n_t, opt, psi0);
    const int stride = ref_nt / r.n_t;
    std::vector<Eigen::VectorXd> ref_sub;
    for (std::size_t k = 0; k < ref.populations.size(); k += std::size_t(stride))
      ref_sub.push_back(ref.populations[k]);
    r.mismatch = population_mismatch(tr.populations, ref_sub).time_average;
    r.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  });

  CsvWriter w = ctx.open_csv("compare.csv");
  w.metadata("reference_n_t", std::uint64_t(ref_nt));
  w.metadata("reference_m", std::uint64_t(ref_m));
  w.header({"n_t", "time_avg_mismatch", "wall_time_s"});
  for (const auto& r : rows)
    w.row({std::to_string(r.n_t), CsvWriter::num(r.mismatch), CsvWriter::num(r.wall)});
  return 0;
}

int cmd_dynamics(RunContext& ctx) {
  const std::string variant = ctx.cfg.get_or("run", "variant", "qudit_full");
  const double t_final = ctx.cfg.get_double_or("run", "t_final", 150.0);
  const int n_t = int(ctx.cfg.get_int_or("run", "n_t", 3000));
  const int m_order = int(ctx.cfg.get_int_or("run", "m", 8));
  const bool dissipative = ctx.cfg.get_bool_or("run", "dissipative", false);
  const int initial_level = int(ctx.cfg.get_int_or("run", "initial_level", 0));

  QuditModel model = qudit_from_config(ctx.cfg);
  Generator gen;
  QuantumState psi0{Vector(), SpaceTag::Hilbert};
  if (variant == "qudit_full" || variant == "qudit_rwa") {
    const bool rwa = variant == "qudit_rwa";
    if (dissipative) {
      // Dissipation acts in Liouville space on the lab-frame generator.
      gen = model.liouville_generator(model.pythagorean_field(), true);
      psi0 = model.basis_state(initial_level, SpaceTag::Liouville);
      if (rwa) throw std::runtime_error("dynamics: rwa variant is dissipation-free");
    } else {
      gen = model.interaction_generator(rwa);
      psi0 = model.basis_state(initial_level);
    }
  } else if (variant == "qudit_lab") {
    gen = model.hilbert_generator(model.pythagorean_field());
    psi0 = model.basis_state(initial_level);
  } else if (variant == "qudit_ideal") {
    gen = model.ideal_generator();
    psi0 = model.basis_state(initial_level);
  } else {
    throw std::runtime_error("dynamics: unknown variant '" + variant + "'");
  }

  PropagateOptions opt;
  opt.ito.m_order = m_order;
  opt.record_populations = true;
  const Trajectory tr = propagate(gen, 0.0, t_final, n_t, opt, psi0);

  CsvWriter w = ctx.open_csv("dynamics.csv");
  w.metadata("variant", variant);
  std::vector<std::string> header{"t"};
  for (int n = 0; n < model.n_levels; ++n) header.push_back("p" + std::to_string(n));
  w.header(header);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    std::vector<std::string> row{CsvWriter::num(tr.times[i])};
    for (int n = 0; n < model.n_levels; ++n) row.push_back(CsvWriter::num(tr.populations[i](n)));
    w.row(row);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// pop-map / gate-map over the (p, q) drive plane
// ---------------------------------------------------------------------------

struct MapCell {
  double p = 0.0, q = 0.0;
  Eigen::Vector4d pops = Eigen::Vector4d::Zero();
  double leakage = 0.0, entropy = 0.0, concurrence = 0.0;
  Eigen::Vector3d triple = Eigen::Vector3d::Zero();
  std::string cls;
  std::string status = "ok";
};

MapCell run_map_cell(QuditModel model, double p, double q, const std::string& variant, double t_final, int n_t,
                     int m_order, bool want_gate, const EquivalenceCatalog& catalog) {
  MapCell cell;
  cell.p = p;
  cell.q = q;
  try {
    model.p = p;
    model.q = q;
    Generator gen;
    const bool dissipative = variant == "full_dissipative";
    if (variant == "ideal") {
      gen = model.ideal_generator();
    } else if (variant == "full" || dissipative) {
      gen = dissipative ? model.liouville_generator(model.pythagorean_field(), true)
                        : model.interaction_generator(false);
    } else {
      throw std::runtime_error("unknown variant '" + variant + "'");
    }

    PropagateOptions opt;
    opt.ito.m_order = m_order;
    const SpaceTag space = dissipative ? SpaceTag::Liouville : SpaceTag::Hilbert;
    std::vector<Vector> finals(4);
    for (int n = 0; n < 4; ++n) {
      const Trajectory tr = propagate(gen, 0.0, t_final, n_t, opt, model.basis_state(n, space));
      finals[std::size_t(n)] = tr.final_state.amplitudes;
      if (n == 0) {
        const Eigen::VectorXd pops = populations({tr.final_state.amplitudes, space});
        for (int k = 0; k < 4; ++k) cell.pops(k) = pops(k);
        cell.leakage = 1.0 - cell.pops.sum();
        if (space == SpaceTag::Hilbert) {
          Vector sub = tr.final_state.amplitudes.head(4);
          const double nrm = sub.norm();
          if (nrm > 1e-8) cell.entropy = von_neumann_entropy(Vector(sub / nrm));
        }
      }
    }
    if (want_gate) {
      if (space == SpaceTag::Liouville) throw std::runtime_error("gate map requires unitary dynamics");
      std::vector<Vector> sub(4);
      for (int n = 0; n < 4; ++n) sub[std::size_t(n)] = finals[std::size_t(n)].head(4);
      const Matrix u = qudit_gate_to_computational(closest_unitary(extract_gate(sub)));
      const LocalInvariants inv = makhlin_invariants(u);
      cell.triple = inv.vec();
      cell.concurrence = gate_concurrence(u);
      cell.cls = classify(inv, catalog).value_or("");
    }
  } catch (const std::exception& e) {
    cell.status = e.what();
  }
  return cell;
}

int cmd_map(RunContext& ctx, bool gate_map) {
  QuditModel model = qudit_from_config(ctx.cfg);
  const std::string variant = ctx.cfg.get_or("run", "variant", gate_map ? "full" : "ideal");
  const double t_final = ctx.cfg.get_double_or("run", "t_final", 60.0);
  const int n_t = int(ctx.cfg.get_int_or("run", "n_t", ctx.paper() ? 6000 : 3000));
  const int m_order = int(ctx.cfg.get_int_or("run", "m", 8));
  const int n_axis = ctx.paper() ? 21 : 11;
  std::vector<double> axis_default(static_cast<std::size_t>(n_axis));
  for (int i = 0; i < n_axis; ++i) axis_default[std::size_t(i)] = 3.0 * i / (n_axis - 1);
  const std::vector<double> p_list = list_or(ctx.cfg, "sweep", "p", axis_default);
  const std::vector<double> q_list = list_or(ctx.cfg, "sweep", "q", axis_default);

  EquivalenceCatalog catalog;
  if (gate_map) {
    const std::string cat_path = ctx.cfg.get_or("run", "catalog", std::string(ITOPROP_DATA_DIR) + "/gate_classes.json");
    catalog = fs::exists(cat_path) ? load_catalog(cat_path) : builtin_catalog();
  }

  const int n_cells = int(p_list.size() * q_list.size());
  const auto cells = run_parallel<MapCell>(n_cells, ctx.threads, [&](int i) {
    const double p = p_list[std::size_t(i) / q_list.size()];
    const double q = q_list[std::size_t(i) % q_list.size()];
    return run_map_cell(model, p, q, variant, t_final, n_t, m_order, gate_map, catalog);
  });

  CsvWriter w = ctx.open_csv(gate_map ? "gate_map.csv" : "pop_map.csv");
  w.metadata("variant", variant);
  std::vector<std::string> header{"p", "q", "p0", "p1", "p2", "p3", "leakage", "entropy"};
  if (gate_map) {
    header.insert(header.end(), {"concurrence", "g1", "g2", "g3", "class"});
  }
  header.push_back("status");
  w.header(header);
  for (const auto& c : cells) {
    std::vector<std::string> row{CsvWriter::num(c.p),       CsvWriter::num(c.q),       CsvWriter::num(c.pops(0)),
                                 CsvWriter::num(c.pops(1)), CsvWriter::num(c.pops(2)), CsvWriter::num(c.pops(3)),
                                 CsvWriter::num(c.leakage), CsvWriter::num(c.entropy)};
    if (gate_map) {
      row.push_back(CsvWriter::num(c.concurrence));
      for (int k = 0; k < 3; ++k) row.push_back(CsvWriter::num(c.triple(k)));
      row.push_back(c.cls);
    }
    row.push_back(c.status == "ok" ? "ok" : "error: " + c.status);
    w.row(row);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// optimize: Krotov runs on the benchmark problems
// ---------------------------------------------------------------------------

ControlProblem make_ho_freq_problem(const ExperimentConfig& cfg) {
  FreqHoModel model;
  model.n_ho = int(cfg.get_int_or("model", "n_ho", model.n_ho));
  ControlProblem pb;
  pb.t_final = cfg.get_double_or("run", "t_final", 2.0);
  pb.n_steps = int(cfg.get_int_or("run", "n_t", int(std::lround(pb.t_final / 0.01))));
  const double guess = cfg.get_double_or("run", "guess_amplitude", 1.0);
  pb.gen = model.generator([guess](double) { return guess; });
  pb.initial_states = {model.ground_state(1.0).amplitudes};
  pb.functional = StateToState{model.ground_state(0.5).amplitudes};
  return pb;
}

ControlProblem make_qudit_problem(const ExperimentConfig& cfg, bool gate, std::uint64_t seed) {
  QuditModel model = qudit_from_config(cfg);
  ControlProblem pb;
  pb.t_final = cfg.get_double_or("run", "t_final", 50.0);
  pb.n_steps = int(cfg.get_int_or("run", "n_t", int(std::lround(pb.t_final / 0.005))));
  // Guess: the Pythagorean drive at (p, q) = (2, 2) under a trapezoidal
  // envelope with 10% rise and fall.
  model.p = cfg.get_double_or("run", "guess_p", 2.0);
  model.q = cfg.get_double_or("run", "guess_q", 2.0);
  const auto carrier = model.pythagorean_field();
  const double t_final = pb.t_final;
  auto field = [carrier, t_final](double t) {
    const double ramp = 0.1 * t_final;
    double env = 1.0;
    if (t < ramp) env = t / ramp;
    if (t > t_final - ramp) env = std::max(0.0, (t_final - t) / ramp);
    return env * carrier(t);
  };
  pb.gen = model.hilbert_generator(field);
  if (gate) {
    for (int n = 0; n < 4; ++n) pb.initial_states.push_back(model.basis_state(n).amplitudes);
    Matrix target;
    const std::string kind = cfg.get_or("run", "target", "cnot");
    if (kind == "cnot") {
      target = builtin_catalog()[1].gate;
    } else if (kind == "random") {
      target = haar_random(4, seed);
    } else {
      throw std::runtime_error("optimize: unknown gate target '" + kind + "'");
    }
    // `target` lives in the computational two-qubit basis; map it onto the
    // qudit levels and absorb the free phases the lab frame accumulates on
    // levels 0..3 over the gate duration.
    Matrix phases = Matrix::Zero(4, 4);
    for (int n = 0; n < 4; ++n) phases(n, n) = std::exp(-I1 * model.energy(n) * pb.t_final);
    pb.functional = GateTarget{Matrix(phases * to_bell_basis(target))};
  } else {
    pb.initial_states = {model.basis_state(0).amplitudes};
    Vector tgt = Vector::Zero(model.n_levels);
    tgt(int(cfg.get_int_or("run", "target_level", 3))) = 1.0;
    pb.functional = StateToState{tgt};
  }
  return pb;
}

int cmd_optimize(RunContext& ctx) {
  const std::string problem = ctx.cfg.get_or("run", "problem", "ho_freq");
  const std::string method = ctx.cfg.get_or("run", "method", "ito");

  ControlProblem pb;
  if (problem == "ho_freq") {
    pb = make_ho_freq_problem(ctx.cfg);
  } else if (problem == "qudit_state") {
    pb = make_qudit_problem(ctx.cfg, false, ctx.seed);
  } else if (problem == "qudit_cnot") {
    pb = make_qudit_problem(ctx.cfg, true, ctx.seed);
  } else {
    throw std::runtime_error("optimize: unknown problem '" + problem + "'");
  }

  KrotovConfig kcfg;
  kcfg.propagator = (method == "pwc") ? Method::PWC : Method::ITO;
  kcfg.lambda_a = ctx.cfg.get_double_or("optimizer", "lambda_a", 1.0);
  kcfg.max_control_iters = int(ctx.cfg.get_int_or("optimizer", "max_iters", 50));
  kcfg.stop_tol = ctx.cfg.get_double_or("optimizer", "stop_tol", 0.0);
  kcfg.ito.m_order = int(ctx.cfg.get_int_or("optimizer", "m", 5));

  const OptimizeResult res = optimize(pb, kcfg);

  CsvWriter w = ctx.open_csv("optimize.csv");
  w.metadata("problem", problem);
  w.metadata("method", method);
  if (!res.error.empty()) w.metadata("error", res.error);
  w.header({"iter", "j_t", "j_total", "field_change_norm", "matvecs", "wall_time_s"});
  for (const auto& r : res.records)
    w.row({std::to_string(r.i), CsvWriter::num(r.j_t), CsvWriter::num(r.j_total),
           CsvWriter::num(r.field_change_norm), std::to_string(r.matvecs), CsvWriter::num(r.wall_time)});

  // Final control field as (t, eps) CSV.
  CsvWriter f = ctx.open_csv("field.csv");
  f.header({"t", "eps"});
  for (std::size_t n = 0; n < res.field.values.size(); ++n)
    f.row({CsvWriter::num(res.field.t0 + double(n) * res.field.dt), CsvWriter::num(res.field.values[n])});

  if (!res.error.empty()) {
    std::cerr << "optimize: stopped early: " << res.error << " (last good iterate saved)\n";
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// qsl-map: success statistics for random targets over (T, beta)
// ---------------------------------------------------------------------------

int cmd_qsl_map(RunContext& ctx) {
  QuditModel base = qudit_from_config(ctx.cfg);
  const std::vector<double> t_list = list_or(ctx.cfg, "sweep", "t_final", {10, 20, 30, 40, 50});
  const std::vector<double> beta_list = list_or(ctx.cfg, "sweep", "beta_ghz", {base.beta / kTwoPi});
  const int n_random = int(ctx.cfg.get_int_or("run", "n_random", ctx.paper() ? 30 : 5));
  const int max_iters = int(ctx.cfg.get_int_or("optimizer", "max_iters", 100));
  const double success_tol = ctx.cfg.get_double_or("optimizer", "success_tol", 1e-3);
  const double lambda_a = ctx.cfg.get_double_or("optimizer", "lambda_a", 3.0);
  const double dt_target = ctx.cfg.get_double_or("run", "dt", 0.005);

  struct QslCell {
    double t_final = 0.0, beta = 0.0;
    double success_fraction = 0.0, mean_iters = 0.0;
  };
  const int n_cells = int(t_list.size() * beta_list.size());
  const int n_jobs = n_cells * n_random;

  struct Target {
    bool success = false;
    int iters = 0;
  };
  const auto jobs = run_parallel<Target>(n_jobs, ctx.threads, [&](int j) {
    const int cell = j / n_random;
    const int k = j % n_random;
    const double t_final = t_list[std::size_t(cell) / beta_list.size()];
    const double beta = beta_list[std::size_t(cell) % beta_list.size()] * kTwoPi;

    ExperimentConfig cfg = ctx.cfg;
    cfg.set("run", "t_final", CsvWriter::num(t_final));
    cfg.set("run", "n_t", std::to_string(std::max(100, int(std::lround(t_final / dt_target)))));
    cfg.set("run", "target", "random");
    cfg.set("model", "beta_ghz", CsvWriter::num(beta / kTwoPi));
    ControlProblem pb = make_qudit_problem(cfg, true, cell_seed(ctx.seed, std::uint64_t(cell), std::uint64_t(k)));

    KrotovConfig kcfg;
    kcfg.propagator = Method::PWC;
    kcfg.lambda_a = lambda_a;
    kcfg.max_control_iters = max_iters;
    kcfg.stop_tol = success_tol;
    const OptimizeResult res = optimize(pb, kcfg);
    Target t;
    t.success = res.error.empty() && res.final_j_t() < success_tol;
    t.iters = int(res.records.size()) - 1;
    return t;
  });

  CsvWriter w = ctx.open_csv("qsl_map.csv");
  w.metadata("n_random", std::uint64_t(n_random));
  w.header({"t_final", "beta_ghz", "success_fraction", "mean_iters_to_success"});
  for (int cell = 0; cell < n_cells; ++cell) {
    int wins = 0;
    double iter_sum = 0.0;
    for (int k = 0; k < n_random; ++k) {
      const Target& t = jobs[std::size_t(cell * n_random + k)];
      if (t.success) {
        ++wins;
        iter_sum += t.iters;
      }
    }
    const double t_final = t_list[std::size_t(cell) / beta_list.size()];
    const double beta = beta_list[std::size_t(cell) % beta_list.size()];
    w.row({CsvWriter::num(t_final), CsvWriter::num(beta), CsvWriter::num(double(wins) / n_random),
           CsvWriter::num(wins > 0 ? iter_sum / wins : 0.0)});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"itobench: deterministic benchmark sweeps for the itoprop library"};
  app.require_subcommand(1);

  RunContext ctx;
  std::string out_dir = ".";
  app.add_option("--config", ctx.config_path, "Config file (INI-style sections)")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", ctx.threads, "Worker threads for sweeps");
  app.add_option("--seed", ctx.seed, "Master seed");
  app.add_option("--preset", ctx.preset, "Scale preset")->check(CLI::IsMember({"desk", "paper"}));

  for (const char* name : {"ito-bench", "compare", "dynamics", "pop-map", "gate-map", "optimize", "qsl-map"})
    app.add_subcommand(name)->fallthrough();  // global options may follow the subcommand

  CLI11_PARSE(app, argc, argv);

  ctx.out_dir = out_dir;
  ctx.command = app.get_subcommands().front()->get_name();
  try {
    if (!ctx.config_path.empty()) ctx.cfg = ExperimentConfig::parse_file(ctx.config_path);
    // Record the effective global options in the resolved config.
    ctx.cfg.set("cli", "command", ctx.command);
    ctx.cfg.set("cli", "preset", ctx.preset);
    ctx.cfg.set("cli", "seed", std::to_string(ctx.seed));

    int rc = 0;
    if (ctx.command == "ito-bench") rc = cmd_ito_bench(ctx);
    else if (ctx.command == "compare") rc = cmd_compare(ctx);
    else if (ctx.command == "dynamics") rc = cmd_dynamics(ctx);
    else if (ctx.command == "pop-map") rc = cmd_map(ctx, false);
    else if (ctx.command == "gate-map") rc = cmd_map(ctx, true);
    else if (ctx.command == "optimize") rc = cmd_optimize(ctx);
    else if (ctx.command == "qsl-map") rc = cmd_qsl_map(ctx);

    ctx.write_resolved_config();
    ctx.write_manifest();
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "itobench " << ctx.command << ": " << e.what() << '\n';
    return 1;
  }
}
