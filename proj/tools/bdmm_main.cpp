// Command-line front end: simulation, likelihood evaluation, fitting,
// uncertainty quantification, replication studies, ergodicity checks, and
// tracked-particle ingestion.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "bdmm/ellipsoid.hpp"
#include "bdmm/ergodicity.hpp"
#include "bdmm/errors.hpp"
#include "bdmm/fit.hpp"
#include "bdmm/io.hpp"
#include "bdmm/likelihood.hpp"
#include "bdmm/model.hpp"
#include "bdmm/simulate.hpp"
#include "bdmm/study.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bdmm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "name=value,name=value" parameter overrides.
void apply_theta_overrides(ParameterVector& params, const std::string& spec) {
  if (spec.empty()) return;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("bad --theta entry: " + item);
    const std::string name = item.substr(0, eq);
    const double value = std::stod(item.substr(eq + 1));
    params.set(name, value);
  }
  params.validate();
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Configuration parse_x0_json(const json& arr, const ModelSpec& model) {
  std::vector<Particle> ps;
  int id = 0;
  for (const auto& e : arr) {
    Vec loc(static_cast<int>(e.at("loc").size()));
    for (size_t k = 0; k < e.at("loc").size(); ++k) loc[static_cast<int>(k)] = e.at("loc")[k].get<double>();
    const std::string name = e.at("label").get<std::string>();
    int label = -1;
    for (size_t m = 0; m < model.label_names.size(); ++m)
      if (model.label_names[m] == name) label = static_cast<int>(m);
    if (label < 0) throw ConfigError("x0: unknown label " + name);
    ps.emplace_back(id++, loc, label);
  }
  return Configuration(std::move(ps));
}

Configuration resolve_x0(const std::string& arg, const ModelSpec& model) {
  if (arg.empty() || arg == "config") {
    if (!model.x0) {
      if (arg == "config") throw ConfigError("model config has no x0 section");
      return Configuration{};
    }
    return *model.x0;
  }
  if (arg == "empty") return Configuration{};
  std::ifstream in(arg);
  if (!in) throw ConfigError("cannot open x0 file: " + arg);
  json doc;
  in >> doc;
  return parse_x0_json(doc, model);
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)].get<double>();
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << text;
}

struct GridAxis {
  std::string name;
  Vec values;
};

// "name=lo:hi:count"
GridAxis parse_grid_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw UsageError("bad --grid axis: " + spec);
  GridAxis axis;
  axis.name = spec.substr(0, eq);
  std::vector<std::string> nums;
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ':')) nums.push_back(item);
  if (nums.size() != 3) throw UsageError("bad --grid axis (want name=lo:hi:count): " + spec);
  const double lo = std::stod(nums[0]);
  const double hi = std::stod(nums[1]);
  const int count = std::stoi(nums[2]);
  if (count < 1) throw UsageError("grid axis needs at least one point");
  axis.values.resize(count);
  for (int i = 0; i < count; ++i)
    axis.values[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return axis;
}

Table estimates_table(const StudyReport& rep) {
  Table t;
  t.header = {"replicate"};
  for (const auto& n : rep.free_names) t.header.push_back(n);
  t.header.push_back("loglik");
  t.header.push_back("converged");
  t.header.push_back("covered");
  t.header.push_back("error");
  for (const auto& row : rep.rows) {
    std::vector<std::string> cells{std::to_string(row.index)};
    for (int j = 0; j < static_cast<int>(rep.free_names.size()); ++j)
      cells.push_back(row.ok ? Table::num(row.estimate[j]) : "");
    cells.push_back(row.ok ? Table::num(row.loglik) : "");
    cells.push_back(row.converged ? "1" : "0");
    cells.push_back(row.covered ? "1" : "0");
    cells.push_back(row.error);
    t.add_row(std::move(cells));
  }
  return t;
}

Table matrix_table(const Mat& m, const std::vector<std::string>& names) {
  Table t;
  t.header = {"param"};
  for (const auto& n : names) t.header.push_back(n);
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row{names[static_cast<size_t>(i)]};
    for (int j = 0; j < m.cols(); ++j) row.push_back(Table::num(m(i, j)));
    t.add_row(std::move(row));
  }
  return t;
}

int run(int argc, char** argv) {
  CLI::App app{"Birth-death-move processes with mutations: simulation and inference"};
  app.require_subcommand(1);

  std::string model_path, theta_spec, traj_path, out_path, x0_spec;

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "Generate a trajectory and write it as JSON-Lines");
  double sim_horizon = 1.0, sim_dt = 0.0;
  std::uint64_t sim_seed = 0, sim_stream = 0;
  int sim_max_events = 1000000;
  cmd_sim->add_option("--model", model_path, "model configuration document")->required();
  cmd_sim->add_option("--theta", theta_spec, "parameter overrides name=value,...");
  cmd_sim->add_option("--x0", x0_spec, "initial state: 'config', 'empty', or a JSON file");
  cmd_sim->add_option("--horizon", sim_horizon, "time horizon T")->required();
  cmd_sim->add_option("--dt", sim_dt, "sampling grid step (default: horizon/2000)");
  cmd_sim->add_option("--seed", sim_seed, "master seed");
  cmd_sim->add_option("--stream", sim_stream, "substream index (replicate id)");
  cmd_sim->add_option("--max-events", sim_max_events, "safety cap on the number of jumps");
  cmd_sim->add_option("--out", out_path, "output trajectory file")->required();

  // loglik
  auto* cmd_ll = app.add_subcommand("loglik", "Evaluate the log-likelihood of a trajectory");
  cmd_ll->add_option("--model", model_path)->required();
  cmd_ll->add_option("--theta", theta_spec);
  cmd_ll->add_option("--traj", traj_path)->required();

  // fit
  auto* cmd_fit = app.add_subcommand("fit", "Maximum-likelihood fit of selected parameters");
  std::string free_spec, theta0_spec;
  bool fit_use_score = false, fit_trace = false;
  double fit_simplex_tol = 1e-6, fit_loglik_tol = 1e-9;
  int fit_max_evals = 4000;
  cmd_fit->add_option("--model", model_path)->required();
  cmd_fit->add_option("--traj", traj_path)->required();
  cmd_fit->add_option("--free", free_spec, "comma-separated free parameter names")->required();
  cmd_fit->add_option("--theta0", theta0_spec, "starting values name=value,...");
  cmd_fit->add_option("--theta", theta_spec, "fixed-parameter overrides name=value,...");
  cmd_fit->add_option("--out", out_path, "write the fit result as JSON");
  cmd_fit->add_flag("--use-score", fit_use_score, "polish with the analytic score");
  cmd_fit->add_flag("--trace", fit_trace, "record the optimisation trace");
  cmd_fit->add_option("--simplex-tol", fit_simplex_tol);
  cmd_fit->add_option("--loglik-tol", fit_loglik_tol);
  cmd_fit->add_option("--max-evals", fit_max_evals);

  // fisher
  auto* cmd_fisher = app.add_subcommand("fisher", "Observed information matrix at theta");
  cmd_fisher->add_option("--model", model_path)->required();
  cmd_fisher->add_option("--theta", theta_spec);
  cmd_fisher->add_option("--traj", traj_path)->required();
  cmd_fisher->add_option("--out", out_path, "write the matrix as CSV");

  // ellipse
  auto* cmd_ell = app.add_subcommand("ellipse", "Confidence ellipsoid from a fit result");
  std::string fit_path;
  double ell_level = 0.95;
  cmd_ell->add_option("--fit", fit_path, "fit result JSON (from `fit --out`)")->required();
  cmd_ell->add_option("--level", ell_level, "confidence level in (0,1)");
  cmd_ell->add_option("--out", out_path, "boundary polyline CSV (2-d fits)");

  // surface
  auto* cmd_surf = app.add_subcommand("surface", "Log-likelihood scan over a 2-parameter grid");
  std::string grid_spec;
  cmd_surf->add_option("--model", model_path)->required();
  cmd_surf->add_option("--traj", traj_path)->required();
  cmd_surf->add_option("--theta", theta_spec);
  cmd_surf->add_option("--grid", grid_spec, "two axes: name=lo:hi:count,name=lo:hi:count")->required();
  cmd_surf->add_option("--out", out_path, "output CSV")->required();

  // study
  auto* cmd_study = app.add_subcommand("study", "Simulate-and-refit replication study");
  std::string study_config_path, out_dir;
  int study_replicates = 0, study_workers = 0;
  std::uint64_t study_seed = 0;
  bool emit_ellipses = false;
  auto* seed_opt = cmd_study->add_option("--seed", study_seed, "override master seed");
  cmd_study->add_option("--config", study_config_path, "study configuration JSON")->required();
  cmd_study->add_option("--replicates", study_replicates, "override replicate count");
  cmd_study->add_option("--workers", study_workers, "worker threads (default: BDMM_WORKERS or cores)");
  cmd_study->add_option("--out-dir", out_dir, "output directory")->required();
  cmd_study->add_flag("--emit-ellipses", emit_ellipses, "write one ellipse polyline per replicate");

  // check-ergodicity
  auto* cmd_ergo = app.add_subcommand("check-ergodicity",
                                      "Check the geometric-ergodicity rate conditions");
  int ergo_trunc = 10000;
  cmd_ergo->add_option("--model", model_path)->required();
  cmd_ergo->add_option("--theta", theta_spec);
  cmd_ergo->add_option("--n-trunc", ergo_trunc, "series truncation index");

  // ingest
  auto* cmd_ingest = app.add_subcommand("ingest", "Convert tracked-particle CSV to a trajectory");
  std::string csv_path, frame_col = "frame", track_col = "track", label_col = "label",
              coord_cols = "x,y";
  double dt_frame = 0.0;
  bool bridge_gaps = false;
  cmd_ingest->add_option("--csv", csv_path, "input CSV")->required();
  cmd_ingest->add_option("--model", model_path, "model config (domain, label alphabet)")->required();
  cmd_ingest->add_option("--dt-frame", dt_frame, "seconds per frame")->required();
  cmd_ingest->add_option("--out", out_path, "output trajectory file")->required();
  cmd_ingest->add_option("--frame-col", frame_col);
  cmd_ingest->add_option("--track-col", track_col);
  cmd_ingest->add_option("--label-col", label_col);
  cmd_ingest->add_option("--coord-cols", coord_cols, "comma-separated coordinate columns");
  cmd_ingest->add_flag("--bridge-gaps", bridge_gaps, "interpolate across missing frames");

  CLI11_PARSE(app, argc, argv);

  if (cmd_sim->parsed()) {
    ModelSpec model = load_model_file(model_path);
    apply_theta_overrides(model.params, theta_spec);
    SimOptions opts;
    opts.horizon = sim_horizon;
    opts.grid_dt = sim_dt > 0.0 ? sim_dt : sim_horizon / 2000.0;
    opts.seed = sim_seed;
    opts.stream = sim_stream;
    opts.max_events = sim_max_events;
    const Configuration x0 = resolve_x0(x0_spec, model);
    const Trajectory traj = simulate(model, model.params, x0, opts);
    write_trajectory(out_path, traj, model);
    int births = 0, deaths = 0, mutations = 0;
    for (const auto& ev : traj.events) {
      births += ev.kind == JumpKind::birth;
      deaths += ev.kind == JumpKind::death;
      mutations += ev.kind == JumpKind::mutation;
    }
    std::cout << "simulated [0, " << opts.horizon << "] with grid_dt " << opts.grid_dt << ": "
              << births << " births, " << deaths << " deaths, " << mutations
              << " mutations; final n = " << configuration_at(traj, traj.horizon).size() << "\n"
              << "wrote " << out_path << "\n";
    return kExitOk;
  }

  if (cmd_ll->parsed()) {
    ModelSpec model = load_model_file(model_path);
    apply_theta_overrides(model.params, theta_spec);
    const Trajectory traj = read_trajectory(traj_path);
    const LogLikBreakdown b = loglik_total(traj, model, model.params);
    std::cout << "birth:    " << b.birth << "\n"
              << "death:    " << b.death << "\n"
              << "mutation: " << b.mutation << "\n"
              << "move:     " << b.move << "\n"
              << "total:    " << b.total << "\n";
    if (!b.diagnostic.empty()) std::cout << "note: " << b.diagnostic << "\n";
    return kExitOk;
  }

  if (cmd_fit->parsed()) {
    ModelSpec model = load_model_file(model_path);
    apply_theta_overrides(model.params, theta_spec);
    ParameterVector theta0 = model.params;
    apply_theta_overrides(theta0, theta0_spec);
    const Trajectory traj = read_trajectory(traj_path);
    FitOptions opts;
    opts.use_score = fit_use_score;
    opts.keep_trace = fit_trace;
    opts.simplex_tol = fit_simplex_tol;
    opts.loglik_tol = fit_loglik_tol;
    opts.max_evals = fit_max_evals;
    const auto free_names = split_csv_list(free_spec);
    const FitResult fit = fit_mle(traj, model, free_names, theta0, opts);

    std::cout << "log-likelihood " << fit.loglik << " after " << fit.n_evals << " evaluations"
              << (fit.converged ? "" : " (NOT converged)") << "\n";
    for (size_t j = 0; j < free_names.size(); ++j) {
      std::cout << "  " << free_names[j] << " = " << fit.theta_hat.get(free_names[j]);
      if (fit.covariance_ok)
        std::cout << "  (se " << std::sqrt(fit.covariance(static_cast<int>(j), static_cast<int>(j)))
                  << ")";
      std::cout << "\n";
    }
    if (!fit.covariance_ok)
      std::cout << "warning: information matrix singular; covariance omitted\n";

    if (!out_path.empty()) {
      json doc;
      doc["free"] = fit.free_names;
      json th;
      for (int i = 0; i < fit.theta_hat.size(); ++i) th[fit.theta_hat.name(i)] = fit.theta_hat[i];
      doc["theta_hat"] = std::move(th);
      doc["loglik"] = fit.loglik;
      doc["converged"] = fit.converged;
      doc["n_evals"] = fit.n_evals;
      doc["info"] = matrix_to_json(fit.info);
      if (fit.covariance_ok) doc["covariance"] = matrix_to_json(fit.covariance);
      if (fit_trace) {
        json tr = json::array();
        for (const auto& [x, v] : fit.trace) {
          json row;
          row["value"] = v;
          json xs = json::array();
          for (int i = 0; i < x.size(); ++i) xs.push_back(x[i]);
          row["u"] = std::move(xs);
          tr.push_back(std::move(row));
        }
        doc["trace"] = std::move(tr);
      }
      write_text(out_path, doc.dump(2) + "\n");
      std::cout << "wrote " << out_path << "\n";
    }
    if (!fit.converged || !fit.covariance_ok) return kExitNumeric;
    return kExitOk;
  }

  if (cmd_fisher->parsed()) {
    ModelSpec model = load_model_file(model_path);
    apply_theta_overrides(model.params, theta_spec);
    const Trajectory traj = read_trajectory(traj_path);
    const InformationMatrix info = observed_information(traj, model, model.params);
    std::cout << "observed information over [0, " << info.horizon << "]:\n";
    for (int i = 0; i < info.matrix.rows(); ++i) {
      std::cout << "  " << model.params.name(i) << ":";
      for (int j = 0; j < info.matrix.cols(); ++j) std::cout << " " << info.matrix(i, j);
      std::cout << "\n";
    }
    if (!out_path.empty()) {
      export_csv(matrix_table(info.matrix, model.params.names()), out_path);
      std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
  }

  if (cmd_ell->parsed()) {
    std::ifstream in(fit_path);
    if (!in) throw ConfigError("cannot open fit result: " + fit_path);
    json doc;
    in >> doc;
    FitResult fit;
    fit.free_names = doc.at("free").get<std::vector<std::string>>();
    for (const auto& name : fit.free_names)
      fit.theta_hat.add(name, doc.at("theta_hat").at(name).get<double>());
    if (!doc.contains("covariance"))
      throw NumericError("fit result has no covariance; cannot build an ellipsoid");
    fit.covariance = matrix_from_json(doc.at("covariance"));
    fit.info = matrix_from_json(doc.at("info"));
    fit.covariance_ok = true;
    const Ellipsoid e = confidence_ellipsoid(fit, ell_level);
    std::cout << "level " << ell_level << " ellipsoid: radius^2 = " << e.radius2 << ", center =";
    for (int i = 0; i < e.center.size(); ++i) std::cout << " " << e.center[i];
    std::cout << "\n";
    if (!out_path.empty()) {
      if (e.center.size() != 2)
        throw UsageError("--out polyline requires a 2-parameter fit");
      const Mat poly = ellipse_polyline(e, 361);
      Table t;
      t.header = fit.free_names;
      for (int i = 0; i < poly.rows(); ++i)
        t.add_row({Table::num(poly(i, 0)), Table::num(poly(i, 1))});
      export_csv(t, out_path);
      std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
  }

  if (cmd_surf->parsed()) {
    ModelSpec model = load_model_file(model_path);
    apply_theta_overrides(model.params, theta_spec);
    const Trajectory traj = read_trajectory(traj_path);
    const auto axes = split_csv_list(grid_spec);
    if (axes.size() != 2) throw UsageError("--grid needs exactly two axes");
    const GridAxis a1 = parse_grid_axis(axes[0]);
    const GridAxis a2 = parse_grid_axis(axes[1]);
    const Mat grid = loglik_surface(traj, model, model.params, a1.name, a1.values, a2.name,
                                    a2.values);
    Table t;
    t.header = {a1.name, a2.name, "loglik"};
    for (int i = 0; i < grid.rows(); ++i)
      t.add_row({Table::num(grid(i, 0)), Table::num(grid(i, 1)), Table::num(grid(i, 2))});
    export_csv(t, out_path);
    std::cout << "wrote " << grid.rows() << " grid rows to " << out_path << "\n";
    return kExitOk;
  }

  if (cmd_study->parsed()) {
    std::ifstream in(study_config_path);
    if (!in) throw ConfigError("cannot open study config: " + study_config_path);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw ConfigError(std::string("study config: ") + e.what());
    }

    StudyConfig cfg;
    if (doc.at("model").is_string()) {
      fs::path p = doc["model"].get<std::string>();
      if (p.is_relative()) p = fs::path(study_config_path).parent_path() / p;
      cfg.model = load_model_file(p.string());
    } else {
      cfg.model = load_model(doc["model"].dump());
    }
    cfg.truth = cfg.model.params;
    const json truth_doc = doc.value("truth", json::object());
    for (const auto& [k, v] : truth_doc.items()) cfg.truth.set(k, v.get<double>());
    cfg.theta0 = cfg.truth;
    const json theta0_doc = doc.value("theta0", json::object());
    for (const auto& [k, v] : theta0_doc.items()) cfg.theta0.set(k, v.get<double>());
    cfg.free_params = doc.at("free").get<std::vector<std::string>>();
    if (doc.contains("x0") && doc["x0"].is_array())
      cfg.x0 = parse_x0_json(doc["x0"], cfg.model);
    else
      cfg.x0 = resolve_x0(doc.value("x0", std::string("config")), cfg.model);
    cfg.sim.horizon = doc.at("horizon").get<double>();
    cfg.sim.grid_dt = doc.value("dt", cfg.sim.horizon / 2000.0);
    cfg.sim.seed = doc.value("seed", 0ull);
    cfg.replicates = doc.value("replicates", 100);
    cfg.level = doc.value("level", 0.95);
    cfg.workers = doc.value("workers", 0);
    if (doc.contains("fit")) {
      const json& f = doc["fit"];
      cfg.fit.simplex_tol = f.value("simplex_tol", cfg.fit.simplex_tol);
      cfg.fit.loglik_tol = f.value("loglik_tol", cfg.fit.loglik_tol);
      cfg.fit.max_evals = f.value("max_evals", cfg.fit.max_evals);
      cfg.fit.lik.birth_bracket_stride =
          f.value("birth_bracket_stride", cfg.fit.lik.birth_bracket_stride);
    }
    if (study_replicates > 0) cfg.replicates = study_replicates;
    if (seed_opt->count() > 0) cfg.sim.seed = study_seed;
    if (study_workers > 0) cfg.workers = study_workers;

    const StudyReport rep = replicate_study(cfg);

    fs::create_directories(out_dir);
    export_csv(estimates_table(rep), (fs::path(out_dir) / "estimates.csv").string());
    export_csv(matrix_table(rep.mean_covariance, rep.free_names),
               (fs::path(out_dir) / "mean_covariance.csv").string());

    std::ostringstream cov;
    cov << "replicates:         " << cfg.replicates << "\n"
        << "successful fits:    " << rep.n_ok << "\n"
        << "failures:           " << rep.n_failed << (rep.valid ? "" : "  (RUN INVALID: >10%)")
        << "\n"
        << "coverage at level " << cfg.level << ": " << rep.coverage << "\n"
        << "mean estimate:      ";
    for (int j = 0; j < rep.mean_estimate.size(); ++j)
      cov << rep.free_names[static_cast<size_t>(j)] << " = " << rep.mean_estimate[j] << "  ";
    cov << "\nsd of estimates:    ";
    for (int j = 0; j < rep.sd_estimate.size(); ++j)
      cov << rep.free_names[static_cast<size_t>(j)] << " = " << rep.sd_estimate[j] << "  ";
    cov << "\n";
    write_text((fs::path(out_dir) / "coverage.txt").string(), cov.str());
    std::cout << cov.str() << "wrote " << out_dir << "\n";

    if (emit_ellipses) {
      fs::create_directories(fs::path(out_dir) / "ellipses");
      for (const auto& row : rep.rows) {
        if (!row.ok || row.covariance.rows() != 2) continue;
        Ellipsoid e;
        e.center = row.estimate;
        e.shape = row.covariance;
        e.radius2 = chi_square_quantile(2, cfg.level);
        const Mat poly = ellipse_polyline(e, 361);
        Table t;
        t.header = rep.free_names;
        for (int i = 0; i < poly.rows(); ++i)
          t.add_row({Table::num(poly(i, 0)), Table::num(poly(i, 1))});
        export_csv(t, (fs::path(out_dir) / "ellipses" /
                       ("replicate_" + std::to_string(row.index) + ".csv"))
                          .string());
      }
    }
    if (!rep.valid) return kExitNumeric;
    return kExitOk;
  }

  if (cmd_ergo->parsed()) {
    ModelSpec model = load_model_file(model_path);
    apply_theta_overrides(model.params, theta_spec);
    const RateSequences seq =
        rate_sequences_from(model.beta, model.delta, model.params, ergo_trunc);
    const ErgodicityReport rep = check_ergodicity(seq);
    std::cout << rep.render();
    return kExitOk;
  }

  if (cmd_ingest->parsed()) {
    const ModelSpec model = load_model_file(model_path);
    IngestOptions opts;
    opts.dt_frame = dt_frame;
    opts.domain = model.domain;
    opts.frame_col = frame_col;
    opts.track_col = track_col;
    opts.label_col = label_col;
    opts.coord_cols = split_csv_list(coord_cols);
    opts.label_names = model.label_names;
    opts.bridge_gaps = bridge_gaps;
    const Trajectory traj = ingest_tracks_csv(csv_path, opts);
    write_trajectory(out_path, traj, model);
    std::cout << "ingested " << traj.tracks.size() << " tracks, " << traj.events.size()
              << " events over [0, " << traj.horizon << "]\n"
              << "wrote " << out_path << "\n";
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const TruncatedTrajectory& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
