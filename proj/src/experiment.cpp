#include "platoon/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "platoon/matrix_io.hpp"
#include "platoon/svg_plot.hpp"

namespace platoon {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

VehicleParams case1_nominal_av() { return {0.2, 1.0, 2.2, 0.35, 150.0, 1500.0}; }

}  // namespace

ExperimentConfig ExperimentConfig::case1_defaults() {
  ExperimentConfig c;
  c.platoon.vehicles.assign(4, case1_nominal_av());
  c.platoon.h_star = 20.0;
  c.platoon.v_star = 20.0;
  c.platoon.t_s = 0.05;
  c.initial = {{65, 20, 0}, {40, 15, 0}, {25, 18, 0}, {0, 15, 0}};
  c.T = 500;
  c.profile.file = "data/us06_drive_cycle.csv";
  c.synthesis.max_subplatoon = 2;
  c.synthesis.solve_monolithic = true;
  c.outdir = "out/case1";
  return c;
}

ExperimentConfig ExperimentConfig::case2_defaults() {
  ExperimentConfig c;
  HvParams hv{0.2, 0.4, 0.7, 5.0, 50.0, 40.0};
  c.platoon.vehicles = {case1_nominal_av(), hv, case1_nominal_av()};
  c.platoon.h_star = 20.0;
  c.platoon.v_star = 20.0;
  c.platoon.t_s = 0.05;
  c.initial = {{45, 20, 0}, {20, 15, 0}, {0, 20, 0}};
  c.T = 500;
  c.profile.file = "data/us06_drive_cycle.csv";
  c.synthesis.max_subplatoon = 3;  // one program covers the whole platoon
  c.synthesis.solve_monolithic = false;
  c.outdir = "out/case2";
  return c;
}

void ExperimentConfig::validate() const {
  try {
    platoon.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (static_cast<int>(initial.size()) != platoon.size())
    throw ConfigError("config: one initial state per vehicle required");
  if (T < 1) throw ConfigError("config: T must be at least 1");
  if (perturbation < 0.0 || perturbation >= 1.0)
    throw ConfigError("config: perturbation fraction must be in [0, 1)");
  if (!profile.file.empty() && !fs::exists(profile.file))
    throw ConfigError("config: profile file does not exist: " + profile.file);
  if (profile.interp != "linear" && profile.interp != "zoh")
    throw ConfigError("config: profile.interp must be 'linear' or 'zoh'");
  if (synthesis.norm != "spectral" && synthesis.norm != "frobenius")
    throw ConfigError("config: synthesis.norm must be 'spectral' or 'frobenius'");
  if (synthesis.max_subplatoon < 1) throw ConfigError("config: max_subplatoon must be >= 1");
}

namespace {

VehicleModel vehicle_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "av") {
    VehicleParams p{j.at("tau").get<double>(), j.at("sigma").get<double>(),
                    j.at("M").get<double>(),   j.at("c").get<double>(),
                    j.at("d").get<double>(),   j.at("m").get<double>()};
    return p;
  }
  if (type == "hv") {
    HvParams p{j.at("alpha").get<double>(), j.at("beta").get<double>(),
               j.at("tau").get<double>(),   j.at("h_s").get<double>(),
               j.at("h_g").get<double>(),   j.at("v_max").get<double>()};
    return p;
  }
  throw ConfigError("config: vehicle type must be 'av' or 'hv'");
}

}  // namespace

ExperimentConfig load_config(const std::string& path, ExperimentConfig c) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  c.seed = j.value("seed", c.seed);
  c.T = j.value("T", c.T);
  c.outdir = j.value("outdir", c.outdir);
  c.perturbation = j.value("perturbation", c.perturbation);
  c.perturb_hvs = j.value("perturb_hvs", c.perturb_hvs);
  c.eval_window_start = j.value("eval_window_start", c.eval_window_start);
  if (j.contains("platoon")) {
    const auto& jp = j["platoon"];
    c.platoon.h_star = jp.value("h_star", c.platoon.h_star);
    c.platoon.v_star = jp.value("v_star", c.platoon.v_star);
    c.platoon.t_s = jp.value("t_s", c.platoon.t_s);
    if (jp.contains("vehicles")) {
      c.platoon.vehicles.clear();
      for (const auto& jv : jp["vehicles"]) c.platoon.vehicles.push_back(vehicle_from_json(jv));
    }
  }
  if (j.contains("initial")) {
    c.initial.clear();
    for (const auto& ji : j["initial"])
      c.initial.push_back({ji.at(0).get<double>(), ji.at(1).get<double>(),
                           ji.at(2).get<double>()});
  }
  if (j.contains("acc")) {
    c.acc.k_p = j["acc"].value("k_p", c.acc.k_p);
    c.acc.k_v = j["acc"].value("k_v", c.acc.k_v);
  }
  if (j.contains("dither")) {
    c.dither.enabled = j["dither"].value("enabled", c.dither.enabled);
    c.dither.amplitude = j["dither"].value("amplitude", c.dither.amplitude);
  }
  if (j.contains("profile")) {
    const auto& jp = j["profile"];
    c.profile.file = jp.value("file", c.profile.file);
    c.profile.hold_duration = jp.value("hold_duration", c.profile.hold_duration);
    c.profile.hold_speed = jp.value("hold_speed", c.profile.hold_speed);
    c.profile.speed_scale = jp.value("speed_scale", c.profile.speed_scale);
    c.profile.constant_duration = jp.value("constant_duration", c.profile.constant_duration);
    c.profile.interp = jp.value("interp", c.profile.interp);
  }
  if (j.contains("synthesis")) {
    const auto& js = j["synthesis"];
    auto& s = c.synthesis;
    s.eps1 = js.value("eps1", s.eps1);
    s.eps2 = js.value("eps2", s.eps2);
    s.lambda1 = js.value("lambda1", s.lambda1);
    s.lambda2 = js.value("lambda2", s.lambda2);
    s.norm = js.value("norm", s.norm);
    s.grid_search = js.value("grid_search", s.grid_search);
    s.max_subplatoon = js.value("max_subplatoon", s.max_subplatoon);
    s.solve_monolithic = js.value("solve_monolithic", s.solve_monolithic);
    s.delta_override = js.value("delta_override", s.delta_override);
    s.subplatoon_delta_inflation =
        js.value("subplatoon_delta_inflation", s.subplatoon_delta_inflation);
    s.margin = js.value("margin", s.margin);
  }
  return c;
}

PlatoonSpec draw_true_spec(const ExperimentConfig& config) {
  Rng rng = Rng(config.seed).fork(1);
  PlatoonSpec truth = config.platoon;
  const double f = config.perturbation;
  for (auto& v : truth.vehicles) {
    if (is_av(v)) {
      auto& p = std::get<VehicleParams>(v);
      p.tau *= 1.0 + rng.uniform(-f, f);
      p.sigma *= 1.0 + rng.uniform(-f, f);
      p.M *= 1.0 + rng.uniform(-f, f);
      p.c *= 1.0 + rng.uniform(-f, f);
      p.d *= 1.0 + rng.uniform(-f, f);
      p.m *= 1.0 + rng.uniform(-f, f);
    } else if (config.perturb_hvs) {
      auto& p = std::get<HvParams>(v);
      p.alpha *= 1.0 + rng.uniform(-f, f);
      p.beta *= 1.0 + rng.uniform(-f, f);
      p.tau *= 1.0 + rng.uniform(-f, f);
    }
  }
  return truth;
}

ReferenceProfile build_profile(const ExperimentConfig& config) {
  const auto mode = config.profile.interp == "zoh" ? ReferenceProfile::Interp::Zoh
                                                   : ReferenceProfile::Interp::Linear;
  if (config.profile.file.empty()) {
    const double total = config.profile.hold_duration + config.profile.constant_duration;
    return ReferenceProfile::constant(config.profile.hold_speed, total);
  }
  const ReferenceProfile cycle =
      load_drive_cycle(config.profile.file, config.profile.speed_scale, mode);
  return cycle.with_hold(config.profile.hold_speed, config.profile.hold_duration);
}

double resolve_delta(const ExperimentConfig& config, const PlatoonSpec& sub_spec,
                     bool leading) {
  double delta;
  if (config.synthesis.delta_override >= 0.0) {
    delta = config.synthesis.delta_override;
  } else {
    const ParamBox box = ParamBox::relative(
        sub_spec, config.perturbation, config.perturb_hvs ? config.perturbation : 0.0);
    delta = disturbance_bound(box, sub_spec).delta;
  }
  if (!leading) delta *= config.synthesis.subplatoon_delta_inflation;
  return delta;
}

SynthesisArtifacts synthesize_pipeline(const ExperimentConfig& config,
                                       const DataBatch& batch) {
  SynthesisArtifacts art;
  const PlatoonSpec& nominal = config.platoon;
  art.partition = split_subplatoons(nominal, config.synthesis.max_subplatoon);

  SynthesisOptions opts;
  opts.grid_search = config.synthesis.grid_search;

  const auto make_problem = [&](const PlatoonSpec& spec, const DataBatch& b,
                                double delta) {
    const LiftedSystem sys = discretize(assemble_polynomial_system(spec), spec.t_s);
    SynthesisProblem p = SynthesisProblem::from_batch(b, sys, delta);
    p.eps1 = config.synthesis.eps1;
    p.eps2 = config.synthesis.eps2;
    p.lambda1 = config.synthesis.lambda1;
    p.lambda2 = config.synthesis.lambda2;
    p.norm = config.synthesis.norm == "frobenius" ? G2Norm::Frobenius : G2Norm::Spectral;
    p.margin = config.synthesis.margin;
    return p;
  };

  if (config.synthesis.solve_monolithic && art.partition.size() > 1) {
    const double delta = resolve_delta(config, nominal, true);
    art.monolithic = solve_sdp(make_problem(nominal, batch, delta), opts);
  }

  art.feasible = true;
  int av_before = 0;
  for (const auto& sub : art.partition) {
    const DataBatch sub_batch = slice_batch(batch, nominal, sub);
    const double delta = resolve_delta(config, sub.spec, sub.begin == 0);
    SynthesisResult r = solve_sdp(make_problem(sub.spec, sub_batch, delta), opts);
    art.feasible = art.feasible && r.feasible();
    art.splits.push_back(std::move(r));
  }

  art.bundle.t_s = nominal.t_s;
  art.bundle.n_vehicles = nominal.size();
  art.bundle.n_av = nominal.av_count();
  for (size_t s = 0; s < art.partition.size(); ++s) {
    const SubPlatoon& sub = art.partition[s];
    SubGain g;
    g.begin = sub.begin;
    g.end = sub.end;
    g.K = art.splits[s].K;
    g.layout = make_layout(sub.spec);
    for (int j = 0; j < g.layout.n_u; ++j) g.u_slots.push_back(av_before + j);
    av_before += g.layout.n_u;
    art.bundle.subs.push_back(std::move(g));
  }
  return art;
}

void write_combined_metrics_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, MetricsReport>>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "controller,metric,index,value\n";
  char buf[192];
  for (const auto& [label, m] : reports) {
    const auto row = [&](const char* name, int idx, double v) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.17g\n", label.c_str(), name, idx, v);
      out << buf;
    };
    for (size_t i = 0; i < m.rms_velocity_dev.size(); ++i)
      row("rms_velocity_dev", static_cast<int>(i + 1), m.rms_velocity_dev[i]);
    for (size_t i = 0; i < m.rms_gap_error.size(); ++i)
      row("rms_gap_error", static_cast<int>(i + 1), m.rms_gap_error[i]);
    row("min_gap", 0, m.min_gap);
    row("max_abs_effort", 0, m.max_abs_effort);
    for (size_t i = 0; i < m.solve_seconds.size(); ++i)
      row("solve_seconds", static_cast<int>(i + 1), m.solve_seconds[i]);
    row("window_start", 0, m.window_start);
    row("window_end", 0, m.window_end);
  }
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

void save_config_echo(const std::string& path, const ExperimentConfig& c,
                      const PlatoonSpec& true_spec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "key,value\n";
  char buf[160];
  const auto num = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << key << "," << buf << "\n";
  };
  const auto str = [&](const std::string& key, const std::string& v) {
    out << key << "," << csv_quote(v) << "\n";
  };
  num("seed", static_cast<double>(c.seed));
  num("T", c.T);
  num("perturbation", c.perturbation);
  num("perturb_hvs", c.perturb_hvs ? 1 : 0);
  str("outdir", c.outdir);
  num("eval_window_start", c.eval_window_start);
  num("platoon.h_star", c.platoon.h_star);
  num("platoon.v_star", c.platoon.v_star);
  num("platoon.t_s", c.platoon.t_s);
  num("acc.k_p", c.acc.k_p);
  num("acc.k_v", c.acc.k_v);
  num("dither.enabled", c.dither.enabled ? 1 : 0);
  num("dither.amplitude", c.dither.amplitude);
  str("profile.file", c.profile.file);
  num("profile.hold_duration", c.profile.hold_duration);
  num("profile.hold_speed", c.profile.hold_speed);
  num("profile.speed_scale", c.profile.speed_scale);
  num("profile.constant_duration", c.profile.constant_duration);
  str("profile.interp", c.profile.interp);
  num("synthesis.eps1", c.synthesis.eps1);
  num("synthesis.eps2", c.synthesis.eps2);
  num("synthesis.lambda1", c.synthesis.lambda1);
  num("synthesis.lambda2", c.synthesis.lambda2);
  str("synthesis.norm", c.synthesis.norm);
  num("synthesis.grid_search", c.synthesis.grid_search ? 1 : 0);
  num("synthesis.max_subplatoon", c.synthesis.max_subplatoon);
  num("synthesis.solve_monolithic", c.synthesis.solve_monolithic ? 1 : 0);
  num("synthesis.delta_override", c.synthesis.delta_override);
  num("synthesis.subplatoon_delta_inflation", c.synthesis.subplatoon_delta_inflation);
  num("synthesis.margin", c.synthesis.margin);
  for (int i = 0; i < c.platoon.size(); ++i) {
    const std::string pre = "vehicle" + std::to_string(i + 1) + ".";
    if (is_av(c.platoon.vehicles[i])) {
      const auto& nom = c.platoon.av_at(i);
      const auto& tru = true_spec.av_at(i);
      str(pre + "type", "av");
      num(pre + "nominal.tau", nom.tau);
      num(pre + "nominal.sigma", nom.sigma);
      num(pre + "nominal.M", nom.M);
      num(pre + "nominal.c", nom.c);
      num(pre + "nominal.d", nom.d);
      num(pre + "nominal.m", nom.m);
      num(pre + "true.tau", tru.tau);
      num(pre + "true.sigma", tru.sigma);
      num(pre + "true.M", tru.M);
      num(pre + "true.c", tru.c);
      num(pre + "true.d", tru.d);
      num(pre + "true.m", tru.m);
    } else {
      const auto& nom = c.platoon.hv_at(i);
      const auto& tru = true_spec.hv_at(i);
      str(pre + "type", "hv");
      num(pre + "nominal.alpha", nom.alpha);
      num(pre + "nominal.beta", nom.beta);
      num(pre + "nominal.tau", nom.tau);
      num(pre + "true.alpha", tru.alpha);
      num(pre + "true.beta", tru.beta);
      num(pre + "true.tau", tru.tau);
      num(pre + "h_s", nom.h_s);
      num(pre + "h_g", nom.h_g);
      num(pre + "v_max", nom.v_max);
    }
    const VehicleState& s0 = c.initial[i];
    num(pre + "initial.p", s0.p);
    num(pre + "initial.v", s0.v);
    num(pre + "initial.a", s0.a);
  }
}

CaseResult run_case(const ExperimentConfig& config) {
  config.validate();
  CaseResult out;
  fs::create_directories(config.outdir);
  const std::string dir = config.outdir + "/";

  out.true_spec = draw_true_spec(config);
  const ReferenceProfile profile = build_profile(config);
  save_config_echo(dir + "config_echo.csv", config, out.true_spec);

  std::vector<double> nominal_masses;
  for (int i : config.platoon.av_indices()) nominal_masses.push_back(config.platoon.av_at(i).m);
  const LiftingLayout layout = make_layout(config.platoon);

  // form the platoon under the classic controller and record data
  AccController collect_ctrl(layout, config.acc, nominal_masses,
                             config.dither.enabled ? config.dither.amplitude : 0.0,
                             Rng(config.seed).fork(2).next_u64());
  CollectResult collected;
  try {
    collected = collect_data(out.true_spec, collect_ctrl, config.T,
                             CollectionMode::DesignConsistent, config.initial, profile);
  } catch (const SimulationDiverged& e) {
    out.exit_code = kExitDiverged;
    out.message = e.what();
    return out;
  }
  out.richness = check_richness(collected.batch.Z0);
  save_data_batch(dir + "data_batch.json", collected.batch);

  out.synthesis = synthesize_pipeline(config, collected.batch);
  if (out.synthesis.monolithic)
    save_synthesis_result(dir + "synthesis_monolithic.json", *out.synthesis.monolithic,
                          config.seed);
  for (size_t s = 0; s < out.synthesis.splits.size(); ++s)
    save_synthesis_result(dir + "synthesis_sub" + std::to_string(s + 1) + ".json",
                          out.synthesis.splits[s], config.seed);
  if (!out.synthesis.feasible) {
    out.exit_code = kExitInfeasible;
    for (const auto& r : out.synthesis.splits)
      if (!r.feasible()) out.message = r.message;
    return out;
  }
  save_controller_bundle(dir + "controller_bundle.json", out.synthesis.bundle);

  // evaluate the learned controller against the classic one over the profile
  const int switch_step =
      static_cast<int>(std::llround(config.profile.hold_duration / config.platoon.t_s));
  const double duration = profile.end_time();
  try {
    auto acc_in_cacc = std::make_shared<AccController>(layout, config.acc, nominal_masses,
                                                       0.0, 0);
    auto cacc = std::make_shared<CaccController>(out.synthesis.bundle);
    ScheduledController schedule(acc_in_cacc, cacc, switch_step);
    out.cacc_trajectory = integrate_high_fidelity(out.true_spec, schedule, profile,
                                                  config.initial, duration);
    AccController acc_only(layout, config.acc, nominal_masses, 0.0, 0);
    out.acc_trajectory =
        integrate_high_fidelity(out.true_spec, acc_only, profile, config.initial, duration);
  } catch (const SimulationDiverged& e) {
    out.exit_code = kExitDiverged;
    out.message = e.what();
    return out;
  }

  const double window_start =
      config.eval_window_start >= 0.0 ? config.eval_window_start
                                      : config.profile.hold_duration;
  out.cacc_metrics = compute_metrics(out.cacc_trajectory, config.platoon, window_start,
                                     duration);
  out.acc_metrics =
      compute_metrics(out.acc_trajectory, config.platoon, window_start, duration);
  if (out.synthesis.monolithic) {
    out.cacc_metrics.solve_seconds.push_back(out.synthesis.monolithic->solve_seconds);
    out.cacc_metrics.solver_status.push_back(to_string(out.synthesis.monolithic->status));
  }
  for (const auto& r : out.synthesis.splits) {
    out.cacc_metrics.solve_seconds.push_back(r.solve_seconds);
    out.cacc_metrics.solver_status.push_back(to_string(r.status));
  }

  write_trajectory_csv(out.cacc_trajectory, dir + "trajectory_cacc.csv");
  write_trajectory_csv(out.acc_trajectory, dir + "trajectory_acc.csv");
  write_combined_metrics_csv(dir + "metrics.csv",
                             {{"cacc", out.cacc_metrics}, {"acc", out.acc_metrics}});
  emit_plots(out.cacc_trajectory, out.acc_trajectory, config.platoon, config.outdir);
  return out;
}

}  // namespace platoon
