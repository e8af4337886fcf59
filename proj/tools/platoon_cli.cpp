#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <memory>

#include "platoon/experiment.hpp"
#include "platoon/matrix_io.hpp"
#include "platoon/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace platoon;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string base = "case1";
  std::int64_t seed = -1;
  std::string outdir;
  int split = 0;
  std::string profile;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_base = true) {
  cmd->add_option("--config", o.config_path, "JSON config file overriding the defaults");
  if (with_base)
    cmd->add_option("--case", o.base, "default parameter set (case1 or case2)")
        ->check(CLI::IsMember({"case1", "case2"}));
  cmd->add_option("--seed", o.seed, "seed override");
  cmd->add_option("--out", o.outdir, "output directory");
  cmd->add_option("--split", o.split, "maximum sub-platoon size override");
  cmd->add_option("--profile", o.profile, "drive-cycle CSV override");
}

ExperimentConfig resolve_config(const CommonOpts& o) {
  ExperimentConfig c = o.base == "case2" ? ExperimentConfig::case2_defaults()
                                         : ExperimentConfig::case1_defaults();
  if (!o.config_path.empty()) c = load_config(o.config_path, c);
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.outdir.empty()) c.outdir = o.outdir;
  if (o.split > 0) c.synthesis.max_subplatoon = o.split;
  if (!o.profile.empty()) c.profile.file = o.profile;
  return c;
}

int run_pipeline(const ExperimentConfig& config) {
  const CaseResult r = run_case(config);
  if (r.exit_code != kExitOk) {
    std::cerr << "run failed: " << r.message << "\n";
    return r.exit_code;
  }
  std::cout << "artifacts written to " << config.outdir << "\n";
  std::cout << "rms velocity deviation (learned vs classic):\n";
  for (size_t i = 0; i < r.cacc_metrics.rms_velocity_dev.size(); ++i)
    std::cout << "  vehicle " << i + 1 << ": " << r.cacc_metrics.rms_velocity_dev[i]
              << " vs " << r.acc_metrics.rms_velocity_dev[i] << " m/s\n";
  std::cout << "rms gap error (learned vs classic):\n";
  for (size_t i = 0; i < r.cacc_metrics.rms_gap_error.size(); ++i)
    std::cout << "  gap " << i + 1 << ": " << r.cacc_metrics.rms_gap_error[i] << " vs "
              << r.acc_metrics.rms_gap_error[i] << " m\n";
  for (size_t i = 0; i < r.cacc_metrics.solve_seconds.size(); ++i)
    std::cout << "solve " << i + 1 << ": " << r.cacc_metrics.solve_seconds[i] << " s ("
              << r.cacc_metrics.solver_status[i] << ")\n";
  return kExitOk;
}

int do_collect(const CommonOpts& o, const std::string& out_file) {
  const ExperimentConfig c = resolve_config(o);
  c.validate();
  const PlatoonSpec truth = draw_true_spec(c);
  const ReferenceProfile profile = build_profile(c);
  std::vector<double> masses;
  for (int i : c.platoon.av_indices()) masses.push_back(c.platoon.av_at(i).m);
  AccController ctrl(make_layout(c.platoon), c.acc, masses,
                     c.dither.enabled ? c.dither.amplitude : 0.0,
                     Rng(c.seed).fork(2).next_u64());
  const CollectResult res = collect_data(truth, ctrl, c.T,
                                         CollectionMode::DesignConsistent, c.initial,
                                         profile);
  save_data_batch(out_file, res.batch);
  const RichnessReport rich = check_richness(res.batch.Z0);
  std::cout << "batch written to " << out_file << " (T = " << res.batch.T
            << ", rank " << rich.rank << "/" << rich.n_z
            << (rich.full_row_rank ? ", rich" : ", NOT rich") << ")\n";
  return kExitOk;
}

int do_synthesize(const CommonOpts& o, const std::string& batch_file) {
  const ExperimentConfig c = resolve_config(o);
  const DataBatch batch = load_data_batch(batch_file);
  const SynthesisArtifacts art = synthesize_pipeline(c, batch);
  const std::string dir = c.outdir.empty() ? "." : c.outdir;
  fs::create_directories(dir);
  if (art.monolithic)
    save_synthesis_result(dir + "/synthesis_monolithic.json", *art.monolithic, c.seed);
  for (size_t s = 0; s < art.splits.size(); ++s) {
    save_synthesis_result(dir + "/synthesis_sub" + std::to_string(s + 1) + ".json",
                          art.splits[s], c.seed);
    std::cout << "sub-platoon " << s + 1 << ": " << to_string(art.splits[s].status)
              << ", gamma = " << art.splits[s].gamma << ", " << art.splits[s].solve_seconds
              << " s\n";
  }
  if (!art.feasible) {
    std::cerr << "synthesis infeasible\n";
    return kExitInfeasible;
  }
  save_controller_bundle(dir + "/controller_bundle.json", art.bundle);
  std::cout << "controller bundle written to " << dir << "/controller_bundle.json\n";
  return kExitOk;
}

int do_simulate(const CommonOpts& o, const std::string& bundle_file, bool acc_only,
                const std::string& out_file) {
  const ExperimentConfig c = resolve_config(o);
  c.validate();
  const PlatoonSpec truth = draw_true_spec(c);
  const ReferenceProfile profile = build_profile(c);
  std::vector<double> masses;
  for (int i : c.platoon.av_indices()) masses.push_back(c.platoon.av_at(i).m);
  const LiftingLayout layout = make_layout(c.platoon);
  Trajectory traj;
  if (acc_only) {
    AccController ctrl(layout, c.acc, masses, 0.0, 0);
    traj = integrate_high_fidelity(truth, ctrl, profile, c.initial, profile.end_time());
  } else {
    const ControllerBundle bundle = load_controller_bundle(bundle_file);
    auto acc = std::make_shared<AccController>(layout, c.acc, masses, 0.0, 0);
    auto cacc = std::make_shared<CaccController>(bundle);
    const int switch_step =
        static_cast<int>(std::llround(c.profile.hold_duration / c.platoon.t_s));
    ScheduledController ctrl(acc, cacc, switch_step);
    traj = integrate_high_fidelity(truth, ctrl, profile, c.initial, profile.end_time());
  }
  write_trajectory_csv(traj, out_file);
  std::cout << "trajectory written to " << out_file << "\n";
  return kExitOk;
}

int do_metrics(const CommonOpts& o, const std::string& traj_file, double window_start,
               const std::string& out_file) {
  const ExperimentConfig c = resolve_config(o);
  const Trajectory traj = read_trajectory_csv(traj_file);
  const double start = window_start >= 0.0 ? window_start : c.profile.hold_duration;
  const MetricsReport m =
      compute_metrics(traj, c.platoon, start, traj.times.empty() ? 0.0 : traj.times.back());
  write_combined_metrics_csv(out_file, {{"run", m}});
  std::cout << "metrics written to " << out_file << "\n";
  return kExitOk;
}

int do_plot(const CommonOpts& o, const std::string& cacc_file, const std::string& acc_file,
            const std::string& outdir) {
  const ExperimentConfig c = resolve_config(o);
  const Trajectory cacc = read_trajectory_csv(cacc_file);
  const Trajectory acc = read_trajectory_csv(acc_file);
  fs::create_directories(outdir);
  for (const auto& f : emit_plots(cacc, acc, c.platoon, outdir))
    std::cout << "wrote " << f << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven cooperative cruise control toolkit"};
  app.require_subcommand(1);

  CommonOpts run_opts, collect_opts, synth_opts, sim_opts, metrics_opts, plot_opts;

  CLI::App* run = app.add_subcommand("run", "full experiment pipeline");
  run->require_subcommand(1);
  CLI::App* run1 = run->add_subcommand("case1", "four automated vehicles");
  CLI::App* run2 = run->add_subcommand("case2", "mixed platoon with a human driver");
  add_common(run1, run_opts, false);
  add_common(run2, run_opts, false);

  CLI::App* collect = app.add_subcommand("collect", "record a data batch");
  std::string collect_out = "collect_batch.json";
  add_common(collect, collect_opts);
  collect->add_option("--batch-out", collect_out, "output batch file");

  CLI::App* synth = app.add_subcommand("synthesize", "solve the gain-design programs");
  std::string synth_batch;
  add_common(synth, synth_opts);
  synth->add_option("--batch", synth_batch, "recorded data batch")->required();

  CLI::App* sim = app.add_subcommand("simulate", "closed-loop simulation over the profile");
  std::string sim_bundle, sim_out = "trajectory.csv";
  bool sim_acc = false;
  add_common(sim, sim_opts);
  sim->add_option("--controller", sim_bundle, "controller bundle file");
  sim->add_flag("--acc", sim_acc, "simulate the classic controller instead");
  sim->add_option("--traj-out", sim_out, "output trajectory CSV");

  CLI::App* metrics = app.add_subcommand("metrics", "summarize a trajectory CSV");
  std::string metrics_traj, metrics_out = "metrics.csv";
  double metrics_window = -1.0;
  add_common(metrics, metrics_opts);
  metrics->add_option("--traj", metrics_traj, "trajectory CSV")->required();
  metrics->add_option("--window-start", metrics_window, "metrics window start [s]");
  metrics->add_option("--metrics-out", metrics_out, "output metrics CSV");

  CLI::App* plot = app.add_subcommand("plot", "render comparison figures");
  std::string plot_cacc, plot_acc, plot_out = "plots";
  add_common(plot, plot_opts);
  plot->add_option("--cacc", plot_cacc, "learned-controller trajectory CSV")->required();
  plot->add_option("--acc", plot_acc, "classic-controller trajectory CSV")->required();
  plot->add_option("--plot-out", plot_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run1->parsed() || run2->parsed()) {
      run_opts.base = run1->parsed() ? "case1" : "case2";
      return run_pipeline(resolve_config(run_opts));
    }
    if (collect->parsed()) return do_collect(collect_opts, collect_out);
    if (synth->parsed()) return do_synthesize(synth_opts, synth_batch);
    if (sim->parsed()) {
      if (!sim_acc && sim_bundle.empty())
        throw ConfigError("simulate: give --controller or --acc");
      return do_simulate(sim_opts, sim_bundle, sim_acc, sim_out);
    }
    if (metrics->parsed())
      return do_metrics(metrics_opts, metrics_traj, metrics_window, metrics_out);
    if (plot->parsed()) return do_plot(plot_opts, plot_cacc, plot_acc, plot_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SimulationDiverged& e) {
    std::cerr << "simulation diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
