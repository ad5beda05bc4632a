#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "sgdiff/denoiser.hpp"
#include "sgdiff/diffusion.hpp"
#include "sgdiff/io.hpp"
#include "sgdiff/metrics.hpp"
#include "sgdiff/parallel.hpp"
#include "sgdiff/presets.hpp"
#include "sgdiff/residual.hpp"
#include "sgdiff/solver.hpp"

// Command-line surface: generate, degrade, train, reconstruct, evaluate,
// schedule-sweep. Exit codes: 0 success, 1 usage error, 2 runtime or
// numerical error.

namespace sgdiff::cli {

namespace fs = std::filesystem;

inline std::vector<fs::path> list_sgfd(const std::string& path) {
  std::vector<fs::path> files;
  const fs::path p(path);
  if (fs::is_directory(p)) {
    for (const auto& entry : fs::directory_iterator(p))
      if (entry.path().extension() == ".sgfd") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  } else if (fs::exists(p)) {
    files.push_back(p);
  }
  if (files.empty()) throw std::runtime_error("no .sgfd files at " + path);
  return files;
}

inline void echo_config(const RunConfig& cfg, const fs::path& dir) {
  std::ofstream out(dir / "effective_config.json", std::ios::trunc);
  out << to_json(cfg).dump(2) << '\n';
}

/// Initial condition for the configured preset, on the generation grid.
inline VorticityField make_initial(const RunConfig& cfg, const FourierGrid& grid,
                                   const SolverConfig& solver, std::uint64_t seed) {
  if (cfg.preset == "taylor_green") {
    const double amplitude = cfg.tgv_perturb_rel * 2.0 * cfg.tgv_U0 * cfg.tgv_k;
    return init_taylor_green(cfg.tgv_U0, cfg.tgv_k, amplitude, grid, seed);
  }
  if (cfg.preset == "decaying") {
    return init_decaying({cfg.vortex_count_min, cfg.vortex_count_max},
                         {cfg.vortex_core_rel_min * cfg.Lx, cfg.vortex_core_rel_max * cfg.Lx},
                         {cfg.vortex_speed_min, cfg.vortex_speed_max}, grid, seed);
  }
  if (cfg.preset == "kolmogorov") {
    return init_kolmogorov(grid, solver, seed, cfg.burn_in,
                           GrfSpectrum{cfg.grf_amplitude, cfg.grf_power, cfg.grf_cutoff});
  }
  if (cfg.preset == "mcwilliams") return init_mcwilliams(grid, seed);
  throw std::invalid_argument("unknown preset: " + cfg.preset);
}

inline int cmd_generate(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const int gen_n = cfg.n * cfg.gen_factor;
  const FourierGrid grid = wavenumber_grid(gen_n, cfg.Lx, cfg.Ly);
  const SolverConfig solver = solver_config(cfg, gen_n);
  validate_solver_config(solver);

  parallel_for(0, cfg.trajectories, [&](int t) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(t);
    const VorticityField w0 = make_initial(cfg, grid, solver, seed);
    const Trajectory traj = simulate_trajectory(w0, solver, seed);
    std::vector<Field> frames;
    frames.reserve(traj.frames.size());
    for (const auto& f : traj.frames)
      frames.push_back(cfg.gen_factor > 1 ? downsample_uniform(f.data, cfg.gen_factor) : f.data);
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%03d.sgfd", t);
    io::write_sgfd((fs::path(out_dir) / name).string(), frames, cfg.dt_record, cfg.Lx, cfg.Ly,
                   cfg.Re);
  });
  echo_config(cfg, out_dir);
  std::cout << "generated " << cfg.trajectories << " " << cfg.preset << " trajectories at n="
            << cfg.n << " (simulated at " << gen_n << ") in " << out_dir << "\n";
  return 0;
}

inline int cmd_degrade(const RunConfig& cfg, const std::string& input,
                       const std::string& out_dir, const std::string& pipeline) {
  fs::create_directories(out_dir);
  const auto files = list_sgfd(input);
  for (const auto& file : files) {
    const io::SgfdContents high = io::read_sgfd(file.string());
    const int n_high = high.frames.front().data.rows();
    if (n_high % cfg.factor != 0)
      throw std::invalid_argument("degrade: factor does not divide the input resolution");
    const int n_low = n_high / cfg.factor;

    std::vector<Field> low_frames;
    if (pipeline == "downsample") {
      for (const auto& f : high.frames)
        low_frames.push_back(downsample_uniform(f.data, cfg.factor));
    } else if (pipeline == "solver") {
      RunConfig run = cfg;
      run.Re = high.Re;
      run.Lx = high.Lx;
      run.Ly = high.Ly;
      run.dt_record = high.dt_record;
      SolverConfig solver = solver_config(run, n_low);
      solver.T = (static_cast<double>(high.frames.size()) - 1.0) * high.dt_record;
      const VorticityField w0 = downsample_uniform(high.frames.front(), cfg.factor);
      const Trajectory low = simulate_trajectory(w0, solver, cfg.seed);
      for (const auto& f : low.frames) low_frames.push_back(f.data);
    } else {
      throw std::invalid_argument("degrade: pipeline must be 'solver' or 'downsample'");
    }
    io::write_sgfd((fs::path(out_dir) / file.filename()).string(), low_frames, high.dt_record,
                   high.Lx, high.Ly, high.Re);
  }
  echo_config(cfg, out_dir);
  std::cout << "degraded " << files.size() << " trajectories via the " << pipeline
            << " pipeline into " << out_dir << "\n";
  return 0;
}

inline int cmd_train(const RunConfig& cfg, const std::string& data, const std::string& model_out) {
  const auto files = list_sgfd(data);
  std::vector<Field> frames;
  io::SgfdContents first = io::read_sgfd(files.front().string());
  const int n = first.frames.front().data.rows();
  const FourierGrid grid = wavenumber_grid(n, first.Lx, first.Ly);
  for (const auto& file : files) {
    const io::SgfdContents c = io::read_sgfd(file.string());
    for (const auto& f : c.frames) {
      if (f.data.rows() != n)
        throw std::invalid_argument("train: inconsistent resolutions in the dataset");
      frames.push_back(f.data);
    }
  }

  TrainOptions opt;
  opt.epochs = cfg.epochs;
  opt.lr = cfg.lr;
  opt.seed = cfg.seed;
  opt.use_importance_weights = cfg.use_importance_weights;
  opt.iw = importance_params(cfg);
  opt.time_bins = cfg.time_bins;
  opt.radial_bins = cfg.radial_bins;

  const TrainResult result = fit_spectral_gains(frames, grid, vp_schedule(cfg), opt);
  const fs::path out(model_out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::write_sgfm(model_out, result.denoiser);
  if (out.has_parent_path()) echo_config(cfg, out.parent_path());
  std::cout << "trained on " << frames.size() << " frames: loss " << result.epoch_loss.front()
            << " -> " << result.epoch_loss.back() << "; model written to " << model_out << "\n";
  return 0;
}

struct ReconstructedSample {
  int frame_index = 0;  // index of the mid frame in the source trajectory
  Sample channels;      // prev/mid/next at the target resolution
};

/// Reconstructs every interior frame of a low-fidelity trajectory as a
/// 3-channel triplet sample. method "nn" emits the plain nearest-neighbor
/// upsampling baseline; "sgdiff" runs the full reverse sampler.
inline std::vector<ReconstructedSample> reconstruct_trajectory(
    const io::SgfdContents& low, const SpectralGainDenoiser& model, const RunConfig& cfg,
    const std::string& method, int max_samples = 0) {
  const int n_low = low.frames.front().data.rows();
  const int n_target = model.grid().n;
  if (n_target % n_low != 0)
    throw std::invalid_argument("reconstruct: model resolution is not a multiple of the input");
  const int factor = n_target / n_low;
  if (low.frames.size() < 3)
    throw std::invalid_argument("reconstruct: need at least 3 frames for triplet samples");

  int count = static_cast<int>(low.frames.size()) - 2;
  if (max_samples > 0) count = std::min(count, max_samples);

  const VpSchedule schedule = vp_schedule(cfg);
  const SamplerConfig base_sampler = sampler_config(cfg);
  validate_sampler_config(base_sampler, schedule);

  RunConfig physics = cfg;
  physics.Re = low.Re;
  physics.Lx = low.Lx;
  physics.Ly = low.Ly;
  const SolverConfig res_cfg = solver_config(physics, n_target);
  const FourierGrid grid = wavenumber_grid(n_target, low.Lx, low.Ly);
  const VorticityResidual residual(grid, res_cfg, low.dt_record);
  const ScaledResidual scaled(residual, model.data_scale());

  std::vector<ReconstructedSample> samples(count);
  parallel_for(0, count, [&](int s) {
    const int j = s + 1;  // mid frame
    Sample guide{upsample_nearest(low.frames[j - 1].data, factor),
                 upsample_nearest(low.frames[j].data, factor),
                 upsample_nearest(low.frames[j + 1].data, factor)};
    if (method == "nn") {
      samples[s] = ReconstructedSample{j, std::move(guide)};
      return;
    }
    const double scale = model.data_scale();
    for (Field& c : guide) c *= 1.0 / scale;
    SamplerConfig sampler = base_sampler;
    sampler.seed = cfg.seed + static_cast<std::uint64_t>(j);
    Sample out = reconstruct(guide, model, &scaled, sampler, schedule);
    for (Field& c : out) c *= scale;
    samples[s] = ReconstructedSample{j, std::move(out)};
  });
  return samples;
}

inline int cmd_reconstruct(const RunConfig& cfg, const std::string& low_path,
                           const std::string& model_path, const std::string& out_dir,
                           const std::string& method, int max_samples, bool render) {
  if (method != "sgdiff" && method != "nn")
    throw std::invalid_argument("reconstruct: method must be 'sgdiff' or 'nn'");
  fs::create_directories(out_dir);
  const SpectralGainDenoiser model = io::read_sgfm(model_path);
  int total = 0;
  for (const auto& file : list_sgfd(low_path)) {
    const io::SgfdContents low = io::read_sgfd(file.string());
    const auto samples = reconstruct_trajectory(low, model, cfg, method, max_samples);
    const std::string stem = file.stem().string();
    for (const auto& s : samples) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s_f%04d.sgfd", stem.c_str(), s.frame_index);
      io::write_sgfd((fs::path(out_dir) / name).string(), s.channels, low.dt_record, low.Lx,
                     low.Ly, low.Re);
      if (render) {
        std::snprintf(name, sizeof(name), "%s_f%04d.pgm", stem.c_str(), s.frame_index);
        io::write_pgm((fs::path(out_dir) / name).string(), s.channels[1]);
      }
    }
    total += static_cast<int>(samples.size());
  }
  echo_config(cfg, out_dir);
  std::cout << "reconstructed " << total << " samples (" << method << ") into " << out_dir
            << "\n";
  return 0;
}

/// Parses "<stem>_fNNNN" sample names back to the mid-frame index.
inline int sample_frame_index(const fs::path& file) {
  const std::string stem = file.stem().string();
  const auto pos = stem.rfind("_f");
  if (pos == std::string::npos)
    throw std::runtime_error("evaluate: cannot parse frame index from " + stem);
  return std::stoi(stem.substr(pos + 2));
}

inline EvalReport evaluate_sample(const Sample& pred, const io::SgfdContents& truth,
                                  int frame_index, const FourierGrid& grid,
                                  const SolverConfig& solver, const std::string& hash) {
  const auto& frames = truth.frames;
  const SnapshotTriplet truth_trip = make_triplet(frames[frame_index - 1], frames[frame_index],
                                                  frames[frame_index + 1], truth.dt_record);
  const SnapshotTriplet pred_trip =
      triplet_from_sample(pred, truth.Lx, truth.Ly, truth.dt_record);

  EvalReport r;
  char id[32];
  std::snprintf(id, sizeof(id), "f%04d", frame_index);
  r.sample_id = id;
  r.l2 = l2_error(pred[1], frames[frame_index].data);
  r.residual_metric = normalized_residual_metric(pred_trip, truth_trip, grid, solver);
  const ImageMetrics im = image_metrics(pred[1], frames[frame_index].data);
  r.psnr = im.psnr;
  r.ssim = im.ssim;
  r.subbands = subband_l2(pred[1], frames[frame_index].data);
  r.config_hash = hash;
  return r;
}

inline int cmd_evaluate(const RunConfig& cfg, const std::string& pred_dir,
                        const std::string& truth_path, const std::string& out_dir, bool render) {
  fs::create_directories(out_dir);
  const io::SgfdContents truth = io::read_sgfd(truth_path);
  const int n = truth.frames.front().data.rows();
  RunConfig physics = cfg;
  physics.Re = truth.Re;
  physics.Lx = truth.Lx;
  physics.Ly = truth.Ly;
  const SolverConfig solver = solver_config(physics, n);
  const FourierGrid grid = wavenumber_grid(n, truth.Lx, truth.Ly);
  const std::string hash = config_hash(cfg);

  std::vector<std::string> metric_rows, subband_rows;
  double l2_total = 0.0, res_total = 0.0;
  for (const auto& file : list_sgfd(pred_dir)) {
    const int j = sample_frame_index(file);
    if (j < 1 || j + 1 >= static_cast<int>(truth.frames.size()))
      throw std::runtime_error("evaluate: sample index out of range: " + file.string());
    const io::SgfdContents pred = io::read_sgfd(file.string());
    if (pred.frames.size() != 3)
      throw std::runtime_error("evaluate: expected 3-frame sample files");
    const Sample channels{pred.frames[0].data, pred.frames[1].data, pred.frames[2].data};
    const EvalReport r = evaluate_sample(channels, truth, j, grid, solver, hash);
    metric_rows.push_back(eval_csv_row(r));
    char row[128];
    std::snprintf(row, sizeof(row), "%s,%.17g,%.17g,%.17g,%.17g", r.sample_id.c_str(),
                  r.subbands.hh, r.subbands.hl, r.subbands.ll, r.subbands.lh);
    subband_rows.push_back(row);
    l2_total += r.l2;
    res_total += r.residual_metric;
    if (render) {
      char name[48];
      std::snprintf(name, sizeof(name), "pred_f%04d.pgm", j);
      io::write_pgm((fs::path(out_dir) / name).string(), channels[1]);
      std::snprintf(name, sizeof(name), "truth_f%04d.pgm", j);
      io::write_pgm((fs::path(out_dir) / name).string(), truth.frames[j].data);
    }
  }
  io::write_csv((fs::path(out_dir) / "metrics.csv").string(), eval_csv_header(), metric_rows);
  io::write_csv((fs::path(out_dir) / "subbands.csv").string(), "sample_id,hh,hl,ll,lh",
                subband_rows);
  echo_config(cfg, out_dir);
  const double count = static_cast<double>(metric_rows.size());
  std::cout << "evaluated " << metric_rows.size() << " samples: mean l2 " << l2_total / count
            << ", mean residual_metric " << res_total / count << "\n";
  return 0;
}

struct PolicySpec {
  std::string label;
  std::string policy;
  int n = 0, i = 0, s = 1;
};

inline PolicySpec parse_policy_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("policy spec must look like name:params, got " + spec);
  PolicySpec p;
  p.policy = spec.substr(0, colon);
  std::vector<int> params;
  std::string token;
  for (char ch : spec.substr(colon + 1)) {
    if (ch == ',') {
      params.push_back(std::stoi(token));
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  if (!token.empty()) params.push_back(std::stoi(token));
  if (p.policy == "uniform" && params.size() == 1) {
    p.n = params[0];
    p.label = "uniform_" + std::to_string(p.n);
  } else if (p.policy == "start_end" && params.size() == 2) {
    p.i = params[0];
    p.n = params[1];
    p.label = "start_" + std::to_string(p.i) + "_end_" + std::to_string(p.n);
  } else if ((p.policy == "start_space" || p.policy == "end_space") && params.size() == 2) {
    p.n = params[0];
    p.s = params[1];
    p.label = (p.policy == "start_space" ? "start_" : "end_") + std::to_string(p.n) + "_space_" +
              std::to_string(p.s);
  } else {
    throw std::invalid_argument("bad policy spec: " + spec);
  }
  return p;
}

inline std::vector<PolicySpec> parse_policy_list(const std::string& list) {
  std::vector<PolicySpec> specs;
  std::string token;
  for (char ch : list) {
    if (ch == ';') {
      if (!token.empty()) specs.push_back(parse_policy_spec(token));
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  if (!token.empty()) specs.push_back(parse_policy_spec(token));
  if (specs.empty()) throw std::invalid_argument("empty policy list");
  return specs;
}

inline int cmd_schedule_sweep(const RunConfig& cfg, const std::string& low_path,
                              const std::string& model_path, const std::string& truth_path,
                              const std::string& out_dir, const std::string& policies,
                              int max_samples) {
  fs::create_directories(out_dir);
  const SpectralGainDenoiser model = io::read_sgfm(model_path);
  const io::SgfdContents low = io::read_sgfd(list_sgfd(low_path).front().string());
  const io::SgfdContents truth = io::read_sgfd(truth_path);
  const int n = truth.frames.front().data.rows();
  RunConfig physics = cfg;
  physics.Re = truth.Re;
  physics.Lx = truth.Lx;
  physics.Ly = truth.Ly;
  const SolverConfig solver = solver_config(physics, n);
  const FourierGrid grid = wavenumber_grid(n, truth.Lx, truth.Ly);
  const std::string hash = config_hash(cfg);

  std::vector<std::string> rows;
  for (const PolicySpec& spec : parse_policy_list(policies)) {
    RunConfig run = cfg;
    run.policy = spec.policy;
    run.policy_n = spec.n;
    run.policy_i = spec.i;
    run.policy_s = spec.s;
    const auto samples = reconstruct_trajectory(low, model, run, "sgdiff", max_samples);
    double l2_total = 0.0, res_total = 0.0;
    for (const auto& s : samples) {
      const EvalReport r = evaluate_sample(s.channels, truth, s.frame_index, grid, solver, hash);
      l2_total += r.l2;
      res_total += r.residual_metric;
    }
    const double count = static_cast<double>(samples.size());
    char row[160];
    std::snprintf(row, sizeof(row), "%s,%.17g,%.17g", spec.label.c_str(), l2_total / count,
                  res_total / count);
    rows.push_back(row);
    std::cout << spec.label << ": l2 " << l2_total / count << ", residual_metric "
              << res_total / count << "\n";
  }
  io::write_csv((fs::path(out_dir) / "sweep.csv").string(), "policy,l2,residual_metric", rows);
  echo_config(cfg, out_dir);
  return 0;
}

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"2D turbulence data generation and diffusion-based super-resolution"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file, preset;
  std::string input, out_dir, model_path, low_path, truth_path, pred_dir;
  std::string pipeline = "solver", method = "sgdiff";
  std::string policies =
      "uniform:4;start_end:3,1;start_end:2,2;start_end:1,3;start_space:4,1;start_space:4,2;"
      "start_space:4,3;end_space:4,1;end_space:4,2;end_space:4,3";
  int max_samples = 0;
  bool no_iw = false, no_corrector = false, render = false;

  // flags shared by all subcommands; only values the user actually passes
  // override the preset/config-file values
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "flat JSON config file");
    sub->add_option("--preset", preset, "taylor_green | decaying | kolmogorov | mcwilliams");
    sub->add_option("--seed", cfg.seed, "base random seed");
    sub->add_option("--n", cfg.n, "stored grid resolution");
    sub->add_option("--gen-factor", cfg.gen_factor, "generation resolution multiplier");
    sub->add_option("--trajectories", cfg.trajectories, "number of trajectories");
    sub->add_option("--re", cfg.Re, "Reynolds number");
    sub->add_option("--T", cfg.T, "total simulated time");
    sub->add_option("--dt-record", cfg.dt_record, "record interval");
    sub->add_option("--burn-in", cfg.burn_in, "forced-flow burn-in time");
    sub->add_option("--factor", cfg.factor, "degradation factor");
    sub->add_option("--steps", cfg.steps, "reverse diffusion steps K");
    sub->add_option("--t-guide", cfg.t_guide, "guide time");
    sub->add_option("--beta-min", cfg.beta_min, "schedule beta at t=0");
    sub->add_option("--beta-max", cfg.beta_max, "schedule beta at t=T");
    sub->add_option("--M", cfg.corrector_steps, "Adam steps per correction");
    sub->add_option("--eta", cfg.corrector_eta, "Adam step size");
    sub->add_option("--policy", cfg.policy, "uniform | start_end | start_space | end_space");
    sub->add_option("--policy-n", cfg.policy_n, "correction budget N");
    sub->add_option("--policy-i", cfg.policy_i, "leading corrections I (start_end)");
    sub->add_option("--policy-s", cfg.policy_s, "correction spacing S");
    sub->add_option("--alpha", cfg.iw_alpha, "importance weight minimum");
    sub->add_option("--beta", cfg.iw_beta, "importance weight maximum");
    sub->add_option("--theta", cfg.iw_theta, "importance quantile");
    sub->add_option("--epochs", cfg.epochs, "training epochs");
    sub->add_option("--lr", cfg.lr, "training learning rate");
    sub->add_option("--time-bins", cfg.time_bins, "denoiser time bins");
    sub->add_option("--radial-bins", cfg.radial_bins, "denoiser radial bins");
    sub->add_flag("--no-iw", no_iw, "train without importance weights");
    sub->add_flag("--no-corrector", no_corrector, "sample without residual correction");
  };

  CLI::App* generate = app.add_subcommand("generate", "simulate dataset trajectories");
  add_common(generate);
  generate->add_option("--out", out_dir, "output directory")->required();

  CLI::App* degrade = app.add_subcommand("degrade", "produce low-fidelity counterparts");
  add_common(degrade);
  degrade->add_option("--input", input, "high-fidelity .sgfd file or directory")->required();
  degrade->add_option("--out", out_dir, "output directory")->required();
  degrade->add_option("--pipeline", pipeline, "solver | downsample");

  CLI::App* train = app.add_subcommand("train", "fit the spectral-gain denoiser");
  add_common(train);
  train->add_option("--data", input, "training .sgfd file or directory")->required();
  train->add_option("--out", model_path, "output model file (.sgfm)")->required();

  CLI::App* rec = app.add_subcommand("reconstruct", "super-resolve low-fidelity trajectories");
  add_common(rec);
  rec->add_option("--low", low_path, "low-fidelity .sgfd file or directory")->required();
  rec->add_option("--model", model_path, "trained .sgfm model")->required();
  rec->add_option("--out", out_dir, "output directory")->required();
  rec->add_option("--method", method, "sgdiff | nn (plain upsampling baseline)");
  rec->add_option("--max-samples", max_samples, "cap on samples per trajectory");
  rec->add_flag("--render", render, "write PGM renders of reconstructed frames");

  CLI::App* eval = app.add_subcommand("evaluate", "score reconstructed samples against truth");
  add_common(eval);
  eval->add_option("--pred", pred_dir, "directory of reconstructed samples")->required();
  eval->add_option("--truth", truth_path, "high-fidelity .sgfd trajectory")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval->add_flag("--render", render, "write PGM renders of predictions and truth");

  CLI::App* sweep = app.add_subcommand("schedule-sweep", "compare correction schedules");
  add_common(sweep);
  sweep->add_option("--low", low_path, "low-fidelity .sgfd file or directory")->required();
  sweep->add_option("--model", model_path, "trained .sgfm model")->required();
  sweep->add_option("--truth", truth_path, "high-fidelity .sgfd trajectory")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--policies", policies, "semicolon-separated policy specs");
  sweep->add_option("--max-samples", max_samples, "cap on samples per policy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    std::cerr << app.help() << '\n';
    return 1;
  }

  try {
    // rebuild the config with the documented precedence
    RunConfig effective;
    if (!preset.empty()) apply_preset(effective, preset);
    if (!config_file.empty()) effective = load_config_file(effective, config_file);
    CLI::App* sub = app.get_subcommands().front();
    auto take = [&](const std::string& flag, auto member) {
      if (sub->count(flag)) effective.*member = cfg.*member;
    };
    take("--seed", &RunConfig::seed);
    take("--n", &RunConfig::n);
    take("--gen-factor", &RunConfig::gen_factor);
    take("--trajectories", &RunConfig::trajectories);
    take("--re", &RunConfig::Re);
    take("--T", &RunConfig::T);
    take("--dt-record", &RunConfig::dt_record);
    take("--burn-in", &RunConfig::burn_in);
    take("--factor", &RunConfig::factor);
    take("--steps", &RunConfig::steps);
    take("--t-guide", &RunConfig::t_guide);
    take("--beta-min", &RunConfig::beta_min);
    take("--beta-max", &RunConfig::beta_max);
    take("--M", &RunConfig::corrector_steps);
    take("--eta", &RunConfig::corrector_eta);
    take("--policy", &RunConfig::policy);
    take("--policy-n", &RunConfig::policy_n);
    take("--policy-i", &RunConfig::policy_i);
    take("--policy-s", &RunConfig::policy_s);
    take("--alpha", &RunConfig::iw_alpha);
    take("--beta", &RunConfig::iw_beta);
    take("--theta", &RunConfig::iw_theta);
    take("--epochs", &RunConfig::epochs);
    take("--lr", &RunConfig::lr);
    take("--time-bins", &RunConfig::time_bins);
    take("--radial-bins", &RunConfig::radial_bins);
    if (no_iw) effective.use_importance_weights = false;
    if (no_corrector) effective.use_corrector = false;

    if (generate->parsed()) return cmd_generate(effective, out_dir);
    if (degrade->parsed()) return cmd_degrade(effective, input, out_dir, pipeline);
    if (train->parsed()) return cmd_train(effective, input, model_path);
    if (rec->parsed())
      return cmd_reconstruct(effective, low_path, model_path, out_dir, method, max_samples,
                             render);
    if (eval->parsed()) return cmd_evaluate(effective, pred_dir, truth_path, out_dir, render);
    if (sweep->parsed())
      return cmd_schedule_sweep(effective, low_path, model_path, truth_path, out_dir, policies,
                                max_samples);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace sgdiff::cli
