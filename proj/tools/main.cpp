// Command-line front end: generate problem instances, solve them, sweep
// phase-transition grids, and run the compressive imaging demo.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "blindcal/errors.hpp"
#include "blindcal/imaging.hpp"
#include "blindcal/phase.hpp"
#include "blindcal/sensing.hpp"
#include "blindcal/serialize.hpp"
#include "blindcal/solver.hpp"

namespace {

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void print_eval(const char* label, const blindcal::EvalReport& report) {
  std::cout << label << ": rel_err_x " << report.rel_err_x << ", rel_err_g "
            << report.rel_err_g << ", RSNR_x " << report.rsnr_x_db
            << " dB, RSNR_g " << report.rsnr_g_db << " dB, "
            << (report.success ? "success" : "no recovery") << "\n";
}

struct GenOptions {
  std::int64_t n = 256, m = 64, p = 4, k = 8;
  double rho = 0.5;
  std::uint64_t seed = 0;
  bool compact = false;
  std::string out = "instance.json";
};

int run_gen(const GenOptions& opt) {
  const blindcal::Dimensions dims{opt.n, opt.m, opt.p, opt.k};
  const blindcal::ProblemInstance inst =
      blindcal::generate_instance(dims, opt.rho, opt.seed);
  blindcal::save_instance(inst, opt.out, opt.compact);
  std::cout << "wrote " << (opt.compact ? "compact" : "full") << " instance (n="
            << dims.n << ", m=" << dims.m << ", p=" << dims.p << ", k="
            << dims.k << ", rho=" << opt.rho << ", seed=" << opt.seed
            << ") to " << opt.out << "\n";
  return 0;
}

struct SolveOptions {
  std::string in;
  std::string out;
  std::optional<std::int64_t> k;
  std::optional<double> rho;
  double stop_tol = 1e-7;
  int max_iters = 5000;
  bool project_gains = false;
  bool uncalibrated = false;
};

int run_solve(const SolveOptions& opt) {
  const blindcal::ProblemInstance inst = blindcal::load_instance(opt.in);
  blindcal::SolverConfig config;
  config.k = opt.k.value_or(inst.dims.k);
  config.rho = opt.rho.value_or(inst.rho);
  config.stop_tol = opt.stop_tol;
  config.max_iters = opt.max_iters;
  config.project_gains = opt.project_gains;

  const blindcal::SolverResult result =
      opt.uncalibrated
          ? blindcal::solve_iht_uncalibrated(inst.ensemble, inst.snapshots,
                                             config)
          : blindcal::solve_bc_iht(inst.ensemble, inst.snapshots, config);
  std::cout << (opt.uncalibrated ? "uncalibrated baseline" : "blind calibration")
            << ": " << result.iterations << " iterations, "
            << blindcal::to_string(result.termination) << "\n";
  print_eval("against stored truth",
             blindcal::evaluate(inst.truth_signal, inst.truth_gains, result));
  if (!opt.out.empty()) {
    blindcal::save_result(result, opt.out);
    std::cout << "wrote result to " << opt.out << "\n";
  }
  return 0;
}

struct PhaseOptions {
  std::string config;
  std::string out = "phase.csv";
  int threads = default_threads();
  bool no_timing = false;
  std::string curve_out;
  std::optional<double> curve_c;
};

int run_phase(const PhaseOptions& opt) {
  const blindcal::PhaseGridSpec spec = blindcal::load_phase_spec(opt.config);
  const blindcal::PhaseGridResult grid =
      blindcal::run_phase_grid(spec, opt.threads, !opt.no_timing);
  blindcal::emit_phase_csv(grid, opt.out);
  std::cout << "wrote " << grid.cells.size() << " cells x " << spec.trials
            << " trials to " << opt.out << "\n";

  if (!opt.curve_out.empty()) {
    double C;
    if (opt.curve_c) {
      C = *opt.curve_c;
    } else {
      const auto fitted = blindcal::fit_reference_constant(grid);
      if (!fitted)
        throw std::invalid_argument(
            "no 0.5-probability crossing in the grid to fit the reference "
            "constant from; pass --curve-c");
      C = *fitted;
      std::cout << "fitted reference constant C = " << C << "\n";
    }
    std::vector<double> m_values;
    for (const auto& cell : grid.cells) {
      const double m = static_cast<double>(cell.m);
      if (m_values.empty() || m_values.back() != m) m_values.push_back(m);
    }
    std::sort(m_values.begin(), m_values.end());
    m_values.erase(std::unique(m_values.begin(), m_values.end()),
                   m_values.end());
    // single k per curve; use the smallest k in the grid
    Eigen::Index k = grid.cells.empty() ? 1 : grid.cells.front().k;
    for (const auto& cell : grid.cells) k = std::min(k, cell.k);
    const auto points = blindcal::reference_curve(k, m_values, C);
    std::ofstream file(opt.curve_out, std::ios::binary);
    if (!file)
      throw blindcal::IoError("cannot open for writing: " + opt.curve_out);
    file << "m,p\n";
    for (const auto& [m, p] : points) file << m << ',' << p << '\n';
    if (!file) throw blindcal::IoError("write failed: " + opt.curve_out);
    std::cout << "wrote reference curve (k=" << k << ", C=" << C << ") to "
              << opt.curve_out << "\n";
  }
  return 0;
}

struct DemoOptions {
  blindcal::ImagingDemoParams params;
  std::string image;
  std::string out = "demo_out";
  std::uint64_t mem_budget_mb = 2048;
};

int run_demo(DemoOptions& opt) {
  if (!opt.image.empty()) opt.params.image_path = opt.image;
  opt.params.out_dir = opt.out;
  opt.params.memory_budget_bytes = opt.mem_budget_mb << 20;
  const blindcal::ImagingDemoReport report =
      blindcal::run_imaging_demo(opt.params);
  std::cout << "channels: " << report.channels.size() << ", sensing stored "
            << (report.used_dense_storage ? "dense" : "seeded") << "\n"
            << "worst calibrated RSNR: x " << report.calibrated_rsnr_x_db
            << " dB, g " << report.calibrated_rsnr_g_db << " dB\n"
            << "worst uncalibrated RSNR: x " << report.uncalibrated_rsnr_x_db
            << " dB\n"
            << "outputs in " << opt.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blind calibration of compressed sensing with unknown sensor "
               "gains"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand(
      "gen", "draw a random problem instance and write it as JSON");
  gen_cmd->add_option("--n", gen.n, "signal length");
  gen_cmd->add_option("--m", gen.m, "sensors per snapshot");
  gen_cmd->add_option("--p", gen.p, "snapshots");
  gen_cmd->add_option("--k", gen.k, "signal sparsity");
  gen_cmd->add_option("--rho", gen.rho, "gain spread in [0,1)");
  gen_cmd->add_option("--seed", gen.seed, "master seed");
  gen_cmd->add_flag("--compact", gen.compact,
                    "store only (dims, rho, seed); loading regenerates");
  gen_cmd->add_option("--out", gen.out, "output path");

  SolveOptions solve;
  CLI::App* solve_cmd = app.add_subcommand(
      "solve", "run the solver on a serialized instance and score it");
  solve_cmd->add_option("--in", solve.in, "instance JSON")->required();
  solve_cmd->add_option("--out", solve.out, "write the solver result JSON here");
  solve_cmd->add_option("--k", solve.k, "sparsity override");
  solve_cmd->add_option("--rho", solve.rho, "gain box override");
  solve_cmd->add_option("--stop-tol", solve.stop_tol,
                        "relative-change stopping tolerance");
  solve_cmd->add_option("--max-iters", solve.max_iters, "iteration cap");
  solve_cmd->add_flag("--project-gains", solve.project_gains,
                      "clamp gain iterates into the feasible set");
  solve_cmd->add_flag("--uncalibrated", solve.uncalibrated,
                      "gain-oblivious baseline instead of blind calibration");

  PhaseOptions phase;
  CLI::App* phase_cmd = app.add_subcommand(
      "phase", "run a phase-transition grid from a JSON config");
  phase_cmd->add_option("--config", phase.config, "PhaseGridSpec JSON")
      ->required();
  phase_cmd->add_option("--out", phase.out, "output CSV path");
  phase_cmd->add_option("--threads", phase.threads, "worker threads");
  phase_cmd->add_flag("--no-timing", phase.no_timing,
                      "zero the timing column for byte-stable output");
  phase_cmd->add_option("--curve-out", phase.curve_out,
                        "also write the p = C(1 + k/m) reference curve CSV");
  phase_cmd->add_option("--curve-c", phase.curve_c,
                        "reference-curve constant (default: fitted)");

  DemoOptions demo;
  CLI::App* demo_cmd = app.add_subcommand(
      "demo", "compressive imaging round trip with unknown gains");
  demo_cmd->add_option("--image", demo.image,
                       "PGM/PPM input (default: built-in synthetic target)");
  demo_cmd->add_option("--side", demo.params.side, "image side (power of two)");
  demo_cmd->add_option("--k", demo.params.k, "wavelet-domain sparsity");
  demo_cmd->add_option("--m", demo.params.m, "sensors per snapshot");
  demo_cmd->add_option("--p", demo.params.p, "snapshots");
  demo_cmd->add_option("--rho", demo.params.rho, "gain spread in [0,1)");
  demo_cmd->add_option("--seed", demo.params.seed, "master seed");
  demo_cmd->add_option("--stop-tol", demo.params.stop_tol,
                       "relative-change stopping tolerance");
  demo_cmd->add_option("--max-iters", demo.params.max_iters, "iteration cap");
  demo_cmd->add_option("--out", demo.out, "output directory");
  demo_cmd->add_option("--mem-budget-mb", demo.mem_budget_mb,
                       "dense ensemble budget before switching to seeded "
                       "regeneration");
  demo_cmd->add_flag("--force-dense", demo.params.force_dense,
                     "fail instead of regenerating when over budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (solve_cmd->parsed()) return run_solve(solve);
    if (phase_cmd->parsed()) return run_phase(phase);
    if (demo_cmd->parsed()) return run_demo(demo);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const blindcal::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
