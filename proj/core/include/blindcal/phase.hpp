#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blindcal/solver.hpp"

namespace blindcal {

// Grid of recovery experiments over problem sizes. Cells are the cartesian
// product of n_values x k_values x m_over_k_exponents x p_exponents, with
// m = ceil(2^e * k) and p = ceil(2^e). Every trial's seed is derived from
// (master_seed, cell parameters, trial index), so results are independent of
// execution order, thread count, and the number of trials requested.
struct PhaseGridSpec {
  std::vector<Eigen::Index> n_values;
  std::vector<Eigen::Index> k_values;
  std::vector<double> m_over_k_exponents;
  std::vector<double> p_exponents;
  double rho = 0.5;
  int trials = 1;
  double zeta_db = -60.0;  // success threshold, rel error < 10^(zeta_db/20)
  std::uint64_t master_seed = 0;

  void validate() const;
};

struct CellParams {
  Eigen::Index n = 0, k = 0, m = 0, p = 0;
};

struct PhaseCell {
  Eigen::Index n = 0, k = 0, m = 0, p = 0;
  int trials = 0;
  int successes = 0;
  double probability = 0.0;
  double mean_iterations = 0.0;
  double mean_seconds = 0.0;
};

struct PhaseGridResult {
  std::vector<PhaseCell> cells;
};

std::vector<CellParams> enumerate_cells(const PhaseGridSpec& spec);

// One seeded recovery trial of a cell; the exact computation run_phase_grid
// aggregates. Exposed so per-trial behaviour can be audited independently.
EvalReport phase_trial(const CellParams& cell, double rho, double zeta,
                       std::uint64_t master_seed, int trial,
                       SolverResult* result_out = nullptr);

// Runs every (cell, trial) pair, optionally across threads, and aggregates
// per cell. With collect_timing off, mean_seconds is written as exactly zero
// so the output is reproducible byte for byte across runs and thread counts.
PhaseGridResult run_phase_grid(const PhaseGridSpec& spec, int threads = 1,
                               bool collect_timing = true);

// Snapshot-count rule of thumb p = C (1 + k/m), returned as (m, p) points.
std::vector<std::pair<double, double>> reference_curve(
    Eigen::Index k, const std::vector<double>& m_values, double C);

// Least-squares fit of the constant C to where each (n, k, m) sweep crosses
// probability 1/2, interpolated on log2 p. Empty when no sweep crosses.
std::optional<double> fit_reference_constant(const PhaseGridResult& result);

// CSV with header n,k,m,p,trials,successes,probability,mean_iters,
// mean_seconds; rows sorted by (n, k, m, p); shortest round-trip decimals.
std::string phase_csv_string(const PhaseGridResult& result);
void emit_phase_csv(const PhaseGridResult& result,
                    const std::filesystem::path& path);
PhaseGridResult parse_phase_csv(const std::string& text);

}  // namespace blindcal
