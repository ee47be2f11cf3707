#include "blindcal/phase.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "blindcal/errors.hpp"
#include "blindcal/rng.hpp"

namespace blindcal {

namespace {

/* ceil(2^e * base), snapping to the nearest integer first so grid points
   meant to be exact (say 2^log2(6)) do not drift up from rounding */
Eigen::Index ceil_pow2_times(double e, Eigen::Index base) {
  const double v = std::exp2(e) * static_cast<double>(base);
  const double r = std::round(v);
  const double snapped = std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v))
                             ? r
                             : std::ceil(v);
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(snapped));
}

std::uint64_t cell_key(const CellParams& c) {
  std::uint64_t key = derive_seed(0x70686173ULL, static_cast<std::uint64_t>(c.n));
  key = derive_seed(key, static_cast<std::uint64_t>(c.k));
  key = derive_seed(key, static_cast<std::uint64_t>(c.m));
  key = derive_seed(key, static_cast<std::uint64_t>(c.p));
  return key;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads), count));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_number(Eigen::Index v) { return std::to_string(v); }
std::string format_number(int v) { return std::to_string(v); }

}  // namespace

void PhaseGridSpec::validate() const {
  if (n_values.empty() || k_values.empty() || m_over_k_exponents.empty() ||
      p_exponents.empty())
    throw std::invalid_argument("PhaseGridSpec: all value lists must be non-empty");
  if (!(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("PhaseGridSpec: rho must be in [0, 1)");
  if (trials < 1)
    throw std::invalid_argument("PhaseGridSpec: trials must be at least 1");
  for (const auto n : n_values)
    if (n < 1) throw std::invalid_argument("PhaseGridSpec: n must be positive");
  for (const auto k : k_values) {
    if (k < 1) throw std::invalid_argument("PhaseGridSpec: k must be positive");
    for (const auto n : n_values)
      if (k > n)
        throw std::invalid_argument("PhaseGridSpec: infeasible cell with k > n");
  }
}

std::vector<CellParams> enumerate_cells(const PhaseGridSpec& spec) {
  spec.validate();
  std::vector<CellParams> cells;
  for (const auto n : spec.n_values)
    for (const auto k : spec.k_values)
      for (const auto em : spec.m_over_k_exponents)
        for (const auto ep : spec.p_exponents)
          cells.push_back(
              {n, k, ceil_pow2_times(em, k), ceil_pow2_times(ep, 1)});
  return cells;
}

EvalReport phase_trial(const CellParams& cell, double rho, double zeta,
                       std::uint64_t master_seed, int trial,
                       SolverResult* result_out) {
  const auto seed = derive_seed(master_seed, cell_key(cell),
                                static_cast<std::uint64_t>(trial));
  const Dimensions dims{cell.n, cell.m, cell.p, cell.k};
  const ProblemInstance inst = generate_instance(dims, rho, seed);
  SolverConfig config;
  config.k = cell.k;
  config.rho = rho;
  SolverResult result = solve_bc_iht(inst.ensemble, inst.snapshots, config);
  const EvalReport report =
      evaluate(inst.truth_signal, inst.truth_gains, result, zeta);
  if (result_out) *result_out = std::move(result);
  return report;
}

PhaseGridResult run_phase_grid(const PhaseGridSpec& spec, int threads,
                               bool collect_timing) {
  const auto cells = enumerate_cells(spec);
  const double zeta = std::pow(10.0, spec.zeta_db / 20.0);
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t jobs = cells.size() * trials;

  struct TrialOutcome {
    bool success = false;
    int iterations = 0;
    double seconds = 0.0;
  };
  std::vector<TrialOutcome> outcomes(jobs);

  parallel_for(jobs, threads, [&](std::size_t job) {
    const auto& cell = cells[job / trials];
    const int trial = static_cast<int>(job % trials);
    SolverResult result;
    const auto t0 = std::chrono::steady_clock::now();
    const EvalReport report =
        phase_trial(cell, spec.rho, zeta, spec.master_seed, trial, &result);
    const auto t1 = std::chrono::steady_clock::now();
    auto& out = outcomes[job];
    out.success = report.success;
    out.iterations = result.iterations;
    if (collect_timing)
      out.seconds = std::chrono::duration<double>(t1 - t0).count();
  });

  PhaseGridResult result;
  result.cells.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    PhaseCell agg;
    agg.n = cells[c].n;
    agg.k = cells[c].k;
    agg.m = cells[c].m;
    agg.p = cells[c].p;
    agg.trials = spec.trials;
    double iter_sum = 0.0, sec_sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& out = outcomes[c * trials + t];
      agg.successes += out.success ? 1 : 0;
      iter_sum += out.iterations;
      sec_sum += out.seconds;
    }
    agg.probability = static_cast<double>(agg.successes) / spec.trials;
    agg.mean_iterations = iter_sum / spec.trials;
    agg.mean_seconds = sec_sum / spec.trials;
    result.cells.push_back(agg);
  }
  std::sort(result.cells.begin(), result.cells.end(),
            [](const PhaseCell& a, const PhaseCell& b) {
              return std::tie(a.n, a.k, a.m, a.p) < std::tie(b.n, b.k, b.m, b.p);
            });
  return result;
}

std::vector<std::pair<double, double>> reference_curve(
    Eigen::Index k, const std::vector<double>& m_values, double C) {
  if (k < 1) throw std::invalid_argument("reference_curve: k must be positive");
  if (!(C > 0.0)) throw std::invalid_argument("reference_curve: C must be positive");
  std::vector<std::pair<double, double>> points;
  points.reserve(m_values.size());
  for (const double m : m_values) {
    if (!(m > 0.0))
      throw std::invalid_argument("reference_curve: m values must be positive");
    points.emplace_back(m, C * (1.0 + static_cast<double>(k) / m));
  }
  return points;
}

std::optional<double> fit_reference_constant(const PhaseGridResult& result) {
  /* group cells into (n, k, m) sweeps along p */
  struct SweepPoint {
    Eigen::Index p;
    double prob;
  };
  std::map<std::tuple<Eigen::Index, Eigen::Index, Eigen::Index>,
           std::vector<SweepPoint>>
      sweeps;
  for (const auto& cell : result.cells)
    sweeps[{cell.n, cell.k, cell.m}].push_back({cell.p, cell.probability});

  double acc = 0.0;
  int count = 0;
  for (auto& [key, pts] : sweeps) {
    std::sort(pts.begin(), pts.end(),
              [](const SweepPoint& a, const SweepPoint& b) { return a.p < b.p; });
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i].prob < 0.5 && pts[i + 1].prob >= 0.5) {
        const double t =
            (0.5 - pts[i].prob) / (pts[i + 1].prob - pts[i].prob);
        const double lp = std::log2(static_cast<double>(pts[i].p));
        const double lp1 = std::log2(static_cast<double>(pts[i + 1].p));
        const double crossing = lp + t * (lp1 - lp);
        const double m = static_cast<double>(std::get<2>(key));
        const double k = static_cast<double>(std::get<1>(key));
        acc += crossing - std::log2(1.0 + k / m);
        ++count;
        break;
      }
    }
  }
  if (count == 0) return std::nullopt;
  return std::exp2(acc / count);
}

std::string phase_csv_string(const PhaseGridResult& result) {
  std::string out = "n,k,m,p,trials,successes,probability,mean_iters,mean_seconds\n";
  for (const auto& c : result.cells) {
    out += format_number(c.n) + ',' + format_number(c.k) + ',' +
           format_number(c.m) + ',' + format_number(c.p) + ',' +
           format_number(c.trials) + ',' + format_number(c.successes) + ',' +
           format_number(c.probability) + ',' +
           format_number(c.mean_iterations) + ',' +
           format_number(c.mean_seconds) + '\n';
  }
  return out;
}

void emit_phase_csv(const PhaseGridResult& result,
                    const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open for writing: " + path.string());
  file << phase_csv_string(result);
  if (!file) throw IoError("write failed: " + path.string());
}

PhaseGridResult parse_phase_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "n,k,m,p,trials,successes,probability,mean_iters,mean_seconds")
    throw IoError("phase CSV: missing or malformed header");

  const auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = s.find(',', start);
      fields.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return fields;
  };
  const auto to_double = [](const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw IoError("phase CSV: bad number '" + s + "'");
    return v;
  };
  const auto to_index = [&](const std::string& s) {
    return static_cast<Eigen::Index>(to_double(s));
  };

  PhaseGridResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != 9) throw IoError("phase CSV: wrong field count");
    PhaseCell c;
    c.n = to_index(fields[0]);
    c.k = to_index(fields[1]);
    c.m = to_index(fields[2]);
    c.p = to_index(fields[3]);
    c.trials = static_cast<int>(to_index(fields[4]));
    c.successes = static_cast<int>(to_index(fields[5]));
    c.probability = to_double(fields[6]);
    c.mean_iterations = to_double(fields[7]);
    c.mean_seconds = to_double(fields[8]);
    result.cells.push_back(c);
  }
  return result;
}

}  // namespace blindcal
