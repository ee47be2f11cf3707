#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "blindcal/phase.hpp"
#include "blindcal/sensing.hpp"
#include "blindcal/solver.hpp"

namespace blindcal {

// Problem instances serialize either in full (truth, matrices, and snapshots
// as flat row-major arrays) or compactly as (dims, rho, seed) only, from
// which loading regenerates the identical instance bit for bit.
nlohmann::json instance_to_json(const ProblemInstance& inst, bool compact);
ProblemInstance instance_from_json(const nlohmann::json& j);
void save_instance(const ProblemInstance& inst,
                   const std::filesystem::path& path, bool compact);
ProblemInstance load_instance(const std::filesystem::path& path);

nlohmann::json result_to_json(const SolverResult& result);
SolverResult result_from_json(const nlohmann::json& j);
void save_result(const SolverResult& result, const std::filesystem::path& path);
SolverResult load_result(const std::filesystem::path& path);

nlohmann::json phase_spec_to_json(const PhaseGridSpec& spec);
PhaseGridSpec phase_spec_from_json(const nlohmann::json& j);
PhaseGridSpec load_phase_spec(const std::filesystem::path& path);

}  // namespace blindcal
