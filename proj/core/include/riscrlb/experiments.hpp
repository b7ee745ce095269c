#pragma once

#include <optional>
#include <string>

#include "riscrlb/beamforming.hpp"
#include "riscrlb/scenario.hpp"

namespace riscrlb {

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<int> seeds_override;
    bool timing = false;   // fill wall_ms (breaks byte-identical reruns)
    bool parallel = true;  // evaluate independent cells on a thread pool
    GdmConfig gdm{};
};

enum class ExperimentKind { convergence, sweep, position_sweep };

/// CSV header shared by all experiments. Aggregate rows (seed-averaged) carry
/// seed = -1; sweep rows carry iteration = -1; position rows fill axis/coord.
std::string csv_header();

/// Per-iteration GDM traces for each (seed, SNR) cell of the reference
/// scenario; iteration 0 is the unoptimized random initialization.
std::string run_convergence(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Optimized CRLB over the (slots x ris_sides x snr_db) grid, per seed plus
/// seed-averaged aggregate rows.
std::string run_sweep(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Optimized CRLB as the MS moves along the configured x and y intervals,
/// per RIS size, per seed plus aggregate rows.
std::string run_position_sweep(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Self-contained gnuplot script rendering the given CSV.
std::string plot_script_for(const std::string& csv_path, ExperimentKind kind);

/// Max relative error between the closed-form CRLB gradient and central
/// finite differences over `instances` random instances (the grad-check CLI).
double gradient_check(std::uint64_t seed, int instances);

} // namespace riscrlb
