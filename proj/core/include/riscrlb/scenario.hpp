#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "riscrlb/channel.hpp"
#include "riscrlb/geometry.hpp"

namespace riscrlb {

/// Experiment configuration. JSON round-trips exactly; unknown keys are a
/// hard error. The defaults are the shipped reference scenario: BS at the
/// origin, MS at (50, 100), a 5x5 RIS anchored at (-20, 50, 20), half-wave
/// 10-antenna ULAs at 0.006 m wavelength.
struct ScenarioConfig {
    double wavelength = 0.006;       // meters
    double antenna_spacing = 0.003;  // meters
    int n_tx = 10;
    int n_rx = 10;
    Position3D bs_pos{0.0, 0.0, 0.0};
    Position3D ms_pos{50.0, 100.0, 0.0};
    RisLayout ris{5, 5, 0.1, {-20.0, 50.0, 20.0}};
    std::vector<double> snr_db{30.0, 40.0};
    std::vector<int> slots{1};
    std::uint64_t seed = 1;
    // "steered" (default) points the pilot at the surface for full transmit
    // array gain; "random" draws seeded unit-modulus phases per slot;
    // "constant" is the all-ones pilot.
    std::string pilot_mode = "steered";

    // Sweep-experiment knobs.
    std::vector<int> ris_sides{4, 5, 6};            // N = side^2 in {16, 25, 36}
    std::array<double, 2> ms_x_interval{0.0, 100.0};
    std::array<double, 2> ms_y_interval{50.0, 150.0};
    int position_steps = 11;
    int seeds = 20;

    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig load(const std::string& path);
    std::string to_json_text() const;

    ArrayConfig array() const;
    PilotMode pilot() const;

    /// sigma^2 = 1 and p_BS = n_rx * 10^(snr/10).
    double transmit_power(double snr_db_value) const;
    static constexpr double noise_variance() { return 1.0; }

    void validate() const;
};

/// Pilot for the configured mode: a steered pilot points at the mean
/// departure rate of the given geometry; the seeded modes ignore the geometry.
PilotMatrix build_pilot(const ScenarioConfig& cfg, const ScenarioGeometry& geometry, int slots,
                        double power, std::uint64_t seed);

} // namespace riscrlb
