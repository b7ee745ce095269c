#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "riscrlb/channel.hpp"
#include "riscrlb/fim.hpp"

namespace riscrlb {

/// Everything fixed about one localization problem instance: the true
/// placement and gains, the array, and the noise level.
struct LocalizationScenario {
    ScenarioGeometry geometry;
    PathGains gains;
    ArrayConfig array;
    double noise_variance = 1.0;

    ParamVector true_params() const;
};

enum class EstimatorKind { oracle, perturbed_oracle, grid_ml };

/// Stand-in estimators for the alternating loop. `oracle` returns the truth,
/// `perturbed_oracle` adds seeded Gaussian noise of `perturbation_scale` to
/// each angle and gain component (scaled by perturbation_decay^iteration when
/// driven by the alternating loop), `grid_ml` does a per-path coordinate
/// descent over an (elevation, azimuth) grid with gains refit by least
/// squares. grid_ml is limited to N <= 4 paths.
struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::oracle;
    double perturbation_scale = 0.0;
    double perturbation_decay = 1.0;
    double grid_resolution = 1e-2; // radians
    std::uint64_t seed = 0;
};

inline constexpr int kGridMlMaxPaths = 4;

/// Log-density of y under the circularly-symmetric complex Gaussian with mean
/// blocks H(eta, rho) x(l) and covariance sigma^2 I:
/// -L*N_r*ln(pi*sigma^2) - ||y - mu||^2 / sigma^2.
double log_likelihood(const Eigen::VectorXcd& y, const ParamVector& params,
                      const PhaseVector& phases, const PilotMatrix& pilot,
                      double noise_variance, const LocalizationScenario& scenario);

ParamVector estimate(const EstimatorSpec& spec, const Eigen::VectorXcd& y,
                     const LocalizationScenario& scenario, const PhaseVector& phases,
                     const PilotMatrix& pilot);

/// Recover the horizontal MS position from estimated AoA pairs, assuming the
/// MS lies on the +y side of the RIS (true throughout the shipped scenarios;
/// a single AoA pair cannot distinguish the two mirror positions).
Position3D recover_position(const ParamVector& params, const std::vector<Position3D>& ris_elements);

} // namespace riscrlb
