#include "riscrlb/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace riscrlb {

namespace {

using std::complex;

constexpr double kAngleMargin = 1e-6;

double clamp_open(double value, double lo, double hi) {
    return std::clamp(value, lo + kAngleMargin, hi - kAngleMargin);
}

/// Stacked mean vector [H x(1); ...; H x(L)] for the given parameters.
Eigen::VectorXcd mean_vector(const ParamVector& params, const PhaseVector& phases,
                             const PilotMatrix& pilot, const LocalizationScenario& scenario) {
    const PathAngles angles = params.to_angles(PathAngles::from_geometry(scenario.geometry).aod);
    const Eigen::MatrixXcd channel =
        assemble_channel(angles, PathGains{params.gains}, phases, scenario.array);
    const int n_rx = scenario.array.n_rx;
    Eigen::VectorXcd mu(static_cast<Eigen::Index>(pilot.slots()) * n_rx);
    for (int l = 0; l < pilot.slots(); ++l) {
        mu.segment(static_cast<Eigen::Index>(l) * n_rx, n_rx) = channel * pilot.x.col(l);
    }
    return mu;
}

/// Per-path transmit-side scalars g_i(l) = a_t(aod_i)^H x(l); fixed during
/// the grid search because the AoD side is known.
Eigen::MatrixXcd tx_projections(const LocalizationScenario& scenario, const PilotMatrix& pilot) {
    const PathAngles angles = PathAngles::from_geometry(scenario.geometry);
    const int n = angles.num_paths();
    Eigen::MatrixXcd g(n, pilot.slots());
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXcd at =
            array_response_tx(angles.aod[i].elevation, angles.aod[i].azimuth, scenario.array);
        for (int l = 0; l < pilot.slots(); ++l) {
            g(i, l) = at.dot(pilot.x.col(l));
        }
    }
    return g;
}

/// Stacked path signature c_i: block l = e^{j rho_i} a_r(aoa_i) g_i(l).
Eigen::VectorXcd path_signature(int path, const AoaPair& aoa, const Eigen::MatrixXcd& tx_proj,
                                const PhaseVector& phases, const LocalizationScenario& scenario,
                                int slots) {
    const Eigen::VectorXcd ar = array_response_rx(aoa.elevation, aoa.azimuth, scenario.array);
    const int n_rx = scenario.array.n_rx;
    Eigen::VectorXcd c(static_cast<Eigen::Index>(slots) * n_rx);
    const complex<double> phase = std::polar(1.0, phases[path]);
    for (int l = 0; l < slots; ++l) {
        c.segment(static_cast<Eigen::Index>(l) * n_rx, n_rx) = phase * tx_proj(path, l) * ar;
    }
    return c;
}

struct GridAxis {
    std::vector<double> values;
};

GridAxis make_axis(double hi, double resolution) {
    GridAxis axis;
    for (double v = resolution; v < hi - kAngleMargin; v += resolution) {
        axis.values.push_back(v);
    }
    return axis;
}

struct GridBest {
    AoaPair aoa;
    complex<double> gain{0.0, 0.0};
    double residual_sq = 0.0;
};

/// Best (elevation, azimuth, gain) for one path against the residual of the
/// others. The likelihood depends on the angles only through
/// omega = sin(elev) sin(azim), so candidates are scored through the scalar
/// u(omega) = sum_m e^{-j m k omega} t_m with t_m = sum_l conj(g_i(l)) r_l[m].
GridBest grid_search_path(int path, const Eigen::VectorXcd& residual, const Eigen::MatrixXcd& tx_proj,
                          const PhaseVector& phases, const LocalizationScenario& scenario,
                          int slots, const GridAxis& elev_axis, const GridAxis& azim_axis) {
    const int n_rx = scenario.array.n_rx;
    const double k = scenario.array.k();
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(n_rx);
    double g_power = 0.0;
    for (int l = 0; l < slots; ++l) {
        t += std::conj(tx_proj(path, l)) * residual.segment(static_cast<Eigen::Index>(l) * n_rx, n_rx);
        g_power += std::norm(tx_proj(path, l));
    }
    const double signature_sq = n_rx * g_power;
    const double residual_sq = residual.squaredNorm();

    GridBest best;
    best.residual_sq = residual_sq;
    if (signature_sq <= 0.0) {
        best.aoa = {elev_axis.values.front(), azim_axis.values.front()};
        return best;
    }
    double best_gain_sq = -1.0;
    for (double elev : elev_axis.values) {
        const double sin_elev = std::sin(elev);
        for (double azim : azim_axis.values) {
            const double omega = sin_elev * std::sin(azim);
            complex<double> u{0.0, 0.0};
            for (int m = 0; m < n_rx; ++m) {
                u += std::polar(1.0, -m * k * omega) * t[m];
            }
            const double projected = std::norm(u) / signature_sq;
            if (projected > best_gain_sq) {
                best_gain_sq = projected;
                best.aoa = {elev, azim};
                best.gain = std::polar(1.0, -phases[path]) * u / signature_sq;
                best.residual_sq = residual_sq - std::norm(u) / signature_sq;
            }
        }
    }
    return best;
}

ParamVector grid_ml_estimate(const EstimatorSpec& spec, const Eigen::VectorXcd& y,
                             const LocalizationScenario& scenario, const PhaseVector& phases,
                             const PilotMatrix& pilot) {
    const int n = scenario.geometry.num_paths();
    if (n > kGridMlMaxPaths) {
        throw GridTooLarge("grid_ml supports at most 4 paths");
    }
    if (!(spec.grid_resolution > 0.0)) {
        throw ConfigError("grid resolution must be positive");
    }
    constexpr double half_pi = std::numbers::pi / 2.0;
    const GridAxis elev_axis = make_axis(half_pi, spec.grid_resolution);
    const GridAxis azim_axis = make_axis(std::numbers::pi, spec.grid_resolution);
    const int slots = pilot.slots();
    const Eigen::MatrixXcd tx_proj = tx_projections(scenario, pilot);

    std::vector<AoaPair> aoa(n);
    Eigen::VectorXcd gains = Eigen::VectorXcd::Zero(n);
    auto signature = [&](int i) {
        return path_signature(i, aoa[i], tx_proj, phases, scenario, slots);
    };

    // Matching-pursuit initialization, then coordinate-descent sweeps.
    Eigen::VectorXcd residual = y;
    for (int i = 0; i < n; ++i) {
        const GridBest best = grid_search_path(i, residual, tx_proj, phases, scenario, slots,
                                               elev_axis, azim_axis);
        aoa[i] = best.aoa;
        gains[i] = best.gain;
        residual -= best.gain * signature(i);
    }
    // Paths are not exchangeable (each carries its own transmit projection
    // and surface phase), so the greedy pursuit can bind a path to the wrong
    // source. Try every reassignment of the found directions to the paths,
    // scoring each by a joint least-squares gain fit, before refining.
    {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<AoaPair> best_aoa = aoa;
        double best_residual_sq = std::numeric_limits<double>::infinity();
        std::vector<AoaPair> candidate(n);
        do {
            for (int i = 0; i < n; ++i) {
                candidate[i] = aoa[perm[i]];
            }
            Eigen::MatrixXcd basis(y.size(), n);
            for (int i = 0; i < n; ++i) {
                basis.col(i) =
                    path_signature(i, candidate[i], tx_proj, phases, scenario, slots);
            }
            const Eigen::VectorXcd fit = basis.colPivHouseholderQr().solve(y);
            const double residual_sq = (y - basis * fit).squaredNorm();
            if (residual_sq < best_residual_sq) {
                best_residual_sq = residual_sq;
                best_aoa = candidate;
                gains = fit;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        aoa = best_aoa;
    }

    for (int sweep = 0; sweep < 3; ++sweep) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXcd others = y;
            for (int j = 0; j < n; ++j) {
                if (j != i) {
                    others -= gains[j] * signature(j);
                }
            }
            const GridBest best = grid_search_path(i, others, tx_proj, phases, scenario, slots,
                                                   elev_axis, azim_axis);
            if (best.aoa.elevation != aoa[i].elevation || best.aoa.azimuth != aoa[i].azimuth) {
                changed = true;
            }
            aoa[i] = best.aoa;
            gains[i] = best.gain;
        }
        if (!changed) {
            break;
        }
    }

    // Joint least-squares refit of all gains at the final angles.
    Eigen::MatrixXcd basis(y.size(), n);
    for (int i = 0; i < n; ++i) {
        basis.col(i) = signature(i);
    }
    gains = basis.colPivHouseholderQr().solve(y);

    ParamVector params;
    params.elevations.resize(n);
    params.azimuths.resize(n);
    params.gains = gains;
    for (int i = 0; i < n; ++i) {
        params.elevations[i] = aoa[i].elevation;
        params.azimuths[i] = aoa[i].azimuth;
    }
    return params;
}

} // namespace

ParamVector LocalizationScenario::true_params() const {
    const PathAngles angles = PathAngles::from_geometry(geometry);
    const int n = angles.num_paths();
    ParamVector params;
    params.elevations.resize(n);
    params.azimuths.resize(n);
    params.gains = gains.h;
    for (int i = 0; i < n; ++i) {
        params.elevations[i] = angles.aoa[i].elevation;
        params.azimuths[i] = angles.aoa[i].azimuth;
    }
    return params;
}

double log_likelihood(const Eigen::VectorXcd& y, const ParamVector& params,
                      const PhaseVector& phases, const PilotMatrix& pilot,
                      double noise_variance, const LocalizationScenario& scenario) {
    const Eigen::VectorXcd mu = mean_vector(params, phases, pilot, scenario);
    if (mu.size() != y.size()) {
        throw DimensionMismatch("received vector length does not match pilot/array dimensions");
    }
    const double quad = (y - mu).squaredNorm() / noise_variance;
    const double log_norm =
        static_cast<double>(y.size()) * std::log(std::numbers::pi * noise_variance);
    return -log_norm - quad;
}

ParamVector estimate(const EstimatorSpec& spec, const Eigen::VectorXcd& y,
                     const LocalizationScenario& scenario, const PhaseVector& phases,
                     const PilotMatrix& pilot) {
    switch (spec.kind) {
    case EstimatorKind::oracle:
        return scenario.true_params();
    case EstimatorKind::perturbed_oracle: {
        ParamVector params = scenario.true_params();
        if (spec.perturbation_scale < 0.0) {
            throw ConfigError("perturbation scale must be non-negative");
        }
        std::mt19937_64 gen(spec.seed);
        std::normal_distribution<double> noise(0.0, 1.0);
        const double scale = spec.perturbation_scale;
        constexpr double half_pi = std::numbers::pi / 2.0;
        for (int i = 0; i < params.num_paths(); ++i) {
            params.elevations[i] =
                clamp_open(params.elevations[i] + scale * noise(gen), 0.0, half_pi);
            params.azimuths[i] =
                clamp_open(params.azimuths[i] + scale * noise(gen), 0.0, std::numbers::pi);
            params.gains[i] += complex<double>(scale * noise(gen), scale * noise(gen));
        }
        return params;
    }
    case EstimatorKind::grid_ml:
        return grid_ml_estimate(spec, y, scenario, phases, pilot);
    }
    throw ConfigError("unknown estimator kind");
}

Position3D recover_position(const ParamVector& params, const std::vector<Position3D>& ris_elements) {
    const int n = params.num_paths();
    if (static_cast<int>(ris_elements.size()) != n) {
        throw DimensionMismatch("RIS element count does not match parameter vector");
    }
    double qx = 0.0;
    double qy = 0.0;
    for (int i = 0; i < n; ++i) {
        const Position3D& s = ris_elements[i];
        const double rho = s.z * std::tan(params.elevations[i]);
        qx += s.x - rho * std::cos(params.azimuths[i]);
        qy += s.y + rho * std::sin(params.azimuths[i]);
    }
    return {qx / n, qy / n, 0.0};
}

} // namespace riscrlb
