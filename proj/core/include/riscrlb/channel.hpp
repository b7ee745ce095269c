#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riscrlb/errors.hpp"
#include "riscrlb/geometry.hpp"

namespace riscrlb {

/// ULA parameters at BS and MS. The phase progression constant k = 2*pi*d/lambda
/// is derived, never stored.
struct ArrayConfig {
    int n_tx = 1;
    int n_rx = 1;
    double antenna_spacing = 0.003; // d, meters
    double wavelength = 0.006;      // lambda, meters

    double k() const { return 2.0 * std::numbers::pi * antenna_spacing / wavelength; }
};

/// Complex propagation gains of the N reflection paths.
struct PathGains {
    Eigen::VectorXcd h;

    int num_paths() const { return static_cast<int>(h.size()); }
};

/// RIS phase shifts, stored wrapped into [0, 2*pi).
class PhaseVector {
public:
    PhaseVector() = default;
    explicit PhaseVector(Eigen::VectorXd phases);

    static double wrap(double phase);

    const Eigen::VectorXd& values() const { return values_; }
    double operator[](int i) const { return values_[i]; }
    int size() const { return static_cast<int>(values_.size()); }

    /// Unit-modulus vector e^{j rho}.
    Eigen::VectorXcd unit_phasors() const;

private:
    Eigen::VectorXd values_;
};

/// AoA/AoD pairs of all N paths; the angle-level view of a ScenarioGeometry
/// that estimators can populate directly from an estimate.
struct PathAngles {
    std::vector<AoaPair> aoa;
    std::vector<AodPair> aod;

    static PathAngles from_geometry(const ScenarioGeometry& geometry);
    int num_paths() const { return static_cast<int>(aoa.size()); }
};

/// Per-path phase progression rates: xi_i = k sin(aoa elev) sin(aoa azim),
/// zeta_i = k sin(aod elev) sin(aod azim).
struct PathTrig {
    Eigen::VectorXd xi;
    Eigen::VectorXd zeta;

    static PathTrig from_angles(const PathAngles& angles, const ArrayConfig& cfg);
};

enum class PilotMode { random, constant, steered };

/// Transmit pilot block X (n_tx x L); every slot satisfies x^H x = power.
struct PilotMatrix {
    Eigen::MatrixXcd x;
    double power = 1.0;

    int slots() const { return static_cast<int>(x.cols()); }
};

struct NoiseModel {
    double variance = 1.0; // sigma^2 per receive antenna, linear
    std::uint64_t seed = 0;
    bool enabled = true;
};

Eigen::VectorXcd array_response_tx(double elevation, double azimuth, const ArrayConfig& cfg);
Eigen::VectorXcd array_response_rx(double elevation, double azimuth, const ArrayConfig& cfg);

/// End-to-end N_r x N_t channel Lambda_r diag(h) diag(e^{j rho}) Lambda_t^H.
Eigen::MatrixXcd assemble_channel(const PathAngles& angles, const PathGains& gains,
                                  const PhaseVector& phases, const ArrayConfig& cfg);
Eigen::MatrixXcd assemble_channel(const ScenarioGeometry& geometry, const PathGains& gains,
                                  const PhaseVector& phases, const ArrayConfig& cfg);

/// Channel derivative kernels for path i (0-based): entry (m,n) of the first
/// matrix is h_i j m k sin(azim) cos(elev) e^{j(m xi_i - n zeta_i)} (m, n
/// 0-based), of the second the same with sin/cos swapped between the angles.
/// The channel derivative w.r.t. the AoA angles is e^{j rho_i} times these.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> xi_matrices(int path, const PathAngles& angles,
                                                          const PathGains& gains,
                                                          const ArrayConfig& cfg);
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> xi_matrices(int path, const ScenarioGeometry& geometry,
                                                          const PathGains& gains,
                                                          const ArrayConfig& cfg);

/// Stacked noisy receive vector [H x(1); ...; H x(L)] with i.i.d. CN(0, sigma^2)
/// noise per slot and antenna (real/imag parts each N(0, sigma^2/2)).
Eigen::VectorXcd synthesize_rx(const PilotMatrix& pilot, const Eigen::MatrixXcd& channel,
                               const NoiseModel& noise);

PilotMatrix make_pilot(const ArrayConfig& cfg, int slots, double power, std::uint64_t seed,
                       PilotMode mode = PilotMode::random);

/// Pilot steered along the transmit phase progression rate zeta, identical in
/// every slot: x_t(l) = sqrt(power / n_tx) e^{j t zeta}. This is the
/// unit-modulus pilot maximizing |a_tx(zeta)^H x(l)|, i.e. full transmit array
/// gain toward the departure direction with that progression rate.
PilotMatrix make_steered_pilot(const ArrayConfig& cfg, int slots, double power, double zeta);

/// Mean transmit phase progression rate toward the surface: the average of
/// zeta_i = k sin(aod elev) sin(aod azim) over all paths.
double mean_departure_rate(const ScenarioGeometry& geometry, const ArrayConfig& cfg);

} // namespace riscrlb
