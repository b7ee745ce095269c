#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "riscrlb/channel.hpp"
#include "riscrlb/geometry.hpp"

namespace riscrlb {

/// Channel parameter vector: per-path AoA elevations, AoA azimuths and
/// complex gains.
struct ParamVector {
    Eigen::VectorXd elevations;
    Eigen::VectorXd azimuths;
    Eigen::VectorXcd gains;

    int num_paths() const { return static_cast<int>(elevations.size()); }
    PathAngles to_angles(const std::vector<AodPair>& aod) const;
};

/// Per-slot derivative vectors: elev[l].col(i) is the channel-mean derivative
/// kernel w.r.t. the elevation AoA of path i (phase factor e^{j rho_i}
/// excluded), azim[l] the azimuth counterpart.
struct VarpiSet {
    std::vector<Eigen::MatrixXcd> elev; // each n_rx x N
    std::vector<Eigen::MatrixXcd> azim;

    int num_paths() const { return elev.empty() ? 0 : static_cast<int>(elev.front().cols()); }
    int slots() const { return static_cast<int>(elev.size()); }
};

/// Phase-independent core of the position FIM: for each slot the four N x N
/// matrices K^{a,b} with [K^{a,b}(l)]_{m,n} = kappa_{m,n}^{a,b}(l), so that
/// [J_q]_{a,b} = (2/sigma^2) sum_l Re(v^H K^{a,b}(l) v) with v = e^{j rho}.
class KappaTensor {
public:
    KappaTensor(std::array<std::vector<Eigen::MatrixXcd>, 4> blocks, TransformMatrix transform);

    /// a, b in {1, 2}.
    const Eigen::MatrixXcd& block(int a, int b, int slot) const;
    const TransformMatrix& transform() const { return transform_; }
    int num_paths() const { return paths_; }
    int slots() const { return slots_; }

private:
    std::array<std::vector<Eigen::MatrixXcd>, 4> blocks_;
    TransformMatrix transform_;
    int paths_ = 0;
    int slots_ = 0;
};

/// 2x2 position Fisher information with the noise level it was computed at.
struct PositionFim {
    Eigen::Matrix2d j = Eigen::Matrix2d::Zero();
    double noise_variance = 1.0;
    int slots = 0;
};

/// det(J) <= this fraction of the squared matrix scale counts as singular.
inline constexpr double kSingularFimRelTol = 1e-12;

VarpiSet varpi(const PathAngles& angles, const PathGains& gains, const PilotMatrix& pilot,
               const ArrayConfig& cfg);
VarpiSet varpi(const ScenarioGeometry& geometry, const PathGains& gains, const PilotMatrix& pilot,
               const ArrayConfig& cfg);

KappaTensor kappa_tensor(const VarpiSet& varpi_set, const TransformMatrix& transform);

PositionFim position_fim(const KappaTensor& kappa, const PhaseVector& phases, double noise_variance);

/// Trace of the inverse 2x2 position FIM (squared meters).
double crlb(const PositionFim& fim);

/// The 2N x 2N AoA block of the full-parameter FIM, including the 2/sigma^2
/// prefactor; ordering is [elevations..., azimuths...]. Provided as a second
/// route to the position FIM via T * A * T^T.
Eigen::MatrixXd fim_eta_aoa_block(const ScenarioGeometry& geometry, const PathGains& gains,
                                  const PilotMatrix& pilot, const PhaseVector& phases,
                                  const ArrayConfig& cfg, double noise_variance);

} // namespace riscrlb
