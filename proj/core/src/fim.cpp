#include "riscrlb/fim.hpp"

#include <cmath>
#include <complex>
#include <utility>

namespace riscrlb {

namespace {

int block_index(int a, int b) {
    if (a < 1 || a > 2 || b < 1 || b > 2) {
        throw IndexOutOfRange("kappa block index must be 1 or 2");
    }
    return (a - 1) * 2 + (b - 1);
}

} // namespace

PathAngles ParamVector::to_angles(const std::vector<AodPair>& aod) const {
    const int n = num_paths();
    if (static_cast<int>(aod.size()) != n || azimuths.size() != n || gains.size() != n) {
        throw DimensionMismatch("parameter vector blocks have inconsistent lengths");
    }
    PathAngles angles;
    angles.aoa.reserve(n);
    for (int i = 0; i < n; ++i) {
        angles.aoa.push_back({elevations[i], azimuths[i]});
    }
    angles.aod = aod;
    return angles;
}

KappaTensor::KappaTensor(std::array<std::vector<Eigen::MatrixXcd>, 4> blocks, TransformMatrix transform)
    : blocks_(std::move(blocks)), transform_(std::move(transform)) {
    slots_ = static_cast<int>(blocks_[0].size());
    paths_ = slots_ > 0 ? static_cast<int>(blocks_[0][0].rows()) : 0;
}

const Eigen::MatrixXcd& KappaTensor::block(int a, int b, int slot) const {
    if (slot < 0 || slot >= slots_) {
        throw IndexOutOfRange("kappa slot index out of range");
    }
    return blocks_[block_index(a, b)][slot];
}

VarpiSet varpi(const PathAngles& angles, const PathGains& gains, const PilotMatrix& pilot,
               const ArrayConfig& cfg) {
    const int n = angles.num_paths();
    const int slots = pilot.slots();
    if (pilot.x.rows() != cfg.n_tx) {
        throw DimensionMismatch("pilot rows must match n_tx");
    }
    VarpiSet set;
    set.elev.assign(slots, Eigen::MatrixXcd(cfg.n_rx, n));
    set.azim.assign(slots, Eigen::MatrixXcd(cfg.n_rx, n));
    for (int i = 0; i < n; ++i) {
        const auto [d_elev, d_azim] = xi_matrices(i, angles, gains, cfg);
        for (int l = 0; l < slots; ++l) {
            set.elev[l].col(i) = d_elev * pilot.x.col(l);
            set.azim[l].col(i) = d_azim * pilot.x.col(l);
        }
    }
    return set;
}

VarpiSet varpi(const ScenarioGeometry& geometry, const PathGains& gains, const PilotMatrix& pilot,
               const ArrayConfig& cfg) {
    return varpi(PathAngles::from_geometry(geometry), gains, pilot, cfg);
}

KappaTensor kappa_tensor(const VarpiSet& varpi_set, const TransformMatrix& transform) {
    const int n = varpi_set.num_paths();
    const int slots = varpi_set.slots();
    if (transform.num_paths() != n) {
        throw DimensionMismatch("transform matrix path count does not match varpi set");
    }
    // Coefficient rows: alpha from E, beta from F, per axis (complex-typed so
    // they can scale the complex Gram matrices).
    const Eigen::VectorXcd alpha_x = transform.elevation_cols.row(0).transpose().cast<std::complex<double>>();
    const Eigen::VectorXcd alpha_y = transform.elevation_cols.row(1).transpose().cast<std::complex<double>>();
    const Eigen::VectorXcd beta_x = transform.azimuth_cols.row(0).transpose().cast<std::complex<double>>();
    const Eigen::VectorXcd beta_y = transform.azimuth_cols.row(1).transpose().cast<std::complex<double>>();

    std::array<std::vector<Eigen::MatrixXcd>, 4> blocks;
    for (auto& b : blocks) {
        b.assign(slots, Eigen::MatrixXcd(n, n));
    }
    for (int l = 0; l < slots; ++l) {
        // Gram matrices of the derivative vectors: (m,n) entry = w_m^H w_n.
        const Eigen::MatrixXcd gram_ee = varpi_set.elev[l].adjoint() * varpi_set.elev[l];
        const Eigen::MatrixXcd gram_ae = varpi_set.azim[l].adjoint() * varpi_set.elev[l];
        const Eigen::MatrixXcd gram_ea = varpi_set.elev[l].adjoint() * varpi_set.azim[l];
        const Eigen::MatrixXcd gram_aa = varpi_set.azim[l].adjoint() * varpi_set.azim[l];
        for (int a = 1; a <= 2; ++a) {
            const Eigen::VectorXcd& alpha_m = (a == 1) ? alpha_x : alpha_y;
            const Eigen::VectorXcd& beta_m = (a == 1) ? beta_x : beta_y;
            for (int b = 1; b <= 2; ++b) {
                const Eigen::VectorXcd& alpha_n = (b == 1) ? alpha_x : alpha_y;
                const Eigen::VectorXcd& beta_n = (b == 1) ? beta_x : beta_y;
                Eigen::MatrixXcd& out = blocks[block_index(a, b)][l];
                out = alpha_m.asDiagonal() * gram_ee * alpha_n.asDiagonal();
                out.noalias() += beta_m.asDiagonal() * gram_ae * alpha_n.asDiagonal();
                out.noalias() += alpha_m.asDiagonal() * gram_ea * beta_n.asDiagonal();
                out.noalias() += beta_m.asDiagonal() * gram_aa * beta_n.asDiagonal();
            }
        }
    }
    return KappaTensor(std::move(blocks), transform);
}

PositionFim position_fim(const KappaTensor& kappa, const PhaseVector& phases, double noise_variance) {
    if (phases.size() != kappa.num_paths()) {
        throw DimensionMismatch("phase vector length does not match kappa tensor");
    }
    if (!(noise_variance > 0.0)) {
        throw ConfigError("noise variance must be positive");
    }
    const Eigen::VectorXcd v = phases.unit_phasors();
    PositionFim fim;
    fim.noise_variance = noise_variance;
    fim.slots = kappa.slots();
    const double scale = 2.0 / noise_variance;
    for (int l = 0; l < kappa.slots(); ++l) {
        for (int a = 1; a <= 2; ++a) {
            for (int b = 1; b <= 2; ++b) {
                const std::complex<double> quad = v.dot(kappa.block(a, b, l) * v);
                fim.j(a - 1, b - 1) += scale * quad.real();
            }
        }
    }
    return fim;
}

double crlb(const PositionFim& fim) {
    const double det = fim.j(0, 0) * fim.j(1, 1) - fim.j(0, 1) * fim.j(1, 0);
    const double scale = fim.j.cwiseAbs().maxCoeff();
    if (det <= kSingularFimRelTol * scale * scale) {
        throw SingularFim("position FIM is singular relative to its scale");
    }
    return (fim.j(0, 0) + fim.j(1, 1)) / det;
}

Eigen::MatrixXd fim_eta_aoa_block(const ScenarioGeometry& geometry, const PathGains& gains,
                                  const PilotMatrix& pilot, const PhaseVector& phases,
                                  const ArrayConfig& cfg, double noise_variance) {
    const int n = geometry.num_paths();
    if (phases.size() != n) {
        throw DimensionMismatch("phase vector length does not match geometry");
    }
    const VarpiSet set = varpi(geometry, gains, pilot, cfg);
    const Eigen::VectorXcd v = phases.unit_phasors();
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    const double scale = 2.0 / noise_variance;
    for (int l = 0; l < set.slots(); ++l) {
        // Stack [d mu / d elev, d mu / d azim] with phase factors applied.
        Eigen::MatrixXcd d(cfg.n_rx, 2 * n);
        d.leftCols(n) = set.elev[l] * v.asDiagonal();
        d.rightCols(n) = set.azim[l] * v.asDiagonal();
        block += scale * (d.adjoint() * d).real();
    }
    return block;
}

} // namespace riscrlb
