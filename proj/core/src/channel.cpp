#include "riscrlb/channel.hpp"

#include <cmath>
#include <random>

namespace riscrlb {

using std::complex;

namespace {

constexpr complex<double> kImag{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXcd steering(double elevation, double azimuth, int n, double k) {
    const double rate = k * std::sin(elevation) * std::sin(azimuth);
    Eigen::VectorXcd a(n);
    for (int m = 0; m < n; ++m) {
        a[m] = std::polar(1.0, m * rate);
    }
    return a;
}

void check_path_count(int paths, const PathGains& gains) {
    if (gains.num_paths() != paths) {
        throw DimensionMismatch("gain vector length does not match path count");
    }
}

} // namespace

PhaseVector::PhaseVector(Eigen::VectorXd phases) : values_(std::move(phases)) {
    for (int i = 0; i < values_.size(); ++i) {
        values_[i] = wrap(values_[i]);
    }
}

double PhaseVector::wrap(double phase) {
    double w = std::fmod(phase, kTwoPi);
    if (w < 0.0) {
        w += kTwoPi;
    }
    // fmod of a tiny negative can round back up to 2*pi
    if (w >= kTwoPi) {
        w = 0.0;
    }
    return w;
}

Eigen::VectorXcd PhaseVector::unit_phasors() const {
    Eigen::VectorXcd v(values_.size());
    for (int i = 0; i < values_.size(); ++i) {
        v[i] = std::polar(1.0, values_[i]);
    }
    return v;
}

PathAngles PathAngles::from_geometry(const ScenarioGeometry& geometry) {
    PathAngles angles;
    angles.aoa.reserve(geometry.num_paths());
    angles.aod.reserve(geometry.num_paths());
    for (const auto& s : geometry.ris_elements()) {
        angles.aoa.push_back(compute_aoa(geometry.ms_pos(), s));
        angles.aod.push_back(compute_aod(geometry.bs_pos(), s));
    }
    return angles;
}

PathTrig PathTrig::from_angles(const PathAngles& angles, const ArrayConfig& cfg) {
    const int n = angles.num_paths();
    PathTrig trig;
    trig.xi.resize(n);
    trig.zeta.resize(n);
    const double k = cfg.k();
    for (int i = 0; i < n; ++i) {
        trig.xi[i] = k * std::sin(angles.aoa[i].elevation) * std::sin(angles.aoa[i].azimuth);
        trig.zeta[i] = k * std::sin(angles.aod[i].elevation) * std::sin(angles.aod[i].azimuth);
    }
    return trig;
}

Eigen::VectorXcd array_response_tx(double elevation, double azimuth, const ArrayConfig& cfg) {
    return steering(elevation, azimuth, cfg.n_tx, cfg.k());
}

Eigen::VectorXcd array_response_rx(double elevation, double azimuth, const ArrayConfig& cfg) {
    return steering(elevation, azimuth, cfg.n_rx, cfg.k());
}

Eigen::MatrixXcd assemble_channel(const PathAngles& angles, const PathGains& gains,
                                  const PhaseVector& phases, const ArrayConfig& cfg) {
    const int n = angles.num_paths();
    check_path_count(n, gains);
    if (phases.size() != n) {
        throw DimensionMismatch("phase vector length does not match path count");
    }
    Eigen::MatrixXcd channel = Eigen::MatrixXcd::Zero(cfg.n_rx, cfg.n_tx);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXcd ar = array_response_rx(angles.aoa[i].elevation, angles.aoa[i].azimuth, cfg);
        const Eigen::VectorXcd at = array_response_tx(angles.aod[i].elevation, angles.aod[i].azimuth, cfg);
        channel.noalias() += (gains.h[i] * std::polar(1.0, phases[i])) * ar * at.adjoint();
    }
    return channel;
}

Eigen::MatrixXcd assemble_channel(const ScenarioGeometry& geometry, const PathGains& gains,
                                  const PhaseVector& phases, const ArrayConfig& cfg) {
    return assemble_channel(PathAngles::from_geometry(geometry), gains, phases, cfg);
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> xi_matrices(int path, const PathAngles& angles,
                                                          const PathGains& gains,
                                                          const ArrayConfig& cfg) {
    const int n = angles.num_paths();
    if (path < 0 || path >= n) {
        throw IndexOutOfRange("path index out of range");
    }
    check_path_count(n, gains);
    const double k = cfg.k();
    const AoaPair& aoa = angles.aoa[path];
    const PathTrig trig = PathTrig::from_angles(angles, cfg);
    const double xi = trig.xi[path];
    const double zeta = trig.zeta[path];
    const complex<double> h = gains.h[path];

    Eigen::MatrixXcd d_elev(cfg.n_rx, cfg.n_tx);
    Eigen::MatrixXcd d_azim(cfg.n_rx, cfg.n_tx);
    const double elev_factor = k * std::sin(aoa.azimuth) * std::cos(aoa.elevation);
    const double azim_factor = k * std::sin(aoa.elevation) * std::cos(aoa.azimuth);
    for (int m = 0; m < cfg.n_rx; ++m) {
        for (int t = 0; t < cfg.n_tx; ++t) {
            const complex<double> phase = std::polar(1.0, m * xi - t * zeta);
            d_elev(m, t) = h * kImag * static_cast<double>(m) * elev_factor * phase;
            d_azim(m, t) = h * kImag * static_cast<double>(m) * azim_factor * phase;
        }
    }
    return {std::move(d_elev), std::move(d_azim)};
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> xi_matrices(int path, const ScenarioGeometry& geometry,
                                                          const PathGains& gains,
                                                          const ArrayConfig& cfg) {
    return xi_matrices(path, PathAngles::from_geometry(geometry), gains, cfg);
}

Eigen::VectorXcd synthesize_rx(const PilotMatrix& pilot, const Eigen::MatrixXcd& channel,
                               const NoiseModel& noise) {
    if (pilot.x.rows() != channel.cols()) {
        throw DimensionMismatch("pilot rows must match channel columns");
    }
    const int slots = pilot.slots();
    const int n_rx = static_cast<int>(channel.rows());
    Eigen::VectorXcd y(static_cast<Eigen::Index>(slots) * n_rx);
    for (int l = 0; l < slots; ++l) {
        y.segment(static_cast<Eigen::Index>(l) * n_rx, n_rx) = channel * pilot.x.col(l);
    }
    if (noise.enabled) {
        std::mt19937_64 gen(noise.seed);
        std::normal_distribution<double> component(0.0, std::sqrt(noise.variance / 2.0));
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double re = component(gen);
            const double im = component(gen);
            y[i] += complex<double>(re, im);
        }
    }
    return y;
}

PilotMatrix make_pilot(const ArrayConfig& cfg, int slots, double power, std::uint64_t seed,
                       PilotMode mode) {
    if (slots < 1 || !(power > 0.0)) {
        throw ConfigError("pilot requires slots >= 1 and positive power");
    }
    if (mode == PilotMode::steered) {
        throw ConfigError("steered pilots need a departure rate; use make_steered_pilot");
    }
    PilotMatrix pilot;
    pilot.power = power;
    pilot.x.resize(cfg.n_tx, slots);
    const double amplitude = std::sqrt(power / cfg.n_tx);
    if (mode == PilotMode::constant) {
        pilot.x.setConstant(complex<double>(amplitude, 0.0));
        return pilot;
    }
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    for (int l = 0; l < slots; ++l) {
        for (int t = 0; t < cfg.n_tx; ++t) {
            pilot.x(t, l) = std::polar(amplitude, phase(gen));
        }
    }
    return pilot;
}

PilotMatrix make_steered_pilot(const ArrayConfig& cfg, int slots, double power, double zeta) {
    if (slots < 1 || !(power > 0.0)) {
        throw ConfigError("pilot requires slots >= 1 and positive power");
    }
    PilotMatrix pilot;
    pilot.power = power;
    pilot.x.resize(cfg.n_tx, slots);
    const double amplitude = std::sqrt(power / cfg.n_tx);
    for (int t = 0; t < cfg.n_tx; ++t) {
        const complex<double> entry = std::polar(amplitude, t * zeta);
        for (int l = 0; l < slots; ++l) {
            pilot.x(t, l) = entry;
        }
    }
    return pilot;
}

double mean_departure_rate(const ScenarioGeometry& geometry, const ArrayConfig& cfg) {
    const PathAngles angles = PathAngles::from_geometry(geometry);
    const PathTrig trig = PathTrig::from_angles(angles, cfg);
    return trig.zeta.mean();
}

} // namespace riscrlb
