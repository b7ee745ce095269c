#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "riscrlb/channel.hpp"
#include "riscrlb/geometry.hpp"

using namespace riscrlb;
using std::complex;

namespace {

const Position3D kBs{0.0, 0.0, 0.0};
const Position3D kMs{50.0, 100.0, 0.0};

ScenarioGeometry small_geometry() {
    RisLayout layout;
    layout.rows = 2;
    layout.cols = 2;
    layout.element_spacing = 0.1;
    layout.reference = {-20.0, 50.0, 20.0};
    return {kBs, kMs, expand_layout(layout)};
}

Eigen::VectorXcd random_gains(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> comp(0.0, std::sqrt(0.5));
    Eigen::VectorXcd h(n);
    for (int i = 0; i < n; ++i) {
        const double re = comp(gen);
        const double im = comp(gen);
        h[i] = {re, im};
    }
    return h;
}

PhaseVector random_phases(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) {
        p[i] = uni(gen);
    }
    return PhaseVector(p);
}

} // namespace

TEST_SUITE_BEGIN("channel");

TEST_CASE("array response entries are unit modulus with the frozen rate") {
    const ArrayConfig cfg{4, 4, 0.003, 0.006};
    CHECK(cfg.k() == doctest::Approx(std::numbers::pi).epsilon(1e-15));
    // Reference AoA of the path MS(50,100,0) <- element(-20,50,20).
    const Eigen::VectorXcd a = array_response_rx(1.3423593250285661, 2.5213431676069717, cfg);
    REQUIRE(a.size() == 4);
    const double xi = 1.7785766061485508; // k sin(elev) sin(azim)
    for (int m = 0; m < 4; ++m) {
        CHECK(std::abs(a[m]) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::arg(a[m]) ==
              doctest::Approx(std::remainder(m * xi, 2.0 * std::numbers::pi)).epsilon(1e-12));
    }
}

TEST_CASE("assembled channel equals the explicit per-entry summation") {
    const ScenarioGeometry geometry = small_geometry();
    const ArrayConfig cfg{5, 6, 0.003, 0.006};
    const int n = geometry.num_paths();
    const PathGains gains{random_gains(n, 21)};
    const PhaseVector phases = random_phases(n, 22);
    const Eigen::MatrixXcd channel = assemble_channel(geometry, gains, phases, cfg);
    REQUIRE(channel.rows() == cfg.n_rx);
    REQUIRE(channel.cols() == cfg.n_tx);

    const PathAngles angles = PathAngles::from_geometry(geometry);
    const PathTrig trig = PathTrig::from_angles(angles, cfg);
    for (int m = 0; m < cfg.n_rx; ++m) {
        for (int t = 0; t < cfg.n_tx; ++t) {
            complex<double> sum = 0.0;
            for (int i = 0; i < n; ++i) {
                sum += gains.h[i] *
                       std::polar(1.0, phases[i] + m * trig.xi[i] - t * trig.zeta[i]);
            }
            CHECK(std::abs(channel(m, t) - sum) < 1e-12 * std::max(1.0, std::abs(sum)));
        }
    }
}

TEST_CASE("channel is linear in the gains and phase shifts act as unit factors") {
    const ScenarioGeometry geometry = small_geometry();
    const ArrayConfig cfg{4, 4, 0.003, 0.006};
    const int n = geometry.num_paths();
    const Eigen::VectorXcd h = random_gains(n, 31);
    const PhaseVector phases = random_phases(n, 32);
    const PhaseVector zero(Eigen::VectorXd::Zero(n));

    // Folding e^{j rho} into the gains gives the same channel as using phases.
    Eigen::VectorXcd folded = h;
    for (int i = 0; i < n; ++i) {
        folded[i] *= std::polar(1.0, phases[i]);
    }
    const Eigen::MatrixXcd via_phases = assemble_channel(geometry, PathGains{h}, phases, cfg);
    const Eigen::MatrixXcd via_gains = assemble_channel(geometry, PathGains{folded}, zero, cfg);
    CHECK((via_phases - via_gains).cwiseAbs().maxCoeff() < 1e-12);

    // Linearity: doubling the gains doubles the channel.
    const Eigen::MatrixXcd doubled =
        assemble_channel(geometry, PathGains{(2.0 * h).eval()}, phases, cfg);
    CHECK((doubled - 2.0 * via_phases).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("derivative kernels match finite differences of the channel in each AoA") {
    const ScenarioGeometry geometry = small_geometry();
    const ArrayConfig cfg{4, 4, 0.003, 0.006};
    const int n = geometry.num_paths();
    const PathGains gains{random_gains(n, 41)};
    const PhaseVector phases = random_phases(n, 42);
    const PathAngles angles = PathAngles::from_geometry(geometry);
    const double h = 1e-7;

    for (int path = 0; path < n; ++path) {
        const auto [d_elev, d_azim] = xi_matrices(path, angles, gains, cfg);
        for (int which = 0; which < 2; ++which) {
            PathAngles plus = angles;
            PathAngles minus = angles;
            double& ap = which == 0 ? plus.aoa[path].elevation : plus.aoa[path].azimuth;
            double& am = which == 0 ? minus.aoa[path].elevation : minus.aoa[path].azimuth;
            ap += h;
            am -= h;
            const Eigen::MatrixXcd fd =
                (assemble_channel(plus, gains, phases, cfg) -
                 assemble_channel(minus, gains, phases, cfg)) /
                (2.0 * h);
            // The kernel excludes the e^{j rho} factor carried by the channel.
            const Eigen::MatrixXcd closed =
                std::polar(1.0, phases[path]) * (which == 0 ? d_elev : d_azim);
            const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
            CHECK((closed - fd).cwiseAbs().maxCoeff() / scale < 1e-6);
        }
    }
}

TEST_CASE("pilots meet the per-slot power invariant and are seed-deterministic") {
    const ArrayConfig cfg{7, 4, 0.003, 0.006};
    const double power = 3.7;
    const PilotMatrix a = make_pilot(cfg, 5, power, 99);
    const PilotMatrix b = make_pilot(cfg, 5, power, 99);
    const PilotMatrix c = make_pilot(cfg, 5, power, 100);
    REQUIRE(a.slots() == 5);
    for (int l = 0; l < a.slots(); ++l) {
        CHECK(a.x.col(l).squaredNorm() == doctest::Approx(power).epsilon(1e-12));
    }
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.x - c.x).cwiseAbs().maxCoeff() > 0.0);

    const PilotMatrix constant = make_pilot(cfg, 2, power, 0, PilotMode::constant);
    CHECK((constant.x.array() - constant.x(0, 0)).abs().maxCoeff() == 0.0);
    CHECK(constant.x.col(0).squaredNorm() == doctest::Approx(power).epsilon(1e-12));

    CHECK_THROWS_AS(make_pilot(cfg, 0, power, 0), ConfigError);
    CHECK_THROWS_AS(make_pilot(cfg, 1, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(make_pilot(cfg, 1, power, 0, PilotMode::steered), ConfigError);
}

TEST_CASE("steered pilots attain full transmit array gain toward their direction") {
    const ArrayConfig cfg{10, 4, 0.003, 0.006};
    const double power = 2.5;
    const double zeta = 1.234;
    const PilotMatrix pilot = make_steered_pilot(cfg, 3, power, zeta);
    for (int l = 0; l < pilot.slots(); ++l) {
        CHECK(pilot.x.col(l).squaredNorm() == doctest::Approx(power).epsilon(1e-12));
        CHECK((pilot.x.col(l) - pilot.x.col(0)).cwiseAbs().maxCoeff() == 0.0);
    }
    // a(zeta)^H x has squared magnitude power * n_tx (coherent sum).
    Eigen::VectorXcd steering(cfg.n_tx);
    for (int t = 0; t < cfg.n_tx; ++t) {
        steering[t] = std::polar(1.0, t * zeta);
    }
    const double gain = std::norm(steering.dot(pilot.x.col(0)));
    CHECK(gain == doctest::Approx(power * cfg.n_tx).epsilon(1e-12));
}

TEST_CASE("received signal is the exact channel product without noise") {
    const ScenarioGeometry geometry = small_geometry();
    const ArrayConfig cfg{4, 6, 0.003, 0.006};
    const int n = geometry.num_paths();
    const PathGains gains{random_gains(n, 51)};
    const PhaseVector phases = random_phases(n, 52);
    const Eigen::MatrixXcd channel = assemble_channel(geometry, gains, phases, cfg);
    const PilotMatrix pilot = make_pilot(cfg, 3, 2.0, 53);

    NoiseModel off{1.0, 7, false};
    const Eigen::VectorXcd y = synthesize_rx(pilot, channel, off);
    REQUIRE(y.size() == 3 * cfg.n_rx);
    for (int l = 0; l < 3; ++l) {
        const Eigen::VectorXcd expected = channel * pilot.x.col(l);
        CHECK((y.segment(l * cfg.n_rx, cfg.n_rx) - expected).cwiseAbs().maxCoeff() < 1e-12);
    }

    NoiseModel on{0.5, 7, true};
    const Eigen::VectorXcd y1 = synthesize_rx(pilot, channel, on);
    const Eigen::VectorXcd y2 = synthesize_rx(pilot, channel, on);
    CHECK((y1 - y2).cwiseAbs().maxCoeff() == 0.0); // seed-deterministic
    CHECK((y1 - y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("noise samples have the configured per-component variance") {
    const ArrayConfig cfg{1, 1, 0.003, 0.006};
    const Eigen::MatrixXcd channel = Eigen::MatrixXcd::Zero(1, 1);
    PilotMatrix pilot;
    pilot.power = 1.0;
    pilot.x = Eigen::MatrixXcd::Ones(1, 20000);
    const double sigma2 = 0.8;
    const Eigen::VectorXcd y = synthesize_rx(pilot, channel, {sigma2, 1234, true});
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        acc += std::norm(y[i]);
    }
    CHECK(acc / static_cast<double>(y.size()) == doctest::Approx(sigma2).epsilon(0.05));
}

TEST_CASE("phase vectors wrap into [0, 2 pi)") {
    Eigen::VectorXd raw(4);
    raw << -0.5, 7.0, 2.0 * std::numbers::pi, -4.0 * std::numbers::pi;
    const PhaseVector wrapped(raw);
    for (int i = 0; i < 4; ++i) {
        CHECK(wrapped[i] >= 0.0);
        CHECK(wrapped[i] < 2.0 * std::numbers::pi);
    }
    CHECK(wrapped[0] == doctest::Approx(2.0 * std::numbers::pi - 0.5));
    const Eigen::VectorXcd v = wrapped.unit_phasors();
    CHECK(std::abs(v[0] - std::polar(1.0, -0.5)) < 1e-14);
}

TEST_SUITE_END();
