#include "riscrlb/beamforming.hpp"

#include <cmath>
#include <complex>
#include <optional>

#include "riscrlb/rng.hpp"

namespace riscrlb {

namespace {

constexpr double kMinLineSearchStep = 1e-16;

struct EntryGradients {
    Eigen::VectorXd j11, j12, j21, j22;
};

/// All four d[J_q]_{a,b}/d rho vectors at once. With v = e^{j rho} and
/// S^{a,b} = sum_l K^{a,b}(l), component i is
/// (2/sigma^2) Re[j v_i (v^H (S^{a,b} + S^{b,a}))_i]; the n = i term of the
/// sum is automatically real under j and drops out.
EntryGradients all_entry_gradients(const KappaTensor& kappa, const PhaseVector& phases,
                                   double noise_variance) {
    const int n = kappa.num_paths();
    const Eigen::VectorXcd v = phases.unit_phasors();
    std::array<Eigen::MatrixXcd, 4> summed;
    for (int a = 1; a <= 2; ++a) {
        for (int b = 1; b <= 2; ++b) {
            Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, n);
            for (int l = 0; l < kappa.slots(); ++l) {
                s += kappa.block(a, b, l);
            }
            summed[(a - 1) * 2 + (b - 1)] = std::move(s);
        }
    }
    const double scale = 2.0 / noise_variance;
    const std::complex<double> imag{0.0, 1.0};
    auto entry = [&](int ab, int ba) {
        const Eigen::MatrixXcd s = summed[ab] + summed[ba];
        const Eigen::RowVectorXcd u = v.adjoint() * s;
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) {
            // Remove the n = i self term explicitly: it is real in exact
            // arithmetic and only contributes roundoff under Re[j ...].
            const std::complex<double> off = u[i] - std::conj(v[i]) * s(i, i);
            g[i] = scale * (imag * v[i] * off).real();
        }
        return g;
    };
    EntryGradients grads;
    grads.j11 = entry(0, 0);
    grads.j12 = entry(1, 2);
    grads.j21 = entry(2, 1);
    grads.j22 = entry(3, 3);
    return grads;
}

double wrapped_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double sq = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double d = std::abs(PhaseVector::wrap(a[i]) - PhaseVector::wrap(b[i]));
        d = std::min(d, two_pi - d);
        sq += d * d;
    }
    return std::sqrt(sq);
}

double param_distance(const ParamVector& a, const ParamVector& b) {
    double sq = (a.elevations - b.elevations).squaredNorm() +
                (a.azimuths - b.azimuths).squaredNorm() + (a.gains - b.gains).squaredNorm();
    return std::sqrt(sq);
}

} // namespace

FimEntryGradient fim_entry_gradients(const KappaTensor& kappa, const PhaseVector& phases,
                                     double noise_variance, int path) {
    if (path < 0 || path >= kappa.num_paths()) {
        throw IndexOutOfRange("path index out of range");
    }
    const EntryGradients grads = all_entry_gradients(kappa, phases, noise_variance);
    return {grads.j11[path], grads.j12[path], grads.j21[path], grads.j22[path]};
}

Eigen::VectorXd crlb_gradient(const KappaTensor& kappa, const PhaseVector& phases,
                              double noise_variance) {
    const EntryGradients g = all_entry_gradients(kappa, phases, noise_variance);
    if (g.j11.isZero(0.0) && g.j12.isZero(0.0) && g.j21.isZero(0.0) && g.j22.isZero(0.0)) {
        // The objective is constant in the phases wherever it is defined
        // (single path, or no cross terms); skip the quotient rule entirely.
        return Eigen::VectorXd::Zero(kappa.num_paths());
    }
    const PositionFim fim = position_fim(kappa, phases, noise_variance);
    const Eigen::Matrix2d& j = fim.j;
    const double numerator = j(0, 0) + j(1, 1);
    const double denominator = j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0);
    const double scale = j.cwiseAbs().maxCoeff();
    if (denominator <= kSingularFimRelTol * scale * scale) {
        throw SingularFim("position FIM is singular; CRLB gradient undefined");
    }
    const Eigen::VectorXd d_num = g.j11 + g.j22;
    const Eigen::VectorXd d_den =
        g.j11 * j(1, 1) + j(0, 0) * g.j22 - g.j12 * j(1, 0) - j(0, 1) * g.j21;
    return (d_num * denominator - numerator * d_den) / (denominator * denominator);
}

OptimizationTrace gdm_optimize(const KappaTensor& kappa, const PhaseVector& initial,
                               double noise_variance, const GdmConfig& cfg) {
    if (!(cfg.rel_tolerance > 0.0) || cfg.max_iterations < 0 || !(cfg.initial_step > 0.0) ||
        !(cfg.armijo_alpha > 0.0 && cfg.armijo_alpha < 0.5) ||
        !(cfg.backtrack_beta > 0.0 && cfg.backtrack_beta < 1.0)) {
        throw ConfigError("invalid GDM configuration");
    }
    OptimizationTrace trace;
    trace.final_phases = initial;

    PhaseVector rho = initial;
    double objective = crlb(position_fim(kappa, rho, noise_variance));
    trace.initial_objective = objective;
    const double epsilon = cfg.rel_tolerance * objective;

    trace.status = GdmStatus::max_iterations;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        Eigen::VectorXd grad;
        try {
            grad = crlb_gradient(kappa, rho, noise_variance);
        } catch (const SingularFim&) {
            trace.status = GdmStatus::singular_fim;
            return trace;
        }
        const double grad_norm = grad.norm();
        if (grad_norm <= 1e-14 * std::max(1.0, objective)) {
            trace.status = it == 1 ? GdmStatus::stationary : GdmStatus::converged;
            return trace;
        }

        double step = cfg.initial_step;
        std::optional<double> accepted;
        PhaseVector candidate;
        while (step >= kMinLineSearchStep) {
            candidate = PhaseVector(rho.values() - step * grad);
            double value;
            try {
                value = crlb(position_fim(kappa, candidate, noise_variance));
            } catch (const SingularFim&) {
                step *= cfg.backtrack_beta;
                continue;
            }
            if (value <= objective - cfg.armijo_alpha * step * grad_norm * grad_norm) {
                accepted = value;
                break;
            }
            step *= cfg.backtrack_beta;
        }
        if (!accepted) {
            trace.status = GdmStatus::line_search_failed;
            return trace;
        }

        const double decrease = objective - *accepted;
        rho = candidate;
        objective = *accepted;
        trace.iterations.push_back({it, objective, step, grad_norm});
        trace.final_phases = rho;
        if (decrease <= epsilon) {
            trace.status = GdmStatus::converged;
            return trace;
        }
    }
    return trace;
}

AltOptResult alternating_optimize(const LocalizationScenario& scenario, const EstimatorSpec& estimator,
                                  const PilotMatrix& pilot, const NoiseModel& noise,
                                  const PhaseVector& initial, const AltOptConfig& alt_cfg,
                                  const GdmConfig& gdm_cfg) {
    const PathAngles true_angles = PathAngles::from_geometry(scenario.geometry);

    AltOptResult result;
    result.status = AltOptStatus::non_convergence;
    PhaseVector rho = initial;
    std::optional<ParamVector> previous_params;

    for (int outer = 0; outer < alt_cfg.max_outer_iterations; ++outer) {
        const Eigen::MatrixXcd channel =
            assemble_channel(true_angles, scenario.gains, rho, scenario.array);
        NoiseModel slot_noise = noise;
        slot_noise.seed = mix_seed(noise.seed, static_cast<std::uint64_t>(outer));
        const Eigen::VectorXcd y = synthesize_rx(pilot, channel, slot_noise);

        EstimatorSpec iter_spec = estimator;
        iter_spec.seed = mix_seed(estimator.seed, static_cast<std::uint64_t>(outer));
        iter_spec.perturbation_scale *= std::pow(estimator.perturbation_decay, outer);
        const ParamVector params = estimate(iter_spec, y, scenario, rho, pilot);

        // Rebuild the phase-independent FIM core from the estimate.
        const Position3D q_hat = recover_position(params, scenario.geometry.ris_elements());
        const ScenarioGeometry est_geometry(scenario.geometry.bs_pos(), q_hat,
                                            scenario.geometry.ris_elements());
        const TransformMatrix transform = transform_matrix(est_geometry);
        const PathAngles est_angles = params.to_angles(true_angles.aod);
        const VarpiSet varpi_set = varpi(est_angles, PathGains{params.gains}, pilot, scenario.array);
        const KappaTensor kappa = kappa_tensor(varpi_set, transform);

        OptimizationTrace trace = gdm_optimize(kappa, rho, scenario.noise_variance, gdm_cfg);
        const PhaseVector new_rho = trace.final_phases;
        result.traces.push_back(std::move(trace));
        result.outer_iterations = outer + 1;

        const bool phases_converged = wrapped_distance(new_rho.values(), rho.values()) <=
                                      alt_cfg.phase_tolerance;
        const bool params_converged =
            previous_params && param_distance(params, *previous_params) <= alt_cfg.param_tolerance;
        rho = new_rho;
        previous_params = params;
        if (phases_converged && params_converged) {
            result.status = AltOptStatus::converged;
            break;
        }
    }
    result.params = *previous_params;
    result.phases = rho;
    return result;
}

} // namespace riscrlb
