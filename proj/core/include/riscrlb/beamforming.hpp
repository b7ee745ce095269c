#pragma once

#include <vector>

#include <Eigen/Dense>

#include "riscrlb/estimator.hpp"
#include "riscrlb/fim.hpp"

namespace riscrlb {

/// Gradient descent with backtracking line search. The stop tolerance is
/// relative to the initial objective value.
struct GdmConfig {
    double rel_tolerance = 1e-8;
    int max_iterations = 300;
    double armijo_alpha = 0.25;   // in (0, 0.5)
    double backtrack_beta = 0.5;  // in (0, 1)
    double initial_step = 1.0;
};

struct AltOptConfig {
    // Warm-started phase updates shrink by roughly 10% per round until the
    // inner optimizer bottoms out, so the loop needs a generous budget.
    int max_outer_iterations = 100;
    double param_tolerance = 1e-5;  // on ||delta eta_hat||
    double phase_tolerance = 1e-4;  // on wrapped ||delta rho||, radians
};

enum class GdmStatus {
    converged,
    stationary,        // gradient already (numerically) zero at the start
    max_iterations,
    singular_fim,      // FIM became singular mid-run
    line_search_failed // backtracking shrank the step below 1e-16
};

struct GdmIteration {
    int index = 0;
    double objective = 0.0;
    double step = 0.0;
    double gradient_norm = 0.0;
};

struct OptimizationTrace {
    double initial_objective = 0.0;
    std::vector<GdmIteration> iterations; // accepted steps only
    PhaseVector final_phases;
    GdmStatus status = GdmStatus::converged;

    double final_objective() const {
        return iterations.empty() ? initial_objective : iterations.back().objective;
    }
};

/// d[J_q]_{a,b} / d rho_i for the four entries.
struct FimEntryGradient {
    double j11 = 0.0;
    double j12 = 0.0;
    double j21 = 0.0;
    double j22 = 0.0;
};

/// Closed-form derivative of each position-FIM entry w.r.t. the phase of one
/// path, (2/sigma^2) sum_l sum_n Re[j e^{j(rho_i - rho_n)}
/// (kappa_{n,i}^{a,b}(l) + kappa_{n,i}^{b,a}(l))]; on the diagonal entries
/// this collapses to the 4/sigma^2 single-kappa form.
FimEntryGradient fim_entry_gradients(const KappaTensor& kappa, const PhaseVector& phases,
                                     double noise_variance, int path);

/// Gradient of the CRLB objective via the quotient rule over the FIM entries.
Eigen::VectorXd crlb_gradient(const KappaTensor& kappa, const PhaseVector& phases,
                              double noise_variance);

OptimizationTrace gdm_optimize(const KappaTensor& kappa, const PhaseVector& initial,
                               double noise_variance, const GdmConfig& cfg);

enum class AltOptStatus { converged, non_convergence };

struct AltOptResult {
    ParamVector params;
    PhaseVector phases;
    std::vector<OptimizationTrace> traces; // one GDM trace per outer iteration
    AltOptStatus status = AltOptStatus::converged;
    int outer_iterations = 0;
};

/// Alternate estimation of the channel parameters with GDM phase
/// optimization, warm-starting each GDM run from the previous phases.
AltOptResult alternating_optimize(const LocalizationScenario& scenario, const EstimatorSpec& estimator,
                                  const PilotMatrix& pilot, const NoiseModel& noise,
                                  const PhaseVector& initial, const AltOptConfig& alt_cfg,
                                  const GdmConfig& gdm_cfg);

} // namespace riscrlb
