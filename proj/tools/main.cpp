// riscrlb: CRLB evaluation and RIS reflect-beamforming optimization for
// mm-wave localization. Subcommands run the convergence, grid-sweep and
// position-sweep experiments, evaluate a single CRLB, or cross-check the
// closed-form gradient against finite differences.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"

#include "riscrlb/beamforming.hpp"
#include "riscrlb/experiments.hpp"
#include "riscrlb/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> seeds;
    std::string out_path;
    bool plot_script = false;
    bool timing = false;
    bool serial = false;
    bool no_noise = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON scenario config (defaults used if omitted)");
    cmd->add_option("--seed", args.seed, "Override the master seed");
    cmd->add_option("--seeds", args.seeds, "Override the number of Monte-Carlo seeds");
    cmd->add_option("--out", args.out_path, "Output path (stdout if omitted)");
    cmd->add_flag("--plot-script", args.plot_script, "Also emit a gnuplot script next to --out");
    cmd->add_flag("--timing", args.timing,
                  "Fill the wall_ms column (makes reruns non-byte-identical)");
    cmd->add_flag("--serial", args.serial, "Disable parallel cell evaluation");
    cmd->add_flag("--no-noise", args.no_noise,
                  "Disable receiver noise (estimator-driven runs only)");
}

riscrlb::ScenarioConfig load_config(const CommonArgs& args) {
    if (args.config_path.empty()) {
        return {};
    }
    return riscrlb::ScenarioConfig::load(args.config_path);
}

riscrlb::RunOptions run_options(const CommonArgs& args) {
    riscrlb::RunOptions opts;
    opts.seed_override = args.seed;
    opts.seeds_override = args.seeds;
    opts.timing = args.timing;
    opts.parallel = !args.serial;
    return opts;
}

void write_output(const CommonArgs& args, const std::string& content) {
    if (args.out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) {
        throw riscrlb::IoError("cannot open output file: " + args.out_path);
    }
    out << content;
    if (!out) {
        throw riscrlb::IoError("failed writing output file: " + args.out_path);
    }
}

void maybe_write_plot(const CommonArgs& args, riscrlb::ExperimentKind kind) {
    if (!args.plot_script) {
        return;
    }
    if (args.out_path.empty()) {
        throw riscrlb::ConfigError("--plot-script requires --out");
    }
    const std::string script_path = args.out_path + ".gnuplot";
    std::ofstream out(script_path, std::ios::binary);
    if (!out) {
        throw riscrlb::IoError("cannot open plot script file: " + script_path);
    }
    out << riscrlb::plot_script_for(args.out_path, kind);
}

int run_crlb(const CommonArgs& args, bool optimize) {
    using namespace riscrlb;
    const ScenarioConfig cfg = load_config(args);
    const std::uint64_t master = args.seed.value_or(cfg.seed);
    const ScenarioGeometry geometry(cfg.bs_pos, cfg.ms_pos, expand_layout(cfg.ris));
    const int n = geometry.num_paths();
    const ArrayConfig array = cfg.array();
    const int slots = cfg.slots.front();
    const double snr = cfg.snr_db.front();

    std::mt19937_64 gen(mix_seed(master, 0));
    std::normal_distribution<double> comp(0.0, std::sqrt(0.5));
    Eigen::VectorXcd h(n);
    for (int i = 0; i < n; ++i) {
        const double re = comp(gen);
        const double im = comp(gen);
        h[i] = {re, im};
    }
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) {
        p[i] = uni(gen);
    }
    const PhaseVector phases(p);
    const PilotMatrix pilot =
        build_pilot(cfg, geometry, slots, cfg.transmit_power(snr), mix_seed(master, 1));
    const KappaTensor kappa =
        kappa_tensor(varpi(geometry, PathGains{h}, pilot, array), transform_matrix(geometry));

    std::string out;
    const double initial = crlb(position_fim(kappa, phases, cfg.noise_variance()));
    out += "n=" + std::to_string(n) + " l=" + std::to_string(slots) + " snr_db=" +
           std::to_string(snr) + "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "crlb_initial=%.17g\n", initial);
    out += buf;
    if (optimize) {
        const OptimizationTrace trace = gdm_optimize(kappa, phases, cfg.noise_variance(), {});
        std::snprintf(buf, sizeof(buf), "crlb_optimized=%.17g\n", trace.final_objective());
        out += buf;
        out += "iterations=" + std::to_string(trace.iterations.size()) + "\n";
    }
    write_output(args, out);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CRLB-minimizing RIS reflect-beamforming toolkit"};
    app.require_subcommand(1);

    CommonArgs conv_args, sweep_args, pos_args, crlb_args, grad_args, alt_args;
    bool crlb_optimize = false;
    int grad_instances = 100;

    CLI::App* conv = app.add_subcommand("convergence", "Per-iteration descent traces of the CRLB objective");
    add_common(conv, conv_args);
    CLI::App* sweep = app.add_subcommand("sweep", "Optimized CRLB over the (slots, elements, SNR) grid");
    add_common(sweep, sweep_args);
    CLI::App* pos = app.add_subcommand("position-sweep", "Optimized CRLB along MS position sweeps");
    add_common(pos, pos_args);
    CLI::App* single = app.add_subcommand("crlb", "Single CRLB evaluation");
    add_common(single, crlb_args);
    single->add_flag("--optimize", crlb_optimize, "Also run the GDM optimizer");
    CLI::App* grad = app.add_subcommand("grad-check",
                                        "Closed-form gradient vs. finite differences");
    add_common(grad, grad_args);
    grad->add_option("--instances", grad_instances, "Number of random instances");
    CLI::App* alt = app.add_subcommand("altopt", "Alternating estimate/optimize loop demo");
    add_common(alt, alt_args);
    double alt_perturbation = 0.0;
    alt->add_option("--perturbation", alt_perturbation,
                    "Perturbed-oracle estimator scale (0 = oracle)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (conv->parsed()) {
            const std::string csv = riscrlb::run_convergence(load_config(conv_args),
                                                             run_options(conv_args));
            write_output(conv_args, csv);
            maybe_write_plot(conv_args, riscrlb::ExperimentKind::convergence);
            return kExitOk;
        }
        if (sweep->parsed()) {
            const std::string csv = riscrlb::run_sweep(load_config(sweep_args),
                                                       run_options(sweep_args));
            write_output(sweep_args, csv);
            maybe_write_plot(sweep_args, riscrlb::ExperimentKind::sweep);
            return kExitOk;
        }
        if (pos->parsed()) {
            const std::string csv = riscrlb::run_position_sweep(load_config(pos_args),
                                                                run_options(pos_args));
            write_output(pos_args, csv);
            maybe_write_plot(pos_args, riscrlb::ExperimentKind::position_sweep);
            return kExitOk;
        }
        if (single->parsed()) {
            return run_crlb(crlb_args, crlb_optimize);
        }
        if (grad->parsed()) {
            const riscrlb::ScenarioConfig cfg = load_config(grad_args);
            const std::uint64_t seed = grad_args.seed.value_or(cfg.seed);
            const double err = riscrlb::gradient_check(seed, grad_instances);
            char buf[96];
            std::snprintf(buf, sizeof(buf), "max_relative_error=%.17g over %d instances\n", err,
                          grad_instances);
            write_output(grad_args, buf);
            return kExitOk;
        }
        if (alt->parsed()) {
            using namespace riscrlb;
            const ScenarioConfig cfg = load_config(alt_args);
            const std::uint64_t master = alt_args.seed.value_or(cfg.seed);
            const ScenarioGeometry geometry(cfg.bs_pos, cfg.ms_pos, expand_layout(cfg.ris));
            const int n = geometry.num_paths();
            std::mt19937_64 gen(mix_seed(master, 0));
            std::normal_distribution<double> comp(0.0, std::sqrt(0.5));
            Eigen::VectorXcd h(n);
            for (int i = 0; i < n; ++i) {
                const double re = comp(gen);
                const double im = comp(gen);
                h[i] = {re, im};
            }
            std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
            Eigen::VectorXd p0(n);
            for (int i = 0; i < n; ++i) {
                p0[i] = uni(gen);
            }
            const LocalizationScenario scenario{geometry, PathGains{h}, cfg.array(),
                                                cfg.noise_variance()};
            const PilotMatrix pilot =
                build_pilot(cfg, geometry, cfg.slots.front(),
                            cfg.transmit_power(cfg.snr_db.front()), mix_seed(master, 1));
            NoiseModel noise{cfg.noise_variance(), mix_seed(master, 2), !alt_args.no_noise};
            EstimatorSpec est;
            est.kind = alt_perturbation > 0.0 ? EstimatorKind::perturbed_oracle
                                              : EstimatorKind::oracle;
            est.perturbation_scale = alt_perturbation;
            est.perturbation_decay = 0.5;
            est.seed = mix_seed(master, 3);
            const AltOptResult result = alternating_optimize(scenario, est, pilot, noise,
                                                             PhaseVector(p0), {}, {});
            std::string out = "outer_iterations=" + std::to_string(result.outer_iterations) + "\n";
            out += std::string("status=") +
                   (result.status == AltOptStatus::converged ? "converged" : "non_convergence") +
                   "\n";
            char buf[64];
            std::snprintf(buf, sizeof(buf), "crlb_final=%.17g\n",
                          result.traces.back().final_objective());
            out += buf;
            write_output(alt_args, out);
            return kExitOk;
        }
    } catch (const riscrlb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const riscrlb::SingularFim& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const riscrlb::LineSearchFailed& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const riscrlb::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const riscrlb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
