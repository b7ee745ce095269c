#include "riscrlb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "riscrlb/rng.hpp"

namespace riscrlb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Row {
    std::string experiment;
    long long seed = 0; // -1 for seed-averaged aggregate rows
    int n = 0;
    int l = 0;
    double snr_db = 0.0;
    long long iteration = -1;
    std::string axis;               // "x"/"y" for position sweeps
    std::optional<double> coord;
    std::optional<double> crlb_value;
    double wall_ms = 0.0;
    std::string error;
};

void append_row(std::string& out, const Row& r) {
    out += r.experiment;
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.l);
    out += ',';
    out += fmt(r.snr_db);
    out += ',';
    out += std::to_string(r.iteration);
    out += ',';
    out += r.axis;
    out += ',';
    if (r.coord) {
        out += fmt(*r.coord);
    }
    out += ',';
    if (r.crlb_value) {
        out += fmt(*r.crlb_value);
    }
    out += ',';
    out += fmt(r.wall_ms);
    out += ',';
    out += r.error;
    out += '\n';
}

Eigen::VectorXcd draw_gains(int n, std::uint64_t seed) {
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

PhaseVector draw_phases(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> uni(0.0, kTwoPi);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) {
        p[i] = uni(gen);
    }
    return PhaseVector(p);
}

/// Run f(0..count-1) on a pool; rethrows the first exception.
template <typename F>
void parallel_for(int count, bool parallel, F&& f) {
    const unsigned workers =
        parallel ? std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                      static_cast<unsigned>(count))
                 : 1u;
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) {
            f(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

KappaTensor build_kappa(const ScenarioGeometry& geometry, const PathGains& gains,
                        const PilotMatrix& pilot, const ArrayConfig& array) {
    return kappa_tensor(varpi(geometry, gains, pilot, array), transform_matrix(geometry));
}

} // namespace

std::string csv_header() {
    return "experiment,seed,n,l,snr_db,iteration,axis,coord,crlb,wall_ms,error\n";
}

std::string run_convergence(const ScenarioConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    const int seeds = opts.seeds_override.value_or(cfg.seeds);
    const std::uint64_t master = opts.seed_override.value_or(cfg.seed);
    const int slots = cfg.slots.front();
    const ArrayConfig array = cfg.array();
    const ScenarioGeometry geometry(cfg.bs_pos, cfg.ms_pos, expand_layout(cfg.ris));
    const int n = geometry.num_paths();

    struct CellOut {
        std::vector<std::pair<double, OptimizationTrace>> per_snr; // (snr, trace)
        double wall_ms = 0.0;
    };
    std::vector<CellOut> cells(seeds);
    parallel_for(seeds, opts.parallel, [&](int s) {
        const auto start = std::chrono::steady_clock::now();
        const PathGains gains{draw_gains(n, mix_seed(master, 4ULL * s))};
        const PhaseVector initial = draw_phases(n, mix_seed(master, 4ULL * s + 1));
        const PilotMatrix pilot =
            build_pilot(cfg, geometry, slots, 1.0, mix_seed(master, 4ULL * s + 2));
        const KappaTensor kappa = build_kappa(geometry, gains, pilot, array);
        for (double snr : cfg.snr_db) {
            // Unit-power pilot at sigma^2 = 1/p_BS is the same FIM as a
            // power-p_BS pilot at sigma^2 = 1.
            const double effective_variance = cfg.noise_variance() / cfg.transmit_power(snr);
            cells[s].per_snr.emplace_back(snr,
                                          gdm_optimize(kappa, initial, effective_variance, opts.gdm));
        }
        if (opts.timing) {
            cells[s].wall_ms = elapsed_ms(start);
        }
    });

    std::string out = csv_header();
    for (int s = 0; s < seeds; ++s) {
        for (const auto& [snr, trace] : cells[s].per_snr) {
            Row row;
            row.experiment = "convergence";
            row.seed = s;
            row.n = n;
            row.l = slots;
            row.snr_db = snr;
            row.wall_ms = cells[s].wall_ms;
            row.iteration = 0;
            row.crlb_value = trace.initial_objective;
            append_row(out, row);
            for (const auto& it : trace.iterations) {
                row.iteration = it.index;
                row.crlb_value = it.objective;
                append_row(out, row);
            }
        }
    }
    return out;
}

std::string run_sweep(const ScenarioConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    const int seeds = opts.seeds_override.value_or(cfg.seeds);
    const std::uint64_t master = opts.seed_override.value_or(cfg.seed);
    const ArrayConfig array = cfg.array();
    std::vector<int> slot_grid(cfg.slots.begin(), cfg.slots.end());
    std::sort(slot_grid.begin(), slot_grid.end());
    slot_grid.erase(std::unique(slot_grid.begin(), slot_grid.end()), slot_grid.end());
    const int max_slots = slot_grid.back();
    const int sides = static_cast<int>(cfg.ris_sides.size());

    struct CellValue {
        double reference_crlb = 0.0; // unit power, sigma^2 = 1
        double wall_ms = 0.0;
    };
    // cell index = (side_idx * seeds + seed_idx); values per slot-grid entry.
    std::vector<std::vector<CellValue>> values(static_cast<std::size_t>(sides) * seeds);
    parallel_for(sides * seeds, opts.parallel, [&](int cell) {
        const auto start = std::chrono::steady_clock::now();
        const int side_idx = cell / seeds;
        const int side = cfg.ris_sides[side_idx];
        RisLayout layout = cfg.ris;
        layout.rows = side;
        layout.cols = side;
        const ScenarioGeometry geometry(cfg.bs_pos, cfg.ms_pos, expand_layout(layout));
        const int n = geometry.num_paths();
        const std::uint64_t base = mix_seed(master, 0x5000ULL + cell);
        const PathGains gains{draw_gains(n, mix_seed(base, 0))};
        PhaseVector warm = draw_phases(n, mix_seed(base, 1));
        const PilotMatrix full_pilot = build_pilot(cfg, geometry, max_slots, 1.0, mix_seed(base, 2));

        values[cell].resize(slot_grid.size());
        for (std::size_t li = 0; li < slot_grid.size(); ++li) {
            PilotMatrix pilot;
            pilot.power = full_pilot.power;
            pilot.x = full_pilot.x.leftCols(slot_grid[li]);
            const KappaTensor kappa = build_kappa(geometry, gains, pilot, array);
            // Warm-start in L: slots are nested, so the objective can only
            // improve from the previous optimum.
            const OptimizationTrace trace = gdm_optimize(kappa, warm, 1.0, opts.gdm);
            warm = trace.final_phases;
            values[cell][li].reference_crlb = trace.final_objective();
            if (opts.timing) {
                values[cell][li].wall_ms = elapsed_ms(start);
            }
        }
    });

    std::string out = csv_header();
    for (int side_idx = 0; side_idx < sides; ++side_idx) {
        const int n = cfg.ris_sides[side_idx] * cfg.ris_sides[side_idx];
        for (std::size_t li = 0; li < slot_grid.size(); ++li) {
            for (double snr : cfg.snr_db) {
                const double power = cfg.transmit_power(snr);
                double sum = 0.0;
                for (int s = 0; s < seeds; ++s) {
                    const CellValue& v = values[static_cast<std::size_t>(side_idx) * seeds + s][li];
                    Row row;
                    row.experiment = "sweep";
                    row.seed = s;
                    row.n = n;
                    row.l = slot_grid[li];
                    row.snr_db = snr;
                    row.crlb_value = v.reference_crlb / power;
                    row.wall_ms = v.wall_ms;
                    sum += *row.crlb_value;
                    append_row(out, row);
                }
                Row agg;
                agg.experiment = "sweep";
                agg.seed = -1;
                agg.n = n;
                agg.l = slot_grid[li];
                agg.snr_db = snr;
                agg.crlb_value = sum / seeds;
                append_row(out, agg);
            }
        }
    }
    return out;
}

std::string run_position_sweep(const ScenarioConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    const int seeds = opts.seeds_override.value_or(cfg.seeds);
    const std::uint64_t master = opts.seed_override.value_or(cfg.seed);
    const ArrayConfig array = cfg.array();
    const int slots = cfg.slots.front();
    const double snr = cfg.snr_db.front();
    const double power = cfg.transmit_power(snr);
    const int sides = static_cast<int>(cfg.ris_sides.size());
    const int steps = cfg.position_steps;

    struct Curve {
        char axis;
        std::array<double, 2> interval;
    };
    const std::array<Curve, 2> curves{Curve{'x', cfg.ms_x_interval}, Curve{'y', cfg.ms_y_interval}};

    struct PointValue {
        std::optional<double> crlb_value;
        std::string error;
    };
    // cell = ((curve * sides + side_idx) * seeds + seed_idx), one value per step.
    const int cell_count = 2 * sides * seeds;
    std::vector<std::vector<PointValue>> values(cell_count);
    std::vector<double> wall(cell_count, 0.0);
    parallel_for(cell_count, opts.parallel, [&](int cell) {
        const auto start = std::chrono::steady_clock::now();
        const int seed_idx = cell % seeds;
        const int side_idx = (cell / seeds) % sides;
        const int curve_idx = cell / (seeds * sides);
        const Curve& curve = curves[curve_idx];
        const int side = cfg.ris_sides[side_idx];
        RisLayout layout = cfg.ris;
        layout.rows = side;
        layout.cols = side;
        const std::vector<Position3D> elements = expand_layout(layout);
        const int n = side * side;
        const std::uint64_t base = mix_seed(master, 0x9000ULL + cell);
        const PathGains gains{draw_gains(n, mix_seed(base, 0))};
        const PhaseVector initial = draw_phases(n, mix_seed(base, 1));
        // The steering direction depends only on the BS-to-surface departure
        // angles, so one pilot serves every MS position along the curve.
        const PilotMatrix pilot = build_pilot(cfg, ScenarioGeometry(cfg.bs_pos, cfg.ms_pos, elements),
                                              slots, 1.0, mix_seed(base, 2));

        values[cell].resize(steps);
        for (int p = 0; p < steps; ++p) {
            const double coord =
                curve.interval[0] + (curve.interval[1] - curve.interval[0]) * p / (steps - 1);
            Position3D ms = cfg.ms_pos;
            (curve.axis == 'x' ? ms.x : ms.y) = coord;
            try {
                const ScenarioGeometry geometry(cfg.bs_pos, ms, elements);
                const KappaTensor kappa = build_kappa(geometry, gains, pilot, array);
                const OptimizationTrace trace = gdm_optimize(kappa, initial, 1.0, opts.gdm);
                if (trace.status == GdmStatus::singular_fim) {
                    values[cell][p].error = "singular_fim";
                } else {
                    values[cell][p].crlb_value = trace.final_objective() / power;
                }
            } catch (const DegenerateGeometry&) {
                values[cell][p].error = "degenerate";
            } catch (const SingularFim&) {
                values[cell][p].error = "singular_fim";
            }
        }
        if (opts.timing) {
            wall[cell] = elapsed_ms(start);
        }
    });

    std::string out = csv_header();
    for (int curve_idx = 0; curve_idx < 2; ++curve_idx) {
        const Curve& curve = curves[curve_idx];
        for (int side_idx = 0; side_idx < sides; ++side_idx) {
            const int n = cfg.ris_sides[side_idx] * cfg.ris_sides[side_idx];
            for (int p = 0; p < steps; ++p) {
                const double coord =
                    curve.interval[0] + (curve.interval[1] - curve.interval[0]) * p / (steps - 1);
                double sum = 0.0;
                int ok = 0;
                for (int s = 0; s < seeds; ++s) {
                    const int cell = (curve_idx * sides + side_idx) * seeds + s;
                    const PointValue& v = values[cell][p];
                    Row row;
                    row.experiment = "position_sweep";
                    row.seed = s;
                    row.n = n;
                    row.l = slots;
                    row.snr_db = snr;
                    row.axis = std::string(1, curve.axis);
                    row.coord = coord;
                    row.crlb_value = v.crlb_value;
                    row.error = v.error;
                    row.wall_ms = wall[cell];
                    append_row(out, row);
                    if (v.crlb_value) {
                        sum += *v.crlb_value;
                        ++ok;
                    }
                }
                Row agg;
                agg.experiment = "position_sweep";
                agg.seed = -1;
                agg.n = n;
                agg.l = slots;
                agg.snr_db = snr;
                agg.axis = std::string(1, curve.axis);
                agg.coord = coord;
                if (ok == seeds) {
                    agg.crlb_value = sum / ok;
                } else {
                    agg.error = "partial";
                }
                append_row(out, agg);
            }
        }
    }
    return out;
}

std::string plot_script_for(const std::string& csv_path, ExperimentKind kind) {
    std::ostringstream s;
    s << "# gnuplot script, auto-generated\n";
    s << "set datafile separator ','\n";
    s << "set key outside\n";
    s << "set grid\n";
    s << "csv = '" << csv_path << "'\n";
    switch (kind) {
    case ExperimentKind::convergence:
        s << "set logscale y\n"
          << "set xlabel 'iteration'\n"
          << "set ylabel 'CRLB'\n"
          << "plot csv skip 1 using 6:9:5 with points palette pt 7 ps 0.4 "
             "title 'per-seed traces (color = SNR dB)'\n";
        break;
    case ExperimentKind::sweep:
        s << "set logscale y\n"
          << "set xlabel 'time slots L'\n"
          << "set ylabel 'optimized CRLB (seed mean)'\n"
          << "plot csv skip 1 using (strcol(2) eq '-1' ? $4 : 1/0):9:($3+$5) "
             "with points palette pt 7 title 'aggregate cells (color = N + SNR)'\n";
        break;
    case ExperimentKind::position_sweep:
        s << "set logscale y\n"
          << "set xlabel 'MS coordinate (m)'\n"
          << "set ylabel 'optimized CRLB (seed mean)'\n"
          << "plot csv skip 1 using (strcol(2) eq '-1' && strcol(7) eq 'x' ? $8 : 1/0):9:3 "
             "with points palette pt 7 title 'x sweep (color = N)', \\\n"
          << "     csv skip 1 using (strcol(2) eq '-1' && strcol(7) eq 'y' ? $8 : 1/0):9:3 "
             "with points palette pt 5 title 'y sweep (color = N)'\n";
        break;
    }
    return s.str();
}

double gradient_check(std::uint64_t seed, int instances) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const std::array<int, 3> side_choices{1, 2, 3}; // N in {1, 4, 9}
    double worst = 0.0;
    for (int inst = 0; inst < instances; ++inst) {
        const int side = side_choices[inst % side_choices.size()];
        const int slots = 1 + inst % 2;
        ArrayConfig array{4, 4, 0.003, 0.006};
        RisLayout layout;
        layout.rows = side;
        layout.cols = side;
        // Wide element spacing keeps the 2x2 position FIM well conditioned:
        // with a compact surface all per-path direction vectors are nearly
        // parallel, the determinant nearly cancels, and finite differences of
        // the objective drown in amplified roundoff regardless of step size.
        layout.element_spacing = 2.0 + 6.0 * uni(gen);
        layout.reference = {-30.0 + 20.0 * uni(gen), 30.0 + 40.0 * uni(gen), 10.0 + 20.0 * uni(gen)};
        const Position3D ms{100.0 * uni(gen), 50.0 + 100.0 * uni(gen), 0.0};
        const ScenarioGeometry geometry({0, 0, 0}, ms, expand_layout(layout));
        const int n = geometry.num_paths();
        const PathGains gains{draw_gains(n, gen())};
        const PhaseVector phases = draw_phases(n, gen());
        const PilotMatrix pilot = make_pilot(array, slots, std::pow(10.0, 3.0 * uni(gen)), gen());
        const double sigma2 = 1.0;
        const KappaTensor kappa = build_kappa(geometry, gains, pilot, array);
        const double h = 1e-6;

        // FIM entry gradients vs. finite differences of the entries.
        double entry_scale = 0.0;
        double entry_err = 0.0;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd plus = phases.values();
            Eigen::VectorXd minus = phases.values();
            plus[i] += h;
            minus[i] -= h;
            const Eigen::Matrix2d jp = position_fim(kappa, PhaseVector(plus), sigma2).j;
            const Eigen::Matrix2d jm = position_fim(kappa, PhaseVector(minus), sigma2).j;
            const Eigen::Matrix2d fd_entries = (jp - jm) / (2.0 * h);
            const FimEntryGradient eg = fim_entry_gradients(kappa, phases, sigma2, i);
            const Eigen::Matrix2d closed{{eg.j11, eg.j12}, {eg.j21, eg.j22}};
            entry_scale = std::max(entry_scale, fd_entries.cwiseAbs().maxCoeff());
            entry_err = std::max(entry_err, (closed - fd_entries).cwiseAbs().maxCoeff());
        }
        // Normalize by the FIM entry magnitudes as well: when the entries are
        // phase-independent (N = 1) the closed form is exactly zero and the
        // finite difference is pure cancellation noise of order eps * |J| / h.
        const Eigen::Matrix2d J = position_fim(kappa, phases, sigma2).j;
        const double fim_scale = J.cwiseAbs().maxCoeff();
        const double entry_denom = std::max(entry_scale, fim_scale);
        if (entry_denom > 0.0) {
            worst = std::max(worst, entry_err / entry_denom);
        }

        // Full objective gradient where the FIM is comfortably invertible.
        // N = 1 leaves the position unidentifiable (both derivative directions
        // coincide), and a nearly cancelling determinant makes the central
        // difference of the objective itself numerically meaningless.
        const double det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
        if (det < 1e-2 * fim_scale * fim_scale) {
            continue;
        }
        try {
            const Eigen::VectorXd grad = crlb_gradient(kappa, phases, sigma2);
            Eigen::VectorXd fd(n);
            for (int i = 0; i < n; ++i) {
                Eigen::VectorXd plus = phases.values();
                Eigen::VectorXd minus = phases.values();
                plus[i] += h;
                minus[i] -= h;
                const double f_plus = crlb(position_fim(kappa, PhaseVector(plus), sigma2));
                const double f_minus = crlb(position_fim(kappa, PhaseVector(minus), sigma2));
                fd[i] = (f_plus - f_minus) / (2.0 * h);
            }
            const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-300);
            worst = std::max(worst, (grad - fd).cwiseAbs().maxCoeff() / scale);
        } catch (const SingularFim&) {
            // entry-gradient check above still covers this instance
        }
    }
    return worst;
}

} // namespace riscrlb
