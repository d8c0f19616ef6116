#include "magopt/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "magopt/errors.hpp"

namespace magopt {

void OptimizerConfig::validate() const {
    if (max_iters < 0) throw ValidationError("optimizer: max_iters must be >= 0");
    if (minima_per_iter < 1) throw ValidationError("optimizer: minima_per_iter must be >= 1");
    if (!(radius_decay > 0.0) || radius_decay > 1.0) {
        throw ValidationError("optimizer: radius_decay must lie in (0, 1] (radii nonincreasing)");
    }
    if (negative_threshold < 0.0 || negative_threshold > 1.0) {
        throw ValidationError("optimizer: negative_threshold must lie in [0, 1]");
    }
    if (stop_stagnation < 1) throw ValidationError("optimizer: stop_stagnation must be >= 1");
}

std::vector<MinimumCandidate> select_minima(const SensitivityField& sens, const Mesh& mesh,
                                            const DesignState& state, const OptimizerConfig& cfg,
                                            const std::unordered_set<int>& excluded) {
    cfg.validate();
    if (sens.elem_ids.size() != mesh.design_elements().size()) {
        throw ValidationError("select_minima: sensitivity field does not cover the design set");
    }

    auto is_candidate = [&](int e) {
        const int pos = mesh.design_index(e);
        return pos >= 0 && state.is_on(pos) && excluded.count(e) == 0;
    };

    double most_negative = 0.0;
    for (std::size_t k = 0; k < sens.elem_ids.size(); ++k) {
        if (is_candidate(sens.elem_ids[k])) {
            most_negative = std::min(most_negative, sens.onoff[k]);
        }
    }
    if (most_negative >= 0.0) return {};

    std::vector<MinimumCandidate> minima;
    for (std::size_t k = 0; k < sens.elem_ids.size(); ++k) {
        const int e = sens.elem_ids[k];
        if (!is_candidate(e)) continue;
        const double value = sens.onoff[k];
        if (!(value < 0.0)) continue;
        if (value > cfg.negative_threshold * most_negative) continue;

        // local minimum over ON design neighbors (non-strict, handles plateaus)
        bool is_min = true;
        for (int kk = 0; kk < 3 && is_min; ++kk) {
            const int nb = mesh.neighbor(e, kk);
            if (nb < 0) continue;
            const int nb_pos = mesh.design_index(nb);
            if (nb_pos < 0 || !state.is_on(nb_pos) || excluded.count(nb) != 0) continue;
            if (sens.onoff[static_cast<std::size_t>(nb_pos)] < value) is_min = false;
        }
        if (is_min) minima.push_back({e, mesh.centroid(e), value});
    }

    std::sort(minima.begin(), minima.end(), [](const MinimumCandidate& a,
                                               const MinimumCandidate& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.elem_id < b.elem_id;
    });
    if (static_cast<int>(minima.size()) > cfg.minima_per_iter) {
        minima.resize(static_cast<std::size_t>(cfg.minima_per_iter));
    }
    return minima;
}

namespace {

std::vector<int> switch_in_radius(DesignState& state, const Mesh& mesh, const Vec2& center,
                                  double radius, bool to_off,
                                  const std::unordered_set<int>* skip) {
    if (!(radius >= 0.0)) throw ValidationError("hole move: radius must be >= 0");
    const int center_elem = mesh.locate(center);
    if (center_elem < 0 || mesh.design_index(center_elem) < 0) {
        throw ValidationError("hole move: center lies outside the design region");
    }
    const std::uint8_t want = to_off ? 0 : 1;
    std::vector<int> switched;
    for (int e : mesh.design_elements()) {
        if (skip != nullptr && skip->count(e) != 0) continue;
        const int pos = mesh.design_index(e);
        if (state.flags[static_cast<std::size_t>(pos)] == want) continue;
        const bool inside =
            (mesh.centroid(e) - center).norm() <= radius || e == center_elem;
        if (inside) {
            state.flags[static_cast<std::size_t>(pos)] = want;
            switched.push_back(e);
        }
    }
    return switched;
}

}  // namespace

std::vector<int> carve_hole(DesignState& state, const Mesh& mesh, const Vec2& center,
                            double radius, const std::unordered_set<int>* skip) {
    return switch_in_radius(state, mesh, center, radius, true, skip);
}

std::vector<int> fill_hole(DesignState& state, const Mesh& mesh, const Vec2& center,
                           double radius, const std::unordered_set<int>* skip) {
    return switch_in_radius(state, mesh, center, radius, false, skip);
}

namespace {

double mean_design_diameter(const Mesh& mesh) {
    const auto& design = mesh.design_elements();
    if (design.empty()) throw ValidationError("run_onoff: mesh has no design elements");
    double acc = 0.0;
    for (int e : design) acc += mesh.element_diameter(e);
    return acc / static_cast<double>(design.size());
}

struct SolveOutcome {
    NodalField u;
    double J = 0.0;
    int newton_iterations = 0;
};

}  // namespace

OptimizationHistory run_onoff(const Mesh& mesh, const BHModel& model, MaterialMode mode,
                              const GapCircle& gap, const TargetCurve& target,
                              const OptimizerConfig& cfg, const SolveOptions& solve_opts) {
    cfg.validate();
    OptimizationHistory history;
    DesignState state = DesignState::all_on(mesh, mode);
    std::unordered_set<int> tabu;

    const double radius0 = cfg.radius0 > 0.0 ? cfg.radius0 : 2.0 * mean_design_diameter(mesh);

    NodalField warm = NodalField::zeros(mesh);
    auto solve_J = [&](const DesignState& st) {
        SolveOptions opts = solve_opts;
        opts.initial_guess = &warm;
        SolveOutcome out;
        StateSolveReport rep = solve_state_report(mesh, model, st, opts);
        out.newton_iterations = rep.newton_iterations;
        out.J = objective(mesh, gap, target, rep.u);
        out.u = std::move(rep.u);
        return out;
    };

    try {
        SolveOutcome current = solve_J(state);
        warm = current.u;
        history.entries.push_back(
            {0, current.J, 0, 0, current.newton_iterations, state.flags});
        history.best_J = current.J;
        history.best_iter = 0;
        history.best_flags = state.flags;

        int stagnant = 0;
        for (int it = 1; it <= cfg.max_iters; ++it) {
            const double radius = radius0 * std::pow(cfg.radius_decay, it - 1);

            const AdjointSolveReport adj = solve_adjoint(mesh, model, state, current.u, gap,
                                                         target, solve_opts.linear_tol);
            SensitivityField sens = onoff_sensitivities(mesh, state, current.u, adj.p);
            sens.iteration = it;

            auto minima = select_minima(sens, mesh, state, cfg, tabu);

            int switched_total = 0;
            int reverted_total = 0;
            int newton_worst = 0;  // largest Newton count among this iteration's solves
            bool changed = false;

            for (const auto& candidate : minima) {
                const std::vector<int> switched =
                    carve_hole(state, mesh, candidate.centroid, radius, &tabu);
                if (switched.empty()) continue;
                const SolveOutcome trial = solve_J(state);
                newton_worst = std::max(newton_worst, trial.newton_iterations);
                if (trial.J > current.J) {
                    // revert and blacklist: keeps the best-so-far monotone
                    for (int e : switched) {
                        state.flags[static_cast<std::size_t>(mesh.design_index(e))] = 1;
                        tabu.insert(e);
                    }
                    reverted_total += static_cast<int>(switched.size());
                } else {
                    current = trial;
                    warm = current.u;
                    switched_total += static_cast<int>(switched.size());
                    changed = true;
                }
            }

            if (cfg.allow_switch_on) {
                // mirrored move: restore iron at strongly positive local maxima
                SensitivityField flipped = sens;
                for (auto& v : flipped.onoff) v = -v;
                DesignState off_view = state;
                for (auto& f : off_view.flags) f = f ? 0 : 1;  // maxima among OFF elements
                auto maxima = select_minima(flipped, mesh, off_view, cfg, tabu);
                for (const auto& candidate : maxima) {
                    const std::vector<int> switched =
                        fill_hole(state, mesh, candidate.centroid, radius, &tabu);
                    if (switched.empty()) continue;
                    const SolveOutcome trial = solve_J(state);
                    newton_worst = std::max(newton_worst, trial.newton_iterations);
                    if (trial.J > current.J) {
                        for (int e : switched) {
                            state.flags[static_cast<std::size_t>(mesh.design_index(e))] = 0;
                            tabu.insert(e);
                        }
                        reverted_total += static_cast<int>(switched.size());
                    } else {
                        current = trial;
                        warm = current.u;
                        switched_total += static_cast<int>(switched.size());
                        changed = true;
                    }
                }
            }

            history.entries.push_back(
                {it, current.J, switched_total, reverted_total, newton_worst, state.flags});

            if (current.J < history.best_J) {
                history.best_J = current.J;
                history.best_iter = it;
                history.best_flags = state.flags;
                stagnant = 0;
            } else {
                ++stagnant;
            }

            if (minima.empty() && !changed) break;  // nothing favorable left
            if (stagnant >= cfg.stop_stagnation) break;
        }
    } catch (const SolverError& err) {
        history.aborted = true;
        history.abort_reason = err.what();
    }
    return history;
}

}  // namespace magopt
