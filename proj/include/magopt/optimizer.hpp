#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "magopt/objective.hpp"
#include "magopt/sensitivity.hpp"

namespace magopt {

struct OptimizerConfig {
    int max_iters = 29;
    double radius0 = 0.0;       // hole radius at iteration 0; <= 0 selects
                                // 2x the mean design-element diameter
    double radius_decay = 0.9;  // r_it = radius0 * decay^it, must be <= 1
    int minima_per_iter = 1;
    double negative_threshold = 0.0;  // keep minima <= threshold * most negative
    bool allow_switch_on = false;
    int stop_stagnation = 5;  // consecutive non-improving iterations before stopping

    void validate() const;
};

struct MinimumCandidate {
    int elem_id = -1;
    Vec2 centroid;
    double value = 0.0;
};

// Local minima of the sensitivity over the element-adjacency graph restricted
// to ON design elements, negative, within the threshold band; ties broken by
// lower element id. Elements in `excluded` never qualify.
std::vector<MinimumCandidate> select_minima(const SensitivityField& sens, const Mesh& mesh,
                                            const DesignState& state, const OptimizerConfig& cfg,
                                            const std::unordered_set<int>& excluded = {});

// Switches OFF every ON design element whose centroid lies within `radius` of
// `center`; the element containing `center` is always switched. Returns the
// switched element ids. Elements in `skip` are left untouched.
std::vector<int> carve_hole(DesignState& state, const Mesh& mesh, const Vec2& center,
                            double radius, const std::unordered_set<int>* skip = nullptr);

// Symmetric move: switches ON every OFF design element within the radius.
std::vector<int> fill_hole(DesignState& state, const Mesh& mesh, const Vec2& center,
                           double radius, const std::unordered_set<int>* skip = nullptr);

struct IterationRecord {
    int iter = 0;
    double J = 0.0;
    int switched = 0;
    int reverted = 0;
    int newton_iterations = 0;
    std::vector<std::uint8_t> flags;  // design snapshot after the iteration
};

struct OptimizationHistory {
    std::vector<IterationRecord> entries;  // entries[0] is the initial design
    double best_J = 0.0;
    int best_iter = 0;
    std::vector<std::uint8_t> best_flags;
    bool aborted = false;
    std::string abort_reason;
};

// ON/OFF loop: solve state and adjoint, compute sensitivities, carve holes at
// the selected minima; a carve that increases J is reverted and its elements
// become tabu for the rest of the run. Starts from the all-ON design.
OptimizationHistory run_onoff(const Mesh& mesh, const BHModel& model, MaterialMode mode,
                              const GapCircle& gap, const TargetCurve& target,
                              const OptimizerConfig& cfg, const SolveOptions& solve_opts = {});

}  // namespace magopt
