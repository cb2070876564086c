#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "expectiles/axioms.hpp"
#include "expectiles/core.hpp"
#include "expectiles/random.hpp"
#include "expectiles/solvers.hpp"

namespace expectiles {

/// Absolute indifference threshold when grouping ranked acts.
inline constexpr double kRankTieTol = 1e-10;

/// Expectiled utility of an outcome act under the agent's table and beta.
inline double evaluate(const OutcomeAct& x, const Agent& agent) {
    return expectile(apply_utility(x, agent), agent.beta());
}

struct RankedAct {
    std::string name;
    double value;
    int tie_group; ///< 0-based indifference class, best first
};

/// Acts ordered by descending value; acts within 1e-10 of their predecessor
/// share an indifference class. Ties in value order deterministically by name.
inline std::vector<RankedAct> rank(const std::vector<std::pair<std::string, OutcomeAct>>& acts,
                                   const Agent& agent) {
    detail::require(!acts.empty(), "rank needs at least one act");
    std::vector<RankedAct> out;
    out.reserve(acts.size());
    for (const auto& [name, act] : acts) out.push_back({name, evaluate(act, agent), 0});
    std::sort(out.begin(), out.end(), [](const RankedAct& a, const RankedAct& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.name < b.name;
    });
    for (std::size_t i = 1; i < out.size(); ++i) {
        out[i].tie_group = out[i - 1].tie_group;
        if (out[i - 1].value - out[i].value > kRankTieTol) out[i].tie_group += 1;
    }
    return out;
}

struct CertaintyEquivalent {
    double value;                       ///< utils
    std::optional<std::string> outcome; ///< a table outcome matching within 1e-9
};

/// The sure utility level indifferent to the act, plus an outcome label
/// realizing it when the (finite) table happens to contain one. No
/// interpolation: outcome labels are unordered.
inline CertaintyEquivalent certainty_equivalent(const OutcomeAct& x, const Agent& agent) {
    const double v = evaluate(x, agent);
    std::optional<std::string> best;
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto& [label, u] : agent.utility_table()) {
        const double gap = std::abs(u - v);
        if (gap < best_gap) {
            best_gap = gap;
            best = label;
        }
    }
    if (!(best_gap <= 1e-9)) best.reset();
    return {v, best};
}

/// Utility of the preference midpoint of two outcomes: the arithmetic mean of
/// their utilities.
inline double midpoint_value(const std::string& x, const std::string& y, const Agent& agent) {
    return 0.5 * (agent.utility_of(x) + agent.utility_of(y));
}

/// (beta, E_beta[U]) along the given list; values are nonincreasing along
/// increasing betas.
inline std::vector<std::pair<double, double>> beta_sweep(const UtilityAct& u,
                                                         const std::vector<double>& betas) {
    detail::require(!betas.empty(), "sweep needs at least one beta");
    std::vector<std::pair<double, double>> out;
    out.reserve(betas.size());
    for (double b : betas) {
        detail::require(std::isfinite(b) && 1.0 + b > 0.0,
                        "beta must be finite and greater than -1");
        out.emplace_back(b, expectile(u, b));
    }
    return out;
}

struct AgentComparison {
    bool affine_related = false;    ///< u_A = scale*u_B + offset with scale > 0
    bool increasing_transform = false; ///< fitted scale > 0
    double scale = 0.0;
    double offset = 0.0;
    double max_residual = 0.0;
    bool beta_geq = false; ///< beta_A >= beta_B
    int trials = 0;
    int violations = 0;
    bool empirical_relation_holds = false; ///< X >=_A y implies X >=_B y on every sample
};

/// Comparative disappointment aversion: fits u_A against u_B by an exact
/// two-point solve on the most-separated pair of B-utilities, validates every
/// label, compares betas, and samples (act, constant) pairs to check that
/// whatever A accepts over a constant, B accepts too.
inline AgentComparison compare_agents(const Agent& a, const Agent& b, const SpacePtr& space,
                                      int trials, std::uint64_t seed) {
    detail::require(space != nullptr, "compare_agents needs a space");
    detail::require(trials >= 1, "trials must be >= 1");

    std::vector<std::string> labels;
    for (const auto& [label, u] : b.utility_table())
        if (a.has_outcome(label)) labels.push_back(label);
    detail::require(labels.size() >= 2,
                    "agents need at least two common outcome labels");

    // most-separated pair of B-utilities for a stable exact solve
    std::string lo = labels.front(), hi = labels.front();
    for (const auto& l : labels) {
        if (b.utility_of(l) < b.utility_of(lo)) lo = l;
        if (b.utility_of(l) > b.utility_of(hi)) hi = l;
    }
    detail::require(b.utility_of(hi) != b.utility_of(lo),
                    "agent B needs at least two distinct utility values");

    AgentComparison cmp;
    cmp.scale = (a.utility_of(hi) - a.utility_of(lo)) / (b.utility_of(hi) - b.utility_of(lo));
    cmp.offset = a.utility_of(hi) - cmp.scale * b.utility_of(hi);
    for (const auto& l : labels)
        cmp.max_residual = std::max(
            cmp.max_residual, std::abs(a.utility_of(l) - (cmp.scale * b.utility_of(l) + cmp.offset)));
    cmp.increasing_transform = cmp.scale > 0.0;
    cmp.affine_related = cmp.increasing_transform && cmp.max_residual <= 1e-9;
    cmp.beta_geq = a.beta() >= b.beta();
    cmp.trials = trials;

    // Small slack so solver roundoff on borderline samples cannot flag a
    // spurious violation.
    double scale_b = 1.0;
    for (const auto& l : labels) scale_b = std::max(scale_b, std::abs(b.utility_of(l)));
    const double slack = 1e-9 * scale_b;

    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        std::vector<std::string> outcomes(space->size());
        for (auto& o : outcomes) o = labels[rng.index(labels.size())];
        const OutcomeAct act(space, outcomes);
        const std::string y = labels[rng.index(labels.size())];
        const bool a_accepts = evaluate(act, a) >= a.utility_of(y);
        if (!a_accepts) continue;
        const bool b_accepts = evaluate(act, b) >= b.utility_of(y) - slack;
        if (!b_accepts) cmp.violations += 1;
    }
    cmp.empirical_relation_holds = cmp.violations == 0;
    return cmp;
}

} // namespace expectiles
