#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expectiles/core.hpp"
#include "expectiles/random.hpp"
#include "expectiles/solvers.hpp"

namespace expectiles {

/// Absolute tolerance for act indifference ("~") in precondition checks. The
/// constant-shift constructions used throughout are exact; this only absorbs
/// solver error.
inline constexpr double kIndifferenceTol = 1e-10;

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ============================================================================
// Generators
// ============================================================================

inline UtilityAct gen_random_act(const SpacePtr& space, Rng& rng, double lo = -10.0,
                                 double hi = 10.0) {
    std::vector<double> v(space->size());
    for (double& x : v) x = rng.uniform(lo, hi);
    return UtilityAct(space, std::move(v));
}

/// Random strictly positive probabilities, bounded away from zero so no state
/// becomes numerically negligible.
inline SpacePtr gen_random_space(Rng& rng, std::size_t n) {
    std::vector<double> p(n);
    double total = 0.0;
    for (double& x : p) {
        x = rng.uniform(0.05, 1.0);
        total += x;
    }
    for (double& x : p) x /= total;
    // nudge the last entry so the vector sums to 1 exactly
    double sum_except_last = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) sum_except_last += p[i];
    p[n - 1] = 1.0 - sum_except_last;
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
    return FiniteSpace::create(std::move(labels), std::move(p));
}

/// Proper nonempty random subset of {0, ..., n-1}.
inline DisappointmentSet gen_proper_subset(std::size_t n, Rng& rng) {
    detail::require(n >= 2, "a proper subset needs at least two states");
    for (;;) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (rng.coin()) members.push_back(i);
        if (!members.empty() && members.size() < n)
            return DisappointmentSet(std::move(members));
    }
}

/// Act W with E_beta[W] = 0 whose disappointing states are exactly D: draw
/// strictly positive values p off D and strictly positive magnitudes q on D,
/// then scale the D side by lambda = E[p 1_{D^c}] / ((1+beta) E[q 1_D]) so the
/// balance equation holds at zero by construction.
inline UtilityAct gen_act_with_disappointment_set(const SpacePtr& space,
                                                  const DisappointmentSet& d, double beta,
                                                  Rng& rng) {
    detail::require(space != nullptr, "generator needs a space");
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    require_within(d, space->size());
    detail::require(d.is_proper(space->size()),
                    "disappointment set must be nonempty and proper");

    const std::size_t n = space->size();
    std::vector<double> w(n);
    double elation_mass = 0.0, disappointment_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double draw = rng.uniform(0.5, 8.0);
        w[i] = draw;
        if (d.contains(i))
            disappointment_mass += space->prob(i) * draw;
        else
            elation_mass += space->prob(i) * draw;
    }
    const double lambda = elation_mass / ((1.0 + beta) * disappointment_mass);
    for (std::size_t i : d.members) w[i] = -lambda * w[i];
    return UtilityAct(space, std::move(w));
}

inline UtilityAct gen_act_with_disappointment_set(const SpacePtr& space,
                                                  const DisappointmentSet& d, double beta,
                                                  std::uint64_t seed) {
    Rng rng(splitmix64(seed));
    return gen_act_with_disappointment_set(space, d, beta, rng);
}

/// Alternative construction: a * (X - E_beta[X]) for a > 0 has expectile zero
/// and exactly X's disappointment states.
inline UtilityAct concordant_companion(const UtilityAct& x, double beta, double a = 1.0) {
    detail::require(a > 0.0, "scale must be strictly positive");
    return a * (x - expectile(x, beta));
}

// ============================================================================
// Hedging and stacking checks
// ============================================================================

/// E_beta[(W+Y)/2] - E_beta[(W+X)/2]; nonnegative under disappointment
/// aversion when W shares X's disappointment states and X ~ Y.
inline double hedging_gap(const UtilityAct& w, const UtilityAct& x, const UtilityAct& y,
                          double beta) {
    return expectile(0.5 * (w + y), beta) - expectile(0.5 * (w + x), beta);
}

/// E_beta[Z+V] - E_beta[Z+U]; nonnegative under disappointment stacking
/// aversion when Z shares U's disappointment states and U ~ V.
inline double stacking_gap(const UtilityAct& z, const UtilityAct& u, const UtilityAct& v,
                           double beta) {
    return expectile(z + v, beta) - expectile(z + u, beta);
}

namespace detail {

inline void require_hedging_preconditions(const UtilityAct& w, const UtilityAct& x,
                                          const UtilityAct& y, double beta) {
    const double ex = expectile(x, beta);
    const double ey = expectile(y, beta);
    if (std::abs(ex - ey) > kIndifferenceTol)
        throw PreconditionError("acts are not indifferent: expectiles differ by " +
                                std::to_string(std::abs(ex - ey)));
    const double ew = expectile(w, beta);
    if (disappointment_set(w, ew) != disappointment_set(x, ex))
        throw PreconditionError("acts do not share disappointment states");
}

} // namespace detail

/// Disappointment hedging: X ~ Y and W sharing X's disappointment states
/// imply the W/X mixture cannot beat the W/Y mixture (reversed for beta <= 0,
/// the elation-speculating dual). Midpoints of acts already expressed in
/// utils are plain arithmetic averages. Precondition violations throw
/// PreconditionError; a false return is a genuine property failure.
inline bool check_disappointment_hedging(const UtilityAct& w, const UtilityAct& x,
                                         const UtilityAct& y, double beta, double tol) {
    detail::require_hedging_preconditions(w, x, y, beta);
    const double gap = hedging_gap(w, x, y, beta);
    return beta >= 0.0 ? gap >= -tol : gap <= tol;
}

/// Disappointment stacking: holding Z and acquiring a U that disappoints in
/// the same states cannot beat acquiring an indifferent V instead (reversed
/// for beta <= 0). Also asserts the equality branch
/// E[Z+U] = E[Z] + E[U] (additivity in concordant sums).
inline bool check_disappointment_stacking(const UtilityAct& z, const UtilityAct& u,
                                          const UtilityAct& v, double beta, double tol) {
    detail::require_hedging_preconditions(z, u, v, beta);
    const double gap = stacking_gap(z, u, v, beta);
    const bool direction_ok = beta >= 0.0 ? gap >= -tol : gap <= tol;
    const double additivity =
        std::abs(expectile(z + u, beta) - expectile(z, beta) - expectile(u, beta));
    return direction_ok && additivity <= tol;
}

// ============================================================================
// Beta inference and functional fingerprinting
// ============================================================================

/// Inverts the binary closed form: given the observed value of a bet paying
/// ux on E and uy < ux off E, the unique consistent coefficient is
///   beta = P(E)(1-t) / ((1-P(E)) t) - 1,  t = (observed - uy)/(ux - uy).
inline double infer_beta(const SpacePtr& space, const DisappointmentSet& event,
                         double observed, double ux, double uy) {
    detail::require(space != nullptr, "infer_beta needs a space");
    require_within(event, space->size());
    double pe = 0.0;
    for (std::size_t i : event.members) pe += space->prob(i);
    detail::require(pe > 0.0 && pe < 1.0, "event must have probability strictly in (0, 1)");
    detail::require(std::isfinite(ux) && std::isfinite(uy) && ux > uy,
                    "infer_beta requires ux > uy");
    detail::require(observed > uy && observed < ux,
                    "observed value must lie strictly between uy and ux");
    const double t = (observed - uy) / (ux - uy);
    return pe * (1.0 - t) / ((1.0 - pe) * t) - 1.0;
}

struct FingerprintResult {
    bool consistent = false;
    std::optional<double> beta_hat;
    std::optional<UtilityAct> witness;
};

/// Pins down a candidate beta from a binary probe act, then tests the
/// black-box functional against E_beta on random acts. Any functional in the
/// expectile family passes; anything that is not strongly monotone,
/// constant-additive, positively homogeneous and additive in concordant sums
/// trips a witness.
inline FingerprintResult fingerprint_functional(
    const std::function<double(const UtilityAct&)>& evaluator, const SpacePtr& space,
    int trials, std::uint64_t seed, double tol) {
    detail::require(space != nullptr, "fingerprint needs a space");
    detail::require(space->size() >= 2, "fingerprint needs at least two states");
    detail::require(trials >= 1, "trials must be >= 1");

    auto evaluate = [&](const UtilityAct& act) {
        const double r = evaluator(act);
        detail::require(std::isfinite(r), "evaluator returned a non-finite value");
        return r;
    };

    // Binary probe: a bet paying 1 on state 0 and 0 elsewhere.
    std::vector<double> probe_values(space->size(), 0.0);
    probe_values[0] = 1.0;
    UtilityAct probe(space, std::move(probe_values));
    const double observed = evaluate(probe);
    if (!(observed > 0.0 && observed < 1.0)) {
        // No expectile evaluates a nonconstant bet at or beyond its extremes.
        return {false, std::nullopt, probe};
    }
    const double beta_hat =
        infer_beta(space, DisappointmentSet({0}), observed, 1.0, 0.0);

    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        UtilityAct act = gen_random_act(space, rng);
        if (std::abs(evaluate(act) - expectile(act, beta_hat)) > tol)
            return {false, beta_hat, act};
    }
    return {true, beta_hat, std::nullopt};
}

// ============================================================================
// Property suite
// ============================================================================

enum class PropertyId {
    law_invariance,
    strong_monotonicity,
    constant_additivity,
    positive_homogeneity,
    superadditivity, ///< subadditivity is asserted instead when beta <= 0
    bounded_continuity,
    concordant_additivity,
    disappointment_hedging,
    disappointment_stacking,
};

inline const char* to_string(PropertyId id) {
    switch (id) {
        case PropertyId::law_invariance: return "law_invariance";
        case PropertyId::strong_monotonicity: return "strong_monotonicity";
        case PropertyId::constant_additivity: return "constant_additivity";
        case PropertyId::positive_homogeneity: return "positive_homogeneity";
        case PropertyId::superadditivity: return "superadditivity";
        case PropertyId::bounded_continuity: return "bounded_continuity";
        case PropertyId::concordant_additivity: return "concordant_additivity";
        case PropertyId::disappointment_hedging: return "disappointment_hedging";
        case PropertyId::disappointment_stacking: return "disappointment_stacking";
    }
    return "?";
}

inline std::optional<PropertyId> property_from_string(const std::string& s) {
    using P = PropertyId;
    for (P id : {P::law_invariance, P::strong_monotonicity, P::constant_additivity,
                 P::positive_homogeneity, P::superadditivity, P::bounded_continuity,
                 P::concordant_additivity, P::disappointment_hedging,
                 P::disappointment_stacking})
        if (s == to_string(id)) return id;
    return std::nullopt;
}

inline const std::vector<PropertyId>& all_properties() {
    static const std::vector<PropertyId> ids = {
        PropertyId::law_invariance,        PropertyId::strong_monotonicity,
        PropertyId::constant_additivity,   PropertyId::positive_homogeneity,
        PropertyId::superadditivity,       PropertyId::bounded_continuity,
        PropertyId::concordant_additivity, PropertyId::disappointment_hedging,
        PropertyId::disappointment_stacking};
    return ids;
}

struct PropertyReport {
    PropertyId property;
    int trials = 0;
    int failures = 0;
    double worst_violation = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

/// Permutation of states that only moves states with exactly equal
/// probabilities, so the permuted act has the same law.
inline std::vector<std::size_t> law_preserving_permutation(const SpacePtr& space, Rng& rng) {
    const std::size_t n = space->size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::vector<std::size_t> order(perm);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return space->prob(a) < space->prob(b);
    });
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start + 1;
        while (end < n && space->prob(order[end]) == space->prob(order[start])) ++end;
        // Fisher-Yates within the equal-probability block
        for (std::size_t i = end - start; i > 1; --i) {
            const std::size_t j = rng.index(i);
            std::swap(perm[order[start + i - 1]], perm[order[start + j]]);
        }
        start = end;
    }
    return perm;
}

struct TrialOutcome {
    double violation = 0.0; ///< 0 means the trial passed
};

inline TrialOutcome run_trial(PropertyId id, const SpacePtr& space, double beta, double tol,
                              Rng& rng) {
    const std::size_t n = space->size();
    switch (id) {
        case PropertyId::law_invariance: {
            UtilityAct u = gen_random_act(space, rng);
            const std::vector<std::size_t> perm = law_preserving_permutation(space, rng);
            std::vector<double> shuffled(n);
            for (std::size_t i = 0; i < n; ++i) shuffled[i] = u.value(perm[i]);
            UtilityAct v(space, std::move(shuffled));
            const double gap = std::abs(expectile(u, beta) - expectile(v, beta));
            return {gap > tol ? gap : 0.0};
        }
        case PropertyId::strong_monotonicity: {
            UtilityAct u = gen_random_act(space, rng);
            std::vector<double> lowered(u.values());
            const std::size_t forced = rng.index(n);
            for (std::size_t i = 0; i < n; ++i)
                if (rng.coin()) lowered[i] -= rng.uniform(0.0, 2.0);
            lowered[forced] = u.value(forced) - rng.uniform(0.5, 2.0);
            UtilityAct v(space, std::move(lowered));
            if (fosd_compare(u, v) != FosdOrder::dominates_strictly) return {1.0};
            const double diff = expectile(u, beta) - expectile(v, beta);
            return {diff > 0.0 ? 0.0 : std::abs(diff) + 1e-30};
        }
        case PropertyId::constant_additivity: {
            UtilityAct u = gen_random_act(space, rng);
            const double m = rng.uniform(-20.0, 20.0);
            const double gap = std::abs(expectile(u + m, beta) - (expectile(u, beta) + m));
            return {gap > tol ? gap : 0.0};
        }
        case PropertyId::positive_homogeneity: {
            UtilityAct u = gen_random_act(space, rng);
            const double lambda = rng.uniform(0.0, 4.0);
            const double gap =
                std::abs(expectile(lambda * u, beta) - lambda * expectile(u, beta));
            return {gap > tol ? gap : 0.0};
        }
        case PropertyId::superadditivity: {
            UtilityAct x = gen_random_act(space, rng);
            UtilityAct y = gen_random_act(space, rng);
            const double slack =
                expectile(x + y, beta) - expectile(x, beta) - expectile(y, beta);
            const double viol = beta >= 0.0 ? std::max(0.0, -slack) : std::max(0.0, slack);
            return {viol > tol ? viol : 0.0};
        }
        case PropertyId::bounded_continuity: {
            UtilityAct u = gen_random_act(space, rng);
            std::vector<double> bumped(u.values());
            for (double& x : bumped) x += rng.uniform(-1e-9, 1e-9);
            UtilityAct v(space, std::move(bumped));
            const double gap = std::abs(expectile(u, beta) - expectile(v, beta));
            const double viol = std::max(0.0, gap - 1e-9);
            return {viol > tol ? viol : 0.0};
        }
        case PropertyId::concordant_additivity: {
            const DisappointmentSet d = gen_proper_subset(n, rng);
            UtilityAct x = gen_act_with_disappointment_set(space, d, beta, rng);
            UtilityAct y = gen_act_with_disappointment_set(space, d, beta, rng);
            const double gap =
                std::abs(expectile(x + y, beta) - expectile(x, beta) - expectile(y, beta));
            return {gap > tol ? gap : 0.0};
        }
        case PropertyId::disappointment_hedging: {
            const DisappointmentSet d = gen_proper_subset(n, rng);
            UtilityAct w = gen_act_with_disappointment_set(space, d, beta, rng);
            UtilityAct x = gen_act_with_disappointment_set(space, d, beta, rng);
            UtilityAct y0 = gen_random_act(space, rng);
            UtilityAct y = y0 - expectile(y0, beta); // indifferent to x by constant shift
            const double gap = hedging_gap(w, x, y, beta);
            const double viol = beta >= 0.0 ? std::max(0.0, -gap) : std::max(0.0, gap);
            return {viol > tol ? viol : 0.0};
        }
        case PropertyId::disappointment_stacking: {
            const DisappointmentSet d = gen_proper_subset(n, rng);
            UtilityAct z = gen_act_with_disappointment_set(space, d, beta, rng);
            UtilityAct u = gen_act_with_disappointment_set(space, d, beta, rng);
            UtilityAct v0 = gen_random_act(space, rng);
            UtilityAct v = v0 - expectile(v0, beta);
            const double gap = stacking_gap(z, u, v, beta);
            const double dir_viol = beta >= 0.0 ? std::max(0.0, -gap) : std::max(0.0, gap);
            const double additivity =
                std::abs(expectile(z + u, beta) - expectile(z, beta) - expectile(u, beta));
            const double viol = std::max(dir_viol, additivity > tol ? additivity : 0.0);
            return {viol > tol ? viol : 0.0};
        }
    }
    throw std::invalid_argument("unknown property id");
}

} // namespace detail

/// Runs `trials` seeded random trials of the named property on the given
/// space and returns the failure count and worst violation magnitude. Trials
/// draw from per-index substreams of `seed`, so reports replay exactly.
inline PropertyReport run_property(PropertyId id, const SpacePtr& space, double beta,
                                   int trials, std::uint64_t seed, double tol) {
    detail::require(space != nullptr, "run_property needs a space");
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    detail::require(trials >= 1, "trials must be >= 1");
    detail::require(std::isfinite(tol) && tol >= 0.0, "tol must be >= 0");
    const bool needs_subsets = id == PropertyId::concordant_additivity ||
                               id == PropertyId::disappointment_hedging ||
                               id == PropertyId::disappointment_stacking;
    detail::require(!needs_subsets || space->size() >= 2,
                    "property needs a space with at least two states");

    PropertyReport report{id, trials, 0, 0.0, seed};
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        const detail::TrialOutcome out = detail::run_trial(id, space, beta, tol, rng);
        if (out.violation > 0.0) {
            report.failures += 1;
            report.worst_violation = std::max(report.worst_violation, out.violation);
        }
    }
    return report;
}

} // namespace expectiles
