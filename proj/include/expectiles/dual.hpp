#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "expectiles/core.hpp"
#include "expectiles/solvers.hpp"

namespace expectiles {

/// States the brute-force enumerator will handle before demanding the
/// explicit override (2^24 event evaluations).
inline constexpr std::size_t kEnumerationGuard = 24;

// ============================================================================
// Event-distortion scenarios
// ============================================================================

/// The adversarial measure that inflates the probability of every state in D
/// by 1+beta and renormalizes:
///   dQ/dP = (1 + beta * 1_D) / (1 + beta P(D)).
inline Scenario event_scenario(const SpacePtr& space, const DisappointmentSet& d,
                               double beta) {
    detail::require(space != nullptr, "event scenario needs a space");
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    require_within(d, space->size());
    double pd = 0.0;
    for (std::size_t i : d.members) pd += space->prob(i);
    const double denom = 1.0 + beta * pd;
    std::vector<double> density(space->size(), 1.0 / denom);
    for (std::size_t i : d.members) density[i] = (1.0 + beta) / denom;
    return Scenario(space, std::move(density));
}

/// E^Q[U] = sum over states of prob * density * value.
inline double scenario_value(const UtilityAct& u, const Scenario& q) {
    detail::require(same_space(u.space(), q.space()), "act and scenario live on different spaces");
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        e += u.space()->prob(i) * q.density_at(i) * u.value(i);
    return e;
}

/// The optimal sabotage Q*: the event scenario of the act's own
/// disappointment set D = {i : u_i < E_beta[U]}. By the balance equation it
/// attains E^{Q*}[U] = E_beta[U].
inline Scenario optimal_scenario(const UtilityAct& u, double beta) {
    const double v = expectile(u, beta);
    return event_scenario(u.space(), disappointment_set(u, v), beta);
}

// ============================================================================
// Brute-force optimum over all events
// ============================================================================

struct DualOptimum {
    double value = 0.0;
    DisappointmentSet event;
};

struct EventValue {
    DisappointmentSet event;
    double value;
};

namespace detail {

inline std::vector<std::size_t> members_of_mask(std::uint32_t mask, std::size_t n) {
    std::vector<std::size_t> m;
    for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) m.push_back(i);
    return m;
}

inline bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline void check_enumeration_guard(std::size_t n, bool allow_large) {
    require(n <= 31, "brute-force enumeration supports at most 31 states");
    require(allow_large || n <= kEnumerationGuard,
            "brute-force enumeration over " + std::to_string(n) +
                " states exceeds the guard of " + std::to_string(kEnumerationGuard) +
                "; pass allow_large to override");
}

} // namespace detail

/// Enumerates all 2^n events D, evaluates E^Q[U] under each event scenario
/// and returns the minimum for beta >= 0 (maximum for beta < 0) together with
/// one optimizing event. Ties go to the event whose sorted index list is
/// lexicographically smallest. Events are visited in Gray-code order so each
/// step updates the running sums in O(1).
inline DualOptimum brute_force_dual(const UtilityAct& u, double beta,
                                    bool allow_large = false) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    const std::size_t n = u.size();
    detail::check_enumeration_guard(n, allow_large);

    const bool minimize = beta >= 0.0;
    double total_pu = 0.0;
    for (std::size_t i = 0; i < n; ++i) total_pu += u.space()->prob(i) * u.value(i);

    // value(D) = (total_pu + beta * sum_D p u) / (1 + beta * P(D))
    double d_p = 0.0, d_pu = 0.0; // running sums over the current event
    std::uint32_t gray = 0;
    double best = total_pu; // D = empty set
    std::uint32_t best_mask = 0;

    const std::uint64_t count = 1ull << n;
    for (std::uint64_t k = 1; k < count; ++k) {
        const std::uint32_t next_gray = static_cast<std::uint32_t>(k ^ (k >> 1));
        const std::uint32_t flipped = gray ^ next_gray;
        const std::size_t bit = static_cast<std::size_t>(__builtin_ctz(flipped));
        if (next_gray & flipped) {
            d_p += u.space()->prob(bit);
            d_pu += u.space()->prob(bit) * u.value(bit);
        } else {
            d_p -= u.space()->prob(bit);
            d_pu -= u.space()->prob(bit) * u.value(bit);
        }
        gray = next_gray;

        const double value = (total_pu + beta * d_pu) / (1.0 + beta * d_p);
        const bool better = minimize ? value < best : value > best;
        if (better) {
            best = value;
            best_mask = gray;
        } else if (value == best && gray != best_mask) {
            if (detail::lex_less(detail::members_of_mask(gray, n),
                                 detail::members_of_mask(best_mask, n)))
                best_mask = gray;
        }
    }
    return {best, DisappointmentSet(detail::members_of_mask(best_mask, n))};
}

/// Full event table in mask order (the empty event first). Intended for small
/// n; the guard applies as in brute_force_dual.
inline std::vector<EventValue> brute_force_table(const UtilityAct& u, double beta,
                                                 bool allow_large = false) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    const std::size_t n = u.size();
    detail::check_enumeration_guard(n, allow_large);

    double total_pu = 0.0;
    for (std::size_t i = 0; i < n; ++i) total_pu += u.space()->prob(i) * u.value(i);

    std::vector<EventValue> table;
    table.reserve(static_cast<std::size_t>(1ull << n));
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
        double d_p = 0.0, d_pu = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1ull << i)) {
                d_p += u.space()->prob(i);
                d_pu += u.space()->prob(i) * u.value(i);
            }
        }
        table.push_back({DisappointmentSet(detail::members_of_mask(
                             static_cast<std::uint32_t>(mask), n)),
                         (total_pu + beta * d_pu) / (1.0 + beta * d_p)});
    }
    return table;
}

// ============================================================================
// Density-ratio scenario set
// ============================================================================

/// gamma(beta) = max{1+beta, 1/(1+beta)}, the dispersion cap of the
/// density-ratio scenario family.
inline double density_ratio_cap(double beta) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    return std::max(1.0 + beta, 1.0 / (1.0 + beta));
}

/// Membership in the density-ratio family: density strictly positive
/// everywhere and max/min density ratio at most gamma(beta), with 1e-12
/// slack for roundoff.
inline bool scenario_in_density_set(const Scenario& q, double beta) {
    const double cap = density_ratio_cap(beta);
    double lo = q.density_at(0), hi = q.density_at(0);
    for (double d : q.density()) {
        if (d <= 0.0) return false;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi / lo <= cap + 1e-12;
}

} // namespace expectiles
