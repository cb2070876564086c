#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expectiles/core.hpp"

namespace expectiles {

// ============================================================================
// Configuration and diagnostics
// ============================================================================

struct SolverConfig {
    double abs_tol = 1e-12; ///< utils
    double rel_tol = 0.0;   ///< dimensionless
    int max_iter = 200;

    void validate() const {
        detail::require(std::isfinite(abs_tol) && abs_tol > 0.0, "abs_tol must be > 0");
        detail::require(std::isfinite(rel_tol) && rel_tol >= 0.0, "rel_tol must be >= 0");
        detail::require(max_iter >= 1, "max_iter must be >= 1");
    }

    /// Default tolerance scaled to the act: 1e-12 * max(1, range). 200
    /// bisections exceed double resolution on any bracket.
    static SolverConfig defaults_for(const UtilityAct& u) {
        SolverConfig cfg;
        cfg.abs_tol = 1e-12 * std::max(1.0, u.range());
        return cfg;
    }
};

struct TraceStep {
    double value;               ///< v^(k), utils
    std::vector<double> masses; ///< reweighted probability vector at this step
};

/// Record of the reweighting recursion: v^(0) is the plain mean under the
/// original masses; each later row holds the value and masses after one
/// reweighting pass.
struct ConvergenceTrace {
    std::vector<TraceStep> iterates;
    bool converged = false;
    int steps = 0; ///< number of value-changing reweighting passes
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, double lo, double hi)
        : std::runtime_error(msg), bracket_lo(lo), bracket_hi(hi) {}
    double bracket_lo;
    double bracket_hi;
};

class CrossCheckError : public std::runtime_error {
public:
    CrossCheckError(const std::string& msg, double balance, double gul, double iterative,
                    double als, double max_discrepancy)
        : std::runtime_error(msg), balance(balance), gul(gul), iterative(iterative),
          als(als), max_discrepancy(max_discrepancy) {}
    double balance, gul, iterative, als, max_discrepancy;
};

// ============================================================================
// Building blocks
// ============================================================================

/// Asymmetric quadratic deviation penalty: s^2 above the reference,
/// (1+beta)s^2 below it.
inline double loss(double s, double beta) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    return s >= 0.0 ? s * s : (1.0 + beta) * s * s;
}

/// E[loss(U - v)], the objective the asymmetric least-squares solver
/// minimizes.
inline double als_objective(const UtilityAct& u, double beta, double v) {
    double f = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double s = u.value(i) - v;
        f += u.space()->prob(i) * (s >= 0.0 ? s * s : (1.0 + beta) * s * s);
    }
    return f;
}

/// g(v) = E[(U - v)^+] - (1+beta) E[(v - U)^+]. Expected elation must beat
/// expected disappointment by the factor 1+beta; the expectiled utility is the
/// unique root. g is continuous, piecewise linear and strictly decreasing on
/// [min U, max U] for nonconstant acts.
inline double balance_gap(const UtilityAct& u, double beta, double v) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    double elation = 0.0, disappointment = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u.value(i) - v;
        if (d > 0.0)
            elation += u.space()->prob(i) * d;
        else
            disappointment -= u.space()->prob(i) * d;
    }
    return elation - (1.0 + beta) * disappointment;
}

namespace detail {

/// Bracketed root finder for continuous strictly decreasing functions with
/// f(lo) >= 0 >= f(hi). Alternates secant and bisection steps, so the bracket
/// at least halves every two iterations. Returns the bracket midpoint once the
/// width drops below tolerance (or below double resolution).
template <class F>
double find_decreasing_root(F&& f, double lo, double hi, const SolverConfig& cfg) {
    cfg.validate();
    // For near-constant acts roundoff can push the sign change onto (or just
    // past) a bracket endpoint; the endpoint is then the best representable
    // root.
    double flo = f(lo);
    if (flo <= 0.0) return lo;
    double fhi = f(hi);
    if (fhi >= 0.0) return hi;

    for (int it = 0; it < cfg.max_iter; ++it) {
        const double width = hi - lo;
        const double tol = std::max(cfg.abs_tol, cfg.rel_tol * 0.5 * (std::abs(lo) + std::abs(hi)));
        if (width <= tol) return lo + 0.5 * width;

        double mid;
        if (it % 2 == 1 && flo - fhi > 0.0) {
            mid = lo + width * (flo / (flo - fhi)); // secant through the bracket
            if (!(mid > lo && mid < hi)) mid = lo + 0.5 * width;
        } else {
            mid = lo + 0.5 * width;
        }
        if (mid <= lo || mid >= hi) return mid; // bracket at double resolution

        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (fm > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "root finder exhausted %d iterations, last bracket [%.17g, %.17g]",
                  cfg.max_iter, lo, hi);
    throw SolverError(buf, lo, hi);
}

} // namespace detail

// ============================================================================
// The four algorithms
// ============================================================================

/// Root of the balance gap by bracketed bisection with secant acceleration.
inline double expectile_balance(const UtilityAct& u, double beta, const SolverConfig& cfg) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    if (u.is_constant()) return u.value(0);
    return detail::find_decreasing_root(
        [&](double v) { return balance_gap(u, beta, v); }, u.min_value(), u.max_value(), cfg);
}

inline double expectile_balance(const UtilityAct& u, double beta) {
    return expectile_balance(u, beta, SolverConfig::defaults_for(u));
}

/// Solves v = E[k_v(U)] where k_v leaves disappointing utilities alone and
/// discounts elating ones to (u + beta v)/(1 + beta). Implemented as a root
/// problem on h(v) = E[k_v(U)] - v, which shares its unique root with the
/// balance gap; nothing here relies on the Picard map contracting.
inline double gul_fixed_point(const UtilityAct& u, double beta, const SolverConfig& cfg) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    if (u.is_constant()) return u.value(0);
    auto residual = [&](double v) {
        double e = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double ui = u.value(i);
            const double k = ui >= v ? (ui + beta * v) / (1.0 + beta) : ui;
            e += u.space()->prob(i) * k;
        }
        return e - v;
    };
    return detail::find_decreasing_root(residual, u.min_value(), u.max_value(), cfg);
}

inline double gul_fixed_point(const UtilityAct& u, double beta) {
    return gul_fixed_point(u, beta, SolverConfig::defaults_for(u));
}

/// Iterative reweighting: start from the mean, inflate the masses of states
/// falling short of the current reference by 1+beta, renormalize, recompute
/// the mean. Stops once the disappointing set stops changing, which happens
/// after at most (#distinct values - 1) value changes; the sequence v^(k) is
/// nonincreasing for beta >= 0 and nondecreasing for beta <= 0.
inline std::pair<double, ConvergenceTrace> iterative_reweighting(const UtilityAct& u,
                                                                 double beta) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    const std::size_t n = u.size();
    const std::vector<double>& p = u.space()->probs();

    ConvergenceTrace trace;
    double v = u.mean();
    trace.iterates.push_back({v, p});
    DisappointmentSet current = disappointment_set(u, v);

    // Bounded by construction, but cap defensively at n+1 passes.
    for (std::size_t pass = 0; pass <= n + 1; ++pass) {
        std::vector<double> w(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = current.contains(i) ? (1.0 + beta) * p[i] : p[i];
            total += w[i];
        }
        double next = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] /= total;
            next += w[i] * u.value(i);
        }
        if (next != v) {
            trace.iterates.push_back({next, std::move(w)});
            trace.steps += 1;
            v = next;
        }
        const DisappointmentSet refreshed = disappointment_set(u, v);
        if (refreshed == current) {
            // v is the reweighted mean under its own disappointing set, i.e.
            // it satisfies the balance equation exactly.
            trace.converged = true;
            return {v, std::move(trace)};
        }
        current = refreshed;
    }
    trace.converged = true; // unreachable: the set chain is strictly monotone
    return {v, std::move(trace)};
}

/// Minimizer of E[loss(U - v)]. The objective is strictly convex and
/// piecewise quadratic with knots at the distinct act values, so the global
/// minimizer is found exactly by scanning segments for the one containing its
/// own parabola vertex.
inline double als_minimize(const UtilityAct& u, double beta, const SolverConfig& cfg) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    cfg.validate();
    if (u.is_constant()) return u.value(0);

    std::vector<std::pair<double, double>> dist = distribution(u); // (value, prob)
    const std::size_t m = dist.size();

    // prefix[j] = (mass, mass*value) over the j smallest distinct values
    std::vector<double> below_p(m + 1, 0.0), below_pu(m + 1, 0.0);
    double total_p = 0.0, total_pu = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        below_p[j + 1] = below_p[j] + dist[j].second;
        below_pu[j + 1] = below_pu[j] + dist[j].second * dist[j].first;
    }
    total_p = below_p[m];
    total_pu = below_pu[m];

    for (std::size_t j = 0; j + 1 < m; ++j) {
        // On [d_j, d_{j+1}]: states <= d_j are below, states >= d_{j+1} above.
        const double bp = below_p[j + 1], bpu = below_pu[j + 1];
        const double ap = total_p - bp, apu = total_pu - bpu;
        const double denom = ap + (1.0 + beta) * bp;
        const double vertex = (apu + (1.0 + beta) * bpu) / denom;
        if (vertex >= dist[j].first && vertex <= dist[j + 1].first) return vertex;
    }
    // Roundoff pushed every vertex out of its segment (possible only when the
    // minimizer sits essentially on a knot): fall back to the best knot.
    double best_v = dist[0].first;
    double best_f = als_objective(u, beta, best_v);
    for (std::size_t j = 1; j < m; ++j) {
        const double fk = als_objective(u, beta, dist[j].first);
        if (fk < best_f) {
            best_f = fk;
            best_v = dist[j].first;
        }
    }
    return best_v;
}

inline double als_minimize(const UtilityAct& u, double beta) {
    return als_minimize(u, beta, SolverConfig::defaults_for(u));
}

// ============================================================================
// Closed forms and the facade
// ============================================================================

/// Value of a bet paying ux on an event of probability pE and uy <= ux
/// otherwise: the disappointing-state probability is inflated by 1+beta and
/// the whole measure renormalized,
///   (pE ux + (1+beta)(1-pE) uy) / (1 + beta (1-pE)).
inline double binary_closed_form(double pE, double ux, double uy, double beta) {
    detail::require(1.0 + beta > 0.0, "beta must be greater than -1");
    detail::require(std::isfinite(pE) && pE >= 0.0 && pE <= 1.0,
                    "event probability must lie in [0, 1]");
    detail::require(std::isfinite(ux) && std::isfinite(uy) && ux >= uy,
                    "binary form requires ux >= uy");
    const double pD = 1.0 - pE;
    return (pE * ux + (1.0 + beta) * pD * uy) / (1.0 + beta * pD);
}

struct CrossCheckReport {
    double value; ///< the value the facade returns (iterative route)
    double balance, gul, iterative, als;
    double max_discrepancy;
};

/// Runs all four algorithms and measures their maximum pairwise disagreement.
inline CrossCheckReport cross_checked_expectile(const UtilityAct& u, double beta,
                                                const SolverConfig& cfg) {
    CrossCheckReport r{};
    r.iterative = iterative_reweighting(u, beta).first;
    r.balance = expectile_balance(u, beta, cfg);
    r.gul = gul_fixed_point(u, beta, cfg);
    r.als = als_minimize(u, beta, cfg);
    const double vals[4] = {r.balance, r.gul, r.iterative, r.als};
    double d = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) d = std::max(d, std::abs(vals[i] - vals[j]));
    r.max_discrepancy = d;
    r.value = r.iterative;
    return r;
}

/// The expectiled utility E_beta[U]. Delegates to the reweighting recursion,
/// which is exact in finitely many steps. With cross_check set, also runs the
/// balance, Gul fixed-point and asymmetric-least-squares routes and demands
/// agreement within 10x the configured absolute tolerance.
inline double expectile(const UtilityAct& u, double beta, const SolverConfig& cfg,
                        bool cross_check = false) {
    if (!cross_check) return iterative_reweighting(u, beta).first;
    const CrossCheckReport r = cross_checked_expectile(u, beta, cfg);
    const double cross_tol = 10.0 * cfg.abs_tol;
    if (!(r.max_discrepancy <= cross_tol)) {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "solver cross-check diverged: balance=%.17g gul=%.17g "
                      "iterative=%.17g als=%.17g (max discrepancy %.3g > %.3g)",
                      r.balance, r.gul, r.iterative, r.als, r.max_discrepancy, cross_tol);
        throw CrossCheckError(buf, r.balance, r.gul, r.iterative, r.als, r.max_discrepancy);
    }
    return r.value;
}

inline double expectile(const UtilityAct& u, double beta) {
    return iterative_reweighting(u, beta).first;
}

} // namespace expectiles
