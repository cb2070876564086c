#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace expectiles {

/// Tolerance band for probability normalization: inputs whose mass deviates
/// from 1 by more than this are rejected; anything inside the band is
/// renormalized exactly.
inline constexpr double kProbSumTol = 1e-9;

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace detail

// ============================================================================
// Domain types
// ============================================================================

/// A finite probability space: ordered state labels with strictly positive
/// probabilities summing to one. Immutable after construction.
class FiniteSpace {
public:
    FiniteSpace(std::vector<std::string> labels, std::vector<double> probs)
        : labels_(std::move(labels)), probs_(std::move(probs)) {
        detail::require(!labels_.empty(), "space needs at least one state");
        detail::require(labels_.size() == probs_.size(),
                        "state labels and probabilities differ in length");
        double total = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            detail::require(std::isfinite(probs_[i]) && probs_[i] > 0.0,
                            "probability of state '" + labels_[i] +
                                "' must be strictly positive");
            total += probs_[i];
        }
        detail::require(std::abs(total - 1.0) <= kProbSumTol,
                        "probabilities must sum to 1 within 1e-9 (got " +
                            std::to_string(total) + ")");
        for (double& p : probs_) p /= total;
    }

    static std::shared_ptr<const FiniteSpace> create(std::vector<std::string> labels,
                                                     std::vector<double> probs) {
        return std::make_shared<const FiniteSpace>(std::move(labels), std::move(probs));
    }

    /// Uniform space with labels prefix0, prefix1, ...
    static std::shared_ptr<const FiniteSpace> uniform(std::size_t n,
                                                      const std::string& prefix = "s") {
        detail::require(n >= 1, "space needs at least one state");
        std::vector<std::string> labels;
        labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
        return create(std::move(labels), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    double prob(std::size_t i) const { return probs_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<std::string> labels_;
    std::vector<double> probs_;
};

using SpacePtr = std::shared_ptr<const FiniteSpace>;

/// Two space handles describe the same space if they are the same object or
/// agree label-for-label and probability-for-probability.
inline bool same_space(const SpacePtr& a, const SpacePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->labels() == b->labels() && a->probs() == b->probs();
}

/// A simple random variable in utils: one finite value per state.
class UtilityAct {
public:
    UtilityAct(SpacePtr space, std::vector<double> values)
        : space_(std::move(space)), values_(std::move(values)) {
        detail::require(space_ != nullptr, "act needs a space");
        detail::require(values_.size() == space_->size(),
                        "act has " + std::to_string(values_.size()) + " values for " +
                            std::to_string(space_->size()) + " states");
        for (double v : values_)
            detail::require(std::isfinite(v), "act values must be finite");
    }

    const SpacePtr& space() const { return space_; }
    const std::vector<double>& values() const { return values_; }
    double value(std::size_t i) const { return values_.at(i); }
    std::size_t size() const { return values_.size(); }

    double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
    double max_value() const { return *std::max_element(values_.begin(), values_.end()); }
    double range() const { return max_value() - min_value(); }

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) m += space_->prob(i) * values_[i];
        return m;
    }

    bool is_constant() const {
        return std::all_of(values_.begin(), values_.end(),
                           [&](double v) { return v == values_.front(); });
    }

    std::size_t distinct_value_count() const {
        std::vector<double> v = values_;
        std::sort(v.begin(), v.end());
        return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
    }

private:
    SpacePtr space_;
    std::vector<double> values_;
};

namespace detail {

inline void require_same_space(const UtilityAct& a, const UtilityAct& b) {
    require(same_space(a.space(), b.space()), "acts live on different spaces");
}

} // namespace detail

// Statewise arithmetic. Acts are closed under these operations, which is all
// the axiom checks need.
inline UtilityAct operator+(const UtilityAct& a, const UtilityAct& b) {
    detail::require_same_space(a, b);
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.value(i) + b.value(i);
    return UtilityAct(a.space(), std::move(v));
}

inline UtilityAct operator+(const UtilityAct& a, double m) {
    std::vector<double> v(a.values());
    for (double& x : v) x += m;
    return UtilityAct(a.space(), std::move(v));
}

inline UtilityAct operator-(const UtilityAct& a, double m) { return a + (-m); }

inline UtilityAct operator*(double lambda, const UtilityAct& a) {
    std::vector<double> v(a.values());
    for (double& x : v) x *= lambda;
    return UtilityAct(a.space(), std::move(v));
}

inline UtilityAct operator-(const UtilityAct& a) { return -1.0 * a; }

/// An act with outcome labels instead of utils; becomes a UtilityAct once an
/// agent's utility table is applied.
class OutcomeAct {
public:
    OutcomeAct(SpacePtr space, std::vector<std::string> outcomes)
        : space_(std::move(space)), outcomes_(std::move(outcomes)) {
        detail::require(space_ != nullptr, "act needs a space");
        detail::require(outcomes_.size() == space_->size(),
                        "act has " + std::to_string(outcomes_.size()) + " outcomes for " +
                            std::to_string(space_->size()) + " states");
    }

    const SpacePtr& space() const { return space_; }
    const std::vector<std::string>& outcomes() const { return outcomes_; }
    std::size_t size() const { return outcomes_.size(); }

private:
    SpacePtr space_;
    std::vector<std::string> outcomes_;
};

/// Disappointment coefficient plus a utility table over outcome labels.
/// beta > 0 discounts elation, beta = 0 is expected utility, beta < 0 seeks
/// elation. The guard rejects betas so close to -1 that 1+beta vanishes in
/// double precision.
class Agent {
public:
    Agent(double beta, std::map<std::string, double> utility)
        : beta_(beta), utility_(std::move(utility)) {
        detail::require(std::isfinite(beta_) && 1.0 + beta_ > 0.0,
                        "beta must be finite and greater than -1");
        for (const auto& [label, u] : utility_)
            detail::require(std::isfinite(u),
                            "utility of outcome '" + label + "' must be finite");
    }

    double beta() const { return beta_; }

    /// Asymmetry level of the corresponding expectile, alpha = 1/(2+beta).
    double alpha() const { return 1.0 / (2.0 + beta_); }

    const std::map<std::string, double>& utility_table() const { return utility_; }

    bool has_outcome(const std::string& label) const { return utility_.count(label) > 0; }

    double utility_of(const std::string& label) const {
        auto it = utility_.find(label);
        if (it == utility_.end())
            throw std::invalid_argument("utility table has no entry for outcome '" +
                                        label + "'");
        return it->second;
    }

private:
    double beta_;
    std::map<std::string, double> utility_;
};

/// An alternative probability measure stored as density weights dQ/dP.
class Scenario {
public:
    Scenario(SpacePtr space, std::vector<double> density)
        : space_(std::move(space)), density_(std::move(density)) {
        detail::require(space_ != nullptr, "scenario needs a space");
        detail::require(density_.size() == space_->size(),
                        "scenario density length does not match state count");
        double mass = 0.0;
        for (std::size_t i = 0; i < density_.size(); ++i) {
            detail::require(std::isfinite(density_[i]) && density_[i] >= 0.0,
                            "scenario density must be nonnegative");
            mass += density_[i] * space_->prob(i);
        }
        detail::require(std::abs(mass - 1.0) <= kProbSumTol,
                        "scenario mass must equal 1 within 1e-9 (got " +
                            std::to_string(mass) + ")");
        for (double& d : density_) d /= mass;
    }

    const SpacePtr& space() const { return space_; }
    const std::vector<double>& density() const { return density_; }
    double density_at(std::size_t i) const { return density_.at(i); }

    /// Per-state masses q_i = p_i * dQ/dP(i).
    std::vector<double> masses() const {
        std::vector<double> q(density_.size());
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = space_->prob(i) * density_[i];
        return q;
    }

private:
    SpacePtr space_;
    std::vector<double> density_;
};

/// A subset of state indices (the states an act disappoints in).
struct DisappointmentSet {
    std::vector<std::size_t> members; // sorted, unique

    DisappointmentSet() = default;
    explicit DisappointmentSet(std::vector<std::size_t> m) : members(std::move(m)) {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
    }

    bool contains(std::size_t i) const {
        return std::binary_search(members.begin(), members.end(), i);
    }
    std::size_t size() const { return members.size(); }
    bool empty() const { return members.empty(); }
    bool is_proper(std::size_t n) const { return !members.empty() && members.size() < n; }

    bool operator==(const DisappointmentSet& o) const { return members == o.members; }
    bool operator!=(const DisappointmentSet& o) const { return members != o.members; }
};

inline void require_within(const DisappointmentSet& d, std::size_t n) {
    for (std::size_t i : d.members)
        detail::require(i < n, "disappointment set index " + std::to_string(i) +
                                   " out of range for " + std::to_string(n) + " states");
}

// ============================================================================
// Operations
// ============================================================================

/// States whose value falls strictly below the reference v.
inline DisappointmentSet disappointment_set(const UtilityAct& u, double v) {
    std::vector<std::size_t> m;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u.value(i) < v) m.push_back(i);
    return DisappointmentSet(std::move(m));
}

/// Statewise composition u(X). Reports the first unmapped outcome in state
/// order.
inline UtilityAct apply_utility(const OutcomeAct& x, const Agent& agent) {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = agent.utility_of(x.outcomes()[i]);
    return UtilityAct(x.space(), std::move(v));
}

/// Law of an act: strictly increasing values with merged, positive
/// probabilities. Pairs are sorted by (value, prob) before merging so that
/// permuting states together with their probabilities yields bit-identical
/// output.
inline std::vector<std::pair<double, double>> distribution(const UtilityAct& u) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        pts.emplace_back(u.value(i), u.space()->prob(i));
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> out;
    for (const auto& [v, p] : pts) {
        if (!out.empty() && out.back().first == v)
            out.back().second += p;
        else
            out.emplace_back(v, p);
    }
    return out;
}

enum class FosdOrder {
    dominates_strictly, ///< survival of U >= that of V everywhere, > somewhere
    dominates_weakly,   ///< reserved: cannot occur for finite laws (>= everywhere
                        ///< and not equal implies strict somewhere)
    dominated,          ///< V strictly dominates U
    equal_in_law,
    incomparable,
};

/// First-order stochastic dominance of U over V via survival functions
/// t -> P(. >= t) compared at every jump point of either law.
inline FosdOrder fosd_compare(const UtilityAct& u, const UtilityAct& v) {
    detail::require_same_space(u, v);
    auto du = distribution(u);
    auto dv = distribution(v);

    std::vector<double> grid;
    grid.reserve(du.size() + dv.size());
    for (const auto& [x, p] : du) grid.push_back(x);
    for (const auto& [x, p] : dv) grid.push_back(x);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    // survival(t) = total probability of values >= t, via a backwards walk
    auto survival_at = [](const std::vector<std::pair<double, double>>& d, double t) {
        double s = 0.0;
        for (auto it = d.rbegin(); it != d.rend() && it->first >= t; ++it) s += it->second;
        return s;
    };

    bool u_above = false, v_above = false;
    for (double t : grid) {
        const double su = survival_at(du, t);
        const double sv = survival_at(dv, t);
        if (su > sv) u_above = true;
        if (sv > su) v_above = true;
    }
    if (!u_above && !v_above) return FosdOrder::equal_in_law;
    if (u_above && !v_above) return FosdOrder::dominates_strictly;
    if (!u_above && v_above) return FosdOrder::dominated;
    return FosdOrder::incomparable;
}

inline const char* to_string(FosdOrder o) {
    switch (o) {
        case FosdOrder::dominates_strictly: return "dominates_strictly";
        case FosdOrder::dominates_weakly: return "dominates_weakly";
        case FosdOrder::dominated: return "dominated";
        case FosdOrder::equal_in_law: return "equal_in_law";
        case FosdOrder::incomparable: return "incomparable";
    }
    return "?";
}

} // namespace expectiles
