#include <catch2/catch_amalgamated.hpp>

#include "expectiles/axioms.hpp"
#include "expectiles/dual.hpp"
#include "expectiles/random.hpp"

using namespace expectiles;
using Catch::Matchers::WithinAbs;

namespace {

SpacePtr uspace(std::size_t n) { return FiniteSpace::uniform(n); }

UtilityAct act(const SpacePtr& s, std::vector<double> v) { return UtilityAct(s, std::move(v)); }

} // namespace

TEST_CASE("event scenario on the worked example") {
    auto s = uspace(3);
    const Scenario q = event_scenario(s, DisappointmentSet({0}), 1.0);
    REQUIRE_THAT(q.density_at(0), WithinAbs(1.5, 1e-14));
    REQUIRE_THAT(q.density_at(1), WithinAbs(0.75, 1e-14));
    REQUIRE_THAT(q.density_at(2), WithinAbs(0.75, 1e-14));
    const auto masses = q.masses();
    REQUIRE_THAT(masses[0], WithinAbs(0.5, 1e-14));
    REQUIRE_THAT(masses[1], WithinAbs(0.25, 1e-14));
    REQUIRE_THAT(masses[2], WithinAbs(0.25, 1e-14));

    // empty or full events leave the reference measure untouched
    for (const DisappointmentSet& d :
         {DisappointmentSet(), DisappointmentSet({0, 1, 2})}) {
        const Scenario p = event_scenario(s, d, 3.0);
        for (double dens : p.density()) REQUIRE_THAT(dens, WithinAbs(1.0, 1e-14));
    }

    REQUIRE_THROWS_AS(event_scenario(s, DisappointmentSet({5}), 1.0),
                      std::invalid_argument);
}

TEST_CASE("scenario value") {
    auto s = uspace(3);
    UtilityAct u = act(s, {0, 3, 6});
    const Scenario q = event_scenario(s, DisappointmentSet({0}), 1.0);
    REQUIRE_THAT(scenario_value(u, q), WithinAbs(2.25, 1e-14));

    const Scenario p = event_scenario(s, DisappointmentSet(), 1.0);
    REQUIRE_THAT(scenario_value(u, p), WithinAbs(u.mean(), 1e-14));
    REQUIRE_THAT(scenario_value(act(s, {4, 4, 4}), q), WithinAbs(4.0, 1e-14));

    auto other = uspace(4);
    REQUIRE_THROWS_AS(scenario_value(act(other, {1, 2, 3, 4}), q), std::invalid_argument);
}

TEST_CASE("optimal scenario attains the expectile") {
    auto s = uspace(3);
    UtilityAct u = act(s, {0, 3, 6});
    const Scenario q = optimal_scenario(u, 1.0);
    const auto masses = q.masses();
    REQUIRE_THAT(masses[0], WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(masses[1], WithinAbs(0.25, 1e-12));
    REQUIRE_THAT(scenario_value(u, q), WithinAbs(2.25, 1e-12));

    // beta = 0 never distorts
    const Scenario p = optimal_scenario(u, 0.0);
    for (double dens : p.density()) REQUIRE_THAT(dens, WithinAbs(1.0, 1e-14));

    // constant acts have an empty disappointment set
    const Scenario c = optimal_scenario(act(s, {5, 5, 5}), 2.0);
    for (double dens : c.density()) REQUIRE_THAT(dens, WithinAbs(1.0, 1e-14));

    Rng rng(21);
    for (int t = 0; t < 200; ++t) {
        auto space = gen_random_space(rng, 2 + rng.index(9));
        UtilityAct x = gen_random_act(space, rng, -100, 100);
        for (double beta : {-0.9, -0.5, 0.0, 0.5, 1.0, 5.0}) {
            REQUIRE_THAT(scenario_value(x, optimal_scenario(x, beta)),
                         WithinAbs(expectile(x, beta), 1e-10));
        }
    }
}

TEST_CASE("brute force dual on the worked example") {
    auto s = uspace(3);
    UtilityAct u = act(s, {0, 3, 6});

    const DualOptimum best = brute_force_dual(u, 1.0);
    REQUIRE_THAT(best.value, WithinAbs(2.25, 1e-12));
    REQUIRE(best.event.members == std::vector<std::size_t>{0});

    // mask order: {}, {0}, {1}, {0,1}, {2}, {0,2}, {1,2}, {0,1,2}
    const std::vector<double> expected = {3.0, 2.25, 3.0, 2.4, 3.75, 3.0, 3.6, 3.0};
    const auto table = brute_force_table(u, 1.0);
    REQUIRE(table.size() == 8);
    for (std::size_t i = 0; i < 8; ++i)
        REQUIRE_THAT(table[i].value, WithinAbs(expected[i], 1e-12));

    // all scenarios coincide with P when beta = 0; ties resolve to the
    // lexicographically smallest event
    const DualOptimum flat = brute_force_dual(u, 0.0);
    REQUIRE_THAT(flat.value, WithinAbs(3.0, 1e-14));
    REQUIRE(flat.event.empty());

    auto s1 = uspace(1);
    const DualOptimum single = brute_force_dual(act(s1, {7}), 2.0);
    REQUIRE(single.value == 7.0);
    REQUIRE(single.event.empty());
}

TEST_CASE("enumeration guard") {
    auto s = uspace(25);
    UtilityAct u(s, std::vector<double>(25, 1.0));
    REQUIRE_THROWS_WITH(brute_force_dual(u, 1.0),
                        Catch::Matchers::ContainsSubstring("guard"));
    REQUIRE_THROWS_AS(brute_force_table(u, 1.0), std::invalid_argument);
    // the documented override lifts the guard (checked at 2^25 would be slow
    // but valid; here just confirm the gate logic via the table variant on a
    // smaller case)
    REQUIRE_NOTHROW(brute_force_dual(act(uspace(3), {1, 2, 3}), 1.0, true));
}

TEST_CASE("brute force agrees with the solver family") {
    Rng rng(22);
    for (int t = 0; t < 150; ++t) {
        auto space = gen_random_space(rng, 2 + rng.index(9));
        UtilityAct u = gen_random_act(space, rng, -100, 100);
        for (double beta : {0.0, 0.5, 1.0, 5.0, -0.9, -0.5}) {
            const DualOptimum best = brute_force_dual(u, beta);
            REQUIRE_THAT(best.value, WithinAbs(expectile(u, beta), 1e-9));
        }
    }
}

TEST_CASE("every event scenario bounds the expectile from the right side") {
    Rng rng(23);
    for (int t = 0; t < 50; ++t) {
        auto space = gen_random_space(rng, 2 + rng.index(6));
        UtilityAct u = gen_random_act(space, rng, -50, 50);
        for (double beta : {0.5, 1.0, 5.0}) {
            const double v = expectile(u, beta);
            for (const EventValue& row : brute_force_table(u, beta))
                REQUIRE(row.value >= v - 1e-10);
        }
        for (double beta : {-0.9, -0.5}) {
            const double v = expectile(u, beta);
            for (const EventValue& row : brute_force_table(u, beta))
                REQUIRE(row.value <= v + 1e-10);
        }
    }
}

TEST_CASE("boundary states do not change the attained value") {
    // Extend acts with a state sitting exactly at the expectile, then compare
    // the strict-set scenario with the weak-set one.
    Rng rng(24);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng.index(6);
        auto space = uspace(n);
        UtilityAct base = gen_random_act(space, rng, -20, 20);
        const double beta = std::vector<double>{-0.5, 0.5, 1.0, 5.0}[rng.index(4)];
        const double v = expectile(base, beta);

        std::vector<double> values = base.values();
        values.push_back(v); // a state exactly on the boundary
        auto extended_space = uspace(n + 1);
        UtilityAct u(extended_space, values);
        REQUIRE_THAT(expectile(u, beta), WithinAbs(v, 1e-9));

        const double ve = expectile(u, beta);
        std::vector<std::size_t> strict, weak;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u.value(i) < ve) strict.push_back(i);
            if (u.value(i) <= ve) weak.push_back(i);
        }
        const double value_strict =
            scenario_value(u, event_scenario(extended_space, DisappointmentSet(strict), beta));
        const double value_weak =
            scenario_value(u, event_scenario(extended_space, DisappointmentSet(weak), beta));
        REQUIRE_THAT(value_strict, WithinAbs(value_weak, 1e-10));
        REQUIRE_THAT(value_strict, WithinAbs(ve, 1e-10));
    }
}

TEST_CASE("density ratio membership") {
    auto s = uspace(2);
    REQUIRE(density_ratio_cap(1.0) == 2.0);
    REQUIRE(density_ratio_cap(-0.5) == 2.0);
    REQUIRE(density_ratio_cap(0.0) == 1.0);

    // ratio 3 exceeds gamma(1) = 2
    REQUIRE_FALSE(scenario_in_density_set(Scenario(s, {1.5, 0.5}), 1.0));
    REQUIRE(scenario_in_density_set(Scenario(s, {1.0, 1.0}), 1.0));
    REQUIRE(scenario_in_density_set(Scenario(s, {1.0, 1.0}), -0.9));

    // the event-distortion family sits inside the density-ratio family
    Rng rng(25);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng.index(6);
        auto space = gen_random_space(rng, n);
        const DisappointmentSet d = gen_proper_subset(n, rng);
        for (double beta : {-0.9, -0.5, 0.0, 0.5, 1.0, 5.0, 50.0})
            REQUIRE(scenario_in_density_set(event_scenario(space, d, beta), beta));
    }
}
