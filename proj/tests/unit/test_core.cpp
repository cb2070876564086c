#include <catch2/catch_amalgamated.hpp>

#include "expectiles/core.hpp"
#include "expectiles/random.hpp"

using namespace expectiles;
using Catch::Matchers::WithinAbs;

namespace {

SpacePtr uspace(std::size_t n) { return FiniteSpace::uniform(n); }

UtilityAct act(const SpacePtr& s, std::vector<double> v) { return UtilityAct(s, std::move(v)); }

// Dyadic probabilities sum to one exactly in any order, which keeps
// permutation checks bitwise.
SpacePtr dyadic_space(Rng& rng, std::size_t n) {
    std::vector<double> weights(n, 1.0);
    double total = static_cast<double>(n);
    while (total < 64.0) {
        weights[rng.index(n)] += 1.0;
        total += 1.0;
    }
    std::vector<double> probs(n);
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        probs[i] = weights[i] / 64.0;
        labels[i] = "s" + std::to_string(i);
    }
    return FiniteSpace::create(std::move(labels), std::move(probs));
}

} // namespace

TEST_CASE("finite space validation") {
    REQUIRE_THROWS_AS(FiniteSpace({}, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(FiniteSpace({"a", "b"}, {0.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(FiniteSpace({"a", "b"}, {1.2, -0.2}), std::invalid_argument);
    REQUIRE_THROWS_AS(FiniteSpace({"a", "b"}, {0.0, 1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(FiniteSpace({"a", "b"}, {0.5, 0.48}), std::invalid_argument);

    // inside the tolerance band the mass is renormalized exactly
    FiniteSpace s({"a", "b"}, {0.5, 0.5 + 4e-10});
    REQUIRE_THAT(s.prob(0) + s.prob(1), WithinAbs(1.0, 1e-15));

    auto u = FiniteSpace::uniform(3);
    REQUIRE(u->size() == 3);
    REQUIRE(u->label(0) == "s0");
    REQUIRE(u->label(2) == "s2");
}

TEST_CASE("act validation") {
    auto s = uspace(3);
    REQUIRE_THROWS_AS(UtilityAct(s, {1.0, 2.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(UtilityAct(s, {1.0, 2.0, std::nan("")}), std::invalid_argument);
    REQUIRE_THROWS_AS(UtilityAct(s, {1.0, 2.0, INFINITY}), std::invalid_argument);
    REQUIRE_THROWS_AS(OutcomeAct(s, {"a", "b"}), std::invalid_argument);

    UtilityAct u = act(s, {0, 3, 6});
    REQUIRE(u.min_value() == 0.0);
    REQUIRE(u.max_value() == 6.0);
    REQUIRE(u.range() == 6.0);
    REQUIRE(u.distinct_value_count() == 3);
    REQUIRE_FALSE(u.is_constant());
    REQUIRE(act(s, {2, 2, 2}).is_constant());
}

TEST_CASE("agent validation and alpha") {
    REQUIRE_THROWS_AS(Agent(-1.0, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(Agent(-1.0 - 1e-9, {}), std::invalid_argument);
    // 1 + beta underflows to zero in double precision
    REQUIRE_THROWS_AS(Agent(std::nextafter(-1.0, -2.0), {}), std::invalid_argument);
    REQUIRE_THROWS_AS(Agent(std::nan(""), {}), std::invalid_argument);
    REQUIRE_THROWS_AS(Agent(1.0, {{"a", std::nan("")}}), std::invalid_argument);

    Agent a(0.0, {{"x", 1.0}});
    REQUIRE_THAT(a.alpha(), WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(Agent(1.0, {}).alpha(), WithinAbs(1.0 / 3.0, 1e-15));
    REQUIRE(Agent(-0.5, {}).alpha() > 0.5);
}

TEST_CASE("scenario validation") {
    auto s = uspace(2);
    REQUIRE_THROWS_AS(Scenario(s, {1.0, -0.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(Scenario(s, {1.0, 0.5}), std::invalid_argument); // mass 0.75
    Scenario q(s, {1.5, 0.5});
    REQUIRE_THAT(q.masses()[0], WithinAbs(0.75, 1e-15));
    REQUIRE_THAT(q.masses()[1], WithinAbs(0.25, 1e-15));
}

TEST_CASE("disappointment set") {
    auto s = uspace(3);
    UtilityAct u = act(s, {0, 3, 6});

    REQUIRE(disappointment_set(u, 2.25).members == std::vector<std::size_t>{0});
    REQUIRE(disappointment_set(act(s, {5, 5, 5}), 5.0).empty());
    REQUIRE(disappointment_set(u, 7.0).members == std::vector<std::size_t>{0, 1, 2});
    // boundary values are not disappointing
    REQUIRE(disappointment_set(u, 3.0).members == std::vector<std::size_t>{0});

    DisappointmentSet d({2, 0, 2});
    REQUIRE(d.members == std::vector<std::size_t>{0, 2});
    REQUIRE(d.is_proper(3));
    REQUIRE_FALSE(DisappointmentSet({0, 1, 2}).is_proper(3));
    REQUIRE_FALSE(DisappointmentSet().is_proper(3));
}

TEST_CASE("disappointment set monotone in the reference") {
    Rng rng(101);
    auto s = uspace(6);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> v(6);
        for (double& x : v) x = rng.uniform(-5, 5);
        UtilityAct u = act(s, v);
        const double a = rng.uniform(-6, 6);
        const double b = a + rng.uniform(0, 3);
        const auto da = disappointment_set(u, a);
        const auto db = disappointment_set(u, b);
        for (std::size_t i : da.members) REQUIRE(db.contains(i));
    }
}

TEST_CASE("apply utility") {
    auto s2 = uspace(2);
    Agent agent(1.0, {{"a", 1.0}, {"b", 0.0}});
    UtilityAct u = apply_utility(OutcomeAct(s2, {"a", "b"}), agent);
    REQUIRE(u.values() == std::vector<double>{1.0, 0.0});

    auto s3 = uspace(3);
    Agent only_a(0.5, {{"a", 5.0}});
    REQUIRE(apply_utility(OutcomeAct(s3, {"a", "a", "a"}), only_a).values() ==
            std::vector<double>{5.0, 5.0, 5.0});

    REQUIRE_THROWS_WITH(apply_utility(OutcomeAct(s2, {"a", "c"}), agent),
                        Catch::Matchers::ContainsSubstring("'c'"));
}

TEST_CASE("distribution merges duplicates in order") {
    auto s = uspace(3);
    const auto d = distribution(act(s, {3, 3, 0}));
    REQUIRE(d.size() == 2);
    REQUIRE(d[0].first == 0.0);
    REQUIRE_THAT(d[0].second, WithinAbs(1.0 / 3.0, 1e-15));
    REQUIRE(d[1].first == 3.0);
    REQUIRE_THAT(d[1].second, WithinAbs(2.0 / 3.0, 1e-15));

    const auto c = distribution(act(s, {7, 7, 7}));
    REQUIRE(c.size() == 1);
    REQUIRE(c[0].first == 7.0);
    REQUIRE_THAT(c[0].second, WithinAbs(1.0, 1e-15));

    const auto full = distribution(act(s, {0, 3, 6}));
    REQUIRE(full.size() == 3);
    for (const auto& [value, prob] : full) REQUIRE_THAT(prob, WithinAbs(1.0 / 3.0, 1e-15));
}

TEST_CASE("distribution is permutation invariant") {
    Rng rng(2024);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng.index(7);
        auto space = dyadic_space(rng, n);
        std::vector<double> values(n);
        for (double& x : values) x = rng.uniform(-4, 4);
        if (rng.coin()) values[rng.index(n)] = values[0]; // force duplicates sometimes

        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);

        std::vector<double> pvalues(n), pprobs(n);
        std::vector<std::string> plabels(n);
        for (std::size_t i = 0; i < n; ++i) {
            pvalues[i] = values[perm[i]];
            pprobs[i] = space->prob(perm[i]);
            plabels[i] = space->label(perm[i]);
        }
        auto pspace = FiniteSpace::create(plabels, pprobs);
        REQUIRE(distribution(UtilityAct(space, values)) ==
                distribution(UtilityAct(pspace, pvalues)));
    }
}

TEST_CASE("fosd comparison") {
    auto s = uspace(2);
    auto s3 = uspace(3);

    REQUIRE(fosd_compare(act(s, {1, 2}), act(s, {0, 2})) == FosdOrder::dominates_strictly);
    REQUIRE(fosd_compare(act(s, {0, 2}), act(s, {1, 2})) == FosdOrder::dominated);
    REQUIRE(fosd_compare(act(s3, {0, 3, 6}), act(s3, {6, 3, 0})) == FosdOrder::equal_in_law);
    REQUIRE(fosd_compare(act(s, {0, 10}), act(s, {1, 2})) == FosdOrder::incomparable);

    REQUIRE_THROWS_AS(fosd_compare(act(s, {0, 1}), act(s3, {0, 1, 2})),
                      std::invalid_argument);

    // content-equal spaces are accepted
    auto s_copy = FiniteSpace::create(s->labels(), s->probs());
    REQUIRE(fosd_compare(act(s, {1, 2}), act(s_copy, {1, 2})) == FosdOrder::equal_in_law);
}

TEST_CASE("fosd of an act with itself is equality in law") {
    Rng rng(7);
    auto s = uspace(5);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> v(5);
        for (double& x : v) x = rng.uniform(-9, 9);
        UtilityAct u = act(s, v);
        REQUIRE(fosd_compare(u, u) == FosdOrder::equal_in_law);
    }
}

TEST_CASE("act arithmetic") {
    auto s = uspace(2);
    UtilityAct u = act(s, {1, 2});
    REQUIRE((u + act(s, {10, 20})).values() == std::vector<double>{11, 22});
    REQUIRE((u + 1.5).values() == std::vector<double>{2.5, 3.5});
    REQUIRE((2.0 * u).values() == std::vector<double>{2, 4});
    REQUIRE((-u).values() == std::vector<double>{-1, -2});
    auto other = uspace(3);
    REQUIRE_THROWS_AS(u + act(other, {1, 2, 3}), std::invalid_argument);
}
