#include <doctest.h>

#include <cmath>
#include <random>

#include "bransport/traffic_plan.hpp"
#include "test_support.hpp"

using namespace bransport;

TEST_CASE("coupling and marginals of simple plans") {
    TrafficPlan p({{PolyCurve({{0, 0}, {1, 0}}), 1.0}});
    Coupling pi = coupling_of(p);
    REQUIRE(pi.size() == 1);
    CHECK(pi.atoms()[0].mass == 1.0);
    CHECK(approx_point(pi.atoms()[0].src, {0, 0}, 1e-12));
    CHECK(approx_point(pi.atoms()[0].dst, {1, 0}, 1e-12));
    auto [mm, mp] = marginals(p);
    CHECK(mm.mass_at({0, 0}) == 1.0);
    CHECK(mp.mass_at({1, 0}) == 1.0);

    TrafficPlan c({{PolyCurve::constant({0.5, 0.5}), 1.0}});
    Coupling pic = coupling_of(c);
    CHECK(approx_point(pic.atoms()[0].src, pic.atoms()[0].dst, 1e-12));

    // Two atoms with the same endpoints merge into one coupling pair.
    TrafficPlan two({{PolyCurve({{0, 0}, {1, 0}}), 0.5},
                     {PolyCurve({{0, 0}, {0.5, 0.4}, {1, 0}}), 0.5}});
    CHECK(coupling_of(two).size() == 1);
    CHECK(coupling_of(two).atoms()[0].mass == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("marginals add under plan addition") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 20; ++i) {
        TrafficPlan a = testsupport::rand_plan(rng, 2, 1.0);
        TrafficPlan b = testsupport::rand_plan(rng, 2, 1.0);
        auto [am, ap] = marginals(a);
        auto [bm, bp] = marginals(b);
        auto [sm, sp] = marginals(a + b);
        CHECK(sm.approx_equal(am + bm, 1e-9, 1e-12));
        CHECK(sp.approx_equal(ap + bp, 1e-9, 1e-12));
        // coupling projections agree with the marginals
        Coupling pi = coupling_of(a);
        CHECK(pi.first_marginal().approx_equal(am, 1e-9, 1e-12));
        CHECK(pi.second_marginal().approx_equal(ap, 1e-9, 1e-12));
    }
}

TEST_CASE("multiplicity counts atoms once per edge") {
    // Two atoms sharing one unit edge.
    TrafficPlan shared({{PolyCurve({{0, 0}, {1, 0}}), 0.5},
                        {PolyCurve({{0, 0}, {1, 0}, {1, 1}}), 0.5}});
    CHECK(shared.multiplicity_at({0.5, 0}) == doctest::Approx(1.0));
    CHECK(shared.multiplicity_at({1, 0.5}) == doctest::Approx(0.5));
    // Out-and-back counted once.
    TrafficPlan oab({{PolyCurve({{0, 0}, {1, 0}, {0, 0}}), 1.0}});
    CHECK(oab.multiplicity_at({0.5, 0}) == doctest::Approx(1.0));
    // Disjoint supports keep their own masses.
    TrafficPlan disjoint({{PolyCurve({{0, 0}, {1, 0}}), 0.3},
                          {PolyCurve({{0, 1}, {1, 1}}), 0.7}});
    CHECK(disjoint.multiplicity_at({0.5, 0}) == doctest::Approx(0.3));
    CHECK(disjoint.multiplicity_at({0.5, 1}) == doctest::Approx(0.7));
}

TEST_CASE("alpha energy and alpha mass on reference plans") {
    // Single atom: m^alpha * L for both.
    TrafficPlan one({{PolyCurve({{0, 0}, {2, 0}}), 0.4}});
    CHECK(alpha_energy(one, 0.7) == doctest::Approx(std::pow(0.4, 0.7) * 2).epsilon(1e-12));
    CHECK(alpha_mass(one, 0.7) == doctest::Approx(std::pow(0.4, 0.7) * 2).epsilon(1e-12));
    // Two atoms of mass .5 on the same unit segment at alpha = .5.
    TrafficPlan half({{PolyCurve({{0, 0}, {1, 0}}), 0.5}, {PolyCurve({{0, 0}, {1, 0}}), 0.5}});
    CHECK(alpha_energy(half, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    // V-shape alpha-mass.
    TrafficPlan v({{PolyCurve({{0, 0}, {1, 0}}), 0.5}, {PolyCurve({{0, 1}, {1, 1}}), 0.5}});
    CHECK(alpha_mass(v, 0.5) == doctest::Approx(2 * std::sqrt(0.5)).epsilon(1e-12));
    // Out-and-back: energy 2, mass 1, strict gap.
    TrafficPlan oab({{PolyCurve({{0, 0}, {1, 0}, {0, 0}}), 1.0}});
    CHECK(alpha_energy(oab, 0.6) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(alpha_mass(oab, 0.6) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("energy dominates mass with equality exactly on simple-path plans") {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 60; ++i) {
        bool retrace = i % 2 == 1;
        TrafficPlan p = testsupport::rand_plan(rng, 2, 1.0, 4, retrace);
        double alpha = testsupport::rand_range(rng, 0.3, 1.0);
        double e = alpha_energy(p, alpha);
        double m = alpha_mass(p, alpha);
        CHECK(e >= m - 1e-9);
        if (check_simple_path(p))
            CHECK(e == doctest::Approx(m).epsilon(1e-9));
        else
            CHECK(e - m > 1e-6);
    }
}

TEST_CASE("energy and mass ignore orientation") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 20; ++i) {
        TrafficPlan p = testsupport::rand_plan(rng, 2, 1.0);
        double alpha = testsupport::rand_range(rng, 0.3, 1.0);
        TrafficPlan r = p.reversed();
        CHECK(alpha_energy(p, alpha) == doctest::Approx(alpha_energy(r, alpha)).epsilon(1e-9));
        CHECK(alpha_mass(p, alpha) == doctest::Approx(alpha_mass(r, alpha)).epsilon(1e-9));
    }
}

TEST_CASE("alpha = 1 energy is the mass-weighted total stopping time") {
    std::mt19937_64 rng(34);
    for (int i = 0; i < 20; ++i) {
        TrafficPlan p = testsupport::rand_plan(rng, 2, 1.0, 3, i % 3 == 0);
        double expected = 0;
        for (const Atom& a : p.atoms()) expected += a.mass * a.curve.stopping_time();
        CHECK(alpha_energy(p, 1.0) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(check_tpc(p, expected + 1e-12));
        CHECK_FALSE(check_tpc(p, expected - 1e-6));
    }
}

TEST_CASE("tpc bound on explicit plans") {
    TrafficPlan p({{PolyCurve({{0, 0}, {2, 0}}), 1.0}});
    CHECK(check_tpc(p, 2.0));
    CHECK_FALSE(check_tpc(p, 1.9));
}

TEST_CASE("alpha-mass is subadditive in the mass argument") {
    std::mt19937_64 rng(35);
    for (int i = 0; i < 200; ++i) {
        double a = testsupport::rand_range(rng, 0.01, 2.0);
        double b = testsupport::rand_range(rng, 0.01, 2.0);
        double alpha = testsupport::rand_range(rng, 0.05, 0.999);
        double len = testsupport::rand_range(rng, 0.1, 3.0);
        CHECK(len * std::pow(a + b, alpha) <=
              len * std::pow(a, alpha) + len * std::pow(b, alpha) + 1e-12);
    }
}

TEST_CASE("single path check finds divergent fibers") {
    // Two atoms along the same path: fine.
    TrafficPlan same({{PolyCurve({{0, 0}, {1, 0}, {1, 1}}), 0.5},
                      {PolyCurve({{0, 0}, {1, 0}, {1, 1}}), 0.3}});
    CHECK(check_single_path(same).ok);
    TrafficPlan single({{PolyCurve({{0, 0}, {1, 1}}), 1.0}});
    CHECK(check_single_path(single).ok);
    // Two sides of a square between shared corners: violation.
    TrafficPlan square({{PolyCurve({{0, 0}, {1, 0}, {1, 1}}), 0.5},
                        {PolyCurve({{0, 0}, {0, 1}, {1, 1}}), 0.5}});
    SinglePathWitness w = check_single_path(square);
    CHECK_FALSE(w.ok);
    CHECK(w.atom_a >= 0);
    CHECK(w.atom_b >= 0);
}

TEST_CASE("simple path check on plans") {
    TrafficPlan good({{PolyCurve({{0, 0}, {1, 0}}), 1.0}});
    CHECK(check_simple_path(good));
    TrafficPlan bad({{PolyCurve({{0, 0}, {1, 0}}), 0.5},
                     {PolyCurve({{0, 1}, {1, 1}, {0.5, 1}}), 0.5}});
    CHECK_FALSE(check_simple_path(bad));
    // A simple-path plan has equal energy and mass.
    CHECK(alpha_energy(good, 0.5) == doctest::Approx(alpha_mass(good, 0.5)).epsilon(1e-12));
}

TEST_CASE("decompose_by_products splits fibers proportionally") {
    // Identity case.
    TrafficPlan p({{PolyCurve({{0, 0}, {1, 0}}), 1.0}});
    auto parts_one = decompose_by_products(
        p, {{DiscreteMeasure::dirac({0, 0}, 1.0), DiscreteMeasure::dirac({1, 0}, 1.0)}});
    REQUIRE(parts_one.size() == 1);
    CHECK(parts_one[0].approx_equal(p, 1e-12, 1e-12));

    // Disjoint endpoint supports split by endpoints.
    TrafficPlan q({{PolyCurve({{0, 0}, {1, 0}}), 0.5}, {PolyCurve({{0, 1}, {1, 1}}), 0.5}});
    auto parts_two = decompose_by_products(
        q, {{DiscreteMeasure::dirac({0, 0}, 0.5), DiscreteMeasure::dirac({1, 0}, 0.5)},
            {DiscreteMeasure::dirac({0, 1}, 0.5), DiscreteMeasure::dirac({1, 1}, 0.5)}});
    CHECK(parts_two[0].total_mass() == doctest::Approx(0.5));
    CHECK(parts_two[1].total_mass() == doctest::Approx(0.5));
    CHECK(coupling_of(parts_two[0]).mass_at({0, 0}, {1, 0}) == doctest::Approx(0.5));

    // Overlapping products sharing a pair split the fiber in ratio a:b.
    TrafficPlan r({{PolyCurve({{0, 0}, {1, 0}}), 0.6},
                   {PolyCurve({{0, 0}, {0.5, 0.3}, {1, 0}}), 0.4}});
    double a = 0.25, b = 0.75;
    auto parts = decompose_by_products(
        r, {{DiscreteMeasure::dirac({0, 0}, a), DiscreteMeasure::dirac({1, 0}, a)},
            {DiscreteMeasure::dirac({0, 0}, b), DiscreteMeasure::dirac({1, 0}, b)}});
    CHECK(parts[0].total_mass() == doctest::Approx(a).epsilon(1e-12));
    CHECK(parts[1].total_mass() == doctest::Approx(b).epsilon(1e-12));
    // Sum back to the input atom-by-atom.
    TrafficPlan sum = parts[0] + parts[1];
    CHECK(sum.approx_equal(r, 1e-12, 1e-12));
    // Per-part couplings are the products.
    CHECK(coupling_of(parts[0]).mass_at({0, 0}, {1, 0}) == doctest::Approx(a).epsilon(1e-12));

    // Mismatched parts are rejected with the offending pair.
    CHECK_THROWS_AS(decompose_by_products(
                        r, {{DiscreteMeasure::dirac({0, 0}, 1.0),
                             DiscreteMeasure::dirac({2, 0}, 1.0)}}),
                    std::invalid_argument);
}

TEST_CASE("random decompositions sum back to the plan") {
    std::mt19937_64 rng(36);
    for (int i = 0; i < 25; ++i) {
        TrafficPlan p = testsupport::rand_plan(rng, 2, 1.0, 3);
        Coupling pi = coupling_of(p);
        // Split every coupling atom randomly into two parts.
        std::vector<CouplingAtom> pa, pb;
        for (const auto& atom : pi.atoms()) {
            double t = testsupport::rand_range(rng, 0.2, 0.8);
            pa.push_back({atom.src, atom.dst, atom.mass * t});
            pb.push_back({atom.src, atom.dst, atom.mass * (1 - t)});
        }
        auto parts = decompose_by_couplings(p, {Coupling(pa), Coupling(pb)});
        TrafficPlan sum = parts[0] + parts[1];
        CHECK(sum.approx_equal(p, 1e-12, 1e-9));
        CHECK(coupling_of(parts[0]).approx_equal(Coupling(pa), 1e-9, 1e-9));
    }
}

TEST_CASE("semicontinuity smoke test along curated families") {
    // Two parallel strands merging onto a shared segment in the limit: the
    // energies of the approximants stay above the limit energy.
    double alpha = 0.7;
    TrafficPlan limit({{PolyCurve({{0, 0}, {1, 0}}), 0.5}, {PolyCurve({{0, 0}, {1, 0}}), 0.5}});
    double e_limit = alpha_energy(limit, alpha);
    double liminf_merge = 1e300;
    for (int n = 2; n <= 24; ++n) {
        double h = 1.0 / n;
        TrafficPlan pn({{PolyCurve({{0, 0}, {0.5, h}, {1, 0}}), 0.5},
                        {PolyCurve({{0, 0}, {0.5, -h}, {1, 0}}), 0.5}});
        CHECK(check_tpc(pn, 4.0));
        liminf_merge = std::min(liminf_merge, alpha_energy(pn, alpha));
    }
    CHECK(liminf_merge >= e_limit - 1e-6);

    // A hairpin collapsing onto a retraced segment: energies converge to the
    // doubled length from above.
    TrafficPlan retraced({{PolyCurve({{0, 0}, {1, 0}, {0, 0}}), 1.0}});
    double e_retraced = alpha_energy(retraced, alpha);
    double liminf = 1e300;
    for (int n = 4; n <= 24; ++n) {
        double h = 1.0 / n;
        TrafficPlan pn({{PolyCurve({{0, 0}, {1, 0}, {0, h}}), 1.0}});
        liminf = std::min(liminf, alpha_energy(pn, alpha));
    }
    CHECK(liminf >= e_retraced - 1e-6);
}

TEST_CASE("instance config validation") {
    InstanceConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.supercritical());
    InstanceConfig sub{2, 1.0, 0.4, 1.0};
    CHECK_FALSE(sub.supercritical());
    InstanceConfig bad{2, 1.0, 0.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
