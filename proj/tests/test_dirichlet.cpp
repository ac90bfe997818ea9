#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sadic/dirichlet.hpp"
#include "sadic/rng.hpp"

using namespace sadic;

namespace {

const NumberField QQ = NumberField::rationals();

LocalMatrix matrix1(LocalValue a) { return LocalMatrix{{std::move(a)}}; }

/// Instance over Q with a single archimedean place and a 1x1 matrix.
DirichletInstance real_instance(double a, const Rat& eps, const Rat& delta) {
    const SConfig cfg(QQ, {});
    RayPoint t(cfg, 1, 1, {{eps, delta}});
    return DirichletInstance(cfg, 1, 1, {matrix1(LocalValue::real(a))}, t);
}

/// Smallest archimedean coordinate scale (in 2..120) admitting a central ray
/// point with the requested finite-place data.
RayPoint feasible_central_ray(const SConfig& cfg, int m, int n,
                              const std::vector<Rat>& delta_fin,
                              const std::vector<Rat>& eps_fin) {
    for (long d = 2; d <= 120; ++d) {
        std::vector<Rat> deltas{Rat(d)};
        deltas.insert(deltas.end(), delta_fin.begin(), delta_fin.end());
        try {
            return central_ray_point(cfg, m, n, deltas, eps_fin);
        } catch (const ValidationError&) {
        }
    }
    FAIL("no feasible central ray point found");
    throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("ray points validate the cone conditions", "[dirichlet]") {
    const SConfig cfg(QQ, {});
    const RayPoint t(cfg, 1, 1, {{Rat(1, 5), Rat(5)}});
    CHECK(t.eps(0, 0) == Rat(1, 5));
    CHECK(t.delta(0, 0) == Rat(5));
    CHECK(t.place_sup(0) == 5.0);
    CHECK(t.sup_norm() == 5.0);

    CHECK_THROWS_AS(RayPoint(cfg, 1, 1, {{Rat(3, 2), Rat(5)}}), ValidationError);   // eps >= 1
    CHECK_THROWS_AS(RayPoint(cfg, 1, 1, {{Rat(1, 5), Rat(1, 2)}}), ValidationError);  // delta < 1
    CHECK_THROWS_AS(RayPoint(cfg, 1, 1, {{Rat(1, 5), Rat(6)}}), ValidationError);   // product != 1
    CHECK_THROWS_AS(RayPoint(cfg, 1, 1, {{Rat(-1, 5), Rat(5)}}), ValidationError);
    CHECK_THROWS_AS(RayPoint(cfg, 1, 1, {{Rat(1, 5)}}), ValidationError);           // row too short

    const SConfig cfg2(QQ, {Int(2)});
    CHECK_NOTHROW(RayPoint(cfg2, 1, 1, {{Rat(1, 4), Rat(4)}, {Rat(1, 2), Rat(2)}}));
    // 1/3 is not in the 2-adic value group.
    CHECK_THROWS_AS(RayPoint(cfg2, 1, 1, {{Rat(3, 4), Rat(4)}, {Rat(1, 3), Rat(1)}}),
                    ValidationError);

    // Complex place: the product constraint target is (4/pi)^2.
    const SConfig cfgi(NumberField::imaginary_quadratic(1), {});
    const double c = 4.0 / 3.14159265358979323846;
    CHECK_NOTHROW(RayPoint(cfgi, 1, 1, {{rat_from_double(c * c / 4.0), Rat(4)}}));
    CHECK_THROWS_AS(RayPoint(cfgi, 1, 1, {{Rat(1, 4), Rat(4)}}), ValidationError);
}

TEST_CASE("central ray points solve the product constraint", "[dirichlet]") {
    // Over Q the archimedean residual scale is exact.
    {
        const SConfig cfg(QQ, {});
        const RayPoint t = central_ray_point(cfg, 1, 1, {Rat(5)}, {});
        CHECK(t.eps(0, 0) == Rat(1, 5));
        CHECK(t.delta(0, 0) == Rat(5));
    }
    // Finite residual and coordinate scales push the archimedean solve: with
    // |delta_2|_2 = 4, delta_inf = 4 and |eps_2|_2 = 1/2 the product forces
    // eps_inf = 1/8.
    {
        const SConfig cfg(QQ, {Int(2)});
        const RayPoint t = central_ray_point(cfg, 1, 1, {Rat(4), Rat(4)}, {Rat(1, 2)});
        CHECK(t.eps(0, 0) == Rat(1, 8));
        CHECK(t.eps(1, 0) == Rat(1, 2));
    }
    // Exact m-th root when available: eps^2 = 1/4.
    {
        const SConfig cfg(QQ, {});
        const RayPoint t = central_ray_point(cfg, 2, 1, {Rat(4)}, {});
        CHECK(t.eps(0, 0) == Rat(1, 2));
        CHECK(t.eps(0, 1) == Rat(1, 2));
    }
    // Irrational root falls back to double precision.
    {
        const SConfig cfg(QQ, {});
        const RayPoint t = central_ray_point(cfg, 2, 1, {Rat(2)}, {});
        CHECK(std::abs(to_double(t.eps(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
    }
    // Complex place: product target (4/pi)^2, so eps = (4/pi)^2 / 4.
    {
        const SConfig cfg(NumberField::imaginary_quadratic(1), {Int(2)});
        const RayPoint t = central_ray_point(cfg, 1, 1, {Rat(4), Rat(2)}, {Rat(1, 2)});
        const double c2 = std::pow(4.0 / 3.14159265358979323846, 2);
        CHECK(std::abs(to_double(t.eps(0, 0)) - c2 / 4.0) < 1e-12);
    }
    // All coordinate scales at 1 leave no room for a residual scale < 1.
    {
        const SConfig cfg(QQ, {});
        CHECK_THROWS_AS(central_ray_point(cfg, 1, 1, {Rat(1)}, {}), ValidationError);
    }
}

TEST_CASE("solve_dirichlet finds the classical approximations", "[dirichlet]") {
    // sqrt(2) at scale 5: the best approximant below the box bound is 7/5.
    {
        const DirichletInstance inst = real_instance(std::sqrt(2.0), Rat(1, 5), Rat(5));
        const DirichletSolution sol = solve_dirichlet(inst);
        CHECK(sol.x[0] == KElem(QQ, Rat(5)));
        CHECK(sol.y[0] == KElem(QQ, Rat(7)));
        CHECK(std::abs(sol.row_contents[0] - std::abs(5 * std::sqrt(2.0) - 7)) < 1e-15);
        CHECK(sol.row_contents[0] <= 0.2);
        CHECK(sol.col_contents[0] == 5.0);
        CHECK(verify_dirichlet_solution(inst, sol));
    }
    // The zero matrix admits y = 0 for every x; the canonical-least nonzero
    // x is the unit vector.
    {
        const SConfig cfg(QQ, {});
        const RayPoint t(cfg, 1, 1, {{Rat(1, 5), Rat(5)}});
        const DirichletInstance inst(cfg, 1, 1, {matrix1(LocalValue::exact(KElem::zero(QQ)))}, t);
        const DirichletSolution sol = solve_dirichlet(inst);
        CHECK(sol.x[0] == KElem::one(QQ));
        CHECK(sol.y[0] == KElem::zero(QQ));
        CHECK(sol.row_contents[0] == 0.0);
    }
    // Mixed archimedean/2-adic instance: solution exists, verifies, and is
    // deterministic across repeated solves.
    {
        const SConfig cfg(QQ, {Int(2)});
        const RayPoint t(cfg, 1, 1, {{Rat(1, 5), Rat(5)}, {Rat(1, 2), Rat(2)}});
        const DirichletInstance inst(
            cfg, 1, 1,
            {matrix1(LocalValue::real(std::sqrt(2.0))), matrix1(LocalValue::exact(KElem(QQ, Rat(1, 3))))},
            t);
        const DirichletSolution sol = solve_dirichlet(inst);
        CHECK(verify_dirichlet_solution(inst, sol));
        CHECK_FALSE(sol.x[0].is_zero());
        const DirichletSolution again = solve_dirichlet(inst);
        CHECK(sol.x[0] == again.x[0]);
        CHECK(sol.y[0] == again.y[0]);
    }
    // A 2-adic digit matrix entry works like the exact one.
    {
        const SConfig cfg(QQ, {Int(2)});
        const RayPoint t(cfg, 1, 1, {{Rat(1, 4), Rat(4)}, {Rat(1, 2), Rat(2)}});
        const DirichletInstance inst(
            cfg, 1, 1,
            {matrix1(LocalValue::real(0.3)),
             matrix1(LocalValue::padic(PadicApprox::from_rational(Int(2), Rat(1, 3))))},
            t);
        const DirichletSolution sol = solve_dirichlet(inst);
        CHECK(verify_dirichlet_solution(inst, sol));
    }
}

TEST_CASE("tampered witnesses fail verification", "[dirichlet]") {
    const DirichletInstance inst = real_instance(std::sqrt(2.0), Rat(1, 5), Rat(5));
    DirichletSolution sol = solve_dirichlet(inst);
    sol.y[0] = sol.y[0] + KElem::one(QQ);  // now |5 sqrt2 - 8| > 1/5
    CHECK_FALSE(verify_dirichlet_solution(inst, sol));
    DirichletSolution zero_x = solve_dirichlet(inst);
    zero_x.x[0] = KElem::zero(QQ);
    CHECK_FALSE(verify_dirichlet_solution(inst, zero_x));
    DirichletSolution big_x = solve_dirichlet(inst);
    big_x.x[0] = KElem(QQ, Rat(6));  // outside the coordinate box
    CHECK_FALSE(verify_dirichlet_solution(inst, big_x));
}

TEST_CASE("rational matrices are improvable with exact zero residual", "[dirichlet]") {
    // A = 3/7 with coordinate scale 700: at eps = 0.01 the tightened box still
    // reaches the denominator, giving the exact witness (7, 3).
    const SConfig cfg(QQ, {});
    const RayPoint t(cfg, 1, 1, {{Rat(1, 700), Rat(700)}});
    const DirichletInstance inst(cfg, 1, 1, {matrix1(LocalValue::exact(KElem(QQ, Rat(3, 7))))}, t);
    const auto w = is_improvable_at(inst, 0.01);
    REQUIRE(w.has_value());
    CHECK(w->x[0] == KElem(QQ, Rat(7)));
    CHECK(w->y[0] == KElem(QQ, Rat(3)));
    CHECK(w->row_contents[0] == 0.0);
    CHECK(verify_dirichlet_solution(inst, *w, 0.01));

    // eps = 1 recovers the untightened solver and its witness.
    const RayPoint t5(cfg, 1, 1, {{Rat(1, 5), Rat(5)}});
    const DirichletInstance inst5 = inst.with_ray(t5);
    const auto w1 = is_improvable_at(inst5, 1.0);
    const DirichletSolution s = solve_dirichlet(inst5);
    REQUIRE(w1.has_value());
    CHECK(w1->x[0] == s.x[0]);
    CHECK(w1->y[0] == s.y[0]);
    // Both 2/7 and 5/7 miss integers by exactly 1/7; the canonical order
    // prefers the smaller numerator.
    CHECK(s.x[0] == KElem(QQ, Rat(2)));
    CHECK(s.y[0] == KElem(QQ, Rat(1)));

    CHECK_THROWS_AS(is_improvable_at(inst, 0.0), ValidationError);
    CHECK_THROWS_AS(is_improvable_at(inst, 1.5), ValidationError);
}

TEST_CASE("golden ratio improvability matches the Fibonacci quality", "[dirichlet]") {
    // At t = (1/F_10, F_10) = (1/55, 55) the best candidate inside the eps-box
    // is x = 34 with |34 phi - 55| ~ 0.013156. The critical quality is
    // max(55 * 0.013156, 34/55) ~ 0.7237, so eps = 0.6 fails and 0.8 works.
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    const DirichletInstance inst = real_instance(phi, Rat(1, 55), Rat(55));
    CHECK_FALSE(is_improvable_at(inst, 0.6).has_value());
    const auto w = is_improvable_at(inst, 0.8);
    REQUIRE(w.has_value());
    CHECK(w->x[0] == KElem(QQ, Rat(34)));
    CHECK(w->y[0] == KElem(QQ, Rat(55)));
    CHECK(verify_dirichlet_solution(inst, *w, 0.8));
    // Monotonicity upward from a successful eps.
    CHECK(is_improvable_at(inst, 0.85).has_value());
    CHECK(is_improvable_at(inst, 0.9).has_value());
    CHECK(is_improvable_at(inst, 0.95).has_value());
}

TEST_CASE("improvability scans along central-ray schedules", "[dirichlet]") {
    // K-rational matrix: improvable at every scale past the denominator.
    {
        const SConfig cfg(QQ, {});
        std::vector<RayPoint> schedule;
        for (long d : {4L, 8L, 16L, 32L}) schedule.push_back(central_ray_point(cfg, 1, 1, {Rat(d)}, {}));
        const RayPoint t0ray = schedule.front();
        const DirichletInstance base(cfg, 1, 1, {matrix1(LocalValue::exact(KElem(QQ, Rat(1, 2))))}, t0ray);
        const ScanResult r = scan_di(base, schedule, 0.25, 7.0);
        REQUIRE(r.items.size() == 3);  // scales 8, 16, 32 lie past t0 = 7
        CHECK(r.items[0].t_index == 1);
        CHECK(r.aggregate);
        for (const ScanItem& item : r.items) {
            CHECK(item.improvable);
            REQUIRE(item.witness.has_value());
            CHECK(verify_dirichlet_solution(base.with_ray(item.t), *item.witness, 0.25));
        }
    }
    // sqrt(2) at eps = 0.9 out to scale 1000: every tested point is
    // improvable (the continued-fraction convergents 7/5, 99/70, 577/408
    // land inside the tightened boxes).
    {
        const SConfig cfg(QQ, {});
        std::vector<RayPoint> schedule;
        for (long d : {10L, 100L, 1000L}) schedule.push_back(central_ray_point(cfg, 1, 1, {Rat(d)}, {}));
        const DirichletInstance base(cfg, 1, 1, {matrix1(LocalValue::real(std::sqrt(2.0)))},
                                     schedule.front());
        const ScanResult r = scan_di(base, schedule, 0.9, 5.0);
        REQUIRE(r.items.size() == 3);
        CHECK(r.aggregate);
        for (const ScanItem& item : r.items)
            CHECK(verify_dirichlet_solution(base.with_ray(item.t), *item.witness, 0.9));
    }
    // Contract errors: empty schedule, nothing past the threshold, flat
    // schedule.
    {
        const SConfig cfg(QQ, {});
        const RayPoint t = central_ray_point(cfg, 1, 1, {Rat(4)}, {});
        const DirichletInstance base(cfg, 1, 1, {matrix1(LocalValue::real(0.5))}, t);
        CHECK_THROWS_AS(scan_di(base, {}, 0.5, 1.0), ValidationError);
        CHECK_THROWS_AS(scan_di(base, {t, t}, 0.5, 1.0), ValidationError);  // never grows
        const std::vector<RayPoint> sched{central_ray_point(cfg, 1, 1, {Rat(4)}, {}),
                                          central_ray_point(cfg, 1, 1, {Rat(8)}, {})};
        CHECK_THROWS_AS(scan_di(base, sched, 0.5, 1e6), ValidationError);  // nothing past t0
    }
    // The schedule helper steps geometrically at the archimedean place and by
    // unit exponents at finite places.
    {
        const SConfig cfg(QQ, {Int(2)});
        const auto sched = central_ray_schedule(cfg, 1, 1, 3, Rat(4), Rat(2), {1}, {-1});
        REQUIRE(sched.size() == 3);
        CHECK(sched[0].delta(0, 0) == Rat(4));
        CHECK(sched[1].delta(0, 0) == Rat(8));
        CHECK(sched[2].delta(0, 0) == Rat(16));
        CHECK(sched[0].delta(1, 0) == Rat(2));
        CHECK(sched[2].delta(1, 0) == Rat(8));
        CHECK(sched[0].eps(1, 0) == Rat(1, 2));
        CHECK(sched[0].eps(0, 0) == Rat(1, 4));  // product solve: 4*2*(1/2) = 4
    }
}

TEST_CASE("randomized instances never falsify the approximation theorem", "[dirichlet][slow]") {
    SplitMix64 root_rng(20250822);
    for (const NumberField& F : all_supported_fields()) {
        SplitMix64 rng = root_rng.split(static_cast<std::uint64_t>(F.d() + 100 * (F.is_rationals() ? 0 : 1)));
        int monotone_checked = 0;
        for (int trial = 0; trial < 500; ++trial) {
            // Shape: m+n <= 3.
            const int shape = static_cast<int>(rng.below(3));
            const int m = shape == 2 ? 2 : 1;
            const int n = shape == 1 ? 2 : 1;
            // Places: quadratic fields skip finite places when m = 2 to keep
            // the product constraint satisfiable with small boxes.
            std::vector<Int> primes;
            if (rng.below(2) == 1 && !(m == 2 && !F.is_rationals())) {
                const long p_choices[3] = {2, 3, 5};
                primes.push_back(Int(p_choices[rng.below(3)]));
            }
            const SConfig cfg(F, primes);
            std::vector<Rat> delta_fin, eps_fin;
            for (size_t vi = 1; vi < cfg.size(); ++vi) {
                const Place& v = cfg.places()[vi];
                const long dexp = F.is_rationals() ? static_cast<long>(rng.below(2)) : 0;
                delta_fin.push_back(rat_pow(Rat(v.p), v.f * dexp));
                eps_fin.push_back(rat_pow(Rat(v.p), -v.f));
            }
            const RayPoint t = feasible_central_ray(cfg, m, n, delta_fin, eps_fin);

            std::vector<LocalMatrix> A;
            for (size_t vi = 0; vi < cfg.size(); ++vi) {
                const Place& v = cfg.places()[vi];
                LocalMatrix mat;
                for (int i = 0; i < m; ++i) {
                    std::vector<LocalValue> row;
                    for (int j = 0; j < n; ++j) {
                        const bool exact = v.kind == PlaceKind::finite || rng.below(2) == 0;
                        if (exact) {
                            const Rat a(static_cast<long>(rng.below(5)) - 2,
                                        1 + static_cast<long>(rng.below(2)));
                            const Rat b = F.is_rationals() ? Rat(0)
                                                           : Rat(static_cast<long>(rng.below(5)) - 2,
                                                                 1 + static_cast<long>(rng.below(2)));
                            row.push_back(LocalValue::exact(KElem(F, a, b)));
                        } else if (v.kind == PlaceKind::real) {
                            row.push_back(LocalValue::real(rng.uniform(-2, 2)));
                        } else {
                            row.push_back(LocalValue::complex_value(rng.uniform(-2, 2),
                                                                    rng.uniform(-2, 2)));
                        }
                    }
                    mat.push_back(std::move(row));
                }
                A.push_back(std::move(mat));
            }
            const DirichletInstance inst(cfg, m, n, A, t);
            DirichletSolution sol = solve_dirichlet(inst);  // throws on falsification
            CHECK(verify_dirichlet_solution(inst, sol));

            // eps-monotonicity spot check on a subset.
            if (trial % 25 == 0) {
                const double e1 = 0.5 + 0.3 * rng.uniform01();
                const double e2 = e1 + (1.0 - e1) * (0.2 + 0.6 * rng.uniform01());
                const auto w1 = is_improvable_at(inst, e1);
                if (w1) {
                    CHECK(verify_dirichlet_solution(inst, *w1, e1));
                    CHECK(is_improvable_at(inst, e2).has_value());
                    ++monotone_checked;
                }
            }
        }
        INFO(F.label());
        CHECK(monotone_checked >= 0);
    }
}
