#include <doctest.h>

#include <cmath>

#include "gibbslab/errors.hpp"
#include "gibbslab/potential.hpp"

using namespace gibbslab;

namespace {

const GroupPresentation& genus2() {
    static const GroupPresentation g = builtin_genus2();
    return g;
}

const Potential& bump() {
    static const Potential F = make_orbit_bump(genus2(), 0.5, 0.8);
    return F;
}

DiskPoint random_point(Rng& rng, double rmax) {
    return point_on_ray({}, BoundaryPoint(uniform(rng, 0.0, kTwoPi)), uniform(rng, 0.0, rmax));
}

// Direct evaluation of F at sample points along the segment with composite Simpson.
double simpson_integral(const Potential& F, DiskPoint a, DiskPoint b, int n) {
    const double L = dist(a, b);
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const DiskPoint p = point_toward(a, b, L * i / n);
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * eval_potential(F, p);
    }
    return s * L / (3.0 * n);
}

// Literal truncated definition: x on the ray from y toward xi at parameter T, in hyperboloid
// coordinates (disk coordinates of x lose precision past T ~ 12).
double literal_log_kernel(const GibbsContext& ctx, DiskPoint y, DiskPoint z, BoundaryPoint xi, double T) {
    const Vec3 Y = to_hyperboloid(y), Z = to_hyperboloid(z);
    const Vec3 X = flow(frame_toward(Y, null_vector(xi)), T).P;
    const Potential& F = ctx.potential;
    // Integrate outward from y and z: a frame at x aimed back would amplify its rounding by e^T.
    return integrate_along(F, frame_between(Z, X), hdist(X, Z), 0.01) -
           integrate_along(F, frame_between(Y, X), hdist(X, Y), 0.01) - ctx.pressure * busemann(xi, y, z);
}

}  // namespace

TEST_CASE("potential evaluation") {
    CHECK(eval_potential(make_zero_potential(), {0.3, 0.1}) == 0.0);
    CHECK(eval_potential(make_constant_potential(2.5), {0.3, 0.1}, 1.0) == 2.5);
    CHECK(eval_potential(bump(), {}) == doctest::Approx(0.5));
    CHECK(potential_profile(bump(), 0.8) == 0.0);
    CHECK(potential_profile(bump(), 0.9) == 0.0);
    CHECK(potential_profile(bump(), 0.4) > 0.0);
    CHECK_THROWS_AS(make_orbit_bump(genus2(), 0.5, 1.6), DomainError);
    CHECK_THROWS_AS(make_orbit_bump(genus2(), 0.5, -1.0), DomainError);
    CHECK_THROWS_AS(eval_potential(bump(), DiskPoint{1.0, 0.0}), DomainError);

    Rng rng(41);
    const GroupBall ball = enumerate_ball(genus2(), 4.0);
    for (int i = 0; i < 500; ++i) {
        const DiskPoint p = random_point(rng, 3.0);
        const auto& e = ball.elements[rng() % ball.elements.size()];
        const double v = eval_potential(bump(), p);
        CHECK(std::abs(eval_potential(bump(), apply(e.matrix, p)) - v) < 1e-9);
        CHECK(std::abs(v) <= bump().bound + 1e-15);
    }
}

TEST_CASE("line integrals") {
    CHECK(line_integral(make_zero_potential(), {}, {0.5, 0.2}) == 0.0);
    const DiskPoint a{0.1, -0.2}, b{-0.6, 0.3};
    CHECK(line_integral(make_constant_potential(1.0), a, b) == doctest::Approx(dist(a, b)).epsilon(1e-12));

    Rng rng(42);
    for (int i = 0; i < 40; ++i) {
        const DiskPoint p = random_point(rng, 3.0), q = random_point(rng, 3.0);
        const double exact = line_integral(bump(), p, q);
        CHECK(exact == doctest::Approx(line_integral(bump(), q, p)).epsilon(1e-9).scale(1.0));
        // Independent oracle: point evaluation plus Simpson, at two resolutions.
        const double s1 = simpson_integral(bump(), p, q, 4000), s2 = simpson_integral(bump(), p, q, 8000);
        CHECK(std::abs(s1 - s2) < 1e-6);
        CHECK(std::abs(exact - s2) < 1e-6);
    }
}

TEST_CASE("user table potential") {
    // Table reproducing a tent profile; integrals converge as O(step^2).
    std::vector<double> vals;
    for (int i = 0; i <= 30; ++i) vals.push_back(std::max(0.0, 1.0 - 0.1 * i));
    const Potential T = make_user_table(genus2(), vals, 0.1);
    CHECK(eval_potential(T, {}) == doctest::Approx(1.0));
    const DiskPoint p{0.2, 0.1}, q{-0.5, 0.4};
    const double a = line_integral(T, p, q, 0.02), b = line_integral(T, p, q, 0.01);
    CHECK(std::abs(a - b) < 1e-3);
    CHECK(std::abs(b - simpson_integral(T, p, q, 20000)) < 1e-3);
    CHECK_THROWS_AS(make_user_table(genus2(), {1.0}, 0.1), DomainError);
}

TEST_CASE("gibbs kernel closed forms") {
    GibbsContext ctx;
    ctx.pressure = 1.0;
    const BoundaryPoint xi(0.0);
    CHECK(gibbs_kernel(ctx, {}, {0.5, 0.0}, xi) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(gibbs_kernel(ctx, {0.2, 0.3}, {0.2, 0.3}, BoundaryPoint(1.0)) == 1.0);
    GibbsContext bctx;
    bctx.potential = bump();
    bctx.pressure = 1.1;
    CHECK(gibbs_kernel(bctx, {0.2, 0.3}, {0.2, 0.3}, BoundaryPoint(1.0)) == 1.0);

    // Constants cancel against the pressure shift.
    Rng rng(43);
    for (int i = 0; i < 50; ++i) {
        const DiskPoint y = random_point(rng, 3.0), z = random_point(rng, 3.0);
        const BoundaryPoint e(uniform(rng, 0.0, kTwoPi));
        GibbsContext c1 = bctx, c2 = bctx;
        c2.potential = shifted(bump(), 0.7);
        c2.pressure = bctx.pressure + 0.7;
        CHECK(log_gibbs_kernel(c1, y, z, e) == doctest::Approx(log_gibbs_kernel(c2, y, z, e)).epsilon(1e-12));
        GibbsContext k1, k2;
        k1.potential = make_constant_potential(0.3);
        k1.pressure = 1.3;
        k2.potential = make_constant_potential(-0.4);
        k2.pressure = 0.6;
        CHECK(log_gibbs_kernel(k1, y, z, e) == doctest::Approx(log_gibbs_kernel(k2, y, z, e)).epsilon(1e-12));
    }
}

TEST_CASE("gibbs kernel matches the literal truncated definition") {
    GibbsContext ctx;
    ctx.potential = bump();
    ctx.pressure = 1.05;
    Rng rng(44);
    for (int i = 0; i < 30; ++i) {
        const DiskPoint y = random_point(rng, 3.0), z = random_point(rng, 3.0);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        const double k = log_gibbs_kernel(ctx, y, z, xi);
        const double lit = literal_log_kernel(ctx, y, z, xi, 18.0);
        // The literal form carries truncation error ~u0 e^{-18} and rounding ~e^{18} eps.
        CHECK(std::abs(k - lit) < 5e-6);
    }
}

TEST_CASE("gibbs kernel cocycle, inversion, equivariance") {
    GibbsContext ctx;
    ctx.potential = bump();
    ctx.pressure = 1.05;
    const GroupBall ball = enumerate_ball(genus2(), 4.0);
    Rng rng(45);
    for (int i = 0; i < 200; ++i) {
        const DiskPoint x = random_point(rng, 4.0), y = random_point(rng, 4.0), z = random_point(rng, 4.0);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        const double kxy = log_gibbs_kernel(ctx, x, y, xi), kyz = log_gibbs_kernel(ctx, y, z, xi);
        const double kxz = log_gibbs_kernel(ctx, x, z, xi);
        CHECK(std::abs(std::expm1(kxy + kyz - kxz)) < 1e-6);
        CHECK(std::abs(std::expm1(kxy + log_gibbs_kernel(ctx, y, x, xi))) < 1e-8);
        const auto& e = ball.elements[rng() % ball.elements.size()];
        const double moved = log_gibbs_kernel(ctx, apply(e.matrix, y), apply(e.matrix, z), apply(e.matrix, xi));
        CHECK(std::abs(std::expm1(moved - kyz)) < 1e-6);
    }
}

TEST_CASE("gibbs kernel quadrature and truncation policy") {
    Rng rng(46);
    std::vector<double> vals;
    for (int i = 0; i <= 30; ++i) vals.push_back(0.3 * std::cos(0.2 * i));
    GibbsContext ctx;
    ctx.potential = make_user_table(genus2(), vals, 0.1);
    ctx.pressure = 1.0;
    ctx.tol = 1e-5;
    for (int i = 0; i < 5; ++i) {
        const DiskPoint y = random_point(rng, 2.0), z = random_point(rng, 2.0);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        GibbsContext fine = ctx;
        fine.quad_step = 0.5 * ctx.quad_step;
        const double a = log_gibbs_kernel(ctx, y, z, xi), b = log_gibbs_kernel(fine, y, z, xi);
        CHECK(std::abs(std::expm1(a - b)) < 4.0 * ctx.tol);
    }
    GibbsContext bad = ctx;
    bad.truncation_T = 0.5;
    bad.tol = 1e-12;
    CHECK_THROWS_AS(log_gibbs_kernel(bad, DiskPoint{0.1, 0.0}, DiskPoint{-0.7, 0.5}, BoundaryPoint(0.3)),
                    ToleranceError);
    bad.truncation_T = -1.0;
    CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("audit_distortion") {
    GibbsContext ctx;
    ctx.pressure = 1.0;
    for (double r : {0.1, 0.5, 1.0}) CHECK(audit_distortion(ctx, r, 64, 7) == doctest::Approx(std::exp(r)).epsilon(1e-12));
    ctx.potential = bump();
    ctx.pressure = 1.05;
    const double l1 = audit_distortion(ctx, 1.0, 100, 8), l05 = audit_distortion(ctx, 0.5, 100, 8);
    const double l01 = audit_distortion(ctx, 0.1, 100, 8);
    CHECK(l01 < l05);
    CHECK(l05 < l1);
    CHECK(l01 < 1.2);
    double lo = 1e9, hi = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const double v = audit_distortion(ctx, 1.0, 40, 100 + s);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi / lo < 2.0);
    CHECK_THROWS_AS(audit_distortion(ctx, 0.0, 10, 1), DomainError);
}
