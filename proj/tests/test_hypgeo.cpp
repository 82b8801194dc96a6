#include <doctest.h>

#include <cmath>

#include "gibbslab/errors.hpp"
#include "gibbslab/hypgeo.hpp"
#include "gibbslab/numeric.hpp"

using namespace gibbslab;

namespace {

DiskPoint random_point(Rng& rng, double rmax) {
    const double r = uniform(rng, 0.0, rmax);
    return DiskPoint::from(std::polar(std::tanh(0.5 * r), uniform(rng, 0.0, kTwoPi)));
}

Isometry random_isometry(Rng& rng, double rmax) {
    return Isometry::translation_to(random_point(rng, rmax)) *
           Isometry::rotation(uniform(rng, 0.0, kTwoPi));
}

// Integrates 2|dz|/(1-|z|^2) along a segment with composite Simpson.
double metric_length(cplx p, cplx q, int n = 20000) {
    double s = 0.0;
    const double h = 1.0 / n;
    for (int i = 0; i <= n; ++i) {
        const cplx z = p + (q - p) * (i * h);
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * 2.0 / (1.0 - std::norm(z));
    }
    return s * h / 3.0 * std::abs(q - p);
}

// Smallest angular offset at which the ray from 0 misses B(z,R), by bisection on distance_to_ray.
double scanned_halfwidth(DiskPoint z, double R) {
    const double phi = std::arg(z.z());
    double lo = 0.0, hi = kPi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (distance_to_ray(z, DiskPoint{}, BoundaryPoint(phi + mid)) < R)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace

TEST_CASE("dist oracles") {
    CHECK(dist({}, {}) == 0.0);
    CHECK(dist({}, {0.5, 0.0}) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(metric_length(0.0, 0.5) == doctest::Approx(std::log(3.0)).epsilon(1e-10));
    const cplx p{0.1, -0.3}, q{-0.4, 0.5};
    // Straight Euclidean segments are not geodesics off-diameter, so only the diameter is integrated.
    CHECK(metric_length(0.0, q) == doctest::Approx(dist({}, DiskPoint::from(q))).epsilon(1e-9));
    CHECK(dist(DiskPoint::from(p), DiskPoint::from(q)) > 0.0);
    CHECK_THROWS_AS(dist({1.0, 0.0}, {}), DomainError);
}

TEST_CASE("dist is isometry invariant and symmetric") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const DiskPoint p = random_point(rng, 6.0), q = random_point(rng, 6.0);
        const Isometry g = random_isometry(rng, 3.0);
        const double d = dist(p, q);
        CHECK(d == doctest::Approx(dist(q, p)).epsilon(1e-12));
        CHECK(dist(apply(g, p), apply(g, q)) == doctest::Approx(d).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("apply: rotation, inverse and composition laws") {
    const DiskPoint r = apply(Isometry::rotation(0.5 * kPi), DiskPoint{0.5, 0.0});
    CHECK(r.x == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(r.y == doctest::Approx(0.5));
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        const Isometry g = random_isometry(rng, 4.0), h = random_isometry(rng, 4.0);
        const DiskPoint p = random_point(rng, 4.0);
        const DiskPoint back = apply(g, apply(g.inverse(), p));
        CHECK(std::abs(back.z() - p.z()) < 1e-10);
        const DiskPoint gh = apply(g * h, p), seq = apply(g, apply(h, p));
        CHECK(std::abs(gh.z() - seq.z()) < 1e-10);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        CHECK(std::abs(angle_diff(apply(g * h, xi).theta, apply(g, apply(h, xi)).theta)) < 1e-10);
    }
    CHECK_THROWS_AS(Isometry::from_entries(1.0, 1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(Isometry::from_entries(1.0, 2.0, 0.0, 1.0), DomainError);
}

TEST_CASE("busemann oracles and identities") {
    const BoundaryPoint xi0(0.0);
    CHECK(busemann(xi0, {0.3, 0.2}, {0.3, 0.2}) == doctest::Approx(0.0).scale(1.0));
    CHECK(busemann(xi0, {}, {0.5, 0.0}) == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
    CHECK(busemann_truncated(xi0, {}, {0.5, 0.0}, 30.0) == doctest::Approx(-std::log(3.0)).epsilon(1e-10));

    Rng rng(13);
    for (int i = 0; i < 10000; ++i) {
        const DiskPoint x = random_point(rng, 5.0), y = random_point(rng, 5.0), z = random_point(rng, 5.0);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        const double cocycle = busemann(xi, x, y) + busemann(xi, y, z) - busemann(xi, x, z);
        CHECK(std::abs(cocycle) < 1e-9);
        CHECK(std::abs(busemann(xi, y, z)) <= dist(y, z) + 1e-9);
    }
    for (int i = 0; i < 2000; ++i) {
        const DiskPoint y = random_point(rng, 4.0), z = random_point(rng, 4.0);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        const Isometry g = random_isometry(rng, 3.0);
        CHECK(std::abs(busemann(apply(g, xi), apply(g, y), apply(g, z)) - busemann(xi, y, z)) < 1e-9);
        CHECK(std::abs(busemann_truncated(xi, y, z, 30.0) - busemann(xi, y, z)) < 1e-8);
    }
}

TEST_CASE("shadow oracles") {
    const DiskPoint z{0.5, 0.0};
    CHECK(shadow({}, z, 2.0).full());
    const Arc a = shadow({}, z, 1.0);
    CHECK(a.halfwidth == doctest::Approx(std::asin(std::sinh(1.0) / std::sinh(std::log(3.0)))));
    CHECK(a.halfwidth == doctest::Approx(1.0791).epsilon(5e-4));
    CHECK(a.halfwidth == doctest::Approx(scanned_halfwidth(z, 1.0)).epsilon(1e-9));
    CHECK(a.center.theta == doctest::Approx(0.0).scale(1.0));

    Rng rng(14);
    for (int i = 0; i < 200; ++i) {
        const BoundaryPoint dir(uniform(rng, 0.0, kTwoPi));
        const double d1 = uniform(rng, 1.5, 8.0), d2 = d1 + uniform(rng, 0.1, 3.0);
        const double R = uniform(rng, 0.2, 1.4);
        const Arc s1 = shadow({}, point_on_ray({}, dir, d1), R);
        const Arc s2 = shadow({}, point_on_ray({}, dir, d2), R);
        CHECK(s2.halfwidth < s1.halfwidth);
    }
}

TEST_CASE("shadow agrees with a brute-force angular scan") {
    Rng rng(15);
    for (int i = 0; i < 20; ++i) {
        const DiskPoint o = random_point(rng, 1.5), z = random_point(rng, 4.0);
        const double R = uniform(rng, 0.3, 1.5);
        const Arc s = shadow(o, z, R);
        const int n = 721;
        const double step = kTwoPi / (n - 1);
        int mismatched = 0;
        for (int k = 0; k < n - 1; ++k) {
            const BoundaryPoint xi(k * step);
            const bool hit = distance_to_ray(z, o, xi) < R;
            if (hit != s.contains(xi)) {
                // Allowed only within one scan step of an endpoint.
                const double off = std::abs(std::abs(angle_diff(xi.theta, s.center.theta)) - s.halfwidth);
                CHECK(off <= step);
                ++mismatched;
            }
        }
        CHECK(mismatched <= 2);
    }
}

TEST_CASE("shadow_from_boundary") {
    const BoundaryPoint xi0(0.3);
    const DiskPoint z = point_on_ray({}, BoundaryPoint(0.3 + kPi), 1.2);
    const Arc a = shadow_from_boundary(xi0, z, 0.8);
    CHECK(std::abs(angle_diff(a.center.theta, 0.3 + kPi)) < 1e-12);
    CHECK(!a.contains(xi0));
    const DiskPoint z1 = point_on_ray({}, BoundaryPoint(1.0), 2.0);
    CHECK(shadow_from_boundary(xi0, z1, 0.1).halfwidth > shadow_from_boundary(xi0, z1, 0.01).halfwidth);
    CHECK(shadow_from_boundary(xi0, z1, 0.01).halfwidth < 0.05);
    CHECK(shadow_from_boundary(xi0, z1, 1e-6).halfwidth < 1e-5);

    // Cone inclusion: from a point z0 beyond the ball on the xi0 side the shadow is larger.
    Rng rng(16);
    for (int i = 0; i < 200; ++i) {
        const BoundaryPoint x0(uniform(rng, 0.0, kTwoPi));
        const DiskPoint zz = random_point(rng, 3.0);
        const double R = uniform(rng, 0.2, 1.0);
        const DiskPoint z0 = point_on_ray(zz, x0, uniform(rng, R + 0.5, 6.0));
        CHECK(shadow(z0, zz, R).contains(shadow_from_boundary(x0, zz, R), 1e-9));
    }
}

TEST_CASE("shadow subdivision nesting along a ray") {
    Rng rng(17);
    for (int i = 0; i < 300; ++i) {
        const double R = uniform(rng, 1.0, 6.0);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        // z_0 is the far end; z_i moves back toward o by R/2 per step.
        const double top = 3.0 * R + uniform(rng, 0.0, 5.0);
        for (int i = 1; i < 6 && top - i * 0.5 * R > 0.0; ++i) {
            const DiskPoint zi = point_on_ray({}, xi, top - i * 0.5 * R);
            const DiskPoint zprev = point_on_ray({}, xi, top - (i - 1) * 0.5 * R);
            CHECK(shadow({}, zprev, R).contains(shadow({}, zi, 0.5 * R), 1e-12));
            CHECK(shadow({}, zi, R).contains(shadow({}, zprev, R), 1e-12));
        }
    }
}

TEST_CASE("gromov products") {
    Rng rng(18);
    const DiskPoint w = random_point(rng, 2.0), x = random_point(rng, 3.0);
    CHECK(gromov_product(x, x, w) == doctest::Approx(dist(w, x)));
    const BoundaryPoint xi(0.7);
    const DiskPoint y = point_on_ray({}, xi, 1.0), x2 = point_on_ray({}, xi, 3.0);
    CHECK(gromov_product(x2, y, {}) == doctest::Approx(1.0));
    // Boundary extension from the origin is -log(sin(phi/2)).
    const BoundaryPoint eta(2.0);
    CHECK(gromov_product(xi, eta, {}) == doctest::Approx(-std::log(std::sin(0.65))).epsilon(1e-8));
    CHECK(gromov_product(xi, y, {}) == doctest::Approx(1.0).epsilon(1e-8));
    const double delta = gromov_delta_sweep(10000, 6.0, 19);
    CHECK(delta >= 0.0);
    CHECK(delta < std::log(3.0));
}

TEST_CASE("visual balls") {
    const BoundaryPoint xi(1.0);
    CHECK(visual_ball(xi, 1.0).full());
    CHECK(visual_ball(xi, 2.0).full());
    double prev = kPi;
    for (double r = 0.9; r > 1e-4; r *= 0.5) {
        const Arc a = visual_ball(xi, r);
        CHECK(a.halfwidth < prev);
        prev = a.halfwidth;
        const BoundaryPoint edge(xi.theta + a.halfwidth);
        CHECK(visual_distance(xi, edge) == doctest::Approx(r).epsilon(1e-9));
    }
}

TEST_CASE("visual ball sandwich around shadows") {
    Rng rng(20);
    const double R = 2.0;
    double cmax = 1.0;
    for (int i = 0; i < 500; ++i) {
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        const double d = uniform(rng, R + 0.5, 15.0);
        const DiskPoint x = point_on_ray({}, xi, d);
        const Arc s = shadow({}, x, R);
        const double r0 = std::exp(-d + R);
        // Find the smallest C that makes B(xi, r0/C) inside and B(xi, C r0) around the shadow.
        const double inner = visual_distance(xi, BoundaryPoint(xi.theta + s.halfwidth)) / r0;
        cmax = std::max({cmax, 1.0 / inner, inner});
    }
    CHECK(cmax < 10.0);
    CHECK(cmax >= 1.0);
}

TEST_CASE("audit_geometry") {
    CHECK_THROWS_AS(audit_geometry(0, 4.0, 1), DomainError);
    const GeometryAudit g = audit_geometry(2000, 4.0, 21);
    CHECK(g.theta0 > 0.0);
    CHECK(g.theta0_reference == doctest::Approx(ideal_triangle_exterior_angle(2.0)));
    CHECK(g.theta0 >= 0.5 * g.theta0_reference);
    CHECK(std::isfinite(g.K1));
    CHECK(std::isfinite(g.K2));
    CHECK(g.K2 >= 0.0);
    CHECK(g.deltaHyp >= 0.0);
}

TEST_CASE("nontangential points stay within r of the ray") {
    Rng rng(22);
    for (int i = 0; i < 1000; ++i) {
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        const double t = uniform(rng, 0.0, 10.0), r = uniform(rng, 0.1, 2.0);
        const DiskPoint c = point_on_ray({}, xi, t);
        const DiskPoint p = apply(Isometry::translation_to(c),
                                  DiskPoint::from(std::polar(std::tanh(0.5 * r * 0.999), uniform(rng, 0.0, kTwoPi))));
        CHECK(distance_to_ray(p, {}, xi) <= r + 1e-9);
    }
}

TEST_CASE("hyperboloid frames and flow") {
    Rng rng(23);
    for (int i = 0; i < 500; ++i) {
        const DiskPoint p = random_point(rng, 4.0), q = random_point(rng, 4.0);
        const Vec3 P = to_hyperboloid(p), Q = to_hyperboloid(q);
        CHECK(hdist(P, Q) == doctest::Approx(dist(p, q)).epsilon(1e-9).scale(1.0));
        const Frame f = frame_between(P, Q);
        const Frame g = flow(f, dist(p, q));
        const DiskPoint reached = to_disk(g.P);
        CHECK(std::abs(reached.z() - q.z()) < 1e-9);
        const Isometry m = random_isometry(rng, 3.0);
        const Vec3 moved = lorentz_of(m)(P);
        CHECK(std::abs(to_disk(moved).z() - apply(m, p).z()) < 1e-9);
        // Lorentz action keeps the left normal left.
        const Frame tf = transform(lorentz_of(m), f);
        const Vec3 n = left_normal(tf.P, tf.V);
        CHECK(std::abs(mdot(n, tf.N) - 1.0) < 1e-9);
    }
}
