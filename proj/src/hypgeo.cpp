#include "gibbslab/hypgeo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gibbslab/errors.hpp"

namespace gibbslab {

namespace {

// 1 - |w|^2 without cancellation loss beyond what |w| itself carries.
double one_minus_norm2(cplx w) {
    const double r = std::abs(w);
    return (1.0 - r) * (1.0 + r);
}

// Distance between points given in polar coordinates around a common center.
double polar_dist(double r1, double phi1, double r2, double phi2) {
    const double s = std::sin(0.5 * angle_diff(phi1, phi2));
    const double q = std::cosh(r1 - r2) + 2.0 * std::sinh(r1) * std::sinh(r2) * s * s;
    if (q < 2.0) {
        // 2 sinh^2(d/2) = q - 1
        const double h = std::sqrt(std::max(0.0, 0.5 * (q - 1.0)));
        return 2.0 * std::asinh(h);
    }
    return std::acosh(q);
}

double arg_of(cplx w) { return canonical_angle(std::arg(w)); }

}  // namespace

Isometry Isometry::rotation(double angle) {
    return {std::polar(1.0, 0.5 * angle), 0.0, 0.0, std::polar(1.0, -0.5 * angle)};
}

Isometry Isometry::translation_to(DiskPoint p) {
    require_in_disk(p);
    const cplx w = p.z();
    const double s = 1.0 / std::sqrt(one_minus_norm2(w));
    return {s, w * s, std::conj(w) * s, s};
}

Isometry Isometry::to_origin(DiskPoint p) { return translation_to(p).inverse(); }

Isometry Isometry::from_entries(cplx a, cplx b, cplx c, cplx d) {
    const cplx det = a * d - b * c;
    if (!(std::abs(det) > 1e-300) || !std::isfinite(std::abs(det)))
        throw DomainError("isometry: degenerate matrix");
    const cplx s = std::sqrt(det);
    Isometry g{a / s, b / s, c / s, d / s};
    const cplx o = g.b / g.d;
    if (!(std::abs(o) < 1.0)) throw DomainError("isometry: does not preserve the disk");
    for (double t : {0.0, 0.5 * kPi, 1.3}) {
        const cplx xi = std::polar(1.0, t);
        const double m = std::abs((g.a * xi + g.b) / (g.c * xi + g.d));
        if (std::abs(m - 1.0) > 1e-8) throw DomainError("isometry: does not preserve the unit circle");
    }
    return g;
}

Isometry Isometry::operator*(const Isometry& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
}

bool Arc::contains(BoundaryPoint p) const {
    if (full()) return true;
    return std::abs(angle_diff(p.theta, center.theta)) < halfwidth;
}

bool Arc::contains(const Arc& inner, double slack) const {
    if (full()) return true;
    if (inner.full()) return false;
    return std::abs(angle_diff(inner.center.theta, center.theta)) + inner.halfwidth <=
           halfwidth + slack;
}

bool in_disk(DiskPoint p, double guard) {
    return std::isfinite(p.x) && std::isfinite(p.y) && p.x * p.x + p.y * p.y < 1.0 - guard;
}

void require_in_disk(DiskPoint p, double guard) {
    if (!in_disk(p, guard))
        throw DomainError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                          ") outside the disk guard");
}

double dist(DiskPoint p, DiskPoint q) {
    require_in_disk(p);
    require_in_disk(q);
    const double num = std::abs(p.z() - q.z());
    const double den = std::sqrt(one_minus_norm2(p.z()) * one_minus_norm2(q.z()));
    return 2.0 * std::asinh(num / den);
}

DiskPoint apply(const Isometry& g, DiskPoint p) {
    const cplx z = p.z();
    return DiskPoint::from((g.a * z + g.b) / (g.c * z + g.d));
}

BoundaryPoint apply(const Isometry& g, BoundaryPoint p) {
    const cplx z = p.z();
    return BoundaryPoint(std::arg((g.a * z + g.b) / (g.c * z + g.d)));
}

Arc apply(const Isometry& g, const Arc& a) {
    if (a.full()) return a;
    const BoundaryPoint lo = apply(g, BoundaryPoint(a.center.theta - a.halfwidth));
    const BoundaryPoint hi = apply(g, BoundaryPoint(a.center.theta + a.halfwidth));
    // orientation preserving: the image runs counterclockwise from lo to hi
    double len = canonical_angle(hi.theta - lo.theta);
    if (len == 0.0) len = a.halfwidth > 0.5 * kPi ? kTwoPi : 0.0;
    Arc out;
    out.center = BoundaryPoint(lo.theta + 0.5 * len);
    out.halfwidth = std::min(kPi, 0.5 * len);
    return out;
}

double busemann(BoundaryPoint xi, DiskPoint y, DiskPoint z) {
    require_in_disk(y);
    require_in_disk(z);
    const cplx e = xi.z();
    const double num = std::norm(e - z.z()) * one_minus_norm2(y.z());
    const double den = std::norm(e - y.z()) * one_minus_norm2(z.z());
    return std::log(num / den);
}

double busemann_truncated(BoundaryPoint xi, DiskPoint y, DiskPoint z, double t) {
    const Isometry m = Isometry::to_origin(y);
    const double phi = apply(m, xi).theta;
    const DiskPoint zz = apply(m, z);
    const double r = dist(DiskPoint{}, zz);
    const double psi = r > 0.0 ? arg_of(zz.z()) : 0.0;
    return polar_dist(t, phi, r, psi) - t;
}

DiskPoint point_on_ray(DiskPoint p, BoundaryPoint xi, double t) {
    const Isometry m = Isometry::to_origin(p);
    const double phi = apply(m, xi).theta;
    return apply(m.inverse(), DiskPoint::from(std::polar(std::tanh(0.5 * t), phi)));
}

DiskPoint point_toward(DiskPoint p, DiskPoint q, double t) {
    const Isometry m = Isometry::to_origin(p);
    const DiskPoint qq = apply(m, q);
    const double phi = arg_of(qq.z());
    return apply(m.inverse(), DiskPoint::from(std::polar(std::tanh(0.5 * t), phi)));
}

BoundaryPoint direction_of(DiskPoint q) { return BoundaryPoint(std::arg(q.z())); }

BoundaryPoint ray_endpoint(DiskPoint p, DiskPoint q) {
    const Isometry m = Isometry::to_origin(p);
    const DiskPoint qq = apply(m, q);
    return apply(m.inverse(), BoundaryPoint(std::arg(qq.z())));
}

Arc shadow(DiskPoint o, DiskPoint z, double R) {
    const double d = dist(o, z);
    if (d <= R) return Arc{BoundaryPoint(0.0), kPi};
    const Isometry m = Isometry::to_origin(o);
    const DiskPoint zz = apply(m, z);
    Arc a{BoundaryPoint(std::arg(zz.z())), std::asin(std::sinh(R) / std::sinh(d))};
    if (o.x == 0.0 && o.y == 0.0) return a;
    return apply(m.inverse(), a);
}

Arc shadow_from_boundary(BoundaryPoint xi0, DiskPoint z, double R) {
    const Isometry m = Isometry::to_origin(z);
    const BoundaryPoint x = apply(m, xi0);
    const double hw = kPi - 2.0 * std::asin(1.0 / std::cosh(R));
    Arc a{BoundaryPoint(x.theta + kPi), hw};
    return apply(m.inverse(), a);
}

double gromov_product(DiskPoint x, DiskPoint y, DiskPoint w) {
    return 0.5 * (dist(w, x) + dist(w, y) - dist(x, y));
}

namespace {

struct Polar {
    double r;
    double phi;
};

Polar polar_around(const Isometry& m, DiskPoint p) {
    const DiskPoint q = apply(m, p);
    const double r = dist(DiskPoint{}, q);
    return {r, r > 0.0 ? arg_of(q.z()) : 0.0};
}

template <class F>
double truncated_limit(F&& at, double t, double tol, const char* what) {
    const double g1 = at(t);
    const double g2 = at(2.0 * t);
    if (!(std::abs(g2 - g1) <= tol))
        throw ToleranceError(std::string(what) + ": boundary extension did not converge", g1, g2);
    return g2;
}

}  // namespace

double gromov_product(BoundaryPoint xi, DiskPoint y, DiskPoint w, double t, double tol) {
    const Isometry m = Isometry::to_origin(w);
    const double phi = apply(m, xi).theta;
    const Polar py = polar_around(m, y);
    return truncated_limit(
        [&](double s) { return 0.5 * (s + py.r - polar_dist(s, phi, py.r, py.phi)); }, t, tol,
        "gromov_product");
}

double gromov_product(BoundaryPoint xi, BoundaryPoint eta, DiskPoint w, double t, double tol) {
    const Isometry m = Isometry::to_origin(w);
    const double a = apply(m, xi).theta;
    const double b = apply(m, eta).theta;
    return truncated_limit([&](double s) { return 0.5 * (2.0 * s - polar_dist(s, a, s, b)); }, t,
                           tol, "gromov_product");
}

double visual_distance(BoundaryPoint xi, BoundaryPoint eta, double alpha) {
    const double s = std::abs(std::sin(0.5 * angle_diff(xi.theta, eta.theta)));
    return std::pow(s, alpha);
}

Arc visual_ball(BoundaryPoint xi, double r, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("visual_ball: alpha must be positive");
    if (!(r > 0.0)) throw DomainError("visual_ball: radius must be positive");
    if (r >= 1.0) return Arc{xi, kPi};
    return Arc{xi, 2.0 * std::asin(std::pow(r, 1.0 / alpha))};
}

double distance_to_ray(DiskPoint p, DiskPoint o, BoundaryPoint xi) {
    const Isometry m = Isometry::to_origin(o);
    const double phi = apply(m, xi).theta;
    const cplx q = apply(m, p).z() * std::polar(1.0, -phi);
    if (q.real() >= 0.0) return std::asinh(2.0 * std::abs(q.imag()) / one_minus_norm2(q));
    return dist(DiskPoint{}, DiskPoint::from(q));
}

double horocyclic_distance(BoundaryPoint xi, DiskPoint y, DiskPoint z) {
    const Isometry m = Isometry::to_origin(y);
    const double phi = apply(m, xi).theta;
    const cplx w = apply(m, z).z() * std::polar(1.0, -phi);
    // Cayley map sending 1 to infinity and 0 to i; the horocycle through y is Im = 1.
    const cplx u = cplx(0.0, 1.0) * (1.0 + w) / (1.0 - w);
    return std::abs(u.real());
}

double exterior_angle(DiskPoint o, DiskPoint z, BoundaryPoint xi) {
    const Isometry m = Isometry::to_origin(z);
    const double forward = arg_of(-apply(m, o).z());
    const double toward = apply(m, xi).theta;
    return std::abs(angle_diff(toward, forward));
}

double ideal_triangle_exterior_angle(double altitude) {
    return kPi - 2.0 * std::asin(1.0 / std::cosh(altitude));
}

double gromov_delta_sweep(int samples, double radius, std::uint64_t seed) {
    Rng rng(seed);
    auto draw = [&] {
        const double r = uniform(rng, 0.0, radius);
        return DiskPoint::from(std::polar(std::tanh(0.5 * r), uniform(rng, 0.0, kTwoPi)));
    };
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const DiskPoint x = draw(), y = draw(), z = draw(), w = draw();
        const double defect = std::min(gromov_product(x, z, w), gromov_product(x, y, w)) -
                              gromov_product(y, z, w);
        worst = std::max(worst, defect);
    }
    return worst;
}

GeometryAudit audit_geometry(int samples, double R, std::uint64_t seed) {
    if (samples < 1) throw DomainError("audit_geometry: samples must be >= 1");
    if (!(R > 0.0)) throw DomainError("audit_geometry: R must be positive");
    Rng rng(seed);
    GeometryAudit out;
    out.samples = samples;
    out.theta0 = kPi;
    out.theta0_reference = ideal_triangle_exterior_angle(0.5 * R);
    const DiskPoint o{};
    auto outside = [&](const Arc& a) {
        const double u = uniform(rng, 0.0, 1.0);
        return BoundaryPoint(a.center.theta + a.halfwidth + u * (kTwoPi - 2.0 * a.halfwidth));
    };
    for (int i = 0; i < samples; ++i) {
        const double phi = uniform(rng, 0.0, kTwoPi);
        const double dy = 0.5 * R + uniform(rng, 1e-3, 6.0);
        const DiskPoint y = point_on_ray(o, BoundaryPoint(phi), dy);
        const Arc sh = shadow(o, y, 0.5 * R);
        const BoundaryPoint xi = outside(sh);
        out.theta0 = std::min(out.theta0, exterior_angle(o, y, xi));

        const DiskPoint z = point_on_ray(o, BoundaryPoint(phi), dy + uniform(rng, 0.0, 6.0));
        out.K1 = std::max(out.K1, horocyclic_distance(xi, y, z));
        out.K2 = std::max(out.K2, dist(y, z) - busemann(xi, y, z));
    }
    out.deltaHyp = gromov_delta_sweep(samples, 6.0, seed ^ 0x9e3779b97f4a7c15ULL);
    return out;
}

// ---- hyperboloid ----

Vec3 to_hyperboloid(DiskPoint p) {
    const cplx w = p.z();
    const double den = one_minus_norm2(w);
    const double r2 = std::norm(w);
    return {(1.0 + r2) / den, 2.0 * p.x / den, 2.0 * p.y / den};
}

DiskPoint to_disk(const Vec3& X) { return {X.x / (1.0 + X.t), X.y / (1.0 + X.t)}; }

double hdist(const Vec3& X, const Vec3& Y) {
    const double q = -mdot(X, Y);
    if (q > 2.0) return std::acosh(q);
    const Vec3 D = X - Y;
    const double n2 = std::max(0.0, mdot(D, D));
    return 2.0 * std::asinh(0.5 * std::sqrt(n2));
}

Lorentz Lorentz::operator*(const Lorentz& o) const {
    Lorentz r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
            r.m[i][j] = s;
        }
    return r;
}

Lorentz lorentz_of(const Isometry& g) {
    // Columns from the images of (1,0,0), (ch,sh,0), (ch,0,sh) by linearity.
    const double ch = std::cosh(1.0), sh = std::sinh(1.0), r = std::tanh(0.5);
    const Vec3 g0 = to_hyperboloid(apply(g, DiskPoint{0.0, 0.0}));
    const Vec3 g1 = to_hyperboloid(apply(g, DiskPoint{r, 0.0}));
    const Vec3 g2 = to_hyperboloid(apply(g, DiskPoint{0.0, r}));
    const Vec3 c1 = (g1 - g0 * ch) * (1.0 / sh);
    const Vec3 c2 = (g2 - g0 * ch) * (1.0 / sh);
    Lorentz L;
    const Vec3 cols[3] = {g0, c1, c2};
    for (int j = 0; j < 3; ++j) {
        L.m[0][j] = cols[j].t;
        L.m[1][j] = cols[j].x;
        L.m[2][j] = cols[j].y;
    }
    return L;
}

Vec3 left_normal(const Vec3& P, const Vec3& V) {
    const double c0 = P.x * V.y - P.y * V.x;
    const double c1 = P.y * V.t - P.t * V.y;
    const double c2 = P.t * V.x - P.x * V.t;
    return {-c0, c1, c2};
}

Frame frame_toward(const Vec3& P, const Vec3& L) {
    const double lam = -1.0 / mdot(L, P);
    const Vec3 V = L * lam - P;
    return {P, V, left_normal(P, V)};
}

Frame frame_between(const Vec3& P, const Vec3& Q) {
    Vec3 V = Q + P * mdot(Q, P);
    const double n2 = mdot(V, V);
    if (!(n2 > 1e-300)) {
        V = {P.x, P.t, 0.0};  // any unit tangent; only reached when P == Q
        const double n = std::sqrt(mdot(V, V));
        V = V * (1.0 / n);
    } else {
        V = V * (1.0 / std::sqrt(n2));
    }
    return {P, V, left_normal(P, V)};
}

Frame flow(const Frame& f, double s) {
    const double ch = std::cosh(s), sh = std::sinh(s);
    return {f.P * ch + f.V * sh, f.P * sh + f.V * ch, f.N};
}

Frame transform(const Lorentz& g, const Frame& f) { return {g(f.P), g(f.V), g(f.N)}; }

Frame renormalize(const Frame& f) {
    Vec3 P = f.P * (1.0 / std::sqrt(-mdot(f.P, f.P)));
    Vec3 V = f.V + P * mdot(f.V, P);
    V = V * (1.0 / std::sqrt(mdot(V, V)));
    return {P, V, left_normal(P, V)};
}

}  // namespace gibbslab
