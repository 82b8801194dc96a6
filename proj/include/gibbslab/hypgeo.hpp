#pragma once

#include <complex>
#include <cstdint>

#include "gibbslab/numeric.hpp"

namespace gibbslab {

using cplx = std::complex<double>;

inline constexpr double kBoundaryGuard = 1e-12;

struct DiskPoint {
    double x = 0.0;
    double y = 0.0;
    cplx z() const { return {x, y}; }
    static DiskPoint from(cplx w) { return {w.real(), w.imag()}; }
};

struct BoundaryPoint {
    double theta = 0.0;
    BoundaryPoint() = default;
    explicit BoundaryPoint(double t) : theta(canonical_angle(t)) {}
    cplx z() const { return std::polar(1.0, theta); }
};

// z -> (a z + b) / (c z + d), normalized to determinant 1.
struct Isometry {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    static Isometry identity() { return {}; }
    static Isometry rotation(double angle);
    // Hyperbolic translation taking 0 to p along the diameter through p.
    static Isometry translation_to(DiskPoint p);
    // Maps p to the origin (inverse of translation_to).
    static Isometry to_origin(DiskPoint p);
    static Isometry from_entries(cplx a, cplx b, cplx c, cplx d);

    Isometry inverse() const { return {d, -b, -c, a}; }
    Isometry operator*(const Isometry& o) const;
    cplx trace() const { return a + d; }
    cplx det() const { return a * d - b * c; }
};

// Open arc (center - halfwidth, center + halfwidth); halfwidth = pi is the full circle.
struct Arc {
    BoundaryPoint center;
    double halfwidth = kPi;

    bool full() const { return halfwidth >= kPi; }
    bool contains(BoundaryPoint p) const;
    bool contains(const Arc& inner, double slack = 1e-12) const;
    double start() const { return center.theta - halfwidth; }
    double length() const { return 2.0 * halfwidth; }
};

struct GeometryAudit {
    double theta0 = 0.0;            // observed minimum exterior angle
    double theta0_reference = 0.0;  // Gauss-Bonnet value for curvature -1
    double K1 = 0.0;
    double K2 = 0.0;
    double deltaHyp = 0.0;
    int samples = 0;
};

void require_in_disk(DiskPoint p, double guard = kBoundaryGuard);
bool in_disk(DiskPoint p, double guard = kBoundaryGuard);

double dist(DiskPoint p, DiskPoint q);
DiskPoint apply(const Isometry& g, DiskPoint p);
BoundaryPoint apply(const Isometry& g, BoundaryPoint p);
Arc apply(const Isometry& g, const Arc& a);

// Closed form log(|xi-z|^2 (1-|y|^2) / (|xi-y|^2 (1-|z|^2))).
double busemann(BoundaryPoint xi, DiskPoint y, DiskPoint z);
// Definition: dist(c(t), z) - dist(c(t), y) with c the ray from y toward xi.
double busemann_truncated(BoundaryPoint xi, DiskPoint y, DiskPoint z, double t = 30.0);

// Point at arclength t on the ray from p toward xi / on the segment from p toward q.
DiskPoint point_on_ray(DiskPoint p, BoundaryPoint xi, double t);
DiskPoint point_toward(DiskPoint p, DiskPoint q, double t);
// Direction of q seen from the origin.
BoundaryPoint direction_of(DiskPoint q);
// Endpoint of the geodesic ray from p through q.
BoundaryPoint ray_endpoint(DiskPoint p, DiskPoint q);

Arc shadow(DiskPoint o, DiskPoint z, double R);
Arc shadow_from_boundary(BoundaryPoint xi0, DiskPoint z, double R);

double gromov_product(DiskPoint x, DiskPoint y, DiskPoint w);
// Boundary extensions via truncation at t, checked against 2t.
double gromov_product(BoundaryPoint xi, DiskPoint y, DiskPoint w, double t = 30.0, double tol = 1e-8);
double gromov_product(BoundaryPoint xi, BoundaryPoint eta, DiskPoint w, double t = 30.0,
                      double tol = 1e-8);

// exp(-alpha (xi|eta)_o) = (|xi - eta| / 2)^alpha in the disk.
double visual_distance(BoundaryPoint xi, BoundaryPoint eta, double alpha = 1.0);
Arc visual_ball(BoundaryPoint xi, double r, double alpha = 1.0);

// Distance from p to the geodesic ray [o, xi).
double distance_to_ray(DiskPoint p, DiskPoint o, BoundaryPoint xi);

// Horocyclic distance between y and the geodesic (z, xi), measured on the horocycle at xi through y.
double horocyclic_distance(BoundaryPoint xi, DiskPoint y, DiskPoint z);

// Exterior angle at z between the continuation of [o,z) and the direction to xi.
double exterior_angle(DiskPoint o, DiskPoint z, BoundaryPoint xi);

GeometryAudit audit_geometry(int samples, double R, std::uint64_t seed);

// Gauss-Bonnet area of the triangle with two ideal vertices and altitude a.
double ideal_triangle_exterior_angle(double altitude);

// Four-point Gromov defect sweep over random quadruples inside B(o, radius).
double gromov_delta_sweep(int samples, double radius, std::uint64_t seed);

// ---- Hyperboloid model, used for stable geodesic flows. ----
// Signature (-,+,+); points satisfy <X,X> = -1, X.t > 0.
struct Vec3 {
    double t = 0.0, x = 0.0, y = 0.0;
    Vec3 operator+(const Vec3& o) const { return {t + o.t, x + o.x, y + o.y}; }
    Vec3 operator-(const Vec3& o) const { return {t - o.t, x - o.x, y - o.y}; }
    Vec3 operator*(double s) const { return {t * s, x * s, y * s}; }
};

inline double mdot(const Vec3& a, const Vec3& b) { return -a.t * b.t + a.x * b.x + a.y * b.y; }
Vec3 to_hyperboloid(DiskPoint p);
DiskPoint to_disk(const Vec3& X);
inline Vec3 null_vector(BoundaryPoint xi) { return {1.0, std::cos(xi.theta), std::sin(xi.theta)}; }
// Distance from -<X,Y> with the asinh form near the diagonal.
double hdist(const Vec3& X, const Vec3& Y);

struct Lorentz {
    double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    Vec3 operator()(const Vec3& v) const {
        return {m[0][0] * v.t + m[0][1] * v.x + m[0][2] * v.y,
                m[1][0] * v.t + m[1][1] * v.x + m[1][2] * v.y,
                m[2][0] * v.t + m[2][1] * v.x + m[2][2] * v.y};
    }
    Lorentz operator*(const Lorentz& o) const;
};

Lorentz lorentz_of(const Isometry& g);

// Unit tangent frame: point P, velocity V, left normal N.
struct Frame {
    Vec3 P, V, N;
};

// Frame at P pointing toward the boundary point with null vector L.
Frame frame_toward(const Vec3& P, const Vec3& L);
// Frame at p pointing toward q.
Frame frame_between(const Vec3& P, const Vec3& Q);
Frame flow(const Frame& f, double s);
Frame transform(const Lorentz& g, const Frame& f);
// Restores <P,P>=-1, <V,V>=1, orthogonality and N = P x V.
Frame renormalize(const Frame& f);
Vec3 left_normal(const Vec3& P, const Vec3& V);

}  // namespace gibbslab
