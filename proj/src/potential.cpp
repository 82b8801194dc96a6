#include "gibbslab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gibbslab/errors.hpp"

namespace gibbslab {

namespace {

constexpr double kPiece = 1.0;  // flow length between re-reductions of a frame
constexpr int kChordNodes = 32;

double covering_radius_of(const GroupPresentation& g) {
    if (std::isfinite(g.covering_radius)) return g.covering_radius;
    const OrbitLocator probe(g, 4.0);
    return estimate_covering_radius(probe, 4000, 0x5eedULL) + 0.25;
}

// Bump part of the profile, without the constant offset.
double bump_value(const Potential& F, double cosh_d_minus_1) {
    const double cw1 = 2.0 * std::sinh(0.5 * F.width) * std::sinh(0.5 * F.width);
    const double q = cosh_d_minus_1 / cw1;
    if (!(q < 1.0)) return 0.0;
    return F.amplitude * std::exp(1.0 - 1.0 / (1.0 - q));
}

double table_value(const Potential& F, double d) {
    const double x = d / F.table_step;
    const std::size_t n = F.table.size();
    if (x >= static_cast<double>(n - 1)) return F.table.back();
    const auto i = static_cast<std::size_t>(x);
    const double t = x - static_cast<double>(i);
    return F.table[i] * (1.0 - t) + F.table[i + 1] * t;
}

// Exact chord decomposition of the bump part along a reduced frame, for arclength [0, len].
double bump_piece(const Potential& F, const Frame& f, double len) {
    const double cw = std::cosh(F.width);
    const QuadratureRule& gl = gauss_legendre(kChordNodes);
    double total = 0.0;
    for (const Vec3& Q : F.locator->centers()) {
        const double a = -mdot(f.P, Q);
        if (a > 1e6) continue;
        const double n = mdot(f.N, Q);
        const double m = std::sqrt(1.0 + n * n);  // cosh of the distance from Q to the geodesic
        if (m >= cw) continue;
        const double b = -mdot(f.V, Q);
        const double s_star = std::atanh(std::clamp(-b / a, -1.0, 1.0));
        const double delta = std::acosh(cw / m);
        const double lo = std::max(0.0, s_star - delta), hi = std::min(len, s_star + delta);
        if (!(lo < hi)) continue;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        const double m1 = n * n / (1.0 + m);  // m - 1
        double s = 0.0;
        for (int i = 0; i < kChordNodes; ++i) {
            const double t = mid + half * gl.nodes[i] - s_star;
            const double sh = std::sinh(0.5 * t);
            s += gl.weights[i] * bump_value(F, m1 + 2.0 * m * sh * sh);
        }
        total += s * half;
    }
    return total;
}

// Composite 4-point Gauss-Legendre panels of width <= step on the variable part of F.
double table_piece(const Potential& F, const Frame& f, double len, double step) {
    const QuadratureRule& gl = gauss_legendre(4);
    const int panels = std::max(1, static_cast<int>(std::ceil(len / step)));
    const double h = len / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (int i = 0; i < 4; ++i) {
            const double s = mid + 0.5 * h * gl.nodes[i];
            Vec3 X = f.P * std::cosh(s) + f.V * std::sinh(s);
            F.locator->reduce(X);
            total += gl.weights[i] * 0.5 * h * table_value(F, std::asinh(std::hypot(X.x, X.y)));
        }
    }
    return total;
}

// Integral of F minus its constant offset along [0, len] from frame f.
double variable_integral(const Potential& F, Frame f, double len, double step) {
    if (F.kind == PotentialKind::zero || F.kind == PotentialKind::constant) return 0.0;
    double total = 0.0;
    for (double s = 0.0; s < len;) {
        const double h = std::min(kPiece, len - s);
        F.locator->reduce(f);
        total += F.kind == PotentialKind::orbit_bump ? bump_piece(F, f, h) : table_piece(F, f, h, step);
        s += h;
        if (s < len) f = renormalize(flow(f, h));
    }
    return total;
}

Frame reduced(const Potential& F, Frame f) {
    if (F.locator) F.locator->reduce(f);
    return f;
}

}  // namespace

Potential make_zero_potential() { return Potential{}; }

Potential make_constant_potential(double c) {
    if (!std::isfinite(c)) throw DomainError("constant potential must be finite");
    Potential F;
    F.kind = PotentialKind::constant;
    F.constant = c;
    F.bound = std::abs(c);
    return F;
}

Potential make_orbit_bump(const GroupPresentation& g, double amplitude, double width) {
    if (!std::isfinite(amplitude)) throw DomainError("orbit_bump: amplitude must be finite");
    if (!(width > 0.0)) throw DomainError("orbit_bump: width must be positive");
    const double rc = covering_radius_of(g);
    Potential F;
    F.kind = PotentialKind::orbit_bump;
    F.amplitude = amplitude;
    F.width = width;
    F.bound = std::abs(amplitude);
    F.holder_exponent = 1.0;
    F.locator = std::make_shared<const OrbitLocator>(g, std::max(4.0, rc + kPiece + width + 0.05));
    if (!(width < 0.5 * F.locator->min_separation()))
        throw DomainError("orbit_bump: width must be below half the orbit separation (" +
                          std::to_string(0.5 * F.locator->min_separation()) + ")");
    return F;
}

Potential make_user_table(const GroupPresentation& g, std::vector<double> values, double step) {
    if (values.size() < 2) throw DomainError("user_table: need at least two values");
    if (!(step > 0.0)) throw DomainError("user_table: step must be positive");
    double bound = 0.0, lip = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw DomainError("user_table: values must be finite");
        bound = std::max(bound, std::abs(values[i]));
        if (i > 0) lip = std::max(lip, std::abs(values[i] - values[i - 1]) / step);
    }
    Potential F;
    F.kind = PotentialKind::user_table;
    F.table = std::move(values);
    F.table_step = step;
    F.bound = bound;
    F.holder_exponent = 1.0;
    F.locator = std::make_shared<const OrbitLocator>(g, 4.0);
    return F;
}

Potential shifted(const Potential& F, double c) {
    Potential G = F;
    G.constant += c;
    if (G.kind == PotentialKind::zero && G.constant != 0.0) G.kind = PotentialKind::constant;
    G.bound = F.bound + std::abs(c);
    return G;
}

std::string describe(const Potential& F) {
    std::ostringstream os;
    os.precision(17);
    switch (F.kind) {
        case PotentialKind::zero: os << "zero"; break;
        case PotentialKind::constant: os << "constant(" << F.constant << ")"; break;
        case PotentialKind::orbit_bump:
            os << "orbit_bump(amplitude=" << F.amplitude << ",width=" << F.width << ")";
            break;
        case PotentialKind::user_table:
            os << "user_table(n=" << F.table.size() << ",step=" << F.table_step << ")";
            break;
    }
    if (F.kind != PotentialKind::constant && F.constant != 0.0) os << "+" << F.constant;
    return os.str();
}

double potential_profile(const Potential& F, double d) {
    switch (F.kind) {
        case PotentialKind::zero:
        case PotentialKind::constant: return F.constant;
        case PotentialKind::orbit_bump: {
            const double sh = std::sinh(0.5 * d);
            return F.constant + bump_value(F, 2.0 * sh * sh);
        }
        case PotentialKind::user_table: return F.constant + table_value(F, d);
    }
    return 0.0;
}

double eval_potential_hyp(const Potential& F, const Vec3& X) {
    if (!F.locator) return F.constant;
    return potential_profile(F, F.locator->distance_to_orbit(X));
}

double eval_potential(const Potential& F, DiskPoint base, double) {
    require_in_disk(base);
    return eval_potential_hyp(F, to_hyperboloid(base));
}

double integrate_along(const Potential& F, const Frame& f, double length, double step) {
    if (!(length >= 0.0)) throw DomainError("integrate_along: negative length");
    if (!(step > 0.0)) throw DomainError("integrate_along: step must be positive");
    return F.constant * length + variable_integral(F, f, length, step);
}

double line_integral(const Potential& F, DiskPoint from, DiskPoint to, double step) {
    require_in_disk(from);
    require_in_disk(to);
    if (!(step > 0.0)) throw DomainError("line_integral: step must be positive");
    const Vec3 A = to_hyperboloid(from), B = to_hyperboloid(to);
    return integrate_along(F, frame_between(A, B), hdist(A, B), step);
}

void validate(const GibbsContext& ctx) {
    if (!(ctx.truncation_T > 0.0)) throw DomainError("GibbsContext: truncation_T must be positive");
    if (!(ctx.quad_step > 0.0)) throw DomainError("GibbsContext: quad_step must be positive");
    if (!(ctx.tol > 0.0)) throw DomainError("GibbsContext: tol must be positive");
    if (!std::isfinite(ctx.pressure)) throw DomainError("GibbsContext: pressure must be finite");
}

double log_gibbs_kernel(const GibbsContext& ctx, const Vec3& Y, const Vec3& Z, BoundaryPoint xi) {
    const Vec3 L = null_vector(xi);
    const double ly = -mdot(Y, L), lz = -mdot(Z, L);
    const double beta = std::log(lz / ly);
    const Potential& F = ctx.potential;
    const double affine = (F.constant - ctx.pressure) * beta;
    if (F.kind == PotentialKind::zero || F.kind == PotentialKind::constant) return affine;

    // The ray from the point farther from xi first climbs |beta| to the other's horocycle; after
    // that the two rays are asymptotic, and the far ray is tracked through its horocyclic offset
    // u0 e^{-s} in the near ray's frame so the difference never feels the flow's instability.
    const bool z_behind = beta >= 0.0;
    const Vec3& front = z_behind ? Y : Z;
    const Vec3& behind = z_behind ? Z : Y;
    const double lf = z_behind ? ly : lz;
    const Vec3 Ls = L * (1.0 / lf);

    const double initial = variable_integral(F, frame_toward(behind, L), std::abs(beta), ctx.quad_step);
    Frame fa = frame_toward(front, L);
    const double u0 = mdot(behind, fa.N) / (-mdot(behind, Ls));

    const double T = ctx.truncation_T;
    const double end = ctx.verify_truncation ? 2.0 * T : T;
    double diff = 0.0, diff_T = 0.0;
    for (double s = 0.0; s < end;) {
        const double h = std::min({kPiece, end - s, s < T ? T - s : end - s});
        fa = reduced(F, fa);
        const double u = u0 * std::exp(-s);
        const Vec3 Lf = fa.P + fa.V;
        const Vec3 H = fa.P + fa.N * u + Lf * (0.5 * u * u);
        const Vec3 VB = Lf - H;
        const Frame fb = u == 0.0 ? fa : reduced(F, renormalize({H, VB, left_normal(H, VB)}));
        diff += variable_integral(F, fb, h, ctx.quad_step) - variable_integral(F, fa, h, ctx.quad_step);
        s += h;
        if (std::abs(s - T) < 1e-12) diff_T = diff;
        fa = renormalize(flow(fa, h));
    }
    const double sign = z_behind ? 1.0 : -1.0;
    const double at_T = sign * (initial + diff_T) + affine;
    if (!ctx.verify_truncation) return at_T;
    const double at_2T = sign * (initial + diff) + affine;
    if (std::abs(std::expm1(at_2T - at_T)) > ctx.tol)
        throw ToleranceError("gibbs_kernel: truncation at T and 2T disagree beyond tol",
                             std::exp(at_T), std::exp(at_2T));
    return at_2T;
}

double log_gibbs_kernel(const GibbsContext& ctx, DiskPoint y, DiskPoint z, BoundaryPoint xi) {
    require_in_disk(y);
    require_in_disk(z);
    return log_gibbs_kernel(ctx, to_hyperboloid(y), to_hyperboloid(z), xi);
}

double gibbs_kernel(const GibbsContext& ctx, DiskPoint y, DiskPoint z, BoundaryPoint xi) {
    const double v = std::exp(log_gibbs_kernel(ctx, y, z, xi));
    if (!(v > 0.0) || !std::isfinite(v)) throw NumericError("gibbs_kernel: value not representable");
    return v;
}

double audit_distortion(const GibbsContext& ctx, double r, int samples, std::uint64_t seed) {
    if (!(r > 0.0)) throw DomainError("audit_distortion: r must be positive");
    if (samples < 1) throw DomainError("audit_distortion: samples must be >= 1");
    validate(ctx);
    Rng rng(seed);
    double worst = 1.0;
    for (int i = 0; i < samples; ++i) {
        const DiskPoint y = point_on_ray({}, BoundaryPoint(uniform(rng, 0.0, kTwoPi)), uniform(rng, 0.0, 3.0));
        const BoundaryPoint dir(uniform(rng, 0.0, kTwoPi));
        DiskPoint z;
        BoundaryPoint xi;
        if (i % 4 == 0) {
            // Aligned configuration: |beta| = dist(y, z) = r, the extremal case for F = 0.
            const Isometry to_y = Isometry::translation_to(y);
            z = apply(to_y, point_on_ray({}, dir, r));
            xi = apply(to_y, BoundaryPoint(i % 8 == 0 ? dir.theta : dir.theta + kPi));
        } else {
            z = apply(Isometry::translation_to(y), point_on_ray({}, dir, uniform(rng, 0.0, r)));
            xi = BoundaryPoint(uniform(rng, 0.0, kTwoPi));
        }
        worst = std::max(worst, std::exp(std::abs(log_gibbs_kernel(ctx, y, z, xi))));
    }
    return worst;
}

}  // namespace gibbslab
