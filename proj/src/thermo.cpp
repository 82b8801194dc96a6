#include "gibbslab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gibbslab/errors.hpp"
#include "gibbslab/parallel.hpp"

namespace gibbslab {

namespace {

constexpr int kFitPoints = 81;

// Fit of log sum_{key <= r} exp(logw) against r over [lo, hi], keys sorted ascending.
// With log_r set the fitted quantity is log(r * sum), removing the 1/r prefactor of prime geodesic counts.
PressureEstimate fit_log_sums(const std::vector<double>& keys, const std::vector<double>& logw, double lo,
                              double hi, const char* method, bool log_r = false) {
    std::vector<double> prefix(keys.size());
    LogSumExp acc;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        acc.add(logw[i]);
        prefix[i] = acc.value();
    }
    std::vector<double> xs, ys;
    for (int i = 0; i < kFitPoints; ++i) {
        const double r = lo + (hi - lo) * i / (kFitPoints - 1);
        const auto n = std::upper_bound(keys.begin(), keys.end(), r) - keys.begin();
        if (n == 0) continue;
        xs.push_back(r);
        ys.push_back(prefix[n - 1] + (log_r ? std::log(r) : 0.0));
    }
    if (xs.size() < 3) throw DiagnosticError(std::string(method) + " pressure: empty fit window");
    const LinearFit f = fit_line(xs, ys);
    PressureEstimate e;
    e.value = f.slope;
    e.R_lo = lo;
    e.R_hi = hi;
    e.residual = f.rms_residual;
    e.slope_stderr = f.slope_stderr;
    e.count = keys.size();
    e.method = method;
    return e;
}

double covering_radius_of(const GroupPresentation& g, const OrbitLocator& loc) {
    if (std::isfinite(g.covering_radius)) return g.covering_radius;
    return estimate_covering_radius(loc, 4000, 0x5eedULL) + 0.25;
}

}  // namespace

std::vector<double> orbit_integrals(const Potential& F, const GroupBall& ball, double step) {
    std::vector<double> out;
    out.reserve(ball.elements.size());
    const Vec3 O{1.0, 0.0, 0.0};
    for (const OrbitElement& e : ball.elements) {
        if (e.displacement == 0.0) {
            out.push_back(0.0);
            continue;
        }
        const Vec3 X = to_hyperboloid(e.image);
        out.push_back(integrate_along(F, frame_between(O, X), e.displacement, step));
    }
    return out;
}

PressureEstimate pressure_from_integrals(const GroupBall& ball, const std::vector<double>& integrals) {
    if (integrals.size() != ball.elements.size()) throw DomainError("pressure: integrals do not match the ball");
    if (ball.radius < 5.0) throw DiagnosticError("pressure: ball radius must be >= 5");
    if (ball.elements.size() < 50) throw DiagnosticError("pressure: fewer than 50 orbit points");
    std::vector<double> keys;
    keys.reserve(ball.elements.size());
    for (const auto& e : ball.elements) keys.push_back(e.displacement);
    return fit_log_sums(keys, integrals, 0.5 * ball.radius, ball.radius, "orbital");
}

PressureEstimate pressure(const Potential& F, const GroupBall& ball, double step) {
    return pressure_from_integrals(ball, orbit_integrals(F, ball, step));
}

ClosedGeodesicSum closed_geodesics(const Potential& F, const GroupPresentation& g, double T_max, double step) {
    if (!(T_max > 0.0)) throw DomainError("closed_geodesics: T_max must be positive");
    const OrbitLocator loc(g);
    const double rc = covering_radius_of(g, loc);
    EnumerateOptions opt;
    if (std::isfinite(g.covering_radius)) opt.margin = rc;
    const GroupBall ball = enumerate_ball(g, T_max + 2.0 * rc, opt);

    ClosedGeodesicSum out;
    std::multimap<double, std::size_t> by_anchor;
    const double tol = 1e-7;
    for (const OrbitElement& e : ball.elements) {
        const double tr = std::abs(e.matrix.trace());
        if (!(tr > 2.0 + 1e-9)) continue;
        if (2.0 * std::acosh(0.5 * tr) > T_max) continue;
        const ClosedGeodesic c = trace_closed_geodesic(loc, e.matrix);
        if (c.length > T_max) continue;
        bool seen = false;
        for (double shift : {-kTwoPi, 0.0, kTwoPi}) {
            const auto lo = by_anchor.lower_bound(c.anchor_from + shift - tol);
            const auto hi = by_anchor.upper_bound(c.anchor_from + shift + tol);
            for (auto it = lo; it != hi && !seen; ++it) seen = same_closed_geodesic(out.classes[it->second], c, tol);
        }
        if (seen) continue;
        by_anchor.emplace(c.anchor_from, out.classes.size());
        const Vec3 Lf = null_vector(BoundaryPoint(c.anchor_from)), Lt = null_vector(BoundaryPoint(c.anchor_to));
        const double k = std::sqrt(-2.0 * mdot(Lf, Lt));
        const Vec3 P = (Lt + Lf) * (1.0 / k), V = (Lt - Lf) * (1.0 / k);
        out.integrals.push_back(integrate_along(F, renormalize({P, V, left_normal(P, V)}), c.length, step));
        out.classes.push_back(c);
    }
    return out;
}

PressureEstimate pressure_closed_geodesics(const ClosedGeodesicSum& sum, double T_max) {
    if (sum.classes.size() < 50)
        throw DiagnosticError("pressure_closed_geodesics: only " + std::to_string(sum.classes.size()) +
                              " closed geodesics up to T_max");
    std::vector<std::size_t> order(sum.classes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return sum.classes[a].length < sum.classes[b].length; });
    std::vector<double> keys, logw;
    for (std::size_t i : order) {
        keys.push_back(sum.classes[i].length);
        logw.push_back(sum.integrals[i]);
    }
    return fit_log_sums(keys, logw, 0.5 * T_max, T_max, "closed_geodesic", true);
}

PressureEstimate pressure_closed_geodesics(const Potential& F, const GroupPresentation& g, double T_max,
                                           double step) {
    return pressure_closed_geodesics(closed_geodesics(F, g, T_max, step), T_max);
}

double estimate_R0(double P, const GroupBall& ball, const std::vector<double>& integrals) {
    if (integrals.size() != ball.elements.size()) throw DomainError("estimate_R0: integrals do not match the ball");
    double worst = -1.0, dmax = 0.0;
    for (std::size_t i = 0; i < integrals.size(); ++i) {
        const double d = ball.elements[i].displacement;
        if (d == 0.0) continue;
        dmax = std::max(dmax, d);
        if (integrals[i] - P * d >= 0.0) worst = std::max(worst, d);
    }
    const double grid = 0.25;
    for (double T = grid; T <= dmax + 1e-12; T += grid)
        if (T > worst) return T;
    throw DiagnosticError("estimate_R0: int (F - P) is nonnegative on segments up to the ball radius; "
                          "pressure estimate suspect");
}

double estimate_R0(const Potential& F, double P, const GroupBall& ball, double step) {
    return estimate_R0(P, ball, orbit_integrals(F, ball, step));
}

PattersonMeasure patterson_from_integrals(double P, const GroupBall& ball, const std::vector<double>& integrals,
                                          double s_offset) {
    if (!(s_offset > 0.0)) throw DomainError("patterson: s_offset must be positive");
    if (integrals.size() != ball.elements.size()) throw DomainError("patterson: integrals do not match the ball");
    const double s = P + s_offset;
    LogSumExp lse;
    std::vector<double> logw(ball.elements.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < ball.elements.size(); ++i) {
        const double d = ball.elements[i].displacement;
        if (d == 0.0) continue;
        logw[i] = integrals[i] - s * d;
        lse.add(logw[i]);
    }
    const double norm = lse.value();
    if (!std::isfinite(norm)) throw NumericError("patterson: no usable atoms (empty ball or underflow)");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < ball.elements.size(); ++i) {
        if (ball.elements[i].displacement == 0.0) continue;
        atoms.push_back({ball.elements[i].direction.theta, std::exp(logw[i] - norm)});
    }
    PattersonMeasure out;
    out.measure = BoundaryMeasure::from_atoms(std::move(atoms));
    if (!(out.measure.total() > 0.0)) throw NumericError("patterson: all weights underflowed");
    out.s_used = s;
    out.R_used = ball.radius;
    out.pressure = P;
    out.log_normalizer = norm;
    return out;
}

PattersonMeasure patterson(const Potential& F, double P, const GroupBall& ball, double s_offset, double step) {
    return patterson_from_integrals(P, ball, orbit_integrals(F, ball, step), s_offset);
}

BoundaryMeasure ledrappier_density(const GibbsContext& ctx, const BoundaryMeasure& nu_o, DiskPoint z) {
    require_in_disk(z);
    if (z.x == 0.0 && z.y == 0.0) return nu_o;
    const Vec3 O{1.0, 0.0, 0.0}, Z = to_hyperboloid(z);
    return nu_o.reweighted(
        [&](double theta) { return std::exp(log_gibbs_kernel(ctx, O, Z, BoundaryPoint(theta))); });
}

EquivarianceDefect ledrappier_equivariance(const GibbsContext& ctx, const BoundaryMeasure& nu_o, const Isometry& gamma,
                                           int arcs) {
    if (arcs < 1) throw DomainError("arc count must be positive");
    const BoundaryMeasure pushed = nu_o.pushforward(gamma);
    const BoundaryMeasure dens = ledrappier_density(ctx, nu_o, apply(gamma, DiskPoint{}));
    const auto a = pushed.arc_masses(arcs), b = dens.arc_masses(arcs);
    NeumaierSum num;
    for (int j = 0; j < arcs; ++j) num.add(std::abs(a[j] - b[j]));
    EquivarianceDefect out;
    out.mass_pushed = pushed.total();
    out.mass_density = dens.total();
    if (out.mass_pushed <= 0.0) throw NumericError("pushed measure has no mass");
    out.l1_relative = num.value() / out.mass_pushed;
    return out;
}

ShadowLemmaAudit shadow_lemma_audit(const GibbsContext& ctx, const BoundaryMeasure& nu_o, const GroupBall& points,
                                    double R, int xi_per_point) {
    if (!(R > 0.0)) throw DomainError("shadow radius must be positive");
    if (xi_per_point < 1) throw DomainError("need at least one direction per point");
    const std::size_t n = points.elements.size();
    std::vector<double> lo(n, std::numeric_limits<double>::infinity()), hi(n, 0.0);
    std::vector<char> empty(n, 0);
    parallel_for(n, [&](std::size_t i) {
        const DiskPoint z = points.elements[i].image;
        const Arc O = shadow(DiskPoint{}, z, R);
        const double mass = nu_o.mass(O);
        if (mass <= 0.0) {
            empty[i] = 1;
            return;
        }
        for (int j = 0; j < xi_per_point; ++j) {
            // Evenly spaced over the open arc, center included for odd counts.
            const double u = (j + 0.5) / xi_per_point * 2.0 - 1.0;
            const BoundaryPoint xi(O.center.theta + u * O.halfwidth);
            const double r = gibbs_kernel(ctx, DiskPoint{}, z, xi) * mass;
            lo[i] = std::min(lo[i], r);
            hi[i] = std::max(hi[i], r);
        }
    });
    ShadowLemmaAudit out;
    out.R = R;
    out.points = static_cast<int>(n);
    out.min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (empty[i]) {
            ++out.empty_shadows;
            continue;
        }
        out.samples += xi_per_point;
        out.min_ratio = std::min(out.min_ratio, lo[i]);
        out.max_ratio = std::max(out.max_ratio, hi[i]);
    }
    out.C = out.empty_shadows > 0 || out.samples == 0 ? std::numeric_limits<double>::infinity()
                                                        : std::max(out.max_ratio, 1.0 / out.min_ratio);
    return out;
}

}  // namespace gibbslab
