#include "gibbslab/fharm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "gibbslab/errors.hpp"
#include "gibbslab/parallel.hpp"

namespace gibbslab {

namespace {

std::vector<double> support_thetas(const BoundaryMeasure& eta) {
    std::vector<double> out;
    for (const Atom& a : eta.atoms()) out.push_back(a.theta);
    const std::size_t nb = eta.bins().size();
    for (std::size_t j = 0; j < nb; ++j) out.push_back(kTwoPi * (j + 0.5) / nb);
    return out;
}

double dot(const std::vector<double>& w, const std::vector<double>& k) {
    NeumaierSum s;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] != 0.0) s.add(w[i] * k[i]);
    return s.value();
}

bool same_point(DiskPoint a, DiskPoint b) { return a.x == b.x && a.y == b.y; }

// Point at distance s from p, perpendicular to the ray [p, xi) on the side sign.
DiskPoint lateral_point(DiskPoint p, BoundaryPoint xi, double s, double sign) {
    const Frame f = frame_toward(to_hyperboloid(p), null_vector(xi));
    return to_disk(f.P * std::cosh(s) + f.N * (sign * std::sinh(s)));
}

double quotient_at(const GibbsContext& ctx, DiskPoint z, const BoundaryMeasure& nu, const std::vector<double>& w2,
                   const std::vector<double>& w1, const std::vector<Atom>& extra) {
    const std::vector<double> k = kernel_row(ctx, DiskPoint{}, z, nu);
    double h1 = dot(w1, k);
    const double h2 = dot(w2, k);
    const Vec3 O{1.0, 0.0, 0.0}, Z = to_hyperboloid(z);
    for (const Atom& a : extra) h1 += a.weight * std::exp(log_gibbs_kernel(ctx, O, Z, BoundaryPoint(a.theta)));
    return h1 / h2;
}

}  // namespace

std::vector<double> support_weights(const BoundaryMeasure& eta) {
    std::vector<double> out;
    for (const Atom& a : eta.atoms()) out.push_back(a.weight);
    out.insert(out.end(), eta.bins().begin(), eta.bins().end());
    return out;
}

std::vector<double> kernel_row(const GibbsContext& ctx, DiskPoint base, DiskPoint z, const BoundaryMeasure& eta) {
    require_in_disk(z);
    const std::vector<double> th = support_thetas(eta);
    const std::vector<double> w = support_weights(eta);
    std::vector<double> out(th.size(), 0.0);
    if (same_point(base, z)) {
        std::fill(out.begin(), out.end(), 1.0);
        return out;
    }
    const Vec3 B = to_hyperboloid(base), Z = to_hyperboloid(z);
    parallel_for(th.size(), [&](std::size_t i) {
        if (w[i] != 0.0) out[i] = std::exp(log_gibbs_kernel(ctx, B, Z, BoundaryPoint(th[i])));
    });
    return out;
}

double evaluate(const FHarmonicFunction& h, DiskPoint z) {
    if (same_point(h.base, z)) return h.eta.total();
    return dot(support_weights(h.eta), kernel_row(h.ctx, h.base, z, h.eta));
}

double h0(const GibbsContext& ctx, const BoundaryMeasure& nu_o, DiskPoint z) {
    return evaluate(FHarmonicFunction{ctx, nu_o, DiskPoint{}}, z);
}

RaySample ray_sample(BoundaryPoint xi, const std::vector<double>& depths, double lateral_r) {
    if (lateral_r < 0.0) throw DomainError("ray_sample: lateral_r must be nonnegative");
    RaySample s{xi, depths, lateral_r, {}};
    for (double t : depths) {
        const DiskPoint p = point_on_ray(DiskPoint{}, xi, t);
        s.points.push_back(p);
        s.points.push_back(lateral_point(p, xi, lateral_r, 1.0));
        s.points.push_back(lateral_point(p, xi, lateral_r, -1.0));
    }
    return s;
}

HarnackAudit harnack_audit(const FHarmonicFunction& h, double r, int samples, std::uint64_t seed) {
    if (!(r > 0.0)) throw DomainError("harnack_audit: r must be positive");
    HarnackAudit out;
    out.samples = samples;
    Rng rng(seed);
    const std::vector<double> th = support_thetas(h.eta);
    const std::vector<double> w = support_weights(h.eta);
    for (int i = 0; i < samples; ++i) {
        const DiskPoint y = point_on_ray(h.base, BoundaryPoint(uniform(rng, 0.0, kTwoPi)), uniform(rng, 0.0, 3.0));
        const double s = i % 4 == 0 ? r : uniform(rng, 0.0, r);
        const DiskPoint z = point_on_ray(y, BoundaryPoint(uniform(rng, 0.0, kTwoPi)), s);
        const double ratio = evaluate(h, z) / evaluate(h, y);
        // sup over the support of k(y, z; .) bounds h(z)/h(y); the inverse kernel bounds the reciprocal.
        const std::vector<double> k = kernel_row(h.ctx, y, z, h.eta);
        double kmax = 0.0, kinv = 0.0;
        for (std::size_t j = 0; j < k.size(); ++j)
            if (w[j] != 0.0) {
                kmax = std::max(kmax, k[j]);
                kinv = std::max(kinv, 1.0 / k[j]);
            }
        const double slack = std::max(ratio / kmax, (1.0 / ratio) / kinv);
        out.A_r = std::max(out.A_r, std::max(ratio, 1.0 / ratio));
        out.worst_slack = std::max(out.worst_slack, slack);
        if (slack > 1.0 + 1e-9) ++out.violations;
    }
    return out;
}

FatouTrace fatou_trace(const GibbsContext& ctx, const BoundaryMeasure& nu_o, const FatouConfig& cfg, BoundaryPoint xi,
                       bool singular) {
    if (!cfg.density) throw DomainError("fatou: density missing");
    if (!(cfg.depth_step > 0.0) || !(cfg.depth_max >= cfg.depth_step)) throw DomainError("fatou: bad depth grid");
    const std::vector<double> th = support_thetas(nu_o);
    const std::vector<double> w2 = support_weights(nu_o);
    std::vector<double> w1(w2.size());
    for (std::size_t i = 0; i < w2.size(); ++i) w1[i] = w2[i] * cfg.density(th[i]);
    std::vector<double> grid;
    for (int j = 1; j * cfg.depth_step <= cfg.depth_max + 1e-12; ++j) grid.push_back(j * cfg.depth_step);

    FatouTrace t;
    t.xi = xi;
    t.singular = singular;
    t.target = singular ? 0.0 : cfg.density(xi.theta);
    // Occupancy of the shadow is nonincreasing in depth, so the cap is found by bisection.
    auto usable = [&](double d) {
        return !nu_o.bins().empty() ||
               nu_o.atoms_in(ray_shadow(xi, d, cfg.shadow_R)) >= static_cast<std::size_t>(cfg.min_atoms);
    };
    double cap = 0.0;
    if (usable(cfg.depth_max)) {
        cap = cfg.depth_max;
    } else if (usable(grid.front())) {
        double lo = grid.front(), hi = cfg.depth_max;
        while (hi - lo > 1e-3) {
            const double mid = 0.5 * (lo + hi);
            (usable(mid) ? lo : hi) = mid;
        }
        cap = lo;
    }
    std::vector<double> depths;
    for (double d : grid)
        if (d < cap - 1e-9) depths.push_back(d);
    if (cap > 0.0) depths.push_back(cap);
    for (double d : depths) {
        const RaySample rs = ray_sample(xi, {d}, cfg.lateral_r);
        t.depths.push_back(d);
        t.radial.push_back(quotient_at(ctx, rs.points[0], nu_o, w2, w1, cfg.singular_atoms));
        const double l1 = quotient_at(ctx, rs.points[1], nu_o, w2, w1, cfg.singular_atoms);
        const double l2 = quotient_at(ctx, rs.points[2], nu_o, w2, w1, cfg.singular_atoms);
        t.lateral_lo.push_back(std::min(l1, l2));
        t.lateral_hi.push_back(std::max(l1, l2));
    }
    if (t.depths.empty()) {
        t.resolution_exhausted = true;
        return t;
    }
    t.cap_depth = t.depths.back();
    t.final_quotient = t.radial.back();
    const BoundaryMeasure eta1 = nu_o.reweighted(cfg.density) + BoundaryMeasure::from_atoms(cfg.singular_atoms);
    t.borel = arc_ratio(eta1, nu_o, ray_shadow(xi, t.cap_depth, cfg.shadow_R));
    if (!singular) t.rel_error = std::abs(t.final_quotient - t.target) / t.target;
    std::size_t ref = 0;
    for (std::size_t j = 0; j < t.depths.size(); ++j)
        if (std::abs(t.depths[j] - 1.0) < std::abs(t.depths[ref] - 1.0)) ref = j;
    t.growth = t.final_quotient / t.radial[ref];
    return t;
}

FatouReport fatou_experiment(const GibbsContext& ctx, const BoundaryMeasure& nu_o, const FatouConfig& cfg) {
    if (nu_o.empty()) throw DomainError("fatou_experiment: nu_o has no mass");

    const std::vector<double> th = support_thetas(nu_o);
    const std::vector<double> w2 = support_weights(nu_o);

    // xi drawn from nu_o: atoms by weight, bins uniformly inside.
    Rng rng(cfg.seed);
    std::vector<double> cdf(w2.size());
    NeumaierSum acc;
    for (std::size_t i = 0; i < w2.size(); ++i) {
        acc.add(w2[i]);
        cdf[i] = acc.value();
    }
    std::vector<BoundaryPoint> xis;
    const std::size_t n_atoms = nu_o.atoms().size();
    for (int s = 0; s < cfg.xi_samples; ++s) {
        const double u = uniform(rng, 0.0, cdf.back());
        const std::size_t i = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                                     cdf.size() - 1);
        double theta = th[i];
        if (i >= n_atoms) {
            const double width = kTwoPi / nu_o.bins().size();
            theta = width * (i - n_atoms) + uniform(rng, 0.0, width);
        }
        xis.push_back(BoundaryPoint(theta));
    }

    FatouReport out;
    out.regular.resize(xis.size());
    parallel_for(xis.size(), [&](std::size_t i) { out.regular[i] = fatou_trace(ctx, nu_o, cfg, xis[i], false); });
    for (const Atom& a : cfg.singular_atoms) out.singular.push_back(fatou_trace(ctx, nu_o, cfg, BoundaryPoint(a.theta), true));

    int pass = 0;
    for (const auto& t : out.regular)
        if (!t.resolution_exhausted && t.rel_error <= cfg.rel_tol) ++pass;
    out.pass_fraction = out.regular.empty() ? 0.0 : static_cast<double>(pass) / out.regular.size();
    out.min_growth = std::numeric_limits<double>::infinity();
    for (const auto& t : out.singular) out.min_growth = std::min(out.min_growth, t.resolution_exhausted ? 0.0 : t.growth);
    if (out.singular.empty()) out.min_growth = 0.0;
    return out;
}

KeyInequalityAudit audit_key_inequality(const GibbsContext& ctx, const BoundaryMeasure& nu_o,
                                        const BoundaryMeasure& eta1, const BoundaryMeasure& eta2, BoundaryPoint xi,
                                        double z_depth, double R, double R0) {
    if (!(R > 2.0 * R0)) throw DomainError("audit_key_inequality: R must exceed 2 R0");
    if (!(z_depth > 0.0)) throw DomainError("audit_key_inequality: z_depth must be positive");
    KeyInequalityAudit out;
    out.xi = xi;
    out.z_depth = z_depth;
    out.R = R;

    for (double t = z_depth;; t -= 0.5 * R) {
        out.depths.push_back(std::max(t, 0.0));
        if (t < 0.5 * R) break;
    }
    const std::size_t n = out.depths.size();
    std::vector<Arc> O(n);
    for (std::size_t i = 0; i < n; ++i) {
        O[i] = ray_shadow(xi, out.depths[i], R);
        out.halfwidths.push_back(O[i].halfwidth);
    }
    out.inclusions_ok = true;
    for (std::size_t i = 1; i < n; ++i) {
        const double inner = ray_shadow(xi, out.depths[i], 0.5 * R).halfwidth;
        if (!(inner <= O[i - 1].halfwidth + 1e-12 && O[i - 1].halfwidth <= O[i].halfwidth + 1e-12))
            out.inclusions_ok = false;
    }

    const DiskPoint z = point_on_ray(DiskPoint{}, xi, z_depth);
    std::vector<double> nu(n);
    for (std::size_t i = 0; i < n; ++i) {
        nu[i] = nu_o.mass(O[i]);
        if (!(nu[i] > 0.0))
            throw DiagnosticError("audit_key_inequality: resolution exhausted, nu_o has no mass on the shadow at depth " +
                                  std::to_string(out.depths[i]));
        if (i == 0) {
            out.k.push_back(1.0);
        } else {
            const DiskPoint zi = point_on_ray(DiskPoint{}, xi, out.depths[i]);
            const double I = line_integral(ctx.potential, zi, z, ctx.quad_step);
            out.k.push_back(std::exp(I - ctx.pressure * (z_depth - out.depths[i])));
        }
        out.a.push_back(out.k[i] / nu[i]);
    }
    out.a_decreasing = true;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        out.max_k_ratio = std::max(out.max_k_ratio, out.k[i + 1] / out.k[i]);
        if (!(out.a[i] > out.a[i + 1])) out.a_decreasing = false;
    }

    auto bracket = [&](const BoundaryMeasure& eta) {
        NeumaierSum s;
        s.add(out.a[0] * eta.mass(O[0]));
        for (std::size_t i = 1; i < n; ++i) s.add(out.a[i] * (eta.mass(O[i]) - eta.mass(O[i - 1])));
        return s.value();
    };
    out.S1 = bracket(eta1);
    out.S2 = bracket(eta2);
    out.h1 = evaluate(FHarmonicFunction{ctx, eta1, DiskPoint{}}, z);
    out.h2 = evaluate(FHarmonicFunction{ctx, eta2, DiskPoint{}}, z);
    out.C1_obs = std::max({out.h1 / out.S1, out.S1 / out.h1, out.h2 / out.S2, out.S2 / out.h2});

    out.M = maximal_function(eta1, eta2, xi, R, z_depth, 0.25).value;
    for (std::size_t i = 0; i < n; ++i) out.M = std::max(out.M, arc_ratio(eta1, eta2, O[i]));
    out.abel_ok = out.S1 <= out.M * out.S2 * (1.0 + 1e-12);
    out.end_constant = (out.h1 / out.h2) / out.M;
    out.end_ok = out.end_constant <= out.C1_obs * out.C1_obs;
    out.ray_constant = out.end_constant;
    for (double t = 0.5; t < z_depth; t += 0.5) {
        const DiskPoint zt = point_on_ray(DiskPoint{}, xi, t);
        const double q = evaluate(FHarmonicFunction{ctx, eta1, DiskPoint{}}, zt) /
                         evaluate(FHarmonicFunction{ctx, eta2, DiskPoint{}}, zt);
        out.ray_constant = std::max(out.ray_constant, q / out.M);
    }
    out.lower_constant = std::max(eta1.mass(O[0]) / nu[0] / out.h1, eta2.mass(O[0]) / nu[0] / out.h2);
    out.passed = out.inclusions_ok && out.a_decreasing && out.abel_ok && out.end_ok;
    return out;
}

MeasurePair random_measure_pair(const BoundaryMeasure& nu_o, std::uint64_t seed) {
    if (nu_o.atoms().empty()) throw DomainError("random_measure_pair needs an atomic nu_o");
    Rng rng(seed);
    auto density = [&] {
        std::array<double, 3> a{}, ph{};
        double tot = 0.0;
        for (int k = 0; k < 3; ++k) {
            a[k] = uniform(rng, 0.0, 1.0);
            ph[k] = uniform(rng, 0.0, kTwoPi);
            tot += a[k];
        }
        const double sc = 0.9 / tot;
        return [=](double t) {
            double v = 1.0;
            for (int k = 0; k < 3; ++k) v += sc * a[k] * std::cos((k + 1) * t + ph[k]);
            return v;
        };
    };
    MeasurePair p;
    p.eta1 = nu_o.reweighted(density());
    p.eta2 = nu_o.reweighted(density());
    if (seed % 2) p.eta1 = p.eta1 + BoundaryMeasure::from_atoms({{uniform(rng, 0.0, kTwoPi), 0.05}});
    p.xi = BoundaryPoint(nu_o.atoms()[rng() % nu_o.atoms().size()].theta);
    return p;
}

Separation separate(const GibbsContext& ctx, const BoundaryMeasure& eta1, const BoundaryMeasure& eta2,
                    const std::vector<DiskPoint>& candidates, double rel_tol) {
    Separation out;
    for (const DiskPoint& z : candidates) {
        const double a = evaluate(FHarmonicFunction{ctx, eta1, DiskPoint{}}, z);
        const double b = evaluate(FHarmonicFunction{ctx, eta2, DiskPoint{}}, z);
        const double gap = std::abs(a - b) / std::max(a, b);
        if (gap > out.rel_gap) {
            out.rel_gap = gap;
            out.z = z;
            out.h1 = a;
            out.h2 = b;
        }
        if (gap > rel_tol) {
            out.separated = true;
            break;
        }
    }
    return out;
}

Proportionality proportionality(const FHarmonicFunction& h1, const FHarmonicFunction& h2,
                                const std::vector<DiskPoint>& points) {
    if (points.empty()) throw DomainError("proportionality: no points");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    NeumaierSum sum;
    for (const DiskPoint& z : points) {
        const double q = evaluate(h1, z) / evaluate(h2, z);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        sum.add(q);
    }
    return {sum.value() / points.size(), hi / lo - 1.0};
}

UniquenessReport uniqueness_checks(const GibbsContext& ctx, const BoundaryMeasure& nu_o,
                                   const std::vector<DiskPoint>& candidates, const Isometry& rebase, int pairs,
                                   std::uint64_t seed) {
    UniquenessReport out;
    Rng rng(seed);
    auto random_atoms = [&](int n, double mass) {
        std::vector<Atom> a(n);
        double total = 0.0;
        for (auto& x : a) {
            x = {uniform(rng, 0.0, kTwoPi), uniform(rng, 0.1, 1.0)};
            total += x.weight;
        }
        for (auto& x : a) x.weight *= mass / total;
        return BoundaryMeasure::from_atoms(std::move(a));
    };
    for (int p = 0; p < pairs; ++p) {
        BoundaryMeasure e1, e2;
        switch (p % 3) {
            case 0:
                // Antipodal atoms of equal mass, rotated per pair.
                e1 = BoundaryMeasure::from_atoms({{canonical_angle(0.7 * p), 1.0}});
                e2 = BoundaryMeasure::from_atoms({{canonical_angle(0.7 * p + kPi), 1.0}});
                break;
            case 1:
                e1 = random_atoms(6, 1.0);
                e2 = random_atoms(6, 1.0);
                break;
            default: {
                const int k = 1 + p % 4;
                const double phase = uniform(rng, 0.0, kTwoPi), amp = uniform(rng, 0.2, 0.8);
                const BoundaryMeasure bumped =
                    nu_o.reweighted([=](double t) { return 1.0 + amp * std::cos(k * t + phase); });
                e1 = bumped.scaled(nu_o.total() / bumped.total());
                e2 = nu_o;
            }
        }
        const Separation s = separate(ctx, e1, e2, candidates);
        out.pair_gaps.push_back(s.rel_gap);
        ++out.pairs;
        if (s.separated) ++out.separated;
    }
    out.equal_pair_reported_equal = !separate(ctx, nu_o, nu_o, candidates).separated;

    const FHarmonicFunction base{ctx, nu_o, DiskPoint{}};
    const FHarmonicFunction tripled{ctx, nu_o.scaled(3.0), DiskPoint{}};
    const Proportionality sc = proportionality(tripled, base, candidates);
    out.scaled_factor = sc.factor;
    out.scaled_spread = sc.spread;

    // nu rebuilt at gamma o over the translated ball is the pushforward of nu_o.
    const FHarmonicFunction moved{ctx, nu_o.pushforward(rebase), apply(rebase, DiskPoint{})};
    out.rebased_spread = proportionality(moved, base, candidates).spread;
    return out;
}

}  // namespace gibbslab
