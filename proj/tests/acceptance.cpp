// Exit gate: one PASS/FAIL line per criterion. Usage: acceptance <path to gibbslab CLI> [criterion...]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "gibbslab/errors.hpp"
#include "gibbslab/fharm.hpp"
#include "gibbslab/numeric.hpp"
#include "gibbslab/suspension.hpp"
#include "gibbslab/thermo.hpp"
#include "../tools/session.hpp"

using namespace gibbslab;
using gibbslab::cli::json;

namespace {

std::string g_cli;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

cli::Session& session() {
    static cli::Session s(io::default_config());
    return s;
}

DiskPoint random_point(Rng& rng, double rmax) {
    return point_on_ray({}, BoundaryPoint(uniform(rng, 0.0, kTwoPi)), uniform(rng, 0.0, rmax));
}

Isometry random_isometry(Rng& rng, double rmax) {
    return Isometry::translation_to(random_point(rng, rmax)) * Isometry::rotation(uniform(rng, 0.0, kTwoPi));
}

Outcome busemann_suite() {
    Rng rng(101);
    double worst_id = 0.0, worst_trunc = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const DiskPoint x = random_point(rng, 5.0), y = random_point(rng, 5.0), z = random_point(rng, 5.0);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        const Isometry g = random_isometry(rng, 3.0);
        const double b = busemann(xi, y, z);
        worst_id = std::max(worst_id, std::abs(busemann(xi, x, y) + b - busemann(xi, x, z)));
        worst_id = std::max(worst_id, std::abs(b + busemann(xi, z, y)));
        worst_id = std::max(worst_id, std::abs(busemann(apply(g, xi), apply(g, y), apply(g, z)) - b));
        worst_id = std::max(worst_id, std::max(0.0, std::abs(b) - dist(y, z)));
        worst_trunc = std::max(worst_trunc, std::abs(busemann_truncated(xi, y, z, 30.0) - b));
    }
    return {worst_id <= 1e-9 && worst_trunc <= 1e-8,
            fmt("identity defect %.2e (tol 1e-9), truncated-limit gap %.2e (tol 1e-8)", worst_id, worst_trunc)};
}

Outcome kernel_suite() {
    cli::Session& s = session();
    GibbsContext ctx = s.context();
    Rng rng(102);
    double cocycle = 0.0, equiv = 0.0;
    const auto& el = s.ball(4.0).elements;
    for (int i = 0; i < 1000; ++i) {
        const DiskPoint x = random_point(rng, 4.0), y = random_point(rng, 4.0), z = random_point(rng, 4.0);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        const double kxy = log_gibbs_kernel(ctx, x, y, xi), kyz = log_gibbs_kernel(ctx, y, z, xi);
        cocycle = std::max(cocycle, std::abs(std::expm1(kxy + kyz - log_gibbs_kernel(ctx, x, z, xi))));
        const Isometry& g = el[1 + rng() % (el.size() - 1)].matrix;
        equiv = std::max(equiv, std::abs(std::expm1(log_gibbs_kernel(ctx, apply(g, y), apply(g, z), apply(g, xi)) - kyz)));
    }
    GibbsContext zero;
    zero.pressure = 1.0;
    double poisson = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const DiskPoint y = random_point(rng, 4.0), z = random_point(rng, 4.0);
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        poisson = std::max(poisson, std::abs(std::expm1(log_gibbs_kernel(zero, y, z, xi) + busemann(xi, y, z))));
    }
    return {cocycle <= 1e-6 && equiv <= 1e-6 && poisson <= 1e-6,
            fmt("bump cocycle %.2e, equivariance %.2e, F=0 vs exp(-beta) %.2e (tol 1e-6 relative)", cocycle, equiv,
                poisson)};
}

Outcome pressure_suite() {
    cli::Session& s = session();
    const GroupBall& b = s.ball(8.0);
    const PressureEstimate p0 = pressure(make_zero_potential(), b);
    bool ok = std::abs(p0.value - 1.0) <= 0.10;
    std::ostringstream d;
    d << "P(0) = " << fmt("%.4f", p0.value);
    double worst_shift = 0.0;
    for (double c : {-0.5, 0.5, 1.0}) {
        const PressureEstimate pc = pressure(make_constant_potential(c), b);
        const double excess = std::abs(pc.value - p0.value - c) / (2.0 * pc.residual);
        worst_shift = std::max(worst_shift, excess);
    }
    ok = ok && worst_shift <= 1.0;
    d << fmt(", shift law |dP - c| / (2 residual) max %.3f", worst_shift);
    for (const Potential& F : {make_zero_potential(), s.potential()}) {
        const double orb = pressure(F, b).value;
        const double cg = pressure_closed_geodesics(F, s.group(), 6.0).value;
        const double rel = std::abs(cg - orb) / orb;
        ok = ok && rel <= 0.20;
        d << fmt(", orbital %.4f vs closed %.4f (%.1f%%)", orb, cg, 100 * rel);
    }
    return {ok, d.str()};
}

Outcome shadow_suite() {
    cli::Session& s = session();
    const double R = 4.0;
    if (!(R > 2.0 * s.R0())) return {false, "R does not exceed 2 R0"};
    const GibbsContext ctx = s.context();
    const GroupBall& pts = s.ball(6.0);
    double C[2];
    int i = 0;
    for (double radius : {6.0, 8.0}) {
        const GroupBall& b = s.ball(radius);
        const auto I = orbit_integrals(s.potential(), b);
        const BoundaryMeasure nu = patterson_from_integrals(ctx.pressure, b, I).measure;
        C[i++] = shadow_lemma_audit(ctx, nu, pts, R, 5).C;
    }
    const double drift = std::max(C[0], C[1]) / std::min(C[0], C[1]);
    return {std::isfinite(C[0]) && std::isfinite(C[1]) && drift < 2.0,
            fmt("R = %.1f > 2 R0 = %.2f, C(6) = %.2f, C(8) = %.2f", R, 2 * s.R0(), C[0], C[1]) +
                fmt(", drift %.3f (< 2)", drift)};
}

Outcome equivariance_suite() {
    cli::Session& s = session();
    const GibbsContext ctx = s.context();
    std::vector<double> l1;
    for (double radius : {6.0, 7.0, 8.0}) {
        const GroupBall& b = s.ball(radius);
        const auto I = orbit_integrals(s.potential(), b);
        const BoundaryMeasure nu = patterson_from_integrals(ctx.pressure, b, I).measure;
        double worst = 0.0;
        for (const Isometry& g : s.group().generators)
            worst = std::max(worst, ledrappier_equivariance(ctx, nu, g, 64).l1_relative);
        l1.push_back(worst);
    }
    const bool ok = l1[2] <= 0.15 && l1[1] < l1[0] && l1[2] < l1[1];
    return {ok, fmt("64-arc relative L1 at radii 6/7/8: %.3f / %.3f / %.3f (tol 0.15 at 8, decreasing)", l1[0], l1[1],
                    l1[2])};
}

Outcome fatou_suite() {
    cli::Session& s = session();
    FatouConfig cfg;
    cfg.density = [](double t) { return 1.0 + std::cos(t); };
    cfg.xi_samples = 50;
    cfg.depth_step = 1.0;
    cfg.seed = 1;
    const GibbsContext ctx = s.context();
    const BoundaryMeasure& nu = s.patterson().measure;
    const FatouReport reg = fatou_experiment(ctx, nu, cfg);
    FatouConfig sc = cfg;
    sc.singular_atoms = {{2.0, 1.0}};
    const FatouTrace t = fatou_trace(ctx, nu, sc, BoundaryPoint(2.0), true);
    return {reg.pass_fraction >= 0.9 && t.growth >= 10.0,
            fmt("fraction of 50 regular xi within 10%%: %.2f (need 0.90), singular growth %.1f (need 10)", reg.pass_fraction,
                t.growth)};
}

Outcome key_inequality_suite() {
    cli::Session& s = session();
    const GibbsContext ctx = s.context();
    const BoundaryMeasure& nu = s.patterson().measure;
    int passed = 0;
    double lo = INFINITY, hi = 0.0;
    for (int p = 0; p < 20; ++p) {
        const MeasurePair mp = random_measure_pair(nu, 1100 + p);
        const KeyInequalityAudit a = audit_key_inequality(ctx, nu, mp.eta1, mp.eta2, mp.xi, 6.0, 4.0, s.R0());
        passed += a.passed;
        lo = std::min(lo, a.ray_constant);
        hi = std::max(hi, a.ray_constant);
    }
    return {passed == 20 && hi / lo <= 2.0,
            fmt("audits passed %.0f/20, observed constant in [%.3f, %.3f], ratio %.3f (<= 2)", passed, lo, hi, hi / lo)};
}

Outcome weak_l1_suite() {
    cli::Session& s = session();
    const BoundaryMeasure& nu = s.patterson().measure;
    double A_first = 0.0, A_all = 0.0;
    for (int p = 0; p < 20; ++p) {
        const MeasurePair mp = random_measure_pair(nu, 1300 + p);
        const WeakL1Sweep w = weak_l1_sweep(mp.eta1, mp.eta2, 4.0, {2, 4, 8, 16});
        A_first = std::max(A_first, w.A.front());
        A_all = std::max(A_all, w.A_max);
    }
    return {A_all <= 2.0 * A_first,
            fmt("max alpha eta2[M > alpha] / |eta1| = %.3f, bound 2 x %.3f (alpha = 2)", A_all, A_first)};
}

Outcome uniqueness_suite() {
    cli::Session& s = session();
    std::vector<DiskPoint> cand;
    for (const auto& e : s.ball(4.0).elements) cand.push_back(e.image);
    const UniquenessReport u =
        uniqueness_checks(s.context(), s.patterson().measure, cand, s.group().generators[0], 10, 12);
    const bool scaled = u.scaled_factor == 3.0 && u.scaled_spread <= 1e-12;
    return {u.separated == u.pairs && u.equal_pair_reported_equal && scaled && u.rebased_spread <= 0.15,
            fmt("separated %.0f/%.0f, scaled factor %.15g, rebased spread %.3f (tol 0.15)", u.separated, u.pairs,
                u.scaled_factor, u.rebased_spread)};
}

Outcome suspension_suite() {
    cli::Session& s = session();
    const Representation rho = random_genus2_representation(s.group(), 1, 2.0);
    validate(s.group(), rho);
    if (looks_elementary(s.group(), rho)) return {false, "representation looks elementary"};
    const GroupBall& b = s.ball(8.0);
    const SuspensionData data = suspension_data(rho, s.potential(), b);
    const std::vector<SpherePoint> xs{SpherePoint::from_angles(0.3, 0.2), SpherePoint::from_angles(2.0, 4.0),
                                      SpherePoint::from_angles(1.2, 1.0), SpherePoint::from_angles(3.0, 5.5)};
    const EquidistributionReport r = equidistribution_report(data, {6, 7, 8}, xs, 768, ThetaWeights::exponential);
    const SuspensionData shifted_data = suspension_data(rho, shifted(s.potential(), 0.5), b);
    const double shift = histogram_l1(theta_measure(data, 8.0, xs[0]).histogram(8),
                                      theta_measure(shifted_data, 8.0, xs[0]).histogram(8));
    const bool ok = r.gaps_decreasing && r.max_basepoint_gap < r.radius_gaps.back() && shift <= 1e-12;
    return {ok, fmt("radius gaps %.3f > %.3f, basepoint gap %.3f (< last radius gap), shift L1 %.2e (exact)",
                    r.radius_gaps[0], r.radius_gaps[1], r.max_basepoint_gap, shift)};
}

json read_manifest(const std::filesystem::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

Outcome end_to_end() {
    if (g_cli.empty()) return {false, "no CLI path given"};
    const auto base = std::filesystem::temp_directory_path() / "gibbslab_acceptance";
    std::filesystem::remove_all(base);
    std::vector<json> files;
    double worst = 0.0;
    for (const char* run : {"a", "b"}) {
        const auto dir = base / run;
        const std::string cmd = "\"" + g_cli + "\" all --out \"" + dir.string() + "\" > \"" +
                                (base / (std::string(run) + ".log")).string() + "\" 2>&1";
        std::filesystem::create_directories(base);
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = std::system(cmd.c_str());
        worst = std::max(worst, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        // Tolerance failures (exit 4) still produce a complete manifest.
        if (rc == -1 || !WIFEXITED(rc) || (WEXITSTATUS(rc) != 0 && WEXITSTATUS(rc) != 4))
            return {false, std::string("run ") + run + " exited abnormally"};
        files.push_back(read_manifest(dir / "manifest_all.json").at("files"));
    }
    const bool same = files[0] == files[1] && !files[0].empty();
    return {same && worst < 900.0, std::to_string(files[0].size()) + " files, digests " +
                                       (same ? "identical" : "differ") + fmt(", slowest run %.0f s (< 900)", worst)};
}

struct Criterion {
    int id;
    const char* name;
    double budget;   // seconds; 0 means none
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (!a.empty() && std::isdigit(static_cast<unsigned char>(a[0])) && a.find('/') == std::string::npos)
            only.insert(std::stoi(a));
        else
            g_cli = a;
    }
    const std::vector<Criterion> criteria{
        {1, "busemann cocycle suite", 10, busemann_suite},
        {2, "gibbs kernel suite", 60, kernel_suite},
        {3, "pressure", 0, pressure_suite},
        {4, "shadow lemma", 0, shadow_suite},
        {5, "patterson equivariance", 0, equivariance_suite},
        {6, "fatou", 300, fatou_suite},
        {7, "key inequality", 0, key_inequality_suite},
        {8, "weak L1", 0, weak_l1_suite},
        {9, "uniqueness", 0, uniqueness_suite},
        {10, "suspension", 300, suspension_suite},
        {11, "end-to-end all", 0, end_to_end},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget > 0 && secs >= c.budget) {
            o.pass = false;
            o.detail += fmt(" [over budget %.0f s]", c.budget);
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail
                  << fmt(" (%.1f s)", secs) << std::endl;
    }
    return failed ? 1 : 0;
}
