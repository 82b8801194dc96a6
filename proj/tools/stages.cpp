#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbslab/errors.hpp"
#include "gibbslab/hypgeo.hpp"
#include "gibbslab/numeric.hpp"
#include "session.hpp"

namespace gibbslab::cli {

namespace {

using io::format_double;

std::string fd(double v) { return format_double(v); }

// JSON has no infinity; encode it as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string word_string(const GroupPresentation& g, const std::vector<int>& w) {
    std::string s;
    for (int k : w) s += (s.empty() ? "" : " ") + (k < static_cast<int>(g.labels.size()) ? g.labels[k] : std::to_string(k));
    return s;
}

void check(StageResult& r, bool ok, const std::string& quantity) {
    if (!ok) r.failures.push_back(quantity);
}

double tol(Session& s, const char* key) { return s.cfg().at("tolerances").at(key).get<double>(); }

StageResult run_enumerate(Session& s, io::Artifacts& out) {
    StageResult r;
    const GroupPresentation& g = s.group();
    const GroupBall& b = s.ball();
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < b.elements.size(); ++i) {
        const auto& e = b.elements[i];
        rows.push_back({std::to_string(i), word_string(g, e.word), fd(e.displacement), fd(e.image.x), fd(e.image.y),
                        fd(e.direction.theta)});
    }
    out.write_csv("enumerate.csv", {"index", "word", "displacement", "x", "y", "direction"}, rows);
    json rep{{"group", g.name}, {"radius", b.radius}, {"elements", b.elements.size()}, {"explored", b.explored},
             {"covering_radius", num(g.covering_radius)}, {"max_generator_displacement", max_generator_displacement(g)}};
    double defect = 0.0;
    if (!g.relator.empty()) {
        defect = relator_defect(g);
        rep["relator_defect"] = defect;
    }
    try {
        const GrowthEstimate ge = growth_fit(b);
        rep["growth"] = {{"slope", ge.slope}, {"residual", ge.residual}, {"window", {ge.R_lo, ge.R_hi}}};
    } catch (const DiagnosticError& e) {
        rep["growth"] = {{"error", e.what()}};
    }
    out.write_json("enumerate.json", rep);
    check(r, defect <= tol(s, "relator"), "enumerate.relator_defect");
    r.summary = {{"elements", b.elements.size()}};
    return r;
}

StageResult run_pressure(Session& s, io::Artifacts& out) {
    StageResult r;
    const PressureEstimate& p = s.pressure();
    auto pj = [](const PressureEstimate& e) {
        return json{{"value", e.value}, {"window", {e.R_lo, e.R_hi}}, {"residual", e.residual},
                    {"slope_stderr", e.slope_stderr}, {"count", e.count}, {"method", e.method}};
    };
    json rep{{"orbital", pj(p)}, {"potential", describe(s.potential())}};
    const double T = s.cfg().at("thermo").at("T_max").get<double>();
    bool cross_ok = false;
    try {
        const PressureEstimate c = pressure_closed_geodesics(s.potential(), s.group(), T,
                                                             s.cfg().at("thermo").at("quad_step").get<double>());
        rep["closed_geodesic"] = pj(c);
        const double rel = std::abs(c.value - p.value) / std::abs(p.value);
        rep["relative_difference"] = rel;
        cross_ok = rel <= tol(s, "pressure_cross");
    } catch (const DiagnosticError& e) {
        rep["closed_geodesic"] = {{"error", e.what()}};
    }
    try {
        rep["R0"] = s.R0();
    } catch (const DiagnosticError& e) {
        rep["R0"] = {{"error", e.what()}};
    }
    // Partial log-sums for plotting the growth.
    std::vector<std::vector<std::string>> rows;
    const auto& el = s.ball().elements;
    const auto& I = s.integrals();
    LogSumExp lse;
    std::size_t i = 0;
    for (double R = 0.25; R <= s.ball().radius + 1e-12; R += 0.25) {
        while (i < el.size() && el[i].displacement <= R) lse.add(I[i++]);
        rows.push_back({fd(R), fd(lse.value()), std::to_string(i)});
    }
    out.write_csv("pressure_sums.csv", {"R", "log_sum", "count"}, rows);
    out.write_json("pressure.json", rep);
    check(r, cross_ok, "pressure.cross_check");
    r.summary = {{"P", p.value}, {"residual", p.residual}};
    return r;
}

StageResult run_patterson(Session& s, io::Artifacts& out) {
    StageResult r;
    const PattersonMeasure& pm = s.patterson();
    std::vector<std::vector<std::string>> rows;
    for (const Atom& a : pm.measure.atoms()) rows.push_back({fd(a.theta), fd(a.weight)});
    out.write_csv("patterson.csv", {"theta", "weight"}, rows);
    const GibbsContext ctx = s.context();
    json eq = json::array();
    double worst = 0.0;
    for (std::size_t k = 0; k < s.group().generators.size(); ++k) {
        const EquivarianceDefect d = ledrappier_equivariance(ctx, pm.measure, s.group().generators[k], 64);
        eq.push_back({{"generator", s.group().labels.empty() ? std::to_string(k) : s.group().labels[k]},
                      {"l1_relative", d.l1_relative}, {"h0_gamma_o", d.mass_density}});
        worst = std::max(worst, d.l1_relative);
    }
    double maxatom = 0.0;
    for (const Atom& a : pm.measure.atoms()) maxatom = std::max(maxatom, a.weight);
    out.write_json("patterson.json", {{"s_used", pm.s_used}, {"R_used", pm.R_used}, {"pressure", pm.pressure},
                                      {"atoms", pm.measure.atoms().size()}, {"total", pm.measure.total()},
                                      {"max_atom", maxatom}, {"equivariance", eq}, {"equivariance_max", worst}});
    check(r, worst <= tol(s, "equivariance"), "patterson.equivariance_l1");
    r.summary = {{"equivariance_max", worst}};
    return r;
}

// Throws DomainError unless R > 2 R0.
void require_R(Session& s, double R, const std::string& key) {
    const double R0 = s.R0();
    if (!(R > 2.0 * R0))
        throw DomainError(key + " = " + fd(R) + " must exceed 2 R0 = " + fd(2.0 * R0));
}

StageResult run_shadow_lemma(Session& s, io::Artifacts& out) {
    StageResult r;
    const double R = s.cfg().at("shadow").at("R").get<double>();
    require_R(s, R, "shadow.R");
    const GroupBall& pts = s.ball(s.cfg().at("shadow").at("points_radius").get<double>());
    const ShadowLemmaAudit a = shadow_lemma_audit(s.context(), s.patterson().measure, pts, R,
                                                  s.cfg().at("shadow").at("xi_per_point").get<int>());
    out.write_json("shadow_lemma.json", {{"R", R}, {"R0", s.R0()}, {"C", num(a.C)}, {"min_ratio", num(a.min_ratio)},
                                         {"max_ratio", a.max_ratio}, {"points", a.points}, {"samples", a.samples},
                                         {"empty_shadows", a.empty_shadows}, {"nu_radius", s.ball().radius}});
    check(r, std::isfinite(a.C), "shadow-lemma.C");
    r.summary = {{"C", num(a.C)}};
    return r;
}

StageResult run_maximal(Session& s, io::Artifacts& out) {
    StageResult r;
    const json& mc = s.cfg().at("maximal");
    const auto alphas = mc.at("alphas").get<std::vector<double>>();
    const double R = s.cfg().at("shadow").at("R").get<double>();
    require_R(s, R, "shadow.R");
    const BoundaryMeasure& nu = s.patterson().measure;
    std::vector<std::vector<std::string>> rows;
    json pairs = json::array();
    double A_first = 0.0, A_all = 0.0;
    for (int p = 0; p < mc.at("pairs").get<int>(); ++p) {
        const MeasurePair mp = random_measure_pair(nu, s.seed() * 1000 + 300 + p);
        const WeakL1Sweep w = weak_l1_sweep(mp.eta1, mp.eta2, R, alphas, mc.at("depth_max").get<double>(),
                                            mc.at("step").get<double>());
        for (std::size_t i = 0; i < alphas.size(); ++i)
            rows.push_back({std::to_string(p), fd(alphas[i]), fd(w.level_mass[i]), fd(w.A[i])});
        pairs.push_back({{"pair", p}, {"A", w.A}});
        if (!w.A.empty()) A_first = std::max(A_first, w.A.front());
        A_all = std::max(A_all, w.A_max);
    }
    out.write_csv("maximal.csv", {"pair", "alpha", "level_mass", "A"}, rows);
    // alpha eta2[M > alpha] must not grow with alpha: the smallest-alpha constant bounds the rest.
    const double bound = s.cfg().at("tolerances").at("stability_ratio").get<double>() * A_first;
    out.write_json("maximal.json", {{"R", R}, {"alphas", alphas}, {"pairs", pairs}, {"A_max", A_all},
                                    {"A_first_alpha", A_first}, {"bound", bound}});
    check(r, A_all <= bound, "maximal.weak_l1_constant");
    r.summary = {{"A_max", A_all}};
    return r;
}

StageResult run_borel(Session& s, io::Artifacts& out) {
    StageResult r;
    const BoundaryMeasure& nu = s.patterson().measure;
    const auto f = density_from_config(s.cfg());
    const BoundaryMeasure eta1 = nu.reweighted(f);
    const double R = s.cfg().at("fatou").at("shadow_R").get<double>();
    const auto depths = s.cfg().at("borel").at("depths").get<std::vector<double>>();
    std::vector<std::vector<std::string>> rows;
    json traces = json::array();
    for (double xi : s.cfg().at("borel").at("xi").get<std::vector<double>>()) {
        const auto ratios = borel_differentiate(eta1, nu, BoundaryPoint(xi), R, depths);
        json jr = json::array();
        for (std::size_t i = 0; i < depths.size(); ++i) {
            rows.push_back({fd(xi), fd(depths[i]), fd(ratios[i]), fd(f(xi)),
                            std::to_string(nu.atoms_in(ray_shadow(BoundaryPoint(xi), depths[i], R)))});
            jr.push_back(num(ratios[i]));
        }
        traces.push_back({{"xi", xi}, {"target", f(xi)}, {"ratios", jr}});
    }
    out.write_csv("borel.csv", {"xi", "depth", "ratio", "target", "atoms_in_shadow"}, rows);
    out.write_json("borel.json", {{"R", R}, {"depths", depths}, {"traces", traces}});
    return r;
}

json trace_json(const FatouTrace& t) {
    return {{"xi", t.xi.theta}, {"singular", t.singular}, {"target", t.target}, {"cap_depth", t.cap_depth},
            {"resolution_exhausted", t.resolution_exhausted}, {"final_quotient", num(t.final_quotient)},
            {"borel", num(t.borel)}, {"rel_error", num(t.rel_error)}, {"growth", num(t.growth)}};
}

void trace_rows(const FatouTrace& t, std::vector<std::vector<std::string>>& rows) {
    for (std::size_t j = 0; j < t.depths.size(); ++j)
        rows.push_back({fd(t.xi.theta), t.singular ? "1" : "0", fd(t.depths[j]), fd(t.radial[j]), fd(t.lateral_lo[j]),
                        fd(t.lateral_hi[j]), fd(t.target)});
}

StageResult run_fatou(Session& s, io::Artifacts& out) {
    StageResult r;
    const json& fc = s.cfg().at("fatou");
    FatouConfig cfg;
    cfg.density = density_from_config(s.cfg());
    cfg.xi_samples = fc.at("xi_samples").get<int>();
    cfg.lateral_r = fc.at("lateral_r").get<double>();
    cfg.shadow_R = fc.at("shadow_R").get<double>();
    cfg.min_atoms = fc.at("min_atoms").get<int>();
    cfg.depth_step = fc.at("depth_step").get<double>();
    cfg.depth_max = fc.at("depth_max").get<double>();
    cfg.rel_tol = tol(s, "fatou_rel");
    cfg.seed = s.seed();
    const GibbsContext ctx = s.context();
    const BoundaryMeasure& nu = s.patterson().measure;
    // Regular traces without singular mass; each singular atom in its own run.
    const FatouReport reg = fatou_experiment(ctx, nu, cfg);
    std::vector<FatouTrace> sing;
    for (double th : fc.at("singular_atoms").get<std::vector<double>>()) {
        FatouConfig sc = cfg;
        sc.singular_atoms = {{th, 1.0}};
        sing.push_back(fatou_trace(ctx, nu, sc, BoundaryPoint(th), true));
    }
    std::vector<std::vector<std::string>> rows;
    json jr = json::array(), js = json::array();
    for (const auto& t : reg.regular) {
        trace_rows(t, rows);
        jr.push_back(trace_json(t));
    }
    double min_growth = std::numeric_limits<double>::infinity();
    for (const auto& t : sing) {
        trace_rows(t, rows);
        js.push_back(trace_json(t));
        min_growth = std::min(min_growth, t.growth);
    }
    out.write_csv("fatou.csv", {"xi", "singular", "depth", "radial", "lateral_lo", "lateral_hi", "target"}, rows);
    out.write_json("fatou.json", {{"pass_fraction", reg.pass_fraction}, {"min_growth", num(min_growth)},
                                  {"rel_tol", cfg.rel_tol}, {"min_atoms", cfg.min_atoms}, {"regular", jr},
                                  {"singular", js}});
    check(r, reg.pass_fraction >= tol(s, "fatou_pass"), "fatou.pass_fraction");
    if (!sing.empty()) check(r, min_growth >= tol(s, "singular_growth"), "fatou.singular_growth");
    r.summary = {{"pass_fraction", reg.pass_fraction}, {"min_growth", num(min_growth)}};
    return r;
}

StageResult run_key_inequality(Session& s, io::Artifacts& out) {
    StageResult r;
    const double R = s.cfg().at("shadow").at("R").get<double>();
    require_R(s, R, "shadow.R");
    const double zd = s.cfg().at("key_inequality").at("z_depth").get<double>();
    const GibbsContext ctx = s.context();
    const BoundaryMeasure& nu = s.patterson().measure;
    std::vector<std::vector<std::string>> rows;
    json audits = json::array();
    bool all_pass = true;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int p = 0; p < s.cfg().at("key_inequality").at("pairs").get<int>(); ++p) {
        const MeasurePair mp = random_measure_pair(nu, s.seed() * 1000 + 100 + p);
        const KeyInequalityAudit a = audit_key_inequality(ctx, nu, mp.eta1, mp.eta2, mp.xi, zd, R, s.R0());
        for (std::size_t i = 0; i < a.depths.size(); ++i)
            rows.push_back({std::to_string(p), std::to_string(i), fd(a.depths[i]), fd(a.halfwidths[i]), fd(a.k[i]),
                            fd(a.a[i])});
        audits.push_back({{"pair", p}, {"xi", a.xi.theta}, {"passed", a.passed}, {"inclusions_ok", a.inclusions_ok},
                          {"a_decreasing", a.a_decreasing}, {"abel_ok", a.abel_ok}, {"end_ok", a.end_ok},
                          {"max_k_ratio", a.max_k_ratio}, {"C1_obs", num(a.C1_obs)}, {"M", num(a.M)},
                          {"end_constant", num(a.end_constant)}, {"ray_constant", num(a.ray_constant)},
                          {"lower_constant", num(a.lower_constant)}});
        all_pass = all_pass && a.passed;
        lo = std::min(lo, a.ray_constant);
        hi = std::max(hi, a.ray_constant);
    }
    const double spread = hi / lo;
    out.write_csv("key_inequality.csv", {"pair", "i", "depth", "halfwidth", "k", "a"}, rows);
    out.write_json("key_inequality.json", {{"R", R}, {"R0", s.R0()}, {"z_depth", zd}, {"audits", audits},
                                           {"ray_constant_min", num(lo)}, {"ray_constant_max", hi},
                                           {"stability", num(spread)}});
    check(r, all_pass, "key-inequality.audit");
    check(r, spread <= tol(s, "stability_ratio"), "key-inequality.stability");
    r.summary = {{"all_passed", all_pass}, {"stability", num(spread)}};
    return r;
}

StageResult run_harnack(Session& s, io::Artifacts& out) {
    StageResult r;
    const FHarmonicFunction h{s.context(), s.patterson().measure, DiskPoint{}};
    std::vector<std::vector<std::string>> rows;
    json res = json::array();
    int violations = 0;
    double prev = 1.0;
    bool monotone = true;
    auto radii = s.cfg().at("harnack").at("radii").get<std::vector<double>>();
    std::sort(radii.begin(), radii.end());
    for (double rr : radii) {
        const HarnackAudit a = harnack_audit(h, rr, s.cfg().at("harnack").at("samples").get<int>(), s.seed() + 7);
        rows.push_back({fd(rr), fd(a.A_r), fd(a.worst_slack), std::to_string(a.violations)});
        res.push_back({{"r", rr}, {"A_r", a.A_r}, {"worst_slack", a.worst_slack}, {"violations", a.violations}});
        violations += a.violations;
        monotone = monotone && a.A_r >= prev;
        prev = a.A_r;
    }
    out.write_csv("harnack.csv", {"r", "A_r", "worst_slack", "violations"}, rows);
    out.write_json("harnack.json", {{"audits", res}, {"monotone", monotone}});
    check(r, violations == 0, "harnack.violations");
    r.summary = {{"violations", violations}};
    return r;
}

StageResult run_uniqueness(Session& s, io::Artifacts& out) {
    StageResult r;
    const json& uc = s.cfg().at("uniqueness");
    std::vector<DiskPoint> cand;
    for (const auto& e : s.ball(uc.at("candidate_radius").get<double>()).elements) cand.push_back(e.image);
    const int gi = uc.at("rebase_generator").get<int>();
    if (gi < 0 || gi >= static_cast<int>(s.group().generators.size()))
        throw DomainError("uniqueness.rebase_generator out of range");
    const UniquenessReport u = uniqueness_checks(s.context(), s.patterson().measure, cand, s.group().generators[gi],
                                                 uc.at("pairs").get<int>(), s.seed() + 11);
    out.write_json("uniqueness.json", {{"pairs", u.pairs}, {"separated", u.separated},
                                       {"equal_pair_reported_equal", u.equal_pair_reported_equal},
                                       {"scaled_factor", u.scaled_factor}, {"scaled_spread", u.scaled_spread},
                                       {"rebased_spread", num(u.rebased_spread)}, {"pair_gaps", u.pair_gaps},
                                       {"candidates", cand.size()}});
    check(r, u.separated == u.pairs, "uniqueness.separated");
    check(r, u.equal_pair_reported_equal, "uniqueness.equal_pair");
    check(r, std::abs(u.scaled_factor - 3.0) <= 1e-12 && u.scaled_spread <= 1e-12, "uniqueness.scaled_factor");
    check(r, u.rebased_spread <= tol(s, "equivariance"), "uniqueness.rebased_spread");
    r.summary = {{"separated", u.separated}, {"rebased_spread", num(u.rebased_spread)}};
    return r;
}

Representation representation_from_config(Session& s) {
    const json& sc = s.cfg().at("suspension");
    if (sc.at("generators").is_null()) {
        if (s.group().name != "genus2")
            throw DomainError("suspension.generators required unless the group is genus2");
        return random_genus2_representation(s.group(), s.seed(), sc.at("stretch").get<double>());
    }
    std::vector<Mat2c> base;
    for (const json& m : sc.at("generators")) {
        if (!m.is_array() || m.size() != 4) throw DomainError("suspension.generators entries are [a, b, c, d]");
        auto c = [&](int i) { return cplx{m[i].at(0).get<double>(), m[i].at(1).get<double>()}; };
        base.push_back({c(0), c(1), c(2), c(3)});
    }
    return make_representation(s.group(), base);
}

StageResult run_suspend(Session& s, io::Artifacts& out) {
    StageResult r;
    const json& sc = s.cfg().at("suspension");
    const Representation rho = representation_from_config(s);
    validate(s.group(), rho);
    const bool elementary = looks_elementary(s.group(), rho);
    // Equidistribution needs P(F) > 0; shifting F by a constant moves P by the same constant.
    Potential F = s.potential();
    double shift = 0.0;
    if (s.pressure().value <= 0.0) {
        shift = 0.5 - s.pressure().value;
        F = shifted(F, shift);
    }
    auto radii = sc.at("radii").get<std::vector<double>>();
    std::sort(radii.begin(), radii.end());
    const GroupBall& b = s.ball(radii.back());
    const SuspensionData data = suspension_data(rho, F, b, s.cfg().at("thermo").at("quad_step").get<double>());
    std::vector<SpherePoint> xs;
    for (const json& p : sc.at("x_list")) xs.push_back(SpherePoint::from_angles(p.at(0).get<double>(), p.at(1).get<double>()));
    const int bins = sc.at("bins").get<int>();
    const ThetaWeights mode = parse_theta_weights(sc.at("weights").get<std::string>());
    const EquidistributionReport rep = equidistribution_report(data, radii, xs, bins, mode);
    json eqv = json::array();
    for (double R : radii)
        eqv.push_back({{"R", R},
                       {"defect", equivariance_check(s.group(), rho, data, R, xs[0], sc.at("gamma_index").get<int>(),
                                                     bins, mode)}});
    // Exact shift check: the same weights computed for F + 0.5.
    const SuspensionData shifted_data = suspension_data(rho, shifted(F, 0.5), b, s.cfg().at("thermo").at("quad_step").get<double>());
    const int nside = healpix_nside(bins);
    const auto h = theta_measure(data, radii.back(), xs[0], mode).histogram(nside);
    const double shift_l1 = histogram_l1(h, theta_measure(shifted_data, radii.back(), xs[0], mode).histogram(nside));

    const SphereMeasure th = theta_measure(data, radii.back(), xs[0], mode);
    std::vector<std::vector<std::string>> rows;
    for (const auto& a : th.atoms()) rows.push_back({fd(a.point.x), fd(a.point.y), fd(a.point.z), fd(a.weight)});
    out.write_csv("theta.csv", {"x", "y", "z", "weight"}, rows);
    out.write_json("theta_histogram.json", {{"nside", nside}, {"R", radii.back()}, {"bins", h}});
    out.write_json("suspend.json", {{"homomorphism_defect", homomorphism_defect(s.group(), rho)},
                                    {"elementary_warning", elementary}, {"potential_shift", shift},
                                    {"weights", to_string(mode)}, {"radii", radii},
                                    {"radius_gaps", rep.radius_gaps}, {"basepoint_gaps", rep.basepoint_gaps},
                                    {"gaps_decreasing", rep.gaps_decreasing},
                                    {"basepoint_insensitive", rep.basepoint_insensitive},
                                    {"contracting", rep.contracting}, {"equivariance", eqv},
                                    {"shift_l1", shift_l1}});
    check(r, rep.gaps_decreasing, "suspend.radius_gaps");
    check(r, rep.basepoint_insensitive, "suspend.basepoint_gap");
    r.summary = {{"contracting", rep.contracting}, {"shift_l1", shift_l1}, {"elementary_warning", elementary}};
    return r;
}

StageResult run_audit_geometry(Session& s, io::Artifacts& out) {
    StageResult r;
    const json& gc = s.cfg().at("geometry");
    const GeometryAudit a = audit_geometry(gc.at("samples").get<int>(), gc.at("R").get<double>(), s.seed() + 13);
    out.write_json("geometry.json", {{"samples", a.samples}, {"R", gc.at("R")}, {"theta0", a.theta0},
                                     {"theta0_reference", a.theta0_reference}, {"K1", a.K1}, {"K2", a.K2},
                                     {"delta", a.deltaHyp}});
    check(r, a.theta0 > 0.0, "audit-geometry.theta0");
    r.summary = {{"theta0", a.theta0}};
    return r;
}

}  // namespace

const std::vector<Stage>& stages() {
    static const std::vector<Stage> list{
        {"audit-geometry", run_audit_geometry},
        {"enumerate", run_enumerate},
        {"pressure", run_pressure},
        {"patterson", run_patterson},
        {"shadow-lemma", run_shadow_lemma},
        {"maximal", run_maximal},
        {"borel", run_borel},
        {"fatou", run_fatou},
        {"key-inequality", run_key_inequality},
        {"harnack", run_harnack},
        {"uniqueness", run_uniqueness},
        {"suspend", run_suspend},
    };
    return list;
}

}  // namespace gibbslab::cli
