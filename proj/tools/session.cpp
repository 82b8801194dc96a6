#include "session.hpp"

#include <cmath>

#include "gibbslab/errors.hpp"

namespace gibbslab::cli {

namespace {

cplx complex_of(const json& v) {
    if (!v.is_array() || v.size() != 2) throw DomainError("complex entries are [re, im] pairs");
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

GroupPresentation group_from_config(const json& cfg) {
    const json& gc = cfg.at("group");
    const std::string name = gc.at("name").get<std::string>();
    if (name == "genus2") return builtin_genus2();
    if (name == "schottky") return schottky_rank2(gc.at("ell").get<double>());
    std::vector<Isometry> base;
    for (const json& m : gc.at("generators")) {
        if (!m.is_array() || m.size() != 4) throw DomainError("group.generators entries are [a, b, c, d]");
        base.push_back(Isometry::from_entries(complex_of(m[0]), complex_of(m[1]), complex_of(m[2]), complex_of(m[3])));
    }
    if (base.empty()) throw DomainError("group.generators is empty");
    GroupPresentation g = make_presentation("custom", base);
    if (gc.at("relator").is_array()) {
        g.relator = gc.at("relator").get<std::vector<int>>();
        if (relator_defect(g) > cfg.at("tolerances").at("relator").get<double>())
            throw DomainError("group.relator is not satisfied by the generators");
    }
    return g;
}

Potential potential_from_config(const json& cfg, const GroupPresentation& g) {
    const json& pc = cfg.at("potential");
    const std::string kind = pc.at("kind").get<std::string>();
    if (kind == "zero") return make_zero_potential();
    if (kind == "constant") return make_constant_potential(pc.at("constant").get<double>());
    if (kind == "bump") return make_orbit_bump(g, pc.at("amplitude").get<double>(), pc.at("width").get<double>());
    return make_user_table(g, pc.at("table").get<std::vector<double>>(), pc.at("table_step").get<double>());
}

std::function<double(double)> density_from_config(const json& cfg) {
    const json& d = cfg.at("density");
    const double a = d.at("a").get<double>(), b = d.at("b").get<double>();
    const int k = d.at("k").get<int>();
    if (a < std::abs(b)) throw DomainError("density a + b cos(k theta) must be nonnegative");
    return [=](double t) { return a + b * std::cos(k * t); };
}

Session::Session(json cfg) : cfg_(std::move(cfg)) {}

const GroupPresentation& Session::group() {
    if (!group_) group_ = group_from_config(cfg_);
    return *group_;
}

const Potential& Session::potential() {
    if (!potential_) potential_ = potential_from_config(cfg_, group());
    return *potential_;
}

EnumerateOptions Session::enumerate_options() const {
    EnumerateOptions opt;
    opt.dedup_tol = cfg_.at("ball").at("dedup_tol").get<double>();
    opt.max_nodes = cfg_.at("ball").at("max_nodes").get<std::size_t>();
    return opt;
}

const GroupBall& Session::ball() {
    if (!ball_) {
        EnumerateOptions opt = enumerate_options();
        // The covering radius is a sufficient pruning margin when known.
        if (std::isfinite(group().covering_radius)) opt.margin = group().covering_radius;
        ball_ = enumerate_ball(group(), cfg_.at("ball").at("radius").get<double>(), opt);
    }
    return *ball_;
}

const GroupBall& Session::ball(double radius) {
    if (radius == ball().radius) return ball();
    for (const auto& [r, b] : extra_balls_)
        if (r == radius) return b;
    GroupBall out;
    if (radius < ball().radius) {
        out.radius = radius;
        out.dedup_tolerance = ball().dedup_tolerance;
        for (const auto& e : ball().elements)
            if (e.displacement <= radius) out.elements.push_back(e);
    } else {
        EnumerateOptions opt = enumerate_options();
        if (std::isfinite(group().covering_radius)) opt.margin = group().covering_radius;
        out = enumerate_ball(group(), radius, opt);
    }
    extra_balls_.emplace_back(radius, std::move(out));
    return extra_balls_.back().second;
}

const std::vector<double>& Session::integrals() {
    if (!integrals_) integrals_ = orbit_integrals(potential(), ball(), cfg_.at("thermo").at("quad_step").get<double>());
    return *integrals_;
}

const PressureEstimate& Session::pressure() {
    if (!pressure_) pressure_ = pressure_from_integrals(ball(), integrals());
    return *pressure_;
}

double Session::R0() {
    if (!R0_) R0_ = estimate_R0(pressure().value, ball(), integrals());
    return *R0_;
}

const PattersonMeasure& Session::patterson() {
    if (!patterson_)
        patterson_ = patterson_from_integrals(pressure().value, ball(), integrals(),
                                              cfg_.at("thermo").at("s_offset").get<double>());
    return *patterson_;
}

GibbsContext Session::context() {
    GibbsContext ctx;
    ctx.potential = potential();
    ctx.pressure = pressure().value;
    ctx.quad_step = cfg_.at("thermo").at("quad_step").get<double>();
    ctx.truncation_T = cfg_.at("thermo").at("truncation_T").get<double>();
    validate(ctx);
    return ctx;
}

}  // namespace gibbslab::cli
