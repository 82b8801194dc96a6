#pragma once

#include <string>
#include <vector>

#include "gibbslab/bmeasure.hpp"
#include "gibbslab/fuchsian.hpp"
#include "gibbslab/potential.hpp"

namespace gibbslab {

struct PressureEstimate {
    double value = 0.0;
    double R_lo = 0.0, R_hi = 0.0;
    double residual = 0.0;      // rms of the log-sum residuals around the fitted line
    double slope_stderr = 0.0;
    std::size_t count = 0;      // orbit points or closed geodesics summed
    std::string method;         // "orbital" or "closed_geodesic"
};

// int_o^{gamma o} F for every element of the ball, in ball order.
std::vector<double> orbit_integrals(const Potential& F, const GroupBall& ball, double step = 0.05);

PressureEstimate pressure(const Potential& F, const GroupBall& ball, double step = 0.05);
PressureEstimate pressure_from_integrals(const GroupBall& ball, const std::vector<double>& integrals);

struct ClosedGeodesicSum {
    std::vector<ClosedGeodesic> classes;
    std::vector<double> integrals;  // int of F over one period
};

// Distinct oriented closed geodesics of length <= T_max with their F-integrals. Uses a ball of
// radius T_max + 2 Rc so that every class has a representative.
ClosedGeodesicSum closed_geodesics(const Potential& F, const GroupPresentation& g, double T_max,
                                   double step = 0.05);
// Slope of log(T * sum_{|c| <= T} exp(int_c F)) over [T_max / 2, T_max]. Needs P(F) > 0.
PressureEstimate pressure_closed_geodesics(const ClosedGeodesicSum& sum, double T_max);
PressureEstimate pressure_closed_geodesics(const Potential& F, const GroupPresentation& g, double T_max,
                                           double step = 0.05);

// Smallest grid T (step 0.25) such that int (F - P) < 0 on every orbit segment of length >= T.
double estimate_R0(const Potential& F, double P, const GroupBall& ball, double step = 0.05);
double estimate_R0(double P, const GroupBall& ball, const std::vector<double>& integrals);

struct PattersonMeasure {
    BoundaryMeasure measure;  // total mass 1
    double s_used = 0.0;
    double R_used = 0.0;
    double pressure = 0.0;
    double log_normalizer = 0.0;  // log of the unnormalized total weight
};

PattersonMeasure patterson(const Potential& F, double P, const GroupBall& ball, double s_offset = 0.05,
                           double step = 0.05);
PattersonMeasure patterson_from_integrals(double P, const GroupBall& ball, const std::vector<double>& integrals,
                                          double s_offset = 0.05);

// nu_z = k(o, z; .) nu_o, atom by atom.
BoundaryMeasure ledrappier_density(const GibbsContext& ctx, const BoundaryMeasure& nu_o, DiskPoint z);

struct EquivarianceDefect {
    double l1_relative = 0.0;   // sum |gamma_* nu_o - nu_{gamma o}| / mass(gamma_* nu_o) over the arcs
    double mass_pushed = 0.0;
    double mass_density = 0.0;  // h0(gamma o)
};

EquivarianceDefect ledrappier_equivariance(const GibbsContext& ctx, const BoundaryMeasure& nu_o, const Isometry& gamma,
                                           int arcs = 64);

struct ShadowLemmaAudit {
    double R = 0.0;
    double min_ratio = 0.0;     // of k(o, z; xi) nu_o(O_R(o, z))
    double max_ratio = 0.0;
    double C = 0.0;             // max(max_ratio, 1 / min_ratio)
    int points = 0;
    int samples = 0;
    int empty_shadows = 0;      // shadows without nu_o mass; C is infinite when nonzero
};

// Over every orbit point z of the ball and xi_per_point directions spread across O_R(o, z).
ShadowLemmaAudit shadow_lemma_audit(const GibbsContext& ctx, const BoundaryMeasure& nu_o, const GroupBall& points,
                                    double R, int xi_per_point = 5);

}  // namespace gibbslab
