#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gibbslab/bmeasure.hpp"
#include "gibbslab/potential.hpp"

namespace gibbslab {

// h(z) = int k^F(base, z; xi) d eta(xi).
struct FHarmonicFunction {
    GibbsContext ctx;
    BoundaryMeasure eta;
    DiskPoint base{};
};

// Atoms exactly, bins by their mass at the bin midpoint.
double evaluate(const FHarmonicFunction& h, DiskPoint z);
// Kernel values at the atoms followed by the bin midpoints of eta.
std::vector<double> kernel_row(const GibbsContext& ctx, DiskPoint base, DiskPoint z, const BoundaryMeasure& eta);
// Same support order as kernel_row.
std::vector<double> support_weights(const BoundaryMeasure& eta);

double h0(const GibbsContext& ctx, const BoundaryMeasure& nu_o, DiskPoint z);

// Points of the r-neighbourhood of [o, xi): per depth the radial point, then one point at
// distance lateral_r on each side.
struct RaySample {
    BoundaryPoint xi;
    std::vector<double> depths;
    double lateral_r = 0.0;
    std::vector<DiskPoint> points;  // 3 per depth
};

RaySample ray_sample(BoundaryPoint xi, const std::vector<double>& depths, double lateral_r);

struct HarnackAudit {
    double A_r = 1.0;           // largest observed max(h(z)/h(y), h(y)/h(z))
    double worst_slack = 0.0;   // largest observed ratio / per-sample kernel bound
    int samples = 0;
    int violations = 0;         // samples where the ratio exceeded sup_xi k(y, z; xi)
};

// y within distance 3 of the base, z within r of y.
HarnackAudit harnack_audit(const FHarmonicFunction& h, double r, int samples, std::uint64_t seed);

struct FatouConfig {
    std::function<double(double)> density;  // f(theta) >= 0
    std::vector<Atom> singular_atoms;
    int xi_samples = 50;
    double lateral_r = 1.0;
    double shadow_R = 4.0;
    int min_atoms = 30;                     // shadow occupancy that caps the usable depth
    double depth_step = 0.5;
    double depth_max = 12.0;
    double rel_tol = 0.10;
    std::uint64_t seed = 1;
};

struct FatouTrace {
    BoundaryPoint xi;
    bool singular = false;
    double target = 0.0;       // f(xi); unused for singular atoms
    double cap_depth = 0.0;    // deepest depth whose shadow still holds min_atoms atoms
    bool resolution_exhausted = false;  // not even the first depth was usable
    std::vector<double> depths;
    std::vector<double> radial;         // h1/h2 on the ray
    std::vector<double> lateral_lo, lateral_hi;
    double borel = 0.0;        // eta1(O)/eta2(O) of the shadow at the cap depth
    double final_quotient = 0.0;
    double rel_error = 0.0;    // |final - target| / target
    double growth = 0.0;       // singular: final quotient over the quotient at depth 1
};

struct FatouReport {
    std::vector<FatouTrace> regular;
    std::vector<FatouTrace> singular;
    double pass_fraction = 0.0;   // regular traces within rel_tol at the cap
    double min_growth = 0.0;      // over singular traces
};

// Quotient h1/h2 along the ray to xi up to the resolution cap, with eta1 = f nu_o + singular atoms
// and eta2 = nu_o.
FatouTrace fatou_trace(const GibbsContext& ctx, const BoundaryMeasure& nu_o, const FatouConfig& cfg, BoundaryPoint xi,
                       bool singular);
// Traces for xi_samples points drawn from nu_o and for every singular atom.
FatouReport fatou_experiment(const GibbsContext& ctx, const BoundaryMeasure& nu_o, const FatouConfig& cfg);

struct KeyInequalityAudit {
    BoundaryPoint xi;
    double z_depth = 0.0, R = 0.0;
    std::vector<double> depths;        // z_0 = z, ..., z_k with depth < R/2
    std::vector<double> halfwidths;    // of O_i = O_R(o, z_i)
    bool inclusions_ok = false;
    std::vector<double> k;             // exp int_{z_i}^z (F - P)
    std::vector<double> a;             // k_i / nu(O_i)
    bool a_decreasing = false;
    double max_k_ratio = 0.0;          // max k_{i+1}/k_i
    double h1 = 0.0, h2 = 0.0;
    double S1 = 0.0, S2 = 0.0;         // bracketed sums of the decomposition
    double C1_obs = 0.0;               // max over i of max(h_i/S_i, S_i/h_i)
    double M = 0.0;                    // maximal function of eta1/eta2 at xi
    bool abel_ok = false;              // S1 <= M S2
    double end_constant = 0.0;         // (h1/h2) / M
    double ray_constant = 0.0;         // sup over sampled z' on [o, z] of (h1/h2)(z') / M
    bool end_ok = false;               // end_constant <= C1_obs^2
    double lower_constant = 0.0;       // max over i of (eta_i(O_0)/nu(O_0)) / h_i(z)
    bool passed = false;
};

// Requires R > 2 R0 and nu_o mass on the smallest shadow.
KeyInequalityAudit audit_key_inequality(const GibbsContext& ctx, const BoundaryMeasure& nu_o,
                                        const BoundaryMeasure& eta1, const BoundaryMeasure& eta2, BoundaryPoint xi,
                                        double z_depth, double R, double R0);

struct MeasurePair {
    BoundaryMeasure eta1, eta2;
    BoundaryPoint xi;   // an atom of nu_o
};

// eta_i = nu_o times 1 + (trigonometric polynomial of degree 3 with sup norm <= 0.9); odd seeds add
// an atom of weight 0.05 to eta1.
MeasurePair random_measure_pair(const BoundaryMeasure& nu_o, std::uint64_t seed);

struct Separation {
    bool separated = false;
    DiskPoint z{};
    double h1 = 0.0, h2 = 0.0;
    double rel_gap = 0.0;      // largest |h1 - h2| / max(h1, h2) seen
};

// Searches the candidate points for a relative gap above rel_tol.
Separation separate(const GibbsContext& ctx, const BoundaryMeasure& eta1, const BoundaryMeasure& eta2,
                    const std::vector<DiskPoint>& candidates, double rel_tol = 1e-6);

struct Proportionality {
    double factor = 0.0;       // mean of h1/h2
    double spread = 0.0;       // max/min of h1/h2 minus 1
};

Proportionality proportionality(const FHarmonicFunction& h1, const FHarmonicFunction& h2,
                                const std::vector<DiskPoint>& points);

struct UniquenessReport {
    int pairs = 0;
    int separated = 0;                 // unequal pairs told apart
    bool equal_pair_reported_equal = false;
    double scaled_factor = 0.0;        // should be exactly 3
    double scaled_spread = 0.0;
    double rebased_spread = 0.0;       // h0 rebuilt at gamma o against h0, up to a constant
    std::vector<double> pair_gaps;
};

// Corpus of seeded unequal equal-mass pairs plus the scaled and rebased checks. candidates are
// the search points, rebase is the element used for the translated base.
UniquenessReport uniqueness_checks(const GibbsContext& ctx, const BoundaryMeasure& nu_o,
                                   const std::vector<DiskPoint>& candidates, const Isometry& rebase, int pairs,
                                   std::uint64_t seed);

}  // namespace gibbslab
