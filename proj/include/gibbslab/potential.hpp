#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gibbslab/fuchsian.hpp"
#include "gibbslab/hypgeo.hpp"

namespace gibbslab {

enum class PotentialKind { zero, constant, orbit_bump, user_table };

// Gamma-invariant potential on the unit tangent bundle. The built-ins depend on the base point
// only, through its distance to the orbit of o.
struct Potential {
    PotentialKind kind = PotentialKind::zero;
    double constant = 0.0;
    double amplitude = 0.0;
    double width = 0.0;
    // user_table: profile values at distances 0, table_step, 2 table_step, ...; linear in between,
    // clamped to the last value beyond the table.
    std::vector<double> table;
    double table_step = 0.0;
    double holder_exponent = 1.0;
    double bound = 0.0;
    std::shared_ptr<const OrbitLocator> locator;
};

Potential make_zero_potential();
Potential make_constant_potential(double c);
// amplitude * exp(1 - 1/(1 - q)) with q = (cosh d - 1)/(cosh width - 1) inside the bump, where d is
// the distance to the orbit. Bumps around distinct orbit points must not overlap.
Potential make_orbit_bump(const GroupPresentation& g, double amplitude, double width);
Potential make_user_table(const GroupPresentation& g, std::vector<double> values, double step);

// F + c; shares the locator.
Potential shifted(const Potential& F, double c);
std::string describe(const Potential& F);

// Value as a function of the distance to the orbit.
double potential_profile(const Potential& F, double d);
double eval_potential(const Potential& F, DiskPoint base, double direction = 0.0);
double eval_potential_hyp(const Potential& F, const Vec3& X);

// Integral of F along the unit-speed geodesic starting at frame f, for arclength [0, length].
double integrate_along(const Potential& F, const Frame& f, double length, double step);
double line_integral(const Potential& F, DiskPoint from, DiskPoint to, double step = 0.05);

struct GibbsContext {
    Potential potential;
    double pressure = 1.0;
    double truncation_T = 20.0;
    double quad_step = 0.05;
    double tol = 1e-6;
    bool verify_truncation = true;
};

void validate(const GibbsContext& ctx);

// log k^F(y, z; xi) = [int_xi^z F - int_xi^y F] - P beta_xi(y, z).
double log_gibbs_kernel(const GibbsContext& ctx, DiskPoint y, DiskPoint z, BoundaryPoint xi);
double gibbs_kernel(const GibbsContext& ctx, DiskPoint y, DiskPoint z, BoundaryPoint xi);
// Same, with y and z already on the hyperboloid.
double log_gibbs_kernel(const GibbsContext& ctx, const Vec3& Y, const Vec3& Z, BoundaryPoint xi);

// Largest max(k, 1/k) over sampled (y, z, xi) with dist(y, z) <= r.
double audit_distortion(const GibbsContext& ctx, double r, int samples, std::uint64_t seed);

}  // namespace gibbslab
