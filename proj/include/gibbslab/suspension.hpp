#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "gibbslab/fuchsian.hpp"
#include "gibbslab/potential.hpp"

namespace gibbslab {

// 2x2 complex matrix acting projectively on the Riemann sphere.
struct Mat2c {
    cplx a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

    static Mat2c identity() { return {}; }
    Mat2c operator*(const Mat2c& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    cplx det() const { return a * d - b * c; }
    cplx trace() const { return a + d; }
    // Adjugate; the inverse when det = 1.
    Mat2c inverse() const { return {d, -b, -c, a}; }
};

// Frobenius distance to the nearer of +I and -I.
double distance_to_pm_identity(const Mat2c& m);

struct SpherePoint {
    double x = 0.0, y = 0.0, z = 1.0;

    static SpherePoint from_complex(cplx w);     // stereographic from the north pole
    static SpherePoint from_angles(double polar, double azimuth);
    // Homogeneous coordinates (u : v); the north pole is (1 : 0).
    std::array<cplx, 2> homogeneous() const;
    static SpherePoint from_homogeneous(cplx u, cplx v);
};

double chordal_distance(const SpherePoint& p, const SpherePoint& q);

// Projective action; the chart is chosen by hemisphere so points near either pole stay accurate.
SpherePoint mobius_apply(const Mat2c& m, const SpherePoint& x);

struct Representation {
    std::vector<Mat2c> images;   // one per generator of the presentation, inverses included
};

// Images for the base generators; the inverse images are filled from inverse_of.
Representation make_representation(const GroupPresentation& g, const std::vector<Mat2c>& base_images);
Representation trivial_representation(const GroupPresentation& g);
// Rotations about the polar axis by the given angles: commuting, with invariant measures.
Representation rotation_representation(const GroupPresentation& g, const std::vector<double>& angles);
// Seeded solution of [A1, B1][A2, B2] = I for the genus-2 relator. A1, B1 and the seed matrix for
// A2 have singular values e^{+-stretch}.
Representation random_genus2_representation(const GroupPresentation& g, std::uint64_t seed, double stretch = 1.0);

Mat2c rep_image(const Representation& rho, const std::vector<int>& word);
// Max over generators of |det - 1| and the relator image distance to +-I.
double determinant_defect(const Representation& rho);
double homomorphism_defect(const GroupPresentation& g, const Representation& rho);
// Throws DomainError unless dets are 1 within 1e-10 and the relator defect is below 1e-6.
void validate(const GroupPresentation& g, const Representation& rho);
// Heuristic: all base images commute or share a fixed point.
bool looks_elementary(const GroupPresentation& g, const Representation& rho);

struct SphereAtom {
    SpherePoint point;
    double weight = 0.0;
};

class SphereMeasure {
public:
    SphereMeasure() = default;
    explicit SphereMeasure(std::vector<SphereAtom> atoms);

    const std::vector<SphereAtom>& atoms() const { return atoms_; }
    double total() const;
    // Equal-area ring-ordered histogram with 12 nside^2 bins.
    std::vector<double> histogram(int nside) const;
    SphereMeasure pushforward(const Mat2c& m) const;

private:
    std::vector<SphereAtom> atoms_;
};

// Ring-scheme pixel index of the equal-area 12 nside^2 tessellation.
int healpix_ring_index(int nside, const SpherePoint& p);
// nside with 12 nside^2 == bins; DomainError otherwise.
int healpix_nside(int bins);
double histogram_l1(const std::vector<double>& a, const std::vector<double>& b);

enum class ThetaWeights {
    exponential,    // exp(int_o^{go} F)
    raw_integral,   // int_o^{go} F, must be nonnegative
};

ThetaWeights parse_theta_weights(const std::string& s);
std::string to_string(ThetaWeights w);

// Orbit data reused across radii and starting points.
struct SuspensionData {
    GroupBall ball;
    std::vector<double> integrals;   // int_o^{go} F per ball element
    std::vector<Mat2c> inverse_images;  // rho(g)^{-1} per ball element
};

SuspensionData suspension_data(const Representation& rho, const Potential& F, const GroupBall& ball,
                               double step = 0.05);

// theta_{F,R}: atoms rho(g)^{-1} x over ball elements with displacement <= R, normalized to mass 1.
// With base = gamma, the orbit is read from gamma o: g runs over gamma g' gamma^{-1}.
SphereMeasure theta_measure(const SuspensionData& data, double R, const SpherePoint& x,
                            ThetaWeights mode = ThetaWeights::exponential, const Mat2c& base = Mat2c::identity());
SphereMeasure theta_measure(const Representation& rho, const Potential& F, const GroupBall& ball,
                            const SpherePoint& x, ThetaWeights mode = ThetaWeights::exponential);

struct EquidistributionReport {
    std::vector<double> radii;
    std::vector<double> radius_gaps;      // L1 between consecutive radii, first starting point
    std::vector<double> basepoint_gaps;   // L1 to the first starting point at the largest radius
    double max_basepoint_gap = 0.0;
    bool gaps_decreasing = false;
    bool basepoint_insensitive = false;   // max_basepoint_gap below the last radius gap
    bool contracting = false;             // both of the above
};

EquidistributionReport equidistribution_report(const SuspensionData& data,
                                               const std::vector<double>& radii,
                                               const std::vector<SpherePoint>& x_list, int bins,
                                               ThetaWeights mode = ThetaWeights::exponential);

// L1 between rho(gamma)_* theta at o and theta rebuilt at gamma o.
double equivariance_check(const GroupPresentation& g, const Representation& rho, const SuspensionData& data,
                          double R, const SpherePoint& x, int gamma_index, int bins,
                          ThetaWeights mode = ThetaWeights::exponential);

}  // namespace gibbslab
