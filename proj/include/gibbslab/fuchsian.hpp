#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gibbslab/hypgeo.hpp"

namespace gibbslab {

struct GroupPresentation {
    std::string name;
    std::vector<Isometry> generators;
    std::vector<int> inverse_of;     // inverse_of[k] is the index of g_k^{-1}
    std::vector<std::string> labels;
    std::vector<int> relator;        // word equal to the identity; empty if not supplied
    // Largest distance from o to its Dirichlet cell; NaN when unknown.
    double covering_radius = std::numeric_limits<double>::quiet_NaN();
};

struct OrbitElement {
    std::vector<int> word;
    Isometry matrix;
    DiskPoint image;
    double displacement = 0.0;
    BoundaryPoint direction;
};

struct GroupBall {
    double radius = 0.0;
    double dedup_tolerance = 1e-8;
    std::vector<OrbitElement> elements;  // sorted by displacement, identity first
    std::size_t explored = 0;            // nodes visited before the ball cut
};

struct EnumerateOptions {
    double dedup_tol = 1e-8;
    // Pruning margin beyond R; negative means 2 * max generator displacement.
    double margin = -1.0;
    std::size_t max_nodes = 6'000'000;
};

// Builds a presentation from base generators; inverses are appended in the same order.
GroupPresentation make_presentation(std::string name, const std::vector<Isometry>& base,
                                    std::vector<std::string> base_labels = {});

GroupPresentation builtin_genus2();
// Rank-2 Schottky group: translations by ell along two perpendicular diameters (free for ell > 1.77).
GroupPresentation schottky_rank2(double ell);

Isometry word_matrix(const GroupPresentation& g, const std::vector<int>& word);
double max_generator_displacement(const GroupPresentation& g);
// Distance from o to the image of o under the relator word; 0 for an exact presentation.
double relator_defect(const GroupPresentation& g);

GroupBall enumerate_ball(const GroupPresentation& g, double R, double dedup_tol = 1e-8);
GroupBall enumerate_ball(const GroupPresentation& g, double R, const EnumerateOptions& opt);

// All freely reduced words of length <= max_len, shortest first.
std::vector<std::vector<int>> enumerate_words(const GroupPresentation& g, int max_len);

struct GrowthEstimate {
    double slope = 0.0;
    double residual = 0.0;
    double R_lo = 0.0, R_hi = 0.0;
    std::size_t count = 0;
};

GrowthEstimate growth_fit(const GroupBall& ball);
double growth_rate(const GroupPresentation& g, double R_max);

double closed_geodesic_length(const Isometry& m);

// Nearest-orbit-point normalization: moves points into the Dirichlet cell of o by greedy
// descent over generators, then confirms against a cached local ball.
class OrbitLocator {
public:
    explicit OrbitLocator(const GroupPresentation& g, double local_radius = 4.0);

    int reduce(Vec3& X) const;
    int reduce(Frame& f) const;
    double distance_to_orbit(Vec3 X) const;
    double distance_to_orbit(DiskPoint p) const;

    // Orbit points gamma o of the local ball (identity first), hyperboloid coordinates.
    const std::vector<Vec3>& centers() const { return centers_; }
    const std::vector<Vec3>& generator_images() const { return gen_img_; }
    const std::vector<Lorentz>& generator_inverses() const { return gen_inv_; }
    const GroupPresentation& group() const { return group_; }
    double local_radius() const { return local_radius_; }
    double min_separation() const { return min_sep_; }

private:
    bool improve(Vec3& X) const;

    GroupPresentation group_;
    double local_radius_;
    double min_sep_ = 0.0;
    std::vector<Vec3> gen_img_;
    std::vector<Lorentz> gen_inv_;
    std::vector<Vec3> centers_;
    std::vector<Lorentz> center_inv_;
};

// Largest sampled distance from a point to the orbit; a lower estimate of the covering radius.
double estimate_covering_radius(const OrbitLocator& loc, int samples, std::uint64_t seed);

struct ClosedGeodesic {
    double length = 0.0;
    double trace = 0.0;
    std::vector<int> cutting_sequence;  // canonical cyclic rotation
    // Lift closest to o (ties broken by angle): its distance to o and its ideal endpoints.
    double min_distance = 0.0;
    double anchor_from = 0.0, anchor_to = 0.0;
};

// Follows the axis of a hyperbolic element through Dirichlet cells for one period. Conjugate
// elements share the anchor lift; the cutting sequence can differ when the axis hits a vertex.
ClosedGeodesic trace_closed_geodesic(const OrbitLocator& loc, const Isometry& m);

// True when both describe the same oriented closed geodesic on the quotient.
bool same_closed_geodesic(const ClosedGeodesic& a, const ClosedGeodesic& b, double tol = 1e-7);

}  // namespace gibbslab
