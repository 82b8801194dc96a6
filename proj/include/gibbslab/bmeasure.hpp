#pragma once

#include <functional>
#include <vector>

#include "gibbslab/hypgeo.hpp"

namespace gibbslab {

struct Atom {
    double theta = 0.0;
    double weight = 0.0;
};

inline constexpr double kAtomMatchTol = 1e-9;

// Finite measure on the circle: atoms plus a piecewise-constant density on the dyadic partition
// with 2^depth bins starting at angle 0. Immutable after construction.
class BoundaryMeasure {
public:
    BoundaryMeasure() = default;
    // Atoms closer than kAtomMatchTol are merged; zero weights dropped.
    static BoundaryMeasure from_atoms(std::vector<Atom> atoms);
    // bins holds arc masses; its size must be a power of two.
    static BoundaryMeasure from_bins(std::vector<double> bins);
    static BoundaryMeasure from_parts(std::vector<Atom> atoms, std::vector<double> bins);

    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<double>& bins() const { return bins_; }
    int depth() const { return depth_; }
    double total() const { return total_; }
    double atom_total() const { return atom_total_; }
    bool empty() const { return total_ <= 0.0; }

    // Mass of the open arc; the full circle gives the total.
    double mass(const Arc& a) const;
    // Mass of [lo, hi) for 0 <= lo <= hi <= 2 pi.
    double mass_between(double lo, double hi) const;
    // Masses of n equal arcs [2 pi j/n, 2 pi (j+1)/n).
    std::vector<double> arc_masses(int n) const;

    BoundaryMeasure scaled(double c) const;
    // Atom weights multiplied by w(theta); bins by w at bin midpoints.
    BoundaryMeasure reweighted(const std::function<double(double)>& w) const;
    // g_* m: atoms moved exactly, densities rebinned at the same depth.
    BoundaryMeasure pushforward(const Isometry& g) const;
    // Number of atoms inside the open arc.
    std::size_t atoms_in(const Arc& a) const;

private:
    double atoms_between(double lo, double hi) const;
    double bins_between(double lo, double hi) const;
    std::size_t count_between(double lo, double hi) const;
    void finish();

    std::vector<Atom> atoms_;            // sorted by theta
    std::vector<double> atom_prefix_;    // atom_prefix_[i] = sum of weights of atoms_[0..i)
    std::vector<double> bins_;
    std::vector<double> bin_prefix_;
    int depth_ = -1;
    double total_ = 0.0;
    double atom_total_ = 0.0;
};

BoundaryMeasure operator+(const BoundaryMeasure& a, const BoundaryMeasure& b);

struct LebesgueDecomposition {
    int depth = 0;
    std::vector<double> density_ratio;  // f on each dyadic bin (0 where eta2 vanishes)
    std::vector<double> eta1_bins, eta2_bins, singular_bins;
    BoundaryMeasure singular_part;
    // Sum over bins of |eta1 - (f eta2 + singular)|.
    double reconstruction_defect = 0.0;
};

LebesgueDecomposition lebesgue_decompose(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2,
                                         int depth);

struct MaximalProfile {
    BoundaryPoint xi;
    double value = 0.0;
    double argmax_depth = 0.0;
    int infinite_depths = 0;  // sampled depths where eta2 of the shadow vanished
};

// Shadow O_R(o, z_t) of the point at depth t on [o, xi).
Arc ray_shadow(BoundaryPoint xi, double t, double R);

// eta1(O)/eta2(O); +inf whenever eta2(O) = 0.
double arc_ratio(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2, const Arc& a);

MaximalProfile maximal_function(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2, BoundaryPoint xi,
                                double R, double depth_max = 10.0, double step = 0.25);

struct WeakL1Sweep {
    std::vector<double> alphas;
    std::vector<double> level_mass;  // eta2[M > alpha]
    std::vector<double> A;           // alpha eta2[M > alpha] / mass(eta1)
    double A_max = 0.0;
};

// M is evaluated at every atom and bin midpoint of eta2.
WeakL1Sweep weak_l1_sweep(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2, double R,
                          const std::vector<double>& alphas, double depth_max = 10.0, double step = 0.25);

std::vector<double> borel_differentiate(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2,
                                        BoundaryPoint xi, double R, const std::vector<double>& depths);

}  // namespace gibbslab
