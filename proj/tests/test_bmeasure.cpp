#include <doctest.h>

#include <cmath>

#include "gibbslab/bmeasure.hpp"
#include "gibbslab/errors.hpp"

using namespace gibbslab;

namespace {

BoundaryMeasure random_atoms(Rng& rng, int n) {
    std::vector<Atom> a;
    for (int i = 0; i < n; ++i) a.push_back({uniform(rng, 0.0, kTwoPi), uniform(rng, 0.1, 1.0)});
    return BoundaryMeasure::from_atoms(a);
}

BoundaryMeasure random_density(Rng& rng, int depth) {
    std::vector<double> b(std::size_t{1} << depth);
    for (double& x : b) x = uniform(rng, 0.0, 1.0);
    return BoundaryMeasure::from_bins(b);
}

std::vector<double> binned(const std::function<double(double)>& f, int depth) {
    const std::size_t n = std::size_t{1} << depth;
    std::vector<double> b(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = kTwoPi * j / n, hi = kTwoPi * (j + 1) / n;
        b[j] = 0.5 * (f(lo) + f(hi)) * (hi - lo);  // trapezoid mass of f dtheta
    }
    return b;
}

}  // namespace

TEST_CASE("measure_of_arc") {
    Rng rng(51);
    const BoundaryMeasure m = random_atoms(rng, 200) + random_density(rng, 10);
    CHECK(m.mass(Arc{BoundaryPoint(1.0), kPi}) == doctest::Approx(m.total()).epsilon(1e-15));
    CHECK(m.mass(Arc{BoundaryPoint(1.0), 1e-12}) < 1e-9);
    for (int i = 0; i < 200; ++i) {
        const double c = uniform(rng, 0.0, kTwoPi), hw = uniform(rng, 0.01, kPi - 0.01);
        const Arc a{BoundaryPoint(c), hw};
        const Arc comp{BoundaryPoint(c + kPi), kPi - hw};
        // The two open arcs miss only their two shared endpoints.
        double endpoint_atoms = 0.0;
        for (const Atom& x : m.atoms())
            if (std::abs(angle_diff(x.theta, c - hw)) < 1e-15 || std::abs(angle_diff(x.theta, c + hw)) < 1e-15)
                endpoint_atoms += x.weight;
        CHECK(std::abs(m.mass(a) + m.mass(comp) + endpoint_atoms - m.total()) < 1e-12);
    }
    // Atom on an endpoint is excluded from the open arc.
    const BoundaryMeasure d = BoundaryMeasure::from_atoms({{1.0, 2.0}});
    CHECK(d.mass(Arc{BoundaryPoint(1.5), 0.5}) == 0.0);
    CHECK(d.mass(Arc{BoundaryPoint(1.5), 0.5 + 1e-12}) == 2.0);
    CHECK_THROWS_AS(BoundaryMeasure::from_bins({1.0, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(BoundaryMeasure::from_atoms({{0.0, -1.0}}), DomainError);
}

TEST_CASE("atoms merge within the matching tolerance, across angle zero too") {
    const BoundaryMeasure m = BoundaryMeasure::from_atoms({{0.5, 1.0}, {0.5 + 1e-10, 2.0}, {1e-11, 1.0}, {kTwoPi - 1e-11, 1.0}});
    CHECK(m.atoms().size() == 2);
    CHECK(m.total() == doctest::Approx(5.0));
}

TEST_CASE("pushforward consistency") {
    Rng rng(52);
    const BoundaryMeasure m = random_atoms(rng, 300) + random_density(rng, 9);
    for (int i = 0; i < 30; ++i) {
        const Isometry g = Isometry::translation_to(point_on_ray({}, BoundaryPoint(uniform(rng, 0.0, kTwoPi)),
                                                                 uniform(rng, 0.0, 1.0))) *
                           Isometry::rotation(uniform(rng, 0.0, kTwoPi));
        const BoundaryMeasure pm = m.pushforward(g);
        CHECK(pm.total() == doctest::Approx(m.total()).epsilon(1e-12));
        const Arc a{BoundaryPoint(uniform(rng, 0.0, kTwoPi)), uniform(rng, 0.1, 2.0)};
        const Arc back = apply(g.inverse(), a);
        // Bin resolution: a bin's mass at both ends, stretched by at most e^{2 * 1}.
        const double slack = 2.0 * 8.0 * (*std::max_element(m.bins().begin(), m.bins().end()));
        CHECK(std::abs(pm.mass(a) - m.mass(back)) <= slack);
        CHECK(std::abs(pm.atom_total() - m.atom_total()) < 1e-12);
    }
}

TEST_CASE("lebesgue decomposition") {
    Rng rng(53);
    const BoundaryMeasure eta2 = random_atoms(rng, 100) + random_density(rng, 8);
    const LebesgueDecomposition twice = lebesgue_decompose(eta2.scaled(2.0), eta2, 8);
    for (double f : twice.density_ratio) CHECK(f == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(twice.singular_part.total() == 0.0);

    const BoundaryMeasure atom = BoundaryMeasure::from_atoms({{1.234, 3.0}});
    const BoundaryMeasure dens = random_density(rng, 8);
    const LebesgueDecomposition perp = lebesgue_decompose(atom, dens, 8);
    for (double f : perp.density_ratio) CHECK(f == 0.0);
    CHECK(perp.singular_part.total() == doctest::Approx(3.0));

    // Mixed: f eta2 on matched atoms and densities, extra atoms, density where eta2 vanishes.
    std::vector<double> b2(256, 0.0), b1(256, 0.0);
    for (int j = 0; j < 128; ++j) b2[j] = uniform(rng, 0.1, 1.0);
    for (int j = 0; j < 256; ++j) b1[j] = uniform(rng, 0.0, 1.0);
    const BoundaryMeasure e2 = BoundaryMeasure::from_parts({{0.3, 1.0}, {2.0, 0.5}}, b2);
    const BoundaryMeasure e1 = BoundaryMeasure::from_parts({{0.3, 0.7}, {5.0, 0.2}}, b1);
    const LebesgueDecomposition mix = lebesgue_decompose(e1, e2, 8);
    CHECK(mix.reconstruction_defect < 1e-10);
    // Direct recombination oracle.
    double tv = 0.0;
    for (int j = 0; j < 256; ++j)
        tv += std::abs(mix.eta1_bins[j] - mix.density_ratio[j] * mix.eta2_bins[j] - mix.singular_bins[j]);
    CHECK(tv < 1e-10);
    CHECK(mix.singular_part.atom_total() == doctest::Approx(0.2));
    double upper = 0.0;
    for (int j = 128; j < 256; ++j) upper += b1[j];
    CHECK(mix.singular_part.total() == doctest::Approx(0.2 + upper).epsilon(1e-12));
    CHECK_THROWS_AS(lebesgue_decompose(e1, e2, 9), DomainError);
}

TEST_CASE("maximal function and Borel differentiation") {
    Rng rng(54);
    const BoundaryMeasure eta2 = random_atoms(rng, 2000) + random_density(rng, 10);
    const double R = 2.0;
    for (int i = 0; i < 20; ++i) {
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        CHECK(maximal_function(eta2, eta2, xi, R).value == doctest::Approx(1.0));
        CHECK(maximal_function(eta2.scaled(3.0), eta2, xi, R).value == doctest::Approx(3.0));
        std::vector<double> depths;
        for (double t = 0.25; t <= 10.0; t += 0.25) depths.push_back(t);
        const BoundaryMeasure eta1 = random_atoms(rng, 50) + random_density(rng, 10);
        const auto ratios = borel_differentiate(eta1, eta2, xi, R, depths);
        const MaximalProfile p = maximal_function(eta1, eta2, xi, R);
        for (double r : ratios) CHECK(r <= p.value + 1e-12);
        for (double r : borel_differentiate(eta2, eta2, xi, R, depths)) CHECK(r == doctest::Approx(1.0));
    }
    // Halving the depth step can only raise the sampled supremum.
    const BoundaryMeasure eta1 = random_atoms(rng, 50) + random_density(rng, 10);
    for (int i = 0; i < 20; ++i) {
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        CHECK(maximal_function(eta1, eta2, xi, R, 10.0, 0.125).value >=
              maximal_function(eta1, eta2, xi, R, 10.0, 0.25).value);
    }
}

TEST_CASE("Borel differentiation of a binned density") {
    const auto f = [](double t) { return 1.0 + std::cos(t); };
    const std::vector<double> uniform_bins(1024, kTwoPi / 1024);
    const BoundaryMeasure eta2 = BoundaryMeasure::from_bins(uniform_bins);
    const BoundaryMeasure eta1 = BoundaryMeasure::from_bins(binned(f, 10));
    const auto r = borel_differentiate(eta1, eta2, BoundaryPoint(kPi / 3), 1.0, {2.0, 4.0, 6.0, 8.0, 9.0});
    CHECK(std::abs(r[2] - 1.5) < std::abs(r[0] - 1.5));
    // Oracle: direct arc-mass quotient at the finest bin containing pi/3.
    const int j = static_cast<int>(std::floor(kPi / 3 / (kTwoPi / 1024)));
    CHECK(r.back() == doctest::Approx(eta1.bins()[j] / eta2.bins()[j]).epsilon(5e-3));
    CHECK(r.back() == doctest::Approx(1.5).epsilon(5e-3));

    // Mutually singular: ratios blow up at an eta1 atom.
    const BoundaryMeasure atom = BoundaryMeasure::from_atoms({{1.0, 1.0}});
    const auto s = borel_differentiate(atom, eta2, BoundaryPoint(1.0), 1.0, {2.0, 4.0, 6.0, 8.0});
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > 5.0 * s[i - 1]);
}

TEST_CASE("shadow and visual-ball differentiation agree up to the sandwich constant") {
    Rng rng(55);
    const BoundaryMeasure eta2 = random_density(rng, 10);
    const BoundaryMeasure eta1 = BoundaryMeasure::from_bins(binned([](double t) { return 2.0 + std::sin(3 * t); }, 10)) ;
    const double R = 1.0;
    for (int i = 0; i < 20; ++i) {
        const BoundaryPoint xi(uniform(rng, 0.0, kTwoPi));
        for (double t : {3.0, 5.0}) {
            const Arc s = ray_shadow(xi, t, R);
            const Arc v = visual_ball(xi, std::exp(-t + R));
            const double rs = arc_ratio(eta1, eta2, s), rv = arc_ratio(eta1, eta2, v);
            // Arcs within a factor e^{2R} of each other in length; ratios within the density oscillation.
            CHECK(v.halfwidth / s.halfwidth < std::exp(2 * R));
            CHECK(s.halfwidth / v.halfwidth < std::exp(2 * R));
            CHECK(rs / rv < 10.0);
            CHECK(rv / rs < 10.0);
        }
    }
}
