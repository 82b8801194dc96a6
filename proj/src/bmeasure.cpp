#include "gibbslab/bmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbslab/errors.hpp"
#include "gibbslab/numeric.hpp"
#include "gibbslab/parallel.hpp"

namespace gibbslab {

namespace {

int log2_exact(std::size_t n) {
    int k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    if ((std::size_t{1} << k) != n) throw DomainError("BoundaryMeasure: bin count must be a power of two");
    return k;
}

}  // namespace

BoundaryMeasure BoundaryMeasure::from_atoms(std::vector<Atom> atoms) {
    return from_parts(std::move(atoms), {});
}

BoundaryMeasure BoundaryMeasure::from_bins(std::vector<double> bins) { return from_parts({}, std::move(bins)); }

BoundaryMeasure BoundaryMeasure::from_parts(std::vector<Atom> atoms, std::vector<double> bins) {
    BoundaryMeasure m;
    for (Atom& a : atoms) {
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight))
            throw DomainError("BoundaryMeasure: atom weights must be finite and nonnegative");
        a.theta = canonical_angle(a.theta);
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.theta < b.theta; });
    for (const Atom& a : atoms) {
        if (a.weight == 0.0) continue;
        if (!m.atoms_.empty() && a.theta - m.atoms_.back().theta <= kAtomMatchTol)
            m.atoms_.back().weight += a.weight;
        else
            m.atoms_.push_back(a);
    }
    // Wrap-around merge across angle 0.
    if (m.atoms_.size() > 1 && m.atoms_.front().theta + kTwoPi - m.atoms_.back().theta <= kAtomMatchTol) {
        m.atoms_.front().weight += m.atoms_.back().weight;
        m.atoms_.pop_back();
    }
    if (!bins.empty()) {
        m.depth_ = log2_exact(bins.size());
        for (double b : bins)
            if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("BoundaryMeasure: bin masses must be >= 0");
        m.bins_ = std::move(bins);
    }
    m.finish();
    return m;
}

void BoundaryMeasure::finish() {
    atom_prefix_.assign(atoms_.size() + 1, 0.0);
    NeumaierSum s;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        s.add(atoms_[i].weight);
        atom_prefix_[i + 1] = s.value();
    }
    atom_total_ = s.value();
    bin_prefix_.assign(bins_.size() + 1, 0.0);
    NeumaierSum b;
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        b.add(bins_[i]);
        bin_prefix_[i + 1] = b.value();
    }
    total_ = atom_total_ + b.value();
}

double BoundaryMeasure::atoms_between(double lo, double hi) const {
    auto cmp = [](const Atom& a, double t) { return a.theta < t; };
    const auto i = std::lower_bound(atoms_.begin(), atoms_.end(), lo, cmp) - atoms_.begin();
    const auto j = std::lower_bound(atoms_.begin(), atoms_.end(), hi, cmp) - atoms_.begin();
    return atom_prefix_[j] - atom_prefix_[i];
}

std::size_t BoundaryMeasure::count_between(double lo, double hi) const {
    auto cmp = [](const Atom& a, double t) { return a.theta < t; };
    const auto i = std::lower_bound(atoms_.begin(), atoms_.end(), lo, cmp);
    const auto j = std::lower_bound(atoms_.begin(), atoms_.end(), hi, cmp);
    return static_cast<std::size_t>(j - i);
}

double BoundaryMeasure::bins_between(double lo, double hi) const {
    if (bins_.empty() || !(hi > lo)) return 0.0;
    const double n = static_cast<double>(bins_.size());
    const double w = kTwoPi / n;
    // Cumulative mass up to angle t, linear inside bins.
    auto cum = [&](double t) {
        const double x = std::clamp(t / w, 0.0, n);
        const auto i = std::min(static_cast<std::size_t>(x), bins_.size() - 1);
        return bin_prefix_[i] + bins_[i] * (x - static_cast<double>(i));
    };
    return cum(hi) - cum(lo);
}

double BoundaryMeasure::mass_between(double lo, double hi) const {
    return atoms_between(lo, hi) + bins_between(lo, hi);
}

double BoundaryMeasure::mass(const Arc& a) const {
    if (a.full()) return total_;
    if (!(a.halfwidth > 0.0)) return 0.0;
    // Open arc: atoms strictly inside. lower_bound on lo admits an atom exactly at lo, so nudge it.
    const double lo = canonical_angle(a.center.theta - a.halfwidth);
    const double hi = lo + 2.0 * a.halfwidth;
    const double lo_open = std::nextafter(lo, kTwoPi + 1.0);
    if (hi <= kTwoPi) return atoms_between(lo_open, hi) + bins_between(lo, hi);
    return atoms_between(lo_open, kTwoPi) + atoms_between(0.0, hi - kTwoPi) + bins_between(lo, kTwoPi) +
           bins_between(0.0, hi - kTwoPi);
}

std::size_t BoundaryMeasure::atoms_in(const Arc& a) const {
    if (a.full()) return atoms_.size();
    const double lo = canonical_angle(a.center.theta - a.halfwidth);
    const double hi = lo + 2.0 * a.halfwidth;
    const double lo_open = std::nextafter(lo, kTwoPi + 1.0);
    if (hi <= kTwoPi) return count_between(lo_open, hi);
    return count_between(lo_open, kTwoPi) + count_between(0.0, hi - kTwoPi);
}

std::vector<double> BoundaryMeasure::arc_masses(int n) const {
    if (n < 1) throw DomainError("arc_masses: n must be positive");
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) out[j] = mass_between(kTwoPi * j / n, kTwoPi * (j + 1) / n);
    return out;
}

BoundaryMeasure BoundaryMeasure::scaled(double c) const {
    if (!(c >= 0.0)) throw DomainError("BoundaryMeasure::scaled: factor must be >= 0");
    std::vector<Atom> a = atoms_;
    for (Atom& x : a) x.weight *= c;
    std::vector<double> b = bins_;
    for (double& x : b) x *= c;
    return from_parts(std::move(a), std::move(b));
}

BoundaryMeasure BoundaryMeasure::reweighted(const std::function<double(double)>& w) const {
    std::vector<Atom> a = atoms_;
    for (Atom& x : a) x.weight *= w(x.theta);
    std::vector<double> b = bins_;
    const double bw = bins_.empty() ? 0.0 : kTwoPi / static_cast<double>(bins_.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] *= w((static_cast<double>(i) + 0.5) * bw);
    return from_parts(std::move(a), std::move(b));
}

BoundaryMeasure BoundaryMeasure::pushforward(const Isometry& g) const {
    std::vector<Atom> a = atoms_;
    for (Atom& x : a) x.theta = apply(g, BoundaryPoint(x.theta)).theta;
    std::vector<double> b;
    if (!bins_.empty()) {
        // (g_* m)(B_j) = m(g^{-1} B_j); g^{-1} preserves orientation so arcs map to arcs.
        const Isometry gi = g.inverse();
        const std::size_t n = bins_.size();
        b.resize(n);
        BoundaryMeasure dens = from_bins(bins_);
        for (std::size_t j = 0; j < n; ++j) {
            const double lo = apply(gi, BoundaryPoint(kTwoPi * j / n)).theta;
            double hi = apply(gi, BoundaryPoint(kTwoPi * (j + 1) / n)).theta;
            if (hi <= lo) hi += kTwoPi;
            b[j] = hi <= kTwoPi ? dens.bins_between(lo, hi)
                                : dens.bins_between(lo, kTwoPi) + dens.bins_between(0.0, hi - kTwoPi);
        }
    }
    return from_parts(std::move(a), std::move(b));
}

BoundaryMeasure operator+(const BoundaryMeasure& a, const BoundaryMeasure& b) {
    std::vector<Atom> atoms = a.atoms();
    atoms.insert(atoms.end(), b.atoms().begin(), b.atoms().end());
    std::vector<double> bins;
    if (a.depth() >= 0 && b.depth() >= 0 && a.depth() != b.depth())
        throw DomainError("BoundaryMeasure: cannot add densities of different depth");
    if (a.depth() >= 0) bins = a.bins();
    if (b.depth() >= 0) {
        if (bins.empty()) bins.assign(b.bins().size(), 0.0);
        for (std::size_t i = 0; i < bins.size(); ++i) bins[i] += b.bins()[i];
    }
    return BoundaryMeasure::from_parts(std::move(atoms), std::move(bins));
}

LebesgueDecomposition lebesgue_decompose(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2, int depth) {
    if (depth < 0 || depth > 24) throw DomainError("lebesgue_decompose: depth out of range");
    if ((eta1.depth() >= 0 && depth > eta1.depth()) || (eta2.depth() >= 0 && depth > eta2.depth()))
        throw DomainError("lebesgue_decompose: depth exceeds the measures' resolution");
    const std::size_t n = std::size_t{1} << depth;
    LebesgueDecomposition out;
    out.depth = depth;

    // Atoms of eta1 with no eta2 atom at the same point are singular.
    std::vector<Atom> singular_atoms, regular_atoms;
    const auto& a2 = eta2.atoms();
    for (const Atom& a : eta1.atoms()) {
        auto it = std::lower_bound(a2.begin(), a2.end(), a.theta - kAtomMatchTol,
                                   [](const Atom& x, double t) { return x.theta < t; });
        bool matched = it != a2.end() && it->theta <= a.theta + kAtomMatchTol;
        if (!matched && !a2.empty())
            matched = std::abs(angle_diff(a2.front().theta, a.theta)) <= kAtomMatchTol ||
                      std::abs(angle_diff(a2.back().theta, a.theta)) <= kAtomMatchTol;
        (matched ? regular_atoms : singular_atoms).push_back(a);
    }
    const BoundaryMeasure regular = BoundaryMeasure::from_parts(regular_atoms, eta1.bins());
    const BoundaryMeasure sing_atoms = BoundaryMeasure::from_atoms(singular_atoms);

    out.eta1_bins = eta1.arc_masses(static_cast<int>(n));
    out.eta2_bins = eta2.arc_masses(static_cast<int>(n));
    const std::vector<double> reg = regular.arc_masses(static_cast<int>(n));
    const std::vector<double> sat = sing_atoms.arc_masses(static_cast<int>(n));
    out.density_ratio.assign(n, 0.0);
    out.singular_bins.assign(n, 0.0);
    std::vector<double> singular_density(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (out.eta2_bins[j] > 0.0) {
            out.density_ratio[j] = reg[j] / out.eta2_bins[j];
        } else {
            singular_density[j] = reg[j];
        }
        out.singular_bins[j] = sat[j] + singular_density[j];
        out.reconstruction_defect +=
            std::abs(out.eta1_bins[j] - (out.density_ratio[j] * out.eta2_bins[j] + out.singular_bins[j]));
    }
    bool any_density = false;
    for (double v : singular_density) any_density = any_density || v > 0.0;
    out.singular_part = any_density ? BoundaryMeasure::from_parts(singular_atoms, singular_density) : sing_atoms;
    return out;
}

Arc ray_shadow(BoundaryPoint xi, double t, double R) {
    if (!(R > 0.0)) throw DomainError("ray_shadow: R must be positive");
    if (t <= R) return Arc{xi, kPi};
    return Arc{xi, std::asin(std::min(1.0, std::sinh(R) / std::sinh(t)))};
}

double arc_ratio(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2, const Arc& a) {
    const double m2 = eta2.mass(a);
    if (!(m2 > 0.0)) return std::numeric_limits<double>::infinity();
    return eta1.mass(a) / m2;
}

MaximalProfile maximal_function(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2, BoundaryPoint xi,
                                double R, double depth_max, double step) {
    if (!(step > 0.0) || !(depth_max >= step)) throw DomainError("maximal_function: bad depth grid");
    MaximalProfile p;
    p.xi = xi;
    const int n = static_cast<int>(std::floor(depth_max / step + 1e-9));
    for (int i = 1; i <= n; ++i) {
        const double t = i * step;
        const double r = arc_ratio(eta1, eta2, ray_shadow(xi, t, R));
        if (std::isinf(r)) ++p.infinite_depths;
        if (r > p.value) {
            p.value = r;
            p.argmax_depth = t;
        }
    }
    return p;
}

std::vector<double> borel_differentiate(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2,
                                        BoundaryPoint xi, double R, const std::vector<double>& depths) {
    std::vector<double> out;
    out.reserve(depths.size());
    for (double t : depths) out.push_back(arc_ratio(eta1, eta2, ray_shadow(xi, t, R)));
    return out;
}

WeakL1Sweep weak_l1_sweep(const BoundaryMeasure& eta1, const BoundaryMeasure& eta2, double R,
                          const std::vector<double>& alphas, double depth_max, double step) {
    if (eta1.total() <= 0.0) throw DomainError("eta1 must have positive mass");
    std::vector<double> theta, weight;
    for (const Atom& a : eta2.atoms()) {
        theta.push_back(a.theta);
        weight.push_back(a.weight);
    }
    const auto& bins = eta2.bins();
    for (std::size_t j = 0; j < bins.size(); ++j) {
        if (bins[j] <= 0.0) continue;
        theta.push_back((j + 0.5) * kTwoPi / bins.size());
        weight.push_back(bins[j]);
    }
    std::vector<double> M(theta.size());
    parallel_for(theta.size(), [&](std::size_t i) {
        M[i] = maximal_function(eta1, eta2, BoundaryPoint(theta[i]), R, depth_max, step).value;
    });
    WeakL1Sweep out;
    out.alphas = alphas;
    for (double alpha : alphas) {
        NeumaierSum s;
        for (std::size_t i = 0; i < M.size(); ++i)
            if (M[i] > alpha) s.add(weight[i]);
        out.level_mass.push_back(s.value());
        out.A.push_back(alpha * s.value() / eta1.total());
        out.A_max = std::max(out.A_max, out.A.back());
    }
    return out;
}

}  // namespace gibbslab
