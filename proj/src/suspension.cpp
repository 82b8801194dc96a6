#include "gibbslab/suspension.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gibbslab/errors.hpp"
#include "gibbslab/numeric.hpp"
#include "gibbslab/parallel.hpp"
#include "gibbslab/thermo.hpp"

namespace gibbslab {

namespace {

double frob(const Mat2c& m) {
    return std::sqrt(std::norm(m.a) + std::norm(m.b) + std::norm(m.c) + std::norm(m.d));
}

Mat2c unimodular(Mat2c m) {
    const cplx det = m.det();
    if (std::abs(det) < 1e-300) throw NumericError("singular matrix");
    const cplx s = 1.0 / std::sqrt(det);
    return {m.a * s, m.b * s, m.c * s, m.d * s};
}

// Eigenvector of m for eigenvalue lam, from whichever row gives the better-conditioned vector.
std::array<cplx, 2> eigenvector(const Mat2c& m, cplx lam) {
    const std::array<cplx, 2> v1{m.b, lam - m.a};
    const std::array<cplx, 2> v2{lam - m.d, m.c};
    const double n1 = std::norm(v1[0]) + std::norm(v1[1]);
    const double n2 = std::norm(v2[0]) + std::norm(v2[1]);
    if (std::max(n1, n2) < 1e-24) throw NumericError("degenerate eigenvector");
    return n1 >= n2 ? v1 : v2;
}

// Some X with X m X^{-1} = n, given equal traces and det 1, both loxodromic.
Mat2c conjugator(const Mat2c& m, const Mat2c& n) {
    const cplx tr = m.trace();
    const cplx disc = std::sqrt(tr * tr - 4.0);
    if (std::abs(disc) < 1e-8) throw NumericError("parabolic or central matrix");
    const cplx l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
    const auto p1 = eigenvector(m, l1), p2 = eigenvector(m, l2);
    const auto q1 = eigenvector(n, l1), q2 = eigenvector(n, l2);
    const Mat2c P{p1[0], p2[0], p1[1], p2[1]};
    const Mat2c Q{q1[0], q2[0], q1[1], q2[1]};
    const cplx dp = P.det();
    const Mat2c Pinv{P.d / dp, -P.b / dp, -P.c / dp, P.a / dp};
    return unimodular(Q * Pinv);
}

Mat2c random_su2(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    double q[4], s = 0.0;
    for (double& v : q) s += (v = n(rng)) * v;
    s = std::sqrt(s);
    const cplx al{q[0] / s, q[1] / s}, be{q[2] / s, q[3] / s};
    return {al, -std::conj(be), be, std::conj(al)};
}

// U diag(e^s, e^-s) V with Haar U, V: singular values e^{+-s}.
Mat2c random_sl2(Rng& rng, double s) {
    return random_su2(rng) * Mat2c{std::exp(s), 0.0, 0.0, std::exp(-s)} * random_su2(rng);
}

bool commute(const Mat2c& x, const Mat2c& y, double tol) {
    const Mat2c a = x * y, b = y * x;
    return frob({a.a - b.a, a.b - b.b, a.c - b.c, a.d - b.d}) <= tol * (1.0 + frob(a));
}

// Fixed points of a non-central matrix as homogeneous vectors.
std::vector<std::array<cplx, 2>> fixed_points(const Mat2c& m) {
    const cplx tr = m.trace();
    const cplx disc = std::sqrt(tr * tr - 4.0 * m.det());
    std::vector<std::array<cplx, 2>> out;
    for (const cplx lam : {0.5 * (tr + disc), 0.5 * (tr - disc)}) {
        try {
            out.push_back(eigenvector(m, lam));
        } catch (const NumericError&) {
        }
    }
    return out;
}

bool fixes(const Mat2c& m, const std::array<cplx, 2>& v, double tol) {
    const cplx u = m.a * v[0] + m.b * v[1], w = m.c * v[0] + m.d * v[1];
    // Parallel to v up to scale.
    return std::abs(u * v[1] - w * v[0]) <= tol * std::sqrt((std::norm(u) + std::norm(w)) * (std::norm(v[0]) + std::norm(v[1])));
}

}  // namespace

double distance_to_pm_identity(const Mat2c& m) {
    const double plus = frob({m.a - 1.0, m.b, m.c, m.d - 1.0});
    const double minus = frob({m.a + 1.0, m.b, m.c, m.d + 1.0});
    return std::min(plus, minus);
}

SpherePoint SpherePoint::from_complex(cplx w) { return from_homogeneous(w, 1.0); }

SpherePoint SpherePoint::from_angles(double polar, double azimuth) {
    return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

std::array<cplx, 2> SpherePoint::homogeneous() const {
    // w = (x + iy) / (1 - z) = (1 + z) / (x - iy); take the form with the larger denominator.
    if (z <= 0.0) return {cplx{x, y}, 1.0 - z};
    return {1.0 + z, cplx{x, -y}};
}

SpherePoint SpherePoint::from_homogeneous(cplx u, cplx v) {
    const double s = std::max(std::abs(u), std::abs(v));
    if (s == 0.0) throw DomainError("zero homogeneous vector");
    u /= s;
    v /= s;
    const double nu = std::norm(u), nv = std::norm(v), n = nu + nv;
    const cplx uv = u * std::conj(v);
    return {2.0 * uv.real() / n, 2.0 * uv.imag() / n, (nu - nv) / n};
}

double chordal_distance(const SpherePoint& p, const SpherePoint& q) {
    return std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z));
}

SpherePoint mobius_apply(const Mat2c& m, const SpherePoint& x) {
    const auto h = x.homogeneous();
    return SpherePoint::from_homogeneous(m.a * h[0] + m.b * h[1], m.c * h[0] + m.d * h[1]);
}

Representation make_representation(const GroupPresentation& g, const std::vector<Mat2c>& base_images) {
    const std::size_t n = g.generators.size();
    Representation rho;
    rho.images.assign(n, Mat2c::identity());
    std::vector<bool> set(n, false);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n && k < base_images.size(); ++i) {
        if (set[i]) continue;
        rho.images[i] = base_images[k++];
        rho.images[g.inverse_of[i]] = rho.images[i].inverse();
        set[i] = set[g.inverse_of[i]] = true;
    }
    if (k != base_images.size() || std::find(set.begin(), set.end(), false) != set.end())
        throw DomainError("representation needs one image per base generator");
    return rho;
}

Representation trivial_representation(const GroupPresentation& g) {
    return Representation{std::vector<Mat2c>(g.generators.size(), Mat2c::identity())};
}

Representation rotation_representation(const GroupPresentation& g, const std::vector<double>& angles) {
    std::vector<Mat2c> base;
    for (double t : angles) base.push_back({std::polar(1.0, 0.5 * t), 0.0, 0.0, std::polar(1.0, -0.5 * t)});
    return make_representation(g, base);
}

Representation random_genus2_representation(const GroupPresentation& g, std::uint64_t seed, double stretch) {
    if (g.generators.size() != 8 || g.relator != std::vector<int>{0, 1, 4, 5, 2, 3, 6, 7})
        throw DomainError("random_genus2_representation needs the genus-2 presentation");
    Rng rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        const Mat2c A1 = random_sl2(rng, stretch), B1 = random_sl2(rng, stretch);
        // [A2, B2] must equal C = [A1, B1]^{-1}. With A2 = Y^{-1} and B2 Y B2^{-1} = Y C,
        // [A2, B2] = Y^{-1} (Y C) = C, which needs tr Y = tr(Y C).
        const Mat2c C = (A1 * B1 * A1.inverse() * B1.inverse()).inverse();
        Mat2c Y = random_sl2(rng, stretch);
        // Project Y onto the hyperplane tr(Y (I - C)) = 0 in C^4.
        const Mat2c D{1.0 - C.a, -C.b, -C.c, 1.0 - C.d};
        // tr(Y D) = <Y, conj(D^T)> in the Frobenius pairing.
        const std::array<cplx, 4> n{D.a, D.c, D.b, D.d};  // coefficients of Y.a, Y.b, Y.c, Y.d
        const cplx val = Y.a * n[0] + Y.b * n[1] + Y.c * n[2] + Y.d * n[3];
        const double nn = std::norm(n[0]) + std::norm(n[1]) + std::norm(n[2]) + std::norm(n[3]);
        if (nn < 1e-12) continue;
        const cplx f = val / nn;
        Y = {Y.a - f * std::conj(n[0]), Y.b - f * std::conj(n[1]), Y.c - f * std::conj(n[2]),
             Y.d - f * std::conj(n[3])};
        try {
            Y = unimodular(Y);
            const Mat2c B2 = conjugator(Y, Y * C);
            const Representation rho = make_representation(g, {A1, B1, Y.inverse(), B2});
            if (homomorphism_defect(g, rho) < 1e-8) return rho;
        } catch (const NumericError&) {
        }
    }
    throw NumericError("no representation found");
}

Mat2c rep_image(const Representation& rho, const std::vector<int>& word) {
    Mat2c m = Mat2c::identity();
    for (int k : word) {
        if (k < 0 || k >= static_cast<int>(rho.images.size())) throw DomainError("word letter out of range");
        m = m * rho.images[k];
    }
    return m;
}

double determinant_defect(const Representation& rho) {
    double worst = 0.0;
    for (const Mat2c& m : rho.images) worst = std::max(worst, std::abs(m.det() - 1.0));
    return worst;
}

double homomorphism_defect(const GroupPresentation& g, const Representation& rho) {
    if (rho.images.size() != g.generators.size()) throw DomainError("representation size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < rho.images.size(); ++i)
        worst = std::max(worst, distance_to_pm_identity(rho.images[i] * rho.images[g.inverse_of[i]]));
    if (!g.relator.empty()) worst = std::max(worst, distance_to_pm_identity(rep_image(rho, g.relator)));
    return worst;
}

void validate(const GroupPresentation& g, const Representation& rho) {
    if (determinant_defect(rho) > 1e-10) throw DomainError("representation matrix with det != 1");
    if (homomorphism_defect(g, rho) > 1e-6) throw DomainError("representation fails the relator");
}

bool looks_elementary(const GroupPresentation& g, const Representation& rho) {
    std::vector<Mat2c> base;
    std::vector<bool> seen(g.generators.size(), false);
    for (std::size_t i = 0; i < g.generators.size(); ++i) {
        if (seen[i]) continue;
        seen[i] = seen[g.inverse_of[i]] = true;
        if (distance_to_pm_identity(rho.images[i]) > 1e-9) base.push_back(rho.images[i]);
    }
    if (base.size() < 2) return true;
    bool all_commute = true;
    for (std::size_t i = 0; i < base.size() && all_commute; ++i)
        for (std::size_t j = i + 1; j < base.size() && all_commute; ++j) all_commute = commute(base[i], base[j], 1e-9);
    if (all_commute) return true;
    for (const auto& v : fixed_points(base[0])) {
        bool shared = true;
        for (std::size_t j = 1; j < base.size() && shared; ++j) shared = fixes(base[j], v, 1e-9);
        if (shared) return true;
    }
    return false;
}

SphereMeasure::SphereMeasure(std::vector<SphereAtom> atoms) : atoms_(std::move(atoms)) {
    for (const auto& a : atoms_)
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) throw DomainError("sphere atom weight must be finite and >= 0");
}

double SphereMeasure::total() const {
    NeumaierSum s;
    for (const auto& a : atoms_) s.add(a.weight);
    return s.value();
}

std::vector<double> SphereMeasure::histogram(int nside) const {
    std::vector<NeumaierSum> acc(12 * static_cast<std::size_t>(nside) * nside);
    for (const auto& a : atoms_) acc[healpix_ring_index(nside, a.point)].add(a.weight);
    std::vector<double> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].value();
    return out;
}

SphereMeasure SphereMeasure::pushforward(const Mat2c& m) const {
    std::vector<SphereAtom> out = atoms_;
    for (auto& a : out) a.point = mobius_apply(m, a.point);
    return SphereMeasure(std::move(out));
}

int healpix_ring_index(int nside, const SpherePoint& p) {
    if (nside < 1) throw DomainError("nside must be positive");
    const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    const double z = std::clamp(p.z / r, -1.0, 1.0), za = std::abs(z);
    double phi = std::atan2(p.y, p.x);
    if (phi < 0.0) phi += kTwoPi;
    const double tt = std::fmod(phi * 2.0 / kPi, 4.0);  // in [0, 4)
    const long ns = nside;
    const long npix = 12 * ns * ns, ncap = 2 * ns * (ns - 1);
    auto mod = [](long a, long m) { return ((a % m) + m) % m; };
    if (za <= 2.0 / 3.0) {
        const double t1 = ns * (0.5 + tt), t2 = ns * z * 0.75;
        const long jp = static_cast<long>(t1 - t2), jm = static_cast<long>(t1 + t2);
        const long ir = ns + 1 + jp - jm;
        const long kshift = 1 - (ir & 1);
        const long ip = mod((jp + jm - ns + kshift + 1) / 2, 4 * ns);
        return static_cast<int>(ncap + (ir - 1) * 4 * ns + ip);
    }
    const double tp = tt - std::floor(tt);
    const double tmp = ns * std::sqrt(3.0 * (1.0 - za));
    const long jp = static_cast<long>(tp * tmp), jm = static_cast<long>((1.0 - tp) * tmp);
    const long ir = jp + jm + 1;
    const long ip = mod(static_cast<long>(tt * ir), 4 * ir);
    if (z > 0.0) return static_cast<int>(2 * ir * (ir - 1) + ip);
    return static_cast<int>(npix - 2 * ir * (ir + 1) + ip);
}

int healpix_nside(int bins) {
    const int n = static_cast<int>(std::lround(std::sqrt(bins / 12.0)));
    if (n < 1 || 12 * n * n != bins) throw DomainError("bin count must be 12 nside^2");
    return n;
}

double histogram_l1(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DomainError("histogram size mismatch");
    NeumaierSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(std::abs(a[i] - b[i]));
    return s.value();
}

ThetaWeights parse_theta_weights(const std::string& s) {
    if (s == "exp" || s == "exponential") return ThetaWeights::exponential;
    if (s == "raw-integral") return ThetaWeights::raw_integral;
    throw DomainError("unknown theta weights: " + s);
}

std::string to_string(ThetaWeights w) { return w == ThetaWeights::exponential ? "exp" : "raw-integral"; }

SuspensionData suspension_data(const Representation& rho, const Potential& F, const GroupBall& ball, double step) {
    if (ball.elements.empty()) throw DomainError("empty ball");
    SuspensionData d;
    d.ball = ball;
    d.integrals = orbit_integrals(F, ball, step);
    d.inverse_images.resize(ball.elements.size());
    parallel_for(ball.elements.size(), [&](std::size_t i) {
        d.inverse_images[i] = rep_image(rho, ball.elements[i].word).inverse();
    });
    return d;
}

SphereMeasure theta_measure(const SuspensionData& data, double R, const SpherePoint& x, ThetaWeights mode,
                            const Mat2c& base) {
    const auto& el = data.ball.elements;
    std::size_t n = 0;
    while (n < el.size() && el[n].displacement <= R) ++n;
    if (n == 0) throw DomainError("no ball element within R");
    std::vector<double> logw(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (mode == ThetaWeights::exponential) {
            logw[i] = data.integrals[i];
        } else {
            if (data.integrals[i] < 0.0) throw DomainError("raw-integral weights need a nonnegative integral");
            logw[i] = data.integrals[i] > 0.0 ? std::log(data.integrals[i]) : -std::numeric_limits<double>::infinity();
        }
    }
    LogSumExp lse;
    for (double v : logw) lse.add(v);
    const double logZ = lse.value();
    if (!std::isfinite(logZ)) throw NumericError("theta weights sum to zero");
    const Mat2c base_inv = base.inverse();
    std::vector<SphereAtom> atoms(n);
    parallel_for(n, [&](std::size_t i) {
        // rho(gamma g gamma^{-1})^{-1} = rho(gamma) rho(g)^{-1} rho(gamma)^{-1}
        atoms[i] = {mobius_apply(base * data.inverse_images[i] * base_inv, x), std::exp(logw[i] - logZ)};
    });
    return SphereMeasure(std::move(atoms));
}

SphereMeasure theta_measure(const Representation& rho, const Potential& F, const GroupBall& ball,
                            const SpherePoint& x, ThetaWeights mode) {
    return theta_measure(suspension_data(rho, F, ball), ball.radius, x, mode);
}

EquidistributionReport equidistribution_report(const SuspensionData& data,
                                               const std::vector<double>& radii,
                                               const std::vector<SpherePoint>& x_list, int bins, ThetaWeights mode) {
    if (radii.size() < 2) throw DomainError("equidistribution needs at least two radii");
    if (x_list.size() < 2) throw DomainError("equidistribution needs at least two starting points");
    const int nside = healpix_nside(bins);
    EquidistributionReport r;
    r.radii = radii;
    std::vector<std::vector<double>> hist;
    for (double R : radii) hist.push_back(theta_measure(data, R, x_list[0], mode).histogram(nside));
    for (std::size_t i = 0; i + 1 < hist.size(); ++i) r.radius_gaps.push_back(histogram_l1(hist[i], hist[i + 1]));
    for (std::size_t j = 1; j < x_list.size(); ++j) {
        const auto h = theta_measure(data, radii.back(), x_list[j], mode).histogram(nside);
        r.basepoint_gaps.push_back(histogram_l1(hist.back(), h));
        r.max_basepoint_gap = std::max(r.max_basepoint_gap, r.basepoint_gaps.back());
    }
    r.gaps_decreasing = true;
    for (std::size_t i = 0; i + 1 < r.radius_gaps.size(); ++i)
        if (!(r.radius_gaps[i + 1] < r.radius_gaps[i])) r.gaps_decreasing = false;
    r.basepoint_insensitive = r.max_basepoint_gap < r.radius_gaps.back();
    r.contracting = r.gaps_decreasing && r.basepoint_insensitive;
    return r;
}

double equivariance_check(const GroupPresentation& g, const Representation& rho, const SuspensionData& data,
                          double R, const SpherePoint& x, int gamma_index, int bins,
                          ThetaWeights mode) {
    if (gamma_index < -1 || gamma_index >= static_cast<int>(g.generators.size()))
        throw DomainError("generator index out of range");
    // -1 stands for the identity.
    const Mat2c gamma = gamma_index < 0 ? Mat2c::identity() : rho.images[gamma_index];
    const int nside = healpix_nside(bins);
    const auto pushed = theta_measure(data, R, x, mode).pushforward(gamma).histogram(nside);
    const auto rebuilt = theta_measure(data, R, x, mode, gamma).histogram(nside);
    return histogram_l1(pushed, rebuilt);
}

}  // namespace gibbslab
