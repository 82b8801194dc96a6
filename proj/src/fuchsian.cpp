#include "gibbslab/fuchsian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>

#include "gibbslab/errors.hpp"

namespace gibbslab {

namespace {

// 2 asinh|b| is the displacement of o for det-1 disk matrices (cosh d = |a|^2 + |b|^2).
double displacement_of(const Isometry& m) {
    const double bb = std::abs(m.b), cc = std::abs(m.c);
    return 2.0 * std::asinh(0.5 * (bb + cc));
}

class SpatialIndex {
public:
    explicit SpatialIndex(double cell) : cell_(cell) {}

    int find(cplx p, double tol, const std::vector<cplx>& pts) const {
        const std::int64_t ix = cell_index(p.real()), iy = cell_index(p.imag());
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = head_.find(key(ix + dx, iy + dy));
                if (it == head_.end()) continue;
                for (int n = it->second; n >= 0; n = next_[n])
                    if (std::abs(pts[n] - p) <= tol) return n;
            }
        return -1;
    }

    void insert(cplx p, int id) {
        const std::uint64_t k = key(cell_index(p.real()), cell_index(p.imag()));
        if (static_cast<std::size_t>(id) >= next_.size()) next_.resize(id + 1, -1);
        auto [it, fresh] = head_.try_emplace(k, id);
        if (!fresh) {
            next_[id] = it->second;
            it->second = id;
        }
    }

private:
    std::int64_t cell_index(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }
    static std::uint64_t key(std::int64_t ix, std::int64_t iy) {
        return (static_cast<std::uint64_t>(ix + (1LL << 31)) << 32) ^
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy + (1LL << 31)));
    }

    double cell_;
    std::unordered_map<std::uint64_t, int> head_;
    std::vector<int> next_;
};

struct Node {
    Isometry m;
    double disp;
    int parent;
    int gen;
    int len;
};

}  // namespace

GroupPresentation make_presentation(std::string name, const std::vector<Isometry>& base,
                                    std::vector<std::string> base_labels) {
    if (base.empty()) throw DomainError("presentation needs at least one generator");
    GroupPresentation g;
    g.name = std::move(name);
    const int k = static_cast<int>(base.size());
    for (const Isometry& m : base) g.generators.push_back(Isometry::from_entries(m.a, m.b, m.c, m.d));
    for (const Isometry& m : base) g.generators.push_back(g.generators[&m - base.data()].inverse());
    g.inverse_of.resize(2 * k);
    for (int i = 0; i < k; ++i) {
        g.inverse_of[i] = i + k;
        g.inverse_of[i + k] = i;
    }
    if (base_labels.size() != base.size()) {
        base_labels.clear();
        for (int i = 0; i < k; ++i) base_labels.push_back("g" + std::to_string(i + 1));
    }
    g.labels = base_labels;
    for (const std::string& s : base_labels) {
        std::string inv = s;
        if (!inv.empty()) inv[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(inv[0])));
        g.labels.push_back(inv == s ? s + "^-1" : inv);
    }
    return g;
}

GroupPresentation builtin_genus2() {
    // Regular octagon with interior angles pi/4: cosh(circumradius) = cot^2(pi/8).
    const double t8 = std::tan(kPi / 8.0);
    const double Rc = std::acosh(1.0 / (t8 * t8));
    const double rE = std::tanh(0.5 * Rc);
    std::array<DiskPoint, 8> V;
    for (int k = 0; k < 8; ++k) V[k] = DiskPoint::from(std::polar(rE, (2 * k + 1) * kPi / 8.0));

    // Isometry carrying side j = [V_j, V_{j+1}] onto side i with reversed orientation.
    auto pairing = [&](int i, int j) {
        const Isometry A = Isometry::to_origin(V[j]);
        const Isometry B = Isometry::to_origin(V[(i + 1) % 8]);
        const cplx w1 = apply(A, V[(j + 1) % 8]).z();
        const cplx w2 = apply(B, V[i]).z();
        return B.inverse() * Isometry::rotation(std::arg(w2) - std::arg(w1)) * A;
    };
    const Isometry a1 = pairing(0, 2);
    const Isometry b1 = pairing(1, 3).inverse();
    const Isometry a2 = pairing(4, 6);
    const Isometry b2 = pairing(5, 7).inverse();
    GroupPresentation g = make_presentation("genus2", {a1, b1, a2, b2}, {"a1", "b1", "a2", "b2"});
    g.relator = {0, 1, 4, 5, 2, 3, 6, 7};
    g.covering_radius = Rc;
    return g;
}

GroupPresentation schottky_rank2(double ell) {
    const double c = std::cosh(0.5 * ell), s = std::sinh(0.5 * ell);
    const Isometry a{c, s, s, c};
    const Isometry r = Isometry::rotation(0.5 * kPi);
    const Isometry b = r * a * r.inverse();
    return make_presentation("schottky", {a, b}, {"a", "b"});
}

Isometry word_matrix(const GroupPresentation& g, const std::vector<int>& word) {
    Isometry m = Isometry::identity();
    for (int k : word) {
        if (k < 0 || k >= static_cast<int>(g.generators.size()))
            throw DomainError("word letter out of range");
        m = m * g.generators[k];
    }
    return m;
}

double max_generator_displacement(const GroupPresentation& g) {
    double m = 0.0;
    for (const Isometry& x : g.generators) m = std::max(m, displacement_of(x));
    return m;
}

double relator_defect(const GroupPresentation& g) {
    if (g.relator.empty()) return 0.0;
    return displacement_of(word_matrix(g, g.relator));
}

GroupBall enumerate_ball(const GroupPresentation& g, double R, double dedup_tol) {
    EnumerateOptions opt;
    opt.dedup_tol = dedup_tol;
    return enumerate_ball(g, R, opt);
}

GroupBall enumerate_ball(const GroupPresentation& g, double R, const EnumerateOptions& opt) {
    if (!(R >= 0.0)) throw DomainError("enumerate_ball: R must be >= 0");
    if (!(opt.dedup_tol > 0.0)) throw DomainError("enumerate_ball: dedup_tol must be positive");
    const double margin = opt.margin >= 0.0 ? opt.margin : 2.0 * max_generator_displacement(g);
    const double cut = R + margin;
    const int ngen = static_cast<int>(g.generators.size());

    std::vector<Node> nodes;
    std::vector<cplx> images;
    SpatialIndex index(opt.dedup_tol);
    nodes.push_back({Isometry::identity(), 0.0, -1, -1, 0});
    images.push_back(0.0);
    index.insert(0.0, 0);

    for (std::size_t head = 0; head < nodes.size(); ++head) {
        const Node cur = nodes[head];
        for (int k = 0; k < ngen; ++k) {
            if (cur.gen >= 0 && k == g.inverse_of[cur.gen]) continue;
            const Isometry m = cur.m * g.generators[k];
            const double disp = displacement_of(m);
            if (disp > cut) continue;
            const cplx img = m.b / m.d;
            if (index.find(img, opt.dedup_tol, images) >= 0) continue;
            if (nodes.size() >= opt.max_nodes)
                throw ResourceError("enumerate_ball: node cap " + std::to_string(opt.max_nodes) +
                                    " reached at word length " + std::to_string(cur.len + 1));
            const int id = static_cast<int>(nodes.size());
            nodes.push_back({m, disp, static_cast<int>(head), k, cur.len + 1});
            images.push_back(img);
            index.insert(img, id);
        }
    }

    GroupBall ball;
    ball.radius = R;
    ball.dedup_tolerance = opt.dedup_tol;
    ball.explored = nodes.size();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].disp > R) continue;
        OrbitElement e;
        e.matrix = nodes[i].m;
        e.image = DiskPoint::from(images[i]);
        e.displacement = nodes[i].disp;
        e.direction = BoundaryPoint(std::arg(images[i]));
        for (int n = static_cast<int>(i); nodes[n].parent >= 0; n = nodes[n].parent)
            e.word.push_back(nodes[n].gen);
        std::reverse(e.word.begin(), e.word.end());
        ball.elements.push_back(std::move(e));
    }
    std::sort(ball.elements.begin(), ball.elements.end(),
              [](const OrbitElement& a, const OrbitElement& b) {
                  if (a.displacement != b.displacement) return a.displacement < b.displacement;
                  if (a.word.size() != b.word.size()) return a.word.size() < b.word.size();
                  return a.word < b.word;
              });
    return ball;
}

std::vector<std::vector<int>> enumerate_words(const GroupPresentation& g, int max_len) {
    std::vector<std::vector<int>> out{{}};
    const int ngen = static_cast<int>(g.generators.size());
    std::size_t begin = 0;
    for (int len = 1; len <= max_len; ++len) {
        const std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i)
            for (int k = 0; k < ngen; ++k) {
                if (!out[i].empty() && k == g.inverse_of[out[i].back()]) continue;
                std::vector<int> w = out[i];
                w.push_back(k);
                out.push_back(std::move(w));
            }
        begin = end;
    }
    return out;
}

GrowthEstimate growth_fit(const GroupBall& ball) {
    if (ball.elements.size() < 1000)
        throw DiagnosticError("growth_rate: fewer than 1000 elements in the ball (" +
                              std::to_string(ball.elements.size()) + ")");
    std::vector<double> disp;
    disp.reserve(ball.elements.size());
    for (const auto& e : ball.elements) disp.push_back(e.displacement);
    const int n = 81;
    const double lo = 0.5 * ball.radius, hi = ball.radius;
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
        const double r = lo + (hi - lo) * i / (n - 1);
        const auto cnt = std::upper_bound(disp.begin(), disp.end(), r) - disp.begin();
        xs.push_back(r);
        ys.push_back(std::log(static_cast<double>(cnt)));
    }
    const LinearFit f = fit_line(xs, ys);
    return {f.slope, f.rms_residual, lo, hi, ball.elements.size()};
}

double growth_rate(const GroupPresentation& g, double R_max) {
    return growth_fit(enumerate_ball(g, R_max)).slope;
}

double closed_geodesic_length(const Isometry& m) {
    const double tr = std::abs(m.trace());
    if (!(tr > 2.0 + 1e-12))
        throw DomainError("closed_geodesic_length: element is not hyperbolic (|trace| = " +
                          std::to_string(tr) + ")");
    return 2.0 * std::acosh(0.5 * tr);
}

// ---- OrbitLocator ----

OrbitLocator::OrbitLocator(const GroupPresentation& g, double local_radius)
    : group_(g), local_radius_(local_radius) {
    for (const Isometry& m : g.generators) {
        gen_img_.push_back(to_hyperboloid(apply(m, DiskPoint{})));
        gen_inv_.push_back(lorentz_of(m.inverse()));
    }
    const GroupBall ball = enumerate_ball(g, local_radius);
    min_sep_ = std::numeric_limits<double>::infinity();
    for (const OrbitElement& e : ball.elements) {
        centers_.push_back(to_hyperboloid(e.image));
        center_inv_.push_back(lorentz_of(e.matrix.inverse()));
        if (e.displacement > 0.0) min_sep_ = std::min(min_sep_, e.displacement);
    }
}

bool OrbitLocator::improve(Vec3& X) const {
    double best = X.t;
    const Lorentz* move = nullptr;
    for (std::size_t k = 0; k < gen_img_.size(); ++k) {
        const double c = -mdot(X, gen_img_[k]);
        if (c < best * (1.0 - 1e-13)) {
            best = c;
            move = &gen_inv_[k];
        }
    }
    if (!move) {
        for (std::size_t j = 1; j < centers_.size(); ++j) {
            const double c = -mdot(X, centers_[j]);
            if (c < best * (1.0 - 1e-13)) {
                best = c;
                move = &center_inv_[j];
            }
        }
    }
    if (!move) return false;
    X = (*move)(X);
    return true;
}

int OrbitLocator::reduce(Vec3& X) const {
    int moves = 0;
    while (improve(X)) {
        if (++moves > 100000) throw NumericError("OrbitLocator: reduction did not terminate");
    }
    return moves;
}

int OrbitLocator::reduce(Frame& f) const {
    int moves = 0;
    for (;;) {
        double best = f.P.t;
        const Lorentz* move = nullptr;
        for (std::size_t k = 0; k < gen_img_.size(); ++k) {
            const double c = -mdot(f.P, gen_img_[k]);
            if (c < best * (1.0 - 1e-13)) {
                best = c;
                move = &gen_inv_[k];
            }
        }
        if (!move)
            for (std::size_t j = 1; j < centers_.size(); ++j) {
                const double c = -mdot(f.P, centers_[j]);
                if (c < best * (1.0 - 1e-13)) {
                    best = c;
                    move = &center_inv_[j];
                }
            }
        if (!move) break;
        f = transform(*move, f);
        if (++moves > 100000) throw NumericError("OrbitLocator: reduction did not terminate");
    }
    if (moves > 0) f = renormalize(f);
    return moves;
}

double OrbitLocator::distance_to_orbit(Vec3 X) const {
    reduce(X);
    return std::asinh(std::hypot(X.x, X.y));
}

double OrbitLocator::distance_to_orbit(DiskPoint p) const {
    require_in_disk(p);
    return distance_to_orbit(to_hyperboloid(p));
}

double estimate_covering_radius(const OrbitLocator& loc, int samples, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double r = uniform(rng, 0.0, 5.0);
        const DiskPoint p = DiskPoint::from(std::polar(std::tanh(0.5 * r), uniform(rng, 0.0, kTwoPi)));
        worst = std::max(worst, loc.distance_to_orbit(p));
    }
    return worst;
}

// ---- closed geodesics ----

namespace {

struct Exit {
    double s = std::numeric_limits<double>::infinity();
    int k = -1;
};

Exit next_exit(const OrbitLocator& loc, const Frame& f, int skip) {
    Exit best;
    const Vec3 O{1.0, 0.0, 0.0};
    const auto& imgs = loc.generator_images();
    for (std::size_t k = 0; k < imgs.size(); ++k) {
        if (static_cast<int>(k) == skip) continue;
        const Vec3 W = O - imgs[k];
        const double a = mdot(f.P, W), b = mdot(f.V, W);
        if (!(b < 0.0)) continue;
        const double r = -a / b;
        if (!(r < 1.0)) continue;
        const double s = std::atanh(std::max(r, 0.0));
        if (s < best.s) best = {s, static_cast<int>(k)};
    }
    return best;
}

std::vector<int> min_rotation(const std::vector<int>& w) {
    std::vector<int> best = w;
    for (std::size_t r = 1; r < w.size(); ++r) {
        std::vector<int> cand(w.begin() + r, w.end());
        cand.insert(cand.end(), w.begin(), w.begin() + r);
        if (cand < best) best = std::move(cand);
    }
    return best;
}

}  // namespace

namespace {

// Axis of a hyperbolic element as a frame whose velocity points to the attracting fixed point.
Frame axis_frame(const Isometry& m) {
    const cplx a = m.a, b = m.b, c = m.c, d = m.d;
    if (std::abs(c) < 1e-300) throw DomainError("closed geodesic: element fixes the origin");
    const cplx disc = std::sqrt((d - a) * (d - a) + 4.0 * b * c);
    cplx zp = (a - d + disc) / (2.0 * c);
    cplx zm = (a - d - disc) / (2.0 * c);
    if (std::abs(c * zp + d) < std::abs(c * zm + d)) std::swap(zp, zm);  // zp attracting
    const Vec3 L1 = null_vector(BoundaryPoint(std::arg(zp)));
    const Vec3 L2 = null_vector(BoundaryPoint(std::arg(zm)));
    const double k = std::sqrt(-2.0 * mdot(L1, L2));
    const Vec3 P = (L1 + L2) * (1.0 / k);
    const Vec3 V = (L1 - L2) * (1.0 / k);
    return renormalize({P, V, left_normal(P, V)});
}

}  // namespace

ClosedGeodesic trace_closed_geodesic(const OrbitLocator& loc, const Isometry& m) {
    ClosedGeodesic out;
    const double length = closed_geodesic_length(m);
    Frame f = axis_frame(m);
    loc.reduce(f);

    // Start in the middle of the current chord so no crossing sits at the period ends.
    const Exit fwd = next_exit(loc, f, -1);
    const Exit back = next_exit(loc, Frame{f.P, f.V * -1.0, f.N * -1.0}, -1);
    f = flow(f, 0.5 * (fwd.s - back.s));

    const auto& inv = loc.generator_inverses();
    double travelled = 0.0;
    int skip = -1;
    std::vector<int> seq;
    std::vector<Frame> chords{f};
    for (;;) {
        const Exit e = next_exit(loc, f, skip);
        if (e.k < 0) throw NumericError("trace_closed_geodesic: geodesic left the cell set");
        if (travelled + e.s >= length) break;
        travelled += e.s;
        f = renormalize(transform(inv[e.k], flow(f, e.s)));
        seq.push_back(e.k);
        chords.push_back(f);
        skip = loc.group().inverse_of[e.k];
        if (seq.size() > 100000) throw NumericError("trace_closed_geodesic: runaway walk");
    }
    if (seq.empty()) throw NumericError("trace_closed_geodesic: empty cutting sequence");
    const Isometry w = word_matrix(loc.group(), seq);
    out.trace = std::abs(m.trace());
    out.length = length;
    auto consider = [&](const Frame& c) {
        const double d = std::asinh(std::abs(c.N.t));
        const double from = canonical_angle(std::atan2(c.P.y - c.V.y, c.P.x - c.V.x));
        const double to = canonical_angle(std::atan2(c.P.y + c.V.y, c.P.x + c.V.x));
        if (d < out.min_distance - 1e-9 || (d < out.min_distance + 1e-9 && from < out.anchor_from)) {
            out.min_distance = std::min(d, out.min_distance);
            out.anchor_from = from;
            out.anchor_to = to;
        }
    };
    out.min_distance = std::numeric_limits<double>::infinity();
    const std::size_t n = seq.size();
    if (std::abs(std::abs(w.trace()) - out.trace) <= 1e-6 * out.trace) {
        // The lift through chord j is the axis of the j-th cyclic rotation of the cutting word;
        // recomputing it from short products avoids the conditioning of the input matrix.
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<int> rot(seq.begin() + j, seq.end());
            rot.insert(rot.end(), seq.begin(), seq.begin() + j);
            consider(axis_frame(word_matrix(loc.group(), rot)));
        }
    } else {
        // The axis runs through a tessellation vertex, where the side choice is ambiguous and the
        // word is not conjugate to m. The walked frames are still lifts of the same geodesic.
        for (const Frame& c : chords) consider(c);
    }
    out.cutting_sequence = min_rotation(seq);
    return out;
}

bool same_closed_geodesic(const ClosedGeodesic& a, const ClosedGeodesic& b, double tol) {
    return std::abs(a.length - b.length) <= tol * std::max(1.0, a.length) &&
           std::abs(a.min_distance - b.min_distance) <= tol &&
           std::abs(angle_diff(a.anchor_from, b.anchor_from)) <= tol &&
           std::abs(angle_diff(a.anchor_to, b.anchor_to)) <= tol;
}

}  // namespace gibbslab
