#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace gibbslab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Neumaier variant of Kahan summation.
class NeumaierSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Streaming log(sum exp(x_i)). Rescales when a new maximum arrives.
class LogSumExp {
public:
    void add(double x) {
        if (x == -std::numeric_limits<double>::infinity()) return;
        if (count_ == 0 || x > max_) {
            if (count_ > 0) {
                const double scale = std::exp(max_ - x);
                const double old = acc_.value() * scale;
                acc_ = NeumaierSum{};
                acc_.add(old);
            }
            max_ = x;
        }
        acc_.add(std::exp(x - max_));
        ++count_;
    }
    double value() const {
        if (count_ == 0) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(acc_.value());
    }
    std::size_t count() const { return count_; }

private:
    double max_ = 0.0;
    NeumaierSum acc_;
    std::size_t count_ = 0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    double max_residual = 0.0;
    double slope_stderr = 0.0;
    std::size_t n = 0;
};

// Ordinary least squares y = a + b x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration on P_n; cached per n.
const QuadratureRule& gauss_legendre(int n);

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double canonical_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t -= kTwoPi;
    return t;
}

// Signed difference a - b folded into (-pi, pi].
inline double angle_diff(double a, double b) {
    double d = std::fmod(a - b, kTwoPi);
    if (d <= -kPi) d += kTwoPi;
    if (d > kPi) d -= kTwoPi;
    return d;
}

}  // namespace gibbslab
