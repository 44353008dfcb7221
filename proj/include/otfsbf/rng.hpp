#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace otfsbf {

// splitmix64 step, used to derive independent stream seeds from a base seed
// plus a few context words (grid index, trial index, purpose tag). Keeping the
// derivation explicit makes every trial replayable in isolation.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = mix_seed(base ^ 0x6a09e667f3bcc909ULL);
    s = mix_seed(s ^ a);
    s = mix_seed(s ^ (b + 0x3c6ef372fe94f82bULL));
    s = mix_seed(s ^ (c + 0xa54ff53a5f1d36f1ULL));
    return s;
}

// Deterministic random stream. Gaussian variates are produced by an explicit
// Box-Muller transform instead of std::normal_distribution so that a given
// seed yields the same sequence on every standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // Uniform on (0, 1]; never returns 0 so log() below is safe.
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (the spare is cached).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // CN(0, var): circularly symmetric complex Gaussian.
    std::complex<double> cgaussian(double var = 1.0) {
        double s = std::sqrt(var / 2.0);
        return {s * gaussian(), s * gaussian()};
    }

    Eigen::VectorXcd cgaussian_vector(int n, double var = 1.0) {
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v(i) = cgaussian(var);
        return v;
    }

    // Uniform on the complex unit sphere in C^n (2n real dimensions).
    Eigen::VectorXcd unit_sphere(int n) {
        Eigen::VectorXcd v = cgaussian_vector(n);
        double nrm = v.norm();
        while (nrm < 1e-12) {  // essentially impossible, but keep it total
            v = cgaussian_vector(n);
            nrm = v.norm();
        }
        return v / nrm;
    }

    // Uniform in the closed complex ball of given radius in C^n. The radius of
    // a uniform draw in a d-dimensional ball follows r = R * u^(1/d), d = 2n.
    Eigen::VectorXcd ball(int n, double radius) {
        Eigen::VectorXcd dir = unit_sphere(n);
        double r = radius * std::pow(uniform(), 1.0 / (2.0 * n));
        return r * dir;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace otfsbf
