#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fdm {

/**
 * Counter-based pseudo-random generator.
 *
 * Output i is the splitmix64 finalizer applied to seed + (i+1)*GOLDEN,
 * where GOLDEN = 0x9E3779B97F4A7C15. Draws are a pure function of
 * (seed, counter), so streams are reproducible bit-for-bit across
 * platforms and may be split or replayed at any counter position.
 */
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t next_u64() {
        counter_ += 1;
        return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform draw in [0,1) with 53 random mantissa bits.
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal draw through the inverse CDF.
    double next_gaussian() {
        // (0,1) open interval; the +0.5 offset keeps u away from 0 and 1.
        double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
        return normal_inv_cdf(u);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    /**
     * Inverse of the standard normal CDF (Acklam's rational approximation
     * refined by one Halley step), accurate to full double precision.
     */
    static double normal_inv_cdf(double p) {
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("normal_inv_cdf: p must lie in (0,1)");

        static constexpr double a[6] = {
            -3.969683028665376e+01,  2.209460984245205e+02,
            -2.759285104469687e+02,  1.383577518672690e+02,
            -3.066479806614716e+01,  2.506628277459239e+00};
        static constexpr double b[5] = {
            -5.447609879822406e+01,  1.615858368580409e+02,
            -1.556989798598866e+02,  6.680131188771972e+01,
            -1.328068155288572e+01};
        static constexpr double c[6] = {
            -7.784894002430293e-03, -3.223964580411365e-01,
            -2.400758277161838e+00, -2.549732539343734e+00,
             4.374664141464968e+00,  2.938163982698783e+00};
        static constexpr double d[4] = {
             7.784695709041462e-03,  3.224671290700398e-01,
             2.445134137142996e+00,  3.754408661907416e+00};

        const double p_low = 0.02425;
        double x;
        if (p < p_low) {
            double q = std::sqrt(-2.0 * std::log(p));
            x = (((((c[0]*q + c[1])*q + c[2])*q + c[3])*q + c[4])*q + c[5]) /
                ((((d[0]*q + d[1])*q + d[2])*q + d[3])*q + 1.0);
        } else if (p <= 1.0 - p_low) {
            double q = p - 0.5, r = q * q;
            x = (((((a[0]*r + a[1])*r + a[2])*r + a[3])*r + a[4])*r + a[5])*q /
                (((((b[0]*r + b[1])*r + b[2])*r + b[3])*r + b[4])*r + 1.0);
        } else {
            double q = std::sqrt(-2.0 * std::log(1.0 - p));
            x = -(((((c[0]*q + c[1])*q + c[2])*q + c[3])*q + c[4])*q + c[5]) /
                 ((((d[0]*q + d[1])*q + d[2])*q + d[3])*q + 1.0);
        }

        // Halley refinement against the exact CDF expressed with erfc.
        double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
        double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
        x = x - u / (1.0 + x * u / 2.0);
        return x;
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace fdm
