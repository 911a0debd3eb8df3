#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>

namespace graphwalk {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double x) { return x; }

inline Rational rational(std::int64_t num, std::int64_t den) {
    return Rational(num) / Rational(den);
}

// Scalar type used by distributions and kernels: exact Rational for oracle
// runs, double for production runs.
template <class S>
concept ProbScalar = std::same_as<S, double> || std::same_as<S, Rational>;

template <ProbScalar S>
inline S scalar_one() { return S(1); }

inline double log2_big(const BigInt& v) {
    // log2 of a positive big integer, good to ~1e-12 relative.
    if (v <= 0) return -std::numeric_limits<double>::infinity();
    const std::size_t bits = msb(v);  // boost::multiprecision::msb
    if (bits <= 52) return std::log2(v.convert_to<double>());
    BigInt top = v >> (bits - 52);
    return std::log2(top.convert_to<double>()) + double(bits - 52);
}

struct Welford {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / double(count);
        m2 += d * (x - mean);
    }
    void merge(const Welford& o) {
        if (o.count == 0) return;
        if (count == 0) { *this = o; return; }
        const double d = o.mean - mean;
        const std::int64_t tot = count + o.count;
        mean += d * double(o.count) / double(tot);
        m2 += o.m2 + d * d * double(count) * double(o.count) / double(tot);
        count = tot;
    }
    double variance() const { return count > 1 ? m2 / double(count - 1) : 0.0; }
    double stderr_of_mean() const {
        return count > 1 ? std::sqrt(variance() / double(count)) : 0.0;
    }
};

}  // namespace graphwalk
