#pragma once

// Real-type ladder for the least-squares solves and a minimal complex
// template over it. BF (binary128 format) is the coefficient storage type;
// BF224 is the top solver rung for badly conditioned high-degree bases.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <string>

#include "soltower/rational.hpp"

namespace soltower {

using BF = boost::multiprecision::cpp_bin_float_quad;  // 113-bit significand
using BF224 = boost::multiprecision::number<
    boost::multiprecision::backends::cpp_bin_float<67>>;  // ~224 bits

template <class R>
struct Cx {
    R re{}, im{};

    Cx() = default;
    Cx(R r) : re(std::move(r)) {}
    Cx(R r, R i) : re(std::move(r)), im(std::move(i)) {}

    Cx operator+(const Cx& o) const { return {re + o.re, im + o.im}; }
    Cx operator-(const Cx& o) const { return {re - o.re, im - o.im}; }
    Cx operator-() const { return {-re, -im}; }
    Cx operator*(const Cx& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    Cx operator/(const Cx& o) const {
        R d = o.re * o.re + o.im * o.im;
        return {(re * o.re + im * o.im) / d, (im * o.re - re * o.im) / d};
    }
    Cx& operator+=(const Cx& o) { re += o.re; im += o.im; return *this; }
    Cx& operator-=(const Cx& o) { re -= o.re; im -= o.im; return *this; }
    Cx& operator*=(const Cx& o) { *this = *this * o; return *this; }

    Cx conj() const { return {re, -im}; }
    R norm2() const { return re * re + im * im; }
};

template <class R>
R cx_abs(const Cx<R>& z) {
    using std::sqrt;
    using boost::multiprecision::sqrt;
    return sqrt(z.norm2());
}

using CxRat = Cx<Rat>;  // exact complex rationals (no division by zero guard)

// Exact-to-float conversions. Rationals convert through decimal strings for
// the multiprecision types (correctly rounded) and narrow from BF for the
// hardware types, so every path is deterministic.
template <class R>
R rat_to(const Rat& q);

template <>
inline BF rat_to<BF>(const Rat& q) {
    return BF(q.get_num().get_str()) / BF(q.get_den().get_str());
}

template <>
inline BF224 rat_to<BF224>(const Rat& q) {
    return BF224(q.get_num().get_str()) / BF224(q.get_den().get_str());
}

template <>
inline long double rat_to<long double>(const Rat& q) {
    return rat_to<BF>(q).convert_to<long double>();
}

template <>
inline double rat_to<double>(const Rat& q) {
    return rat_to<BF>(q).convert_to<double>();
}

template <class R>
Cx<R> cxrat_to(const CxRat& z) {
    return {rat_to<R>(z.re), rat_to<R>(z.im)};
}

template <class To, class From>
To real_cast(const From& x) {
    if constexpr (std::is_same_v<To, From>) {
        return x;
    } else if constexpr (std::is_floating_point_v<From>) {
        return To(x);
    } else {
        return x.template convert_to<To>();
    }
}

template <class To, class From>
Cx<To> cx_cast(const Cx<From>& z) {
    return {real_cast<To, From>(z.re), real_cast<To, From>(z.im)};
}

// Round-trip-exact decimal serialization for BF (36 significant digits
// covers a 113-bit significand).
inline std::string bf_str(const BF& x) {
    return x.str(36, std::ios_base::scientific);
}

inline BF bf_parse(const std::string& s) { return BF(s); }

template <class R>
double to_double(const R& x) {
    return real_cast<double>(x);
}

}  // namespace soltower
