#pragma once

// Deterministic diagonal enumeration of polynomials with complex-rational
// coefficients, by (degree, coefficient height) levels. The sequence opens
// 0, 1, -1, i, -i, ... ; this is the dense family the general construction
// draws its targets from.

#include <algorithm>
#include <vector>

#include "soltower/polynomial.hpp"
#include "soltower/rational.hpp"

namespace soltower {

namespace detail {

inline long rat_height(const Rat& q) {
    if (q == 0) return 0;
    Int n = rat_abs(q).get_num(), d = q.get_den();
    Int m = n > d ? n : d;
    return m.get_si();
}

// Rationals with max(|num|, den) <= h, canonical, ordered by
// (height, den, |num|, sign with + first).
inline std::vector<Rat> rationals_of_height(long h) {
    std::vector<Rat> out;
    for (long den = 1; den <= h; ++den)
        for (long an = 0; an <= h; ++an)
            for (int s = 0; s < (an == 0 ? 1 : 2); ++s) {
                long num = s == 0 ? an : -an;
                Rat q(num, den);
                q.canonicalize();
                if (q.get_num() == num && q.get_den() == den) out.push_back(q);
            }
    std::stable_sort(out.begin(), out.end(), [](const Rat& a, const Rat& b) {
        long ha = rat_height(a), hb = rat_height(b);
        if (ha != hb) return ha < hb;
        return false;
    });
    return out;
}

struct CxKey {
    long hmax, him, hre;
    int im_neg, re_neg;
    bool operator<(const CxKey& o) const {
        if (hmax != o.hmax) return hmax < o.hmax;
        if (him != o.him) return him < o.him;
        if (hre != o.hre) return hre < o.hre;
        if (im_neg != o.im_neg) return im_neg < o.im_neg;
        return re_neg < o.re_neg;
    }
};

inline CxKey cx_key(const CxRat& c) {
    long hre = rat_height(c.re), him = rat_height(c.im);
    return {std::max(hre, him), him, hre, c.im < 0 ? 1 : 0, c.re < 0 ? 1 : 0};
}

}  // namespace detail

// First `count` polynomials of the diagonal enumeration.
inline std::vector<ComplexPolynomial> diagonal_enumeration(int count) {
    std::vector<ComplexPolynomial> out;
    out.push_back(constant_poly({Rat(0), Rat(0)}));  // the zero polynomial opens level 1
    for (long level = 1; static_cast<int>(out.size()) < count && level < 64; ++level) {
        for (long deg = 0; deg < level && static_cast<int>(out.size()) < count; ++deg) {
            long h = level - deg;
            auto vals = detail::rationals_of_height(h);
            std::vector<CxRat> cvals;
            for (const Rat& re : vals)
                for (const Rat& im : vals) cvals.push_back({re, im});
            std::stable_sort(cvals.begin(), cvals.end(), [](const CxRat& a, const CxRat& b) {
                return detail::cx_key(a) < detail::cx_key(b);
            });
            // odometer over coefficient tuples, constant term fastest
            std::vector<size_t> idx(deg + 1, 0);
            for (;;) {
                std::vector<CxRat> mono(deg + 1);
                for (long k = 0; k <= deg; ++k) mono[k] = cvals[idx[k]];
                bool lead_ok = deg == 0 || !(mono[deg].re == 0 && mono[deg].im == 0);
                long hmax = 0;
                for (const auto& c : mono) hmax = std::max(hmax, detail::cx_key(c).hmax);
                bool is_zero_const = deg == 0 && mono[0].re == 0 && mono[0].im == 0;
                if (lead_ok && hmax == h && !is_zero_const) {
                    out.push_back(poly_from_monomials(mono));
                    if (static_cast<int>(out.size()) >= count) return out;
                }
                size_t k = 0;
                while (k < idx.size() && ++idx[k] == cvals.size()) idx[k++] = 0;
                if (k == idx.size()) break;
            }
        }
    }
    return out;
}

}  // namespace soltower
