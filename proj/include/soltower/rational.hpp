#pragma once

// Exact rational scalars and small vectors over GMP. Every geometric
// predicate in the library runs on these; floating point only enters
// through explicit conversions in the numerics layer.

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <vector>

namespace soltower {

using Rat = mpq_class;
using Int = mpz_class;
using RatVec = std::vector<Rat>;

inline Rat rat(long num, long den = 1) {
    Rat q(num, den);
    q.canonicalize();
    return q;
}

// Parses "num/den" or a bare integer. The serialized form is always "num/den".
inline Rat parse_frac(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty fraction string");
    Rat q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad fraction: " + s);
    q.canonicalize();
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
    return q;
}

inline std::string frac_str(const Rat& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline Int rat_floor(const Rat& q) {
    Int r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return r;
}

inline Int rat_ceil(const Rat& q) {
    Int r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return r;
}

// a mod m in [0, m) for m > 0, exact.
inline Rat rat_mod(const Rat& a, const Rat& m) {
    Rat q = a / m;
    Rat r = a - Rat(rat_floor(q)) * m;
    return r;
}

// Nearest lattice integer with the tie at fractional part 1/2 going down:
// ceil when frac > 1/2, floor otherwise.
inline Int nearest_int(const Rat& q) {
    Int f = rat_floor(q);
    Rat frac = q - Rat(f);
    if (frac > Rat(1, 2)) return f + 1;
    return f;
}

inline Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

inline std::string vec_str(const RatVec& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += " ";
        s += frac_str(v[i]);
    }
    return s;
}

}  // namespace soltower
