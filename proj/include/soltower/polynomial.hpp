#pragma once

// Dense complex polynomial over the centered/scaled basis ((z - center)/scale)^k.
// Coefficients are stored in binary128 format; evaluation templates over the
// working real type.

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "soltower/complexreal.hpp"
#include "soltower/rational.hpp"

namespace soltower {

struct ComplexPolynomial {
    CxRat center{Rat(0), Rat(0)};
    Rat scale{1};
    std::vector<Cx<BF>> coeffs;  // coeffs[k] multiplies ((z-center)/scale)^k

    int degree() const { return coeffs.empty() ? -1 : static_cast<int>(coeffs.size()) - 1; }

    void trim() {
        while (!coeffs.empty() && coeffs.back().re == 0 && coeffs.back().im == 0)
            coeffs.pop_back();
    }

    template <class R>
    Cx<R> eval(const Cx<R>& z) const {
        Cx<R> c = cxrat_to<R>(center);
        R s = rat_to<R>(scale);
        Cx<R> w{(z.re - c.re) / s, (z.im - c.im) / s};
        Cx<R> acc{};
        for (size_t k = coeffs.size(); k-- > 0;) {
            acc = acc * w + cx_cast<R>(coeffs[k]);
        }
        return acc;
    }

    Cx<BF> eval_rat(const CxRat& z) const { return eval<BF>(cxrat_to<BF>(z)); }

    ComplexPolynomial derivative() const {
        ComplexPolynomial d;
        d.center = center;
        d.scale = scale;
        BF s = rat_to<BF>(scale);
        for (size_t k = 1; k < coeffs.size(); ++k) {
            Cx<BF> c = coeffs[k];
            BF f = BF(static_cast<unsigned>(k)) / s;
            d.coeffs.push_back({c.re * f, c.im * f});
        }
        return d;
    }

    // Largest coefficient magnitude (conditioning / evaluation diagnostics).
    BF coeff_norm() const {
        BF m = 0;
        for (const auto& c : coeffs) {
            BF a = cx_abs(c);
            if (a > m) m = a;
        }
        return m;
    }

    bool operator==(const ComplexPolynomial& o) const {
        if (!(center.re == o.center.re && center.im == o.center.im && scale == o.scale))
            return false;
        if (coeffs.size() != o.coeffs.size()) return false;
        for (size_t i = 0; i < coeffs.size(); ++i)
            if (coeffs[i].re != o.coeffs[i].re || coeffs[i].im != o.coeffs[i].im) return false;
        return true;
    }
};

inline ComplexPolynomial constant_poly(const CxRat& c) {
    ComplexPolynomial p;
    p.coeffs.push_back({rat_to<BF>(c.re), rat_to<BF>(c.im)});
    p.trim();
    return p;
}

// p(z) = z as a basis-0 polynomial.
inline ComplexPolynomial identity_poly() {
    ComplexPolynomial p;
    p.coeffs.push_back({BF(0), BF(0)});
    p.coeffs.push_back({BF(1), BF(0)});
    return p;
}

// Monomial-coefficient constructor: p(z) = sum a_k z^k with rational a_k.
inline ComplexPolynomial poly_from_monomials(const std::vector<CxRat>& mono) {
    ComplexPolynomial p;
    for (const auto& a : mono) p.coeffs.push_back({rat_to<BF>(a.re), rat_to<BF>(a.im)});
    p.trim();
    return p;
}

inline std::string serialize_poly(const ComplexPolynomial& p) {
    std::ostringstream os;
    os << "poly v1\n";
    os << "center: " << frac_str(p.center.re) << " " << frac_str(p.center.im) << "\n";
    os << "scale: " << frac_str(p.scale) << "\n";
    os << "degree: " << p.degree() << "\n";
    for (const auto& c : p.coeffs) os << bf_str(c.re) << " " << bf_str(c.im) << "\n";
    return os.str();
}

inline ComplexPolynomial parse_poly(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "poly v1")
        throw std::invalid_argument("bad poly header");
    ComplexPolynomial p;
    std::string tok;
    if (!std::getline(is, line) || line.rfind("center: ", 0) != 0)
        throw std::invalid_argument("bad poly center");
    {
        std::istringstream ls(line.substr(8));
        std::string a, b;
        ls >> a >> b;
        p.center = {parse_frac(a), parse_frac(b)};
    }
    if (!std::getline(is, line) || line.rfind("scale: ", 0) != 0)
        throw std::invalid_argument("bad poly scale");
    p.scale = parse_frac(line.substr(7));
    if (!std::getline(is, line) || line.rfind("degree: ", 0) != 0)
        throw std::invalid_argument("bad poly degree");
    int deg = std::stoi(line.substr(8));
    for (int k = 0; k <= deg; ++k) {
        std::string a, b;
        if (!(is >> a >> b)) throw std::invalid_argument("bad poly coeffs");
        p.coeffs.push_back({bf_parse(a), bf_parse(b)});
    }
    return p;
}

}  // namespace soltower
