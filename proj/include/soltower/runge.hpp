#pragma once

// The constructive stand-ins for Runge's theorem: 0/1 separating polynomials
// on disjoint region families and the Birkhoff two-disk transitivity step.

#include <vector>

#include "soltower/fitter.hpp"

namespace soltower {

// |p| < bound on every A-region, |p - 1| < bound on every B-region,
// grid-certified through the fitter contract.
inline std::pair<ComplexPolynomial, ApproxReport> separating_polynomial(
    const std::vector<Region>& A, const std::vector<Region>& B, const Rat& bound,
    const FitOptions& opts = {}) {
    PiecewiseTarget t;
    for (const auto& r : A) t.pieces.push_back({r, constant_poly({Rat(0), Rat(0)}), {}});
    for (const auto& r : B) t.pieces.push_back({r, constant_poly({Rat(1), Rat(0)}), {}});
    return fit_polynomial(t, bound, opts);
}

// p within eps of p0 on {|z| <= R} and of p1(.-3R) on {|z - 3R| <= R}:
// p lands in V_0 while T_{3R} p lands in V_1.
inline std::pair<ComplexPolynomial, ApproxReport> birkhoff_pair(const ComplexPolynomial& p0,
                                                                const ComplexPolynomial& p1,
                                                                const Rat& R, const Rat& eps,
                                                                const FitOptions& opts = {}) {
    if (R <= 0) throw std::invalid_argument("birkhoff_pair: R must be positive");
    PiecewiseTarget t;
    t.pieces.push_back({DiskRegion{{Rat(0), Rat(0)}, R}, p0, {}});
    t.pieces.push_back({DiskRegion{{3 * R, Rat(0)}, R}, p1, {3 * R, Rat(0)}});
    return fit_polynomial(t, eps, opts);
}

}  // namespace soltower
