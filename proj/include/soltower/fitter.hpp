#pragma once

// Grid-certified least-squares polynomial approximation on finite unions of
// disjoint rectangles/disks. Degree escalates 1,2,4,...,cap; each degree is
// solved by complex Householder QR over a precision ladder (long double ->
// binary128 -> 224-bit) and validated on a strictly finer, offset grid
// against eps * 0.9.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "soltower/complexreal.hpp"
#include "soltower/polynomial.hpp"
#include "soltower/rational.hpp"

namespace soltower {

struct Rect {
    Rat x0, y0, x1, y1;  // closed, x0 <= x1, y0 <= y1
};

struct DiskRegion {
    CxRat c;
    Rat r;
};

using Region = std::variant<Rect, DiskRegion>;

struct Piece {
    Region region;
    ComplexPolynomial target;
    CxRat shift{Rat(0), Rat(0)};  // target is evaluated at z - shift
};

struct PiecewiseTarget {
    std::vector<Piece> pieces;
};

struct ApproxReport {
    bool success = false;
    int degree = -1;
    double achieved_eps = 0;                          // max over piece errors
    std::vector<double> piece_errors;
    int fit_boundary_pts = 0;                         // per-piece fitting density
    int validation_boundary_pts = 0;                  // per-piece validation density
    double cond_diag = 0;                             // min/max |R_kk| of the QR
    int precision_bits = 0;
    std::vector<std::pair<int, double>> history;      // (degree, error) attempts
};

struct ApproximationFailure : std::runtime_error {
    ApproxReport best_report;
    ComplexPolynomial best_poly;
    ApproximationFailure(const std::string& msg, ApproxReport rep, ComplexPolynomial poly)
        : std::runtime_error(msg), best_report(std::move(rep)), best_poly(std::move(poly)) {}
};

struct FitOptions {
    int degree_cap = 64;
    int grid_density = 64;     // baseline boundary points per piece
    int precision_bits = 0;    // 0 = automatic ladder
};

namespace detail {

inline void region_gap_check(const std::vector<Piece>& pieces) {
    auto bounds = [](const Region& r) -> Rect {
        if (std::holds_alternative<Rect>(r)) return std::get<Rect>(r);
        const auto& d = std::get<DiskRegion>(r);
        return Rect{d.c.re - d.r, d.c.im - d.r, d.c.re + d.r, d.c.im + d.r};
    };
    for (size_t a = 0; a < pieces.size(); ++a)
        for (size_t b = a + 1; b < pieces.size(); ++b) {
            Rect ra = bounds(pieces[a].region), rb = bounds(pieces[b].region);
            bool apart = ra.x1 < rb.x0 || rb.x1 < ra.x0 || ra.y1 < rb.y0 || rb.y1 < ra.y0;
            if (!apart) throw std::invalid_argument("fit pieces not disjoint");
        }
}

// All sample positions are derived once in BF so every precision rung sees
// the same points.
struct SampleSet {
    std::vector<Cx<BF>> fit_pts;
    std::vector<size_t> fit_piece_of;
    std::vector<Cx<BF>> val_pts;
    std::vector<size_t> val_piece_of;
    int fit_boundary = 0, val_boundary = 0;
};

inline void rect_boundary(const Rect& r, int per_side, const BF& phase_num, int phase_den,
                          std::vector<Cx<BF>>& out) {
    BF x0 = rat_to<BF>(r.x0), x1 = rat_to<BF>(r.x1);
    BF y0 = rat_to<BF>(r.y0), y1 = rat_to<BF>(r.y1);
    for (int i = 0; i < per_side; ++i) {
        BF t = (BF(i) + phase_num) / (BF(per_side) * phase_den);
        out.push_back({x0 + (x1 - x0) * t, y0});
        out.push_back({x1, y0 + (y1 - y0) * t});
        out.push_back({x1 - (x1 - x0) * t, y1});
        out.push_back({x0, y1 - (y1 - y0) * t});
    }
}

inline void rect_corners(const Rect& r, std::vector<Cx<BF>>& out) {
    BF x0 = rat_to<BF>(r.x0), x1 = rat_to<BF>(r.x1);
    BF y0 = rat_to<BF>(r.y0), y1 = rat_to<BF>(r.y1);
    out.push_back({x0, y0});
    out.push_back({x1, y0});
    out.push_back({x1, y1});
    out.push_back({x0, y1});
}

inline void rect_interior(const Rect& r, int g, bool offset, std::vector<Cx<BF>>& out) {
    BF x0 = rat_to<BF>(r.x0), x1 = rat_to<BF>(r.x1);
    BF y0 = rat_to<BF>(r.y0), y1 = rat_to<BF>(r.y1);
    BF ph = offset ? BF(3) / 4 : BF(1) / 2;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            BF u = (BF(i) + ph) / g, v = (BF(j) + ph) / g;
            out.push_back({x0 + (x1 - x0) * u, y0 + (y1 - y0) * v});
        }
}

inline void disk_pts(const DiskRegion& d, int m, int rings, const BF& phase_num, int phase_den,
                     std::vector<Cx<BF>>& out) {
    using boost::multiprecision::cos;
    using boost::multiprecision::sin;
    static const BF two_pi(
        "6.28318530717958647692528676655900576839433879875021164194988918461563281");
    BF cx = rat_to<BF>(d.c.re), cy = rat_to<BF>(d.c.im), R = rat_to<BF>(d.r);
    for (int i = 0; i < m; ++i) {
        BF th = two_pi * (BF(i) + phase_num) / (BF(m) * phase_den);
        out.push_back({cx + R * cos(th), cy + R * sin(th)});
    }
    for (int j = 1; j <= rings; ++j) {
        BF rr = R * BF(j) / (rings + 1);
        int mj = std::max(8, m / 3);
        for (int i = 0; i < mj; ++i) {
            BF th = two_pi * (BF(i) + BF(37) / 100 * j) / mj;
            out.push_back({cx + rr * cos(th), cy + rr * sin(th)});
        }
    }
}

inline SampleSet build_samples(const PiecewiseTarget& target, int degree, int grid_density) {
    SampleSet s;
    int mb = std::max(grid_density, 2 * degree + 16);
    int per_side = std::max(4, mb / 4);
    int g = std::max(3, static_cast<int>(std::sqrt(static_cast<double>(mb)) / 2));
    s.fit_boundary = per_side * 4;
    s.val_boundary = per_side * 8 + 4;
    for (size_t p = 0; p < target.pieces.size(); ++p) {
        size_t f0 = s.fit_pts.size(), v0 = s.val_pts.size();
        if (std::holds_alternative<Rect>(target.pieces[p].region)) {
            const Rect& r = std::get<Rect>(target.pieces[p].region);
            rect_boundary(r, per_side, BF(0), 1, s.fit_pts);
            rect_interior(r, g, false, s.fit_pts);
            rect_boundary(r, per_side * 2, BF(1) / 2, 1, s.val_pts);
            rect_corners(r, s.val_pts);
            rect_interior(r, 2 * g + 1, true, s.val_pts);
        } else {
            const DiskRegion& d = std::get<DiskRegion>(target.pieces[p].region);
            disk_pts(d, per_side * 4, std::max(2, g / 2), BF(0), 1, s.fit_pts);
            disk_pts(d, per_side * 8, 2 * std::max(2, g / 2) + 1, BF(1) / 2, 1, s.val_pts);
        }
        for (size_t i = f0; i < s.fit_pts.size(); ++i) s.fit_piece_of.push_back(p);
        for (size_t i = v0; i < s.val_pts.size(); ++i) s.val_piece_of.push_back(p);
    }
    return s;
}

// In-place complex Householder QR least squares. Returns min/max |R_kk|.
template <class R>
double qr_solve(std::vector<std::vector<Cx<R>>>& A, std::vector<Cx<R>>& b,
                std::vector<Cx<R>>& coef) {
    const size_t m = A.size(), n = A[0].size();
    R minr = R(0), maxr = R(0);
    for (size_t k = 0; k < n; ++k) {
        R norm2 = R(0);
        for (size_t i = k; i < m; ++i) norm2 += A[i][k].norm2();
        using std::sqrt;
        using boost::multiprecision::sqrt;
        R norm = sqrt(norm2);
        if (k == 0 || norm > maxr) maxr = norm;
        if (k == 0 || norm < minr) minr = norm;
        if (norm == 0) continue;
        Cx<R> akk = A[k][k];
        R akk_abs = cx_abs(akk);
        Cx<R> phase = akk_abs == 0 ? Cx<R>{R(1), R(0)} : Cx<R>{akk.re / akk_abs, akk.im / akk_abs};
        // v = x + phase * norm * e_k
        A[k][k] = akk + phase * Cx<R>{norm, R(0)};
        R vnorm2 = R(0);
        for (size_t i = k; i < m; ++i) vnorm2 += A[i][k].norm2();
        if (vnorm2 == 0) continue;
        for (size_t j = k + 1; j < n; ++j) {
            Cx<R> dot{};
            for (size_t i = k; i < m; ++i) dot += A[i][k].conj() * A[i][j];
            Cx<R> f = {2 * dot.re / vnorm2, 2 * dot.im / vnorm2};
            for (size_t i = k; i < m; ++i) A[i][j] -= A[i][k] * f;
        }
        {
            Cx<R> dot{};
            for (size_t i = k; i < m; ++i) dot += A[i][k].conj() * b[i];
            Cx<R> f = {2 * dot.re / vnorm2, 2 * dot.im / vnorm2};
            for (size_t i = k; i < m; ++i) b[i] -= A[i][k] * f;
        }
        // R_kk = -phase * norm
        A[k][k] = Cx<R>{-phase.re * norm, -phase.im * norm};
    }
    coef.assign(n, Cx<R>{});
    for (size_t k = n; k-- > 0;) {
        Cx<R> acc = b[k];
        for (size_t j = k + 1; j < n; ++j) acc -= A[k][j] * coef[j];
        if (cx_abs(A[k][k]) == 0) {
            coef[k] = Cx<R>{};
            continue;
        }
        coef[k] = acc / A[k][k];
    }
    return to_double(minr) / to_double(maxr);
}

template <class R>
ComplexPolynomial solve_at(const PiecewiseTarget& target, const SampleSet& s,
                           const CxRat& center, const Rat& scale, int degree,
                           double& cond_out) {
    const size_t m = s.fit_pts.size(), n = degree + 1;
    Cx<R> c = cxrat_to<R>(center);
    R sc = rat_to<R>(scale);
    std::vector<std::vector<Cx<R>>> A(m, std::vector<Cx<R>>(n));
    std::vector<Cx<R>> b(m);
    for (size_t i = 0; i < m; ++i) {
        Cx<R> z = cx_cast<R>(s.fit_pts[i]);
        Cx<R> w = {(z.re - c.re) / sc, (z.im - c.im) / sc};
        Cx<R> pw{R(1), R(0)};
        for (size_t k = 0; k < n; ++k) {
            A[i][k] = pw;
            pw *= w;
        }
        const Piece& piece = target.pieces[s.fit_piece_of[i]];
        Cx<R> sh = cxrat_to<R>(piece.shift);
        b[i] = piece.target.template eval<R>({z.re - sh.re, z.im - sh.im});
    }
    std::vector<Cx<R>> coef;
    cond_out = qr_solve(A, b, coef);
    ComplexPolynomial p;
    p.center = center;
    p.scale = scale;
    for (const auto& cc : coef) p.coeffs.push_back(cx_cast<BF>(cc));
    p.trim();
    return p;
}

// Per-piece sup error of the stored polynomial on the validation points.
inline std::vector<double> validate(const PiecewiseTarget& target, const SampleSet& s,
                                    const ComplexPolynomial& p) {
    std::vector<BF> sup(target.pieces.size(), BF(0));
    for (size_t i = 0; i < s.val_pts.size(); ++i) {
        const Piece& piece = target.pieces[s.val_piece_of[i]];
        Cx<BF> z = s.val_pts[i];
        Cx<BF> sh = cxrat_to<BF>(piece.shift);
        Cx<BF> want = piece.target.eval<BF>({z.re - sh.re, z.im - sh.im});
        Cx<BF> got = p.eval<BF>(z);
        BF e = cx_abs(Cx<BF>{got.re - want.re, got.im - want.im});
        if (e > sup[s.val_piece_of[i]]) sup[s.val_piece_of[i]] = e;
    }
    std::vector<double> out;
    for (const auto& e : sup) out.push_back(to_double(e));
    return out;
}

inline std::pair<CxRat, Rat> fit_basis(const PiecewiseTarget& target) {
    Rat x0, x1, y0, y1;
    bool first = true;
    for (const auto& piece : target.pieces) {
        Rect r;
        if (std::holds_alternative<Rect>(piece.region)) {
            r = std::get<Rect>(piece.region);
        } else {
            const auto& d = std::get<DiskRegion>(piece.region);
            r = Rect{d.c.re - d.r, d.c.im - d.r, d.c.re + d.r, d.c.im + d.r};
        }
        if (first || r.x0 < x0) x0 = r.x0;
        if (first || r.y0 < y0) y0 = r.y0;
        if (first || r.x1 > x1) x1 = r.x1;
        if (first || r.y1 > y1) y1 = r.y1;
        first = false;
    }
    CxRat center{(x0 + x1) / 2, (y0 + y1) / 2};
    // rational upper bound of the half-diagonal, within 2^-20
    BF hd = boost::multiprecision::sqrt(
                (rat_to<BF>(x1 - x0) * rat_to<BF>(x1 - x0) +
                 rat_to<BF>(y1 - y0) * rat_to<BF>(y1 - y0))) /
            2;
    Int num = rat_ceil(Rat(hd.convert_to<double>() * 1048576.0 + 1));
    Rat scale = Rat(num, Int(1048576));
    if (scale <= 0) scale = 1;
    return {center, scale};
}

}  // namespace detail

inline std::pair<ComplexPolynomial, ApproxReport> fit_polynomial(const PiecewiseTarget& target,
                                                                 const Rat& eps,
                                                                 const FitOptions& opts = {}) {
    if (target.pieces.empty()) throw std::invalid_argument("no pieces");
    if (eps <= 0) throw std::invalid_argument("eps must be positive");
    detail::region_gap_check(target.pieces);

    // A target that is already one global polynomial is returned directly.
    if (target.pieces.size() == 1 && target.pieces[0].shift.re == 0 &&
        target.pieces[0].shift.im == 0) {
        ApproxReport rep;
        rep.success = true;
        rep.degree = target.pieces[0].target.degree();
        rep.achieved_eps = 0;
        rep.piece_errors.assign(1, 0.0);
        rep.precision_bits = 113;
        return {target.pieces[0].target, rep};
    }
    {
        bool all_const_same = true;
        for (const auto& piece : target.pieces)
            if (piece.target.degree() > 0 || !(piece.target == target.pieces[0].target))
                all_const_same = false;
        if (all_const_same) {
            ApproxReport rep;
            rep.success = true;
            rep.degree = target.pieces[0].target.degree();
            rep.achieved_eps = 0;
            rep.piece_errors.assign(target.pieces.size(), 0.0);
            rep.precision_bits = 113;
            return {target.pieces[0].target, rep};
        }
    }

    auto [center, scale] = detail::fit_basis(target);
    const double eps_goal = to_double(rat_to<BF>(eps)) * 0.9;

    ApproxReport best;
    ComplexPolynomial best_poly;
    double best_err = std::numeric_limits<double>::infinity();

    int rung = 0;
    if (opts.precision_bits > 64) rung = opts.precision_bits > 120 ? 2 : 1;

    std::vector<int> degrees{1};
    for (int d = 2; d <= opts.degree_cap; d *= 2) degrees.push_back(d);
    if (degrees.back() != opts.degree_cap && opts.degree_cap > 1)
        degrees.push_back(opts.degree_cap);

    ApproxReport rep;
    for (size_t di = 0; di < degrees.size(); ++di) {
        int deg = degrees[di];
        auto samples = detail::build_samples(target, deg, opts.grid_density);
        for (;;) {
            double cond = 0;
            ComplexPolynomial p;
            int bits;
            if (rung == 0) {
                p = detail::solve_at<long double>(target, samples, center, scale, deg, cond);
                bits = 64;
            } else if (rung == 1) {
                p = detail::solve_at<BF>(target, samples, center, scale, deg, cond);
                bits = 113;
            } else {
                p = detail::solve_at<BF224>(target, samples, center, scale, deg, cond);
                bits = 224;
            }
            auto errs = detail::validate(target, samples, p);
            double worst = 0;
            for (double e : errs) worst = std::max(worst, e);
            rep.degree = deg;
            rep.piece_errors = errs;
            rep.achieved_eps = worst;
            rep.cond_diag = cond;
            rep.precision_bits = bits;
            rep.fit_boundary_pts = samples.fit_boundary;
            rep.validation_boundary_pts = samples.val_boundary;
            rep.history.push_back({deg, worst});
            if (worst < best_err) {
                best_err = worst;
                best = rep;
                best_poly = p;
            }
            if (worst < eps_goal) {
                rep.success = true;
                return {p, rep};
            }
            const double starve[] = {1e-13, 5e-28, 1e-60};
            if (rung < 2 && cond < starve[rung]) {
                ++rung;
                continue;
            }
            break;
        }
    }
    best.success = false;
    throw ApproximationFailure(
        "approximation failure: degree cap " + std::to_string(opts.degree_cap) +
            " reached, best error " + std::to_string(best_err),
        best, best_poly);
}

}  // namespace soltower
