#pragma once

// The staged construction of F_n on the solenoid (d = 1): margin cubes
// K_{n-1,ij}, piecewise targets (fresh p_n on tile (0,0), shifted q_{n-1}
// elsewhere), Runge fitting at eps_n = 10^{-(n-1)}, orbit evaluation, and
// density certificates along the planted-cube chain.

#include <optional>
#include <string>
#include <vector>

#include "soltower/fitter.hpp"
#include "soltower/polynomial.hpp"
#include "soltower/solenoid.hpp"

namespace soltower {

struct StagePlan {
    RadixSequence radix;                    // dim must be 2 (one complex variable)
    std::vector<ComplexPolynomial> polys;   // p_1, p_2, ...
    std::vector<int> degree_caps;           // per stage; stage n uses degree_caps[n-1]
    int grid_density = 64;
    int precision_bits = 0;
    int density_grid = 50;                  // per-axis grid for density certificates

    int stages() const { return static_cast<int>(polys.size()); }

    Rat eps(int n) const {    // 10^{-(n-1)}
        Rat e(1);
        for (int i = 1; i < n; ++i) e /= 10;
        return e;
    }
    Rat margin(int n) const { return eps(n); }

    int cap(int n) const {
        if (degree_caps.empty()) return 64;
        size_t i = std::min(static_cast<size_t>(n) - 1, degree_caps.size() - 1);
        return degree_caps[i];
    }
};

struct Stage {
    int n = 0;
    ComplexPolynomial q;
    std::vector<Rect> kcubes;  // K_{n-1,ij} in (i,j) lex order; empty for n = 1
    ApproxReport report;
};

// K_{n-1,ij}: the tile [iR, (i+1)R) x [jR, (j+1)R) inset by 10^{-(n-1)}.
inline Rect margins(int n, const Rat& R_prev, long i, long j) {
    Rat m(1);
    for (int t = 1; t < n; ++t) m /= 10;
    if (2 * m >= R_prev) throw std::invalid_argument("margins: degenerate K-cube");
    return Rect{Rat(i) * R_prev + m, Rat(j) * R_prev + m, Rat(i + 1) * R_prev - m,
                Rat(j + 1) * R_prev - m};
}

inline Stage make_stage1(const StagePlan& plan) {
    if (plan.radix.dim != 2) throw std::invalid_argument("construction needs dim 2 (d = 1)");
    if (plan.polys.empty()) throw std::invalid_argument("no polynomials in plan");
    Stage s;
    s.n = 1;
    s.q = plan.polys[0];
    s.report.success = true;
    s.report.degree = s.q.degree();
    s.report.achieved_eps = 0;
    return s;
}

inline Stage build_stage(const StagePlan& plan, const Stage& prev) {
    const int n = prev.n + 1;
    if (n > static_cast<int>(plan.radix.length()))
        throw std::invalid_argument("stage exceeds radix length");
    if (n > plan.stages()) throw std::invalid_argument("stage exceeds polynomial list");
    const long rn = plan.radix.r[n - 1];
    const Rat R_prev = n >= 2 ? Rat(plan.radix.R[n - 2]) : Rat(1);

    Stage s;
    s.n = n;
    PiecewiseTarget target;
    for (long i = 0; i < rn; ++i)
        for (long j = 0; j < rn; ++j) {
            Rect k = margins(n, R_prev, i, j);
            s.kcubes.push_back(k);
            if (i == 0 && j == 0) {
                target.pieces.push_back({k, plan.polys[n - 1], {}});
            } else {
                target.pieces.push_back({k, prev.q, {Rat(i) * R_prev, Rat(j) * R_prev}});
            }
        }
    FitOptions opts{plan.cap(n), plan.grid_density, plan.precision_bits};
    try {
        auto [q, rep] = fit_polynomial(target, plan.eps(n), opts);
        s.q = q;
        s.report = rep;
    } catch (ApproximationFailure& f) {
        throw ApproximationFailure("stage " + std::to_string(n) + ": " + f.what(),
                                   f.best_report, f.best_poly);
    }
    return s;
}

inline std::vector<Stage> build_stages(const StagePlan& plan, int upto) {
    std::vector<Stage> stages{make_stage1(plan)};
    while (static_cast<int>(stages.size()) < upto)
        stages.push_back(build_stage(plan, stages.back()));
    return stages;
}

// F_n^g(z) = q_n applied to the level-n offset of T_z g.
inline Cx<BF> evaluate(const SolenoidPoint& g, const Stage& stage, const CxRat& z) {
    if (g.depth < stage.n) throw std::invalid_argument("evaluate: point depth below stage");
    auto t = translate(g, {z.re, z.im});
    auto f = factor(t, stage.n);
    return stage.q.eval_rat({f.offset[0], f.offset[1]});
}

struct DensityCertificate {
    int k = 0, n = 0;
    CxRat w{Rat(0), Rat(0)};   // translation to the planted copy's anchor
    Rat half_side;             // rho: half the shrunken square's side
    Rat bound;                 // sum_{m=k-1}^{n-1} 10^{-m}
    double measured = 0;
    bool domain_empty = false; // k = 1 instantiates to an empty square
    bool pass = false;
};

// Follows the planted copy of p_k through tiles (1,0) of every later stage
// and measures q_n against p_k on the surviving shrunken square.
inline DensityCertificate density_check(const StagePlan& plan, const std::vector<Stage>& stages,
                                        int k) {
    const int n = stages.back().n;
    if (k < 1 || k > n) throw std::invalid_argument("density_check: k out of range");
    DensityCertificate cert;
    cert.k = k;
    cert.n = n;

    Rat w = 0;
    for (int m = k; m <= n - 1; ++m) w += Rat(plan.radix.R[m - 1]);
    cert.w = {w, Rat(0)};

    Rat margin_sum = 0;
    for (int m = k - 1; m <= n - 1; ++m) {
        Rat t(1);
        for (int i = 0; i < m; ++i) t /= 10;
        margin_sum += t;
    }
    cert.bound = margin_sum;

    const Rat R_prev = k >= 2 ? Rat(plan.radix.R[k - 2]) : Rat(1);
    Rat side = R_prev - 2 * margin_sum;
    cert.half_side = side > 0 ? side / 2 : Rat(0);
    if (side <= 0) {
        cert.domain_empty = true;
        cert.measured = 0;
        cert.pass = true;
        return cert;
    }

    const ComplexPolynomial& qn = stages.back().q;
    const ComplexPolynomial& pk = plan.polys[k - 1];
    const int G = plan.density_grid;
    BF sup = 0;
    BF lo = rat_to<BF>(margin_sum), len = rat_to<BF>(side), wre = rat_to<BF>(w);
    for (int i = 0; i <= G; ++i)
        for (int j = 0; j <= G; ++j) {
            BF x = lo + len * BF(i) / G, y = lo + len * BF(j) / G;
            Cx<BF> ref = pk.eval<BF>({x, y});
            Cx<BF> got = qn.eval<BF>({x + wre, y});
            BF e = cx_abs(Cx<BF>{got.re - ref.re, got.im - ref.im});
            if (e > sup) sup = e;
        }
    cert.measured = to_double(sup);
    cert.pass = BF(cert.measured) <= rat_to<BF>(cert.bound);
    return cert;
}

// sup over the stage-m planted chain of |q_n(w + z) - q_m(z)|, the
// telescoping invariant behind the density certificates.
inline double chain_sup(const StagePlan& plan, const std::vector<Stage>& stages, int m_from,
                        int grid = 50) {
    const int n = stages.back().n;
    const Stage& sm = stages[m_from - 1];
    Rat w = 0;
    for (int m = m_from; m <= n - 1; ++m) w += Rat(plan.radix.R[m - 1]);
    Rat inset = 0;
    for (int m = m_from; m <= n - 1; ++m) {
        Rat t(1);
        for (int i = 0; i < m; ++i) t /= 10;
        inset += t;
    }
    const Rat R_m = Rat(plan.radix.R[m_from - 1]);
    Rat lo = inset, hi = R_m - inset;
    if (lo >= hi) return 0;
    BF sup = 0;
    BF l = rat_to<BF>(lo), len = rat_to<BF>(hi - lo), wre = rat_to<BF>(w);
    const ComplexPolynomial& qn = stages.back().q;
    for (int i = 0; i <= grid; ++i)
        for (int j = 0; j <= grid; ++j) {
            BF x = l + len * BF(i) / grid, y = l + len * BF(j) / grid;
            Cx<BF> a = qn.eval<BF>({x + wre, y});
            Cx<BF> b = sm.q.eval<BF>({x, y});
            BF e = cx_abs(Cx<BF>{a.re - b.re, a.im - b.im});
            if (e > sup) sup = e;
        }
    return to_double(sup);
}

// Exact uncovered area of S_n by the margin cubes, and the closed-form bound
// r_n^2 * 4 * R_{n-1} * 10^{-(n-1)}.
inline std::pair<Rat, Rat> uncovered_area(const StagePlan& plan, int n) {
    const Rat R_prev = n >= 2 ? Rat(plan.radix.R[n - 2]) : Rat(1);
    const Rat Rn = Rat(plan.radix.R[n - 1]);
    const long rn = plan.radix.r[n - 1];
    Rat m = plan.margin(n);
    Rat inner = R_prev - 2 * m;
    Rat exact = Rn * Rn - Rat(rn) * Rat(rn) * inner * inner;
    Rat bound = Rat(rn) * Rat(rn) * 4 * R_prev * m;
    return {exact, bound};
}

// The desk-scale default polynomial prefix: geometrically small targets that
// keep every stage fit inside the feasible regime (see README on the
// thin-channel wall).
inline std::vector<ComplexPolynomial> desk_polys(int count) {
    std::vector<ComplexPolynomial> out;
    out.push_back(constant_poly({Rat(0), Rat(0)}));
    Rat s(1, 4096);
    for (int k = 1; k < count; ++k) {
        std::vector<CxRat> mono(k + 1, CxRat{Rat(0), Rat(0)});
        mono[k] = {s, Rat(0)};
        out.push_back(poly_from_monomials(mono));
        s /= 4096;
    }
    return out;
}

}  // namespace soltower
