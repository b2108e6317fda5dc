#pragma once

// Kallin-style separation witnesses: one-variable polynomials certifying
// that hyperplane-separated box families (and product unions of planar
// squares) have polynomially convex unions.

#include <string>
#include <vector>

#include "soltower/boxes.hpp"
#include "soltower/decompose.hpp"
#include "soltower/runge.hpp"

namespace soltower {

struct KallinWitness {
    ComplexPolynomial p;   // acts through the complex coordinate below
    int complex_coord;     // 1-based index m: p(z) = p0(z_m)
    int axis;              // separating axis k (1-based), x_k = c
    Rat c;
    ApproxReport report;
    double supA = 0, supB = 0;  // certified on lifted sample grids
};

namespace detail {

inline Rect project_box(const Box& b, int m) {
    return Rect{b.iv[2 * m - 2].lo, b.iv[2 * m - 1].lo, b.iv[2 * m - 2].hi,
                b.iv[2 * m - 1].hi};
}

inline Rect bounding_rect(const std::vector<Box>& boxes, int m) {
    Rect r = project_box(boxes[0], m);
    for (const auto& b : boxes) {
        Rect q = project_box(b, m);
        r.x0 = rat_min(r.x0, q.x0);
        r.y0 = rat_min(r.y0, q.y0);
        r.x1 = rat_max(r.x1, q.x1);
        r.y1 = rat_max(r.y1, q.y1);
    }
    return r;
}

// Corner + face-grid samples of a box, projected to coordinate m.
inline std::vector<Cx<BF>> box_samples(const Box& b, int m, int g) {
    std::vector<Cx<BF>> out;
    BF x0 = rat_to<BF>(b.iv[2 * m - 2].lo), x1 = rat_to<BF>(b.iv[2 * m - 2].hi);
    BF y0 = rat_to<BF>(b.iv[2 * m - 1].lo), y1 = rat_to<BF>(b.iv[2 * m - 1].hi);
    for (int i = 0; i <= g; ++i)
        for (int j = 0; j <= g; ++j)
            out.push_back({x0 + (x1 - x0) * BF(i) / g, y0 + (y1 - y0) * BF(j) / g});
    return out;
}

}  // namespace detail

// K1 below {x_axis = c}, K2 above, both with positive gap; the witness is a
// one-variable polynomial in the complex coordinate containing that axis.
inline KallinWitness kallin_witness(const std::vector<Box>& K1, const std::vector<Box>& K2,
                                    int axis, const Rat& c, const Rat& bound = Rat(1, 3),
                                    const FitOptions& opts = {}) {
    if (K1.empty() || K2.empty()) throw std::invalid_argument("kallin: empty side");
    const int dim = K1[0].dim();
    if (axis < 1 || axis > dim) throw std::invalid_argument("kallin: axis out of range");
    for (const auto& b : K1)
        if (!(b.iv[axis - 1].hi < c))
            throw std::invalid_argument("kallin: K1 not strictly below the hyperplane");
    for (const auto& b : K2)
        if (!(b.iv[axis - 1].lo > c))
            throw std::invalid_argument("kallin: K2 not strictly above the hyperplane");

    KallinWitness w;
    w.axis = axis;
    w.c = c;
    w.complex_coord = (axis + 1) / 2;

    Rect A = detail::bounding_rect(K1, w.complex_coord);
    Rect B = detail::bounding_rect(K2, w.complex_coord);
    auto [p, rep] = separating_polynomial({A}, {B}, bound, opts);
    w.p = p;
    w.report = rep;

    BF supA = 0, supB = 0;
    for (const auto& b : K1)
        for (const auto& z : detail::box_samples(b, w.complex_coord, 12)) {
            BF e = cx_abs(w.p.eval<BF>(z));
            if (e > supA) supA = e;
        }
    for (const auto& b : K2)
        for (const auto& z : detail::box_samples(b, w.complex_coord, 12)) {
            auto v = w.p.eval<BF>(z);
            BF e = cx_abs(Cx<BF>{v.re - 1, v.im});
            if (e > supB) supB = e;
        }
    w.supA = to_double(supA);
    w.supB = to_double(supB);
    if (rat_to<BF>(bound) <= BF(w.supA) || rat_to<BF>(bound) <= BF(w.supB))
        throw std::logic_error("kallin: lifted samples exceed the bound");
    return w;
}

// Numeric witness for one hyperplane split of a decomposition certificate.
inline KallinWitness witness_for_split(const DecompositionResult& res, const CertNode& node,
                                       const FitOptions& opts = {}) {
    if (node.is_leaf) throw std::invalid_argument("witness_for_split: leaf node");
    std::vector<Box> lo, hi;
    auto collect = [&](const CertNode* n, std::vector<Box>& out, auto&& self) -> void {
        if (!n) return;
        if (n->is_leaf) {
            out.push_back(res.boxes[n->leaf_id].box);
            return;
        }
        self(n->lo.get(), out, self);
        self(n->hi.get(), out, self);
    };
    collect(node.lo.get(), lo, collect);
    collect(node.hi.get(), hi, collect);
    return kallin_witness(lo, hi, node.split.axis + 1, node.split.coord, Rat(1, 3), opts);
}

// The split with the widest separation gap; thin 2*delta splits cannot carry
// low-degree witnesses, so the numeric demonstration targets the best one.
inline const CertNode* widest_split(const DecompositionResult& res) {
    const CertNode* best = nullptr;
    Rat best_gap = 0;
    auto leaves_extent = [&](const CertNode* n, int axis, bool want_min, auto&& self) -> Rat {
        if (n->is_leaf) {
            const Box& b = res.boxes[n->leaf_id].box;
            return want_min ? b.iv[axis].lo : b.iv[axis].hi;
        }
        Rat a = self(n->lo.get(), axis, want_min, self);
        Rat b = self(n->hi.get(), axis, want_min, self);
        return want_min ? rat_min(a, b) : rat_max(a, b);
    };
    auto walk = [&](const CertNode* n, auto&& self) -> void {
        if (!n || n->is_leaf) return;
        Rat hi_of_lo = leaves_extent(n->lo.get(), n->split.axis, false, leaves_extent);
        Rat lo_of_hi = leaves_extent(n->hi.get(), n->split.axis, true, leaves_extent);
        Rat gap = lo_of_hi - hi_of_lo;
        if (!best || gap > best_gap) {
            best = n;
            best_gap = gap;
        }
        self(n->lo.get(), self);
        self(n->hi.get(), self);
    };
    walk(res.certificate.get(), walk);
    if (!best) throw std::invalid_argument("no splits in certificate");
    return best;
}

// The double-induction chain for a union of products K_i x L_j of planar
// squares: K-sweep steps for every fixed L_j, then the L-sweep.
struct ProductStep {
    int var;      // 1: polynomial in z_1 (K sweep), 2: polynomial in z_2
    int fixed_j;  // L index the K step runs under (0 for L-sweep steps)
    int u;        // separates the first u sets from set u+1
    ComplexPolynomial p;
    ApproxReport report;
    double supA = 0, supB = 0;
};

struct ProductUnionCertificate {
    std::vector<Rect> Ks, Ls;
    Rat bound{1, 10};
    std::vector<ProductStep> steps;
};

namespace detail {

inline double rect_sup(const ComplexPolynomial& p, const std::vector<Rect>& rects,
                       const CxRat& minus, int g) {
    BF sup = 0;
    Cx<BF> off = cxrat_to<BF>(minus);
    for (const auto& r : rects) {
        BF x0 = rat_to<BF>(r.x0), x1 = rat_to<BF>(r.x1);
        BF y0 = rat_to<BF>(r.y0), y1 = rat_to<BF>(r.y1);
        for (int i = 0; i <= g; ++i)
            for (int j = 0; j <= g; ++j) {
                Cx<BF> z{x0 + (x1 - x0) * BF(i) / g, y0 + (y1 - y0) * BF(j) / g};
                auto v = p.eval<BF>(z);
                BF e = cx_abs(Cx<BF>{v.re - off.re, v.im - off.im});
                if (e > sup) sup = e;
            }
    }
    return to_double(sup);
}

}  // namespace detail

inline ProductUnionCertificate product_union_certificate(const std::vector<Rect>& Ks,
                                                         const std::vector<Rect>& Ls,
                                                         const FitOptions& opts = {}) {
    if (Ks.empty() || Ls.empty()) throw std::invalid_argument("products: empty family");
    auto check_disjoint = [](const std::vector<Rect>& v, const char* name) {
        for (size_t a = 0; a < v.size(); ++a)
            for (size_t b = a + 1; b < v.size(); ++b) {
                bool apart = v[a].x1 < v[b].x0 || v[b].x1 < v[a].x0 || v[a].y1 < v[b].y0 ||
                             v[b].y1 < v[a].y0;
                if (!apart) throw std::invalid_argument(std::string(name) + " not disjoint");
            }
    };
    check_disjoint(Ks, "K family");
    check_disjoint(Ls, "L family");

    ProductUnionCertificate cert;
    cert.Ks = Ks;
    cert.Ls = Ls;

    const int a = static_cast<int>(Ks.size());
    const int b = static_cast<int>(Ls.size());
    auto emit = [&](const std::vector<Rect>& fam, int u, int var, int fixed_j) {
        std::vector<Region> A(fam.begin(), fam.begin() + u);
        std::vector<Region> B{fam[u]};
        ProductStep step;
        step.var = var;
        step.fixed_j = fixed_j;
        step.u = u;
        try {
            auto [p, rep] = separating_polynomial(A, B, cert.bound, opts);
            step.p = p;
            step.report = rep;
        } catch (ApproximationFailure& f) {
            throw ApproximationFailure("product step (var " + std::to_string(var) + ", u " +
                                           std::to_string(u) + "): " + f.what(),
                                       f.best_report, f.best_poly);
        }
        std::vector<Rect> firstu(fam.begin(), fam.begin() + u);
        step.supA = detail::rect_sup(step.p, firstu, {Rat(0), Rat(0)}, 24);
        step.supB = detail::rect_sup(step.p, {fam[u]}, {Rat(1), Rat(0)}, 24);
        cert.steps.push_back(std::move(step));
    };
    for (int j = 1; j <= b; ++j)
        for (int u = 1; u < a; ++u) emit(Ks, u, 1, j);
    for (int v = 1; v < b; ++v) emit(Ls, v, 2, 0);
    return cert;
}

// Re-verifies bounds on fresh grids and the proof order of the chain.
inline bool replay_product_certificate(const ProductUnionCertificate& cert,
                                       std::string* why = nullptr, int grid = 40) {
    const int a = static_cast<int>(cert.Ks.size());
    const int b = static_cast<int>(cert.Ls.size());
    const size_t want = static_cast<size_t>(b) * (a - 1) + (b - 1);
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (cert.steps.size() != want) return fail("step count does not match the induction");
    size_t s = 0;
    for (int j = 1; j <= b; ++j)
        for (int u = 1; u < a; ++u, ++s) {
            if (cert.steps[s].var != 1 || cert.steps[s].fixed_j != j || cert.steps[s].u != u)
                return fail("K-sweep steps out of order");
        }
    for (int v = 1; v < b; ++v, ++s) {
        if (cert.steps[s].var != 2 || cert.steps[s].u != v) return fail("L-sweep steps out of order");
    }
    double bound = to_double(rat_to<BF>(cert.bound));
    for (const auto& step : cert.steps) {
        const auto& fam = step.var == 1 ? cert.Ks : cert.Ls;
        std::vector<Rect> firstu(fam.begin(), fam.begin() + step.u);
        double sa = detail::rect_sup(step.p, firstu, {Rat(0), Rat(0)}, grid);
        double sb = detail::rect_sup(step.p, {fam[step.u]}, {Rat(1), Rat(0)}, grid);
        if (sa >= bound || sb >= bound) return fail("step bound violated on replay grid");
    }
    if (why) why->clear();
    return true;
}

}  // namespace soltower
