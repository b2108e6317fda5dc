#pragma once

// The general staged construction on towers: S-set validation, return sets,
// delta-fine partitions, center-cube selection, cube collections, rescaled
// almost-polynomially-convex decompositions, stage fits, Condition-(D)
// certificates, and the E_n measure ledger. Numeric end-to-end for d = 1 on
// the exact solenoid model.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "soltower/construction.hpp"
#include "soltower/decompose.hpp"
#include "soltower/fitter.hpp"
#include "soltower/solenoid.hpp"

namespace soltower {

// Exact action model: the solenoid translated by its dense R^2 copy.
// B_n is the kernel of the level-n projection.
class SolenoidModel {
  public:
    explicit SolenoidModel(RadixSequence seq, bool exact = true)
        : seq_(std::move(seq)), exact_(exact) {}

    const RadixSequence& radix() const { return seq_; }
    bool exact() const { return exact_; }
    int depth() const { return static_cast<int>(seq_.length()); }

    SolenoidPoint apply(const RatVec& z, const SolenoidPoint& x) const {
        return translate(x, z);
    }
    bool in_base(const SolenoidPoint& x, int n) const {
        for (int k = 0; k < seq_.dim; ++k)
            if (x.levels[n - 1][k] != 0) return false;
        return true;
    }
    SolenoidPoint base_point(int n) const {
        // deterministic representative: the identity element truncated at depth()
        SolenoidPoint p;
        p.seq = seq_;
        p.depth = depth();
        p.levels.assign(p.depth, RatVec(seq_.dim, Rat(0)));
        (void)n;
        return p;
    }
    static bool equal(const SolenoidPoint& a, const SolenoidPoint& b) {
        return serialize_point(a) == serialize_point(b);
    }

  private:
    RadixSequence seq_;
    bool exact_;
};

struct TowerData {
    std::vector<Rat> a;  // a_n, increasing, integer ratios

    Rat sum_ratio() const {
        Rat s = 0;
        for (size_t i = 0; i + 1 < a.size(); ++i) s += a[i] / a[i + 1];
        return s;
    }
    Rat ratio(int n) const { return a[n - 1] / a[n - 2]; }  // a_n / a_{n-1}
};

inline TowerData solenoid_tower(const RadixSequence& seq) {
    TowerData t;
    for (const auto& R : seq.R) t.a.push_back(Rat(R));
    return t;
}

struct TowerReport {
    bool exact = false;
    Rat sum_ratio;
    bool sset_disjoint = false;
    bool nested = false;
    std::vector<double> coverage;      // per level (estimate or exact 1)
    std::vector<double> coverage_ci;   // 3-sigma half width (0 when exact)
    int samples = 0;
};

// Enforces the Nested-Towers hypotheses (sum of ratios strictly below 1/2,
// integer ratios), then checks S-set disjointness, nesting and coverage,
// exactly for the exact model and statistically otherwise.
inline TowerReport validate_tower(const TowerData& t, const SolenoidModel& m, int samples = 200,
                                  std::uint64_t seed = 1) {
    if (t.a.size() < 2) throw std::invalid_argument("tower needs at least two levels");
    for (size_t i = 0; i + 1 < t.a.size(); ++i)
        if (t.a[i] <= 0 || t.a[i] >= t.a[i + 1])
            throw std::invalid_argument("tower-parameter error: a_n not increasing/positive");
    if (t.sum_ratio() >= Rat(1, 2))
        throw std::invalid_argument("tower-parameter error: sum a_n/a_{n+1} must be < 1/2");
    for (size_t n = 2; n <= t.a.size(); ++n)
        if (t.ratio(static_cast<int>(n)).get_den() != 1)
            throw std::invalid_argument("tower-parameter error: a_n/a_{n-1} must be an integer");

    TowerReport rep;
    rep.exact = m.exact();
    rep.sum_ratio = t.sum_ratio();
    const int levels = std::min<int>(static_cast<int>(t.a.size()), m.depth());

    // S-set disjointness on a test lattice of shifts (exact arithmetic either way)
    rep.sset_disjoint = true;
    for (int n = 1; n <= levels && rep.sset_disjoint; ++n) {
        auto x = m.base_point(n);
        const Rat& an = t.a[n - 1];
        std::vector<RatVec> shifts;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                shifts.push_back({an * Rat(i, 3), an * Rat(j, 3)});
        for (size_t p = 0; p < shifts.size(); ++p)
            for (size_t q = p + 1; q < shifts.size(); ++q) {
                if (SolenoidModel::equal(m.apply(shifts[p], x), m.apply(shifts[q], x)))
                    rep.sset_disjoint = false;
            }
    }
    // freeness spot check
    {
        auto x = m.base_point(1);
        if (SolenoidModel::equal(m.apply({Rat(1, 3), Rat(1, 7)}, x), x))
            rep.sset_disjoint = false;
    }

    // nesting and coverage
    rep.nested = true;
    Rng rng(seed);
    if (m.exact()) {
        // G = S_n B_n for every level: coverage exactly 1, nesting trivial
        for (int n = 1; n <= levels; ++n) {
            rep.coverage.push_back(1.0);
            rep.coverage_ci.push_back(0.0);
        }
        rep.samples = 0;
        // structural spot check: the factor map lands every sample in S_n x B_n
        for (int trial = 0; trial < 32; ++trial) {
            auto g = haar_sample(m.radix(), levels, 64, rng);
            for (int n = 1; n <= levels; ++n) {
                auto f = factor(g, n);
                for (int k = 0; k < m.radix().dim; ++k)
                    if (f.offset[k] < 0 || f.offset[k] >= Rat(m.radix().R[n - 1]))
                        rep.nested = false;
            }
        }
    } else {
        rep.samples = samples;
        for (int n = 1; n <= levels; ++n) {
            int hit = 0;
            for (int s = 0; s < samples; ++s) {
                auto g = haar_sample(m.radix(), levels, 64, rng);
                auto f = factor(g, n);
                bool inside = true;
                for (int k = 0; k < m.radix().dim; ++k)
                    if (f.offset[k] < 0 || f.offset[k] >= Rat(m.radix().R[n - 1])) inside = false;
                if (inside) ++hit;
            }
            double p = static_cast<double>(hit) / samples;
            rep.coverage.push_back(p);
            rep.coverage_ci.push_back(3.0 * std::sqrt(std::max(p * (1 - p), 1e-9) / samples));
        }
    }
    return rep;
}

struct ReturnSet {
    int target_cell = 1;
    std::vector<RatVec> pts;
    Rat min_spacing;  // pairwise L_inf minimum, exact
};

// R_n^l(x) = {z in S_n : T_z x in B_{n-1}^l}; exact lattice for the solenoid.
inline std::vector<ReturnSet> return_sets(const SolenoidPoint& x, int n, int cells,
                                          const TowerData& t, const SolenoidModel& m) {
    if (!m.in_base(x, n)) throw std::invalid_argument("return_sets: x not in B_n");
    const Rat& a_prev = t.a[n - 2];
    const Rat& a_n = t.a[n - 1];
    std::vector<ReturnSet> out;
    for (int cell = 1; cell <= cells; ++cell) {
        ReturnSet rs;
        rs.target_cell = cell;
        for (Rat zx = 0; zx < a_n; zx += a_prev)
            for (Rat zy = 0; zy < a_n; zy += a_prev) {
                RatVec z{zx, zy};
                if (m.in_base(m.apply(z, x), n - 1)) rs.pts.push_back(z);
            }
        // exact minimum pairwise spacing
        bool first = true;
        for (size_t i = 0; i < rs.pts.size(); ++i)
            for (size_t j = i + 1; j < rs.pts.size(); ++j) {
                Rat d = rat_max(rat_abs(rs.pts[i][0] - rs.pts[j][0]),
                                rat_abs(rs.pts[i][1] - rs.pts[j][1]));
                if (first || d < rs.min_spacing) rs.min_spacing = d;
                first = false;
            }
        if (first) rs.min_spacing = a_n;  // singleton or empty
        out.push_back(std::move(rs));
    }
    return out;
}

// Exact Hausdorff distance between finite point sets under L_inf.
inline Rat hausdorff(const std::vector<RatVec>& A, const std::vector<RatVec>& B) {
    auto one_sided = [](const std::vector<RatVec>& P, const std::vector<RatVec>& Q) {
        Rat worst = 0;
        for (const auto& p : P) {
            bool first = true;
            Rat best = 0;
            for (const auto& q : Q) {
                Rat d = rat_max(rat_abs(p[0] - q[0]), rat_abs(p[1] - q[1]));
                if (first || d < best) best = d;
                first = false;
            }
            if (Q.empty()) best = Rat(1000000);
            if (best > worst) worst = best;
        }
        return worst;
    };
    return rat_max(one_sided(A, B), one_sided(B, A));
}

struct PartitionData {
    int level = 0;
    Rat delta;
    std::vector<SolenoidPoint> reps;  // one deterministic representative per cell

    int cells() const { return static_cast<int>(reps.size()); }
};

// The solenoid's return sets are independent of the base point, so the
// delta-fine partition is the single cell with the identity representative.
inline PartitionData delta_fine_partition(const TowerData& t, int n, const Rat& delta,
                                          const SolenoidModel& m, int sample_pairs = 8,
                                          std::uint64_t seed = 3) {
    if (delta <= 0) throw std::invalid_argument("partition: delta must be positive");
    PartitionData part;
    part.level = n;
    part.delta = delta;
    part.reps.push_back(m.base_point(n));

    // verify fineness through the interface on sampled same-cell pairs
    Rng rng(seed);
    auto ref = return_sets(part.reps[0], n, 1, t, m)[0];
    for (int s = 0; s < sample_pairs; ++s) {
        // another point of B_n: shift the representative inside the fiber
        auto y = part.reps[0];
        if (y.depth > n) {
            long idx = static_cast<long>(rng.below(static_cast<std::uint64_t>(
                m.radix().r[n])));
            Rat Rn(m.radix().R[n - 1]);
            for (int lvl = n; lvl < y.depth; ++lvl)
                for (int k = 0; k < m.radix().dim; ++k)
                    y.levels[lvl][k] = rat_mod(y.levels[lvl][k] + Rat(idx) * Rn,
                                               Rat(m.radix().R[lvl]));
        }
        if (!m.in_base(y, n)) continue;
        auto rs = return_sets(y, n, 1, t, m)[0];
        if (hausdorff(ref.pts, rs.pts) >= delta)
            throw std::logic_error("partition cell violates the d_H fineness bound");
    }
    return part;
}

// Detects a fineness violation in a batch of per-point return sets assigned
// to one cell (the mutation-test hook).
inline std::optional<std::pair<int, int>> partition_fineness_violation(
    const std::vector<std::vector<RatVec>>& sets, const Rat& delta) {
    for (size_t i = 0; i < sets.size(); ++i)
        for (size_t j = i + 1; j < sets.size(); ++j)
            if (hausdorff(sets[i], sets[j]) >= delta)
                return std::make_pair(static_cast<int>(i), static_cast<int>(j));
    return std::nullopt;
}

// One aligned copy of S_{n-1} per 1/2^{2d} sub-cube of S_n, nearest the
// sub-cube center, ties toward the lattice origin.
inline std::vector<RatVec> choose_centers(const TowerData& t, int n) {
    const Rat a = t.a[n - 2], A = t.a[n - 1];
    Rat rho = A / a;
    if (rho.get_den() != 1) throw std::invalid_argument("choose_centers: ratio not integral");
    if (rho < 2) throw std::invalid_argument("choose_centers: no room at ratio 1");
    auto pick = [&](int eps) {
        Rat kmin = Rat(rat_ceil(Rat(eps) * rho / 2));
        Rat kmax = Rat(rat_floor(Rat(eps + 1) * rho / 2 - 1));
        if (kmin > kmax) throw std::invalid_argument("choose_centers: no room");
        Rat target = Rat(eps) * rho / 2 + rho / 4 - Rat(1, 2);
        Rat k = Rat(nearest_int(target));
        if (k < kmin) k = kmin;
        if (k > kmax) k = kmax;
        return k;
    };
    std::vector<RatVec> centers;
    for (int ex = 0; ex < 2; ++ex)
        for (int ey = 0; ey < 2; ++ey) centers.push_back({pick(ex) * a, pick(ey) * a});
    return centers;
}

struct CubeItem {
    RatVec corner;       // lower corner; the cube is corner + [0, a_{n-1})^2
    bool is_center = false;
    int center_k = -1;   // 1..4 for center cubes
};

struct Collection {
    std::vector<CubeItem> cubes;
    int dropped = 0;  // lambda cubes displaced by center cubes
};

inline Collection assemble_collection(const std::vector<RatVec>& lambdas,
                                      const std::vector<RatVec>& centers, const TowerData& t,
                                      int n) {
    const Rat a = t.a[n - 2];
    Collection col;
    for (size_t k = 0; k < centers.size(); ++k)
        col.cubes.push_back(CubeItem{centers[k], true, static_cast<int>(k) + 1});
    for (const auto& l : lambdas) {
        bool meets_center = false;
        for (const auto& c : centers) {
            if (rat_abs(l[0] - c[0]) < a && rat_abs(l[1] - c[1]) < a) meets_center = true;
        }
        if (meets_center)
            ++col.dropped;
        else
            col.cubes.push_back(CubeItem{l, false, -1});
    }
    const long limit = 16;  // (2^{2d})^2 for d = 1
    if (col.dropped > limit) throw std::logic_error("collection drops too many cubes");
    // pairwise disjointness, exact (half-open cubes)
    for (size_t i = 0; i < col.cubes.size(); ++i)
        for (size_t j = i + 1; j < col.cubes.size(); ++j) {
            const auto& p = col.cubes[i].corner;
            const auto& q = col.cubes[j].corner;
            if (rat_abs(p[0] - q[0]) < a && rat_abs(p[1] - q[1]) < a)
                throw std::logic_error("collection cubes overlap");
        }
    return col;
}

struct ConditionD {
    int k = 0, n = 0;
    CxRat w{Rat(0), Rat(0)};
    Rat bound;
    Rat lo, hi;  // measurement square [lo, hi]^2 in the planted frame
    double measured = 0;
    bool pass = false;
};

struct GeneralStage {
    int n = 0;
    Rat a_n, a_prev;
    ComplexPolynomial q;
    Rat delta_n{0};
    Collection collection;
    Rat dec_delta_unit{0};
    Rat e_decomposition{0}, e_replaced{0}, e_uncovered{0}, e_total{0};
    ApproxReport report;
    std::vector<ConditionD> condition_d;
    std::vector<RatVec> centers;
    // chain bookkeeping: the lex-smallest surviving lambda cube per stage
    RatVec chain_lambda;
};

struct TowersPlan {
    RadixSequence radix;                   // a_n = R_n
    std::vector<ComplexPolynomial> polys;
    std::vector<int> degree_caps;
    int grid_density = 48;
    int precision_bits = 0;
    int cert_grid = 50;

    Rat eps(int n) const {  // 2^{-n}
        Rat e(1);
        for (int i = 0; i < n; ++i) e /= 2;
        return e;
    }
    int cap(int n) const {
        if (degree_caps.empty()) return 32;
        size_t i = std::min(static_cast<size_t>(n) - 1, degree_caps.size() - 1);
        return degree_caps[i];
    }
};

inline GeneralStage make_general_stage1(const TowersPlan& plan) {
    GeneralStage s;
    s.n = 1;
    s.a_n = Rat(plan.radix.R[0]);
    s.a_prev = 1;
    s.q = plan.polys.at(0);
    s.report.success = true;
    s.report.achieved_eps = 0;
    s.e_total = 0;
    ConditionD d;
    d.k = 1;
    d.n = 1;
    d.bound = 0;
    d.lo = 0;
    d.hi = s.a_n;
    d.measured = 0;
    d.pass = true;
    s.condition_d.push_back(d);
    return s;
}

namespace detail {

// Modulus-of-continuity parameter: delta_n with |q(z) - q(w)| < 10^{-2n}/2
// whenever |z - w| < delta_n on S_{n-1}^{+1}, from a sampled derivative bound.
inline Rat modulus_delta(const ComplexPolynomial& q, const Rat& a_prev, int n, int grid = 24) {
    ComplexPolynomial dq = q.derivative();
    BF lo = rat_to<BF>(Rat(-1)), hi = rat_to<BF>(a_prev + 1);
    BF len = hi - lo;
    BF maxd = 0;
    for (int i = 0; i <= grid; ++i)
        for (int j = 0; j <= grid; ++j) {
            Cx<BF> z{lo + len * BF(i) / grid, lo + len * BF(j) / grid};
            BF m = cx_abs(dq.eval<BF>(z));
            if (m > maxd) maxd = m;
        }
    Rat target(1);
    for (int i = 0; i < 2 * n; ++i) target /= 10;
    target /= 2;
    // delta = target / (2 * maxd + 1), rounded down to a power of two
    double bound = to_double(rat_to<BF>(target) / (2 * maxd + 1));
    Rat delta(1);
    while (delta.get_d() > bound && delta > Rat(1, Int(1) << 62)) delta /= 2;
    if (delta > 1) delta = 1;
    return delta;
}

}  // namespace detail

inline GeneralStage general_stage(const TowersPlan& plan, const GeneralStage& prev,
                                  const TowerData& t, const SolenoidModel& m) {
    const int n = prev.n + 1;
    if (n > static_cast<int>(t.a.size())) throw std::invalid_argument("stage beyond tower");
    if (n > static_cast<int>(plan.polys.size()))
        throw std::invalid_argument("stage beyond polynomial list");

    GeneralStage s;
    s.n = n;
    s.a_prev = t.a[n - 2];
    s.a_n = t.a[n - 1];
    const Rat a = s.a_prev, A = s.a_n;

    s.delta_n = detail::modulus_delta(prev.q, a, n);
    auto part = delta_fine_partition(t, n, s.delta_n, m);
    const auto& rep_point = part.reps[0];

    auto rsets = return_sets(rep_point, n, 1, t, m);
    const auto& lambdas = rsets[0].pts;
    s.centers = choose_centers(t, n);
    s.collection = assemble_collection(lambdas, s.centers, t, n);

    // chain pick: lex-smallest surviving lambda cube
    {
        bool found = false;
        for (const auto& c : s.collection.cubes) {
            if (c.is_center) continue;
            if (!found || c.corner[0] < s.chain_lambda[0] ||
                (c.corner[0] == s.chain_lambda[0] && c.corner[1] < s.chain_lambda[1])) {
                s.chain_lambda = c.corner;
                found = true;
            }
        }
        if (!found) throw std::logic_error("no surviving lambda cube for the chain");
    }

    // rescale to unit cubes (half-open) and decompose with eps = 2^{-n}
    std::vector<UnitCube> unit;
    for (const auto& c : s.collection.cubes)
        unit.push_back(UnitCube{{c.corner[0] / a + Rat(1, 2), c.corner[1] / a + Rat(1, 2)}});
    DecompositionResult dec = decompose(unit, plan.eps(n), /*half_open=*/true);
    s.dec_delta_unit = dec.delta;

    // fit F_n on the rescaled-back boxes of U
    PiecewiseTarget target;
    for (const auto& leaf : dec.boxes) {
        Rect r{leaf.box.iv[0].lo * a, leaf.box.iv[1].lo * a, leaf.box.iv[0].hi * a,
               leaf.box.iv[1].hi * a};
        const CubeItem& src = s.collection.cubes[leaf.source_cube];
        Piece piece;
        piece.region = r;
        if (src.is_center) {
            piece.target = plan.polys[n - 1];
        } else {
            piece.target = prev.q;
        }
        piece.shift = {src.corner[0], src.corner[1]};
        target.pieces.push_back(std::move(piece));
    }
    FitOptions opts{plan.cap(n), plan.grid_density, plan.precision_bits};
    try {
        auto [q, rep] = fit_polynomial(target, plan.eps(n), opts);
        s.q = q;
        s.report = rep;
    } catch (ApproximationFailure& f) {
        throw ApproximationFailure("general stage " + std::to_string(n) + " cell 1: " + f.what(),
                                   f.best_report, f.best_poly);
    }

    // E_n ledger, exact
    const Rat total = A * A;
    s.e_decomposition = dec.removed_measure * a * a / total;
    s.e_replaced = Rat(static_cast<long>(s.centers.size())) * a * a / total;
    {
        // coverage of S_n by lambda cubes plus centers
        Rat covered = Rat(static_cast<long>(s.collection.cubes.size() + s.collection.dropped)) *
                      a * a;
        s.e_uncovered = (total - covered) / total;
        if (s.e_uncovered < 0) s.e_uncovered = 0;
    }
    s.e_total = s.e_decomposition + s.e_replaced + s.e_uncovered;
    if (s.e_total >= plan.eps(n)) {
        std::ostringstream os;
        os << "budget violation: E_" << n << " = " << frac_str(s.e_total) << " >= 2^-" << n;
        throw std::runtime_error(os.str());
    }
    return s;
}

// Condition-(D) certificate for p_k against the last stage, following the
// planted center cube through the lex-smallest surviving lambda cubes.
inline ConditionD condition_d_check(const TowersPlan& plan, const std::vector<GeneralStage>& stages,
                                    int k) {
    const int n = stages.back().n;
    if (k < 1 || k > n) throw std::invalid_argument("condition_d: k out of range");
    ConditionD cert;
    cert.k = k;
    cert.n = n;

    // translation: the stage-k planted anchor plus later chain shifts
    Rat wx = 0, wy = 0;
    if (k >= 2) {
        wx += stages[k - 1].centers[0][0];
        wy += stages[k - 1].centers[0][1];
    }
    for (int m = k + 1; m <= n; ++m) {
        wx += stages[m - 1].chain_lambda[0];
        wy += stages[m - 1].chain_lambda[1];
    }
    cert.w = {wx, wy};

    // bound: stage-k fit budget (none for k = 1) plus the later stage budgets
    Rat bound = 0;
    for (int l = std::max(k, 2); l <= n; ++l) bound += plan.eps(l);
    cert.bound = bound;

    // measurement square: the planted S_{k-1} copy (S_1 itself for k = 1)
    // inset by the accumulated strip budget
    Rat side = k >= 2 ? stages[k - 2].a_n : stages[0].a_n;
    if (k == 1) side = stages[0].a_n;
    Rat inset = 0;
    for (int m = std::max(k, 2); m <= n; ++m) inset += plan.eps(m);
    cert.lo = inset;
    cert.hi = side - inset;
    if (cert.lo >= cert.hi) {
        cert.measured = 0;
        cert.pass = true;
        return cert;
    }

    const ComplexPolynomial& qn = stages.back().q;
    const ComplexPolynomial& pk = plan.polys[k - 1];
    const int G = plan.cert_grid;
    BF lo = rat_to<BF>(cert.lo), len = rat_to<BF>(cert.hi - cert.lo);
    BF wre = rat_to<BF>(wx), wim = rat_to<BF>(wy);
    BF sup = 0;
    for (int i = 0; i <= G; ++i)
        for (int j = 0; j <= G; ++j) {
            BF x = lo + len * BF(i) / G, y = lo + len * BF(j) / G;
            Cx<BF> ref = pk.eval<BF>({x, y});
            Cx<BF> got = qn.eval<BF>({x + wre, y + wim});
            BF e = cx_abs(Cx<BF>{got.re - ref.re, got.im - ref.im});
            if (e > sup) sup = e;
        }
    cert.measured = to_double(sup);
    cert.pass = BF(cert.measured) <= rat_to<BF>(cert.bound);
    return cert;
}

inline std::vector<GeneralStage> towers_build(const TowersPlan& plan, const TowerData& t,
                                              const SolenoidModel& m, int stages_wanted) {
    std::vector<GeneralStage> stages{make_general_stage1(plan)};
    while (static_cast<int>(stages.size()) < stages_wanted) {
        stages.push_back(general_stage(plan, stages.back(), t, m));
        auto& s = stages.back();
        for (int k = 1; k <= s.n; ++k) s.condition_d.push_back(condition_d_check(plan, stages, k));
    }
    return stages;
}

}  // namespace soltower
