#pragma once

// Exact axis-parallel box geometry in R^{2d}: unit cubes, the integer grid,
// sub-cubes, incidence, and the exact measure of a box union.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "soltower/rational.hpp"

namespace soltower {

struct Interval {
    Rat lo, hi;  // closed [lo, hi], lo <= hi

    Rat length() const { return hi - lo; }
};

struct Box {
    std::vector<Interval> iv;

    int dim() const { return static_cast<int>(iv.size()); }

    Rat volume() const {
        Rat v = 1;
        for (const auto& i : iv) v *= i.length();
        return v;
    }

    bool valid() const {
        for (const auto& i : iv)
            if (i.lo > i.hi) return false;
        return true;
    }

    bool nondegenerate() const {
        for (const auto& i : iv)
            if (i.lo >= i.hi) return false;
        return true;
    }

    bool contains(const Box& inner) const {
        for (int k = 0; k < dim(); ++k)
            if (inner.iv[k].lo < iv[k].lo || inner.iv[k].hi > iv[k].hi) return false;
        return true;
    }

    bool contains_point(const RatVec& p) const {
        for (int k = 0; k < dim(); ++k)
            if (p[k] < iv[k].lo || p[k] > iv[k].hi) return false;
        return true;
    }

    // Shrink by eps on every face; may become invalid.
    Box inset(const Rat& eps) const {
        Box b = *this;
        for (auto& i : b.iv) {
            i.lo += eps;
            i.hi -= eps;
        }
        return b;
    }

    bool operator==(const Box& o) const {
        if (dim() != o.dim()) return false;
        for (int k = 0; k < dim(); ++k)
            if (iv[k].lo != o.iv[k].lo || iv[k].hi != o.iv[k].hi) return false;
        return true;
    }
};

inline Box intersect(const Box& a, const Box& b) {
    Box r;
    r.iv.resize(a.dim());
    for (int k = 0; k < a.dim(); ++k) {
        r.iv[k].lo = rat_max(a.iv[k].lo, b.iv[k].lo);
        r.iv[k].hi = rat_min(a.iv[k].hi, b.iv[k].hi);
    }
    return r;
}

inline bool closed_disjoint(const Box& a, const Box& b) {
    for (int k = 0; k < a.dim(); ++k)
        if (a.iv[k].hi < b.iv[k].lo || b.iv[k].hi < a.iv[k].lo) return true;
    return false;
}

// Half-open semantics: cubes of the form q + [lo, hi) meet iff the open
// overlap test passes on every axis.
inline bool halfopen_disjoint(const Box& a, const Box& b) {
    for (int k = 0; k < a.dim(); ++k)
        if (a.iv[k].hi <= b.iv[k].lo || b.iv[k].hi <= a.iv[k].lo) return true;
    return false;
}

// Unit cube centered at q (closed by default; half_open marks q + [-1/2, 1/2)
// collections as in the closing Remark of the decomposition section).
struct UnitCube {
    RatVec center;

    Box box() const {
        Box b;
        b.iv.resize(center.size());
        for (size_t k = 0; k < center.size(); ++k) {
            b.iv[k].lo = center[k] - Rat(1, 2);
            b.iv[k].hi = center[k] + Rat(1, 2);
        }
        return b;
    }
};

// Componentwise nearest lattice point; frac > 1/2 rounds up, ties go down.
inline std::vector<Int> nearest_lattice(const RatVec& q) {
    std::vector<Int> r;
    r.reserve(q.size());
    for (const auto& c : q) r.push_back(nearest_int(c));
    return r;
}

inline Box grid_cube_box(const std::vector<Int>& lattice) {
    Box b;
    b.iv.resize(lattice.size());
    for (size_t k = 0; k < lattice.size(); ++k) {
        b.iv[k].lo = Rat(lattice[k]) - Rat(1, 2);
        b.iv[k].hi = Rat(lattice[k]) + Rat(1, 2);
    }
    return b;
}

// i_j in {-1, 0}: the 2^{2d} half-scale children of a unit cube.
struct SubCubeIndex {
    std::vector<int> i;

    Box sub_box(const UnitCube& q) const {
        Box b;
        b.iv.resize(i.size());
        for (size_t k = 0; k < i.size(); ++k) {
            b.iv[k].lo = q.center[k] + Rat(i[k], 2);
            b.iv[k].hi = q.center[k] + Rat(i[k] + 1, 2);
        }
        return b;
    }
};

struct HostGridCube {
    std::vector<Int> lattice;
    SubCubeIndex sub;
};

// The grid cube G = [q] + Q_0 hosting a sub-cube of Q. Deterministic
// sub-cube pick: the side of q the lattice point falls on.
inline HostGridCube host_grid_cube(const UnitCube& q) {
    HostGridCube h;
    h.lattice = nearest_lattice(q.center);
    h.sub.i.resize(q.center.size());
    for (size_t k = 0; k < q.center.size(); ++k) {
        h.sub.i[k] = (Rat(h.lattice[k]) >= q.center[k]) ? 0 : -1;
    }
    // The grid cube around the nearest lattice point always admits such a
    // sub-cube; keep the check hot.
    Box g = grid_cube_box(h.lattice);
    Box s = h.sub.sub_box(q);
    if (!g.contains(s) || !q.box().contains(s))
        throw std::logic_error("host_grid_cube: sub-cube containment failed");
    return h;
}

using LatticeKey = std::vector<long>;

inline LatticeKey lattice_key(const std::vector<Int>& v) {
    LatticeKey k;
    k.reserve(v.size());
    for (const auto& x : v) {
        if (!x.fits_slong_p()) throw std::overflow_error("lattice coordinate too large");
        k.push_back(x.get_si());
    }
    return k;
}

// Grid cubes (closed) meeting each input cube, exact interval tests.
// Preconditions: cubes pairwise disjoint (closed, or half-open when flagged).
inline std::map<LatticeKey, std::vector<int>> grid_incidence(
    const std::vector<UnitCube>& cubes, bool half_open = false) {
    if (cubes.empty()) throw std::invalid_argument("no cubes");
    const int dim = static_cast<int>(cubes[0].center.size());
    for (size_t a = 0; a < cubes.size(); ++a)
        for (size_t b = a + 1; b < cubes.size(); ++b) {
            bool dj = half_open ? halfopen_disjoint(cubes[a].box(), cubes[b].box())
                                : closed_disjoint(cubes[a].box(), cubes[b].box());
            if (!dj) throw std::invalid_argument("input cubes not pairwise disjoint");
        }
    std::map<LatticeKey, std::vector<int>> inc;
    for (size_t j = 0; j < cubes.size(); ++j) {
        const Box qb = cubes[j].box();
        // candidate lattice coordinates per axis
        std::vector<std::vector<long>> cand(dim);
        for (int k = 0; k < dim; ++k) {
            Int lo = rat_ceil(qb.iv[k].lo - Rat(1, 2));
            Int hi = rat_floor(qb.iv[k].hi + Rat(1, 2));
            for (Int v = lo; v <= hi; ++v) {
                // interiors must overlap: face-touching grid cubes carry no
                // mass of the cube and are not incident
                Rat glo = Rat(v) - Rat(1, 2), ghi = Rat(v) + Rat(1, 2);
                if (qb.iv[k].lo < ghi && glo < qb.iv[k].hi) cand[k].push_back(v.get_si());
            }
        }
        std::vector<size_t> idx(dim, 0);
        for (;;) {
            LatticeKey key(dim);
            for (int k = 0; k < dim; ++k) key[k] = cand[k][idx[k]];
            inc[key].push_back(static_cast<int>(j));
            int k = 0;
            while (k < dim && ++idx[k] == cand[k].size()) idx[k++] = 0;
            if (k == dim) break;
        }
    }
    return inc;
}

// Exact Lebesgue measure of a union of boxes: recursive coordinate sweep.
inline Rat measure_of_box_union_axis(const std::vector<Box>& boxes, int axis) {
    if (boxes.empty()) return 0;
    const int dim = boxes[0].dim();
    if (axis == dim - 1) {
        std::vector<Interval> ivs;
        for (const auto& b : boxes)
            if (b.iv[axis].lo < b.iv[axis].hi) ivs.push_back(b.iv[axis]);
        std::sort(ivs.begin(), ivs.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        Rat total = 0;
        Rat curlo, curhi;
        bool open = false;
        for (const auto& i : ivs) {
            if (!open) {
                curlo = i.lo;
                curhi = i.hi;
                open = true;
            } else if (i.lo <= curhi) {
                curhi = rat_max(curhi, i.hi);
            } else {
                total += curhi - curlo;
                curlo = i.lo;
                curhi = i.hi;
            }
        }
        if (open) total += curhi - curlo;
        return total;
    }
    std::vector<Rat> cuts;
    for (const auto& b : boxes) {
        cuts.push_back(b.iv[axis].lo);
        cuts.push_back(b.iv[axis].hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    Rat total = 0;
    for (size_t s = 0; s + 1 < cuts.size(); ++s) {
        Rat width = cuts[s + 1] - cuts[s];
        if (width == 0) continue;
        std::vector<Box> active;
        for (const auto& b : boxes)
            if (b.iv[axis].lo <= cuts[s] && b.iv[axis].hi >= cuts[s + 1]) active.push_back(b);
        if (!active.empty()) total += width * measure_of_box_union_axis(active, axis + 1);
    }
    return total;
}

inline Rat measure_of_box_union(const std::vector<Box>& boxes) {
    return measure_of_box_union_axis(boxes, 0);
}

}  // namespace soltower
