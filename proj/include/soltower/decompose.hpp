#pragma once

// Almost-polynomially-convex decomposition of disjoint unit cubes:
// delta-strips are removed around grid hyperplanes and around the defining
// hyperplanes of cubes within each grid cube (host cubes get the two-step
// treatment: partition by the host's own planes first, then strip only the
// cubes meeting each partition box). What survives is a union of closed
// boxes separated by open strips of width 2*delta, together with a
// hyperplane-split certificate whose replay re-verifies the separation and
// the sweep order of the grid induction.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "soltower/boxes.hpp"
#include "soltower/rational.hpp"

namespace soltower {

struct Strip {
    int axis = 0;
    Rat coord;        // strip is {|x_axis - coord| < delta}
    Rat delta;
    int kind = 0;     // 0 grid plane, 1 host-cube partition plane, 2 in-cell cube plane
    LatticeKey scope; // empty for global grid strips
};

struct LeafBox {
    Box box;
    int source_cube = -1;
    LatticeKey grid;
};

struct CertSplit {
    int axis = 0;
    Rat coord;
    int kind = 0;  // 0 grid pass, 1 partition plane, 2 inner cube plane
};

struct CertNode {
    bool is_leaf = false;
    int leaf_id = -1;
    CertSplit split;
    std::unique_ptr<CertNode> lo, hi;
};

struct DecompositionResult {
    int dim = 0;
    bool half_open = false;
    Rat eps;
    Rat delta;
    std::vector<UnitCube> cubes;
    std::vector<HostGridCube> hosts;   // per cube: host grid cube + retained sub-cube
    std::vector<LeafBox> boxes;        // the boxes forming U (pairwise disjoint)
    std::vector<Strip> strips;
    Rat u_volume;
    Rat removed_measure;               // sum vol(Q_j) - vol(U), exact
    std::vector<Rat> per_cube_loss;
    std::unique_ptr<CertNode> certificate;
};

namespace detail {

// Interior overlap: a cube contributes cells and strips to a box only when
// it carries mass there.
inline bool cube_meets_box(const Box& cube, const Box& b) {
    for (int k = 0; k < cube.dim(); ++k)
        if (cube.iv[k].lo >= b.iv[k].hi || b.iv[k].lo >= cube.iv[k].hi) return false;
    return true;
}

struct GridCubeWork {
    LatticeKey key;
    std::vector<CertSplit> planes;  // kind 1 then kind 2, canonical order
    std::vector<int> leaf_ids;
};

inline void emit_cells(const Box& clip, int cube_idx, const LatticeKey& key,
                       const std::vector<std::vector<Rat>>& cuts, const Rat& delta,
                       std::vector<LeafBox>& out) {
    const int dim = clip.dim();
    std::vector<std::vector<Rat>> edges(dim);
    for (int k = 0; k < dim; ++k) {
        edges[k].push_back(clip.iv[k].lo);
        for (const Rat& c : cuts[k])
            if (c > clip.iv[k].lo && c < clip.iv[k].hi) edges[k].push_back(c);
        edges[k].push_back(clip.iv[k].hi);
    }
    std::vector<size_t> idx(dim, 0);
    for (;;) {
        Box cell;
        cell.iv.resize(dim);
        bool ok = true;
        for (int k = 0; k < dim; ++k) {
            cell.iv[k].lo = edges[k][idx[k]] + delta;
            cell.iv[k].hi = edges[k][idx[k] + 1] - delta;
            if (cell.iv[k].lo >= cell.iv[k].hi) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(LeafBox{cell, cube_idx, key});
        int k = 0;
        while (k < dim && ++idx[k] == edges[k].size() - 1) idx[k++] = 0;
        if (k == dim) break;
    }
}

// Splits leaves along this grid cube's recorded planes, canonical order.
inline std::unique_ptr<CertNode> chain_split(const std::vector<int>& ids,
                                             const std::vector<LeafBox>& leaves,
                                             const std::vector<CertSplit>& planes,
                                             size_t from, const Rat& delta) {
    if (ids.size() == 1) {
        auto n = std::make_unique<CertNode>();
        n->is_leaf = true;
        n->leaf_id = ids[0];
        return n;
    }
    for (size_t p = from; p < planes.size(); ++p) {
        std::vector<int> lo, hi;
        bool clean = true;
        for (int id : ids) {
            const Box& b = leaves[id].box;
            if (b.iv[planes[p].axis].hi <= planes[p].coord - delta)
                lo.push_back(id);
            else if (b.iv[planes[p].axis].lo >= planes[p].coord + delta)
                hi.push_back(id);
            else {
                clean = false;
                break;
            }
        }
        if (!clean || lo.empty() || hi.empty()) continue;
        auto n = std::make_unique<CertNode>();
        n->split = planes[p];
        n->lo = chain_split(lo, leaves, planes, p + 1, delta);
        n->hi = chain_split(hi, leaves, planes, p + 1, delta);
        return n;
    }
    throw std::logic_error("certificate: leaves not separable by recorded planes");
}

inline std::unique_ptr<CertNode> build_grid_tree(
    const std::vector<int>& ids, const std::vector<LeafBox>& leaves,
    const std::map<LatticeKey, GridCubeWork>& work, int axis, const Rat& delta) {
    // Descend axes from the outermost sweep pass; a single leaf may still
    // carry pending in-cube planes, so the per-cube chain runs at axis < 0.
    while (axis >= 0) {
        long vmin = leaves[ids[0]].grid[axis], vmax = vmin;
        for (int id : ids) {
            vmin = std::min(vmin, leaves[id].grid[axis]);
            vmax = std::max(vmax, leaves[id].grid[axis]);
        }
        if (vmin != vmax) {
            std::vector<int> lo, hi;
            for (int id : ids)
                (leaves[id].grid[axis] == vmax ? hi : lo).push_back(id);
            auto n = std::make_unique<CertNode>();
            n->split.axis = axis;
            n->split.coord = Rat(vmax) - Rat(1, 2);
            n->split.kind = 0;
            n->lo = build_grid_tree(lo, leaves, work, axis, delta);
            n->hi = build_grid_tree(hi, leaves, work, axis, delta);
            return n;
        }
        --axis;
    }
    const auto& w = work.at(leaves[ids[0]].grid);
    return chain_split(ids, leaves, w.planes, 0, delta);
}

}  // namespace detail

inline Rat per_cube_loss_bound(int dim, const Rat& delta) {
    // delta * 2^{7d} with 2d = dim
    Rat b = delta;
    for (int i = 0; i < 7 * (dim / 2); ++i) b *= 2;
    return b;
}

inline DecompositionResult decompose(const std::vector<UnitCube>& cubes, const Rat& eps,
                                     bool half_open = false) {
    if (cubes.empty()) throw std::invalid_argument("decompose: no cubes");
    if (eps <= 0) throw std::invalid_argument("decompose: eps must be positive");
    const int dim = static_cast<int>(cubes[0].center.size());
    if (dim % 2 != 0 || dim < 2) throw std::invalid_argument("decompose: dim must be even");
    for (const auto& c : cubes)
        if (static_cast<int>(c.center.size()) != dim)
            throw std::invalid_argument("decompose: mixed dimensions");

    DecompositionResult res;
    res.dim = dim;
    res.half_open = half_open;
    res.eps = eps;
    res.cubes = cubes;
    const long M = static_cast<long>(cubes.size());
    res.delta = eps / (Rat(M) * Rat(Int(1) << (7 * (dim / 2))));
    const Rat& delta = res.delta;

    // incidence also enforces pairwise disjointness
    auto incidence = grid_incidence(cubes, half_open);

    res.hosts.reserve(cubes.size());
    std::map<LatticeKey, int> host_of_grid;
    for (size_t j = 0; j < cubes.size(); ++j) {
        res.hosts.push_back(host_grid_cube(cubes[j]));
        LatticeKey key = lattice_key(res.hosts[j].lattice);
        auto [it, fresh] = host_of_grid.emplace(key, static_cast<int>(j));
        if (!fresh) throw std::logic_error("two cubes host sub-cubes in one grid cube");
    }

    std::map<LatticeKey, detail::GridCubeWork> work;

    for (const auto& [key, cube_ids] : incidence) {
        std::vector<Int> lat(key.begin(), key.end());
        Box gbox = grid_cube_box(lat);
        detail::GridCubeWork w;
        w.key = key;

        auto hit = host_of_grid.find(key);
        int host = (hit == host_of_grid.end()) ? -1 : hit->second;

        // Partition planes: the host cube's defining hyperplanes inside G.
        std::vector<std::vector<Rat>> part(dim);
        if (host >= 0) {
            Box hb = cubes[host].box();
            for (int k = 0; k < dim; ++k)
                for (const Rat& c : {hb.iv[k].lo, hb.iv[k].hi})
                    if (c > gbox.iv[k].lo && c < gbox.iv[k].hi) part[k].push_back(c);
            for (int k = 0; k < dim; ++k) std::sort(part[k].begin(), part[k].end());
        }

        std::set<std::pair<int, Rat>> kind2;  // dedup of in-cell plane coords

        // enumerate partition boxes
        std::vector<std::vector<Rat>> edges(dim);
        for (int k = 0; k < dim; ++k) {
            edges[k].push_back(gbox.iv[k].lo);
            for (const Rat& c : part[k]) edges[k].push_back(c);
            edges[k].push_back(gbox.iv[k].hi);
        }
        std::vector<size_t> idx(dim, 0);
        for (;;) {
            Box B;
            B.iv.resize(dim);
            bool nonempty = true;
            for (int k = 0; k < dim; ++k) {
                B.iv[k].lo = edges[k][idx[k]];
                B.iv[k].hi = edges[k][idx[k] + 1];
                if (B.iv[k].lo >= B.iv[k].hi) nonempty = false;
            }
            if (nonempty) {
                std::vector<int> inner;
                for (int u : cube_ids)
                    if (detail::cube_meets_box(cubes[u].box(), B)) inner.push_back(u);
                std::vector<std::vector<Rat>> cuts(dim);
                for (int u : inner) {
                    Box ub = cubes[u].box();
                    for (int k = 0; k < dim; ++k)
                        for (const Rat& c : {ub.iv[k].lo, ub.iv[k].hi})
                            if (c > B.iv[k].lo && c < B.iv[k].hi) {
                                cuts[k].push_back(c);
                                kind2.insert({k, c});
                            }
                }
                for (int k = 0; k < dim; ++k) {
                    std::sort(cuts[k].begin(), cuts[k].end());
                    cuts[k].erase(std::unique(cuts[k].begin(), cuts[k].end()), cuts[k].end());
                }
                for (int u : inner) {
                    Box clip = intersect(cubes[u].box(), B);
                    if (!clip.valid()) continue;
                    size_t before = res.boxes.size();
                    detail::emit_cells(clip, u, key, cuts, delta, res.boxes);
                    for (size_t t = before; t < res.boxes.size(); ++t)
                        w.leaf_ids.push_back(static_cast<int>(t));
                }
            }
            int k = 0;
            while (k < dim && ++idx[k] == edges[k].size() - 1) idx[k++] = 0;
            if (k == dim) break;
        }

        // canonical plane order: partition planes, then in-cell planes,
        // axis descending, coordinate descending
        for (int k = dim - 1; k >= 0; --k)
            for (auto it2 = part[k].rbegin(); it2 != part[k].rend(); ++it2) {
                w.planes.push_back(CertSplit{k, *it2, 1});
                res.strips.push_back(Strip{k, *it2, delta, 1, key});
            }
        std::vector<CertSplit> k2;
        for (const auto& [axis, coord] : kind2) k2.push_back(CertSplit{axis, coord, 2});
        std::sort(k2.begin(), k2.end(), [](const CertSplit& a, const CertSplit& b) {
            if (a.axis != b.axis) return a.axis > b.axis;
            return a.coord > b.coord;
        });
        for (const auto& s : k2) {
            w.planes.push_back(s);
            res.strips.push_back(Strip{s.axis, s.coord, delta, 2, key});
        }
        if (!w.leaf_ids.empty()) work.emplace(key, std::move(w));
    }

    if (res.boxes.empty()) throw std::runtime_error("decompose: empty U (structural error)");

    // global grid strips within the occupied lattice range
    {
        std::vector<long> lo(dim, 0), hi(dim, 0);
        bool first = true;
        for (const auto& [key, ids] : incidence) {
            for (int k = 0; k < dim; ++k) {
                if (first || key[k] < lo[k]) lo[k] = key[k];
                if (first || key[k] > hi[k]) hi[k] = key[k];
            }
            first = false;
        }
        for (int k = 0; k < dim; ++k)
            for (long v = lo[k]; v < hi[k]; ++v)
                res.strips.push_back(Strip{k, Rat(v) + Rat(1, 2), delta, 0, {}});
    }

    res.u_volume = 0;
    res.per_cube_loss.assign(cubes.size(), Rat(1));
    for (const auto& leaf : res.boxes) {
        Rat v = leaf.box.volume();
        res.u_volume += v;
        res.per_cube_loss[leaf.source_cube] -= v;
    }
    res.removed_measure = Rat(M) - res.u_volume;
    if (res.removed_measure >= eps)
        throw std::logic_error("decompose: removed measure not below eps");
    Rat loss_bound = per_cube_loss_bound(dim, delta);
    for (size_t j = 0; j < cubes.size(); ++j)
        if (res.per_cube_loss[j] > loss_bound)
            throw std::logic_error("decompose: per-cube loss exceeds delta*2^{7d}");

    // retention: B_j^{-delta} inside a single leaf (Q_j^{-delta} for grid cubes)
    for (size_t j = 0; j < cubes.size(); ++j) {
        Box want = res.hosts[j].sub.sub_box(cubes[j]).inset(delta);
        bool grid_input = true;
        for (int k = 0; k < dim; ++k)
            if (cubes[j].center[k].get_den() != 1) grid_input = false;
        if (grid_input) want = cubes[j].box().inset(delta);
        if (!want.valid()) continue;
        bool found = false;
        for (const auto& leaf : res.boxes)
            if (leaf.source_cube == static_cast<int>(j) && leaf.box.contains(want)) {
                found = true;
                break;
            }
        if (!found) throw std::logic_error("decompose: retained sub-cube lost");
    }

    std::vector<int> all_ids(res.boxes.size());
    for (size_t i = 0; i < all_ids.size(); ++i) all_ids[i] = static_cast<int>(i);
    res.certificate = detail::build_grid_tree(all_ids, res.boxes, work, dim - 1, delta);
    return res;
}

struct ReplayReport {
    bool pass = false;
    std::string first_violation;
    long splits_checked = 0;
    long leaves = 0;
};

namespace detail {

struct ReplayCtx {
    const DecompositionResult* res;
    Rat margin;  // delta * (1 - 10^-6)
    ReplayReport* rep;
    std::vector<int> seen;
};

// Canonical sweep order along any root-to-leaf path: grid passes, then
// host-partition planes, then in-cell planes; axes descend within a kind
// and coordinates descend within an axis.
inline bool order_le(const CertSplit& a, const CertSplit& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.axis != b.axis) return b.axis < a.axis;
    return b.coord < a.coord;
}

inline bool replay_walk(const CertNode* n, ReplayCtx& ctx,
                        const CertSplit* last, std::vector<int>& leaves_out) {
    if (!n) {
        ctx.rep->first_violation = "missing node";
        return false;
    }
    if (n->is_leaf) {
        if (n->leaf_id < 0 || n->leaf_id >= static_cast<long>(ctx.res->boxes.size())) {
            ctx.rep->first_violation = "leaf id out of range";
            return false;
        }
        const Box& b = ctx.res->boxes[n->leaf_id].box;
        if (!b.nondegenerate()) {
            ctx.rep->first_violation = "degenerate leaf box";
            return false;
        }
        // U_0 collar: the leaf stays margin-inside its own grid cell
        for (int k = 0; k < b.dim(); ++k) {
            Rat mid = (b.iv[k].lo + b.iv[k].hi) / 2;
            Rat cell = Rat(nearest_int(mid));
            if (b.iv[k].lo < cell - Rat(1, 2) + ctx.margin ||
                b.iv[k].hi > cell + Rat(1, 2) - ctx.margin) {
                ctx.rep->first_violation = "leaf violates grid-strip collar";
                return false;
            }
        }
        leaves_out.push_back(n->leaf_id);
        ++ctx.rep->leaves;
        return true;
    }
    if (last && !order_le(*last, n->split)) {
        ctx.rep->first_violation = "splits out of sweep order";
        return false;
    }
    std::vector<int> lo_leaves, hi_leaves;
    if (!replay_walk(n->lo.get(), ctx, &n->split, lo_leaves)) return false;
    if (!replay_walk(n->hi.get(), ctx, &n->split, hi_leaves)) return false;
    if (lo_leaves.empty() || hi_leaves.empty()) {
        ctx.rep->first_violation = "split with empty side";
        return false;
    }
    for (int id : lo_leaves) {
        const Box& b = ctx.res->boxes[id].box;
        if (b.iv[n->split.axis].hi > n->split.coord - ctx.margin) {
            std::ostringstream os;
            os << "leaf " << id << " crosses split axis " << n->split.axis << " at "
               << frac_str(n->split.coord);
            ctx.rep->first_violation = os.str();
            return false;
        }
    }
    for (int id : hi_leaves) {
        const Box& b = ctx.res->boxes[id].box;
        if (b.iv[n->split.axis].lo < n->split.coord + ctx.margin) {
            std::ostringstream os;
            os << "leaf " << id << " crosses split axis " << n->split.axis << " at "
               << frac_str(n->split.coord);
            ctx.rep->first_violation = os.str();
            return false;
        }
    }
    ++ctx.rep->splits_checked;
    for (int id : lo_leaves) leaves_out.push_back(id);
    for (int id : hi_leaves) leaves_out.push_back(id);
    return true;
}

}  // namespace detail

inline ReplayReport certificate_replay(const DecompositionResult& res) {
    ReplayReport rep;
    if (!res.certificate || res.boxes.empty()) {
        rep.first_violation = "empty certificate or empty U (structural error)";
        return rep;
    }
    detail::ReplayCtx ctx;
    ctx.res = &res;
    ctx.margin = res.delta * Rat(999999, 1000000);
    ctx.rep = &rep;
    std::vector<int> leaves;
    if (!detail::replay_walk(res.certificate.get(), ctx, nullptr, leaves)) return rep;
    if (leaves.size() != res.boxes.size()) {
        rep.first_violation = "leaf set does not tile U (count mismatch)";
        return rep;
    }
    std::vector<char> seen(res.boxes.size(), 0);
    for (int id : leaves) {
        if (seen[id]) {
            rep.first_violation = "duplicate leaf in certificate";
            return rep;
        }
        seen[id] = 1;
    }
    Rat vol = 0;
    for (const auto& l : res.boxes) vol += l.box.volume();
    if (vol != res.u_volume) {
        rep.first_violation = "leaf volumes do not sum to vol(U)";
        return rep;
    }
    rep.pass = true;
    return rep;
}

}  // namespace soltower
