#pragma once

// The 2d-real-dimensional solenoid at finite depth: exact tower/fiber
// arithmetic for the inverse limit of R^{2d} / R_n Z^{2d}.

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "soltower/rational.hpp"
#include "soltower/rng.hpp"

namespace soltower {

struct RadixSequence {
    std::vector<long> r;   // r_n >= 2
    std::vector<Int> R;    // cumulative products, R_n = r_1 ... r_n
    int dim = 2;           // 2d real dimensions
    Rat sum_inv;           // sum of 1/r_n over the stored prefix (diagnostic)

    size_t length() const { return r.size(); }
};

inline RadixSequence radix_products(const std::vector<long>& r, int dim = 2) {
    if (r.empty()) throw std::invalid_argument("radix list empty");
    if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("dim must be even and >= 2");
    RadixSequence seq;
    seq.r = r;
    seq.dim = dim;
    Int prod = 1;
    for (long rn : r) {
        if (rn < 2) throw std::invalid_argument("invalid radix entry < 2");
        prod *= rn;
        seq.R.push_back(prod);
        seq.sum_inv += Rat(1, rn);
    }
    return seq;
}

// Finite-depth element of the inverse limit. levels[n-1] is t_n in
// [0, R_n)^{dim}; compatibility t_{n+1} == t_n (mod R_n) holds exactly.
struct SolenoidPoint {
    RadixSequence seq;
    int depth = 0;
    std::vector<RatVec> levels;

    bool compatible() const {
        for (int n = 0; n + 1 < depth; ++n) {
            Rat Rn(seq.R[n]);
            for (int k = 0; k < seq.dim; ++k) {
                if (rat_mod(levels[n + 1][k] - levels[n][k], Rn) != 0) return false;
            }
        }
        for (int n = 0; n < depth; ++n) {
            Rat Rn(seq.R[n]);
            for (int k = 0; k < seq.dim; ++k) {
                if (levels[n][k] < 0 || levels[n][k] >= Rn) return false;
            }
        }
        return true;
    }
};

struct TileAddress {
    int level = 0;                 // n: the address refines level n to n+1
    std::vector<long> index;      // i_k in [0, r_{n+1})
    RatVec offset;                // z = t_n
};

inline SolenoidPoint haar_sample(const RadixSequence& seq, int depth, long resolution,
                                 Rng& rng) {
    if (depth < 1 || static_cast<size_t>(depth) > seq.length())
        throw std::invalid_argument("depth exceeds radix length");
    if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
    SolenoidPoint p;
    p.seq = seq;
    p.depth = depth;
    p.levels.resize(depth, RatVec(seq.dim));
    const Int R1 = seq.R[0];
    Int cells = R1 * resolution;
    for (int k = 0; k < seq.dim; ++k) {
        std::uint64_t c = rng.below(cells.get_ui());
        p.levels[0][k] = Rat(Int(static_cast<unsigned long>(c)), Int(resolution));
        p.levels[0][k].canonicalize();
    }
    for (int n = 1; n < depth; ++n) {
        long rn = seq.r[n];
        Rat Rprev(seq.R[n - 1]);
        for (int k = 0; k < seq.dim; ++k) {
            std::uint64_t c = rng.below(static_cast<std::uint64_t>(rn));
            p.levels[n][k] = p.levels[n - 1][k] + Rat(static_cast<long>(c)) * Rprev;
        }
    }
    return p;
}

inline SolenoidPoint haar_sample(const RadixSequence& seq, int depth, long resolution,
                                 std::uint64_t seed) {
    Rng rng(seed);
    return haar_sample(seq, depth, resolution, rng);
}

// Translation by the dense copy of R^{2d}: each level moves mod R_n.
inline SolenoidPoint translate(const SolenoidPoint& p, const RatVec& v) {
    if (static_cast<int>(v.size()) != p.seq.dim)
        throw std::invalid_argument("translation dimension mismatch");
    SolenoidPoint q = p;
    for (int n = 0; n < p.depth; ++n) {
        Rat Rn(p.seq.R[n]);
        for (int k = 0; k < p.seq.dim; ++k) {
            q.levels[n][k] = rat_mod(p.levels[n][k] + v[k], Rn);
        }
    }
    return q;
}

struct Factorization {
    RatVec offset;                    // t_n in [0, R_n)^{dim}
    std::vector<TileAddress> tiles;   // addresses for levels n+1..depth
};

// G = S_n x B_n: the offset is the S_n coordinate, the residual tile indices
// are the fiber address at levels above n.
inline Factorization factor(const SolenoidPoint& p, int n) {
    if (n < 1 || n > p.depth) throw std::invalid_argument("factor level out of range");
    Factorization f;
    f.offset = p.levels[n - 1];
    for (int m = n; m < p.depth; ++m) {
        TileAddress a;
        a.level = m;
        a.offset = p.levels[m - 1];
        Rat Rm(p.seq.R[m - 1]);
        for (int k = 0; k < p.seq.dim; ++k) {
            Rat diff = (p.levels[m][k] - p.levels[m - 1][k]) / Rm;
            if (diff.get_den() != 1)
                throw std::logic_error("compatibility violated in factor");
            long idx = diff.get_num().get_si();
            if (idx < 0 || idx >= p.seq.r[m])
                throw std::logic_error("tile index out of range in factor");
            a.index.push_back(idx);
        }
        f.tiles.push_back(a);
    }
    return f;
}

// Inverse of factor: rebuild the point from level-n data plus tile indices.
inline SolenoidPoint unfactor(const RadixSequence& seq, int n, const RatVec& offset,
                              const std::vector<TileAddress>& tiles) {
    SolenoidPoint p;
    p.seq = seq;
    p.depth = n + static_cast<int>(tiles.size());
    p.levels.resize(p.depth, RatVec(seq.dim));
    p.levels[n - 1] = offset;
    for (int j = n - 2; j >= 0; --j) {
        Rat Rj(seq.R[j]);
        for (int k = 0; k < seq.dim; ++k) p.levels[j][k] = rat_mod(p.levels[j + 1][k], Rj);
    }
    for (size_t t = 0; t < tiles.size(); ++t) {
        int m = n + static_cast<int>(t);
        Rat Rm(seq.R[m - 1]);
        for (int k = 0; k < seq.dim; ++k) {
            p.levels[m][k] = p.levels[m - 1][k] + Rat(tiles[t].index[k]) * Rm;
        }
    }
    return p;
}

inline std::string serialize_point(const SolenoidPoint& p) {
    std::ostringstream os;
    os << "solenoid-point v1\n";
    os << "radix:";
    for (size_t i = 0; i < p.seq.r.size(); ++i) os << (i ? "," : " ") << p.seq.r[i];
    os << "\ndim: " << p.seq.dim << "\ndepth: " << p.depth << "\n";
    for (int n = 0; n < p.depth; ++n) os << "level " << (n + 1) << ": " << vec_str(p.levels[n]) << "\n";
    return os.str();
}

inline SolenoidPoint parse_point(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "solenoid-point v1")
        throw std::invalid_argument("bad point header");
    auto expect = [&](const std::string& key) {
        if (!std::getline(is, line) || line.rfind(key, 0) != 0)
            throw std::invalid_argument("expected " + key);
        return line.substr(key.size());
    };
    std::string rs = expect("radix: ");
    std::vector<long> r;
    {
        std::istringstream rr(rs);
        std::string tok;
        while (std::getline(rr, tok, ',')) r.push_back(std::stol(tok));
    }
    int dim = std::stoi(expect("dim: "));
    int depth = std::stoi(expect("depth: "));
    SolenoidPoint p;
    p.seq = radix_products(r, dim);
    p.depth = depth;
    p.levels.resize(depth, RatVec(dim));
    for (int n = 0; n < depth; ++n) {
        std::string prefix = "level " + std::to_string(n + 1) + ": ";
        std::string body = expect(prefix);
        std::istringstream bb(body);
        for (int k = 0; k < dim; ++k) {
            std::string tok;
            bb >> tok;
            p.levels[n][k] = parse_frac(tok);
        }
    }
    if (!p.compatible()) throw std::invalid_argument("incompatible serialized point");
    return p;
}

}  // namespace soltower
