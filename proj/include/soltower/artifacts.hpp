#pragma once

// Artifact IO and pipeline orchestration: JSON serialization with exact
// fraction strings, structured text/CSV reports, schema-validated run
// configs, and the named pipelines. Every artifact carries the tool version
// and the config hash; reruns are byte-identical.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "soltower/construction.hpp"
#include "soltower/decompose.hpp"
#include "soltower/enumeration.hpp"
#include "soltower/kallin.hpp"
#include "soltower/svg.hpp"
#include "soltower/towers.hpp"

namespace soltower {

inline const char* tool_version() { return "soltower 0.1.0"; }

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CertificateFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace js {

using nlohmann::json;

inline json rat(const Rat& q) { return frac_str(q); }
inline Rat rat_of(const json& j) { return parse_frac(j.get<std::string>()); }

inline json ratvec(const RatVec& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(rat(q));
    return a;
}
inline RatVec ratvec_of(const json& j) {
    RatVec v;
    for (const auto& e : j) v.push_back(rat_of(e));
    return v;
}

inline json box(const Box& b) {
    json a = json::array();
    for (const auto& iv : b.iv) a.push_back(json::array({rat(iv.lo), rat(iv.hi)}));
    return a;
}
inline Box box_of(const json& j) {
    Box b;
    for (const auto& e : j) b.iv.push_back(Interval{rat_of(e[0]), rat_of(e[1])});
    return b;
}

inline json poly(const ComplexPolynomial& p) {
    json o;
    o["center"] = json::array({rat(p.center.re), rat(p.center.im)});
    o["scale"] = rat(p.scale);
    json cs = json::array();
    for (const auto& c : p.coeffs) cs.push_back(json::array({bf_str(c.re), bf_str(c.im)}));
    o["coeffs"] = cs;
    return o;
}
inline ComplexPolynomial poly_of(const json& j) {
    ComplexPolynomial p;
    p.center = {rat_of(j.at("center")[0]), rat_of(j.at("center")[1])};
    p.scale = rat_of(j.at("scale"));
    for (const auto& c : j.at("coeffs")) {
        p.coeffs.push_back({bf_parse(c[0].get<std::string>()), bf_parse(c[1].get<std::string>())});
    }
    return p;
}

inline json report(const ApproxReport& r) {
    json o;
    o["success"] = r.success;
    o["degree"] = r.degree;
    o["achieved_eps"] = r.achieved_eps;
    o["piece_errors"] = r.piece_errors;
    o["fit_boundary_pts"] = r.fit_boundary_pts;
    o["validation_boundary_pts"] = r.validation_boundary_pts;
    o["cond_diag"] = r.cond_diag;
    o["precision_bits"] = r.precision_bits;
    json h = json::array();
    for (auto& [d, e] : r.history) h.push_back(json::array({d, e}));
    o["history"] = h;
    return o;
}

inline json cert_tree(const CertNode* n) {
    json o;
    if (!n) return o;
    if (n->is_leaf) {
        o["leaf"] = n->leaf_id;
        return o;
    }
    o["axis"] = n->split.axis;
    o["coord"] = rat(n->split.coord);
    o["kind"] = n->split.kind;
    o["lo"] = cert_tree(n->lo.get());
    o["hi"] = cert_tree(n->hi.get());
    return o;
}

inline std::unique_ptr<CertNode> cert_tree_of(const json& j) {
    auto n = std::make_unique<CertNode>();
    if (j.contains("leaf")) {
        n->is_leaf = true;
        n->leaf_id = j.at("leaf").get<int>();
        return n;
    }
    n->split.axis = j.at("axis").get<int>();
    n->split.coord = rat_of(j.at("coord"));
    n->split.kind = j.at("kind").get<int>();
    n->lo = cert_tree_of(j.at("lo"));
    n->hi = cert_tree_of(j.at("hi"));
    return n;
}

inline json decomposition(const DecompositionResult& res) {
    json o;
    o["tool"] = tool_version();
    o["dim"] = res.dim;
    o["half_open"] = res.half_open;
    o["eps"] = rat(res.eps);
    o["delta"] = rat(res.delta);
    json cubes = json::array();
    for (const auto& c : res.cubes) cubes.push_back(ratvec(c.center));
    o["cubes"] = cubes;
    json hosts = json::array();
    for (const auto& h : res.hosts) {
        json hh;
        json lat = json::array();
        for (const auto& v : h.lattice) lat.push_back(v.get_str());
        hh["lattice"] = lat;
        hh["sub"] = h.sub.i;
        hosts.push_back(hh);
    }
    o["hosts"] = hosts;
    json boxes = json::array();
    for (const auto& l : res.boxes) {
        json b;
        b["box"] = box(l.box);
        b["cube"] = l.source_cube;
        b["grid"] = l.grid;
        boxes.push_back(b);
    }
    o["boxes"] = boxes;
    json strips = json::array();
    for (const auto& s : res.strips) {
        json ss;
        ss["axis"] = s.axis;
        ss["coord"] = rat(s.coord);
        ss["delta"] = rat(s.delta);
        ss["kind"] = s.kind;
        ss["scope"] = s.scope;
        strips.push_back(ss);
    }
    o["strips"] = strips;
    o["u_volume"] = rat(res.u_volume);
    o["removed_measure"] = rat(res.removed_measure);
    json losses = json::array();
    for (const auto& l : res.per_cube_loss) losses.push_back(rat(l));
    o["per_cube_loss"] = losses;
    o["certificate"] = cert_tree(res.certificate.get());
    return o;
}

inline DecompositionResult decomposition_of(const json& j) {
    DecompositionResult res;
    res.dim = j.at("dim").get<int>();
    res.half_open = j.at("half_open").get<bool>();
    res.eps = rat_of(j.at("eps"));
    res.delta = rat_of(j.at("delta"));
    for (const auto& c : j.at("cubes")) res.cubes.push_back(UnitCube{ratvec_of(c)});
    for (const auto& h : j.at("hosts")) {
        HostGridCube hh;
        for (const auto& v : h.at("lattice")) hh.lattice.push_back(Int(v.get<std::string>()));
        hh.sub.i = h.at("sub").get<std::vector<int>>();
        res.hosts.push_back(hh);
    }
    for (const auto& b : j.at("boxes")) {
        LeafBox l;
        l.box = box_of(b.at("box"));
        l.source_cube = b.at("cube").get<int>();
        l.grid = b.at("grid").get<LatticeKey>();
        res.boxes.push_back(l);
    }
    for (const auto& s : j.at("strips")) {
        Strip ss;
        ss.axis = s.at("axis").get<int>();
        ss.coord = rat_of(s.at("coord"));
        ss.delta = rat_of(s.at("delta"));
        ss.kind = s.at("kind").get<int>();
        ss.scope = s.at("scope").get<LatticeKey>();
        res.strips.push_back(ss);
    }
    res.u_volume = rat_of(j.at("u_volume"));
    res.removed_measure = rat_of(j.at("removed_measure"));
    for (const auto& l : j.at("per_cube_loss")) res.per_cube_loss.push_back(rat_of(l));
    if (j.contains("certificate") && !j.at("certificate").empty())
        res.certificate = cert_tree_of(j.at("certificate"));
    return res;
}

}  // namespace js

// ---------------------------------------------------------------------------
// structured key/value reports plus CSV tables

class Report {
  public:
    void kv(const std::string& key, const std::string& value) {
        lines_.push_back(key + " = " + value);
    }
    void kv(const std::string& key, double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        kv(key, os.str());
    }
    void kv(const std::string& key, const Rat& v) { kv(key, frac_str(v)); }
    void kv(const std::string& key, long v) { kv(key, std::to_string(v)); }
    void csv_header(const std::string& h) { csv_.push_back(h); }
    void csv_row(const std::string& r) { csv_.push_back(r); }

    std::string text() const {
        std::string out;
        for (const auto& l : lines_) out += l + "\n";
        return out;
    }
    std::string csv() const {
        std::string out;
        for (const auto& l : csv_) out += l + "\n";
        return out;
    }

  private:
    std::vector<std::string> lines_;
    std::vector<std::string> csv_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// ---------------------------------------------------------------------------
// run configs

struct RunConfig {
    std::string pipeline;
    nlohmann::json params;
    std::uint64_t hash = 0;
};

inline RunConfig parse_config(const nlohmann::json& j) {
    static const std::map<std::string, std::set<std::string>> allowed{
        {"solenoid-sample", {"radix", "dim", "depth", "resolution", "seed", "count", "out"}},
        {"build",
         {"radix", "stages", "eps_schedule", "polys", "caps", "precision", "grid_density",
          "out", "resume"}},
        {"density-report", {"stage_dir", "k", "out"}},
        {"decompose-cubes", {"input", "eps", "dim", "half_open", "out", "witness"}},
        {"certify-products", {"ks", "ls", "out"}},
        {"towers-validate", {"radix", "a", "samples", "seed", "model", "out"}},
        {"towers-build", {"radix", "stages", "polys", "caps", "precision", "out"}},
        {"plot", {"input", "axes", "out"}},
    };
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("pipeline") || !j.at("pipeline").is_string())
        throw ConfigError("config needs a \"pipeline\" string");
    RunConfig cfg;
    cfg.pipeline = j.at("pipeline").get<std::string>();
    auto it = allowed.find(cfg.pipeline);
    if (it == allowed.end()) throw ConfigError("unknown pipeline: " + cfg.pipeline);
    for (auto& [key, val] : j.items()) {
        if (key == "pipeline") continue;
        if (!it->second.count(key))
            throw ConfigError("unknown config key \"" + key + "\" for " + cfg.pipeline);
    }
    cfg.params = j;
    cfg.hash = fnv64(j.dump());
    return cfg;
}

namespace detail {

inline std::vector<long> longs_of(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("missing key: " + key);
    std::vector<long> out;
    for (const auto& e : j.at(key)) out.push_back(e.get<long>());
    return out;
}

inline std::vector<ComplexPolynomial> polys_from_config(const nlohmann::json& j, int count) {
    std::string kind = j.value("polys", "desk");
    if (kind == "desk") return desk_polys(count);
    if (kind == "diagonal") return diagonal_enumeration(count);
    throw ConfigError("polys must be \"desk\" or \"diagonal\"");
}

inline void require_positive_eps_schedule(int stages) {
    // eps_n = 10^{-(n-1)} is fixed; a zero entry cannot arise from the
    // schedule itself, only from a bad stages count
    if (stages < 1) throw ConfigError("stages must be >= 1");
}

// Hash over the keys that shape stage content (the stage count is not one of
// them: resumed runs extend a shorter build).
inline std::uint64_t plan_hash(const nlohmann::json& P) {
    nlohmann::json h;
    for (const char* key :
         {"pipeline", "radix", "eps_schedule", "polys", "caps", "precision", "grid_density"})
        if (P.contains(key)) h[key] = P.at(key);
    return fnv64(h.dump());
}

}  // namespace detail

// Executes one pipeline; returns 0 on success. Certificate violations and
// approximation failures surface as CertificateFailure (exit 1), schema
// problems as ConfigError (exit 2).
inline int run_pipeline(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const auto& P = cfg.params;
    auto out_dir = [&]() {
        fs::path out = P.value("out", "out");
        fs::create_directories(out);
        return out;
    };
    auto stamp = [&](nlohmann::json& o) {
        o["tool"] = tool_version();
        o["config_hash"] = std::to_string(cfg.hash);
    };

    if (cfg.pipeline == "solenoid-sample") {
        auto radix = detail::longs_of(P, "radix");
        int dim = P.value("dim", 2);
        auto seq = radix_products(radix, dim);
        int depth = P.value("depth", static_cast<int>(radix.size()));
        long resolution = P.value("resolution", 64L);
        std::uint64_t seed = P.value("seed", 1ULL);
        int count = P.value("count", 16);
        if (count < 1) throw ConfigError("count must be >= 1");
        fs::path out = out_dir();
        Rng rng(seed);
        std::string all;
        for (int i = 0; i < count; ++i) {
            auto p = haar_sample(seq, depth, resolution, rng);
            if (!p.compatible()) throw CertificateFailure("sample violates compatibility");
            all += serialize_point(p) + "\n";
        }
        write_file(out / "points.txt", all);
        Report rep;
        rep.kv("pipeline", cfg.pipeline);
        rep.kv("tool", tool_version());
        rep.kv("config_hash", std::to_string(cfg.hash));
        rep.kv("count", static_cast<long>(count));
        rep.kv("compatible", "all");
        write_file(out / "report.txt", rep.text());
        return 0;
    }

    if (cfg.pipeline == "build") {
        auto radix = detail::longs_of(P, "radix");
        int stages_wanted = P.value("stages", static_cast<int>(radix.size()));
        detail::require_positive_eps_schedule(stages_wanted);
        std::string sched = P.value("eps_schedule", "default");
        if (sched != "default") throw ConfigError("eps_schedule must be \"default\"");
        StagePlan plan;
        plan.radix = radix_products(radix, 2);
        plan.polys = detail::polys_from_config(P, stages_wanted);
        if (P.contains("caps")) {
            for (const auto& c : P.at("caps")) {
                int v = c.get<int>();
                if (v < 1) throw ConfigError("degree caps must be positive");
                plan.degree_caps.push_back(v);
            }
        } else {
            plan.degree_caps = {16, 32, 64};
        }
        plan.precision_bits = P.value("precision", 0);
        plan.grid_density = P.value("grid_density", 64);
        fs::path out = out_dir();
        const std::uint64_t phash = detail::plan_hash(P);

        std::vector<Stage> stages;
        int start_from = 1;
        if (P.value("resume", false)) {
            for (int n = 1; n <= stages_wanted; ++n) {
                fs::path f = out / ("stage_" + std::to_string(n) + ".json");
                if (!fs::exists(f)) break;
                auto j = nlohmann::json::parse(read_file(f));
                if (j.value("plan_hash", "") != std::to_string(phash))
                    throw ConfigError("resume: stage file from a different plan");
                Stage s;
                s.n = j.at("n").get<int>();
                s.q = js::poly_of(j.at("poly"));
                for (const auto& k : j.at("kcubes"))
                    s.kcubes.push_back(Rect{js::rat_of(k[0]), js::rat_of(k[1]), js::rat_of(k[2]),
                                            js::rat_of(k[3])});
                s.report.success = true;
                s.report.degree = s.q.degree();
                s.report.achieved_eps = j.at("achieved_eps").get<double>();
                stages.push_back(std::move(s));
                start_from = n + 1;
            }
        }
        try {
            if (stages.empty()) {
                stages.push_back(make_stage1(plan));
                start_from = 2;
            }
            for (int n = start_from; n <= stages_wanted; ++n)
                stages.push_back(build_stage(plan, stages.back()));
        } catch (const ApproximationFailure& f) {
            throw CertificateFailure(std::string("build failed loudly: ") + f.what() +
                                     " (best error " + std::to_string(f.best_report.achieved_eps) +
                                     " at degree " + std::to_string(f.best_report.degree) + ")");
        }
        {
            nlohmann::json pj;
            pj["tool"] = tool_version();
            pj["plan_hash"] = std::to_string(phash);
            pj["radix"] = radix;
            pj["stages"] = stages_wanted;
            nlohmann::json ps = nlohmann::json::array();
            for (const auto& p : plan.polys) ps.push_back(js::poly(p));
            pj["polys"] = ps;
            pj["caps"] = plan.degree_caps;
            pj["density_grid"] = plan.density_grid;
            write_file(out / "plan.json", pj.dump(2) + "\n");
        }
        for (const auto& s : stages) {
            nlohmann::json j;
            j["tool"] = tool_version();
            j["plan_hash"] = std::to_string(phash);
            j["n"] = s.n;
            j["poly"] = js::poly(s.q);
            nlohmann::json ks = nlohmann::json::array();
            for (const auto& k : s.kcubes)
                ks.push_back(nlohmann::json::array(
                    {js::rat(k.x0), js::rat(k.y0), js::rat(k.x1), js::rat(k.y1)}));
            j["kcubes"] = ks;
            j["report"] = js::report(s.report);
            j["achieved_eps"] = s.report.achieved_eps;
            write_file(out / ("stage_" + std::to_string(s.n) + ".json"), j.dump(2) + "\n");
        }
        Report rep;
        rep.kv("pipeline", cfg.pipeline);
        rep.kv("tool", tool_version());
        rep.kv("config_hash", std::to_string(cfg.hash));
        rep.csv_header("stage,eps,achieved,degree");
        bool all_ok = true;
        for (const auto& s : stages) {
            rep.kv("stage_" + std::to_string(s.n) + "_achieved", s.report.achieved_eps);
            std::ostringstream row;
            row << s.n << "," << frac_str(plan.eps(s.n)) << "," << s.report.achieved_eps << ","
                << s.report.degree;
            rep.csv_row(row.str());
            if (!s.report.success) all_ok = false;
        }
        // density certificates for every k
        for (int k = 1; k <= static_cast<int>(stages.size()); ++k) {
            auto cert = density_check(plan, stages, k);
            std::string key = "density_k" + std::to_string(k);
            rep.kv(key + "_bound", cert.bound);
            rep.kv(key + "_measured", cert.measured);
            rep.kv(key + "_pass", cert.pass ? "true" : "false");
            if (!cert.pass) all_ok = false;
        }
        write_file(out / "report.txt", rep.text());
        write_file(out / "stages.csv", rep.csv());
        if (!all_ok) throw CertificateFailure("density certificate failed");
        return 0;
    }

    if (cfg.pipeline == "density-report") {
        fs::path dir = P.value("stage_dir", "");
        if (dir.empty()) throw ConfigError("density-report needs stage_dir");
        auto pj = nlohmann::json::parse(read_file(dir / "plan.json"));
        StagePlan plan;
        plan.radix = radix_products(pj.at("radix").get<std::vector<long>>(), 2);
        for (const auto& p : pj.at("polys")) plan.polys.push_back(js::poly_of(p));
        plan.density_grid = pj.value("density_grid", 50);
        std::vector<Stage> stages;
        for (int n = 1; n <= pj.at("stages").get<int>(); ++n) {
            auto sj = nlohmann::json::parse(
                read_file(dir / ("stage_" + std::to_string(n) + ".json")));
            Stage s;
            s.n = sj.at("n").get<int>();
            s.q = js::poly_of(sj.at("poly"));
            stages.push_back(std::move(s));
        }
        int k = P.value("k", stages.size() > 1 ? 2 : 1);
        auto cert = density_check(plan, stages, k);
        fs::path out = out_dir();
        Report rep;
        rep.kv("pipeline", cfg.pipeline);
        rep.kv("tool", tool_version());
        rep.kv("config_hash", std::to_string(cfg.hash));
        rep.kv("k", static_cast<long>(cert.k));
        rep.kv("n", static_cast<long>(cert.n));
        rep.kv("w_re", cert.w.re);
        rep.kv("w_im", cert.w.im);
        rep.kv("half_side", cert.half_side);
        rep.kv("bound", cert.bound);
        rep.kv("measured", cert.measured);
        rep.kv("domain_empty", cert.domain_empty ? "true" : "false");
        rep.kv("pass", cert.pass ? "true" : "false");
        write_file(out / ("density_k" + std::to_string(k) + ".txt"), rep.text());
        if (!cert.pass) throw CertificateFailure("density certificate failed");
        return 0;
    }

    if (cfg.pipeline == "decompose-cubes") {
        fs::path in = P.value("input", "");
        if (in.empty()) throw ConfigError("decompose-cubes needs input");
        auto j = nlohmann::json::parse(read_file(in));
        int dim = j.value("dim", P.value("dim", 2));
        bool half_open = j.value("half_open", P.value("half_open", false));
        Rat eps = P.contains("eps") ? parse_frac(P.at("eps").get<std::string>())
                                    : js::rat_of(j.at("eps"));
        if (eps <= 0) throw ConfigError("eps must be positive");
        std::vector<UnitCube> cubes;
        for (const auto& c : j.at("cubes")) {
            UnitCube u{js::ratvec_of(c)};
            if (static_cast<int>(u.center.size()) != dim)
                throw ConfigError("cube dimension mismatch");
            cubes.push_back(u);
        }
        auto res = decompose(cubes, eps, half_open);
        auto replay = certificate_replay(res);
        if (!replay.pass) throw CertificateFailure("replay failed: " + replay.first_violation);
        // --out may name the result file directly or a directory
        fs::path out_param = P.value("out", "out");
        fs::path result_path, out;
        if (out_param.extension() == ".json") {
            out = out_param.has_parent_path() ? out_param.parent_path() : fs::path(".");
            fs::create_directories(out);
            result_path = out_param;
        } else {
            out = out_dir();
            result_path = out / "result.json";
        }
        nlohmann::json o = js::decomposition(res);
        stamp(o);
        write_file(result_path, o.dump(2) + "\n");
        Report rep;
        rep.kv("pipeline", cfg.pipeline);
        rep.kv("tool", tool_version());
        rep.kv("config_hash", std::to_string(cfg.hash));
        rep.kv("cubes", static_cast<long>(cubes.size()));
        rep.kv("boxes", static_cast<long>(res.boxes.size()));
        rep.kv("delta", res.delta);
        rep.kv("removed_measure", res.removed_measure);
        rep.kv("replay", "pass");
        if (P.value("witness", false)) {
            try {
                auto w = witness_for_split(res, *widest_split(res), FitOptions{96, 64, 0});
                rep.kv("witness_axis", static_cast<long>(w.axis));
                rep.kv("witness_coord", w.c);
                rep.kv("witness_supA", w.supA);
                rep.kv("witness_supB", w.supB);
                rep.kv("witness_degree", static_cast<long>(w.report.degree));
            } catch (const ApproximationFailure& f) {
                throw CertificateFailure(std::string("kallin witness infeasible: ") + f.what());
            }
        }
        write_file(out / "report.txt", rep.text());
        return 0;
    }

    if (cfg.pipeline == "certify-products") {
        auto parse_rects = [&](const std::string& key) {
            std::vector<Rect> v;
            if (!P.contains(key)) throw ConfigError("certify-products needs " + key);
            for (const auto& r : P.at(key))
                v.push_back(Rect{js::rat_of(r[0]), js::rat_of(r[1]), js::rat_of(r[2]),
                                 js::rat_of(r[3])});
            return v;
        };
        auto Ks = parse_rects("ks"), Ls = parse_rects("ls");
        ProductUnionCertificate cert;
        try {
            cert = product_union_certificate(Ks, Ls);
        } catch (const ApproximationFailure& f) {
            throw CertificateFailure(f.what());
        }
        std::string why;
        if (!replay_product_certificate(cert, &why))
            throw CertificateFailure("product certificate replay failed: " + why);
        fs::path out = out_dir();
        nlohmann::json o;
        stamp(o);
        o["a"] = Ks.size();
        o["b"] = Ls.size();
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : cert.steps) {
            nlohmann::json st;
            st["var"] = s.var;
            st["fixed_j"] = s.fixed_j;
            st["u"] = s.u;
            st["poly"] = js::poly(s.p);
            st["supA"] = s.supA;
            st["supB"] = s.supB;
            steps.push_back(st);
        }
        o["steps"] = steps;
        write_file(out / "products.json", o.dump(2) + "\n");
        Report rep;
        rep.kv("pipeline", cfg.pipeline);
        rep.kv("steps", static_cast<long>(cert.steps.size()));
        rep.kv("replay", "pass");
        write_file(out / "report.txt", rep.text());
        return 0;
    }

    if (cfg.pipeline == "towers-validate") {
        TowerData t;
        RadixSequence seq;
        if (P.contains("a")) {
            for (const auto& e : P.at("a")) t.a.push_back(parse_frac(e.get<std::string>()));
            seq = radix_products({2, 2, 2}, 2);
        } else {
            seq = radix_products(detail::longs_of(P, "radix"), 2);
            t = solenoid_tower(seq);
        }
        bool exact = P.value("model", std::string("solenoid")) == "solenoid";
        SolenoidModel m(seq, exact);
        TowerReport rep;
        try {
            rep = validate_tower(t, m, P.value("samples", 200), P.value("seed", 1ULL));
        } catch (const std::invalid_argument& e) {
            throw CertificateFailure(e.what());
        }
        fs::path out = out_dir();
        Report r;
        r.kv("pipeline", cfg.pipeline);
        r.kv("tool", tool_version());
        r.kv("config_hash", std::to_string(cfg.hash));
        r.kv("exact", rep.exact ? "true" : "false");
        r.kv("sum_ratio", rep.sum_ratio);
        r.kv("sset_disjoint", rep.sset_disjoint ? "true" : "false");
        r.kv("nested", rep.nested ? "true" : "false");
        r.csv_header("level,coverage,ci3");
        for (size_t i = 0; i < rep.coverage.size(); ++i) {
            std::ostringstream row;
            row << (i + 1) << "," << rep.coverage[i] << "," << rep.coverage_ci[i];
            r.csv_row(row.str());
        }
        write_file(out / "report.txt", r.text());
        write_file(out / "coverage.csv", r.csv());
        if (!rep.sset_disjoint || !rep.nested)
            throw CertificateFailure("tower validation failed");
        return 0;
    }

    if (cfg.pipeline == "towers-build") {
        TowersPlan plan;
        plan.radix = radix_products(detail::longs_of(P, "radix"), 2);
        int stages_wanted = P.value("stages", static_cast<int>(plan.radix.length()));
        detail::require_positive_eps_schedule(stages_wanted);
        plan.polys = detail::polys_from_config(P, stages_wanted);
        if (P.contains("caps"))
            for (const auto& c : P.at("caps")) plan.degree_caps.push_back(c.get<int>());
        else
            plan.degree_caps = {8, 16, 16};
        plan.precision_bits = P.value("precision", 0);
        SolenoidModel m(plan.radix);
        auto t = solenoid_tower(plan.radix);
        validate_tower(t, m);
        std::vector<GeneralStage> stages;
        try {
            stages = towers_build(plan, t, m, stages_wanted);
        } catch (const ApproximationFailure& f) {
            throw CertificateFailure(std::string("towers build failed loudly: ") + f.what());
        } catch (const std::runtime_error& e) {
            throw CertificateFailure(e.what());
        }
        fs::path out = out_dir();
        const std::uint64_t phash = detail::plan_hash(P);
        bool all_ok = true;
        Report rep;
        rep.kv("pipeline", cfg.pipeline);
        rep.kv("tool", tool_version());
        rep.kv("config_hash", std::to_string(cfg.hash));
        rep.csv_header("stage,eps,E_n,decomposition,replaced,uncovered,fit_degree");
        for (const auto& s : stages) {
            nlohmann::json j;
            j["tool"] = tool_version();
            j["plan_hash"] = std::to_string(phash);
            j["n"] = s.n;
            j["a_n"] = js::rat(s.a_n);
            j["poly"] = js::poly(s.q);
            j["delta_n"] = js::rat(s.delta_n);
            j["e_decomposition"] = js::rat(s.e_decomposition);
            j["e_replaced"] = js::rat(s.e_replaced);
            j["e_uncovered"] = js::rat(s.e_uncovered);
            j["e_total"] = js::rat(s.e_total);
            j["report"] = js::report(s.report);
            nlohmann::json cd = nlohmann::json::array();
            for (const auto& d : s.condition_d) {
                nlohmann::json dd;
                dd["k"] = d.k;
                dd["n"] = d.n;
                dd["w"] = nlohmann::json::array({js::rat(d.w.re), js::rat(d.w.im)});
                dd["bound"] = js::rat(d.bound);
                dd["measured"] = d.measured;
                dd["pass"] = d.pass;
                if (!d.pass) all_ok = false;
                cd.push_back(dd);
            }
            j["condition_d"] = cd;
            write_file(out / ("towers_stage_" + std::to_string(s.n) + ".json"), j.dump(2) + "\n");
            std::ostringstream row;
            row << s.n << ",2^-" << s.n << "," << frac_str(s.e_total) << ","
                << frac_str(s.e_decomposition) << "," << frac_str(s.e_replaced) << ","
                << frac_str(s.e_uncovered) << "," << s.report.degree;
            rep.csv_row(row.str());
        }
        write_file(out / "report.txt", rep.text());
        write_file(out / "ledger.csv", rep.csv());
        if (!all_ok) throw CertificateFailure("Condition (D) certificate failed");
        return 0;
    }

    if (cfg.pipeline == "plot") {
        fs::path in = P.value("input", "");
        if (in.empty()) throw ConfigError("plot needs input");
        auto j = nlohmann::json::parse(read_file(in));
        auto res = js::decomposition_of(j);
        int ax1 = 1, ax2 = 2;
        if (P.contains("axes")) {
            ax1 = P.at("axes")[0].get<int>();
            ax2 = P.at("axes")[1].get<int>();
        } else if (res.dim > 2) {
            throw ConfigError("plot: projection axes required for dim > 2");
        }
        std::string svg;
        try {
            svg = plot_decomposition_svg(res, ax1, ax2);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        fs::path out = P.value("out", "plot.svg");
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_file(out, svg);
        return 0;
    }

    throw ConfigError("unknown pipeline: " + cfg.pipeline);
}

}  // namespace soltower
