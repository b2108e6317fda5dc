// soltower command line: staged solenoid builds, cube decompositions with
// separation certificates, product-union certificates, and tower pipelines.
// Exit codes: 0 success, 1 certificate/approximation failure, 2 config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "soltower/artifacts.hpp"

using nlohmann::json;
using namespace soltower;

namespace {

std::vector<long> parse_longs(const std::string& csv) {
    std::vector<long> out;
    std::istringstream is(csv);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stol(tok));
    return out;
}

int dispatch(const json& raw) {
    try {
        RunConfig cfg = parse_config(raw);
        int rc = run_pipeline(cfg);
        if (rc == 0) std::cout << "ok: " << cfg.pipeline << "\n";
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CertificateFailure& e) {
        std::cerr << "certificate failure: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int env_precision() {
    const char* p = std::getenv("SOLTOWER_PRECISION");
    return p ? std::atoi(p) : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"soltower: constructive Runge stages on solenoid towers and almost-polynomially-convex cube decompositions"};
    app.require_subcommand(1);

    std::string radix = "2,2,2", out = "out", polys = "desk", input, axes, eps = "1/10";
    std::string a_list, model = "solenoid", ks, ls, config_path, stage_dir;
    int stages = 3, depth = 0, count = 16, samples = 200, k = 2, dim = 2;
    long resolution = 64;
    std::uint64_t seed = 1;
    bool resume = false, half_open = false, witness = false;
    std::string caps;

    auto add_out = [&](CLI::App* c) { c->add_option("--out", out, "output directory"); };

    auto* ss = app.add_subcommand("solenoid-sample", "draw Haar samples at a rational resolution");
    ss->add_option("--radix", radix, "comma separated r_n (each >= 2)");
    ss->add_option("--depth", depth, "levels to sample (default: all)");
    ss->add_option("--resolution", resolution, "rational grid 1/resolution");
    ss->add_option("--seed", seed, "RNG seed");
    ss->add_option("--count", count, "number of samples");
    add_out(ss);

    auto* bd = app.add_subcommand("build", "staged construction of F_n");
    bd->add_option("--radix", radix);
    bd->add_option("--stages", stages);
    std::string sched = "default";
    bd->add_option("--eps-schedule", sched, "only \"default\" (10^{-(n-1)})");
    bd->add_option("--polys", polys, "desk | diagonal");
    bd->add_option("--caps", caps, "comma separated degree caps per stage");
    bd->add_flag("--resume", resume, "continue from stage files in --out");
    add_out(bd);

    auto* dr = app.add_subcommand("density-report", "density certificate from stored stages");
    dr->add_option("--stage-dir", stage_dir)->required();
    dr->add_option("--k", k);
    add_out(dr);

    auto* dc = app.add_subcommand("decompose-cubes", "almost-polynomially-convex decomposition");
    dc->add_option("--input", input, "cubes JSON file")->required();
    dc->add_option("--eps", eps, "measure budget (fraction)");
    dc->add_option("--dim", dim, "2d (2 or 4)");
    dc->add_flag("--half-open", half_open);
    dc->add_flag("--witness", witness, "emit a Kallin witness for the root split");
    add_out(dc);

    auto* pl = app.add_subcommand("plot", "SVG projection of a decomposition result");
    pl->add_option("--input", input, "result.json")->required();
    pl->add_option("--axes", axes, "two 1-based axes, e.g. 1,2");
    std::string plot_out = "plot.svg";
    pl->add_option("--out", plot_out, "output SVG path");

    auto* cp = app.add_subcommand("certify-products", "product-union separation chain");
    cp->add_option("--ks", ks, "K squares: x0,y0,x1,y1;... (fractions)")->required();
    cp->add_option("--ls", ls, "L squares, same format")->required();
    add_out(cp);

    auto* tv = app.add_subcommand("towers-validate", "nested-tower hypotheses and coverage");
    tv->add_option("--radix", radix, "a_n = R_n from this radix");
    tv->add_option("--a", a_list, "explicit a_n list (fractions)");
    tv->add_option("--model", model, "solenoid | sampled");
    tv->add_option("--samples", samples);
    tv->add_option("--seed", seed);
    add_out(tv);

    auto* tb = app.add_subcommand("towers-build", "general staged construction on towers");
    tb->add_option("--radix", radix);
    tb->add_option("--stages", stages);
    tb->add_option("--polys", polys, "desk | diagonal");
    tb->add_option("--caps", caps);
    add_out(tb);

    auto* rn = app.add_subcommand("run", "run a pipeline from a JSON config");
    rn->add_option("--config", config_path, "config JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    json cfg;
    if (ss->parsed()) {
        cfg = {{"pipeline", "solenoid-sample"}, {"radix", parse_longs(radix)},
               {"resolution", resolution}, {"seed", seed}, {"count", count}, {"out", out}};
        if (depth > 0) cfg["depth"] = depth;
    } else if (bd->parsed()) {
        cfg = {{"pipeline", "build"}, {"radix", parse_longs(radix)}, {"stages", stages},
               {"eps_schedule", sched}, {"polys", polys}, {"out", out}};
        if (!caps.empty()) cfg["caps"] = parse_longs(caps);
        if (resume) cfg["resume"] = true;
        if (env_precision() > 0) cfg["precision"] = env_precision();
    } else if (dr->parsed()) {
        cfg = {{"pipeline", "density-report"}, {"stage_dir", stage_dir}, {"k", k}, {"out", out}};
    } else if (dc->parsed()) {
        cfg = {{"pipeline", "decompose-cubes"}, {"input", input}, {"eps", eps}, {"dim", dim},
               {"out", out}};
        if (half_open) cfg["half_open"] = true;
        if (witness) cfg["witness"] = true;
    } else if (pl->parsed()) {
        cfg = {{"pipeline", "plot"}, {"input", input}, {"out", plot_out}};
        if (!axes.empty()) cfg["axes"] = parse_longs(axes);
    } else if (cp->parsed()) {
        auto parse_rects = [](const std::string& arg) {
            json arr = json::array();
            std::istringstream is(arg);
            std::string rect;
            while (std::getline(is, rect, ';')) {
                std::istringstream rs(rect);
                std::string tok;
                json r = json::array();
                while (std::getline(rs, tok, ',')) r.push_back(tok);
                arr.push_back(r);
            }
            return arr;
        };
        cfg = {{"pipeline", "certify-products"}, {"ks", parse_rects(ks)}, {"ls", parse_rects(ls)},
               {"out", out}};
    } else if (tv->parsed()) {
        cfg = {{"pipeline", "towers-validate"}, {"model", model}, {"samples", samples},
               {"seed", seed}, {"out", out}};
        if (!a_list.empty()) {
            json arr = json::array();
            std::istringstream is(a_list);
            std::string tok;
            while (std::getline(is, tok, ',')) arr.push_back(tok);
            cfg["a"] = arr;
        } else {
            cfg["radix"] = parse_longs(radix);
        }
    } else if (tb->parsed()) {
        cfg = {{"pipeline", "towers-build"}, {"radix", parse_longs(radix)}, {"stages", stages},
               {"polys", polys}, {"out", out}};
        if (!caps.empty()) cfg["caps"] = parse_longs(caps);
        if (env_precision() > 0) cfg["precision"] = env_precision();
    } else if (rn->parsed()) {
        try {
            cfg = json::parse(read_file(config_path));
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
    }
    return dispatch(cfg);
}
