#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "henon/harness.hpp"

namespace {

struct Overrides {
    std::optional<double> tol, max_seg, max_turn, band_t, cross_tol, converge_tol;
    std::optional<int> horizon, depth, period;
    std::optional<std::size_t> node_cap;
    std::optional<std::string> mode, out;
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> seed;
    bool extended = false;
    bool no_cache = false;
};

void apply(henon::RunConfig& c, const Overrides& o) {
    if (o.tol) c.green.tol = *o.tol;
    if (o.horizon) c.green.horizon = *o.horizon;
    if (o.extended) c.extended_precision = true;
    if (o.depth) c.depth = *o.depth;
    if (o.max_seg) c.max_seg = *o.max_seg;
    if (o.max_turn) c.max_turn = *o.max_turn;
    if (o.node_cap) c.node_cap = *o.node_cap;
    if (o.mode) {
        if (*o.mode == "bends")
            c.mode = henon::AtlasMode::bends;
        else if (*o.mode == "level")
            c.mode = henon::AtlasMode::level;
        else
            throw henon::Error(henon::ErrorCode::config, "--mode must be bends or level");
    }
    if (o.band_t) c.band_t = *o.band_t;
    if (o.period) c.max_period = *o.period;
    if (o.cross_tol) c.cross_tol = *o.cross_tol;
    if (o.converge_tol) c.converge_tol = *o.converge_tol;
    if (o.out) c.out_dir = *o.out;
    if (o.workers) c.workers = *o.workers;
    if (o.seed) c.seed = *o.seed;
    if (o.no_cache) c.use_cache = false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"henon: Green functions, critical atlases and Lyapunov exponents of real horseshoe Henon maps"};
    app.set_version_flag("--version", henon::tool_version);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    Overrides ov;
    henon::CommandArgs args;
    std::vector<std::string> point_text;
    std::string points_file;

    app.add_option("--config", config_path, "run config JSON")->required()->check(CLI::ExistingFile);
    app.add_option("--out", ov.out, "output directory");
    app.add_option("--workers", ov.workers, "worker threads, 0 = hardware");
    app.add_option("--seed", ov.seed, "sampling seed");
    app.add_flag("--no-cache", ov.no_cache, "skip the artifact cache");
    app.add_option("--tol", ov.tol);
    app.add_option("--horizon", ov.horizon);
    app.add_flag("--extended", ov.extended, "extended-precision cross check");
    app.add_option("--depth", ov.depth);
    app.add_option("--max-seg", ov.max_seg);
    app.add_option("--max-turn", ov.max_turn);
    app.add_option("--node-cap", ov.node_cap);
    app.add_option("--mode", ov.mode)->check(CLI::IsMember({"bends", "level"}));
    app.add_option("--band-t", ov.band_t);
    app.add_option("--period", ov.period);
    app.add_option("--cross-tol", ov.cross_tol);
    app.add_option("--converge-tol", ov.converge_tol);

    std::optional<henon::Command> cmd;
    auto pick = [&](CLI::App* sub, henon::Command c) {
        sub->fallthrough();
        sub->callback([&cmd, c] { cmd = c; });
        return sub;
    };
    auto with_points = [&](CLI::App* sub) {
        sub->add_option("--point", point_text, "x,y or x_re,x_im,y_re,y_im")->take_all()->allow_extra_args(false);
        sub->add_option("--points", points_file, "CSV of points")->check(CLI::ExistingFile);
    };

    auto* green = app.add_subcommand("green", "Green function values");
    green->require_subcommand(1);
    green->fallthrough();
    auto* geval = pick(green->add_subcommand("eval", "G+ or G- at points"), henon::Command::green_eval);
    auto* ggrad = pick(green->add_subcommand("grad", "G and its gradient at points"), henon::Command::green_grad);
    for (auto* s : {geval, ggrad}) {
        with_points(s);
        s->add_flag("--minus", args.minus, "use G-");
    }
    auto* bott = pick(app.add_subcommand("bottcher", "Bottcher coordinate at points"), henon::Command::bottcher);
    with_points(bott);
    bott->add_flag("--minus", args.minus);

    auto* tang = app.add_subcommand("tangency", "tangency determinant");
    tang->require_subcommand(1);
    tang->fallthrough();
    auto* tscan = pick(tang->add_subcommand("scan", "grid scan with sign-change seeds"), henon::Command::tangency_scan);
    tscan->add_option("--x0", args.x0);
    tscan->add_option("--x1", args.x1);
    tscan->add_option("--y0", args.y0);
    tscan->add_option("--y1", args.y1);
    tscan->add_option("--nx", args.nx)->check(CLI::Range(2, 100000));
    tscan->add_option("--ny", args.ny)->check(CLI::Range(1, 100000));

    auto* sad = app.add_subcommand("saddles", "periodic saddles");
    sad->require_subcommand(1);
    sad->fallthrough();
    pick(sad->add_subcommand("list", "all period-n points"), henon::Command::saddles);

    auto* man = app.add_subcommand("manifold", "unstable manifold");
    man->require_subcommand(1);
    man->fallthrough();
    pick(man->add_subcommand("grow", "grow W^u of the fixed saddle"), henon::Command::manifold);

    auto* crit = app.add_subcommand("crit", "critical locus");
    crit->require_subcommand(1);
    crit->fallthrough();
    pick(crit->add_subcommand("scan", "critical atoms of G+ on the curve"), henon::Command::crit_scan);

    auto* lyap = app.add_subcommand("lyap", "Lyapunov exponents");
    lyap->require_subcommand(1);
    lyap->fallthrough();
    pick(lyap->add_subcommand("orbits", "periodic-orbit averages"), henon::Command::lyap_orbits);
    pick(lyap->add_subcommand("formula", "log d plus the atom integral"), henon::Command::lyap_formula);

    pick(app.add_subcommand("verify", "full pipeline and report"), henon::Command::verify);
    pick(app.add_subcommand("lemma-checks", "property suite"), henon::Command::lemma_checks);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : henon::exit_config;
    }
    if (!cmd) {
        std::cerr << app.help();
        return henon::exit_config;
    }

    henon::RunConfig cfg;
    try {
        cfg = henon::RunConfig::load(config_path);
        apply(cfg, ov);
        for (auto& t : point_text) args.points.push_back(henon::parse_point(t));
        if (!points_file.empty())
            for (auto& p : henon::read_points_csv(points_file)) args.points.push_back(p);
    } catch (const henon::Error& e) {
        std::cerr << "{\"error\":\"" << henon::error_name(e.code()) << "\",\"message\":"
                  << nlohmann::json(std::string(e.what())).dump() << ",\"exit\":" << henon::exit_code_for(e.code())
                  << "}\n";
        return henon::exit_code_for(e.code());
    }
    return henon::run(cfg, *cmd, args, std::cerr);
}
