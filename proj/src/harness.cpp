#include "henon/harness.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "henon/checks.hpp"
#include "henon/exponents.hpp"
#include "henon/extended.hpp"
#include "henon/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace henon {

namespace {

void dump_rec(const json& j, int indent, int level, std::string& out) {
    auto pad = [&](int l) {
        if (indent > 0) out += '\n' + std::string(std::size_t(indent * l), ' ');
    };
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                pad(level + 1);
                out += json(it.key()).dump();
                out += indent > 0 ? ": " : ":";
                dump_rec(it.value(), indent, level + 1, out);
            }
            pad(level);
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (auto& v : j) {
                if (!first) out += ',';
                first = false;
                pad(level + 1);
                dump_rec(v, indent, level + 1, out);
            }
            pad(level);
            out += ']';
            return;
        }
        case json::value_t::number_float: {
            double v = j.get<double>();
            out += std::isfinite(v) ? fmt17(v) : "null";
            return;
        }
        default:
            out += j.dump();
    }
}

std::string timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::config, "cannot write " + p.string());
    out << text;
}

json cplx_json(cplx c) { return json::array({c.real(), c.imag()}); }

const std::set<std::string>& keys_for(const std::string& block) {
    static const std::map<std::string, std::set<std::string>> k = {
        {"", {"map", "precision", "curve", "atlas", "exponent", "tolerances", "output", "seed", "workers"}},
        {"precision", {"tol", "horizon", "extended_precision"}},
        {"curve", {"depth", "max_seg", "max_turn", "node_cap"}},
        {"atlas", {"mode", "band_t"}},
        {"exponent", {"max_period"}},
        {"tolerances", {"cross", "converge"}},
        {"output", {"dir", "cache_dir", "use_cache"}},
    };
    return k.at(block);
}

void check_keys(const json& j, const std::string& block) {
    if (!j.is_object()) throw Error(ErrorCode::config, "\"" + block + "\" must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!keys_for(block).count(it.key()))
            throw Error(ErrorCode::config, "unknown key \"" + it.key() + "\"" + (block.empty() ? "" : " in " + block));
}

// Artifacts written by one command.
struct Output {
    fs::path dir;
    std::vector<std::string> files;
    void text(const std::string& name, const std::string& body) {
        write_file(dir / name, body);
        files.push_back(name);
    }
    void js(const std::string& name, const json& j) { text(name, dump17(j) + "\n"); }
};

struct Context {
    const RunConfig& cfg;
    const CommandArgs& args;
    Command cmd;
    HenonSystem sys;
    std::string config_hash;
    std::ostream& log;
    Output out;

    json provenance() const {
        return {{"tool", tool_version},
                {"command", command_name(cmd)},
                {"config", cfg.to_json()},
                {"config_hash", config_hash},
                {"map_hash", sha256_hex(dump17(system_to_json(sys), 0))},
                {"timestamp", timestamp()}};
    }
    void gate() {
        auto h = check_horseshoe(sys);
        if (!h.ok) throw Error(ErrorCode::horseshoe_check_failed, h.diagnostic);
        log << "horseshoe gate passed: box " << fmt17(h.box_radius) << ", " << h.crossings << " crossings\n";
    }
    AtlasOptions atlas_options() const {
        AtlasOptions o;
        o.green = cfg.green;
        return o;
    }
};

std::string green_header(bool ext) {
    return std::string("x_re,x_im,y_re,y_im,value,err,grad_x_re,grad_x_im,grad_y_re,grad_y_im,iters") +
           (ext ? ",ext_value" : "") + "\n";
}

std::string point_cols(const PlanePoint& z) {
    return fmt17(z.x.real()) + "," + fmt17(z.x.imag()) + "," + fmt17(z.y.real()) + "," + fmt17(z.y.imag());
}

std::string green_row(const PlanePoint& z, const GreenValue& g) {
    return point_cols(z) + "," + fmt17(g.value) + "," + fmt17(g.error_bound) + "," + fmt17(g.gradient.bx.real()) +
           "," + fmt17(g.gradient.bx.imag()) + "," + fmt17(g.gradient.by.real()) + "," +
           fmt17(g.gradient.by.imag()) + "," + std::to_string(g.iterations_used);
}

int cmd_green(Context& c, bool grad) {
    const auto& pts = c.args.points;
    if (pts.empty()) throw Error(ErrorCode::config, "no points given");
    std::vector<std::string> rows(pts.size());
    const bool ext = c.cfg.extended_precision;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& z = pts[i];
        GreenValue g = c.args.minus ? green_minus(c.sys, z, c.cfg.green) : green_plus(c.sys, z, c.cfg.green);
        if (grad && !g.escaped)
            throw Error(ErrorCode::not_escaped, "point " + std::to_string(i) + " does not escape within the horizon");
        if (g.escaped) {
            auto gg = c.args.minus ? grad_green_minus(c.sys, z, c.cfg.green) : grad_green_plus(c.sys, z, c.cfg.green);
            g.gradient = gg.gradient;
            g.gradient_error = gg.gradient_error;
        }
        rows[i] = green_row(z, g);
        if (ext) rows[i] += "," + (g.escaped ? fmt17(green_direct_extended(c.sys, z, 24, !c.args.minus)) : fmt17(0.0));
    }
    std::string body = green_header(ext);
    for (auto& r : rows) body += r + "\n";
    c.out.text(grad ? "green_grad.csv" : "green.csv", body);
    return exit_ok;
}

int cmd_bottcher(Context& c) {
    if (c.args.points.empty()) throw Error(ErrorCode::config, "no points given");
    std::string body = "x_re,x_im,y_re,y_im,phi_re,phi_im,log_phi_re,log_phi_im,err\n";
    for (auto& z : c.args.points) {
        auto b = bottcher_plus(c.sys, z, c.cfg.green);
        body += point_cols(z) + "," + fmt17(b.value.real()) + "," + fmt17(b.value.imag()) + "," +
                fmt17(b.log_value.real()) + "," + fmt17(b.log_value.imag()) + "," + fmt17(b.error_bound) + "\n";
    }
    c.out.text("bottcher.csv", body);
    return exit_ok;
}

int cmd_tangency(Context& c) {
    const auto& a = c.args;
    auto sc = tangency_scan(c.sys, a.x0, a.x1, a.y0, a.y1, a.nx, a.ny, c.cfg.green);
    const std::size_t nx = sc.xs.size();
    std::vector<std::string> rows(sc.det.size());
    parallel_for(rows.size(), [&](std::size_t k) {
        PlanePoint z{sc.xs[k % nx], sc.ys[k / nx]};
        GreenEngine e(c.sys, c.cfg.green);
        rows[k] = green_row(z, e.plus(z)) + "," + fmt17(sc.det[k].real()) + "," + fmt17(sc.det[k].imag());
    });
    std::string body = "x_re,x_im,y_re,y_im,value,err,grad_x_re,grad_x_im,grad_y_re,grad_y_im,iters,det_re,det_im\n";
    for (auto& r : rows) body += r + "\n";
    c.out.text("tangency.csv", body);
    std::string seeds = "i,j,x0,x1,y,zero_x,zero_y,det_abs,accepted\n";
    for (std::size_t k = 0; k < sc.seeds.size(); ++k) {
        const auto& s = sc.seeds[k];
        const auto& z = sc.zeros[k];
        seeds += std::to_string(s.i) + "," + std::to_string(s.j) + "," + fmt17(s.x0) + "," + fmt17(s.x1) + "," +
                 fmt17(s.y) + "," + fmt17(z.z.x.real()) + "," + fmt17(z.z.y.real()) + "," + fmt17(std::abs(z.det)) +
                 "," + (z.accepted ? "1" : "0") + "\n";
    }
    c.out.text("tangency_seeds.csv", seeds);
    int acc = 0;
    for (auto& z : sc.zeros) acc += z.accepted;
    c.log << sc.seeds.size() << " sign changes, " << acc << " zeros below 1e-10\n";
    return exit_ok;
}

int cmd_saddles(Context& c) {
    c.gate();
    const int n = c.cfg.max_period;
    auto orbits = all_periodic_orbits(c.sys, n, true);
    std::string body = "itinerary,point_index,x,y,lambda_u_re,lambda_u_im,lambda_s_re,lambda_s_im,residual\n";
    std::uint64_t count = 0;
    for (auto& o : orbits) {
        for (int k = 0; k < o.multiplicity; ++k) {
            Itinerary rot;
            for (int j = 0; j < n; ++j) rot.symbols.push_back(o.itinerary.symbols[(j + k) % n]);
            body += rot.str() + "," + std::to_string(k) + "," + fmt17(o.orbit[k].x.real()) + "," +
                    fmt17(o.orbit[k].y.real()) + "," + fmt17(o.unstable_eigenvalue.real()) + "," +
                    fmt17(o.unstable_eigenvalue.imag()) + "," + fmt17(o.stable_eigenvalue.real()) + "," +
                    fmt17(o.stable_eigenvalue.imag()) + "," + fmt17(o.residual) + "\n";
            ++count;
        }
    }
    c.out.text("saddles.csv", body);
    c.log << count << " points of period " << n << " in " << orbits.size() << " cycles\n";
    if (double(count) != std::pow(double(c.sys.degree()), n))
        throw Error(ErrorCode::structure_mismatch, "found " + std::to_string(count) + " period-" + std::to_string(n) +
                                                       " points");
    return exit_ok;
}

SaddleData fixed_saddle(const HenonSystem& sys) { return periodic_orbit(sys, Itinerary{{sys.degree() - 1}}); }

json curve_summary(const UnstableCurve& cv) {
    return {{"depth", cv.depth},
            {"pieces", cv.pieces.size()},
            {"links", cv.links.size()},
            {"node_count", cv.node_count},
            {"full_crossings", cv.full_crossings()},
            {"bad_crossings", cv.bad_crossings},
            {"box_radius", cv.box_radius},
            {"max_segment", cv.params.max_segment},
            {"max_turn", cv.params.max_turn},
            {"max_segment_seen", cv.max_segment_seen},
            {"max_turn_seen", cv.max_turn_seen},
            {"truncated", cv.truncated},
            {"seed_length", cv.seed_length},
            {"seed_residual_ratio", cv.seed_residual_ratio},
            {"seed_consistency", cv.seed_consistency},
            {"push_consistency", cv.push_consistency}};
}

std::string word_text(const std::vector<int>& w) {
    std::string s;
    for (int v : w) s += char('0' + v);
    return s;
}

int cmd_manifold(Context& c) {
    c.gate();
    auto cv = grow_unstable_curve(c.sys, fixed_saddle(c.sys), c.cfg.depth, c.cfg.refine());
    std::string nodes = "piece,word,xi,x,y\n";
    for (std::size_t i = 0; i < cv.pieces.size(); ++i)
        for (auto& n : cv.pieces[i].nodes)
            nodes += std::to_string(i) + "," + word_text(cv.pieces[i].word) + "," + fmt17(n.xi) + "," + fmt17(n.x) +
                     "," + fmt17(n.y) + "\n";
    c.out.text("manifold_nodes.csv", nodes);
    std::string poly;
    for (auto& p : cv.polyline()) poly += fmt17(p.x.real()) + " " + fmt17(p.y.real()) + "\n";
    c.out.text("manifold_polyline.txt", poly);
    json j = curve_summary(cv);
    j["provenance"] = c.provenance();
    c.out.js("manifold_summary.json", j);
    if (cv.truncated) c.log << "warning: node cap reached, curve truncated\n";
    c.log << cv.node_count << " nodes, " << cv.full_crossings() << " full crossings\n";
    return exit_ok;
}

int cmd_crit(Context& c) {
    c.gate();
    auto cv = grow_unstable_curve(c.sys, fixed_saddle(c.sys), c.cfg.depth, c.cfg.refine());
    auto A = c.cfg.mode == AtlasMode::bends ? atlas_bends(c.sys, cv, c.atlas_options())
                                            : atlas_level(c.sys, cv, c.cfg.band_t, c.atlas_options());
    std::string body = "atom_id,x,y,g_plus,weight,generation,bend,residual,reality_dev\n";
    for (std::size_t i = 0; i < A.atoms.size(); ++i) {
        const auto& a = A.atoms[i];
        body += std::to_string(i) + "," + fmt17(a.location.x.real()) + "," + fmt17(a.location.y.real()) + "," +
                fmt17(a.g_plus) + "," + fmt17(a.weight) + "," + std::to_string(a.generation) + "," +
                (A.mode == AtlasMode::bends ? std::to_string(a.bend) : std::string("NONE")) + "," +
                fmt17(a.residual) + "," + fmt17(a.reality_dev) + "\n";
    }
    c.out.text("crit_atoms.csv", body);
    json j = {{"depth", A.depth},
              {"mode", A.mode == AtlasMode::bends ? "bends" : "level"},
              {"total_mass", A.total_mass},
              {"integral_estimate", A.integral},
              {"per_bend_masses", A.per_bend_mass},
              {"per_bend_counts", A.per_bend_count},
              {"atoms", A.atoms.size()},
              {"gaps", A.gap_count},
              {"min_g_plus", A.min_g},
              {"max_g_plus", A.max_g},
              {"max_residual", A.max_residual},
              {"max_reality_dev", A.max_reality_dev},
              {"warnings", A.warnings},
              {"curve", curve_summary(cv)},
              {"provenance", c.provenance()}};
    if (A.mode == AtlasMode::level) {
        j["band_t"] = A.band_t;
        j["lowest_generation"] = A.generations_used;
    }
    c.out.js("crit_summary.json", j);
    c.log << A.atoms.size() << " atoms, integral " << fmt17(A.integral) << "\n";
    return exit_ok;
}

json periodic_json(const PeriodicEstimate& p) {
    return {{"period", p.period},
            {"lambda_plus", p.lambda_plus},
            {"lambda_minus", p.lambda_minus},
            {"fixed_points", p.fixed_points},
            {"orbits", p.orbits},
            {"max_identity_error", p.max_identity_error},
            {"min_unstable_rate", p.min_unstable_rate},
            {"max_residual", p.max_residual}};
}

json depth_json(const DepthRow& r, double log_d, double sign) {
    return {{"depth", r.depth},
            {"atoms", r.atoms},
            {"integral", r.integral},
            {"total_mass", r.total_mass},
            {"min_g_plus", r.min_g},
            {"max_g_plus", r.max_g},
            {"lambda", sign * (log_d + r.integral)}};
}

int cmd_lyap_orbits(Context& c) {
    c.gate();
    auto rows = lyapunov_periodic(c.sys, c.cfg.max_period);
    std::string body = "period,lambda_plus,lambda_minus,fixed_points,orbits,max_identity_error,min_unstable_rate\n";
    json arr = json::array();
    for (auto& p : rows) {
        body += std::to_string(p.period) + "," + fmt17(p.lambda_plus) + "," + fmt17(p.lambda_minus) + "," +
                std::to_string(p.fixed_points) + "," + std::to_string(p.orbits) + "," +
                fmt17(p.max_identity_error) + "," + fmt17(p.min_unstable_rate) + "\n";
        arr.push_back(periodic_json(p));
    }
    c.out.text("lyap_orbits.csv", body);
    c.out.js("lyap_orbits.json", {{"rows", arr}, {"provenance", c.provenance()}});
    c.log << "lambda+ " << fmt17(rows.back().lambda_plus) << "\n";
    return exit_ok;
}

int cmd_lyap_formula(Context& c) {
    c.gate();
    auto o = c.atlas_options();
    o.reality = false;
    auto seq = bends_sequence(c.sys, fixed_saddle(c.sys), c.cfg.depth, c.cfg.refine(), o);
    const double log_d = std::log(double(c.sys.degree()));
    std::string body = "depth,atoms,integral,total_mass,min_g_plus,max_g_plus,lambda_plus_formula\n";
    json arr = json::array();
    for (auto& r : seq.rows) {
        body += std::to_string(r.depth) + "," + std::to_string(r.atoms) + "," + fmt17(r.integral) + "," +
                fmt17(r.total_mass) + "," + fmt17(r.min_g) + "," + fmt17(r.max_g) + "," + fmt17(log_d + r.integral) +
                "\n";
        arr.push_back(depth_json(r, log_d, 1));
    }
    auto f = lyapunov_formula(c.sys, seq.atlas);
    c.out.text("lyap_formula.csv", body);
    c.out.js("lyap_formula.json", {{"rows", arr},
                                   {"lambda_plus_formula", f.value},
                                   {"log_d", f.log_d},
                                   {"integral_term_plus", f.integral},
                                   {"degraded", f.degraded},
                                   {"provenance", c.provenance()}});
    c.log << "lambda+ (formula) " << fmt17(f.value) << "\n";
    return exit_ok;
}

int cmd_verify(Context& c) {
    auto h = check_horseshoe(c.sys);
    if (!h.ok) throw Error(ErrorCode::horseshoe_check_failed, h.diagnostic);
    ReportSettings s;
    s.period = c.cfg.max_period;
    s.depth = c.cfg.depth;
    s.band_t = c.cfg.band_t;
    s.refine = c.cfg.refine();
    s.atlas = c.atlas_options();
    s.cross_tol = c.cfg.cross_tol;
    s.converge_tol = c.cfg.converge_tol;
    auto r = make_report(c.sys, s);
    const double log_d = r.log_d;

    json verdicts = json::object();
    for (auto& v : r.verdicts) verdicts[v.first] = v.second;
    json per = json::array(), fr = json::array(), mr = json::array();
    for (auto& p : r.periodic_rows) per.push_back(periodic_json(p));
    for (auto& d : r.formula_rows) fr.push_back(depth_json(d, log_d, 1));
    for (auto& d : r.minus_rows) mr.push_back(depth_json(d, log_d, -1));
    json j = {{"lambda_plus_orbits", r.lambda_plus_orbits},
              {"lambda_plus_formula", r.lambda_plus_formula},
              {"lambda_minus_orbits", r.lambda_minus_orbits},
              {"lambda_minus_formula", r.lambda_minus_formula},
              {"log_d", r.log_d},
              {"log_abs_det", r.log_abs_det},
              {"integral_term_plus", r.integral_term_plus},
              {"integral_term_minus", r.integral_term_minus},
              {"residual_cross", r.residual_cross},
              {"residual_jacobian", r.residual_jacobian},
              {"a4_lower", r.a4_lower},
              {"a4_upper", r.a4_upper},
              {"a4_lower_unit_mass", r.a4_lower_unit},
              {"a4_upper_unit_mass", r.a4_upper_unit},
              {"level_band_t", r.level_t},
              {"level_integral", r.level_integral},
              {"depth", r.depth},
              {"period", r.period},
              {"max_identity_error", r.max_identity_error},
              {"periodic_rows", per},
              {"formula_rows", fr},
              {"minus_rows", mr},
              {"verdicts", verdicts},
              {"ok", r.ok()},
              {"diagnostics", r.diagnostics},
              {"horseshoe", {{"box_radius", h.box_radius}, {"crossings", h.crossings}}},
              {"provenance", c.provenance()}};
    c.out.js("report.json", j);
    std::string csv = "series,index,value\n";
    for (auto& p : r.periodic_rows) csv += "orbits," + std::to_string(p.period) + "," + fmt17(p.lambda_plus) + "\n";
    for (auto& d : r.formula_rows)
        csv += "formula," + std::to_string(d.depth) + "," + fmt17(log_d + d.integral) + "\n";
    for (auto& d : r.minus_rows)
        csv += "formula_minus," + std::to_string(d.depth) + "," + fmt17(-(log_d + d.integral)) + "\n";
    c.out.text("convergence.csv", csv);
    for (auto& v : r.verdicts)
        if (!v.second) c.log << "verdict failed: " << v.first << "\n";
    for (auto& d : r.diagnostics) c.log << "note: " << d << "\n";
    c.log << "lambda+ orbits " << fmt17(r.lambda_plus_orbits) << " formula " << fmt17(r.lambda_plus_formula)
          << " residual " << fmt17(r.residual_cross) << "\n";
    return r.ok() ? exit_ok : exit_tolerance;
}

int cmd_lemma(Context& c) {
    LemmaSettings s;
    s.seed = c.cfg.seed;
    s.green = c.cfg.green;
    auto res = lemma_checks(c.sys, s);
    json arr = json::array();
    bool all = true;
    for (auto& r : res) {
        arr.push_back({{"name", r.name},
                       {"pass", r.pass},
                       {"value", r.value},
                       {"threshold", r.threshold},
                       {"samples", r.samples},
                       {"detail", r.detail}});
        all = all && r.pass;
        c.log << (r.pass ? "pass " : "FAIL ") << r.name << " " << fmt17(r.value) << "\n";
    }
    c.out.js("lemma_checks.json", {{"checks", arr}, {"all_pass", all}, {"provenance", c.provenance()}});
    return all ? exit_ok : exit_tolerance;
}

int dispatch(Context& c) {
    switch (c.cmd) {
        case Command::green_eval: return cmd_green(c, false);
        case Command::green_grad: return cmd_green(c, true);
        case Command::bottcher: return cmd_bottcher(c);
        case Command::tangency_scan: return cmd_tangency(c);
        case Command::saddles: return cmd_saddles(c);
        case Command::manifold: return cmd_manifold(c);
        case Command::crit_scan: return cmd_crit(c);
        case Command::lyap_orbits: return cmd_lyap_orbits(c);
        case Command::lyap_formula: return cmd_lyap_formula(c);
        case Command::verify: return cmd_verify(c);
        case Command::lemma_checks: return cmd_lemma(c);
    }
    return exit_config;
}

json args_json(Command cmd, const CommandArgs& a) {
    json j = json::object();
    if (cmd == Command::green_eval || cmd == Command::green_grad || cmd == Command::bottcher) {
        json pts = json::array();
        for (auto& z : a.points) pts.push_back({cplx_json(z.x), cplx_json(z.y)});
        j["points"] = pts;
        j["minus"] = a.minus;
    }
    if (cmd == Command::tangency_scan) j["grid"] = {a.x0, a.x1, a.y0, a.y1, a.nx, a.ny};
    return j;
}

}  // namespace

std::string dump17(const json& j, int indent) {
    std::string out;
    dump_rec(j, indent, 0, out);
    return out;
}

const char* command_name(Command c) {
    switch (c) {
        case Command::green_eval: return "green-eval";
        case Command::green_grad: return "green-grad";
        case Command::bottcher: return "bottcher";
        case Command::tangency_scan: return "tangency-scan";
        case Command::saddles: return "saddles";
        case Command::manifold: return "manifold";
        case Command::crit_scan: return "crit-scan";
        case Command::lyap_orbits: return "lyap-orbits";
        case Command::lyap_formula: return "lyap-formula";
        case Command::verify: return "verify";
        case Command::lemma_checks: return "lemma-checks";
    }
    return "?";
}

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::argument:
        case ErrorCode::config: return exit_config;
        case ErrorCode::no_orbit:
        case ErrorCode::nonunique_critical:
        case ErrorCode::structure_mismatch: return exit_structure;
        case ErrorCode::horseshoe_check_failed: return exit_gate;
        case ErrorCode::not_escaped:
        case ErrorCode::domain:
        case ErrorCode::tolerance: return exit_tolerance;
    }
    return exit_tolerance;
}

RunConfig RunConfig::from_json(const json& j) {
    check_keys(j, "");
    RunConfig c;
    if (!j.contains("map")) throw Error(ErrorCode::config, "config needs a \"map\" block");
    c.map = j["map"];
    try {
        if (j.contains("precision")) {
            auto& p = j["precision"];
            check_keys(p, "precision");
            c.green.tol = p.value("tol", c.green.tol);
            c.green.horizon = p.value("horizon", c.green.horizon);
            c.extended_precision = p.value("extended_precision", c.extended_precision);
        }
        if (j.contains("curve")) {
            auto& p = j["curve"];
            check_keys(p, "curve");
            c.depth = p.value("depth", c.depth);
            c.max_seg = p.value("max_seg", c.max_seg);
            c.max_turn = p.value("max_turn", c.max_turn);
            c.node_cap = p.value("node_cap", c.node_cap);
        }
        if (j.contains("atlas")) {
            auto& p = j["atlas"];
            check_keys(p, "atlas");
            std::string m = p.value("mode", std::string("bends"));
            if (m == "bends")
                c.mode = AtlasMode::bends;
            else if (m == "level")
                c.mode = AtlasMode::level;
            else
                throw Error(ErrorCode::config, "atlas mode must be bends or level");
            c.band_t = p.value("band_t", c.band_t);
        }
        if (j.contains("exponent")) {
            check_keys(j["exponent"], "exponent");
            c.max_period = j["exponent"].value("max_period", c.max_period);
        }
        if (j.contains("tolerances")) {
            auto& p = j["tolerances"];
            check_keys(p, "tolerances");
            c.cross_tol = p.value("cross", c.cross_tol);
            c.converge_tol = p.value("converge", c.converge_tol);
        }
        if (j.contains("output")) {
            auto& p = j["output"];
            check_keys(p, "output");
            c.out_dir = p.value("dir", c.out_dir);
            c.cache_dir = p.value("cache_dir", c.cache_dir);
            c.use_cache = p.value("use_cache", c.use_cache);
        }
        c.seed = j.value("seed", c.seed);
        c.workers = j.value("workers", c.workers);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("config: ") + e.what());
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config, "cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("config parse error: ") + e.what());
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    return {{"map", map},
            {"precision", {{"tol", green.tol}, {"horizon", green.horizon}, {"extended_precision", extended_precision}}},
            {"curve", {{"depth", depth}, {"max_seg", max_seg}, {"max_turn", max_turn}, {"node_cap", node_cap}}},
            {"atlas", {{"mode", mode == AtlasMode::bends ? "bends" : "level"}, {"band_t", band_t}}},
            {"exponent", {{"max_period", max_period}}},
            {"tolerances", {{"cross", cross_tol}, {"converge", converge_tol}}},
            {"seed", seed}};
}

void RunConfig::validate() const {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw Error(ErrorCode::config, what);
    };
    need(green.tol > 0, "precision.tol must be positive");
    need(green.horizon >= 1, "precision.horizon must be >= 1");
    need(depth >= 2, "curve.depth must be >= 2");
    need(max_seg >= 0, "curve.max_seg must be >= 0");
    need(max_turn > 0, "curve.max_turn must be positive");
    need(node_cap > 0, "curve.node_cap must be positive");
    need(band_t > 0, "atlas.band_t must be positive");
    need(max_period >= 2, "exponent.max_period must be >= 2");
    need(cross_tol > 0 && converge_tol > 0, "tolerances must be positive");
    system();
}

HenonSystem RunConfig::system() const {
    try {
        return system_from_json(map);
    } catch (const Error& e) {
        throw Error(ErrorCode::config, e.what());
    }
}

RefineParams RunConfig::refine() const {
    RefineParams r;
    r.max_segment = max_seg;
    r.max_turn = max_turn;
    r.node_cap = node_cap;
    return r;
}

json CacheManifest::to_json() const {
    json a = json::array();
    for (auto& [name, hash] : artifacts) a.push_back({{"file", name}, {"sha256", hash}});
    return {{"config_hash", config_hash}, {"tool", tool}, {"artifacts", a}, {"exit", exit_code}};
}

CacheManifest CacheManifest::from_json(const json& j) {
    CacheManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.tool = j.at("tool").get<std::string>();
    m.exit_code = j.at("exit").get<int>();
    for (auto& a : j.at("artifacts")) m.artifacts.push_back({a.at("file"), a.at("sha256")});
    return m;
}

int run(const RunConfig& cfg, Command cmd, const CommandArgs& args, std::ostream& log) {
    auto fail = [&](ErrorCode code, const std::string& msg) {
        int rc = exit_code_for(code);
        json e = {{"error", error_name(code)}, {"message", msg}, {"exit", rc}, {"command", command_name(cmd)}};
        log << dump17(e, 0) << "\n";
        std::error_code ec;
        fs::create_directories(cfg.out_dir, ec);
        if (!ec) write_file(fs::path(cfg.out_dir) / "error.json", dump17(e) + "\n");
        return rc;
    };
    try {
        cfg.validate();
        set_worker_count(cfg.workers);
        const fs::path out = cfg.out_dir;
        fs::create_directories(out);
        json key = {{"command", command_name(cmd)}, {"config", cfg.to_json()}, {"args", args_json(cmd, args)}};
        const std::string hash = sha256_hex(dump17(key, 0));
        const fs::path cache = (cfg.cache_dir.empty() ? out / "cache" : fs::path(cfg.cache_dir)) / hash;

        if (cfg.use_cache && fs::exists(cache / "manifest.json")) {
            try {
                auto m = CacheManifest::from_json(json::parse(read_file(cache / "manifest.json")));
                bool good = m.config_hash == hash && m.tool == tool_version;
                for (auto& [name, h] : m.artifacts) good = good && sha256_hex(read_file(cache / name)) == h;
                if (good) {
                    for (auto& [name, h] : m.artifacts)
                        fs::copy_file(cache / name, out / name, fs::copy_options::overwrite_existing);
                    log << "cache hit " << hash.substr(0, 12) << "\n";
                    return m.exit_code;
                }
            } catch (const std::exception&) {
                // unreadable manifest: recompute
            }
        }

        Context c{cfg, args, cmd, cfg.system(), hash, log, Output{out, {}}};
        fs::remove(out / "error.json");
        int rc = dispatch(c);
        if (cfg.use_cache) {
            fs::create_directories(cache);
            CacheManifest m;
            m.config_hash = hash;
            m.tool = tool_version;
            m.exit_code = rc;
            for (auto& f : c.out.files) {
                fs::copy_file(out / f, cache / f, fs::copy_options::overwrite_existing);
                m.artifacts.push_back({f, sha256_hex(read_file(out / f))});
            }
            write_file(cache / "manifest.json", dump17(m.to_json()) + "\n");
        }
        return rc;
    } catch (const Error& e) {
        return fail(e.code(), e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(ErrorCode::config, e.what());
    }
}

PlanePoint parse_point(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (tok.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw Error(ErrorCode::config, "bad number in point \"" + text + "\"");
        }
    }
    if (v.size() == 2) return {v[0], v[1]};
    if (v.size() == 4) return {cplx(v[0], v[1]), cplx(v[2], v[3])};
    throw Error(ErrorCode::config, "point needs 2 (real) or 4 (complex) numbers: \"" + text + "\"");
}

std::vector<PlanePoint> read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config, "cannot open points file " + path);
    std::vector<PlanePoint> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line.find_first_of("xy") != std::string::npos) continue;  // header
        out.push_back(parse_point(line));
    }
    return out;
}

}  // namespace henon
