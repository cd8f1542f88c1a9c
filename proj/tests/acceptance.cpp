// Acceptance runner: `acceptance <criterion>` prints one PASS/FAIL line and exits 0 on pass.
// Heavy pipelines run through the harness with a shared cache under the work directory.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "henon/checks.hpp"
#include "henon/exponents.hpp"
#include "henon/harness.hpp"
#include "henon/horseshoe.hpp"
#include "henon/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace henon;

namespace {

fs::path config_dir = HENON_CONFIG_DIR;
fs::path work_dir = HENON_WORK_DIR;

struct Line {
    bool pass = true;
    std::vector<std::string> notes;
    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "" : "!") + what);
    }
};

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

RunConfig config(const std::string& name) { return RunConfig::load((config_dir / (name + ".json")).string()); }

struct Ran {
    int rc = -1;
    double seconds = 0;
    bool cached = false;
    fs::path out;
    json read(const std::string& file) const {
        std::ifstream in(out / file);
        return json::parse(in);
    }
};

Ran run_cached(RunConfig cfg, Command cmd, const std::string& tag, CommandArgs args = {}) {
    cfg.out_dir = (work_dir / tag).string();
    cfg.cache_dir = (work_dir / "cache").string();
    cfg.use_cache = true;
    std::ostringstream log;
    auto t0 = std::chrono::steady_clock::now();
    Ran r;
    r.rc = run(cfg, cmd, args, log);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.cached = log.str().find("cache hit") != std::string::npos;
    r.out = cfg.out_dir;
    return r;
}

Ran verify(const std::string& name) { return run_cached(config(name), Command::verify, name + "_verify"); }

Ran crit(const std::string& name, AtlasMode mode, double t) {
    auto c = config(name);
    c.mode = mode;
    c.band_t = t;
    std::string tag = name + "_crit_" + (mode == AtlasMode::bends ? std::string("bends") : "level_" + num(t));
    return run_cached(c, Command::crit_scan, tag);
}

struct Target {
    std::string name;
    double cross;
};
const std::vector<Target> targets = {{"d2", 1e-2}, {"d3", 2e-2}};

std::map<std::string, CheckResult> lemmas(const std::string& name) {
    auto c = config(name);
    LemmaSettings s;
    s.seed = c.seed;
    s.green = c.green;
    std::map<std::string, CheckResult> m;
    for (auto& r : lemma_checks(c.system(), s)) m[r.name] = r;
    return m;
}

void lemma_subset(Line& L, const std::vector<std::string>& names) {
    for (auto& t : targets) {
        auto m = lemmas(t.name);
        for (auto& n : names) {
            auto it = m.find(n);
            if (it == m.end()) {
                L.check(false, t.name + " " + n + " missing");
                continue;
            }
            L.check(it->second.pass, t.name + " " + n + "=" + num(it->second.value));
        }
    }
}

// 1: periodic vs formula, both self-converged, runtime
void c1(Line& L) {
    for (auto& t : targets) {
        auto r = verify(t.name);
        if (r.rc != 0 && r.rc != exit_tolerance) {
            L.check(false, t.name + " verify exit " + std::to_string(r.rc));
            continue;
        }
        auto j = r.read("report.json");
        L.check(j["residual_cross"].get<double>() < t.cross, t.name + " cross=" + num(j["residual_cross"]));
        auto& pr = j["periodic_rows"];
        double dp = std::abs(pr[pr.size() - 1]["lambda_plus"].get<double>() - pr[pr.size() - 2]["lambda_plus"].get<double>());
        auto& fr = j["formula_rows"];
        double df = std::abs(fr[fr.size() - 1]["integral"].get<double>() - fr[fr.size() - 2]["integral"].get<double>());
        L.check(dp < 5e-4, t.name + " orbit_step=" + num(dp));
        L.check(df < 5e-4, t.name + " formula_step=" + num(df));
        if (!r.cached) L.check(r.seconds < 300, t.name + " time=" + num(r.seconds) + "s");
    }
}

// 2: literal sandwich with unit-mass bend weights
void c2(Line& L) {
    for (auto& t : targets) {
        auto j = verify(t.name).read("report.json");
        double gap = j["lambda_plus_orbits"].get<double>() - j["log_d"].get<double>();
        double lo = j["a4_lower_unit_mass"], hi = j["a4_upper_unit_mass"];
        L.check(lo < gap && gap < hi, t.name + " " + num(lo) + "<" + num(gap) + "<" + num(hi));
    }
}

// 3: per-orbit identity up to the configured period, aggregate identity across the two quadratures
void c3(Line& L) {
    for (auto& t : targets) {
        auto c = config(t.name);
        auto sys = c.system();
        double worst = 0;
        for (int n = 1; n <= c.max_period; ++n) worst = std::max(worst, periodic_estimate(sys, n).max_identity_error);
        L.check(worst < 1e-10, t.name + " orbit_identity=" + num(worst));
        auto j = verify(t.name).read("report.json");
        double agg = std::abs(j["lambda_plus_formula"].get<double>() + j["lambda_minus_formula"].get<double>() -
                              std::log(std::abs(sys.jacobian_det())));
        L.check(agg < 1e-2, t.name + " formula_sum=" + num(agg));
    }
}

void c4(Line& L) {
    lemma_subset(L, {"green_plus_functional", "green_minus_functional", "bottcher_functional", "bottcher_log_modulus",
                     "gradient_finite_difference", "error_bound_honesty"});
}

void c5(Line& L) {
    lemma_subset(L, {"growth_direction_convergence", "tau_plus_invariance", "critical_direction_decay",
                     "critical_direction_bound", "kernel_convergence"});
}

// 6: point counts, atoms per bend, masses, one root per gap, reality
void c6(Line& L) {
    for (auto& t : targets) {
        auto c = config(t.name);
        auto sys = c.system();
        const int d = sys.degree();
        bool counts = true;
        for (int n = 1; n <= c.max_period; ++n) {
            std::uint64_t pts = 0;
            for (auto& o : all_periodic_orbits(sys, n, true)) pts += std::uint64_t(o.multiplicity);
            counts = counts && pts == std::uint64_t(std::llround(std::pow(d, n)));
        }
        L.check(counts, t.name + " d^n points n<=" + std::to_string(c.max_period));

        auto b = crit(t.name, AtlasMode::bends, 1.0);
        if (b.rc != 0) {
            L.check(false, t.name + " crit bends exit " + std::to_string(b.rc));
            continue;
        }
        auto s = b.read("crit_summary.json");
        const int n = s["depth"];
        const long want = std::lround(std::pow(d, n - 1));
        bool per_count = s["per_bend_counts"].size() == std::size_t(d - 1);
        for (auto& k : s["per_bend_counts"]) per_count = per_count && k.get<long>() == want;
        L.check(per_count, t.name + " atoms/bend=" + std::to_string(want));
        double worst_mass = 0;
        for (auto& m : s["per_bend_masses"]) worst_mass = std::max(worst_mass, std::abs(m.get<double>() - 1.0));
        L.check(worst_mass < 1e-12, t.name + " bend_mass_dev=" + num(worst_mass));
        double tm = s["total_mass"];
        L.check(std::abs(tm - (d - 1)) < 1e-12, t.name + " total_mass=" + num(tm));
        L.check(s["max_reality_dev"].get<double>() < 1e-8, t.name + " reality=" + num(s["max_reality_dev"]));

        auto saddle = periodic_orbit(sys, Itinerary{{d - 1}});
        auto curve = grow_unstable_curve(sys, saddle, c.depth, c.refine());
        auto gaps = find_gaps(sys, curve);
        GreenEngine engine(sys, c.green);
        std::vector<int> ok(gaps.size(), 0);
        parallel_for(gaps.size(), [&](std::size_t i) {
            try {
                gap_critical_point(sys, saddle, gaps[i], engine);
                ok[i] = 1;
            } catch (const Error&) {
            }
        });
        long good = 0, interior = 0;
        for (std::size_t i = 0; i < gaps.size(); ++i)
            if (!gaps[i].truncated) {
                ++interior;
                good += ok[i];
            }
        L.check(interior > 0 && good == interior,
                t.name + " gaps with one root " + std::to_string(good) + "/" + std::to_string(interior));
    }
}

// 7: BENDS vs LEVEL at t = 1, LEVEL at 0.8 vs 1.2
void c7(Line& L) {
    double ib = 0, il[3] = {0, 0, 0};
    const double ts[3] = {0.8, 1.0, 1.2};
    auto b = crit("d2", AtlasMode::bends, 1.0);
    L.check(b.rc == 0, "bends exit " + std::to_string(b.rc));
    if (b.rc == 0) ib = b.read("crit_summary.json")["integral_estimate"];
    for (int i = 0; i < 3; ++i) {
        auto r = crit("d2", AtlasMode::level, ts[i]);
        L.check(r.rc == 0, "level t=" + num(ts[i]) + " exit " + std::to_string(r.rc));
        if (r.rc == 0) il[i] = r.read("crit_summary.json")["integral_estimate"];
    }
    L.check(std::abs(ib - il[1]) < 1e-3, "bends-level1=" + num(std::abs(ib - il[1])));
    L.check(std::abs(il[0] - il[2]) < 1e-3, "level0.8-level1.2=" + num(std::abs(il[0] - il[2])));
}

void c8(Line& L) {
    auto m = lemmas("d2");
    for (auto n : {"tangency_diagonal", "tangency_cone", "tangency_exists"}) {
        L.check(m[n].pass, std::string(n) + "=" + num(m[n].value));
    }
    auto sys = config("d2").system();
    auto scan = tangency_scan(sys, -20, 20, -20, 20, 161, 161);
    double best = INFINITY;
    for (auto& z : scan.zeros)
        if (z.accepted) best = std::min(best, std::abs(z.det));
    L.check(best < 1e-10, "scan_min_det=" + num(best));
}

json strip_timestamp(json j) {
    if (j.contains("provenance")) j["provenance"].erase("timestamp");
    return j;
}

// 9: two cold runs and a cache replay give identical reports; the gate rejects early with exit 5
void c9(Line& L) {
    auto c = config("d2");
    c.depth = 8;
    c.max_period = 8;
    c.use_cache = false;
    std::string text[3];
    for (int i = 0; i < 2; ++i) {
        c.out_dir = (work_dir / ("determinism_" + std::to_string(i))).string();
        std::ostringstream log;
        int rc = run(c, Command::verify, {}, log);
        L.check(rc == 0, "run" + std::to_string(i) + " exit " + std::to_string(rc));
        std::ifstream in(fs::path(c.out_dir) / "report.json");
        text[i] = dump17(strip_timestamp(json::parse(in)));
    }
    auto cached = run_cached(c, Command::verify, "determinism_cached");
    cached = run_cached(c, Command::verify, "determinism_cached");
    text[2] = dump17(strip_timestamp(cached.read("report.json")));
    L.check(text[0] == text[1], "cold runs identical");
    L.check(cached.cached && text[0] == text[2], "cache replay identical");

    auto g = config("nonhorseshoe");
    g.out_dir = (work_dir / "gate").string();
    g.use_cache = false;
    std::ostringstream log;
    auto t0 = std::chrono::steady_clock::now();
    int rc = run(g, Command::verify, {}, log);
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    L.check(rc == exit_gate, "gate exit " + std::to_string(rc));
    L.check(sec < 1.0 && !fs::exists(fs::path(g.out_dir) / "report.json"), "gate time=" + num(sec) + "s");
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<void(Line&)>>> criteria = {
        {"integral formula cross-validation", c1},
        {"unit-mass sandwich", c2},
        {"per-orbit and aggregate Jacobian identity", c3},
        {"Green machinery", c4},
        {"asymptotic directions", c5},
        {"horseshoe structure", c6},
        {"fundamental-domain independence", c7},
        {"tangency determinant", c8},
        {"determinism and gating", c9}};
    if (argc < 2) {
        std::cerr << "usage: acceptance <1-9 | all>\n";
        return 2;
    }
    std::string which = argv[1];
    if (argc > 2) work_dir = argv[2];
    fs::create_directories(work_dir);
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (which != "all" && which != std::to_string(i + 1)) continue;
        Line L;
        try {
            criteria[i].second(L);
        } catch (const std::exception& e) {
            L.check(false, std::string("exception: ") + e.what());
        }
        std::string notes;
        for (auto& n : L.notes) notes += (notes.empty() ? "" : "; ") + n;
        std::cout << (L.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << notes
                  << std::endl;
        failed += !L.pass;
    }
    return failed ? 1 : 0;
}
