#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "henon/critical.hpp"

namespace henon {

inline constexpr const char* tool_version = "0.3.1";

struct RunConfig {
    nlohmann::json map;  // map spec as given
    GreenOptions green;
    bool extended_precision = false;
    int depth = 12;
    double max_seg = 0;  // 0: 1e-3 R
    double max_turn = 0.2;
    std::size_t node_cap = 5000000;
    AtlasMode mode = AtlasMode::bends;
    double band_t = 1.0;
    int max_period = 12;
    double cross_tol = 1e-2;
    double converge_tol = 5e-4;
    std::string out_dir = "out";
    std::string cache_dir;  // empty: <out_dir>/cache
    bool use_cache = true;
    std::uint64_t seed = 1;
    unsigned workers = 0;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    nlohmann::json to_json() const;  // numerical fields only; paths and worker count excluded
    void validate() const;           // throws Error(config)
    HenonSystem system() const;
    RefineParams refine() const;
};

struct CacheManifest {
    std::string config_hash;
    std::string tool;
    std::vector<std::pair<std::string, std::string>> artifacts;  // file name, sha256
    int exit_code = 0;

    nlohmann::json to_json() const;
    static CacheManifest from_json(const nlohmann::json& j);
};

enum class Command {
    green_eval,
    green_grad,
    bottcher,
    tangency_scan,
    saddles,
    manifold,
    crit_scan,
    lyap_orbits,
    lyap_formula,
    verify,
    lemma_checks
};

const char* command_name(Command c);

struct CommandArgs {
    std::vector<PlanePoint> points;
    bool minus = false;
    double x0 = -20, x1 = 20, y0 = -20, y1 = 20;
    int nx = 161, ny = 161;
};

// Exit status taxonomy.
enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_structure = 3, exit_tolerance = 4, exit_gate = 5 };
int exit_code_for(ErrorCode c);

// Runs one command, writing artifacts under cfg.out_dir. Diagnostics go to `log`.
int run(const RunConfig& cfg, Command cmd, const CommandArgs& args, std::ostream& log);

// JSON text with every double printed to 17 significant digits.
std::string dump17(const nlohmann::json& j, int indent = 2);

// "x_re,x_im,y_re,y_im" rows; blank lines and lines starting with # are skipped.
std::vector<PlanePoint> read_points_csv(const std::string& path);
PlanePoint parse_point(const std::string& text);

}  // namespace henon
