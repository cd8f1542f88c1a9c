#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "henon/harness.hpp"
#include "henon/util.hpp"

using namespace henon;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json base() {
    return json::parse(R"({"map":{"factors":[{"degree":2,"tail":[-6.0],"a":0.3}]},"curve":{"depth":4},
                          "exponent":{"max_period":4}})");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("henon_unit_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing and validation") {
    auto c = RunConfig::from_json(base());
    CHECK(c.depth == 4);
    CHECK(c.max_period == 4);
    CHECK_NOTHROW(c.validate());

    auto bad = [](json j) {
        try {
            RunConfig::from_json(j).validate();
        } catch (const Error& e) {
            return e.code() == ErrorCode::config;
        }
        return false;
    };
    auto j = base();
    j["curve"]["depth"] = 1;
    CHECK(bad(j));
    j = base();
    j["curve"]["dpth"] = 3;
    CHECK(bad(j));
    j = base();
    j["precision"] = {{"tol", -1.0}};
    CHECK(bad(j));
    j = base();
    j["atlas"] = {{"mode", "other"}};
    CHECK(bad(j));
    j = base();
    j.erase("map");
    CHECK(bad(j));
}

TEST_CASE("dump17 round trips doubles") {
    json j = {{"a", 0.1}, {"b", 1.0 / 3.0}, {"c", -2.718281828459045e-300}, {"n", 3}, {"s", "x"}};
    auto back = json::parse(dump17(j));
    CHECK(back["a"].get<double>() == 0.1);
    CHECK(back["b"].get<double>() == 1.0 / 3.0);
    CHECK(back["c"].get<double>() == -2.718281828459045e-300);
    CHECK(back["n"].get<int>() == 3);
    CHECK(fmt17(0.1) == "0.10000000000000001");
}

TEST_CASE("points parse") {
    auto p = parse_point("1.5,-2");
    CHECK(p.x == cplx(1.5));
    CHECK(p.y == cplx(-2));
    auto q = parse_point("1,2,3,4");
    CHECK(q.x == cplx(1, 2));
    CHECK(q.y == cplx(3, 4));
    CHECK_THROWS_AS(parse_point("1,2,3"), Error);
    CHECK_THROWS_AS(parse_point("1,zz"), Error);
}

TEST_CASE("exit code taxonomy") {
    CHECK(exit_code_for(ErrorCode::config) == 2);
    CHECK(exit_code_for(ErrorCode::argument) == 2);
    CHECK(exit_code_for(ErrorCode::structure_mismatch) == 3);
    CHECK(exit_code_for(ErrorCode::nonunique_critical) == 3);
    CHECK(exit_code_for(ErrorCode::tolerance) == 4);
    CHECK(exit_code_for(ErrorCode::horseshoe_check_failed) == 5);
}

TEST_CASE("green eval output and cache replay") {
    auto c = RunConfig::from_json(base());
    c.out_dir = scratch("green").string();
    CommandArgs a;
    a.points = {{0.5, 8.0}, {cplx(1, 1), cplx(-9, 2)}};
    std::ostringstream log;
    REQUIRE(run(c, Command::green_eval, a, log) == 0);
    auto first = slurp(fs::path(c.out_dir) / "green.csv");
    CHECK(first.rfind("x_re,x_im,y_re,y_im,value,err,grad_x_re,grad_x_im,grad_y_re,grad_y_im,iters", 0) == 0);
    fs::remove(fs::path(c.out_dir) / "green.csv");
    std::ostringstream log2;
    REQUIRE(run(c, Command::green_eval, a, log2) == 0);
    CHECK(log2.str().find("cache hit") != std::string::npos);
    CHECK(slurp(fs::path(c.out_dir) / "green.csv") == first);

    // a changed argument misses the cache
    a.points.pop_back();
    std::ostringstream log3;
    REQUIRE(run(c, Command::green_eval, a, log3) == 0);
    CHECK(log3.str().find("cache hit") == std::string::npos);
}

TEST_CASE("a tampered cache entry is recomputed") {
    auto c = RunConfig::from_json(base());
    c.out_dir = scratch("tamper").string();
    CommandArgs a;
    a.points = {{0.5, 8.0}};
    std::ostringstream log;
    REQUIRE(run(c, Command::green_eval, a, log) == 0);
    auto good = slurp(fs::path(c.out_dir) / "green.csv");
    for (auto& e : fs::recursive_directory_iterator(fs::path(c.out_dir) / "cache"))
        if (e.path().filename() == "green.csv") std::ofstream(e.path()) << "garbage\n";
    std::ostringstream log2;
    REQUIRE(run(c, Command::green_eval, a, log2) == 0);
    CHECK(log2.str().find("cache hit") == std::string::npos);
    CHECK(slurp(fs::path(c.out_dir) / "green.csv") == good);
}

TEST_CASE("errors are machine readable") {
    auto c = RunConfig::from_json(base());
    c.out_dir = scratch("err").string();
    c.use_cache = false;
    CommandArgs a;
    c.green.horizon = 5;
    a.points = {{3.1842651794948, 3.1842651794948}};  // next to the fixed saddle
    std::ostringstream log;
    int rc = run(c, Command::green_grad, a, log);
    CHECK(rc == exit_tolerance);
    auto e = json::parse(slurp(fs::path(c.out_dir) / "error.json"));
    CHECK(e["error"] == "NOT_ESCAPED");
    CHECK(e["exit"] == rc);

    auto j = base();
    j["map"]["factors"][0]["tail"] = json::array({0.1});
    auto g = RunConfig::from_json(j);
    g.out_dir = scratch("gate").string();
    g.use_cache = false;
    std::ostringstream log2;
    CHECK(run(g, Command::verify, {}, log2) == exit_gate);
    CHECK(json::parse(slurp(fs::path(g.out_dir) / "error.json"))["error"] == "HORSESHOE_CHECK_FAILED");
}

TEST_CASE("saddles artifact has d^n rows") {
    auto c = RunConfig::from_json(base());
    c.out_dir = scratch("saddles").string();
    c.use_cache = false;
    c.max_period = 5;
    std::ostringstream log;
    REQUIRE(run(c, Command::saddles, {}, log) == 0);
    std::ifstream in(fs::path(c.out_dir) / "saddles.csv");
    std::string line;
    int rows = -1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 32);
}

}
