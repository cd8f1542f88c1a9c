#include "henon/util.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <vector>

namespace henon {

namespace {
std::atomic<unsigned> g_workers{0};

cplx parse_complex(const nlohmann::json& v, const char* what) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw Error(ErrorCode::config, std::string("bad complex value for ") + what);
}

nlohmann::json complex_json(cplx c) {
    if (c.imag() == 0.0) return c.real();
    return nlohmann::json::array({c.real(), c.imag()});
}
}  // namespace

void set_worker_count(unsigned n) { g_workers = n; }

unsigned worker_count() {
    unsigned n = g_workers.load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned w = std::min<std::size_t>(worker_count(), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!err) err = std::current_exception();
                next = n;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < w; ++t) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

HenonSystem system_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("factors") || !j["factors"].is_array() || j["factors"].empty())
        throw Error(ErrorCode::config, "map spec needs a nonempty \"factors\" array");
    std::vector<HenonFactor> fs;
    try {
        for (auto& f : j["factors"]) {
            int d = f.at("degree").get<int>();
            std::vector<cplx> tail;
            for (auto& c : f.at("tail")) tail.push_back(parse_complex(c, "tail"));
            fs.emplace_back(PolynomialSpec(d, tail), parse_complex(f.at("a"), "a"));
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::config, e.what());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config, std::string("map spec: ") + e.what());
    }
    return HenonSystem(std::move(fs));
}

nlohmann::json system_to_json(const HenonSystem& sys) {
    nlohmann::json fs = nlohmann::json::array();
    for (auto& f : sys.factors()) {
        nlohmann::json tail = nlohmann::json::array();
        for (auto c : f.poly.tail()) tail.push_back(complex_json(c));
        fs.push_back({{"degree", f.poly.degree()}, {"tail", tail}, {"a", complex_json(f.a)}});
    }
    return {{"factors", fs}};
}

HenonSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config, "cannot open map file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config, std::string("map file parse error: ") + e.what());
    }
    return system_from_json(j.contains("map") ? j["map"] : j);
}

}  // namespace henon
