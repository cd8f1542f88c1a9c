#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include <json.hpp>

#include "henon/core.hpp"

namespace henon {

// Global cap on worker threads; 0 means hardware concurrency.
void set_worker_count(unsigned n);
unsigned worker_count();

// Runs body(i) for i in [0, n). Results must be written to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

std::string fmt17(double v);
std::string sha256_hex(const std::string& bytes);

HenonSystem system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const HenonSystem& sys);
HenonSystem load_system(const std::string& path);

}  // namespace henon
