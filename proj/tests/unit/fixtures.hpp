#pragma once

#include <json.hpp>

#include "henon/util.hpp"

namespace fx {

inline henon::HenonSystem quad() {
    return henon::system_from_json(nlohmann::json::parse(R"({"factors":[{"degree":2,"tail":[-6.0],"a":0.3}]})"));
}

inline henon::HenonSystem cubic() {
    return henon::system_from_json(
        nlohmann::json::parse(R"({"factors":[{"degree":3,"tail":[0.0,-7.0],"a":0.2}]})"));
}

}  // namespace fx
