#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace softtree {

inline constexpr std::size_t kFeatureCount = 4;

// Feature order used everywhere an observation appears.
enum Feature : std::size_t { kPrice = 0, kSoc = 1, kLoad = 2, kPv = 3 };

// {consumption price EUR/kWh, state of charge in [0,1], non-flexible load kW,
//  PV power kW (<= 0)}
using Observation = std::array<double, kFeatureCount>;

inline std::vector<std::string> feature_names() {
    return {"price", "soc", "demand", "pv"};
}

}  // namespace softtree
