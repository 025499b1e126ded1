#pragma once

#include "mononet/network.hpp"

#include <string>
#include <variant>

namespace mononet {

using NetworkValue = std::variant<ShallowExpSum, LayeredNetwork>;

// JSON exchange format. kind = "shallow_exp" | "layered"; coefficients are
// decimal strings so extended precision survives the round trip.
std::string serialize(const ShallowExpSum& net);
std::string serialize(const LayeredNetwork& net);
std::string serialize(const NetworkValue& net);

NetworkValue deserialize(const std::string& text);

}  // namespace mononet
