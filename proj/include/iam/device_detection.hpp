#pragma once

#include <optional>
#include <string_view>

#include "iam/domain.hpp"

namespace iam {

// Case-insensitive keyword rule, first hit wins: "mobile" or "phone" ->
// smartphone, "tablet" or "ipad" -> tablet, "laptop" -> laptop, anything
// else (including "") -> desktop.
DeviceType detect_device(std::string_view agent);

enum class DeviceSource { kDeclared, kAgent };

struct DeviceDecision {
  DeviceType type;
  DeviceSource source;
};

// An explicit declaration wins over the agent string.
DeviceDecision decide_device(std::optional<DeviceType> declared, std::string_view agent);

}  // namespace iam
