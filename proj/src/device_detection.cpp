#include "iam/device_detection.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace iam {

DeviceType detect_device(std::string_view agent) {
  std::string lower(agent);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto has = [&](std::string_view word) { return lower.find(word) != std::string::npos; };

  if (has("mobile") || has("phone")) return DeviceType::kSmartphone;
  if (has("tablet") || has("ipad")) return DeviceType::kTablet;
  if (has("laptop")) return DeviceType::kLaptop;
  return DeviceType::kDesktop;
}

DeviceDecision decide_device(std::optional<DeviceType> declared, std::string_view agent) {
  if (declared) return {*declared, DeviceSource::kDeclared};
  return {detect_device(agent), DeviceSource::kAgent};
}

}  // namespace iam
