#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "iam/authenticators.hpp"
#include "iam/domain.hpp"
#include "iam/knowledge_base.hpp"
#include "iam/random.hpp"

namespace iam {

struct EnrollmentDevice {
  std::string device_id;
  DeviceType device_type = DeviceType::kDesktop;
};

struct EnrollmentSpec {
  std::string user_id;
  std::string full_name;
  std::string pin;  // hashed immediately, never stored
  std::vector<EnrollmentDevice> devices;
  std::uint64_t template_seed = 0;
};

struct EnrollmentSummary {
  std::string user_id;
  std::string face_template_ref;
  // (device_id, fingerprint_ref) for each handheld device.
  std::vector<std::pair<std::string, std::string>> fingerprint_refs;
};

// Simulated enrolment captures. A client holding the template seed can
// reproduce the exact enrolled bits to build a zero-noise probe.
BiometricTemplate enrolled_face_template(std::uint64_t template_seed);
BiometricTemplate enrolled_fingerprint_template(std::uint64_t template_seed);

// Writes the face template to the cloud store, one fingerprint template per
// smartphone/tablet to that device's local store, then the user row with a
// fresh 16-byte salt. Desktop and laptop bindings get no fingerprint.
// Errors: kDuplicateUser, kMalformedPin, kInvalidArgument (bad or repeated
// device id). All are checked before anything is written.
EnrollmentSummary enroll_user(KnowledgeBase& kb, RandomSource& salts, const EnrollmentSpec& spec,
                              PinDigest digest = PinDigest::kSha256);

}  // namespace iam
