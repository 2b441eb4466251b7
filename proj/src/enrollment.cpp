#include "iam/enrollment.hpp"

#include <set>

#include "iam/error.hpp"
#include "iam/hex.hpp"

namespace iam {

BiometricTemplate enrolled_face_template(std::uint64_t template_seed) {
  return generate_template(derive_seed(template_seed, SeedPurpose::kFaceTemplate), TemplateKind::kFace);
}

BiometricTemplate enrolled_fingerprint_template(std::uint64_t template_seed) {
  return generate_template(derive_seed(template_seed, SeedPurpose::kFingerprintTemplate),
                           TemplateKind::kFingerprint);
}

EnrollmentSummary enroll_user(KnowledgeBase& kb, RandomSource& salts, const EnrollmentSpec& spec,
                              PinDigest digest) {
  if (spec.user_id.empty()) throw IamError(ErrorCode::kInvalidArgument, "user_id is empty");
  if (kb.find_user(spec.user_id)) {
    throw IamError(ErrorCode::kDuplicateUser, "user already enrolled: " + spec.user_id);
  }
  if (!is_well_formed_pin(spec.pin)) throw IamError(ErrorCode::kMalformedPin, "PIN must be 4-8 digits");
  std::set<std::string> seen;
  for (const auto& d : spec.devices) {
    if (!is_valid_device_id(d.device_id) || !seen.insert(d.device_id).second) {
      throw IamError(ErrorCode::kInvalidArgument, "invalid or repeated device id " + d.device_id);
    }
  }

  std::vector<std::uint8_t> salt(kMinSaltBytes);
  salts.fill(salt);

  UserRecord user;
  user.user_id = spec.user_id;
  user.full_name = spec.full_name;
  user.pin_salt = to_hex(salt);
  user.pin_digest = hash_pin(spec.pin, salt, digest);
  user.status = UserStatus::kActive;

  EnrollmentSummary summary;
  summary.user_id = spec.user_id;
  user.face_template_ref =
      kb.store_template(enrolled_face_template(spec.template_seed), spec.user_id, StoreLocation::cloud());
  summary.face_template_ref = user.face_template_ref;

  for (const auto& d : spec.devices) {
    DeviceBinding binding{d.device_id, d.device_type, std::nullopt};
    if (supports_fingerprint(d.device_type)) {
      binding.fingerprint_template_ref =
          kb.store_template(enrolled_fingerprint_template(spec.template_seed), spec.user_id,
                            StoreLocation::device(d.device_id));
      summary.fingerprint_refs.emplace_back(d.device_id, *binding.fingerprint_template_ref);
    }
    user.enrolled_devices.push_back(std::move(binding));
  }

  kb.insert_user(user);
  return summary;
}

}  // namespace iam
