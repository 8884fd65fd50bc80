#pragma once

#include "remi/core/error.hpp"
#include "remi/core/json.hpp"
#include "remi/core/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace remi {

struct ProfileValidation {
    std::optional<UserProfile> profile;  // set iff errors is empty
    std::vector<FieldError> errors;      // every failing field, not just the first
    std::vector<FieldError> warnings;

    bool ok() const { return errors.empty(); }
};

// Normalizes raw client fields into a profile. The returned profile has an
// empty user_id; ids are minted by the service.
//
// Accepted shapes:
//   gender:     "Female" | "f" | "male" | "" (case-insensitive); anything else
//               becomes unspecified with a gender_unrecognized warning
//   age_band:   "66-70" | "66–70" | "62" | 68 | [66, 70]
//   hometown:   "Pingyao, Shanxi" | {"name": ..., "province": ...}
//   relocation: "24 months" | "2 years" | "0" | 24  (alias: relocation_duration)
ProfileValidation validate_profile(const json& raw);

// Recognizes a province-level name in free text ("Pingyao, Shanxi" -> "Shanxi").
std::optional<std::string> normalize_province(std::string_view hometown);

}  // namespace remi
