#pragma once

#include <cstdint>
#include <string>

#include "fairsim/common.hpp"

namespace fairsim {

// Population groups. A is the privileged group, B the protected one.
enum class Group : std::uint8_t { A = 0, B = 1 };

inline constexpr int kNumGroups = 2;

inline const char* to_string(Group g) { return g == Group::A ? "A" : "B"; }

inline Group group_from_string(const std::string& s) {
  if (s == "A") return Group::A;
  if (s == "B") return Group::B;
  throw SchemaError("unknown group token: '" + s + "'");
}

inline int group_index(Group g) { return static_cast<int>(g); }

}  // namespace fairsim
