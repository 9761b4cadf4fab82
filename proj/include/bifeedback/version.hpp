#pragma once

namespace bifeedback {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bifeedback
