// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

namespace framebank {

inline constexpr std::string_view kToolName = "framebank";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace framebank
