// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace framebank {

// Error taxonomy mirrors the CLI exit codes: config errors are bad user
// input, structural errors are malformed data or violated preconditions,
// invariant errors are internal budget/consistency failures, io errors wrap
// filesystem trouble.
class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
  using Error::Error;
};

class StructuralError : public Error {
  using Error::Error;
};

class InvariantError : public Error {
  using Error::Error;
};

class IoError : public Error {
  using Error::Error;
};

inline void check_config(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

inline void check_structural(bool ok, const std::string& msg) {
  if (!ok) throw StructuralError(msg);
}

inline void check_invariant(bool ok, const std::string& msg) {
  if (!ok) throw InvariantError(msg);
}

}  // namespace framebank
