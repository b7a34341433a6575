// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tilespmm {

/// Raised for any violated precondition or failed runtime check in the
/// library. Messages are meant to be shown to a CLI user verbatim.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

} // namespace tilespmm
