// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace spcut {

enum class ErrorCode {
    invalid_domain,
    outside_domain,
    invalid_index,
    zero_datum,
    resonance,
    tied_spectrum,
    invalid_time,
    invalid_argument,
    dimension_mismatch,
    wrong_case,
    subcritical_route,
    degenerate_spec,
    unsupported,
    not_psd,
    mark_out_of_range,
    unordered_jumps,
    schedule_rejected,
    config,
};

const char* to_string(ErrorCode code) noexcept;

//! Library-wide exception carrying a machine-checkable code.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) {
        throw Error(code, what);
    }
}

}  // namespace spcut
