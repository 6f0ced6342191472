// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace httpsrr
{
  enum class ErrorCode
  {
    syntax,
    duplicate_key,
    malformed_value,
    truncated,
    keys_not_ascending,
    length_overrun,
    oversize,
    length_mismatch,
    empty_list,
    unrecognized_version,
    no_recognized_config,
  };

  std::string_view to_string(ErrorCode code);

  /// Structured decode/parse failure. `position()` is a byte offset for wire
  /// input and a character offset for presentation input.
  class ParseError : public std::runtime_error
  {
  public:
    ParseError(ErrorCode code, std::size_t position, const std::string& what);

    ErrorCode code() const noexcept
    {
      return code_;
    }
    std::size_t position() const noexcept
    {
      return position_;
    }

  private:
    ErrorCode code_;
    std::size_t position_;
  };

  /// Caller broke an operation's precondition (e.g. fed a result for the
  /// wrong attempt into the plan state machine).
  class ContractViolation : public std::logic_error
  {
  public:
    using std::logic_error::logic_error;
  };

  class AliasLoopError : public std::runtime_error
  {
  public:
    using std::runtime_error::runtime_error;
  };
}
