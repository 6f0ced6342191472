// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/errors.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace httpsrr
{
  using Bytes = std::vector<std::uint8_t>;
  using ByteView = std::span<const std::uint8_t>;

  /// Bounds-checked big-endian cursor over a byte span. Every read past the
  /// end throws ParseError(truncated) carrying the absolute offset.
  class ByteReader
  {
  public:
    explicit ByteReader(ByteView data, std::size_t base_offset = 0) :
      data_(data),
      base_(base_offset)
    {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    ByteView take(std::size_t n);

    std::size_t remaining() const noexcept
    {
      return data_.size() - pos_;
    }
    bool empty() const noexcept
    {
      return pos_ == data_.size();
    }
    std::size_t offset() const noexcept
    {
      return base_ + pos_;
    }

    /// Sub-reader over the next `n` bytes; advances this reader past them.
    ByteReader sub(std::size_t n);

  private:
    void need(std::size_t n) const;

    ByteView data_;
    std::size_t base_;
    std::size_t pos_ = 0;
  };

  class ByteWriter
  {
  public:
    void u8(std::uint8_t v)
    {
      out_.push_back(v);
    }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void bytes(ByteView v)
    {
      out_.insert(out_.end(), v.begin(), v.end());
    }
    void bytes(std::string_view v)
    {
      out_.insert(out_.end(), v.begin(), v.end());
    }

    /// Reserve a u16 length slot; patch it with `end_length(slot)` once the
    /// body has been written.
    std::size_t begin_length16();
    void end_length16(std::size_t slot);

    std::size_t size() const noexcept
    {
      return out_.size();
    }
    const Bytes& data() const& noexcept
    {
      return out_;
    }
    Bytes take() &&
    {
      return std::move(out_);
    }

  private:
    Bytes out_;
  };

  std::string to_hex(ByteView data);
  /// Accepts upper/lower case, ignores ASCII whitespace.
  Bytes from_hex(std::string_view hex);

  std::string base64_encode(ByteView data);
  /// Strict RFC 4648 decoding (padding required, whitespace ignored).
  Bytes base64_decode(std::string_view text);

  using Sha256Digest = std::array<std::uint8_t, 32>;
  Sha256Digest sha256(ByteView data);
  Sha256Digest sha256(std::string_view data);
}
