// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/bytes.hpp"

#include <cctype>
#include <fmt/format.h>
#include <openssl/evp.h>

namespace httpsrr
{
  std::string_view to_string(ErrorCode code)
  {
    switch (code)
    {
      case ErrorCode::syntax:
        return "syntax";
      case ErrorCode::duplicate_key:
        return "duplicate_key";
      case ErrorCode::malformed_value:
        return "malformed_value";
      case ErrorCode::truncated:
        return "truncated";
      case ErrorCode::keys_not_ascending:
        return "keys_not_ascending";
      case ErrorCode::length_overrun:
        return "length_overrun";
      case ErrorCode::oversize:
        return "oversize";
      case ErrorCode::length_mismatch:
        return "length_mismatch";
      case ErrorCode::empty_list:
        return "empty_list";
      case ErrorCode::unrecognized_version:
        return "unrecognized_version";
      case ErrorCode::no_recognized_config:
        return "no_recognized_config";
    }
    return "unknown";
  }

  ParseError::ParseError(
    ErrorCode code, std::size_t position, const std::string& what) :
    std::runtime_error(
      fmt::format("{} at offset {}: {}", to_string(code), position, what)),
    code_(code),
    position_(position)
  {}

  void ByteReader::need(std::size_t n) const
  {
    if (remaining() < n)
    {
      throw ParseError(
        ErrorCode::truncated,
        offset(),
        fmt::format("need {} bytes, {} left", n, remaining()));
    }
  }

  std::uint8_t ByteReader::u8()
  {
    need(1);
    return data_[pos_++];
  }

  std::uint16_t ByteReader::u16()
  {
    need(2);
    std::uint16_t v = (std::uint16_t(data_[pos_]) << 8) | data_[pos_ + 1];
    pos_ += 2;
    return v;
  }

  std::uint32_t ByteReader::u32()
  {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
    {
      v = (v << 8) | data_[pos_ + i];
    }
    pos_ += 4;
    return v;
  }

  ByteView ByteReader::take(std::size_t n)
  {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  ByteReader ByteReader::sub(std::size_t n)
  {
    auto start = offset();
    return ByteReader(take(n), start);
  }

  void ByteWriter::u16(std::uint16_t v)
  {
    out_.push_back(std::uint8_t(v >> 8));
    out_.push_back(std::uint8_t(v & 0xff));
  }

  void ByteWriter::u32(std::uint32_t v)
  {
    u16(std::uint16_t(v >> 16));
    u16(std::uint16_t(v & 0xffff));
  }

  std::size_t ByteWriter::begin_length16()
  {
    auto slot = out_.size();
    u16(0);
    return slot;
  }

  void ByteWriter::end_length16(std::size_t slot)
  {
    auto len = out_.size() - slot - 2;
    if (len > 0xffff)
    {
      throw std::length_error("length-prefixed field exceeds 65535 bytes");
    }
    out_[slot] = std::uint8_t(len >> 8);
    out_[slot + 1] = std::uint8_t(len & 0xff);
  }

  std::string to_hex(ByteView data)
  {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data)
    {
      out.push_back(digits[b >> 4]);
      out.push_back(digits[b & 0xf]);
    }
    return out;
  }

  namespace
  {
    int hex_value(char c)
    {
      if (c >= '0' && c <= '9')
        return c - '0';
      if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
      if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
      return -1;
    }
  }

  Bytes from_hex(std::string_view hex)
  {
    Bytes out;
    int pending = -1;
    for (std::size_t i = 0; i < hex.size(); ++i)
    {
      char c = hex[i];
      if (std::isspace(static_cast<unsigned char>(c)))
        continue;
      int v = hex_value(c);
      if (v < 0)
      {
        throw ParseError(ErrorCode::syntax, i, "invalid hex digit");
      }
      if (pending < 0)
      {
        pending = v;
      }
      else
      {
        out.push_back(std::uint8_t(pending << 4 | v));
        pending = -1;
      }
    }
    if (pending >= 0)
    {
      throw ParseError(ErrorCode::syntax, hex.size(), "odd number of hex digits");
    }
    return out;
  }

  std::string base64_encode(ByteView data)
  {
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    auto n = EVP_EncodeBlock(
      reinterpret_cast<unsigned char*>(out.data()), data.data(), int(data.size()));
    out.resize(std::size_t(n));
    return out;
  }

  Bytes base64_decode(std::string_view text)
  {
    std::string compact;
    compact.reserve(text.size());
    for (char c : text)
    {
      if (!std::isspace(static_cast<unsigned char>(c)))
        compact.push_back(c);
    }
    if (compact.size() % 4 != 0)
    {
      throw ParseError(
        ErrorCode::malformed_value, compact.size(), "base64 length not a multiple of 4");
    }
    std::size_t padding = 0;
    for (auto it = compact.rbegin(); it != compact.rend() && *it == '='; ++it)
      ++padding;
    if (padding > 2)
    {
      throw ParseError(ErrorCode::malformed_value, 0, "bad base64 padding");
    }
    // EVP_DecodeBlock tolerates '=' mid-string; reject it ourselves.
    auto body_end = compact.size() - padding;
    if (compact.find('=') < body_end)
    {
      throw ParseError(
        ErrorCode::malformed_value, compact.find('='), "unexpected base64 padding");
    }
    Bytes out(compact.size() / 4 * 3);
    auto n = EVP_DecodeBlock(
      out.data(),
      reinterpret_cast<const unsigned char*>(compact.data()),
      int(compact.size()));
    if (n < 0)
    {
      throw ParseError(ErrorCode::malformed_value, 0, "invalid base64 text");
    }
    out.resize(std::size_t(n) - padding);
    return out;
  }

  Sha256Digest sha256(ByteView data)
  {
    Sha256Digest out{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr);
    return out;
  }

  Sha256Digest sha256(std::string_view data)
  {
    return sha256(ByteView(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
  }
}
