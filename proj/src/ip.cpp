// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/ip.hpp"

#include "httpsrr/errors.hpp"

#include <arpa/inet.h>
#include <charconv>
#include <fmt/format.h>

namespace httpsrr
{
  std::optional<Ipv4> Ipv4::parse(std::string_view text)
  {
    std::string s(text);
    Ipv4 out;
    if (inet_pton(AF_INET, s.c_str(), out.octets.data()) != 1)
      return std::nullopt;
    return out;
  }

  std::string Ipv4::to_string() const
  {
    char buf[INET_ADDRSTRLEN];
    inet_ntop(AF_INET, octets.data(), buf, sizeof(buf));
    return buf;
  }

  std::optional<Ipv6> Ipv6::parse(std::string_view text)
  {
    std::string s(text);
    Ipv6 out;
    if (inet_pton(AF_INET6, s.c_str(), out.octets.data()) != 1)
      return std::nullopt;
    return out;
  }

  std::string Ipv6::to_string() const
  {
    char buf[INET6_ADDRSTRLEN];
    inet_ntop(AF_INET6, octets.data(), buf, sizeof(buf));
    return buf;
  }

  std::optional<IpAddress> parse_ip(std::string_view text)
  {
    if (auto v4 = Ipv4::parse(text))
      return IpAddress{*v4};
    if (auto v6 = Ipv6::parse(text))
      return IpAddress{*v6};
    return std::nullopt;
  }

  std::string to_string(const IpAddress& ip)
  {
    return std::visit([](const auto& a) { return a.to_string(); }, ip);
  }

  IpPrefix IpPrefix::parse(std::string_view text)
  {
    auto slash = text.find('/');
    auto addr = parse_ip(text.substr(0, slash));
    if (!addr)
    {
      throw ParseError(ErrorCode::malformed_value, 0, fmt::format("bad prefix '{}'", text));
    }
    unsigned max_len = is_v4(*addr) ? 32 : 128;
    unsigned len = max_len;
    if (slash != std::string_view::npos)
    {
      auto digits = text.substr(slash + 1);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), len);
      if (ec != std::errc() || p != digits.data() + digits.size() || len > max_len)
      {
        throw ParseError(
          ErrorCode::malformed_value, slash, fmt::format("bad prefix length in '{}'", text));
      }
    }
    IpPrefix out;
    out.network_ = *addr;
    out.length_ = len;
    return out;
  }

  namespace
  {
    template <std::size_t N>
    bool prefix_match(
      const std::array<std::uint8_t, N>& a, const std::array<std::uint8_t, N>& b, unsigned bits)
    {
      for (std::size_t i = 0; i < N && bits > 0; ++i)
      {
        unsigned take = bits >= 8 ? 8 : bits;
        std::uint8_t mask = std::uint8_t(0xff << (8 - take));
        if ((a[i] & mask) != (b[i] & mask))
          return false;
        bits -= take;
      }
      return true;
    }
  }

  bool IpPrefix::contains(const IpAddress& ip) const
  {
    if (ip.index() != network_.index())
      return false;
    if (is_v4(ip))
    {
      return prefix_match(
        std::get<Ipv4>(ip).octets, std::get<Ipv4>(network_).octets, length_);
    }
    return prefix_match(
      std::get<Ipv6>(ip).octets, std::get<Ipv6>(network_).octets, length_);
  }

  std::string IpPrefix::to_string() const
  {
    return fmt::format("{}/{}", httpsrr::to_string(network_), length_);
  }
}
