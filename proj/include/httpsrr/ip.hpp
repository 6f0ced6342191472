// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace httpsrr
{
  struct Ipv4
  {
    std::array<std::uint8_t, 4> octets{};

    static std::optional<Ipv4> parse(std::string_view text);
    std::string to_string() const;
    auto operator<=>(const Ipv4&) const = default;
  };

  struct Ipv6
  {
    std::array<std::uint8_t, 16> octets{};

    static std::optional<Ipv6> parse(std::string_view text);
    std::string to_string() const;
    auto operator<=>(const Ipv6&) const = default;
  };

  using IpAddress = std::variant<Ipv4, Ipv6>;

  std::optional<IpAddress> parse_ip(std::string_view text);
  std::string to_string(const IpAddress& ip);
  inline bool is_v4(const IpAddress& ip)
  {
    return std::holds_alternative<Ipv4>(ip);
  }

  /// CIDR prefix such as 104.16.0.0/13 or 2606:4700::/32.
  class IpPrefix
  {
  public:
    static IpPrefix parse(std::string_view text);

    bool contains(const IpAddress& ip) const;
    std::string to_string() const;
    const IpAddress& network() const
    {
      return network_;
    }
    unsigned length() const
    {
      return length_;
    }

  private:
    IpAddress network_;
    unsigned length_ = 0;
  };
}
