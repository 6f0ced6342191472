// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/bytes.hpp"
#include "httpsrr/ip.hpp"
#include "httpsrr/name.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace httpsrr
{
  /// SvcParamKey registry values; anything >= 7 is carried opaquely.
  enum class SvcKey : std::uint16_t
  {
    mandatory = 0,
    alpn = 1,
    no_default_alpn = 2,
    port = 3,
    ipv4hint = 4,
    ech = 5,
    ipv6hint = 6,
  };

  inline constexpr std::uint16_t key_number(SvcKey k)
  {
    return static_cast<std::uint16_t>(k);
  }

  /// "alpn", "key65000", ...
  std::string key_name(std::uint16_t key);
  /// Inverse of key_name; accepts registered names and keyNNNNN.
  std::optional<std::uint16_t> key_from_name(std::string_view name);

  struct MandatoryValue
  {
    std::vector<std::uint16_t> keys;
    bool operator==(const MandatoryValue&) const = default;
  };
  struct AlpnValue
  {
    std::vector<std::string> ids;
    bool operator==(const AlpnValue&) const = default;
  };
  struct NoDefaultAlpnValue
  {
    bool operator==(const NoDefaultAlpnValue&) const = default;
  };
  struct PortValue
  {
    std::uint16_t port = 0;
    bool operator==(const PortValue&) const = default;
  };
  struct Ipv4HintValue
  {
    std::vector<Ipv4> addrs;
    bool operator==(const Ipv4HintValue&) const = default;
  };
  struct EchValue
  {
    Bytes config_list;
    bool operator==(const EchValue&) const = default;
  };
  struct Ipv6HintValue
  {
    std::vector<Ipv6> addrs;
    bool operator==(const Ipv6HintValue&) const = default;
  };
  struct OpaqueValue
  {
    Bytes data;
    bool operator==(const OpaqueValue&) const = default;
  };

  using SvcValue = std::variant<
    MandatoryValue,
    AlpnValue,
    NoDefaultAlpnValue,
    PortValue,
    Ipv4HintValue,
    EchValue,
    Ipv6HintValue,
    OpaqueValue>;

  struct SvcParam
  {
    std::uint16_t key = 0;
    SvcValue value;

    bool operator==(const SvcParam&) const = default;
  };

  enum class RecordType : std::uint16_t
  {
    svcb = 64,
    https = 65,
  };

  struct HttpsRecord
  {
    RecordType type = RecordType::https;
    DomainName owner;
    std::uint32_t ttl = 0;
    std::uint16_t svc_priority = 0;
    DomainName target;
    /// Unique by key. Order as written for presentation input; ascending for
    /// anything decoded from wire or passed through normalized().
    std::vector<SvcParam> params;

    bool is_alias() const noexcept
    {
      return svc_priority == 0;
    }

    const SvcParam* find(std::uint16_t key) const;
    const SvcParam* find(SvcKey key) const
    {
      return find(key_number(key));
    }

    template <typename T>
    const T* get(SvcKey key) const
    {
      auto* p = find(key);
      return p ? std::get_if<T>(&p->value) : nullptr;
    }

    /// Host the record points at: target, or owner when target is ".".
    DomainName effective_target() const
    {
      return target.is_root() ? owner : target;
    }

    bool operator==(const HttpsRecord&) const = default;
  };

  /// Params sorted ascending; AliasMode params dropped.
  HttpsRecord normalized(HttpsRecord rec);

  inline constexpr std::size_t max_rdata = 65535;
  inline constexpr std::uint32_t default_ttl = 3600;

  /// One RR line: `owner [ttl] [IN] HTTPS|SVCB|TYPE64|TYPE65 rdata`.
  /// rdata may be the RFC 3597 generic form `\# len hex`.
  HttpsRecord parse_presentation(std::string_view line);

  /// Only the rdata part (priority target params), for callers that carry
  /// owner/ttl separately.
  HttpsRecord parse_presentation_rdata(
    std::string_view rdata, DomainName owner = {}, std::uint32_t ttl = 0,
    RecordType type = RecordType::https);

  HttpsRecord parse_wire(
    ByteView rdata, DomainName owner = {}, std::uint32_t ttl = 0,
    RecordType type = RecordType::https);

  /// Canonical rdata: params ascending by key, uncompressed target.
  Bytes to_wire(const HttpsRecord& rec);

  std::string to_presentation(const HttpsRecord& rec);
  /// `priority target params` only.
  std::string rdata_to_presentation(const HttpsRecord& rec);
  /// Value text as it would follow `key=` (empty for valueless params).
  std::string param_value_to_presentation(const SvcParam& param);

  enum class IssueCode
  {
    alias_with_params,
    alias_target_self,
    service_empty_params,
    target_is_ip_literal,
    target_is_url,
    mandatory_self,
    mandatory_missing_key,
    no_default_alpn_without_alpn,
  };

  enum class Severity
  {
    error,
    warning,
  };

  /// "ALIAS_WITH_PARAMS" etc; the stable external spelling.
  std::string_view to_string(IssueCode code);
  std::string_view to_string(Severity s);
  Severity severity_of(IssueCode code);

  struct ValidationIssue
  {
    IssueCode code;
    Severity severity;
    std::string detail;

    bool operator==(const ValidationIssue&) const = default;
  };

  /// Issues sorted by code; empty means conformant. Param order does not
  /// affect the result.
  std::vector<ValidationIssue> validate(const HttpsRecord& rec);
}
