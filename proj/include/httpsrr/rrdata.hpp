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
#include <vector>

namespace httpsrr
{
  namespace rrtype
  {
    inline constexpr std::uint16_t A = 1;
    inline constexpr std::uint16_t NS = 2;
    inline constexpr std::uint16_t CNAME = 5;
    inline constexpr std::uint16_t SOA = 6;
    inline constexpr std::uint16_t AAAA = 28;
    inline constexpr std::uint16_t OPT = 41;
    inline constexpr std::uint16_t DS = 43;
    inline constexpr std::uint16_t RRSIG = 46;
    inline constexpr std::uint16_t SVCB = 64;
    inline constexpr std::uint16_t HTTPS = 65;
  }

  /// "A", "HTTPS", ... or "TYPE123".
  std::string type_name(std::uint16_t type);
  std::optional<std::uint16_t> type_from_name(std::string_view name);

  /// One record with uncompressed wire rdata.
  struct ResourceRecord
  {
    DomainName name;
    std::uint16_t type = 0;
    std::uint16_t klass = 1;
    std::uint32_t ttl = 0;
    Bytes rdata;

    bool operator==(const ResourceRecord&) const = default;
  };

  /// Zone-file line for A, AAAA, CNAME, NS, SOA, DS, HTTPS, SVCB or the
  /// generic `TYPEn \# len hex` form.
  ResourceRecord parse_rr_line(std::string_view line);
  /// Presentation rdata for the same set of types; generic form otherwise.
  std::string rdata_to_text(std::uint16_t type, ByteView rdata);
  std::string to_text(const ResourceRecord& rr);

  struct SoaData
  {
    DomainName mname;
    DomainName rname;
    std::uint32_t serial = 0;
    std::uint32_t refresh = 0;
    std::uint32_t retry = 0;
    std::uint32_t expire = 0;
    std::uint32_t minimum = 0;
  };

  struct RrsigData
  {
    std::uint16_t type_covered = 0;
    std::uint8_t algorithm = 0;
    std::uint8_t labels = 0;
    std::uint32_t original_ttl = 0;
    std::uint32_t expiration = 0;
    std::uint32_t inception = 0;
    std::uint16_t key_tag = 0;
    DomainName signer;
    Bytes signature;
  };

  Ipv4 decode_a(ByteView rdata);
  Ipv6 decode_aaaa(ByteView rdata);
  /// CNAME and NS targets.
  DomainName decode_name_rdata(ByteView rdata);
  SoaData decode_soa(ByteView rdata);
  RrsigData decode_rrsig(ByteView rdata);
  Bytes encode_rrsig(const RrsigData& sig);
}
