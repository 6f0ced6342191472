// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/rrdata.hpp"

#include <optional>
#include <vector>

namespace httpsrr
{
  namespace rcode
  {
    inline constexpr std::uint8_t noerror = 0;
    inline constexpr std::uint8_t formerr = 1;
    inline constexpr std::uint8_t servfail = 2;
    inline constexpr std::uint8_t nxdomain = 3;
    inline constexpr std::uint8_t refused = 5;
  }

  struct Question
  {
    DomainName name;
    std::uint16_t type = 0;
    std::uint16_t klass = 1;

    bool operator==(const Question&) const = default;
  };

  /// EDNS(0) OPT pseudo-record.
  struct Edns
  {
    std::uint16_t udp_size = 1232;
    std::uint8_t extended_rcode = 0;
    std::uint8_t version = 0;
    bool dnssec_ok = false;
    /// Raw option TLVs.
    Bytes options;

    bool operator==(const Edns&) const = default;
  };

  struct DnsMessage
  {
    std::uint16_t id = 0;
    bool qr = false;
    std::uint8_t opcode = 0;
    bool aa = false;
    bool tc = false;
    bool rd = true;
    bool ra = false;
    bool ad = false;
    bool cd = false;
    std::uint8_t rcode = 0;
    std::vector<Question> questions;
    std::vector<ResourceRecord> answers;
    std::vector<ResourceRecord> authority;
    /// OPT is lifted out into `edns` and never appears here.
    std::vector<ResourceRecord> additional;
    std::optional<Edns> edns;

    bool operator==(const DnsMessage&) const = default;
  };

  /// Recursion-desired query with EDNS; `dnssec_ok` sets the DO bit.
  DnsMessage make_query(std::uint16_t id, const DomainName& name, std::uint16_t type, bool dnssec_ok);

  /// Owner and question names are compressed when `compress` is set; rdata
  /// is always written uncompressed.
  Bytes encode_message(const DnsMessage& msg, bool compress = true);

  /// Compression pointers are followed (loops and forward pointers are
  /// rejected) and the rdata of CNAME, NS, PTR, MX, SOA, RRSIG, SVCB and
  /// HTTPS is rewritten in uncompressed form.
  DnsMessage decode_message(ByteView wire);

  /// Records of `type` in the answer section.
  std::vector<ResourceRecord> answers_of(const DnsMessage& msg, std::uint16_t type);
}
