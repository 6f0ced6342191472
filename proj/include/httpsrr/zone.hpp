// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/resolution.hpp"
#include "httpsrr/rrdata.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace httpsrr
{
  /// Scripted DNSSEC state for one owner name. Nothing is verified.
  struct ZoneFlags
  {
    /// Answers carry a synthetic RRSIG.
    bool signed_rrsets = false;
    /// Resolver sets AD on answers for this name.
    bool ad = false;
  };

  /// In-memory authoritative data. Records keep insertion order.
  class ZoneStore
  {
  public:
    /// With `allow_cname_coexist` a CNAME may share its owner with other
    /// types (a common misconfiguration scanners still have to handle).
    explicit ZoneStore(bool allow_cname_coexist = false) :
      allow_cname_coexist_(allow_cname_coexist)
    {}

    static ZoneStore from_lines(const std::vector<std::string>& lines, bool allow_cname_coexist = false);

    /// Throws ContractViolation when CNAME exclusivity would break.
    void add(ResourceRecord rr);
    void add_line(std::string_view line);

    void set_flags(const DomainName& name, ZoneFlags flags);
    ZoneFlags flags(const DomainName& name) const;

    std::vector<ResourceRecord> rrset(const DomainName& name, std::uint16_t type) const;
    bool has_name(const DomainName& name) const;
    std::set<DomainName> names() const;
    const std::vector<ResourceRecord>& records() const
    {
      return records_;
    }
    bool allow_cname_coexist() const
    {
      return allow_cname_coexist_;
    }

  private:
    bool allow_cname_coexist_;
    std::vector<ResourceRecord> records_;
    std::map<DomainName, ZoneFlags> flags_;
  };

  struct ResolveResult
  {
    /// Final RRset, owned by the last name in the chain.
    std::vector<ResourceRecord> answers;
    /// CNAME records walked, in order.
    std::vector<ResourceRecord> cname_chain;
    bool ad = false;
    /// The queried name does not exist at all.
    bool nxdomain = false;

    DomainName final_name(const DomainName& qname) const;
  };

  inline constexpr std::size_t max_cname_depth = 8;

  /// Follows CNAMEs up to max_cname_depth; throws AliasLoopError beyond.
  /// A CNAME query returns the CNAME itself.
  ResolveResult resolve(const ZoneStore& zone, const DomainName& qname, std::uint16_t qtype);

  /// Client-side view: HTTPS/A/AAAA per name with CNAMEs already followed.
  /// Names whose chain loops read as empty.
  DnsView make_view(const ZoneStore& zone);
}
