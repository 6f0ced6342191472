// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/zone.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace httpsrr
{
  ZoneStore ZoneStore::from_lines(const std::vector<std::string>& lines, bool allow_cname_coexist)
  {
    ZoneStore z(allow_cname_coexist);
    for (const auto& line : lines)
      z.add_line(line);
    return z;
  }

  void ZoneStore::add(ResourceRecord rr)
  {
    if (!allow_cname_coexist_)
    {
      for (const auto& r : records_)
      {
        if (r.name != rr.name)
          continue;
        bool clash = (r.type == rrtype::CNAME) != (rr.type == rrtype::CNAME) ||
          (r.type == rrtype::CNAME && rr.type == rrtype::CNAME);
        if (clash)
        {
          throw ContractViolation(
            fmt::format("CNAME at {} cannot coexist with other records", rr.name.to_string()));
        }
      }
    }
    records_.push_back(std::move(rr));
  }

  void ZoneStore::add_line(std::string_view line)
  {
    add(parse_rr_line(line));
  }

  void ZoneStore::set_flags(const DomainName& name, ZoneFlags flags)
  {
    flags_[name] = flags;
  }

  ZoneFlags ZoneStore::flags(const DomainName& name) const
  {
    auto it = flags_.find(name);
    return it == flags_.end() ? ZoneFlags{} : it->second;
  }

  std::vector<ResourceRecord> ZoneStore::rrset(const DomainName& name, std::uint16_t type) const
  {
    std::vector<ResourceRecord> out;
    for (const auto& r : records_)
    {
      if (r.name == name && r.type == type)
        out.push_back(r);
    }
    return out;
  }

  bool ZoneStore::has_name(const DomainName& name) const
  {
    return std::any_of(records_.begin(), records_.end(), [&](const auto& r) { return r.name == name; });
  }

  std::set<DomainName> ZoneStore::names() const
  {
    std::set<DomainName> out;
    for (const auto& r : records_)
      out.insert(r.name);
    return out;
  }

  DomainName ResolveResult::final_name(const DomainName& qname) const
  {
    return cname_chain.empty() ? qname : decode_name_rdata(cname_chain.back().rdata);
  }

  ResolveResult resolve(const ZoneStore& zone, const DomainName& qname, std::uint16_t qtype)
  {
    ResolveResult out;
    out.nxdomain = !zone.has_name(qname);
    DomainName name = qname;
    out.ad = zone.flags(name).ad;
    for (std::size_t depth = 0;; ++depth)
    {
      auto answers = zone.rrset(name, qtype);
      if (!answers.empty() || qtype == rrtype::CNAME)
      {
        out.answers = std::move(answers);
        return out;
      }
      auto cname = zone.rrset(name, rrtype::CNAME);
      if (cname.empty())
        return out;
      if (depth == max_cname_depth)
      {
        throw AliasLoopError(
          fmt::format("CNAME chain from {} exceeds {} hops", qname.to_string(), max_cname_depth));
      }
      name = decode_name_rdata(cname.front().rdata);
      out.ad = out.ad && zone.flags(name).ad;
      out.cname_chain.push_back(std::move(cname.front()));
    }
  }

  DnsView make_view(const ZoneStore& zone)
  {
    DnsView view;
    for (const auto& name : zone.names())
    {
      NameRecords rec;
      try
      {
        for (const auto& rr : resolve(zone, name, rrtype::HTTPS).answers)
        {
          try
          {
            rec.https.push_back(parse_wire(rr.rdata, name, rr.ttl));
          }
          catch (const ParseError&)
          {
          }
        }
        for (const auto& rr : resolve(zone, name, rrtype::A).answers)
          rec.a.push_back(decode_a(rr.rdata));
        for (const auto& rr : resolve(zone, name, rrtype::AAAA).answers)
          rec.aaaa.push_back(decode_aaaa(rr.rdata));
      }
      catch (const AliasLoopError&)
      {
        rec = {};
      }
      catch (const ParseError&)
      {
        rec = {};
      }
      view.set(name, std::move(rec));
    }
    return view;
  }
}
