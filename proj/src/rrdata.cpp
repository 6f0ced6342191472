// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/rrdata.hpp"

#include "httpsrr/record.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <sstream>

namespace httpsrr
{
  namespace
  {
    struct TypeName
    {
      std::uint16_t type;
      std::string_view name;
    };

    constexpr TypeName type_names[] = {
      {rrtype::A, "A"},
      {rrtype::NS, "NS"},
      {rrtype::CNAME, "CNAME"},
      {rrtype::SOA, "SOA"},
      {rrtype::AAAA, "AAAA"},
      {rrtype::OPT, "OPT"},
      {rrtype::DS, "DS"},
      {rrtype::RRSIG, "RRSIG"},
      {rrtype::SVCB, "SVCB"},
      {rrtype::HTTPS, "HTTPS"},
    };

    std::string upper(std::string_view s)
    {
      std::string out(s);
      std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return char(std::toupper(c));
      });
      return out;
    }

    template <typename T>
    T number(std::string_view text, std::string_view what)
    {
      T v{};
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (text.empty() || ec != std::errc() || p != text.data() + text.size())
      {
        throw ParseError(
          ErrorCode::malformed_value, 0, fmt::format("{} '{}' is not a number", what, text));
      }
      return v;
    }

    std::vector<std::string> split_ws(std::string_view line)
    {
      auto semi = line.find(';');
      std::istringstream in(std::string(line.substr(0, semi)));
      std::vector<std::string> out;
      for (std::string tok; in >> tok;)
        out.push_back(tok);
      return out;
    }

    void need(const std::vector<std::string>& tok, std::size_t n, std::string_view type)
    {
      if (tok.size() != n)
      {
        throw ParseError(
          ErrorCode::syntax,
          0,
          fmt::format("{} rdata needs {} fields, got {}", type, n, tok.size()));
      }
    }
  }

  std::string type_name(std::uint16_t type)
  {
    for (const auto& t : type_names)
    {
      if (t.type == type)
        return std::string(t.name);
    }
    return fmt::format("TYPE{}", type);
  }

  std::optional<std::uint16_t> type_from_name(std::string_view name)
  {
    auto up = upper(name);
    for (const auto& t : type_names)
    {
      if (t.name == up)
        return t.type;
    }
    if (up.size() > 4 && up.starts_with("TYPE"))
    {
      unsigned v = 0;
      auto digits = std::string_view(up).substr(4);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec == std::errc() && p == digits.data() + digits.size() && v <= 0xffff)
        return std::uint16_t(v);
    }
    return std::nullopt;
  }

  ResourceRecord parse_rr_line(std::string_view line)
  {
    auto tok = split_ws(line);
    if (tok.empty())
      throw ParseError(ErrorCode::syntax, 0, "empty zone line");

    ResourceRecord rr;
    rr.name = DomainName::parse(tok[0]);
    rr.ttl = default_ttl;
    std::size_t i = 1;
    std::optional<std::uint16_t> type;
    bool have_ttl = false;
    for (; i < tok.size() && !type; ++i)
    {
      auto up = upper(tok[i]);
      if (up == "IN")
        continue;
      if (auto t = type_from_name(up))
      {
        type = t;
        continue;
      }
      if (!have_ttl)
      {
        rr.ttl = number<std::uint32_t>(tok[i], "TTL");
        have_ttl = true;
        continue;
      }
      throw ParseError(ErrorCode::syntax, 0, fmt::format("unexpected token '{}'", tok[i]));
    }
    if (!type)
      throw ParseError(ErrorCode::syntax, 0, "missing record type");
    rr.type = *type;
    std::vector<std::string> rdata(tok.begin() + std::ptrdiff_t(i), tok.end());

    if (rr.type == rrtype::HTTPS || rr.type == rrtype::SVCB)
    {
      auto rec = parse_presentation(line);
      rr.ttl = rec.ttl;
      rr.rdata = to_wire(rec);
      return rr;
    }

    if (!rdata.empty() && rdata[0] == "\\#")
    {
      if (rdata.size() < 2)
        throw ParseError(ErrorCode::syntax, 0, "generic rdata needs a length");
      auto len = number<std::size_t>(rdata[1], "length");
      std::string hex;
      for (std::size_t k = 2; k < rdata.size(); ++k)
        hex += rdata[k];
      rr.rdata = from_hex(hex);
      if (rr.rdata.size() != len)
        throw ParseError(ErrorCode::length_mismatch, 0, "generic rdata length mismatch");
      return rr;
    }

    ByteWriter out;
    switch (rr.type)
    {
      case rrtype::A:
      {
        need(rdata, 1, "A");
        auto ip = Ipv4::parse(rdata[0]);
        if (!ip)
          throw ParseError(ErrorCode::malformed_value, 0, fmt::format("bad IPv4 '{}'", rdata[0]));
        out.bytes(ByteView(ip->octets));
        break;
      }
      case rrtype::AAAA:
      {
        need(rdata, 1, "AAAA");
        auto ip = Ipv6::parse(rdata[0]);
        if (!ip)
          throw ParseError(ErrorCode::malformed_value, 0, fmt::format("bad IPv6 '{}'", rdata[0]));
        out.bytes(ByteView(ip->octets));
        break;
      }
      case rrtype::CNAME:
      case rrtype::NS:
        need(rdata, 1, type_name(rr.type));
        DomainName::parse(rdata[0]).to_wire(out);
        break;
      case rrtype::SOA:
        need(rdata, 7, "SOA");
        DomainName::parse(rdata[0]).to_wire(out);
        DomainName::parse(rdata[1]).to_wire(out);
        for (std::size_t k = 2; k < 7; ++k)
          out.u32(number<std::uint32_t>(rdata[k], "SOA field"));
        break;
      case rrtype::DS:
      {
        if (rdata.size() < 4)
          throw ParseError(ErrorCode::syntax, 0, "DS rdata needs 4 fields");
        out.u16(number<std::uint16_t>(rdata[0], "key tag"));
        out.u8(number<std::uint8_t>(rdata[1], "algorithm"));
        out.u8(number<std::uint8_t>(rdata[2], "digest type"));
        std::string hex;
        for (std::size_t k = 3; k < rdata.size(); ++k)
          hex += rdata[k];
        out.bytes(ByteView(from_hex(hex)));
        break;
      }
      case rrtype::RRSIG:
      {
        if (rdata.size() < 9)
          throw ParseError(ErrorCode::syntax, 0, "RRSIG rdata needs 9 fields");
        RrsigData sig;
        auto covered = type_from_name(rdata[0]);
        if (!covered)
          throw ParseError(ErrorCode::malformed_value, 0, "bad RRSIG type covered");
        sig.type_covered = *covered;
        sig.algorithm = number<std::uint8_t>(rdata[1], "algorithm");
        sig.labels = number<std::uint8_t>(rdata[2], "labels");
        sig.original_ttl = number<std::uint32_t>(rdata[3], "original TTL");
        sig.expiration = number<std::uint32_t>(rdata[4], "expiration");
        sig.inception = number<std::uint32_t>(rdata[5], "inception");
        sig.key_tag = number<std::uint16_t>(rdata[6], "key tag");
        sig.signer = DomainName::parse(rdata[7]);
        std::string b64;
        for (std::size_t k = 8; k < rdata.size(); ++k)
          b64 += rdata[k];
        sig.signature = base64_decode(b64);
        rr.rdata = encode_rrsig(sig);
        return rr;
      }
      default:
        throw ParseError(
          ErrorCode::syntax,
          0,
          fmt::format("type {} needs the generic \\# form", type_name(rr.type)));
    }
    rr.rdata = std::move(out).take();
    return rr;
  }

  Ipv4 decode_a(ByteView rdata)
  {
    if (rdata.size() != 4)
      throw ParseError(ErrorCode::malformed_value, 0, "A rdata must be 4 bytes");
    Ipv4 ip;
    std::copy(rdata.begin(), rdata.end(), ip.octets.begin());
    return ip;
  }

  Ipv6 decode_aaaa(ByteView rdata)
  {
    if (rdata.size() != 16)
      throw ParseError(ErrorCode::malformed_value, 0, "AAAA rdata must be 16 bytes");
    Ipv6 ip;
    std::copy(rdata.begin(), rdata.end(), ip.octets.begin());
    return ip;
  }

  DomainName decode_name_rdata(ByteView rdata)
  {
    ByteReader in(rdata);
    auto name = DomainName::from_wire(in);
    if (!in.empty())
      throw ParseError(ErrorCode::length_mismatch, in.offset(), "trailing bytes after name");
    return name;
  }

  SoaData decode_soa(ByteView rdata)
  {
    ByteReader in(rdata);
    SoaData soa;
    soa.mname = DomainName::from_wire(in);
    soa.rname = DomainName::from_wire(in);
    soa.serial = in.u32();
    soa.refresh = in.u32();
    soa.retry = in.u32();
    soa.expire = in.u32();
    soa.minimum = in.u32();
    if (!in.empty())
      throw ParseError(ErrorCode::length_mismatch, in.offset(), "trailing bytes after SOA");
    return soa;
  }

  RrsigData decode_rrsig(ByteView rdata)
  {
    ByteReader in(rdata);
    RrsigData sig;
    sig.type_covered = in.u16();
    sig.algorithm = in.u8();
    sig.labels = in.u8();
    sig.original_ttl = in.u32();
    sig.expiration = in.u32();
    sig.inception = in.u32();
    sig.key_tag = in.u16();
    sig.signer = DomainName::from_wire(in);
    auto rest = in.take(in.remaining());
    sig.signature.assign(rest.begin(), rest.end());
    return sig;
  }

  Bytes encode_rrsig(const RrsigData& sig)
  {
    ByteWriter out;
    out.u16(sig.type_covered);
    out.u8(sig.algorithm);
    out.u8(sig.labels);
    out.u32(sig.original_ttl);
    out.u32(sig.expiration);
    out.u32(sig.inception);
    out.u16(sig.key_tag);
    sig.signer.to_wire(out);
    out.bytes(ByteView(sig.signature));
    return std::move(out).take();
  }

  std::string rdata_to_text(std::uint16_t type, ByteView rdata)
  {
    try
    {
      switch (type)
      {
        case rrtype::A:
          return decode_a(rdata).to_string();
        case rrtype::AAAA:
          return decode_aaaa(rdata).to_string();
        case rrtype::CNAME:
        case rrtype::NS:
          return decode_name_rdata(rdata).to_string();
        case rrtype::SOA:
        {
          auto s = decode_soa(rdata);
          return fmt::format(
            "{} {} {} {} {} {} {}",
            s.mname.to_string(),
            s.rname.to_string(),
            s.serial,
            s.refresh,
            s.retry,
            s.expire,
            s.minimum);
        }
        case rrtype::DS:
        {
          ByteReader in(rdata);
          auto tag = in.u16();
          auto alg = in.u8();
          auto dt = in.u8();
          auto digest = in.take(in.remaining());
          return fmt::format("{} {} {} {}", tag, alg, dt, to_hex(digest));
        }
        case rrtype::RRSIG:
        {
          auto s = decode_rrsig(rdata);
          return fmt::format(
            "{} {} {} {} {} {} {} {} {}",
            type_name(s.type_covered),
            s.algorithm,
            s.labels,
            s.original_ttl,
            s.expiration,
            s.inception,
            s.key_tag,
            s.signer.to_string(),
            base64_encode(s.signature));
        }
        case rrtype::HTTPS:
        case rrtype::SVCB:
          return rdata_to_presentation(parse_wire(rdata));
        default:
          break;
      }
    }
    catch (const ParseError&)
    {
    }
    return fmt::format("\\# {} {}", rdata.size(), to_hex(rdata));
  }

  std::string to_text(const ResourceRecord& rr)
  {
    return fmt::format(
      "{} {} IN {} {}",
      rr.name.to_string(),
      rr.ttl,
      type_name(rr.type),
      rdata_to_text(rr.type, rr.rdata));
  }
}
