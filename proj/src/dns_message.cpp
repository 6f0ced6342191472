// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/dns_message.hpp"

#include <fmt/format.h>
#include <map>

namespace httpsrr
{
  namespace
  {
    constexpr std::uint16_t ptr_type = 12;
    constexpr std::uint16_t mx_type = 15;

    class NameCompressor
    {
    public:
      void write(ByteWriter& out, const DomainName& name, bool compress)
      {
        const auto& labels = name.labels();
        for (std::size_t i = 0; i < labels.size(); ++i)
        {
          auto key = suffix_key(labels, i);
          if (compress)
          {
            auto it = offsets_.find(key);
            if (it != offsets_.end())
            {
              out.u16(std::uint16_t(0xc000 | it->second));
              return;
            }
            if (out.size() < 0x3fff)
              offsets_.emplace(std::move(key), std::uint16_t(out.size()));
          }
          out.u8(std::uint8_t(labels[i].size()));
          out.bytes(labels[i]);
        }
        out.u8(0);
      }

    private:
      static std::string suffix_key(const std::vector<std::string>& labels, std::size_t from)
      {
        std::string key;
        for (std::size_t i = from; i < labels.size(); ++i)
        {
          key.push_back(char(labels[i].size()));
          key += labels[i];
        }
        return key;
      }

      std::map<std::string, std::uint16_t> offsets_;
    };

    /// Reads a possibly compressed name from `msg` starting at `pos`;
    /// returns the name and the offset just past it in the original stream.
    DomainName read_name(ByteView msg, std::size_t& pos)
    {
      std::vector<std::string> labels;
      std::size_t cursor = pos;
      std::size_t wire = 1;
      bool jumped = false;
      std::size_t lowest = pos;
      for (;;)
      {
        if (cursor >= msg.size())
          throw ParseError(ErrorCode::truncated, cursor, "name runs past end of message");
        auto len = msg[cursor];
        if ((len & 0xc0) == 0xc0)
        {
          if (cursor + 1 >= msg.size())
            throw ParseError(ErrorCode::truncated, cursor, "truncated compression pointer");
          std::size_t target = std::size_t(len & 0x3f) << 8 | msg[cursor + 1];
          if (target >= lowest)
            throw ParseError(ErrorCode::malformed_value, cursor, "compression pointer does not point backwards");
          if (!jumped)
            pos = cursor + 2;
          jumped = true;
          lowest = target;
          cursor = target;
          continue;
        }
        if ((len & 0xc0) != 0)
          throw ParseError(ErrorCode::malformed_value, cursor, "unsupported label type");
        if (len == 0)
        {
          if (!jumped)
            pos = cursor + 1;
          break;
        }
        if (cursor + 1 + len > msg.size())
          throw ParseError(ErrorCode::truncated, cursor, "label runs past end of message");
        wire += len + 1;
        if (wire > DomainName::max_wire)
          throw ParseError(ErrorCode::malformed_value, cursor, "name exceeds 255 bytes");
        labels.emplace_back(msg.begin() + std::ptrdiff_t(cursor + 1), msg.begin() + std::ptrdiff_t(cursor + 1 + len));
        cursor += 1 + len;
      }
      return DomainName::from_labels(std::move(labels));
    }

    std::uint16_t get16(ByteView msg, std::size_t& pos)
    {
      if (pos + 2 > msg.size())
        throw ParseError(ErrorCode::truncated, pos, "message truncated");
      std::uint16_t v = std::uint16_t(msg[pos] << 8 | msg[pos + 1]);
      pos += 2;
      return v;
    }

    std::uint32_t get32(ByteView msg, std::size_t& pos)
    {
      std::uint32_t hi = get16(msg, pos);
      return hi << 16 | get16(msg, pos);
    }

    /// Rdata with embedded names re-encoded without compression.
    Bytes expand_rdata(ByteView msg, std::size_t start, std::size_t len, std::uint16_t type)
    {
      auto end = start + len;
      auto raw = msg.subspan(start, len);
      auto finish = [&](std::size_t pos) {
        if (pos != end)
          throw ParseError(ErrorCode::length_mismatch, pos, "rdata length disagrees with contents");
      };
      ByteWriter out;
      std::size_t pos = start;
      switch (type)
      {
        case rrtype::CNAME:
        case rrtype::NS:
        case ptr_type:
          read_name(msg, pos).to_wire(out);
          finish(pos);
          return std::move(out).take();
        case mx_type:
          out.u16(get16(msg, pos));
          read_name(msg, pos).to_wire(out);
          finish(pos);
          return std::move(out).take();
        case rrtype::SOA:
          read_name(msg, pos).to_wire(out);
          read_name(msg, pos).to_wire(out);
          for (int i = 0; i < 5; ++i)
            out.u32(get32(msg, pos));
          finish(pos);
          return std::move(out).take();
        case rrtype::RRSIG:
          if (len < 18)
            throw ParseError(ErrorCode::truncated, start, "RRSIG rdata too short");
          out.bytes(msg.subspan(start, 18));
          pos = start + 18;
          read_name(msg, pos).to_wire(out);
          if (pos > end)
            throw ParseError(ErrorCode::length_mismatch, pos, "rdata length disagrees with contents");
          out.bytes(msg.subspan(pos, end - pos));
          return std::move(out).take();
        case rrtype::SVCB:
        case rrtype::HTTPS:
          out.u16(get16(msg, pos));
          read_name(msg, pos).to_wire(out);
          if (pos > end)
            throw ParseError(ErrorCode::length_mismatch, pos, "rdata length disagrees with contents");
          out.bytes(msg.subspan(pos, end - pos));
          return std::move(out).take();
        default:
          return Bytes(raw.begin(), raw.end());
      }
    }
  }

  DnsMessage make_query(std::uint16_t id, const DomainName& name, std::uint16_t type, bool dnssec_ok)
  {
    DnsMessage q;
    q.id = id;
    q.rd = true;
    q.questions.push_back({name, type, 1});
    q.edns = Edns{};
    q.edns->dnssec_ok = dnssec_ok;
    return q;
  }

  Bytes encode_message(const DnsMessage& msg, bool compress)
  {
    if (msg.opcode > 15 || msg.rcode > 15)
      throw ContractViolation("opcode and rcode must fit in four bits");
    ByteWriter out;
    NameCompressor names;
    out.u16(msg.id);
    std::uint16_t flags = 0;
    flags |= std::uint16_t(msg.qr) << 15;
    flags |= std::uint16_t(msg.opcode) << 11;
    flags |= std::uint16_t(msg.aa) << 10;
    flags |= std::uint16_t(msg.tc) << 9;
    flags |= std::uint16_t(msg.rd) << 8;
    flags |= std::uint16_t(msg.ra) << 7;
    flags |= std::uint16_t(msg.ad) << 5;
    flags |= std::uint16_t(msg.cd) << 4;
    flags |= msg.rcode;
    out.u16(flags);
    out.u16(std::uint16_t(msg.questions.size()));
    out.u16(std::uint16_t(msg.answers.size()));
    out.u16(std::uint16_t(msg.authority.size()));
    out.u16(std::uint16_t(msg.additional.size() + (msg.edns ? 1 : 0)));
    for (const auto& q : msg.questions)
    {
      names.write(out, q.name, compress);
      out.u16(q.type);
      out.u16(q.klass);
    }
    auto write_rr = [&](const ResourceRecord& rr) {
      names.write(out, rr.name, compress);
      out.u16(rr.type);
      out.u16(rr.klass);
      out.u32(rr.ttl);
      if (rr.rdata.size() > 0xffff)
        throw ContractViolation("rdata longer than 65535 bytes");
      out.u16(std::uint16_t(rr.rdata.size()));
      out.bytes(rr.rdata);
    };
    for (const auto& rr : msg.answers)
      write_rr(rr);
    for (const auto& rr : msg.authority)
      write_rr(rr);
    for (const auto& rr : msg.additional)
      write_rr(rr);
    if (msg.edns)
    {
      out.u8(0);
      out.u16(rrtype::OPT);
      out.u16(msg.edns->udp_size);
      out.u8(msg.edns->extended_rcode);
      out.u8(msg.edns->version);
      out.u16(msg.edns->dnssec_ok ? 0x8000 : 0);
      out.u16(std::uint16_t(msg.edns->options.size()));
      out.bytes(msg.edns->options);
    }
    return std::move(out).take();
  }

  DnsMessage decode_message(ByteView wire)
  {
    if (wire.size() > 0xffff)
      throw ParseError(ErrorCode::oversize, 0, "message longer than 65535 bytes");
    DnsMessage m;
    std::size_t pos = 0;
    m.id = get16(wire, pos);
    auto flags = get16(wire, pos);
    m.qr = flags & 0x8000;
    m.opcode = std::uint8_t(flags >> 11 & 0xf);
    m.aa = flags & 0x0400;
    m.tc = flags & 0x0200;
    m.rd = flags & 0x0100;
    m.ra = flags & 0x0080;
    m.ad = flags & 0x0020;
    m.cd = flags & 0x0010;
    m.rcode = std::uint8_t(flags & 0xf);
    auto qd = get16(wire, pos);
    auto an = get16(wire, pos);
    auto ns = get16(wire, pos);
    auto ar = get16(wire, pos);

    for (unsigned i = 0; i < qd; ++i)
    {
      Question q;
      q.name = read_name(wire, pos);
      q.type = get16(wire, pos);
      q.klass = get16(wire, pos);
      m.questions.push_back(std::move(q));
    }
    auto read_rr = [&](bool allow_opt) -> std::optional<ResourceRecord> {
      auto start = pos;
      ResourceRecord rr;
      rr.name = read_name(wire, pos);
      rr.type = get16(wire, pos);
      rr.klass = get16(wire, pos);
      rr.ttl = get32(wire, pos);
      auto len = get16(wire, pos);
      if (pos + len > wire.size())
        throw ParseError(ErrorCode::truncated, pos, "rdata runs past end of message");
      if (rr.type == rrtype::OPT)
      {
        if (!allow_opt || !rr.name.is_root() || m.edns)
          throw ParseError(ErrorCode::malformed_value, start, "misplaced OPT record");
        Edns e;
        e.udp_size = rr.klass;
        e.extended_rcode = std::uint8_t(rr.ttl >> 24);
        e.version = std::uint8_t(rr.ttl >> 16);
        e.dnssec_ok = rr.ttl & 0x8000;
        e.options.assign(wire.begin() + std::ptrdiff_t(pos), wire.begin() + std::ptrdiff_t(pos + len));
        m.edns = std::move(e);
        pos += len;
        return std::nullopt;
      }
      rr.rdata = expand_rdata(wire, pos, len, rr.type);
      pos += len;
      return rr;
    };
    for (unsigned i = 0; i < an; ++i)
      m.answers.push_back(*read_rr(false));
    for (unsigned i = 0; i < ns; ++i)
      m.authority.push_back(*read_rr(false));
    for (unsigned i = 0; i < ar; ++i)
    {
      if (auto rr = read_rr(true))
        m.additional.push_back(std::move(*rr));
    }
    if (pos != wire.size())
      throw ParseError(ErrorCode::length_mismatch, pos, fmt::format("{} trailing bytes", wire.size() - pos));
    return m;
  }

  std::vector<ResourceRecord> answers_of(const DnsMessage& msg, std::uint16_t type)
  {
    std::vector<ResourceRecord> out;
    for (const auto& rr : msg.answers)
    {
      if (rr.type == type)
        out.push_back(rr);
    }
    return out;
  }
}
