// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/record.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fmt/format.h>
#include <set>

namespace httpsrr
{
  namespace
  {
    constexpr std::string_view registered_keys[] = {
      "mandatory", "alpn", "no-default-alpn", "port", "ipv4hint", "ech", "ipv6hint"};

    struct Token
    {
      std::string raw; // quotes removed, escapes intact
      std::size_t pos = 0;
    };

    /// Split a zone-file line into whitespace-separated tokens. Quotes group
    /// text and are dropped; backslash escapes are kept verbatim for the
    /// value decoders. A ';' outside quotes starts a comment.
    std::vector<Token> tokenize(std::string_view line)
    {
      std::vector<Token> out;
      std::optional<Token> cur;
      bool quoted = false;
      for (std::size_t i = 0; i < line.size(); ++i)
      {
        char c = line[i];
        if (!quoted && c == ';')
          break;
        if (!quoted && std::isspace(static_cast<unsigned char>(c)))
        {
          if (cur)
          {
            out.push_back(std::move(*cur));
            cur.reset();
          }
          continue;
        }
        if (!cur)
          cur = Token{"", i};
        if (c == '\\')
        {
          if (i + 1 >= line.size())
            throw ParseError(ErrorCode::syntax, i, "dangling backslash");
          cur->raw.push_back(c);
          cur->raw.push_back(line[++i]);
        }
        else if (c == '"')
        {
          quoted = !quoted;
        }
        else
        {
          cur->raw.push_back(c);
        }
      }
      if (quoted)
        throw ParseError(ErrorCode::syntax, line.size(), "unterminated quote");
      if (cur)
        out.push_back(std::move(*cur));
      return out;
    }

    /// Resolve `\DDD` and `\X` escapes of a character-string.
    std::string decode_char_string(std::string_view raw, std::size_t pos)
    {
      std::string out;
      for (std::size_t i = 0; i < raw.size(); ++i)
      {
        if (raw[i] != '\\')
        {
          out.push_back(raw[i]);
          continue;
        }
        if (i + 1 >= raw.size())
          throw ParseError(ErrorCode::syntax, pos + i, "dangling backslash");
        if (std::isdigit(static_cast<unsigned char>(raw[i + 1])))
        {
          if (
            i + 3 >= raw.size() ||
            !std::isdigit(static_cast<unsigned char>(raw[i + 2])) ||
            !std::isdigit(static_cast<unsigned char>(raw[i + 3])))
            throw ParseError(ErrorCode::syntax, pos + i, "bad \\DDD escape");
          int v = (raw[i + 1] - '0') * 100 + (raw[i + 2] - '0') * 10 + (raw[i + 3] - '0');
          if (v > 255)
            throw ParseError(ErrorCode::syntax, pos + i, "\\DDD escape above 255");
          out.push_back(char(v));
          i += 3;
        }
        else
        {
          out.push_back(raw[++i]);
        }
      }
      return out;
    }

    /// Second-level comma-separated list decoding: `\,` is a literal comma,
    /// `\\` a literal backslash.
    std::vector<std::string> split_value_list(std::string_view decoded, std::size_t pos)
    {
      std::vector<std::string> items;
      std::string cur;
      for (std::size_t i = 0; i < decoded.size(); ++i)
      {
        char c = decoded[i];
        if (c == '\\')
        {
          if (i + 1 >= decoded.size())
            throw ParseError(ErrorCode::malformed_value, pos, "dangling backslash in list");
          cur.push_back(decoded[++i]);
        }
        else if (c == ',')
        {
          items.push_back(std::move(cur));
          cur.clear();
        }
        else
        {
          cur.push_back(c);
        }
      }
      items.push_back(std::move(cur));
      return items;
    }

    std::string escape_char_string(std::string_view bytes)
    {
      std::string out;
      for (unsigned char c : bytes)
      {
        if (c < 0x21 || c > 0x7e)
          out += fmt::format("\\{:03d}", int(c));
        else if (c == '"' || c == '\\' || c == ';' || c == '(' || c == ')')
        {
          out.push_back('\\');
          out.push_back(char(c));
        }
        else
          out.push_back(char(c));
      }
      return out;
    }

    std::string escape_list_item(std::string_view item)
    {
      std::string out;
      for (char c : item)
      {
        if (c == ',' || c == '\\')
          out.push_back('\\');
        out.push_back(c);
      }
      return escape_char_string(out);
    }

    std::uint16_t parse_u16(std::string_view text, std::size_t pos, std::string_view what)
    {
      unsigned v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (text.empty() || ec != std::errc() || p != text.data() + text.size() || v > 0xffff)
      {
        throw ParseError(
          ErrorCode::malformed_value, pos, fmt::format("{} '{}' is not a 16-bit number", what, text));
      }
      return std::uint16_t(v);
    }

    std::optional<std::uint32_t> parse_u32(std::string_view text)
    {
      std::uint32_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (text.empty() || ec != std::errc() || p != text.data() + text.size())
        return std::nullopt;
      return v;
    }

    std::string upper(std::string_view s)
    {
      std::string out(s);
      std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return char(std::toupper(c));
      });
      return out;
    }

    SvcValue parse_param_value(
      std::uint16_t key, const std::optional<std::string>& raw, std::size_t pos)
    {
      auto require_value = [&]() -> std::string {
        if (!raw || raw->empty())
        {
          throw ParseError(
            ErrorCode::malformed_value, pos, fmt::format("{} requires a value", key_name(key)));
        }
        return decode_char_string(*raw, pos);
      };

      switch (key)
      {
        case key_number(SvcKey::mandatory):
        {
          MandatoryValue v;
          std::set<std::uint16_t> seen;
          for (const auto& item : split_value_list(require_value(), pos))
          {
            auto k = key_from_name(item);
            if (!k)
            {
              throw ParseError(
                ErrorCode::malformed_value, pos, fmt::format("unknown key '{}' in mandatory", item));
            }
            if (!seen.insert(*k).second)
            {
              throw ParseError(
                ErrorCode::malformed_value, pos, fmt::format("duplicate key '{}' in mandatory", item));
            }
            v.keys.push_back(*k);
          }
          return v;
        }
        case key_number(SvcKey::alpn):
        {
          AlpnValue v;
          for (auto& item : split_value_list(require_value(), pos))
          {
            if (item.empty() || item.size() > 255)
            {
              throw ParseError(ErrorCode::malformed_value, pos, "alpn id must be 1-255 bytes");
            }
            v.ids.push_back(std::move(item));
          }
          return v;
        }
        case key_number(SvcKey::no_default_alpn):
          if (raw)
          {
            throw ParseError(ErrorCode::malformed_value, pos, "no-default-alpn takes no value");
          }
          return NoDefaultAlpnValue{};
        case key_number(SvcKey::port):
        {
          auto text = require_value();
          auto port = parse_u16(text, pos, "port");
          if (port == 0)
            throw ParseError(ErrorCode::malformed_value, pos, "port must be 1-65535");
          return PortValue{port};
        }
        case key_number(SvcKey::ipv4hint):
        {
          Ipv4HintValue v;
          for (const auto& item : split_value_list(require_value(), pos))
          {
            auto ip = Ipv4::parse(item);
            if (!ip)
            {
              throw ParseError(ErrorCode::malformed_value, pos, fmt::format("bad IPv4 '{}'", item));
            }
            v.addrs.push_back(*ip);
          }
          return v;
        }
        case key_number(SvcKey::ech):
        {
          auto text = raw ? decode_char_string(*raw, pos) : std::string();
          try
          {
            return EchValue{base64_decode(text)};
          }
          catch (const ParseError& e)
          {
            throw ParseError(ErrorCode::malformed_value, pos, fmt::format("ech: {}", e.what()));
          }
        }
        case key_number(SvcKey::ipv6hint):
        {
          Ipv6HintValue v;
          for (const auto& item : split_value_list(require_value(), pos))
          {
            auto ip = Ipv6::parse(item);
            if (!ip)
            {
              throw ParseError(ErrorCode::malformed_value, pos, fmt::format("bad IPv6 '{}'", item));
            }
            v.addrs.push_back(*ip);
          }
          return v;
        }
        default:
        {
          auto text = raw ? decode_char_string(*raw, pos) : std::string();
          return OpaqueValue{Bytes(text.begin(), text.end())};
        }
      }
    }

    SvcValue parse_wire_value(std::uint16_t key, ByteReader in)
    {
      auto start = in.offset();
      auto malformed = [&](const std::string& why) {
        return ParseError(
          ErrorCode::malformed_value, start, fmt::format("{}: {}", key_name(key), why));
      };

      switch (key)
      {
        case key_number(SvcKey::mandatory):
        {
          if (in.empty() || in.remaining() % 2 != 0)
            throw malformed("length must be a non-zero multiple of 2");
          MandatoryValue v;
          while (!in.empty())
          {
            auto k = in.u16();
            if (!v.keys.empty() && k <= v.keys.back())
              throw malformed("keys must be strictly ascending");
            v.keys.push_back(k);
          }
          return v;
        }
        case key_number(SvcKey::alpn):
        {
          if (in.empty())
            throw malformed("empty list");
          AlpnValue v;
          while (!in.empty())
          {
            auto len = in.u8();
            if (len == 0)
              throw malformed("zero-length alpn id");
            if (len > in.remaining())
            {
              throw ParseError(ErrorCode::length_overrun, in.offset(), "alpn id overruns value");
            }
            auto id = in.take(len);
            v.ids.emplace_back(id.begin(), id.end());
          }
          return v;
        }
        case key_number(SvcKey::no_default_alpn):
          if (!in.empty())
            throw malformed("must be empty");
          return NoDefaultAlpnValue{};
        case key_number(SvcKey::port):
        {
          if (in.remaining() != 2)
            throw malformed("length must be 2");
          auto port = in.u16();
          if (port == 0)
            throw malformed("port must be 1-65535");
          return PortValue{port};
        }
        case key_number(SvcKey::ipv4hint):
        {
          if (in.empty() || in.remaining() % 4 != 0)
            throw malformed("length must be a non-zero multiple of 4");
          Ipv4HintValue v;
          while (!in.empty())
          {
            Ipv4 ip;
            auto raw = in.take(4);
            std::copy(raw.begin(), raw.end(), ip.octets.begin());
            v.addrs.push_back(ip);
          }
          return v;
        }
        case key_number(SvcKey::ech):
        {
          auto raw = in.take(in.remaining());
          return EchValue{Bytes(raw.begin(), raw.end())};
        }
        case key_number(SvcKey::ipv6hint):
        {
          if (in.empty() || in.remaining() % 16 != 0)
            throw malformed("length must be a non-zero multiple of 16");
          Ipv6HintValue v;
          while (!in.empty())
          {
            Ipv6 ip;
            auto raw = in.take(16);
            std::copy(raw.begin(), raw.end(), ip.octets.begin());
            v.addrs.push_back(ip);
          }
          return v;
        }
        default:
        {
          auto raw = in.take(in.remaining());
          return OpaqueValue{Bytes(raw.begin(), raw.end())};
        }
      }
    }

    void write_value(ByteWriter& out, const SvcValue& value)
    {
      std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, MandatoryValue>)
          {
            auto keys = v.keys;
            std::sort(keys.begin(), keys.end());
            for (auto k : keys)
              out.u16(k);
          }
          else if constexpr (std::is_same_v<T, AlpnValue>)
          {
            for (const auto& id : v.ids)
            {
              out.u8(std::uint8_t(id.size()));
              out.bytes(std::string_view(id));
            }
          }
          else if constexpr (std::is_same_v<T, NoDefaultAlpnValue>)
          {
          }
          else if constexpr (std::is_same_v<T, PortValue>)
          {
            out.u16(v.port);
          }
          else if constexpr (std::is_same_v<T, Ipv4HintValue> || std::is_same_v<T, Ipv6HintValue>)
          {
            for (const auto& a : v.addrs)
              out.bytes(ByteView(a.octets));
          }
          else if constexpr (std::is_same_v<T, EchValue>)
          {
            out.bytes(ByteView(v.config_list));
          }
          else
          {
            out.bytes(ByteView(v.data));
          }
        },
        value);
    }

    std::vector<const SvcParam*> sorted_params(const HttpsRecord& rec)
    {
      std::vector<const SvcParam*> out;
      for (const auto& p : rec.params)
        out.push_back(&p);
      std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->key < b->key; });
      return out;
    }

    std::string type_mnemonic(RecordType t)
    {
      return t == RecordType::https ? "HTTPS" : "SVCB";
    }
  }

  std::string key_name(std::uint16_t key)
  {
    if (key < std::size(registered_keys))
      return std::string(registered_keys[key]);
    return fmt::format("key{}", key);
  }

  std::optional<std::uint16_t> key_from_name(std::string_view name)
  {
    for (std::uint16_t i = 0; i < std::size(registered_keys); ++i)
    {
      if (registered_keys[i] == name)
        return i;
    }
    // Names registered after the original seven; their values stay opaque.
    if (name == "dohpath")
      return 7;
    if (name == "ohttp")
      return 8;
    if (name.size() > 3 && name.substr(0, 3) == "key")
    {
      auto digits = name.substr(3);
      // keyNNNNN must not carry leading zeros.
      if (digits.size() > 1 && digits[0] == '0')
        return std::nullopt;
      unsigned v = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec == std::errc() && p == digits.data() + digits.size() && v <= 0xffff)
        return std::uint16_t(v);
    }
    return std::nullopt;
  }

  const SvcParam* HttpsRecord::find(std::uint16_t key) const
  {
    for (const auto& p : params)
    {
      if (p.key == key)
        return &p;
    }
    return nullptr;
  }

  HttpsRecord normalized(HttpsRecord rec)
  {
    if (rec.is_alias())
    {
      rec.params.clear();
      return rec;
    }
    std::sort(rec.params.begin(), rec.params.end(), [](const auto& a, const auto& b) {
      return a.key < b.key;
    });
    for (auto& p : rec.params)
    {
      if (auto* m = std::get_if<MandatoryValue>(&p.value))
        std::sort(m->keys.begin(), m->keys.end());
    }
    return rec;
  }

  HttpsRecord parse_presentation_rdata(
    std::string_view rdata, DomainName owner, std::uint32_t ttl, RecordType type)
  {
    auto tokens = tokenize(rdata);
    if (tokens.empty())
      throw ParseError(ErrorCode::syntax, 0, "missing SvcPriority");

    HttpsRecord rec;
    rec.type = type;
    rec.owner = std::move(owner);
    rec.ttl = ttl;

    if (tokens[0].raw == "\\#")
    {
      if (tokens.size() < 2)
        throw ParseError(ErrorCode::syntax, tokens[0].pos, "generic rdata needs a length");
      auto len = parse_u32(tokens[1].raw);
      if (!len)
        throw ParseError(ErrorCode::syntax, tokens[1].pos, "bad generic rdata length");
      std::string hex;
      for (std::size_t i = 2; i < tokens.size(); ++i)
        hex += tokens[i].raw;
      auto bytes = from_hex(hex);
      if (bytes.size() != *len)
      {
        throw ParseError(
          ErrorCode::length_mismatch,
          tokens[1].pos,
          fmt::format("generic rdata declares {} bytes, has {}", *len, bytes.size()));
      }
      return parse_wire(bytes, rec.owner, ttl, type);
    }

    rec.svc_priority = parse_u16(tokens[0].raw, tokens[0].pos, "SvcPriority");
    if (tokens.size() < 2)
      throw ParseError(ErrorCode::syntax, rdata.size(), "missing TargetName");
    rec.target = DomainName::parse(tokens[1].raw);

    std::set<std::uint16_t> seen;
    for (std::size_t i = 2; i < tokens.size(); ++i)
    {
      const auto& tok = tokens[i];
      auto eq = tok.raw.find('=');
      auto name = std::string_view(tok.raw).substr(0, eq);
      auto key = key_from_name(name);
      if (!key)
      {
        throw ParseError(ErrorCode::syntax, tok.pos, fmt::format("unknown SvcParamKey '{}'", name));
      }
      if (*key == 65535)
        throw ParseError(ErrorCode::syntax, tok.pos, "key65535 is reserved");
      if (!seen.insert(*key).second)
      {
        throw ParseError(
          ErrorCode::duplicate_key, tok.pos, fmt::format("duplicate key '{}'", key_name(*key)));
      }
      std::optional<std::string> raw;
      if (eq != std::string::npos)
        raw = tok.raw.substr(eq + 1);
      rec.params.push_back(SvcParam{*key, parse_param_value(*key, raw, tok.pos + eq + 1)});
    }
    return rec;
  }

  HttpsRecord parse_presentation(std::string_view line)
  {
    auto tokens = tokenize(line);
    if (tokens.empty())
      throw ParseError(ErrorCode::syntax, 0, "empty line");

    auto owner = DomainName::parse(tokens[0].raw);
    std::optional<std::uint32_t> ttl;
    std::size_t i = 1;
    std::optional<RecordType> type;
    for (; i < tokens.size() && !type; ++i)
    {
      auto up = upper(tokens[i].raw);
      if (up == "HTTPS" || up == "TYPE65")
        type = RecordType::https;
      else if (up == "SVCB" || up == "TYPE64")
        type = RecordType::svcb;
      else if (up == "IN" || up == "CLASS1")
        continue;
      else if (auto v = parse_u32(tokens[i].raw); v && !ttl)
        ttl = *v;
      else
      {
        throw ParseError(
          ErrorCode::syntax,
          tokens[i].pos,
          fmt::format("expected TTL, class or HTTPS/SVCB type, got '{}'", tokens[i].raw));
      }
    }
    if (!type)
      throw ParseError(ErrorCode::syntax, line.size(), "missing record type");
    if (i >= tokens.size())
      throw ParseError(ErrorCode::syntax, line.size(), "missing rdata");

    // Re-slice the original text so quoted values keep their spacing.
    auto rdata_text = line.substr(tokens[i].pos);
    try
    {
      return parse_presentation_rdata(rdata_text, owner, ttl.value_or(default_ttl), *type);
    }
    catch (const ParseError& e)
    {
      if (e.code() == ErrorCode::truncated || e.code() == ErrorCode::keys_not_ascending)
        throw;
      // Report the position relative to the whole line.
      throw ParseError(e.code(), e.position() + tokens[i].pos, e.what());
    }
  }

  HttpsRecord parse_wire(ByteView rdata, DomainName owner, std::uint32_t ttl, RecordType type)
  {
    if (rdata.size() > max_rdata)
    {
      throw ParseError(
        ErrorCode::oversize, max_rdata, fmt::format("rdata of {} bytes exceeds 65535", rdata.size()));
    }
    ByteReader in(rdata);
    HttpsRecord rec;
    rec.type = type;
    rec.owner = std::move(owner);
    rec.ttl = ttl;
    rec.svc_priority = in.u16();
    rec.target = DomainName::from_wire(in);

    std::optional<std::uint16_t> last;
    while (!in.empty())
    {
      auto key_pos = in.offset();
      auto key = in.u16();
      auto len = in.u16();
      if (last && key == *last)
      {
        throw ParseError(
          ErrorCode::duplicate_key, key_pos, fmt::format("duplicate key {}", key_name(key)));
      }
      if (last && key < *last)
      {
        throw ParseError(
          ErrorCode::keys_not_ascending,
          key_pos,
          fmt::format("key {} follows key {}", key, *last));
      }
      if (len > in.remaining())
      {
        throw ParseError(
          ErrorCode::length_overrun,
          key_pos,
          fmt::format("value length {} exceeds remaining {}", len, in.remaining()));
      }
      rec.params.push_back(SvcParam{key, parse_wire_value(key, in.sub(len))});
      last = key;
    }
    return rec;
  }

  Bytes to_wire(const HttpsRecord& rec)
  {
    ByteWriter out;
    out.u16(rec.svc_priority);
    rec.target.to_wire(out);
    for (const auto* p : sorted_params(rec))
    {
      out.u16(p->key);
      auto slot = out.begin_length16();
      write_value(out, p->value);
      out.end_length16(slot);
    }
    return std::move(out).take();
  }

  std::string param_value_to_presentation(const SvcParam& param)
  {
    return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        std::string out;
        if constexpr (std::is_same_v<T, MandatoryValue>)
        {
          auto keys = v.keys;
          std::sort(keys.begin(), keys.end());
          for (auto k : keys)
            out += (out.empty() ? "" : ",") + key_name(k);
        }
        else if constexpr (std::is_same_v<T, AlpnValue>)
        {
          for (const auto& id : v.ids)
            out += (out.empty() ? "" : ",") + escape_list_item(id);
        }
        else if constexpr (std::is_same_v<T, PortValue>)
        {
          out = std::to_string(v.port);
        }
        else if constexpr (std::is_same_v<T, Ipv4HintValue> || std::is_same_v<T, Ipv6HintValue>)
        {
          for (const auto& a : v.addrs)
            out += (out.empty() ? "" : ",") + a.to_string();
        }
        else if constexpr (std::is_same_v<T, EchValue>)
        {
          out = base64_encode(v.config_list);
        }
        else if constexpr (std::is_same_v<T, OpaqueValue>)
        {
          out = escape_char_string(std::string_view(
            reinterpret_cast<const char*>(v.data.data()), v.data.size()));
        }
        return out;
      },
      param.value);
  }

  std::string rdata_to_presentation(const HttpsRecord& rec)
  {
    std::string out = fmt::format("{} {}", rec.svc_priority, rec.target.to_string());
    for (const auto* p : sorted_params(rec))
    {
      out += ' ';
      out += key_name(p->key);
      if (std::holds_alternative<NoDefaultAlpnValue>(p->value))
        continue;
      auto value = param_value_to_presentation(*p);
      if (!value.empty())
      {
        out += '=';
        out += value;
      }
      else if (!std::holds_alternative<OpaqueValue>(p->value))
      {
        // Empty ech: keep the '=' so the key reparses with a value.
        out += "=\"\"";
      }
    }
    return out;
  }

  std::string to_presentation(const HttpsRecord& rec)
  {
    return fmt::format(
      "{} {} IN {} {}",
      rec.owner.to_string(),
      rec.ttl,
      type_mnemonic(rec.type),
      rdata_to_presentation(rec));
  }

  std::string_view to_string(IssueCode code)
  {
    switch (code)
    {
      case IssueCode::alias_with_params:
        return "ALIAS_WITH_PARAMS";
      case IssueCode::alias_target_self:
        return "ALIAS_TARGET_SELF";
      case IssueCode::service_empty_params:
        return "SERVICE_EMPTY_PARAMS";
      case IssueCode::target_is_ip_literal:
        return "TARGET_IS_IP_LITERAL";
      case IssueCode::target_is_url:
        return "TARGET_IS_URL";
      case IssueCode::mandatory_self:
        return "MANDATORY_SELF";
      case IssueCode::mandatory_missing_key:
        return "MANDATORY_MISSING_KEY";
      case IssueCode::no_default_alpn_without_alpn:
        return "NO_DEFAULT_ALPN_WITHOUT_ALPN";
    }
    return "UNKNOWN";
  }

  std::string_view to_string(Severity s)
  {
    return s == Severity::error ? "error" : "warning";
  }

  Severity severity_of(IssueCode code)
  {
    switch (code)
    {
      case IssueCode::alias_with_params:
      case IssueCode::service_empty_params:
        return Severity::warning;
      default:
        return Severity::error;
    }
  }

  std::vector<ValidationIssue> validate(const HttpsRecord& rec)
  {
    std::vector<ValidationIssue> issues;
    auto add = [&](IssueCode code, std::string detail) {
      issues.push_back(ValidationIssue{code, severity_of(code), std::move(detail)});
    };

    if (rec.is_alias())
    {
      if (!rec.params.empty())
        add(IssueCode::alias_with_params, fmt::format("AliasMode record carries {} SvcParams", rec.params.size()));
      if (rec.target.is_root())
        add(IssueCode::alias_target_self, "AliasMode TargetName is \".\" (the owner itself)");
    }
    else if (rec.params.empty())
    {
      add(IssueCode::service_empty_params, "ServiceMode record has no SvcParams");
    }

    if (!rec.target.is_root())
    {
      auto text = rec.target.to_string();
      auto bare = std::string_view(text).substr(0, text.size() - 1);
      if (parse_ip(bare))
        add(IssueCode::target_is_ip_literal, fmt::format("TargetName {} is an IP address", text));

      bool url = text.find("://") != std::string::npos;
      for (const auto& l : rec.target.labels())
        url = url || l.find('/') != std::string::npos;
      if (url)
        add(IssueCode::target_is_url, fmt::format("TargetName {} looks like a URL", text));
    }

    if (auto* m = rec.get<MandatoryValue>(SvcKey::mandatory))
    {
      std::vector<std::uint16_t> keys = m->keys;
      std::sort(keys.begin(), keys.end());
      if (std::binary_search(keys.begin(), keys.end(), key_number(SvcKey::mandatory)))
        add(IssueCode::mandatory_self, "mandatory lists itself");
      std::string missing;
      for (auto k : keys)
      {
        if (k != key_number(SvcKey::mandatory) && !rec.find(k))
          missing += (missing.empty() ? "" : ",") + key_name(k);
      }
      if (!missing.empty())
        add(IssueCode::mandatory_missing_key, fmt::format("mandatory keys absent: {}", missing));
    }

    if (rec.find(SvcKey::no_default_alpn) && !rec.find(SvcKey::alpn))
      add(IssueCode::no_default_alpn_without_alpn, "no-default-alpn without alpn");

    std::stable_sort(issues.begin(), issues.end(), [](const auto& a, const auto& b) {
      return a.code < b.code;
    });
    return issues;
  }
}
