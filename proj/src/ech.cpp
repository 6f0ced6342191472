// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/ech.hpp"

#include <charconv>
#include <fmt/format.h>

namespace httpsrr
{
  namespace
  {
    bool valid_hostname(std::string_view name)
    {
      if (name.empty() || name.size() > 253)
        return false;
      std::size_t start = 0;
      while (start <= name.size())
      {
        auto dot = name.find('.', start);
        auto label = name.substr(start, dot == std::string_view::npos ? name.npos : dot - start);
        if (label.empty() || label.size() > 63 || label.front() == '-' || label.back() == '-')
          return false;
        for (char c : label)
        {
          bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
            c == '-';
          if (!ok)
            return false;
        }
        if (dot == std::string_view::npos)
          break;
        start = dot + 1;
      }
      return true;
    }

    void decode_draft13(EchConfig& cfg, ByteReader in)
    {
      cfg.config_id = in.u8();
      cfg.kem_id = in.u16();

      auto key_pos = in.offset();
      auto key = in.take(in.u16());
      if (key.empty())
        throw ParseError(ErrorCode::malformed_value, key_pos, "empty ECH public key");
      cfg.public_key.assign(key.begin(), key.end());

      auto suites_pos = in.offset();
      auto suites_len = in.u16();
      if (suites_len == 0 || suites_len % 4 != 0)
      {
        throw ParseError(
          ErrorCode::malformed_value,
          suites_pos,
          fmt::format("cipher_suites length {} is not a non-zero multiple of 4", suites_len));
      }
      auto suites = in.sub(suites_len);
      while (!suites.empty())
      {
        CipherSuite s;
        s.kdf_id = suites.u16();
        s.aead_id = suites.u16();
        cfg.cipher_suites.push_back(s);
      }

      cfg.maximum_name_length = in.u8();

      auto name_pos = in.offset();
      auto name = in.take(in.u8());
      cfg.public_name.assign(name.begin(), name.end());
      if (!valid_hostname(cfg.public_name))
      {
        throw ParseError(
          ErrorCode::malformed_value, name_pos, fmt::format("bad public_name '{}'", cfg.public_name));
      }

      auto ext = in.take(in.u16());
      cfg.extensions.assign(ext.begin(), ext.end());

      if (!in.empty())
      {
        throw ParseError(
          ErrorCode::length_mismatch,
          in.offset(),
          fmt::format("{} unread bytes after ECHConfig contents", in.remaining()));
      }
    }
  }

  Bytes EchConfigList::serialize() const
  {
    std::vector<Bytes> entries;
    for (const auto& c : configs)
      entries.push_back(c.raw);
    return encode_ech_config_list(entries);
  }

  EchConfigList parse_ech_config_list(ByteView payload)
  {
    if (payload.size() > 0xffff + 2)
    {
      throw ParseError(ErrorCode::oversize, 0, "ECHConfigList larger than a u16 length allows");
    }
    ByteReader in(payload);
    auto declared = in.u16();
    if (declared != in.remaining())
    {
      throw ParseError(
        ErrorCode::length_mismatch,
        0,
        fmt::format("list declares {} bytes, payload has {}", declared, in.remaining()));
    }
    if (declared == 0)
      throw ParseError(ErrorCode::empty_list, 0, "zero-length ECHConfigList");

    EchConfigList list;
    while (!in.empty())
    {
      auto start = in.offset();
      EchConfig cfg;
      cfg.version = in.u16();
      auto length = in.u16();
      auto contents = in.sub(length);
      cfg.raw.assign(payload.begin() + start, payload.begin() + in.offset());
      if (cfg.recognized())
        decode_draft13(cfg, contents);
      list.configs.push_back(std::move(cfg));
    }
    return list;
  }

  EchConfigList parse_ech_config_list(std::string_view base64_text)
  {
    return parse_ech_config_list(base64_decode(base64_text));
  }

  std::string EchKeyIdentity::to_string() const
  {
    return fmt::format("{}:{}", config_id, to_hex(public_key_digest));
  }

  EchKeyIdentity EchKeyIdentity::from_string(std::string_view text)
  {
    auto colon = text.find(':');
    unsigned id = 256;
    if (colon != std::string_view::npos)
      std::from_chars(text.data(), text.data() + colon, id);
    Bytes digest;
    if (colon != std::string_view::npos)
      digest = from_hex(text.substr(colon + 1));
    if (id > 255 || digest.size() != 32)
    {
      throw ParseError(
        ErrorCode::malformed_value, 0, fmt::format("bad ECH key identity '{}'", text));
    }
    EchKeyIdentity out;
    out.config_id = std::uint8_t(id);
    std::copy(digest.begin(), digest.end(), out.public_key_digest.begin());
    return out;
  }

  EchKeyIdentity key_identity(const EchConfig& cfg)
  {
    if (!cfg.recognized())
    {
      throw ParseError(
        ErrorCode::unrecognized_version,
        0,
        fmt::format("ECHConfig version 0x{:04x} is not decoded", cfg.version));
    }
    return EchKeyIdentity{cfg.config_id, sha256(cfg.public_key)};
  }

  namespace
  {
    const EchConfig& first_recognized(const EchConfigList& list)
    {
      for (const auto& c : list.configs)
      {
        if (c.recognized())
          return c;
      }
      throw ParseError(ErrorCode::no_recognized_config, 0, "no recognized ECHConfig in list");
    }
  }

  std::string public_name(const EchConfigList& list)
  {
    return first_recognized(list).public_name;
  }

  EchKeyIdentity primary_identity(const EchConfigList& list)
  {
    return key_identity(first_recognized(list));
  }

  Bytes encode_ech_config(const EchConfig& cfg)
  {
    ByteWriter out;
    out.u16(ech_draft13);
    auto outer = out.begin_length16();
    out.u8(cfg.config_id);
    out.u16(cfg.kem_id);
    auto key = out.begin_length16();
    out.bytes(ByteView(cfg.public_key));
    out.end_length16(key);
    auto suites = out.begin_length16();
    for (const auto& s : cfg.cipher_suites)
    {
      out.u16(s.kdf_id);
      out.u16(s.aead_id);
    }
    out.end_length16(suites);
    out.u8(cfg.maximum_name_length);
    out.u8(std::uint8_t(cfg.public_name.size()));
    out.bytes(std::string_view(cfg.public_name));
    auto ext = out.begin_length16();
    out.bytes(ByteView(cfg.extensions));
    out.end_length16(ext);
    out.end_length16(outer);
    return std::move(out).take();
  }

  Bytes encode_ech_config_list(const std::vector<Bytes>& entries)
  {
    ByteWriter out;
    auto slot = out.begin_length16();
    for (const auto& e : entries)
      out.bytes(ByteView(e));
    out.end_length16(slot);
    return std::move(out).take();
  }

  Bytes corrupt_ech_lengths(Bytes payload)
  {
    for (std::size_t i : {0, 1, 4, 5})
    {
      if (i < payload.size())
        payload[i] ^= 0xff;
    }
    return payload;
  }

  Bytes synthetic_ech_config_list(
    const std::string& public_name, std::uint8_t config_id, std::string_view key_seed)
  {
    EchConfig cfg;
    cfg.version = ech_draft13;
    cfg.config_id = config_id;
    cfg.kem_id = 0x0020;
    auto digest = sha256(key_seed);
    cfg.public_key.assign(digest.begin(), digest.end());
    cfg.cipher_suites = {{0x0001, 0x0001}};
    cfg.public_name = public_name;
    return encode_ech_config_list({encode_ech_config(cfg)});
  }
}
