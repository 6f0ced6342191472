// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/bytes.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace httpsrr
{
  /// ECHConfig version decoded field by field (draft-ietf-tls-esni-13).
  inline constexpr std::uint16_t ech_draft13 = 0xfe0d;

  struct CipherSuite
  {
    std::uint16_t kdf_id = 0;
    std::uint16_t aead_id = 0;
    bool operator==(const CipherSuite&) const = default;
  };

  struct EchConfig
  {
    std::uint16_t version = 0;
    /// Whole entry: version, length and contents.
    Bytes raw;

    // Only meaningful when recognized().
    std::uint8_t config_id = 0;
    std::uint16_t kem_id = 0;
    Bytes public_key;
    std::vector<CipherSuite> cipher_suites;
    std::uint8_t maximum_name_length = 0;
    std::string public_name;
    Bytes extensions;

    bool recognized() const noexcept
    {
      return version == ech_draft13;
    }
    bool operator==(const EchConfig&) const = default;
  };

  struct EchConfigList
  {
    std::vector<EchConfig> configs;

    /// Re-emit the list; byte-identical to the parsed input.
    Bytes serialize() const;
    bool operator==(const EchConfigList&) const = default;
  };

  /// Errors: truncated, length_mismatch (outer or inner declared length
  /// disagrees with the bytes), empty_list, malformed_value.
  EchConfigList parse_ech_config_list(ByteView payload);
  /// Base64 text as carried in zone files.
  EchConfigList parse_ech_config_list(std::string_view base64_text);

  /// Name of the hash behind EchKeyIdentity; stored alongside identities in
  /// snapshots so runs stay comparable.
  inline constexpr std::string_view key_digest_algorithm = "sha256";

  struct EchKeyIdentity
  {
    std::uint8_t config_id = 0;
    Sha256Digest public_key_digest{};

    /// "7:3fa1...", config id then hex digest.
    std::string to_string() const;
    static EchKeyIdentity from_string(std::string_view text);

    auto operator<=>(const EchKeyIdentity&) const = default;
    bool operator==(const EchKeyIdentity&) const = default;
  };

  /// Throws ParseError(unrecognized_version) for opaque entries.
  EchKeyIdentity key_identity(const EchConfig& cfg);

  /// public_name of the first recognized config; throws
  /// ParseError(no_recognized_config) when there is none.
  std::string public_name(const EchConfigList& list);

  /// First recognized config's identity; same error as public_name.
  EchKeyIdentity primary_identity(const EchConfigList& list);

  /// Encode one draft-13 config from its fields (raw is ignored).
  Bytes encode_ech_config(const EchConfig& cfg);
  /// Wrap whole config entries in the outer u16 length.
  Bytes encode_ech_config_list(const std::vector<Bytes>& entries);

  /// Single-config list with an X25519-sized key derived from `key_seed`
  /// (SHA-256), HKDF-SHA256 with AES-128-GCM.
  Bytes synthetic_ech_config_list(
    const std::string& public_name, std::uint8_t config_id, std::string_view key_seed);

  /// Deterministic corruption used to model a mangled zone entry: XORs 0xff
  /// into the outer list length and into the first entry's length, so every
  /// non-empty payload becomes unparseable.
  Bytes corrupt_ech_lengths(Bytes payload);
}
