// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/ech.hpp"
#include "httpsrr/ip.hpp"
#include "httpsrr/record.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace httpsrr
{
  enum class IpPreference
  {
    hints_first,
    addr_records_first,
  };

  enum class IpFailover
  {
    immediate_alternate,
    delayed_alternate,
    hard_fail,
  };

  enum class EchOnMalformed
  {
    hard_fail,
    ignore_and_plain_tls,
  };

  enum class EchOnMismatch
  {
    retry,
  };

  enum class EchSplit
  {
    unsupported_misdirect,
    supported,
  };

  /// Client behaviour table. Every field is set; builtin values cover the
  /// RFC-intended client and four browsers.
  struct PolicyProfile
  {
    std::string name;

    bool use_https_rr_for_plain_scheme = true;
    bool follow_alias_target = true;
    bool follow_service_target = true;
    bool use_port_param = true;
    bool port_fallback_443 = true;
    IpPreference ip_preference = IpPreference::addr_records_first;
    /// Whether ipv4hint/ipv6hint contribute candidates at all.
    bool use_ip_hints = true;
    IpFailover ip_failover = IpFailover::immediate_alternate;
    bool use_alpn = true;
    /// Drop ServiceMode records that carry no alpn before selecting.
    bool skip_rrset_on_empty_alpn = false;
    /// Annotate h3-only endpoints with a follow-up h2 offer.
    bool h3_only_sends_h2_probe = false;
    bool ech_shared = true;
    EchOnMalformed ech_on_malformed = EchOnMalformed::ignore_and_plain_tls;
    EchOnMismatch ech_on_mismatch = EchOnMismatch::retry;
    EchSplit ech_split = EchSplit::supported;
    /// Move on to the next ServiceMode endpoint once one is exhausted.
    bool endpoint_failover = true;
    std::size_t alias_chain_limit = 8;

    bool operator==(const PolicyProfile&) const = default;
  };

  /// rfc, chrome, edge, safari, firefox.
  const std::map<std::string, PolicyProfile>& builtin_profiles();
  /// Throws std::out_of_range naming the profile.
  const PolicyProfile& builtin_profile(const std::string& name);

  /// Flat key/value JSON document, one member per flag.
  std::string dump_profile(const PolicyProfile& p);
  /// Unknown keys are rejected; missing keys keep the rfc default.
  PolicyProfile load_profile(std::string_view json_text);

  struct NameRecords
  {
    std::vector<HttpsRecord> https;
    std::vector<Ipv4> a;
    std::vector<Ipv6> aaaa;
  };

  /// Per-name RRsets as a client would see them after resolution.
  class DnsView
  {
  public:
    void add_https(const HttpsRecord& rec);
    void add_a(const DomainName& name, Ipv4 ip);
    void add_aaaa(const DomainName& name, Ipv6 ip);
    void set(const DomainName& name, NameRecords records);

    /// Missing names read as empty RRsets.
    const NameRecords& lookup(const DomainName& name) const;
    const std::map<DomainName, NameRecords>& names() const
    {
      return names_;
    }

  private:
    std::map<DomainName, NameRecords> names_;
  };

  enum class Scheme
  {
    bare,
    http,
    https,
  };

  struct Request
  {
    Scheme scheme = Scheme::https;
    DomainName host;

    /// "a.com", "http://a.com/", "https://a.com:443/x".
    static Request parse(std::string_view url);
    std::string to_string() const;
    bool operator==(const Request&) const = default;
  };

  struct EndpointChoice
  {
    enum class Kind
    {
      none,
      alias,
      service,
    };
    Kind kind = Kind::none;
    DomainName alias_target;
    /// Service endpoints, ascending priority then canonical wire bytes.
    std::vector<HttpsRecord> endpoints;
  };

  EndpointChoice select_endpoints(const std::vector<HttpsRecord>& rrset);

  enum class IpSource
  {
    hint,
    addr_record,
  };

  enum class EchMode
  {
    off,
    shared,
    split,
    split_misdirected,
    retry_pending,
  };

  enum class Transport
  {
    tls,
    plain_http,
  };

  struct DnsQuery
  {
    DomainName name;
    std::string qtype;
    bool operator==(const DnsQuery&) const = default;
  };

  struct Attempt
  {
    std::size_t index = 0;
    Transport transport = Transport::tls;
    /// Name whose addresses were used.
    DomainName host;
    /// Outer SNI; the origin unless ECH is in use.
    DomainName sni;
    /// Inner (encrypted) SNI when ECH is in use.
    std::optional<DomainName> inner_sni;
    IpAddress ip;
    IpSource ip_source = IpSource::addr_record;
    std::uint16_t port = 443;
    std::vector<std::string> alpn;
    EchMode ech_mode = EchMode::off;
    std::optional<EchKeyIdentity> ech_key;
    /// "delayed", "port_fallback", "h2_probe", "ech_retry", ...
    std::vector<std::string> annotations;

    bool has_annotation(std::string_view a) const;
    bool operator==(const Attempt&) const = default;
  };

  enum class Outcome
  {
    connected,
    port_refused,
    ip_unreachable,
    tls_cert_invalid,
    ech_rejected_with_retry,
    ech_rejected_terminal,
    alpn_mismatch,
  };

  struct AttemptResult
  {
    std::size_t attempt_index = 0;
    Outcome outcome = Outcome::connected;
    /// Negotiated protocol for `connected`.
    std::string alpn;
    /// Config list for `ech_rejected_with_retry`.
    std::optional<EchConfigList> retry_configs;

    bool operator==(const AttemptResult&) const = default;
  };

  struct Terminal
  {
    enum class Kind
    {
      success,
      hard_fail,
    };
    Kind kind = Kind::hard_fail;
    std::string reason;
    std::string alpn;

    bool ok() const noexcept
    {
      return kind == Kind::success;
    }
    bool operator==(const Terminal&) const = default;
  };

  namespace fail_reason
  {
    inline constexpr std::string_view no_address_owner = "no address at owner";
    inline constexpr std::string_view no_address_target = "no address at target";
    inline constexpr std::string_view alias_loop = "alias_loop";
    inline constexpr std::string_view malformed_ech = "malformed ECH config";
    inline constexpr std::string_view port_refused = "port refused";
    inline constexpr std::string_view unreachable = "no reachable address";
    inline constexpr std::string_view ech_fallback_cert = "ECH fallback certificate invalid";
    inline constexpr std::string_view cert_invalid = "certificate invalid";
    inline constexpr std::string_view alpn_mismatch = "ALPN mismatch";
    inline constexpr std::string_view ech_retry_rejected = "ECH retry rejected";
  }

  /// Attempts not yet issued for one endpoint.
  struct Candidate
  {
    IpAddress ip;
    IpSource source = IpSource::addr_record;
    bool operator==(const Candidate&) const = default;
  };

  struct EndpointPlan
  {
    Attempt base; // ip/source filled from candidates
    std::vector<Candidate> candidates;
    std::uint16_t planned_port = 443;
    bool operator==(const EndpointPlan&) const = default;
  };

  struct ConnectionPlan
  {
    Request request;
    PolicyProfile profile;
    std::vector<DnsQuery> queries;
    std::vector<Attempt> attempts;
    std::optional<Terminal> terminal;

    // Transition state; opaque to callers.
    std::vector<EndpointPlan> endpoints;
    std::size_t endpoint_index = 0;
    std::size_t candidate_index = 0;
    bool ech_retry_used = false;
    bool ech_fallback_used = false;

    bool operator==(const ConnectionPlan&) const = default;
  };

  ConnectionPlan build_plan(const Request& request, const PolicyProfile& profile, const DnsView& dns);

  /// Feed the result of the last attempt. Returns the plan with one more
  /// attempt or with `terminal` set. Throws ContractViolation when the plan
  /// is already terminal or the result names another attempt.
  ConnectionPlan advance(const ConnectionPlan& plan, const AttemptResult& result);

  std::string_view to_string(IpPreference v);
  std::string_view to_string(IpFailover v);
  std::string_view to_string(EchOnMalformed v);
  std::string_view to_string(EchOnMismatch v);
  std::string_view to_string(EchSplit v);
  std::string_view to_string(Scheme v);
  std::string_view to_string(IpSource v);
  std::string_view to_string(EchMode v);
  std::string_view to_string(Transport v);
  std::string_view to_string(Outcome v);
  std::string_view to_string(Terminal::Kind v);
}
