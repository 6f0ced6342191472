// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/resolution.hpp"
#include "httpsrr/zone.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace httpsrr
{
  struct EchEndpoint
  {
    /// Key identities the server can decrypt with.
    std::vector<EchKeyIdentity> accepts;
    /// ECHConfigList handed back on a decryption failure.
    std::optional<Bytes> retry_configs;
    /// Names this client-facing server forwards to after decryption.
    std::vector<DomainName> backends;

    bool operator==(const EchEndpoint&) const = default;
  };

  /// A TLS/HTTP server stub.
  struct EndpointSpec
  {
    std::string label;
    std::vector<IpAddress> ips;
    std::vector<std::uint16_t> open_ports;
    std::vector<std::string> alpns;
    /// Exact names or one-label wildcards ("*.a.com").
    std::vector<DomainName> cert_names;
    std::optional<EchEndpoint> ech;

    bool covers(const DomainName& sni) const;
    bool operator==(const EndpointSpec&) const = default;
  };

  AttemptResult handshake(const std::vector<EndpointSpec>& endpoints, const Attempt& attempt);

  /// One server per address in `zone` (address records and hints) that
  /// listens on 80 and 443, speaks h2, h3 and http/1.1, holds a certificate
  /// for every owner name and accepts every ECH key the zone publishes.
  std::vector<EndpointSpec> permissive_endpoints(const ZoneStore& zone);

  /// Per-profile expectations; unset members are not checked.
  struct Expectation
  {
    /// "success" or "hard_fail: <reason>".
    std::string terminal;
    std::optional<std::size_t> attempts;
    std::optional<std::string> first_ip;
    std::optional<std::uint16_t> first_port;
    std::optional<Transport> first_transport;
    std::optional<std::string> alpn;
    std::optional<EchMode> final_ech;
    /// Must each appear on some attempt.
    std::vector<std::string> annotations;
    std::vector<DnsQuery> queried;
    std::vector<DnsQuery> not_queried;

    bool operator==(const Expectation&) const = default;
  };

  struct Scenario
  {
    std::string id;
    std::string description;
    std::string request;
    /// Presentation-format zone lines.
    std::vector<std::string> zone;
    std::vector<EndpointSpec> endpoints;
    std::map<std::string, Expectation> expected;

    bool operator==(const Scenario&) const = default;
  };

  struct Transcript
  {
    std::string scenario;
    std::string profile;
    std::vector<DnsQuery> queries;
    std::vector<Attempt> attempts;
    std::vector<AttemptResult> results;
    Terminal terminal;

    std::string to_json() const;
    bool operator==(const Transcript&) const = default;
  };

  inline constexpr std::size_t max_scenario_attempts = 64;

  Transcript run_scenario(const Scenario& s, const PolicyProfile& profile);

  /// Human-readable differences; empty when the transcript satisfies `e`.
  std::vector<std::string> check_expectation(const Transcript& t, const Expectation& e);

  std::string terminal_text(const Terminal& t);

  /// Browser experiment matrix: URL forms, AliasMode, ServiceMode target,
  /// port and IP-hint setups, ALPN, and the ECH cases.
  const std::vector<Scenario>& builtin_matrix();

  std::string scenario_to_json(const Scenario& s);
  Scenario scenario_from_json(std::string_view text);

  enum class Cell
  {
    full,
    half,
    empty,
  };

  std::string_view to_string(Cell c);

  struct ConformanceTable
  {
    std::string title;
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    /// cells[row][column]
    std::vector<std::vector<Cell>> cells;

    std::string to_text() const;
    bool operator==(const ConformanceTable&) const = default;
  };

  /// Published browser observations.
  ConformanceTable reference_rr_table();
  ConformanceTable reference_ech_table();

  struct ConformanceReport
  {
    std::vector<Transcript> transcripts;
    /// "<scenario>/<profile>: <difference>"
    std::vector<std::string> expectation_failures;
    std::optional<ConformanceTable> rr_table;
    std::optional<ConformanceTable> ech_table;
    /// "<table>/<row>/<column>: got X, want Y"
    std::vector<std::string> cell_mismatches;

    bool ok() const
    {
      return expectation_failures.empty() && cell_mismatches.empty() && rr_table && ech_table;
    }
  };

  /// Runs every scenario against every profile it has expectations for.
  /// Tables are derived only when the matrix carries the scenarios they
  /// are built from.
  ConformanceReport run_conformance(const std::vector<Scenario>& matrix);
}
