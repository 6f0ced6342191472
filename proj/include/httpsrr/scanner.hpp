// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/ech.hpp"
#include "httpsrr/record.hpp"
#include "httpsrr/simnet.hpp"
#include "httpsrr/transport.hpp"

#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace httpsrr
{
  struct RankedDomain
  {
    DomainName name;
    std::uint64_t rank = 0;

    bool operator==(const RankedDomain&) const = default;
  };

  struct Targets
  {
    std::vector<RankedDomain> apex;
    std::vector<RankedDomain> www;
    /// Rows that were not "rank,domain" or had no registrable domain.
    std::size_t skipped = 0;
  };

  /// Rows are "rank,domain" (Tranco CSV). Both lists are deduplicated and
  /// ordered by best rank, then by first appearance.
  Targets derive_targets(const std::vector<std::string>& rows);
  Targets derive_targets_from_file(const std::filesystem::path& path);

  struct ScanConfig
  {
    /// Main first, then backups.
    std::vector<std::string> resolvers = {"8.8.8.8", "1.1.1.1"};
    double qps = 50;
    unsigned retries = 2;
    std::chrono::milliseconds timeout{2000};
    bool probe = false;
    std::vector<std::uint16_t> probe_ports = {443};
    std::chrono::milliseconds probe_timeout{3000};
    std::size_t workers = 8;
    /// Skip the A/AAAA/SOA/NS/DS follow-ups (hourly ECH collection).
    bool https_only = false;
    /// Also ask for NS when no HTTPS record exists, so name-server changes
    /// around deactivations stay visible.
    bool always_query_ns = false;
    std::string tag;

    /// Throws ContractViolation on qps <= 0 or no resolvers.
    void check() const;
    nlohmann::json to_json() const;
    static ScanConfig from_json(const nlohmann::json& j);
    /// Hex SHA-256 of the canonical JSON form.
    std::string digest() const;
  };

  enum class TargetKind
  {
    apex,
    www,
  };

  std::string_view to_string(TargetKind k);

  /// One query's outcome as stored in a snapshot.
  struct RrsetCapture
  {
    std::string resolver;
    /// "noerror", "nxdomain", "servfail", "refused", "rcodeN", "timeout" or
    /// "network_error".
    std::string status;
    /// Owner-and-type matching records, rdata uncompressed.
    std::vector<ResourceRecord> records;
    bool rrsig = false;
    bool ad = false;
    /// Some rdata failed to parse; the raw bytes are still in `records`.
    bool malformed = false;

    bool operator==(const RrsetCapture&) const = default;
  };

  enum class ProbeOutcome
  {
    reachable,
    unreachable_network,
    refused,
    tls_error,
    timeout,
  };

  std::string_view to_string(ProbeOutcome o);
  ProbeOutcome probe_outcome_from_string(std::string_view s);

  enum class ProbeSource
  {
    hint,
    addr_record,
    both,
  };

  std::string_view to_string(ProbeSource s);

  struct ProbeResult
  {
    IpAddress ip;
    ProbeSource source = ProbeSource::hint;
    std::uint16_t port = 443;
    ProbeOutcome outcome = ProbeOutcome::reachable;

    bool operator==(const ProbeResult&) const = default;
  };

  struct DomainSnapshot
  {
    static constexpr int format_version = 1;

    /// UTC day, YYYY-MM-DD.
    std::string date;
    /// Unix seconds when the scan started.
    std::int64_t timestamp = 0;
    DomainName domain;
    TargetKind kind = TargetKind::apex;
    /// Keyed by type mnemonic ("HTTPS", "A", ...). HTTPS is captured at the
    /// end of the CNAME chain.
    std::map<std::string, RrsetCapture> rrsets;
    std::vector<DomainName> cname_chain;
    /// "nxdomain", "timeout", "servfail", "network_error", "cname_loop".
    std::optional<std::string> error;
    bool ds_present = false;
    std::vector<DomainName> ns_names;
    std::optional<std::vector<ProbeResult>> probes;
    /// Fields this version does not know, kept for re-serialization.
    nlohmann::json extra = nlohmann::json::object();

    const RrsetCapture* rrset(std::uint16_t type) const;
    /// Parsed HTTPS records; malformed rdata is skipped.
    std::vector<HttpsRecord> https_records() const;
    bool has_https() const;
    /// Name the HTTPS/A/AAAA data belongs to.
    DomainName final_name() const;

    bool rrsig_present(std::uint16_t type) const;
    bool ad_bit(std::uint16_t type) const;

    std::set<IpAddress> hint_ips(bool v4) const;
    std::set<IpAddress> addr_ips(bool v4) const;
    /// Primary ECH key identities across ServiceMode records.
    std::vector<EchKeyIdentity> ech_identities() const;

    nlohmann::json to_json() const;
    static DomainSnapshot from_json(const nlohmann::json& j);

    bool operator==(const DomainSnapshot&) const = default;
  };

  /// Hints present for a family and different from that family's address
  /// records.
  bool has_hint_mismatch(const DomainSnapshot& s);

  class Prober
  {
  public:
    virtual ~Prober() = default;
    virtual ProbeOutcome probe(const IpAddress& ip, std::uint16_t port, const DomainName& sni, Duration timeout) = 0;
  };

  /// Reachability decided by simnet endpoint stubs.
  class SimnetProber : public Prober
  {
  public:
    explicit SimnetProber(std::vector<EndpointSpec> endpoints) :
      endpoints_(std::move(endpoints))
    {}
    ProbeOutcome probe(const IpAddress& ip, std::uint16_t port, const DomainName& sni, Duration timeout) override;

  private:
    std::vector<EndpointSpec> endpoints_;
  };

  /// Real TCP connect plus OpenSSL handshake. Certificates are not
  /// verified; any completed handshake counts as reachable.
  class TlsProber : public Prober
  {
  public:
    ProbeOutcome probe(const IpAddress& ip, std::uint16_t port, const DomainName& sni, Duration timeout) override;
  };

  /// Appends one result per distinct (ip, port) across hints and address
  /// records, but only when has_hint_mismatch(); otherwise leaves `s`
  /// untouched.
  void probe_connectivity(DomainSnapshot& s, const ScanConfig& cfg, Prober& prober);

  class Scanner
  {
  public:
    /// `wall_seconds` supplies snapshot timestamps (unix seconds).
    Scanner(
      ScanConfig cfg, DnsTransport& transport, RateLimiter& limiter,
      std::function<std::int64_t()> wall_seconds, Prober* prober = nullptr);

    DomainSnapshot scan_domain(const DomainName& domain, TargetKind kind, const std::string& date);

    /// Scans every target on cfg.workers threads; `sink` sees snapshots in
    /// input order from the calling thread.
    void scan_all(
      const std::vector<std::pair<DomainName, TargetKind>>& targets, const std::string& date,
      const std::function<void(DomainSnapshot&&)>& sink);

    const ScanConfig& config() const
    {
      return cfg_;
    }

  private:
    struct Exchange
    {
      RrsetCapture capture;
      std::optional<DnsMessage> response;
    };

    Exchange exchange(const DomainName& name, std::uint16_t type, bool dnssec_ok);

    ScanConfig cfg_;
    DnsTransport& transport_;
    RateLimiter& limiter_;
    std::function<std::int64_t()> wall_;
    Prober* prober_;
  };

  /// "YYYY-MM-DD" for a unix time.
  std::string utc_date(std::int64_t unix_seconds);
  std::int64_t unix_now();

  struct LoadResult
  {
    std::vector<DomainSnapshot> snapshots;
    std::size_t corrupt_lines = 0;
    /// "line N: reason"
    std::vector<std::string> problems;
  };

  struct DayManifest
  {
    std::string date;
    std::string tag;
    std::size_t snapshots = 0;
    std::size_t apex = 0;
    std::size_t www = 0;
    std::size_t with_https = 0;
    std::size_t errors = 0;
    std::size_t skipped_rows = 0;
    std::string config_digest;

    /// Counts one stored snapshot.
    void add(const DomainSnapshot& s);
    nlohmann::json to_json() const;
    static DayManifest from_json(const nlohmann::json& j);
  };

  /// Directory of append-only per-day JSONL files:
  /// snapshots-YYYY-MM-DD[-tag].jsonl plus manifest-YYYY-MM-DD[-tag].json.
  class SnapshotStore
  {
  public:
    explicit SnapshotStore(std::filesystem::path dir);

    std::filesystem::path day_path(const std::string& date, const std::string& tag = "") const;
    std::filesystem::path manifest_path(const std::string& date, const std::string& tag = "") const;

    /// Throws ContractViolation when (date, domain, kind) is already stored.
    void append(const DomainSnapshot& s, const std::string& tag = "");
    void append_all(const std::vector<DomainSnapshot>& snapshots, const std::string& tag = "");
    /// A missing day yields an empty result.
    LoadResult load(const std::string& date, const std::string& tag = "") const;
    /// Days with a snapshot file for `tag`, ascending.
    std::vector<std::string> days(const std::string& tag = "") const;
    /// Every (date, tag) with a snapshot file, ascending.
    std::vector<std::pair<std::string, std::string>> files() const;

    void write_manifest(const DayManifest& m) const;
    std::optional<DayManifest> read_manifest(const std::string& date, const std::string& tag = "") const;

    const std::filesystem::path& dir() const
    {
      return dir_;
    }

  private:
    using Key = std::tuple<std::string, DomainName, TargetKind>;
    std::set<Key>& keys_for(const std::string& date, const std::string& tag);

    std::filesystem::path dir_;
    std::map<std::string, std::set<Key>> seen_;
  };
}
