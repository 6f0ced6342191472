// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/scanner.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace httpsrr
{
  /// Calendar helpers on YYYY-MM-DD strings.
  std::int64_t day_number(const std::string& date);
  std::string date_from_day_number(std::int64_t days);
  /// Inclusive range; throws ContractViolation when `to` precedes `from`.
  std::vector<std::string> date_range(const std::string& from, const std::string& to);

  enum class SetMode
  {
    dynamic,
    overlapping,
  };

  std::string_view to_string(SetMode m);
  SetMode set_mode_from_string(std::string_view s);

  struct DomainSetSpec
  {
    SetMode mode = SetMode::dynamic;
    std::string from;
    std::string to;
  };

  using DailyLists = std::map<std::string, std::set<DomainName>>;

  /// Domains present on every day of [from, to]. A missing day throws
  /// ContractViolation naming it.
  std::set<DomainName> overlapping_set(const DailyLists& daily, const std::string& from, const std::string& to);

  /// Set for `date` under `spec`: that day's list (dynamic) or the
  /// intersection over the set's range (overlapping, needs two days or
  /// more).
  std::set<DomainName> resolve_set(const DailyLists& daily, const DomainSetSpec& spec, const std::string& date);

  /// Scanned domains of one kind per day.
  DailyLists daily_lists(const std::map<std::string, std::vector<DomainSnapshot>>& days, TargetKind kind);

  /// Percentage of `set` whose snapshot (of `kind`) has a non-empty HTTPS
  /// rrset; domains without a snapshot count as lacking one. Throws
  /// ContractViolation on an empty set.
  double adoption_rate(const std::vector<DomainSnapshot>& day, const std::set<DomainName>& set, TargetKind kind);

  enum class NsCategory
  {
    full_cf,
    partial_cf,
    none_cf,
    unknown,
  };

  std::string_view to_string(NsCategory c);

  /// Name-server suffixes that identify a provider.
  struct ProviderRules
  {
    std::vector<DomainName> suffixes = {DomainName::parse("ns.cloudflare.com")};
  };

  NsCategory ns_categorize(const std::vector<DomainName>& ns_names, const ProviderRules& rules = {});

  /// Shape of the record a provider publishes automatically.
  struct CfDefaultSpec
  {
    std::vector<IpPrefix> anycast_v4;
    std::vector<IpPrefix> anycast_v6;

    static CfDefaultSpec from_json(const nlohmann::json& j);
    static CfDefaultSpec from_file(const std::filesystem::path& path);
  };

  enum class CfClass
  {
    default_config,
    customized,
  };

  std::string_view to_string(CfClass c);

  /// default_config iff priority 1, target ".", params exactly alpn,
  /// ipv4hint and ipv6hint, alpn exactly {h2, h3}, and every hint inside
  /// the anycast prefixes.
  CfClass classify_cf_default(const HttpsRecord& rec, const CfDefaultSpec& spec);

  enum class HintConsistency
  {
    match,
    mismatch,
    hint_absent,
  };

  std::string_view to_string(HintConsistency c);

  struct FamilyConsistency
  {
    HintConsistency v4 = HintConsistency::hint_absent;
    HintConsistency v6 = HintConsistency::hint_absent;

    bool operator==(const FamilyConsistency&) const = default;
  };

  /// Set equality of hint addresses against A/AAAA, per family.
  FamilyConsistency iphint_consistency(const DomainSnapshot& s);

  /// Maximal runs of consecutive mismatch days for one domain's series
  /// (ordered by date). Missing days break runs.
  std::vector<std::size_t> mismatch_durations(const std::vector<DomainSnapshot>& series);

  struct RotationSeries
  {
    /// Unix seconds, strictly increasing.
    std::vector<std::int64_t> scan_times;
    /// Per domain, the identity seen at each scan (nullopt when the domain
    /// published none).
    std::map<DomainName, std::vector<std::optional<EchKeyIdentity>>> observed;

    /// One entry per scan; the identity of a snapshot is that of its
    /// lowest-priority ServiceMode record carrying a parsable ech value.
    static RotationSeries from_scans(const std::vector<std::pair<std::int64_t, std::vector<DomainSnapshot>>>& scans);
  };

  struct IdentityLife
  {
    DomainName domain;
    EchKeyIdentity identity;
    std::size_t first_scan = 0;
    std::size_t scans = 0;
    double hours = 0;

    bool operator==(const IdentityLife&) const = default;
  };

  struct RotationReport
  {
    double interval_hours = 1;
    std::vector<IdentityLife> lives;
    std::map<DomainName, double> domain_mean_hours;
    /// Mean of the per-domain means.
    double overall_mean_hours = 0;
  };

  /// Interval is the median gap between scans (1 h when it falls within
  /// 5 minutes of an hour). A gap above 1.5 intervals ends every run.
  /// Throws ContractViolation on fewer than two scans or non-increasing
  /// timestamps.
  RotationReport ech_rotation(const RotationSeries& series);

  struct DnssecStats
  {
    std::size_t https_domains = 0;
    std::size_t signed_count = 0;
    std::size_t validated = 0;
    std::size_t insecure = 0;
    double signed_pct = 0;
    double validated_pct = 0;
    double insecure_among_signed_pct = 0;

    bool operator==(const DnssecStats&) const = default;
  };

  /// Over set members with HTTPS: signed = RRSIG on HTTPS, validated =
  /// signed and AD, insecure = signed without DS (share of signed).
  DnssecStats dnssec_stats(const std::vector<DomainSnapshot>& day, const std::set<DomainName>& set, TargetKind kind);

  struct AlpnDistribution
  {
    std::size_t https_domains = 0;
    /// Protocol id (plus "none") to domain count; shares overlap.
    std::map<std::string, std::size_t> counts;
    std::map<std::string, double> pct;
  };

  inline constexpr std::string_view no_alpn_bucket = "none";

  AlpnDistribution alpn_distribution(const std::vector<DomainSnapshot>& day, const std::set<DomainName>& set, TargetKind kind);

  struct ActivationInterval
  {
    std::string from;
    std::string to;

    bool operator==(const ActivationInterval&) const = default;
  };

  struct IntermittencyEntry
  {
    DomainName domain;
    bool intermittent = false;
    std::vector<ActivationInterval> active;
    bool same_ns_throughout = false;
    bool ns_changed_at_toggle = false;
    bool ns_absent_at_deactivation = false;

    bool operator==(const IntermittencyEntry&) const = default;
  };

  /// One domain's series ordered by date (two days or more). Intermittent
  /// iff HTTPS presence changes between observed days. NS flags only use
  /// days whose NS rrset was actually queried.
  IntermittencyEntry intermittency_report(const std::vector<DomainSnapshot>& series);

  /// Associative per-domain accumulators; merging in any order gives the
  /// same totals.
  struct AdoptionAcc
  {
    std::size_t total = 0;
    std::size_t with_https = 0;

    void add(bool has_https);
    void merge(const AdoptionAcc& o);
    double pct() const;
  };

  struct DnssecAcc
  {
    DnssecStats stats;

    void add(const DomainSnapshot& s);
    void merge(const DnssecAcc& o);
    DnssecStats finish() const;
  };

  struct AlpnAcc
  {
    std::size_t https_domains = 0;
    std::map<std::string, std::size_t> counts;

    void add(const DomainSnapshot& s);
    void merge(const AlpnAcc& o);
    AlpnDistribution finish() const;
  };

  /// Tabular metric output.
  struct Report
  {
    std::string metric;
    std::string config_digest;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json detail = nlohmann::json::object();

    /// First line is "# config_digest: <hex>".
    std::string to_csv() const;
    nlohmann::json to_json() const;
  };

  inline const std::vector<std::string>& metric_names()
  {
    static const std::vector<std::string> names = {
      "adoption", "overlapping", "ns", "cf_default", "iphint", "mismatch_durations",
      "ech_rotation", "dnssec", "alpn", "intermittency",
    };
    return names;
  }

  struct AnalysisInput
  {
    /// Snapshots keyed by day.
    std::map<std::string, std::vector<DomainSnapshot>> days;
    /// Hourly ECH scans (time, snapshots), oldest first.
    std::vector<std::pair<std::int64_t, std::vector<DomainSnapshot>>> hourly;
    DomainSetSpec set;
    TargetKind kind = TargetKind::apex;
    std::optional<CfDefaultSpec> cf;
    ProviderRules providers;
    std::string config_digest;
  };

  /// Loads days in [from, to] (untagged files) and every "hourly-*" tag in
  /// that range. Digests from the day manifests are joined with ",".
  AnalysisInput load_input(const SnapshotStore& store, const DomainSetSpec& set, TargetKind kind);

  /// Throws ContractViolation for names outside metric_names().
  Report run_metric(const std::string& name, const AnalysisInput& in);
}
