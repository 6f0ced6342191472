// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/scanner.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace httpsrr
{
  /// Seeded daily corpus: a ranked list with churn, per-domain DNS state
  /// that drifts day to day, scanned through MockTransport.
  struct SynthConfig
  {
    std::uint64_t seed = 1;
    std::string start = "2024-03-01";
    std::size_t days = 5;
    /// Size of each day's list.
    std::size_t domains = 1000;
    /// Share of the list replaced from a reserve pool each day.
    double churn = 0.05;
    double https_share = 0.3;
    /// Daily chance that a domain adds or drops its HTTPS records.
    double toggle = 0.03;
    /// Daily chance that a domain's hints flip between matching and not.
    double hint_flip = 0.08;

    void check() const;
  };

  struct SynthSummary
  {
    std::size_t snapshots = 0;
    std::vector<std::string> dates;
  };

  /// Scans every day's apex and www targets and appends them to `store`
  /// with a manifest per day.
  SynthSummary synth_corpus(const SynthConfig& cfg, SnapshotStore& store);

  /// Hourly ECH series with a known key schedule.
  struct RotationSynthConfig
  {
    std::uint64_t seed = 7;
    std::string start = "2024-03-01";
    std::size_t domains = 20;
    std::size_t scans = 168;
    /// Scans a key normally stays published.
    std::size_t key_life = 2;
    /// Chance that a key is withdrawn after a single scan.
    double short_key = 0.05;
    /// Uniform jitter on scan start times.
    std::int64_t jitter_seconds = 90;
    std::uint32_t ttl = 300;

    void check() const;
  };

  struct RotationTruth
  {
    std::vector<std::int64_t> scan_times;
    /// Scheduled life (in scans) of every key visible in the window,
    /// including the parts that fall outside it.
    std::map<DomainName, std::vector<std::size_t>> key_lives;

    /// Mean scheduled life per domain, in hours.
    std::map<DomainName, double> domain_mean_hours() const;
  };

  /// Scans each hour with an HTTPS-only config into "hourly-HH" tags.
  RotationTruth synth_rotation(const RotationSynthConfig& cfg, SnapshotStore& store);
}
