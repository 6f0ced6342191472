// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/dns_message.hpp"
#include "httpsrr/zone.hpp"

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace httpsrr
{
  using Duration = std::chrono::nanoseconds;

  /// Monotonic time source; `now()` counts from an arbitrary epoch.
  class Clock
  {
  public:
    virtual ~Clock() = default;
    virtual Duration now() = 0;
    virtual void sleep_until(Duration t) = 0;
  };

  class SystemClock : public Clock
  {
  public:
    Duration now() override;
    void sleep_until(Duration t) override;
  };

  /// Simulated time. Sleeping jumps the clock forward instead of blocking.
  class ManualClock : public Clock
  {
  public:
    Duration now() override;
    void sleep_until(Duration t) override;
    void advance(Duration d);

  private:
    std::mutex mu_;
    Duration now_{0};
  };

  /// Strict-spacing limiter: successive acquisitions are at least 1/qps
  /// apart, so no window of any length sees more than qps queries per
  /// second. Safe to share between threads.
  class RateLimiter
  {
  public:
    RateLimiter(double qps, Clock& clock);
    void acquire();
    Duration interval() const
    {
      return interval_;
    }

  private:
    Clock& clock_;
    Duration interval_;
    std::mutex mu_;
    std::optional<Duration> last_;
  };

  enum class QueryStatus
  {
    ok,
    timeout,
    network_error,
  };

  std::string_view to_string(QueryStatus s);

  struct QueryResult
  {
    QueryStatus status = QueryStatus::ok;
    std::optional<DnsMessage> response;
    std::string resolver;
    std::string detail;
  };

  class DnsTransport
  {
  public:
    virtual ~DnsTransport() = default;
    virtual QueryResult query(const std::string& resolver, const DnsMessage& q, Duration timeout) = 0;
  };

  /// Answers `query` from `zone` the way a recursive resolver would, except
  /// that CNAMEs are only chased when `follow_cnames` is set. Signed names
  /// get a synthetic RRSIG when the query carries DO.
  DnsMessage answer_from_zone(const ZoneStore& zone, const DnsMessage& query, bool follow_cnames);

  enum class FaultKind
  {
    timeout,
    servfail,
    network_error,
  };

  /// In-memory resolver over a ZoneStore with a query log and scripted
  /// faults. Every exchange goes through the wire codec.
  class MockTransport : public DnsTransport
  {
  public:
    struct LogEntry
    {
      Duration at;
      std::string resolver;
      DomainName qname;
      std::uint16_t qtype = 0;
      bool dnssec_ok = false;
    };

    MockTransport(ZoneStore zone, Clock& clock, bool follow_cnames = false);

    /// Fault applied to queries at `resolver` (and `qname` if given);
    /// `times` < 0 means forever.
    void add_fault(std::string resolver, std::optional<DomainName> qname, FaultKind kind, int times = -1);

    QueryResult query(const std::string& resolver, const DnsMessage& q, Duration timeout) override;

    std::vector<LogEntry> log() const;
    void clear_log();
    const ZoneStore& zone() const
    {
      return zone_;
    }

  private:
    struct Fault
    {
      std::string resolver;
      std::optional<DomainName> qname;
      FaultKind kind;
      int remaining;
    };

    ZoneStore zone_;
    Clock& clock_;
    bool follow_;
    mutable std::mutex mu_;
    std::vector<Fault> faults_;
    std::vector<LogEntry> log_;
  };

  /// "1.1.1.1", "1.1.1.1:5353", "::1" or "[::1]:5353".
  struct ResolverAddress
  {
    IpAddress ip;
    std::uint16_t port = 53;

    static ResolverAddress parse(std::string_view text);
  };

  /// Plain DNS over UDP, retrying over TCP when the answer is truncated.
  class UdpTransport : public DnsTransport
  {
  public:
    UdpTransport();
    QueryResult query(const std::string& resolver, const DnsMessage& q, Duration timeout) override;

  private:
    std::uint16_t next_id();

    std::mutex mu_;
    std::mt19937 rng_;
  };
}
