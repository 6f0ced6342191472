// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/scanner.hpp"

#include "httpsrr/psl.hpp"

#include <atomic>
#include <condition_variable>
#include <fmt/format.h>
#include <fstream>
#include <thread>

namespace httpsrr
{
  using nlohmann::json;

  namespace
  {
    std::string_view trim(std::string_view s)
    {
      auto b = s.find_first_not_of(" \t\r\n");
      if (b == std::string_view::npos)
        return {};
      auto e = s.find_last_not_of(" \t\r\n");
      return s.substr(b, e - b + 1);
    }

    std::optional<std::uint64_t> parse_rank(std::string_view s)
    {
      if (s.empty() || s.size() > 18)
        return std::nullopt;
      std::uint64_t v = 0;
      for (char c : s)
      {
        if (c < '0' || c > '9')
          return std::nullopt;
        v = v * 10 + std::uint64_t(c - '0');
      }
      return v;
    }
  }

  Targets derive_targets(const std::vector<std::string>& rows)
  {
    Targets out;
    std::map<DomainName, std::pair<std::uint64_t, std::size_t>> best;
    std::size_t order = 0;
    for (const auto& raw : rows)
    {
      auto row = trim(raw);
      if (row.empty())
        continue;
      auto comma = row.find(',');
      if (comma == std::string_view::npos)
      {
        ++out.skipped;
        continue;
      }
      auto rank = parse_rank(trim(row.substr(0, comma)));
      auto text = trim(row.substr(comma + 1));
      if (!rank || text.empty() || text.find_first_of(" \t,/:") != std::string_view::npos)
      {
        ++out.skipped;
        continue;
      }
      std::optional<DomainName> apex;
      try
      {
        apex = registrable_domain(DomainName::parse(text));
      }
      catch (const ParseError&)
      {
      }
      if (!apex)
      {
        ++out.skipped;
        continue;
      }
      auto [it, fresh] = best.emplace(*apex, std::make_pair(*rank, order++));
      if (!fresh && *rank < it->second.first)
        it->second.first = *rank;
    }
    std::vector<std::pair<std::pair<std::uint64_t, std::size_t>, DomainName>> sorted;
    for (const auto& [name, key] : best)
      sorted.emplace_back(key, name);
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [key, name] : sorted)
    {
      out.apex.push_back({name, key.first});
      out.www.push_back({name.prepend("www"), key.first});
    }
    return out;
  }

  Targets derive_targets_from_file(const std::filesystem::path& path)
  {
    std::ifstream in(path);
    if (!in)
      throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line))
      rows.push_back(line);
    return derive_targets(rows);
  }

  void ScanConfig::check() const
  {
    if (resolvers.empty())
      throw ContractViolation("at least one resolver is required");
    for (const auto& r : resolvers)
      ResolverAddress::parse(r);
    if (!(qps > 0))
      throw ContractViolation("qps must be positive");
    if (workers == 0)
      throw ContractViolation("workers must be positive");
    if (timeout.count() <= 0)
      throw ContractViolation("timeout must be positive");
  }

  json ScanConfig::to_json() const
  {
    return {
      {"resolvers", resolvers},
      {"qps", qps},
      {"retries", retries},
      {"timeout_ms", timeout.count()},
      {"probe", probe},
      {"probe_ports", probe_ports},
      {"probe_timeout_ms", probe_timeout.count()},
      {"workers", workers},
      {"https_only", https_only},
      {"always_query_ns", always_query_ns},
      {"tag", tag},
    };
  }

  ScanConfig ScanConfig::from_json(const json& j)
  {
    static const std::set<std::string> keys = {
      "resolvers", "qps", "retries", "timeout_ms", "probe", "probe_ports",
      "probe_timeout_ms", "workers", "https_only", "always_query_ns", "tag",
    };
    for (const auto& [k, v] : j.items())
    {
      if (!keys.count(k))
        throw ContractViolation(fmt::format("unknown scan config key '{}'", k));
    }
    ScanConfig c;
    c.resolvers = j.value("resolvers", c.resolvers);
    c.qps = j.value("qps", c.qps);
    c.retries = j.value("retries", c.retries);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.timeout.count()));
    c.probe = j.value("probe", c.probe);
    c.probe_ports = j.value("probe_ports", c.probe_ports);
    c.probe_timeout = std::chrono::milliseconds(j.value("probe_timeout_ms", c.probe_timeout.count()));
    c.workers = j.value("workers", c.workers);
    c.https_only = j.value("https_only", c.https_only);
    c.always_query_ns = j.value("always_query_ns", c.always_query_ns);
    c.tag = j.value("tag", c.tag);
    c.check();
    return c;
  }

  std::string ScanConfig::digest() const
  {
    return to_hex(sha256(to_json().dump()));
  }

  bool has_hint_mismatch(const DomainSnapshot& s)
  {
    for (bool v4 : {true, false})
    {
      auto hints = s.hint_ips(v4);
      if (!hints.empty() && hints != s.addr_ips(v4))
        return true;
    }
    return false;
  }

  ProbeOutcome SimnetProber::probe(const IpAddress& ip, std::uint16_t port, const DomainName& sni, Duration)
  {
    Attempt a;
    a.ip = ip;
    a.port = port;
    a.sni = sni;
    a.host = sni;
    a.alpn = {"h2", "http/1.1"};
    switch (handshake(endpoints_, a).outcome)
    {
      case Outcome::connected:
        return ProbeOutcome::reachable;
      case Outcome::ip_unreachable:
        return ProbeOutcome::unreachable_network;
      case Outcome::port_refused:
        return ProbeOutcome::refused;
      default:
        return ProbeOutcome::tls_error;
    }
  }

  void probe_connectivity(DomainSnapshot& s, const ScanConfig& cfg, Prober& prober)
  {
    if (!has_hint_mismatch(s))
      return;
    std::map<IpAddress, ProbeSource> sources;
    for (bool v4 : {true, false})
    {
      for (const auto& ip : s.hint_ips(v4))
        sources[ip] = ProbeSource::hint;
      for (const auto& ip : s.addr_ips(v4))
      {
        auto [it, fresh] = sources.emplace(ip, ProbeSource::addr_record);
        if (!fresh)
          it->second = ProbeSource::both;
      }
    }
    if (!s.probes)
      s.probes.emplace();
    auto sni = s.domain;
    for (const auto& [ip, source] : sources)
    {
      for (auto port : cfg.probe_ports)
        s.probes->push_back({ip, source, port, prober.probe(ip, port, sni, cfg.probe_timeout)});
    }
  }

  Scanner::Scanner(
    ScanConfig cfg, DnsTransport& transport, RateLimiter& limiter, std::function<std::int64_t()> wall_seconds,
    Prober* prober) :
    cfg_(std::move(cfg)),
    transport_(transport),
    limiter_(limiter),
    wall_(std::move(wall_seconds)),
    prober_(prober)
  {
    cfg_.check();
  }

  namespace
  {
    std::string rcode_status(std::uint8_t rc)
    {
      switch (rc)
      {
        case rcode::noerror:
          return "noerror";
        case rcode::servfail:
          return "servfail";
        case rcode::nxdomain:
          return "nxdomain";
        case rcode::refused:
          return "refused";
        default:
          return fmt::format("rcode{}", rc);
      }
    }

    /// Records of `type` owned by `owner`, plus signature and parse flags.
    void fill_capture(RrsetCapture& c, const DnsMessage& r, const DomainName& owner, std::uint16_t type)
    {
      c.records.clear();
      c.rrsig = false;
      c.malformed = false;
      c.ad = r.ad;
      for (const auto& rr : r.answers)
      {
        if (rr.name != owner)
          continue;
        if (rr.type == type)
        {
          c.records.push_back(rr);
          if (type == rrtype::HTTPS || type == rrtype::SVCB)
          {
            try
            {
              parse_wire(rr.rdata, rr.name, rr.ttl);
            }
            catch (const ParseError&)
            {
              c.malformed = true;
            }
          }
        }
        else if (rr.type == rrtype::RRSIG)
        {
          try
          {
            if (decode_rrsig(rr.rdata).type_covered == type)
              c.rrsig = true;
          }
          catch (const ParseError&)
          {
          }
        }
      }
    }
  }

  Scanner::Exchange Scanner::exchange(const DomainName& name, std::uint16_t type, bool dnssec_ok)
  {
    Exchange ex;
    ex.capture.status = "network_error";
    auto q = make_query(0, name, type, dnssec_ok);
    for (const auto& resolver : cfg_.resolvers)
    {
      for (unsigned attempt = 0; attempt <= cfg_.retries; ++attempt)
      {
        limiter_.acquire();
        auto r = transport_.query(resolver, q, cfg_.timeout);
        ex.capture.resolver = resolver;
        if (r.status == QueryStatus::timeout)
        {
          ex.capture.status = "timeout";
          continue;
        }
        if (r.status == QueryStatus::network_error || !r.response)
        {
          ex.capture.status = "network_error";
          break;
        }
        ex.capture.status = rcode_status(r.response->rcode);
        if (r.response->rcode == rcode::servfail)
          break;
        ex.response = std::move(r.response);
        return ex;
      }
    }
    return ex;
  }

  DomainSnapshot Scanner::scan_domain(const DomainName& domain, TargetKind kind, const std::string& date)
  {
    DomainSnapshot s;
    s.date = date;
    s.timestamp = wall_();
    s.domain = domain;
    s.kind = kind;

    DomainName name = domain;
    std::set<DomainName> visited = {domain};
    RrsetCapture https;
    for (;;)
    {
      auto ex = exchange(name, rrtype::HTTPS, true);
      https = ex.capture;
      if (!ex.response)
      {
        s.error = https.status;
        s.rrsets["HTTPS"] = https;
        return s;
      }
      const auto& r = *ex.response;
      DomainName cur = name;
      bool loop = false;
      for (bool moved = true; moved;)
      {
        moved = false;
        for (const auto& rr : r.answers)
        {
          if (rr.type != rrtype::CNAME || rr.name != cur)
            continue;
          DomainName target;
          try
          {
            target = decode_name_rdata(rr.rdata);
          }
          catch (const ParseError&)
          {
            break;
          }
          if (!visited.insert(target).second || s.cname_chain.size() >= max_cname_depth)
          {
            loop = true;
            break;
          }
          s.cname_chain.push_back(target);
          cur = target;
          moved = true;
          break;
        }
        if (loop)
          break;
      }
      if (loop)
      {
        s.error = "cname_loop";
        s.rrsets["HTTPS"] = https;
        return s;
      }
      fill_capture(https, r, cur, rrtype::HTTPS);
      if (r.rcode == rcode::nxdomain && cur == domain)
      {
        s.error = "nxdomain";
        s.rrsets["HTTPS"] = https;
        return s;
      }
      if (https.records.empty() && cur != name && r.rcode == rcode::noerror)
      {
        name = cur;
        continue;
      }
      break;
    }
    s.rrsets["HTTPS"] = https;
    auto follow = [&](const DomainName& owner, std::uint16_t type) {
      auto ex = exchange(owner, type, true);
      if (ex.response)
        fill_capture(ex.capture, *ex.response, owner, type);
      s.rrsets[type_name(type)] = ex.capture;
      return ex.capture;
    };
    auto query_ns = [&] {
      for (const auto& rr : follow(domain, rrtype::NS).records)
      {
        try
        {
          s.ns_names.push_back(decode_name_rdata(rr.rdata));
        }
        catch (const ParseError&)
        {
        }
      }
    };
    if (cfg_.https_only)
      return s;
    if (https.records.empty())
    {
      if (cfg_.always_query_ns)
        query_ns();
      return s;
    }

    auto final_name = s.final_name();
    follow(final_name, rrtype::A);
    follow(final_name, rrtype::AAAA);
    follow(domain, rrtype::SOA);
    query_ns();
    auto apex = registrable_domain(domain).value_or(domain);
    s.ds_present = !follow(apex, rrtype::DS).records.empty();

    if (cfg_.probe && prober_)
      probe_connectivity(s, cfg_, *prober_);
    return s;
  }

  void Scanner::scan_all(
    const std::vector<std::pair<DomainName, TargetKind>>& targets, const std::string& date,
    const std::function<void(DomainSnapshot&&)>& sink)
  {
    const auto n = targets.size();
    std::vector<std::optional<DomainSnapshot>> slots(n);
    std::mutex mu;
    std::condition_variable ready;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (;;)
      {
        auto i = next.fetch_add(1);
        if (i >= n)
          return;
        DomainSnapshot s;
        try
        {
          s = scan_domain(targets[i].first, targets[i].second, date);
        }
        catch (const std::exception& e)
        {
          s = DomainSnapshot{};
          s.date = date;
          s.timestamp = wall_();
          s.domain = targets[i].first;
          s.kind = targets[i].second;
          s.error = fmt::format("internal: {}", e.what());
        }
        {
          std::lock_guard lock(mu);
          slots[i] = std::move(s);
        }
        ready.notify_all();
      }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 0, count = std::min(cfg_.workers, n); w < count; ++w)
      pool.emplace_back(work);
    for (std::size_t i = 0; i < n; ++i)
    {
      DomainSnapshot s;
      {
        std::unique_lock lock(mu);
        ready.wait(lock, [&] { return slots[i].has_value(); });
        s = std::move(*slots[i]);
        slots[i].reset();
      }
      sink(std::move(s));
    }
  }
}
