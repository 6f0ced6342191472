// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/synth.hpp"

#include "httpsrr/analysis.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <random>

namespace httpsrr
{
  namespace
  {
    using Rng = std::mt19937_64;

    bool coin(Rng& rng, double p)
    {
      return std::bernoulli_distribution(p)(rng);
    }

    std::size_t pick(Rng& rng, std::size_t n)
    {
      return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }

    enum class Ns
    {
      full_cf,
      partial_cf,
      other,
      absent,
    };

    enum class Www
    {
      to_apex,
      own_addresses,
      to_edge,
    };

    struct State
    {
      std::size_t index = 0;
      DomainName apex;
      bool https = false;
      Ns ns = Ns::full_cf;
      std::size_t ns_variant = 0;
      /// 0 h3,h2; 1 h2; 2 h2,h3,h3-29; 3 no alpn
      int alpn = 0;
      /// 0 both families; 1 v4 only; 2 none; 3 v4 outside the anycast ranges
      int hints = 0;
      bool mismatch = false;
      bool extra_param = false;
      bool priority_two = false;
      bool ech = false;
      bool is_signed = false;
      bool ds = false;
      bool ad = false;
      Www www = Www::to_apex;
      /// NS withdrawn for the current day only.
      bool ns_gone_today = false;
    };

    const char* const tlds[] = {"com", "net", "org", "co.uk", "de", "io"};

    DomainName pool_name(std::size_t i)
    {
      return DomainName::parse(fmt::format("site{}.{}", i, tlds[i % std::size(tlds)]));
    }

    std::string v4(std::size_t i, int k)
    {
      return fmt::format("104.{}.{}.{}", 16 + k, (i / 250) % 256, 1 + i % 250);
    }

    std::string v6(std::size_t i, int k)
    {
      return fmt::format("2606:4700::{:x}:{:x}", 0x6810 + k, i);
    }

    State fresh_state(std::size_t i, const SynthConfig& cfg, Rng& rng)
    {
      State s;
      s.index = i;
      s.apex = pool_name(i);
      s.https = coin(rng, cfg.https_share);
      double r = std::uniform_real_distribution<double>(0, 1)(rng);
      s.ns = r < 0.7 ? Ns::full_cf : r < 0.78 ? Ns::partial_cf : r < 0.97 ? Ns::other : Ns::absent;
      s.ns_variant = pick(rng, 3);
      r = std::uniform_real_distribution<double>(0, 1)(rng);
      s.alpn = r < 0.7 ? 0 : r < 0.85 ? 1 : r < 0.9 ? 2 : 3;
      r = std::uniform_real_distribution<double>(0, 1)(rng);
      s.hints = r < 0.75 ? 0 : r < 0.85 ? 1 : r < 0.95 ? 2 : 3;
      s.mismatch = coin(rng, 0.05);
      s.extra_param = coin(rng, 0.05);
      s.priority_two = coin(rng, 0.03);
      s.ech = coin(rng, 0.1);
      s.is_signed = coin(rng, 0.15);
      s.ds = s.is_signed && coin(rng, 0.6);
      s.ad = s.ds && coin(rng, 0.85);
      r = std::uniform_real_distribution<double>(0, 1)(rng);
      s.www = r < 0.6 ? Www::to_apex : r < 0.85 ? Www::own_addresses : Www::to_edge;
      return s;
    }

    std::vector<std::string> ns_lines(const State& s)
    {
      const std::string apex = s.apex.to_string();
      static const char* const cf[] = {"amir", "tess", "kate", "lara"};
      auto cf_name = [&](std::size_t k) { return fmt::format("{}.ns.cloudflare.com.", cf[(s.ns_variant + k) % 4]); };
      std::vector<std::string> names;
      switch (s.ns)
      {
        case Ns::full_cf:
          names = {cf_name(0), cf_name(1)};
          break;
        case Ns::partial_cf:
          names = {cf_name(0), fmt::format("ns1.dnsprovider{}.net.", s.ns_variant)};
          break;
        case Ns::other:
          names = {fmt::format("ns1.dnsprovider{}.net.", s.ns_variant),
                   fmt::format("ns2.dnsprovider{}.net.", s.ns_variant)};
          break;
        case Ns::absent:
          break;
      }
      std::vector<std::string> out;
      for (const auto& n : names)
        out.push_back(fmt::format("{} 86400 IN NS {}", apex, n));
      return out;
    }

    void add_records(ZoneStore& zone, const State& s)
    {
      const std::string apex = s.apex.to_string();
      const auto i = s.index;
      zone.add_line(fmt::format("{} 3600 IN SOA ns1.{} hostmaster.{} 1 7200 3600 1209600 300", apex, apex, apex));
      if (!s.ns_gone_today)
      {
        for (const auto& l : ns_lines(s))
          zone.add_line(l);
      }
      if (s.ds)
        zone.add_line(fmt::format("{} 86400 IN DS {} 13 2 {:064x}", apex, 1000 + i % 60000, i + 1));
      zone.add_line(fmt::format("{} 300 IN A {}", apex, v4(i, 0)));
      zone.add_line(fmt::format("{} 300 IN A {}", apex, v4(i, s.mismatch ? 2 : 1)));
      zone.add_line(fmt::format("{} 300 IN AAAA {}", apex, v6(i, 0)));
      zone.add_line(fmt::format("{} 300 IN AAAA {}", apex, v6(i, 1)));
      if (s.https)
      {
        std::string rec = fmt::format("{} 300 IN HTTPS {} .", apex, s.priority_two ? 2 : 1);
        static const char* const alpns[] = {" alpn=h3,h2", " alpn=h2", " alpn=h2,h3,h3-29", ""};
        rec += alpns[s.alpn];
        if (s.extra_param)
          rec += " port=443";
        if (s.hints == 0 || s.hints == 1)
          rec += fmt::format(" ipv4hint={},{}", v4(i, 0), v4(i, 1));
        if (s.hints == 3)
          rec += fmt::format(" ipv4hint=198.51.100.{}", 1 + i % 250);
        if (s.hints == 0 || s.hints == 3)
          rec += fmt::format(" ipv6hint={},{}", v6(i, 0), v6(i, 1));
        if (s.ech)
        {
          auto list = synthetic_ech_config_list("cloudflare-ech.com", std::uint8_t(i % 256), apex);
          rec += " ech=" + base64_encode(list);
        }
        zone.add_line(rec);
      }
      zone.set_flags(s.apex, {s.is_signed, s.ad});

      auto www = DomainName::parse("www." + apex);
      switch (s.www)
      {
        case Www::to_apex:
          zone.add_line(fmt::format("{} 300 IN CNAME {}", www.to_string(), apex));
          zone.set_flags(www, {s.is_signed, s.ad});
          break;
        case Www::own_addresses:
          zone.add_line(fmt::format("{} 300 IN A {}", www.to_string(), v4(i, 3)));
          break;
        case Www::to_edge:
        {
          auto edge = fmt::format("e{}.edge-cdn.net.", i % 97);
          zone.add_line(fmt::format("{} 300 IN CNAME {}", www.to_string(), edge));
          if (!zone.has_name(DomainName::parse(edge)))
          {
            zone.add_line(fmt::format("{} 60 IN HTTPS 1 . alpn=h2", edge));
            zone.add_line(fmt::format("{} 60 IN A 192.0.2.{}", edge, 1 + i % 97));
          }
          break;
        }
      }
    }

    void evolve(State& s, const SynthConfig& cfg, Rng& rng)
    {
      s.ns_gone_today = false;
      if (coin(rng, cfg.toggle))
      {
        s.https = !s.https;
        if (coin(rng, 0.2))
        {
          s.ns = s.ns == Ns::full_cf ? Ns::other : Ns::full_cf;
          s.ns_variant = pick(rng, 3);
        }
        if (!s.https && coin(rng, 0.1))
          s.ns_gone_today = true;
      }
      if (coin(rng, cfg.hint_flip))
        s.mismatch = !s.mismatch;
    }

    std::int64_t day_start(const std::string& date)
    {
      return day_number(date) * 86400;
    }

    struct ScanRig
    {
      ManualClock clock;
      MockTransport transport;
      RateLimiter limiter;
      Scanner scanner;

      ScanRig(ZoneStore zone, const ScanConfig& cfg, std::function<std::int64_t()> wall) :
        transport(std::move(zone), clock),
        limiter(cfg.qps, clock),
        scanner(cfg, transport, limiter, std::move(wall))
      {}
    };
  }

  void SynthConfig::check() const
  {
    if (days == 0 || domains == 0)
      throw ContractViolation("synthetic corpus needs at least one day and one domain");
    for (double p : {churn, https_share, toggle, hint_flip})
    {
      if (!(p >= 0 && p <= 1))
        throw ContractViolation("synthetic corpus probabilities must lie in [0, 1]");
    }
    day_number(start);
  }

  SynthSummary synth_corpus(const SynthConfig& cfg, SnapshotStore& store)
  {
    cfg.check();
    Rng rng(cfg.seed);
    const auto per_day = std::size_t(double(cfg.domains) * cfg.churn);
    const auto pool = cfg.domains + per_day * cfg.days;
    std::vector<State> states;
    for (std::size_t i = 0; i < pool; ++i)
      states.push_back(fresh_state(i, cfg, rng));

    std::vector<std::size_t> list(cfg.domains);
    for (std::size_t i = 0; i < cfg.domains; ++i)
      list[i] = i;
    std::size_t next_reserve = cfg.domains;

    ScanConfig scan;
    scan.qps = 100000;
    scan.workers = 1;
    scan.tag = "synthetic";
    scan.always_query_ns = true;

    SynthSummary summary;
    const auto first = day_number(cfg.start);
    for (std::size_t d = 0; d < cfg.days; ++d)
    {
      const auto date = date_from_day_number(first + std::int64_t(d));
      if (d > 0)
      {
        for (std::size_t k = 0; k < per_day && next_reserve < pool; ++k)
          list[pick(rng, list.size())] = next_reserve++;
        for (auto& s : states)
          evolve(s, cfg, rng);
      }
      std::vector<std::size_t> today = list;
      std::sort(today.begin(), today.end());
      today.erase(std::unique(today.begin(), today.end()), today.end());

      ZoneStore zone;
      std::vector<std::pair<DomainName, TargetKind>> targets;
      for (auto i : today)
      {
        add_records(zone, states[i]);
        targets.emplace_back(states[i].apex, TargetKind::apex);
        targets.emplace_back(DomainName::parse("www." + states[i].apex.to_string()), TargetKind::www);
      }
      const auto t0 = day_start(date);
      ScanRig rig(std::move(zone), scan, [t0] { return t0; });
      DayManifest manifest;
      manifest.date = date;
      manifest.config_digest = scan.digest();
      rig.scanner.scan_all(targets, date, [&](DomainSnapshot&& s) {
        manifest.add(s);
        store.append(s);
      });
      store.write_manifest(manifest);
      summary.snapshots += manifest.snapshots;
      summary.dates.push_back(date);
    }
    return summary;
  }

  void RotationSynthConfig::check() const
  {
    if (domains == 0 || scans < 2 || key_life == 0)
      throw ContractViolation("rotation series needs domains, two scans and a positive key life");
    if (!(short_key >= 0 && short_key <= 1) || jitter_seconds < 0 || jitter_seconds >= 1800)
      throw ContractViolation("rotation series parameters out of range");
    day_number(start);
  }

  std::map<DomainName, double> RotationTruth::domain_mean_hours() const
  {
    std::map<DomainName, double> out;
    for (const auto& [domain, lives] : key_lives)
    {
      double sum = 0;
      for (auto l : lives)
        sum += double(l);
      out[domain] = lives.empty() ? 0.0 : sum / double(lives.size());
    }
    return out;
  }

  RotationTruth synth_rotation(const RotationSynthConfig& cfg, SnapshotStore& store)
  {
    cfg.check();
    Rng rng(cfg.seed);
    RotationTruth truth;

    // Schedule: key k of a domain covers scans [begin_k, begin_k + life_k).
    struct Key
    {
      std::int64_t begin;
      std::size_t life;
    };
    std::vector<DomainName> names;
    std::vector<std::vector<Key>> schedule(cfg.domains);
    for (std::size_t d = 0; d < cfg.domains; ++d)
    {
      names.push_back(DomainName::parse(fmt::format("ech{}.example", d)));
      std::int64_t at = -std::int64_t(pick(rng, cfg.key_life));
      while (at < std::int64_t(cfg.scans))
      {
        std::size_t life = coin(rng, cfg.short_key) ? 1 : cfg.key_life;
        schedule[d].push_back({at, life});
        at += std::int64_t(life);
      }
      for (const auto& k : schedule[d])
        truth.key_lives[names[d]].push_back(k.life);
    }

    ScanConfig scan;
    scan.qps = 100000;
    scan.workers = 1;
    scan.https_only = true;
    scan.tag = "hourly";

    const auto t0 = day_start(cfg.start);
    std::uniform_int_distribution<std::int64_t> jitter(-cfg.jitter_seconds, cfg.jitter_seconds);
    for (std::size_t i = 0; i < cfg.scans; ++i)
    {
      const auto at = t0 + std::int64_t(i) * 3600 + (i == 0 ? 0 : jitter(rng));
      truth.scan_times.push_back(at);
      ZoneStore zone;
      std::vector<std::pair<DomainName, TargetKind>> targets;
      for (std::size_t d = 0; d < cfg.domains; ++d)
      {
        const auto& keys = schedule[d];
        auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) {
          return k.begin <= std::int64_t(i) && std::int64_t(i) < k.begin + std::int64_t(k.life);
        });
        auto index = std::size_t(it - keys.begin());
        auto list = synthetic_ech_config_list(
          "cover.example", std::uint8_t(index % 256), fmt::format("{}/{}", names[d].to_string(), index));
        zone.add_line(fmt::format("{} {} IN HTTPS 1 . alpn=h2,h3 ech={}", names[d].to_string(), cfg.ttl,
                                  base64_encode(list)));
        targets.emplace_back(names[d], TargetKind::apex);
      }
      const auto date = date_from_day_number(day_number(cfg.start) + std::int64_t(i / 24));
      const auto tag = fmt::format("hourly-{:02}", i % 24);
      ScanRig rig(std::move(zone), scan, [at] { return at; });
      DayManifest manifest;
      manifest.date = date;
      manifest.tag = tag;
      manifest.config_digest = scan.digest();
      rig.scanner.scan_all(targets, date, [&](DomainSnapshot&& s) {
        manifest.add(s);
        store.append(s, tag);
      });
      store.write_manifest(manifest);
    }
    return truth;
  }
}
