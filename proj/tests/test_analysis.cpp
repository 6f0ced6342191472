// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/analysis.hpp"
#include "httpsrr/synth.hpp"
#include "support/generators.hpp"
#include "support/recount_view.hpp"

#include <doctest.h>
#include <filesystem>
#include <fmt/format.h>

using namespace httpsrr;
using namespace httpsrr::testgen;

namespace
{
  DomainName N(std::string_view s)
  {
    return DomainName::parse(s);
  }

  struct SnapSpec
  {
    std::string domain = "a.com";
    std::string date = "2024-03-01";
    std::vector<std::string> rdata_lines;
    bool rrsig = false;
    bool ad = false;
    bool ds = false;
    std::optional<std::vector<std::string>> ns;
  };

  DomainSnapshot snap(const SnapSpec& spec)
  {
    DomainSnapshot s;
    s.domain = N(spec.domain);
    s.date = spec.date;
    s.timestamp = day_number(spec.date) * 86400;
    s.rrsets["HTTPS"] = RrsetCapture{"8.8.8.8", "noerror", {}, spec.rrsig, spec.ad, false};
    for (const auto& l : spec.rdata_lines)
    {
      auto rr = parse_rr_line(fmt::format("{} 300 IN {}", spec.domain, l));
      auto& c = s.rrsets[type_name(rr.type)];
      c.resolver = "8.8.8.8";
      c.status = "noerror";
      c.records.push_back(rr);
    }
    s.ds_present = spec.ds;
    if (spec.ns)
    {
      s.rrsets["NS"] = RrsetCapture{"8.8.8.8", "noerror", {}, false, false, false};
      for (const auto& n : *spec.ns)
        s.ns_names.push_back(N(n));
    }
    return s;
  }

  DomainSnapshot plain(std::string domain, std::string date = "2024-03-01")
  {
    return snap({std::move(domain), std::move(date), {}});
  }

  DomainSnapshot with_https(std::string domain, std::string date = "2024-03-01", std::string rec = "HTTPS 1 . alpn=h2")
  {
    return snap({std::move(domain), std::move(date), {std::move(rec)}});
  }

  std::set<DomainName> names(std::initializer_list<const char*> list)
  {
    std::set<DomainName> out;
    for (auto n : list)
      out.insert(N(n));
    return out;
  }

  CfDefaultSpec cf_spec()
  {
    return CfDefaultSpec::from_file(std::string(HTTPSRR_DATA_DIR) + "/cf_default.json");
  }

  struct TempDir
  {
    std::filesystem::path path;
    explicit TempDir(std::string_view name) :
      path(std::filesystem::temp_directory_path() / fmt::format("httpsrr-{}-{}", name, ::getpid()))
    {
      std::filesystem::remove_all(path);
      std::filesystem::create_directories(path);
    }
    ~TempDir()
    {
      std::filesystem::remove_all(path);
    }
  };
}

TEST_CASE("calendar arithmetic")
{
  CHECK(day_number("1970-01-01") == 0);
  CHECK(day_number("2024-03-01") == 19783);
  CHECK(date_from_day_number(19783) == "2024-03-01");
  for (std::int64_t d = -800; d < 40000; d += 7)
    CHECK(day_number(date_from_day_number(d)) == d);
  CHECK(date_range("2024-02-28", "2024-03-01") == std::vector<std::string>{"2024-02-28", "2024-02-29", "2024-03-01"});
  CHECK_THROWS_AS(day_number("2023-02-29"), ContractViolation);
  CHECK_THROWS_AS(day_number("2024-3-1"), ContractViolation);
  CHECK_THROWS_AS(date_range("2024-03-02", "2024-03-01"), ContractViolation);
}

TEST_CASE("adoption rate")
{
  std::vector<DomainSnapshot> day;
  std::set<DomainName> set;
  for (int i = 0; i < 10; ++i)
  {
    auto d = fmt::format("d{}.com", i);
    set.insert(N(d));
    day.push_back(i < 3 ? with_https(d) : plain(d));
  }
  CHECK(adoption_rate(day, set, TargetKind::apex) == 30.0);

  // A set member without a snapshot counts as lacking HTTPS.
  set.insert(N("missing.com"));
  CHECK(adoption_rate(day, set, TargetKind::apex) == doctest::Approx(300.0 / 11));

  std::vector<DomainSnapshot> all = {with_https("a.com"), with_https("b.com")};
  CHECK(adoption_rate(all, names({"a.com", "b.com"}), TargetKind::apex) == 100.0);
  CHECK(adoption_rate(all, names({"a.com", "b.com"}), TargetKind::www) == 0.0);
  CHECK_THROWS_AS(adoption_rate(all, {}, TargetKind::apex), ContractViolation);
}

TEST_CASE("overlapping set")
{
  DailyLists daily = {
    {"2024-03-01", names({"a.com", "b.com", "c.com"})},
    {"2024-03-02", names({"a.com", "b.com", "c.com"})},
    {"2024-03-03", names({"a.com", "c.com", "d.com"})},
  };
  CHECK(overlapping_set(daily, "2024-03-01", "2024-03-02") == names({"a.com", "b.com", "c.com"}));
  CHECK(overlapping_set(daily, "2024-03-01", "2024-03-03") == names({"a.com", "c.com"}));
  try
  {
    overlapping_set(daily, "2024-03-01", "2024-03-04");
    FAIL("expected an error");
  }
  catch (const ContractViolation& e)
  {
    CHECK(std::string(e.what()).find("2024-03-04") != std::string::npos);
  }
  CHECK(resolve_set(daily, {SetMode::dynamic, "", ""}, "2024-03-03") == daily["2024-03-03"]);
  CHECK_THROWS_AS(resolve_set(daily, {SetMode::overlapping, "2024-03-01", "2024-03-01"}, "2024-03-01"),
                  ContractViolation);

  Rng rng(5);
  for (int round = 0; round < 200; ++round)
  {
    DailyLists lists;
    auto days = pick(rng, 2, 6);
    for (std::size_t d = 0; d < days; ++d)
    {
      auto& l = lists[date_from_day_number(19783 + std::int64_t(d))];
      for (int i = 0; i < 30; ++i)
      {
        if (coin(rng, 0.8))
          l.insert(N(fmt::format("x{}.com", i)));
      }
    }
    std::set<DomainName> brute;
    for (int i = 0; i < 30; ++i)
    {
      auto n = N(fmt::format("x{}.com", i));
      bool everywhere = true;
      for (const auto& [date, l] : lists)
        everywhere = everywhere && l.count(n) > 0;
      if (everywhere)
        brute.insert(n);
    }
    CHECK(overlapping_set(lists, lists.begin()->first, lists.rbegin()->first) == brute);
  }
}

TEST_CASE("name server categories")
{
  CHECK(ns_categorize({N("amir.ns.cloudflare.com")}) == NsCategory::full_cf);
  CHECK(ns_categorize({N("amir.ns.cloudflare.com"), N("tess.ns.cloudflare.com")}) == NsCategory::full_cf);
  CHECK(ns_categorize({N("ns1.godaddy-like.example")}) == NsCategory::none_cf);
  CHECK(ns_categorize({N("amir.ns.cloudflare.com"), N("ns1.other.net")}) == NsCategory::partial_cf);
  CHECK(ns_categorize({}) == NsCategory::unknown);
  CHECK(ns_categorize({N("ns.cloudflare.com.evil.net")}) == NsCategory::none_cf);
  ProviderRules rules{{N("awsdns.net")}};
  CHECK(ns_categorize({N("ns-1.awsdns.net")}, rules) == NsCategory::full_cf);
}

TEST_CASE("Cloudflare default classifier")
{
  auto spec = cf_spec();
  const std::string base = "a.com. 300 IN HTTPS 1 . alpn=h3,h2 ipv4hint=104.16.132.229,104.16.133.229 "
                           "ipv6hint=2606:4700::6810:84e5,2606:4700::6810:85e5";
  auto rec = parse_presentation(base);
  CHECK(classify_cf_default(rec, spec) == CfClass::default_config);
  CHECK(classify_cf_default(parse_presentation(
          "a.com. HTTPS 1 . alpn=h2,h3 ipv4hint=172.67.1.1 ipv6hint=2a06:98c1::1"), spec) == CfClass::default_config);

  const std::vector<std::pair<std::string, std::string>> perturbations = {
    {"drop h3", "a.com. HTTPS 1 . alpn=h2 ipv4hint=104.16.132.229 ipv6hint=2606:4700::6810:84e5"},
    {"drop h2", "a.com. HTTPS 1 . alpn=h3 ipv4hint=104.16.132.229 ipv6hint=2606:4700::6810:84e5"},
    {"add h3-29", "a.com. HTTPS 1 . alpn=h3,h2,h3-29 ipv4hint=104.16.132.229 ipv6hint=2606:4700::6810:84e5"},
    {"priority 2", "a.com. HTTPS 2 . alpn=h3,h2 ipv4hint=104.16.132.229 ipv6hint=2606:4700::6810:84e5"},
    {"alias", "a.com. HTTPS 0 b.com."},
    {"target", "a.com. HTTPS 1 b.com. alpn=h3,h2 ipv4hint=104.16.132.229 ipv6hint=2606:4700::6810:84e5"},
    {"v4 out of range", "a.com. HTTPS 1 . alpn=h3,h2 ipv4hint=104.16.132.229,8.8.8.8 ipv6hint=2606:4700::1"},
    {"v6 out of range", "a.com. HTTPS 1 . alpn=h3,h2 ipv4hint=104.16.132.229 ipv6hint=2001:db8::1"},
    {"no v4", "a.com. HTTPS 1 . alpn=h3,h2 ipv6hint=2606:4700::6810:84e5"},
    {"no v6", "a.com. HTTPS 1 . alpn=h3,h2 ipv4hint=104.16.132.229"},
    {"no alpn", "a.com. HTTPS 1 . ipv4hint=104.16.132.229 ipv6hint=2606:4700::6810:84e5"},
    {"extra port", "a.com. HTTPS 1 . alpn=h3,h2 port=443 ipv4hint=104.16.132.229 ipv6hint=2606:4700::1"},
    {"extra ech", "a.com. HTTPS 1 . alpn=h3,h2 ipv4hint=104.16.132.229 ipv6hint=2606:4700::1 ech=AAA="},
    {"extra no-default-alpn",
     "a.com. HTTPS 1 . alpn=h3,h2 no-default-alpn ipv4hint=104.16.132.229 ipv6hint=2606:4700::1"},
  };
  for (const auto& [label, line] : perturbations)
  {
    CAPTURE(label);
    CHECK(classify_cf_default(parse_presentation(line), spec) == CfClass::customized);
  }

  CHECK_THROWS_AS(CfDefaultSpec::from_json(nlohmann::json::parse(R"({"anycast_v4":["2606::/32"],"anycast_v6":[]})")),
                  ContractViolation);
}

TEST_CASE("Cloudflare default classifier is monotone")
{
  auto spec = cf_spec();
  Rng rng(77);
  for (int round = 0; round < 2000; ++round)
  {
    auto v4 = fmt::format("104.{}.{}.{}", pick(rng, 16, 23), pick(rng, 0, 255), pick(rng, 1, 254));
    auto v6 = fmt::format("2606:4700::{:x}", pick(rng, 1, 0xffff));
    auto line = fmt::format("a.com. HTTPS 1 . alpn={} ipv4hint={} ipv6hint={}", coin(rng) ? "h2,h3" : "h3,h2", v4, v6);
    auto rec = parse_presentation(line);
    REQUIRE(classify_cf_default(rec, spec) == CfClass::default_config);

    std::string mutated;
    switch (pick(rng, 0, 4))
    {
      case 0:
        mutated = line + fmt::format(" port={}", pick(rng, 1, 65535));
        break;
      case 1:
        mutated = fmt::format("a.com. HTTPS 1 . alpn=h2,h3 ipv4hint={}", v4);
        break;
      case 2:
        mutated = fmt::format("a.com. HTTPS 1 . alpn=h2,h3 ipv4hint={},192.0.2.{} ipv6hint={}", v4,
                              pick(rng, 1, 254), v6);
        break;
      case 3:
        mutated = fmt::format("a.com. HTTPS 1 . alpn=h2,h3 ipv4hint={} ipv6hint={},2001:db8::{:x}", v4, v6,
                              pick(rng, 1, 0xffff));
        break;
      default:
        mutated = fmt::format("a.com. HTTPS {} . alpn=h2,h3 ipv4hint={} ipv6hint={}", pick(rng, 2, 65535), v4, v6);
        break;
    }
    CAPTURE(mutated);
    CHECK(classify_cf_default(parse_presentation(mutated), spec) == CfClass::customized);
  }
}

TEST_CASE("IP hint consistency")
{
  auto s = snap({"a.com", "2024-03-01", {"HTTPS 1 . ipv4hint=1.2.3.4", "A 1.2.3.4"}});
  CHECK(iphint_consistency(s) == FamilyConsistency{HintConsistency::match, HintConsistency::hint_absent});
  s = snap({"a.com", "2024-03-01", {"HTTPS 1 . ipv4hint=1.2.3.4", "A 2.2.3.4"}});
  CHECK(iphint_consistency(s).v4 == HintConsistency::mismatch);
  s = snap({"a.com", "2024-03-01", {"HTTPS 1 . alpn=h2", "A 2.2.3.4"}});
  CHECK(iphint_consistency(s) == FamilyConsistency{});
  s = snap({"a.com", "2024-03-01", {"HTTPS 1 . ipv4hint=1.2.3.4,5.6.7.8 ipv6hint=::1", "A 1.2.3.4", "AAAA ::1"}});
  CHECK(iphint_consistency(s).v4 == HintConsistency::mismatch);
  CHECK(iphint_consistency(s).v6 == HintConsistency::match);
}

TEST_CASE("mismatch durations")
{
  auto series = [](const std::string& pattern, std::int64_t start = 19783) {
    std::vector<DomainSnapshot> out;
    std::int64_t d = start;
    for (char c : pattern)
    {
      if (c == '_')
      {
        ++d;
        continue;
      }
      out.push_back(snap({"a.com", date_from_day_number(d++),
                          {"HTTPS 1 . ipv4hint=1.2.3.4", c == 'M' ? "A 9.9.9.9" : "A 1.2.3.4"}}));
    }
    return out;
  };
  CHECK(mismatch_durations(series("MMMoM")) == std::vector<std::size_t>{3, 1});
  CHECK(mismatch_durations(series("oooo")).empty());
  CHECK(mismatch_durations(series("MM_MM")) == std::vector<std::size_t>{2, 2});
  CHECK(mismatch_durations(series("M")) == std::vector<std::size_t>{1});

  Rng rng(8);
  for (int round = 0; round < 500; ++round)
  {
    std::string p;
    auto len = pick(rng, 0, 25);
    for (std::size_t i = 0; i < len; ++i)
      p += "MMo_"[pick(rng, 0, 3)];
    std::vector<std::size_t> brute;
    std::size_t run = 0;
    for (char c : p)
    {
      if (c == 'M')
        ++run;
      else if (run)
      {
        brute.push_back(run);
        run = 0;
      }
    }
    if (run)
      brute.push_back(run);
    CAPTURE(p);
    CHECK(mismatch_durations(series(p)) == brute);
  }
}

namespace
{
  EchKeyIdentity key(int n)
  {
    return primary_identity(parse_ech_config_list(synthetic_ech_config_list("cover.example", std::uint8_t(n), std::to_string(n))));
  }

  RotationSeries rotation(const std::vector<std::vector<int>>& per_domain, std::int64_t step = 3600)
  {
    RotationSeries r;
    for (std::size_t i = 0; i < per_domain.front().size(); ++i)
      r.scan_times.push_back(1709251200 + std::int64_t(i) * step);
    for (std::size_t d = 0; d < per_domain.size(); ++d)
    {
      auto& row = r.observed[N(fmt::format("d{}.com", d))];
      for (int k : per_domain[d])
        row.push_back(k < 0 ? std::nullopt : std::optional(key(k)));
    }
    return r;
  }
}

TEST_CASE("ECH rotation")
{
  auto rep = ech_rotation(rotation({{1, 1, 2, 3, 3}}));
  CHECK(rep.interval_hours == 1.0);
  REQUIRE(rep.lives.size() == 3);
  CHECK(rep.lives[0].hours == 2.0);
  CHECK(rep.lives[1].hours == 1.0);
  CHECK(rep.lives[2].hours == 2.0);
  CHECK(rep.domain_mean_hours.at(N("d0.com")) == doctest::Approx(5.0 / 3));

  rep = ech_rotation(rotation({{-1, 4, -1, 4}, {5, 5, 5, 5}}));
  REQUIRE(rep.lives.size() == 3);
  CHECK(rep.lives[0].hours == 1.0);
  CHECK(rep.lives[1].hours == 1.0);
  CHECK(rep.domain_mean_hours.at(N("d1.com")) == 4.0);
  CHECK(rep.overall_mean_hours == doctest::Approx(2.5));

  // Jittered timestamps still give an hourly interval.
  auto jittered = rotation({{1, 1, 1}});
  jittered.scan_times = {0, 3540, 7300};
  CHECK(ech_rotation(jittered).interval_hours == 1.0);

  // A long gap breaks the run.
  auto gap = rotation({{1, 1, 1, 1}});
  gap.scan_times = {0, 3600, 7200, 6 * 3600};
  rep = ech_rotation(gap);
  REQUIRE(rep.lives.size() == 2);
  CHECK(rep.lives[0].hours == 3.0);
  CHECK(rep.lives[1].hours == 1.0);

  auto bad = rotation({{1, 1}});
  bad.scan_times = {10, 10};
  CHECK_THROWS_AS(ech_rotation(bad), ContractViolation);
  CHECK_THROWS_AS(ech_rotation(rotation({{1}})), ContractViolation);
}

TEST_CASE("ECH rotation durations never exceed the span")
{
  Rng rng(21);
  for (int round = 0; round < 300; ++round)
  {
    auto scans = pick(rng, 2, 40);
    std::vector<std::vector<int>> rows(pick(rng, 1, 4));
    for (auto& row : rows)
    {
      for (std::size_t i = 0; i < scans; ++i)
        row.push_back(coin(rng, 0.1) ? -1 : int(pick(rng, 0, 3)));
    }
    auto series = rotation(rows);
    auto rep = ech_rotation(series);
    std::map<DomainName, double> sum;
    for (const auto& l : rep.lives)
      sum[l.domain] += l.hours;
    for (const auto& [d, h] : sum)
      CHECK(h <= double(scans) * rep.interval_hours);
  }
}

TEST_CASE("DNSSEC stats")
{
  std::vector<DomainSnapshot> day;
  std::set<DomainName> set;
  for (int i = 0; i < 10; ++i)
  {
    auto d = fmt::format("d{}.com", i);
    set.insert(N(d));
    day.push_back(snap({d, "2024-03-01", {"HTTPS 1 . alpn=h2"}, i < 4, i < 2, i < 3}));
  }
  day.push_back(plain("z.com"));
  set.insert(N("z.com"));
  auto st = dnssec_stats(day, set, TargetKind::apex);
  CHECK(st.https_domains == 10);
  CHECK(st.signed_pct == 40.0);
  CHECK(st.validated_pct == 20.0);
  CHECK(st.insecure == 1);
  CHECK(st.insecure_among_signed_pct == 25.0);
}

TEST_CASE("ALPN distribution")
{
  std::vector<DomainSnapshot> day = {
    with_https("a.com", "2024-03-01", "HTTPS 1 . alpn=h2,h3"),
    with_https("b.com", "2024-03-01", "HTTPS 1 . alpn=h2,h3"),
  };
  auto set = names({"a.com", "b.com"});
  auto dist = alpn_distribution(day, set, TargetKind::apex);
  CHECK(dist.pct.at("h2") == 100.0);
  CHECK(dist.pct.at("h3") == 100.0);

  day.push_back(with_https("c.com", "2024-03-01", "HTTPS 1 . alpn=h2,h3-29"));
  day.push_back(with_https("d.com", "2024-03-01", "HTTPS 1 . ipv4hint=1.2.3.4"));
  day.push_back(with_https("e.com", "2024-03-01", "HTTPS 0 a.com."));
  set = names({"a.com", "b.com", "c.com", "d.com", "e.com"});
  dist = alpn_distribution(day, set, TargetKind::apex);
  CHECK(dist.https_domains == 5);
  CHECK(dist.counts.at("h3-29") == 1);
  CHECK(dist.counts.at("h2") == 3);
  CHECK(dist.counts.at(std::string(no_alpn_bucket)) == 2);
  CHECK(dist.pct.at("h3-29") == 20.0);
}

TEST_CASE("intermittency")
{
  const std::vector<std::string> cf = {"amir.ns.cloudflare.com", "tess.ns.cloudflare.com"};
  auto day = [&](int d, bool https, std::optional<std::vector<std::string>> ns) {
    SnapSpec s{"a.com", date_from_day_number(19783 + d), {}};
    if (https)
      s.rdata_lines.push_back("HTTPS 1 . alpn=h2");
    s.ns = std::move(ns);
    return snap(s);
  };

  auto e = intermittency_report({day(0, true, cf), day(1, false, cf), day(2, true, cf)});
  CHECK(e.intermittent);
  CHECK(e.same_ns_throughout);
  CHECK_FALSE(e.ns_changed_at_toggle);
  CHECK_FALSE(e.ns_absent_at_deactivation);
  CHECK(e.active == std::vector<ActivationInterval>{{"2024-03-01", "2024-03-01"}, {"2024-03-03", "2024-03-03"}});

  e = intermittency_report({day(0, true, cf), day(1, false, std::vector<std::string>{}), day(2, true, cf)});
  CHECK(e.ns_absent_at_deactivation);
  CHECK_FALSE(e.same_ns_throughout);

  e = intermittency_report(
    {day(0, true, cf), day(1, false, std::vector<std::string>{"ns1.other.net"}), day(2, false, std::nullopt)});
  CHECK(e.ns_changed_at_toggle);
  CHECK(e.active == std::vector<ActivationInterval>{{"2024-03-01", "2024-03-01"}});

  e = intermittency_report({day(0, true, cf), day(1, true, cf), day(2, true, cf)});
  CHECK_FALSE(e.intermittent);
  CHECK(e.active == std::vector<ActivationInterval>{{"2024-03-01", "2024-03-03"}});

  CHECK_THROWS_AS(intermittency_report({day(0, true, cf)}), ContractViolation);
}

TEST_CASE("accumulators merge in any order")
{
  Rng rng(99);
  std::vector<DomainSnapshot> day;
  for (int i = 0; i < 200; ++i)
  {
    static const char* const recs[] = {"HTTPS 1 . alpn=h2,h3", "HTTPS 1 . alpn=h3-29", "HTTPS 1 . port=8443", ""};
    std::string rec = recs[pick(rng, 0, 3)];
    SnapSpec s{fmt::format("d{}.com", i), "2024-03-01", {}, coin(rng), coin(rng), coin(rng)};
    if (!rec.empty())
      s.rdata_lines.push_back(rec);
    day.push_back(snap(s));
  }
  DnssecAcc whole_d;
  AlpnAcc whole_a;
  AdoptionAcc whole_ad;
  for (const auto& s : day)
  {
    whole_d.add(s);
    whole_a.add(s);
    whole_ad.add(s.has_https());
  }
  for (int round = 0; round < 50; ++round)
  {
    auto shuffled = day;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<DnssecAcc> dp(pick(rng, 1, 8));
    std::vector<AlpnAcc> ap(dp.size());
    std::vector<AdoptionAcc> adp(dp.size());
    for (const auto& s : shuffled)
    {
      auto k = pick(rng, 0, dp.size() - 1);
      dp[k].add(s);
      ap[k].add(s);
      adp[k].add(s.has_https());
    }
    DnssecAcc d;
    AlpnAcc a;
    AdoptionAcc ad;
    for (auto k = dp.size(); k-- > 0;)
    {
      d.merge(dp[k]);
      a.merge(ap[k]);
      ad.merge(adp[k]);
    }
    CHECK(d.finish() == whole_d.finish());
    CHECK(a.finish().pct == whole_a.finish().pct);
    CHECK(ad.pct() == whole_ad.pct());
  }
}

TEST_CASE("metric reports over a synthetic corpus")
{
  TempDir dir("analysis");
  SnapshotStore store(dir.path);
  SynthConfig cfg;
  cfg.domains = 60;
  cfg.days = 4;
  auto summary = synth_corpus(cfg, store);
  CHECK(summary.snapshots == 60 * 2 * 4);
  CHECK(summary.dates.size() == 4);

  auto in = load_input(store, {SetMode::overlapping, "2024-03-01", "2024-03-04"}, TargetKind::apex);
  in.cf = cf_spec();
  CHECK(in.days.size() == 4);
  CHECK_FALSE(in.config_digest.empty());
  auto again = load_input(store, in.set, in.kind);
  again.cf = cf_spec();
  for (const auto& metric : metric_names())
  {
    if (metric == "ech_rotation")
    {
      CHECK_THROWS_AS(run_metric(metric, in), ContractViolation);
      continue;
    }
    CAPTURE(metric);
    auto a = run_metric(metric, in);
    auto b = run_metric(metric, again);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_csv().rfind("# config_digest: " + in.config_digest + "\n", 0) == 0);
    CHECK(a.to_json()["metric"] == metric);
  }
  CHECK_THROWS_AS(run_metric("bogus", in), ContractViolation);

  auto adoption = run_metric("adoption", in);
  REQUIRE(adoption.rows.size() == 4);
  auto overlap = overlapping_set(daily_lists(in.days, TargetKind::apex), "2024-03-01", "2024-03-04");
  CHECK(adoption.rows[0][3] == std::to_string(overlap.size()));
}

TEST_CASE("adoption report row")
{
  TempDir dir("adoption");
  SnapshotStore store(dir.path);
  for (int i = 0; i < 10; ++i)
    store.append(i < 3 ? with_https(fmt::format("d{}.com", i)) : plain(fmt::format("d{}.com", i)));
  auto in = load_input(store, {SetMode::dynamic, "2024-03-01", "2024-03-01"}, TargetKind::apex);
  auto r = run_metric("adoption", in);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0] == std::vector<std::string>{"2024-03-01", "dynamic", "apex", "10", "3", "30"});
  CHECK(r.to_csv().find("2024-03-01,dynamic,apex,10,3,30\n") != std::string::npos);
}

TEST_CASE("rotation recovered from a synthetic hourly series")
{
  TempDir dir("rotation");
  SnapshotStore store(dir.path);
  RotationSynthConfig cfg;
  cfg.domains = 6;
  cfg.scans = 48;
  auto truth = synth_rotation(cfg, store);
  auto in = load_input(store, {SetMode::dynamic, "2024-03-01", "2024-03-02"}, TargetKind::apex);
  REQUIRE(in.hourly.size() == 48);
  auto rep = ech_rotation(RotationSeries::from_scans(in.hourly));
  CHECK(rep.interval_hours == 1.0);
  for (const auto& [domain, hours] : truth.domain_mean_hours())
  {
    CAPTURE(domain.to_string());
    REQUIRE(rep.domain_mean_hours.count(domain));
    CHECK(std::abs(rep.domain_mean_hours.at(domain) - hours) <= rep.interval_hours);
  }
  auto report = run_metric("ech_rotation", in);
  CHECK(report.rows.size() == 6);
}

TEST_CASE("metrics match the brute-force recount")
{
  TempDir dir("recount");
  SnapshotStore store(dir.path);
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.domains = 150;
  cfg.days = 5;
  cfg.toggle = 0.1;
  synth_corpus(cfg, store);
  for (auto mode : {SetMode::overlapping, SetMode::dynamic})
  {
    for (auto kind : {TargetKind::apex, TargetKind::www})
    {
      DomainSetSpec set{mode, "2024-03-01", "2024-03-05"};
      auto in = load_input(store, set, kind);
      auto mine = metric_view(in);
      auto theirs = python_recount(dir.path, set, kind, HTTPSRR_PYTHON, HTTPSRR_TOOLS_DIR "/oracles/recount.py");
      REQUIRE(theirs);
      auto diff = view_differences(mine, *theirs);
      CAPTURE(fmt::format("{}", fmt::join(diff, ",")));
      CHECK(diff.empty());
      CHECK(mine["overlapping"].size() > 100);
      CHECK_FALSE(mine["intermittency"].empty());

      auto tampered = mine;
      tampered["adoption"].begin().value() = tampered["adoption"].begin().value().get<double>() + 1e-9;
      CHECK(view_differences(tampered, *theirs) == std::vector<std::string>{"adoption"});
    }
  }
}
