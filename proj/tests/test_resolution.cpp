// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/resolution.hpp"
#include "httpsrr/rrdata.hpp"
#include "support/generators.hpp"

#include <algorithm>
#include <doctest.h>
#include <fmt/format.h>
#include <functional>
#include <numeric>

using namespace httpsrr;
using namespace httpsrr::testgen;

namespace
{
  DnsView view_of(const std::vector<std::string>& lines)
  {
    DnsView v;
    for (const auto& line : lines)
    {
      auto rr = parse_rr_line(line);
      if (rr.type == rrtype::HTTPS)
        v.add_https(parse_presentation(line));
      else if (rr.type == rrtype::A)
        v.add_a(rr.name, decode_a(rr.rdata));
      else if (rr.type == rrtype::AAAA)
        v.add_aaaa(rr.name, decode_aaaa(rr.rdata));
    }
    return v;
  }

  std::string ech_param(const std::string& public_name, std::uint8_t id = 1)
  {
    return "ech=" + base64_encode(synthetic_ech_config_list(public_name, id, public_name));
  }

  ConnectionPlan plan(const std::string& profile, const std::vector<std::string>& zone,
                      const std::string& url = "https://a.test")
  {
    return build_plan(Request::parse(url), builtin_profile(profile), view_of(zone));
  }

  AttemptResult result(const ConnectionPlan& p, Outcome o)
  {
    AttemptResult r;
    r.attempt_index = p.attempts.back().index;
    r.outcome = o;
    if (o == Outcome::connected)
      r.alpn = p.attempts.back().alpn.front();
    return r;
  }

  using Responder = std::function<AttemptResult(const ConnectionPlan&)>;

  ConnectionPlan drive(ConnectionPlan p, const Responder& respond, std::size_t limit = 32)
  {
    while (!p.terminal && limit-- > 0)
      p = advance(p, respond(p));
    REQUIRE(p.terminal);
    return p;
  }

  std::string ip(const Attempt& a)
  {
    return to_string(a.ip);
  }
}

TEST_CASE("select_endpoints examples")
{
  auto alias = select_endpoints({parse_presentation("a.com. HTTPS 0 pool.a.com.")});
  CHECK(alias.kind == EndpointChoice::Kind::alias);
  CHECK(alias.alias_target.to_string() == "pool.a.com.");

  auto one = select_endpoints({parse_presentation("a.com. HTTPS 1 . alpn=h2")});
  REQUIRE(one.kind == EndpointChoice::Kind::service);
  REQUIRE(one.endpoints.size() == 1);
  CHECK(one.endpoints[0].svc_priority == 1);

  auto two = select_endpoints(
    {parse_presentation("a.com. HTTPS 2 b.a.com."), parse_presentation("a.com. HTTPS 1 c.a.com.")});
  REQUIRE(two.endpoints.size() == 2);
  CHECK(two.endpoints[0].svc_priority == 1);
  CHECK(two.endpoints[1].svc_priority == 2);

  CHECK(select_endpoints({}).kind == EndpointChoice::Kind::none);

  auto mixed = select_endpoints(
    {parse_presentation("a.com. HTTPS 1 . alpn=h2"), parse_presentation("a.com. HTTPS 0 z.a.com.")});
  CHECK(mixed.kind == EndpointChoice::Kind::alias);
  CHECK(mixed.alias_target.to_string() == "z.a.com.");
}

TEST_CASE("select_endpoints agrees with a brute-force order over every permutation")
{
  Rng rng(0x5e1ec7);
  for (int round = 0; round < 400; ++round)
  {
    std::vector<HttpsRecord> rrset;
    auto owner = random_name(rng);
    auto n = pick(rng, 1, 4);
    for (std::size_t i = 0; i < n; ++i)
    {
      auto r = random_record(rng);
      r.owner = owner;
      r.type = RecordType::https;
      if (!r.is_alias())
        r.svc_priority = std::uint16_t(pick(rng, 1, 3));
      rrset.push_back(r);
    }
    bool has_alias = std::any_of(rrset.begin(), rrset.end(), [](auto& r) { return r.is_alias(); });

    std::vector<std::size_t> order(rrset.size());
    std::iota(order.begin(), order.end(), 0);
    std::optional<EndpointChoice> first;
    do
    {
      std::vector<HttpsRecord> perm;
      for (auto i : order)
        perm.push_back(rrset[i]);
      auto got = select_endpoints(perm);
      if (!first)
      {
        first = got;
        continue;
      }
      CHECK(got.kind == first->kind);
      CHECK(got.alias_target == first->alias_target);
      CHECK(got.endpoints == first->endpoints);
    } while (std::next_permutation(order.begin(), order.end()));

    if (has_alias)
    {
      REQUIRE(first->kind == EndpointChoice::Kind::alias);
      // Alias wins, and among aliases the lowest wire form.
      std::optional<Bytes> best;
      DomainName target;
      for (const auto& r : rrset)
      {
        if (r.is_alias() && (!best || to_wire(r) < *best))
        {
          best = to_wire(r);
          target = r.target;
        }
      }
      CHECK(first->alias_target == target);
      continue;
    }

    REQUIRE(first->kind == EndpointChoice::Kind::service);
    REQUIRE(first->endpoints.size() == rrset.size());
    for (std::size_t i = 1; i < first->endpoints.size(); ++i)
    {
      const auto& a = first->endpoints[i - 1];
      const auto& b = first->endpoints[i];
      bool ordered = a.svc_priority < b.svc_priority ||
        (a.svc_priority == b.svc_priority && to_wire(a) <= to_wire(b));
      CHECK(ordered);
    }
  }
}

TEST_CASE("alias without address records hard-fails for chrome")
{
  std::vector<std::string> zone = {
    "a.test. HTTPS 0 pool.a.test.",
    "pool.a.test. A 10.0.0.7",
  };
  auto p = plan("chrome", zone);
  CHECK(p.attempts.empty());
  REQUIRE(p.terminal);
  CHECK(p.terminal->reason == fail_reason::no_address_owner);

  auto s = plan("safari", zone);
  REQUIRE(s.attempts.size() == 1);
  CHECK(ip(s.attempts[0]) == "10.0.0.7");
  CHECK(s.attempts[0].host.to_string() == "pool.a.test.");
  CHECK(std::find(s.queries.begin(), s.queries.end(), DnsQuery{DomainName::parse("pool.a.test."), "A"}) !=
        s.queries.end());
  CHECK(std::find(p.queries.begin(), p.queries.end(), DnsQuery{DomainName::parse("pool.a.test."), "A"}) ==
        p.queries.end());
}

TEST_CASE("chrome ignores the port parameter")
{
  auto p = plan("chrome", {"a.test. HTTPS 1 . alpn=h2 port=8443", "a.test. A 1.2.3.4"});
  REQUIRE(p.attempts.size() == 1);
  CHECK(ip(p.attempts[0]) == "1.2.3.4");
  CHECK(p.attempts[0].port == 443);
  CHECK_FALSE(p.terminal);
}

TEST_CASE("firefox tries the hint first")
{
  auto p = plan("firefox", {"a.test. HTTPS 1 . alpn=h2 ipv4hint=1.2.3.4", "a.test. A 2.2.3.4"});
  REQUIRE(p.attempts.size() == 1);
  CHECK(ip(p.attempts[0]) == "1.2.3.4");
  CHECK(p.attempts[0].ip_source == IpSource::hint);

  auto next = advance(p, result(p, Outcome::ip_unreachable));
  REQUIRE(next.attempts.size() == 2);
  CHECK(ip(next.attempts[1]) == "2.2.3.4");
  CHECK(next.attempts[1].ip_source == IpSource::addr_record);
  CHECK(next.attempts[1].has_annotation("delayed"));
}

TEST_CASE("safari falls back to port 443")
{
  auto p = plan("safari", {"a.test. HTTPS 1 . alpn=h2 port=8443", "a.test. A 1.2.3.4"});
  REQUIRE(p.attempts.size() == 1);
  CHECK(p.attempts[0].port == 8443);
  auto next = advance(p, result(p, Outcome::port_refused));
  REQUIRE(next.attempts.size() == 2);
  CHECK(next.attempts[1].port == 443);
  CHECK(ip(next.attempts[1]) == "1.2.3.4");
  CHECK(next.attempts[1].has_annotation("port_fallback"));

  auto done = advance(next, result(next, Outcome::connected));
  REQUIRE(done.terminal);
  CHECK(done.terminal->ok());
  CHECK(done.terminal->alpn == "h2");
}

TEST_CASE("chrome hard-fails when the address record is unreachable")
{
  auto p = plan("chrome", {"a.test. HTTPS 1 . alpn=h2 ipv4hint=5.5.5.5", "a.test. A 1.2.3.4"});
  REQUIRE(p.attempts.size() == 1);
  CHECK(ip(p.attempts[0]) == "1.2.3.4");
  auto next = advance(p, result(p, Outcome::ip_unreachable));
  REQUIRE(next.terminal);
  CHECK(next.terminal->reason == fail_reason::unreachable);
  CHECK(next.attempts.size() == 1);
}

TEST_CASE("malformed ECH: firefox proceeds without ECH, chrome fails at plan time")
{
  auto payload = corrupt_ech_lengths(synthetic_ech_config_list("cover.test", 3, "k"));
  std::vector<std::string> zone = {
    "a.test. HTTPS 1 . alpn=h2 ech=" + base64_encode(payload),
    "a.test. A 1.2.3.4",
  };
  auto f = plan("firefox", zone);
  REQUIRE(f.attempts.size() == 1);
  CHECK(f.attempts[0].ech_mode == EchMode::off);
  CHECK_FALSE(f.attempts[0].ech_key);
  CHECK(f.attempts[0].sni.to_string() == "a.test.");
  CHECK(f.attempts[0].has_annotation("ech_ignored_malformed"));

  auto c = plan("chrome", zone);
  CHECK(c.attempts.empty());
  REQUIRE(c.terminal);
  CHECK(c.terminal->reason == fail_reason::malformed_ech);
}

TEST_CASE("builtin profiles")
{
  const auto& all = builtin_profiles();
  for (auto name : {"rfc", "chrome", "edge", "safari", "firefox"})
    CHECK(all.count(name) == 1);
  CHECK(all.size() == 5);
  CHECK_THROWS_AS(builtin_profile("opera"), std::out_of_range);

  CHECK_FALSE(builtin_profile("chrome").use_port_param);
  CHECK_FALSE(builtin_profile("safari").ech_shared);
  CHECK(builtin_profile("firefox").ech_on_malformed == EchOnMalformed::ignore_and_plain_tls);

  auto edge = builtin_profile("edge");
  edge.name = "chrome";
  CHECK(edge == builtin_profile("chrome"));

  const auto& rfc = builtin_profile("rfc");
  CHECK(rfc.follow_alias_target);
  CHECK(rfc.follow_service_target);
  CHECK(rfc.use_port_param);
  CHECK(rfc.ip_preference == IpPreference::addr_records_first);
  CHECK(rfc.ech_shared);
  CHECK(rfc.ech_split == EchSplit::supported);
  CHECK(rfc.alias_chain_limit == 8);
}

TEST_CASE("profile documents round-trip")
{
  for (const auto& [name, p] : builtin_profiles())
  {
    CAPTURE(name);
    CHECK(load_profile(dump_profile(p)) == p);
  }
  auto custom = load_profile(R"({"ip_failover": "hard_fail", "use_port_param": false})");
  CHECK(custom.name == "custom");
  CHECK(custom.ip_failover == IpFailover::hard_fail);
  CHECK_FALSE(custom.use_port_param);
  CHECK(custom.follow_alias_target);

  CHECK_THROWS_AS(load_profile(R"({"warp_speed": "yes"})"), std::invalid_argument);
  CHECK_THROWS_AS(load_profile(R"({"ip_failover": "sometimes"})"), std::invalid_argument);
  CHECK_THROWS_AS(load_profile(R"({"use_alpn": "no"})"), std::invalid_argument);
  CHECK_THROWS_AS(load_profile(R"({"ech_shared": "maybe"})"), std::invalid_argument);
}

TEST_CASE("request parsing")
{
  auto r = Request::parse("HTTPS://A.Test:8443/path?q");
  CHECK(r.scheme == Scheme::https);
  CHECK(r.host.to_string() == "a.test.");
  CHECK(Request::parse("a.test").scheme == Scheme::bare);
  CHECK(Request::parse("http://a.test/").scheme == Scheme::http);
  CHECK(Request::parse("http://a.test/").to_string() == "http://a.test");
  CHECK_THROWS_AS(Request::parse("ftp://a.test"), ParseError);
  CHECK_THROWS_AS(Request::parse("https:///x"), ParseError);
}

TEST_CASE("plain and bare requests")
{
  std::vector<std::string> zone = {"a.test. HTTPS 1 . alpn=h2", "a.test. A 1.2.3.4"};
  for (auto url : {"a.test", "http://a.test"})
  {
    auto s = plan("safari", zone, url);
    REQUIRE(s.attempts.size() == 1);
    CHECK(s.attempts[0].transport == Transport::plain_http);
    CHECK(s.attempts[0].port == 80);

    auto c = plan("chrome", zone, url);
    REQUIRE(c.attempts.size() == 1);
    CHECK(c.attempts[0].transport == Transport::tls);
    CHECK(c.attempts[0].port == 443);
  }

  auto none = plan("chrome", {"a.test. A 1.2.3.4"}, "a.test");
  CHECK(none.attempts[0].transport == Transport::plain_http);
  auto https = plan("chrome", {"a.test. A 1.2.3.4"});
  CHECK(https.attempts[0].transport == Transport::tls);
  CHECK(https.attempts[0].alpn == std::vector<std::string>{"h2", "http/1.1"});
}

TEST_CASE("offered ALPN")
{
  auto p = plan("rfc", {"a.test. HTTPS 1 . alpn=h3,h2", "a.test. A 1.2.3.4"});
  CHECK(p.attempts[0].alpn == std::vector<std::string>{"h3", "h2", "http/1.1"});
  p = plan("rfc", {"a.test. HTTPS 1 . alpn=h2 no-default-alpn", "a.test. A 1.2.3.4"});
  CHECK(p.attempts[0].alpn == std::vector<std::string>{"h2"});
  p = plan("rfc", {"a.test. HTTPS 1 . port=443", "a.test. A 1.2.3.4"});
  CHECK(p.attempts[0].alpn == std::vector<std::string>{"http/1.1"});

  auto f = plan("firefox", {"a.test. HTTPS 1 . alpn=h3", "a.test. A 1.2.3.4"});
  CHECK(f.attempts[0].has_annotation("h2_probe"));
  auto c = plan("chrome", {"a.test. HTTPS 1 . alpn=h3", "a.test. A 1.2.3.4"});
  CHECK_FALSE(c.attempts[0].has_annotation("h2_probe"));
}

TEST_CASE("chrome disregards an RRset without alpn")
{
  auto c = plan("chrome", {"a.test. HTTPS 1 b.test. port=8443", "a.test. A 1.2.3.4"});
  REQUIRE(c.attempts.size() == 1);
  CHECK(c.attempts[0].alpn == std::vector<std::string>{"h2", "http/1.1"});
  auto f = plan("firefox", {"a.test. HTTPS 1 b.test. port=8443", "b.test. A 1.2.3.4"});
  REQUIRE(f.attempts.size() == 1);
  CHECK(f.attempts[0].port == 8443);
  CHECK(f.attempts[0].host.to_string() == "b.test.");
}

TEST_CASE("service target without addresses")
{
  auto p = plan("safari", {"a.test. HTTPS 1 b.test. alpn=h2", "a.test. A 1.2.3.4"});
  CHECK(p.attempts.empty());
  REQUIRE(p.terminal);
  CHECK(p.terminal->reason == fail_reason::no_address_target);

  auto c = plan("chrome", {"a.test. HTTPS 1 b.test. alpn=h2", "a.test. A 1.2.3.4"});
  REQUIRE(c.attempts.size() == 1);
  CHECK(c.attempts[0].host.to_string() == "a.test.");
}

TEST_CASE("rfc profile uses hints only when address records are absent")
{
  auto p = plan("rfc", {"a.test. HTTPS 1 . alpn=h2 ipv4hint=5.5.5.5", "a.test. A 1.2.3.4"});
  REQUIRE(p.attempts.size() == 1);
  CHECK(ip(p.attempts[0]) == "1.2.3.4");
  CHECK(p.endpoints[0].candidates.size() == 1);

  auto h = plan("rfc", {"a.test. HTTPS 1 . alpn=h2 ipv4hint=5.5.5.5"});
  REQUIRE(h.attempts.size() == 1);
  CHECK(ip(h.attempts[0]) == "5.5.5.5");
  CHECK(h.attempts[0].ip_source == IpSource::hint);
}

TEST_CASE("rfc endpoint failover")
{
  auto p = plan(
    "rfc",
    {"a.test. HTTPS 1 b.test. alpn=h2", "a.test. HTTPS 2 c.test. alpn=h2", "b.test. A 10.0.0.1",
     "c.test. A 10.0.0.2"});
  REQUIRE(p.endpoints.size() == 2);
  CHECK(ip(p.attempts[0]) == "10.0.0.1");
  auto next = advance(p, result(p, Outcome::alpn_mismatch));
  REQUIRE(next.attempts.size() == 2);
  CHECK(ip(next.attempts[1]) == "10.0.0.2");
  CHECK(next.attempts[1].has_annotation("endpoint_failover"));
  auto last = advance(next, result(next, Outcome::ip_unreachable));
  REQUIRE(last.terminal);
  CHECK(last.terminal->reason == fail_reason::unreachable);
}

TEST_CASE("ECH shared mode and retry")
{
  std::vector<std::string> zone = {
    "a.test. HTTPS 1 . alpn=h2 " + ech_param("a.test", 4),
    "a.test. A 1.2.3.4",
  };
  for (auto name : {"chrome", "firefox", "rfc"})
  {
    CAPTURE(name);
    auto p = plan(name, zone);
    REQUIRE(p.attempts.size() == 1);
    const auto& a = p.attempts[0];
    CHECK(a.ech_mode == EchMode::shared);
    REQUIRE(a.ech_key);
    CHECK(a.ech_key->config_id == 4);
    REQUIRE(a.inner_sni);
    CHECK(a.inner_sni->to_string() == "a.test.");

    auto rotated = parse_ech_config_list(synthetic_ech_config_list("a.test", 5, "rotated"));
    AttemptResult r = result(p, Outcome::ech_rejected_with_retry);
    r.retry_configs = rotated;
    auto next = advance(p, r);
    REQUIRE(next.attempts.size() == 2);
    CHECK(next.attempts[1].ech_mode == EchMode::retry_pending);
    CHECK(next.attempts[1].ech_key == primary_identity(rotated));
    CHECK(next.attempts[1].has_annotation("ech_retry"));
    CHECK(next.attempts[1].ip == a.ip);

    AttemptResult again = result(next, Outcome::ech_rejected_with_retry);
    again.retry_configs = rotated;
    auto done = advance(next, again);
    REQUIRE(done.terminal);
    CHECK(done.terminal->reason == fail_reason::ech_retry_rejected);
  }

  auto s = plan("safari", zone);
  CHECK(s.attempts[0].ech_mode == EchMode::off);
  CHECK(s.attempts[0].sni.to_string() == "a.test.");
}

TEST_CASE("ECH rejection without retry configs falls back to plain TLS once")
{
  auto p = plan("rfc", {"a.test. HTTPS 1 . alpn=h2 " + ech_param("a.test"), "a.test. A 1.2.3.4"});
  auto next = advance(p, result(p, Outcome::ech_rejected_terminal));
  REQUIRE(next.attempts.size() == 2);
  CHECK(next.attempts[1].ech_mode == EchMode::off);
  CHECK(next.attempts[1].sni.to_string() == "a.test.");
  CHECK(next.attempts[1].has_annotation("plain_tls_fallback"));
  CHECK_THROWS_AS(advance(next, result(next, Outcome::ech_rejected_terminal)), ContractViolation);
}

TEST_CASE("split mode: browsers misdirect, rfc follows the client-facing server")
{
  Rng rng(77);
  for (int round = 0; round < 200; ++round)
  {
    auto owner_ip = random_v4(rng);
    auto facing_ip = random_v4(rng);
    if (owner_ip == facing_ip)
      continue;
    std::vector<std::string> zone = {
      "a.test. HTTPS 1 . alpn=h2 " + ech_param("cover.test", std::uint8_t(round)),
      "a.test. A " + owner_ip.to_string(),
      "cover.test. A " + facing_ip.to_string(),
    };
    for (const auto& [name, profile] : builtin_profiles())
    {
      if (!profile.ech_shared)
        continue;
      CAPTURE(name);
      auto p = plan(name, zone);
      REQUIRE(p.attempts.size() == 1);
      const auto& a = p.attempts[0];
      CHECK(a.sni.to_string() == "cover.test.");
      if (name == "rfc")
      {
        CHECK(ip(a) == facing_ip.to_string());
        CHECK(a.ech_mode == EchMode::split);
        continue;
      }
      CHECK(ip(a) == owner_ip.to_string());
      CHECK(a.ech_mode == EchMode::split_misdirected);
      auto done = advance(p, result(p, Outcome::tls_cert_invalid));
      REQUIRE(done.terminal);
      CHECK(done.terminal->reason == fail_reason::ech_fallback_cert);
    }
  }
}

TEST_CASE("alias chains are bounded")
{
  for (auto name : {"rfc", "safari"})
  {
    CAPTURE(name);
    auto self = plan(name, {"a.test. HTTPS 0 a.test.", "a.test. A 1.2.3.4"});
    REQUIRE(self.terminal);
    CHECK(self.terminal->reason == fail_reason::alias_loop);

    auto dot = plan(name, {"a.test. HTTPS 0 .", "a.test. A 1.2.3.4"});
    REQUIRE(dot.terminal);
    CHECK(dot.terminal->reason == fail_reason::alias_loop);

    auto cycle = plan(name, {"a.test. HTTPS 0 b.test.", "b.test. HTTPS 0 a.test.", "b.test. A 1.2.3.4"});
    REQUIRE(cycle.terminal);
    CHECK(cycle.terminal->reason == fail_reason::alias_loop);

    for (std::size_t hops = 1; hops <= 12; ++hops)
    {
      CAPTURE(hops);
      std::vector<std::string> zone;
      auto host = [](std::size_t i) { return i == 0 ? std::string("a.test.") : fmt::format("n{}.test.", i); };
      for (std::size_t i = 0; i < hops; ++i)
        zone.push_back(host(i) + " HTTPS 0 " + host(i + 1));
      zone.push_back(host(hops) + " A 10.9.8.7");
      auto p = plan(name, zone);
      if (hops <= 8)
      {
        REQUIRE(p.attempts.size() == 1);
        CHECK(ip(p.attempts[0]) == "10.9.8.7");
      }
      else
      {
        REQUIRE(p.terminal);
        CHECK(p.terminal->reason == fail_reason::alias_loop);
      }
    }
  }
}

TEST_CASE("advance contract violations")
{
  auto p = plan("rfc", {"a.test. HTTPS 1 . alpn=h2", "a.test. A 1.2.3.4"});
  AttemptResult wrong = result(p, Outcome::connected);
  wrong.attempt_index = 3;
  CHECK_THROWS_AS(advance(p, wrong), ContractViolation);
  CHECK_THROWS_AS(advance(p, result(p, Outcome::ech_rejected_with_retry)), ContractViolation);
  CHECK_THROWS_AS(advance(p, result(p, Outcome::ech_rejected_terminal)), ContractViolation);

  auto done = advance(p, result(p, Outcome::connected));
  CHECK_THROWS_AS(advance(done, result(done, Outcome::connected)), ContractViolation);

  auto failed = plan("chrome", {"a.test. HTTPS 0 b.test."});
  REQUIRE(failed.terminal);
  AttemptResult r;
  CHECK_THROWS_AS(advance(failed, r), ContractViolation);
}

namespace
{
  std::vector<std::string> random_zone(Rng& rng)
  {
    std::vector<std::string> zone;
    std::vector<std::string> hosts = {"a.test.", "b.test.", "cover.test."};
    for (const auto& h : hosts)
    {
      auto n = pick(rng, 0, 2);
      for (std::size_t i = 0; i < n; ++i)
        zone.push_back(h + " A " + random_v4(rng).to_string());
    }
    auto records = pick(rng, 0, 3);
    for (std::size_t i = 0; i < records; ++i)
    {
      std::string line = "a.test. HTTPS " + std::to_string(pick(rng, 1, 3));
      line += coin(rng) ? " ." : " b.test.";
      if (coin(rng, 0.7))
        line += coin(rng) ? " alpn=h2" : " alpn=h3";
      if (coin(rng, 0.4))
        line += " port=" + std::to_string(pick(rng, 444, 9000));
      if (coin(rng, 0.5))
        line += " ipv4hint=" + random_v4(rng).to_string() + "," + random_v4(rng).to_string();
      if (coin(rng, 0.3))
        line += " " + ech_param(coin(rng) ? "a.test" : "cover.test", std::uint8_t(pick(rng, 0, 255)));
      else if (coin(rng, 0.1))
        line += " ech=" + base64_encode(corrupt_ech_lengths(synthetic_ech_config_list("x.test", 1, "x")));
      zone.push_back(line);
    }
    if (coin(rng, 0.1))
      zone.push_back("a.test. HTTPS 0 b.test.");
    return zone;
  }

  Responder random_responder(std::uint64_t seed)
  {
    return [seed](const ConnectionPlan& p) {
      Rng rng(seed + p.attempts.size());
      static const Outcome outcomes[] = {
        Outcome::connected,       Outcome::port_refused,          Outcome::ip_unreachable,
        Outcome::tls_cert_invalid, Outcome::ech_rejected_with_retry, Outcome::ech_rejected_terminal,
        Outcome::alpn_mismatch,
      };
      const auto& last = p.attempts.back();
      Outcome o;
      do
      {
        o = outcomes[pick(rng, 0, std::size(outcomes) - 1)];
      } while (last.ech_mode == EchMode::off &&
               (o == Outcome::ech_rejected_with_retry || o == Outcome::ech_rejected_terminal));
      if (p.ech_fallback_used && o == Outcome::ech_rejected_terminal)
        o = Outcome::connected;
      auto r = result(p, o);
      if (o == Outcome::ech_rejected_with_retry)
        r.retry_configs = parse_ech_config_list(synthetic_ech_config_list("a.test", 99, "retry"));
      return r;
    };
  }
}

TEST_CASE("plans and transitions are deterministic")
{
  Rng rng(2024);
  for (int round = 0; round < 500; ++round)
  {
    auto zone = random_zone(rng);
    auto seed = rng();
    for (const auto& [name, profile] : builtin_profiles())
    {
      auto first = drive(plan(name, zone), random_responder(seed));
      auto second = drive(plan(name, zone), random_responder(seed));
      CHECK(first == second);
    }
  }
}

TEST_CASE("each transition changes one axis")
{
  Rng rng(99);
  for (int round = 0; round < 500; ++round)
  {
    auto zone = random_zone(rng);
    auto seed = rng();
    for (const auto& [name, profile] : builtin_profiles())
    {
      auto done = drive(plan(name, zone), random_responder(seed));
      for (std::size_t i = 1; i < done.attempts.size(); ++i)
      {
        const auto& a = done.attempts[i - 1];
        const auto& b = done.attempts[i];
        CHECK(b.index == i);
        if (b.has_annotation("endpoint_failover"))
          continue;
        int axes = int(a.port != b.port) + int(a.ip != b.ip) +
          int(a.ech_mode != b.ech_mode || a.ech_key != b.ech_key || a.sni != b.sni);
        CAPTURE(name);
        CHECK(axes == 1);
        CHECK(a.alpn == b.alpn);
        CHECK(a.host == b.host);
      }
    }
  }
}

TEST_CASE("rfc first attempt targets a minimum-priority endpoint")
{
  Rng rng(4242);
  for (int round = 0; round < 300; ++round)
  {
    auto n = pick(rng, 1, 4);
    std::vector<std::string> records;
    std::vector<std::uint16_t> priorities;
    for (std::size_t i = 0; i < n; ++i)
    {
      auto prio = std::uint16_t(pick(rng, 1, 4));
      priorities.push_back(prio);
      records.push_back(fmt::format("a.test. HTTPS {} . alpn=h2 port={}", prio, 1000 + i));
    }
    auto min_prio = *std::min_element(priorities.begin(), priorities.end());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    do
    {
      std::vector<std::string> zone = {"a.test. A 1.2.3.4"};
      for (auto i : order)
        zone.push_back(records[i]);
      auto p = plan("rfc", zone);
      REQUIRE(p.attempts.size() == 1);
      auto chosen = p.attempts[0].port - 1000;
      REQUIRE(chosen < n);
      CHECK(priorities[chosen] == min_prio);
    } while (std::next_permutation(order.begin(), order.end()));
  }
}
