// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/simnet.hpp"
#include "support/generators.hpp"

#include <doctest.h>
#include <fmt/format.h>

using namespace httpsrr;
using namespace httpsrr::testgen;

namespace
{
  DomainName N(std::string_view s)
  {
    return DomainName::parse(s);
  }

  const Scenario& scenario(std::string_view id)
  {
    for (const auto& s : builtin_matrix())
    {
      if (s.id == id)
        return s;
    }
    FAIL("no such scenario");
    throw std::logic_error("unreachable");
  }
}

TEST_CASE("resolve follows CNAME chains")
{
  auto zone = ZoneStore::from_lines({
    "www.a.com. CNAME edge.cdn.net.",
    "edge.cdn.net. HTTPS 1 . alpn=h2",
    "edge.cdn.net. A 192.0.2.9",
  });
  auto r = resolve(zone, N("www.a.com"), rrtype::HTTPS);
  REQUIRE(r.answers.size() == 1);
  CHECK(r.answers[0].name == N("edge.cdn.net"));
  REQUIRE(r.cname_chain.size() == 1);
  CHECK(r.final_name(N("www.a.com")) == N("edge.cdn.net"));
  CHECK_FALSE(r.nxdomain);

  auto cname = resolve(zone, N("www.a.com"), rrtype::CNAME);
  CHECK(cname.answers.size() == 1);
  CHECK(cname.cname_chain.empty());

  auto absent = resolve(zone, N("nope.a.com"), rrtype::A);
  CHECK(absent.answers.empty());
  CHECK(absent.nxdomain);

  auto nodata = resolve(zone, N("edge.cdn.net"), rrtype::AAAA);
  CHECK(nodata.answers.empty());
  CHECK_FALSE(nodata.nxdomain);
}

TEST_CASE("resolve bounds CNAME loops")
{
  auto loop = ZoneStore::from_lines({"a.com. CNAME b.com.", "b.com. CNAME a.com."});
  CHECK_THROWS_AS(resolve(loop, N("a.com"), rrtype::A), AliasLoopError);

  std::vector<std::string> lines;
  for (std::size_t i = 0; i < max_cname_depth; ++i)
    lines.push_back(fmt::format("n{}.test. CNAME n{}.test.", i, i + 1));
  lines.push_back(fmt::format("n{}.test. A 10.0.0.1", max_cname_depth));
  auto deep = ZoneStore::from_lines(lines);
  CHECK(resolve(deep, N("n0.test"), rrtype::A).answers.size() == 1);

  lines.insert(lines.begin(), "pre.test. CNAME n0.test.");
  auto deeper = ZoneStore::from_lines(lines);
  CHECK_THROWS_AS(resolve(deeper, N("pre.test"), rrtype::A), AliasLoopError);
}

TEST_CASE("random zones never recurse without bound")
{
  Rng rng(31337);
  for (int round = 0; round < 300; ++round)
  {
    ZoneStore zone;
    std::vector<std::string> names;
    for (int i = 0; i < 6; ++i)
      names.push_back(fmt::format("h{}.test.", i));
    for (const auto& n : names)
    {
      if (coin(rng, 0.6))
        zone.add_line(n + " CNAME " + names[pick(rng, 0, names.size() - 1)]);
      else if (coin(rng))
        zone.add_line(n + " A " + random_v4(rng).to_string());
    }
    for (const auto& n : names)
    {
      try
      {
        auto r = resolve(zone, N(n), rrtype::A);
        CHECK(r.cname_chain.size() <= max_cname_depth);
      }
      catch (const AliasLoopError&)
      {
      }
    }
    make_view(zone);
  }
}

TEST_CASE("CNAME exclusivity")
{
  ZoneStore strict;
  strict.add_line("a.com. CNAME b.com.");
  CHECK_THROWS_AS(strict.add_line("a.com. A 1.2.3.4"), ContractViolation);
  CHECK_THROWS_AS(strict.add_line("a.com. CNAME c.com."), ContractViolation);
  ZoneStore other;
  other.add_line("a.com. A 1.2.3.4");
  CHECK_THROWS_AS(other.add_line("a.com. CNAME b.com."), ContractViolation);

  ZoneStore lax(true);
  lax.add_line("a.com. CNAME b.com.");
  lax.add_line("a.com. HTTPS 1 . alpn=h2");
  CHECK(resolve(lax, N("a.com"), rrtype::HTTPS).answers.size() == 1);
}

TEST_CASE("AD flag is scripted per name")
{
  auto zone = ZoneStore::from_lines({"a.com. HTTPS 1 . alpn=h2", "www.a.com. CNAME a.com."});
  zone.set_flags(N("a.com"), {true, true});
  CHECK(resolve(zone, N("a.com"), rrtype::HTTPS).ad);
  CHECK_FALSE(resolve(zone, N("www.a.com"), rrtype::HTTPS).ad);
  zone.set_flags(N("www.a.com"), {false, true});
  CHECK(resolve(zone, N("www.a.com"), rrtype::HTTPS).ad);
}

TEST_CASE("handshake rules")
{
  EndpointSpec ep;
  ep.ips = {*parse_ip("1.2.3.4")};
  ep.open_ports = {443};
  ep.alpns = {"h2"};
  ep.cert_names = {N("a.com"), N("*.b.com")};

  Attempt a;
  a.ip = *parse_ip("1.2.3.4");
  a.port = 443;
  a.sni = N("a.com");
  a.alpn = {"h3", "h2"};
  auto r = handshake({ep}, a);
  CHECK(r.outcome == Outcome::connected);
  CHECK(r.alpn == "h2");

  a.port = 8443;
  CHECK(handshake({ep}, a).outcome == Outcome::port_refused);
  a.port = 443;

  a.ip = *parse_ip("9.9.9.9");
  CHECK(handshake({ep}, a).outcome == Outcome::ip_unreachable);
  a.ip = *parse_ip("1.2.3.4");

  a.alpn = {"h3"};
  CHECK(handshake({ep}, a).outcome == Outcome::alpn_mismatch);
  a.alpn = {"h2"};

  a.sni = N("www.b.com");
  CHECK(handshake({ep}, a).outcome == Outcome::connected);
  a.sni = N("x.y.b.com");
  CHECK(handshake({ep}, a).outcome == Outcome::tls_cert_invalid);

  a.transport = Transport::plain_http;
  a.port = 80;
  ep.open_ports.push_back(80);
  CHECK(handshake({ep}, a).outcome == Outcome::connected);
}

TEST_CASE("ECH handshake rules")
{
  auto current = synthetic_ech_config_list("cover.a.com", 1, "one");
  auto stale = synthetic_ech_config_list("cover.a.com", 2, "two");
  auto current_id = primary_identity(parse_ech_config_list(current));
  auto stale_id = primary_identity(parse_ech_config_list(stale));

  EndpointSpec ep;
  ep.ips = {*parse_ip("2.2.2.2")};
  ep.open_ports = {443};
  ep.alpns = {"h2"};
  ep.cert_names = {N("a.com"), N("cover.a.com")};
  ep.ech = EchEndpoint{{current_id}, current, {}};

  Attempt a;
  a.ip = *parse_ip("2.2.2.2");
  a.sni = N("cover.a.com");
  a.inner_sni = N("a.com");
  a.alpn = {"h2"};
  a.ech_mode = EchMode::shared;
  a.ech_key = current_id;
  CHECK(handshake({ep}, a).outcome == Outcome::connected);

  a.ech_key = stale_id;
  auto retry = handshake({ep}, a);
  CHECK(retry.outcome == Outcome::ech_rejected_with_retry);
  REQUIRE(retry.retry_configs);
  CHECK(primary_identity(*retry.retry_configs) == current_id);

  ep.ech->retry_configs.reset();
  CHECK(handshake({ep}, a).outcome == Outcome::ech_rejected_terminal);

  ep.ech.reset();
  CHECK(handshake({ep}, a).outcome == Outcome::ech_rejected_terminal);
  a.sni = N("elsewhere.net");
  a.ech_mode = EchMode::split_misdirected;
  CHECK(handshake({ep}, a).outcome == Outcome::tls_cert_invalid);
}

TEST_CASE("scenario examples")
{
  auto chrome = run_scenario(scenario("util-bare"), builtin_profile("chrome"));
  CHECK(chrome.terminal.ok());
  CHECK(chrome.attempts.front().transport == Transport::tls);

  auto safari = run_scenario(scenario("util-bare"), builtin_profile("safari"));
  CHECK(safari.terminal.ok());
  CHECK(safari.attempts.front().transport == Transport::plain_http);

  auto firefox = run_scenario(scenario("ech-split"), builtin_profile("firefox"));
  CHECK(terminal_text(firefox.terminal) == "hard_fail: ECH fallback certificate invalid");

  auto h3 = run_scenario(scenario("alpn-h3"), builtin_profile("firefox"));
  CHECK(h3.attempts.front().has_annotation("h2_probe"));

  for (auto name : {"chrome", "edge", "firefox"})
  {
    auto t = run_scenario(scenario("ech-unilateral"), builtin_profile(name));
    CHECK(t.terminal.ok());
    CHECK(t.attempts.back().ech_mode == EchMode::off);
  }
}

TEST_CASE("builtin matrix reproduces the browser tables")
{
  CHECK(builtin_matrix().size() >= 14);
  std::set<std::string> ids;
  for (const auto& s : builtin_matrix())
  {
    CHECK(ids.insert(s.id).second);
    CHECK(s.expected.size() == builtin_profiles().size());
  }

  auto report = run_conformance(builtin_matrix());
  for (const auto& f : report.expectation_failures)
    CAPTURE(f);
  for (const auto& f : report.cell_mismatches)
    CAPTURE(f);
  CHECK(report.expectation_failures.empty());
  CHECK(report.cell_mismatches.empty());
  REQUIRE(report.rr_table);
  REQUIRE(report.ech_table);
  CHECK(report.rr_table->cells == reference_rr_table().cells);
  CHECK(report.ech_table->cells == reference_ech_table().cells);
  CHECK(report.ok());
}

TEST_CASE("a wrong expectation is reported")
{
  auto s = scenario("alias-target");
  s.expected["chrome"].terminal = "success";
  auto report = run_conformance({s});
  CHECK_FALSE(report.expectation_failures.empty());
  CHECK_FALSE(report.rr_table);
  CHECK_FALSE(report.ok());
}

TEST_CASE("scenario documents round-trip")
{
  for (const auto& s : builtin_matrix())
  {
    CAPTURE(s.id);
    auto text = scenario_to_json(s);
    auto back = scenario_from_json(text);
    CHECK(back == s);
    CHECK(scenario_to_json(back) == text);
  }
  CHECK_THROWS(scenario_from_json(R"({"id":"x","request":"a.com","zone":["a.com. A nope"]})"));
  CHECK_THROWS(scenario_from_json(
    R"({"id":"x","request":"a.com","zone":[],"expected":{"rfc":{"terminal":"success","bogus":1}}})"));
}

TEST_CASE("runs are deterministic")
{
  for (const auto& s : builtin_matrix())
  {
    for (const auto& [name, profile] : builtin_profiles())
    {
      auto a = run_scenario(s, profile);
      auto b = run_scenario(s, profile);
      CHECK(a == b);
      CHECK(a.to_json() == b.to_json());
    }
  }
}
