// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/simnet.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <json.hpp>

namespace httpsrr
{
  using ojson = nlohmann::ordered_json;

  bool EndpointSpec::covers(const DomainName& sni) const
  {
    for (const auto& name : cert_names)
    {
      if (name == sni)
        return true;
      const auto& labels = name.labels();
      if (!labels.empty() && labels.front() == "*" && !sni.is_root() && sni.parent() == name.parent())
        return true;
    }
    return false;
  }

  namespace
  {
    std::optional<std::string> negotiate(const std::vector<std::string>& offered, const EndpointSpec& ep)
    {
      for (const auto& id : offered)
      {
        if (std::find(ep.alpns.begin(), ep.alpns.end(), id) != ep.alpns.end())
          return id;
      }
      return std::nullopt;
    }

    AttemptResult finish_tls(AttemptResult r, const Attempt& a, const EndpointSpec& ep, bool cert_ok)
    {
      auto alpn = negotiate(a.alpn, ep);
      if (!alpn)
      {
        r.outcome = Outcome::alpn_mismatch;
        return r;
      }
      if (!cert_ok)
      {
        r.outcome = Outcome::tls_cert_invalid;
        return r;
      }
      r.outcome = Outcome::connected;
      r.alpn = *alpn;
      return r;
    }
  }

  AttemptResult handshake(const std::vector<EndpointSpec>& endpoints, const Attempt& attempt)
  {
    AttemptResult r;
    r.attempt_index = attempt.index;

    auto it = std::find_if(endpoints.begin(), endpoints.end(), [&](const EndpointSpec& ep) {
      return std::find(ep.ips.begin(), ep.ips.end(), attempt.ip) != ep.ips.end();
    });
    if (it == endpoints.end())
    {
      r.outcome = Outcome::ip_unreachable;
      return r;
    }
    const auto& ep = *it;
    if (std::find(ep.open_ports.begin(), ep.open_ports.end(), attempt.port) == ep.open_ports.end())
    {
      r.outcome = Outcome::port_refused;
      return r;
    }
    if (attempt.transport == Transport::plain_http)
    {
      r.outcome = Outcome::connected;
      r.alpn = "http/1.1";
      return r;
    }

    if (attempt.ech_mode != EchMode::off)
    {
      if (ep.ech && attempt.ech_key && attempt.inner_sni)
      {
        const auto& accepts = ep.ech->accepts;
        if (std::find(accepts.begin(), accepts.end(), *attempt.ech_key) != accepts.end())
        {
          const auto& backends = ep.ech->backends;
          bool cert_ok = ep.covers(*attempt.inner_sni) ||
            std::find(backends.begin(), backends.end(), *attempt.inner_sni) != backends.end();
          return finish_tls(r, attempt, ep, cert_ok);
        }
        if (ep.ech->retry_configs)
        {
          r.outcome = Outcome::ech_rejected_with_retry;
          r.retry_configs = parse_ech_config_list(*ep.ech->retry_configs);
          return r;
        }
      }
      r.outcome = ep.covers(attempt.sni) ? Outcome::ech_rejected_terminal : Outcome::tls_cert_invalid;
      return r;
    }

    return finish_tls(r, attempt, ep, ep.covers(attempt.sni));
  }

  std::string terminal_text(const Terminal& t)
  {
    return t.ok() ? "success" : "hard_fail: " + t.reason;
  }

  Transcript run_scenario(const Scenario& s, const PolicyProfile& profile)
  {
    Transcript t;
    t.scenario = s.id;
    t.profile = profile.name;
    auto zone = ZoneStore::from_lines(s.zone);
    auto plan = build_plan(Request::parse(s.request), profile, make_view(zone));
    while (!plan.terminal)
    {
      if (plan.attempts.size() > max_scenario_attempts)
      {
        plan.terminal = Terminal{Terminal::Kind::hard_fail, "attempt limit", ""};
        break;
      }
      auto r = handshake(s.endpoints, plan.attempts.back());
      t.results.push_back(r);
      plan = advance(plan, r);
    }
    t.queries = plan.queries;
    t.attempts = plan.attempts;
    t.terminal = *plan.terminal;
    return t;
  }

  namespace
  {
    std::string query_text(const DnsQuery& q)
    {
      return q.name.to_string() + " " + q.qtype;
    }

    DnsQuery query_from_text(const std::string& text)
    {
      auto sp = text.rfind(' ');
      if (sp == std::string::npos)
        throw std::invalid_argument(fmt::format("query '{}' needs 'name type'", text));
      return DnsQuery{DomainName::parse(text.substr(0, sp)), text.substr(sp + 1)};
    }

    bool was_queried(const Transcript& t, const DnsQuery& q)
    {
      return std::find(t.queries.begin(), t.queries.end(), q) != t.queries.end();
    }
  }

  std::vector<std::string> check_expectation(const Transcript& t, const Expectation& e)
  {
    std::vector<std::string> out;
    auto got_terminal = terminal_text(t.terminal);
    if (got_terminal != e.terminal)
      out.push_back(fmt::format("terminal '{}', want '{}'", got_terminal, e.terminal));
    if (e.attempts && t.attempts.size() != *e.attempts)
      out.push_back(fmt::format("{} attempts, want {}", t.attempts.size(), *e.attempts));

    const Attempt* first = t.attempts.empty() ? nullptr : &t.attempts.front();
    const Attempt* last = t.attempts.empty() ? nullptr : &t.attempts.back();
    if (e.first_ip && (!first || to_string(first->ip) != *e.first_ip))
      out.push_back(fmt::format("first ip {}, want {}", first ? to_string(first->ip) : "-", *e.first_ip));
    if (e.first_port && (!first || first->port != *e.first_port))
      out.push_back(fmt::format("first port {}, want {}", first ? first->port : 0, *e.first_port));
    if (e.first_transport && (!first || first->transport != *e.first_transport))
    {
      out.push_back(fmt::format(
        "first transport {}, want {}", first ? to_string(first->transport) : "-", to_string(*e.first_transport)));
    }
    if (e.alpn && t.terminal.alpn != *e.alpn)
      out.push_back(fmt::format("alpn '{}', want '{}'", t.terminal.alpn, *e.alpn));
    if (e.final_ech && (!last || last->ech_mode != *e.final_ech))
    {
      out.push_back(fmt::format(
        "final ech {}, want {}", last ? to_string(last->ech_mode) : "-", to_string(*e.final_ech)));
    }
    for (const auto& a : e.annotations)
    {
      bool seen = std::any_of(t.attempts.begin(), t.attempts.end(), [&](const Attempt& at) {
        return at.has_annotation(a);
      });
      if (!seen)
        out.push_back(fmt::format("missing annotation {}", a));
    }
    for (const auto& q : e.queried)
    {
      if (!was_queried(t, q))
        out.push_back(fmt::format("missing query {}", query_text(q)));
    }
    for (const auto& q : e.not_queried)
    {
      if (was_queried(t, q))
        out.push_back(fmt::format("unexpected query {}", query_text(q)));
    }
    return out;
  }

  namespace
  {
    ojson attempt_json(const Attempt& a)
    {
      ojson j;
      j["index"] = a.index;
      j["transport"] = to_string(a.transport);
      j["host"] = a.host.to_string();
      j["sni"] = a.sni.to_string();
      if (a.inner_sni)
        j["inner_sni"] = a.inner_sni->to_string();
      j["ip"] = to_string(a.ip);
      j["ip_source"] = to_string(a.ip_source);
      j["port"] = a.port;
      j["alpn"] = a.alpn;
      j["ech_mode"] = to_string(a.ech_mode);
      if (a.ech_key)
        j["ech_key"] = a.ech_key->to_string();
      j["annotations"] = a.annotations;
      return j;
    }

    template <typename E, std::size_t N>
    E enum_value(const std::string& text, const E (&values)[N])
    {
      for (auto v : values)
      {
        if (to_string(v) == text)
          return v;
      }
      throw std::invalid_argument(fmt::format("unknown value '{}'", text));
    }

    IpAddress ip_value(const std::string& text)
    {
      auto ip = parse_ip(text);
      if (!ip)
        throw std::invalid_argument(fmt::format("bad address '{}'", text));
      return *ip;
    }

    ojson expectation_json(const Expectation& e)
    {
      ojson j;
      j["terminal"] = e.terminal;
      if (e.attempts)
        j["attempts"] = *e.attempts;
      if (e.first_ip)
        j["first_ip"] = *e.first_ip;
      if (e.first_port)
        j["first_port"] = *e.first_port;
      if (e.first_transport)
        j["first_transport"] = to_string(*e.first_transport);
      if (e.alpn)
        j["alpn"] = *e.alpn;
      if (e.final_ech)
        j["final_ech"] = to_string(*e.final_ech);
      if (!e.annotations.empty())
        j["annotations"] = e.annotations;
      auto queries = [](const std::vector<DnsQuery>& qs) {
        std::vector<std::string> out;
        for (const auto& q : qs)
          out.push_back(query_text(q));
        return out;
      };
      if (!e.queried.empty())
        j["queried"] = queries(e.queried);
      if (!e.not_queried.empty())
        j["not_queried"] = queries(e.not_queried);
      return j;
    }

    Expectation expectation_from(const nlohmann::json& j)
    {
      static const char* known[] = {
        "terminal", "attempts", "first_ip", "first_port", "first_transport", "alpn",
        "final_ech", "annotations", "queried", "not_queried"};
      for (auto& [key, v] : j.items())
      {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
          throw std::invalid_argument(fmt::format("unknown expectation key '{}'", key));
      }
      Expectation e;
      e.terminal = j.at("terminal").get<std::string>();
      if (j.contains("attempts"))
        e.attempts = j["attempts"].get<std::size_t>();
      if (j.contains("first_ip"))
        e.first_ip = j["first_ip"].get<std::string>();
      if (j.contains("first_port"))
        e.first_port = j["first_port"].get<std::uint16_t>();
      if (j.contains("first_transport"))
        e.first_transport = enum_value(j["first_transport"].get<std::string>(), {Transport::tls, Transport::plain_http});
      if (j.contains("alpn"))
        e.alpn = j["alpn"].get<std::string>();
      if (j.contains("final_ech"))
      {
        e.final_ech = enum_value(
          j["final_ech"].get<std::string>(),
          {EchMode::off, EchMode::shared, EchMode::split, EchMode::split_misdirected, EchMode::retry_pending});
      }
      if (j.contains("annotations"))
        e.annotations = j["annotations"].get<std::vector<std::string>>();
      for (const auto& q : j.value("queried", std::vector<std::string>{}))
        e.queried.push_back(query_from_text(q));
      for (const auto& q : j.value("not_queried", std::vector<std::string>{}))
        e.not_queried.push_back(query_from_text(q));
      return e;
    }
  }

  std::string Transcript::to_json() const
  {
    ojson j;
    j["scenario"] = scenario;
    j["profile"] = profile;
    std::vector<std::string> qs;
    for (const auto& q : queries)
      qs.push_back(query_text(q));
    j["queries"] = qs;
    j["attempts"] = ojson::array();
    for (std::size_t i = 0; i < attempts.size(); ++i)
    {
      auto a = attempt_json(attempts[i]);
      if (i < results.size())
      {
        a["outcome"] = to_string(results[i].outcome);
        if (!results[i].alpn.empty())
          a["negotiated_alpn"] = results[i].alpn;
      }
      j["attempts"].push_back(a);
    }
    j["terminal"] = terminal_text(terminal);
    if (terminal.ok())
      j["alpn"] = terminal.alpn;
    return j.dump();
  }

  std::string scenario_to_json(const Scenario& s)
  {
    ojson j;
    j["id"] = s.id;
    j["description"] = s.description;
    j["request"] = s.request;
    j["zone"] = s.zone;
    j["endpoints"] = ojson::array();
    for (const auto& ep : s.endpoints)
    {
      ojson e;
      e["label"] = ep.label;
      std::vector<std::string> ips;
      for (const auto& ip : ep.ips)
        ips.push_back(to_string(ip));
      e["ips"] = ips;
      e["ports"] = ep.open_ports;
      e["alpn"] = ep.alpns;
      std::vector<std::string> certs;
      for (const auto& c : ep.cert_names)
        certs.push_back(c.to_string());
      e["certs"] = certs;
      if (ep.ech)
      {
        ojson ech;
        std::vector<std::string> ids;
        for (const auto& id : ep.ech->accepts)
          ids.push_back(id.to_string());
        ech["accepts"] = ids;
        if (ep.ech->retry_configs)
          ech["retry_configs"] = base64_encode(*ep.ech->retry_configs);
        std::vector<std::string> backends;
        for (const auto& b : ep.ech->backends)
          backends.push_back(b.to_string());
        ech["backends"] = backends;
        e["ech"] = ech;
      }
      j["endpoints"].push_back(e);
    }
    j["expected"] = ojson::object();
    for (const auto& [profile, e] : s.expected)
      j["expected"][profile] = expectation_json(e);
    return j.dump(2);
  }

  Scenario scenario_from_json(std::string_view text)
  {
    auto j = nlohmann::json::parse(text);
    Scenario s;
    s.id = j.at("id").get<std::string>();
    s.description = j.value("description", "");
    s.request = j.at("request").get<std::string>();
    s.zone = j.at("zone").get<std::vector<std::string>>();
    for (const auto& line : s.zone)
      parse_rr_line(line);
    auto endpoints = j.value("endpoints", nlohmann::json::array());
    for (const auto& e : endpoints)
    {
      EndpointSpec ep;
      ep.label = e.value("label", "");
      for (const auto& ip : e.at("ips"))
        ep.ips.push_back(ip_value(ip.get<std::string>()));
      ep.open_ports = e.at("ports").get<std::vector<std::uint16_t>>();
      ep.alpns = e.value("alpn", std::vector<std::string>{});
      for (const auto& c : e.value("certs", std::vector<std::string>{}))
        ep.cert_names.push_back(DomainName::parse(c));
      if (e.contains("ech"))
      {
        const auto& ech = e["ech"];
        EchEndpoint spec;
        for (const auto& id : ech.value("accepts", std::vector<std::string>{}))
          spec.accepts.push_back(EchKeyIdentity::from_string(id));
        if (ech.contains("retry_configs"))
          spec.retry_configs = base64_decode(ech["retry_configs"].get<std::string>());
        for (const auto& b : ech.value("backends", std::vector<std::string>{}))
          spec.backends.push_back(DomainName::parse(b));
        ep.ech = std::move(spec);
      }
      s.endpoints.push_back(std::move(ep));
    }
    auto expected = j.value("expected", nlohmann::json::object());
    for (auto& [profile, e] : expected.items())
      s.expected[profile] = expectation_from(e);
    return s;
  }
}

namespace httpsrr
{
  std::vector<EndpointSpec> permissive_endpoints(const ZoneStore& zone)
  {
    std::set<IpAddress> ips;
    std::vector<DomainName> names;
    std::vector<EchKeyIdentity> keys;
    auto view = make_view(zone);
    for (const auto& [name, rec] : view.names())
    {
      names.push_back(name);
      ips.insert(rec.a.begin(), rec.a.end());
      ips.insert(rec.aaaa.begin(), rec.aaaa.end());
      for (const auto& h : rec.https)
      {
        if (auto* v4 = h.get<Ipv4HintValue>(SvcKey::ipv4hint))
          ips.insert(v4->addrs.begin(), v4->addrs.end());
        if (auto* v6 = h.get<Ipv6HintValue>(SvcKey::ipv6hint))
          ips.insert(v6->addrs.begin(), v6->addrs.end());
        if (auto* ech = h.get<EchValue>(SvcKey::ech))
        {
          try
          {
            for (const auto& cfg : parse_ech_config_list(ech->config_list).configs)
              keys.push_back(key_identity(cfg));
          }
          catch (const ParseError&)
          {
          }
        }
      }
    }
    std::vector<EndpointSpec> out;
    for (const auto& ip : ips)
    {
      EndpointSpec ep;
      ep.label = to_string(ip);
      ep.ips = {ip};
      ep.open_ports = {80, 443};
      ep.alpns = {"h2", "h3", "http/1.1"};
      ep.cert_names = names;
      if (!keys.empty())
        ep.ech = EchEndpoint{keys, std::nullopt, names};
      out.push_back(std::move(ep));
    }
    return out;
  }
}
