// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/simnet.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace httpsrr
{
  namespace
  {
    const std::vector<std::string> browsers = {"chrome", "safari", "edge", "firefox"};
    const std::vector<std::string> ech_browsers = {"chrome", "edge", "firefox"};
    const std::vector<std::string> all_profiles = {"rfc", "chrome", "edge", "safari", "firefox"};

    DnsQuery q(std::string_view name, std::string type)
    {
      return DnsQuery{DomainName::parse(name), std::move(type)};
    }

    IpAddress ip(std::string_view text)
    {
      return *parse_ip(text);
    }

    EndpointSpec server(
      std::string label, std::vector<std::string_view> ips, std::vector<std::uint16_t> ports,
      std::vector<std::string> alpns, std::vector<std::string_view> certs)
    {
      EndpointSpec ep;
      ep.label = std::move(label);
      for (auto i : ips)
        ep.ips.push_back(ip(i));
      ep.open_ports = std::move(ports);
      ep.alpns = std::move(alpns);
      for (auto c : certs)
        ep.cert_names.push_back(DomainName::parse(c));
      return ep;
    }

    Expectation ok(std::size_t attempts = 1)
    {
      Expectation e;
      e.terminal = "success";
      e.attempts = attempts;
      return e;
    }

    Expectation fail(std::string_view reason, std::size_t attempts)
    {
      Expectation e;
      e.terminal = fmt::format("hard_fail: {}", reason);
      e.attempts = attempts;
      return e;
    }

    template <typename F>
    void each(Scenario& s, const std::vector<std::string>& profiles, F f)
    {
      for (const auto& p : profiles)
        f(s.expected[p]);
    }

    struct EchKeys
    {
      Bytes cover;
      Bytes cover_rotated;
      Bytes split;
    };

    const EchKeys& ech_keys()
    {
      static const EchKeys keys{
        synthetic_ech_config_list("cover.a.com", 7, "cover.a.com/1"),
        synthetic_ech_config_list("cover.a.com", 8, "cover.a.com/2"),
        synthetic_ech_config_list("b.com", 1, "b.com/1"),
      };
      return keys;
    }

    EchKeyIdentity identity_of(const Bytes& list)
    {
      return primary_identity(parse_ech_config_list(list));
    }

    std::vector<Scenario> utilization()
    {
      std::vector<Scenario> out;
      struct Form
      {
        std::string id;
        std::string url;
      };
      for (const auto& [id, url] : std::vector<Form>{
             {"util-bare", "a.com"}, {"util-http", "http://a.com"}, {"util-https", "https://a.com"}})
      {
        Scenario s;
        s.id = id;
        s.description = fmt::format("HTTPS RR as an upgrade signal, request '{}'", url);
        s.request = url;
        s.zone = {"a.com. 60 IN HTTPS 1 . alpn=h2", "a.com. 60 IN A 1.2.3.4"};
        s.endpoints = {server("web", {"1.2.3.4"}, {80, 443}, {"h2", "http/1.1"}, {"a.com"})};
        each(s, all_profiles, [](Expectation& e) {
          e = ok();
          e.first_transport = Transport::tls;
          e.first_port = 443;
          e.alpn = "h2";
          e.queried = {q("a.com", "HTTPS"), q("a.com", "A")};
        });
        if (url != "https://a.com")
        {
          auto& e = s.expected["safari"];
          e.first_transport = Transport::plain_http;
          e.first_port = 80;
          e.alpn = "http/1.1";
        }
        out.push_back(std::move(s));
      }
      return out;
    }

    Scenario alias_target()
    {
      Scenario s;
      s.id = "alias-target";
      s.description = "AliasMode record pointing at pool.a.com, which alone has an address";
      s.request = "https://a.com";
      s.zone = {"a.com. 60 IN HTTPS 0 pool.a.com.", "pool.a.com. 60 IN A 1.2.3.4"};
      s.endpoints = {server("pool", {"1.2.3.4"}, {443}, {"h2", "http/1.1"}, {"a.com", "pool.a.com"})};
      each(s, {"rfc", "safari"}, [](Expectation& e) {
        e = ok();
        e.first_ip = "1.2.3.4";
        e.queried = {q("pool.a.com", "HTTPS"), q("pool.a.com", "A")};
      });
      each(s, {"chrome", "edge", "firefox"}, [](Expectation& e) {
        e = fail(fail_reason::no_address_owner, 0);
        e.not_queried = {q("pool.a.com", "A")};
      });
      return s;
    }

    Scenario service_target()
    {
      Scenario s;
      s.id = "service-target";
      s.description = "ServiceMode record naming pool.a.com; only that host serves the site";
      s.request = "https://a.com";
      s.zone = {
        "a.com. 60 IN HTTPS 1 pool.a.com. alpn=h2",
        "a.com. 60 IN A 1.2.3.4",
        "pool.a.com. 60 IN A 2.2.3.4",
      };
      s.endpoints = {server("pool", {"2.2.3.4"}, {443}, {"h2"}, {"a.com"})};
      each(s, {"rfc", "safari", "firefox"}, [](Expectation& e) {
        e = ok();
        e.first_ip = "2.2.3.4";
        e.queried = {q("pool.a.com", "A")};
      });
      each(s, {"chrome", "edge"}, [](Expectation& e) {
        e = fail(fail_reason::unreachable, 1);
        e.first_ip = "1.2.3.4";
        e.not_queried = {q("pool.a.com", "A")};
      });
      return s;
    }

    std::vector<Scenario> ports()
    {
      std::vector<Scenario> out;
      const std::vector<std::string> zone = {
        "a.com. 60 IN HTTPS 1 . alpn=h2 port=8443",
        "a.com. 60 IN A 1.2.3.4",
      };
      const std::vector<std::string> port_users = {"rfc", "safari", "firefox"};
      const std::vector<std::string> ignorers = {"chrome", "edge"};

      Scenario only443;
      only443.id = "port-443-only";
      only443.description = "port=8443 advertised, server listens on 443 only";
      only443.request = "https://a.com";
      only443.zone = zone;
      only443.endpoints = {server("web", {"1.2.3.4"}, {443}, {"h2"}, {"a.com"})};
      each(only443, port_users, [](Expectation& e) {
        e = ok(2);
        e.first_port = 8443;
        e.annotations = {"port_fallback"};
      });
      each(only443, ignorers, [](Expectation& e) {
        e = ok();
        e.first_port = 443;
      });
      out.push_back(only443);

      Scenario only8443;
      only8443.id = "port-8443-only";
      only8443.description = "port=8443 advertised, server listens on 8443 only";
      only8443.request = "https://a.com";
      only8443.zone = zone;
      only8443.endpoints = {server("web", {"1.2.3.4"}, {8443}, {"h2"}, {"a.com"})};
      each(only8443, port_users, [](Expectation& e) {
        e = ok();
        e.first_port = 8443;
      });
      each(only8443, ignorers, [](Expectation& e) {
        e = fail(fail_reason::port_refused, 1);
        e.first_port = 443;
      });
      out.push_back(only8443);

      Scenario both;
      both.id = "port-both";
      both.description = "port=8443 advertised, server listens on 443 and 8443";
      both.request = "https://a.com";
      both.zone = zone;
      both.endpoints = {server("web", {"1.2.3.4"}, {443, 8443}, {"h2"}, {"a.com"})};
      each(both, port_users, [](Expectation& e) {
        e = ok();
        e.first_port = 8443;
      });
      each(both, ignorers, [](Expectation& e) {
        e = ok();
        e.first_port = 443;
      });
      out.push_back(both);
      return out;
    }

    std::vector<Scenario> hints()
    {
      std::vector<Scenario> out;
      const std::vector<std::string> zone = {
        "a.com. 60 IN HTTPS 1 . alpn=h2 ipv4hint=1.2.3.4",
        "a.com. 60 IN A 2.2.3.4",
      };
      const std::vector<std::string> hint_users = {"safari", "firefox"};
      const std::vector<std::string> record_users = {"rfc", "chrome", "edge"};

      Scenario pref;
      pref.id = "iphint-preference";
      pref.description = "ipv4hint and A record disagree; both addresses serve the site";
      pref.request = "https://a.com";
      pref.zone = zone;
      pref.endpoints = {
        server("hinted", {"1.2.3.4"}, {443}, {"h2"}, {"a.com"}),
        server("recorded", {"2.2.3.4"}, {443}, {"h2"}, {"a.com"}),
      };
      each(pref, hint_users, [](Expectation& e) {
        e = ok();
        e.first_ip = "1.2.3.4";
      });
      each(pref, record_users, [](Expectation& e) {
        e = ok();
        e.first_ip = "2.2.3.4";
      });
      out.push_back(pref);

      Scenario hint_only;
      hint_only.id = "iphint-hint-only";
      hint_only.description = "only the ipv4hint address serves the site";
      hint_only.request = "https://a.com";
      hint_only.zone = zone;
      hint_only.endpoints = {server("hinted", {"1.2.3.4"}, {443}, {"h2"}, {"a.com"})};
      each(hint_only, hint_users, [](Expectation& e) {
        e = ok();
        e.first_ip = "1.2.3.4";
      });
      each(hint_only, record_users, [](Expectation& e) {
        e = fail(fail_reason::unreachable, 1);
        e.first_ip = "2.2.3.4";
      });
      out.push_back(hint_only);

      Scenario a_only;
      a_only.id = "iphint-a-only";
      a_only.description = "only the A record address serves the site";
      a_only.request = "https://a.com";
      a_only.zone = zone;
      a_only.endpoints = {server("recorded", {"2.2.3.4"}, {443}, {"h2"}, {"a.com"})};
      a_only.expected["safari"] = ok(2);
      a_only.expected["safari"].first_ip = "1.2.3.4";
      a_only.expected["safari"].annotations = {"ip_failover"};
      a_only.expected["firefox"] = ok(2);
      a_only.expected["firefox"].first_ip = "1.2.3.4";
      a_only.expected["firefox"].annotations = {"delayed"};
      each(a_only, record_users, [](Expectation& e) {
        e = ok();
        e.first_ip = "2.2.3.4";
      });
      out.push_back(a_only);
      return out;
    }

    std::vector<Scenario> alpn()
    {
      std::vector<Scenario> out;
      for (std::string proto : {"h2", "h3"})
      {
        Scenario s;
        s.id = "alpn-" + proto;
        s.description = fmt::format("server speaks {} only and advertises it", proto);
        s.request = "https://a.com";
        s.zone = {"a.com. 60 IN HTTPS 1 . alpn=" + proto, "a.com. 60 IN A 1.2.3.4"};
        s.endpoints = {server("web", {"1.2.3.4"}, {443}, {proto}, {"a.com"})};
        each(s, all_profiles, [&](Expectation& e) {
          e = ok();
          e.alpn = proto;
        });
        if (proto == "h3")
          s.expected["firefox"].annotations = {"h2_probe"};
        out.push_back(std::move(s));
      }
      return out;
    }

    std::vector<Scenario> ech()
    {
      const auto& keys = ech_keys();
      std::vector<Scenario> out;
      const std::vector<std::string> ech_clients = {"rfc", "chrome", "edge", "firefox"};
      auto shared_zone = [](const Bytes& payload) {
        return std::vector<std::string>{
          "a.com. 60 IN HTTPS 1 . alpn=h2 ech=" + base64_encode(payload),
          "a.com. 60 IN A 2.2.2.2",
          "cover.a.com. 60 IN A 2.2.2.2",
        };
      };
      auto shared_server = [] {
        return server("shared", {"2.2.2.2"}, {443}, {"h2", "http/1.1"}, {"a.com", "cover.a.com"});
      };

      Scenario shared;
      shared.id = "ech-shared";
      shared.description = "shared mode: cover.a.com and a.com on one address, key accepted";
      shared.request = "https://a.com";
      shared.zone = shared_zone(keys.cover);
      shared.endpoints = {shared_server()};
      shared.endpoints[0].ech = EchEndpoint{{identity_of(keys.cover)}, std::nullopt, {}};
      each(shared, ech_clients, [](Expectation& e) {
        e = ok();
        e.final_ech = EchMode::shared;
      });
      shared.expected["safari"] = ok();
      shared.expected["safari"].final_ech = EchMode::off;
      out.push_back(shared);

      Scenario unilateral;
      unilateral.id = "ech-unilateral";
      unilateral.description = "ech still advertised, server no longer supports ECH";
      unilateral.request = "https://a.com";
      unilateral.zone = shared_zone(keys.cover);
      unilateral.endpoints = {shared_server()};
      each(unilateral, ech_clients, [](Expectation& e) {
        e = ok(2);
        e.final_ech = EchMode::off;
        e.annotations = {"plain_tls_fallback"};
      });
      unilateral.expected["safari"] = ok();
      out.push_back(unilateral);

      Scenario malformed;
      malformed.id = "ech-malformed";
      malformed.description = "ech value mangled so the config list cannot be parsed";
      malformed.request = "https://a.com";
      malformed.zone = shared_zone(corrupt_ech_lengths(keys.cover));
      malformed.endpoints = {shared_server()};
      malformed.endpoints[0].ech = EchEndpoint{{identity_of(keys.cover)}, std::nullopt, {}};
      each(malformed, {"chrome", "edge"}, [](Expectation& e) {
        e = fail(fail_reason::malformed_ech, 0);
      });
      each(malformed, {"rfc", "firefox"}, [](Expectation& e) {
        e = ok();
        e.final_ech = EchMode::off;
        e.annotations = {"ech_ignored_malformed"};
      });
      malformed.expected["safari"] = ok();
      out.push_back(malformed);

      Scenario mismatch;
      mismatch.id = "ech-key-mismatch";
      mismatch.description = "advertised key is stale; server offers retry configs";
      mismatch.request = "https://a.com";
      mismatch.zone = shared_zone(keys.cover);
      mismatch.endpoints = {shared_server()};
      mismatch.endpoints[0].ech = EchEndpoint{{identity_of(keys.cover_rotated)}, keys.cover_rotated, {}};
      each(mismatch, ech_clients, [](Expectation& e) {
        e = ok(2);
        e.final_ech = EchMode::retry_pending;
        e.annotations = {"ech_retry"};
      });
      mismatch.expected["safari"] = ok();
      out.push_back(mismatch);

      Scenario split;
      split.id = "ech-split";
      split.description = "split mode: client-facing b.com on its own address";
      split.request = "https://a.com";
      split.zone = {
        "a.com. 60 IN HTTPS 1 . alpn=h2 ech=" + base64_encode(keys.split),
        "a.com. 60 IN A 1.1.1.1",
        "b.com. 60 IN A 2.2.2.2",
      };
      split.endpoints = {
        server("backend", {"1.1.1.1"}, {443}, {"h2"}, {"a.com"}),
        server("client-facing", {"2.2.2.2"}, {443}, {"h2"}, {"b.com"}),
      };
      split.endpoints[1].ech = EchEndpoint{{identity_of(keys.split)}, std::nullopt, {DomainName::parse("a.com")}};
      each(split, {"chrome", "edge", "firefox"}, [](Expectation& e) {
        e = fail(fail_reason::ech_fallback_cert, 1);
        e.first_ip = "1.1.1.1";
        e.final_ech = EchMode::split_misdirected;
        e.not_queried = {q("b.com", "A")};
      });
      split.expected["rfc"] = ok();
      split.expected["rfc"].first_ip = "2.2.2.2";
      split.expected["rfc"].final_ech = EchMode::split;
      split.expected["rfc"].queried = {q("b.com", "A")};
      split.expected["safari"] = ok();
      split.expected["safari"].first_ip = "1.1.1.1";
      split.expected["safari"].final_ech = EchMode::off;
      out.push_back(split);
      return out;
    }
  }

  const std::vector<Scenario>& builtin_matrix()
  {
    static const std::vector<Scenario> matrix = [] {
      std::vector<Scenario> out;
      auto append = [&](std::vector<Scenario> more) {
        for (auto& s : more)
          out.push_back(std::move(s));
      };
      append(utilization());
      out.push_back(alias_target());
      out.push_back(service_target());
      append(ports());
      append(hints());
      append(alpn());
      append(ech());
      return out;
    }();
    return matrix;
  }

  std::string_view to_string(Cell c)
  {
    switch (c)
    {
      case Cell::full:
        return "full";
      case Cell::half:
        return "half";
      case Cell::empty:
        return "empty";
    }
    return "?";
  }

  std::string ConformanceTable::to_text() const
  {
    auto glyph = [](Cell c) {
      switch (c)
      {
        case Cell::full:
          return "full";
        case Cell::half:
          return "half";
        case Cell::empty:
          return "-";
      }
      return "?";
    };
    std::size_t label_width = 0;
    for (const auto& r : rows)
      label_width = std::max(label_width, r.size());
    std::string out = title + "\n";
    out += fmt::format("{:<{}}", "", label_width);
    for (const auto& c : columns)
      out += fmt::format("  {:<8}", c);
    out += "\n";
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
      out += fmt::format("{:<{}}", rows[r], label_width);
      for (std::size_t c = 0; c < columns.size(); ++c)
        out += fmt::format("  {:<8}", glyph(cells[r][c]));
      out += "\n";
    }
    return out;
  }

  namespace
  {
    const std::vector<std::string> rr_rows = {
      "{apex}",
      "http://{apex}",
      "https://{apex}",
      "AliasMode TargetName",
      "ServiceMode TargetName",
      "port",
      "alpn",
      "IP hints",
    };

    const std::vector<std::string> ech_rows = {
      "Shared Mode Support",
      "Unilateral ECH",
      "Malformed ECH",
      "Mismatched key",
      "Split Mode Support",
    };

    ConformanceTable make_table(
      std::string title, const std::vector<std::string>& rows, const std::vector<std::string>& columns,
      std::vector<std::string> grid)
    {
      ConformanceTable t{std::move(title), rows, columns, {}};
      for (const auto& line : grid)
      {
        std::vector<Cell> row;
        for (char ch : line)
          row.push_back(ch == 'F' ? Cell::full : ch == 'H' ? Cell::half : Cell::empty);
        t.cells.push_back(std::move(row));
      }
      return t;
    }

    using Runs = std::map<std::string, std::map<std::string, Transcript>>;

    bool success(const Transcript& t)
    {
      return t.terminal.ok();
    }

    Cell cell(bool full)
    {
      return full ? Cell::full : Cell::empty;
    }

    Cell utilization_cell(const Transcript& t)
    {
      auto https = DnsQuery{DomainName::parse("a.com"), "HTTPS"};
      bool asked = std::find(t.queries.begin(), t.queries.end(), https) != t.queries.end();
      if (!asked || !success(t))
        return Cell::empty;
      return t.attempts.back().transport == Transport::tls ? Cell::full : Cell::half;
    }

    Cell rr_cell(const Runs& runs, std::size_t row, const std::string& p)
    {
      auto T = [&](const std::string& id) -> const Transcript& { return runs.at(id).at(p); };
      auto pool = DomainName::parse("pool.a.com");
      switch (row)
      {
        case 0:
          return utilization_cell(T("util-bare"));
        case 1:
          return utilization_cell(T("util-http"));
        case 2:
          return utilization_cell(T("util-https"));
        case 3:
          return cell(success(T("alias-target")) && T("alias-target").attempts.back().host == pool);
        case 4:
          return cell(success(T("service-target")) && T("service-target").attempts.back().host == pool);
        case 5:
          return cell(
            success(T("port-both")) && T("port-both").attempts.back().port == 8443 &&
            success(T("port-8443-only")));
        case 6:
          return cell(
            success(T("alpn-h2")) && T("alpn-h2").terminal.alpn == "h2" && success(T("alpn-h3")) &&
            T("alpn-h3").terminal.alpn == "h3");
        case 7:
          return cell(
            T("iphint-preference").attempts.front().ip_source == IpSource::hint &&
            success(T("iphint-hint-only")));
      }
      return Cell::empty;
    }

    Cell ech_cell(const Runs& runs, std::size_t row, const std::string& p)
    {
      auto T = [&](const std::string& id) -> const Transcript& { return runs.at(id).at(p); };
      switch (row)
      {
        case 0:
          return cell(success(T("ech-shared")) && T("ech-shared").attempts.back().ech_mode == EchMode::shared);
        case 1:
          return cell(success(T("ech-unilateral")));
        case 2:
          return cell(success(T("ech-malformed")));
        case 3:
        {
          const auto& t = T("ech-key-mismatch");
          return cell(success(t) && t.attempts.back().has_annotation("ech_retry"));
        }
        case 4:
          return cell(success(T("ech-split")));
      }
      return Cell::empty;
    }

    const std::vector<std::string> rr_sources = {
      "util-bare", "util-http", "util-https", "alias-target", "service-target", "port-both",
      "port-8443-only", "alpn-h2", "alpn-h3", "iphint-preference", "iphint-hint-only"};
    const std::vector<std::string> ech_sources = {
      "ech-shared", "ech-unilateral", "ech-malformed", "ech-key-mismatch", "ech-split"};

    bool have_all(const Runs& runs, const std::vector<std::string>& ids)
    {
      return std::all_of(ids.begin(), ids.end(), [&](const auto& id) { return runs.count(id) != 0; });
    }

    void compare(const ConformanceTable& got, const ConformanceTable& want, std::vector<std::string>& out)
    {
      for (std::size_t r = 0; r < want.rows.size(); ++r)
      {
        for (std::size_t c = 0; c < want.columns.size(); ++c)
        {
          if (got.cells[r][c] != want.cells[r][c])
          {
            out.push_back(fmt::format(
              "{}/{}/{}: got {}, want {}",
              got.title,
              want.rows[r],
              want.columns[c],
              to_string(got.cells[r][c]),
              to_string(want.cells[r][c])));
          }
        }
      }
    }
  }

  ConformanceTable reference_rr_table()
  {
    // Columns chrome, safari, edge, firefox.
    return make_table(
      "HTTPS RR support",
      rr_rows,
      browsers,
      {
        "FHFF",
        "FHFF",
        "FFFF",
        "EFEE",
        "EFEF",
        "EFEF",
        "FFFF",
        "EFEF",
      });
  }

  ConformanceTable reference_ech_table()
  {
    // Columns chrome, edge, firefox.
    return make_table(
      "ECH support and failover",
      ech_rows,
      ech_browsers,
      {
        "FFF",
        "FFF",
        "EEF",
        "FFF",
        "EEE",
      });
  }

  ConformanceReport run_conformance(const std::vector<Scenario>& matrix)
  {
    ConformanceReport report;
    Runs runs;
    for (const auto& s : matrix)
    {
      for (const auto& [name, profile] : builtin_profiles())
      {
        auto t = run_scenario(s, profile);
        auto it = s.expected.find(name);
        if (it != s.expected.end())
        {
          for (const auto& diff : check_expectation(t, it->second))
            report.expectation_failures.push_back(fmt::format("{}/{}: {}", s.id, name, diff));
        }
        runs[s.id][name] = t;
        report.transcripts.push_back(std::move(t));
      }
      for (const auto& [name, e] : s.expected)
      {
        if (!builtin_profiles().count(name))
          report.expectation_failures.push_back(fmt::format("{}/{}: unknown profile", s.id, name));
      }
    }

    if (have_all(runs, rr_sources))
    {
      auto want = reference_rr_table();
      auto got = want;
      for (std::size_t r = 0; r < got.rows.size(); ++r)
      {
        for (std::size_t c = 0; c < got.columns.size(); ++c)
          got.cells[r][c] = rr_cell(runs, r, got.columns[c]);
      }
      compare(got, want, report.cell_mismatches);
      report.rr_table = std::move(got);
    }
    if (have_all(runs, ech_sources))
    {
      auto want = reference_ech_table();
      auto got = want;
      for (std::size_t r = 0; r < got.rows.size(); ++r)
      {
        for (std::size_t c = 0; c < got.columns.size(); ++c)
          got.cells[r][c] = ech_cell(runs, r, got.columns[c]);
      }
      compare(got, want, report.cell_mismatches);
      report.ech_table = std::move(got);
    }
    return report;
  }
}
