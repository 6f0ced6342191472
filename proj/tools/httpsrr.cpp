// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/analysis.hpp"
#include "httpsrr/simnet.hpp"
#include "httpsrr/synth.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace httpsrr;
namespace fs = std::filesystem;

namespace
{
  constexpr int exit_ok = 0;
  constexpr int exit_failed = 1;
  constexpr int exit_usage = 2;

  /// Bad flags or config values; reported with exit_usage.
  struct UsageError : std::runtime_error
  {
    using std::runtime_error::runtime_error;
  };

  std::string read_file(const fs::path& path)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write_file(const fs::path& path, const std::string& text)
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text))
      throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  }

  /// Zone file: one RR per line; blank lines and ';' comments are skipped.
  std::vector<std::string> zone_lines(const fs::path& path)
  {
    std::vector<std::string> out;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line))
    {
      auto start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos || line[start] == ';')
        continue;
      out.push_back(line.substr(start));
    }
    return out;
  }

  PolicyProfile profile_arg(const std::string& name)
  {
    if (builtin_profiles().count(name))
      return builtin_profile(name);
    if (fs::exists(name))
      return load_profile(read_file(name));
    throw UsageError(fmt::format("unknown profile '{}'", name));
  }

  // scan

  struct ScanArgs
  {
    std::string list;
    std::string out;
    std::string date;
    std::string config;
    std::string mock_zone;
    std::vector<std::string> resolvers;
    double qps = 0;
    int retries = 0;
    int timeout_ms = 0;
    std::size_t workers = 0;
    bool probe = false;
    std::vector<std::uint16_t> probe_ports;
    std::string tag;
    std::string qtypes = "all";
    std::string kinds = "both";
    bool always_ns = false;
  };

  ScanConfig scan_config(const ScanArgs& a, const CLI::App& cmd)
  {
    ScanConfig cfg;
    if (!a.config.empty())
    {
      try
      {
        cfg = ScanConfig::from_json(nlohmann::json::parse(read_file(a.config)));
      }
      catch (const nlohmann::json::exception& e)
      {
        throw UsageError(fmt::format("{}: {}", a.config, e.what()));
      }
    }
    if (cmd.count("--resolvers"))
      cfg.resolvers = a.resolvers;
    if (cmd.count("--qps"))
      cfg.qps = a.qps;
    if (cmd.count("--retries"))
      cfg.retries = a.retries;
    if (cmd.count("--timeout-ms"))
      cfg.timeout = std::chrono::milliseconds(a.timeout_ms);
    if (cmd.count("--workers"))
      cfg.workers = a.workers;
    if (cmd.count("--probe"))
      cfg.probe = true;
    if (cmd.count("--probe-ports"))
      cfg.probe_ports = a.probe_ports;
    if (cmd.count("--tag"))
      cfg.tag = a.tag;
    if (cmd.count("--qtypes"))
      cfg.https_only = a.qtypes == "https";
    if (cmd.count("--always-ns"))
      cfg.always_query_ns = true;
    try
    {
      cfg.check();
    }
    catch (const std::exception& e)
    {
      throw UsageError(e.what());
    }
    return cfg;
  }

  int cmd_scan(const ScanArgs& a, const CLI::App& cmd)
  {
    auto cfg = scan_config(a, cmd);
    auto targets = derive_targets_from_file(a.list);
    std::vector<std::pair<DomainName, TargetKind>> work;
    for (std::size_t i = 0; i < targets.apex.size(); ++i)
    {
      if (a.kinds != "www")
        work.emplace_back(targets.apex[i].name, TargetKind::apex);
      if (a.kinds != "apex")
        work.emplace_back(targets.www[i].name, TargetKind::www);
    }

    fs::create_directories(a.out);
    SnapshotStore store(a.out);
    const bool mock = !a.mock_zone.empty();
    const auto date = !a.date.empty() ? a.date : utc_date(unix_now());
    day_number(date);

    std::unique_ptr<Clock> clock;
    std::unique_ptr<DnsTransport> transport;
    std::unique_ptr<Prober> prober;
    std::function<std::int64_t()> wall;
    if (mock)
    {
      auto zone = ZoneStore::from_lines(zone_lines(a.mock_zone), true);
      clock = std::make_unique<ManualClock>();
      if (cfg.probe)
        prober = std::make_unique<SimnetProber>(permissive_endpoints(zone));
      transport = std::make_unique<MockTransport>(std::move(zone), *clock);
      auto t0 = day_number(date) * 86400;
      wall = [t0] { return t0; };
    }
    else
    {
      clock = std::make_unique<SystemClock>();
      transport = std::make_unique<UdpTransport>();
      if (cfg.probe)
        prober = std::make_unique<TlsProber>();
      wall = unix_now;
    }
    RateLimiter limiter(cfg.qps, *clock);
    Scanner scanner(cfg, *transport, limiter, wall, prober.get());

    DayManifest manifest;
    manifest.date = date;
    manifest.tag = cfg.tag;
    manifest.skipped_rows = targets.skipped;
    manifest.config_digest = cfg.digest();
    scanner.scan_all(work, date, [&](DomainSnapshot&& s) {
      manifest.add(s);
      store.append(s, cfg.tag);
    });
    store.write_manifest(manifest);
    fmt::print("{} snapshots ({} apex, {} www), {} with HTTPS, {} errors, {} rows skipped -> {}\n",
               manifest.snapshots, manifest.apex, manifest.www, manifest.with_https, manifest.errors,
               manifest.skipped_rows, store.day_path(date, cfg.tag).string());
    return exit_ok;
  }

  // analyze

  struct AnalyzeArgs
  {
    std::string store;
    std::vector<std::string> metrics;
    std::string set = "dynamic";
    std::string from;
    std::string to;
    std::string kind = "apex";
    std::string cf = HTTPSRR_DEFAULT_CF;
    std::vector<std::string> providers;
    std::string out;
  };

  int cmd_analyze(const AnalyzeArgs& a)
  {
    if (!fs::is_directory(a.store))
      throw std::runtime_error(fmt::format("snapshot store {} does not exist", a.store));
    for (const auto& m : a.metrics)
    {
      const auto& names = metric_names();
      if (std::find(names.begin(), names.end(), m) == names.end())
        throw UsageError(fmt::format("unknown metric '{}' (known: {})", m, fmt::join(names, ", ")));
    }
    SnapshotStore store(a.store);
    auto files = store.files();
    if (files.empty())
      throw std::runtime_error(fmt::format("{} holds no snapshot files", a.store));
    DomainSetSpec set{set_mode_from_string(a.set), a.from, a.to};
    if (set.from.empty())
      set.from = files.front().first;
    if (set.to.empty())
      set.to = files.back().first;

    auto in = load_input(store, set, a.kind == "www" ? TargetKind::www : TargetKind::apex);
    if (fs::exists(a.cf))
      in.cf = CfDefaultSpec::from_file(a.cf);
    if (!a.providers.empty())
    {
      in.providers.suffixes.clear();
      for (const auto& p : a.providers)
        in.providers.suffixes.push_back(DomainName::parse(p));
    }

    auto metrics = a.metrics;
    if (metrics.empty())
    {
      for (const auto& m : metric_names())
      {
        if (m == "ech_rotation" && in.hourly.size() < 2)
          continue;
        if (m == "cf_default" && !in.cf)
          continue;
        if (m == "overlapping" && day_number(set.to) <= day_number(set.from))
          continue;
        metrics.push_back(m);
      }
    }
    if (!a.out.empty())
      fs::create_directories(a.out);
    for (const auto& m : metrics)
    {
      auto report = run_metric(m, in);
      if (a.out.empty())
      {
        fmt::print("## {}\n{}", m, report.to_csv());
        continue;
      }
      write_file(fs::path(a.out) / (m + ".csv"), report.to_csv());
      write_file(fs::path(a.out) / (m + ".json"), report.to_json().dump(2) + "\n");
      fmt::print("{}: {} rows\n", m, report.rows.size());
    }
    return exit_ok;
  }

  // resolve

  std::string attempt_text(const Attempt& at)
  {
    std::string out = fmt::format("attempt {} {} {}:{} via {} sni={}", at.index, to_string(at.transport),
                                  to_string(at.ip), at.port, to_string(at.ip_source), at.sni.to_string());
    if (at.inner_sni)
      out += fmt::format(" inner_sni={}", at.inner_sni->to_string());
    if (!at.alpn.empty())
      out += fmt::format(" alpn={}", fmt::join(at.alpn, ","));
    out += fmt::format(" ech={}", to_string(at.ech_mode));
    if (!at.annotations.empty())
      out += fmt::format(" [{}]", fmt::join(at.annotations, ","));
    return out;
  }

  /// Queries HTTPS/A/AAAA for `host` and every name its answers point at.
  ZoneStore collect_live(const Request& req, const std::string& resolver, Duration timeout)
  {
    UdpTransport transport;
    ZoneStore zone(true);
    std::set<std::tuple<DomainName, std::uint16_t, Bytes>> seen;
    std::vector<DomainName> queue = {req.host};
    std::set<DomainName> visited;
    std::uint16_t id = 1;
    while (!queue.empty() && visited.size() < 8)
    {
      auto name = queue.back();
      queue.pop_back();
      if (name.is_root() || !visited.insert(name).second)
        continue;
      for (auto type : {rrtype::HTTPS, rrtype::A, rrtype::AAAA})
      {
        auto r = transport.query(resolver, make_query(id++, name, type, false), timeout);
        if (r.status != QueryStatus::ok || !r.response)
          throw std::runtime_error(fmt::format("{} {}: {} {}", name.to_string(), type_name(type),
                                               to_string(r.status), r.detail));
        for (const auto& rr : r.response->answers)
        {
          if (!seen.emplace(rr.name, rr.type, rr.rdata).second)
            continue;
          zone.add(rr);
          if (rr.type == rrtype::CNAME)
            queue.push_back(decode_name_rdata(rr.rdata));
          if (rr.type == rrtype::HTTPS)
          {
            try
            {
              queue.push_back(parse_wire(rr.rdata, rr.name, rr.ttl).target);
            }
            catch (const ParseError&)
            {
            }
          }
        }
      }
    }
    return zone;
  }

  struct ResolveArgs
  {
    std::string url;
    std::string profile = "rfc";
    std::string zone;
    std::string endpoints;
    std::string scenario;
    std::string resolver;
    int timeout_ms = 2000;
    bool json = false;
  };

  int cmd_resolve(const ResolveArgs& a)
  {
    auto profile = profile_arg(a.profile);
    if (!a.resolver.empty())
    {
      auto req = Request::parse(a.url);
      auto zone = collect_live(req, a.resolver, std::chrono::milliseconds(a.timeout_ms));
      auto plan = build_plan(req, profile, make_view(zone));
      if (a.json)
      {
        nlohmann::json j = {{"request", req.to_string()}, {"profile", profile.name}};
        j["queries"] = nlohmann::json::array();
        for (const auto& q : plan.queries)
          j["queries"].push_back(q.name.to_string() + " " + q.qtype);
        j["attempts"] = nlohmann::json::array();
        for (const auto& at : plan.attempts)
          j["attempts"].push_back(attempt_text(at));
        j["terminal"] = plan.terminal ? nlohmann::json(terminal_text(*plan.terminal)) : nlohmann::json(nullptr);
        fmt::print("{}\n", j.dump(2));
        return exit_ok;
      }
      fmt::print("request {} profile {} (live, first attempt only)\n", req.to_string(), profile.name);
      for (const auto& q : plan.queries)
        fmt::print("query {} {}\n", q.name.to_string(), q.qtype);
      for (const auto& at : plan.attempts)
        fmt::print("{}\n", attempt_text(at));
      for (const auto& ep : plan.endpoints)
      {
        for (const auto& c : ep.candidates)
          fmt::print("candidate {} via {} port {}\n", to_string(c.ip), to_string(c.source), ep.planned_port);
      }
      if (plan.terminal)
        fmt::print("terminal {}\n", terminal_text(*plan.terminal));
      return exit_ok;
    }

    Scenario s;
    if (!a.scenario.empty())
    {
      s = scenario_from_json(read_file(a.scenario));
    }
    else
    {
      if (a.zone.empty())
        throw UsageError("resolve needs --zone, --scenario or --resolver");
      s.id = "cli";
      s.zone = zone_lines(a.zone);
      s.endpoints = permissive_endpoints(ZoneStore::from_lines(s.zone));
      if (!a.endpoints.empty())
      {
        auto doc = nlohmann::json::parse(read_file(a.endpoints));
        nlohmann::json wrapper = {{"id", "cli"}, {"request", a.url}, {"zone", s.zone}, {"endpoints", doc}};
        s.endpoints = scenario_from_json(wrapper.dump()).endpoints;
      }
    }
    if (!a.url.empty())
      s.request = a.url;
    if (s.request.empty())
      throw UsageError("no URL given");

    auto t = run_scenario(s, profile);
    if (a.json)
    {
      fmt::print("{}\n", t.to_json());
      return exit_ok;
    }
    fmt::print("request {} profile {}\n", Request::parse(s.request).to_string(), profile.name);
    for (const auto& q : t.queries)
      fmt::print("query {} {}\n", q.name.to_string(), q.qtype);
    for (std::size_t i = 0; i < t.attempts.size(); ++i)
    {
      std::string result;
      if (i < t.results.size())
      {
        result = fmt::format(" -> {}", to_string(t.results[i].outcome));
        if (!t.results[i].alpn.empty())
          result += fmt::format(" ({})", t.results[i].alpn);
      }
      fmt::print("{}{}\n", attempt_text(t.attempts[i]), result);
    }
    fmt::print("{}\n", terminal_text(t.terminal));
    return exit_ok;
  }

  // conformance

  struct ConformanceArgs
  {
    std::string import_dir;
    std::string export_dir;
    std::vector<std::string> profiles;
    std::vector<std::string> scenarios;
    bool tables = true;
  };

  std::vector<Scenario> import_matrix(const fs::path& dir)
  {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
    {
      if (e.path().extension() == ".json")
        files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Scenario> out;
    for (const auto& f : files)
    {
      try
      {
        out.push_back(scenario_from_json(read_file(f)));
      }
      catch (const std::exception& e)
      {
        throw std::runtime_error(fmt::format("{}: {}", f.string(), e.what()));
      }
    }
    return out;
  }

  int cmd_conformance(const ConformanceArgs& a)
  {
    auto matrix = a.import_dir.empty() ? builtin_matrix() : import_matrix(a.import_dir);
    if (!a.export_dir.empty())
    {
      fs::create_directories(a.export_dir);
      for (std::size_t i = 0; i < matrix.size(); ++i)
      {
        write_file(fs::path(a.export_dir) / fmt::format("{:03}-{}.json", i, matrix[i].id),
                   scenario_to_json(matrix[i]) + "\n");
      }
      fmt::print("exported {} scenarios to {}\n", matrix.size(), a.export_dir);
    }

    const bool filtered = !a.profiles.empty() || !a.scenarios.empty();
    for (const auto& p : a.profiles)
    {
      if (!builtin_profiles().count(p))
        throw UsageError(fmt::format("unknown profile '{}'", p));
    }
    if (filtered)
    {
      std::vector<Scenario> kept;
      for (auto s : matrix)
      {
        if (!a.scenarios.empty() && std::find(a.scenarios.begin(), a.scenarios.end(), s.id) == a.scenarios.end())
          continue;
        if (!a.profiles.empty())
        {
          std::erase_if(s.expected, [&](const auto& kv) {
            return std::find(a.profiles.begin(), a.profiles.end(), kv.first) == a.profiles.end();
          });
        }
        kept.push_back(std::move(s));
      }
      matrix = std::move(kept);
    }

    auto report = run_conformance(matrix);
    std::map<std::string, std::vector<std::string>> failures;
    for (const auto& f : report.expectation_failures)
    {
      auto colon = f.find(": ");
      failures[f.substr(0, colon)].push_back(colon == std::string::npos ? f : f.substr(colon + 2));
    }
    std::size_t rows = 0;
    for (const auto& t : report.transcripts)
    {
      auto key = t.scenario + "/" + t.profile;
      auto it = failures.find(key);
      ++rows;
      if (it == failures.end())
      {
        fmt::print("PASS {:<28} {:<8} {}\n", t.scenario, t.profile, terminal_text(t.terminal));
        continue;
      }
      fmt::print("FAIL {:<28} {:<8} {}\n", t.scenario, t.profile, terminal_text(t.terminal));
      for (const auto& why : it->second)
        fmt::print("     {}\n", why);
    }
    if (a.tables)
    {
      for (const auto* table : {&report.rr_table, &report.ech_table})
      {
        if (*table)
          fmt::print("\n{}", (*table)->to_text());
      }
    }
    for (const auto& m : report.cell_mismatches)
      fmt::print("CELL {}\n", m);

    bool ok = report.expectation_failures.empty() && report.cell_mismatches.empty();
    if (!filtered && a.import_dir.empty())
      ok = ok && report.rr_table && report.ech_table;
    fmt::print("\n{} rows, {} failures, {} cell mismatches\n", rows, report.expectation_failures.size(),
               report.cell_mismatches.size());
    return ok ? exit_ok : exit_failed;
  }

  // inspect

  struct InspectArgs
  {
    std::string record;
    std::string wire;
    std::string ech;
    bool json = false;
  };

  nlohmann::json ech_json(const EchConfigList& list)
  {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : list.configs)
    {
      nlohmann::json j = {{"version", fmt::format("0x{:04x}", c.version)}, {"recognized", c.recognized()}};
      if (c.recognized())
      {
        auto id = key_identity(c);
        j["config_id"] = c.config_id;
        j["kem_id"] = c.kem_id;
        j["public_name"] = c.public_name;
        j["public_key"] = to_hex(c.public_key);
        j["key_digest"] = to_hex(ByteView(id.public_key_digest.data(), id.public_key_digest.size()));
        nlohmann::json suites = nlohmann::json::array();
        for (const auto& s : c.cipher_suites)
          suites.push_back({{"kdf_id", s.kdf_id}, {"aead_id", s.aead_id}});
        j["cipher_suites"] = suites;
        j["maximum_name_length"] = c.maximum_name_length;
      }
      out.push_back(j);
    }
    return out;
  }

  int cmd_inspect(const InspectArgs& a)
  {
    int given = int(!a.record.empty()) + int(!a.wire.empty()) + int(!a.ech.empty());
    if (given != 1)
      throw UsageError("inspect takes exactly one of RECORD, --wire or --ech");
    nlohmann::json out;
    if (!a.ech.empty())
    {
      out["ech"] = ech_json(parse_ech_config_list(std::string_view(a.ech)));
    }
    else
    {
      auto rec = a.record.empty() ? parse_wire(from_hex(a.wire)) : parse_presentation(a.record);
      out["presentation"] = a.record.empty() ? rdata_to_presentation(rec) : to_presentation(rec);
      out["wire"] = to_hex(to_wire(rec));
      out["mode"] = rec.is_alias() ? "alias" : "service";
      nlohmann::json issues = nlohmann::json::array();
      for (const auto& i : validate(rec))
      {
        issues.push_back(
          {{"code", std::string(to_string(i.code))}, {"severity", std::string(to_string(i.severity))},
           {"detail", i.detail}});
      }
      out["issues"] = issues;
      if (auto* ech = rec.get<EchValue>(SvcKey::ech))
      {
        try
        {
          out["ech"] = ech_json(parse_ech_config_list(ech->config_list));
        }
        catch (const ParseError& e)
        {
          out["ech_error"] = e.what();
        }
      }
    }
    if (a.json)
    {
      fmt::print("{}\n", out.dump(2));
      return exit_ok;
    }
    if (out.contains("presentation"))
    {
      fmt::print("{}\nwire {}\nmode {}\n", out["presentation"].get<std::string>(), out["wire"].get<std::string>(),
                 out["mode"].get<std::string>());
      for (const auto& i : out["issues"])
      {
        fmt::print("{} {}: {}\n", i["severity"].get<std::string>(), i["code"].get<std::string>(),
                   i["detail"].get<std::string>());
      }
    }
    if (out.contains("ech_error"))
      fmt::print("ech: {}\n", out["ech_error"].get<std::string>());
    if (out.contains("ech"))
    {
      for (const auto& c : out["ech"])
      {
        if (!c["recognized"].get<bool>())
        {
          fmt::print("ech config version {} (skipped)\n", c["version"].get<std::string>());
          continue;
        }
        fmt::print("ech config id {} kem {} public_name {} key {}\n", c["config_id"].get<int>(),
                   c["kem_id"].get<int>(), c["public_name"].get<std::string>(), c["key_digest"].get<std::string>());
      }
    }
    return exit_ok;
  }

  // synth

  struct SynthArgs
  {
    std::string out;
    SynthConfig daily;
    RotationSynthConfig hourly;
    bool with_hourly = false;
  };

  int cmd_synth(const SynthArgs& a)
  {
    fs::create_directories(a.out);
    SnapshotStore store(a.out);
    auto summary = synth_corpus(a.daily, store);
    fmt::print("{} snapshots over {} days -> {}\n", summary.snapshots, summary.dates.size(), a.out);
    if (a.with_hourly)
    {
      auto truth = synth_rotation(a.hourly, store);
      fmt::print("{} hourly scans of {} domains\n", truth.scan_times.size(), truth.key_lives.size());
    }
    return exit_ok;
  }
}

int main(int argc, char** argv)
{
  CLI::App app{"HTTPS resource record measurement toolkit"};
  app.require_subcommand(1, 1);

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan", "Scan a ranked domain list into a snapshot store");
  scan_cmd->add_option("--list", scan.list, "CSV of rank,domain")->required()->check(CLI::ExistingFile);
  scan_cmd->add_option("--out", scan.out, "Snapshot store directory")->required();
  scan_cmd->add_option("--date", scan.date, "Day label (default: today, UTC)");
  scan_cmd->add_option("--config", scan.config, "ScanConfig JSON; flags override it")->check(CLI::ExistingFile);
  scan_cmd->add_option("--resolvers", scan.resolvers, "Primary first, then backups")->delimiter(',');
  scan_cmd->add_option("--qps", scan.qps, "Query rate ceiling");
  scan_cmd->add_option("--retries", scan.retries, "Timeout retries per resolver");
  scan_cmd->add_option("--timeout-ms", scan.timeout_ms, "Per-query timeout");
  scan_cmd->add_option("--workers", scan.workers, "Concurrent domains");
  scan_cmd->add_flag("--probe", scan.probe, "Probe hint and address IPs when they disagree");
  scan_cmd->add_option("--probe-ports", scan.probe_ports, "Ports to probe")->delimiter(',');
  scan_cmd->add_option("--tag", scan.tag, "Store tag, e.g. hourly-13");
  scan_cmd->add_option("--qtypes", scan.qtypes, "all or https")->check(CLI::IsMember({"all", "https"}));
  scan_cmd->add_option("--kinds", scan.kinds, "both, apex or www")->check(CLI::IsMember({"both", "apex", "www"}));
  scan_cmd->add_flag("--always-ns", scan.always_ns, "Query NS even without HTTPS records");
  scan_cmd->add_option("--mock-zone", scan.mock_zone, "Answer from this zone file instead of the network")
    ->check(CLI::ExistingFile);

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Compute metric reports from a snapshot store");
  analyze_cmd->add_option("--store", analyze.store, "Snapshot store directory")->required();
  analyze_cmd->add_option("--metric", analyze.metrics, "Metric name; repeatable (default: all that apply)");
  analyze_cmd->add_option("--set", analyze.set, "dynamic or overlapping")
    ->check(CLI::IsMember({"dynamic", "overlapping"}));
  analyze_cmd->add_option("--from", analyze.from, "First day (default: earliest in store)");
  analyze_cmd->add_option("--to", analyze.to, "Last day (default: latest in store)");
  analyze_cmd->add_option("--kind", analyze.kind, "apex or www")->check(CLI::IsMember({"apex", "www"}));
  analyze_cmd->add_option("--cf-ranges", analyze.cf, "Cloudflare anycast ranges JSON");
  analyze_cmd->add_option("--provider-suffix", analyze.providers, "Name server suffix; repeatable");
  analyze_cmd->add_option("--out", analyze.out, "Report directory (default: CSV to stdout)");

  ResolveArgs resolve;
  auto* resolve_cmd = app.add_subcommand("resolve", "Print the connection plan a client profile follows");
  resolve_cmd->add_option("url", resolve.url, "a.com, http://a.com/ or https://a.com/");
  resolve_cmd->add_option("--profile", resolve.profile, "Builtin profile name or profile JSON file");
  resolve_cmd->add_option("--zone", resolve.zone, "Zone file")->check(CLI::ExistingFile);
  resolve_cmd->add_option("--endpoints", resolve.endpoints, "Endpoint JSON array (default: permissive)")
    ->check(CLI::ExistingFile);
  resolve_cmd->add_option("--scenario", resolve.scenario, "Scenario JSON file")->check(CLI::ExistingFile);
  resolve_cmd->add_option("--resolver", resolve.resolver, "Query this resolver instead of a zone file");
  resolve_cmd->add_option("--timeout-ms", resolve.timeout_ms, "Per-query timeout for --resolver");
  resolve_cmd->add_flag("--json", resolve.json, "JSON transcript");

  ConformanceArgs conf;
  bool no_tables = false;
  auto* conf_cmd = app.add_subcommand("conformance", "Run the browser scenario matrix");
  conf_cmd->add_option("--import", conf.import_dir, "Scenario directory")->check(CLI::ExistingDirectory);
  conf_cmd->add_option("--export", conf.export_dir, "Write the matrix as one JSON file per scenario");
  conf_cmd->add_option("--profile", conf.profiles, "Only these profiles; repeatable");
  conf_cmd->add_option("--scenario", conf.scenarios, "Only these scenario ids; repeatable");
  conf_cmd->add_flag("--no-tables", no_tables, "Skip the derived tables");

  InspectArgs inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Parse, validate and re-encode one HTTPS record");
  inspect_cmd->add_option("record", inspect.record, "Presentation line, e.g. 'a.com. HTTPS 1 . alpn=h2'");
  inspect_cmd->add_option("--wire", inspect.wire, "Hex rdata");
  inspect_cmd->add_option("--ech", inspect.ech, "Base64 ECHConfigList");
  inspect_cmd->add_flag("--json", inspect.json, "JSON output");

  std::string profile_name;
  auto* profiles_cmd = app.add_subcommand("profiles", "List client profiles or dump one");
  profiles_cmd->add_option("name", profile_name, "Profile to dump as JSON");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic snapshot store");
  synth_cmd->add_option("--out", synth.out, "Snapshot store directory")->required();
  synth_cmd->add_option("--seed", synth.daily.seed, "Seed");
  synth_cmd->add_option("--start", synth.daily.start, "First day");
  synth_cmd->add_option("--days", synth.daily.days, "Days");
  synth_cmd->add_option("--domains", synth.daily.domains, "Domains per day");
  synth_cmd->add_option("--churn", synth.daily.churn, "Daily list churn");
  synth_cmd->add_flag("--hourly", synth.with_hourly, "Also write an hourly ECH series");
  synth_cmd->add_option("--scans", synth.hourly.scans, "Hourly scans");
  synth_cmd->add_option("--ech-domains", synth.hourly.domains, "Domains in the hourly series");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    auto code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try
  {
    if (*scan_cmd)
      return cmd_scan(scan, *scan_cmd);
    if (*analyze_cmd)
      return cmd_analyze(analyze);
    if (*resolve_cmd)
      return cmd_resolve(resolve);
    if (*conf_cmd)
    {
      conf.tables = !no_tables;
      return cmd_conformance(conf);
    }
    if (*inspect_cmd)
      return cmd_inspect(inspect);
    if (*profiles_cmd)
    {
      if (!profile_name.empty())
      {
        fmt::print("{}\n", dump_profile(profile_arg(profile_name)));
        return exit_ok;
      }
      for (const auto& [name, p] : builtin_profiles())
        fmt::print("{}\n", name);
      return exit_ok;
    }
    if (*synth_cmd)
    {
      synth.hourly.start = synth.daily.start;
      synth.hourly.seed = synth.daily.seed + 1;
      return cmd_synth(synth);
    }
  }
  catch (const UsageError& e)
  {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_usage;
  }
  catch (const ContractViolation& e)
  {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_usage;
  }
  catch (const std::exception& e)
  {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_failed;
  }
  return exit_failed;
}
