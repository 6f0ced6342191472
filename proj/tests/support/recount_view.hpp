// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/analysis.hpp"

#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>

namespace httpsrr::testgen
{
  /// The six recount-checked metrics in the layout tools/oracles/recount.py
  /// prints.
  inline nlohmann::json metric_view(const AnalysisInput& in)
  {
    using nlohmann::json;
    auto daily = daily_lists(in.days, in.kind);
    json adoption = json::object();
    json dnssec = json::object();
    json alpn = json::object();
    for (const auto& [date, snaps] : in.days)
    {
      auto set = resolve_set(daily, in.set, date);
      if (!set.empty())
        adoption[date] = adoption_rate(snaps, set, in.kind);
      auto st = dnssec_stats(snaps, set, in.kind);
      dnssec[date] = {
        {"https_domains", st.https_domains},
        {"signed", st.signed_count},
        {"validated", st.validated},
        {"insecure", st.insecure},
        {"signed_pct", st.signed_pct},
        {"validated_pct", st.validated_pct},
        {"insecure_among_signed_pct", st.insecure_among_signed_pct},
      };
      auto dist = alpn_distribution(snaps, set, in.kind);
      alpn[date] = {{"counts", dist.counts}, {"pct", dist.pct}};
    }

    json overlapping = json::array();
    for (const auto& d : overlapping_set(daily, in.set.from, in.set.to))
      overlapping.push_back(d.to_string());

    std::map<DomainName, std::vector<DomainSnapshot>> series;
    for (const auto& [date, snaps] : in.days)
    {
      std::set<DomainName> seen;
      for (const auto& s : snaps)
      {
        if (s.kind == in.kind && seen.insert(s.domain).second)
          series[s.domain].push_back(s);
      }
    }
    json runs = json::object();
    json inter = json::object();
    for (const auto& [domain, ss] : series)
    {
      runs[domain.to_string()] = mismatch_durations(ss);
      if (ss.size() < 2)
        continue;
      auto e = intermittency_report(ss);
      json active = json::array();
      for (const auto& a : e.active)
        active.push_back({a.from, a.to});
      inter[domain.to_string()] = {
        {"intermittent", e.intermittent},
        {"active", active},
        {"same_ns_throughout", e.same_ns_throughout},
        {"ns_changed_at_toggle", e.ns_changed_at_toggle},
        {"ns_absent_at_deactivation", e.ns_absent_at_deactivation},
      };
    }
    return {
      {"adoption", adoption},
      {"overlapping", overlapping},
      {"mismatch_durations", runs},
      {"dnssec", dnssec},
      {"alpn", alpn},
      {"intermittency", inter},
    };
  }

  /// Runs the Python recount over `store`; nullopt when it fails to run.
  inline std::optional<nlohmann::json> python_recount(
    const std::filesystem::path& store, const DomainSetSpec& set, TargetKind kind, const std::string& python,
    const std::string& script)
  {
    auto out = store / "recount.json";
    auto cmd = fmt::format("\"{}\" \"{}\" \"{}\" {} {} --set {} --kind {} --out \"{}\"", python, script,
                           store.string(), set.from, set.to, to_string(set.mode), to_string(kind), out.string());
    if (std::system(cmd.c_str()) != 0)
      return std::nullopt;
    std::ifstream in(out);
    auto j = nlohmann::json::parse(in);
    std::filesystem::remove(out);
    return j;
  }

  /// Top-level keys whose values differ.
  inline std::vector<std::string> view_differences(const nlohmann::json& a, const nlohmann::json& b)
  {
    std::vector<std::string> out;
    for (const auto& key : {"adoption", "overlapping", "mismatch_durations", "dnssec", "alpn", "intermittency"})
    {
      if (!a.contains(key) || !b.contains(key) || a.at(key) != b.at(key))
        out.emplace_back(key);
    }
    return out;
  }
}
