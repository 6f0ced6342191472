// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/analysis.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <numeric>

namespace httpsrr
{
  using nlohmann::json;

  std::int64_t day_number(const std::string& date)
  {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (date.size() != 10 || std::sscanf(date.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 || m < 1 ||
        m > 12 || d < 1 || d > 31)
    {
      throw ContractViolation(fmt::format("'{}' is not a YYYY-MM-DD date", date));
    }
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = unsigned(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    auto n = era * 146097 + std::int64_t(doe) - 719468;
    if (date_from_day_number(n) != date)
      throw ContractViolation(fmt::format("'{}' is not a calendar date", date));
    return n;
  }

  std::string date_from_day_number(std::int64_t z)
  {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = unsigned(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    const std::int64_t y = std::int64_t(yoe) + era * 400 + (m <= 2);
    return fmt::format("{:04}-{:02}-{:02}", y, m, d);
  }

  std::vector<std::string> date_range(const std::string& from, const std::string& to)
  {
    auto a = day_number(from);
    auto b = day_number(to);
    if (b < a)
      throw ContractViolation(fmt::format("range {}..{} is reversed", from, to));
    std::vector<std::string> out;
    for (auto d = a; d <= b; ++d)
      out.push_back(date_from_day_number(d));
    return out;
  }

  std::string_view to_string(SetMode m)
  {
    return m == SetMode::dynamic ? "dynamic" : "overlapping";
  }

  SetMode set_mode_from_string(std::string_view s)
  {
    if (s == "dynamic")
      return SetMode::dynamic;
    if (s == "overlapping")
      return SetMode::overlapping;
    throw ContractViolation(fmt::format("unknown set mode '{}'", s));
  }

  std::set<DomainName> overlapping_set(const DailyLists& daily, const std::string& from, const std::string& to)
  {
    std::optional<std::set<DomainName>> acc;
    for (const auto& date : date_range(from, to))
    {
      auto it = daily.find(date);
      if (it == daily.end())
        throw ContractViolation(fmt::format("no domain list for {}", date));
      if (!acc)
      {
        acc = it->second;
        continue;
      }
      std::set<DomainName> next;
      std::set_intersection(
        acc->begin(), acc->end(), it->second.begin(), it->second.end(), std::inserter(next, next.end()));
      acc = std::move(next);
    }
    return acc.value_or(std::set<DomainName>{});
  }

  std::set<DomainName> resolve_set(const DailyLists& daily, const DomainSetSpec& spec, const std::string& date)
  {
    if (spec.mode == SetMode::overlapping)
    {
      if (day_number(spec.to) <= day_number(spec.from))
        throw ContractViolation("overlapping sets need at least two days");
      return overlapping_set(daily, spec.from, spec.to);
    }
    auto it = daily.find(date);
    if (it == daily.end())
      throw ContractViolation(fmt::format("no domain list for {}", date));
    return it->second;
  }

  DailyLists daily_lists(const std::map<std::string, std::vector<DomainSnapshot>>& days, TargetKind kind)
  {
    DailyLists out;
    for (const auto& [date, snaps] : days)
    {
      auto& set = out[date];
      for (const auto& s : snaps)
      {
        if (s.kind == kind)
          set.insert(s.domain);
      }
    }
    return out;
  }

  namespace
  {
    /// First snapshot of `kind` per domain in `set`.
    std::vector<const DomainSnapshot*> members(
      const std::vector<DomainSnapshot>& day, const std::set<DomainName>& set, TargetKind kind)
    {
      std::vector<const DomainSnapshot*> out;
      std::set<DomainName> seen;
      for (const auto& s : day)
      {
        if (s.kind == kind && set.count(s.domain) && seen.insert(s.domain).second)
          out.push_back(&s);
      }
      return out;
    }

    double pct(std::size_t part, std::size_t whole)
    {
      return whole == 0 ? 0.0 : 100.0 * double(part) / double(whole);
    }
  }

  void AdoptionAcc::add(bool has_https)
  {
    ++total;
    with_https += has_https ? 1 : 0;
  }

  void AdoptionAcc::merge(const AdoptionAcc& o)
  {
    total += o.total;
    with_https += o.with_https;
  }

  double AdoptionAcc::pct() const
  {
    return httpsrr::pct(with_https, total);
  }

  double adoption_rate(const std::vector<DomainSnapshot>& day, const std::set<DomainName>& set, TargetKind kind)
  {
    if (set.empty())
      throw ContractViolation("adoption rate over an empty set");
    AdoptionAcc acc;
    acc.total = set.size();
    for (const auto* s : members(day, set, kind))
      acc.with_https += s->has_https() ? 1 : 0;
    return acc.pct();
  }

  std::string_view to_string(NsCategory c)
  {
    switch (c)
    {
      case NsCategory::full_cf:
        return "full_cf";
      case NsCategory::partial_cf:
        return "partial_cf";
      case NsCategory::none_cf:
        return "none_cf";
      case NsCategory::unknown:
        return "unknown";
    }
    return "?";
  }

  NsCategory ns_categorize(const std::vector<DomainName>& ns_names, const ProviderRules& rules)
  {
    if (ns_names.empty())
      return NsCategory::unknown;
    std::size_t hits = 0;
    for (const auto& n : ns_names)
    {
      bool match = std::any_of(
        rules.suffixes.begin(), rules.suffixes.end(), [&](const auto& suffix) { return n.is_subdomain_of(suffix); });
      hits += match ? 1 : 0;
    }
    if (hits == ns_names.size())
      return NsCategory::full_cf;
    return hits == 0 ? NsCategory::none_cf : NsCategory::partial_cf;
  }

  CfDefaultSpec CfDefaultSpec::from_json(const json& j)
  {
    CfDefaultSpec spec;
    for (const auto& p : j.at("anycast_v4"))
    {
      auto prefix = IpPrefix::parse(p.get<std::string>());
      if (!is_v4(prefix.network()))
        throw ContractViolation(fmt::format("{} is not an IPv4 prefix", p.get<std::string>()));
      spec.anycast_v4.push_back(prefix);
    }
    for (const auto& p : j.at("anycast_v6"))
    {
      auto prefix = IpPrefix::parse(p.get<std::string>());
      if (is_v4(prefix.network()))
        throw ContractViolation(fmt::format("{} is not an IPv6 prefix", p.get<std::string>()));
      spec.anycast_v6.push_back(prefix);
    }
    return spec;
  }

  CfDefaultSpec CfDefaultSpec::from_file(const std::filesystem::path& path)
  {
    std::ifstream in(path);
    if (!in)
      throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    return from_json(json::parse(in));
  }

  std::string_view to_string(CfClass c)
  {
    return c == CfClass::default_config ? "default" : "customized";
  }

  CfClass classify_cf_default(const HttpsRecord& rec, const CfDefaultSpec& spec)
  {
    auto customized = CfClass::customized;
    if (rec.svc_priority != 1 || !rec.target.is_root() || rec.params.size() != 3)
      return customized;
    auto* alpn = rec.get<AlpnValue>(SvcKey::alpn);
    auto* v4 = rec.get<Ipv4HintValue>(SvcKey::ipv4hint);
    auto* v6 = rec.get<Ipv6HintValue>(SvcKey::ipv6hint);
    if (!alpn || !v4 || !v6 || v4->addrs.empty() || v6->addrs.empty())
      return customized;
    auto ids = alpn->ids;
    std::sort(ids.begin(), ids.end());
    if (ids != std::vector<std::string>{"h2", "h3"})
      return customized;
    auto inside = [](const IpAddress& ip, const std::vector<IpPrefix>& prefixes) {
      return std::any_of(prefixes.begin(), prefixes.end(), [&](const auto& p) { return p.contains(ip); });
    };
    for (const auto& a : v4->addrs)
    {
      if (!inside(a, spec.anycast_v4))
        return customized;
    }
    for (const auto& a : v6->addrs)
    {
      if (!inside(a, spec.anycast_v6))
        return customized;
    }
    return CfClass::default_config;
  }

  std::string_view to_string(HintConsistency c)
  {
    switch (c)
    {
      case HintConsistency::match:
        return "match";
      case HintConsistency::mismatch:
        return "mismatch";
      case HintConsistency::hint_absent:
        return "hint_absent";
    }
    return "?";
  }

  FamilyConsistency iphint_consistency(const DomainSnapshot& s)
  {
    auto one = [&](bool v4) {
      auto hints = s.hint_ips(v4);
      if (hints.empty())
        return HintConsistency::hint_absent;
      return hints == s.addr_ips(v4) ? HintConsistency::match : HintConsistency::mismatch;
    };
    return {one(true), one(false)};
  }

  std::vector<std::size_t> mismatch_durations(const std::vector<DomainSnapshot>& series)
  {
    std::vector<std::size_t> runs;
    std::size_t run = 0;
    std::optional<std::int64_t> prev;
    for (const auto& s : series)
    {
      auto d = day_number(s.date);
      if (prev && d <= *prev)
        continue;
      if (run > 0 && prev && d != *prev + 1)
      {
        runs.push_back(run);
        run = 0;
      }
      prev = d;
      if (has_hint_mismatch(s))
        ++run;
      else if (run > 0)
      {
        runs.push_back(run);
        run = 0;
      }
    }
    if (run > 0)
      runs.push_back(run);
    return runs;
  }

  namespace
  {
    std::optional<EchKeyIdentity> rotation_identity(const DomainSnapshot& s)
    {
      std::optional<std::pair<std::uint16_t, EchKeyIdentity>> best;
      for (const auto& rec : s.https_records())
      {
        auto* ech = rec.get<EchValue>(SvcKey::ech);
        if (rec.is_alias() || !ech)
          continue;
        try
        {
          auto id = primary_identity(parse_ech_config_list(ech->config_list));
          if (!best || rec.svc_priority < best->first)
            best = std::make_pair(rec.svc_priority, id);
        }
        catch (const ParseError&)
        {
        }
      }
      if (!best)
        return std::nullopt;
      return best->second;
    }
  }

  RotationSeries RotationSeries::from_scans(
    const std::vector<std::pair<std::int64_t, std::vector<DomainSnapshot>>>& scans)
  {
    RotationSeries out;
    const auto n = scans.size();
    for (std::size_t i = 0; i < n; ++i)
    {
      out.scan_times.push_back(scans[i].first);
      for (const auto& s : scans[i].second)
      {
        auto& row = out.observed[s.domain];
        row.resize(n);
        if (!row[i])
          row[i] = rotation_identity(s);
      }
    }
    return out;
  }

  RotationReport ech_rotation(const RotationSeries& series)
  {
    const auto& t = series.scan_times;
    if (t.size() < 2)
      throw ContractViolation("rotation analysis needs at least two scans");
    std::vector<std::int64_t> gaps;
    for (std::size_t i = 1; i < t.size(); ++i)
    {
      if (t[i] <= t[i - 1])
        throw ContractViolation(fmt::format("scan {} does not follow scan {} in time", i, i - 1));
      gaps.push_back(t[i] - t[i - 1]);
    }
    auto sorted = gaps;
    std::nth_element(sorted.begin(), sorted.begin() + std::ptrdiff_t(sorted.size() / 2), sorted.end());
    double interval = double(sorted[sorted.size() / 2]);
    if (std::abs(interval - 3600.0) <= 300.0)
      interval = 3600.0;

    RotationReport report;
    report.interval_hours = interval / 3600.0;
    std::vector<bool> breaks(t.size(), false);
    for (std::size_t i = 1; i < t.size(); ++i)
      breaks[i] = double(gaps[i - 1]) > 1.5 * interval;

    for (const auto& [domain, row] : series.observed)
    {
      std::vector<double> hours;
      std::size_t i = 0;
      while (i < row.size())
      {
        if (!row[i])
        {
          ++i;
          continue;
        }
        std::size_t j = i + 1;
        while (j < row.size() && !breaks[j] && row[j] == row[i])
          ++j;
        IdentityLife life{domain, *row[i], i, j - i, double(j - i) * report.interval_hours};
        hours.push_back(life.hours);
        report.lives.push_back(std::move(life));
        i = j;
      }
      if (!hours.empty())
        report.domain_mean_hours[domain] = std::accumulate(hours.begin(), hours.end(), 0.0) / double(hours.size());
    }
    if (!report.domain_mean_hours.empty())
    {
      double sum = 0;
      for (const auto& [d, h] : report.domain_mean_hours)
        sum += h;
      report.overall_mean_hours = sum / double(report.domain_mean_hours.size());
    }
    return report;
  }

  void DnssecAcc::add(const DomainSnapshot& s)
  {
    if (!s.has_https())
      return;
    ++stats.https_domains;
    bool is_signed = s.rrsig_present(rrtype::HTTPS);
    if (!is_signed)
      return;
    ++stats.signed_count;
    stats.validated += s.ad_bit(rrtype::HTTPS) ? 1 : 0;
    stats.insecure += s.ds_present ? 0 : 1;
  }

  void DnssecAcc::merge(const DnssecAcc& o)
  {
    stats.https_domains += o.stats.https_domains;
    stats.signed_count += o.stats.signed_count;
    stats.validated += o.stats.validated;
    stats.insecure += o.stats.insecure;
  }

  DnssecStats DnssecAcc::finish() const
  {
    auto out = stats;
    out.signed_pct = pct(out.signed_count, out.https_domains);
    out.validated_pct = pct(out.validated, out.https_domains);
    out.insecure_among_signed_pct = pct(out.insecure, out.signed_count);
    return out;
  }

  DnssecStats dnssec_stats(const std::vector<DomainSnapshot>& day, const std::set<DomainName>& set, TargetKind kind)
  {
    DnssecAcc acc;
    for (const auto* s : members(day, set, kind))
      acc.add(*s);
    return acc.finish();
  }

  void AlpnAcc::add(const DomainSnapshot& s)
  {
    if (!s.has_https())
      return;
    ++https_domains;
    std::set<std::string> ids;
    for (const auto& rec : s.https_records())
    {
      if (rec.is_alias())
        continue;
      if (auto* alpn = rec.get<AlpnValue>(SvcKey::alpn))
        ids.insert(alpn->ids.begin(), alpn->ids.end());
    }
    if (ids.empty())
      ids.insert(std::string(no_alpn_bucket));
    for (const auto& id : ids)
      ++counts[id];
  }

  void AlpnAcc::merge(const AlpnAcc& o)
  {
    https_domains += o.https_domains;
    for (const auto& [id, n] : o.counts)
      counts[id] += n;
  }

  AlpnDistribution AlpnAcc::finish() const
  {
    AlpnDistribution out;
    out.https_domains = https_domains;
    out.counts = counts;
    for (const auto& [id, n] : counts)
      out.pct[id] = pct(n, https_domains);
    return out;
  }

  AlpnDistribution alpn_distribution(
    const std::vector<DomainSnapshot>& day, const std::set<DomainName>& set, TargetKind kind)
  {
    AlpnAcc acc;
    for (const auto* s : members(day, set, kind))
      acc.add(*s);
    return acc.finish();
  }

  IntermittencyEntry intermittency_report(const std::vector<DomainSnapshot>& series)
  {
    std::vector<const DomainSnapshot*> days;
    for (const auto& s : series)
    {
      if (days.empty() || day_number(s.date) > day_number(days.back()->date))
        days.push_back(&s);
    }
    if (days.size() < 2)
      throw ContractViolation("intermittency needs at least two days");
    IntermittencyEntry e;
    e.domain = days.front()->domain;

    auto ns_known = [](const DomainSnapshot* s) { return s->rrsets.count("NS") > 0; };
    auto ns_set = [](const DomainSnapshot* s) { return std::set<DomainName>(s->ns_names.begin(), s->ns_names.end()); };

    std::optional<std::size_t> open;
    for (std::size_t i = 0; i < days.size(); ++i)
    {
      bool present = days[i]->has_https();
      if (i > 0 && present != days[i - 1]->has_https())
      {
        e.intermittent = true;
        if (ns_known(days[i]) && ns_known(days[i - 1]) && ns_set(days[i]) != ns_set(days[i - 1]))
          e.ns_changed_at_toggle = true;
        if (!present && ns_known(days[i]) && days[i]->ns_names.empty())
          e.ns_absent_at_deactivation = true;
      }
      if (present && !open)
        open = i;
      if (!present && open)
      {
        e.active.push_back({days[*open]->date, days[i - 1]->date});
        open.reset();
      }
    }
    if (open)
      e.active.push_back({days[*open]->date, days.back()->date});

    std::optional<std::set<DomainName>> first;
    e.same_ns_throughout = true;
    for (const auto* d : days)
    {
      if (!ns_known(d))
        continue;
      auto set = ns_set(d);
      if (!first)
        first = set;
      else if (*first != set)
        e.same_ns_throughout = false;
    }
    if (!first)
      e.same_ns_throughout = false;
    return e;
  }

  namespace
  {
    std::string csv_field(const std::string& v)
    {
      if (v.find_first_of(",\"\n") == std::string::npos)
        return v;
      std::string out = "\"";
      for (char c : v)
      {
        if (c == '"')
          out += '"';
        out += c;
      }
      return out + "\"";
    }

    std::string num(double v)
    {
      return fmt::format("{}", v);
    }
  }

  std::string Report::to_csv() const
  {
    std::string out = fmt::format("# config_digest: {}\n", config_digest);
    std::vector<std::string> cells;
    for (const auto& c : columns)
      cells.push_back(csv_field(c));
    out += fmt::format("{}\n", fmt::join(cells, ","));
    for (const auto& row : rows)
    {
      cells.clear();
      for (const auto& c : row)
        cells.push_back(csv_field(c));
      out += fmt::format("{}\n", fmt::join(cells, ","));
    }
    return out;
  }

  json Report::to_json() const
  {
    json rows_json = json::array();
    for (const auto& row : rows)
    {
      json r = json::object();
      for (std::size_t i = 0; i < columns.size() && i < row.size(); ++i)
        r[columns[i]] = row[i];
      rows_json.push_back(r);
    }
    return {
      {"metric", metric},
      {"config_digest", config_digest},
      {"columns", columns},
      {"rows", rows_json},
      {"detail", detail},
    };
  }

  AnalysisInput load_input(const SnapshotStore& store, const DomainSetSpec& set, TargetKind kind)
  {
    AnalysisInput in;
    in.set = set;
    in.kind = kind;
    std::set<std::string> digests;
    auto lo = day_number(set.from);
    auto hi = day_number(set.to);
    if (hi < lo)
      throw ContractViolation(fmt::format("range {}..{} is reversed", set.from, set.to));
    for (const auto& [date, tag] : store.files())
    {
      auto d = day_number(date);
      if (d < lo || d > hi)
        continue;
      if (tag.empty())
      {
        in.days[date] = store.load(date).snapshots;
        if (auto m = store.read_manifest(date))
          digests.insert(m->config_digest);
      }
      else if (tag.starts_with("hourly"))
      {
        auto snaps = store.load(date, tag).snapshots;
        if (snaps.empty())
          continue;
        std::int64_t t = snaps.front().timestamp;
        for (const auto& s : snaps)
          t = std::min(t, s.timestamp);
        in.hourly.emplace_back(t, std::move(snaps));
      }
    }
    std::sort(in.hourly.begin(), in.hourly.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    digests.erase("");
    in.config_digest = fmt::format("{}", fmt::join(digests, ","));
    return in;
  }

  namespace
  {
    std::vector<std::string> report_dates(const AnalysisInput& in)
    {
      std::vector<std::string> out;
      for (const auto& [date, snaps] : in.days)
        out.push_back(date);
      return out;
    }

    /// Per-domain series over all loaded days, ordered by date.
    std::map<DomainName, std::vector<DomainSnapshot>> by_domain(const AnalysisInput& in)
    {
      std::map<DomainName, std::vector<DomainSnapshot>> out;
      for (const auto& [date, snaps] : in.days)
      {
        std::set<DomainName> seen;
        for (const auto& s : snaps)
        {
          if (s.kind == in.kind && seen.insert(s.domain).second)
            out[s.domain].push_back(s);
        }
      }
      return out;
    }

    std::string join_runs(const std::vector<std::size_t>& runs)
    {
      return fmt::format("{}", fmt::join(runs, ";"));
    }
  }

  Report run_metric(const std::string& name, const AnalysisInput& in)
  {
    if (std::find(metric_names().begin(), metric_names().end(), name) == metric_names().end())
      throw ContractViolation(fmt::format("unknown metric '{}'", name));
    Report r;
    r.metric = name;
    r.config_digest = in.config_digest;
    auto daily = daily_lists(in.days, in.kind);
    auto set_for = [&](const std::string& date) { return resolve_set(daily, in.set, date); };
    const std::string set_name(to_string(in.set.mode));
    const std::string kind_name(to_string(in.kind));

    if (name == "adoption")
    {
      r.columns = {"date", "set", "kind", "members", "with_https", "pct"};
      for (const auto& date : report_dates(in))
      {
        auto set = set_for(date);
        if (set.empty())
          continue;
        std::size_t with = 0;
        for (const auto* s : members(in.days.at(date), set, in.kind))
          with += s->has_https() ? 1 : 0;
        r.rows.push_back({date, set_name, kind_name, std::to_string(set.size()), std::to_string(with),
                          num(adoption_rate(in.days.at(date), set, in.kind))});
      }
    }
    else if (name == "overlapping")
    {
      auto set = overlapping_set(daily, in.set.from, in.set.to);
      r.columns = {"domain"};
      for (const auto& d : set)
        r.rows.push_back({d.to_string()});
      r.detail["size"] = set.size();
    }
    else if (name == "ns")
    {
      r.columns = {"date", "https_domains", "full_cf", "partial_cf", "none_cf", "unknown"};
      for (const auto& date : report_dates(in))
      {
        std::map<NsCategory, std::size_t> counts;
        std::size_t https = 0;
        for (const auto* s : members(in.days.at(date), set_for(date), in.kind))
        {
          if (!s->has_https())
            continue;
          ++https;
          ++counts[ns_categorize(s->ns_names, in.providers)];
        }
        r.rows.push_back({date, std::to_string(https), std::to_string(counts[NsCategory::full_cf]),
                          std::to_string(counts[NsCategory::partial_cf]), std::to_string(counts[NsCategory::none_cf]),
                          std::to_string(counts[NsCategory::unknown])});
      }
    }
    else if (name == "cf_default")
    {
      if (!in.cf)
        throw ContractViolation("cf_default needs anycast ranges (CfDefaultSpec)");
      r.columns = {"date", "full_cf_https", "default", "customized", "default_pct"};
      for (const auto& date : report_dates(in))
      {
        std::size_t total = 0;
        std::size_t def = 0;
        for (const auto* s : members(in.days.at(date), set_for(date), in.kind))
        {
          if (!s->has_https() || ns_categorize(s->ns_names, in.providers) != NsCategory::full_cf)
            continue;
          ++total;
          auto recs = s->https_records();
          if (recs.size() == 1 && classify_cf_default(recs.front(), *in.cf) == CfClass::default_config)
            ++def;
        }
        r.rows.push_back(
          {date, std::to_string(total), std::to_string(def), std::to_string(total - def), num(pct(def, total))});
      }
    }
    else if (name == "iphint")
    {
      r.columns = {"date", "family", "match", "mismatch", "hint_absent"};
      for (const auto& date : report_dates(in))
      {
        std::map<HintConsistency, std::size_t> v4;
        std::map<HintConsistency, std::size_t> v6;
        for (const auto* s : members(in.days.at(date), set_for(date), in.kind))
        {
          if (!s->has_https())
            continue;
          auto c = iphint_consistency(*s);
          ++v4[c.v4];
          ++v6[c.v6];
        }
        for (auto* counts : {&v4, &v6})
        {
          r.rows.push_back({date, counts == &v4 ? "ipv4" : "ipv6", std::to_string((*counts)[HintConsistency::match]),
                            std::to_string((*counts)[HintConsistency::mismatch]),
                            std::to_string((*counts)[HintConsistency::hint_absent])});
        }
      }
    }
    else if (name == "mismatch_durations")
    {
      r.columns = {"domain", "runs"};
      std::size_t count = 0;
      std::size_t total = 0;
      for (const auto& [domain, series] : by_domain(in))
      {
        auto runs = mismatch_durations(series);
        if (runs.empty())
          continue;
        count += runs.size();
        total += std::accumulate(runs.begin(), runs.end(), std::size_t(0));
        r.rows.push_back({domain.to_string(), join_runs(runs)});
      }
      r.detail["runs"] = count;
      r.detail["mean_days"] = count == 0 ? 0.0 : double(total) / double(count);
    }
    else if (name == "ech_rotation")
    {
      if (in.hourly.size() < 2)
        throw ContractViolation("ech_rotation needs at least two hourly scans");
      auto rep = ech_rotation(RotationSeries::from_scans(in.hourly));
      std::map<DomainName, std::size_t> identities;
      for (const auto& life : rep.lives)
        ++identities[life.domain];
      r.columns = {"domain", "identities", "mean_hours"};
      for (const auto& [domain, mean] : rep.domain_mean_hours)
        r.rows.push_back({domain.to_string(), std::to_string(identities[domain]), num(mean)});
      r.detail["interval_hours"] = rep.interval_hours;
      r.detail["overall_mean_hours"] = rep.overall_mean_hours;
      r.detail["identities"] = rep.lives.size();
    }
    else if (name == "dnssec")
    {
      r.columns = {"date", "https_domains", "signed", "validated", "insecure", "signed_pct", "validated_pct",
                   "insecure_among_signed_pct"};
      for (const auto& date : report_dates(in))
      {
        auto st = dnssec_stats(in.days.at(date), set_for(date), in.kind);
        r.rows.push_back({date, std::to_string(st.https_domains), std::to_string(st.signed_count),
                          std::to_string(st.validated), std::to_string(st.insecure), num(st.signed_pct),
                          num(st.validated_pct), num(st.insecure_among_signed_pct)});
      }
    }
    else if (name == "alpn")
    {
      r.columns = {"date", "protocol", "domains", "pct"};
      for (const auto& date : report_dates(in))
      {
        auto dist = alpn_distribution(in.days.at(date), set_for(date), in.kind);
        for (const auto& [id, n] : dist.counts)
          r.rows.push_back({date, id, std::to_string(n), num(dist.pct.at(id))});
      }
    }
    else if (name == "intermittency")
    {
      r.columns = {"domain", "active", "same_ns_throughout", "ns_changed_at_toggle", "ns_absent_at_deactivation"};
      std::size_t stable = 0;
      std::size_t intermittent = 0;
      for (const auto& [domain, series] : by_domain(in))
      {
        if (series.size() < 2)
          continue;
        auto e = intermittency_report(series);
        if (!e.intermittent)
        {
          ++stable;
          continue;
        }
        ++intermittent;
        std::vector<std::string> spans;
        for (const auto& a : e.active)
          spans.push_back(a.from + ".." + a.to);
        r.rows.push_back({domain.to_string(), fmt::format("{}", fmt::join(spans, ";")),
                          e.same_ns_throughout ? "1" : "0", e.ns_changed_at_toggle ? "1" : "0",
                          e.ns_absent_at_deactivation ? "1" : "0"});
      }
      r.detail["stable"] = stable;
      r.detail["intermittent"] = intermittent;
    }
    return r;
  }
}
