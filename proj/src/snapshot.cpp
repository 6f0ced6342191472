// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/scanner.hpp"

#include <ctime>
#include <fmt/format.h>
#include <fstream>

namespace httpsrr
{
  using nlohmann::json;

  std::string_view to_string(TargetKind k)
  {
    return k == TargetKind::apex ? "apex" : "www";
  }

  std::string_view to_string(ProbeOutcome o)
  {
    switch (o)
    {
      case ProbeOutcome::reachable:
        return "reachable";
      case ProbeOutcome::unreachable_network:
        return "unreachable_network";
      case ProbeOutcome::refused:
        return "refused";
      case ProbeOutcome::tls_error:
        return "tls_error";
      case ProbeOutcome::timeout:
        return "timeout";
    }
    return "?";
  }

  ProbeOutcome probe_outcome_from_string(std::string_view s)
  {
    for (auto o : {ProbeOutcome::reachable, ProbeOutcome::unreachable_network, ProbeOutcome::refused,
                   ProbeOutcome::tls_error, ProbeOutcome::timeout})
    {
      if (to_string(o) == s)
        return o;
    }
    throw ParseError(ErrorCode::malformed_value, 0, fmt::format("unknown probe outcome '{}'", s));
  }

  std::string_view to_string(ProbeSource s)
  {
    switch (s)
    {
      case ProbeSource::hint:
        return "hint";
      case ProbeSource::addr_record:
        return "addr_record";
      case ProbeSource::both:
        return "both";
    }
    return "?";
  }

  namespace
  {
    ProbeSource probe_source_from_string(std::string_view s)
    {
      for (auto v : {ProbeSource::hint, ProbeSource::addr_record, ProbeSource::both})
      {
        if (to_string(v) == s)
          return v;
      }
      throw ParseError(ErrorCode::malformed_value, 0, fmt::format("unknown probe source '{}'", s));
    }

    TargetKind kind_from_string(std::string_view s)
    {
      if (s == "apex")
        return TargetKind::apex;
      if (s == "www")
        return TargetKind::www;
      throw ParseError(ErrorCode::malformed_value, 0, fmt::format("unknown target kind '{}'", s));
    }

    json capture_to_json(const std::string& type, const RrsetCapture& c)
    {
      json records = json::array();
      auto code = type_from_name(type).value_or(0);
      for (const auto& rr : c.records)
      {
        records.push_back({
          {"name", rr.name.to_string()},
          {"ttl", rr.ttl},
          {"rdata", to_hex(rr.rdata)},
          {"text", rdata_to_text(code, rr.rdata)},
        });
      }
      return {
        {"resolver", c.resolver},
        {"status", c.status},
        {"records", records},
        {"rrsig", c.rrsig},
        {"ad", c.ad},
        {"malformed", c.malformed},
      };
    }

    RrsetCapture capture_from_json(const std::string& type, const json& j)
    {
      auto code = type_from_name(type);
      if (!code)
        throw ParseError(ErrorCode::malformed_value, 0, fmt::format("unknown rrset type '{}'", type));
      RrsetCapture c;
      c.resolver = j.at("resolver").get<std::string>();
      c.status = j.at("status").get<std::string>();
      c.rrsig = j.value("rrsig", false);
      c.ad = j.value("ad", false);
      c.malformed = j.value("malformed", false);
      for (const auto& r : j.at("records"))
      {
        ResourceRecord rr;
        rr.name = DomainName::parse(r.at("name").get<std::string>());
        rr.type = *code;
        rr.ttl = r.at("ttl").get<std::uint32_t>();
        rr.rdata = from_hex(r.at("rdata").get<std::string>());
        c.records.push_back(std::move(rr));
      }
      return c;
    }

    const std::set<std::string> known_fields = {
      "v", "date", "timestamp", "domain", "kind", "rrsets", "cname_chain",
      "error", "ds_present", "ns_names", "probes",
    };
  }

  const RrsetCapture* DomainSnapshot::rrset(std::uint16_t type) const
  {
    auto it = rrsets.find(type_name(type));
    return it == rrsets.end() ? nullptr : &it->second;
  }

  std::vector<HttpsRecord> DomainSnapshot::https_records() const
  {
    std::vector<HttpsRecord> out;
    if (auto* c = rrset(rrtype::HTTPS))
    {
      for (const auto& rr : c->records)
      {
        try
        {
          out.push_back(parse_wire(rr.rdata, rr.name, rr.ttl));
        }
        catch (const ParseError&)
        {
        }
      }
    }
    return out;
  }

  bool DomainSnapshot::has_https() const
  {
    auto* c = rrset(rrtype::HTTPS);
    return c && !c->records.empty();
  }

  DomainName DomainSnapshot::final_name() const
  {
    return cname_chain.empty() ? domain : cname_chain.back();
  }

  bool DomainSnapshot::rrsig_present(std::uint16_t type) const
  {
    auto* c = rrset(type);
    return c && c->rrsig;
  }

  bool DomainSnapshot::ad_bit(std::uint16_t type) const
  {
    auto* c = rrset(type);
    return c && c->ad;
  }

  std::set<IpAddress> DomainSnapshot::hint_ips(bool v4) const
  {
    std::set<IpAddress> out;
    for (const auto& rec : https_records())
    {
      if (rec.is_alias())
        continue;
      if (v4)
      {
        if (auto* h = rec.get<Ipv4HintValue>(SvcKey::ipv4hint))
          out.insert(h->addrs.begin(), h->addrs.end());
      }
      else if (auto* h = rec.get<Ipv6HintValue>(SvcKey::ipv6hint))
      {
        out.insert(h->addrs.begin(), h->addrs.end());
      }
    }
    return out;
  }

  std::set<IpAddress> DomainSnapshot::addr_ips(bool v4) const
  {
    std::set<IpAddress> out;
    if (auto* c = rrset(v4 ? rrtype::A : rrtype::AAAA))
    {
      for (const auto& rr : c->records)
      {
        try
        {
          if (v4)
            out.insert(decode_a(rr.rdata));
          else
            out.insert(decode_aaaa(rr.rdata));
        }
        catch (const ParseError&)
        {
        }
      }
    }
    return out;
  }

  std::vector<EchKeyIdentity> DomainSnapshot::ech_identities() const
  {
    std::vector<EchKeyIdentity> out;
    for (const auto& rec : https_records())
    {
      auto* ech = rec.get<EchValue>(SvcKey::ech);
      if (!ech || rec.is_alias())
        continue;
      try
      {
        auto id = primary_identity(parse_ech_config_list(ech->config_list));
        if (std::find(out.begin(), out.end(), id) == out.end())
          out.push_back(id);
      }
      catch (const ParseError&)
      {
      }
    }
    return out;
  }

  json DomainSnapshot::to_json() const
  {
    json j = {
      {"v", format_version},
      {"date", date},
      {"timestamp", timestamp},
      {"domain", domain.to_string()},
      {"kind", std::string(to_string(kind))},
      {"ds_present", ds_present},
    };
    json sets = json::object();
    for (const auto& [type, c] : rrsets)
      sets[type] = capture_to_json(type, c);
    j["rrsets"] = sets;
    json chain = json::array();
    for (const auto& n : cname_chain)
      chain.push_back(n.to_string());
    j["cname_chain"] = chain;
    j["error"] = error ? json(*error) : json(nullptr);
    json ns = json::array();
    for (const auto& n : ns_names)
      ns.push_back(n.to_string());
    j["ns_names"] = ns;
    if (probes)
    {
      json p = json::array();
      for (const auto& r : *probes)
      {
        p.push_back({
          {"ip", httpsrr::to_string(r.ip)},
          {"source", std::string(to_string(r.source))},
          {"port", r.port},
          {"outcome", std::string(to_string(r.outcome))},
        });
      }
      j["probes"] = p;
    }
    for (const auto& [k, v] : extra.items())
      j[k] = v;
    return j;
  }

  DomainSnapshot DomainSnapshot::from_json(const json& j)
  {
    if (!j.is_object())
      throw ParseError(ErrorCode::syntax, 0, "snapshot is not an object");
    auto version = j.at("v").get<int>();
    if (version < 1)
      throw ParseError(ErrorCode::unrecognized_version, 0, fmt::format("snapshot version {}", version));
    DomainSnapshot s;
    s.date = j.at("date").get<std::string>();
    s.timestamp = j.at("timestamp").get<std::int64_t>();
    s.domain = DomainName::parse(j.at("domain").get<std::string>());
    s.kind = kind_from_string(j.at("kind").get<std::string>());
    s.ds_present = j.value("ds_present", false);
    if (auto it = j.find("rrsets"); it != j.end())
    {
      for (const auto& [type, c] : it->items())
        s.rrsets.emplace(type, capture_from_json(type, c));
    }
    if (auto it = j.find("cname_chain"); it != j.end())
    {
      for (const auto& n : *it)
        s.cname_chain.push_back(DomainName::parse(n.get<std::string>()));
    }
    if (auto it = j.find("error"); it != j.end() && !it->is_null())
      s.error = it->get<std::string>();
    if (auto it = j.find("ns_names"); it != j.end())
    {
      for (const auto& n : *it)
        s.ns_names.push_back(DomainName::parse(n.get<std::string>()));
    }
    if (auto it = j.find("probes"); it != j.end() && !it->is_null())
    {
      s.probes.emplace();
      for (const auto& p : *it)
      {
        auto ip = parse_ip(p.at("ip").get<std::string>());
        if (!ip)
          throw ParseError(ErrorCode::malformed_value, 0, "bad probe address");
        s.probes->push_back({*ip, probe_source_from_string(p.at("source").get<std::string>()),
                             p.at("port").get<std::uint16_t>(),
                             probe_outcome_from_string(p.at("outcome").get<std::string>())});
      }
    }
    for (const auto& [k, v] : j.items())
    {
      if (!known_fields.count(k) || (k == "v" && version != format_version))
        s.extra[k] = v;
    }
    return s;
  }

  std::string utc_date(std::int64_t unix_seconds)
  {
    std::time_t t = std::time_t(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04}-{:02}-{:02}", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday);
  }

  std::int64_t unix_now()
  {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
  }

  void DayManifest::add(const DomainSnapshot& s)
  {
    ++snapshots;
    ++(s.kind == TargetKind::apex ? apex : www);
    with_https += s.has_https() ? 1 : 0;
    errors += s.error ? 1 : 0;
  }

  json DayManifest::to_json() const
  {
    return {
      {"date", date},
      {"tag", tag},
      {"snapshots", snapshots},
      {"apex", apex},
      {"www", www},
      {"with_https", with_https},
      {"errors", errors},
      {"skipped_rows", skipped_rows},
      {"config_digest", config_digest},
    };
  }

  DayManifest DayManifest::from_json(const json& j)
  {
    DayManifest m;
    m.date = j.at("date").get<std::string>();
    m.tag = j.value("tag", "");
    m.snapshots = j.value("snapshots", std::size_t(0));
    m.apex = j.value("apex", std::size_t(0));
    m.www = j.value("www", std::size_t(0));
    m.with_https = j.value("with_https", std::size_t(0));
    m.errors = j.value("errors", std::size_t(0));
    m.skipped_rows = j.value("skipped_rows", std::size_t(0));
    m.config_digest = j.value("config_digest", "");
    return m;
  }

  namespace
  {
    void check_day(const std::string& date, const std::string& tag)
    {
      bool ok = date.size() == 10 && date[4] == '-' && date[7] == '-';
      for (std::size_t i = 0; ok && i < date.size(); ++i)
      {
        if (i != 4 && i != 7)
          ok = std::isdigit(static_cast<unsigned char>(date[i]));
      }
      if (!ok)
        throw ContractViolation(fmt::format("date '{}' is not YYYY-MM-DD", date));
      for (char c : tag)
      {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
          throw ContractViolation(fmt::format("tag '{}' has characters outside [A-Za-z0-9_.-]", tag));
      }
    }

    std::string suffix(const std::string& tag)
    {
      return tag.empty() ? "" : "-" + tag;
    }
  }

  SnapshotStore::SnapshotStore(std::filesystem::path dir) :
    dir_(std::move(dir))
  {}

  std::filesystem::path SnapshotStore::day_path(const std::string& date, const std::string& tag) const
  {
    check_day(date, tag);
    return dir_ / ("snapshots-" + date + suffix(tag) + ".jsonl");
  }

  std::filesystem::path SnapshotStore::manifest_path(const std::string& date, const std::string& tag) const
  {
    check_day(date, tag);
    return dir_ / ("manifest-" + date + suffix(tag) + ".json");
  }

  std::set<SnapshotStore::Key>& SnapshotStore::keys_for(const std::string& date, const std::string& tag)
  {
    auto id = date + suffix(tag);
    auto it = seen_.find(id);
    if (it != seen_.end())
      return it->second;
    auto& keys = seen_[id];
    for (const auto& s : load(date, tag).snapshots)
      keys.emplace(s.date, s.domain, s.kind);
    return keys;
  }

  void SnapshotStore::append(const DomainSnapshot& s, const std::string& tag)
  {
    append_all({s}, tag);
  }

  void SnapshotStore::append_all(const std::vector<DomainSnapshot>& snapshots, const std::string& tag)
  {
    std::map<std::string, std::vector<const DomainSnapshot*>> by_day;
    for (const auto& s : snapshots)
      by_day[s.date].push_back(&s);
    std::filesystem::create_directories(dir_);
    for (const auto& [date, list] : by_day)
    {
      auto& keys = keys_for(date, tag);
      for (const auto* s : list)
      {
        if (keys.count({s->date, s->domain, s->kind}))
        {
          throw ContractViolation(fmt::format(
            "{} {} already stored for {}", to_string(s->kind), s->domain.to_string(), s->date));
        }
      }
      std::ofstream out(day_path(date, tag), std::ios::app);
      if (!out)
        throw std::runtime_error(fmt::format("cannot open {}", day_path(date, tag).string()));
      for (const auto* s : list)
      {
        if (!keys.emplace(s->date, s->domain, s->kind).second)
        {
          throw ContractViolation(fmt::format(
            "{} {} appears twice for {}", to_string(s->kind), s->domain.to_string(), s->date));
        }
        out << s->to_json().dump() << '\n';
      }
      if (!out)
        throw std::runtime_error(fmt::format("write to {} failed", day_path(date, tag).string()));
    }
  }

  LoadResult SnapshotStore::load(const std::string& date, const std::string& tag) const
  {
    LoadResult result;
    std::ifstream in(day_path(date, tag));
    if (!in)
      return result;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line))
    {
      ++number;
      if (line.find_first_not_of(" \t\r") == std::string::npos)
        continue;
      try
      {
        result.snapshots.push_back(DomainSnapshot::from_json(json::parse(line)));
      }
      catch (const std::exception& e)
      {
        ++result.corrupt_lines;
        result.problems.push_back(fmt::format("line {}: {}", number, e.what()));
      }
    }
    return result;
  }

  std::vector<std::string> SnapshotStore::days(const std::string& tag) const
  {
    std::vector<std::string> out;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir_, ec))
      return out;
    const std::string prefix = "snapshots-";
    const std::string tail = suffix(tag) + ".jsonl";
    for (const auto& entry : std::filesystem::directory_iterator(dir_))
    {
      auto name = entry.path().filename().string();
      if (name.size() != prefix.size() + 10 + tail.size() || !name.starts_with(prefix) || !name.ends_with(tail))
        continue;
      out.push_back(name.substr(prefix.size(), 10));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<std::pair<std::string, std::string>> SnapshotStore::files() const
  {
    std::vector<std::pair<std::string, std::string>> out;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir_, ec))
      return out;
    const std::string prefix = "snapshots-";
    const std::string ext = ".jsonl";
    for (const auto& entry : std::filesystem::directory_iterator(dir_))
    {
      auto name = entry.path().filename().string();
      if (!name.starts_with(prefix) || !name.ends_with(ext) || name.size() < prefix.size() + 10 + ext.size())
        continue;
      auto date = name.substr(prefix.size(), 10);
      auto rest = name.substr(prefix.size() + 10, name.size() - prefix.size() - 10 - ext.size());
      if (!rest.empty() && (rest[0] != '-' || rest.size() == 1))
        continue;
      out.emplace_back(date, rest.empty() ? "" : rest.substr(1));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  void SnapshotStore::write_manifest(const DayManifest& m) const
  {
    std::filesystem::create_directories(dir_);
    std::ofstream out(manifest_path(m.date, m.tag));
    out << m.to_json().dump(2) << '\n';
    if (!out)
      throw std::runtime_error(fmt::format("write to {} failed", manifest_path(m.date, m.tag).string()));
  }

  std::optional<DayManifest> SnapshotStore::read_manifest(const std::string& date, const std::string& tag) const
  {
    std::ifstream in(manifest_path(date, tag));
    if (!in)
      return std::nullopt;
    return DayManifest::from_json(json::parse(in));
  }
}
