// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/resolution.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <json.hpp>
#include <set>

namespace httpsrr
{
  // ---------------------------------------------------------------- profiles

  const std::map<std::string, PolicyProfile>& builtin_profiles()
  {
    static const std::map<std::string, PolicyProfile> profiles = [] {
      std::map<std::string, PolicyProfile> out;

      PolicyProfile rfc;
      rfc.name = "rfc";
      out[rfc.name] = rfc;

      PolicyProfile chrome;
      chrome.name = "chrome";
      chrome.follow_alias_target = false;
      chrome.follow_service_target = false;
      chrome.use_port_param = false;
      chrome.port_fallback_443 = false;
      chrome.ip_preference = IpPreference::addr_records_first;
      chrome.use_ip_hints = false;
      chrome.ip_failover = IpFailover::hard_fail;
      chrome.skip_rrset_on_empty_alpn = true;
      chrome.ech_on_malformed = EchOnMalformed::hard_fail;
      chrome.ech_split = EchSplit::unsupported_misdirect;
      chrome.endpoint_failover = false;
      out[chrome.name] = chrome;

      PolicyProfile edge = chrome;
      edge.name = "edge";
      out[edge.name] = edge;

      PolicyProfile safari;
      safari.name = "safari";
      safari.use_https_rr_for_plain_scheme = false;
      safari.ip_preference = IpPreference::hints_first;
      safari.ip_failover = IpFailover::immediate_alternate;
      safari.ech_shared = false;
      safari.ech_split = EchSplit::unsupported_misdirect;
      safari.endpoint_failover = false;
      out[safari.name] = safari;

      PolicyProfile firefox;
      firefox.name = "firefox";
      firefox.follow_alias_target = false;
      firefox.ip_preference = IpPreference::hints_first;
      firefox.ip_failover = IpFailover::delayed_alternate;
      firefox.h3_only_sends_h2_probe = true;
      firefox.ech_on_malformed = EchOnMalformed::ignore_and_plain_tls;
      firefox.ech_split = EchSplit::unsupported_misdirect;
      firefox.endpoint_failover = false;
      out[firefox.name] = firefox;

      return out;
    }();
    return profiles;
  }

  const PolicyProfile& builtin_profile(const std::string& name)
  {
    const auto& all = builtin_profiles();
    auto it = all.find(name);
    if (it == all.end())
      throw std::out_of_range(fmt::format("unknown profile '{}'", name));
    return it->second;
  }

  std::string_view to_string(IpPreference v)
  {
    return v == IpPreference::hints_first ? "hints_first" : "addr_records_first";
  }

  std::string_view to_string(IpFailover v)
  {
    switch (v)
    {
      case IpFailover::immediate_alternate:
        return "immediate_alternate";
      case IpFailover::delayed_alternate:
        return "delayed_alternate";
      case IpFailover::hard_fail:
        return "hard_fail";
    }
    return "?";
  }

  std::string_view to_string(EchOnMalformed v)
  {
    return v == EchOnMalformed::hard_fail ? "hard_fail" : "ignore_and_plain_tls";
  }

  std::string_view to_string(EchOnMismatch)
  {
    return "retry";
  }

  std::string_view to_string(EchSplit v)
  {
    return v == EchSplit::supported ? "supported" : "unsupported_misdirect";
  }

  std::string_view to_string(Scheme v)
  {
    switch (v)
    {
      case Scheme::bare:
        return "bare";
      case Scheme::http:
        return "http";
      case Scheme::https:
        return "https";
    }
    return "?";
  }

  std::string_view to_string(IpSource v)
  {
    return v == IpSource::hint ? "hint" : "addr_record";
  }

  std::string_view to_string(EchMode v)
  {
    switch (v)
    {
      case EchMode::off:
        return "off";
      case EchMode::shared:
        return "shared";
      case EchMode::split:
        return "split";
      case EchMode::split_misdirected:
        return "split_misdirected";
      case EchMode::retry_pending:
        return "retry_pending";
    }
    return "?";
  }

  std::string_view to_string(Transport v)
  {
    return v == Transport::tls ? "tls" : "plain_http";
  }

  std::string_view to_string(Outcome v)
  {
    switch (v)
    {
      case Outcome::connected:
        return "connected";
      case Outcome::port_refused:
        return "port_refused";
      case Outcome::ip_unreachable:
        return "ip_unreachable";
      case Outcome::tls_cert_invalid:
        return "tls_cert_invalid";
      case Outcome::ech_rejected_with_retry:
        return "ech_rejected_with_retry";
      case Outcome::ech_rejected_terminal:
        return "ech_rejected_terminal";
      case Outcome::alpn_mismatch:
        return "alpn_mismatch";
    }
    return "?";
  }

  std::string_view to_string(Terminal::Kind v)
  {
    return v == Terminal::Kind::success ? "success" : "hard_fail";
  }

  namespace
  {
    template <typename E, std::size_t N>
    E enum_from(const std::string& key, const std::string& text, const E (&values)[N])
    {
      for (auto v : values)
      {
        if (to_string(v) == text)
          return v;
      }
      throw std::invalid_argument(fmt::format("profile key '{}': bad value '{}'", key, text));
    }

    bool yes_no(const std::string& key, const nlohmann::json& v)
    {
      if (v.is_boolean())
        return v.get<bool>();
      if (v.is_string())
      {
        auto s = v.get<std::string>();
        if (s == "yes")
          return true;
        if (s == "no")
          return false;
      }
      throw std::invalid_argument(fmt::format("profile key '{}': expected yes/no", key));
    }
  }

  std::string dump_profile(const PolicyProfile& p)
  {
    auto yn = [](bool b) { return b ? "yes" : "no"; };
    nlohmann::ordered_json j;
    j["name"] = p.name;
    j["use_https_rr_for_plain_scheme"] = yn(p.use_https_rr_for_plain_scheme);
    j["follow_alias_target"] = yn(p.follow_alias_target);
    j["follow_service_target"] = yn(p.follow_service_target);
    j["use_port_param"] = yn(p.use_port_param);
    j["port_fallback_443"] = yn(p.port_fallback_443);
    j["ip_preference"] = to_string(p.ip_preference);
    j["use_ip_hints"] = yn(p.use_ip_hints);
    j["ip_failover"] = to_string(p.ip_failover);
    j["use_alpn"] = yn(p.use_alpn);
    j["skip_rrset_on_empty_alpn"] = yn(p.skip_rrset_on_empty_alpn);
    j["h3_only_sends_h2_probe"] = yn(p.h3_only_sends_h2_probe);
    j["ech_shared"] = yn(p.ech_shared);
    j["ech_on_malformed"] = to_string(p.ech_on_malformed);
    j["ech_on_mismatch"] = to_string(p.ech_on_mismatch);
    j["ech_split"] = to_string(p.ech_split);
    j["endpoint_failover"] = yn(p.endpoint_failover);
    j["alias_chain_limit"] = p.alias_chain_limit;
    return j.dump(2);
  }

  PolicyProfile load_profile(std::string_view json_text)
  {
    auto j = nlohmann::json::parse(json_text);
    if (!j.is_object())
      throw std::invalid_argument("profile document must be an object");
    PolicyProfile p = builtin_profile("rfc");
    p.name = "custom";
    for (auto& [key, v] : j.items())
    {
      auto str = [&] {
        if (!v.is_string())
          throw std::invalid_argument(fmt::format("profile key '{}': expected a string", key));
        return v.get<std::string>();
      };
      if (key == "name")
        p.name = str();
      else if (key == "use_https_rr_for_plain_scheme")
        p.use_https_rr_for_plain_scheme = yes_no(key, v);
      else if (key == "follow_alias_target")
        p.follow_alias_target = yes_no(key, v);
      else if (key == "follow_service_target")
        p.follow_service_target = yes_no(key, v);
      else if (key == "use_port_param")
        p.use_port_param = yes_no(key, v);
      else if (key == "port_fallback_443")
        p.port_fallback_443 = yes_no(key, v);
      else if (key == "ip_preference")
        p.ip_preference = enum_from(
          key, str(), {IpPreference::hints_first, IpPreference::addr_records_first});
      else if (key == "use_ip_hints")
        p.use_ip_hints = yes_no(key, v);
      else if (key == "ip_failover")
        p.ip_failover = enum_from(
          key,
          str(),
          {IpFailover::immediate_alternate, IpFailover::delayed_alternate, IpFailover::hard_fail});
      else if (key == "use_alpn")
      {
        if (!yes_no(key, v))
          throw std::invalid_argument("use_alpn must be yes");
      }
      else if (key == "skip_rrset_on_empty_alpn")
        p.skip_rrset_on_empty_alpn = yes_no(key, v);
      else if (key == "h3_only_sends_h2_probe")
        p.h3_only_sends_h2_probe = yes_no(key, v);
      else if (key == "ech_shared")
        p.ech_shared = yes_no(key, v);
      else if (key == "ech_on_malformed")
        p.ech_on_malformed = enum_from(
          key, str(), {EchOnMalformed::hard_fail, EchOnMalformed::ignore_and_plain_tls});
      else if (key == "ech_on_mismatch")
        p.ech_on_mismatch = enum_from(key, str(), {EchOnMismatch::retry});
      else if (key == "ech_split")
        p.ech_split =
          enum_from(key, str(), {EchSplit::unsupported_misdirect, EchSplit::supported});
      else if (key == "endpoint_failover")
        p.endpoint_failover = yes_no(key, v);
      else if (key == "alias_chain_limit")
        p.alias_chain_limit = v.get<std::size_t>();
      else
        throw std::invalid_argument(fmt::format("unknown profile key '{}'", key));
    }
    return p;
  }

  // ---------------------------------------------------------------- dns view

  void DnsView::add_https(const HttpsRecord& rec)
  {
    names_[rec.owner].https.push_back(rec);
  }

  void DnsView::add_a(const DomainName& name, Ipv4 ip)
  {
    names_[name].a.push_back(ip);
  }

  void DnsView::add_aaaa(const DomainName& name, Ipv6 ip)
  {
    names_[name].aaaa.push_back(ip);
  }

  void DnsView::set(const DomainName& name, NameRecords records)
  {
    names_[name] = std::move(records);
  }

  const NameRecords& DnsView::lookup(const DomainName& name) const
  {
    static const NameRecords empty;
    auto it = names_.find(name);
    return it == names_.end() ? empty : it->second;
  }

  Request Request::parse(std::string_view url)
  {
    Request r;
    r.scheme = Scheme::bare;
    auto lower = [](std::string_view s) {
      std::string out(s);
      std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return char(std::tolower(c));
      });
      return out;
    };
    auto text = lower(url);
    std::string_view rest = text;
    if (rest.starts_with("https://"))
    {
      r.scheme = Scheme::https;
      rest.remove_prefix(8);
    }
    else if (rest.starts_with("http://"))
    {
      r.scheme = Scheme::http;
      rest.remove_prefix(7);
    }
    else if (rest.find("://") != std::string_view::npos)
    {
      throw ParseError(ErrorCode::syntax, 0, fmt::format("unsupported scheme in '{}'", url));
    }
    auto end = rest.find_first_of("/:?#");
    auto host = rest.substr(0, end);
    if (host.empty())
      throw ParseError(ErrorCode::syntax, 0, fmt::format("no host in '{}'", url));
    r.host = DomainName::parse(host);
    return r;
  }

  std::string Request::to_string() const
  {
    auto host = this->host.to_string();
    host.pop_back();
    switch (scheme)
    {
      case Scheme::bare:
        return host;
      case Scheme::http:
        return "http://" + host;
      case Scheme::https:
        return "https://" + host;
    }
    return host;
  }

  // ---------------------------------------------------------------- selection

  EndpointChoice select_endpoints(const std::vector<HttpsRecord>& rrset)
  {
    EndpointChoice out;
    if (rrset.empty())
      return out;

    std::vector<std::pair<Bytes, const HttpsRecord*>> keyed;
    for (const auto& r : rrset)
      keyed.emplace_back(to_wire(r), &r);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      if (a.second->svc_priority != b.second->svc_priority)
        return a.second->svc_priority < b.second->svc_priority;
      return a.first < b.first;
    });

    if (keyed.front().second->is_alias())
    {
      out.kind = EndpointChoice::Kind::alias;
      out.alias_target = keyed.front().second->target;
      return out;
    }
    out.kind = EndpointChoice::Kind::service;
    for (const auto& [wire, rec] : keyed)
      out.endpoints.push_back(*rec);
    return out;
  }

  bool Attempt::has_annotation(std::string_view a) const
  {
    return std::find(annotations.begin(), annotations.end(), a) != annotations.end();
  }

  // ---------------------------------------------------------------- planning

  namespace
  {
    const std::vector<std::string> default_alpn = {"h2", "http/1.1"};

    class Planner
    {
    public:
      Planner(const Request& req, const PolicyProfile& profile, const DnsView& dns) :
        dns_(dns)
      {
        plan_.request = req;
        plan_.profile = profile;
      }

      ConnectionPlan run()
      {
        const auto& origin = plan_.request.host;
        query(origin, "HTTPS");
        query(origin, "A");
        query(origin, "AAAA");
        auto choice = select_endpoints(usable_rrset(origin));

        if (choice.kind == EndpointChoice::Kind::none)
        {
          if (plan_.request.scheme == Scheme::https)
            default_endpoint(origin);
          else
            plain_http_endpoint();
        }
        else if (plan_.request.scheme != Scheme::https && !profile().use_https_rr_for_plain_scheme)
        {
          plain_http_endpoint();
        }
        else if (choice.kind == EndpointChoice::Kind::alias)
        {
          if (profile().follow_alias_target)
            follow_alias(choice.alias_target);
          else
            default_endpoint(origin);
        }
        else
        {
          service_endpoints(choice.endpoints, origin);
        }

        if (!plan_.terminal)
        {
          if (plan_.endpoints.empty())
            fail(first_failure_.empty() ? std::string(fail_reason::no_address_owner) : first_failure_);
          else
            issue_first();
        }
        return std::move(plan_);
      }

    private:
      const PolicyProfile& profile() const
      {
        return plan_.profile;
      }

      void query(const DomainName& name, std::string qtype)
      {
        DnsQuery q{name, std::move(qtype)};
        if (std::find(plan_.queries.begin(), plan_.queries.end(), q) == plan_.queries.end())
          plan_.queries.push_back(std::move(q));
      }

      void fail(std::string reason)
      {
        plan_.terminal = Terminal{Terminal::Kind::hard_fail, std::move(reason), ""};
      }

      std::vector<HttpsRecord> usable_rrset(const DomainName& name) const
      {
        auto rrset = dns_.lookup(name).https;
        if (profile().skip_rrset_on_empty_alpn)
        {
          std::erase_if(
            rrset, [](const auto& r) { return !r.is_alias() && !r.find(SvcKey::alpn); });
        }
        return rrset;
      }

      std::vector<Candidate> address_candidates(const DomainName& host) const
      {
        std::vector<Candidate> out;
        const auto& rr = dns_.lookup(host);
        for (const auto& ip : rr.a)
          out.push_back({IpAddress{ip}, IpSource::addr_record});
        for (const auto& ip : rr.aaaa)
          out.push_back({IpAddress{ip}, IpSource::addr_record});
        return out;
      }

      static void append_unique(std::vector<Candidate>& out, const std::vector<Candidate>& more)
      {
        for (const auto& c : more)
        {
          auto same_ip = [&](const Candidate& x) { return x.ip == c.ip; };
          if (std::none_of(out.begin(), out.end(), same_ip))
            out.push_back(c);
        }
      }

      Attempt base_attempt(const DomainName& host) const
      {
        Attempt a;
        a.transport = Transport::tls;
        a.host = host;
        a.sni = plan_.request.host;
        a.port = 443;
        a.alpn = default_alpn;
        return a;
      }

      void add_endpoint(Attempt base, std::vector<Candidate> candidates, std::string no_address_reason)
      {
        if (candidates.empty())
        {
          if (first_failure_.empty())
            first_failure_ = std::move(no_address_reason);
          return;
        }
        EndpointPlan ep;
        ep.planned_port = base.port;
        ep.base = std::move(base);
        ep.candidates = std::move(candidates);
        plan_.endpoints.push_back(std::move(ep));
      }

      std::string missing_reason(const DomainName& host) const
      {
        return std::string(
          host == plan_.request.host ? fail_reason::no_address_owner :
                                       fail_reason::no_address_target);
      }

      void default_endpoint(const DomainName& host)
      {
        add_endpoint(base_attempt(host), address_candidates(host), missing_reason(host));
      }

      void plain_http_endpoint()
      {
        const auto& origin = plan_.request.host;
        auto a = base_attempt(origin);
        a.transport = Transport::plain_http;
        a.port = 80;
        a.alpn = {"http/1.1"};
        add_endpoint(std::move(a), address_candidates(origin), missing_reason(origin));
      }

      void follow_alias(DomainName target)
      {
        DomainName current = plan_.request.host;
        std::set<DomainName> visited{current};
        std::size_t hops = 0;
        while (true)
        {
          if (target.is_root())
            target = current;
          if (++hops > profile().alias_chain_limit || !visited.insert(target).second)
          {
            fail(std::string(fail_reason::alias_loop));
            return;
          }
          query(target, "HTTPS");
          auto choice = select_endpoints(usable_rrset(target));
          if (choice.kind == EndpointChoice::Kind::alias)
          {
            current = target;
            target = choice.alias_target;
            continue;
          }
          query(target, "A");
          query(target, "AAAA");
          if (choice.kind == EndpointChoice::Kind::service)
            service_endpoints(choice.endpoints, target);
          else
            default_endpoint(target);
          return;
        }
      }

      void service_endpoints(const std::vector<HttpsRecord>& endpoints, const DomainName& owner)
      {
        for (const auto& rec : endpoints)
        {
          service_endpoint(rec, owner);
          if (plan_.terminal)
            return;
          if (!profile().endpoint_failover)
            return;
        }
      }

      std::vector<std::string> offered_alpn(const HttpsRecord& rec) const
      {
        auto* alpn = rec.get<AlpnValue>(SvcKey::alpn);
        if (!profile().use_alpn || !alpn)
          return {"http/1.1"};
        auto out = alpn->ids;
        bool no_default = rec.find(SvcKey::no_default_alpn) != nullptr;
        if (!no_default && std::find(out.begin(), out.end(), "http/1.1") == out.end())
          out.push_back("http/1.1");
        return out;
      }

      void service_endpoint(const HttpsRecord& rec, const DomainName& owner)
      {
        const auto& origin = plan_.request.host;
        auto rec_target = rec.target.is_root() ? owner : rec.target;
        auto host = profile().follow_service_target ? rec_target : origin;
        if (host != owner)
        {
          query(host, "A");
          query(host, "AAAA");
        }

        std::vector<Candidate> hints;
        if (profile().use_ip_hints)
        {
          if (auto* v4 = rec.get<Ipv4HintValue>(SvcKey::ipv4hint))
          {
            for (const auto& ip : v4->addrs)
              hints.push_back({IpAddress{ip}, IpSource::hint});
          }
          if (auto* v6 = rec.get<Ipv6HintValue>(SvcKey::ipv6hint))
          {
            for (const auto& ip : v6->addrs)
              hints.push_back({IpAddress{ip}, IpSource::hint});
          }
        }
        auto addrs = address_candidates(host);
        std::vector<Candidate> candidates;
        if (profile().ip_preference == IpPreference::hints_first)
        {
          append_unique(candidates, hints);
          append_unique(candidates, addrs);
        }
        else
        {
          append_unique(candidates, addrs.empty() ? hints : addrs);
        }

        auto a = base_attempt(host);
        if (profile().use_port_param)
        {
          if (auto* port = rec.get<PortValue>(SvcKey::port))
            a.port = port->port;
        }
        a.alpn = offered_alpn(rec);
        auto* alpn = rec.get<AlpnValue>(SvcKey::alpn);
        if (
          profile().h3_only_sends_h2_probe && alpn &&
          alpn->ids == std::vector<std::string>{"h3"})
        {
          a.annotations.push_back("h2_probe");
        }

        if (auto* ech = rec.get<EchValue>(SvcKey::ech); ech && profile().ech_shared)
        {
          if (!apply_ech(a, candidates, ech->config_list))
            return;
        }
        add_endpoint(std::move(a), std::move(candidates), missing_reason(host));
      }

      /// False when the plan hard-failed.
      bool apply_ech(Attempt& a, std::vector<Candidate>& candidates, const Bytes& payload)
      {
        EchKeyIdentity id;
        DomainName public_host;
        try
        {
          auto list = parse_ech_config_list(payload);
          id = primary_identity(list);
          public_host = DomainName::parse(public_name(list));
        }
        catch (const ParseError&)
        {
          if (profile().ech_on_malformed == EchOnMalformed::hard_fail)
          {
            fail(std::string(fail_reason::malformed_ech));
            return false;
          }
          a.annotations.push_back("ech_ignored_malformed");
          return true;
        }

        a.sni = public_host;
        a.inner_sni = plan_.request.host;
        a.ech_key = id;

        auto facing = address_candidates(public_host);
        bool shared = public_host == a.host || facing.empty() ||
          std::any_of(facing.begin(), facing.end(), [&](const Candidate& f) {
                        return std::any_of(candidates.begin(), candidates.end(), [&](const Candidate& c) {
                          return c.ip == f.ip;
                        });
                      });
        if (shared)
        {
          a.ech_mode = EchMode::shared;
        }
        else if (profile().ech_split == EchSplit::supported)
        {
          query(public_host, "A");
          query(public_host, "AAAA");
          a.ech_mode = EchMode::split;
          candidates = facing;
        }
        else
        {
          a.ech_mode = EchMode::split_misdirected;
        }
        return true;
      }

      void issue_first()
      {
        plan_.endpoint_index = 0;
        plan_.candidate_index = 0;
        const auto& ep = plan_.endpoints.front();
        Attempt a = ep.base;
        a.ip = ep.candidates.front().ip;
        a.ip_source = ep.candidates.front().source;
        a.index = 0;
        plan_.attempts.push_back(std::move(a));
      }

      const DnsView& dns_;
      ConnectionPlan plan_;
      std::string first_failure_;
    };

    void hard_fail(ConnectionPlan& plan, std::string_view reason)
    {
      plan.terminal = Terminal{Terminal::Kind::hard_fail, std::string(reason), ""};
    }

    void push_attempt(ConnectionPlan& plan, Attempt a, std::string annotation)
    {
      a.index = plan.attempts.size();
      a.annotations.erase(
        std::remove_if(
          a.annotations.begin(),
          a.annotations.end(),
          [](const auto& s) { return s != "h2_probe" && s != "ech_ignored_malformed"; }),
        a.annotations.end());
      a.annotations.push_back(std::move(annotation));
      plan.attempts.push_back(std::move(a));
    }

    void next_endpoint_or_fail(ConnectionPlan& plan, std::string_view reason)
    {
      if (plan.profile.endpoint_failover && plan.endpoint_index + 1 < plan.endpoints.size())
      {
        ++plan.endpoint_index;
        plan.candidate_index = 0;
        const auto& ep = plan.endpoints[plan.endpoint_index];
        Attempt a = ep.base;
        a.ip = ep.candidates.front().ip;
        a.ip_source = ep.candidates.front().source;
        push_attempt(plan, std::move(a), "endpoint_failover");
        return;
      }
      hard_fail(plan, reason);
    }
  }

  ConnectionPlan build_plan(const Request& request, const PolicyProfile& profile, const DnsView& dns)
  {
    return Planner(request, profile, dns).run();
  }

  ConnectionPlan advance(const ConnectionPlan& plan, const AttemptResult& result)
  {
    if (plan.terminal)
      throw ContractViolation("advance() called on a terminal plan");
    if (plan.attempts.empty() || result.attempt_index != plan.attempts.back().index)
    {
      throw ContractViolation(fmt::format(
        "result for attempt {} does not match the last issued attempt", result.attempt_index));
    }

    ConnectionPlan next = plan;
    const Attempt& last = plan.attempts.back();
    const auto& profile = plan.profile;

    switch (result.outcome)
    {
      case Outcome::connected:
        next.terminal = Terminal{Terminal::Kind::success, "", result.alpn};
        break;

      case Outcome::port_refused:
        if (last.transport == Transport::tls && profile.port_fallback_443 && last.port != 443)
        {
          Attempt a = last;
          a.port = 443;
          push_attempt(next, std::move(a), "port_fallback");
        }
        else
        {
          next_endpoint_or_fail(next, fail_reason::port_refused);
        }
        break;

      case Outcome::ip_unreachable:
      {
        const auto& cands = plan.endpoints[plan.endpoint_index].candidates;
        if (profile.ip_failover != IpFailover::hard_fail && plan.candidate_index + 1 < cands.size())
        {
          ++next.candidate_index;
          Attempt a = last;
          a.ip = cands[next.candidate_index].ip;
          a.ip_source = cands[next.candidate_index].source;
          push_attempt(
            next,
            std::move(a),
            profile.ip_failover == IpFailover::delayed_alternate ? "delayed" : "ip_failover");
        }
        else if (profile.ip_failover == IpFailover::hard_fail)
        {
          hard_fail(next, fail_reason::unreachable);
        }
        else
        {
          next_endpoint_or_fail(next, fail_reason::unreachable);
        }
        break;
      }

      case Outcome::tls_cert_invalid:
        hard_fail(
          next,
          last.ech_mode == EchMode::split_misdirected ? fail_reason::ech_fallback_cert :
                                                        fail_reason::cert_invalid);
        break;

      case Outcome::ech_rejected_with_retry:
      {
        if (last.ech_mode == EchMode::off)
          throw ContractViolation("ECH retry result for an attempt without ECH");
        if (!result.retry_configs)
          throw ContractViolation("ech_rejected_with_retry carries no retry configs");
        if (plan.ech_retry_used)
        {
          hard_fail(next, fail_reason::ech_retry_rejected);
          break;
        }
        try
        {
          Attempt a = last;
          a.ech_key = primary_identity(*result.retry_configs);
          a.sni = DomainName::parse(public_name(*result.retry_configs));
          a.ech_mode = EchMode::retry_pending;
          next.ech_retry_used = true;
          push_attempt(next, std::move(a), "ech_retry");
        }
        catch (const ParseError&)
        {
          hard_fail(next, fail_reason::ech_retry_rejected);
        }
        break;
      }

      case Outcome::ech_rejected_terminal:
      {
        if (last.ech_mode == EchMode::off)
          throw ContractViolation("ECH rejection for an attempt without ECH");
        if (plan.ech_fallback_used)
        {
          hard_fail(next, fail_reason::ech_retry_rejected);
          break;
        }
        Attempt a = last;
        a.ech_mode = EchMode::off;
        a.ech_key.reset();
        a.inner_sni.reset();
        a.sni = plan.request.host;
        next.ech_fallback_used = true;
        push_attempt(next, std::move(a), "plain_tls_fallback");
        break;
      }

      case Outcome::alpn_mismatch:
        next_endpoint_or_fail(next, fail_reason::alpn_mismatch);
        break;
    }
    return next;
  }
}
