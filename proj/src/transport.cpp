// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/transport.hpp"

#include "httpsrr/psl.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fmt/format.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <thread>
#include <unistd.h>

namespace httpsrr
{
  Duration SystemClock::now()
  {
    return std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now().time_since_epoch());
  }

  void SystemClock::sleep_until(Duration t)
  {
    std::this_thread::sleep_until(std::chrono::steady_clock::time_point(
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(t)));
  }

  Duration ManualClock::now()
  {
    std::lock_guard lock(mu_);
    return now_;
  }

  void ManualClock::sleep_until(Duration t)
  {
    std::lock_guard lock(mu_);
    now_ = std::max(now_, t);
  }

  void ManualClock::advance(Duration d)
  {
    std::lock_guard lock(mu_);
    now_ += d;
  }

  RateLimiter::RateLimiter(double qps, Clock& clock) :
    clock_(clock)
  {
    if (!(qps > 0))
      throw ContractViolation("qps must be positive");
    interval_ = std::chrono::duration_cast<Duration>(std::chrono::duration<double>(1.0 / qps));
  }

  void RateLimiter::acquire()
  {
    Duration slot;
    {
      std::lock_guard lock(mu_);
      auto now = clock_.now();
      slot = last_ ? std::max(now, *last_ + interval_) : now;
      last_ = slot;
    }
    clock_.sleep_until(slot);
  }

  std::string_view to_string(QueryStatus s)
  {
    switch (s)
    {
      case QueryStatus::ok:
        return "ok";
      case QueryStatus::timeout:
        return "timeout";
      case QueryStatus::network_error:
        return "network_error";
    }
    return "?";
  }

  namespace
  {
    ResourceRecord synthetic_rrsig(const DomainName& owner, std::uint16_t covered, std::uint32_t ttl)
    {
      RrsigData sig;
      sig.type_covered = covered;
      sig.algorithm = 13;
      sig.labels = std::uint8_t(owner.labels().size());
      sig.original_ttl = ttl;
      sig.inception = 1700000000;
      sig.expiration = 1900000000;
      sig.signer = registrable_domain(owner).value_or(owner);
      auto seed = sha256(sig.signer.to_string());
      sig.key_tag = std::uint16_t(seed[0] << 8 | seed[1]);
      auto digest = sha256(fmt::format("{}/{}", owner.to_string(), covered));
      sig.signature.assign(digest.begin(), digest.end());
      sig.signature.insert(sig.signature.end(), seed.begin(), seed.end());
      return {owner, rrtype::RRSIG, 1, ttl, encode_rrsig(sig)};
    }
  }

  DnsMessage answer_from_zone(const ZoneStore& zone, const DnsMessage& query, bool follow_cnames)
  {
    DnsMessage r;
    r.id = query.id;
    r.qr = true;
    r.rd = query.rd;
    r.ra = true;
    r.questions = query.questions;
    bool dnssec_ok = query.edns && query.edns->dnssec_ok;
    if (query.edns)
    {
      r.edns = Edns{};
      r.edns->dnssec_ok = dnssec_ok;
    }
    if (query.questions.size() != 1)
    {
      r.rcode = rcode::formerr;
      return r;
    }
    const auto& q = query.questions.front();
    auto append = [&](const std::vector<ResourceRecord>& rrs, const DomainName& owner, std::uint16_t type) {
      r.answers.insert(r.answers.end(), rrs.begin(), rrs.end());
      if (dnssec_ok && zone.flags(owner).signed_rrsets)
        r.answers.push_back(synthetic_rrsig(owner, type, rrs.front().ttl));
    };

    DomainName name = q.name;
    bool ad = true;
    for (std::size_t depth = 0;; ++depth)
    {
      if (!zone.has_name(name))
      {
        r.rcode = rcode::nxdomain;
        ad = false;
        break;
      }
      ad = ad && zone.flags(name).ad;
      auto rrs = zone.rrset(name, q.type);
      if (!rrs.empty())
      {
        append(rrs, name, q.type);
        break;
      }
      auto cname = zone.rrset(name, rrtype::CNAME);
      if (cname.empty() || q.type == rrtype::CNAME)
        break;
      if (depth == max_cname_depth)
      {
        r.answers.clear();
        r.rcode = rcode::servfail;
        ad = false;
        break;
      }
      append({cname.front()}, name, rrtype::CNAME);
      if (!follow_cnames)
        break;
      name = decode_name_rdata(cname.front().rdata);
    }
    r.ad = ad && (dnssec_ok || query.ad);
    return r;
  }

  MockTransport::MockTransport(ZoneStore zone, Clock& clock, bool follow_cnames) :
    zone_(std::move(zone)),
    clock_(clock),
    follow_(follow_cnames)
  {}

  void MockTransport::add_fault(std::string resolver, std::optional<DomainName> qname, FaultKind kind, int times)
  {
    std::lock_guard lock(mu_);
    faults_.push_back({std::move(resolver), std::move(qname), kind, times});
  }

  QueryResult MockTransport::query(const std::string& resolver, const DnsMessage& q, Duration timeout)
  {
    auto sent = decode_message(encode_message(q));
    QueryResult result;
    result.resolver = resolver;
    std::optional<FaultKind> fault;
    {
      std::lock_guard lock(mu_);
      LogEntry entry{clock_.now(), resolver, {}, 0, sent.edns && sent.edns->dnssec_ok};
      if (!sent.questions.empty())
      {
        entry.qname = sent.questions.front().name;
        entry.qtype = sent.questions.front().type;
      }
      log_.push_back(entry);
      for (auto& f : faults_)
      {
        if (f.remaining == 0 || f.resolver != resolver)
          continue;
        if (f.qname && *f.qname != entry.qname)
          continue;
        if (f.remaining > 0)
          --f.remaining;
        fault = f.kind;
        break;
      }
    }
    if (fault == FaultKind::timeout)
    {
      clock_.sleep_until(clock_.now() + timeout);
      result.status = QueryStatus::timeout;
      return result;
    }
    if (fault == FaultKind::network_error)
    {
      result.status = QueryStatus::network_error;
      result.detail = "scripted network error";
      return result;
    }
    DnsMessage answer;
    if (fault == FaultKind::servfail)
    {
      answer.id = sent.id;
      answer.qr = true;
      answer.ra = true;
      answer.questions = sent.questions;
      answer.rcode = rcode::servfail;
    }
    else
    {
      answer = answer_from_zone(zone_, sent, follow_);
    }
    result.response = decode_message(encode_message(answer));
    return result;
  }

  std::vector<MockTransport::LogEntry> MockTransport::log() const
  {
    std::lock_guard lock(mu_);
    return log_;
  }

  void MockTransport::clear_log()
  {
    std::lock_guard lock(mu_);
    log_.clear();
  }

  ResolverAddress ResolverAddress::parse(std::string_view text)
  {
    auto fail = [&] {
      return ParseError(ErrorCode::syntax, 0, fmt::format("bad resolver address '{}'", text));
    };
    ResolverAddress out;
    std::string_view host = text;
    std::string_view port;
    if (text.starts_with("["))
    {
      auto close = text.find(']');
      if (close == std::string_view::npos)
        throw fail();
      host = text.substr(1, close - 1);
      auto rest = text.substr(close + 1);
      if (!rest.empty())
      {
        if (!rest.starts_with(":"))
          throw fail();
        port = rest.substr(1);
      }
    }
    else if (std::count(text.begin(), text.end(), ':') == 1)
    {
      auto colon = text.find(':');
      host = text.substr(0, colon);
      port = text.substr(colon + 1);
    }
    auto ip = parse_ip(host);
    if (!ip)
      throw fail();
    out.ip = *ip;
    if (!port.empty())
    {
      unsigned value = 0;
      for (char c : port)
      {
        if (c < '0' || c > '9')
          throw fail();
        value = value * 10 + unsigned(c - '0');
        if (value > 65535)
          throw fail();
      }
      if (value == 0)
        throw fail();
      out.port = std::uint16_t(value);
    }
    return out;
  }

  namespace
  {
    struct Fd
    {
      int fd = -1;
      explicit Fd(int f) :
        fd(f)
      {}
      Fd(const Fd&) = delete;
      Fd& operator=(const Fd&) = delete;
      ~Fd()
      {
        if (fd >= 0)
          ::close(fd);
      }
    };

    socklen_t to_sockaddr(const ResolverAddress& addr, sockaddr_storage& ss)
    {
      std::memset(&ss, 0, sizeof ss);
      if (auto* v4 = std::get_if<Ipv4>(&addr.ip))
      {
        auto* sa = reinterpret_cast<sockaddr_in*>(&ss);
        sa->sin_family = AF_INET;
        sa->sin_port = htons(addr.port);
        std::memcpy(&sa->sin_addr, v4->octets.data(), 4);
        return sizeof(sockaddr_in);
      }
      auto* sa = reinterpret_cast<sockaddr_in6*>(&ss);
      sa->sin6_family = AF_INET6;
      sa->sin6_port = htons(addr.port);
      std::memcpy(&sa->sin6_addr, std::get<Ipv6>(addr.ip).octets.data(), 16);
      return sizeof(sockaddr_in6);
    }

    using Deadline = std::chrono::steady_clock::time_point;

    /// Milliseconds left, or -1 once the deadline has passed.
    int remaining_ms(Deadline deadline)
    {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      return left.count() < 0 ? -1 : int(left.count());
    }

    bool wait_for(int fd, short events, Deadline deadline)
    {
      for (;;)
      {
        auto ms = remaining_ms(deadline);
        if (ms < 0)
          return false;
        pollfd p{fd, events, 0};
        int rc = ::poll(&p, 1, ms);
        if (rc > 0)
          return true;
        if (rc == 0)
          return false;
        if (errno != EINTR)
          return false;
      }
    }

    bool answers_query(const DnsMessage& r, const DnsMessage& q)
    {
      return r.qr && r.id == q.id && r.questions == q.questions;
    }

    QueryResult failure(QueryResult r, QueryStatus status, std::string detail)
    {
      r.status = status;
      r.detail = std::move(detail);
      return r;
    }

    QueryResult query_tcp(
      QueryResult result, const ResolverAddress& addr, const DnsMessage& q, const Bytes& wire, Deadline deadline)
    {
      sockaddr_storage ss;
      auto len = to_sockaddr(addr, ss);
      Fd sock(::socket(ss.ss_family, SOCK_STREAM | SOCK_NONBLOCK, 0));
      if (sock.fd < 0)
        return failure(std::move(result), QueryStatus::network_error, std::strerror(errno));
      if (::connect(sock.fd, reinterpret_cast<sockaddr*>(&ss), len) != 0 && errno != EINPROGRESS)
        return failure(std::move(result), QueryStatus::network_error, std::strerror(errno));
      if (!wait_for(sock.fd, POLLOUT, deadline))
        return failure(std::move(result), QueryStatus::timeout, "tcp connect timed out");
      int err = 0;
      socklen_t err_len = sizeof err;
      ::getsockopt(sock.fd, SOL_SOCKET, SO_ERROR, &err, &err_len);
      if (err != 0)
        return failure(std::move(result), QueryStatus::network_error, std::strerror(err));

      Bytes framed{std::uint8_t(wire.size() >> 8), std::uint8_t(wire.size())};
      framed.insert(framed.end(), wire.begin(), wire.end());
      std::size_t sent = 0;
      while (sent < framed.size())
      {
        if (!wait_for(sock.fd, POLLOUT, deadline))
          return failure(std::move(result), QueryStatus::timeout, "tcp send timed out");
        auto n = ::send(sock.fd, framed.data() + sent, framed.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno != EAGAIN && errno != EINTR)
          return failure(std::move(result), QueryStatus::network_error, std::strerror(errno));
        if (n > 0)
          sent += std::size_t(n);
      }

      Bytes buf;
      std::size_t want = 2;
      bool have_length = false;
      while (buf.size() < want)
      {
        if (!wait_for(sock.fd, POLLIN, deadline))
          return failure(std::move(result), QueryStatus::timeout, "tcp receive timed out");
        std::uint8_t chunk[4096];
        auto n = ::recv(sock.fd, chunk, std::min(sizeof chunk, want - buf.size()), 0);
        if (n == 0)
          return failure(std::move(result), QueryStatus::network_error, "tcp connection closed early");
        if (n < 0)
        {
          if (errno == EAGAIN || errno == EINTR)
            continue;
          return failure(std::move(result), QueryStatus::network_error, std::strerror(errno));
        }
        buf.insert(buf.end(), chunk, chunk + n);
        if (!have_length && buf.size() == 2)
        {
          want = 2 + (std::size_t(buf[0]) << 8 | buf[1]);
          have_length = true;
        }
      }
      try
      {
        auto msg = decode_message(ByteView(buf).subspan(2));
        if (!answers_query(msg, q))
          return failure(std::move(result), QueryStatus::network_error, "tcp answer does not match query");
        result.response = std::move(msg);
        return result;
      }
      catch (const ParseError& e)
      {
        return failure(std::move(result), QueryStatus::network_error, e.what());
      }
    }
  }

  UdpTransport::UdpTransport() :
    rng_(std::random_device{}())
  {}

  std::uint16_t UdpTransport::next_id()
  {
    std::lock_guard lock(mu_);
    return std::uint16_t(rng_());
  }

  QueryResult UdpTransport::query(const std::string& resolver, const DnsMessage& query, Duration timeout)
  {
    QueryResult result;
    result.resolver = resolver;
    ResolverAddress addr;
    try
    {
      addr = ResolverAddress::parse(resolver);
    }
    catch (const ParseError& e)
    {
      return failure(std::move(result), QueryStatus::network_error, e.what());
    }
    auto deadline = std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
    DnsMessage q = query;
    q.id = next_id();
    auto wire = encode_message(q);

    sockaddr_storage ss;
    auto len = to_sockaddr(addr, ss);
    Fd sock(::socket(ss.ss_family, SOCK_DGRAM | SOCK_NONBLOCK, 0));
    if (sock.fd < 0 || ::connect(sock.fd, reinterpret_cast<sockaddr*>(&ss), len) != 0)
      return failure(std::move(result), QueryStatus::network_error, std::strerror(errno));
    if (::send(sock.fd, wire.data(), wire.size(), 0) < 0)
      return failure(std::move(result), QueryStatus::network_error, std::strerror(errno));

    std::vector<std::uint8_t> buf(65535);
    for (;;)
    {
      if (!wait_for(sock.fd, POLLIN, deadline))
        return failure(std::move(result), QueryStatus::timeout, "no answer before timeout");
      auto n = ::recv(sock.fd, buf.data(), buf.size(), 0);
      if (n < 0)
      {
        if (errno == EAGAIN || errno == EINTR)
          continue;
        return failure(std::move(result), QueryStatus::network_error, std::strerror(errno));
      }
      DnsMessage msg;
      try
      {
        msg = decode_message(ByteView(buf.data(), std::size_t(n)));
      }
      catch (const ParseError&)
      {
        continue;
      }
      if (!answers_query(msg, q))
        continue;
      if (msg.tc)
        return query_tcp(std::move(result), addr, q, wire, deadline);
      result.response = std::move(msg);
      return result;
    }
  }
}
