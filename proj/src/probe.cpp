// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/scanner.hpp"

#include <cerrno>
#include <cstring>
#include <memory>
#include <netinet/in.h>
#include <openssl/err.h>
#include <openssl/ssl.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace httpsrr
{
  namespace
  {
    using Deadline = std::chrono::steady_clock::time_point;

    struct Socket
    {
      int fd;
      ~Socket()
      {
        if (fd >= 0)
          ::close(fd);
      }
    };

    /// False once the deadline passes.
    bool wait(int fd, short events, Deadline deadline)
    {
      for (;;)
      {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0)
          return false;
        pollfd p{fd, events, 0};
        int rc = ::poll(&p, 1, int(left.count()));
        if (rc > 0)
          return true;
        if (rc == 0 || errno != EINTR)
          return false;
      }
    }

    ProbeOutcome connect_error(int err)
    {
      switch (err)
      {
        case ECONNREFUSED:
          return ProbeOutcome::refused;
        case ETIMEDOUT:
          return ProbeOutcome::timeout;
        default:
          return ProbeOutcome::unreachable_network;
      }
    }

    struct SslCtxFree
    {
      void operator()(SSL_CTX* c) const
      {
        SSL_CTX_free(c);
      }
    };
    struct SslFree
    {
      void operator()(SSL* s) const
      {
        SSL_free(s);
      }
    };
  }

  ProbeOutcome TlsProber::probe(const IpAddress& ip, std::uint16_t port, const DomainName& sni, Duration timeout)
  {
    auto deadline = std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
    sockaddr_storage ss{};
    socklen_t len = 0;
    if (auto* v4 = std::get_if<Ipv4>(&ip))
    {
      auto* sa = reinterpret_cast<sockaddr_in*>(&ss);
      sa->sin_family = AF_INET;
      sa->sin_port = htons(port);
      std::memcpy(&sa->sin_addr, v4->octets.data(), 4);
      len = sizeof(sockaddr_in);
    }
    else
    {
      auto* sa = reinterpret_cast<sockaddr_in6*>(&ss);
      sa->sin6_family = AF_INET6;
      sa->sin6_port = htons(port);
      std::memcpy(&sa->sin6_addr, std::get<Ipv6>(ip).octets.data(), 16);
      len = sizeof(sockaddr_in6);
    }
    Socket sock{::socket(ss.ss_family, SOCK_STREAM | SOCK_NONBLOCK, 0)};
    if (sock.fd < 0)
      return ProbeOutcome::unreachable_network;
    if (::connect(sock.fd, reinterpret_cast<sockaddr*>(&ss), len) != 0)
    {
      if (errno != EINPROGRESS)
        return connect_error(errno);
      if (!wait(sock.fd, POLLOUT, deadline))
        return ProbeOutcome::timeout;
      int err = 0;
      socklen_t err_len = sizeof err;
      ::getsockopt(sock.fd, SOL_SOCKET, SO_ERROR, &err, &err_len);
      if (err != 0)
        return connect_error(err);
    }

    std::unique_ptr<SSL_CTX, SslCtxFree> ctx(SSL_CTX_new(TLS_client_method()));
    if (!ctx)
      return ProbeOutcome::tls_error;
    SSL_CTX_set_verify(ctx.get(), SSL_VERIFY_NONE, nullptr);
    static const unsigned char alpn[] = "\x02h2\x08http/1.1";
    SSL_CTX_set_alpn_protos(ctx.get(), alpn, sizeof alpn - 1);
    std::unique_ptr<SSL, SslFree> ssl(SSL_new(ctx.get()));
    if (!ssl)
      return ProbeOutcome::tls_error;
    SSL_set_fd(ssl.get(), sock.fd);
    auto host = sni.to_string();
    if (!host.empty() && host.back() == '.')
      host.pop_back();
    if (!host.empty())
      SSL_set_tlsext_host_name(ssl.get(), host.c_str());
    for (;;)
    {
      ERR_clear_error();
      int rc = SSL_connect(ssl.get());
      if (rc == 1)
        return ProbeOutcome::reachable;
      int err = SSL_get_error(ssl.get(), rc);
      short events = 0;
      if (err == SSL_ERROR_WANT_READ)
        events = POLLIN;
      else if (err == SSL_ERROR_WANT_WRITE)
        events = POLLOUT;
      else
        return ProbeOutcome::tls_error;
      if (!wait(sock.fd, events, deadline))
        return ProbeOutcome::timeout;
    }
  }
}
