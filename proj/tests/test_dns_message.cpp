// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/dns_message.hpp"
#include "support/generators.hpp"

#include <doctest.h>
#include <fstream>
#include <json.hpp>

using namespace httpsrr;
using namespace httpsrr::testgen;

namespace
{
  void check_section(const std::vector<ResourceRecord>& got, const nlohmann::json& want)
  {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
    {
      CHECK(got[i].name == DomainName::parse(want[i]["name"].get<std::string>()));
      CHECK(got[i].type == want[i]["type"].get<int>());
      CHECK(got[i].klass == want[i]["class"].get<int>());
      CHECK(got[i].ttl == want[i]["ttl"].get<std::uint32_t>());
      CHECK(to_hex(got[i].rdata) == want[i]["rdata"].get<std::string>());
    }
  }

  ResourceRecord random_rr(Rng& rng, const std::vector<DomainName>& pool)
  {
    ResourceRecord rr;
    rr.name = pool[pick(rng, 0, pool.size() - 1)];
    rr.ttl = std::uint32_t(rng());
    ByteWriter w;
    switch (pick(rng, 0, 4))
    {
      case 0:
        rr.type = rrtype::A;
        w.bytes(random_v4(rng).octets);
        break;
      case 1:
        rr.type = rrtype::CNAME;
        pool[pick(rng, 0, pool.size() - 1)].to_wire(w);
        break;
      case 2:
        rr.type = rrtype::HTTPS;
        w.bytes(to_wire(random_record(rng)));
        break;
      case 3:
        rr.type = rrtype::SOA;
        pool[pick(rng, 0, pool.size() - 1)].to_wire(w);
        pool[pick(rng, 0, pool.size() - 1)].to_wire(w);
        for (int i = 0; i < 5; ++i)
          w.u32(std::uint32_t(rng()));
        break;
      default:
        rr.type = std::uint16_t(pick(rng, 256, 1000));
        w.bytes(random_bytes(rng, 0, 40));
    }
    rr.rdata = std::move(w).take();
    return rr;
  }
}

TEST_CASE("messages from the dnspython oracle decode field by field")
{
  std::ifstream in(std::string(HTTPSRR_TEST_DATA) + "/message_oracle.json");
  REQUIRE(in.good());
  auto fixture = nlohmann::json::parse(in);
  for (const auto& c : fixture["cases"])
  {
    CAPTURE(c["label"].get<std::string>());
    auto wire = from_hex(c["wire"].get<std::string>());
    auto m = decode_message(wire);
    auto flags = c["flags"].get<unsigned>();
    CHECK(m.id == c["id"].get<unsigned>());
    CHECK(m.qr == bool(flags & 0x8000));
    CHECK(m.rd == bool(flags & 0x0100));
    CHECK(m.ra == bool(flags & 0x0080));
    CHECK(m.ad == bool(flags & 0x0020));
    CHECK(m.rcode == c["rcode"].get<unsigned>());
    REQUIRE(m.questions.size() == c["questions"].size());
    for (std::size_t i = 0; i < m.questions.size(); ++i)
    {
      CHECK(m.questions[i].name == DomainName::parse(c["questions"][i]["name"].get<std::string>()));
      CHECK(m.questions[i].type == c["questions"][i]["type"].get<int>());
    }
    check_section(m.answers, c["answers"]);
    check_section(m.authority, c["authority"]);
    check_section(m.additional, c["additional"]);
    if (c["edns"].is_null())
      CHECK_FALSE(m.edns);
    else
    {
      REQUIRE(m.edns);
      CHECK(m.edns->udp_size == c["edns"]["udp_size"].get<unsigned>());
      CHECK(m.edns->dnssec_ok == c["edns"]["do"].get<bool>());
    }
    CHECK(decode_message(encode_message(m)) == m);
    CHECK(decode_message(encode_message(m, false)) == m);
  }
}

TEST_CASE("query construction")
{
  auto q = make_query(9, DomainName::parse("a.com"), rrtype::HTTPS, true);
  auto wire = encode_message(q);
  CHECK(to_hex(wire) ==
        "00090100000100000000000101610363"
        "6f6d0000410001"
        "00002904d0000080000000");
  CHECK(decode_message(wire) == q);
}

TEST_CASE("random messages round-trip with and without compression")
{
  Rng rng(99);
  for (int round = 0; round < 2000; ++round)
  {
    std::vector<DomainName> pool;
    auto base = random_name(rng, 3);
    for (int i = 0; i < 4; ++i)
      pool.push_back(coin(rng) ? base.prepend(random_label(rng)) : random_name(rng, 3));
    DnsMessage m;
    m.id = std::uint16_t(rng());
    m.qr = coin(rng);
    m.aa = coin(rng);
    m.rd = coin(rng);
    m.ra = coin(rng);
    m.ad = coin(rng);
    m.cd = coin(rng);
    m.rcode = std::uint8_t(pick(rng, 0, 5));
    m.questions.push_back({pool[0], rrtype::HTTPS, 1});
    for (std::size_t i = 0, n = pick(rng, 0, 5); i < n; ++i)
      m.answers.push_back(random_rr(rng, pool));
    for (std::size_t i = 0, n = pick(rng, 0, 2); i < n; ++i)
      m.authority.push_back(random_rr(rng, pool));
    for (std::size_t i = 0, n = pick(rng, 0, 2); i < n; ++i)
      m.additional.push_back(random_rr(rng, pool));
    if (coin(rng))
      m.edns = Edns{std::uint16_t(pick(rng, 512, 4096)), 0, 0, coin(rng), {}};
    auto packed = encode_message(m);
    auto plain = encode_message(m, false);
    CHECK(packed.size() <= plain.size());
    CHECK(decode_message(packed) == m);
    CHECK(decode_message(plain) == m);
  }
}

TEST_CASE("hostile messages fail cleanly")
{
  // Pointer to itself.
  Bytes loop = from_hex("000000000001000000000000c00c00010001");
  CHECK_THROWS_AS(decode_message(loop), ParseError);
  // Forward pointer.
  Bytes forward = from_hex("000000000001000000000000c00e0001000100");
  CHECK_THROWS_AS(decode_message(forward), ParseError);
  // Claims an answer that is not there.
  Bytes missing = from_hex("000000000000000100000000");
  CHECK_THROWS_AS(decode_message(missing), ParseError);

  Rng rng(7);
  auto seed = encode_message(make_query(1, DomainName::parse("www.example.com"), rrtype::HTTPS, true));
  for (int i = 0; i < 50000; ++i)
  {
    Bytes input = coin(rng) ? random_bytes(rng, 0, 300) : seed;
    if (input == seed)
    {
      for (std::size_t k = 0, n = pick(rng, 1, 4); k < n; ++k)
        input[pick(rng, 0, input.size() - 1)] = std::uint8_t(rng());
    }
    try
    {
      auto m = decode_message(input);
      CHECK(decode_message(encode_message(m, false)) == m);
    }
    catch (const ParseError&)
    {
    }
  }
}
