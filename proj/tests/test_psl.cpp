// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/psl.hpp"

#include <doctest.h>
#include <fstream>
#include <json.hpp>

using namespace httpsrr;

TEST_CASE("registrable domain examples")
{
  CHECK(registrable_domain(DomainName::parse("www.a.com")) == DomainName::parse("a.com"));
  CHECK(registrable_domain(DomainName::parse("www.b.co.uk")) == DomainName::parse("b.co.uk"));
  CHECK_FALSE(registrable_domain(DomainName::parse("co.uk")));
  CHECK_FALSE(registrable_domain(DomainName()));
  CHECK(public_suffix(DomainName::parse("x.unlisted-tld")) == DomainName::parse("unlisted-tld"));
}

TEST_CASE("registrable domain matches the suffix-list oracle")
{
  std::ifstream in(std::string(HTTPSRR_TEST_DATA) + "/psl_oracle.json");
  REQUIRE(in.good());
  auto fixture = nlohmann::json::parse(in);
  std::size_t n = 0;
  for (const auto& c : fixture["cases"])
  {
    auto name = DomainName::parse(c["name"].get<std::string>());
    CAPTURE(c["name"].get<std::string>());
    CHECK(public_suffix(name) == DomainName::parse(c["suffix"].get<std::string>()));
    auto got = registrable_domain(name);
    if (c["registrable"].is_null())
      CHECK_FALSE(got);
    else
      CHECK(got == DomainName::parse(c["registrable"].get<std::string>()));
    ++n;
  }
  CHECK(n > 500);
}
