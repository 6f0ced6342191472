// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/ech.hpp"
#include "support/generators.hpp"

#include <doctest.h>
#include <fstream>
#include <json.hpp>
#include <set>

using namespace httpsrr;

namespace
{
  nlohmann::json ech_fixture()
  {
    std::ifstream in(std::string(HTTPSRR_TEST_DATA) + "/ech_oracle.json");
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
  }

  const nlohmann::json& find_case(const nlohmann::json& f, std::string_view name)
  {
    for (const auto& c : f["cases"])
    {
      if (c["name"] == name)
        return c;
    }
    FAIL("missing fixture case");
    throw std::logic_error("unreachable");
  }
}

TEST_CASE("oracle configs decode field by field")
{
  auto f = ech_fixture();
  for (const auto& c : f["cases"])
  {
    CAPTURE(c["name"].get<std::string>());
    auto bytes = from_hex(c["hex"].get<std::string>());
    auto list = parse_ech_config_list(bytes);
    REQUIRE(list.configs.size() == c["configs"].size());
    for (std::size_t i = 0; i < list.configs.size(); ++i)
    {
      const auto& want = c["configs"][i];
      const auto& got = list.configs[i];
      CHECK(got.version == want["version"].get<int>());
      if (!got.recognized())
      {
        CHECK(to_hex(got.raw) == want["raw"].get<std::string>());
        continue;
      }
      CHECK(got.config_id == want["config_id"].get<int>());
      CHECK(got.kem_id == want["kem_id"].get<int>());
      CHECK(to_hex(got.public_key) == want["public_key"].get<std::string>());
      CHECK(got.maximum_name_length == want["maximum_name_length"].get<int>());
      CHECK(got.public_name == want["public_name"].get<std::string>());
      CHECK(to_hex(got.extensions) == want["extensions"].get<std::string>());
      REQUIRE(got.cipher_suites.size() == want["cipher_suites"].size());
      for (std::size_t s = 0; s < got.cipher_suites.size(); ++s)
      {
        CHECK(got.cipher_suites[s].kdf_id == want["cipher_suites"][s][0].get<int>());
        CHECK(got.cipher_suites[s].aead_id == want["cipher_suites"][s][1].get<int>());
      }
      CHECK(to_hex(key_identity(got).public_key_digest) == want["public_key_sha256"].get<std::string>());
    }
    CHECK(list.serialize() == bytes);
    CHECK(parse_ech_config_list(std::string_view(c["base64"].get<std::string>())) == list);
  }
}

TEST_CASE("oracle error payloads")
{
  auto f = ech_fixture();
  for (const auto& e : f["errors"])
  {
    CAPTURE(e["name"].get<std::string>());
    auto bytes = from_hex(e["hex"].get<std::string>());
    try
    {
      parse_ech_config_list(bytes);
      FAIL("accepted a broken payload");
    }
    catch (const ParseError& err)
    {
      CHECK(to_string(err.code()) == e["error"].get<std::string>());
    }
  }
}

TEST_CASE("public name and identity")
{
  auto f = ech_fixture();
  auto cover = parse_ech_config_list(from_hex(find_case(f, "shared_cover")["hex"].get<std::string>()));
  auto rotated =
    parse_ech_config_list(from_hex(find_case(f, "shared_cover_rotated")["hex"].get<std::string>()));
  auto split = parse_ech_config_list(from_hex(find_case(f, "split_b")["hex"].get<std::string>()));
  auto mixed =
    parse_ech_config_list(from_hex(find_case(f, "unknown_then_draft13")["hex"].get<std::string>()));
  auto opaque =
    parse_ech_config_list(from_hex(find_case(f, "unknown_version")["hex"].get<std::string>()));

  CHECK(public_name(cover) == "cover.a.com");
  CHECK(public_name(split) == "b.com");
  CHECK(public_name(mixed) == "b.com");
  CHECK_THROWS_AS(public_name(opaque), ParseError);
  CHECK_THROWS_AS(key_identity(opaque.configs[0]), ParseError);

  CHECK(primary_identity(cover) == primary_identity(cover));
  CHECK(primary_identity(cover) != primary_identity(rotated));
  CHECK(primary_identity(cover).config_id == 7);

  auto reparsed = parse_ech_config_list(cover.serialize());
  CHECK(primary_identity(reparsed) == primary_identity(cover));

  auto id = primary_identity(split);
  CHECK(EchKeyIdentity::from_string(id.to_string()) == id);
  CHECK_THROWS_AS(EchKeyIdentity::from_string("300:00"), ParseError);
}

TEST_CASE("identities are distinct across the oracle corpus")
{
  auto f = ech_fixture();
  std::set<std::string> keys;
  std::set<EchKeyIdentity> ids;
  for (const auto& c : f["cases"])
  {
    auto list = parse_ech_config_list(from_hex(c["hex"].get<std::string>()));
    for (const auto& cfg : list.configs)
    {
      if (!cfg.recognized())
        continue;
      auto tag = std::to_string(cfg.config_id) + to_hex(cfg.public_key);
      if (keys.insert(tag).second)
        CHECK(ids.insert(key_identity(cfg)).second);
    }
  }
  CHECK(ids.size() >= 3);
}

TEST_CASE("encoder output matches the oracle bytes")
{
  auto f = ech_fixture();
  const auto& c = find_case(f, "with_extension");
  auto list = parse_ech_config_list(from_hex(c["hex"].get<std::string>()));
  auto again = encode_ech_config_list({encode_ech_config(list.configs[0])});
  CHECK(to_hex(again) == c["hex"].get<std::string>());
}

TEST_CASE("empty and corrupted payloads")
{
  CHECK_THROWS_AS(parse_ech_config_list(Bytes{}), ParseError);
  auto f = ech_fixture();
  for (const auto& c : f["cases"])
  {
    auto bytes = from_hex(c["hex"].get<std::string>());
    CHECK_THROWS_AS(parse_ech_config_list(corrupt_ech_lengths(bytes)), ParseError);
  }
}

TEST_CASE("inner field errors")
{
  EchConfig cfg;
  cfg.config_id = 1;
  cfg.kem_id = 0x20;
  cfg.public_key = Bytes(32, 0xab);
  cfg.cipher_suites = {{1, 1}};
  cfg.public_name = "bad_name!";
  auto list = encode_ech_config_list({encode_ech_config(cfg)});
  CHECK_THROWS_AS(parse_ech_config_list(list), ParseError);

  cfg.public_name = "ok.example";
  auto entry = encode_ech_config(cfg);
  entry.push_back(0);
  entry[3] += 1; // inner length now covers the stray byte
  try
  {
    parse_ech_config_list(encode_ech_config_list({entry}));
    FAIL("trailing bytes accepted");
  }
  catch (const ParseError& e)
  {
    CHECK(e.code() == ErrorCode::length_mismatch);
  }
}

TEST_CASE("parser survives arbitrary bytes")
{
  testgen::Rng rng(5);
  auto f = ech_fixture();
  auto seed = from_hex(f["cases"][0]["hex"].get<std::string>());
  for (int i = 0; i < 20000; ++i)
  {
    Bytes input = testgen::random_bytes(rng, 0, 300);
    if (i % 2)
    {
      input = seed;
      input[testgen::pick(rng, 0, input.size() - 1)] ^= std::uint8_t(testgen::pick(rng, 1, 255));
    }
    try
    {
      auto list = parse_ech_config_list(input);
      CHECK(list.serialize() == input);
    }
    catch (const ParseError&)
    {
    }
  }
}
