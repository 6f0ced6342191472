// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "httpsrr/analysis.hpp"
#include "httpsrr/simnet.hpp"
#include "httpsrr/synth.hpp"

#include <fmt/format.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace httpsrr;
using nlohmann::json;

namespace
{
  // JSON crosses the boundary as text; the Python package decodes it.

  json record_json(const HttpsRecord& rec)
  {
    json params = json::array();
    for (const auto& p : rec.params)
      params.push_back({{"key", key_name(p.key)}, {"value", param_value_to_presentation(p)}});
    json issues = json::array();
    for (const auto& i : validate(rec))
    {
      issues.push_back({{"code", std::string(to_string(i.code))},
                        {"severity", std::string(to_string(i.severity))},
                        {"detail", i.detail}});
    }
    return {
      {"owner", rec.owner.to_string()},
      {"ttl", rec.ttl},
      {"priority", rec.svc_priority},
      {"target", rec.target.to_string()},
      {"mode", rec.is_alias() ? "alias" : "service"},
      {"params", params},
      {"presentation", to_presentation(rec)},
      {"wire", to_hex(to_wire(rec))},
      {"issues", issues},
    };
  }

  std::string parse_record(const std::string& line)
  {
    return record_json(parse_presentation(line)).dump();
  }

  std::string decode_record(py::bytes rdata, const std::string& owner, std::uint32_t ttl)
  {
    std::string raw = rdata;
    Bytes wire(raw.begin(), raw.end());
    auto name = owner.empty() ? DomainName{} : DomainName::parse(owner);
    return record_json(parse_wire(wire, name, ttl)).dump();
  }

  py::bytes encode_record(const std::string& line)
  {
    auto wire = to_wire(parse_presentation(line));
    return py::bytes(reinterpret_cast<const char*>(wire.data()), wire.size());
  }

  std::string parse_ech(const std::string& base64)
  {
    auto list = parse_ech_config_list(std::string_view(base64));
    json out = json::array();
    for (const auto& c : list.configs)
    {
      json j = {{"version", c.version}, {"recognized", c.recognized()}};
      if (c.recognized())
      {
        auto id = key_identity(c);
        j["config_id"] = c.config_id;
        j["kem_id"] = c.kem_id;
        j["public_name"] = c.public_name;
        j["public_key"] = to_hex(c.public_key);
        j["key_digest"] = to_hex(ByteView(id.public_key_digest.data(), id.public_key_digest.size()));
        json suites = json::array();
        for (const auto& s : c.cipher_suites)
          suites.push_back({{"kdf_id", s.kdf_id}, {"aead_id", s.aead_id}});
        j["cipher_suites"] = suites;
      }
      out.push_back(j);
    }
    return out.dump();
  }

  std::vector<std::string> profile_names()
  {
    std::vector<std::string> out;
    for (const auto& [name, _] : builtin_profiles())
      out.push_back(name);
    return out;
  }

  PolicyProfile profile_from(const std::string& name_or_json)
  {
    if (builtin_profiles().count(name_or_json))
      return builtin_profile(name_or_json);
    if (!name_or_json.empty() && name_or_json.front() == '{')
      return load_profile(name_or_json);
    throw ContractViolation(fmt::format("unknown profile '{}'", name_or_json));
  }

  std::string profile_json(const std::string& name)
  {
    return dump_profile(profile_from(name));
  }

  std::vector<std::string> builtin_scenarios()
  {
    std::vector<std::string> out;
    for (const auto& s : builtin_matrix())
      out.push_back(scenario_to_json(s));
    return out;
  }

  std::string run(const std::string& scenario, const std::string& profile)
  {
    return run_scenario(scenario_from_json(scenario), profile_from(profile)).to_json();
  }

  std::string conformance(const std::vector<std::string>& scenarios)
  {
    std::vector<Scenario> matrix;
    if (scenarios.empty())
      matrix = builtin_matrix();
    for (const auto& s : scenarios)
      matrix.push_back(scenario_from_json(s));
    auto report = run_conformance(matrix);
    json out = {
      {"ok", report.ok()},
      {"transcripts", report.transcripts.size()},
      {"expectation_failures", report.expectation_failures},
      {"cell_mismatches", report.cell_mismatches},
    };
    auto table = [](const std::optional<ConformanceTable>& t) {
      return t ? json(t->to_text()) : json(nullptr);
    };
    out["rr_table"] = table(report.rr_table);
    out["ech_table"] = table(report.ech_table);
    return out.dump();
  }

  std::string classify(const std::string& line, const std::string& ranges_path)
  {
    auto spec = CfDefaultSpec::from_file(ranges_path);
    return std::string(to_string(classify_cf_default(parse_presentation(line), spec)));
  }

  std::string synth(const std::string& out, std::uint64_t seed, const std::string& start, std::size_t days,
                    std::size_t domains)
  {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.start = start;
    cfg.days = days;
    cfg.domains = domains;
    SnapshotStore store(out);
    auto summary = synth_corpus(cfg, store);
    return json{{"snapshots", summary.snapshots}, {"dates", summary.dates}}.dump();
  }

  std::string analyze(const std::string& store_dir, const std::string& metric, const std::string& set,
                      const std::string& from, const std::string& to, const std::string& kind,
                      const std::string& cf_ranges)
  {
    if (kind != "apex" && kind != "www")
      throw ContractViolation(fmt::format("unknown kind '{}'", kind));
    SnapshotStore store(store_dir);
    auto in = load_input(store, {set_mode_from_string(set), from, to},
                         kind == "www" ? TargetKind::www : TargetKind::apex);
    if (!cf_ranges.empty())
      in.cf = CfDefaultSpec::from_file(cf_ranges);
    auto report = run_metric(metric, in);
    auto out = report.to_json();
    out["csv"] = report.to_csv();
    return out.dump();
  }
}

PYBIND11_MODULE(_httpsrr, m)
{
  m.doc() = "HTTPS resource record toolkit";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<AliasLoopError>(m, "AliasLoopError", PyExc_RuntimeError);

  m.def("parse_record", &parse_record, py::arg("line"));
  m.def("decode_record", &decode_record, py::arg("rdata"), py::arg("owner") = "", py::arg("ttl") = 0);
  m.def("encode_record", &encode_record, py::arg("line"));
  m.def("parse_ech", &parse_ech, py::arg("base64"));
  m.def("profile_names", &profile_names);
  m.def("profile_json", &profile_json, py::arg("name"));
  m.def("builtin_scenarios", &builtin_scenarios);
  m.def("run_scenario", &run, py::arg("scenario"), py::arg("profile"));
  m.def("conformance", &conformance, py::arg("scenarios") = std::vector<std::string>{});
  m.def("classify_cf_default", &classify, py::arg("line"), py::arg("ranges_path"));
  m.def("metric_names", &metric_names);
  m.def("synth", &synth, py::arg("out"), py::arg("seed") = 1, py::arg("start") = "2024-03-01",
        py::arg("days") = 5, py::arg("domains") = 1000);
  m.def("analyze", &analyze, py::arg("store"), py::arg("metric"), py::arg("set"), py::arg("from_date"),
        py::arg("to_date"), py::arg("kind") = "apex", py::arg("cf_ranges") = "");
}
