# Copyright (c) httpsrr contributors. All rights reserved.
# Licensed under the Apache 2.0 License.

import os
from pathlib import Path

import pytest

import httpsrr

DATA = Path(os.environ.get("HTTPSRR_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def test_record_round_trip():
    rec = httpsrr.parse_record("example.com. 300 IN HTTPS 1 . alpn=h3,h2 port=8443 ipv4hint=192.0.2.1")
    assert rec["mode"] == "service"
    assert [p["key"] for p in rec["params"]] == ["alpn", "port", "ipv4hint"]
    wire = httpsrr.encode_record(rec["presentation"])
    assert wire.hex() == rec["wire"]
    back = httpsrr.decode_record(wire, "example.com.", 300)
    assert back["presentation"] == rec["presentation"]


def test_issues_reported():
    rec = httpsrr.parse_record("example.com. HTTPS 1 . mandatory=port alpn=h2")
    assert rec["issues"]
    assert all({"code", "severity", "detail"} <= set(i) for i in rec["issues"])


def test_parse_error_is_value_error():
    with pytest.raises(httpsrr.ParseError):
        httpsrr.parse_record("example.com. HTTPS 1 . alpn=")
    with pytest.raises(ValueError):
        httpsrr.decode_record(b"\x00\x01\x00\x00\x01\x00\x05", "a.com.")


def test_profiles_and_scenarios():
    names = httpsrr.profiles()
    assert {"chrome", "firefox", "safari", "rfc"} <= set(names)
    assert httpsrr.profile("chrome")
    scenarios = httpsrr.builtin_scenarios()
    t1 = httpsrr.run_scenario(scenarios[0], "firefox")
    t2 = httpsrr.run_scenario(scenarios[0], httpsrr.profile("firefox"))
    assert t1 == t2
    with pytest.raises(httpsrr.ContractViolation):
        httpsrr.run_scenario(scenarios[0], "netscape")


def test_conformance():
    report = httpsrr.conformance()
    assert report["ok"]
    assert report["rr_table"] and report["ech_table"]
    assert not report["expectation_failures"]


def test_cf_default_classifier():
    ranges = DATA / "cf_default.json"
    base = "a.com. HTTPS 1 . alpn=h3,h2 ipv4hint=104.16.132.229 ipv6hint=2606:4700::6810:84e5"
    assert httpsrr.classify_cf_default(base, ranges) == "default"
    assert httpsrr.classify_cf_default(base + " port=443", ranges) == "customized"


def test_synth_and_analyze(tmp_path):
    summary = httpsrr.synth(tmp_path, seed=3, days=3, domains=60)
    assert summary["snapshots"] == 360
    first, last = summary["dates"][0], summary["dates"][-1]
    for metric in ("adoption", "dnssec", "alpn", "intermittency"):
        a = httpsrr.analyze(tmp_path, metric, "dynamic", first, last)
        b = httpsrr.analyze(tmp_path, metric, "dynamic", first, last)
        assert a == b
        assert a["csv"].startswith("# config_digest: ")
    with pytest.raises(httpsrr.ContractViolation):
        httpsrr.analyze(tmp_path, "nonsense", "dynamic", first, last)
    assert "ech_rotation" in httpsrr.metric_names()
