# Copyright (c) httpsrr contributors. All rights reserved.
# Licensed under the Apache 2.0 License.

"""HTTPS resource record codec, browser-policy simulator and scan analysis."""

import json

from . import _httpsrr
from ._httpsrr import AliasLoopError, ContractViolation, ParseError

__all__ = [
    "AliasLoopError",
    "ContractViolation",
    "ParseError",
    "analyze",
    "builtin_scenarios",
    "classify_cf_default",
    "conformance",
    "decode_record",
    "encode_record",
    "metric_names",
    "parse_ech",
    "parse_record",
    "profile",
    "profiles",
    "run_scenario",
    "synth",
]


def parse_record(line):
    """Parse one HTTPS/SVCB zone line; returns fields, wire hex and issues."""
    return json.loads(_httpsrr.parse_record(line))


def decode_record(rdata, owner="", ttl=0):
    return json.loads(_httpsrr.decode_record(bytes(rdata), owner, ttl))


def encode_record(line):
    return _httpsrr.encode_record(line)


def parse_ech(base64_text):
    return json.loads(_httpsrr.parse_ech(base64_text))


def profiles():
    return list(_httpsrr.profile_names())


def profile(name):
    return json.loads(_httpsrr.profile_json(name))


def builtin_scenarios():
    return [json.loads(s) for s in _httpsrr.builtin_scenarios()]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def run_scenario(scenario, profile):
    """Run a scenario (dict or JSON text) under a builtin profile name or profile dict."""
    return json.loads(_httpsrr.run_scenario(_text(scenario), _text(profile)))


def conformance(scenarios=None):
    return json.loads(_httpsrr.conformance([_text(s) for s in scenarios or []]))


def classify_cf_default(line, ranges_path):
    return _httpsrr.classify_cf_default(line, str(ranges_path))


def metric_names():
    return list(_httpsrr.metric_names())


def synth(out, seed=1, start="2024-03-01", days=5, domains=1000):
    return json.loads(_httpsrr.synth(str(out), seed, start, days, domains))


def analyze(store, metric, set_mode, from_date, to_date, kind="apex", cf_ranges=None):
    """Run one metric over a snapshot store; the result carries rows and the CSV text."""
    return json.loads(
        _httpsrr.analyze(str(store), metric, set_mode, from_date, to_date, kind, str(cf_ranges or ""))
    )
