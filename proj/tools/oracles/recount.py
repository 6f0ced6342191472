# Copyright (c) httpsrr contributors. All rights reserved.
# Licensed under the Apache 2.0 License.
"""Brute-force recount of the snapshot metrics from raw day files.

Reads snapshots-YYYY-MM-DD.jsonl files directly, decodes rdata with
dnspython and recomputes adoption, the overlapping set, mismatch runs,
DNSSEC ratios, the ALPN distribution and intermittency without sharing any
code with the C++ library. Prints one JSON document.

usage: recount.py STORE_DIR FROM TO [--set dynamic|overlapping] [--kind apex|www]
"""

import argparse
import datetime
import ipaddress
import json
import sys
from pathlib import Path

import dns.exception
import dns.rdata
import dns.rdataclass
import dns.rdatatype
from dns.rdtypes.svcbbase import ParamKey


def days_between(start, end):
    a = datetime.date.fromisoformat(start)
    b = datetime.date.fromisoformat(end)
    out = []
    while a <= b:
        out.append(a.isoformat())
        a += datetime.timedelta(days=1)
    return out


def load_day(store, date, kind):
    path = Path(store) / f"snapshots-{date}.jsonl"
    seen = {}
    if not path.exists():
        return seen
    for line in path.read_text().splitlines():
        try:
            snap = json.loads(line)
        except json.JSONDecodeError:
            continue
        if not isinstance(snap, dict) or snap.get("kind") != kind:
            continue
        seen.setdefault(snap["domain"], snap)
    return seen


def https_rdatas(snap):
    out = []
    for rec in snap.get("rrsets", {}).get("HTTPS", {}).get("records", []):
        raw = bytes.fromhex(rec["rdata"])
        try:
            out.append(dns.rdata.from_wire(dns.rdataclass.IN, dns.rdatatype.HTTPS, raw, 0, len(raw)))
        except dns.exception.DNSException:
            pass
    return out


def has_https(snap):
    return len(snap.get("rrsets", {}).get("HTTPS", {}).get("records", [])) > 0


def hints(snap, key):
    out = set()
    for rd in https_rdatas(snap):
        if rd.priority == 0:
            continue
        p = rd.params.get(key)
        if p is not None:
            out |= {ipaddress.ip_address(a) for a in p.addresses}
    return out


def addresses(snap, rdtype):
    out = set()
    for rec in snap.get("rrsets", {}).get(rdtype, {}).get("records", []):
        raw = bytes.fromhex(rec["rdata"])
        try:
            rd = dns.rdata.from_wire(dns.rdataclass.IN, dns.rdatatype.from_text(rdtype), raw, 0, len(raw))
        except dns.exception.DNSException:
            continue
        out.add(ipaddress.ip_address(rd.address))
    return out


def mismatched(snap):
    for key, rdtype in ((ParamKey.IPV4HINT, "A"), (ParamKey.IPV6HINT, "AAAA")):
        h = hints(snap, key)
        if h and h != addresses(snap, rdtype):
            return True
    return False


def pct(part, whole):
    return 0.0 if whole == 0 else 100.0 * part / whole


def ns_known(snap):
    return "NS" in snap.get("rrsets", {})


def intermittency(series):
    toggled = False
    changed = False
    absent = False
    for prev, cur in zip(series, series[1:]):
        if has_https(prev) == has_https(cur):
            continue
        toggled = True
        if ns_known(prev) and ns_known(cur) and set(prev["ns_names"]) != set(cur["ns_names"]):
            changed = True
        if not has_https(cur) and ns_known(cur) and not cur["ns_names"]:
            absent = True
    known = [frozenset(s["ns_names"]) for s in series if ns_known(s)]
    same = bool(known) and len(set(known)) == 1
    active = []
    start = None
    for i, s in enumerate(series):
        if has_https(s) and start is None:
            start = s["date"]
        if not has_https(s) and start is not None:
            active.append([start, series[i - 1]["date"]])
            start = None
    if start is not None:
        active.append([start, series[-1]["date"]])
    return {
        "intermittent": toggled,
        "active": active,
        "same_ns_throughout": same,
        "ns_changed_at_toggle": changed,
        "ns_absent_at_deactivation": absent,
    }


def recount(store, start, end, set_mode, kind):
    dates = days_between(start, end)
    days = {d: load_day(store, d, kind) for d in dates}
    days = {d: v for d, v in days.items() if v}
    present = sorted(days)

    overlap = None
    for d in dates:
        names = set(days.get(d, {}))
        overlap = names if overlap is None else overlap & names

    def members(date):
        return set(days[date]) if set_mode == "dynamic" else overlap

    adoption = {}
    dnssec = {}
    alpn = {}
    for date in present:
        snaps = days[date]
        m = members(date)
        if m:
            adoption[date] = pct(sum(1 for n in m if n in snaps and has_https(snaps[n])), len(m))
        counts = {"https_domains": 0, "signed": 0, "validated": 0, "insecure": 0}
        protocols = {}
        for n in sorted(m):
            s = snaps.get(n)
            if s is None or not has_https(s):
                continue
            counts["https_domains"] += 1
            cap = s["rrsets"]["HTTPS"]
            if cap.get("rrsig"):
                counts["signed"] += 1
                if cap.get("ad"):
                    counts["validated"] += 1
                if not s.get("ds_present"):
                    counts["insecure"] += 1
            ids = set()
            for rd in https_rdatas(s):
                if rd.priority == 0:
                    continue
                p = rd.params.get(ParamKey.ALPN)
                if p is not None:
                    ids |= {i.decode("latin-1") for i in p.ids}
            for i in ids or {"none"}:
                protocols[i] = protocols.get(i, 0) + 1
        counts["signed_pct"] = pct(counts["signed"], counts["https_domains"])
        counts["validated_pct"] = pct(counts["validated"], counts["https_domains"])
        counts["insecure_among_signed_pct"] = pct(counts["insecure"], counts["signed"])
        dnssec[date] = counts
        alpn[date] = {
            "counts": protocols,
            "pct": {k: pct(v, counts["https_domains"]) for k, v in protocols.items()},
        }

    series = {}
    for date in present:
        for name, s in days[date].items():
            series.setdefault(name, []).append(s)

    runs = {}
    inter = {}
    for name, ss in sorted(series.items()):
        out = []
        run = 0
        prev = None
        for s in ss:
            day = datetime.date.fromisoformat(s["date"])
            if run and prev is not None and (day - prev).days != 1:
                out.append(run)
                run = 0
            prev = day
            if mismatched(s):
                run += 1
            elif run:
                out.append(run)
                run = 0
        if run:
            out.append(run)
        runs[name] = out
        if len(ss) >= 2:
            inter[name] = intermittency(ss)

    return {
        "adoption": adoption,
        "overlapping": sorted(overlap or []),
        "mismatch_durations": runs,
        "dnssec": dnssec,
        "alpn": alpn,
        "intermittency": inter,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("store")
    ap.add_argument("start")
    ap.add_argument("end")
    ap.add_argument("--set", default="overlapping", choices=["dynamic", "overlapping"])
    ap.add_argument("--kind", default="apex", choices=["apex", "www"])
    ap.add_argument("--out")
    args = ap.parse_args()
    result = recount(args.store, args.start, args.end, args.set, args.kind)
    text = json.dumps(result, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text + "\n")


if __name__ == "__main__":
    main()
