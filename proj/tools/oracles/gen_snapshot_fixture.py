# Copyright (c) httpsrr contributors. All rights reserved.
# Licensed under the Apache 2.0 License.
"""Forward-compatibility snapshot day file.

Mixes a plain version-1 line, a version-1 line with extra top-level fields, a
hypothetical version-2 line with new fields, and one corrupt line. rdata
bytes come from dnspython.

Output: tests/data/snapshots-2024-03-01.jsonl
"""

import json
from pathlib import Path

import dns.rdata
import dns.rdataclass
import dns.rdatatype

ROOT = Path(__file__).resolve().parents[2]


def wire(rdtype, text):
    rd = dns.rdata.from_text(dns.rdataclass.IN, dns.rdatatype.from_text(rdtype), text)
    return rd.to_wire().hex()


def capture(resolver, records, rdtype, ad=False, rrsig=False):
    return {
        "resolver": resolver,
        "status": "noerror",
        "records": [{"name": name, "ttl": ttl, "rdata": wire(rdtype, text)} for name, ttl, text in records],
        "rrsig": rrsig,
        "ad": ad,
        "malformed": False,
    }


def main():
    https = "1 . alpn=h2,h3 ipv4hint=104.16.1.1 ipv6hint=2606:4700::1"
    base = {
        "v": 1,
        "date": "2024-03-01",
        "timestamp": 1709251200,
        "domain": "a.com.",
        "kind": "apex",
        "rrsets": {
            "HTTPS": capture("8.8.8.8", [("a.com.", 300, https)], "HTTPS", ad=True, rrsig=True),
            "A": capture("8.8.8.8", [("a.com.", 300, "104.16.1.1")], "A"),
        },
        "cname_chain": [],
        "error": None,
        "ds_present": True,
        "ns_names": ["amir.ns.cloudflare.com."],
    }
    extended = dict(base, domain="www.a.com.", kind="www", asn=13335, note="enriched later")
    future = dict(base, v=2, domain="b.com.", rrsets={}, resolver_rtt_ms={"8.8.8.8": 12.5},
                  quic={"h3": True})
    lines = [json.dumps(base), json.dumps(extended), "{not json", json.dumps(future)]
    path = ROOT / "tests" / "data" / "snapshots-2024-03-01.jsonl"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} lines to {path}")


if __name__ == "__main__":
    main()
