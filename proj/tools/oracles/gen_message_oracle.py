# Copyright (c) httpsrr contributors. All rights reserved.
# Licensed under the Apache 2.0 License.
"""Compressed DNS messages built and encoded by dnspython.

Each case stores the wire bytes from dns.message.Message.to_wire (which
compresses owner names and the names inside CNAME/NS/SOA rdata) next to the
decoded fields, with rdata re-encoded uncompressed by dnspython itself.

Output: tests/data/message_oracle.json
"""

import json
from pathlib import Path

import dns.edns
import dns.flags
import dns.message
import dns.name
import dns.rcode
import dns.rdata
import dns.rdataclass
import dns.rdatatype
import dns.rrset

ROOT = Path(__file__).resolve().parents[2]


def rrset(name, ttl, rdtype, *texts):
    return dns.rrset.from_text(name, ttl, "IN", rdtype, *texts)


def build_cases():
    cases = []

    q = dns.message.make_query("a.com.", "HTTPS", want_dnssec=True, use_edns=0, payload=1232)
    q.id = 4660
    cases.append(("query-do", q))

    q = dns.message.make_query("www.Example.ORG.", "A", use_edns=False)
    q.id = 1
    cases.append(("query-plain", q))

    r = dns.message.make_query("www.a.com.", "HTTPS", want_dnssec=True, payload=1232)
    r = dns.message.make_response(r)
    r.id = 77
    r.flags |= dns.flags.RA | dns.flags.AD
    r.answer.append(rrset("www.a.com.", 300, "CNAME", "edge.a.com."))
    r.answer.append(rrset("edge.a.com.", 300, "HTTPS",
                          "1 . alpn=h2,h3 ipv4hint=104.16.1.1 ipv6hint=2606:4700::1"))
    r.answer.append(rrset("edge.a.com.", 300, "RRSIG",
                          "HTTPS 13 3 300 20240101000000 20231201000000 12345 a.com. AAAA BBBB CCCC DDDD"))
    cases.append(("cname-https-signed", r))

    r = dns.message.make_query("nope.a.com.", "HTTPS")
    r = dns.message.make_response(r)
    r.set_rcode(dns.rcode.NXDOMAIN)
    r.authority.append(rrset("a.com.", 900, "SOA",
                             "ns1.a.com. hostmaster.a.com. 2024010101 7200 3600 1209600 300"))
    cases.append(("nxdomain-soa", r))

    r = dns.message.make_query("a.com.", "NS")
    r = dns.message.make_response(r)
    r.answer.append(rrset("a.com.", 86400, "NS", "amir.ns.cloudflare.com.", "tess.ns.cloudflare.com."))
    r.additional.append(rrset("amir.ns.cloudflare.com.", 3600, "A", "172.64.32.1"))
    r.additional.append(rrset("amir.ns.cloudflare.com.", 3600, "AAAA", "2a06:98c1:50::ac40:2001"))
    cases.append(("ns-glue", r))

    r = dns.message.make_query("b.co.uk.", "DS", want_dnssec=True)
    r = dns.message.make_response(r)
    r.answer.append(rrset("b.co.uk.", 3600, "DS", "2371 13 2 C988EC423E3880EB8DD8A46FE06CA230EE23F35B578D64C9E6C1F2D2CC79C2CE"))
    cases.append(("ds", r))

    r = dns.message.make_query("a.com.", "HTTPS")
    r = dns.message.make_response(r)
    r.set_rcode(dns.rcode.SERVFAIL)
    cases.append(("servfail", r))

    r = dns.message.make_query("svc.a.com.", "HTTPS")
    r = dns.message.make_response(r)
    r.answer.append(rrset("svc.a.com.", 60, "HTTPS", "0 pool.a.com."))
    r.answer.append(rrset("svc.a.com.", 60, "TYPE65534", r"\# 3 010203"))
    cases.append(("alias-unknown", r))
    return cases


def describe_rr(rr_name, ttl, rdtype, rdclass, rd):
    return {
        "name": rr_name.to_text(),
        "type": int(rdtype),
        "class": int(rdclass),
        "ttl": ttl,
        "rdata": rd.to_wire().hex(),
    }


def section(rrsets):
    out = []
    for rs in rrsets:
        for rd in rs:
            out.append(describe_rr(rs.name, rs.ttl, rs.rdtype, rs.rdclass, rd))
    return out


def main():
    out = []
    for label, msg in build_cases():
        wire = msg.to_wire()
        back = dns.message.from_wire(wire)
        out.append({
            "label": label,
            "wire": wire.hex(),
            "id": back.id,
            "flags": back.flags,
            "rcode": back.rcode(),
            "questions": [{"name": q.name.to_text(), "type": int(q.rdtype)} for q in back.question],
            "answers": section(back.answer),
            "authority": section(back.authority),
            "additional": section(back.additional),
            "edns": None if back.edns < 0 else {"udp_size": back.payload, "do": bool(back.ednsflags & dns.flags.DO)},
        })
    path = ROOT / "tests" / "data" / "message_oracle.json"
    path.write_text(json.dumps({"cases": out}, indent=1) + "\n")
    print(f"wrote {len(out)} cases to {path}")


if __name__ == "__main__":
    main()
