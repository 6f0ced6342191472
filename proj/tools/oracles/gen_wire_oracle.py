# Copyright (c) httpsrr contributors. All rights reserved.
# Licensed under the Apache 2.0 License.
"""Produce HTTPS/SVCB rdata blobs for known presentation records.

The records are loaded into a dnspython zone, served by a throwaway UDP
authoritative server on loopback, and queried back with dns.query. The rdata
bytes are taken from the answer section, so they come from dnspython's own
codec end to end.

Output: tests/data/wire_oracle.json
"""

import json
import socket
import sys
import threading
from pathlib import Path

import dns.flags
import dns.message
import dns.name
import dns.query
import dns.rdataclass
import dns.rdatatype
import dns.zone

ORIGIN = "oracle.test."

# (owner-relative name, type, rdata)
RECORDS = [
    ("a", "HTTPS", "0 b.com."),
    ("c", "HTTPS", "1 . alpn=h3 ipv4hint=1.2.3.4"),
    ("d", "HTTPS", "1 . alpn=h2,h3"),
    ("e", "HTTPS", "1 pool.a.com. alpn=h2"),
    ("f", "HTTPS", "1 . alpn=h2 port=8443"),
    ("g", "HTTPS", "1 . alpn=h2 ipv4hint=1.2.3.4"),
    ("h", "HTTPS", "1 . alpn=h2,h3 ipv4hint=104.16.1.1,104.16.2.2 ipv6hint=2606:4700::6810:101,2606:4700::6810:202"),
    ("i", "SVCB", "0 foo.example.com."),
    ("j", "SVCB", "1 ."),
    ("k", "SVCB", "16 foo.example.com. port=53"),
    ("l", "SVCB", "1 foo.example.com. key667=hello"),
    ("m", "SVCB", '1 foo.example.com. key667="hello\\210qoo"'),
    ("n", "SVCB", '1 foo.example.com. ipv6hint="2001:db8::1,2001:db8::53:1"'),
    ("o", "SVCB", "1 example.com. ipv6hint=2001:db8:122:344::192.0.2.33"),
    ("p", "SVCB", "16 foo.example.org. alpn=h2,h3-19 mandatory=ipv4hint,alpn ipv4hint=192.0.2.1"),
    ("q", "SVCB", '16 foo.example.org. alpn="f\\\\\\\\oo\\\\,bar,h2"'),
    ("r", "HTTPS", "1 . alpn=h2 no-default-alpn"),
    ("s", "HTTPS", "2 svc2.a.com. alpn=h3-29,h3 port=443"),
    ("t", "HTTPS", "1 . key7 key65000=abc"),
]


def ech_records(data_dir: Path):
    oracle = json.loads((data_dir / "ech_oracle.json").read_text())
    out = []
    for i, case in enumerate(oracle["cases"][:3]):
        out.append((f"ech{i}", "HTTPS", f"1 . alpn=h2 ech={case['base64']}"))
    return out


class Server(threading.Thread):
    def __init__(self, zone):
        super().__init__(daemon=True)
        self.zone = zone
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind(("127.0.0.1", 0))
        self.port = self.sock.getsockname()[1]
        self.stop = False

    def run(self):
        while not self.stop:
            try:
                data, peer = self.sock.recvfrom(65535)
            except OSError:
                return
            q = dns.message.from_wire(data)
            r = dns.message.make_response(q)
            r.flags |= dns.flags.AA
            question = q.question[0]
            rrset = self.zone.get_rrset(question.name, question.rdtype)
            if rrset is not None:
                r.answer.append(rrset)
            self.sock.sendto(r.to_wire(), peer)


def main(data_dir: Path):
    records = RECORDS + ech_records(data_dir)
    lines = [f"$ORIGIN {ORIGIN}", "@ 3600 IN SOA ns. host. 1 3600 600 86400 60", "@ 3600 IN NS ns."]
    lines += [f"{name} 300 IN {rtype} {rdata}" for name, rtype, rdata in records]
    zone = dns.zone.from_text("\n".join(lines) + "\n", origin=ORIGIN, relativize=False)

    server = Server(zone)
    server.start()
    cases = []
    try:
        for name, rtype, rdata in records:
            owner = dns.name.from_text(name, dns.name.from_text(ORIGIN))
            q = dns.message.make_query(owner, rtype)
            resp = dns.query.udp(q, "127.0.0.1", port=server.port, timeout=2)
            assert len(resp.answer) == 1, name
            rr = resp.answer[0][0]
            cases.append(
                {
                    "presentation": f"{owner.to_text()} 300 IN {rtype} {rdata}",
                    "type": rtype,
                    "wire_hex": rr.to_wire().hex(),
                    "dnspython_text": rr.to_text(),
                }
            )
    finally:
        server.stop = True
        server.sock.close()

    out = {"generator": "gen_wire_oracle.py", "cases": cases}
    (data_dir / "wire_oracle.json").write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/data"))
