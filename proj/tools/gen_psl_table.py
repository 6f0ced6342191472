# Copyright (c) httpsrr contributors. All rights reserved.
# Licensed under the Apache 2.0 License.
"""Emit src/psl_rules.inc from the ICANN section of the public suffix list."""

import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def icann_rules(path):
    in_icann = False
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if "===BEGIN ICANN DOMAINS===" in line:
            in_icann = True
            continue
        if "===END ICANN DOMAINS===" in line:
            break
        if not in_icann or not line or line.startswith("//"):
            continue
        rule = line.split()[0]
        prefix = ""
        if rule.startswith("!"):
            prefix, rule = "!", rule[1:]
        labels = []
        for label in rule.split("."):
            if label == "*":
                labels.append(label)
            else:
                labels.append(label.encode("idna").decode("ascii").lower())
        yield prefix + ".".join(labels)


def main():
    src = ROOT / "data" / "public_suffix_list.dat"
    out = ROOT / "src" / "psl_rules.inc"
    rules = sorted(set(icann_rules(src)))
    with out.open("w", encoding="ascii") as f:
        f.write("// Copyright (c) httpsrr contributors. All rights reserved.\n")
        f.write("// Licensed under the Apache 2.0 License.\n\n")
        f.write("// Generated by tools/gen_psl_table.py from data/public_suffix_list.dat.\n")
        for r in rules:
            f.write(f'"{r}",\n')
    print(f"{len(rules)} rules -> {out}", file=sys.stderr)


if __name__ == "__main__":
    main()
