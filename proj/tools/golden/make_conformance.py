#!/usr/bin/env python3
"""Regenerates data/conformance/{vocab.tsv,golden.json}.

Written independently of the C++ codec: bit packing and base64 here are
the reference the service and client are checked against.
"""
import base64
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parents[2] / "data" / "conformance"

WORDS = ("the of to and that is for a this on we in there message council ministers first "
         "foremost commission president report thank rapporteur her excellent").split()


def index(word):
    return WORDS.index(word) + 2 if word in WORDS else 1


def pack(indices, width):
    bits = []
    for v in indices:
        bits += [(v >> (width - 1 - b)) & 1 for b in range(width)]
    bits += [0] * (-len(bits) % 8)
    data = bytes(int("".join(map(str, bits[i:i + 8])), 2) for i in range(0, len(bits), 8))
    return base64.b64encode(data).decode()


def word(i):
    return WORDS[i - 2] if 2 <= i < len(WORDS) + 2 else "unk"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "vocab.tsv", "w") as f:
        f.write("<pad>\t0\n<unk>\t1\n")
        for i, w in enumerate(WORDS):
            f.write(f"{w}\t{i + 2}\n")

    cases = []
    sentences = [
        "first and foremost there is a message for the council of ministers",
        "thank the rapporteur for her excellent report",
        "we thank the commission",
        "the president of the parliament",  # "parliament" is out of vocabulary
    ]
    for s in sentences:
        toks = s.split()
        ids = [index(t) for t in toks]
        cases.append({"name": "encode: " + s, "route": "/v1/encode",
                      "request": {"sentence": toks},
                      "status": 200,
                      "response": {"bits": pack(ids, 16), "width": 16, "length": len(toks)}})
        cases.append({"name": "decode: " + s, "route": "/v1/decode",
                      "request": {"bits": pack(ids, 16), "width": 16, "length": len(toks)},
                      "status": 200,
                      "response": {"sentence": [word(i) for i in ids]}})
    raw = [0, 1, 2, 40000, 3]
    cases.append({"name": "decode: reserved and out-of-range indices", "route": "/v1/decode",
                  "request": {"bits": pack(raw, 16), "width": 16, "length": len(raw)},
                  "status": 200,
                  "response": {"sentence": [word(i) for i in raw]}})
    cases.append({"name": "decode: truncated bits", "route": "/v1/decode",
                  "request": {"bits": pack([2, 3, 4], 16), "width": 16, "length": 4},
                  "status": 400})
    cases.append({"name": "encode: too short", "route": "/v1/encode",
                  "request": {"sentence": ["the", "council"]}, "status": 400})
    cases.append({"name": "encode: missing field", "route": "/v1/encode",
                  "request": {"words": ["the"]}, "status": 400})
    cases.append({"name": "reconstruct: clean sentence", "route": "/v1/reconstruct",
                  "request": {"sentence": "thank the rapporteur for her excellent report".split(),
                              "strategy": "plain"},
                  "status": 200, "shape": "sentence"})
    cases.append({"name": "reconstruct: prompted", "route": "/v1/reconstruct",
                  "request": {"sentence": "thank the unk for her excellent report".split(),
                              "strategy": "prompted", "summary": "rapporteur report",
                              "examples": [{"corrupted": "the unk of ministers".split(),
                                            "correct": "the council of ministers".split()}]},
                  "status": 200, "shape": "sentence"})
    cases.append({"name": "reconstruct: unknown strategy", "route": "/v1/reconstruct",
                  "request": {"sentence": ["the", "council", "of", "ministers"], "strategy": "creative"},
                  "status": 400})
    cases.append({"name": "encode: wrong protocol version", "route": "/v1/encode",
                  "request": {"sentence": "we thank the commission".split()},
                  "version": "2", "status": 409})
    with open(OUT / "golden.json", "w") as f:
        json.dump({"protocol_version": 1, "width": 16, "cases": cases}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
