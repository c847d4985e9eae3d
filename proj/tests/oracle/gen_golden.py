#!/usr/bin/env python3
"""Reference oracle for the golden-vector file.

Computes every vector with standard primitives only (pyca/cryptography AES-128
and SHA-256, Python integers for P-256 arithmetic, python-ecdsa for RFC 6979
deterministic ECDSA). Nothing here calls into the C++ library.

Usage: gen_golden.py [output-path]   (defaults to stdout)
"""

import hashlib
import sys

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
import ecdsa
from ecdsa.util import sigencode_string

# NIST P-256
P = 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF
A = P - 3
B = 0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B
GX = 0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296
GY = 0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5
L = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551


def point_add(p, q):
    if p is None:
        return q
    if q is None:
        return p
    if p[0] == q[0] and (p[1] + q[1]) % P == 0:
        return None
    if p == q:
        lam = (3 * p[0] * p[0] + A) * pow(2 * p[1], -1, P) % P
    else:
        lam = (q[1] - p[1]) * pow(q[0] - p[0], -1, P) % P
    x = (lam * lam - p[0] - q[0]) % P
    return (x, (lam * (p[0] - x) - p[1]) % P)


def point_mul(k, p):
    r = None
    while k:
        if k & 1:
            r = point_add(r, p)
        p = point_add(p, p)
        k >>= 1
    return r


def compress(p):
    if p is None:
        return bytes(33)
    return bytes([2 + (p[1] & 1)]) + p[0].to_bytes(32, "big")


G = (GX, GY)


def aes_block(key, block):
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def xor(a, b):
    return bytes(x ^ y for x, y in zip(a, b))


def prf_block(key, block):
    return xor(aes_block(key, block), block)


def derive(label, n):
    return hashlib.sha256(label.encode()).digest()[:n]


def expansion_input(kind, i, j):
    prefix = b"\x00" * 4 if kind == "signing" else b"\xff" * 4
    return prefix + i.to_bytes(4, "big") + j.to_bytes(4, "big") + b"\x00" * 4


def expand_f(key, kind, i, j):
    x = int.from_bytes(expansion_input(kind, i, j), "big")
    out = b""
    for n in (1, 2, 3):
        blk = ((x + n) % (1 << 128)).to_bytes(16, "big")
        out += prf_block(key, blk)
    return int.from_bytes(out, "big") % L


def evolve_seed(la_id, seed):
    return hashlib.sha256(la_id.to_bytes(4, "big") + seed).digest()[:16]


def pre_linkage(la_id, seed, j):
    blk = la_id.to_bytes(4, "big") + j.to_bytes(4, "big") + b"\x00" * 8
    return prf_block(seed, blk)[:9]


def seed_at(la_id, seed0, i):
    s = seed0
    for _ in range(i):
        s = evolve_seed(la_id, s)
    return s


def derive_scalar(label):
    return int.from_bytes(hashlib.sha256(label.encode()).digest(), "big") % L


def main():
    lines = ["# golden vectors, generated by tests/oracle/gen_golden.py"]
    h = lambda b: b.hex() if b else "-"

    keys = [bytes(16), bytes(range(16)), b"\xff" * 16, derive("prf-key-3", 16)]
    blocks = [bytes(16), bytes(range(16, 32)), b"\xff" * 16, derive("prf-block-3", 16)]
    for k, x in zip(keys, blocks):
        lines.append(f"aes_block key={h(k)} block={h(x)} out={h(aes_block(k, x))}")
        lines.append(f"prf_block key={h(k)} block={h(x)} out={h(prf_block(k, x))}")

    for data, u in [(b"", 32), (b"abc", 16), (b"abc", 32), (derive("hash-data", 32), 8)]:
        lines.append(
            f"hash_truncated data={h(data)} u={u} out={h(hashlib.sha256(data).digest()[:u])}")

    exp_cases = [
        (bytes(16), "signing", 0, 0),
        (bytes(16), "signing", 0, 1),
        (bytes(16), "encryption", 0, 0),
        (bytes(range(16)), "signing", 1, 2),
        (bytes(range(16)), "encryption", 1, 2),
        (derive("butterfly-key-1", 16), "signing", 52, 19),
        (derive("butterfly-key-1", 16), "encryption", 0xFFFFFFFF, 0xFFFFFFFF),
        (b"\xff" * 16, "signing", 7, 1000),
    ]
    for k, kind, i, j in exp_cases:
        lines.append(
            f"expand_f key={h(k)} kind={kind} i={i} j={j} out={expand_f(k, kind, i, j):064x}")

    for la_id, seed in [(1, bytes(16)), (2, bytes(16)), (0xA1B2C3D4, derive("seed-x", 16))]:
        lines.append(f"evolve_seed la_id={la_id:08x} seed={h(seed)} out={h(evolve_seed(la_id, seed))}")
    chain_seed = derive("chain-seed", 16)
    lines.append(
        f"evolve_seed_steps la_id=00000007 seed={h(chain_seed)} steps=10 out={h(seed_at(7, chain_seed, 10))}")

    for la_id, seed, j in [(0, bytes(16), 0), (0, bytes(16), 1), (1, derive("plv-seed", 16), 19),
                           (0xFFFFFFFF, b"\xff" * 16, 0xFFFFFFFF)]:
        lines.append(f"pre_linkage la_id={la_id:08x} seed={h(seed)} j={j} out={h(pre_linkage(la_id, seed, j))}")

    for n, (la1, la2, i, j) in enumerate([(1, 2, 0, 0), (1, 2, 3, 5), (0x11, 0x22, 9, 19)]):
        s1 = derive(f"lv-seed1-{n}", 16)
        s2 = derive(f"lv-seed2-{n}", 16)
        p1 = pre_linkage(la1, seed_at(la1, s1, i), j)
        p2 = pre_linkage(la2, seed_at(la2, s2, i), j)
        lines.append(
            f"linkage_value la1={la1:08x} seed1={h(s1)} la2={la2:08x} seed2={h(s2)} i={i} j={j} "
            f"plv1={h(p1)} plv2={h(p2)} out={h(xor(p1, p2))}")

    for n, (kind, i, j) in enumerate([("signing", 0, 0), ("signing", 3, 7), ("encryption", 3, 7)]):
        a = derive_scalar(f"caterpillar-{n}")
        k = derive(f"caterpillar-key-{n}", 16)
        cat = point_mul(a, G)
        cocoon = point_add(cat, point_mul(expand_f(k, kind, i, j), G))
        lines.append(
            f"cocoon seed={h(compress(cat))} key={h(k)} kind={kind} i={i} j={j} out={h(compress(cocoon))}")

    for label in ["pub-1", "pub-2"]:
        s = derive_scalar(label)
        lines.append(f"public_key priv={s:064x} out={h(compress(point_mul(s, G)))}")

    for n, (priv_label, msg) in enumerate([("sig-key-1", b"sample"), ("sig-key-2", b"test")]):
        d = derive_scalar(priv_label)
        digest = hashlib.sha256(msg).digest()
        sk = ecdsa.SigningKey.from_secret_exponent(d, curve=ecdsa.NIST256p, hashfunc=hashlib.sha256)
        sig = sk.sign_digest_deterministic(digest, hashfunc=hashlib.sha256, sigencode=sigencode_string)
        lines.append(f"ecdsa_rfc6979 priv={d:064x} digest={h(digest)} sig={h(sig)}")

    out = "\n".join(lines) + "\n"
    if len(sys.argv) > 1:
        with open(sys.argv[1], "w") as f:
            f.write(out)
    else:
        sys.stdout.write(out)


if __name__ == "__main__":
    main()
