"""Reference implementation of the deterministic feature-hashing embedder.

Mirrors the production hashing scheme step by step (FNV-1a 64, tagged bucket
and sign hashes, float32 accumulation, f64 norm) so frozen vectors can be
compared bit-for-bit against the Rust implementation.
"""

import math
import struct

import porter_ref

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x00000100000001B3
MASK64 = 0xFFFFFFFFFFFFFFFF

BUCKET_TAG = b"bucket\x00"
SIGN_TAG = b"sign\x00"
BIGRAM_JOIN = "\x1f"


def f32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


def fnv1a64(data):
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def normalize(text):
    from metrics_ref import tokenize

    return [porter_ref.stem(tok) for tok in tokenize(text)]


def features(tokens):
    feats = list(tokens)
    for a, b in zip(tokens, tokens[1:]):
        feats.append(a + BIGRAM_JOIN + b)
    return feats


def embed(text, dim):
    tokens = normalize(text)
    if not tokens:
        raise ValueError("empty after normalization")
    values = [0.0] * dim
    for feat in features(tokens):
        data = feat.encode("utf-8")
        bucket = fnv1a64(BUCKET_TAG + data) % dim
        sign = 1.0 if fnv1a64(SIGN_TAG + data) & 1 == 0 else -1.0
        values[bucket] = f32(values[bucket] + sign)
    norm = math.sqrt(sum(float(v) * float(v) for v in values))
    return [f32(float(v) / norm) for v in values]


def cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    return dot / (na * nb)


def self_check():
    v1 = embed("lithium treats bipolar disorder", 64)
    v2 = embed("lithium treats bipolar disorder", 64)
    assert v1 == v2, "determinism"
    norm = math.sqrt(sum(x * x for x in v1))
    assert abs(norm - 1.0) < 1e-6, norm
    # Stemming folds inflected forms onto the same features.
    v3 = embed("lithium treated bipolar disorders", 64)
    assert v1 == v3, "stem folding"
    print("hash_embed_ref: self-check passed")


if __name__ == "__main__":
    self_check()
