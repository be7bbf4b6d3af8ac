#!/usr/bin/env python3
"""Regenerates tests/data/rng_vectors.txt from a standalone Python model of
the keyed stream construction (mix64 chain over the key fields and counter).

Usage: gen_rng_vectors.py > tests/data/rng_vectors.txt
"""

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SALTS = {
    "experiment": 0x2545F4914F6CDD1D,
    "sample": 0xD1B54A32D192ED03,
    "dimension": 0x8CB92BA72F3D8DD7,
    "substream": 0xAEF17502108EF2D9,
    "counter": 0xDB4F0B9175AE2165,
}


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def absorb(state, value, salt):
    return mix64(state ^ ((value * GOLDEN + salt) & MASK))


def word(experiment, sample, dimension, substream, counter):
    state = absorb(0, experiment, SALTS["experiment"])
    state = absorb(state, sample, SALTS["sample"])
    state = absorb(state, dimension, SALTS["dimension"])
    state = absorb(state, substream, SALTS["substream"])
    return absorb(state, counter, SALTS["counter"])


CASES = [
    (0, 0, 0, 1, 0), (0, 0, 0, 1, 1), (0, 0, 0, 2, 0), (0, 0, 0, 3, 0),
    (0, 0, 1, 1, 0), (0, 1, 0, 1, 0), (1, 0, 0, 1, 0), (42, 0, 0, 1, 0),
    (42, 7, 123, 1, 0), (42, 7, 123, 1, 1), (42, 7, 123, 2, 0), (42, 7, 123, 2, 1),
    (42, 7, 123, 3, 0), (42, 7, 123, 4, 0), (42, 7, 123, 4, 1), (42, 7, 123, 5, 0),
    (42, 1, 0, 6, 0), (42, 2, 5, 6, 0), (42, 0, 9999, 7, 0), (42, 2, 17, 8, 3),
    (7, 99, 199999, 1, 0), (7, 99, 199999, 3, 0), (MASK, MASK, MASK, 8, MASK),
    (MASK, 0, 0, 1, 0), (0, MASK, 0, 1, 0), (0, 0, MASK, 1, 0), (0, 0, 0, 1, MASK),
    (123456789, 987654321, 4294967295, 2, 12), (2**63, 2**32, 2**31, 5, 2**40),
    (1, 1, 1, 1, 1), (3, 1, 4, 1, 5), (27182818, 31415926, 1000000, 4, 7),
]

if __name__ == "__main__":
    pass
    for case in CASES:
        print(" ".join(str(v) for v in case), word(*case))
