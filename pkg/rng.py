"""
Reproduzierbare Zufallszahlen mit rollengetrennten Seeds

Alle Generatoren sind numpy.random.Generator(PCG64); Normalverteilungen
kommen aus dem Ziggurat-Verfahren von numpy.
"""

import zlib

import numpy as np


def derive_seed(base_seed: int, role: str, index: int = 0) -> int:
    """Leitet aus Basis-Seed, Rolle und Index einen unabhängigen Seed ab"""
    role_code = zlib.crc32(role.encode("utf-8"))
    sequence = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, role_code, int(index)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def role_rng(base_seed: int, role: str, index: int = 0) -> np.random.Generator:
    return make_rng(derive_seed(base_seed, role, index))
