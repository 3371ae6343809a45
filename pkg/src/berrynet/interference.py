"""Fock-state evolution through linear networks and two-photon statistics.

Transition rule: for input occupations S and output occupations T the
probability is |perm(U_{T,S})|^2 / (prod_i s_i! prod_j t_j!) with U_{T,S}
built by repeating row i / column j of U by t_i / s_j.  Partial
distinguishability of a photon pair enters through a single pairwise
wavepacket overlap x in [0, 1] mixing the quantum and classical two-photon
terms; the fringe visibility then equals x.

Conditional coincidence maps condition on a coincidence having occurred at
two distinct detectors (bunched events are excluded from the denominator),
which reproduces the (1 +- cos theta)/2 law of the Hadamard network exactly.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .linalg import DEFAULT_EPS, is_unitary, permanent, submatrix_with_repetition

__all__ = [
    "PHOTON_CAP",
    "enumerate_patterns",
    "evolve",
    "coincidence_probability",
    "conditional_coincidences",
    "singles_distribution",
    "hom_visibility",
]

# Desk-scale cap: permanents beyond six photons are a misuse of this module.
PHOTON_CAP = 6


def _check_unitary(u) -> np.ndarray:
    a = np.asarray(u, dtype=np.complex128)
    if not is_unitary(a, 1e-8):
        raise ValueError("transfer matrix must be unitary")
    return a


def _check_overlap(x: float) -> float:
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"wavepacket overlap x={x} outside [0, 1]")
    return float(x)


def enumerate_patterns(modes: int, photons: int) -> list[tuple[int, ...]]:
    """All occupation patterns of ``photons`` photons over ``modes`` modes,
    in lexicographic order (stable serialization order)."""
    if modes == 1:
        return [(photons,)]
    out = []
    for first in range(photons + 1):
        for rest in enumerate_patterns(modes - 1, photons - first):
            out.append((first,) + rest)
    return out


def _factorial_product(occ) -> float:
    return math.prod(math.factorial(int(k)) for k in occ)


def evolve(u, input_occupations) -> dict[tuple[int, ...], float]:
    """Output distribution of a Fock input through the unitary ``u``.

    Returns {pattern: probability} over every output pattern with the input
    photon number, in lexicographic pattern order.
    """
    a = _check_unitary(u)
    occ = tuple(int(k) for k in input_occupations)
    if len(occ) != a.shape[0]:
        raise ValueError(f"occupation length {len(occ)} != mode count {a.shape[0]}")
    if any(k < 0 for k in occ):
        raise ValueError("occupations must be nonnegative")
    photons = sum(occ)
    if photons > PHOTON_CAP:
        raise ValueError(f"photon number {photons} exceeds the cap of {PHOTON_CAP}")
    in_norm = _factorial_product(occ)
    dist: dict[tuple[int, ...], float] = {}
    for pattern in enumerate_patterns(len(occ), photons):
        amp = permanent(submatrix_with_repetition(a, pattern, occ))
        dist[pattern] = abs(amp) ** 2 / (in_norm * _factorial_product(pattern))
    return dist


def coincidence_probability(u, in_modes, out_modes, x: float = 1.0) -> float:
    """Two-photon coincidence probability with pairwise overlap x.

    x * |U_ik U_jl + U_il U_jk|^2 + (1 - x) * (|U_ik U_jl|^2 + |U_il U_jk|^2)
    for distinct input modes (k, l) and distinct output modes (i, j).
    Bunched outputs are handled by ``evolve``, not here.
    """
    a = _check_unitary(u)
    k, l = (int(m) for m in in_modes)
    i, j = (int(m) for m in out_modes)
    if k == l or i == j:
        raise ValueError("input and output mode pairs must each be distinct")
    x = _check_overlap(x)
    direct = a[i, k] * a[j, l]
    exchanged = a[i, l] * a[j, k]
    quantum = abs(direct + exchanged) ** 2
    classical = abs(direct) ** 2 + abs(exchanged) ** 2
    return float(x * quantum + (1.0 - x) * classical)


def conditional_coincidences(u, in_modes, x: float = 1.0) -> dict[int, dict[int, float]]:
    """Pr(j | i): probability of a partner detection at j given one at i.

    Conditions on coincidence events at distinct detectors; each inner map
    sums to one.  A detector that never participates in a coincidence has an
    undefined conditional and raises ValueError.
    """
    a = _check_unitary(u)
    n = a.shape[0]
    pair_probs = {
        (i, j): coincidence_probability(a, in_modes, (i, j), x)
        for i, j in combinations(range(n), 2)
    }

    def prob(i: int, j: int) -> float:
        return pair_probs[(min(i, j), max(i, j))]

    out: dict[int, dict[int, float]] = {}
    for i in range(n):
        total = sum(prob(i, j) for j in range(n) if j != i)
        if total <= 1e-15:
            raise ValueError(f"no coincidences involve detector {i}; conditional undefined")
        out[i] = {j: prob(i, j) / total for j in range(n) if j != i}
    return out


def singles_distribution(u, input_mode: int) -> np.ndarray:
    """One-photon detection probabilities |U[j, input]|^2."""
    a = _check_unitary(u)
    if not 0 <= input_mode < a.shape[0]:
        raise ValueError(f"input mode {input_mode} out of range")
    return np.abs(a[:, input_mode]) ** 2


def hom_visibility(u, in_modes, out_modes, x: float = 1.0) -> float:
    """Two-photon interference visibility against the classical baseline.

    (P(x=0) - P(x)) / P(x=0); +1 is full suppression, negative values mark
    constructive enhancement.  Undefined when the classical baseline
    vanishes.
    """
    baseline = coincidence_probability(u, in_modes, out_modes, 0.0)
    if baseline <= 1e-15:
        raise ValueError("classical coincidence baseline is zero; visibility undefined")
    return float((baseline - coincidence_probability(u, in_modes, out_modes, x)) / baseline)
