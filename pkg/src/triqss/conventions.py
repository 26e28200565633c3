"""Bit-extraction conventions for the two entangled-pair schemes.

For each signal class and each correlated basis pairing, the two agents'
outcomes are perfectly (anti)correlated and the convention table maps each
party's outcome to a key bit so that ``k_bob XOR k_charlie`` equals the
dealer's bit.  The table is generated once by brute-force projector
arithmetic over the signal state definitions and shipped as a JSON artifact;
a test regenerates it and asserts equality, so the checked-in file can never
drift from the algebra.

Scheme tags: ``"kki"`` is the four-state entangled-pair scheme whose agents
measure in Z/X; ``"hbb"`` is the GHZ scheme whose agents measure in X/Y and
whose dealer measures her own photon instead of choosing a state.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import numpy as np

from .qcore import (
    Basis,
    SignalTag,
    StateVector,
    ghz_state,
    project_qubit,
    signal_state,
)

SCHEME_KKI = "kki"
SCHEME_HBB = "hbb"

ALLOWED_BASES: dict[str, tuple[Basis, ...]] = {
    SCHEME_KKI: (Basis.Z, Basis.X),
    SCHEME_HBB: (Basis.X, Basis.Y),
}

# Dealer basis <-> announced class for the GHZ scheme.
HBB_CLASS_OF_BASIS = {Basis.X: 1, Basis.Y: 2}
HBB_BASIS_OF_CLASS = {1: Basis.X, 2: Basis.Y}

_DATA_FILE = "bit_conventions.json"
_PROB_ATOL = 1e-9


def hbb_reduced_state(alice_basis: Basis, outcome: int) -> StateVector:
    """Agents' pair state after the GHZ dealer projects her photon.

    Pure projector arithmetic (no sampling); ``outcome`` is +1 or -1 in
    ``alice_basis``, which must be X or Y.
    """
    if alice_basis not in (Basis.X, Basis.Y):
        raise ValueError(f"dealer measures X or Y, got {alice_basis}")
    if outcome not in (+1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")
    ket = alice_basis.eigenvectors[0 if outcome == +1 else 1]
    prob, post = project_qubit(ghz_state(("A", "B", "C")), "A", ket)
    if post is None or prob <= 0.0:
        raise AssertionError("GHZ reduction produced an empty branch")
    return post


def _class_states(scheme: str) -> dict[int, dict[int, StateVector]]:
    """Map basis class -> dealer bit -> two-qubit state over (B, C)."""
    if scheme == SCHEME_KKI:
        return {
            1: {
                0: signal_state(SignalTag.PSI_PLUS),
                1: signal_state(SignalTag.PHI_MINUS),
            },
            2: {
                0: signal_state(SignalTag.PSI_PLUS_ROT),
                1: signal_state(SignalTag.PHI_MINUS_ROT),
            },
        }
    if scheme == SCHEME_HBB:
        # Dealer bit convention: outcome +1 encodes bit 0.
        return {
            1: {
                0: hbb_reduced_state(Basis.X, +1),
                1: hbb_reduced_state(Basis.X, -1),
            },
            2: {
                0: hbb_reduced_state(Basis.Y, +1),
                1: hbb_reduced_state(Basis.Y, -1),
            },
        }
    raise ValueError(f"unknown scheme: {scheme!r}")


def _pair_distribution(
    state: StateVector, bob_basis: Basis, charlie_basis: Basis
) -> dict[tuple[int, int], float]:
    """Joint outcome distribution when B and C are measured locally."""
    dist: dict[tuple[int, int], float] = {}
    for ob, ket_b in zip((+1, -1), bob_basis.eigenvectors):
        p_b, post = project_qubit(state, "B", ket_b)
        for oc, ket_c in zip((+1, -1), charlie_basis.eigenvectors):
            if post is None:
                dist[(ob, oc)] = 0.0
                continue
            p_c, _ = project_qubit(post, "C", ket_c)
            dist[(ob, oc)] = p_b * p_c
    return dist


def _support(dist: dict[tuple[int, int], float]) -> set[tuple[int, int]]:
    return {k for k, p in dist.items() if p > _PROB_ATOL}


def _sign_key(outcome: int) -> str:
    return "+" if outcome == +1 else "-"


def generate_convention_table() -> dict:
    """Brute-force the full convention table for both schemes.

    A basis pairing is *correlated* for a class when both class states are
    supported on exactly two outcome pairs of probability 1/2 each and the
    two supports are disjoint.  Bob's map is fixed (+1 -> 0); Charlie's map
    is read off the bit-0 state and verified against the bit-1 state.
    """
    table: dict = {"schema": 1, "schemes": {}}
    for scheme, bases in ALLOWED_BASES.items():
        classes: dict = {}
        for basis_class, by_bit in _class_states(scheme).items():
            pairs: dict = {}
            for bob_basis in bases:
                for charlie_basis in bases:
                    d0 = _pair_distribution(by_bit[0], bob_basis, charlie_basis)
                    d1 = _pair_distribution(by_bit[1], bob_basis, charlie_basis)
                    s0, s1 = _support(d0), _support(d1)
                    halves0 = all(abs(d0[k] - 0.5) < _PROB_ATOL for k in s0)
                    halves1 = all(abs(d1[k] - 0.5) < _PROB_ATOL for k in s1)
                    if not (
                        len(s0) == 2
                        and len(s1) == 2
                        and not (s0 & s1)
                        and halves0
                        and halves1
                    ):
                        continue  # uncorrelated pairing, announced rounds discarded
                    bob_map = {+1: 0, -1: 1}
                    charlie_map: dict[int, int] = {}
                    for ob, oc in s0:
                        charlie_map[oc] = bob_map[ob]  # XOR must give bit 0
                    if len(charlie_map) != 2:
                        raise AssertionError(
                            f"degenerate support for {scheme} class {basis_class}"
                        )
                    for ob, oc in s1:
                        if bob_map[ob] ^ charlie_map[oc] != 1:
                            raise AssertionError(
                                f"inconsistent convention for {scheme} class "
                                f"{basis_class} {bob_basis.value}|{charlie_basis.value}"
                            )
                    pairs[f"{bob_basis.value}|{charlie_basis.value}"] = {
                        "bob": {_sign_key(o): b for o, b in bob_map.items()},
                        "charlie": {_sign_key(o): b for o, b in charlie_map.items()},
                    }
            if len(pairs) != 2:
                raise AssertionError(
                    f"{scheme} class {basis_class}: expected 2 correlated "
                    f"pairings, found {sorted(pairs)}"
                )
            classes[str(basis_class)] = pairs
        table["schemes"][scheme] = {
            "allowed_bases": [b.value for b in bases],
            "classes": classes,
        }
    return table


def save_convention_table(path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(generate_convention_table(), fh, indent=2, sort_keys=True)
        fh.write("\n")


@lru_cache(maxsize=1)
def load_convention_table() -> dict:
    """The checked-in convention table artifact."""
    text = resources.files(__package__).joinpath("data", _DATA_FILE).read_text("utf-8")
    return json.loads(text)


def _validate_basis(scheme: str, basis: Basis, who: str) -> None:
    if scheme not in ALLOWED_BASES:
        raise ValueError(f"unknown scheme: {scheme!r}")
    if basis not in ALLOWED_BASES[scheme]:
        allowed = "/".join(b.value for b in ALLOWED_BASES[scheme])
        raise ValueError(
            f"{who} basis {basis.value} is not used by scheme {scheme!r} "
            f"(allowed: {allowed})"
        )


def correlated_bases(
    basis_class: int,
    bob_basis: Basis,
    charlie_basis: Basis,
    scheme: str = SCHEME_KKI,
) -> bool:
    """Whether this basis pairing yields correlated outcomes for the class.

    Raises ``ValueError`` for bases the scheme never uses (e.g. Y in the
    entangled-pair scheme) or an unknown class.
    """
    _validate_basis(scheme, bob_basis, "bob")
    _validate_basis(scheme, charlie_basis, "charlie")
    classes = load_convention_table()["schemes"][scheme]["classes"]
    key = str(basis_class)
    if key not in classes:
        raise ValueError(f"unknown basis class {basis_class} for scheme {scheme!r}")
    return f"{bob_basis.value}|{charlie_basis.value}" in classes[key]


def convention_bit(
    scheme: str,
    basis_class: int,
    bob_basis: Basis,
    charlie_basis: Basis,
    party: str,
    outcome: int,
) -> int:
    """Key bit a party extracts from an outcome under a correlated pairing."""
    if party not in ("bob", "charlie"):
        raise ValueError(f"party must be 'bob' or 'charlie', got {party!r}")
    if outcome not in (+1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")
    if not correlated_bases(basis_class, bob_basis, charlie_basis, scheme):
        raise ValueError(
            f"bases {bob_basis.value}|{charlie_basis.value} are not correlated "
            f"for class {basis_class} in scheme {scheme!r}"
        )
    classes = load_convention_table()["schemes"][scheme]["classes"]
    rule = classes[str(basis_class)][f"{bob_basis.value}|{charlie_basis.value}"]
    return int(rule[party][_sign_key(outcome)])


def hbb_dealer_bit(outcome: int) -> int:
    """GHZ dealer's key bit for her own measurement outcome (+1 -> 0)."""
    if outcome not in (+1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")
    return 0 if outcome == +1 else 1
