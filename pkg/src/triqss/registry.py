"""Photon bookkeeping for one protocol round.

A round's quantum state is a product of independent pure-state factors (the
signal pair, a substituted fake pair, collapsed leftovers).  The registry
tracks those factors by qubit label, merges them only through joint
measurements, and never materializes more than three qubits in one factor:
a joint measurement whose targets live in two different factors is contracted
directly, which is exactly the Born rule on the (implicit) product state.

Lost photons are erased by secretly measuring them in Z and discarding the
outcome.  For every statistic visible to the remaining parties this is
equivalent to tracing the photon out, and it keeps all factors pure.
"""

from __future__ import annotations

import numpy as np

from .qcore import (
    Basis,
    Measurement,
    PairMeasurement,
    PauliCorrection,
    StateVector,
    ZERO_PROB,
    _checked_pair_basis,
    apply_correction,
    measure_qubit,
    measure_two_qubit_basis,
)


class PhotonRegistry:
    """Mutable set of disjoint pure-state factors keyed by qubit label."""

    __slots__ = ("_factors",)

    def __init__(self) -> None:
        self._factors: list[StateVector] = []

    def add(self, state: StateVector) -> None:
        existing = self.labels()
        clash = existing & set(state.labels)
        if clash:
            raise ValueError(f"labels already registered: {sorted(clash)!r}")
        self._factors.append(state)

    def labels(self) -> set[str]:
        out: set[str] = set()
        for f in self._factors:
            out.update(f.labels)
        return out

    def has(self, label: str) -> bool:
        return any(label in f.labels for f in self._factors)

    def factor_of(self, label: str) -> StateVector:
        for f in self._factors:
            if label in f.labels:
                return f
        raise KeyError(f"no photon labeled {label!r}")

    def joint_state(self, labels: tuple[str, ...]) -> StateVector | None:
        """The factor covering exactly ``labels``, axis-aligned, else None.

        Returns None when the labels are spread over several factors or the
        factor holding them also entangles other photons.
        """
        want = set(labels)
        for f in self._factors:
            if want == set(f.labels):
                return f.reordered(tuple(labels))
            if want & set(f.labels):
                return None
        return None

    def apply(self, label: str, correction: PauliCorrection) -> None:
        idx = self._index_of(label)
        self._factors[idx] = apply_correction(self._factors[idx], label, correction)

    def measure(self, label: str, basis: Basis, rng: np.random.Generator) -> Measurement:
        """Measure one photon; it is removed from the registry."""
        idx = self._index_of(label)
        result = measure_qubit(self._factors[idx], label, basis, rng)
        if result.post_state is None:
            del self._factors[idx]
        else:
            self._factors[idx] = result.post_state
        return result

    def measure_pair(
        self,
        pair: tuple[str, str],
        basis_vectors: np.ndarray,
        rng: np.random.Generator,
    ) -> PairMeasurement:
        """Joint two-photon measurement; both photons are removed.

        The photons may live in one factor or in two distinct factors; in the
        latter case the factors are contracted against each candidate vector
        without building their tensor product.
        """
        i1 = self._index_of(pair[0])
        i2 = self._index_of(pair[1])
        if i1 == i2:
            result = measure_two_qubit_basis(self._factors[i1], pair, basis_vectors, rng)
            if result.post_state is None:
                del self._factors[i1]
            else:
                self._factors[i1] = result.post_state
            return result
        result, post = self._measure_pair_across(i1, i2, pair, basis_vectors, rng)
        for idx in sorted((i1, i2), reverse=True):
            del self._factors[idx]
        if post is not None:
            self._factors.append(post)
        return result

    def discard(self, label: str, rng: np.random.Generator) -> None:
        """Erase a lost photon (hidden Z measurement, outcome dropped)."""
        self.measure(label, Basis.Z, rng)

    def _index_of(self, label: str) -> int:
        for i, f in enumerate(self._factors):
            if label in f.labels:
                return i
        raise KeyError(f"no photon labeled {label!r}")

    def _measure_pair_across(
        self,
        i1: int,
        i2: int,
        pair: tuple[str, str],
        basis_vectors: np.ndarray,
        rng: np.random.Generator,
    ) -> tuple[PairMeasurement, StateVector | None]:
        vecs = _checked_pair_basis(basis_vectors)
        f1 = self._factors[i1]
        f2 = self._factors[i2]
        # Slicing the moved axis picks the pair[0] (resp. pair[1]) bit; the
        # remaining axes of factor 1 precede those of factor 2.
        t1 = np.moveaxis(f1.tensor_view(), f1.axis(pair[0]), 0)
        t2 = np.moveaxis(f2.tensor_view(), f2.axis(pair[1]), 0)
        rest = tuple(l for l in f1.labels if l != pair[0]) + tuple(
            l for l in f2.labels if l != pair[1]
        )
        u = rng.random()
        acc = 0.0
        for k in range(4):
            v = vecs[k].conj()
            residual = np.multiply.outer(t1[0], v[0] * t2[0] + v[1] * t2[1])
            residual += np.multiply.outer(t1[1], v[2] * t2[0] + v[3] * t2[1])
            prob = float(np.vdot(residual, residual).real)
            if prob < ZERO_PROB:
                prob = 0.0
            acc += prob
            if u < acc or k == 3:
                index = k
                break
        if u >= acc and not abs(acc - 1.0) <= 1e-6:
            raise AssertionError(f"probabilities sum to {acc}")
        if not rest or prob == 0.0:
            return PairMeasurement(index, prob, None), None
        amps = (residual / np.sqrt(prob)).reshape(-1)
        post = StateVector._trusted(rest, amps)
        return PairMeasurement(index, prob, post), post
