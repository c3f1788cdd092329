"""Quantum network strategies: pure bipartite sources in Schmidt form plus local POVMs.

Source ``i`` prepares ``sum_l lam_l |l>|l>``; each party holds one half of
every incident source, ordered by source index, and measures a POVM on the
tensor product of those halves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .distributions import JointDistribution
from .network import Network

NORM_TOL = 1e-12
POVM_TOL = 1e-10
DENSE_DIM_CAP = 2 ** 12


class QuantumError(ValueError):
    pass


@dataclass(frozen=True)
class QuantumSource:
    schmidt: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.schmidt, dtype=float).ravel()
        if lam.size == 0 or np.any(lam < 0):
            raise QuantumError("Schmidt coefficients must be non-negative")
        if abs(float(lam @ lam) - 1) > NORM_TOL:
            raise QuantumError(f"squared Schmidt coefficients sum to {lam @ lam!r}, not 1")
        lam.flags.writeable = False
        object.__setattr__(self, "schmidt", lam)

    @property
    def d(self) -> int:
        return self.schmidt.size

    @classmethod
    def maximally_entangled(cls, d: int = 2) -> "QuantumSource":
        return cls(np.full(d, 1 / math.sqrt(d)))

    @classmethod
    def product(cls, d: int = 1) -> "QuantumSource":
        lam = np.zeros(d)
        lam[0] = 1.0
        return cls(lam)


@dataclass(frozen=True)
class PartyMeasurement:
    operators: np.ndarray  # (outcomes, D, D)

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2] or ops.shape[0] < 1:
            raise QuantumError("measurement operators must be a stack of square matrices")
        for a, m in enumerate(ops):
            if not np.allclose(m, m.conj().T, atol=POVM_TOL, rtol=0):
                raise QuantumError(f"operator {a} is not Hermitian")
            if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -POVM_TOL:
                raise QuantumError(f"operator {a} is not positive semidefinite")
        if not np.allclose(ops.sum(axis=0), np.eye(ops.shape[1]), atol=POVM_TOL, rtol=0):
            raise QuantumError("operators do not sum to the identity")
        ops.flags.writeable = False
        object.__setattr__(self, "operators", ops)

    @property
    def n_outcomes(self) -> int:
        return self.operators.shape[0]

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    @classmethod
    def projective(cls, basis: np.ndarray, labels: Sequence[int], n_outcomes: int) -> "PartyMeasurement":
        """Project onto columns of ``basis``, grouping column ``m`` into outcome ``labels[m]``."""
        basis = np.asarray(basis, dtype=complex)
        ops = np.zeros((n_outcomes, basis.shape[0], basis.shape[0]), dtype=complex)
        for m, a in enumerate(labels):
            v = basis[:, m]
            ops[a] += np.outer(v, v.conj())
        return cls(ops)


@dataclass(frozen=True)
class QuantumStrategy:
    net: Network
    sources: tuple[QuantumSource, ...]
    measurements: tuple[PartyMeasurement, ...]

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "measurements", tuple(self.measurements))
        if not self.net.bipartite_only:
            raise QuantumError("quantum strategies need bipartite sources")
        if len(self.sources) != len(self.net.sources) or len(self.measurements) != self.net.n:
            raise QuantumError("need one state per source and one measurement per party")
        for j, m in enumerate(self.measurements):
            want = self.local_dim(j)
            if m.dim != want:
                raise QuantumError(f"party {j} operators act on dimension {m.dim}, expected {want}")

    def local_dims(self, j: int) -> list[int]:
        return [self.sources[i].d for i in self.net.incident(j)]

    def local_dim(self, j: int) -> int:
        return math.prod(self.local_dims(j))

    @property
    def alphabets(self) -> tuple[int, ...]:
        return tuple(m.n_outcomes for m in self.measurements)

    def to_dict(self) -> dict:
        def cplx(arr):
            return [[[float(v.real), float(v.imag)] for v in row] for row in arr]
        return {
            "network": self.net.to_dict(),
            "schmidt": [s.schmidt.tolist() for s in self.sources],
            "measurements": [[cplx(m) for m in pm.operators] for pm in self.measurements],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuantumStrategy":
        try:
            net = Network.from_dict(d["network"])
            sources = tuple(QuantumSource(np.array(s, dtype=float)) for s in d["schmidt"])
            meas = []
            for pm in d["measurements"]:
                arr = np.array(pm, dtype=float)
                meas.append(PartyMeasurement(arr[..., 0] + 1j * arr[..., 1]))
            return cls(net, sources, tuple(meas))
        except (KeyError, TypeError, IndexError) as exc:
            raise QuantumError(f"malformed quantum strategy: {exc}") from exc

    @classmethod
    def load(cls, path) -> "QuantumStrategy":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _contract(qs: QuantumStrategy, party_tensors: Sequence[np.ndarray], out_axes: bool) -> np.ndarray:
    """Contract the network with ``party_tensors[j]`` of shape ``(k_j, D_j, D_j)``."""
    net = qs.net
    m = len(net.sources)
    ket = list(range(m))
    bra = list(range(m, 2 * m))
    operands = []
    for i, src in enumerate(qs.sources):
        operands += [np.outer(src.schmidt, src.schmidt), [ket[i], bra[i]]]
    outs = []
    for j, t in enumerate(party_tensors):
        inc = net.incident(j)
        dims = qs.local_dims(j)
        a = 2 * m + j
        outs.append(a)
        operands += [t.reshape(t.shape[0], *dims, *dims), [a, *(bra[i] for i in inc), *(ket[i] for i in inc)]]
    return np.einsum(*operands, outs if out_axes else [], optimize=True)


def evaluate_quantum(qs: QuantumStrategy) -> JointDistribution:
    """Output distribution by contracting per-source Schmidt correlations with the POVM elements."""
    table = _contract(qs, [m.operators for m in qs.measurements], True)
    probs = np.clip(table.real, 0.0, None)
    if abs(probs.sum() - 1) > POVM_TOL:
        raise QuantumError(f"evaluated probabilities sum to {probs.sum()!r}")
    return JointDistribution(probs / probs.sum(), "float", check=False)


def evaluate_dense(qs: QuantumStrategy) -> JointDistribution:
    """Reference evaluation on the full state vector (small networks only)."""
    net = qs.net
    axes = {}  # (source, party) -> axis of the state tensor
    dims = []
    for i, s in enumerate(net.sources):
        for j in s:
            axes[(i, j)] = len(dims)
            dims.append(qs.sources[i].d)
    if math.prod(dims) > DENSE_DIM_CAP:
        raise QuantumError("network too large for dense evaluation")
    psi = np.ones(())
    for src in qs.sources:
        psi = np.multiply.outer(psi, np.diag(src.schmidt))
    psi = psi.astype(complex)
    table = np.zeros(qs.alphabets)
    for outcome in np.ndindex(*qs.alphabets):
        phi = psi
        for j, a in enumerate(outcome):
            inc = net.incident(j)
            if not inc:
                phi = phi * qs.measurements[j].operators[a][0, 0]
                continue
            ax = [axes[(i, j)] for i in inc]
            op = qs.measurements[j].operators[a].reshape(*qs.local_dims(j), *qs.local_dims(j))
            phi = np.tensordot(op, phi, axes=(list(range(len(ax), 2 * len(ax))), ax))
            phi = np.moveaxis(phi, list(range(len(ax))), ax)
        table[outcome] = np.vdot(psi, phi).real
    return JointDistribution(table, "float", check=False)


def observable_expectation(qs: QuantumStrategy, functions: Sequence[Sequence[float]]) -> float:
    """``<prod_j f_j(a_j)>`` computed as the expectation of ``prod_j X_j`` with ``X_j = sum_a f_j(a) M_a``."""
    if len(functions) != qs.net.n:
        raise QuantumError("need one function per party")
    xs = []
    for f, m in zip(functions, qs.measurements):
        f = np.asarray(f, dtype=float)
        if f.shape != (m.n_outcomes,):
            raise QuantumError("function length must match the number of outcomes")
        xs.append(np.tensordot(f, m.operators, axes=1)[None])
    return float(_contract(qs, xs, False).real)


def reduced_state(qs: QuantumStrategy, j: int) -> np.ndarray:
    """Party ``j``'s reduced density matrix: tensor product of ``diag(lam^2)`` over incident sources."""
    rho = np.ones((1, 1))
    for i in qs.net.incident(j):
        rho = np.kron(rho, np.diag(qs.sources[i].schmidt ** 2))
    return rho


def second_moment(qs: QuantumStrategy, j: int, f: Sequence[float]) -> float:
    """``Tr[sigma_j X_j^2]`` from the Schmidt data."""
    X = np.tensordot(np.asarray(f, dtype=float), qs.measurements[j].operators, axes=1)
    return float(np.trace(reduced_state(qs, j) @ X @ X).real)


def _haar_schmidt(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    s = np.linalg.svd(g, compute_uv=False)
    return s / np.linalg.norm(s)


def random_strategy(net: Network, d: int, seed: int, n_outputs: int = 2) -> QuantumStrategy:
    """Random pure sources and random projective measurements, reproducible from ``seed``.

    Each measurement is a random unitary applied to the computational basis,
    with basis vector ``m`` assigned to outcome ``m mod n_outputs``.
    """
    if d < 1:
        raise QuantumError("local dimension must be at least 1")
    rng = np.random.default_rng(seed)
    sources = tuple(QuantumSource(_haar_schmidt(rng, d)) for _ in net.sources)
    meas = []
    for j in range(net.n):
        D = d ** len(net.incident(j))
        U = unitary_group.rvs(D, random_state=rng) if D > 1 else np.ones((1, 1), dtype=complex)
        meas.append(PartyMeasurement.projective(U, [m % n_outputs for m in range(D)], n_outputs))
    return QuantumStrategy(net, sources, tuple(meas))


def entanglement_swapping() -> QuantumStrategy:
    """Bilocality network: two maximally entangled qubit pairs, Bell measurement in the middle."""
    s = 1 / math.sqrt(2)
    bell = np.array([[s, 0, 0, s], [s, 0, 0, -s], [0, s, s, 0], [0, s, -s, 0]], dtype=complex).T
    comp = PartyMeasurement.projective(np.eye(2), [0, 1], 2)
    return QuantumStrategy(
        Network.bilocality(),
        (QuantumSource.maximally_entangled(2),) * 2,
        (comp, PartyMeasurement.projective(bell, [0, 1, 2, 3], 4), comp),
    )


def triangle_parity() -> QuantumStrategy:
    """Triangle with maximally entangled qubits; each party outputs the parity of its two bits."""
    parity = PartyMeasurement.projective(np.eye(4), [0, 1, 1, 0], 2)
    return QuantumStrategy(Network.triangle(), (QuantumSource.maximally_entangled(2),) * 3, (parity,) * 3)
