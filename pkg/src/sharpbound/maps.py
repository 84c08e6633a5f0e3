"""A closed family of unital positive linear maps on n x n matrices.

The five variants are identity, compression ``V* A V``, pinching onto
diagonal blocks, mixtures of unitary congruences ``sum t_i U_i* A U_i``,
and the normalized trace (a 1 x 1 output).
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidMapSpec, ParseError
from .linalg import HermitianMatrix, matrix_from_json, matrix_to_json

KINDS = ("identity", "compression", "pinching", "unitary_mixture", "normalized_trace")
ISOMETRY_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12
UNITAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PositiveMapSpec:
    kind: str
    domain_dim: int
    V: Optional[np.ndarray] = None
    blocks: Optional[Tuple[Tuple[int, ...], ...]] = None
    weights: Optional[Tuple[float, ...]] = None
    unitaries: Optional[Tuple[np.ndarray, ...]] = None

    def __post_init__(self):
        n = self.domain_dim
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise InvalidMapSpec(f"domain dimension must be a positive integer, got {n!r}")
        if self.kind not in KINDS:
            raise InvalidMapSpec(f"unknown map kind {self.kind!r}")
        if self.kind == "compression":
            V = np.array(self.V, dtype=complex)
            if V.ndim != 2 or V.shape[0] != n or not 1 <= V.shape[1] <= n:
                raise InvalidMapSpec(f"compression V must be {n} x k with 1 <= k <= {n}, got {V.shape}")
            err = np.linalg.norm(V.conj().T @ V - np.eye(V.shape[1]))
            if err > ISOMETRY_TOL:
                raise InvalidMapSpec(f"compression V*V deviates from I by {err:.3e}")
            V.setflags(write=False)
            object.__setattr__(self, "V", V)
        elif self.kind == "pinching":
            blocks = tuple(tuple(int(i) for i in b) for b in self.blocks or ())
            flat = sorted(i for b in blocks for i in b)
            if any(len(b) == 0 for b in blocks) or flat != list(range(n)):
                raise InvalidMapSpec(f"pinching blocks {blocks} do not partition 0..{n - 1}")
            object.__setattr__(self, "blocks", blocks)
        elif self.kind == "unitary_mixture":
            weights = tuple(float(w) for w in self.weights or ())
            if not weights or len(weights) != len(self.unitaries or ()):
                raise InvalidMapSpec("mixture needs one positive weight per unitary")
            if any(not w > 0 for w in weights):
                raise InvalidMapSpec(f"mixture weights must be positive, got {weights}")
            if abs(sum(weights) - 1.0) > WEIGHT_SUM_TOL:
                raise InvalidMapSpec(f"mixture weights sum to {sum(weights)!r}, expected 1")
            us = []
            for k, U in enumerate(self.unitaries):
                U = np.array(U, dtype=complex)
                if U.shape != (n, n):
                    raise InvalidMapSpec(f"unitary {k} has shape {U.shape}, expected {(n, n)}")
                err = np.linalg.norm(U.conj().T @ U - np.eye(n))
                if err > ISOMETRY_TOL:
                    raise InvalidMapSpec(f"unitary {k} deviates from unitarity by {err:.3e}")
                U.setflags(write=False)
                us.append(U)
            object.__setattr__(self, "weights", weights)
            object.__setattr__(self, "unitaries", tuple(us))

    @classmethod
    def identity(cls, n):
        return cls("identity", n)

    @classmethod
    def compression(cls, V):
        V = np.asarray(V, dtype=complex)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        return cls("compression", V.shape[0], V=V)

    @classmethod
    def pinching(cls, blocks, n=None):
        if n is None:
            n = sum(len(b) for b in blocks)
        return cls("pinching", n, blocks=blocks)

    @classmethod
    def unitary_mixture(cls, weights, unitaries):
        n = np.asarray(unitaries[0]).shape[0]
        return cls("unitary_mixture", n, weights=tuple(weights), unitaries=tuple(unitaries))

    @classmethod
    def normalized_trace(cls, n):
        return cls("normalized_trace", n)

    @property
    def codomain_dim(self):
        if self.kind == "compression":
            return self.V.shape[1]
        if self.kind == "normalized_trace":
            return 1
        return self.domain_dim

    def __call__(self, A):
        return apply_map(self, A)

    def to_json(self):
        if self.kind == "identity":
            return {"kind": "identity"}
        if self.kind == "normalized_trace":
            return {"kind": "trace"}
        if self.kind == "compression":
            return {"kind": "compression", "V": matrix_to_json(self.V)}
        if self.kind == "pinching":
            return {"kind": "pinching", "blocks": [list(b) for b in self.blocks]}
        return {
            "kind": "mixture",
            "weights": list(self.weights),
            "unitaries": [matrix_to_json(U) for U in self.unitaries],
        }

    @classmethod
    def from_json(cls, obj, n, where="map"):
        """Parse the serialized form; ``n`` is the domain dimension."""
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ParseError("expected an object with key 'kind'", where)
        kind = obj["kind"]
        try:
            if kind == "identity":
                return cls.identity(n)
            if kind == "trace":
                return cls.normalized_trace(n)
            if kind == "compression":
                V = matrix_from_json(obj.get("V"), f"{where}.V")
                if V.shape[0] != n:
                    raise ParseError(f"V has {V.shape[0]} rows, expected {n}", f"{where}.V")
                return cls.compression(V)
            if kind == "pinching":
                blocks = obj.get("blocks")
                if not isinstance(blocks, list) or not all(
                    isinstance(b, list) and all(isinstance(i, int) and not isinstance(i, bool) for i in b)
                    for b in blocks
                ):
                    raise ParseError("expected a list of integer lists", f"{where}.blocks")
                return cls.pinching(blocks, n)
            if kind == "mixture":
                weights = obj.get("weights")
                us = obj.get("unitaries")
                if not isinstance(weights, list) or not isinstance(us, list) or not us:
                    raise ParseError("expected 'weights' and non-empty 'unitaries' lists", where)
                mats = [matrix_from_json(u, f"{where}.unitaries[{k}]") for k, u in enumerate(us)]
                if mats[0].shape[0] != n:
                    raise ParseError(f"unitaries are {mats[0].shape[0]} x {mats[0].shape[0]}, expected {n}", where)
                return cls.unitary_mixture(weights, mats)
        except InvalidMapSpec as exc:
            raise ParseError(str(exc), where) from exc
        raise ParseError(f"unknown map kind {kind!r}", f"{where}.kind")


def apply_map(spec, A):
    """Return ``Phi(A)`` as a :class:`HermitianMatrix` of size ``codomain_dim``."""
    if A.dim != spec.domain_dim:
        raise DimensionMismatch(f"map acts on dimension {spec.domain_dim}, got {A.dim}")
    a = A.array
    if spec.kind == "identity":
        return A
    if spec.kind == "normalized_trace":
        return HermitianMatrix._trusted(np.array([[np.trace(a).real / spec.domain_dim]], dtype=complex))
    if spec.kind == "compression":
        V = spec.V
        return HermitianMatrix._trusted(V.conj().T @ a @ V)
    if spec.kind == "pinching":
        out = np.zeros_like(a)
        for b in spec.blocks:
            idx = np.ix_(b, b)
            out[idx] = a[idx]
        return HermitianMatrix._trusted(out)
    out = np.zeros_like(a)
    for w, U in zip(spec.weights, spec.unitaries):
        out += w * (U.conj().T @ a @ U)
    return HermitianMatrix._trusted(out)


@dataclass(frozen=True)
class UnitalCheck:
    passes: bool
    residual: float


def check_unital(spec):
    """``||Phi(I) - I||_F``; passes when at most ``1e-10 * codomain_dim``."""
    out = apply_map(spec, HermitianMatrix.identity(spec.domain_dim)).array
    k = spec.codomain_dim
    residual = float(np.linalg.norm(out - np.eye(k)))
    return UnitalCheck(residual <= UNITAL_TOL * k, residual)


def haar_unitary(n, rng):
    """Haar-random unitary: QR of a complex Ginibre matrix, phases fixed."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_partition(n, rng):
    perm = rng.permutation(n)
    cuts = np.flatnonzero(rng.random(n - 1) < 0.5) + 1
    return tuple(tuple(sorted(int(i) for i in part)) for part in np.split(perm, cuts))


def random_map(n, rng, kind_weights=None):
    """Draw a random unital positive map on n x n matrices.

    ``kind_weights`` maps variant names to relative probabilities (default
    uniform).  At ``n = 1`` only identity and normalized trace are drawn.
    """
    weights = dict.fromkeys(KINDS, 1.0) if kind_weights is None else dict(kind_weights)
    unknown = set(weights) - set(KINDS)
    if unknown:
        raise InvalidMapSpec(f"unknown map kinds {sorted(unknown)}")
    allowed = KINDS if n > 1 else ("identity", "normalized_trace")
    kinds = [k for k in allowed if weights.get(k, 0.0) > 0]
    if not kinds:
        kinds = ["identity"]
    p = np.array([weights.get(k, 1.0) for k in kinds], dtype=float)
    kind = kinds[rng.choice(len(kinds), p=p / p.sum())]

    if kind == "identity":
        return PositiveMapSpec.identity(n)
    if kind == "normalized_trace":
        return PositiveMapSpec.normalized_trace(n)
    if kind == "compression":
        k = int(rng.integers(1, n + 1))
        return PositiveMapSpec.compression(haar_unitary(n, rng)[:, :k])
    if kind == "pinching":
        return PositiveMapSpec.pinching(random_partition(n, rng), n)
    r = int(rng.integers(1, 4))
    t = rng.dirichlet(np.ones(r))
    t = t / t.sum()
    return PositiveMapSpec.unitary_mixture(tuple(t), [haar_unitary(n, rng) for _ in range(r)])
