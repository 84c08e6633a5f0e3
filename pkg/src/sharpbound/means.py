"""Kubo-Ando operator means of strictly positive matrices.

All means are evaluated spectrally as ``A^1/2 f(A^-1/2 B A^-1/2) A^1/2``
for the representing function ``f`` of the mean.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainViolation,
    InvalidMeanSpec,
    ParseError,
    RepresentingFunctionDomain,
    WeightOutOfRange,
)
from .linalg import HermitianMatrix, require_strictly_positive

NORMALIZATION_TOL = 1e-12
MONOTONE_SAMPLES = 64


class _Power:
    """``t -> t**mu``; picklable and compared by exponent."""

    __slots__ = ("mu",)

    def __init__(self, mu):
        self.mu = mu

    def __call__(self, t):
        return np.power(np.asarray(t, dtype=float), self.mu)

    def __eq__(self, other):
        return isinstance(other, _Power) and other.mu == self.mu

    def __hash__(self):
        return hash(("power", self.mu))

    def __reduce__(self):
        return (_Power, (self.mu,))


def _power(mu):
    if mu == 0.5:
        return np.sqrt
    return _Power(mu)


def _arithmetic(t):
    return 0.5 * (1.0 + np.asarray(t, dtype=float))


def _harmonic(t):
    t = np.asarray(t, dtype=float)
    return 2.0 * t / (1.0 + t)


@dataclass(frozen=True)
class MeanSpec:
    """An operator mean: geometric, weighted geometric, or generic.

    Use the constructors :meth:`geometric`, :meth:`weighted` and
    :meth:`generic` rather than building instances directly.
    """

    kind: str
    mu: Optional[float] = None
    func: Optional[Callable] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind == "geometric":
            return
        if self.kind == "weighted_geometric":
            if self.mu is None or not 0.0 <= self.mu <= 1.0:
                raise WeightOutOfRange(f"weight must lie in [0, 1], got {self.mu}")
            return
        if self.kind != "generic":
            raise InvalidMeanSpec(f"unknown mean kind {self.kind!r}")
        if self.func is None:
            raise InvalidMeanSpec("generic mean needs a representing function")
        _validate_representing(self.func, self.name or "f")

    @classmethod
    def geometric(cls):
        return cls("geometric")

    @classmethod
    def weighted(cls, mu):
        return cls("weighted_geometric", mu=float(mu))

    @classmethod
    def generic(cls, f, name):
        return cls("generic", func=f, name=name)

    @classmethod
    def named(cls, name, mu=None):
        """Registry lookup: ``arithmetic``, ``harmonic`` or ``power`` (needs mu)."""
        if name == "arithmetic":
            return cls.generic(_arithmetic, "arithmetic")
        if name == "harmonic":
            return cls.generic(_harmonic, "harmonic")
        if name == "power":
            if mu is None:
                raise InvalidMeanSpec("named mean 'power' needs a weight 'mu'")
            if not 0.0 <= mu <= 1.0:
                raise WeightOutOfRange(f"weight must lie in [0, 1], got {mu}")
            return cls.generic(_power(float(mu)), f"power({float(mu)!r})")
        raise InvalidMeanSpec(f"unknown named mean {name!r}")

    @property
    def representing_function(self):
        if self.kind == "geometric":
            return np.sqrt
        if self.kind == "weighted_geometric":
            return _power(self.mu)
        return self.func

    @property
    def label(self):
        if self.kind == "geometric":
            return "geometric"
        if self.kind == "weighted_geometric":
            return f"weighted({self.mu!r})"
        return self.name

    def to_json(self):
        if self.kind == "geometric":
            return {"kind": "geometric"}
        if self.kind == "weighted_geometric":
            return {"kind": "weighted", "mu": self.mu}
        if self.name in ("arithmetic", "harmonic"):
            return {"kind": "named", "name": self.name}
        if self.name and self.name.startswith("power("):
            return {"kind": "named", "name": "power", "mu": float(self.name[6:-1])}
        raise InvalidMeanSpec(f"mean {self.name!r} has no serialized form")

    @classmethod
    def from_json(cls, obj, where="mean"):
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ParseError("expected an object with key 'kind'", where)
        kind = obj["kind"]
        try:
            if kind == "geometric":
                return cls.geometric()
            if kind == "weighted":
                return cls.weighted(_number(obj, "mu", where))
            if kind == "named":
                name = obj.get("name")
                mu = _number(obj, "mu", where) if "mu" in obj else None
                return cls.named(name, mu)
        except (InvalidMeanSpec, WeightOutOfRange) as exc:
            raise ParseError(str(exc), where) from exc
        raise ParseError(f"unknown mean kind {kind!r}", f"{where}.kind")


def _number(obj, key, where):
    x = obj.get(key)
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"expected a number, got {x!r}", f"{where}.{key}")
    return float(x)


def _validate_representing(f, name):
    try:
        one = float(np.asarray(f(np.array([1.0])), dtype=float).reshape(-1)[0])
    except Exception as exc:
        raise InvalidMeanSpec(f"{name}(1) could not be evaluated: {exc}") from exc
    if abs(one - 1.0) > NORMALIZATION_TOL:
        raise InvalidMeanSpec(f"{name}(1) = {one!r}, expected 1")
    grid = np.geomspace(1e-3, 1e3, MONOTONE_SAMPLES)
    vals = _evaluate(f, grid, name)
    if np.any(np.diff(vals) < -NORMALIZATION_TOL * np.maximum(1.0, np.abs(vals[1:]))):
        raise InvalidMeanSpec(f"{name} is not nondecreasing on the sample grid")


def _evaluate(f, t, name="f"):
    t = np.asarray(t, dtype=float)
    try:
        out = np.asarray(f(t), dtype=float)
        if out.shape != t.shape:
            raise ValueError
    except (TypeError, ValueError):
        try:
            out = np.array([float(f(float(x))) for x in t.reshape(-1)]).reshape(t.shape)
        except Exception as exc:
            raise RepresentingFunctionDomain(f"{name} failed to evaluate: {exc}") from exc
    if not np.all(np.isfinite(out)):
        bad = t[~np.isfinite(out)]
        raise RepresentingFunctionDomain(f"{name} is undefined at t = {bad.reshape(-1)[0]!r}")
    return out


def _check_pair(A, B):
    if A.dim != B.dim:
        raise DimensionMismatch(f"dimensions {A.dim} and {B.dim} differ")
    require_strictly_positive(A, "A")
    require_strictly_positive(B, "B")


def _mean(A, B, f, name):
    _check_pair(A, B)
    es = A.eig()
    q, w = es.eigenvectors, es.eigenvalues
    root = np.sqrt(w)
    half = (q * root) @ q.conj().T
    inv_half = (q * (1.0 / root)) @ q.conj().T
    inner = HermitianMatrix._trusted(inv_half @ B.array @ inv_half)
    ies = inner.eig()
    if ies.eigenvalues[0] < 0.0:
        # Roundoff only: inner is congruent to B > 0.
        raise DomainViolation(f"A^-1/2 B A^-1/2 has eigenvalue {ies.eigenvalues[0]:.3g}")
    fw = _evaluate(f, ies.eigenvalues, name)
    qi = ies.eigenvectors
    mid = (qi * fw) @ qi.conj().T
    return HermitianMatrix._trusted(half @ mid @ half)


def geometric_mean(A, B):
    """``A # B = A^1/2 (A^-1/2 B A^-1/2)^1/2 A^1/2``."""
    return _mean(A, B, np.sqrt, "sqrt")


def weighted_geometric_mean(A, B, mu):
    if not 0.0 <= mu <= 1.0:
        raise WeightOutOfRange(f"weight must lie in [0, 1], got {mu}")
    return _mean(A, B, _power(mu), f"t^{mu}")


def kubo_ando_mean(A, B, spec):
    if spec.kind == "geometric":
        return geometric_mean(A, B)
    return _mean(A, B, spec.representing_function, spec.label)
