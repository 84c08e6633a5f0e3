"""Reproducible theorem instances and their JSON file format.

Random streams are keyed by ``(seed, *stream)`` through a counter-based
Philox generator, so instance ``i`` is the same no matter which worker
draws it or in which order.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .bounds import SpectralBounds
from .errors import InvalidBounds, InvariantViolation, NotHermitian, ParseError
from .linalg import HermitianMatrix
from .maps import PositiveMapSpec, check_unital, haar_unitary, random_map

ENCLOSURE_RTOL = 1e-10


def make_rng(seed, *stream):
    """Independent generator for ``(seed, stream...)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class Instance:
    A: HermitianMatrix
    B: HermitianMatrix
    bounds: SpectralBounds
    map: PositiveMapSpec
    seed_trace: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        validate_instance(self)

    @property
    def n(self):
        return self.A.dim


@dataclass(frozen=True, eq=False)
class OrderedPair:
    A: HermitianMatrix
    B: HermitianMatrix
    m: float
    M: float

    def __post_init__(self):
        tol = ENCLOSURE_RTOL * max(1.0, self.M)
        lo, hi = self.A.lambda_min(), self.A.lambda_max()
        if lo - self.m < -tol:
            raise InvariantViolation(f"m I <= A fails: margin {lo - self.m:.3e}", "m", lo - self.m)
        if self.M - hi < -tol:
            raise InvariantViolation(f"A <= M I fails: margin {self.M - hi:.3e}", "M", self.M - hi)
        gap = (self.B - self.A).lambda_min()
        if gap < -ENCLOSURE_RTOL * max(1.0, self.B.norm()):
            raise InvariantViolation(f"A <= B fails: margin {gap:.3e}", "A<=B", gap)


def _enclosure_margins(X, lo, hi):
    return X.lambda_min() - lo, hi - X.lambda_max()


def validate_instance(inst):
    b = inst.bounds
    if inst.A.dim != inst.B.dim or inst.map.domain_dim != inst.A.dim:
        raise InvariantViolation(
            f"dimension mismatch: A {inst.A.dim}, B {inst.B.dim}, map domain {inst.map.domain_dim}"
        )
    for label, X, lo, hi in (
        ("A", inst.A, b.m1**2, b.M1**2),
        ("B", inst.B, b.m2**2, b.M2**2),
    ):
        tol = ENCLOSURE_RTOL * hi
        below, above = _enclosure_margins(X, lo, hi)
        idx = "1" if label == "A" else "2"
        if below < -tol:
            raise InvariantViolation(
                f"m{idx}^2 I <= {label} fails: margin {below:.6g}", f"m{idx}^2", below
            )
        if above < -tol:
            raise InvariantViolation(
                f"{label} <= M{idx}^2 I fails: margin {above:.6g}", f"M{idx}^2", above
            )
    unital = check_unital(inst.map)
    if not unital.passes:
        raise InvariantViolation(f"map is not unital: residual {unital.residual:.3e}", "unital", -unital.residual)


def random_hermitian_with_spectrum(n, lo, hi, rng):
    """``U diag(lambda) U*`` with eigenvalues uniform in ``[lo, hi]``.

    One eigenvalue is pinned to ``lo`` with probability 1/2 and another to
    ``hi`` with probability 1/2, so boundary-tight spectra are common.
    """
    lam, U = random_spectral_factors(n, lo, hi, rng)
    if U is None:
        return HermitianMatrix.scalar(lo, n) if lo == hi else HermitianMatrix.diag(lam)
    return HermitianMatrix._trusted((U * lam) @ U.conj().T)


def random_spectral_factors(n, lo, hi, rng):
    """Eigenvalues and Haar eigenbasis behind :func:`random_hermitian_with_spectrum`.

    ``U`` is ``None`` when no rotation is drawn (``n == 1`` or ``lo == hi``).
    """
    if not 0 < lo <= hi:
        raise InvalidBounds(f"need 0 < lo <= hi, got lo={lo}, hi={hi}")
    if lo == hi:
        return np.full(n, float(lo)), None
    lam = rng.uniform(lo, hi, size=n)
    if rng.random() < 0.5:
        lam[0] = lo
    if rng.random() < 0.5:
        lam[-1] = hi
    if n == 1:
        return lam, None
    return lam, haar_unitary(n, rng)


def random_instance(n, b, rng, map_kind_weights=None, seed_trace=None):
    A = random_hermitian_with_spectrum(n, b.m1**2, b.M1**2, rng)
    B = random_hermitian_with_spectrum(n, b.m2**2, b.M2**2, rng)
    phi = random_map(n, rng, map_kind_weights)
    return Instance(A, B, b, phi, seed_trace)


def generate_instance(seed, n, index, b, map_kind_weights=None):
    """Instance number ``index`` of dimension ``n`` in the run keyed by ``seed``."""
    rng = make_rng(seed, n, index)
    return random_instance(n, b, rng, map_kind_weights, seed_trace=(int(seed), int(n), int(index)))


def equality_witness(b):
    """Commuting 2 x 2 instance attaining the Polya-Szego constant.

    ``A = diag(m1^2, M1^2)``, ``B = diag(M2^2, m2^2)`` and ``Phi`` is the
    vector state with weights ``p = M1 m2 / (m1 M2 + M1 m2)`` and ``1 - p``.
    For symmetric bounds ``p = 1/2`` and ``Phi`` is the normalized trace.
    Diaz-Metcalf is attained for every weight.
    """
    p = b.M1 * b.m2 / (b.m1 * b.M2 + b.M1 * b.m2)
    A = HermitianMatrix.diag([b.m1**2, b.M1**2])
    B = HermitianMatrix.diag([b.M2**2, b.m2**2])
    V = np.array([[math.sqrt(p)], [math.sqrt(1.0 - p)]])
    return Instance(A, B, b, PositiveMapSpec.compression(V))


def random_ordered_pair(n, m, M, rng, increment_norm=None):
    """``A`` with spectrum in ``[m, M]`` and ``B = A + S`` with ``0 <= S``, ``||S|| <= M``."""
    A = random_hermitian_with_spectrum(n, m, M, rng)
    scale = M if increment_norm is None else increment_norm
    if scale == 0:
        return OrderedPair(A, A, m, M)
    s = rng.uniform(0.0, scale, size=n)
    s[rng.random(n) < 0.5] = 0.0
    W = haar_unitary(n, rng)
    S = HermitianMatrix._trusted((W * s) @ W.conj().T)
    return OrderedPair(A, A + S, m, M)


def generate_ordered_pair(seed, n, index, m, M):
    # Separate stream from generate_instance for the same (seed, n, index).
    return random_ordered_pair(n, m, M, make_rng(seed, n, index, 1))


def instance_to_json(inst):
    return {
        "n": inst.n,
        "bounds": inst.bounds.to_json(),
        "A": inst.A.to_json(),
        "B": inst.B.to_json(),
        "map": inst.map.to_json(),
        "seed": list(inst.seed_trace) if inst.seed_trace is not None else None,
    }


def save_instance(inst, path=None):
    """Serialize to a JSON string; also write it to ``path`` if given."""
    text = json.dumps(instance_to_json(inst), indent=1)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def instance_from_json(obj):
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", "instance")
    missing = [k for k in ("n", "bounds", "A", "B", "map") if k not in obj]
    if missing:
        raise ParseError(f"missing keys {missing}", "instance")
    n = obj["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError(f"expected a positive integer, got {n!r}", "n")
    bd = obj["bounds"]
    if not isinstance(bd, dict):
        raise ParseError("expected an object", "bounds")
    vals = []
    for key in ("m1", "M1", "m2", "M2"):
        x = bd.get(key)
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ParseError(f"expected a number, got {x!r}", f"bounds.{key}")
        vals.append(x)
    try:
        b = SpectralBounds(*vals)
    except InvalidBounds as exc:
        raise ParseError(str(exc), "bounds") from exc
    mats = {}
    for key in ("A", "B"):
        try:
            mats[key] = HermitianMatrix.from_json(obj[key], key)
        except NotHermitian as exc:
            raise ParseError(str(exc), key) from exc
        if mats[key].dim != n:
            raise ParseError(f"matrix is {mats[key].dim} x {mats[key].dim}, expected n = {n}", key)
    phi = PositiveMapSpec.from_json(obj["map"], n, "map")
    seed = obj.get("seed")
    if seed is not None:
        if isinstance(seed, int) and not isinstance(seed, bool):
            seed = [seed]
        if not isinstance(seed, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in seed):
            raise ParseError(f"expected an integer list or null, got {seed!r}", "seed")
        seed = tuple(seed)
    return Instance(mats["A"], mats["B"], b, phi, seed)


def load_instance(source):
    """Load from a path, an open stream, or a JSON string."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        with open(source) as fh:
            text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    return instance_from_json(obj)
