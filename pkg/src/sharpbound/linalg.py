"""Dense Hermitian matrices, spectral calculus and Loewner-order tests.

Everything is complex double precision.  A :class:`HermitianMatrix` is
immutable, so its eigendecomposition is computed at most once and cached.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainViolation,
    NonConvergence,
    NotHermitian,
    NotStrictlyPositive,
    ParseError,
)

HERMITIAN_RTOL = 1e-12
DEFAULT_REL_TOL = 1e-9
TOL_ENV = "SHARPBOUND_TOL"

JACOBI_OFFDIAG_RTOL = 1e-14
JACOBI_MAX_SWEEPS = 40

_EIGH_METHOD = "lapack"


def default_rel_tol():
    """Relative order tolerance: ``$SHARPBOUND_TOL`` if set, else 1e-9."""
    raw = os.environ.get(TOL_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_REL_TOL
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not value > 0:
        raise ValueError(f"{TOL_ENV} must be positive, got {value}")
    return value


def set_eigh_method(method):
    """Select the default eigensolver backend (``"lapack"`` or ``"jacobi"``)."""
    global _EIGH_METHOD
    if method not in ("lapack", "jacobi"):
        raise ValueError(f"unknown eigensolver {method!r}")
    _EIGH_METHOD = method


class HermitianMatrix:
    """Immutable n x n complex Hermitian matrix.

    Construction rejects inputs whose deviation from Hermitian symmetry
    exceeds ``1e-12 * max|entry|`` and then symmetrizes exactly.
    """

    __slots__ = ("_a", "_eig")

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise DimensionMismatch("dimension must be at least 1")
        if not np.all(np.isfinite(a)):
            raise NotHermitian("matrix has non-finite entries")
        scale = np.max(np.abs(a))
        dev = np.max(np.abs(a - a.conj().T))
        if dev > HERMITIAN_RTOL * scale:
            raise NotHermitian(f"Hermitian deviation {dev:.3e} exceeds {HERMITIAN_RTOL:g}*max|entry|")
        a = 0.5 * (a + a.conj().T)
        a.setflags(write=False)
        self._a = a
        self._eig = None

    @classmethod
    def _trusted(cls, a):
        # Caller guarantees ``a`` is Hermitian up to roundoff.
        obj = cls.__new__(cls)
        a = 0.5 * (a + a.conj().T)
        a.setflags(write=False)
        obj._a = a
        obj._eig = None
        return obj

    @classmethod
    def identity(cls, n):
        return cls._trusted(np.eye(n, dtype=complex))

    @classmethod
    def diag(cls, values):
        return cls._trusted(np.diag(np.asarray(values, dtype=float)).astype(complex))

    @classmethod
    def scalar(cls, c, n):
        return cls._trusted(c * np.eye(n, dtype=complex))

    @property
    def dim(self):
        return self._a.shape[0]

    @property
    def array(self):
        """Read-only view of the entries."""
        return self._a

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim})"

    def __eq__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return self._a.shape == other._a.shape and np.array_equal(self._a, other._a)

    __hash__ = None

    def _same_dim(self, other):
        if other.dim != self.dim:
            raise DimensionMismatch(f"dimensions {self.dim} and {other.dim} differ")

    def __add__(self, other):
        if isinstance(other, HermitianMatrix):
            self._same_dim(other)
            return HermitianMatrix._trusted(self._a + other._a)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, HermitianMatrix):
            self._same_dim(other)
            return HermitianMatrix._trusted(self._a - other._a)
        return NotImplemented

    def __neg__(self):
        return HermitianMatrix._trusted(-self._a)

    def __mul__(self, c):
        if isinstance(c, (int, float, np.floating, np.integer)):
            return HermitianMatrix._trusted(float(c) * self._a)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def square(self):
        return HermitianMatrix._trusted(self._a @ self._a)

    def congruence(self, X):
        """Return ``X A X*`` for any conformable complex matrix ``X``."""
        X = np.asarray(X, dtype=complex)
        return HermitianMatrix._trusted(X @ self._a @ X.conj().T)

    def eig(self):
        if self._eig is None:
            self._eig = eigh(self)
        return self._eig

    def eigvals(self):
        return self.eig().eigenvalues

    def lambda_min(self):
        return float(self.eig().eigenvalues[0])

    def lambda_max(self):
        return float(self.eig().eigenvalues[-1])

    def norm(self):
        w = self.eig().eigenvalues
        return float(max(abs(w[0]), abs(w[-1])))

    def to_json(self):
        return matrix_to_json(self._a)

    @classmethod
    def from_json(cls, obj, where="matrix"):
        return cls(matrix_from_json(obj, where))


@dataclass(frozen=True)
class Eigensystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.conj().T


def _as_array(A):
    if isinstance(A, HermitianMatrix):
        return A.array
    return np.asarray(A, dtype=complex)


def jacobi_eigh(a, offdiag_rtol=JACOBI_OFFDIAG_RTOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Cyclic complex Jacobi eigensolver for a Hermitian array.

    Each rotation first strips the phase of ``a[p, q]`` and then applies a
    real symmetric Jacobi rotation.  Returns ascending eigenvalues and the
    matching orthonormal eigenvectors.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    fro = np.linalg.norm(a)
    target = offdiag_rtol * fro

    def offdiag():
        return np.linalg.norm(a - np.diag(np.diag(a)))

    for _ in range(max_sweeps):
        if offdiag() <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
    else:
        if offdiag() > target:
            raise NonConvergence(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal {offdiag():.3e})"
            )
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigh(A, method=None):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = _as_array(A)
    method = method or _EIGH_METHOD
    if method == "jacobi":
        w, q = jacobi_eigh(a)
    elif method == "lapack":
        try:
            w, q = np.linalg.eigh(a)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence(str(exc)) from exc
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    w.setflags(write=False)
    q.setflags(write=False)
    return Eigensystem(w, q)


def _apply_spectral(f, w):
    try:
        out = np.asarray(f(w), dtype=float)
        if out.shape != w.shape:
            raise ValueError
    except (TypeError, ValueError):
        out = np.array([float(f(float(x))) for x in w])
    return out


def matfun(A, f, domain_floor=-np.inf):
    """Return ``Q f(Lambda) Q*``.

    ``f`` may be a vectorized callable or a scalar one.  Raises
    :class:`DomainViolation` when an eigenvalue is below ``domain_floor``
    or ``f`` is not finite on the spectrum.
    """
    es = A.eig() if isinstance(A, HermitianMatrix) else eigh(A)
    w, q = es.eigenvalues, es.eigenvectors
    if w[0] < domain_floor:
        raise DomainViolation(f"eigenvalue {w[0]:.6g} below domain floor {domain_floor:.6g}")
    fw = _apply_spectral(f, w)
    if not np.all(np.isfinite(fw)):
        raise DomainViolation("function is not finite on the spectrum")
    return HermitianMatrix._trusted((q * fw) @ q.conj().T)


def positivity_floor(A):
    """Strict-positivity floor ``1e-12 * max(1, lambda_max)``."""
    return 1e-12 * max(1.0, A.lambda_max())


def require_strictly_positive(A, name="matrix"):
    floor = positivity_floor(A)
    lo = A.lambda_min()
    if lo <= floor:
        raise NotStrictlyPositive(f"{name} has lambda_min {lo:.6g} <= floor {floor:.3g}")


def inv(A):
    require_strictly_positive(A)
    return matfun(A, lambda t: 1.0 / t)


def sqrtm(A):
    return matfun(A, np.sqrt, domain_floor=0.0)


def inv_sqrtm(A):
    require_strictly_positive(A)
    return matfun(A, lambda t: 1.0 / np.sqrt(t))


@dataclass(frozen=True)
class OrderVerdict:
    holds: bool
    margin: float
    tolerance_used: float


def order_tolerance(L, R, rel_tol=None):
    rel = default_rel_tol() if rel_tol is None else rel_tol
    return rel * max(1.0, R.norm() + L.norm())


def loewner_leq(L, R, tol=None, rel_tol=None):
    """Test ``L <= R`` in the Loewner order; margin is ``lambda_min(R - L)``."""
    if L.dim != R.dim:
        raise DimensionMismatch(f"dimensions {L.dim} and {R.dim} differ")
    if tol is None:
        tol = order_tolerance(L, R, rel_tol)
    margin = (R - L).lambda_min()
    return OrderVerdict(bool(margin >= -tol), float(margin), float(tol))


def operator_norm(X):
    """Largest singular value, as ``sqrt(lambda_max(X* X))``."""
    x = _as_array(X)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {x.shape}")
    w = eigh(HermitianMatrix._trusted(x.conj().T @ x)).eigenvalues
    return float(np.sqrt(max(w[-1], 0.0)))


def optimal_constant(L, R, floor=None):
    """Least ``c`` with ``L <= c R``, i.e. ``lambda_max(R^-1/2 L R^-1/2)``."""
    if L.dim != R.dim:
        raise DimensionMismatch(f"dimensions {L.dim} and {R.dim} differ")
    if floor is None:
        floor = positivity_floor(R)
    lo = R.lambda_min()
    if lo <= floor:
        raise NotStrictlyPositive(f"lambda_min(R) = {lo:.6g} <= floor {floor:.3g}")
    es = R.eig()
    q = es.eigenvectors
    s = q * (1.0 / np.sqrt(es.eigenvalues))
    m = s.conj().T @ L.array @ s
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[-1])


# JSON matrix format: {"re": [[...]], "im": [[...]]}, "im" optional.

def matrix_to_json(a):
    a = np.asarray(a, dtype=complex)
    out = {"re": a.real.tolist()}
    if np.any(a.imag != 0):
        out["im"] = a.imag.tolist()
    return out


def matrix_from_json(obj, where="matrix"):
    if not isinstance(obj, dict) or "re" not in obj:
        raise ParseError("expected an object with key 're'", where)
    unknown = set(obj) - {"re", "im"}
    if unknown:
        raise ParseError(f"unexpected keys {sorted(unknown)}", where)
    re = _real_grid(obj["re"], f"{where}.re")
    if "im" in obj and obj["im"] is not None:
        im = _real_grid(obj["im"], f"{where}.im")
        if im.shape != re.shape:
            raise ParseError(f"'im' shape {im.shape} differs from 're' shape {re.shape}", where)
        return re + 1j * im
    return re.astype(complex)


def _real_grid(rows, where):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError("expected a non-empty list of rows", where)
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"row has {len(row)} entries, expected {width}", f"{where}[{i}]")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ParseError(f"expected a number, got {x!r}", f"{where}[{i}][{j}]")
            out[i, j] = x
    return out
