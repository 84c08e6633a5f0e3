"""Counterexample search for the conjectured squared constants.

Two targets are searched, both of the form ``L <= c * Phi(A # B)^2``:

``conjecture_ps2``
    ``L = (Phi(A) # Phi(B))^2``, conjectured ``c = alpha^2`` (proven: beta).
``conjecture_dm2``
    ``L = ((M2 m2 / M1 m1) Phi(A) + Phi(B))^2``, conjectured ``c = dm^2``
    (proven: K^2).

The search maximizes the instance-optimal constant.  It interleaves random
restarts with hill climbing on the spectral factors of ``A`` and ``B`` and
the parameters of ``Phi``.  Every visited instance is feasible by
construction.  The budget is split into fixed-size chains, each with its own
random stream, so results do not depend on how chains are spread over
workers.
"""

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bounds as bd
from .instances import Instance, instance_to_json, make_rng, random_spectral_factors
from .linalg import HermitianMatrix, optimal_constant
from .maps import PositiveMapSpec, apply_map, haar_unitary, random_map
from .means import geometric_mean

TARGETS = ("conjecture_ps2", "conjecture_dm2")
CHAIN_BUDGET = 1000
COOL_EVERY = 50
COOLING = 0.9
RESTART_AFTER = 300
MIN_STEP = 1e-4
BACKSTOP_RTOL = 1e-8
VIOLATION_RTOL = 1e-8
SWEEP_HEADER = ("ratio1", "ratio2", "alpha_sq", "beta", "best_ps2", "dm_sq", "K_sq", "best_dm2")


def target_constants(target, b):
    """``(conjectured, proven)`` constants for a target."""
    if target == "conjecture_ps2":
        return bd.alpha_polya_szego(b) ** 2, bd.beta_squared(b)
    if target == "conjecture_dm2":
        return bd.dm_constant(b) ** 2, bd.dm_squared_constant(b) ** 2
    raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")


def target_ratio(target, inst):
    """Least ``c`` with ``L <= c Phi(A # B)^2`` on this instance."""
    phi = inst.map
    phiA, phiB = apply_map(phi, inst.A), apply_map(phi, inst.B)
    C = apply_map(phi, geometric_mean(inst.A, inst.B))
    if target == "conjecture_ps2":
        L = geometric_mean(phiA, phiB).square()
    elif target == "conjecture_dm2":
        b = inst.bounds
        L = (phiA * (b.M2 * b.m2 / (b.M1 * b.m1)) + phiB).square()
    else:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")
    return optimal_constant(L, C.square())


@dataclass
class SearchReport:
    target: str
    budget_used: int
    best_ratio: float
    conjectured_constant: float
    proven_constant: float
    best_instance: Optional[Instance]
    violated: bool
    backstop_ok: bool
    max_backstop_excess: float
    n: int
    bounds: bd.SpectralBounds
    seed: Optional[int] = None
    mode: str = "hill_climb"
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "target": self.target,
            "mode": self.mode,
            "n": self.n,
            "bounds": self.bounds.to_json(),
            "seed": self.seed,
            "budget_used": self.budget_used,
            "best_ratio": self.best_ratio,
            "conjectured_constant": self.conjectured_constant,
            "proven_constant": self.proven_constant,
            "ratio_to_conjectured": self.best_ratio / self.conjectured_constant,
            "ratio_to_proven": self.best_ratio / self.proven_constant,
            "violated": self.violated,
            "backstop_ok": self.backstop_ok,
            "max_backstop_excess": self.max_backstop_excess,
            "best_instance": instance_to_json(self.best_instance) if self.best_instance is not None else None,
            **({"extra": self.extra} if self.extra else {}),
        }


# Search state: spectral factors of A and B plus the map.

@dataclass
class _State:
    lamA: np.ndarray
    UA: Optional[np.ndarray]
    lamB: np.ndarray
    UB: Optional[np.ndarray]
    phi: PositiveMapSpec

    def instance(self, b, trace=None):
        return Instance(_assemble(self.lamA, self.UA), _assemble(self.lamB, self.UB), b, self.phi, trace)


def _assemble(lam, U):
    if U is None:
        return HermitianMatrix.diag(lam)
    return HermitianMatrix._trusted((U * lam) @ U.conj().T)


def _random_state(n, b, rng, map_kind_weights=None):
    # Consumes rng exactly like instances.random_instance.
    lamA, UA = random_spectral_factors(n, b.m1**2, b.M1**2, rng)
    lamB, UB = random_spectral_factors(n, b.m2**2, b.M2**2, rng)
    phi = random_map(n, rng, map_kind_weights)
    return _State(lamA, UA, lamB, UB, phi)


def _unitary_polish(X):
    q, r = np.linalg.qr(X)
    d = np.diag(r)
    return q * (d / np.where(np.abs(d) > 0, np.abs(d), 1.0))


def _blend_unitary(U, s, rng):
    # Convex combination with a Haar draw, pulled back to U(n) by QR.
    n = U.shape[0]
    return _unitary_polish((1.0 - s) * U + s * haar_unitary(n, rng))


def _move_spectrum(lam, lo, hi, step, rng):
    if hi <= lo:
        return lam
    lam = lam.copy()
    ends = np.where(rng.random(lam.size) < 0.5, lo, hi)
    pull = rng.random(lam.size) < 0.5
    lam[pull] += step * rng.random(pull.sum()) * (ends[pull] - lam[pull])
    lam += 0.1 * step * (hi - lo) * rng.standard_normal(lam.size)
    return np.clip(lam, lo, hi)


def _move_map(phi, step, rng, n, map_kind_weights):
    if rng.random() < 0.05:
        return random_map(n, rng, map_kind_weights)
    if phi.kind == "compression":
        V = phi.V
        G = rng.standard_normal(V.shape) + 1j * rng.standard_normal(V.shape)
        q, _ = np.linalg.qr((1.0 - step) * V + step * G / math.sqrt(2.0))
        return PositiveMapSpec.compression(q)
    if phi.kind == "unitary_mixture":
        w = np.asarray(phi.weights) * np.exp(step * rng.standard_normal(len(phi.weights)))
        us = [_blend_unitary(U, step * rng.random(), rng) for U in phi.unitaries]
        return PositiveMapSpec.unitary_mixture(tuple(w / w.sum()), us)
    if rng.random() < step:
        return random_map(n, rng, map_kind_weights)
    return phi


def _perturb(state, b, step, rng, map_kind_weights):
    n = state.lamA.size
    lamA = _move_spectrum(state.lamA, b.m1**2, b.M1**2, step, rng)
    lamB = _move_spectrum(state.lamB, b.m2**2, b.M2**2, step, rng)
    UA = state.UA if state.UA is None else _blend_unitary(state.UA, step * rng.random(), rng)
    UB = state.UB if state.UB is None else _blend_unitary(state.UB, step * rng.random(), rng)
    phi = _move_map(state.phi, step, rng, n, map_kind_weights)
    return _State(lamA, UA, lamB, UB, phi)


@dataclass
class _ChainResult:
    best_ratio: float
    best_instance: Instance
    evaluations: int
    max_excess: float


def _run_chain(args):
    target, b, n, budget, seed, stream, map_kind_weights = args
    rng = make_rng(seed, *stream)
    _, proven = target_constants(target, b)
    trace = (int(seed), *stream)

    max_excess = -math.inf

    def evaluate(state):
        nonlocal max_excess
        inst = state.instance(b, trace)
        r = target_ratio(target, inst)
        max_excess = max(max_excess, r / proven - 1.0)
        return r, inst

    current = _random_state(n, b, rng, map_kind_weights)
    cur_ratio, cur_inst = evaluate(current)
    best_ratio, best_inst = cur_ratio, cur_inst
    step, stall = 0.5, 0
    for _ in range(budget - 1):
        if stall >= RESTART_AFTER or step < MIN_STEP:
            current = _random_state(n, b, rng, map_kind_weights)
            cur_ratio, cur_inst = evaluate(current)
            step, stall = 0.5, 0
        else:
            cand = _perturb(current, b, step, rng, map_kind_weights)
            r, inst = evaluate(cand)
            if r > cur_ratio:
                current, cur_ratio, cur_inst = cand, r, inst
                stall = 0
            else:
                stall += 1
                if stall % COOL_EVERY == 0:
                    step *= COOLING
        if cur_ratio > best_ratio:
            best_ratio, best_inst = cur_ratio, cur_inst
    return _ChainResult(best_ratio, best_inst, budget, max_excess)


def scalar_search(target, b, pair_points=1025, simplex_steps=16):
    """Exhaustive search over commuting instances (the scalar case).

    ``A`` and ``B`` are diagonal with entries at the spectral corners
    ``{m1^2, M1^2} x {m2^2, M2^2}`` and ``Phi`` is a vector state with
    weights ``w``.  Scans every two-corner mixture on a fine grid, the full
    four-corner simplex on a coarse grid, then refines the best two-corner
    mixture by golden section.  Returns ``(best_ratio, instance)``.
    """
    corners = [(a, c) for a in (b.m1**2, b.M1**2) for c in (b.m2**2, b.M2**2)]
    a = np.array([p[0] for p in corners])
    c = np.array([p[1] for p in corners])
    g = np.sqrt(a * c)
    k = b.M2 * b.m2 / (b.M1 * b.m1)

    def ratio(W):
        W = np.atleast_2d(W)
        den = (W @ g) ** 2
        if target == "conjecture_ps2":
            return (W @ a) * (W @ c) / den
        if target == "conjecture_dm2":
            return (k * (W @ a) + W @ c) ** 2 / den
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")

    best, best_w = -math.inf, None
    best_pair = None
    t = np.linspace(0.0, 1.0, pair_points)
    for i, j in itertools.combinations(range(4), 2):
        W = np.zeros((t.size, 4))
        W[:, i], W[:, j] = t, 1.0 - t
        vals = ratio(W)
        idx = int(np.argmax(vals))
        if vals[idx] > best:
            best, best_w, best_pair = float(vals[idx]), W[idx].copy(), (i, j, idx)
    comps = [cmp for cmp in itertools.product(range(simplex_steps + 1), repeat=3) if sum(cmp) <= simplex_steps]
    W = np.array([[*cmp, simplex_steps - sum(cmp)] for cmp in comps], dtype=float) / simplex_steps
    vals = ratio(W)
    idx = int(np.argmax(vals))
    if vals[idx] > best:
        best, best_w, best_pair = float(vals[idx]), W[idx].copy(), None
    if best_pair is not None:
        i, j, idx = best_pair
        lo, hi = t[max(idx - 1, 0)], t[min(idx + 1, t.size - 1)]

        def along(s):
            w = np.zeros(4)
            w[i], w[j] = s, 1.0 - s
            return float(ratio(w)[0])

        if hi > lo:
            s, val = bd.golden_section_max(along, lo, hi)
            if val > best:
                best = val
                best_w = np.zeros(4)
                best_w[i], best_w[j] = s, 1.0 - s
    support = np.flatnonzero(best_w > 0)
    V = np.sqrt(best_w[support]).reshape(-1, 1)
    V = V / np.linalg.norm(V)
    inst = Instance(
        HermitianMatrix.diag(a[support]),
        HermitianMatrix.diag(c[support]),
        b,
        PositiveMapSpec.compression(V),
    )
    return best, inst


def falsify(target, b, n, budget, seed, jobs=1, stream_prefix=(), map_kind_weights=None):
    """Search for an instance whose optimal constant exceeds the conjectured one.

    ``n = 1`` runs :func:`scalar_search` instead: unital maps on 1 x 1
    matrices are the identity, so the scalar case is the commuting model.
    """
    conj, proven = target_constants(target, b)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if n == 1:
        ratio, inst = scalar_search(target, b)
        excess = ratio / proven - 1.0
        return SearchReport(
            target, 1, ratio, conj, proven, inst,
            ratio > conj * (1.0 + VIOLATION_RTOL), excess <= BACKSTOP_RTOL, excess, n, b, seed,
            mode="scalar_exhaustive",
        )
    tasks = []
    for chain, start in enumerate(range(0, budget, CHAIN_BUDGET)):
        tasks.append((target, b, n, min(CHAIN_BUDGET, budget - start), seed,
                      (*stream_prefix, chain), map_kind_weights))
    if jobs <= 1 or len(tasks) == 1:
        results = [_run_chain(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_chain, tasks))
    best = results[0]
    for r in results[1:]:
        if r.best_ratio > best.best_ratio:
            best = r
    max_excess = max(r.max_excess for r in results)
    return SearchReport(
        target,
        sum(r.evaluations for r in results),
        best.best_ratio,
        conj,
        proven,
        best.best_instance,
        best.best_ratio > conj * (1.0 + VIOLATION_RTOL),
        max_excess <= BACKSTOP_RTOL,
        max_excess,
        n,
        b,
        seed,
    )


def sweep(ratios, n, per_cell_budget, seed, jobs=1):
    """Table over all ``(ratio1, ratio2)`` pairs from ``ratios``.

    ``ratio1 = M1^2 / m1^2`` and ``ratio2 = M2^2 / m2^2`` are the spectral
    condition numbers of ``A`` and ``B`` (bounds ``(1, sqrt r1, 1, sqrt r2)``).
    Returns ``(rows, backstop_ok)``.
    """
    rows = []
    ok = True
    for cell, (r1, r2) in enumerate(itertools.product(ratios, ratios)):
        b = bd.SpectralBounds(1.0, math.sqrt(r1), 1.0, math.sqrt(r2))
        found = {}
        for t_idx, target in enumerate(TARGETS):
            rep = falsify(target, b, n, per_cell_budget, seed, jobs, stream_prefix=(cell, t_idx))
            found[target] = rep.best_ratio
            ok = ok and rep.backstop_ok
        rows.append({
            "ratio1": float(r1),
            "ratio2": float(r2),
            "alpha_sq": bd.alpha_polya_szego(b) ** 2,
            "beta": bd.beta_squared(b),
            "best_ps2": found["conjecture_ps2"],
            "dm_sq": bd.dm_constant(b) ** 2,
            "K_sq": bd.dm_squared_constant(b) ** 2,
            "best_dm2": found["conjecture_dm2"],
        })
    return rows, ok


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([repr(float(row[k])) for k in SWEEP_HEADER])
    return buf.getvalue()
