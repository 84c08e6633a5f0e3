"""Numerical checkers for the operator inequalities.

Each checker compares a left side ``L`` with ``c * R`` in the Loewner
order and reports the eigen-margin ``lambda_min(c R - L)``, the constant
``c`` the inequality promises, and the least constant that would have
sufficed on this instance.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import bounds as bd
from .linalg import (
    HermitianMatrix,
    default_rel_tol,
    inv,
    operator_norm,
    optimal_constant,
)
from .maps import apply_map
from .means import MeanSpec, geometric_mean, kubo_ando_mean

INVERSE_SHARP_RTOL = 1e-9


@dataclass
class InequalityReport:
    check_name: str
    holds: bool
    margin: float
    theorem_constant: float
    optimal_constant: float
    slack: float
    tolerance: float
    instance_id: Optional[Tuple[int, ...]] = None
    details: dict = field(default_factory=dict)
    subreports: List["InequalityReport"] = field(default_factory=list)

    @property
    def all_hold(self):
        return self.holds and all(s.all_hold for s in self.subreports)

    def to_json(self):
        out = {
            "check_name": self.check_name,
            "holds": self.holds,
            "margin": self.margin,
            "theorem_constant": self.theorem_constant,
            "optimal_constant": self.optimal_constant,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "instance_id": list(self.instance_id) if self.instance_id is not None else None,
        }
        if self.details:
            out["details"] = {k: _plain(v) for k, v in self.details.items()}
        if self.subreports:
            out["subreports"] = [s.to_json() for s in self.subreports]
        return out


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _rel(rel_tol):
    return default_rel_tol() if rel_tol is None else rel_tol


def order_report(name, L, R, c, instance_id=None, rel_tol=None, details=None):
    """Report for ``L <= c R`` with ``R`` strictly positive."""
    cR = R * c
    margin = (cR - L).lambda_min()
    tol = _rel(rel_tol) * max(1.0, cR.norm() + L.norm())
    opt = optimal_constant(L, R)
    return InequalityReport(
        name, bool(margin >= -tol), float(margin), float(c), opt, float(c - opt), float(tol),
        instance_id, dict(details or {}),
    )


def scalar_bound_report(name, L, c, instance_id=None, rel_tol=None, details=None):
    """Report for ``L <= c I``; ``L`` may be indefinite."""
    top = L.lambda_max()
    margin = c - top
    tol = _rel(rel_tol) * max(1.0, abs(c) + L.norm())
    return InequalityReport(
        name, bool(margin >= -tol), float(margin), float(c), float(top), float(c - top), float(tol),
        instance_id, dict(details or {}),
    )


def bundle(name, parts, instance_id=None, details=None):
    """Combine unit-constant order checks into one report."""
    opt = max(p.optimal_constant for p in parts)
    return InequalityReport(
        name,
        all(p.holds for p in parts),
        min(p.margin for p in parts),
        1.0,
        opt,
        1.0 - opt,
        max(p.tolerance for p in parts),
        instance_id,
        dict(details or {}),
        list(parts),
    )


def _mean_or_default(mean):
    return MeanSpec.geometric() if mean is None else mean


def _sides(inst, mean=None):
    # (Phi(A sigma B), Phi(A) sigma Phi(B))
    mean = _mean_or_default(mean)
    phi = inst.map
    C = apply_map(phi, kubo_ando_mean(inst.A, inst.B, mean))
    D = kubo_ando_mean(apply_map(phi, inst.A), apply_map(phi, inst.B), mean)
    return C, D


def check_ando(inst, mean=None, rel_tol=None):
    """``Phi(A sigma B) <= Phi(A) sigma Phi(B)``."""
    mean = _mean_or_default(mean)
    C, D = _sides(inst, mean)
    return order_report("ando", C, D, 1.0, inst.seed_trace, rel_tol, {"mean": mean.label})


def check_polya_szego(inst, rel_tol=None):
    """``Phi(A) # Phi(B) <= alpha Phi(A # B)``."""
    C, D = _sides(inst)
    return order_report("polya_szego", D, C, bd.alpha_polya_szego(inst.bounds), inst.seed_trace, rel_tol)


def check_squared_ps(inst, rel_tol=None):
    """``(Phi(A) # Phi(B))^2 <= beta Phi(A # B)^2``, plus the weaker alpha^4 form.

    ``details['norm_DCinv_sq']`` records ``||D C^-1||^2`` as a diagnostic.
    """
    b = inst.bounds
    C, D = _sides(inst)
    L, R = D.square(), C.square()
    beta = bd.beta_squared(b)
    alpha2 = bd.alpha_polya_szego(b) ** 2
    alpha4 = alpha2 * alpha2
    Cinv = inv(C)
    diag = {
        "norm_DCinv_sq": operator_norm(D.array @ Cinv.array) ** 2,
        "beta_branch": "alpha^4" if alpha2 <= math.sqrt(b.M / b.m) else "second",
    }
    rep = order_report("squared_ps", L, R, beta, inst.seed_trace, rel_tol, diag)
    rep.subreports.append(order_report("squared_ps.alpha4", L, R, alpha4, inst.seed_trace, rel_tol))
    return rep


def check_general_mean(inst, mean, rel_tol=None):
    """``Phi(A) sigma Phi(B) <= alpha_f Phi(A sigma B)``."""
    C, D = _sides(inst, mean)
    alpha = bd.alpha_general(mean, inst.bounds)
    details = {"mean": mean.label}
    if mean.kind == "weighted_geometric":
        details["alpha_closed"] = bd.alpha_weighted_geometric_closed(mean.mu, inst.bounds)
    return order_report("general_mean", D, C, alpha, inst.seed_trace, rel_tol, details)


def check_general_squared(inst, mean, rel_tol=None):
    """``(Phi(A) sigma Phi(B))^2 <= beta_f Phi(A sigma B)^2``."""
    C, D = _sides(inst, mean)
    alpha = bd.alpha_general(mean, inst.bounds)
    beta = bd.beta_general(mean, inst.bounds, alpha)
    return order_report(
        "general_squared", D.square(), C.square(), beta, inst.seed_trace, rel_tol, {"mean": mean.label}
    )


def check_gruss(inst, rel_tol=None):
    """``(Phi(A) # Phi(B))^2 - Phi(A # B)^2 <= (beta - 1) M1^2 M2^2``."""
    C, D = _sides(inst)
    return scalar_bound_report("gruss", D.square() - C.square(), bd.gruss_bound(inst.bounds), inst.seed_trace, rel_tol)


def _dm_lhs(inst):
    b = inst.bounds
    k = b.M2 * b.m2 / (b.M1 * b.m1)
    return apply_map(inst.map, inst.A) * k + apply_map(inst.map, inst.B)


def check_dm(inst, rel_tol=None):
    """``(M2 m2 / M1 m1) Phi(A) + Phi(B) <= (M2/m1 + m2/M1) Phi(A # B)``."""
    C = apply_map(inst.map, geometric_mean(inst.A, inst.B))
    return order_report("dm", _dm_lhs(inst), C, bd.dm_constant(inst.bounds), inst.seed_trace, rel_tol)


def check_dm_squared(inst, rel_tol=None):
    """Squared Diaz-Metcalf with constant ``K^2``, plus its three proof steps."""
    b = inst.bounds
    m1, M1, m2, M2 = b.astuple()
    phi = inst.map
    k = M2 * m2 / (M1 * m1)
    X = _dm_lhs(inst)
    C = apply_map(phi, geometric_mean(inst.A, inst.B))
    K = bd.dm_squared_constant(b)
    rep = order_report("dm_squared", X.square(), C.square(), K * K, inst.seed_trace, rel_tol, {"K": K})

    phiA, phiB = apply_map(phi, inst.A), apply_map(phi, inst.B)
    phiAinv, phiBinv = apply_map(phi, inv(inst.A)), apply_map(phi, inv(inst.B))
    ff = phiAinv * (M2 * m2 * m1 * M1) + phiA * k
    gg = phiBinv * (m2**2 * M2**2) + phiB
    weight = 2.0 * math.sqrt(M2 * M1 * m1 * m2) * M2 * m2
    acc = inv(C) * weight + X
    rhs_ff = k * (M1**2 + m1**2)
    rhs_gg = M2**2 + m2**2
    rep.subreports += [
        scalar_bound_report("dm_squared.ff", ff, rhs_ff, inst.seed_trace, rel_tol),
        scalar_bound_report("dm_squared.gg", gg, rhs_gg, inst.seed_trace, rel_tol),
        scalar_bound_report("dm_squared.acc", acc, rhs_ff + rhs_gg, inst.seed_trace, rel_tol),
    ]
    return rep


def check_fujii_squaring(pair, rel_tol=None, instance_id=None):
    """``A^2 <= (M + m)^2 / (4 M m) B^2`` for ``m <= A <= M`` and ``A <= B``."""
    c = bd.kantorovich_factor(pair.m, pair.M)
    return order_report("fujii_squaring", pair.A.square(), pair.B.square(), c, instance_id, rel_tol)


def check_choi(inst, rel_tol=None):
    """``Phi(A)^-1 <= Phi(A^-1)``."""
    L = inv(apply_map(inst.map, inst.A))
    R = apply_map(inst.map, inv(inst.A))
    return order_report("choi", L, R, 1.0, inst.seed_trace, rel_tol)


def check_amgm(A, B, rel_tol=None, instance_id=None):
    """``A # B <= (A + B) / 2``."""
    return order_report("amgm", geometric_mean(A, B), (A + B) * 0.5, 1.0, instance_id, rel_tol)


def check_inverse_sharp(A, B, rel_tol=None, instance_id=None):
    """``(A # B)^-1 == A^-1 # B^-1`` up to a relative residual of 1e-9."""
    L = inv(geometric_mean(A, B))
    R = geometric_mean(inv(A), inv(B))
    diff = (L - R).norm()
    residual = diff / L.norm()
    opt = optimal_constant(L, R)
    return InequalityReport(
        "inverse_sharp",
        bool(residual <= INVERSE_SHARP_RTOL),
        float(-diff),
        1.0,
        opt,
        1.0 - opt,
        INVERSE_SHARP_RTOL * L.norm(),
        instance_id,
        {"relative_residual": float(residual)},
    )


def check_bk_norm(A, B, rel_tol=None, instance_id=None):
    """``||AB|| <= ||A + B||^2 / 4`` for ``A, B >= 0``."""
    lhs = operator_norm(A.array @ B.array)
    sq = (A + B).norm() ** 2
    rhs = 0.25 * sq
    opt = lhs / sq if sq > 0 else 0.0
    tol = _rel(rel_tol) * max(1.0, rhs + lhs)
    return InequalityReport(
        "bk_norm", bool(rhs - lhs >= -tol), float(rhs - lhs), 0.25, float(opt), float(0.25 - opt),
        float(tol), instance_id, {"norm_AB": lhs, "norm_sum_sq": sq},
    )


def check_sandwich(inst, rel_tol=None):
    """``m <= A # B <= M``, ``m <= Phi(A) # Phi(B) <= M`` and ``m^2 <= Phi(A # B)^2 <= M^2``."""
    b = inst.bounds
    m, M = b.m, b.M
    G = geometric_mean(inst.A, inst.B)
    C = apply_map(inst.map, G)
    D = geometric_mean(apply_map(inst.map, inst.A), apply_map(inst.map, inst.B))
    C2 = C.square()
    n, k = G.dim, C.dim
    I_n = HermitianMatrix.identity(n)
    I_k = HermitianMatrix.identity(k)
    sid = inst.seed_trace
    parts = [
        order_report("sandwich.lower_sharp", I_n * m, G, 1.0, sid, rel_tol),
        order_report("sandwich.upper_sharp", G, I_n * M, 1.0, sid, rel_tol),
        order_report("sandwich.lower_mapped_sharp", I_k * m, D, 1.0, sid, rel_tol),
        order_report("sandwich.upper_mapped_sharp", D, I_k * M, 1.0, sid, rel_tol),
        order_report("sandwich.lower_squared", I_k * (m * m), C2, 1.0, sid, rel_tol),
        order_report("sandwich.upper_squared", C2, I_k * (M * M), 1.0, sid, rel_tol),
    ]
    return bundle("sandwich", parts, sid)


# Checkers that take an Instance (and optionally a mean).
INSTANCE_CHECKS = (
    "ando",
    "polya_szego",
    "squared_ps",
    "general_mean",
    "general_squared",
    "gruss",
    "dm",
    "dm_squared",
    "choi",
    "sandwich",
)
PAIR_CHECKS = ("amgm", "inverse_sharp", "bk_norm")
ALL_CHECKS = INSTANCE_CHECKS + PAIR_CHECKS + ("fujii_squaring",)
MEAN_CHECKS = ("general_mean", "general_squared")


def run_check(name, inst, mean=None, pair=None, rel_tol=None):
    """Dispatch a checker by name; ``pair`` feeds ``fujii_squaring``."""
    sid = inst.seed_trace
    if name == "ando":
        return check_ando(inst, mean, rel_tol)
    if name == "polya_szego":
        return check_polya_szego(inst, rel_tol)
    if name == "squared_ps":
        return check_squared_ps(inst, rel_tol)
    if name == "general_mean":
        return check_general_mean(inst, _mean_or_default(mean), rel_tol)
    if name == "general_squared":
        return check_general_squared(inst, _mean_or_default(mean), rel_tol)
    if name == "gruss":
        return check_gruss(inst, rel_tol)
    if name == "dm":
        return check_dm(inst, rel_tol)
    if name == "dm_squared":
        return check_dm_squared(inst, rel_tol)
    if name == "choi":
        return check_choi(inst, rel_tol)
    if name == "sandwich":
        return check_sandwich(inst, rel_tol)
    if name == "amgm":
        return check_amgm(inst.A, inst.B, rel_tol, sid)
    if name == "inverse_sharp":
        return check_inverse_sharp(inst.A, inst.B, rel_tol, sid)
    if name == "bk_norm":
        return check_bk_norm(inst.A, inst.B, rel_tol, sid)
    if name == "fujii_squaring":
        if pair is None:
            raise ValueError("fujii_squaring needs an ordered pair")
        return check_fujii_squaring(pair, rel_tol, sid)
    raise ValueError(f"unknown check {name!r}")
