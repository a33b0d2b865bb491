"""Diagonal scalings, the gain and sampling-bound parameter ladder, and
per-interval contraction utilities."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import (CommonDNotFound, ContractionInfeasible,
                     DConstructionFailure, EnumerationTooLarge)
from .graph import GroundedLaplacian, Topology, build_H, is_nonsingular_M, leader_reachable
from .numerics.linalg import (_as_matrix, _square, solve_care, spectral_norm,
                              sym_eig_extremes)


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    """Feedback gain, sampling-interval bound, and every intermediate.

    D holds the diagonal scaling entries; it is None for the
    graph-independent worst-case design, where d_m and d_M aggregate
    the per-graph scalings instead.
    """

    P: np.ndarray
    D: np.ndarray | None
    K: np.ndarray
    d_m: float
    d_M: float
    lam_m: float
    lam_M: float
    lam1: float
    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float
    c1: float
    c2: float
    T_bar: float
    mu1: float
    mu2: float
    care_residual: float


@dataclass(frozen=True)
class ContractionParams:
    """Feasible per-interval decay bound rho for minimum gap h."""

    beta1: float
    beta2: float
    h: float
    rho: float


def _definiteness_margin(d: np.ndarray, mats) -> float:
    """Smallest eigenvalue of D H + H^T D over the given matrices."""
    D = np.diag(d)
    margin = math.inf
    for H in mats:
        S = D @ H + H.T @ D
        margin = min(margin, sym_eig_extremes(S).lambda_min)
    return margin


def construct_D(gl: GroundedLaplacian) -> np.ndarray:
    """Positive diagonal scaling d with D H + H^T D positive definite.

    Quotient construction d_i = z_i / w_i from w = H^{-1} 1 and
    z = H^{-T} 1, rescaled so max d_i = 1, then verified definite.
    Valid for any nonsingular M-matrix: both solves are elementwise
    positive and the scaled sum is a symmetric M-matrix.
    """
    H = gl.H
    if not is_nonsingular_M(gl):
        raise DConstructionFailure("input is not a nonsingular M-matrix")
    n = H.shape[0]
    ones = np.ones(n)
    w = np.linalg.solve(H, ones)
    z = np.linalg.solve(H.T, ones)
    if np.min(w) <= 0.0 or np.min(z) <= 0.0:
        raise DConstructionFailure("inverse row or column sums are not positive")
    d = z / w
    d = d / np.max(d)
    margin = _definiteness_margin(d, [H])
    if not margin > 0.0:
        raise DConstructionFailure(
            f"definiteness verification failed: lambda_min = {margin:.3e}")
    return d


def find_common_D(gls) -> np.ndarray:
    """Positive diagonal scaling valid for every given grounded Laplacian.

    Candidate order: the identity, each per-matrix construct_D, their
    elementwise geometric mean, then 500 steps of projected gradient
    ascent on log d maximizing the normalized definiteness margin.
    The search is incomplete; exhausting it raises CommonDNotFound,
    which does not prove that no scaling exists.
    """
    gls = list(gls)
    if not gls:
        raise ValueError("at least one grounded Laplacian is required")
    mats = [g.H for g in gls]
    n = mats[0].shape[0]
    for H in mats:
        if H.shape != (n, n):
            raise ValueError("all grounded Laplacians must share one size")

    candidates = [np.ones(n)]
    per_graph = []
    for g in gls:
        try:
            per_graph.append(construct_D(g))
        except DConstructionFailure:
            continue
    candidates.extend(per_graph)
    if per_graph:
        geo = np.exp(np.mean(np.log(np.vstack(per_graph)), axis=0))
        candidates.append(geo / np.max(geo))
    for cand in candidates:
        if _definiteness_margin(cand, mats) > 0.0:
            return cand

    # projected ascent on log d; the objective is scale-invariant, so
    # project back to max d = 1 after every step
    u = np.log(candidates[-1])
    u -= np.max(u)
    best = np.exp(u)
    best_margin = _definiteness_margin(best, mats)
    step = 0.25
    eps = 1e-5
    for _ in range(500):
        grad = np.zeros(n)
        for i in range(n):
            up = u.copy()
            up[i] += eps
            um = u.copy()
            um[i] -= eps
            f_up = _definiteness_margin(np.exp(up - np.max(up)), mats)
            f_um = _definiteness_margin(np.exp(um - np.max(um)), mats)
            grad[i] = (f_up - f_um) / (2.0 * eps)
        gnorm = float(np.linalg.norm(grad))
        if gnorm == 0.0:
            break
        u = u + step * grad / gnorm
        u -= np.max(u)
        margin = _definiteness_margin(np.exp(u), mats)
        if margin > best_margin:
            best_margin = margin
            best = np.exp(u)
        else:
            step *= 0.9
        if best_margin > 0.0:
            return best
    raise CommonDNotFound(
        "no common diagonal scaling found by the candidate list or the "
        "ascent search; one may still exist")


def synthesize(A, B, mu1, mu2, D, Hs) -> SynthesisResult:
    """Feedback gain K and maximum sampling interval T_bar.

    Evaluates the full parameter ladder for the given diagonal scaling
    over the listed grounded Laplacians; a static design is the
    single-element list. Norms are spectral throughout, and Kronecker
    factors use the product identity for their norms and extreme
    eigenvalues.
    """
    if not (mu1 > 0.0 and mu2 > 0.0):
        raise ValueError(f"mu1 and mu2 must be positive, got {mu1}, {mu2}")
    a = _square(A, "A")
    b = _as_matrix(B, "B")
    Hs = list(Hs)
    if not Hs:
        raise ValueError("at least one grounded Laplacian is required")
    mats = [g.H for g in Hs]
    N = mats[0].shape[0]
    d = np.asarray(D, dtype=float).reshape(-1)
    if d.shape[0] != N:
        raise ValueError(f"D must have {N} entries, got {d.shape[0]}")
    if np.min(d) <= 0.0:
        raise ValueError("D entries must be strictly positive")

    care = solve_care(a, b, mu1, mu2)
    P = care.P

    lam1 = _definiteness_margin(d, mats)
    if not lam1 > 0.0:
        raise DConstructionFailure(
            f"D does not certify definiteness for every graph: "
            f"lambda_min = {lam1:.3e}")
    d_m = float(np.min(d))
    d_M = float(np.max(d))
    specP = sym_eig_extremes(P)
    lam_m = d_m * specP.lambda_min
    lam_M = d_M * specP.lambda_max

    Dm = np.diag(d)
    norm_A = spectral_norm(a)
    norm_PBBP = spectral_norm(P @ b @ b.T @ P)
    norm_BBP = spectral_norm(b @ b.T @ P)
    alpha1 = mu1 * d_M / lam1
    alpha2 = max(2.0 * alpha1 * spectral_norm(Dm @ H) * norm_PBBP for H in mats)
    alpha3 = alpha2 * alpha2 / (2.0 * d_m * mu2)
    alpha4 = max((norm_A + alpha1 * spectral_norm(H) * norm_BBP) ** 2 / lam_m
                 for H in mats)
    c1 = d_m * mu2 / (2.0 * lam_M)
    c2 = alpha3 * alpha4
    T_bar = math.sqrt(c1 / c2)
    K = alpha1 * (b.T @ P)
    return SynthesisResult(
        P=P, D=d, K=K, d_m=d_m, d_M=d_M, lam_m=lam_m, lam_M=lam_M,
        lam1=lam1, alpha1=alpha1, alpha2=alpha2, alpha3=alpha3,
        alpha4=alpha4, c1=c1, c2=c2, T_bar=T_bar, mu1=float(mu1),
        mu2=float(mu2), care_residual=care.residual_norm)


ENUMERATION_CAP = 3


def enumerate_admissible(N: int):
    """Every digraph on one leader and N followers in which all
    followers are reachable from the leader."""
    if N < 1:
        raise ValueError(f"follower count must be at least 1, got {N}")
    if N > ENUMERATION_CAP:
        raise EnumerationTooLarge(
            f"enumeration supports at most {ENUMERATION_CAP} followers, got {N}")
    pairs = [(j, i) for j in range(N + 1) for i in range(N + 1) if j != i]
    admissible = []
    for bits in range(1 << len(pairs)):
        edges = frozenset(pairs[k] for k in range(len(pairs)) if (bits >> k) & 1)
        t = Topology(N, edges)
        if leader_reachable(t):
            admissible.append(t)
    return admissible


def worst_case_params(A, B, mu1, mu2, N: int) -> SynthesisResult:
    """Graph-independent gain and sampling bound.

    Enumerates every admissible digraph on N followers, constructs a
    per-graph scaling, and aggregates the ladder extremes so the
    result is valid for all of them. The aggregation is conservative:
    the returned T_bar is at most every per-graph bound.
    """
    if not (mu1 > 0.0 and mu2 > 0.0):
        raise ValueError(f"mu1 and mu2 must be positive, got {mu1}, {mu2}")
    a = _square(A, "A")
    b = _as_matrix(B, "B")
    topologies = enumerate_admissible(N)
    care = solve_care(a, b, mu1, mu2)
    P = care.P
    specP = sym_eig_extremes(P)

    distinct = {}
    for t in topologies:
        gl = build_H(t)
        distinct.setdefault(gl.H.tobytes(), gl)
    scalings = [(gl, construct_D(gl)) for gl in distinct.values()]

    d_m = min(float(np.min(d)) for _, d in scalings)
    d_M = max(float(np.max(d)) for _, d in scalings)
    lam_m = min(float(np.min(d)) * specP.lambda_min for _, d in scalings)
    lam_M = max(float(np.max(d)) * specP.lambda_max for _, d in scalings)
    lam1 = min(_definiteness_margin(d, [gl.H]) for gl, d in scalings)
    norm_A = spectral_norm(a)
    norm_PBBP = spectral_norm(P @ b @ b.T @ P)
    norm_BBP = spectral_norm(b @ b.T @ P)
    alpha1 = mu1 * d_M / lam1
    alpha2 = max(2.0 * alpha1 * spectral_norm(np.diag(d) @ gl.H) * norm_PBBP
                 for gl, d in scalings)
    alpha3 = alpha2 * alpha2 / (2.0 * d_m * mu2)
    alpha4 = max((norm_A + alpha1 * spectral_norm(gl.H) * norm_BBP) ** 2 / lam_m
                 for gl, _ in scalings)
    c1 = d_m * mu2 / (2.0 * lam_M)
    c2 = alpha3 * alpha4
    T_bar = math.sqrt(c1 / c2)
    K = alpha1 * (b.T @ P)
    return SynthesisResult(
        P=P, D=None, K=K, d_m=d_m, d_M=d_M, lam_m=lam_m, lam_M=lam_M,
        lam1=lam1, alpha1=alpha1, alpha2=alpha2, alpha3=alpha3,
        alpha4=alpha4, c1=c1, c2=c2, T_bar=T_bar, mu1=float(mu1),
        mu2=float(mu2), care_residual=care.residual_norm)


def contraction_factor(beta1: float, beta2: float, h: float) -> ContractionParams:
    """Per-interval decay bound rho = (1 - beta2/beta1) e^(-beta1 h)
    + beta2/beta1, strictly below 1 whenever 0 < beta2 < beta1 and
    h > 0."""
    if not (beta1 > 0.0 and beta2 > 0.0):
        raise ContractionInfeasible(
            f"beta1 and beta2 must be positive, got {beta1}, {beta2}")
    if beta2 >= beta1:
        raise ContractionInfeasible(
            f"beta2 = {beta2} must be strictly below beta1 = {beta1}")
    if not h > 0.0:
        raise ContractionInfeasible(f"h must be positive, got {h}")
    ratio = beta2 / beta1
    rho = (1.0 - ratio) * math.exp(-beta1 * h) + ratio
    return ContractionParams(beta1=float(beta1), beta2=float(beta2),
                             h=float(h), rho=float(rho))


def verify_comparison_lemma(beta1: float, beta2: float, schedule, W0: float,
                            rel_slack: float = 1e-12) -> bool:
    """Propagate the extremal held-term scalar system
    dW/dt = -beta1 W + beta2 W(t_s) across the schedule and check each
    per-interval ratio W(t_{s+1}) / W(t_s) against the closed-form
    decay factor. True iff every ratio matches within rel_slack."""
    if not (beta1 > 0.0 and beta2 > 0.0) or beta2 >= beta1:
        raise ContractionInfeasible(
            f"need 0 < beta2 < beta1, got beta1 = {beta1}, beta2 = {beta2}")
    if W0 < 0.0:
        raise ValueError(f"W0 must be nonnegative, got {W0}")
    if W0 == 0.0:
        return True
    gaps = np.diff(np.asarray(schedule.instants, dtype=float))
    W = float(W0)
    for T in gaps:
        rho_s = contraction_factor(beta1, beta2, float(T)).rho
        held = (beta2 / beta1) * W
        W_next = (W - held) * math.exp(-beta1 * float(T)) + held
        ratio = W_next / W
        if abs(ratio - rho_s) > rel_slack * rho_s:
            return False
        W = W_next
    return True
