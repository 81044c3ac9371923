"""Security-performance mitigation: path choice scoring and two-path coding.

A node whose preferred link is jammed weighs three options: reroute onto the
risky unjammed path, stay on the jammed path, or linearly encode message blocks
over GF(256) and split the coded symbols across both paths so that neither
relay alone can reconstruct them. Options are scored by a weighted sum of
normalized delay and exposure risk; the coded split adds a collection delay
for waiting on all symbols of a generation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "MitigationParams",
    "StrategyCandidate",
    "SecureCode",
    "InsufficientSymbolsError",
    "gf_mul",
    "gf_inv",
    "gf_mat_rank",
    "gf_mat_det",
    "snc_delay",
    "evaluate_h",
    "choose_strategy",
    "generate_code",
    "encode",
    "decode",
]

GF_ORDER = 256
_REDUCER = 0x11B  # x^8 + x^4 + x^3 + x + 1


def gf_mul(a: int, b: int) -> int:
    """Carry-less multiply reduced by the degree-8 polynomial."""
    if not (0 <= a < GF_ORDER and 0 <= b < GF_ORDER):
        raise ValueError("symbols must be bytes")
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= _REDUCER
    return acc


def _build_inverse_table() -> tuple[int, ...]:
    inv = [0] * GF_ORDER
    for a in range(1, GF_ORDER):
        # a^254 = a^-1 in a field of order 256 (Fermat).
        acc, base, e = 1, a, 254
        while e:
            if e & 1:
                acc = gf_mul(acc, base)
            base = gf_mul(base, base)
            e >>= 1
        inv[a] = acc
    return tuple(inv)


_INV = _build_inverse_table()


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    return _INV[a]


def _gf_eliminate(rows: list[list[int]]) -> tuple[list[list[int]], int]:
    """Row-reduce over the field; returns (echelon rows, rank)."""
    m = [row[:] for row in rows]
    n_rows = len(m)
    n_cols = len(m[0]) if m else 0
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if m[r][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        scale = gf_inv(m[rank][col])
        m[rank] = [gf_mul(scale, v) for v in m[rank]]
        for r in range(n_rows):
            if r != rank and m[r][col]:
                factor = m[r][col]
                m[r] = [v ^ gf_mul(factor, p) for v, p in zip(m[r], m[rank])]
        rank += 1
        if rank == n_rows:
            break
    return m, rank


def gf_mat_rank(matrix: Sequence[Sequence[int]]) -> int:
    _, rank = _gf_eliminate([list(row) for row in matrix])
    return rank


def gf_mat_det(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant over the field (zero iff singular)."""
    m = [list(row) for row in matrix]
    n = len(m)
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]  # swaps don't change sign in char 2
        det = gf_mul(det, m[col][col])
        inv_p = gf_inv(m[col][col])
        for r in range(col + 1, n):
            if m[r][col]:
                factor = gf_mul(m[r][col], inv_p)
                m[r] = [v ^ gf_mul(factor, p) for v, p in zip(m[r], m[col])]
    return det


def _gf_solve(matrix: Sequence[Sequence[int]], rhs: Sequence[int]) -> list[int]:
    n = len(rhs)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    reduced, rank = _gf_eliminate(aug)
    if rank < n:
        raise ValueError("singular system")
    # Reduced rows are in echelon order with unit pivots; read the solution off
    # the augmented column after matching each row to its pivot column.
    x = [0] * n
    for row in reduced[:rank]:
        col = next(c for c in range(n) if row[c])
        x[col] = row[n]
    return x


@dataclass(frozen=True)
class SecureCode:
    """Invertible r x r encoding matrix over GF(256) with a two-path split.

    The first ``n_l`` coded symbols travel one path, the remaining ``n_m`` the
    other; any proper subset of rows of an invertible matrix has rank below r,
    so neither relay can solve for the message.
    """

    r: int
    matrix: tuple[tuple[int, ...], ...]
    n_l: int
    n_m: int
    q: int = GF_ORDER


class InsufficientSymbolsError(ValueError):
    """Raised when decoding is attempted from one path only."""

    def __init__(self, received: int, r: int, q: int = GF_ORDER):
        self.candidates = q ** (r - received)
        super().__init__(
            f"insufficient symbols: {received} of {r} received, "
            f"{self.candidates} candidate messages remain"
        )


def generate_code(r: int, split: tuple[int, int], rng: np.random.Generator) -> SecureCode:
    """Vandermonde code on r distinct nonzero field points."""
    n_l, n_m = split
    if r < 2:
        raise ValueError("code dimension must be at least 2")
    if n_l < 1 or n_m < 1:
        raise ValueError("each path must carry at least one symbol")
    if n_l + n_m != r:
        raise ValueError("split must sum to the code dimension")
    if r > GF_ORDER - 1:
        raise ValueError("dimension exceeds the number of distinct nonzero points")
    points = rng.choice(np.arange(1, GF_ORDER), size=r, replace=False)
    matrix = []
    for x in points:
        row, acc = [], 1
        for _ in range(r):
            row.append(acc)
            acc = gf_mul(acc, int(x))
        matrix.append(tuple(row))
    code = SecureCode(r=r, matrix=tuple(matrix), n_l=n_l, n_m=n_m)
    if gf_mat_rank(code.matrix) != r:
        raise AssertionError("Vandermonde matrix on distinct points must be invertible")
    return code


def encode(code: SecureCode, x: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Y = E*X, split into the per-path symbol groups."""
    if len(x) != code.r:
        raise ValueError("message length must equal the code dimension")
    if any(not (0 <= s < code.q) for s in x):
        raise ValueError("symbols must lie in the field")
    y = []
    for row in code.matrix:
        acc = 0
        for coeff, sym in zip(row, x):
            acc ^= gf_mul(coeff, int(sym))
        y.append(acc)
    return tuple(y[:code.n_l]), tuple(y[code.n_l:])


def decode(code: SecureCode, y_l: Sequence[int] | None,
           y_m: Sequence[int] | None) -> tuple[int, ...]:
    """Recover X from the full symbol set; partial sets cannot be solved.

    With only one path's symbols the linear system is underdetermined and the
    raised error reports how many messages remain consistent (q^(r - received)).
    """
    have_l = y_l is not None
    have_m = y_m is not None
    if not (have_l and have_m):
        received = len(y_l) if have_l else (len(y_m) if have_m else 0)
        raise InsufficientSymbolsError(received, code.r, code.q)
    if len(y_l) != code.n_l or len(y_m) != code.n_m:
        raise ValueError("per-path symbol counts must match the split")
    y = list(y_l) + list(y_m)
    return tuple(_gf_solve(code.matrix, y))


def snc_delay(n_l: int, n_m: int, t_l: float, t_m: float,
              lam_msgs_per_s: float) -> float:
    """Delay of the coded split: mean path delay plus generation collection.

    A generation of r = n_l + n_m symbols is only decodable once all have
    arrived; symbols are produced at the message rate, so the last one leaves
    (r-1)/lambda after the first.
    """
    if n_l < 1 or n_m < 1:
        raise ValueError("both paths must carry at least one symbol")
    if lam_msgs_per_s <= 0:
        raise ValueError("message rate must be positive")
    r = n_l + n_m
    return (n_l * t_l + n_m * t_m) / r + (r - 1) / lam_msgs_per_s


@dataclass(frozen=True)
class MitigationParams:
    alpha: float
    beta: float
    epsilon: float = 0.1
    u_th: float | None = None  # minimum acceptable performance, -T_hat units
    g_th: float | None = None  # maximum acceptable risk
    lam_msgs_per_s: float = 100.0

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ValueError("weights must be nonnegative with a positive sum")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")


RISK_REROUTE = 1.0  # traffic handed to the path the attacker steers toward
RISK_SNC = 0.0


@dataclass(frozen=True)
class StrategyCandidate:
    kind: str  # reroute_l | stay_m | snc
    delay_s: float
    risk: float
    h: float = math.nan
    n_l: int = 0
    n_m: int = 0
    feasible: bool = True


def evaluate_h(candidate: StrategyCandidate, params: MitigationParams,
               max_delay_s: float) -> StrategyCandidate:
    """Score one candidate: h = -alpha * T/T_max - beta * R, in [-alpha-beta, 0].

    ``max_delay_s`` is the largest delay among the candidates being compared;
    the quotient keeps performance in (0, 1], comparable to risk.
    """
    if max_delay_s <= 0 or not math.isfinite(max_delay_s):
        raise ValueError("normalizer must be positive and finite")
    t_hat = candidate.delay_s / max_delay_s
    h = -params.alpha * t_hat - params.beta * candidate.risk
    return StrategyCandidate(candidate.kind, candidate.delay_s, candidate.risk,
                             h, candidate.n_l, candidate.n_m, candidate.feasible)


def _best_snc_split(t_l: float, t_m: float, lam: float,
                    search_limit: int) -> tuple[int, int, float]:
    best = (1, 1, snc_delay(1, 1, t_l, t_m, lam))
    for r in range(2, search_limit + 1):
        for n_l in range(1, r):
            d = snc_delay(n_l, r - n_l, t_l, t_m, lam)
            if d < best[2] - 1e-15:
                best = (n_l, r - n_l, d)
    return best


def choose_strategy(t_l: float, t_m: float, params: MitigationParams,
                    snc_search_limit: int = 16) -> StrategyCandidate:
    """Best of {reroute, stay, best coded split} under the h score.

    When performance/risk bounds are set, candidates violating them are
    excluded; if nothing survives, the least-violating candidate is returned
    with ``feasible`` cleared.
    """
    if not (math.isfinite(t_l) and math.isfinite(t_m)):
        raise ValueError("both path delays must be finite")
    n_l, n_m, t_snc = _best_snc_split(t_l, t_m, params.lam_msgs_per_s, snc_search_limit)
    raw = [
        StrategyCandidate("reroute_l", t_l, RISK_REROUTE),
        StrategyCandidate("stay_m", t_m, params.epsilon),
        StrategyCandidate("snc", t_snc, RISK_SNC, n_l=n_l, n_m=n_m),
    ]
    t_max = max(c.delay_s for c in raw)
    scored = [evaluate_h(c, params, t_max) for c in raw]

    def violation(c: StrategyCandidate) -> float:
        v = 0.0
        if params.u_th is not None:
            u = -c.delay_s / t_max
            v += max(0.0, params.u_th - u)
        if params.g_th is not None:
            v += max(0.0, c.risk - params.g_th)
        return v

    feasible = [c for c in scored if violation(c) <= 0.0]
    if feasible:
        return max(feasible, key=lambda c: c.h)
    least = min(scored, key=violation)
    return StrategyCandidate(least.kind, least.delay_s, least.risk, least.h,
                             least.n_l, least.n_m, feasible=False)
