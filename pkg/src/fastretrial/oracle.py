"""Exact analysis of tiny systems through the truncated queue-vector chain.

The joint queue vector of N1 <= 3 devices, each capped at Q, is a finite
Markov chain. Its transition matrix is built by enumerating every arrival
pattern and every equiprobable preamble-choice pattern, with the same
within-slot order as the simulator (arrivals, then transmission, then
service). The stationary distribution then gives exact mean queue lengths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from fastretrial.model import ArrivalLaw, ArrivalModel

MAX_STATES = 100_000
MAX_DEVICES = 3


class NotConverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TruncatedChain:
    n1: int
    cap: int
    l1: int
    model: ArrivalModel
    transition: sp.csr_matrix

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    def states(self) -> np.ndarray:
        """(n_states, n1) array of queue vectors, row i being state i."""
        return _decode(np.arange(self.n_states), self.n1, self.cap)

    def mean_queue(self, pi: np.ndarray) -> float:
        return float(pi @ self.states().mean(axis=1))


def _decode(idx: np.ndarray, n1: int, cap: int) -> np.ndarray:
    base = cap + 1
    out = np.empty((idx.size, n1), dtype=np.int64)
    rem = idx.copy()
    for n in range(n1):
        out[:, n] = rem % base
        rem //= base
    return out


def _encode(q: np.ndarray, cap: int) -> np.ndarray:
    base = cap + 1
    weights = base ** np.arange(q.shape[1])
    return q @ weights


@lru_cache(maxsize=None)
def success_pattern_probs(k: int, l1: int) -> dict[tuple[bool, ...], float]:
    """Distribution of which of ``k`` transmitters succeed, by enumerating
    all ``l1 ** k`` equiprobable preamble choices."""
    counts: dict[tuple[bool, ...], int] = {}
    for picks in itertools.product(range(l1), repeat=k):
        key = tuple(picks.count(p) == 1 for p in picks)
        counts[key] = counts.get(key, 0) + 1
    total = l1**k
    return {key: c / total for key, c in counts.items()}


def build_chain(n1: int, l1: int, model: ArrivalModel, cap: int = 30) -> TruncatedChain:
    if not 1 <= n1 <= MAX_DEVICES:
        raise ValueError(f"oracle supports 1..{MAX_DEVICES} devices, got {n1}")
    if model.n1 != n1:
        raise ValueError("arrival model and n1 disagree")
    if model.law is not ArrivalLaw.BERNOULLI:
        raise ValueError("the oracle enumerates Bernoulli arrivals only")
    if l1 < 1 or cap < 1:
        raise ValueError("l1 and cap must be >= 1")
    n_states = (cap + 1) ** n1
    if n_states > MAX_STATES:
        raise ValueError(f"{n_states} states exceeds the limit of {MAX_STATES}")

    q = _decode(np.arange(n_states), n1, cap)
    rows, cols, vals = [], [], []
    rates = np.array(model.rates)
    for arr in itertools.product((0, 1), repeat=n1):
        a = np.array(arr)
        p_arr = float(np.prod(np.where(a == 1, rates, 1.0 - rates)))
        if p_arr == 0.0:
            continue
        # arrivals beyond the cap are dropped
        b = np.minimum(q + a, cap)
        active = b > 0
        for mask in itertools.product((False, True), repeat=n1):
            sel = np.all(active == np.array(mask), axis=1)
            if not sel.any():
                continue
            src = np.flatnonzero(sel)
            idx = [n for n in range(n1) if mask[n]]
            for pattern, p_succ in success_pattern_probs(len(idx), l1).items():
                s = np.zeros(n1, dtype=np.int64)
                for n, ok in zip(idx, pattern):
                    s[n] = int(ok)
                dst = _encode(b[src] - s, cap)
                rows.append(src)
                cols.append(dst)
                vals.append(np.full(src.size, p_arr * p_succ))
    P = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_states, n_states),
    ).tocsr()
    P.sum_duplicates()
    return TruncatedChain(n1=n1, cap=cap, l1=l1, model=model, transition=P)


def _residual(pi: np.ndarray, P) -> float:
    return float(np.abs(P.T @ pi - pi).sum())


def stationary_distribution(
    chain: TruncatedChain | sp.spmatrix | np.ndarray,
    method: str = "power",
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Stationary row vector of a row-stochastic matrix.

    ``method="power"`` iterates ``pi <- pi P`` from ``initial`` (uniform by
    default) until the L1 residual drops below ``tol``. ``method="solve"``
    uses a sparse direct solve instead, falling back to power iteration if
    the result misses ``tol``; it suffers heavy fill-in on 3-device chains.
    """
    P = chain.transition if isinstance(chain, TruncatedChain) else sp.csr_matrix(chain)
    n = P.shape[0]
    if method not in ("solve", "power"):
        raise ValueError(f"unknown method {method!r}")
    if method == "solve":
        A = (P.T - sp.identity(n, format="csr")).tolil()
        A[0, :] = np.ones(n)
        rhs = np.zeros(n)
        rhs[0] = 1.0
        try:
            pi = spla.spsolve(A.tocsc(), rhs)
        except RuntimeError:
            pi = None
        if pi is not None and np.all(np.isfinite(pi)):
            pi = np.clip(pi, 0.0, None)
            pi /= pi.sum()
            if _residual(pi, P) < tol:
                return pi
        initial = pi if pi is not None and np.all(np.isfinite(pi)) else initial

    pi = np.full(n, 1.0 / n) if initial is None else np.asarray(initial, dtype=float) / np.sum(initial)
    PT = P.T.tocsr()
    for _ in range(max_iter):
        nxt = PT @ pi
        if np.abs(nxt - pi).sum() < tol:
            return nxt / nxt.sum()
        pi = nxt
    raise NotConverged(f"power iteration did not reach residual {tol} in {max_iter} iterations")


def exact_mean_queue(n1: int, l1: int, lam: float, cap: int = 30) -> float:
    chain = build_chain(n1, l1, ArrivalModel.uniform(n1, lam), cap)
    return chain.mean_queue(stationary_distribution(chain))
