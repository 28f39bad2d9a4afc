"""Compiled run loop.

Mirrors :func:`fastretrial.model.step_slot` and
:func:`fastretrial.controller.update` draw for draw, so a run driven here
is bit-identical to stepping the pure-Python model with the same seed.
"""

import math

import numpy as np
from numba import njit

Z_MARGIN = 1e-6


@njit(cache=True)
def _grow(buf, head, size, n1):
    cap = buf.shape[1]
    new = np.empty((n1, 2 * cap), dtype=np.int64)
    for n in range(n1):
        for i in range(size[n]):
            new[n, i] = buf[n, (head[n] + i) % cap]
        head[n] = 0
    return new


@njit(cache=True)
def simulate(rng, rates, poisson, horizon, warmup, l1_fixed, adaptive, z0, mu, l_total, floor):
    n1 = rates.shape[0]
    k1_out = np.zeros(horizon, dtype=np.int64)
    succ_out = np.zeros(horizon, dtype=np.int64)
    arr_out = np.zeros(horizon, dtype=np.int64)
    l1_out = np.zeros(horizon, dtype=np.int64)
    z_out = np.full(horizon, np.nan)
    meanq_out = np.zeros(horizon)
    maxq_out = np.zeros(horizon, dtype=np.int64)
    served = np.zeros(n1, dtype=np.int64)
    delay_hist = np.zeros(64, dtype=np.int64)

    buf = np.zeros((n1, 16), dtype=np.int64)
    head = np.zeros(n1, dtype=np.int64)
    size = np.zeros(n1, dtype=np.int64)
    active = np.empty(n1, dtype=np.int64)
    choice = np.empty(n1, dtype=np.int64)
    counts = np.zeros(max(l1_fixed, l_total) + 1, dtype=np.int64)

    z = z0
    if adaptive:
        l1 = int(math.ceil(max(1.0, 1.0 / (1.0 - z))))
        l1 = min(max(l1, floor), l_total - 1)
    else:
        l1 = l1_fixed

    for t in range(horizon):
        # arrivals, device order
        n_arr = 0
        for n in range(n1):
            if poisson:
                a = rng.poisson(rates[n])
            else:
                a = 1 if rng.random() < rates[n] else 0
            if a > 0:
                while size[n] + a > buf.shape[1]:
                    buf = _grow(buf, head, size, n1)
                cap = buf.shape[1]
                for _ in range(a):
                    buf[n, (head[n] + size[n]) % cap] = t
                    size[n] += 1
                n_arr += a

        # preamble selection, ascending active index
        k1 = 0
        for n in range(n1):
            if size[n] > 0:
                active[k1] = n
                k1 += 1
        for i in range(k1):
            c = rng.integers(1, l1 + 1)
            choice[i] = c
            counts[c] += 1

        n_succ = 0
        cap = buf.shape[1]
        for i in range(k1):
            if counts[choice[i]] == 1:
                n = active[i]
                d = t - buf[n, head[n]]
                head[n] = (head[n] + 1) % cap
                size[n] -= 1
                n_succ += 1
                if t >= warmup:
                    served[n] += 1
                    if d >= delay_hist.shape[0]:
                        grown = np.zeros(2 * d + 1, dtype=np.int64)
                        grown[: delay_hist.shape[0]] = delay_hist
                        delay_hist = grown
                    delay_hist[d] += 1
        for i in range(k1):
            counts[choice[i]] = 0

        tot = 0
        mx = 0
        for n in range(n1):
            tot += size[n]
            if size[n] > mx:
                mx = size[n]
        k1_out[t] = k1
        succ_out[t] = n_succ
        arr_out[t] = n_arr
        l1_out[t] = l1
        meanq_out[t] = tot / n1
        maxq_out[t] = mx

        if adaptive:
            z_out[t] = z
            z = z + (mu / n1) * (k1 * math.exp(-k1 / l1) - n1 * z ** float(n1 - 1))
            z = min(max(z, 0.0), 1.0 - Z_MARGIN)
            l1 = int(math.ceil(max(1.0, 1.0 / (1.0 - z))))
            l1 = min(max(l1, floor), l_total - 1)

    return k1_out, succ_out, arr_out, l1_out, z_out, meanq_out, maxq_out, delay_hist, served, size.copy()
