"""Brute-force reference integrator for posterior shrinkage moments.

Composite Simpson with ten million uniform nodes on the transformed unit
interval (z = sigmoid(pi * sinh(u)), |u| <= 6).  Deliberately naive: fixed
nodes, one rule, no adaptivity, evaluated in chunks.  Used to freeze golden
values that the adaptive engine is checked against; it shares nothing with
the engine's panel/refinement logic.
"""

from __future__ import annotations

import math

import numpy as np

SIMPSON_NODES = 10_000_001  # odd => valid composite Simpson node count
U_MAX = 6.0
_CHUNK = 500_000


def _log_integrand(u, family, x, tau, powers):
    g = 0.5 * math.pi * np.sinh(u)
    two_g = 2.0 * g
    log_k = -np.logaddexp(0.0, -two_g)
    log_omk = -np.logaddexp(0.0, two_g)
    kappa = np.exp(log_k)
    base = (
        (family.a - 0.5) * log_k
        + (-family.a - 1.0) * log_omk
        + family.log_L(log_omk - log_k - 2.0 * math.log(tau))
        - 0.5 * x * x * kappa
        + np.log(math.pi * np.cosh(u))
        + log_k
        + log_omk
    )
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        rows = [np.exp(base + p_k * log_k + p_w * log_omk) for (p_k, p_w) in powers]
    return np.nan_to_num(np.stack(rows), nan=0.0, neginf=0.0)


def simpson_moments(family, x, tau, nodes: int = SIMPSON_NODES):
    """Return (E kappa, E kappa^2, E(1-kappa), E(1-kappa)^2, mass)."""
    if nodes % 2 == 0:
        raise ValueError("composite Simpson needs an odd node count")
    h = 2.0 * U_MAX / (nodes - 1)
    powers = [(0, 0), (1, 0), (2, 0), (0, 1), (0, 2)]
    totals = np.zeros(len(powers))
    for start in range(0, nodes, _CHUNK):
        stop = min(start + _CHUNK, nodes)
        idx = np.arange(start, stop)
        u = -U_MAX + h * idx
        vals = _log_integrand(u, family, x, tau, powers)
        weights = np.where(idx % 2 == 1, 4.0, 2.0)
        weights[idx == 0] = 1.0
        weights[idx == nodes - 1] = 1.0
        totals += vals @ weights
    totals *= h / 3.0
    mass = totals[0]
    return (
        totals[1] / mass,
        totals[2] / mass,
        totals[3] / mass,
        totals[4] / mass,
        mass,
    )


def simpson_tail_prob(family, x, tau, eta, nodes: int = SIMPSON_NODES):
    """Pr(kappa > eta | x, tau) by Simpson on each side of the cut."""
    g_eta = 0.5 * math.log(eta / (1.0 - eta))
    u_eta = math.asinh(g_eta / (0.5 * math.pi))

    def piece(lo, hi):
        if nodes % 2 == 0:
            raise ValueError("composite Simpson needs an odd node count")
        h = (hi - lo) / (nodes - 1)
        total = 0.0
        for start in range(0, nodes, _CHUNK):
            stop = min(start + _CHUNK, nodes)
            idx = np.arange(start, stop)
            u = lo + h * idx
            vals = _log_integrand(u, family, x, tau, [(0, 0)])[0]
            weights = np.where(idx % 2 == 1, 4.0, 2.0)
            weights[idx == 0] = 1.0
            weights[idx == nodes - 1] = 1.0
            total += float(vals @ weights)
        return total * h / 3.0

    upper = piece(u_eta, U_MAX)
    lower = piece(-U_MAX, u_eta)
    return upper / (upper + lower)
