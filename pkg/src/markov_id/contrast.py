"""Spectral contrast between transition matrices and its divergence-rate twin.

The contrast of two row-stochastic matrices P, P' on a common state space is
1 minus the spectral radius of the entrywise square root of their Hadamard
product. It is zero iff the matrices agree on every state reachable in the
product sense, and it equals 1 - exp(-r/2) where r is the per-step limit of
the order-1/2 Renyi divergence between the two path laws.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf, log1p

import numpy as np

from .markov_core import TransitionMatrix, spectral_radius, strongly_connected
from .errors import IncompatibleStateCountError


@dataclass(frozen=True)
class ContrastValue:
    """Contrast in [0, 1] together with its divergence-rate form.

    `product_irreducible` is False when the support intersection of the two
    matrices is not strongly connected; the contrast is still well defined
    but no longer separates unequal matrices.
    """

    k: float
    renyi_rate: float
    product_irreducible: bool = True


def contrast(P: TransitionMatrix, P2: TransitionMatrix) -> ContrastValue:
    """Contrast K(P, P') = 1 - rho(sqrt(P (.) P')) for same-size matrices."""
    if P.state_count != P2.state_count:
        raise IncompatibleStateCountError(
            f"matrices act on {P.state_count} and {P2.state_count} states"
        )
    geo = np.sqrt(P.matrix * P2.matrix)
    rho = spectral_radius(geo)
    k = min(max(1.0 - rho, 0.0), 1.0)
    rate = inf if k >= 1.0 else -2.0 * log1p(-k)
    return ContrastValue(
        k=k,
        renyi_rate=rate,
        product_irreducible=strongly_connected(geo > 0),
    )


def renyi_half(mu: np.ndarray, nu: np.ndarray) -> float:
    """Order-1/2 Renyi divergence -2 log sum_x sqrt(mu(x) nu(x)).

    Infinite when the supports are disjoint. Inputs are probability vectors
    over a common finite alphabet.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise IncompatibleStateCountError("distributions live on different alphabets")
    affinity = float(np.sqrt(mu * nu).sum())
    if affinity <= 0.0:
        return inf
    # float roundoff can push the affinity of identical laws past 1
    return max(-2.0 * float(np.log(affinity)), 0.0)


def renyi_rate_via_paths(P: TransitionMatrix, P2: TransitionMatrix, n: int) -> float:
    """Divergence between length-n stationary path laws, scaled by 1/n.

    Exact enumeration; the two chains use their own stationary initial laws.
    Guarded by the path-table size cap, so only for small n and state counts.
    This converges to the contrast's `renyi_rate` as n grows.
    """
    if n < 1:
        raise ValueError("need at least one step, n >= 1")
    from .paths import path_distribution  # deferred: paths imports this module

    q1 = path_distribution(P, n)
    q2 = path_distribution(P2, n)
    return renyi_half(q1.probs, q2.probs) / n
