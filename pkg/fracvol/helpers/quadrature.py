"""Gaussian quadrature rules shared by the numerical modules."""
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss

from fracvol.constants import HERMITE_MAX_NODES
from fracvol.helpers.errors import QuadratureError
from fracvol.helpers.typing import RealFunction

Rule = Tuple[np.ndarray, np.ndarray]


@lru_cache(maxsize=32)
def _hermite_rule(n_nodes: int) -> Rule:
    nodes, weights = hermegauss(n_nodes)
    weights = weights / np.sqrt(2.0 * np.pi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_hermite(n_nodes: int) -> Rule:
    """Return nodes and weights integrating against the standard normal density."""
    return _hermite_rule(int(n_nodes))


@lru_cache(maxsize=32)
def _legendre_rule(n_nodes: int) -> Rule:
    nodes, weights = leggauss(n_nodes)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(n_nodes: int, lower: float, upper: float) -> Rule:
    """Return Gauss-Legendre nodes and weights on [lower, upper]."""
    nodes, weights = _legendre_rule(int(n_nodes))
    half = 0.5 * (upper - lower)
    return lower + half * (nodes + 1.0), half * weights


def graded_legendre(n_nodes: int, lower: float, upper: float) -> Rule:
    """Return nodes clustered toward lower through s = lower + (upper - lower) u^2."""
    unit, weights = gauss_legendre(n_nodes, 0.0, 1.0)
    span = upper - lower
    return lower + span * unit ** 2, 2.0 * span * unit * weights


def panel_legendre(edges: Sequence[float], n_per_panel: int) -> Rule:
    """Return a composite Gauss-Legendre rule over consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    ref_nodes, ref_weights = _legendre_rule(int(n_per_panel))
    half = 0.5 * np.diff(edges)[:, None]
    nodes = edges[:-1, None] + half * (ref_nodes[None, :] + 1.0)
    weights = half * ref_weights[None, :]
    return nodes.ravel(), weights.ravel()


def gaussian_expectation(
    func: RealFunction,
    tolerance: float,
    n_nodes: int,
    max_nodes: int = HERMITE_MAX_NODES,
) -> Tuple[float, int]:
    """
    Return E[func(Z)] for standard normal Z with node doubling.

    Nodes double from n_nodes until two successive estimates differ by at most
    tolerance; returns the estimate and the node count used.
    """
    nodes, weights = gauss_hermite(n_nodes)
    previous = float(np.dot(weights, func(nodes)))
    while n_nodes < max_nodes:
        n_nodes *= 2
        nodes, weights = gauss_hermite(n_nodes)
        current = float(np.dot(weights, func(nodes)))
        if abs(current - previous) <= tolerance:
            return current, n_nodes
        previous = current
    raise QuadratureError(
        f"Gaussian expectation did not converge to {tolerance:.1e} with {max_nodes} nodes"
    )
