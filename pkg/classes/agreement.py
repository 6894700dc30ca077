import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from classes.numerics import ContractError

# Configure the logging module
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

BOUND_SLACK = 1e-12


def _distribution(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ContractError(f"{name} must be a non-empty vector, got shape {p.shape}")
    if np.any(p < 0.0):
        raise ContractError(f"{name} has negative entries")
    return p


def hellinger_sq(p, q) -> float:
    """
    Squared Hellinger distance 1/2 * sum_i (sqrt(p_i) - sqrt(q_i))^2.

    Raises:
        ContractError: If either distribution has negative entries or the shapes differ.
    """
    p = _distribution(p, "p")
    q = _distribution(q, "q")
    if p.shape != q.shape:
        raise ContractError(f"shapes {p.shape} and {q.shape} differ")
    return float(0.5 * np.sum((np.sqrt(p) - np.sqrt(q)) ** 2))


def kl_div(g, p) -> float:
    """
    KL divergence D(g || p) with 0 log 0 = 0; +inf when g_i > 0 and p_i = 0.
    """
    g = _distribution(g, "g")
    p = _distribution(p, "p")
    support = g > 0.0
    if np.any(p[support] == 0.0):
        return math.inf
    return float(np.sum(g[support] * np.log(g[support] / p[support])))


@dataclass
class AgreementBoundReport:
    """
    Every link of the chain

    H^2(p, q) <= sqrt(2) H(p, q) <= sqrt(2) (H(p, g) + H(q, g))
              <= 2 sqrt(H^2(p, g) + H^2(q, g)) <= 2 sqrt(D(g||p) + D(g||q))
    """
    h2: float
    sqrt2_h: float
    triangle: float
    hellinger_rhs: float
    rhs: float
    links: Tuple[bool, bool, bool, bool]

    @property
    def holds(self) -> bool:
        return all(self.links)


def verify_agreement_bound(p, q, g) -> AgreementBoundReport:
    """
    Evaluate the agreement upper bound between two directional distributions.

    Args:
        p, q: Attention distributions of the two directions.
        g: Gold (or any reference) distribution.

    Returns:
        AgreementBoundReport: Intermediate terms and which links hold within 1e-12.
    """
    h2 = hellinger_sq(p, q)
    h2_pg = hellinger_sq(p, g)
    h2_qg = hellinger_sq(q, g)
    sqrt2_h = math.sqrt(2.0) * math.sqrt(h2)
    triangle = math.sqrt(2.0) * (math.sqrt(h2_pg) + math.sqrt(h2_qg))
    hellinger_rhs = 2.0 * math.sqrt(h2_pg + h2_qg)
    divergence = kl_div(g, p) + kl_div(g, q)
    rhs = math.inf if math.isinf(divergence) else 2.0 * math.sqrt(divergence)
    chain = (h2, sqrt2_h, triangle, hellinger_rhs, rhs)
    links = tuple(bool(chain[i] <= chain[i + 1] + BOUND_SLACK) for i in range(4))
    return AgreementBoundReport(h2, sqrt2_h, triangle, hellinger_rhs, rhs, links)


def cross_entropy_identity_check(g, p, q) -> Tuple[float, float]:
    """
    Both sides of D(g||p) + D(g||q) = 2 sum_i g_i log(g_i / sqrt(p_i q_i)).

    The right-hand side is the exact form of the agreement loss; the two values
    must coincide.

    Raises:
        ContractError: If p or q has a zero entry.
    """
    g = _distribution(g, "g")
    p = _distribution(p, "p")
    q = _distribution(q, "q")
    if np.any(p <= 0.0) or np.any(q <= 0.0):
        raise ContractError("p and q must be strictly positive")
    left = kl_div(g, p) + kl_div(g, q)
    support = g > 0.0
    right = float(2.0 * np.sum(g[support] * np.log(g[support] / np.sqrt(p[support] * q[support]))))
    return left, right
