"""Deterministic quasi-random sample points on chart domains."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.stats import qmc

from rhlab.config import get_settings
from rhlab.exceptions import BadParams, DomainExhausted
from rhlab.geometry.fields import ChartDomain, Exclusion

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

_BATCH = 256


def sample_points(
    domain: ChartDomain,
    count: int,
    seed: int,
    *,
    extra: Sequence[Exclusion] = (),
    max_rejection_ratio: float | None = None,
) -> list[FloatArray]:
    """Draw admissible points from a scrambled Halton sequence.

    Parameters
    ----------
    domain : ChartDomain
        Box and exclusions to sample from.
    count : int
        Number of points to return.
    seed : int
        Scrambling seed; equal seeds give equal point lists.
    extra : Sequence[Exclusion], default=()
        Additional exclusions applied on top of the domain's own.
    max_rejection_ratio : float | None, default=None
        Largest tolerated share of rejected draws; defaults to the configured
        value.

    Returns
    -------
    list[numpy.ndarray]
        Points in draw order.

    Raises
    ------
    DomainExhausted
        If exclusions reject too many draws.
    BadParams
        If ``count`` is below one.
    """
    if count < 1:
        raise BadParams(f"sample count must be at least 1, got {count}")
    lower = np.asarray(domain.lower, dtype=np.float64)
    upper = np.asarray(domain.upper, dtype=np.float64)
    ratio = get_settings().max_rejection_ratio if max_rejection_ratio is None else (
        max_rejection_ratio
    )
    budget = math.ceil(count / (1.0 - ratio))
    sampler = qmc.Halton(d=domain.dim, scramble=True, seed=seed)
    accepted: list[FloatArray] = []
    drawn = 0
    while len(accepted) < count and drawn < budget:
        batch = min(_BATCH, budget - drawn)
        candidates = qmc.scale(sampler.random(batch), lower, upper)
        drawn += batch
        for candidate in candidates:
            if not domain.admits(candidate):
                continue
            if any(rule.predicate(candidate) for rule in extra):
                continue
            accepted.append(np.array(candidate, dtype=np.float64))
            if len(accepted) == count:
                break
    if len(accepted) < count:
        raise DomainExhausted(
            f"only {len(accepted)} of {count} points admissible after {drawn} draws"
        )
    logger.debug(
        "sampled points",
        extra={"count": count, "drawn": drawn, "seed": seed, "dim": domain.dim},
    )
    return accepted
