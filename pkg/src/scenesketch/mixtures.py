"""Bivariate Gaussian mixture heads: parameter extraction, likelihood, sampling.

Shared by the layout composer (position and size heads) and the stroke
generator (pen-offset head).  Raw head outputs are laid out per step as
``[pi_logits | mu_x | mu_y | log sigma_x | log sigma_y | rho_raw]`` with
``m`` values per block; sigmas go through ``exp`` and the correlation
through a guarded ``tanh`` so mixtures are always well-formed.

Temperature convention: discrete choices divide logits by ``t`` before the
softmax, Gaussians scale their standard deviations by ``sqrt(t)``, and
``t = 0`` is the deterministic limit (argmax weight, mean offsets).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import Tensor, ops

__all__ = ["RHO_GUARD", "MdnParams", "mdn_from_raw", "mdn_nll",
           "sequence_cross_entropy", "sample_categorical", "sample_bivariate",
           "mdn_step_arrays"]

# Keeps |rho| strictly below 1 so 1 - rho^2 never underflows to zero.
RHO_GUARD = 1.0 - 1e-6

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class MdnParams:
    """Mixture parameters, one set of ``M`` components per (batch, step)."""

    pi_logits: Tensor   # (B, T, M)
    pi: Tensor          # (B, T, M) softmax of logits
    mu_x: Tensor        # (B, T, M)
    mu_y: Tensor
    sigma_x: Tensor     # positive
    sigma_y: Tensor
    rho: Tensor         # in (-1, 1)


def mdn_from_raw(raw: Tensor, n_mixtures: int) -> MdnParams:
    """Split a raw head output (…, 6*M) into constrained mixture parameters."""
    m = n_mixtures
    pi_logits = ops.slice_axis(raw, -1, 0, m)
    mu_x = ops.slice_axis(raw, -1, m, 2 * m)
    mu_y = ops.slice_axis(raw, -1, 2 * m, 3 * m)
    sigma_x = ops.exp(ops.slice_axis(raw, -1, 3 * m, 4 * m))
    sigma_y = ops.exp(ops.slice_axis(raw, -1, 4 * m, 5 * m))
    rho = ops.tanh(ops.slice_axis(raw, -1, 5 * m, 6 * m)) * ops.wrap(RHO_GUARD)
    return MdnParams(pi_logits=pi_logits, pi=ops.softmax(pi_logits, axis=-1),
                     mu_x=mu_x, mu_y=mu_y, sigma_x=sigma_x, sigma_y=sigma_y,
                     rho=rho)


def _tile_last(values: np.ndarray, m: int) -> np.ndarray:
    """(B, T) -> (B, T, m) constant, repeated along a new last axis."""
    return np.repeat(values[:, :, None], m, axis=2)


def mdn_nll(mdn: MdnParams, targets: np.ndarray, mask: np.ndarray) -> Tensor:
    """Summed negative log-likelihood of 2-d targets under the mixture.

    ``targets`` is (B, T, 2); ``mask`` is (B, T).  Per masked step the
    contribution is −log Σ_m π_m N(target; μ_m, σ_m, ρ_m); the result is
    the sum over masked steps and batch rows.
    """
    m = mdn.mu_x.shape[-1]
    tx = ops.constant(_tile_last(targets[:, :, 0], m))
    ty = ops.constant(_tile_last(targets[:, :, 1], m))

    dx = (tx - mdn.mu_x) / mdn.sigma_x
    dy = (ty - mdn.mu_y) / mdn.sigma_y
    one = ops.wrap(1.0)
    one_minus_rho2 = one - mdn.rho * mdn.rho
    z = dx * dx + dy * dy - ops.wrap(2.0) * mdn.rho * dx * dy

    log_norm = (ops.wrap(-_LOG_2PI)
                - ops.log(mdn.sigma_x)
                - ops.log(mdn.sigma_y)
                - ops.wrap(0.5) * ops.log(one_minus_rho2)
                - z / (ops.wrap(2.0) * one_minus_rho2))
    # log-softmax of the mixture logits; logits here stay far from the
    # overflow regime, so the direct composition is exact enough.
    log_pi = ops.log(ops.softmax(mdn.pi_logits, axis=-1))
    log_mix = ops.logsumexp(log_pi + log_norm, axis=-1)  # (B, T)
    return ops.neg(ops.sum_(log_mix * ops.constant(mask)))


def sequence_cross_entropy(logits: Tensor, targets: np.ndarray,
                           mask: np.ndarray) -> Tensor:
    """Summed CE of integer targets (B, T) under logits (B, T, C)."""
    b, t, c = logits.shape
    onehot = np.zeros((b, t, c))
    rows, cols = np.indices((b, t))
    onehot[rows, cols, targets] = 1.0
    log_probs = ops.log(ops.softmax(logits, axis=-1))
    picked = ops.sum_(log_probs * ops.constant(onehot), axis=-1)  # (B, T)
    return ops.neg(ops.sum_(picked * ops.constant(mask)))


def sample_categorical(logits: np.ndarray, temperature: float,
                       rng: np.random.Generator,
                       forbidden: Sequence[int] = ()) -> int:
    """Temperature-scaled draw from unnormalized logits (argmax at t = 0)."""
    logits = logits.astype(np.float64).copy()
    for idx in forbidden:
        logits[idx] = -np.inf
    if temperature <= 0.0:
        return int(np.argmax(logits))
    scaled = logits / temperature
    scaled -= scaled.max()
    probs = np.exp(scaled)
    probs /= probs.sum()
    return int(rng.choice(len(probs), p=probs))


def sample_bivariate(mdn_step: dict[str, np.ndarray], temperature: float,
                     rng: np.random.Generator) -> tuple[float, float]:
    """Draw one (u, v) pair from per-step mixture arrays of shape (M,)."""
    comp = sample_categorical(mdn_step["pi_logits"], temperature, rng)
    mu_x = mdn_step["mu_x"][comp]
    mu_y = mdn_step["mu_y"][comp]
    if temperature <= 0.0:
        return float(mu_x), float(mu_y)
    sx = mdn_step["sigma_x"][comp] * np.sqrt(temperature)
    sy = mdn_step["sigma_y"][comp] * np.sqrt(temperature)
    rho = mdn_step["rho"][comp]
    z1, z2 = rng.standard_normal(2)
    u = mu_x + sx * z1
    v = mu_y + sy * (rho * z1 + np.sqrt(1.0 - rho * rho) * z2)
    return float(u), float(v)


def mdn_step_arrays(mdn: MdnParams, row: int, step: int) -> dict[str, np.ndarray]:
    """Numpy views of one step's mixture parameters, for sampling."""
    return {name: getattr(mdn, name).data[row, step]
            for name in ("pi_logits", "mu_x", "mu_y", "sigma_x", "sigma_y", "rho")}
