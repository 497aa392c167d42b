"""Univariate and bivariate standard normal primitives.

The bivariate CDF is evaluated through the correlation-integral identity

    Psi(u, v, rho) = Phi(u) Phi(v) + int_0^rho psi(u, v, r) dr

with the substitution r = sin(theta), which removes the 1/sqrt(1 - r^2)
singularity of the density at |r| -> 1.  The theta-integral is computed with
composite Gauss-Legendre quadrature whose panel count is doubled until the
estimate stabilises, so every call is accurate to roughly 1e-14.

Infinite cutoffs (``math.inf`` / ``-math.inf``) are accepted wherever a
bound is expected; they mark the outermost categories of a discretized
variable.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DegenerateDistributionError, DomainError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_INV_2PI = 1.0 / (2.0 * math.pi)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
# map nodes from [-1, 1] onto [0, 1]
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS

_QUAD_TOL = 1e-14
_MAX_PANELS = 1 << 12


def std_normal_pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


def std_normal_cdf(x):
    """Standard normal CDF; accepts +/-inf."""
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open unit interval.

    Raises:
        DomainError: if any ``p`` is outside (0, 1).
    """
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise DomainError(f"quantile needs 0 < p < 1, got {p!r}")
    x = special.ndtri(p)
    # one Newton step against the CDF cleans up the last few ulps
    x = x - (special.ndtr(x) - p) / (_INV_SQRT_2PI * np.exp(-0.5 * x * x))
    return float(x) if x.ndim == 0 else x


def bvn_pdf(u, v, rho):
    """Standard bivariate normal density with correlation ``rho``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) >= 1.0):
        raise DegenerateDistributionError("bivariate density undefined for |rho| = 1")
    det = 1.0 - rho * rho
    q = (u * u - 2.0 * rho * u * v + v * v) / det
    out = _INV_2PI / np.sqrt(det) * np.exp(-0.5 * q)
    return float(out) if out.ndim == 0 else out


def _theta_integrand(u, v, t, span):
    """psi(u, v, sin th) cos th with th = t * span, stable near th = +/-pi/2."""
    theta = t * span
    s = np.sin(theta)
    c2 = np.cos(theta) ** 2
    uv = u * v
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # u^2 + v^2 - 2uv s = (u - v)^2 + 2uv(1 - s) = (u + v)^2 - 2uv(1 + s)
        pos = -0.5 * (u - v) ** 2 / c2 - uv / (1.0 + s)
        neg = -0.5 * (u + v) ** 2 / c2 + uv / (1.0 - s)
        expo = np.where(s >= 0.0, pos, neg)
        expo = np.where(np.isnan(expo), -np.inf, expo)
    return _INV_2PI * np.exp(expo)


def _composite_gl(u, v, span, panels):
    edges = np.arange(panels, dtype=float) / panels
    t = (edges[None, :, None] + _GL_NODES[None, None, :] / panels)
    vals = _theta_integrand(u[:, None, None], v[:, None, None], t, span[:, None, None])
    return span * (vals * _GL_WEIGHTS).sum(axis=(1, 2)) / panels


def _finite_increment(u, v, rho):
    """Psi(u,v,rho) - Psi(u,v,0) for finite u, v and |rho| < 1 (1-D arrays)."""
    span = np.arcsin(rho)
    out = np.zeros_like(span)
    todo = np.flatnonzero(span != 0.0)
    if todo.size == 0:
        return out
    panels = 1
    prev = _composite_gl(u[todo], v[todo], span[todo], panels)
    while todo.size and panels < _MAX_PANELS:
        panels *= 2
        cur = _composite_gl(u[todo], v[todo], span[todo], panels)
        done = np.abs(cur - prev) <= _QUAD_TOL
        out[todo[done]] = cur[done]
        todo, prev = todo[~done], cur[~done]
    out[todo] = prev
    return out


def bvn_cdf_increment(u, v, rho):
    """``Psi(u, v, rho) - Psi(u, v, 0)``, the integral of psi over [0, rho].

    Computed directly (not as a difference of two CDFs), so small covariances
    of discretized variables keep full relative accuracy.
    """
    u, v, rho = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u, v, rho)))
    shape = u.shape
    u, v, rho = u.ravel(), v.ravel(), rho.ravel()
    if np.any(np.abs(rho) > 1.0) or np.any(np.isnan(rho)):
        raise DomainError("correlation must lie in [-1, 1]")
    out = np.zeros(u.shape)
    finite = np.isfinite(u) & np.isfinite(v)
    edge = finite & (np.abs(rho) == 1.0)
    inner = finite & ~edge
    if inner.any():
        out[inner] = _finite_increment(u[inner], v[inner], rho[inner])
    if edge.any():
        fu, fv = special.ndtr(u[edge]), special.ndtr(v[edge])
        full = np.where(
            rho[edge] > 0,
            np.minimum(fu, fv),
            np.maximum(fu + fv - 1.0, 0.0),
        )
        out[edge] = full - fu * fv
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def bvn_cdf(u, v, rho):
    """P(U <= u, V <= v) for a standard bivariate normal with correlation rho."""
    base = special.ndtr(np.asarray(u, dtype=float)) * special.ndtr(np.asarray(v, dtype=float))
    out = np.clip(base + np.asarray(bvn_cdf_increment(u, v, rho)), 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def bvn_rect_prob(lo_u, hi_u, lo_v, hi_v, rho):
    """Probability of the rectangle (lo_u, hi_u] x (lo_v, hi_v].

    Raises:
        DomainError: if a lower bound exceeds its upper bound.
    """
    lo_u, hi_u, lo_v, hi_v = (np.asarray(a, dtype=float) for a in (lo_u, hi_u, lo_v, hi_v))
    if np.any(lo_u > hi_u) or np.any(lo_v > hi_v):
        raise DomainError("rectangle bounds are inverted")
    us = np.stack(np.broadcast_arrays(hi_u, lo_u, hi_u, lo_u))
    vs = np.stack(np.broadcast_arrays(hi_v, hi_v, lo_v, lo_v))
    psi = bvn_cdf(us, vs, rho)
    out = np.maximum(psi[0] - psi[1] - psi[2] + psi[3], 0.0)
    return float(out) if out.ndim == 0 else out
