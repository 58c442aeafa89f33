"""Diffusion channel kernels.

Green's function of free-space diffusion in m dimensions and the cumulative
response at a fixed horizon for a source emitting at constant unit rate.
The cumulative response is computed two independent ways: adaptive
quadrature (`cumulative_response`) and closed forms built on the in-repo
special functions (`closed_form_oracle`).
"""

import math
from dataclasses import dataclass

from .errors import DivergenceError, DomainError
from .special import erfc, expint_e1


@dataclass(frozen=True)
class MediumParams:
    """Physical constants of the diffusive medium.

    dimension: 1, 2 or 3.
    diffusion_coeff: D, area per unit time.
    node_radius: clamp distance for a node sensing its own emissions.
    """

    dimension: int
    diffusion_coeff: float
    node_radius: float

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if self.diffusion_coeff <= 0:
            raise DomainError("diffusion coefficient must be positive")
        if self.node_radius <= 0:
            raise DomainError("node radius must be positive")


@dataclass(frozen=True)
class KernelEval:
    value: float
    estimated_error: float


def green_eval(distance, t, medium):
    """Point-source impulse response at the given distance and elapsed time."""
    if t <= 0:
        raise DomainError("impulse response undefined for t <= 0")
    if distance < 0:
        raise DomainError("distance must be nonnegative")
    d = medium.diffusion_coeff
    m = medium.dimension
    value = (4.0 * math.pi * d * t) ** (-0.5 * m) * math.exp(
        -distance * distance / (4.0 * d * t)
    )
    return KernelEval(value=value, estimated_error=0.0)


# 15-point Gauss-Legendre nodes/weights on [-1, 1]; interior points only,
# so the integrand is never evaluated at the (possibly singular) endpoint.
_GL_NODES = (
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601700, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0, 0.2011940939974345, 0.3941513470775634,
    0.5709721726085388, 0.7244177313601700, 0.8482065834104272,
    0.9372733924007060, 0.9879925180204854,
)
_GL_WEIGHTS = (
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173,
)


def _gl15(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * sum(w * f(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS))


def _adaptive(f, a, b, tol, depth=0):
    """Recursive bisection; accepted when the two-panel refinement agrees."""
    whole = _gl15(f, a, b)
    mid = 0.5 * (a + b)
    left = _gl15(f, a, mid)
    right = _gl15(f, mid, b)
    err = abs(left + right - whole)
    if err <= tol or depth >= 40:
        return left + right, err
    lv, le = _adaptive(f, a, mid, 0.5 * tol, depth + 1)
    rv, re = _adaptive(f, mid, b, 0.5 * tol, depth + 1)
    return lv + rv, le + re


def cumulative_response(distance, t0, medium, rel_tol=1e-12):
    """Concentration at `distance` and time t0 per unit constant emission rate.

    Integrates the Green's function over emission times in [0, t0].  The
    substitution s = t0 * v**2 regularizes the s -> 0 endpoint: the
    transformed integrand is bounded on (0, 1] for every supported case.
    """
    if t0 <= 0:
        raise DomainError("horizon t0 must be positive")
    if distance < 0:
        raise DomainError("distance must be nonnegative")
    m = medium.dimension
    d = medium.diffusion_coeff
    if distance == 0.0 and m >= 2:
        raise DivergenceError(
            f"cumulative response diverges at zero distance for m={m}; "
            "clamp self-distance to node_radius"
        )

    x2 = distance * distance
    pref = (4.0 * math.pi * d * t0) ** (-0.5 * m)

    def integrand(v):
        # 2 * t0 * v * g(distance, t0 * v^2); v in (0, 1]
        vm = v ** (1 - m)  # v * v^-m
        arg = x2 / (4.0 * d * t0 * v * v)
        if arg > 745.0:
            return 0.0
        return 2.0 * t0 * pref * vm * math.exp(-arg)

    rough = abs(_gl15(integrand, 0.0, 1.0))
    # the absolute floor stops the subdivision from chasing relative accuracy
    # on integrals that underflow toward zero (very distant node pairs)
    tol = rel_tol * max(rough, 1e-60)
    value, err = _adaptive(integrand, 0.0, 1.0, tol)
    return KernelEval(value=value, estimated_error=err)


def closed_form_oracle(distance, t0, medium):
    """Closed-form cumulative response via erfc / E1, independent of quadrature.

    m=1: sqrt(t0/(pi D)) e^{-x^2/(4 D t0)} - x/(2D) erfc(x / (2 sqrt(D t0)))
    m=2: E1(x^2 / (4 D t0)) / (4 pi D)
    m=3: erfc(x / (2 sqrt(D t0))) / (4 pi D x)
    """
    if t0 <= 0:
        raise DomainError("horizon t0 must be positive")
    if distance < 0:
        raise DomainError("distance must be nonnegative")
    m = medium.dimension
    d = medium.diffusion_coeff
    if distance == 0.0 and m >= 2:
        raise DivergenceError("closed form diverges at zero distance for m >= 2")

    x = distance
    if m == 1:
        value = math.sqrt(t0 / (math.pi * d)) * math.exp(
            -x * x / (4.0 * d * t0)
        ) - x / (2.0 * d) * erfc(x / (2.0 * math.sqrt(d * t0)))
    elif m == 2:
        value = expint_e1(x * x / (4.0 * d * t0)) / (4.0 * math.pi * d)
    else:
        value = erfc(x / (2.0 * math.sqrt(d * t0))) / (4.0 * math.pi * d * x)
    return KernelEval(value=value, estimated_error=1e-14 * abs(value))
