"""Synthetic metric families for the convergence experiments.

Two kinds are provided.  The *hyperbolic* family is constantly round: every
unwarped cut is the round circle metric, so it is a fixed point of the
whole pipeline.  The *bump* family perturbs the round metric by a
compactly supported C^2 profile riding at a fixed offset from the family
index:

    cut(lam, rho) = sigma + amplitude * bump(rho - lam) * T

with bump supported on [support_start, support_end] and T a fixed
symmetric direction field on the circle.  The family is round at every
radius lam + b with b <= support_start (so it is hyperbolic around the
origin with that bound), and since the cuts depend only on rho - lam the
diagonal family is stationary: its cut limit at b is exactly
sigma + amplitude * bump(b) * T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from . import fields as mf
from .cutlimits import MetricFamily

DIRECTION_TAGS = ("uniform", "cos2")
PROFILE_TAGS = ("quintic",)


def quintic_smoothstep(u):
    """The C^2 step 10u^3 - 15u^4 + 6u^5 on [0, 1], clamped outside; its
    first and second derivatives vanish at both ends.  The output is
    clipped to [0, 1], where the polynomial lives up to roundoff."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return np.clip(u ** 3 * (10.0 + u * (-15.0 + 6.0 * u)), 0.0, 1.0)


def bump_profile(x, start, end):
    """C^2 bump supported exactly on [start, end]: quintic smoothstep up to
    1 at the midpoint and back down; identically 0.0 outside the support."""
    x = np.asarray(x, dtype=float)
    mid = 0.5 * (start + end)
    up = quintic_smoothstep((x - start) / (mid - start))
    down = quintic_smoothstep((end - x) / (end - mid))
    out = np.where(x <= mid, up, down)
    return float(out) if out.ndim == 0 else out


def direction_field(atlas, tag):
    """The perturbation direction T on the circle: "uniform" is the round
    form itself, "cos2" modulates by cos^2 of the angle (so the block
    varies over the circle)."""
    if tag == "uniform":
        fn = lambda chart, x: np.ones(np.shape(x) + (1, 1))
    elif tag == "cos2":
        def fn(chart, x):
            ang = atlas.angle_of(chart, x)
            return (np.cos(ang) ** 2)[..., None, None]
    else:
        raise DomainError(f"unknown direction tag {tag!r}")
    return mf.SphereMetricField.from_function(atlas, fn, name=f"T-{tag}",
                                              is_metric=False)


@dataclass(frozen=True)
class FamilySpec:
    """Construction recipe for a synthetic family."""

    kind: str = "bump"
    support_start: float = -1.0
    support_end: float = 1.0
    amplitude: float = 0.05
    direction: str = "uniform"
    profile: str = "quintic"

    def __post_init__(self):
        if self.kind not in ("hyperbolic", "bump"):
            raise DomainError(f"unknown family kind {self.kind!r}")
        if self.kind == "bump":
            if not self.support_start < self.support_end:
                raise DomainError("bump support must be a proper interval")
            if self.direction not in DIRECTION_TAGS:
                raise DomainError(f"unknown direction tag {self.direction!r}")
            if self.profile not in PROFILE_TAGS:
                raise DomainError(f"unknown profile tag {self.profile!r}")

    def build(self, atlas=None):
        atlas = atlas or mf.CIRCLE_ATLAS
        if self.kind == "hyperbolic":
            return hyperbolic_family(atlas)
        return bump_family(self, atlas)


def hyperbolic_family(atlas=None):
    """The constantly round family: every cut is the round metric."""
    atlas = atlas or mf.CIRCLE_ATLAS
    sigma = mf.round_metric(atlas)

    def cut(lam, rho):
        if rho <= 0.0:
            raise DomainError("cut radius must be positive")
        return sigma

    return MetricFamily(
        sphere_dim=atlas.dim, atlas=atlas, cut=cut, lambda_min=0.5,
        hyperbolic_bound=math.inf, limit=lambda b: sigma,
        interval_bound=math.inf, family_id="hyperbolic")


def bump_family(spec, atlas=None):
    """Build the bump family from its spec, checking positivity of the
    most-perturbed cut at construction."""
    atlas = atlas or mf.CIRCLE_ATLAS
    if spec.kind != "bump":
        raise DomainError("bump_family requires a bump spec")
    T = direction_field(atlas, spec.direction)
    sigma = mf.round_metric(atlas)
    eps = float(spec.amplitude)
    start, end = float(spec.support_start), float(spec.support_end)

    def perturbed(amount):
        if amount == 0.0:
            return sigma
        fn = lambda chart, x: (sigma.components(chart, x)
                               + amount * T.components(chart, x))
        return mf.SphereMetricField.from_function(atlas, fn, name="bump-cut")

    ok, eigmin = mf.positivity_check(perturbed(eps), resolution=256)
    if not ok:
        raise DomainError(
            f"amplitude {eps} destroys positivity (min eigenvalue {eigmin})")

    def cut(lam, rho):
        if rho <= 0.0:
            raise DomainError("cut radius must be positive")
        return perturbed(eps * bump_profile(rho - lam, start, end))

    return MetricFamily(
        sphere_dim=atlas.dim, atlas=atlas, cut=cut, lambda_min=0.5,
        hyperbolic_bound=start,
        limit=lambda b: perturbed(eps * bump_profile(b, start, end)),
        interval_bound=end,
        family_id=(f"bump[B={start:g},c={end:g},eps={eps:g},"
                   f"{spec.direction}]"))
