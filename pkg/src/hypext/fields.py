"""Symmetric bilinear-form fields on circles and spheres.

A field is evaluated per chart of a fixed atlas and returns the component
matrix in that chart's coordinate frame.  Two atlases are provided:

* ``CircleAtlas`` -- two overlapping arc charts on S^1 whose transitions
  are shifts by pi (Jacobian identically 1);
* ``StereographicAtlas`` -- two stereographic charts on S^2 (projections
  from the two poles), each restricted to a disk strictly containing the
  equator; transitions are conformal inversions.

On top of the field type the module implements warped/unwarped spherical
cuts of centered radial metrics, componentwise scaling, a positivity
check, and the grid realization of the C^2 distance: sups of component
differences and of their first and second central differences over the
interior grid of every chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .hyptrig import log_sinh

TWO_PI = 2.0 * math.pi


def _wrap_angle(a):
    """Wrap to (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(a, dtype=float), TWO_PI)


class CircleAtlas:
    """Two arc charts on the unit circle, centred at angles 0 and pi.

    Chart coordinate: x = angle - centre, wrapped; each chart's domain is
    the open arc |x| < 3*pi/4 and its interior is |x| <= 3*pi/5, so the two
    interiors overlap and cover the circle with margin 3*pi/20 to every
    chart boundary.  Transitions shift by +-pi: Jacobian 1, condition
    number 1.
    """

    atlas_id = "s1-arcs-v1"
    dim = 1
    chart_ids = ("east", "west")
    half_width = 0.75 * math.pi
    interior_half_width = 0.60 * math.pi
    default_resolution = 256
    jacobian_condition_bound = 1.0

    _centers = {"east": 0.0, "west": math.pi}

    @property
    def margin(self):
        return self.half_width - self.interior_half_width

    def coords_of(self, chart, angles):
        return _wrap_angle(np.asarray(angles, dtype=float) - self._centers[chart])

    def angle_of(self, chart, x):
        return _wrap_angle(np.asarray(x, dtype=float) + self._centers[chart])

    def locate(self, angles):
        """Best chart per angle: the one where the point is most interior.

        Returns (chart index array into chart_ids, coords array).
        """
        a = np.asarray(angles, dtype=float)
        xe = self.coords_of("east", a)
        xw = self.coords_of("west", a)
        use_west = np.abs(xw) < np.abs(xe)
        return np.where(use_west, 1, 0), np.where(use_west, xw, xe)

    def transition(self, src, dst, x):
        if src == dst:
            return np.asarray(x, dtype=float)
        return _wrap_angle(np.asarray(x, dtype=float)
                           + self._centers[src] - self._centers[dst])

    def transition_jacobian(self, src, dst, x):
        return np.ones(np.shape(x) + (1, 1))

    def interior_grid(self, n):
        L = self.interior_half_width
        return np.linspace(-L, L, n)


class StereographicAtlas:
    """Two stereographic charts on the unit 2-sphere.

    Chart "north" projects from the south pole: w = (x, y) / (1 + z),
    covering everything with |w| < 1.5 (well past the equator |w| = 1).
    Chart "south" projects from the north pole with the second coordinate
    flipped: w = (x, -y) / (1 - z).  The transition in both directions is
    the conformal involution (a, b) -> (a, -b) / (a^2 + b^2); its Jacobian
    has both singular values equal to 1/|w|^2, so the condition number is
    identically 1 and the scale factor lies in (4/9, 9/4) on the overlap.
    The round metric has components 4 I / (1 + |w|^2)^2 in either chart.
    """

    atlas_id = "s2-stereo-v1"
    dim = 2
    chart_ids = ("north", "south")
    domain_radius = 1.5
    interior_radius = 1.2
    default_resolution = 96
    jacobian_condition_bound = 1.0

    @property
    def margin(self):
        return self.domain_radius - self.interior_radius

    def to_point(self, chart, w):
        w = np.asarray(w, dtype=float)
        q = np.sum(w * w, axis=-1)
        denom = 1.0 + q
        x = 2.0 * w[..., 0] / denom
        y = 2.0 * w[..., 1] / denom
        z = (1.0 - q) / denom
        if chart == "north":
            return np.stack([x, y, z], axis=-1)
        return np.stack([x, -y, -z], axis=-1)

    def coords_of(self, chart, p):
        p = np.asarray(p, dtype=float)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        if chart == "north":
            denom = 1.0 + z
            return np.stack([x / denom, y / denom], axis=-1)
        denom = 1.0 - z
        return np.stack([x / denom, -y / denom], axis=-1)

    def locate(self, p):
        """Best chart per point (north for z >= 0), with its coordinates."""
        p = np.asarray(p, dtype=float)
        north = p[..., 2] >= 0.0
        wn = self.coords_of("north", p)
        ws = self.coords_of("south", p)
        return np.where(north, 0, 1), np.where(north[..., None], wn, ws)

    def transition(self, src, dst, w):
        w = np.asarray(w, dtype=float)
        if src == dst:
            return w
        q = np.sum(w * w, axis=-1, keepdims=True)
        return np.stack([w[..., 0], -w[..., 1]], axis=-1) / q

    def transition_jacobian(self, src, dst, w):
        w = np.asarray(w, dtype=float)
        if src == dst:
            return np.broadcast_to(np.eye(2), w.shape[:-1] + (2, 2)).copy()
        a, b = w[..., 0], w[..., 1]
        q = a * a + b * b
        j = np.empty(w.shape[:-1] + (2, 2))
        j[..., 0, 0] = (b * b - a * a)
        j[..., 0, 1] = -2.0 * a * b
        j[..., 1, 0] = 2.0 * a * b
        j[..., 1, 1] = (b * b - a * a)
        return j / (q * q)[..., None, None]

    def round_components(self, w):
        w = np.asarray(w, dtype=float)
        q = np.sum(w * w, axis=-1)
        factor = 4.0 / (1.0 + q) ** 2
        return factor[..., None, None] * np.eye(2)

    def interior_grid(self, n):
        R = self.interior_radius
        return np.linspace(-R, R, n)

    def interior_mask(self, axis):
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        return xx * xx + yy * yy <= self.interior_radius ** 2


# module-level atlas instances; fields built on the same instance compare
CIRCLE_ATLAS = CircleAtlas()
SPHERE_ATLAS = StereographicAtlas()

_ATLAS_REGISTRY = {a.atlas_id: a for a in (CIRCLE_ATLAS, SPHERE_ATLAS)}


@dataclass(frozen=True)
class SphereMetricField:
    """A symmetric bilinear-form field over a fixed atlas.

    ``kind`` is "closed-form" (components evaluable at any chart point) or
    "sampled" (components known on the standard interior grid only).
    """

    atlas: object
    kind: str
    name: str = ""
    is_metric: bool = True
    _fn: object = None
    _samples: dict = dc_field(default=None, repr=False)

    @classmethod
    def from_function(cls, atlas, fn, name="", is_metric=True):
        return cls(atlas=atlas, kind="closed-form", name=name,
                   is_metric=is_metric, _fn=fn)

    @classmethod
    def from_samples(cls, atlas, samples, name="", is_metric=True):
        """samples: dict chart -> component array over the standard interior
        grid, shaped (n, d, d) for dim 1 and (n, n, d, d) for dim 2."""
        return cls(atlas=atlas, kind="sampled", name=name,
                   is_metric=is_metric, _samples=dict(samples))

    @property
    def resolution(self):
        if self.kind != "sampled":
            return None
        any_chart = next(iter(self._samples.values()))
        return any_chart.shape[0]

    def components(self, chart, coords):
        if self.kind != "closed-form":
            raise DomainError(
                "sampled fields are only known on their stored grid; "
                "use grid_components")
        return self._fn(chart, np.asarray(coords, dtype=float))

    def grid_components(self, chart, n):
        """Components over the standard interior grid of the chart."""
        if self.kind == "sampled":
            vals = self._samples[chart]
            if vals.shape[0] != n:
                raise DomainError(
                    f"sampled field has resolution {vals.shape[0]}, "
                    f"requested {n}")
            return vals
        axis = self.atlas.interior_grid(n)
        if self.atlas.dim == 1:
            return self.components(chart, axis)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        pts = np.stack([xx, yy], axis=-1)
        return self.components(chart, pts)

    def at_angles(self, angles):
        """S^1 only: evaluate at circle angles through the best chart."""
        if self.atlas.dim != 1:
            raise DomainError("at_angles applies to S^1 fields")
        idx, x = self.atlas.locate(angles)
        if self.kind != "closed-form":
            raise DomainError("at_angles requires a closed-form field")
        east = self.components("east", x)
        west = self.components("west", x)
        pick = (idx == 1)[..., None, None]
        return np.where(pick, west, east)

    def sampled(self, n=None):
        """Freeze onto the standard grid (tag becomes "sampled")."""
        n = n or self.atlas.default_resolution
        samples = {c: np.asarray(self.grid_components(c, n))
                   for c in self.atlas.chart_ids}
        return SphereMetricField.from_samples(self.atlas, samples,
                                              name=self.name,
                                              is_metric=self.is_metric)


def round_metric(atlas):
    """The round metric of the unit circle/sphere over the given atlas."""
    if atlas.dim == 1:
        fn = lambda chart, x: np.ones(np.shape(x) + (1, 1))
    else:
        fn = lambda chart, w: atlas.round_components(w)
    return SphereMetricField.from_function(atlas, fn, name="round")


def scale(a, c):
    """Componentwise multiple c * a of a field; c must be positive."""
    if not np.isscalar(c) and np.ndim(c) != 0:
        raise DomainError("scale: c must be a scalar")
    c = float(c)
    if c <= 0.0 or not math.isfinite(c):
        raise DomainError("scale: factor must be positive and finite")
    if a.kind == "sampled":
        samples = {ch: c * v for ch, v in a._samples.items()}
        return SphereMetricField.from_samples(a.atlas, samples, name=a.name,
                                              is_metric=a.is_metric)
    fn = lambda chart, x: c * a.components(chart, x)
    return SphereMetricField.from_function(a.atlas, fn, name=a.name,
                                           is_metric=a.is_metric)


def add_fields(a, b, is_metric=None):
    """Pointwise sum of two closed-form fields over the same atlas."""
    _require_same_atlas(a, b)
    if a.kind != "closed-form" or b.kind != "closed-form":
        raise DomainError("add_fields requires closed-form fields")
    fn = lambda chart, x: a.components(chart, x) + b.components(chart, x)
    return SphereMetricField.from_function(
        a.atlas, fn, name=f"{a.name}+{b.name}",
        is_metric=a.is_metric if is_metric is None else is_metric)


@dataclass(frozen=True)
class RadialMetric:
    """A centered metric g = g_r + dr^2 given by its warped cuts r -> g_r."""

    sphere_dim: int
    atlas: object
    domain: tuple
    name: str = ""
    _cut: object = None

    def cut_at(self, r):
        lo, hi = self.domain
        if not (lo < r < hi):
            raise DomainError(
                f"radius {r} outside the radial domain ({lo}, {hi}) "
                f"of {self.name or 'metric'}")
        return self._cut(float(r))


def euclidean_radial(atlas):
    """g_r = r^2 * round metric (the flat metric in polar form)."""
    sigma = round_metric(atlas)
    return RadialMetric(sphere_dim=atlas.dim, atlas=atlas, domain=(0.0, 350.0),
                        name="euclidean",
                        _cut=lambda r: scale(sigma, r * r))


def sinh_warped_radial(atlas, gprime, name="sinh-warped", r_max=350.0):
    """g_r = sinh(r)^2 * g' for a fixed field g' (warped-by-sinh metric)."""
    return RadialMetric(sphere_dim=atlas.dim, atlas=atlas, domain=(0.0, r_max),
                        name=name,
                        _cut=lambda r: scale(gprime, math.sinh(r) ** 2))


def hyperbolic_radial(atlas):
    """g_r = sinh(r)^2 * round metric (constant-curvature -1 space)."""
    return sinh_warped_radial(atlas, round_metric(atlas), name="hyperbolic")


def warped_cut(g, r0):
    """The metric induced on the radius-r0 sphere, as a field g_{r0}."""
    return g.cut_at(r0)


def unwarped_cut(g, r0):
    """The warped cut rescaled by 1/sinh(r0)^2 (constant in r0 exactly for
    warped-by-sinh metrics)."""
    if r0 <= 0.0:
        raise DomainError("unwarped_cut: r0 must be positive")
    return scale(warped_cut(g, r0), math.exp(-2.0 * log_sinh(r0)))


@dataclass(frozen=True)
class C2Distance:
    """Sups of component differences and their first/second central
    differences over the interior grids; deterministic given (grid, step)."""

    c0: float
    c1: float
    c2: float
    grid_resolution: int
    fd_step: float

    def max(self):
        return max(self.c0, self.c1, self.c2)


def c2_sups(delta, steps, periodic=None, mask=None):
    """(c0, c1, c2) sups for a difference array over a structured grid.

    ``delta`` has one or two leading grid axes followed by arbitrary
    component axes; ``steps`` gives the grid spacing per grid axis.  A
    periodic axis is differenced with wraparound, a bounded one on its
    interior.  ``mask`` (over the grid axes) restricts all sups.
    """
    delta = np.asarray(delta, dtype=float)
    n_axes = len(steps)
    periodic = periodic or (False,) * n_axes
    if mask is None:
        mask = np.ones(delta.shape[:n_axes], dtype=bool)

    comp_axes = tuple(range(n_axes, delta.ndim))

    def sup(arr, m):
        if not np.any(m):
            return 0.0
        vals = np.max(np.abs(arr), axis=comp_axes) if comp_axes else np.abs(arr)
        return float(np.max(vals[m]))

    c0 = sup(delta, mask)

    c1 = 0.0
    c2 = 0.0
    slices_all = [slice(None)] * delta.ndim

    def ax_slice(axis, sl):
        s = list(slices_all)
        s[axis] = sl
        return tuple(s)

    for ax in range(n_axes):
        h = steps[ax]
        if periodic[ax]:
            fwd = np.roll(delta, -1, axis=ax)
            bwd = np.roll(delta, 1, axis=ax)
            d1 = (fwd - bwd) / (2.0 * h)
            d2 = (fwd - 2.0 * delta + bwd) / (h * h)
            c1 = max(c1, sup(d1, mask))
            c2 = max(c2, sup(d2, mask))
        else:
            inner = ax_slice(ax, slice(1, -1))
            fwd = delta[ax_slice(ax, slice(2, None))]
            bwd = delta[ax_slice(ax, slice(None, -2))]
            mid = delta[inner]
            m_in = mask[ax_slice(ax, slice(1, -1))[:n_axes]]
            d1 = (fwd - bwd) / (2.0 * h)
            d2 = (fwd - 2.0 * mid + bwd) / (h * h)
            c1 = max(c1, sup(d1, m_in))
            c2 = max(c2, sup(d2, m_in))

    if n_axes == 2:
        h0, h1 = steps
        if all(periodic):
            pp = np.roll(np.roll(delta, -1, 0), -1, 1)
            pm = np.roll(np.roll(delta, -1, 0), 1, 1)
            mp = np.roll(np.roll(delta, 1, 0), -1, 1)
            mm = np.roll(np.roll(delta, 1, 0), 1, 1)
            dxy = (pp - pm - mp + mm) / (4.0 * h0 * h1)
            c2 = max(c2, sup(dxy, mask))
        elif not any(periodic):
            pp = delta[2:, 2:]
            pm = delta[2:, :-2]
            mp = delta[:-2, 2:]
            mm = delta[:-2, :-2]
            dxy = (pp - pm - mp + mm) / (4.0 * h0 * h1)
            c2 = max(c2, sup(dxy, mask[1:-1, 1:-1]))
        else:
            # one periodic axis (axis p), one bounded: roll on p, slice on the other
            p = 0 if periodic[0] else 1
            b = 1 - p
            rolled_f = np.roll(delta, -1, axis=p)
            rolled_b = np.roll(delta, 1, axis=p)
            pp = rolled_f[ax_slice(b, slice(2, None))]
            pm = rolled_b[ax_slice(b, slice(2, None))]
            mp = rolled_f[ax_slice(b, slice(None, -2))]
            mm = rolled_b[ax_slice(b, slice(None, -2))]
            dxy = (pp - pm - mp + mm) / (4.0 * h0 * h1)
            c2 = max(c2, sup(dxy, mask[ax_slice(b, slice(1, -1))[:n_axes]]))

    return c0, c1, c2


def _require_same_atlas(a, b):
    if a.atlas.atlas_id != b.atlas.atlas_id:
        raise DomainError(
            f"fields live on different atlases "
            f"({a.atlas.atlas_id} vs {b.atlas.atlas_id})")


def c2_distance(a, b, resolution=None, step=None):
    """Grid C^2 distance between two fields over the same atlas.

    The comparison grid spans each chart's interior with ``resolution``
    points per axis; the finite-difference step is the grid spacing (a
    ``step`` argument incompatible with it, or larger than half the chart
    margin, is rejected).  Points within the margin of a chart boundary
    are covered by the other chart's interior instead.
    """
    _require_same_atlas(a, b)
    atlas = a.atlas
    n = resolution or atlas.default_resolution
    for f in (a, b):
        if f.kind == "sampled" and f.resolution != n:
            raise DomainError(
                f"sampled field resolution {f.resolution} != grid {n}")
    axis = atlas.interior_grid(n)
    h = float(axis[1] - axis[0])
    if step is not None and abs(step - h) > 1e-12 * h:
        raise DomainError(
            f"step {step} incompatible with grid spacing {h}")
    if h > atlas.margin / 2.0:
        raise DomainError(
            f"step {h:.4g} too large for chart margin {atlas.margin:.4g}")

    c0 = c1 = c2 = 0.0
    for chart in atlas.chart_ids:
        delta = np.asarray(a.grid_components(chart, n), dtype=float) \
            - np.asarray(b.grid_components(chart, n), dtype=float)
        if atlas.dim == 1:
            s0, s1, s2 = c2_sups(delta, (h,))
        else:
            mask = atlas.interior_mask(axis)
            s0, s1, s2 = c2_sups(delta, (h, h), mask=mask)
        c0, c1, c2 = max(c0, s0), max(c1, s1), max(c2, s2)
    return C2Distance(c0=c0, c1=c1, c2=c2, grid_resolution=n, fd_step=h)


def positivity_check(a, resolution=None):
    """Minimum eigenvalue of the component matrix over the grid.

    Returns (passed, min_eigenvalue); passes iff the minimum is > 0.
    """
    atlas = a.atlas
    n = resolution or atlas.default_resolution
    worst = math.inf
    for chart in atlas.chart_ids:
        g = np.asarray(a.grid_components(chart, n), dtype=float)
        if atlas.dim == 1:
            eigmin = g[..., 0, 0]
        else:
            half_tr = 0.5 * (g[..., 0, 0] + g[..., 1, 1])
            rad = np.sqrt((0.5 * (g[..., 0, 0] - g[..., 1, 1])) ** 2
                          + g[..., 0, 1] ** 2)
            eigmin = half_tr - rad
            eigmin = np.where(atlas.interior_mask(atlas.interior_grid(n)),
                              eigmin, np.inf)
        worst = min(worst, float(np.min(eigmin)))
    return worst > 0.0, worst


# ---------------------------------------------------------------------------
# columnar serialization for sampled fields
# ---------------------------------------------------------------------------

def save_sampled_field(path, field):
    """Write a sampled field in the self-describing columnar text format:
    header (atlas id, dim, grid), then one row per grid point with chart
    id, grid indices and component values at 17 significant digits."""
    if field.kind != "sampled":
        raise DomainError("save_sampled_field requires a sampled field")
    atlas = field.atlas
    n = field.resolution
    lines = [
        "# sphere-field-columnar v1",
        f"# atlas {atlas.atlas_id} dim {atlas.dim} resolution {n}",
        f"# name {field.name or '-'}",
    ]
    d = atlas.dim
    for chart in atlas.chart_ids:
        vals = field._samples[chart]
        if d == 1:
            for i in range(n):
                lines.append(f"{chart} {i} {vals[i, 0, 0]:.16e}")
        else:
            for i in range(n):
                for j in range(n):
                    comps = " ".join(f"{vals[i, j, p, q]:.16e}"
                                     for p in range(2) for q in range(2))
                    lines.append(f"{chart} {i} {j} {comps}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_sampled_field(path):
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "# sphere-field-columnar v1":
        raise DomainError(f"{path}: not a columnar field file")
    meta = lines[1].split()
    atlas_id, dim, n = meta[2], int(meta[4]), int(meta[6])
    name = lines[2].split()[2]
    atlas = _ATLAS_REGISTRY[atlas_id]
    d = atlas.dim
    assert d == dim
    samples = {c: np.zeros((n, 1, 1) if d == 1 else (n, n, 2, 2))
               for c in atlas.chart_ids}
    for line in lines[3:]:
        if not line.strip():
            continue
        toks = line.split()
        chart = toks[0]
        if d == 1:
            samples[chart][int(toks[1]), 0, 0] = float(toks[2])
        else:
            i, j = int(toks[1]), int(toks[2])
            samples[chart][i, j] = np.array(
                [float(t) for t in toks[3:7]]).reshape(2, 2)
    return SphereMetricField.from_samples(
        atlas, samples, name=None if name == "-" else name)
