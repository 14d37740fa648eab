"""
Liquid distribution over a regular packing.

The lateral cross-section is a 1-D slab of width D (unit depth) split into
``lateral_cells`` cells. Liquid elements walk down level by level; one level
is a packing layer of height h. Within a level the walk takes ``substeps``
moves of half a cell to one of the two downstream neighbours with probability
1/2 each (a staggered lattice), so the lateral variance per level is a^2 when
the lattice is calibrated. ``fan_out=3`` instead moves by whole cells with
probabilities (1/4, 1/2, 1/4).

Walls either reflect, or drain: liquid reaching a wall keeps flowing down it.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from reactorscale.fields import ScalarField1D

WALL_RULES = ("reflect", "drain")
DEFAULT_SUBSTEPS = 16
MIN_WALKERS = 10_000


# -- geometry and layout ---------------------------------------------------------------


@dataclass(frozen=True)
class PackingGeometry:
    """
    Parameters
    ----------
    column_diameter : float
        D [m].
    unit_radius : float
        Hydrodynamic radius of a packing unit a [m].
    layer_height : float
        h [m]; one lattice level per layer.
    levels : int
        Number of levels simulated below the irrigated section.
    lateral_cells : int, optional
        Cells across D. By default the lattice is calibrated with
        ``DEFAULT_SUBSTEPS`` moves per level, i.e. ``round(2 D / a)`` cells.
    wall_rule : {"reflect", "drain"}
    fan_out : {2, 3}
    """

    column_diameter: float
    unit_radius: float
    layer_height: float
    levels: int
    lateral_cells: int = None
    wall_rule: str = "reflect"
    fan_out: int = 2

    def __post_init__(self):
        D, a = self.column_diameter, self.unit_radius
        if not (D > 2.0 * a > 0.0):
            raise ValueError("need column_diameter > 2 * unit_radius > 0")
        if not self.layer_height > 0.0:
            raise ValueError("layer_height must be positive")
        if int(self.levels) < 1:
            raise ValueError("levels must be at least 1")
        if self.wall_rule not in WALL_RULES:
            raise ValueError(f"wall_rule must be one of {WALL_RULES}")
        if self.fan_out not in (2, 3):
            raise ValueError("fan_out must be 2 or 3")
        n = self.lateral_cells
        if n is None:
            # cell width w with DEFAULT_SUBSTEPS * move variance = a^2
            move_sd = 0.5 if self.fan_out == 2 else math.sqrt(0.5)
            n = max(3, round(D * move_sd * math.sqrt(DEFAULT_SUBSTEPS) / a))
        if int(n) < 3:
            raise ValueError("lateral_cells must be at least 3")
        object.__setattr__(self, "lateral_cells", int(n))
        object.__setattr__(self, "levels", int(self.levels))

    @property
    def cell_width(self):
        return self.column_diameter / self.lateral_cells

    @property
    def substeps(self):
        """Moves per level giving the variance closest to a^2."""
        # each half-cell move has variance (w/2)^2, each 3-point move w^2/2
        w = self.cell_width
        move_var = 0.25 * w * w if self.fan_out == 2 else 0.5 * w * w
        return max(1, round(self.unit_radius ** 2 / move_var))

    @property
    def lattice_radius(self):
        """sqrt of the realised lateral variance per level [m]."""
        w = self.cell_width
        move_var = 0.25 * w * w if self.fan_out == 2 else 0.5 * w * w
        return math.sqrt(self.substeps * move_var)

    @property
    def centers(self):
        """Cell centres on [-D/2, D/2] [m]."""
        w = self.cell_width
        return (np.arange(self.lateral_cells) + 0.5) * w - 0.5 * self.column_diameter

    @property
    def depths(self):
        return np.arange(self.levels + 1) * self.layer_height

    def replace(self, **kw):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return PackingGeometry(**d)


@dataclass(frozen=True)
class IrrigationLayout:
    """
    Point sources of irrigation.

    Parameters
    ----------
    sources : sequence of (position [m], flow [m^3/s])
        Lateral positions on [-D/2, D/2].
    n : float, optional
        Sources per unit of cross-section; in the slab that is per metre of
        width, so ``n * D`` must match the source count within 5 %.
    """

    sources: tuple
    n: float = None

    def __post_init__(self):
        src = tuple((float(x), float(q)) for x, q in self.sources)
        if not src:
            raise ValueError("layout needs at least one source")
        if any(q <= 0.0 for _, q in src):
            raise ValueError("all source flows must be positive")
        object.__setattr__(self, "sources", src)

    @property
    def positions(self):
        return np.array([x for x, _ in self.sources])

    @property
    def flows(self):
        return np.array([q for _, q in self.sources])

    @property
    def total_flow(self):
        return float(self.flows.sum())

    def validate(self, geometry):
        half = 0.5 * geometry.column_diameter
        if np.any(np.abs(self.positions) > half * (1.0 + 1e-12)):
            raise ValueError("source outside the column")
        if self.n is not None:
            expected = self.n * geometry.column_diameter
            if abs(expected - len(self.sources)) > 0.05 * len(self.sources):
                raise ValueError(
                    f"n = {self.n} implies {expected:.3g} sources, layout has {len(self.sources)}"
                )

    @classmethod
    def equally_spaced(cls, geometry, count, total_flow=1.0):
        """``count`` equal sources at the centres of equal parts of the width."""
        if int(count) < 1:
            raise ValueError("count must be at least 1")
        D = geometry.column_diameter
        x = (np.arange(count) + 0.5) * D / count - 0.5 * D
        q = total_flow / count
        return cls(tuple((xi, q) for xi in x), n=count / D)

    @classmethod
    def every_cell(cls, geometry, total_flow=1.0):
        c = geometry.centers
        return cls(tuple((x, total_flow / c.size) for x in c))


# -- Monte Carlo --------------------------------------------------------------------


@dataclass
class IntensityField:
    """
    Local specific liquid intensity per level.

    ``intensity[l, j]`` is the intensity [m^3/(m^2 s)] in cell ``j`` at depth
    ``depths[l]``; row 0 is the irrigated section.
    """

    geometry: PackingGeometry
    depths: np.ndarray
    intensity: np.ndarray
    total_flow: float
    walkers: int
    counts: np.ndarray = field(repr=False, default=None)

    @property
    def centers(self):
        return self.geometry.centers

    def level_flow(self):
        return self.intensity.sum(axis=1) * self.geometry.cell_width

    def mean_intensity(self):
        return self.total_flow / self.geometry.column_diameter

    def level_field(self, level):
        return ScalarField1D(self.centers, self.intensity[level], "intensity")

    def unevenness(self):
        return np.array([unevenness_coefficient(self, l).k_u for l in range(self.depths.size)])

    def rows(self):
        """(level, depth, x, intensity) rows."""
        L, N = self.intensity.shape
        lv = np.repeat(np.arange(L), N)
        return np.column_stack([lv, self.depths[lv], np.tile(self.centers, L), self.intensity.ravel()])


def _cell_counts_staggered(nodes):
    """Half-cell nodes to cells: boundary nodes split evenly, wall nodes go whole."""
    cells = nodes[..., 1::2].astype(float)
    b = nodes[..., 0::2].astype(float)
    cells += 0.5 * (b[..., :-1] + b[..., 1:])
    cells[..., 0] += 0.5 * b[..., 0]
    cells[..., -1] += 0.5 * b[..., -1]
    return cells


def _walk_batch(geometry, start, rng):
    """Evolve integer counts; returns per-level cell counts (levels+1, N)."""
    N, L, m = geometry.lateral_cells, geometry.levels, geometry.substeps
    drain = geometry.wall_rule == "drain"
    out = np.empty((L + 1, N))
    nodes = start.copy()
    if geometry.fan_out == 2:
        out[0] = _cell_counts_staggered(nodes)
        for lev in range(1, L + 1):
            for _ in range(m):
                left = rng.binomial(nodes, 0.5)
                right = nodes - left
                if drain:
                    left[0] = 0
                    right[0] = 0
                    left[-1] = 0
                    right[-1] = 0
                    new = nodes * 0
                    new[0] = nodes[0]
                    new[-1] = nodes[-1]
                else:
                    new = np.zeros_like(nodes)
                    # walls reflect: both moves from a wall node lead inward
                    right[0] += left[0]
                    left[0] = 0
                    left[-1] += right[-1]
                    right[-1] = 0
                new[:-1] += left[1:]
                new[1:] += right[:-1]
                nodes = new
            out[lev] = _cell_counts_staggered(nodes)
    else:
        # nodes has N cells plus two wall reservoirs at either end
        out[0] = nodes[1:-1] + np.r_[nodes[0], np.zeros(N - 1)] + np.r_[np.zeros(N - 1), nodes[-1]]
        for lev in range(1, L + 1):
            for _ in range(m):
                cells = nodes[1:-1]
                left = rng.binomial(cells, 0.25)
                right = rng.binomial(cells - left, 1.0 / 3.0)
                stay = cells - left - right
                new = np.zeros_like(nodes)
                new[0], new[-1] = nodes[0], nodes[-1]
                new[1:-1] += stay
                new[:-2] += left
                new[2:] += right
                if not drain:
                    new[1] += new[0] - nodes[0]
                    new[-2] += new[-1] - nodes[-1]
                    new[0], new[-1] = nodes[0], nodes[-1]
                nodes = new
            cells = nodes[1:-1].astype(float)
            cells[0] += nodes[0]
            cells[-1] += nodes[-1]
            out[lev] = cells
    return out


def _start_nodes(geometry, layout, walkers, rng):
    N = geometry.lateral_cells
    w = geometry.cell_width
    share = rng.multinomial(walkers, layout.flows / layout.flows.sum())
    x = layout.positions + 0.5 * geometry.column_diameter
    if geometry.fan_out == 2:
        nodes = np.zeros(2 * N + 1, dtype=np.int64)
        idx = np.clip(np.rint(x / (0.5 * w)).astype(int), 0, 2 * N)
        np.add.at(nodes, idx, share)
    else:
        nodes = np.zeros(N + 2, dtype=np.int64)
        idx = np.clip(np.floor(x / w).astype(int), 0, N - 1) + 1
        np.add.at(nodes, idx, share)
    return nodes


def random_walk_simulate(geometry, layout, walkers, seed, batches=8, workers=1, min_walkers=MIN_WALKERS):
    """
    Monte Carlo liquid distribution.

    Parameters
    ----------
    geometry : PackingGeometry
    layout : IrrigationLayout
    walkers : int
        Total liquid elements, at least ``min_walkers``.
    seed : int
        Master seed; each batch draws from its own spawned stream.
    batches : int
        Independent batches, merged in batch order.
    workers : int
        Threads used to run batches.

    Returns
    -------
    IntensityField
    """
    walkers = int(walkers)
    if walkers < min_walkers:
        raise ValueError(f"walkers must be at least {min_walkers}")
    if seed is None:
        raise ValueError("seed must be supplied")
    layout.validate(geometry)
    batches = max(1, min(int(batches), walkers))
    sizes = np.full(batches, walkers // batches)
    sizes[: walkers % batches] += 1
    streams = np.random.SeedSequence(seed).spawn(batches)

    def run(i):
        rng = np.random.default_rng(streams[i])
        start = _start_nodes(geometry, layout, int(sizes[i]), rng)
        return _walk_batch(geometry, start, rng)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(batches)))
    else:
        parts = [run(i) for i in range(batches)]
    counts = parts[0].copy()
    for p in parts[1:]:
        counts += p
    J = layout.total_flow
    intensity = counts / walkers * J / geometry.cell_width
    return IntensityField(geometry, geometry.depths, intensity, J, walkers, counts)


# -- statistics ----------------------------------------------------------------------


@dataclass(frozen=True)
class Unevenness:
    k_u: float
    axis_wall_ratio: float
    dry: bool


def unevenness_coefficient(field, level):
    """
    max/min of a level's intensities, with the axis/wall ratio alongside.

    A dry cell gives ``k_u = inf`` and ``dry = True``.
    """
    if not 0 <= level < field.intensity.shape[0]:
        raise ValueError(f"level {level} not populated")
    i = field.intensity[level]
    lo, hi = float(i.min()), float(i.max())
    axis = float(np.interp(0.0, field.centers, i))
    wall = 0.5 * (i[0] + i[-1])
    ratio = axis / wall if wall > 0.0 else math.inf
    if lo <= 0.0:
        return Unevenness(math.inf, ratio, True)
    return Unevenness(hi / lo, ratio, False)


@dataclass(frozen=True)
class SpreadingZone:
    height: float
    level: int
    k_u: float
    reached: bool
    profile: np.ndarray


def spreading_zone_height(geometry, layout, k_u_target=1.15, walkers=1_000_000, seed=0, field=None, **kw):
    """
    Depth of the first level whose unevenness is at most ``k_u_target``.

    If the target is never reached, ``reached`` is False and ``k_u`` is the
    smallest unevenness seen.
    """
    if k_u_target < 1.0:
        raise ValueError("k_u_target must be at least 1")
    if field is None:
        field = random_walk_simulate(geometry, layout, walkers, seed, **kw)
    ku = field.unevenness()
    hit = np.flatnonzero(ku <= k_u_target)
    if hit.size:
        lv = int(hit[0])
        return SpreadingZone(lv * geometry.layer_height, lv, float(ku[lv]), True, ku)
    lv = int(np.argmin(ku))
    return SpreadingZone(math.nan, lv, float(ku[lv]), False, ku)


@dataclass(frozen=True)
class StabilizedRadius:
    radius: float
    depth: float
    radii: np.ndarray
    degenerate: bool = False
    stabilized: bool = True
    skipped: tuple = ()


def stabilized_radius_empirical(field, tol=0.02, noise_sigmas=10.0, window=8, fit_cells=2):
    """
    Radius where the local intensity equals the cross-section average.

    Per level the profile over x >= 0 is searched for its first crossing of
    the mean, refined by a straight-line fit over ``fit_cells`` cells either
    side. Levels whose spread is below the Monte Carlo noise, or without a
    crossing, are skipped. The per-level change of the radius is the slope of
    a line fitted over ``window`` consecutive resolved levels; ``depth`` is
    the first depth after which it stays below ``tol`` relative, and
    ``radius`` is the mean over the stabilized levels.
    """
    x = field.centers
    mean = field.mean_intensity()
    keep = x >= 0.0
    xr = x[keep]
    per_cell = field.walkers / field.geometry.lateral_cells
    floor = noise_sigmas / math.sqrt(max(per_cell, 1.0))
    radii = np.full(field.depths.size, np.nan)
    skipped = []
    spread_any = False
    for lv in range(1, field.depths.size):
        prof = field.intensity[lv, keep] / mean - 1.0
        if np.ptp(field.intensity[lv]) / mean > 1e-12:
            spread_any = True
        if np.max(np.abs(prof)) < floor:
            skipped.append(lv)
            continue
        s = np.flatnonzero(np.sign(prof[:-1]) != np.sign(prof[1:]))
        if not s.size:
            skipped.append(lv)
            continue
        k = s[0]
        lo, hi = max(0, k - fit_cells + 1), min(xr.size, k + fit_cells + 1)
        slope, icept = np.polyfit(xr[lo:hi], prof[lo:hi], 1)
        r = -icept / slope if slope != 0.0 else math.nan
        if not (xr[lo] <= r <= xr[hi - 1]):
            r = xr[k] + (xr[k + 1] - xr[k]) * prof[k] / (prof[k] - prof[k + 1])
        radii[lv] = r
    if not spread_any:
        return StabilizedRadius(math.nan, math.nan, radii, degenerate=True, stabilized=False, skipped=tuple(skipped))
    good = np.flatnonzero(np.isfinite(radii))
    if good.size < window + 1:
        last = float(radii[good[-1]]) if good.size else math.nan
        return StabilizedRadius(last, math.nan, radii, stabilized=False, skipped=tuple(skipped))
    r = radii[good]
    lv = good.astype(float)
    ok = np.empty(good.size - window + 1, dtype=bool)
    for i in range(ok.size):
        sl = np.polyfit(lv[i : i + window], r[i : i + window], 1)[0]
        ok[i] = abs(sl) < tol * abs(np.mean(r[i : i + window]))
    bad = np.flatnonzero(~ok)
    start = 0 if not bad.size else bad[-1] + 1
    if start >= ok.size:
        return StabilizedRadius(float(r[-1]), math.nan, radii, stabilized=False, skipped=tuple(skipped))
    return StabilizedRadius(float(np.mean(r[start:])), float(field.depths[good[start]]), radii, skipped=tuple(skipped))


@dataclass(frozen=True)
class SpreadingSweep:
    """H_s / h for each D/a (keys) over the source counts ``n_values``."""

    n_values: tuple
    heights: dict
    reached: dict


def spreading_sweep(
    D_over_a, n_values, unit_radius=0.05, layer_height=0.1, k_u_target=1.15, walkers=1_000_000, seed=0
):
    """
    Spreading-zone height over a grid of column sizes and source counts.

    Each (D/a, n) run uses equally spaced sources under reflecting walls and
    a seed spawned from ``seed``. The bed depth is a few times the spreading
    height expected for a single source.
    """
    pairs = [(float(r), int(n)) for r in D_over_a for n in n_values]
    streams = np.random.SeedSequence(seed).spawn(len(pairs))
    heights, reached = {}, {}
    for (ratio, n), ss in zip(pairs, streams):
        D = ratio * unit_radius
        levels = int(math.ceil(0.6 * ratio * ratio)) + 10
        g = PackingGeometry(D, unit_radius, layer_height, levels)
        lay = IrrigationLayout.equally_spaced(g, n)
        sz = spreading_zone_height(g, lay, k_u_target, walkers, int(ss.generate_state(1)[0]))
        heights.setdefault(ratio, []).append(sz.level if sz.reached else math.nan)
        reached.setdefault(ratio, []).append(sz.reached)
    return SpreadingSweep(
        tuple(int(n) for n in n_values),
        {k: np.array(v, dtype=float) for k, v in heights.items()},
        {k: tuple(v) for k, v in reached.items()},
    )


# -- closed forms ----------------------------------------------------------------------


def analytic_intensity(r, z, I, h, a, D):
    """
    Local intensity below one axial source, with the two nearest wall images.

    i = I 2h/(pi z) [exp(-h r^2/(2a^2 z)) + exp(-h (D-r)^2/(2a^2 z))
        + exp(-h (D+r)^2/(2a^2 z))]
    """
    if not z > 0.0:
        raise ValueError("depth z must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0) or np.any(r > 0.5 * D * (1.0 + 1e-12)):
        raise ValueError("r must lie in [0, D/2]")
    c = h / (2.0 * a * a * z)
    val = I * 2.0 * h / (math.pi * z) * (np.exp(-c * r * r) + np.exp(-c * (D - r) ** 2) + np.exp(-c * (D + r) ** 2))
    return val if val.ndim else float(val)


def _image_profile(x, s, z, I, h, a, D):
    c = h / (2.0 * a * a * z)
    d0 = x - s
    d1 = x - (D - s)
    d2 = x - (-D - s)
    return I * 2.0 * h / (math.pi * z) * (np.exp(-c * d0 ** 2) + np.exp(-c * d1 ** 2) + np.exp(-c * d2 ** 2))


def superpose_sources(layout, geometry, z, x=None):
    """Sum of each source's direct term and its two wall images at lateral ``x``."""
    if not z > 0.0:
        raise ValueError("depth z must be positive")
    layout.validate(geometry)
    x = geometry.centers if x is None else np.asarray(x, dtype=float)
    g = geometry
    out = np.zeros_like(x, dtype=float)
    for s, q in layout.sources:
        out += _image_profile(x, s, z, q, g.layer_height, g.unit_radius, g.column_diameter)
    return out


def spreading_zone_approx(D, a, n):
    """H_s / h = (D/a)^2 / (4.64 + 1.76 n)."""
    if not (D > 0.0 and a > 0.0):
        raise ValueError("D and a must be positive")
    if n < 0:
        raise ValueError("n must be non-negative")
    if math.isinf(n):
        return 0.0
    return (D / a) ** 2 / (4.64 + 1.76 * n)


def characteristic_radius(D, a):
    """R_S = sqrt((a D / 2) ln(4 D / (pi a)))."""
    if not (D > 0.0 and a > 0.0):
        raise ValueError("D and a must be positive")
    arg = 4.0 * D / (math.pi * a)
    if arg <= 1.0:
        raise ValueError(f"4D/(pi a) = {arg:.4g} must exceed 1")
    return math.sqrt(0.5 * a * D * math.log(arg))


def mean_intensity(J, h, H_S, a, R_S):
    """j = J sqrt(2h/H_S) exp(-h R_S^2 / (2 a^2 H_S))."""
    if not (h > 0.0 and H_S > 0.0 and a > 0.0):
        raise ValueError("h, H_S and a must be positive")
    if R_S < 0.0:
        raise ValueError("R_S must be non-negative")
    if math.isinf(H_S):
        return 0.0
    return J * math.sqrt(2.0 * h / H_S) * math.exp(-h * R_S * R_S / (2.0 * a * a * H_S))


def l1_discrepancy(p, q):
    """L1 distance between two profiles, each first normalised to unit sum."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.sum(np.abs(p / p.sum() - q / q.sum())))
