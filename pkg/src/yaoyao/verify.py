"""Independent checkers that certify a computed partition.

Each check recomputes the claimed property from scratch: equipartition masses
come from point location (not from the solver's bookkeeping), half-space
avoidance and center depth use the exact containment certificate, and the
two-dimensional oracle re-derives the center by scanning the median difference
of the projected halves on a refined grid, without touching the solver.

Avoidance and depth are structural theorems about any valid tree, so their
checks must succeed on every trial; a failure there is an implementation bug,
never sampling noise.  Mass and symmetry checks carry explicit tolerances.

Every check is a pure function of (inputs, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import HalfSpace, SignSequence, halfspace_contains_region
from .measures import (
    MeasureSpec,
    WeightedPointCloud,
    halfspace_mass,
    project_measure,
    sample,
    split_at_median,
    symmetrize,
    weighted_quantile,
)
from .partition import PartitionTree, locate_points, regions, witness_region
from .solver import SolverConfig, compute_center_partition
from .geometry import CoordinateSystem

__all__ = [
    "CheckReport",
    "check_equipartition",
    "check_avoidance",
    "check_depth",
    "check_symmetry",
    "check_prefix_dependence",
    "check_continuity",
    "check_monotone_lift",
    "oracle_center_2d",
    "oracle_axis_slope_2d",
]


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check: measured statistics plus the tolerances applied."""

    name: str
    passed: bool
    stats: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "stats": self.stats,
            "tolerances": self.tolerances,
            "seed": self.seed,
        }


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _unit_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    while True:
        g = rng.standard_normal(n)
        norm = np.linalg.norm(g)
        if norm > 1e-12:
            return g / norm


def _halfspace_through(rng, tree: PartitionTree, cloud: WeightedPointCloud | None) -> HalfSpace:
    """Random half-space oriented to contain the center; its boundary passes
    through a random data point (or a unit-scale offset when no cloud given)."""
    n = tree.dimension
    a = _unit_normal(rng, n)
    if cloud is not None:
        anchor = cloud.points[rng.integers(cloud.size)]
    else:
        anchor = tree.center + rng.standard_normal(n)
    c = float(a @ anchor)
    if float(a @ tree.center) - c < 0.0:
        a, c = -a, -c
    return HalfSpace(a, c)


def check_equipartition(tree: PartitionTree, cloud: WeightedPointCloud,
                        tol: float = 1e-6) -> CheckReport:
    """Region masses by independent point location, against mass / 2^n.

    Also folds in the prefix masses: the mass reaching any sign prefix of
    length k must be mass / 2^k, to the same relative tolerance.
    """
    n = tree.dimension
    labels = locate_points(tree, cloud.points)
    total = cloud.total_mass
    masses = {}
    max_dev = 0.0
    for signs in regions(tree):
        mask = np.all(labels == np.asarray(signs), axis=1)
        m = float(np.sum(cloud.weights[mask]))
        masses["".join("+" if s > 0 else "-" for s in signs)] = m
        max_dev = max(max_dev, abs(m - total / 2**n) / (total / 2**n))
    # prefix masses at every depth, from the same located labels
    prefix_dev = 0.0
    for k in range(1, n):
        want = total / 2**k
        acc: dict = {}
        for row, w in zip(labels[:, :k], cloud.weights):
            key = tuple(row)
            acc[key] = acc.get(key, 0.0) + w
        for m in acc.values():
            prefix_dev = max(prefix_dev, abs(m - want) / want)
    passed = max_dev <= tol and prefix_dev <= tol
    return CheckReport(
        "equipartition",
        passed,
        stats={
            "region_masses": masses,
            "max_relative_deviation": max_dev,
            "max_prefix_deviation": prefix_dev,
            "total_mass": total,
        },
        tolerances={"relative": tol},
    )


def check_avoidance(tree: PartitionTree, count: int, seed: int,
                    cloud: WeightedPointCloud | None = None) -> CheckReport:
    """For seeded hyperplanes: orient the bounding half-space to contain the
    center and demand an exact containment certificate from witness search.
    Must succeed count out of count; no statistical slack."""
    rng = _rng(seed)
    regs = regions(tree)
    successes = 0
    for _ in range(count):
        h = _halfspace_through(rng, tree, cloud)
        signs = witness_region(tree, h)
        if halfspace_contains_region(h, regs[signs]):
            successes += 1
    return CheckReport(
        "avoidance",
        successes == count,
        stats={"successes": successes, "count": count},
        tolerances={"required_successes": count},
        seed=seed,
    )


def check_depth(tree: PartitionTree, cloud: WeightedPointCloud, count: int,
                seed: int, slack: float = 1e-6) -> CheckReport:
    """Every half-space containing the center carries at least mass / 2^n of
    the cloud (the witness region sits inside it)."""
    rng = _rng(seed)
    n = tree.dimension
    floor = cloud.total_mass / 2**n * (1.0 - slack)
    worst = np.inf
    failures = 0
    for _ in range(count):
        h = _halfspace_through(rng, tree, cloud)
        m = halfspace_mass(cloud, h)
        worst = min(worst, m)
        if m < floor:
            failures += 1
    return CheckReport(
        "depth",
        failures == 0,
        stats={"min_mass": worst, "floor": floor, "count": count,
               "failures": failures},
        tolerances={"relative_slack": slack},
        seed=seed,
    )


def check_symmetry(source, z, cfg: SolverConfig | None = None, *,
                   count: int = 4096, seed: int = 0,
                   tol: float | None = None) -> CheckReport:
    """Centers of centrally symmetric measures sit at the symmetry point.

    A cloud source is symmetrized about z first and checked at the exact
    tolerance 50 * residual_tol; a spec source is sampled (count, seed) and
    needs an explicit statistical tolerance.
    """
    cfg = cfg or SolverConfig()
    z = np.asarray(z, dtype=float)
    if isinstance(source, WeightedPointCloud):
        cloud = symmetrize(source, z)
        tol = 50.0 * cfg.residual_tol if tol is None else tol
    elif isinstance(source, MeasureSpec):
        if tol is None:
            raise ValueError("sampled symmetry checks need an explicit tolerance")
        cloud = sample(source, count, seed)
    else:
        raise TypeError("source must be a WeightedPointCloud or MeasureSpec")
    system = CoordinateSystem.standard(cloud.dimension)
    tree = compute_center_partition(cloud, system, cfg)
    dev = float(np.max(np.abs(tree.center - z)))
    return CheckReport(
        "symmetry",
        dev <= tol,
        stats={"center": [float(v) for v in tree.center],
               "target": [float(v) for v in z],
               "max_deviation": dev},
        tolerances={"max_abs": tol},
        seed=seed,
    )


def check_prefix_dependence(cloud: WeightedPointCloud, k: int, shear,
                            cfg: SolverConfig | None = None) -> CheckReport:
    """Center coordinates 1..k survive any map that rewrites only later
    coordinates as functions of the first k.

    ``shear`` maps an (N, n) array to an (N, n) array; it must keep the first
    k columns unchanged (validated) and read nothing beyond them (caller's
    responsibility, unobservable from one application).
    """
    cfg = cfg or SolverConfig()
    if not 1 <= k <= cloud.dimension:
        raise ValueError("k must lie in 1..dimension")
    sheared_pts = np.asarray(shear(cloud.points.copy()), dtype=float)
    if sheared_pts.shape != cloud.points.shape:
        raise ValueError("shear must preserve the array shape")
    if not np.array_equal(sheared_pts[:, :k], cloud.points[:, :k]):
        raise ValueError("shear must not touch the first k coordinates")
    sheared = WeightedPointCloud(sheared_pts, cloud.weights, cloud.ids)
    system = CoordinateSystem.standard(cloud.dimension)
    before = compute_center_partition(cloud, system, cfg).center
    after = compute_center_partition(sheared, system, cfg).center
    dev = float(np.max(np.abs(before[:k] - after[:k])))
    tol = 10.0 * max(cfg.root_tol, cfg.residual_tol)
    return CheckReport(
        "prefix-dependence",
        dev <= tol,
        stats={"center_before": [float(v) for v in before],
               "center_after": [float(v) for v in after],
               "prefix_deviation": dev, "k": k},
        tolerances={"max_abs": tol},
    )


def check_continuity(cloud: WeightedPointCloud, background: MeasureSpec,
                     eps_list, cfg: SolverConfig | None = None, *,
                     count: int = 256, seed: int = 0,
                     rate_constant: float = 0.5) -> CheckReport:
    """Centers of cloud + eps * background drift back as eps shrinks.

    One background sample (count, seed) is scaled by each eps (mass eps *
    mass(cloud)); distances to the unperturbed center must be non-increasing
    along decreasing eps (up to 10 * residual_tol) and below
    rate_constant * sqrt(eps) * data scale.
    """
    cfg = cfg or SolverConfig()
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    if not eps_list or eps_list[-1] <= 0:
        raise ValueError("eps values must be positive")
    system = CoordinateSystem.standard(cloud.dimension)
    base_center = compute_center_partition(cloud, system, cfg).center
    extra = sample(background, count, seed)
    if extra.dimension != cloud.dimension:
        raise ValueError("background dimension mismatch")
    scale = float(np.max(np.ptp(cloud.points, axis=0)))
    new_ids = cloud.ids.max() + 1 + np.arange(count)
    distances = []
    for eps in eps_list:
        mixed = WeightedPointCloud(
            np.vstack([cloud.points, extra.points]),
            np.concatenate(
                [cloud.weights, np.full(count, eps * cloud.total_mass / count)]
            ),
            np.concatenate([cloud.ids, new_ids]),
        )
        center = compute_center_partition(mixed, system, cfg).center
        distances.append(float(np.linalg.norm(center - base_center)))
    slack = 10.0 * cfg.residual_tol
    monotone = all(
        d_small <= d_big + slack for d_big, d_small in zip(distances, distances[1:])
    )
    bounded = all(
        d <= rate_constant * np.sqrt(eps) * scale
        for eps, d in zip(eps_list, distances)
    )
    return CheckReport(
        "continuity",
        monotone and bounded,
        stats={"eps": eps_list, "distances": distances, "data_scale": scale,
               "monotone": monotone, "bounded": bounded},
        tolerances={"slack": slack, "rate_constant": rate_constant},
        seed=seed,
    )


def check_monotone_lift(cloud: WeightedPointCloud, form: HalfSpace,
                        steps: int = 20, slopes=None) -> CheckReport:
    """Mass lifted from the cut plane shrinks as the axis tilts along the form.

    With F the median cut of coordinate 1 and A = F intersect {form >= 0},
    the preimage of A under projection along an axis v is exactly

        { x : x_1 >= alpha  and  form(x) >= (x_1 - alpha) * formvec(v) },

    so the lifted mass is a function of the slope L = formvec(v) alone, and it
    is non-increasing in L.  By default the slopes run geometrically from 0 up
    past the largest ratio form(x) / (x_1 - alpha) in the data, where the mass
    strictly above the cut provably bottoms out.
    """
    if form.dimension != cloud.dimension:
        raise ValueError("form dimension mismatch")
    alpha = weighted_quantile(cloud.coordinate(0), cloud.weights, 0.5)
    x1 = cloud.coordinate(0)
    values = form.value(cloud.points)
    high = x1 > alpha
    on_plane = x1 == alpha

    default_slopes = slopes is None
    if default_slopes:
        # grow past the largest finite slope at which any strictly-above point
        # still qualifies, so the last mass provably bottoms out
        caps = values[high] / (x1[high] - alpha)
        top = 2.0 * max(float(np.max(caps, initial=0.0)), 0.0) + 1.0
        slopes = [0.0] + list(np.geomspace(1.0, top, steps - 1))
    slopes = [float(s) for s in slopes]

    masses = []
    for L in slopes:
        member = (x1 >= alpha) & (values >= (x1 - alpha) * L)
        masses.append(float(np.sum(cloud.weights[member])))
    plane_mass = float(np.sum(cloud.weights[on_plane & (values >= 0.0)]))

    if len(set(slopes)) == 1:
        passed = all(m == masses[0] for m in masses)
    else:
        monotone = all(
            b <= a for (sa, a), (sb, b) in zip(zip(slopes, masses),
                                               zip(slopes[1:], masses[1:]))
            if sb >= sa
        )
        passed = monotone and (masses[-1] == plane_mass if default_slopes else True)
    return CheckReport(
        "monotone-lift",
        passed,
        stats={"slopes": slopes, "masses": masses, "cut": alpha,
               "on_plane_mass": plane_mass},
        tolerances={},
    )


def oracle_axis_slope_2d(cloud: WeightedPointCloud, grid: int = 65,
                         resolution: float = 1e-9) -> float:
    """Scan the axis slope at which the two projected halves' medians cross.

    Grid search with adaptive refinement; the returned slope sits in a cell of
    width at most ``resolution`` around the sign change.
    """
    if cloud.dimension != 2:
        raise ValueError("oracle is two-dimensional only")
    alpha, low, high = split_at_median(cloud, 0)
    diff = _median_difference(low, high, alpha)

    radius = 1.0
    for _ in range(60):
        if np.sign(diff(-radius)) != np.sign(diff(radius)):
            break
        radius *= 4.0
    else:
        raise RuntimeError("median difference never changes sign")

    lo, hi = -radius, radius
    while hi - lo > resolution:
        ts = np.linspace(lo, hi, grid)
        fs = np.array([diff(t) for t in ts])
        exact = np.nonzero(fs == 0.0)[0]
        if exact.size:
            lo = hi = ts[exact[0]]
            break
        flip = np.nonzero(np.sign(fs[:-1]) != np.sign(fs[1:]))[0]
        if flip.size == 0:
            raise RuntimeError("sign change lost during refinement")
        lo, hi = ts[flip[0]], ts[flip[0] + 1]
    return 0.5 * (lo + hi)


def _median_difference(low, high, alpha):
    def diff(t: float) -> float:
        axis = np.array([1.0, t])
        m_low = weighted_quantile(
            project_measure(low, alpha, axis).points[:, 0], low.weights, 0.5
        )
        m_high = weighted_quantile(
            project_measure(high, alpha, axis).points[:, 0], high.weights, 0.5
        )
        return m_low - m_high
    return diff


def oracle_center_2d(cloud: WeightedPointCloud, grid: int = 65,
                     resolution: float = 1e-9) -> np.ndarray:
    """Brute-force two-dimensional center, independent of the solver.

    Cuts at the weighted median of coordinate 1, then scans the difference of
    the two projected halves' medians over an adaptively refined grid of axis
    slopes; the returned center is (cut, midpoint of the two medians) at the
    sign change.
    """
    t_hat = oracle_axis_slope_2d(cloud, grid, resolution)
    alpha, low, high = split_at_median(cloud, 0)
    axis = np.array([1.0, t_hat])
    m_low = weighted_quantile(
        project_measure(low, alpha, axis).points[:, 0], low.weights, 0.5
    )
    m_high = weighted_quantile(
        project_measure(high, alpha, axis).points[:, 0], high.weights, 0.5
    )
    return np.array([alpha, 0.5 * (m_low + m_high)])
