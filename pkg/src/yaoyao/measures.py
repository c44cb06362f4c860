"""Finite weighted point clouds and the measure operations the solver needs.

A cloud is the empirical stand-in for a finite measure: rows of coordinates
(in some coordinate system's frame), strictly positive weights, and stable
integer ids.  Storage order is ascending id, and every mass aggregation runs
in that order, so results do not depend on any evaluation schedule.

The median convention is fixed once for the whole library: a quantile is the
midpoint of the quantile interval, and an equal-mass split assigns mass tied
at the cut greedily by ascending id to the low side, splitting at most one
point's weight.  This makes every split reproducible and exactly mass-halving,
which is what pins down a canonical center for atomic inputs (clouds put mass
on hyperplanes, so for them the center is a convention, not a theorem).

Randomness is counter-based and fully documented: every generator is a
numpy Philox stream keyed by the caller's 64-bit seed, and each spec kind
draws blocks in a fixed order (see ``sample``).  Identical (spec, N, seed)
therefore give bit-identical clouds.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .geometry import HalfSpace

__all__ = [
    "WeightedPointCloud",
    "MeasureSpec",
    "QuantileConvention",
    "sample",
    "weighted_quantile",
    "split_at_median",
    "project_measure",
    "halfspace_mass",
    "regularize",
    "symmetrize",
    "read_csv",
    "write_csv",
]


@dataclass(frozen=True, eq=False)
class WeightedPointCloud:
    """N weighted points in R^n with unique integer ids, stored in id order."""

    points: np.ndarray
    weights: np.ndarray
    ids: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        w = np.array(self.weights, dtype=float)
        ids = np.array(self.ids, dtype=np.int64)
        if pts.ndim != 2:
            raise ValueError("points must be an (N, n) array")
        n_pts = pts.shape[0]
        if w.shape != (n_pts,) or ids.shape != (n_pts,):
            raise ValueError("points, weights and ids must have matching length")
        if n_pts == 0:
            raise ValueError("cloud must contain at least one point")
        if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and > 0")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if len(np.unique(ids)) != n_pts:
            raise ValueError("ids must be unique")
        order = np.argsort(ids)
        pts, w, ids = pts[order], w[order], ids[order]
        for a in (pts, w, ids):
            a.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "ids", ids)

    @classmethod
    def from_points(cls, points, weights=None) -> "WeightedPointCloud":
        """Build with ids 0..N-1 and unit weights by default."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if weights is None:
            weights = np.ones(pts.shape[0])
        return cls(pts, weights, np.arange(pts.shape[0]))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def coordinate(self, k: int) -> np.ndarray:
        return self.points[:, k]

    def __eq__(self, other):
        if not isinstance(other, WeightedPointCloud):
            return NotImplemented
        return (
            np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.ids, other.ids)
        )


@dataclass(frozen=True)
class QuantileConvention:
    """Identifier of the one quantile rule this library uses."""

    rule: str = "median-interval-midpoint"


_SPEC_KINDS = (
    "gaussian-mixture",
    "uniform-box",
    "uniform-simplex",
    "finite-atoms",
    "mixture",
)


@dataclass(frozen=True)
class MeasureSpec:
    """Generative description of a measure, loadable from JSON.

    kinds and their params:
      gaussian-mixture: means (m, n), cov_factors (m, n, n) with cov = F F^T,
                        weights (m)
      uniform-box:      lo (n), hi (n) opposite corners, lo < hi
      uniform-simplex:  vertices (n+1, n), affinely independent
      finite-atoms:     points (m, n), weights (m)
      mixture:          components (list of MeasureSpec dicts), weights (m)

    ``symmetry_center`` optionally declares the point the measure is meant to
    be symmetric about (used by symmetry checks, not by sampling).
    """

    kind: str
    params: dict
    symmetry_center: tuple | None = None

    def __post_init__(self):
        if self.kind not in _SPEC_KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        self._validate()
        if self.symmetry_center is not None:
            object.__setattr__(
                self, "symmetry_center", tuple(float(z) for z in self.symmetry_center)
            )

    def _validate(self):
        p = self.params
        if self.kind == "gaussian-mixture":
            means = np.asarray(p["means"], dtype=float)
            factors = np.asarray(p["cov_factors"], dtype=float)
            w = np.asarray(p["weights"], dtype=float)
            if means.ndim != 2:
                raise ValueError("means must be (m, n)")
            m, n = means.shape
            if factors.shape != (m, n, n):
                raise ValueError("cov_factors must be (m, n, n)")
            if w.shape != (m,) or np.any(w <= 0):
                raise ValueError("mixture weights must be positive, one per component")
            for i, f in enumerate(factors):
                if np.linalg.matrix_rank(f) < n:
                    raise ValueError(f"covariance factor {i} is rank deficient")
        elif self.kind == "uniform-box":
            lo = np.asarray(p["lo"], dtype=float)
            hi = np.asarray(p["hi"], dtype=float)
            if lo.shape != hi.shape or lo.ndim != 1:
                raise ValueError("box corners must be two vectors of equal length")
            if np.any(hi <= lo):
                raise ValueError("box must have positive extent in every coordinate")
        elif self.kind == "uniform-simplex":
            v = np.asarray(p["vertices"], dtype=float)
            if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
                raise ValueError("simplex needs n+1 vertices in R^n")
            edges = v[1:] - v[0]
            if np.linalg.matrix_rank(edges) < v.shape[1]:
                raise ValueError("simplex vertices are affinely dependent")
        elif self.kind == "finite-atoms":
            pts = np.asarray(p["points"], dtype=float)
            w = np.asarray(p["weights"], dtype=float)
            if pts.ndim != 2 or w.shape != (pts.shape[0],):
                raise ValueError("finite-atoms needs (m, n) points and m weights")
            if np.any(w <= 0):
                raise ValueError("atom weights must be positive")
        elif self.kind == "mixture":
            comps = p["components"]
            w = np.asarray(p["weights"], dtype=float)
            if len(comps) != len(w) or np.any(w <= 0):
                raise ValueError("mixture weights must be positive, one per component")
            for c in comps:
                if not isinstance(c, MeasureSpec):
                    raise ValueError("mixture components must be MeasureSpec")

    @property
    def dimension(self) -> int:
        p = self.params
        if self.kind == "gaussian-mixture":
            return np.asarray(p["means"]).shape[1]
        if self.kind == "uniform-box":
            return len(p["lo"])
        if self.kind == "uniform-simplex":
            return np.asarray(p["vertices"]).shape[1]
        if self.kind == "finite-atoms":
            return np.asarray(p["points"]).shape[1]
        return self.params["components"][0].dimension

    @classmethod
    def gaussian(cls, mean, cov_factor=None) -> "MeasureSpec":
        """Single Gaussian; identity covariance factor by default."""
        mean = np.asarray(mean, dtype=float)
        if cov_factor is None:
            cov_factor = np.eye(len(mean))
        return cls(
            "gaussian-mixture",
            {"means": [list(mean)], "cov_factors": [np.asarray(cov_factor).tolist()],
             "weights": [1.0]},
        )

    @classmethod
    def uniform_box(cls, lo, hi) -> "MeasureSpec":
        return cls("uniform-box", {"lo": list(lo), "hi": list(hi)})

    @classmethod
    def finite_atoms(cls, points, weights) -> "MeasureSpec":
        return cls(
            "finite-atoms",
            {"points": np.asarray(points, dtype=float).tolist(),
             "weights": list(weights)},
        )

    def to_json(self) -> dict:
        doc = {"kind": self.kind}
        if self.kind == "mixture":
            doc["components"] = [c.to_json() for c in self.params["components"]]
            doc["weights"] = list(map(float, self.params["weights"]))
        else:
            for key, val in self.params.items():
                doc[key] = np.asarray(val, dtype=float).tolist()
        if self.symmetry_center is not None:
            doc["symmetry_center"] = list(self.symmetry_center)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "MeasureSpec":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ValueError("measure spec document must be an object with a 'kind'")
        kind = doc["kind"]
        z = doc.get("symmetry_center")
        params = {k: v for k, v in doc.items() if k not in ("kind", "symmetry_center")}
        if kind == "mixture":
            params["components"] = [cls.from_json(c) for c in doc["components"]]
        return cls(kind, params, symmetry_center=z)

    @classmethod
    def load(cls, path) -> "MeasureSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _draw(spec: MeasureSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` points from one spec using the shared stream.

    Block order per kind (documented so streams are reproducible):
      uniform-box:      one (count, n) uniform block
      gaussian-mixture: component labels, then one (count, n) normal block
      uniform-simplex:  one (count, n+1) Dirichlet(1) block of barycentric weights
      finite-atoms:     one (count,) categorical block
      mixture:          component labels, then each component's block in
                        component order (output grouped by component)
    """
    p = spec.params
    if spec.kind == "uniform-box":
        lo = np.asarray(p["lo"], dtype=float)
        hi = np.asarray(p["hi"], dtype=float)
        u = rng.random((count, lo.shape[0]))
        return lo + u * (hi - lo)
    if spec.kind == "gaussian-mixture":
        means = np.asarray(p["means"], dtype=float)
        factors = np.asarray(p["cov_factors"], dtype=float)
        w = np.asarray(p["weights"], dtype=float)
        labels = rng.choice(means.shape[0], size=count, p=w / w.sum())
        z = rng.standard_normal((count, means.shape[1]))
        out = np.empty_like(z)
        for j in range(means.shape[0]):
            mask = labels == j
            out[mask] = means[j] + z[mask] @ factors[j].T
        return out
    if spec.kind == "uniform-simplex":
        v = np.asarray(p["vertices"], dtype=float)
        bary = rng.dirichlet(np.ones(v.shape[0]), size=count)
        return bary @ v
    if spec.kind == "finite-atoms":
        pts = np.asarray(p["points"], dtype=float)
        w = np.asarray(p["weights"], dtype=float)
        idx = rng.choice(pts.shape[0], size=count, p=w / w.sum())
        return pts[idx]
    # mixture
    comps = p["components"]
    w = np.asarray(p["weights"], dtype=float)
    labels = rng.choice(len(comps), size=count, p=w / w.sum())
    blocks = []
    for j, comp in enumerate(comps):
        nj = int(np.sum(labels == j))
        if nj:
            blocks.append(_draw(comp, nj, rng))
    return np.vstack(blocks)


def sample(spec: MeasureSpec, count: int, seed: int) -> WeightedPointCloud:
    """Draw a unit-weight cloud of ``count`` points from the spec.

    The generator is Philox4x64 keyed by ``seed``; identical (spec, count,
    seed) give bit-identical clouds.  A finite-atoms spec with count equal to
    its atom count returns the atoms themselves, with their own weights.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if spec.kind == "finite-atoms":
        pts = np.asarray(spec.params["points"], dtype=float)
        if pts.shape[0] == count:
            return WeightedPointCloud.from_points(pts, spec.params["weights"])
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    return WeightedPointCloud.from_points(_draw(spec, count, rng))


def weighted_quantile(values, weights, q: float) -> float:
    """Midpoint of the q-quantile interval of a weighted sample.

    With W the cumulative weight of the sorted values and target t = q * total,
    returns (lo + hi) / 2 where lo is the smallest value with W >= t and hi the
    smallest value with W > t (clamped to the largest value).
    """
    v = np.asarray(values, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("empty input")
    if v.shape != w.shape:
        raise ValueError("values and weights must have equal length")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly between 0 and 1")
    order = np.argsort(v, kind="stable")
    v_sorted = v[order]
    cw = np.cumsum(w[order])
    target = q * cw[-1]
    lo_idx = int(np.searchsorted(cw, target, side="left"))
    hi_idx = int(np.searchsorted(cw, target, side="right"))
    lo_idx = min(lo_idx, v_sorted.size - 1)
    hi_idx = min(hi_idx, v_sorted.size - 1)
    return 0.5 * (v_sorted[lo_idx] + v_sorted[hi_idx])


def split_at_median(
    cloud: WeightedPointCloud, axis_index: int = 0
) -> tuple[float, WeightedPointCloud, WeightedPointCloud]:
    """Cut the cloud at the weighted median of one coordinate into exact halves.

    Points strictly below the median value go low, strictly above go high.
    Mass tied at the median is assigned greedily by ascending id to the low
    side until it holds exactly half the total, splitting at most one point's
    weight; a split point appears in both halves with the same id.
    """
    coord = cloud.coordinate(axis_index)
    alpha = weighted_quantile(coord, cloud.weights, 0.5)
    below = coord < alpha
    above = coord > alpha
    tied = ~below & ~above

    half = 0.5 * cloud.total_mass
    need = half - float(np.sum(cloud.weights[below]))

    low_idx, low_w = list(np.nonzero(below)[0]), list(cloud.weights[below])
    high_idx, high_w = list(np.nonzero(above)[0]), list(cloud.weights[above])
    for i in np.nonzero(tied)[0]:
        wi = cloud.weights[i]
        if need >= wi:
            low_idx.append(i)
            low_w.append(wi)
            need -= wi
        elif need > 0.0:
            low_idx.append(i)
            low_w.append(need)
            high_idx.append(i)
            high_w.append(wi - need)
            need = 0.0
        else:
            high_idx.append(i)
            high_w.append(wi)

    def build(idx, w):
        idx = np.asarray(idx, dtype=int)
        return WeightedPointCloud(cloud.points[idx], np.asarray(w), cloud.ids[idx])

    return float(alpha), build(low_idx, low_w), build(high_idx, high_w)


def project_measure(
    side: WeightedPointCloud, alpha: float, axis: np.ndarray
) -> WeightedPointCloud:
    """Slide each point along the axis into the cut plane and drop coordinate 1.

    x maps to x - (x_1 - alpha) * axis, whose first coordinate is alpha for a
    normalized axis (axis_1 = 1); the remaining n-1 coordinates are returned.
    The identical formula handles both halves, since projecting along -axis
    from below the plane traces the same line.  Weights and ids are preserved.
    """
    axis = np.asarray(axis, dtype=float)
    if side.dimension < 2:
        raise ValueError("projection needs dimension >= 2")
    if axis.shape != (side.dimension,):
        raise ValueError("axis dimension mismatch")
    if axis[0] != 1.0:
        raise ValueError("axis must be normalized: first component exactly 1")
    reach = side.points[:, 0] - alpha
    shifted = side.points[:, 1:] - reach[:, None] * axis[1:]
    return WeightedPointCloud(shifted, side.weights, side.ids)


def halfspace_mass(cloud: WeightedPointCloud, h: HalfSpace) -> float:
    """Total weight on the closed side normal . x >= offset, summed in id order."""
    if h.dimension != cloud.dimension:
        raise ValueError("half-space dimension mismatch")
    return float(np.sum(cloud.weights[h.contains(cloud.points)]))


def regularize(
    cloud: WeightedPointCloud,
    background: MeasureSpec,
    p: float,
    count: int,
    seed: int,
) -> WeightedPointCloud:
    """Mix in a sampled background carrying 1/p of the cloud's mass.

    The result has the original points unchanged plus ``count`` background
    samples of equal weight totalling mass(cloud) / p, so total mass becomes
    (1 + 1/p) times the original.  Fresh ids continue past the current maximum.
    """
    if p <= 0:
        raise ValueError("p must be > 0")
    if count < 1:
        raise ValueError("count must be >= 1")
    extra = sample(background, count, seed)
    if extra.dimension != cloud.dimension:
        raise ValueError("background dimension mismatch")
    extra_mass = cloud.total_mass / p
    new_ids = cloud.ids.max() + 1 + np.arange(count)
    return WeightedPointCloud(
        np.vstack([cloud.points, extra.points]),
        np.concatenate([cloud.weights, np.full(count, extra_mass / count)]),
        np.concatenate([cloud.ids, new_ids]),
    )


def symmetrize(cloud: WeightedPointCloud, z) -> WeightedPointCloud:
    """The average of the cloud and its reflection through z.

    Every point keeps half its weight and contributes a mirror image 2z - x,
    so the output is reflection-invariant as a weighted multiset.  Ids are
    reassigned 0..2N-1 (originals first, mirrors second, both in id order).
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (cloud.dimension,):
        raise ValueError("symmetry center dimension mismatch")
    mirrored = 2.0 * z - cloud.points
    return WeightedPointCloud(
        np.vstack([cloud.points, mirrored]),
        np.concatenate([0.5 * cloud.weights, 0.5 * cloud.weights]),
        np.arange(2 * cloud.size),
    )


def write_csv(cloud: WeightedPointCloud, path_or_file) -> None:
    """Write ``x1,...,xn,w`` rows, decimal point, shortest round-trip floats."""

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(cloud.dimension)] + ["w"])
        for row, w in zip(cloud.points, cloud.weights):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(w))])

    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_file)


def read_csv(path_or_file) -> WeightedPointCloud:
    """Read a ``x1,...,xn[,w]`` table; a missing weight column means 1.0."""
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        text = path_or_file.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty CSV: missing header") from None
    header = [h.strip() for h in header]
    has_w = header and header[-1] == "w"
    coord_names = header[:-1] if has_w else header
    expected = [f"x{i + 1}" for i in range(len(coord_names))]
    if coord_names != expected:
        raise ValueError(f"CSV header must be x1,...,xn[,w]; got {header}")
    points, weights = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"CSV row {lineno} has {len(row)} fields, expected {len(header)}")
        vals = [float(v) for v in row]
        if has_w:
            points.append(vals[:-1])
            weights.append(vals[-1])
        else:
            points.append(vals)
            weights.append(1.0)
    if not points:
        raise ValueError("CSV contains no data rows")
    return WeightedPointCloud.from_points(np.asarray(points), np.asarray(weights))
