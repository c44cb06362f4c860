"""The partition tree: one global center, one axis per node, 2^n cone regions.

A tree over R^n stores only the coordinate frame, the center x, and a binary
tree of normalized axes; the cut value at depth k is the center's k-th
coordinate, so the shared-center requirement is structural rather than checked.
The axis of a depth-k node is sub-diagonal (zero below index k, exactly 1 at
index k), and the region for a sign word (e_1, ..., e_n) is

    x + pos(e_1 u^1, ..., e_n u^n),

where u^k is the axis of the node reached by the prefix (e_1, ..., e_{k-1}).
Prefixes of sign words give partial cones whose remaining directions are free.

Witness search walks the tree once, picking +1 wherever the half-space's
linear part is nonnegative on the node's axis; the resulting region passes the
exact containment certificate by construction, for every half-space holding
the center.  Point location scans regions in lexicographic sign order with
-1 first, so boundary points resolve deterministically.

Documents use the ``yaoyao-partition/v1`` JSON schema; floats survive the
round trip exactly (shortest round-trip decimal both ways).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .geometry import (
    ConeRegion,
    HalfSpace,
    SignSequence,
    SubDiagonalBasis,
    CoordinateSystem,
    cone_coefficients,
    membership_tolerance,
)

__all__ = [
    "PartitionNode",
    "PartitionTree",
    "PartitionFormatError",
    "regions",
    "prefix_region",
    "witness_region",
    "region_of_point",
    "locate_points",
    "serialize",
    "deserialize",
    "save",
    "load",
]

SCHEMA = "yaoyao-partition/v1"


class PartitionFormatError(ValueError):
    """Schema violation, version mismatch, or invariant failure on load."""


@dataclass(frozen=True, eq=False)
class PartitionNode:
    """One lifting level: a normalized axis and the two sub-partitions."""

    axis: np.ndarray
    neg: "PartitionNode | None"
    pos: "PartitionNode | None"

    def __post_init__(self):
        axis = np.array(self.axis, dtype=float)
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)

    def __eq__(self, other):
        if not isinstance(other, PartitionNode):
            return NotImplemented
        return (
            np.array_equal(self.axis, other.axis)
            and self.neg == other.neg
            and self.pos == other.pos
        )


@dataclass(frozen=True, eq=False)
class PartitionTree:
    """Coordinate frame, global center (in that frame), axis tree, provenance."""

    system: CoordinateSystem
    center: np.ndarray
    root: PartitionNode
    meta: dict

    def __post_init__(self):
        center = np.array(self.center, dtype=float)
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        n = self.system.dimension
        if center.shape != (n,):
            raise PartitionFormatError("center length must equal the dimension")
        self._validate_node(self.root, 1, n)

    @staticmethod
    def _validate_node(node: PartitionNode, depth: int, n: int):
        if node is None:
            raise PartitionFormatError(f"missing node at depth {depth} (paths must reach depth {n})")
        axis = node.axis
        if axis.shape != (n,):
            raise PartitionFormatError(f"axis at depth {depth} has wrong length")
        if axis[depth - 1] != 1.0:
            raise PartitionFormatError(
                f"axis at depth {depth} is not normalized (component {depth} must be 1)"
            )
        if np.any(axis[: depth - 1] != 0.0):
            raise PartitionFormatError(
                f"axis at depth {depth} must vanish below its own coordinate"
            )
        if (node.neg is None) != (node.pos is None):
            raise PartitionFormatError(f"node at depth {depth} is missing one child")
        if depth == n:
            if node.neg is not None:
                raise PartitionFormatError("paths must end exactly at the dimension")
        else:
            PartitionTree._validate_node(node.neg, depth + 1, n)
            PartitionTree._validate_node(node.pos, depth + 1, n)

    @property
    def dimension(self) -> int:
        return self.system.dimension

    def node_at(self, signs) -> PartitionNode:
        """Node reached by descending along a sign prefix."""
        node = self.root
        for s in signs:
            node = node.pos if s > 0 else node.neg
            if node is None:
                raise ValueError("sign prefix longer than the tree depth")
        return node

    def path_axes(self, signs) -> np.ndarray:
        """Stacked axes u^1..u^{k+1} along a sign prefix of length k."""
        axes = [self.root.axis]
        node = self.root
        for s in signs:
            node = node.pos if s > 0 else node.neg
            if node is None:
                break
            axes.append(node.axis)
        return np.vstack(axes)

    def __eq__(self, other):
        if not isinstance(other, PartitionTree):
            return NotImplemented
        return (
            self.system == other.system
            and np.array_equal(self.center, other.center)
            and self.root == other.root
            and self.meta == other.meta
        )


def _region_for(tree: PartitionTree, signs: SignSequence) -> ConeRegion:
    gens = tree.path_axes(signs[:-1]) if signs else np.empty((0, tree.dimension))
    return ConeRegion(tree.center, SubDiagonalBasis(gens), signs)


def regions(tree: PartitionTree) -> dict[SignSequence, ConeRegion]:
    """All 2^n full regions, keyed by their sign words.

    Generator k of region(e) is the axis of the node at prefix (e_1..e_{k-1});
    in particular generator 1 is the root axis for every region.
    """
    out = {}
    for raw in product((-1, 1), repeat=tree.dimension):
        signs = SignSequence(raw)
        out[signs] = _region_for(tree, signs)
    return out


def prefix_region(tree: PartitionTree, signs) -> ConeRegion:
    """Partial cone for a sign prefix of length k < n; free in the last n-k
    coordinate directions.  The empty prefix is the whole space."""
    signs = SignSequence(signs)
    if len(signs) >= tree.dimension:
        raise ValueError("prefix must be shorter than the dimension; use regions()")
    return _region_for(tree, signs)


def witness_region(tree: PartitionTree, h: HalfSpace) -> SignSequence:
    """Sign word of a region contained in the half-space (which must hold the
    center).  Chooses +1 at each node iff the half-space's linear part is
    nonnegative on the node's axis; the certificate is exact, no sampling."""
    if h.dimension != tree.dimension:
        raise ValueError("half-space dimension mismatch")
    if h.value(tree.center) < 0.0:
        raise ValueError("half-space does not contain the center")
    signs = []
    node = tree.root
    while node is not None:
        s = 1 if h.derivative(node.axis) >= 0.0 else -1
        signs.append(s)
        node = node.pos if s > 0 else node.neg
    return SignSequence(signs)


def locate_points(tree: PartitionTree, points: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Sign words containing each point, resolved lexicographically (-1 first).

    Returns an (N, n) array of +-1.  Raises if some point lies in no region
    within tolerance, which indicates a corrupted tree.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != tree.dimension:
        raise ValueError("point dimension mismatch")
    if tol is None:
        tols = np.array([membership_tolerance(tree.center, p) for p in pts])
    else:
        tols = np.full(pts.shape[0], float(tol))
    assigned = np.zeros((pts.shape[0], tree.dimension), dtype=np.int64)
    remaining = np.ones(pts.shape[0], dtype=bool)
    for signs, region in regions(tree).items():
        if not np.any(remaining):
            break
        idx = np.nonzero(remaining)[0]
        coeffs = np.atleast_2d(cone_coefficients(region, pts[idx]))
        inside = np.all(coeffs >= -tols[idx, None], axis=1)
        hit = idx[inside]
        assigned[hit] = signs
        remaining[hit] = False
    if np.any(remaining):
        bad = int(np.nonzero(remaining)[0][0])
        raise ValueError(
            f"point {bad} lies in no region within tolerance; corrupted tree?"
        )
    return assigned


def region_of_point(tree: PartitionTree, p, tol: float | None = None) -> SignSequence:
    """Sign word of the lexicographically first region containing the point
    (-1 before +1), so boundary points and the center itself resolve
    deterministically to all -1 choices."""
    return SignSequence(locate_points(tree, np.atleast_2d(p), tol)[0])


def _node_to_json(node: PartitionNode | None):
    if node is None:
        return None
    return {
        "axis": [float(v) for v in node.axis],
        "neg": _node_to_json(node.neg),
        "pos": _node_to_json(node.pos),
    }


def _node_from_json(doc) -> PartitionNode | None:
    if doc is None:
        return None
    if not isinstance(doc, dict):
        raise PartitionFormatError("node must be an object or null")
    missing = {"axis", "neg", "pos"} - set(doc)
    if missing:
        raise PartitionFormatError(f"node is missing keys {sorted(missing)}")
    axis = doc["axis"]
    if not isinstance(axis, list) or not all(isinstance(v, (int, float)) for v in axis):
        raise PartitionFormatError("node axis must be a list of numbers")
    return PartitionNode(
        np.asarray(axis, dtype=float),
        _node_from_json(doc["neg"]),
        _node_from_json(doc["pos"]),
    )


def serialize(tree: PartitionTree) -> dict:
    """JSON-ready document; floats keep their exact binary64 values."""
    return {
        "schema": SCHEMA,
        "dim": tree.dimension,
        "system": {
            "matrix": [[float(v) for v in row] for row in tree.system.matrix],
            "offset": [float(v) for v in tree.system.offset],
        },
        "center": [float(v) for v in tree.center],
        "root": _node_to_json(tree.root),
        "meta": tree.meta,
    }


def deserialize(doc: dict) -> PartitionTree:
    """Parse and fully re-validate a ``yaoyao-partition/v1`` document."""
    if not isinstance(doc, dict):
        raise PartitionFormatError("partition document must be a JSON object")
    schema = doc.get("schema")
    if schema != SCHEMA:
        if isinstance(schema, str) and schema.startswith("yaoyao-partition/"):
            raise PartitionFormatError(f"unsupported schema version {schema!r}")
        raise PartitionFormatError(f"not a partition document (schema={schema!r})")
    missing = {"dim", "system", "center", "root", "meta"} - set(doc)
    if missing:
        raise PartitionFormatError(f"document is missing keys {sorted(missing)}")
    try:
        system = CoordinateSystem(
            np.asarray(doc["system"]["matrix"], dtype=float),
            np.asarray(doc["system"]["offset"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise PartitionFormatError(f"bad coordinate system: {exc}") from exc
    if system.dimension != doc["dim"]:
        raise PartitionFormatError("'dim' does not match the coordinate system")
    root = _node_from_json(doc["root"])
    if root is None:
        raise PartitionFormatError("document has no root node")
    try:
        return PartitionTree(
            system, np.asarray(doc["center"], dtype=float), root, doc["meta"]
        )
    except PartitionFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise PartitionFormatError(str(exc)) from exc


def save(tree: PartitionTree, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(serialize(tree), fh, indent=2)
        fh.write("\n")


def load(path) -> PartitionTree:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PartitionFormatError(f"invalid JSON: {exc}") from exc
    return deserialize(doc)
