"""Finite nets of linear function classes and their L2 geometry.

A function ``f_t = <., t>`` is stored as its vector ``t``.  L2 distances come
from the true covariance ``Sigma_X``; the learner only sees the distorted
oracle matrix ``A``.  Both metrics are handled by mapping vectors through a
symmetric square root, after which every distance is Euclidean.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .errors import ConfigError, DimensionError, NotPSDError

PSD_TOL = 1e-10
DEDUP_TOL = 1e-9
METRIC_KINDS = ("oracle", "true")


def _psd_root(M, name, check=True):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square", shape=M.shape)
    scale = max(1.0, float(np.abs(M).max()) if M.size else 1.0)
    if check and not np.allclose(M, M.T, atol=PSD_TOL * scale):
        raise NotPSDError(f"{name} is not symmetric", matrix=name)
    vals, vecs = np.linalg.eigh((M + M.T) / 2)
    if check and vals.size and vals.min() < -PSD_TOL * scale:
        raise NotPSDError(f"{name} has a negative eigenvalue", matrix=name,
                          min_eigenvalue=float(vals.min()))
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


@dataclass(frozen=True)
class CovarianceStructure:
    """True covariance ``sigma_true`` and the learner-visible ``sigma_oracle``.

    The oracle matrix is expected to satisfy
    ``eta**-2 * Sigma <= A <= eta**2 * Sigma`` in the Loewner order.
    """

    sigma_true: np.ndarray
    sigma_oracle: np.ndarray
    eta: float = 1.0
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        st = np.array(self.sigma_true, dtype=np.float64)
        so = np.array(self.sigma_oracle, dtype=np.float64)
        if st.shape != so.shape:
            raise DimensionError("covariance shapes differ", true=st.shape, oracle=so.shape)
        if self.eta < 1:
            raise ConfigError("eta must be >= 1", eta=self.eta)
        st.setflags(write=False)
        so.setflags(write=False)
        object.__setattr__(self, "sigma_true", st)
        object.__setattr__(self, "sigma_oracle", so)
        if self.check:
            # validates symmetry and PSD up front
            self.root("true")
            self.root("oracle")

    @classmethod
    def identity(cls, dim, eta=1.0):
        eye = np.eye(dim)
        return cls(eye, eye.copy(), eta)

    @classmethod
    def with_distortion(cls, sigma, eta, seed=0):
        """Random oracle ``A = S^{1/2} Q diag(l) Q^T S^{1/2}`` with ``l`` in ``[eta^-2, eta^2]``."""
        sigma = np.asarray(sigma, dtype=np.float64)
        dim = sigma.shape[0]
        if eta == 1.0:
            return cls(sigma, sigma.copy(), 1.0)
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        lam = np.exp(rng.uniform(-2 * np.log(eta), 2 * np.log(eta), size=dim))
        root = _psd_root(sigma, "sigma_true")
        A = root @ (q * lam) @ q.T @ root
        return cls(sigma, (A + A.T) / 2, eta)

    @property
    def dim(self):
        return self.sigma_true.shape[0]

    def matrix(self, kind):
        if kind == "true":
            return self.sigma_true
        if kind == "oracle":
            return self.sigma_oracle
        raise ConfigError(f"unknown metric kind {kind!r}", kind=kind)

    @cached_property
    def _roots(self):
        return {
            "true": _psd_root(self.sigma_true, "sigma_true", self.check),
            "oracle": _psd_root(self.sigma_oracle, "sigma_oracle", self.check),
        }

    def root(self, kind):
        self.matrix(kind)
        return self._roots[kind]

    def coords(self, vectors, kind):
        """Map vectors so that the ``kind`` metric becomes Euclidean."""
        V = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        if V.shape[1] != self.dim:
            raise DimensionError("vector dimension does not match covariance",
                                 got=V.shape[1], expected=self.dim)
        return V @ self.root(kind)

    def norms(self, vectors, kind="true"):
        return np.linalg.norm(self.coords(vectors, kind), axis=1)

    def sandwich_holds(self, probes, tol=1e-9):
        """Check ``eta^-2 <Su,u> <= <Au,u> <= eta^2 <Su,u>`` on probe vectors."""
        P = np.atleast_2d(probes)
        qs = np.einsum("ij,jk,ik->i", P, self.sigma_true, P)
        qa = np.einsum("ij,jk,ik->i", P, self.sigma_oracle, P)
        e2 = self.eta ** 2
        slack = tol * np.maximum(1.0, np.abs(qs))
        return bool(np.all(qa >= qs / e2 - slack) and np.all(qa <= qs * e2 + slack))


def l2_distance(u, v, cov: CovarianceStructure, kind="oracle"):
    """``sqrt(<M(u-v), u-v>)`` with ``M`` the oracle or the true covariance."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1 or u.shape[0] != cov.dim:
        raise DimensionError("dimension mismatch", u=u.shape, v=v.shape, expected=cov.dim)
    M = cov.matrix(kind)
    diff = u - v
    q = float(diff @ M @ diff)
    if q < -PSD_TOL * max(1.0, float(np.abs(M).max())) * max(1.0, float(diff @ diff)):
        raise NotPSDError("negative quadratic form", kind=kind, value=q)
    return float(np.sqrt(max(q, 0.0)))


@dataclass(frozen=True)
class DistanceOracle:
    cov: CovarianceStructure
    kind: str = "oracle"

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ConfigError(f"unknown metric kind {self.kind!r}", kind=self.kind)

    def __call__(self, u, v):
        return l2_distance(u, v, self.cov, self.kind)

    def coords(self, vectors):
        return self.cov.coords(vectors, self.kind)

    def norms(self, vectors):
        return np.linalg.norm(self.coords(vectors), axis=1)


def dedup_indices(coords, tol):
    """Indices of points kept when merging points closer than ``tol``.

    The smallest index of every cluster survives; output is sorted.
    """
    n = coords.shape[0]
    if n <= 1 or tol <= 0:
        return np.arange(n)
    # exact duplicates first (first occurrence wins), then near duplicates
    _, first = np.unique(coords, axis=0, return_index=True)
    first = np.sort(first)
    if first.size < n:
        return first[dedup_indices(coords[first], tol)]
    pairs = cKDTree(coords).query_pairs(tol, output_type="ndarray")
    if pairs.size == 0:
        return np.arange(n)
    # j is dropped iff some kept i < j is within tol; solved by fixed-point
    # iteration (exact after as many rounds as the longest chain of near pairs)
    lo, hi = pairs.min(axis=1), pairs.max(axis=1)
    drop = np.zeros(n, dtype=bool)
    for _ in range(64):
        new = np.zeros(n, dtype=bool)
        new[hi[~drop[lo]]] = True
        if np.array_equal(new, drop):
            return np.flatnonzero(~drop)
        drop = new
    drop = np.zeros(n, dtype=bool)
    for i, j in sorted(zip(lo.tolist(), hi.tolist())):
        if not drop[i]:
            drop[j] = True
    return np.flatnonzero(~drop)


def _diameter(coords):
    n = coords.shape[0]
    if n < 2:
        return 0.0
    if n > 64 and coords.shape[1] <= 8:
        from scipy.spatial import ConvexHull, QhullError

        try:
            coords = coords[ConvexHull(coords).vertices]
        except (QhullError, ValueError):
            pass
    best = 0.0
    step = max(1, 2_000_000 // max(1, coords.shape[0] * coords.shape[1]))
    for lo in range(0, coords.shape[0], step):
        diff = coords[lo:lo + step, None, :] - coords[None, :, :]
        best = max(best, float(np.einsum("ijk,ijk->ij", diff, diff).max()))
    return float(np.sqrt(best))


@dataclass(frozen=True)
class FunctionClass:
    """A finite net ``{<., t> : t in points}`` with stable integer labels."""

    points: np.ndarray
    cov: CovarianceStructure
    labels: np.ndarray | None = None
    tol: float = DEDUP_TOL
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise DimensionError("a function class needs at least one point", shape=pts.shape)
        if pts.shape[1] != self.cov.dim:
            raise DimensionError("points do not match covariance dimension",
                                 got=pts.shape[1], expected=self.cov.dim)
        labels = np.arange(pts.shape[0]) if self.labels is None else np.array(self.labels)
        if labels.shape != (pts.shape[0],) or np.unique(labels).size != labels.size:
            raise ConfigError("labels must be unique, one per point")
        pts.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)
        if self.validate and pts.shape[0] > 1:
            keep = dedup_indices(self.true_coords, self.abs_tol)
            if keep.size != pts.shape[0]:
                raise ConfigError("points are not distinct in L2 at the configured tolerance",
                                  duplicates=int(pts.shape[0] - keep.size))

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @cached_property
    def true_coords(self):
        return self.cov.coords(self.points, "true")

    @cached_property
    def oracle_coords(self):
        return self.cov.coords(self.points, "oracle")

    def coords(self, kind):
        return self.true_coords if kind == "true" else self.oracle_coords

    @cached_property
    def norms(self):
        return np.linalg.norm(self.true_coords, axis=1)

    @cached_property
    def diameter(self):
        """``d_F``, the L2 diameter."""
        return _diameter(self.true_coords)

    @property
    def abs_tol(self):
        scale = self.diameter if self.__dict__.get("diameter") else _diameter(self.true_coords)
        return self.tol * max(scale, 1e-300)

    @property
    def contains_zero(self):
        return bool(np.min(self.norms) <= self.abs_tol)

    def zero_index(self):
        hits = np.flatnonzero(self.norms <= self.abs_tol)
        return int(hits[0]) if hits.size else None

    def index_of(self, vector, kind="true"):
        """Position of the point closest to ``vector`` (smallest index on ties)."""
        y = self.cov.coords(vector, kind)
        idx, _ = kernels.nearest(y, self.coords(kind))
        return int(idx[0])

    def shifted(self, index):
        """The class ``F - f_index``, which contains 0; distances are unchanged."""
        return FunctionClass(self.points - self.points[index], self.cov, self.labels, self.tol)

    def evaluate(self, X, index=None):
        """Function values on a sample: ``(n, len(F))`` or ``(n,)`` for one index."""
        X = np.asarray(X, dtype=np.float64)
        if index is None:
            return X @ self.points.T
        return X @ self.points[index]


def difference_class(F: FunctionClass) -> FunctionClass:
    """``F - F`` deduplicated in L2; centrally symmetric and containing 0."""
    P = F.points
    diffs = (P[:, None, :] - P[None, :, :]).reshape(-1, P.shape[1])
    # put 0 first so it keeps label 0 after dedup
    diffs = np.vstack([np.zeros((1, P.shape[1])), diffs])
    coords = F.cov.coords(diffs, "true")
    keep = dedup_indices(coords, F.tol * max(F.diameter, 1e-300))
    return FunctionClass(diffs[keep], F.cov, tol=F.tol, validate=False)


@dataclass(frozen=True)
class LocalizedSet:
    """Members of ``(H) ∩ rD`` closed under the dyadic scalings ``2^-j``.

    ``source`` gives the parent index each member was derived from and
    ``scale`` the factor applied to it.  Member 0 is always the zero vector.
    """

    parent: FunctionClass
    radius: float
    members: np.ndarray
    norms: np.ndarray
    source: np.ndarray
    scale: np.ndarray
    kind: str = "true"
    grid_depth: int = 8

    def __len__(self):
        return self.members.shape[0]

    @property
    def cov(self):
        return self.parent.cov

    @property
    def max_norm(self):
        """``R_H`` in the true L2 norm."""
        return float(self.cov.norms(self.members, "true").max())

    def as_class(self):
        return FunctionClass(self.members, self.parent.cov, tol=self.parent.tol, validate=False)


def localize(H: FunctionClass, r, grid_depth=8, kind="true") -> LocalizedSet:
    """Star-shaped localisation of a centrally symmetric set at radius ``r``.

    Members are ``lam * u`` for ``lam`` in ``{1, 1/2, ..., 2^-grid_depth}``
    whenever the result lies in the ball, plus the boundary projection
    ``r u / |u|`` of every ``u`` outside it.  The norm is the true L2 norm, or
    the oracle distance to 0 when ``kind == "oracle"``.
    """
    if not r > 0:
        from .errors import ArtifactError

        raise ArtifactError("localisation radius must be positive", radius=r)
    if kind not in METRIC_KINDS:
        raise ConfigError(f"unknown metric kind {kind!r}", kind=kind)
    P = H.points
    nrm = np.linalg.norm(H.coords(kind), axis=1)
    lams = 2.0 ** -np.arange(grid_depth + 1)
    rows, srcs, scl = [np.zeros((1, H.dim))], [np.array([-1])], [np.array([0.0])]
    nz = np.flatnonzero(nrm > H.abs_tol)
    for lam in lams:
        ok = nz[lam * nrm[nz] <= r]
        rows.append(lam * P[ok])
        srcs.append(ok)
        scl.append(np.full(ok.size, lam))
    out = nz[nrm[nz] > r]
    factor = r / nrm[out]
    rows.append(P[out] * factor[:, None])
    srcs.append(out)
    scl.append(factor)
    members = np.vstack(rows)
    source = np.concatenate(srcs)
    scale = np.concatenate(scl)
    keep = dedup_indices(H.cov.coords(members, "true"), H.abs_tol)
    members = members[keep]
    return LocalizedSet(H, float(r), members, np.linalg.norm(H.cov.coords(members, kind), axis=1),
                        source[keep], scale[keep], kind, grid_depth)


def greedy_packing(points, sep, metric: DistanceOracle):
    """Greedy maximal ``sep``-separated subset in label order.

    Returns ``(centers, assignment)``: centre positions (ascending) and, for
    every point, the position in ``centers`` of its nearest centre.
    """
    if not sep > 0:
        from .errors import ArtifactError

        raise ArtifactError("separation must be positive", sep=sep)
    P = points.points if isinstance(points, FunctionClass) else np.atleast_2d(points)
    if P.shape[0] == 0:
        from .errors import ArtifactError

        raise ArtifactError("cannot pack an empty set")
    Y = metric.coords(P)
    centers = kernels.greedy_centers(Y, sep)
    assign, _ = kernels.nearest(Y, Y[centers])
    return centers, assign


def packing_count(points, sep, metric):
    P = points.points if isinstance(points, FunctionClass) else np.atleast_2d(points)
    return int(kernels.greedy_centers(metric.coords(P), sep).size)


# ---------------------------------------------------------------------------
# generators and files
# ---------------------------------------------------------------------------


def l1_ball_lattice(dim, resolution):
    """All points of ``(1/resolution) Z^dim`` in the unit l1 ball, 0 first."""
    m = int(resolution)
    if m < 1:
        raise ConfigError("resolution must be >= 1", resolution=resolution)
    pts = [np.array(p) for p in product(range(-m, m + 1), repeat=dim) if sum(map(abs, p)) <= m]
    pts.sort(key=lambda p: (int(np.abs(p).sum()), tuple(p)))
    return np.array(pts, dtype=np.float64) / m


def l1_ball_vertices(dim, with_zero=True):
    eye = np.eye(dim)
    rows = [np.zeros((1, dim))] if with_zero else []
    rows += [eye, -eye]
    return np.vstack(rows)


def load_class_file(path) -> FunctionClass:
    """Read ``{dim, points, sigma_true, sigma_oracle, eta}`` JSON."""
    with open(path) as fh:
        data = json.load(fh)
    try:
        dim = int(data["dim"])
        points = np.asarray(data["points"], dtype=np.float64)
    except KeyError as exc:
        raise ConfigError(f"class file is missing {exc.args[0]!r}", path=str(path)) from exc
    sigma_true = np.asarray(data.get("sigma_true", np.eye(dim)), dtype=np.float64)
    sigma_oracle = np.asarray(data.get("sigma_oracle", sigma_true), dtype=np.float64)
    cov = CovarianceStructure(sigma_true, sigma_oracle, float(data.get("eta", 1.0)))
    if points.ndim != 2 or points.shape[1] != dim:
        raise DimensionError("points do not match dim", dim=dim, shape=points.shape)
    return FunctionClass(points, cov)


def save_class_file(F: FunctionClass, path):
    payload = {
        "dim": F.dim,
        "points": F.points.tolist(),
        "sigma_true": F.cov.sigma_true.tolist(),
        "sigma_oracle": F.cov.sigma_oracle.tolist(),
        "eta": F.cov.eta,
    }
    Path(path).write_text(json.dumps(payload))
