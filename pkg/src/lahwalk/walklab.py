"""Random-walk simulation and hull face counts in low dimension.

Walks start at the origin and take i.i.d. increments with a density, so the
point set is exchangeable and almost surely in general position.  Hulls are
counted exactly for ``d = 2, 3`` (floating-point predicates with an exact
rational fallback) and by one linear program per point for ``d >= 4``, where
only ``f_0`` is certified.
"""

from __future__ import annotations

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from . import bigcomb as bc
from .errors import DegenerateError, DomainError, ResourceError
from .hullmodel import expected_faces
from .sampling import RngHandle

__all__ = [
    "LAWS",
    "LP_MARGIN",
    "MAX_ATTEMPTS",
    "MonteCarloReport",
    "WalkConfig",
    "WalkSample",
    "hull_faces_2d",
    "hull_faces_3d",
    "monte_carlo_report",
    "orient2d",
    "orient3d",
    "run_trial",
    "simulate_walk",
    "vertex_count_lp",
]

LAWS = ("gaussian", "cauchy")
LP_MARGIN = 1e-9
MAX_ATTEMPTS = 8
# non-vertices come back from the simplex solver with a separation of exactly 0
_LP_ZERO = 1e-15

_EPS = sys.float_info.epsilon / 2
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_O3D_BOUND = (7.0 + 56.0 * _EPS) * _EPS


@dataclass(frozen=True)
class WalkConfig:
    d: int
    n: int
    law: str = "gaussian"
    trials: int = 2000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"d must be >= 2, got {self.d}")
        if self.n < self.d:
            raise DomainError(f"need n >= d, got n={self.n}, d={self.d}")
        if self.law not in LAWS:
            raise DomainError(f"law must be one of {LAWS}, got {self.law!r}")
        if self.trials < 2:
            raise DomainError("need at least 2 trials for a standard error")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if self.d >= 4 and self.n > 400:
            raise ResourceError("LP vertex test limited to n <= 400")


@dataclass
class WalkSample:
    """One realization: the points, the f-vector found and per-item certificates.

    For ``d = 2`` the certificate lists hull vertex indices in counter-clockwise
    order, for ``d = 3`` the outward-oriented facets, and for ``d >= 4`` the LP
    margin of every point.  ``attempts`` counts degenerate resamples.
    """

    points: np.ndarray
    fvector: tuple
    certificates: list = field(default_factory=list)
    attempts: int = 0


# ---------------------------------------------------------------- walks


def simulate_walk(cfg: WalkConfig, trial: int, attempt: int = 0) -> np.ndarray:
    """Points ``S_0 = 0, S_1, ..., S_n`` as an ``(n + 1, d)`` array.

    The stream is keyed by ``(cfg.seed, trial)`` so trials are reproducible
    in any order.  The Cauchy law is the isotropic one, ``Z / |W|`` with
    ``Z`` standard normal in ``R^d`` and ``W`` standard normal on the line.
    """
    gen = RngHandle(cfg.seed, trial).generator(attempt)
    steps = gen.standard_normal((cfg.n, cfg.d))
    if cfg.law == "cauchy":
        steps /= np.abs(gen.standard_normal((cfg.n, 1)))
    pts = np.zeros((cfg.n + 1, cfg.d))
    np.cumsum(steps, axis=0, out=pts[1:])
    return pts


# ------------------------------------------------------------ predicates


def _exact(x) -> Fraction:
    return Fraction(float(x))


def orient2d(a, b, c) -> int:
    """Sign of the turn ``a -> b -> c`` (+1 counter-clockwise), exact."""
    left = (a[0] - c[0]) * (b[1] - c[1])
    right = (a[1] - c[1]) * (b[0] - c[0])
    det = left - right
    if abs(det) > _CCW_BOUND * (abs(left) + abs(right)):
        return 1 if det > 0 else -1
    ax, ay, bx, by, cx, cy = map(_exact, (a[0], a[1], b[0], b[1], c[0], c[1]))
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def orient3d(a, b, c, p) -> int:
    """Sign of ``det[b - a, c - a, p - a]``, exact.

    Positive when ``p`` lies on the side of the normal ``(b - a) x (c - a)``.
    """
    ad = [a[i] - p[i] for i in range(3)]
    bd = [b[i] - p[i] for i in range(3)]
    cd = [c[i] - p[i] for i in range(3)]
    t1 = bd[0] * cd[1] - bd[1] * cd[0]
    t2 = cd[0] * ad[1] - cd[1] * ad[0]
    t3 = ad[0] * bd[1] - ad[1] * bd[0]
    det = ad[2] * t1 + bd[2] * t2 + cd[2] * t3
    perm = (
        abs(ad[2]) * (abs(bd[0] * cd[1]) + abs(bd[1] * cd[0]))
        + abs(bd[2]) * (abs(cd[0] * ad[1]) + abs(cd[1] * ad[0]))
        + abs(cd[2]) * (abs(ad[0] * bd[1]) + abs(ad[1] * bd[0]))
    )
    # det[a-p, b-p, c-p] equals -det[b-a, c-a, p-a]
    if abs(det) > _O3D_BOUND * perm:
        return -1 if det > 0 else 1
    A = [_exact(v) for v in a]
    B = [_exact(v) for v in b]
    C = [_exact(v) for v in c]
    P = [_exact(v) for v in p]
    u = [B[i] - A[i] for i in range(3)]
    v = [C[i] - A[i] for i in range(3)]
    w = [P[i] - A[i] for i in range(3)]
    det = (
        u[0] * (v[1] * w[2] - v[2] * w[1])
        - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0])
    )
    return (det > 0) - (det < 0)


# ----------------------------------------------------------------- hulls


def _as_points(points, dim):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DomainError(f"expected an (m, {dim}) array of points")
    if not np.all(np.isfinite(pts)):
        raise DegenerateError("non-finite coordinates")
    return pts


def _hull_2d(pts) -> list[int]:
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))
    for i, j in zip(order, order[1:]):
        if pts[i][0] == pts[j][0] and pts[i][1] == pts[j][1]:
            raise DegenerateError("repeated point")

    def chain(seq):
        out = []
        for i in seq:
            while len(out) >= 2:
                s = orient2d(pts[out[-2]], pts[out[-1]], pts[i])
                if s == 0:
                    raise DegenerateError("three collinear points on the hull boundary")
                if s > 0:
                    break
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    return lower[:-1] + upper[:-1]


def hull_faces_2d(points) -> tuple[int, int]:
    """``(f0, f1)`` of the planar hull by Andrew's monotone chain.

    An exactly collinear triple met while building the chains, or a repeated
    point, raises ``DegenerateError``.
    """
    pts = _as_points(points, 2)
    if len(pts) < 3:
        raise DomainError("need at least 3 points")
    hull = _hull_2d(pts.tolist())
    if len(hull) < 3:
        raise DegenerateError("all points collinear")
    return len(hull), len(hull)


def _collinear3(a, b, c) -> bool:
    return all(
        orient2d((a[i], a[j]), (b[i], b[j]), (c[i], c[j])) == 0
        for i, j in ((0, 1), (0, 2), (1, 2))
    )


def _hull_3d(pts) -> list[tuple[int, int, int]]:
    m = len(pts)
    i0 = 0
    i1 = next((i for i in range(1, m) if pts[i] != pts[i0]), None)
    if i1 is None:
        raise DegenerateError("all points coincide")
    i2 = next((i for i in range(m) if i not in (i0, i1) and not _collinear3(pts[i0], pts[i1], pts[i])), None)
    if i2 is None:
        raise DegenerateError("all points collinear")
    i3 = next((i for i in range(m) if orient3d(pts[i0], pts[i1], pts[i2], pts[i]) != 0), None)
    if i3 is None:
        raise DegenerateError("all points coplanar")

    faces: dict[int, tuple[int, int, int]] = {}
    edge_owner: dict[tuple[int, int], int] = {}
    next_id = 0

    def add(a, b, c):
        nonlocal next_id
        faces[next_id] = (a, b, c)
        for e in ((a, b), (b, c), (c, a)):
            edge_owner[e] = next_id
        next_id += 1

    def drop(fid):
        a, b, c = faces.pop(fid)
        for e in ((a, b), (b, c), (c, a)):
            del edge_owner[e]

    base = (i0, i1, i2, i3)
    for tri, apex in (((i0, i1, i2), i3), ((i0, i1, i3), i2), ((i0, i2, i3), i1), ((i1, i2, i3), i0)):
        a, b, c = tri
        if orient3d(pts[a], pts[b], pts[c], pts[apex]) > 0:
            b, c = c, b
        add(a, b, c)

    for p in range(m):
        if p in base:
            continue
        visible = []
        for fid, (a, b, c) in faces.items():
            s = orient3d(pts[a], pts[b], pts[c], pts[p])
            if s == 0:
                raise DegenerateError("point coplanar with a hull facet")
            if s > 0:
                visible.append(fid)
        if not visible:
            continue
        vis = set(visible)
        horizon = []
        for fid in visible:
            a, b, c = faces[fid]
            for e in ((a, b), (b, c), (c, a)):
                if edge_owner.get((e[1], e[0])) not in vis:
                    horizon.append(e)
        for fid in visible:
            drop(fid)
        for a, b in horizon:
            add(a, b, p)
    return list(faces.values())


def hull_faces_3d(points) -> tuple[int, int, int]:
    """``(f0, f1, f2)`` of the hull in ``R^3`` by incremental construction.

    Every visibility decision uses the exact orientation sign; any exact zero
    (a coplanar or collinear configuration) raises ``DegenerateError``.
    """
    return _hull_3d_checked(points)[0]


def _hull_3d_checked(points):
    pts = _as_points(points, 3)
    if len(pts) < 4:
        raise DomainError("need at least 4 points")
    facets = _hull_3d(pts.tolist())
    verts = {v for f in facets for v in f}
    edges = {frozenset(e) for a, b, c in facets for e in ((a, b), (b, c), (c, a))}
    return (len(verts), len(edges), len(facets)), facets


# ------------------------------------------------------------ LP vertices


def _lp_margin(pts: np.ndarray, i: int) -> float:
    """Largest ``t`` with ``a . (p_j - p_i) <= -t`` for all ``j != i``, ``|a|_inf <= 1``."""
    diffs = np.delete(pts, i, axis=0) - pts[i]
    m, d = diffs.shape
    a_ub = np.hstack([diffs, np.ones((m, 1))])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    bounds = [(-1.0, 1.0)] * d + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(m), bounds=bounds, method="highs")
    if res.status != 0:
        raise DegenerateError(f"LP failed at point {i}: {res.message}")
    return float(-res.fun)


def vertex_count_lp(points, d: int, margin: float = LP_MARGIN, with_margins: bool = False):
    """Number of hull vertices, one separating LP per point.

    A point is a vertex iff some functional puts it strictly above all the
    others.  The optimal separation ``t`` is 0 for non-vertices; values in
    ``(1e-15 scale, margin * scale]`` are too close to call and raise ``DegenerateError``,
    where ``scale`` is the largest coordinate magnitude of the centred cloud.
    """
    pts = _as_points(points, d)
    if len(pts) < d + 1:
        raise DomainError(f"need at least d + 1 = {d + 1} points")
    centred = pts - pts.mean(axis=0)
    scale = max(1.0, float(np.abs(centred).max()))
    margins = []
    count = 0
    for i in range(len(pts)):
        t = _lp_margin(centred, i)
        if t > margin * scale:
            count += 1
        elif t > _LP_ZERO * scale:
            raise DegenerateError(f"separation margin {t:.3g} at point {i} is inconclusive")
        margins.append(t)
    return (count, margins) if with_margins else count


# ----------------------------------------------------------- Monte Carlo


def _faces_of(cfg: WalkConfig, pts: np.ndarray):
    if cfg.d == 2:
        f = hull_faces_2d(pts)
        return f, _hull_2d(pts.tolist())
    if cfg.d == 3:
        return _hull_3d_checked(pts)
    f0, margins = vertex_count_lp(pts, cfg.d, with_margins=True)
    return (f0,), margins


def _violations(d: int, npts: int, f) -> list[str]:
    bad = []
    if d == 2 and f[0] != f[1]:
        bad.append("f1 != f0")
    if d == 3:
        if f[0] - f[1] + f[2] != 2:
            bad.append("Euler relation")
        if 2 * f[1] != 3 * f[2]:
            bad.append("2 f1 != 3 f2")
    if not d + 1 <= f[0] <= npts:
        bad.append("f0 out of range")
    return bad


def run_trial(cfg: WalkConfig, trial: int) -> WalkSample:
    """Simulate and count one trial, resampling on degenerate configurations."""
    for attempt in range(MAX_ATTEMPTS):
        pts = simulate_walk(cfg, trial, attempt)
        try:
            f, cert = _faces_of(cfg, pts)
        except DegenerateError:
            continue
        return WalkSample(pts, tuple(f), cert, attempt)
    raise DegenerateError(f"trial {trial}: degenerate after {MAX_ATTEMPTS} attempts")


def _trial_record(args):
    cfg, trial = args
    s = run_trial(cfg, trial)
    return s.fvector, s.attempts, _violations(cfg.d, cfg.n + 1, s.fvector)


@dataclass
class MonteCarloReport:
    config: dict
    faces: dict
    resamples: int
    violations: list

    def to_dict(self) -> dict:
        return asdict(self)

    def max_abs_z(self) -> float:
        return max(abs(v["z"]) for v in self.faces.values())


def monte_carlo_report(cfg: WalkConfig) -> MonteCarloReport:
    """Means and standard errors of ``f_{k-1}`` against the exact formula.

    ``faces`` maps ``"f{k-1}"`` to ``{mean, se, exact_pq, exact_float, z}``.
    Results are merged in trial order, so the report does not depend on
    ``cfg.workers``.
    """
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_trial_record, jobs, chunksize=max(1, cfg.trials // (8 * cfg.workers))))
    else:
        records = [_trial_record(j) for j in jobs]

    fv = np.array([r[0] for r in records], dtype=float)
    resamples = sum(r[1] for r in records)
    violations = [(t, msg) for t, r in enumerate(records) for msg in r[2]]

    faces = {}
    for col in range(fv.shape[1]):
        k = col + 1
        x = fv[:, col]
        mean = math.fsum(x) / len(x)
        sd = math.sqrt(math.fsum((x - mean) ** 2) / (len(x) - 1))
        se = sd / math.sqrt(len(x))
        exact = expected_faces(cfg.n, cfg.d, k)
        diff = mean - float(exact)
        z = diff / se if se > 0 else (0.0 if diff == 0 else math.copysign(math.inf, diff))
        faces[f"f{k - 1}"] = {
            "mean": mean, "se": se,
            "exact_pq": bc.exact_str(exact), "exact_float": float(exact), "z": z,
        }
    config = asdict(cfg)
    config.pop("workers")
    return MonteCarloReport(config, faces, resamples, violations)
