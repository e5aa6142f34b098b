"""Self-intersections of plane curves and crossing diagrams of projections.

The geometric pipeline is: sample the curve on a uniform parameter grid,
find all proper crossings of the closed polyline with exact orientation
predicates, then refine each candidate to a true curve crossing by Newton
iteration on F(s, t) = (x(s) - x(t), y(s) - y(t)).  Space curves are
projected along a direction vector; over/under comes from the height along
that direction and crossing signs from the projected tangent frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateSegmentsError, NonGenericError
from .series import (TWO_PI, CoefficientLaw, PlaneCurve, SpaceCurve,
                     TrigSeries, sample_grid, sample_plane_curve)

# stream offset separating resampling attempts in Monte Carlo loops
RETRY_STRIDE = 1 << 48


# ---------------------------------------------------------------------------
# exact predicates
# ---------------------------------------------------------------------------

def _orient(ax, ay, bx, by, cx, cy):
    """Sign of cross(b - a, c - a), exact.

    Floating evaluation with a forward error bound; falls back to exact
    rational arithmetic only when the filter cannot certify the sign.
    """
    detl = (bx - ax) * (cy - ay)
    detr = (by - ay) * (cx - ax)
    det = detl - detr
    if abs(det) > 3.331e-16 * (abs(detl) + abs(detr)):
        return 1 if det > 0.0 else -1
    det = ((Fraction(bx) - Fraction(ax)) * (Fraction(cy) - Fraction(ay))
           - (Fraction(by) - Fraction(ay)) * (Fraction(cx) - Fraction(ax)))
    return (det > 0) - (det < 0)


def _within(lo_a, hi_a, lo_b, hi_b):
    return max(lo_a, lo_b) <= min(hi_a, hi_b)


def _classify_pair(p1, p2, q1, q2):
    """'proper', 'degenerate' (touching/collinear contact) or None."""
    if not (_within(min(p1[0], p2[0]), max(p1[0], p2[0]),
                    min(q1[0], q2[0]), max(q1[0], q2[0]))
            and _within(min(p1[1], p2[1]), max(p1[1], p2[1]),
                        min(q1[1], q2[1]), max(q1[1], q2[1]))):
        return None
    d1 = _orient(*p1, *p2, *q1)
    d2 = _orient(*p1, *p2, *q2)
    d3 = _orient(*q1, *q2, *p1)
    d4 = _orient(*q1, *q2, *p2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return "proper"
    if d1 == 0 or d2 == 0 or d3 == 0 or d4 == 0:
        # bounding boxes overlap and some endpoint is collinear: contact
        return "degenerate"
    return None


def _intersection_fractions(p1, p2, q1, q2):
    """Fractions (tp, tq) along each segment for a proper crossing."""
    d3 = ((q2[0] - q1[0]) * (p1[1] - q1[1])
          - (q2[1] - q1[1]) * (p1[0] - q1[0]))
    d4 = ((q2[0] - q1[0]) * (p2[1] - q1[1])
          - (q2[1] - q1[1]) * (p2[0] - q1[0]))
    d1 = ((p2[0] - p1[0]) * (q1[1] - p1[1])
          - (p2[1] - p1[1]) * (q1[0] - p1[0]))
    d2 = ((p2[0] - p1[0]) * (q2[1] - p1[1])
          - (p2[1] - p1[1]) * (q2[0] - p1[0]))
    tp = d3 / (d3 - d4)
    tq = d1 / (d1 - d2)
    return tp, tq


def _adjacent(i, j, n):
    return (j - i) % n == 1 or (i - j) % n == 1


def segment_intersections(points, mode: str = "sweep"):
    """All proper crossings between non-adjacent segments of a closed polyline.

    points : (n, 2) array of vertices; segment i runs from points[i] to
        points[(i+1) % n].
    mode : "sweep" for the interval-sweep path, "brute" for the O(n^2)
        reference.

    Returns a sorted list of (i, j) segment index pairs with i < j.
    Raises DegenerateSegmentsError when any non-adjacent pair touches at an
    endpoint or overlaps collinearly; such pairs are reported in the error,
    distinct from the proper crossings.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 4:
        raise ValueError("need at least 4 points")
    if mode not in ("sweep", "brute"):
        raise ValueError(f"unknown mode {mode!r}")
    nxt = np.roll(pts, -1, axis=0)

    hits = []
    degenerate = []

    def test(i, j):
        kind = _classify_pair(tuple(pts[i]), tuple(nxt[i]),
                              tuple(pts[j]), tuple(nxt[j]))
        if kind == "proper":
            hits.append((int(i), int(j)))
        elif kind == "degenerate":
            degenerate.append((int(i), int(j)))

    if mode == "brute":
        for i in range(n):
            for j in range(i + 2, n):
                if _adjacent(i, j, n):
                    continue
                test(i, j)
    else:
        xmin = np.minimum(pts[:, 0], nxt[:, 0])
        xmax = np.maximum(pts[:, 0], nxt[:, 0])
        order = np.argsort(xmin, kind="stable")
        active: list[int] = []
        for idx in order:
            lo = xmin[idx]
            active = [a for a in active if xmax[a] >= lo]
            for a in active:
                i, j = (a, idx) if a < idx else (idx, a)
                if _adjacent(i, j, n):
                    continue
                test(i, j)
            active.append(idx)

    hits.sort()
    if degenerate:
        raise DegenerateSegmentsError(sorted(degenerate))
    return hits


# ---------------------------------------------------------------------------
# refinement of smooth-curve crossings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelfIntersection:
    """One transversal self-crossing with parameters 0 <= s < t < 2*pi."""

    s: float
    t: float
    point: tuple[float, float]
    refined: bool = True


def _residual(curve, s, t):
    return (curve.x.evaluate(s) - curve.x.evaluate(t),
            curve.y.evaluate(s) - curve.y.evaluate(t))


def _newton_step(curve, s, t):
    fx, fy = _residual(curve, s, t)
    xs = curve.x.evaluate_derivative(s)
    xt = curve.x.evaluate_derivative(t)
    ys = curve.y.evaluate_derivative(s)
    yt = curve.y.evaluate_derivative(t)
    det = -xs * yt + xt * ys
    return fx, fy, xs, xt, ys, yt, det


def _refine_newton(curve, s, t, tol, step_cap, max_iter=50):
    """Newton on F(s,t); returns refined (s, t) or None on divergence."""
    for _ in range(max_iter):
        fx, fy, xs, xt, ys, yt, det = _newton_step(curve, s, t)
        if max(abs(fx), abs(fy)) < tol:
            return s, t
        if det == 0.0:
            return None
        ds = (fx * (-yt) - (-xt) * fy) / det
        dt = (xs * fy - ys * fx) / det
        if max(abs(ds), abs(dt)) > step_cap:
            return None
        s -= ds
        t -= dt
    return None


def _refine_bisect(curve, s_lo, s_hi, t_lo, t_hi, tol, rounds=60, sub=8):
    """Chord-subdivision fallback: narrow both parameter intervals by
    re-intersecting refined chords, interleaved with Newton attempts."""
    for _ in range(rounds):
        span = max(s_hi - s_lo, t_hi - t_lo)
        seed = _refine_newton(curve, 0.5 * (s_lo + s_hi), 0.5 * (t_lo + t_hi),
                              tol, step_cap=4.0 * span)
        if seed is not None:
            return seed
        sg = np.linspace(s_lo, s_hi, sub + 1)
        tg = np.linspace(t_lo, t_hi, sub + 1)
        sp = curve.point(sg)
        tp = curve.point(tg)
        found = None
        for a in range(sub):
            for b in range(sub):
                kind = _classify_pair(tuple(sp[a]), tuple(sp[a + 1]),
                                      tuple(tp[b]), tuple(tp[b + 1]))
                if kind == "proper":
                    found = (a, b)
                    break
            if found:
                break
        if found is None:
            raise NonGenericError(
                "chord refinement lost the crossing; tangential contact")
        a, b = found
        s_lo, s_hi = sg[a], sg[a + 1]
        t_lo, t_hi = tg[b], tg[b + 1]
    raise NonGenericError("chord refinement did not converge")


def _canonical_pair(s, t):
    s %= TWO_PI
    t %= TWO_PI
    return (s, t) if s <= t else (t, s)


def _circ_dist(a, b):
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def find_self_intersections(curve: PlaneCurve, grid: int | None = None,
                            tol: float = 1e-9):
    """All transversal self-intersections of a closed plane curve.

    grid : number of polyline points M; defaults to max(8*degree, 256) and
        must be at least 8*degree.
    tol : position residual tolerance for Newton refinement.

    Raises NonGenericError when a refined crossing is tangential (singular
    Jacobian); the caller should resample or perturb.
    """
    m = grid if grid is not None else max(8 * curve.degree, 256)
    if m < 8 * curve.degree:
        raise ValueError("grid must be at least 8 * degree")
    thetas, pts = sample_grid(curve, m)
    try:
        candidates = segment_intersections(pts)
    except DegenerateSegmentsError as exc:
        raise NonGenericError(f"degenerate polyline configuration: {exc}") from exc

    h = TWO_PI / m
    results: list[SelfIntersection] = []
    for i, j in candidates:
        s0, s1 = thetas[i], thetas[i] + h
        t0, t1 = thetas[j], thetas[j] + h
        pair = _refine_newton(curve, 0.5 * (s0 + s1), 0.5 * (t0 + t1),
                              tol, step_cap=8.0 * h)
        if pair is None:
            pair = _refine_bisect(curve, s0, s1, t0, t1, tol)
        s, t = _canonical_pair(*pair)
        if _circ_dist(s, t) < 1e-13:
            raise NonGenericError("crossing collapsed onto the diagonal")
        # tangential check: projected tangents must be independent
        xs = curve.x.evaluate_derivative(s)
        ys = curve.y.evaluate_derivative(s)
        xt = curve.x.evaluate_derivative(t)
        yt = curve.y.evaluate_derivative(t)
        cross = xs * yt - ys * xt
        scale = math.hypot(xs, ys) * math.hypot(xt, yt)
        if abs(cross) <= 1e-8 * scale:
            raise NonGenericError("tangential self-intersection")
        dup = False
        for r in results:
            if (_circ_dist(r.s, s) < 10 * tol and _circ_dist(r.t, t) < 10 * tol):
                dup = True
                break
        if dup:
            continue
        px = 0.5 * (curve.x.evaluate(s) + curve.x.evaluate(t))
        py = 0.5 * (curve.y.evaluate(s) + curve.y.evaluate(t))
        results.append(SelfIntersection(float(s), float(t), (float(px), float(py))))
    results.sort(key=lambda r: (r.s, r.t))
    return results


# ---------------------------------------------------------------------------
# Monte Carlo counting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCCountResult:
    """Mean unordered self-intersection count over independent draws."""

    mean: float
    standard_error: float
    counts: np.ndarray
    retries: int

    def __iter__(self):
        return iter((self.mean, self.standard_error))


def _count_one(law, seed, index, grid, tol, max_retries):
    retries = 0
    for attempt in range(max_retries + 1):
        curve = sample_plane_curve(law, seed, index + attempt * RETRY_STRIDE)
        try:
            return len(find_self_intersections(curve, grid, tol)), retries
        except NonGenericError:
            retries += 1
    raise NonGenericError(
        f"sample {index}: still non-generic after {max_retries} resamples")


def count_self_intersections_mc(law: CoefficientLaw, samples: int, seed: int,
                                grid: int | None = None, tol: float = 1e-9,
                                max_retries: int = 8, jobs: int = 1):
    """Monte Carlo mean count of unordered self-intersections.

    Each sample s draws an independent plane curve from streams
    (2s, 2s + 1); non-generic draws are resampled from a far-away stream
    (bounded retries, counted in the result).  The outcome is identical
    for any jobs value.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if jobs > 1:
        from multiprocessing import Pool
        args = [(law, seed, i, grid, tol, max_retries) for i in range(samples)]
        with Pool(jobs) as pool:
            out = pool.starmap(_count_one, args, chunksize=max(1, samples // (8 * jobs)))
    else:
        out = [_count_one(law, seed, i, grid, tol, max_retries)
               for i in range(samples)]
    counts = np.array([c for c, _ in out], dtype=float)
    retries = sum(r for _, r in out)
    se = counts.std(ddof=1) / math.sqrt(samples) if samples > 1 else 0.0
    return MCCountResult(float(counts.mean()), float(se), counts, retries)


# ---------------------------------------------------------------------------
# crossing diagrams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Crossing:
    """One crossing: parameters s < t, writhe sign, and which passage is over."""

    s: float
    t: float
    sign: int
    over: str  # "first" (strand at s is over) or "second"


@dataclass(frozen=True)
class CrossingDiagram:
    """Signed Gauss code of a generic projection.

    code holds 2n passages (label, is_over, sign) in traversal order;
    params holds the matching curve parameters.
    """

    crossings: tuple
    code: tuple
    params: tuple

    @property
    def n(self) -> int:
        return len(self.crossings)

    def validate(self):
        from .errors import InvalidDiagramError
        seen: dict[int, list[bool]] = {}
        for label, is_over, sign in self.code:
            seen.setdefault(label, []).append(is_over)
        if len(self.code) != 2 * self.n:
            raise InvalidDiagramError("code length is not 2n")
        for label, flags in seen.items():
            if sorted(flags) != [False, True]:
                raise InvalidDiagramError(
                    f"label {label} does not appear once over and once under")
        if list(self.params) != sorted(self.params):
            raise InvalidDiagramError("passages out of traversal order")

    def arc_indices(self):
        """Arc id occupied by the strand as it enters each passage.

        Arcs are the n maximal overarcs between consecutive under-passages;
        the arc counter advances after every under-passage, starting from
        the passage stream's head (consistent cyclically since there are
        exactly n under-passages).
        """
        n = self.n
        if n == 0:
            return [], 0
        arcs = []
        current = 0
        for label, is_over, sign in self.code:
            arcs.append(current % n)
            if not is_over:
                current += 1
        return arcs, n

    def mirror(self) -> "CrossingDiagram":
        """Swap every over/under flag and flip signs (mirror image)."""
        code = tuple((l, not o, -s) for l, o, s in self.code)
        crossings = tuple(Crossing(c.s, c.t, -c.sign,
                                   "second" if c.over == "first" else "first")
                          for c in self.crossings)
        return CrossingDiagram(crossings, code, self.params)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "gauss": [[l, "O" if o else "U", s] for l, o, s in self.code],
            "params": list(self.params),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CrossingDiagram":
        code = tuple((int(l), ou == "O", int(s)) for l, ou, s in d["gauss"])
        params = tuple(float(p) for p in d.get("params", range(len(code))))
        return diagram_from_code(code, params)


def diagram_from_code(code, params=None) -> "CrossingDiagram":
    """Build a diagram from a Gauss code given as (label, is_over, sign)
    triples in traversal order; params default to the positions."""
    code = tuple((int(l), bool(o), int(s)) for l, o, s in code)
    if params is None:
        params = tuple(float(i) for i in range(len(code)))
    else:
        params = tuple(float(p) for p in params)
    by_label: dict[int, dict] = {}
    for pos, (label, is_over, sign) in enumerate(code):
        rec = by_label.setdefault(label, {"sign": sign})
        rec["over" if is_over else "under"] = params[pos]
    crossings = []
    for label in sorted(by_label):
        rec = by_label[label]
        po, pu = rec.get("over"), rec.get("under")
        if po is None or pu is None:
            from .errors import InvalidDiagramError
            raise InvalidDiagramError(f"label {label} lacks an over or under passage")
        s, t = min(po, pu), max(po, pu)
        over = "first" if po == s else "second"
        crossings.append(Crossing(s, t, rec["sign"], over))
    d = CrossingDiagram(tuple(crossings), code, params)
    d.validate()
    return d


def _assemble_diagram(events) -> CrossingDiagram:
    """events: list of (param, label, is_over, sign) for all 2n passages."""
    events = sorted(events)
    code = tuple((label, is_over, sign) for _, label, is_over, sign in events)
    params = tuple(p for p, _, _, _ in events)
    return diagram_from_code(code, params)


def _orthonormal_basis(w):
    """Right-handed frame (u, v, w) completing the unit projection vector."""
    w = np.asarray(w, dtype=float)
    nw = np.linalg.norm(w)
    if nw == 0:
        raise ValueError("projection direction must be nonzero")
    w = w / nw
    helper = np.array([1.0, 0.0, 0.0])
    if abs(w[0]) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    u = np.cross(helper, w)
    u /= np.linalg.norm(u)
    v = np.cross(w, u)
    return u, v, w


def _perturbed_direction(w, attempt):
    """Deterministic pseudo-random tilt of w by angle 1e-3 * attempt."""
    if attempt == 0:
        return np.asarray(w, dtype=float)
    g = np.random.Generator(np.random.Philox(
        key=np.array([np.uint64(0x9E3779B97F4A7C15), np.uint64(attempt)])))
    axis = g.standard_normal(3)
    axis /= np.linalg.norm(axis)
    angle = 1e-3 * attempt
    w = np.asarray(w, dtype=float)
    w = w / np.linalg.norm(w)
    # Rodrigues rotation
    return (w * math.cos(angle) + np.cross(axis, w) * math.sin(angle)
            + axis * np.dot(axis, w) * (1.0 - math.cos(angle)))


def _combine_series(curve: SpaceCurve, direction) -> TrigSeries:
    """Series of the curve's coordinate along a direction vector."""
    d = np.asarray(direction, dtype=float)
    a = d[0] * curve.x.a + d[1] * curve.y.a + d[2] * curve.z.a
    b = d[0] * curve.x.b + d[1] * curve.y.b + d[2] * curve.z.b
    return TrigSeries(a, b)


def build_crossing_diagram(curve: SpaceCurve, projection=(0.0, 0.0, 1.0),
                           grid: int | None = None, tol: float = 1e-9,
                           max_retries: int = 8) -> CrossingDiagram:
    """Project a space curve along `projection` and extract its signed
    Gauss code.

    Over/under is decided by the height along the projection direction;
    the crossing sign is the sign of the 2D cross product of the projected
    tangents taken (over, under).  Non-generic configurations (tangential
    crossing, |height difference| < tol) trigger a deterministic
    perturbation of the direction, up to max_retries times.
    """
    last_error = None
    for attempt in range(max_retries + 1):
        w = _perturbed_direction(projection, attempt)
        u, v, w = _orthonormal_basis(w)
        plane = PlaneCurve(_combine_series(curve, u), _combine_series(curve, v))
        height = _combine_series(curve, w)
        try:
            hits = find_self_intersections(plane, grid, tol)
            events = []
            for label, hit in enumerate(hits, start=1):
                hs = height.evaluate(hit.s)
                ht = height.evaluate(hit.t)
                if abs(hs - ht) < tol:
                    raise NonGenericError("near-equal heights at a crossing")
                over_first = hs > ht
                ts = np.array([plane.x.evaluate_derivative(hit.s),
                               plane.y.evaluate_derivative(hit.s)])
                tt = np.array([plane.x.evaluate_derivative(hit.t),
                               plane.y.evaluate_derivative(hit.t)])
                over_tan, under_tan = (ts, tt) if over_first else (tt, ts)
                sign = 1 if over_tan[0] * under_tan[1] - over_tan[1] * under_tan[0] > 0 else -1
                events.append((hit.s, label, over_first, sign))
                events.append((hit.t, label, not over_first, sign))
            return _assemble_diagram(events)
        except NonGenericError as exc:
            last_error = exc
    raise NonGenericError(
        f"no generic projection after {max_retries} perturbations: {last_error}")


def diagram_from_polyline(points3d, projection=(0.0, 0.0, 1.0),
                          max_retries: int = 8,
                          height_tol: float = 1e-12) -> CrossingDiagram:
    """Signed Gauss code of a closed 3D polyline's projection.

    Crossings come from exact segment-segment tests on the projected
    edges; heights are interpolated along the 3D edges at the crossing
    fractions.  The traversal parameter of a passage is edge index plus
    fraction.  Degenerate projections are retried with perturbed
    directions, like the smooth pipeline.
    """
    pts3 = np.asarray(points3d, dtype=float)
    if pts3.ndim != 2 or pts3.shape[1] != 3 or len(pts3) < 3:
        raise ValueError("need an (n, 3) array of at least 3 vertices")
    last_error = None
    for attempt in range(max_retries + 1):
        w = _perturbed_direction(projection, attempt)
        u, v, w = _orthonormal_basis(w)
        pts2 = np.column_stack([pts3 @ u, pts3 @ v])
        heights = pts3 @ w
        try:
            hits = segment_intersections(pts2)
        except DegenerateSegmentsError as exc:
            last_error = NonGenericError(f"degenerate projection: {exc}")
            continue
        nxt2 = np.roll(pts2, -1, axis=0)
        nxth = np.roll(heights, -1)
        events = []
        ok = True
        for label, (i, j) in enumerate(hits, start=1):
            tp, tq = _intersection_fractions(tuple(pts2[i]), tuple(nxt2[i]),
                                             tuple(pts2[j]), tuple(nxt2[j]))
            hi = heights[i] + tp * (nxth[i] - heights[i])
            hj = heights[j] + tq * (nxth[j] - heights[j])
            if abs(hi - hj) < height_tol:
                last_error = NonGenericError("near-equal heights at a crossing")
                ok = False
                break
            over_first = hi > hj
            ti = nxt2[i] - pts2[i]
            tj = nxt2[j] - pts2[j]
            over_tan, under_tan = (ti, tj) if over_first else (tj, ti)
            sign = 1 if over_tan[0] * under_tan[1] - over_tan[1] * under_tan[0] > 0 else -1
            events.append((i + tp, label, over_first, sign))
            events.append((j + tq, label, not over_first, sign))
        if ok:
            return _assemble_diagram(events)
    raise NonGenericError(
        f"no generic projection after {max_retries} perturbations: {last_error}")
