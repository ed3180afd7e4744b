"""Covering and well-distributed certificates for contracting IFSs.

Everything here works in the max metric, where balls are boxes: a cell sits
inside a generator image iff its pullback sits inside the region, which for
affine generators is decided exactly from the cell corners and for general
generators from a sampled subgrid plus Lipschitz slack. A certificate is
valid only when every cell gets a generator with strictly positive margin,
so the sampled checks cover the continuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import LambdaOutOfRange, NoMetadata, StepLimit, Uncovered
from .ifs import IFS, Word, apply_word
from .maps import SmoothMap
from .spaces import Box

INSIDE_TOL = 1e-12


# ---------------------------------------------------------------------------
# unit-ball covering oracle
# ---------------------------------------------------------------------------

def cover_unit_ball(n: int, r: float) -> np.ndarray:
    """Centers of radius-r max-metric balls covering the closed unit ball.

    Grid construction followed by a greedy drop pass: a center is removed
    when corner and center probes stay covered without it. For the max
    metric the per-axis count ceil(1/r) is already minimal, so the drop
    pass is a verification rather than an optimization.
    """
    if not 0 < r:
        raise ValueError("cover radius must be positive")
    m = max(1, int(math.ceil(1.0 / r - 1e-12)))
    side = 2.0 / m
    axis = -1.0 + side * (np.arange(m) + 0.5)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    centers = np.stack([g.ravel() for g in mesh], axis=-1)

    corner_axis = -1.0 + side * np.arange(m + 1)
    mesh = np.meshgrid(*([corner_axis] * n), indexing="ij")
    probes = np.concatenate(
        [centers, np.stack([g.ravel() for g in mesh], axis=-1)], axis=0
    )

    if len(centers) > 1:
        tree = cKDTree(centers)
        second, _ = tree.query(centers, k=2, p=np.inf)
        if np.min(second[:, 1]) > r + INSIDE_TOL:
            pass  # every center privately covers its own point: nothing droppable
        else:
            keep = np.ones(len(centers), dtype=bool)
            for i in range(len(centers)):
                keep[i] = False
                others = centers[keep]
                if len(others) == 0:
                    keep[i] = True
                    continue
                dmax, _ = cKDTree(others).query(probes, k=1, p=np.inf)
                if np.max(dmax) > r + INSIDE_TOL:
                    keep[i] = True
            centers = centers[keep]

    # final verification: probes all covered
    tree = cKDTree(centers)
    dmax, _ = tree.query(probes, k=1, p=np.inf)
    assert np.max(dmax) <= r + 1e-9, "cover oracle failed self-check"
    return centers


def translation_count(n: int, lam: float) -> int:
    """Generator count 2*k1 used by construct_translations."""
    return 2 * len(cover_unit_ball(n, lam / 4.0))


# ---------------------------------------------------------------------------
# image-inclusion primitives
# ---------------------------------------------------------------------------

def _corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    dim = len(lo)
    out = np.zeros((2**dim, dim))
    for j in range(2**dim):
        for a in range(dim):
            out[j, a] = hi[a] if (j >> a) & 1 else lo[a]
    return out


def _box_samples(lo: np.ndarray, hi: np.ndarray, per_axis: int = 3) -> tuple[np.ndarray, float]:
    """Subgrid of a box and the max distance of any box point to the grid."""
    axes = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    spacing = float(np.max((hi - lo) / (per_axis - 1))) if per_axis > 1 else float(
        np.max(hi - lo)
    )
    return pts, spacing / 2.0


def _diag_image_box(gen: SmoothMap, source: Box) -> tuple[np.ndarray, np.ndarray] | None:
    """Exact image box of the source under positive-diagonal affine maps."""
    if gen.affine is None:
        return None
    A, b = gen.affine
    if not _is_diagonal(A):
        return None
    a = np.diag(A)
    return source.lo * a + b, source.hi * a + b


def _relative_side_slack(
    region: Box, img_lo: np.ndarray, img_hi: np.ndarray, lo: np.ndarray, hi: np.ndarray
) -> np.ndarray:
    """Slack of boxes [lo, hi] inside [img_lo, img_hi], relative to the region.

    Image sides that reach the region boundary do not bind: the inclusion is
    of box-intersect-region into the image, per the relative-ball convention.
    Broadcasts over leading axes of lo/hi.
    """
    lo_bind = img_lo > region.lo + INSIDE_TOL
    hi_bind = img_hi < region.hi - INSIDE_TOL
    s_lo = np.where(lo_bind, lo - img_lo, np.inf)
    s_hi = np.where(hi_bind, img_hi - hi, np.inf)
    return np.minimum(s_lo, s_hi).min(axis=-1)


def box_inside_image(gen: SmoothMap, region: Box, box: Box, per_axis: int = 3) -> float:
    """Certified slack of (box intersect region) subset gen(region).

    Positive-diagonal affine generators: exact, with region-relative sides.
    Other affine generators: exact corner pullbacks, absolute clearance.
    General generators: sampled pullbacks minus Lipschitz slack (gap)/(2 lam).
    """
    clipped = box.intersect(region)
    diag = _diag_image_box(gen, region)
    if diag is not None:
        img_lo, img_hi = diag
        return float(
            _relative_side_slack(region, img_lo, img_hi, clipped.lo, clipped.hi)
        )
    if gen.affine is not None:
        pts = _corners(clipped.lo, clipped.hi)
        pulled = gen.invert(pts)
        return float(np.min(region.clearance(pulled)))
    if gen.lam is None:
        raise NoMetadata(f"{gen.name}: contraction bound needed for inclusion check")
    pts, half_gap = _box_samples(clipped.lo, clipped.hi, per_axis)
    pulled = gen.invert(pts)
    return float(np.min(region.clearance(pulled))) - half_gap / gen.lam


def ball_fits(gen: SmoothMap, region: Box, center: np.ndarray, rho: float) -> float:
    """Slack of (B_rho(center) intersect region) subset gen(region)."""
    ball = Box.ball(region.space, center, rho).intersect(region)
    return box_inside_image(gen, region, ball)


# ---------------------------------------------------------------------------
# covering certificate
# ---------------------------------------------------------------------------

@dataclass
class CoveringCertificate:
    region: Box
    grid_step: float
    axis_counts: np.ndarray
    axis_steps: np.ndarray
    assignment: np.ndarray  # generator index per cell, C-order over the axis grid
    margin: float  # least slack of the assigned generators
    lam: float
    lip: float
    robust_margin: float | None = None  # least best-generator slack, when computed
    d_value: float | None = None
    well_distributed: bool | None = None
    wd_witness: np.ndarray | None = None

    @property
    def valid(self) -> bool:
        return self.margin > 0

    def cell_of(self, x) -> int:
        x = np.asarray(x, dtype=float)
        idx = np.floor((x - self.region.lo) / self.axis_steps).astype(int)
        idx = np.clip(idx, 0, self.axis_counts - 1)
        flat = 0
        for a in range(len(idx)):
            flat = flat * self.axis_counts[a] + idx[a]
        return int(flat)

    def assign(self, x) -> int:
        """Covering generator for the cell containing x."""
        return int(self.assignment[self.cell_of(x)])


def _cell_slacks(
    gen: SmoothMap, region: Box, cells: list[Box], idx: np.ndarray, src_region: Box | None = None
) -> np.ndarray:
    """Vectorized inclusion slack of the indexed cells in gen(src_region)."""
    src_region = src_region if src_region is not None else region
    diag = _diag_image_box(gen, src_region)
    if diag is not None:
        img_lo, img_hi = diag
        lo = np.array([cells[i].lo for i in idx])
        hi = np.array([cells[i].hi for i in idx])
        return _relative_side_slack(region, img_lo, img_hi, lo, hi)
    if gen.affine is not None:
        pts = np.concatenate([_corners(cells[i].lo, cells[i].hi) for i in idx])
        per = 2 ** region.space.dim
        pulled = gen.invert(pts)
        return src_region.clearance(pulled).reshape(len(idx), per).min(axis=1)
    if gen.lam is None:
        raise NoMetadata(f"{gen.name}: contraction bound needed for inclusion check")
    sampled = [_box_samples(cells[i].lo, cells[i].hi) for i in idx]
    per = len(sampled[0][0])
    pts = np.concatenate([s[0] for s in sampled])
    half_gap = sampled[0][1]
    pulled = gen.invert(pts)
    clear = src_region.clearance(pulled).reshape(len(idx), per).min(axis=1)
    return clear - half_gap / gen.lam


def verify_covering(
    ifs: IFS, region: Box, grid_step: float, image_region: Box | None = None
) -> CoveringCertificate:
    """Certify region subset of the union of generator images.

    Images are taken of image_region (the region itself by default, matching
    the covering property; a larger box realizes the degenerate single-image
    case).

    Each grid cell is assigned the lowest generator index whose image
    contains it with positive slack; cells with only boundary-tight covers
    (slack exactly zero, exact generators only) are still assigned but drag
    the certificate margin to zero. Uncovered, with a witness cell, if some
    cell fits in no image.
    """
    src_region = image_region if image_region is not None else region
    lam, lip = ifs.contraction_bounds()
    cells = region.cells(grid_step)
    counts = []
    steps = []
    for a, b in zip(region.lo, region.hi):
        k = max(1, int(np.ceil((b - a) / grid_step - 1e-12)))
        counts.append(k)
        steps.append((b - a) / k)
    n_cells = len(cells)

    diag_boxes = [_diag_image_box(g, src_region) for g in ifs.generators]
    if all(d is not None for d in diag_boxes):
        assignment, margins, robust = _assign_all_diagonal(region, cells, diag_boxes)
    else:
        assignment, margins = _assign_generic(ifs, region, cells, src_region)
        robust = None

    if np.any(assignment < 0):
        bad = int(np.nonzero(assignment < 0)[0][0])
        raise Uncovered(
            f"cell centered at {cells[bad].center} is in no generator image",
            witness=cells[bad],
        )
    return CoveringCertificate(
        region=region,
        grid_step=grid_step,
        axis_counts=np.array(counts),
        axis_steps=np.array(steps),
        assignment=assignment,
        margin=float(margins.min()),
        lam=lam,
        lip=lip,
        robust_margin=robust,
    )


def _assign_all_diagonal(
    region: Box, cells: list[Box], diag_boxes: list
) -> tuple[np.ndarray, np.ndarray, float]:
    """Fast assignment when every generator image is an exact box."""
    lo = np.array([c.lo for c in cells])  # (m, n)
    hi = np.array([c.hi for c in cells])
    img_lo = np.array([d[0] for d in diag_boxes])  # (k, n)
    img_hi = np.array([d[1] for d in diag_boxes])
    m = len(cells)
    assignment = np.full(m, -1, dtype=int)
    margins = np.full(m, -np.inf)
    best = np.full(m, -np.inf)
    chunk = max(1, int(2_000_000 / max(1, len(diag_boxes))))
    for s in range(0, m, chunk):
        e = min(m, s + chunk)
        slack = _relative_side_slack(
            region,
            img_lo[None, :, :],
            img_hi[None, :, :],
            lo[s:e, None, :],
            hi[s:e, None, :],
        )  # (chunk, k)
        pos = slack > INSIDE_TOL
        first = np.argmax(pos, axis=1)
        has = pos[np.arange(e - s), first]
        # tight (zero-slack) covers acceptable where nothing has positive slack
        tight = slack >= -INSIDE_TOL
        first_t = np.argmax(tight, axis=1)
        has_t = tight[np.arange(e - s), first_t]
        gi = np.where(has, first, np.where(has_t, first_t, -1))
        assignment[s:e] = gi
        sl = np.where(
            has,
            slack[np.arange(e - s), first],
            np.where(has_t, np.maximum(slack[np.arange(e - s), first_t], 0.0), -np.inf),
        )
        margins[s:e] = sl
        best[s:e] = slack.max(axis=1)
    return assignment, margins, float(best.min())


def _assign_generic(
    ifs: IFS, region: Box, cells: list[Box], src_region: Box | None = None
) -> tuple[np.ndarray, np.ndarray]:
    src_region = src_region if src_region is not None else region
    n_cells = len(cells)
    assignment = np.full(n_cells, -1, dtype=int)
    margins = np.full(n_cells, -np.inf)

    # first pass: lowest generator with strictly positive slack
    for gi, gen in enumerate(ifs.generators):
        todo = np.nonzero(assignment < 0)[0]
        if len(todo) == 0:
            break
        slack = _cell_slacks(gen, region, cells, todo, src_region)
        hit = slack > INSIDE_TOL
        assignment[todo[hit]] = gi
        margins[todo[hit]] = slack[hit]

    # second pass: accept tight (zero-slack) exact covers, e.g. images that
    # split the region along a shared edge
    todo = np.nonzero(assignment < 0)[0]
    if len(todo) > 0:
        for gi, gen in enumerate(ifs.generators):
            if gen.affine is None:
                continue  # sampled checks cannot certify a tight cover
            sub = np.nonzero(assignment < 0)[0]
            if len(sub) == 0:
                break
            slack = _cell_slacks(gen, region, cells, sub, src_region)
            hit = slack >= -INSIDE_TOL
            assignment[sub[hit]] = gi
            margins[sub[hit]] = np.maximum(slack[hit], 0.0)
    return assignment, margins


def compute_d(
    ifs: IFS,
    region: Box,
    grid_step: float,
    cert: CoveringCertificate | None = None,
    image_region: Box | None = None,
) -> float:
    """Lower bound on max{r | every x in region has B_r(x) inside some image}.

    Grid approximation from below: for each grid point the best radius over
    generators is bisected with certified inclusion tests, then the grid gap
    is subtracted (the radius function is 1-Lipschitz in x).
    """
    src_region = image_region if image_region is not None else region
    if cert is None:
        cert = verify_covering(ifs, region, grid_step, image_region=image_region)
    pts = region.grid(grid_step)
    rho_cap = region.radius
    best = np.zeros(len(pts))

    diag = [g for g in ifs.generators if g.affine is not None and _is_diagonal(g.affine[0])]
    diag_ids = {id(g) for g in diag}
    rest = [g for g in ifs.generators if id(g) not in diag_ids]
    if diag:
        img_lo = np.array([_diag_image_box(g, src_region)[0] for g in diag])  # (k, n)
        img_hi = np.array([_diag_image_box(g, src_region)[1] for g in diag])
        if image_region is None:
            # relative convention: image sides on the region boundary do not bind
            lo_bind = img_lo > region.lo + INSIDE_TOL
            hi_bind = img_hi < region.hi - INSIDE_TOL
        else:
            lo_bind = np.ones_like(img_lo, dtype=bool)
            hi_bind = np.ones_like(img_hi, dtype=bool)
        chunk = max(1, int(2_000_000 / max(1, len(diag))))
        for s in range(0, len(pts), chunk):
            e = min(len(pts), s + chunk)
            p = pts[s:e, None, :]
            low = np.where(lo_bind[None], p - img_lo[None], np.inf)
            high = np.where(hi_bind[None], img_hi[None] - p, np.inf)
            rho = np.minimum(low, high).min(axis=2)  # (chunk, k)
            best[s:e] = np.maximum(best[s:e], np.maximum(rho, 0.0).max(axis=1))
    for gen in rest:
        if gen.lam is not None:
            # inverse-Lipschitz bound: B_rho(x) sits inside gen(src_region)
            # whenever rho <= lam * clearance of the pulled-back point
            pulled = gen.invert(pts)
            rho = gen.lam * np.maximum(src_region.clearance(pulled), 0.0)
            best = np.maximum(best, rho)
        else:
            best = np.maximum(best, _bisect_rho(gen, region, pts, rho_cap))

    d = float(best.min()) - grid_step / 2.0
    if d <= 0:
        raise Uncovered("no positive inner radius on the grid", witness=None)
    cert.d_value = d
    return d


def _is_diagonal(A: np.ndarray) -> bool:
    return np.allclose(A, np.diag(np.diag(A))) and np.all(np.diag(A) > 0)


def _diag_affine_rho(gen: SmoothMap, region: Box, pts: np.ndarray) -> np.ndarray:
    """Exact ball-in-image radius for positive diagonal affine generators.

    The image of the region is a box; sides of the image that reach the
    region boundary do not bind because certificate balls are taken
    relative to the region.
    """
    A, b = gen.affine
    a = np.diag(A)
    img_lo = region.lo * a + b
    img_hi = region.hi * a + b
    lo_bind = img_lo > region.lo + INSIDE_TOL
    hi_bind = img_hi < region.hi - INSIDE_TOL
    low = np.where(lo_bind, pts - img_lo, np.inf)
    high = np.where(hi_bind, img_hi - pts, np.inf)
    rho = np.minimum(low, high).min(axis=1)
    return np.maximum(rho, 0.0)


def _bisect_rho(
    gen: SmoothMap, region: Box, pts: np.ndarray, rho_cap: float, iters: int = 30
) -> np.ndarray:
    out = np.zeros(len(pts))
    for i, p in enumerate(pts):
        lo, hi = 0.0, rho_cap
        if ball_fits(gen, region, p, hi) > 0:
            out[i] = hi
            continue
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if ball_fits(gen, region, p, mid) > 0:
                lo = mid
            else:
                hi = mid
        out[i] = lo
    return out


def verify_well_distributed(
    ifs: IFS,
    region: Box,
    d: float,
    refine: float = 8.0,
) -> tuple[bool, np.ndarray | None]:
    """Every ball of diameter d centered at a grid point of the region must
    contain a generator fixed point. Returns (flag, witness center or None).

    The grid is refined to d/refine. The ball diameter is d as stated, i.e.
    radius d/2 (not radius d; the two readings differ by a factor of two and
    this implementation takes the stricter one).
    """
    fps = ifs.fixed_point_array()
    if len(fps) == 0:
        return False, region.center
    centers = region.grid(d / refine)
    tree = cKDTree(fps)
    dist, _ = tree.query(centers, k=1, p=np.inf)
    bad = dist >= d / 2.0
    if np.any(bad):
        return False, centers[int(np.nonzero(bad)[0][0])]
    return True, None


# ---------------------------------------------------------------------------
# translated-contraction construction
# ---------------------------------------------------------------------------

def translate_map(phi: SmoothMap, c: np.ndarray, name: str) -> SmoothMap:
    """phi + c, inheriting bounds; inverse is y -> phi^-1(y - c)."""
    c = np.asarray(c, dtype=float)
    out = SmoothMap(
        domain=phi.domain,
        codomain=phi.codomain,
        fn=lambda x: phi.fn(x) + c,
        jac=phi.jac,
        name=name,
        lam=phi.lam,
        lip=phi.lip,
        affine=None if phi.affine is None else (phi.affine[0], phi.affine[1] + c),
    )
    if phi.inverse is not None:
        base_inv = phi.inverse
        out.inverse = SmoothMap(
            domain=phi.codomain,
            codomain=phi.domain,
            fn=lambda y: base_inv.fn(y - c),
            jac=base_inv.jac,
            name=name + "^-1",
            lam=base_inv.lam,
            lip=base_inv.lip,
            affine=None
            if base_inv.affine is None
            else (base_inv.affine[0], base_inv.affine[1] - base_inv.affine[0] @ c),
            inverse=out,
        )
    return out


def construct_translations(phi: SmoothMap, lam: float, eps: float) -> IFS:
    """Translated copies of a contraction fixing 0, certified on B_eps(0).

    The first k1 translations place images so that they cover the ball; the
    second k1 are (id - phi)(z_i) for grid points z_i, so each has z_i as
    its fixed point and the fixed points sit densely enough for the ball of
    diameter d to always catch one. Both batches share one grid of spacing
    eps*lam/2, which keeps the two counts equal.
    """
    if not 0.0 < lam < 1.0:
        raise LambdaOutOfRange(f"contraction bound must be in (0,1), got {lam}")
    if phi.lam is not None and lam > phi.lam + 1e-12:
        raise ValueError(
            f"declared bound {lam} exceeds the map's contraction bound {phi.lam}"
        )
    space = phi.domain
    n = space.dim
    origin = np.zeros(n)
    if float(np.max(np.abs(phi(origin)))) > 1e-9:
        raise ValueError("construct_translations expects phi(0) = 0")
    lip = phi.lip if phi.lip is not None else lam
    if lip + eps * (1.0 + lip) > 1.0 + 1e-12:
        raise ValueError(
            f"translated images would exit the unit domain: lip={lip}, eps={eps}"
        )

    centers = eps * cover_unit_ball(n, lam / 4.0)
    k1 = len(centers)
    gens = [phi]
    for i, c in enumerate(centers):
        gens.append(translate_map(phi, c, name=f"{phi.name}+c{i}"))
    for i, z in enumerate(centers):
        c = z - phi(z)  # fixed point of phi + c is exactly z
        gens.append(translate_map(phi, c, name=f"{phi.name}+z{i}"))

    region = Box.ball(space, origin, eps)
    out = IFS(generators=gens, domain_region=region)
    out.info = {"k1": k1, "k": 2 * k1, "eps": eps, "lam": lam, "grid": centers}
    return out


# ---------------------------------------------------------------------------
# backward itineraries and density words
# ---------------------------------------------------------------------------

def backward_itinerary(
    ifs: IFS, x, steps: int, cert: CoveringCertificate
) -> Word:
    """Word sigma with every partial inverse composition staying in the region.

    Each symbol comes from the covering assignment of the current cell, so
    the pullback of the point is guaranteed back inside the region.
    """
    p = np.asarray(x, dtype=float)
    if not cert.region.contains(p, tol=1e-9):
        raise Uncovered("point outside the certified region", witness=p)
    word = []
    for _ in range(steps):
        gi = cert.assign(p)
        p = ifs.generators[gi].invert(p)
        if not cert.region.contains(p, tol=1e-9):
            raise Uncovered("pullback escaped the region", witness=p)
        word.append(gi)
    return tuple(word)


def _pullback_box(gen: SmoothMap, region: Box, box: Box) -> Box:
    """An inner box of gen^-1(box intersect gen(region)) intersect region.

    Positive-diagonal affine generators get the exact pullback; general
    generators get the inscribed ball around the pulled-back center, whose
    radius grows by at least 1/lip.
    """
    diag = _diag_image_box(gen, region)
    if diag is not None:
        img_lo, img_hi = diag
        a = np.diag(gen.affine[0])
        b = gen.affine[1]
        lo = (np.maximum(box.lo, img_lo) - b) / a
        hi = (np.minimum(box.hi, img_hi) - b) / a
        lo = np.maximum(lo, region.lo)
        hi = np.minimum(hi, region.hi)
        if np.any(hi < lo):
            raise StepLimit("pullback left the certified region")
        return Box(region.space, lo, hi)
    c = np.asarray(box.center, dtype=float)
    clear = float(box.clearance(c))
    pulled_c = gen.invert(c)
    rho = clear / gen.lip
    return Box.ball(region.space, pulled_c, rho).intersect(region)


def certify_density(
    ifs: IFS,
    seed,
    target: Box,
    max_steps: int,
    cert: CoveringCertificate,
) -> Word:
    """Word carrying the seed strictly inside the target ball.

    Backward construction: pull the target ball back through inverse
    generators chosen by the covering assignment of its center, the radius
    growing by at least 1/lip per step, until the pulled-back set either
    reaches the seed itself or surrounds a generator fixed point with room
    to spare; in the latter case a prefix of that generator contracts the
    seed into the slack. The returned word is replay-validated.
    """
    if cert is None:
        raise Uncovered("covering certificate required", witness=None)
    seed = np.asarray(seed, dtype=float)
    space = ifs.space
    region = cert.region
    fps = ifs.fixed_point_array()
    _, lip = ifs.contraction_bounds()

    def lands(word: Word) -> bool:
        landed = apply_word(ifs.generators, word, seed)
        return space.distance(landed, target.center) < target.radius

    lo = np.maximum(target.lo, region.lo)
    hi = np.minimum(target.hi, region.hi)
    if np.any(hi < lo):
        raise StepLimit("target ball lies outside the certified region")
    B = Box(space, lo, hi)
    word_rev: list[int] = []
    for _ in range(max_steps + 1):
        if B.contains(seed, tol=1e-12):
            word = tuple(reversed(word_rev))
            if lands(word):
                return word
        # fixed-point capture: needs enough clearance that the seed can be
        # contracted into it by repeating that generator
        clear = np.minimum(B.hi - fps, fps - B.lo).min(axis=1)
        zi = int(np.argmax(clear))
        if clear[zi] > 0.25 * B.radius:
            z = fps[zi]
            g = ifs.generators[zi]
            prefix: list[int] = []
            p = seed.copy()
            ok = True
            while space.distance(p, z) >= 0.9 * clear[zi]:
                if len(prefix) + len(word_rev) > max_steps:
                    ok = False
                    break
                p = g(p)
                prefix.append(zi)
            if ok:
                word = tuple(prefix) + tuple(reversed(word_rev))
                if lands(word):
                    return word
        if len(word_rev) >= max_steps:
            break
        gi = cert.assign(B.center)
        B = _pullback_box(ifs.generators[gi], region, B)
        word_rev.append(gi)
    raise StepLimit(f"no capture within {max_steps} pullback steps")


def density_step_bound(target_radius: float, region_diam: float, lip: float) -> int:
    """Analytic pullback-step bound log(diam/r)/log(1/lip), rounded up."""
    return int(math.ceil(math.log(region_diam / target_radius) / math.log(1.0 / lip))) + 1
