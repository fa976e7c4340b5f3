"""Entropic Ruzsa distance, its conditional form, and executable checks of
the standard entropy inequalities around it.

Every ``*_check`` function returns slacks (rhs minus lhs, in nats) so a
negative value beyond :data:`acw.config.SLACK_TOL` is a violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import FIBER_WEIGHT_FLOOR, SLACK_TOL, get_caps
from .dist import (
    Dist,
    FiberFamily,
    _same_group,
    convolve,
    entropy,
    family_from_pair,
    iterate_sum,
    kl_divergence,
    product,
    push_forward,
    uniform_on,
)
from .errors import GroupMismatch, InsufficientMass
from .groups import Group, Homomorphism

LOG2 = math.log(2.0)


def ruzsa_dist(p: Dist, q: Dist) -> float:
    """d[X;Y] = H(X' - Y') - H(X)/2 - H(Y)/2 for independent copies."""
    _same_group(p, q)
    return entropy(convolve(p, q, -1)) - 0.5 * entropy(p) - 0.5 * entropy(q)


# -- conditional distance ------------------------------------------------------


def single_family(p: Dist) -> FiberFamily:
    """The trivial conditioning: one fiber equal to ``p`` with weight 1."""
    return FiberFamily(p, 1, np.zeros(1, dtype=np.int64), np.ones(1), [p])


def family_by_map(p: Dist, pi: Homomorphism) -> FiberFamily:
    """Fibers of Z given pi(Z), keyed by the flat index of pi(Z)."""
    if p.group != pi.source:
        raise GroupMismatch("distribution does not live on the homomorphism's source")
    labels = pi.apply_index(p.idx)
    ts, inv = np.unique(labels, return_inverse=True)
    weights = np.bincount(inv, weights=p.p, minlength=ts.size)
    keep = weights >= FIBER_WEIGHT_FLOOR
    fibers = []
    for j in np.flatnonzero(keep):
        sel = inv == j
        fibers.append(Dist.from_arrays(p.group, p.idx[sel], p.p[sel]))
    w = weights[keep]
    return FiberFamily(p, 1, ts[keep], w / w.sum(), fibers)


def _normalized(f: FiberFamily) -> np.ndarray:
    return f.weights / f.weights.sum()


def _dense_stack(fams: list[Dist], g: Group) -> np.ndarray:
    out = np.zeros((len(fams), g.order))
    for i, f in enumerate(fams):
        out[i, f.idx] = f.p
    return out.reshape((len(fams),) + g.shape)


def _flatten(fibers: list[Dist]):
    fid = np.concatenate([np.full(f.size, i, dtype=np.int64) for i, f in enumerate(fibers)])
    idx = np.concatenate([f.idx for f in fibers])
    mass = np.concatenate([f.p for f in fibers])
    return fid, idx, mass


def _cross_sparse(g: Group, fa: list, fb: list, wa, wb) -> float:
    """All fiber-pair differences at once: one key per (pair, difference atom)."""
    ia, xa, ma = _flatten(fa)
    ib, xb, mb = _flatten(fb)
    pair = ia[:, None] * len(fb) + ib[None, :]
    key = (pair * g.order + g.add(xa[:, None], xb[None, :], -1)).ravel()
    uniq, inv = np.unique(key, return_inverse=True)
    agg = np.bincount(inv, weights=(ma[:, None] * mb[None, :]).ravel(), minlength=uniq.size)
    contrib = np.where(agg > 0, -agg * np.log(np.where(agg > 0, agg, 1.0)), 0.0)
    h = np.bincount(uniq // g.order, weights=contrib, minlength=len(fa) * len(fb))
    return float((np.outer(wa, wb).ravel() * h).sum())


def _cross_difference_entropy(pf: FiberFamily, qf: FiberFamily) -> float:
    """E_{t,s} H(F_t - G_s) over the product of the two fiber weightings."""
    g = pf.base.group
    wp, wq = _normalized(pf), _normalized(qf)
    npairs = len(pf.fibers) * len(qf.fibers)
    axes = tuple(range(1, g.rank + 1))
    sp = sum(f.size for f in pf.fibers)
    sq = sum(f.size for f in qf.fibers)
    if sp * sq <= 1 << 22:
        return _cross_sparse(g, pf.fibers, qf.fibers, wp, wq)
    if g.order <= 4096 and npairs * g.order <= 1 << 26 and npairs > 4:
        # batched transforms: the FFT of F_t - G_s is fft(F_t) * conj(fft(G_s))
        fp = np.fft.fftn(_dense_stack(pf.fibers, g), axes=axes).reshape(len(pf.fibers), -1)
        fq = np.conj(np.fft.fftn(_dense_stack(qf.fibers, g), axes=axes)).reshape(len(qf.fibers), -1)
        total = 0.0
        for i in range(fp.shape[0]):
            prod = (fp[i][None, :] * fq).reshape((fq.shape[0],) + g.shape)
            dens = np.fft.ifftn(prod, axes=axes).real.reshape(fq.shape[0], -1)
            dens[dens < 1e-15] = 0.0
            dens /= dens.sum(axis=1, keepdims=True)
            with np.errstate(divide="ignore", invalid="ignore"):
                h = -np.where(dens > 0, dens * np.log(dens), 0.0).sum(axis=1)
            total += wp[i] * float(np.dot(wq, h))
        return total
    total = 0.0
    for wi, fi in zip(wp, pf.fibers):
        for wj, fj in zip(wq, qf.fibers):
            total += wi * wj * entropy(convolve(fi, fj, -1))
    return total


def cond_ruzsa_dist(pf: FiberFamily, qf: FiberFamily) -> float:
    """E_{t,s} d[X|T=t; Y|S=s] with product weighting over fibers."""
    if pf.base.group != qf.base.group:
        raise GroupMismatch("fiber families live on different groups")
    wp, wq = _normalized(pf), _normalized(qf)
    hp = float(sum(w * entropy(f) for w, f in zip(wp, pf.fibers)))
    hq = float(sum(w * entropy(f) for w, f in zip(wq, qf.fibers)))
    return _cross_difference_entropy(pf, qf) - 0.5 * hp - 0.5 * hq


def brute_cond_ruzsa_dist(pf: FiberFamily, qf: FiberFamily) -> float:
    """Reference double loop over fiber pairs (test oracle)."""
    wp, wq = _normalized(pf), _normalized(qf)
    return float(
        sum(
            wi * wj * ruzsa_dist(fi, fj)
            for wi, fi in zip(wp, pf.fibers)
            for wj, fj in zip(wq, qf.fibers)
        )
    )


# -- inequality reports ----------------------------------------------------------


@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= -SLACK_TOL

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "slack": self.slack, "holds": self.holds}


@dataclass(frozen=True)
class ErcReport:
    entries: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(e.holds for e in self.entries)

    def __getitem__(self, name: str) -> Inequality:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_json(self) -> list:
        return [e.to_json() for e in self.entries]


def erc_check(p: Dist, q: Dist, r: Dist) -> ErcReport:
    """Evaluate the five Ruzsa-calculus inequalities for X~p, Y~q, Z~r."""
    _same_group(p, q)
    _same_group(q, r)
    hx, hy, hz = entropy(p), entropy(q), entropy(r)
    dxy, dyz, dxz = ruzsa_dist(p, q), ruzsa_dist(q, r), ruzsa_dist(p, r)
    d_x_negy = ruzsa_dist(p, q.neg())
    yz = convolve(q, r)
    h_yz = entropy(yz)
    h_xy = entropy(convolve(p, q))
    h_xyz = entropy(convolve(convolve(p, q), r))
    cond = cond_ruzsa_dist(single_family(p), family_from_pair(q, r))
    return ErcReport([
        Inequality("triangle", dxz, dxy + dyz),
        Inequality("negation", d_x_negy, 3 * dxy),
        Inequality("conditioning", cond, dxy + 0.5 * (h_yz - hz)),
        Inequality("submodularity", h_xyz - h_xy, h_yz - hy),
        Inequality("entropy_gap", abs(hx - hy), 2 * dxy),
    ])


def support_bound_check(p: Dist) -> float:
    """log|supp| - H(p)."""
    return math.log(p.size) - entropy(p)


def renyi_order_check(p: Dist) -> tuple[float, float]:
    """Slacks of H_2 <= H <= H_0."""
    h = entropy(p)
    h2 = -math.log(float((p.p ** 2).sum()))
    return h - h2, math.log(p.size) - h


def pinsker_check(p: Dist, q: Dist) -> float | None:
    """2 KL(p||q) - ||p - q||_1^2, or None when the divergence is infinite."""
    from .dist import l1_distance

    kl = kl_divergence(p, q)
    if math.isinf(kl):
        return None
    return 2 * kl - l1_distance(p, q) ** 2


def sum_entropy_gap(pX: Dist, pY: Dist, pZ: Dist) -> Inequality:
    """H(Z - Y) - H(Y) against E_z KL(z - Y || X).

    The two sides agree when X is distributed as Z - Y.
    """
    lhs = entropy(convolve(pZ, pY, -1)) - entropy(pY)
    negY = pY.neg()
    rhs = 0.0
    for z, w in zip(pZ.idx.tolist(), pZ.p.tolist()):
        kl = kl_divergence(negY.translate(z), pX)
        if math.isinf(kl):
            rhs = math.inf
            break
        rhs += w * kl
    return Inequality("sum_entropy", lhs, rhs)


def fibring_check(pi: Homomorphism, p1: Dist, p2: Dist) -> float:
    """d[Z1;Z2] - d[pi Z1; pi Z2] - d[Z1|pi Z1; Z2|pi Z2]."""
    _same_group(p1, p2)
    if p1.group != pi.source:
        raise GroupMismatch("distributions do not live on the homomorphism's source")
    lhs = ruzsa_dist(p1, p2)
    rhs = ruzsa_dist(push_forward(pi, p1), push_forward(pi, p2))
    rhs += cond_ruzsa_dist(family_by_map(p1, pi), family_by_map(p2, pi))
    return lhs - rhs


def fibring_application_check(p: Dist, q: Dist, n: int) -> float:
    """d[X;Y] + d[(n-1)X;(n-1)Y] - d[nX;nY] - d[X|nX; Y|nY]."""
    if n < 2:
        raise ValueError("n must be >= 2")
    _same_group(p, q)
    pr, qr = iterate_sum(p, n - 1), iterate_sum(q, n - 1)
    lhs = ruzsa_dist(p, q) + ruzsa_dist(pr, qr)
    rhs = ruzsa_dist(convolve(p, pr), convolve(q, qr))
    rhs += cond_ruzsa_dist(family_from_pair(p, pr, n), family_from_pair(q, qr, n))
    return lhs - rhs


# -- zero-distance structure -------------------------------------------------------


def _stabilizer(g: Group, supp: np.ndarray) -> np.ndarray:
    """{h : supp + h = supp}; its elements all lie in supp - supp[0]."""
    cand = g.add(supp, supp[0], -1)
    keep = [h for h in cand.tolist() if np.isin(g.add(supp, h), supp, assume_unique=True).all()]
    return np.sort(np.array(keep, dtype=np.int64))


def coset_structure_detect(p: Dist, tol: float = 1e-6):
    """Return (H, s) when p is within l1 ``tol`` of uniform on s + H, else None.

    H is a sorted array of flat indices, s is the smallest flat index of the
    coset. The candidate H is the stabilizer of the support (or of the heavy
    atoms when light atoms break the symmetry).
    """
    g = p.group
    candidates = [p.idx]
    heavy = p.idx[p.p >= 0.5 * p.p.max()]
    if heavy.size != p.idx.size:
        candidates.append(heavy)
    for supp in candidates:
        H = _stabilizer(g, supp)
        coset = np.sort(g.add(H, supp[0]))
        if coset.size != supp.size:
            continue
        u = uniform_on(g, coset)
        union = np.union1d(p.idx, coset)
        if np.abs(p.mass_at(union) - u.mass_at(union)).sum() <= tol:
            return H, int(coset[0])
    return None


def concentration_check(p: Dist, q: Dist, S) -> float:
    """log|S| - (H(Y) - 4 d[X;Y] - 2 log 2), requiring P(X in S) >= 1/2."""
    g = _same_group(p, q)
    S = np.unique(g.as_index(S) if not isinstance(S, np.ndarray) else S)
    mass = float(p.mass_at(S).sum())
    if mass < 0.5 - 1e-12:
        raise InsufficientMass(f"P(X in S) = {mass:.6g} < 1/2")
    return math.log(S.size) - (entropy(q) - 4 * ruzsa_dist(p, q) - 2 * LOG2)


# -- randomized suite ------------------------------------------------------------


def random_group(rng: np.random.Generator, max_order: int) -> Group:
    """A random product of at most three cyclic factors of order in [2, max_order]."""
    while True:
        k = int(rng.integers(1, 4))
        mods = [int(rng.integers(2, max(3, round(max_order ** (1 / k)) + 1))) for _ in range(k)]
        if 2 <= math.prod(mods) <= max_order:
            return Group(tuple(mods))


def random_dist(rng: np.random.Generator, g: Group, max_support: int = 12) -> Dist:
    size = int(rng.integers(1, min(g.order, max_support) + 1))
    idx = rng.choice(g.order, size=size, replace=False)
    w = rng.dirichlet(np.full(size, float(rng.choice([0.3, 1.0, 5.0]))))
    return Dist.from_arrays(g, idx, w)


def verify_calculus(cases: int, seed: int, group_max: int, max_support: int = 12) -> dict:
    """Run every inequality on random instances; return worst slacks per name."""
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}

    def rec(name, slack):
        if slack is None:
            return
        worst[name] = min(worst.get(name, math.inf), float(slack))

    for _ in range(cases):
        g = random_group(rng, group_max)
        p, q, r = (random_dist(rng, g, max_support) for _ in range(3))
        rec("support_bound", support_bound_check(p))
        lo, hi = renyi_order_check(p)
        rec("renyi_lower", lo)
        rec("renyi_upper", hi)
        rec("pinsker", pinsker_check(p, q))
        # a full-support X keeps the divergence finite
        x_full = Dist.from_dense(g, 0.5 * p.dense() + 0.5 / g.order)
        rec("sum_entropy", sum_entropy_gap(x_full, q, r).slack)
        # flattened weights keep every atom of Z - Y above the mass floor
        qf, rf = (Dist.from_arrays(g, d.idx, 0.5 * d.p + 0.5 / d.idx.size) for d in (q, r))
        eq = sum_entropy_gap(convolve(rf, qf, -1), qf, rf)
        rec("sum_entropy_equality", -abs(eq.slack))
        for e in erc_check(p, q, r).entries:
            rec(e.name, e.slack)
        p2, q2 = product(p, q), product(r, p)
        rec("fibring_addition", fibring_check(Homomorphism.addition(g), p2, q2))
        rec("fibring_projection", fibring_check(Homomorphism.projection(g, g), p2, q2))
        for n in (2, 3):
            rec(f"fibring_application_n{n}", fibring_application_check(p, q, n))
    violations = {k: v for k, v in worst.items() if v < -SLACK_TOL}
    return {
        "cases": cases,
        "seed": seed,
        "group_max": group_max,
        "worst_slack": worst,
        "violations": sorted(violations),
        "ok": not violations,
    }
