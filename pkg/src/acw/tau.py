"""The tau functional, its fiber-conditioning decrement search, and growth
certificates for the resulting distributions.

tau[X;Y] = d[X;Y] + w_K (d[X;U_A] + d[Y;U_A]) with
w_K = eta / (loglog(16K) * logloglog(16K)) and eta = 1/1009.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SLACK_TOL, get_caps, require
from .dist import Dist, _same_group, convolve, entropy, iter_fibers, iterate_sum, uniform_on
from .errors import CapExceeded, DegenerateK, EmptySet, SupportEscape
from .groups import Group
from . import kernels
from .ruzsa import ruzsa_dist

ETA = 1.0 / 1009
DECREMENT_MARGIN = 1e-9


def loglog(x: float) -> float:
    return math.log(math.log(x))


def logloglog(x: float) -> float:
    return math.log(math.log(math.log(x)))


@dataclass(frozen=True, eq=False)
class DoublingStats:
    group: Group
    A: np.ndarray
    sumset_size: int
    K: float
    logK16: float
    loglog: float
    logloglog: float

    @property
    def size(self) -> int:
        return int(self.A.size)

    @property
    def degenerate(self) -> bool:
        return not self.logloglog > 0

    @property
    def weight(self) -> float:
        """eta / (loglog(16K) logloglog(16K)); zero when undefined."""
        if self.degenerate:
            return 0.0
        return ETA / (self.loglog * self.logloglog)

    @property
    def uniform(self) -> Dist:
        return uniform_on(self.group, self.A)

    @property
    def paper_n_hi(self) -> int:
        """floor(log(K)^6), the range of n over which the decrement argument runs."""
        return int(math.floor(math.log(self.K) ** 6)) if self.K > 1 else 0

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "sumset_size": self.sumset_size,
            "K": self.K,
            "log_16K": self.logK16,
            "loglog_16K": self.loglog,
            "logloglog_16K": self.logloglog,
            "tau_weight": self.weight,
        }


def sumset_size(g: Group, A: np.ndarray, B: np.ndarray | None = None, sign: int = 1) -> int:
    B = A if B is None else B
    caps = get_caps()
    if A.size * B.size <= caps.sumset_pairs and g.order <= caps.enum_order:
        return int(kernels.sumset_mask(g, A, B, sign).sum())
    if g.order <= caps.dft_order:
        a = np.zeros(g.order)
        b = np.zeros(g.order)
        a[A] = 1.0
        b[B] = 1.0
        if sign == -1:
            b = b[g.neg(np.arange(g.order))]
        fa = np.fft.fftn(a.reshape(g.shape))
        fb = np.fft.fftn(b.reshape(g.shape))
        return int((np.fft.ifftn(fa * fb).real > 0.5).sum())
    raise CapExceeded(f"sumset of {A.size}x{B.size} in a group of order {g.order}")


def doubling_constant(g: Group, A) -> DoublingStats:
    A = np.unique(g.as_index(A) if not isinstance(A, np.ndarray) else A).astype(np.int64)
    if A.size == 0:
        raise EmptySet("doubling constant of an empty set")
    s = sumset_size(g, A)
    K = s / A.size
    l1 = math.log(16 * K)
    l2 = math.log(l1)
    l3 = math.log(l2) if l2 > 0 else -math.inf
    return DoublingStats(g, A, s, K, l1, l2, l3)


def _check_support(p: Dist, stats: DoublingStats) -> None:
    if not np.isin(p.idx, stats.A, assume_unique=True).all():
        raise SupportEscape("distribution is not supported on A")


def tau_eval(p: Dist, q: Dist, stats: DoublingStats, *, allow_degenerate: bool = False) -> float:
    _same_group(p, q)
    if stats.degenerate and not allow_degenerate:
        raise DegenerateK(f"logloglog(16K) <= 0 at K = {stats.K}")
    _check_support(p, stats)
    _check_support(q, stats)
    u = stats.uniform
    return ruzsa_dist(p, q) + stats.weight * (ruzsa_dist(p, u) + ruzsa_dist(q, u))


# -- decrement search ------------------------------------------------------------


@dataclass
class _DistanceCache:
    """Translation-invariant memo of d[f; U_A] and d[f; g]."""

    stats: DoublingStats
    to_uniform: dict = field(default_factory=dict)
    pair: dict = field(default_factory=dict)

    def du(self, f: Dist) -> float:
        key = f.canonical_key()
        val = self.to_uniform.get(key)
        if val is None:
            val = self.to_uniform[key] = ruzsa_dist(f, self.stats.uniform)
        return val

    def d(self, f: Dist, fk: bytes, g: Dist, gk: bytes) -> float:
        key = (fk, gk)
        val = self.pair.get(key)
        if val is None:
            val = self.pair[key] = ruzsa_dist(f, g)
        return val


@dataclass(frozen=True)
class Decrement:
    n: int
    t: int
    s: int
    p: Dist
    q: Dist
    tau_before: float
    tau_after: float
    d_XY: float
    d_XUA: float
    d_YUA: float


def decrement_search(p: Dist, q: Dist, stats: DoublingStats, n_lo: int = 2, n_hi: int = 2,
                     *, cache: _DistanceCache | None = None) -> Decrement | None:
    """First (n, t, s), in increasing n then lexicographic (t, s), whose fiber
    pair lowers tau by at least the decrement margin; None if there is none."""
    if not 2 <= n_lo <= n_hi:
        raise ValueError("need 2 <= n_lo <= n_hi")
    tau0 = tau_eval(p, q, stats, allow_degenerate=True)
    if tau0 <= DECREMENT_MARGIN:
        return None
    target = tau0 - DECREMENT_MARGIN
    w = stats.weight
    cache = cache or _DistanceCache(stats)
    for n in range(n_lo, n_hi + 1):
        pr = iterate_sum(p, n - 1)
        qr = iterate_sum(q, n - 1)
        q_fibers = [(s, f, f.canonical_key()) for s, _, f in iter_fibers(q, qr)]
        q_du = np.array([cache.du(f) for _, f, _ in q_fibers])
        best_q_du = float(q_du.min())
        for t, _, ft in iter_fibers(p, pr):
            du_t = cache.du(ft)
            # d >= 0, so the penalty alone bounds tau from below
            if w * (du_t + best_q_du) >= target:
                continue
            kt = ft.canonical_key()
            for (s, gs, ks), du_s in zip(q_fibers, q_du):
                if w * (du_t + du_s) >= target:
                    continue
                d = cache.d(ft, kt, gs, ks)
                tau1 = d + w * (du_t + du_s)
                if tau1 <= target:
                    return Decrement(n, t, s, ft, gs, tau0, float(tau1), d, du_t, float(du_s))
    return None


def brute_decrement_search(p: Dist, q: Dist, stats: DoublingStats, n_lo: int, n_hi: int):
    """Reference scan: evaluate tau on every fiber pair, no pruning or caching."""
    tau0 = tau_eval(p, q, stats, allow_degenerate=True)
    if tau0 <= DECREMENT_MARGIN:
        return None
    for n in range(n_lo, n_hi + 1):
        pf = list(iter_fibers(p, iterate_sum(p, n - 1)))
        qf = list(iter_fibers(q, iterate_sum(q, n - 1)))
        for t, _, ft in pf:
            for s, _, gs in qf:
                tau1 = tau_eval(ft, gs, stats, allow_degenerate=True)
                if tau1 <= tau0 - DECREMENT_MARGIN:
                    return n, t, s, tau1
    return None


def averaged_fiber_tau(p: Dist, q: Dist, stats: DoublingStats, n: int) -> float:
    """E_{t,s} tau[X|nX=t; Y|nY=s] under the product of fiber weights."""
    pf = list(iter_fibers(p, iterate_sum(p, n - 1)))
    qf = list(iter_fibers(q, iterate_sum(q, n - 1)))
    wp = np.array([w for _, w, _ in pf])
    wq = np.array([w for _, w, _ in qf])
    wp, wq = wp / wp.sum(), wq / wq.sum()
    cache = _DistanceCache(stats)
    total = 0.0
    for a, (_, _, ft) in zip(wp, pf):
        kt = ft.canonical_key()
        for b, (_, _, gs) in zip(wq, qf):
            d = cache.d(ft, kt, gs, gs.canonical_key())
            total += a * b * (d + stats.weight * (cache.du(ft) + cache.du(gs)))
    return total


# -- minimisation ----------------------------------------------------------------


@dataclass
class TauTrace:
    steps: list = field(default_factory=list)
    terminal_pair: tuple | None = None
    n_max_searched: int = 0
    tau_start: float = 0.0
    tau_end: float = 0.0
    terminated: bool = False        # True when no fiber move improves tau
    degenerate_k: bool = False
    paper_n_hi: int = 0
    polish: dict | None = None

    @property
    def taus(self) -> list[float]:
        return [self.tau_start] + [s["tau_after"] for s in self.steps]

    def check_invariants(self) -> bool:
        prev = self.tau_start
        for s in self.steps:
            if not (s["tau_before"] == prev and s["tau_after"] <= s["tau_before"] - DECREMENT_MARGIN):
                return False
            prev = s["tau_after"]
        return True

    def to_json(self, group: Group) -> dict:
        from .io import dist_to_json

        return {
            "steps": self.steps,
            "tau_start": self.tau_start,
            "tau_end": self.tau_end,
            "n_max_searched": self.n_max_searched,
            "paper_n_hi": self.paper_n_hi,
            "n_range_gap": self.paper_n_hi > self.n_max_searched,
            "terminated": self.terminated,
            "degenerate_k": self.degenerate_k,
            "terminal_pair": [dist_to_json(d) for d in self.terminal_pair] if self.terminal_pair else None,
            "polish": self.polish,
        }


def default_n_hi(stats: DoublingStats) -> int:
    return max(2, min(stats.paper_n_hi, 24))


def minimize_tau(g: Group, A, stats: DoublingStats | None = None, n_hi: int | None = None,
                 max_steps: int = 50, *, polish: bool = False) -> tuple[Dist, Dist, TauTrace]:
    """Start at (U_A, U_A) and apply decrement moves until none is found."""
    stats = stats or doubling_constant(g, A)
    n_hi = default_n_hi(stats) if n_hi is None else n_hi
    p = q = stats.uniform
    trace = TauTrace(n_max_searched=n_hi, degenerate_k=stats.degenerate,
                     paper_n_hi=stats.paper_n_hi)
    trace.tau_start = tau_eval(p, q, stats, allow_degenerate=True)
    cache = _DistanceCache(stats)
    for _ in range(max_steps):
        step = decrement_search(p, q, stats, 2, n_hi, cache=cache)
        if step is None:
            trace.terminated = True
            break
        trace.steps.append({
            "n": step.n, "t": list(g.element(step.t)), "s": list(g.element(step.s)),
            "tau_before": step.tau_before, "tau_after": step.tau_after,
            "d_XY": step.d_XY, "d_XUA": step.d_XUA, "d_YUA": step.d_YUA,
        })
        p, q = step.p, step.q
    else:
        trace.terminated = decrement_search(p, q, stats, 2, n_hi, cache=cache) is None
    # tau is recomputed from the pair, not copied from the last step
    trace.tau_end = tau_eval(p, q, stats, allow_degenerate=True)
    if polish:
        pp, qq, info = polish_pair(p, q, stats)
        trace.polish = info
        if info["accepted"]:
            p, q = pp, qq
    trace.terminal_pair = (p, q)
    return p, q, trace


# -- projected-gradient polish (heuristic) ----------------------------------------


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u * k > css - 1)[0][-1]
    theta = (css[rho] - 1) / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _dense_conv(g: Group, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    fa = np.fft.fftn(a.reshape(g.shape))
    fb = np.fft.fftn(b.reshape(g.shape))
    return np.fft.ifftn(fa * fb).real.ravel()


def _tau_gradient(g: Group, neg: np.ndarray, p: np.ndarray, q: np.ndarray,
                  u: np.ndarray, w: float) -> tuple[np.ndarray, np.ndarray]:
    def grad_pair(a, b):
        # d[a;b] = H(a - b) - H(a)/2 - H(b)/2 on dense pmfs
        r = np.maximum(_dense_conv(g, a, b[neg]), 1e-300)
        L = np.log(r) + 1.0
        ga = -_dense_conv(g, L, b) + 0.5 * (np.log(np.maximum(a, 1e-12)) + 1.0)
        gb = -_dense_conv(g, L[neg], a)[neg] + 0.5 * (np.log(np.maximum(b, 1e-12)) + 1.0)
        return ga, gb

    gp, gq = grad_pair(p, q)
    gpu, _ = grad_pair(p, u)
    gqu, _ = grad_pair(q, u)
    return gp + w * gpu, gq + w * gqu


def polish_pair(p: Dist, q: Dist, stats: DoublingStats, step: float = 1e-2,
                iterations: int = 200) -> tuple[Dist, Dist, dict]:
    """Projected gradient descent on the pmf simplex over A (heuristic).

    The result replaces the input only when tau decreases.
    """
    g = p.group
    require(g.order, "dft_order", "gradient polish")
    A = stats.A
    neg = g.neg(np.arange(g.order))
    u = stats.uniform.dense()
    pd, qd = p.dense(), q.dense()
    tau0 = tau_eval(p, q, stats, allow_degenerate=True)
    best = (tau0, p, q)
    for _ in range(iterations):
        gp, gq = _tau_gradient(g, neg, pd, qd, u, stats.weight)
        pa = project_simplex(pd[A] - step * gp[A])
        qa = project_simplex(qd[A] - step * gq[A])
        pd = np.zeros(g.order)
        qd = np.zeros(g.order)
        pd[A], qd[A] = pa, qa
        pp = Dist.from_arrays(g, A, pa)
        qq = Dist.from_arrays(g, A, qa)
        t = tau_eval(pp, qq, stats, allow_degenerate=True)
        if t < best[0]:
            best = (t, pp, qq)
    accepted = best[0] < tau0 - DECREMENT_MARGIN
    info = {"heuristic": True, "tau_before": tau0, "tau_after": best[0],
            "accepted": bool(accepted), "step": step, "iterations": iterations}
    return (best[1], best[2], info) if accepted else (p, q, info)


# -- growth --------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthCertificate:
    d_hat: float
    scale: int
    entropies: list

    def holds_at(self, d: float) -> bool:
        h1 = self.entropies[0]
        return all(h <= h1 + d * math.log(n) + SLACK_TOL
                   for n, h in enumerate(self.entropies, start=1))

    def to_json(self) -> dict:
        return {"d_hat": self.d_hat, "scale": self.scale, "entropies": self.entropies}


def sum_entropies(p: Dist, N: int) -> list[float]:
    """[H(X), H(2X), ..., H(NX)] by successive convolution."""
    out = [entropy(p)]
    cur = p
    for _ in range(2, N + 1):
        cur = convolve(cur, p)
        out.append(entropy(cur))
    return out


def growth_certificate(p: Dist, N: int) -> GrowthCertificate:
    if N < 2:
        raise ValueError("scale must be >= 2")
    hs = sum_entropies(p, N)
    d_hat = max(0.0, max((hs[n - 1] - hs[0]) / math.log(n) for n in range(2, N + 1)))
    return GrowthCertificate(d_hat, N, hs)


def distance_of_sums_check(p: Dist, q: Dist, k_log: float, n_hi: int) -> list[float]:
    """For n = 2..n_hi, d[nX;nY] - (k_log + k_log loglog(16n)); <= 0 expected."""
    if n_hi < 2:
        raise ValueError("n_hi must be >= 2")
    out = []
    pn, qn = p, q
    for n in range(2, n_hi + 1):
        pn, qn = convolve(pn, p), convolve(qn, q)
        out.append(ruzsa_dist(pn, qn) - (k_log + k_log * loglog(16 * n)))
    return out


def small_growth_index(d: float) -> int:
    """Smallest integer strictly greater than 32 d log d."""
    return int(math.floor(32 * d * math.log(d))) + 1


def small_growth_check(p: Dist, d: float) -> tuple[int, float]:
    """(n, H((n+1)X) - H(nX)) with n the smallest integer above 32 d log d."""
    if not d > 1:
        raise ValueError("d must exceed 1")
    n = small_growth_index(d)
    xn = iterate_sum(p, n)
    return n, entropy(convolve(xn, p)) - entropy(xn)
