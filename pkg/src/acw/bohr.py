"""Bohr sets and the constructions built on them.

Membership is decided with integers only. Every character is written as
gamma(x) = exp(2 pi i k / L) with L the lcm of the moduli, and
|gamma(x) - 1| = 2 sin(pi min(k, L - k) / L) is increasing in the phase
distance min(k, L - k). So x is in B(Gamma, delta) iff its largest phase
distance over Gamma is at most the integer threshold kmax(delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .config import get_caps, require
from .dist import Dist, convolve, entropy, iterate_sum, kl_divergence, uniform_on
from .errors import (
    BadRadius,
    CapExceeded,
    ContainmentFailed,
    HypothesisFailed,
    NoRegularRadiusFound,
    NotRegular,
    VerificationFailed,
)
from .fourier import dft, dft_dense, lspec, spec
from .groups import Group
from .ruzsa import ruzsa_dist

CHORD_TOL = 1e-12


def chord(L: int, k) -> np.ndarray:
    """|exp(2 pi i k / L) - 1| for phase distances k."""
    return 2.0 * np.sin(np.pi * np.asarray(k, dtype=np.float64) / L)


def phase_threshold(L: int, delta: float) -> int:
    """Largest phase distance k in [0, L/2] with 2 sin(pi k / L) <= delta."""
    half = L // 2
    if delta >= 2.0:
        return half
    k = int(math.floor(L * math.asin(min(1.0, delta / 2.0)) / math.pi))
    k = max(0, min(k, half))
    while k < half and 2 * math.sin(math.pi * (k + 1) / L) <= delta + CHORD_TOL:
        k += 1
    while k > 0 and 2 * math.sin(math.pi * k / L) > delta + CHORD_TOL:
        k -= 1
    return k


def _as_chars(g: Group, chars) -> np.ndarray:
    if isinstance(chars, np.ndarray) and chars.ndim == 1:
        return np.unique(chars.astype(np.int64))
    chars = list(chars)
    if not chars:
        return np.zeros(0, dtype=np.int64)
    return np.unique(g.as_index(chars))


def max_phase_distance(g: Group, chars: np.ndarray, cutoff: int | None = None) -> np.ndarray:
    """Per element, the max phase distance over ``chars`` (exact when <= cutoff)."""
    require(g.order, "enum_order", "Bohr membership scan")
    if chars.size == 0:
        return np.zeros(g.order, dtype=np.int64)
    cutoff = g.lcm if cutoff is None else cutoff
    return kernels.bohr_maxdist(g, g.phase_weights(chars), cutoff)


@dataclass(frozen=True, eq=False)
class BohrSetDesc:
    group: Group
    chars: np.ndarray
    radius: float
    members: np.ndarray
    kmax: int
    meta: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return int(self.chars.size)

    @property
    def size(self) -> int:
        return int(self.members.size)

    def contains(self, idx) -> np.ndarray:
        return np.isin(np.asarray(idx, dtype=np.int64), self.members)

    def to_json(self) -> dict:
        g = self.group
        return {
            "chars": [list(g.element(c)) for c in self.chars.tolist()],
            "radius": self.radius,
            "rank": self.rank,
            "size": self.size,
        }


class BohrProfile:
    """Sorted max phase distances: |B(Gamma, delta)| for any delta by bisection."""

    def __init__(self, g: Group, chars):
        self.group = g
        self.chars = _as_chars(g, chars)
        self.maxdist = max_phase_distance(g, self.chars)
        self.sorted = np.sort(self.maxdist)

    def count(self, delta: float) -> int:
        return int(np.searchsorted(self.sorted, phase_threshold(self.group.lcm, delta), "right"))

    def members(self, delta: float) -> np.ndarray:
        return np.flatnonzero(self.maxdist <= phase_threshold(self.group.lcm, delta))

    def breakpoints(self) -> np.ndarray:
        """Radii where |B| jumps: the chord lengths of the distinct max distances."""
        return chord(self.group.lcm, np.unique(self.sorted))


def bohr_set(g: Group, chars, delta: float, *, verify: bool = True) -> BohrSetDesc:
    if not 0 < delta <= 2:
        raise BadRadius(f"radius {delta} outside (0, 2]")
    chars = _as_chars(g, chars)
    kmax = phase_threshold(g.lcm, delta)
    dist = max_phase_distance(g, chars, kmax)
    members = np.flatnonzero(dist <= kmax)
    desc = BohrSetDesc(g, chars, float(delta), members, kmax)
    if verify:
        _verify_bohr(desc)
    return desc


def _verify_bohr(desc: BohrSetDesc, samples: int = 64) -> None:
    g = desc.group
    m = desc.members
    if m.size == 0 or m[0] != 0:
        raise VerificationFailed("Bohr set misses 0")
    if not np.isin(g.neg(m), m, assume_unique=True).all():
        raise VerificationFailed("Bohr set is not symmetric")
    if desc.chars.size == 0:
        return
    # recheck a deterministic sample with complex arithmetic
    pick = np.unique(np.linspace(0, g.order - 1, min(samples, g.order)).astype(np.int64))
    w = g.phase_weights(desc.chars)
    ph = (g.coords(pick) @ w.T) % g.lcm
    dev = np.abs(np.exp(2j * np.pi * ph / g.lcm) - 1).max(axis=1)
    inside = np.isin(pick, m)
    bad = inside != (dev <= desc.radius)
    if np.any(bad & (np.abs(dev - desc.radius) > 1e-9)):
        raise VerificationFailed("Bohr membership disagrees with direct evaluation")


def bohr_count(g: Group, chars, delta: float) -> int:
    """|B(chars, delta)|, with radii of 2 or more meaning the whole group."""
    if delta >= 2:
        return g.order
    return bohr_set(g, chars, delta, verify=False).size


# -- size bounds and regularity --------------------------------------------------


@dataclass(frozen=True)
class SizeCheck:
    lower_ok: bool
    doubling_ok: bool | None        # None when 2 rho exceeds 2
    size: int
    lower_bound: float
    size_double: int | None

    def __iter__(self):
        return iter((self.lower_ok, self.doubling_ok))


def bohr_size_check(desc: BohrSetDesc) -> SizeCheck:
    """|B(S,rho)| >= rho^|S| |G| and |B(S,2rho)| <= 4^|S| |B(S,rho)|, exactly."""
    g, r, s = desc.group, desc.radius, desc.rank
    lower_ok = Fraction(desc.size) >= Fraction(r) ** s * g.order
    doubling_ok = size2 = None
    if 2 * r <= 2:
        size2 = bohr_count(g, desc.chars, 2 * r)
        doubling_ok = size2 <= 4 ** s * desc.size
    return SizeCheck(bool(lower_ok), doubling_ok, desc.size, float(Fraction(r) ** s * g.order), size2)


def regularity_violation(profile: BohrProfile, rho: float, grid: int = 32) -> float:
    """Worst relative violation of the two-sided dilation estimate on a kappa grid."""
    d = profile.chars.size
    if d == 0:
        return -math.inf
    base = profile.count(rho)
    kap = np.linspace(-1 / (100 * d), 1 / (100 * d), grid)
    worst = -math.inf
    for k in kap.tolist():
        c = profile.count((1 + k) * rho)
        lo = (1 - 100 * d * abs(k)) * base
        hi = (1 + 100 * d * abs(k)) * base
        worst = max(worst, (lo - c) / base, (c - hi) / base)
    return worst


def regularity_violation_exact(profile: BohrProfile, rho: float) -> float:
    """Same estimate checked at every breakpoint of |B(S, (1+kappa) rho)|.

    The count is a right-continuous step function of the radius, so the lower
    estimate is tightest just left of a jump and the upper one right at it.
    """
    d = profile.chars.size
    if d == 0:
        return -math.inf
    L = profile.group.lcm
    base = profile.count(rho)
    kmin, kmax = -1 / (100 * d), 1 / (100 * d)
    ks = np.unique(profile.sorted)
    radii = chord(L, ks)
    kappas = radii / rho - 1
    worst = -math.inf
    counts_at = np.searchsorted(profile.sorted, ks, "right")
    counts_before = np.searchsorted(profile.sorted, ks, "left")
    for kap, c_at, c_before in zip(kappas.tolist(), counts_at.tolist(), counts_before.tolist()):
        if kmin < kap <= 0:
            worst = max(worst, ((1 - 100 * d * abs(kap)) * base - c_before) / base)
        if 0 <= kap <= kmax:
            worst = max(worst, (c_at - (1 + 100 * d * abs(kap)) * base) / base)
    for kap in (kmin, kmax):
        c = profile.count((1 + kap) * rho)
        worst = max(worst, ((1 - 100 * d * abs(kap)) * base - c) / base,
                    (c - (1 + 100 * d * abs(kap)) * base) / base)
    return worst


def regular_radius(g: Group, chars, eps: float, *, candidates: int = 64, grid: int = 32,
                   report: bool = False):
    """A radius rho in [eps, 2 eps] whose Bohr set passes the dilation grid test.

    Among passing candidates, those that also pass the exact breakpoint check
    (run when |G| <= 2^13) are preferred; ties go to the smallest worst-case
    violation, then the smallest radius.
    """
    chars = _as_chars(g, chars)
    if chars.size == 0:
        return (eps, {"violation": -math.inf, "exact": True}) if report else eps
    prof = BohrProfile(g, chars)
    exact_ok = g.order <= 2 ** 13
    best = None
    for rho in np.geomspace(eps, 2 * eps, candidates).tolist():
        v = regularity_violation(prof, rho, grid)
        if v > 0:
            continue
        ve = regularity_violation_exact(prof, rho) if exact_ok else None
        key = (0 if ve is not None and ve <= 0 else 1, v, rho)
        if best is None or key < best[0]:
            best = (key, rho, v, ve)
    if best is None:
        raise NoRegularRadiusFound(f"no radius in [{eps}, {2 * eps}] passes the grid test")
    _, rho, v, ve = best
    info = {"violation": v, "exact_violation": ve, "exact": ve is not None and ve <= 0}
    return (rho, info) if report else rho


# -- dissociated sets and Chang-type containment -----------------------------------


def dissociated_greedy(g: Group, chars, cap: int = 20) -> np.ndarray:
    """Greedy maximal dissociated subset, scanning ``chars`` in increasing order.

    A character joins iff it is not already a {-1,0,1}-combination of the
    characters kept so far; the combinations are tracked as a mask on G-hat.
    """
    chars = _as_chars(g, chars)
    require(g.order, "enum_order", "combination mask")
    comb = np.zeros(g.order, dtype=bool)
    comb[0] = True
    kept = []
    for c in chars.tolist():
        if comb[c]:
            continue
        if len(kept) >= cap:
            raise CapExceeded(f"dissociated set would exceed {cap} characters")
        kept.append(c)
        cur = np.flatnonzero(comb)
        comb[g.add(cur, c)] = True
        comb[g.add(cur, c, -1)] = True
    if not comb[chars].all():
        raise VerificationFailed("greedy dissociated set is not maximal")
    return np.array(kept, dtype=np.int64)


def _budget_radius(nu: float, lam: np.ndarray) -> float:
    return min(2.0, nu / (2 * lam.size)) if lam.size else 2.0


def chang_global(g: Group, A, eps: float, nu: float) -> BohrSetDesc:
    """B(Lambda, nu / (2|Lambda|)) with Lambda a dissociated skeleton of Spec(U_A, eps).

    Post-check: |1 - gamma(t)| <= nu for every gamma in the spectrum and t in B.
    """
    u = uniform_on(g, A)
    sp = spec(u, eps)
    lam = dissociated_greedy(g, sp)
    B = bohr_set(g, lam, _budget_radius(nu, lam))
    if sp.size and not np.isin(B.members, bohr_set(g, sp, min(nu, 2.0), verify=False).members,
                               assume_unique=True).all():
        raise VerificationFailed("Chang containment post-check failed")
    B.meta.update({"spectrum_size": int(sp.size), "dissociated": lam.tolist(), "nu": nu, "eps": eps})
    return B


# -- weak Bogolyubov -----------------------------------------------------------------


def _indicator(g: Group, S) -> np.ndarray:
    f = np.zeros(g.order)
    f[np.asarray(S, dtype=np.int64)] = 1.0
    return f


def _bool_conv(g: Group, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Support of a * b for 0/1 arrays; counts are integers so rounding is exact."""
    fa = np.fft.fftn(a.reshape(g.shape))
    fb = np.fft.fftn(b.reshape(g.shape))
    return (np.fft.ifftn(fa * fb).real.ravel() > 0.5).astype(float)


def iterated_sumset_mask(g: Group, plus: list, minus: list) -> np.ndarray:
    """Boolean mask of S_1 + ... + S_a - T_1 - ... - T_b."""
    require(g.order, "dft_order", "iterated sumset")
    neg = g.neg(np.arange(g.order))
    acc = np.zeros(g.order)
    acc[0] = 1.0
    for S in plus:
        acc = _bool_conv(g, acc, _indicator(g, S))
    for T in minus:
        acc = _bool_conv(g, acc, _indicator(g, T)[neg])
    return acc > 0.5


def _smallest_k(alpha: float, factor: float, eps: float = 0.5) -> int:
    """Smallest k >= 1 with eps^(2k-2) <= alpha * factor."""
    k = 1
    while eps ** (2 * k - 2) > alpha * factor:
        k += 1
    return k


@dataclass(frozen=True, eq=False)
class BogolyubovResult:
    bohr: BohrSetDesc
    k: int
    k_proof: int
    margin: float
    margin_required: float
    contained: bool
    meta: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.bohr, self.k))

    def to_json(self) -> dict:
        out = self.bohr.to_json()
        out.update({"k": self.k, "k_proof": self.k_proof, "margin": self.margin,
                    "margin_required": self.margin_required, "contained": self.contained})
        out.update(self.meta)
        return out


def weak_bogolyubov_global(g: Group, A) -> BogolyubovResult:
    """B inside kA - kA from Chang's lemma at eps = 1/2, nu = sqrt 2.

    k is the smallest value up to the proof's k at which exact containment and
    the pointwise margin p_{kU_A - kU_A} >= 1/(2|G|) both verify.
    """
    require(g.order, "dft_order", "convolution powers")
    A = np.unique(g.as_index(A) if not isinstance(A, np.ndarray) else A)
    alpha = A.size / g.order
    k_proof = _smallest_k(alpha, 0.5)
    B = chang_global(g, A, 0.5, math.sqrt(2.0))
    power = np.abs(dft(uniform_on(g, A)).values) ** 2
    need = 0.5 / g.order - 1e-12
    for k in range(1, k_proof + 1):
        dens = np.fft.ifftn((power ** k).reshape(g.shape)).real.ravel()
        margin = float(dens[B.members].min())
        mask = iterated_sumset_mask(g, [A] * k, [A] * k)
        contained = bool(mask[B.members].all())
        if contained and margin >= need:
            log2a = math.log(2 / alpha)
            meta = {"alpha": alpha, "k_over_log": k / log2a, "rank_over_log": B.rank / log2a}
            return BogolyubovResult(B, k, k_proof, margin, need + 1e-12, contained, meta)
    raise ContainmentFailed(f"no k <= {k_proof} verifies containment with margin")


def weak_bogolyubov_local(B: BohrSetDesc, A, nu: float = 1.0) -> BogolyubovResult:
    """B(S u T, rho') inside A + (k-1)A' - A - (k-1)A' (hence kA - kA).

    A' is the densest translate of A on B' = B(S, rho/(200kd)); T is a
    dissociated skeleton of Spec(U_A', 1/2) with radius budget nu/(2|T|), so
    Re gamma >= 1/2 on the spectrum when nu = 1.
    """
    g = B.group
    require(g.order, "dft_order", "convolution powers")
    A = np.unique(g.as_index(A) if not isinstance(A, np.ndarray) else A)
    if not np.isin(A, B.members).all():
        raise ValueError("A must lie inside the Bohr set")
    d = B.rank
    if d:
        prof = BohrProfile(g, B.chars)
        v = regularity_violation(prof, B.radius)
        if v > 0:
            raise NotRegular(f"dilation estimate violated by {v:.3g}")
    dd = max(d, 1)
    alpha = A.size / B.size
    k_proof = _smallest_k(alpha, 1 / 32)
    fa = dft_dense(g, _indicator(g, A) / A.size)
    need = (1 / 32) / B.size - 1e-12
    neg = g.neg(np.arange(g.order))
    tried = []
    for k in range(1, k_proof + 1):
        sub_r = B.radius / (200 * k * dd)
        Bp = bohr_set(g, B.chars, sub_r)
        # |A n (B' + x)| for all x at once; B' is symmetric
        counts = np.rint(np.fft.ifftn((dft_dense(g, _indicator(g, A)) *
                                       dft_dense(g, _indicator(g, Bp.members))).reshape(g.shape))
                         .real.ravel())
        x0 = int(np.argmax(counts))
        Ap = np.intersect1d(A, g.add(Bp.members, x0))
        sp = spec(uniform_on(g, Ap), 0.5)
        T = dissociated_greedy(g, sp)
        rho2 = min(_budget_radius(nu, T), sub_r)
        chars = np.union1d(B.chars, T)
        Bf = bohr_set(g, chars, rho2)
        fap = dft_dense(g, _indicator(g, Ap) / Ap.size)
        dens = np.fft.ifftn((np.abs(fa) ** 2 * np.abs(fap) ** (2 * k - 2)).reshape(g.shape)).real.ravel()
        margin = float(dens[Bf.members].min())
        mask = iterated_sumset_mask(g, [A] + [Ap] * (k - 1), [A] + [Ap] * (k - 1))
        contained = bool(mask[Bf.members].all())
        tried.append((k, contained, margin))
        if contained and margin >= need:
            meta = {"alpha": alpha, "x0": list(g.element(x0)), "A_prime_size": int(Ap.size),
                    "T": [list(g.element(t)) for t in T.tolist()], "sub_radius": sub_r}
            return BogolyubovResult(Bf, k, k_proof, margin, need + 1e-12, contained, meta)
    raise ContainmentFailed(f"no k <= {k_proof} verifies containment with margin: {tried}")


# -- almost periods and the upper bound ---------------------------------------------


@dataclass(frozen=True, eq=False)
class AlmostPeriodResult:
    S: np.ndarray
    bohr: BohrSetDesc
    gap: float
    hypothesis_ok: bool
    mass: float
    mass_ok: bool
    difference_ok: bool
    log_size_slack: float

    def __iter__(self):
        return iter((self.S, self.bohr))

    @property
    def verified(self) -> bool:
        return self.mass_ok and self.difference_ok and self.log_size_slack >= -1e-9


def translate_divergences(pX: Dist, pY: Dist, chunk: int = 1 << 22) -> np.ndarray:
    """KL(x + Y || X + Y) for every x in supp X."""
    g = pX.group
    xy = convolve(pX, pY)
    out = np.empty(pX.size)
    step = max(1, chunk // max(1, pY.size))
    for lo in range(0, pX.size, step):
        xs = pX.idx[lo:lo + step]
        q = xy.mass_at(g.add(xs[:, None], pY.idx[None, :]))
        # P(X+Y = x+y) >= p_X(x) p_Y(y); restores atoms lost to the mass floor
        q = np.maximum(q, pX.p[lo:lo + step, None] * pY.p[None, :])
        with np.errstate(divide="ignore"):
            out[lo:lo + step] = (pY.p[None, :] * np.log(pY.p[None, :] / q)).sum(axis=1)
    return out


def almost_period_set(pX: Dist, pY: Dist, pZ: Dist, eps: float, *,
                      enforce: bool = True) -> AlmostPeriodResult:
    """S = {x in supp X : KL(x+Y || X+Y) <= 1/8} with B = B(LSpec(Y, eps), 4 eps).

    With ``enforce`` the entropy-gap hypothesis H(X+Y) - H(Y) <= 1/16 is
    required (HypothesisFailed otherwise) and any failed check raises.
    """
    g = pX.group
    gap = entropy(convolve(pX, pY)) - entropy(pY)
    hyp = gap <= 1 / 16 + 1e-12
    if enforce and not hyp:
        raise HypothesisFailed("entropy_gap", f"H(X+Y) - H(Y) = {gap:.6g} > 1/16", gap=gap)
    kls = translate_divergences(pX, pY)
    S = pX.idx[kls <= 1 / 8]
    B = bohr_set(g, lspec(pY, eps), min(4 * eps, 2.0))
    mass = float(pX.mass_at(S).sum())
    diff_ok = True
    if S.size:
        diffs = np.flatnonzero(kernels.sumset_mask(g, S, S, -1))
        diff_ok = bool(np.isin(diffs, B.members, assume_unique=True).all())
    if S.size:
        slack = math.log(S.size) - (entropy(pZ) - 4 * ruzsa_dist(pX, pZ) - 2 * math.log(2))
    else:
        slack = -math.inf
    res = AlmostPeriodResult(S, B, gap, hyp, mass, mass >= 0.5 - 1e-12, diff_ok, slack)
    if enforce and not res.verified:
        raise VerificationFailed(
            f"almost-period checks failed: mass={mass}, S-S in B={diff_ok}, slack={slack}"
        )
    return res


@dataclass(frozen=True, eq=False)
class BohrUpperResult:
    log_bound: float
    ok: bool
    size: int
    hyp_decay: bool
    hyp_entropy: bool
    entropy_gap: float
    bohr: BohrSetDesc | None = None

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound) if self.log_bound < 700 else math.inf

    def __iter__(self):
        return iter((self.bound, self.ok))


def bohr_upper_check(pX: Dist, pUA: Dist, d: float, eps: float, m: int, ell: int, *,
                     strict: bool = True, ellX: Dist | None = None) -> BohrUpperResult:
    """Compare |B(LSpec(ell X, eps), 1/2)| with 8|A| exp(d log(ell m) + 30 d log d)."""
    if not d > 1:
        raise ValueError("d must exceed 1")
    budget = d * math.log(ell * m) + 30 * d * math.log(d)
    hyp1 = m * math.log1p(-eps * eps / 2) <= math.log(0.5) - budget
    gap = entropy(convolve(iterate_sum(pX, m * ell), pUA)) - entropy(pUA)
    hyp2 = gap <= budget + 1e-12
    if strict and not (hyp1 and hyp2):
        raise HypothesisFailed("bohr_upper", "hypotheses do not hold",
                               decay=hyp1, entropy=hyp2, entropy_gap=gap, budget=budget)
    ellX = iterate_sum(pX, ell) if ellX is None else ellX
    B = bohr_set(pX.group, lspec(ellX, eps), 0.5)
    log_bound = math.log(8 * pUA.size) + budget
    return BohrUpperResult(log_bound, math.log(B.size) <= log_bound, B.size, hyp1, hyp2, gap, B)


# -- progression certificate ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProgressionCertificate:
    bohr: BohrSetDesc
    r: int
    size: int
    size_dilated: int
    ratio: float
    radius_ok: bool
    valid: bool

    def to_json(self) -> dict:
        return {"bohr": self.bohr.to_json(), "r": self.r, "size": self.size,
                "size_dilated": self.size_dilated, "ratio": self.ratio,
                "radius_ok": self.radius_ok, "valid": self.valid}


def progression_certificate(desc: BohrSetDesc, r: int) -> ProgressionCertificate:
    """Check |B((3r+1) delta)| <= 2^r |B(delta)| and delta < 1/(4(3r+1))."""
    if r < 0:
        raise ValueError("r must be >= 0")
    big = bohr_count(desc.group, desc.chars, (3 * r + 1) * desc.radius)
    radius_ok = Fraction(desc.radius) * 4 * (3 * r + 1) < 1
    ratio_ok = big <= 2 ** r * desc.size
    return ProgressionCertificate(desc, r, desc.size, big, big / desc.size, bool(radius_ok),
                                  bool(ratio_ok and radius_ok))
