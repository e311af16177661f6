"""Monte-Carlo evaluation of the weighted energy functionals on gauge balls.

The weight is the fundamental-solution profile Gamma = C * N^(2-Q) for the
closed-form homogeneous norms of the Euclidean and Heisenberg presets.  Two
integration routes are kept deliberately independent:

* ``mc_ball_oracle``: plain rejection sampling over the whole ball, weight
  evaluated pointwise.  Brute force, singular integrand, used as an oracle.
* ``shell_integrate``: samples only the annulus {1/2 < N <= 1}, where the
  integrand is bounded, and reduces the full-ball integral of a
  weighted-homogeneous integrand by the exact geometric series
  sum_k 2^(-k(d+2)) = 1/(1 - 2^(-(d+2))).

Non-homogeneous energies (the Phi and J curves) are handled by dyadic
stratification: shells are sampled once in unit scale and reused across the
whole radius grid, with the leftover core ball controlled by an analytic
tail bound that is folded into the reported uncertainty.

Sampling is counter-based (Philox) and chunked per worker; chunk results are
reduced in a fixed order with compensated summation, so output is
bit-reproducible for a fixed (seed, worker count).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .counterexample import CounterexampleResult
from .errors import (
    BadDecomposition,
    DimensionMismatch,
    NegativeDegree,
    NotHomogeneous,
    RankDeficient,
    UnsupportedGroup,
    ZeroAcceptance,
)
from .group import CarnotGroup, _heisenberg_matrix
from .hcalc import horizontal_gradient
from .ratpoly import Polynomial, StratifiedWeights

logger = logging.getLogger(__name__)

_BATCH = 1 << 18  # max samples materialized at once per chunk

# stream tags keep independent sampling tasks on disjoint Philox streams
_TAG_ORACLE, _TAG_SHELL, _TAG_CURVE, _TAG_PROBE, _TAG_TAIL = range(5)


@dataclass(frozen=True)
class GaugeSpec:
    """Closed-form gauge data: N = kernel^(1/kernel_degree), Gamma = C*N^(2-Q).

    ``box`` holds per-coordinate half-widths of a symmetric box containing
    the unit gauge ball; the box for radius r scales anisotropically.
    """

    group: CarnotGroup
    q_hom: int
    kernel: Polynomial
    kernel_degree: int
    box: tuple
    name: str
    gamma_constant: float = 1.0

    @property
    def box_volume(self) -> float:
        return float(np.prod([2.0 * h for h in self.box]))

    @property
    def gamma_exponent(self) -> float:
        return (2.0 - self.q_hom) / self.kernel_degree

    def kernel_values(self, pts: np.ndarray) -> np.ndarray:
        return _TermData(self.kernel, self.group.weights).values(pts)

    def norm_values(self, pts: np.ndarray) -> np.ndarray:
        return self.kernel_values(pts) ** (1.0 / self.kernel_degree)

    def gamma_values(self, pts: np.ndarray) -> np.ndarray:
        w = self.kernel_values(pts)
        out = np.zeros(len(pts))
        positive = w > 0
        out[positive] = self.gamma_constant * w[positive] ** self.gamma_exponent
        return out


def gauge_for(g: CarnotGroup, gamma_constant: float = 1.0) -> GaugeSpec:
    """Gauge data for the supported presets.

    Euclidean (n >= 3): N = |x|.  Heisenberg, canonical presentation:
    N = (|x|^4 + 16 y^2)^(1/4).  Everything else has no closed-form
    fundamental solution here and raises UnsupportedGroup.
    """
    w = g.weights
    n = g.n
    if w.step == 1 and all(not f.coeffs for f in g.fields):
        if n < 3:
            raise UnsupportedGroup("euclidean gauge needs dimension >= 3")
        kernel = Polynomial.zero(n)
        for j in range(1, n + 1):
            kernel = kernel + Polynomial.variable(n, j) ** 2
        return GaugeSpec(g, w.homogeneous_dimension, kernel, 2, (1.0,) * n, g.name,
                         gamma_constant)
    if (
        w.step == 2
        and w.strata[1] == 1
        and w.m1 % 2 == 0
        and g.step2_skew is not None
        and [list(r) for r in g.step2_skew[0]]
        == [list(r) for r in _heisenberg_matrix(w.m1 // 2)]
    ):
        sq = Polynomial.zero(n)
        for j in range(1, w.m1 + 1):
            sq = sq + Polynomial.variable(n, j) ** 2
        kernel = sq * sq + Fraction(16) * Polynomial.variable(n, n) ** 2
        box = (1.0,) * w.m1 + (0.25,)
        return GaugeSpec(g, w.homogeneous_dimension, kernel, 4, box, g.name,
                         gamma_constant)
    if g.name.endswith(":polarized"):
        raise UnsupportedGroup(
            "no gauge in the polarized presentation; transport through "
            "the shipped polarized-to-canonical coordinate map first"
        )
    raise UnsupportedGroup(
        f"no closed-form fundamental solution available for group {g.name!r}"
    )


# -- fast exact-to-float term evaluation ------------------------------------


class _TermData:
    """Float views of a polynomial's terms plus their weighted degrees.

    Term values at anisotropically scaled points factor as s^degree times the
    unit-point values, so one monomial matrix serves a whole radius grid.
    """

    __slots__ = ("coeffs", "gdegs", "betas", "n")

    def __init__(self, poly: Polynomial, weights: StratifiedWeights):
        items = list(poly.terms())
        self.n = poly.n
        self.betas = [b for b, _ in items]
        self.coeffs = np.array([float(c) for _, c in items], dtype=float)
        self.gdegs = np.array([weights.g_deg(b) for b, _ in items], dtype=float)

    def monomials(self, pts: np.ndarray) -> np.ndarray:
        out = np.ones((len(self.betas), len(pts)))
        for t, beta in enumerate(self.betas):
            row = out[t]
            for j, e in enumerate(beta):
                if e == 1:
                    row *= pts[:, j]
                elif e > 1:
                    row *= pts[:, j] ** e
        return out

    def values(self, pts: np.ndarray) -> np.ndarray:
        if not self.betas:
            return np.zeros(len(pts))
        return self.coeffs @ self.monomials(pts)

    def values_at_scale(self, monomials: np.ndarray, s: float) -> np.ndarray:
        if not self.betas:
            return np.zeros(monomials.shape[1])
        return (self.coeffs * s**self.gdegs) @ monomials

    def sup_bound(self, box: Sequence[float], s: float) -> float:
        """Upper bound for |value| over the scaled box (coefficient L1 norm)."""
        total = 0.0
        for c, g, beta in zip(self.coeffs, self.gdegs, self.betas):
            prod = abs(c) * s**g
            for hw, e in zip(box, beta):
                prod *= hw**e
            total += prod
        return total


def _generator(seed: int, key: tuple) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_sizes(total: int, workers: int) -> list:
    workers = max(1, int(workers))
    base, extra = divmod(int(total), workers)
    return [base + (1 if i < extra else 0) for i in range(workers)]


def _map_ordered(fn: Callable, count: int, workers: int) -> list:
    if workers <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _sample_box(gen: np.random.Generator, m: int, widths: np.ndarray) -> np.ndarray:
    return (2.0 * gen.random((m, len(widths))) - 1.0) * widths


@dataclass
class _RunningStats:
    """Componentwise sums collected chunk by chunk, reduced with math.fsum."""

    shape: tuple
    s1: list = field(default_factory=list)
    s2: list = field(default_factory=list)
    count: int = 0
    accepted: int = 0

    def mean_stderr(self):
        n = self.count
        if n == 0:
            raise ZeroAcceptance("no samples drawn")
        s1 = np.array([math.fsum(p[idx] for p in self.s1) for idx in np.ndindex(self.shape)])
        s2 = np.array([math.fsum(p[idx] for p in self.s2) for idx in np.ndindex(self.shape)])
        s1 = s1.reshape(self.shape) if self.shape else float(s1[0])
        s2 = s2.reshape(self.shape) if self.shape else float(s2[0])
        mean = s1 / n
        second = s2 / n
        var = np.maximum(second - mean**2, 0.0) * (n / max(n - 1, 1))
        return mean, np.sqrt(var / n)


def _accumulate(
    stats: _RunningStats,
    spec: GaugeSpec,
    n_samples: int,
    seed: int,
    key_prefix: tuple,
    widths: np.ndarray,
    chunk_eval: Callable,
    workers: int,
):
    """Draw n_samples in worker chunks and feed value arrays into ``stats``."""
    sizes = _chunk_sizes(n_samples, workers)

    def run(ci: int):
        gen = _generator(seed, key_prefix + (ci,))
        out_s1, out_s2, n_acc = [], [], 0
        remaining = sizes[ci]
        while remaining > 0:
            m = min(remaining, _BATCH)
            remaining -= m
            pts = _sample_box(gen, m, widths)
            vals, acc = chunk_eval(pts)
            out_s1.append(np.sum(vals, axis=-1))
            out_s2.append(np.sum(vals * vals, axis=-1))
            n_acc += acc
        return out_s1, out_s2, sizes[ci], n_acc

    for out_s1, out_s2, drawn, acc in _map_ordered(run, len(sizes), workers):
        for a, b in zip(out_s1, out_s2):
            stats.s1.append(a)
            stats.s2.append(b)
        stats.count += drawn
        stats.accepted += acc


# -- integrators -------------------------------------------------------------


def _as_value_fn(spec: GaugeSpec, integrand) -> Callable:
    if isinstance(integrand, Polynomial):
        data = _TermData(integrand, spec.group.weights)
        return data.values
    if callable(integrand):
        return integrand
    raise TypeError("integrand must be a Polynomial or a callable on point arrays")


def mc_ball_oracle(
    spec: GaugeSpec,
    integrand,
    r: float,
    samples: int,
    seed: int,
    workers: int = 1,
):
    """Plain rejection-sampling estimate of the weighted ball integral.

    Uniform draws from the dilated bounding box, gauge test N <= r, average of
    integrand * Gamma * box volume.  Deterministic per (seed, workers).
    """
    if r <= 0:
        raise DimensionMismatch("radius must be positive")
    w = spec.group.weights
    value_fn = _as_value_fn(spec, integrand)
    widths = np.array(spec.box) * np.array([float(r) ** d for d in w.weights])
    volume = float(np.prod(2.0 * widths))
    threshold = float(r) ** spec.kernel_degree
    stats = _RunningStats(shape=())

    def chunk_eval(pts):
        kern = spec.kernel_values(pts)
        inside = (kern <= threshold) & (kern > 0)
        gamma = np.zeros(len(pts))
        gamma[inside] = spec.gamma_constant * kern[inside] ** spec.gamma_exponent
        vals = volume * value_fn(pts) * gamma
        return vals, int(inside.sum())

    _accumulate(stats, spec, samples, seed, (_TAG_ORACLE,), widths, chunk_eval, workers)
    if stats.accepted == 0:
        raise ZeroAcceptance("no sample landed inside the gauge ball")
    logger.debug("oracle acceptance %.3f", stats.accepted / stats.count)
    mean, err = stats.mean_stderr()
    return float(mean), float(err)


def _annulus_stats(
    spec: GaugeSpec,
    n_samples: int,
    seed: int,
    key_prefix: tuple,
    values_on_annulus: Callable,
    shape: tuple,
    workers: int,
) -> _RunningStats:
    """Sample the unit box, mask to the annulus {1/2 < N <= 1}, evaluate."""
    widths = np.array(spec.box, dtype=float)
    volume = spec.box_volume
    lo = 0.5**spec.kernel_degree
    stats = _RunningStats(shape=shape)

    def chunk_eval(pts):
        kern = spec.kernel_values(pts)
        mask = (kern > lo) & (kern <= 1.0)
        gamma = np.zeros(len(pts))
        gamma[mask] = spec.gamma_constant * kern[mask] ** spec.gamma_exponent
        vals = values_on_annulus(pts, volume * gamma)
        return vals, int(mask.sum())

    _accumulate(stats, spec, n_samples, seed, key_prefix, widths, chunk_eval, workers)
    return stats


def shell_integrate(
    spec: GaugeSpec,
    integrand: Polynomial,
    degree: int,
    samples: int,
    seed: int,
    workers: int = 1,
):
    """Weighted unit-ball integral of a weighted-homogeneous polynomial.

    Monte Carlo on the bounded annulus only; the dyadic shells inside sum to
    the exact factor 1/(1 - 2^(-(degree+2))).
    """
    if degree < 0:
        raise NegativeDegree("shell reduction needs degree >= 0")
    w = spec.group.weights
    if not isinstance(integrand, Polynomial):
        raise TypeError("shell_integrate needs an exact Polynomial integrand")
    if not integrand.is_g_homogeneous(w, degree):
        raise NotHomogeneous(
            f"integrand is not weighted-homogeneous of degree {degree}"
        )
    if integrand.is_zero():
        return 0.0, 0.0
    data = _TermData(integrand, w)

    def values_on_annulus(pts, weighted_gamma):
        return data.values(pts) * weighted_gamma

    stats = _annulus_stats(
        spec, samples, seed, (_TAG_SHELL,), values_on_annulus, (), workers
    )
    logger.debug("shell acceptance %.3f", stats.accepted / max(stats.count, 1))
    mean, err = stats.mean_stderr()
    factor = 1.0 / (1.0 - 2.0 ** (-(degree + 2)))
    return float(mean) * factor, float(err) * factor


# -- estimates and curve containers ------------------------------------------


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float


@dataclass(frozen=True)
class QuarticCoeffs:
    a0: Estimate
    a2: Estimate
    a4: Estimate

    @property
    def r_star(self) -> Estimate:
        a2, a4 = self.a2.value, self.a4.value
        if a2 <= 0 or a4 <= 0:
            return Estimate(float("nan"), float("nan"))
        r = math.sqrt(a2 / a4)
        rel = 0.5 * math.hypot(self.a2.stderr / a2, self.a4.stderr / a4)
        return Estimate(r, r * rel)

    def phi_at(self, r: float) -> Estimate:
        value = self.a0.value - 2.0 * self.a2.value * r**2 + self.a4.value * r**4
        err = math.sqrt(
            self.a0.stderr**2
            + (2.0 * r**2 * self.a2.stderr) ** 2
            + (r**4 * self.a4.stderr) ** 2
        )
        return Estimate(value, err)


@dataclass(frozen=True)
class JayPoint:
    jay: Estimate
    i_plus: Estimate
    i_minus: Estimate


@dataclass(frozen=True)
class ACFEvaluation:
    """Radius grid plus whichever curves/coefficients a run produced."""

    r_grid: tuple
    phi: Optional[tuple] = None
    phi_quartic: Optional[tuple] = None
    coeffs: Optional[QuarticCoeffs] = None
    jay: Optional[tuple] = None
    metadata: dict = field(default_factory=dict)


def decompose_u(u: Polynomial, w: StratifiedWeights):
    """Split u = P1 - P3 into weighted-homogeneous parts of degree 1 and 3."""
    if u.is_zero():
        raise BadDecomposition("the zero function has no degree-1/3 decomposition")
    parts = u.g_components(w)
    if not set(parts) <= {1, 3}:
        raise BadDecomposition(
            f"u has weighted-homogeneous parts of degrees {sorted(parts)}, expected subset of {{1, 3}}"
        )
    p1 = parts.get(1, Polynomial.zero(u.n))
    p3 = -parts.get(3, Polynomial.zero(u.n))
    return p1, p3


def quartic_coeffs(
    spec: GaugeSpec,
    p1: Polynomial,
    p3: Polynomial,
    samples: int,
    seed: int,
    workers: int = 1,
) -> QuarticCoeffs:
    """Unit-ball coefficients a0, a2, a4 of the quartic profile of Phi.

    a0 = int |grad P1|^2 Gamma, a2 = int <grad P1, grad P3> Gamma,
    a4 = int |grad P3|^2 Gamma, each over the unit gauge ball via the shell
    reduction on the exact integrand polynomials (degrees 0, 2, 4).
    """
    g = spec.group
    grad1 = horizontal_gradient(g, p1)
    grad3 = horizontal_gradient(g, p3)
    zero = Polynomial.zero(g.n)
    sq1 = sum((c * c for c in grad1), zero)
    cross = sum((a * b for a, b in zip(grad1, grad3)), zero)
    sq3 = sum((c * c for c in grad3), zero)
    out = []
    for idx, (integrand, degree) in enumerate(((sq1, 0), (cross, 2), (sq3, 4))):
        est, err = shell_integrate(
            spec, integrand, degree, samples, _spawn_seed(seed, idx), workers
        )
        out.append(Estimate(est, err))
    return QuarticCoeffs(*out)


def quartic_coeffs_result(
    spec: GaugeSpec, result: CounterexampleResult, samples: int, seed: int, workers: int = 1
) -> QuarticCoeffs:
    return quartic_coeffs(spec, result.p1, result.p3, samples, seed, workers)


def _spawn_seed(seed: int, idx: int) -> int:
    # distinct deterministic substreams for sibling estimates
    return (int(seed) << 8) + idx


def _dyadic_curve(
    spec: GaugeSpec,
    u: Polynomial,
    r_grid: Sequence[float],
    samples: int,
    seed: int,
    shells: int,
    workers: int,
    sign: int = 0,
    stream: int = 0,
):
    """Dyadic-stratified energy curve r -> r^-2 int_{B_r} |grad u|^2 Gamma.

    ``sign`` restricts the integral to {u > 0} (+1) or {u < 0} (-1); 0 keeps
    everything.  ``stream`` separates the Philox streams of independent runs.
    ``samples`` counts draws per shell; unit-scale shell samples are reused
    across the whole radius grid, which correlates neighboring radii and
    keeps curve shapes stable.  Returns (values, stderr) arrays over the grid.
    """
    g = spec.group
    w = g.weights
    r_grid = [float(r) for r in r_grid]
    if any(r <= 0 for r in r_grid):
        raise DimensionMismatch("radius grid must be positive")
    grad_data = [_TermData(c, w) for c in horizontal_gradient(g, u)]
    u_data = _TermData(u, w)
    n_r = len(r_grid)
    totals = np.zeros(n_r)
    variances = np.zeros(n_r)

    for k in range(shells):
        scale_k = 2.0**-k

        def values_on_annulus(pts, weighted_gamma, _scale=scale_k):
            monos = [d.monomials(pts) for d in grad_data]
            out = np.empty((n_r, len(pts)))
            mono_u = u_data.monomials(pts) if sign else None
            for ir, r in enumerate(r_grid):
                s = r * _scale
                energy = np.zeros(len(pts))
                for d, mono in zip(grad_data, monos):
                    comp = d.values_at_scale(mono, s)
                    energy += comp * comp
                base = energy * weighted_gamma
                if sign:
                    uv = u_data.values_at_scale(mono_u, s)
                    base = np.where(sign * uv > 0, base, 0.0)
                out[ir] = base
            return out

        stats = _annulus_stats(
            spec, samples, seed, (_TAG_CURVE, stream, k), values_on_annulus, (n_r,), workers
        )
        mean, err = stats.mean_stderr()
        totals += 4.0**-k * mean
        variances += 16.0**-k * err**2

    # analytic tail for the unsampled core ball of radius r * 2^-shells
    gamma_mass, gamma_mass_err = shell_integrate(
        spec,
        Polynomial.constant(g.n, 1),
        0,
        min(samples, 100_000),
        _spawn_seed(seed, 7 + stream),
        workers,
    )
    gamma_mass = abs(gamma_mass) + 3.0 * gamma_mass_err
    tails = np.array(
        [
            sum(d.sup_bound(spec.box, r * 2.0**-shells) ** 2 for d in grad_data)
            * 4.0**-shells
            * gamma_mass
            for r in r_grid
        ]
    )
    return totals, np.sqrt(variances) + tails


def phi_curve(
    spec: GaugeSpec,
    u: Polynomial,
    r_grid: Sequence[float],
    samples: int,
    seed: int,
    method: str = "direct",
    shells: int = 20,
    workers: int = 1,
) -> ACFEvaluation:
    """Phi(r) = r^-2 * int_{B_r} |grad u|^2 Gamma.

    direct: dyadic-stratified MC of the full energy (no homogeneity assumed
    beyond the gauge scaling).  quartic: a0 - 2 a2 r^2 + a4 r^4 from the
    unit-ball coefficients of the degree-1/3 decomposition of u.
    """
    metadata = {
        "group": spec.name,
        "seed": int(seed),
        "samples": int(samples),
        "shells": int(shells),
        "workers": int(workers),
        "method": method,
    }
    r_grid = tuple(float(r) for r in r_grid)
    if method == "direct":
        totals, stderr = _dyadic_curve(spec, u, r_grid, samples, seed, shells, workers)
        phi = tuple(Estimate(float(v), float(e)) for v, e in zip(totals, stderr))
        return ACFEvaluation(r_grid, phi=phi, metadata=metadata)
    if method == "quartic":
        p1, p3 = decompose_u(u, spec.group.weights)
        coeffs = quartic_coeffs(spec, p1, p3, samples, seed, workers)
        quartic = tuple(coeffs.phi_at(r) for r in r_grid)
        return ACFEvaluation(r_grid, phi_quartic=quartic, coeffs=coeffs, metadata=metadata)
    raise ValueError(f"unknown phi method {method!r}")


def j_curve(
    spec: GaugeSpec,
    u: Polynomial,
    r_grid: Sequence[float],
    samples: int,
    seed: int,
    shells: int = 20,
    workers: int = 1,
) -> ACFEvaluation:
    """Two-phase product J(r) = I+(r) * I-(r) with first-order error propagation.

    The two one-phase energies run on independent sampling streams so their
    reported uncertainties combine in quadrature without correlation terms.
    """
    r_grid = tuple(float(r) for r in r_grid)
    plus, plus_err = _dyadic_curve(
        spec, u, r_grid, samples, seed, shells, workers, sign=+1, stream=1
    )
    minus, minus_err = _dyadic_curve(
        spec, u, r_grid, samples, seed, shells, workers, sign=-1, stream=2
    )
    rows = []
    for ir in range(len(r_grid)):
        ip, im = plus[ir], minus[ir]
        sp, sm = plus_err[ir], minus_err[ir]
        jay = ip * im
        sj = math.hypot(im * sp, ip * sm)
        rows.append(
            JayPoint(Estimate(jay, sj), Estimate(ip, sp), Estimate(im, sm))
        )
    metadata = {
        "group": spec.name,
        "seed": int(seed),
        "samples": int(samples),
        "shells": int(shells),
        "workers": int(workers),
        "method": "jay",
    }
    return ACFEvaluation(r_grid, jay=tuple(rows), metadata=metadata)


def fit_quartic(r_grid: Sequence[float], phi_values: Sequence[float]):
    """Least squares in the basis (1, -2 r^2, r^4); returns coefficients + residual."""
    r = np.asarray(r_grid, dtype=float)
    y = np.asarray(phi_values, dtype=float)
    if r.size != y.size:
        raise DimensionMismatch("grid and values differ in length")
    if np.unique(r).size < 3:
        raise RankDeficient("need at least 3 distinct radii")
    design = np.column_stack([np.ones_like(r), -2.0 * r**2, r**4])
    coef, residuals, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise RankDeficient("design matrix is rank deficient")
    residual = float(np.sqrt(residuals[0])) if residuals.size else float(
        np.linalg.norm(design @ coef - y)
    )
    return float(coef[0]), float(coef[1]), float(coef[2]), residual


def gamma_harmonicity_probe(
    spec: GaugeSpec,
    points: int,
    h: float,
    seed: int,
    exponent: Optional[float] = None,
) -> float:
    """Max |finite-difference sub-Laplacian of Gamma| over annulus probe points.

    Second central differences with step h along the coordinate expressions of
    the horizontal fields; for the shipped presets the field coefficients are
    constant along their own flow direction, so this is a consistent O(h^2)
    scheme.  Passing ``exponent`` overrides 2 - Q (negative-control hook).
    """
    g = spec.group
    w = g.weights
    expo = (exponent if exponent is not None else (2.0 - spec.q_hom)) / spec.kernel_degree

    def gamma(pts: np.ndarray) -> np.ndarray:
        kern = spec.kernel_values(pts)
        return spec.gamma_constant * kern**expo

    gen = _generator(seed, (_TAG_PROBE,))
    widths = np.array(spec.box, dtype=float)
    lo = 0.5**spec.kernel_degree
    collected = []
    attempts = 0
    while sum(len(c) for c in collected) < points:
        attempts += 1
        if attempts > 1000:
            raise ZeroAcceptance("annulus rejection sampling failed to accept points")
        pts = _sample_box(gen, max(points * 4, 1024), widths)
        kern = spec.kernel_values(pts)
        keep = (kern > lo) & (kern < 1.0)
        collected.append(pts[keep])
    pts = np.concatenate(collected)[:points]

    coeff_data = [
        [
            _TermData(g.field(j).coefficient(k, g.n), w)
            for k in range(1, g.n + 1)
        ]
        for j in range(1, g.m1 + 1)
    ]
    fd = np.zeros(len(pts))
    center = gamma(pts)
    for j in range(g.m1):
        direction = np.column_stack([d.values(pts) for d in coeff_data[j]])
        fd += (gamma(pts + h * direction) - 2.0 * center + gamma(pts - h * direction)) / h**2
    return float(np.max(np.abs(fd)))


# -- CSV output ----------------------------------------------------------------


def _fmt(x: float, precision: int) -> str:
    return format(float(x), f".{precision}g")


def write_phi_csv(
    path: str,
    evaluation: ACFEvaluation,
    quartic: Optional[Sequence[Estimate]] = None,
    precision: int = 9,
):
    """Columns: r,phi,stderr,phi_quartic,quartic_stderr."""
    quartic = quartic if quartic is not None else evaluation.phi_quartic
    if evaluation.phi is None or quartic is None:
        raise DimensionMismatch("phi CSV needs both direct and quartic curves")
    lines = ["r,phi,stderr,phi_quartic,quartic_stderr"]
    for r, d, qv in zip(evaluation.r_grid, evaluation.phi, quartic):
        lines.append(
            ",".join(
                _fmt(v, precision)
                for v in (r, d.value, d.stderr, qv.value, qv.stderr)
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def write_coeffs_csv(path: str, coeffs: QuarticCoeffs, precision: int = 9):
    """Columns: name,estimate,stderr with rows a0, a2, a4, r_star."""
    rows = [
        ("a0", coeffs.a0),
        ("a2", coeffs.a2),
        ("a4", coeffs.a4),
        ("r_star", coeffs.r_star),
    ]
    lines = ["name,estimate,stderr"]
    for name, est in rows:
        lines.append(f"{name},{_fmt(est.value, precision)},{_fmt(est.stderr, precision)}")
    _write_text(path, "\n".join(lines) + "\n")


def write_jay_csv(path: str, evaluation: ACFEvaluation, precision: int = 9):
    """Columns: r,J,J_stderr,I_plus,I_plus_stderr,I_minus,I_minus_stderr."""
    if evaluation.jay is None:
        raise DimensionMismatch("jay CSV needs a two-phase evaluation")
    lines = ["r,J,J_stderr,I_plus,I_plus_stderr,I_minus,I_minus_stderr"]
    for r, pt in zip(evaluation.r_grid, evaluation.jay):
        lines.append(
            ",".join(
                _fmt(v, precision)
                for v in (
                    r,
                    pt.jay.value,
                    pt.jay.stderr,
                    pt.i_plus.value,
                    pt.i_plus.stderr,
                    pt.i_minus.value,
                    pt.i_minus.stderr,
                )
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path: str, content: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)
