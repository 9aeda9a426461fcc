"""Modulus-of-continuity measure estimation and a sampled Darbo iteration.

For a piecewise-linear grid function the modulus mu(f, delta) =
sup{|f(z1) - f(z2)| : |z1 - z2| <= delta} is computed exactly from node
geometry: between consecutive "events" (a window endpoint crossing a node)
the window max is convex in the window position and the window min concave,
so their difference is maximized at an event, i.e. with the window start in
{nodes} union {nodes - delta}. On a uniform grid whose spacing divides
delta, every event window is node-aligned and a vectorized sliding-window
max/min suffices.

The ensemble-level measure extrapolates mu(ensemble, delta) to delta -> 0
by a linear fit on the three smallest ladder values, clamped at zero; half
of that limit is the ball-measure estimate. The Darbo iteration drives an
ensemble through the operator, augments with random convex combinations of
the images (a sampled, hence conservative, convex hull), and records the
measure trace.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .equations import EquationSpec, apply_operator_batch
from .errors import ConfigError, DomainError
from .fractional import GridFunction

_ALIGN_TOL = 1e-9
_AXIOM_TOL = 1e-12


def thread_count() -> int:
    """Worker count from HILFER_THREADS; 1 when unset."""
    raw = os.environ.get("HILFER_THREADS")
    if raw is None or raw.strip() == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"HILFER_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"HILFER_THREADS must be >= 1, got {n}")
    return n


@dataclass(frozen=True)
class FunctionEnsemble:
    """A finite family of grid functions on one shared node set."""

    members: tuple[GridFunction, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise DomainError("ensemble must be nonempty")
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        nodes = members[0].nodes
        for m in members[1:]:
            if not np.array_equal(m.nodes, nodes):
                raise DomainError("all members must share one node set")

    @classmethod
    def from_matrix(cls, nodes: np.ndarray, values: np.ndarray) -> "FunctionEnsemble":
        return cls(tuple(GridFunction(nodes=nodes, values=row) for row in values))

    @property
    def nodes(self) -> np.ndarray:
        return self.members[0].nodes

    def values_matrix(self) -> np.ndarray:
        return np.vstack([m.values for m in self.members])


def _aligned_steps(nodes: np.ndarray, delta: float) -> int | None:
    """Window width in grid steps when the grid is uniform and divides delta."""
    diffs = np.diff(nodes)
    h = diffs[0]
    if not np.allclose(diffs, h, rtol=1e-12, atol=0.0):
        return None
    m = delta / h
    mi = int(round(m))
    if mi >= 1 and abs(m - mi) <= _ALIGN_TOL * max(1.0, mi):
        return mi
    return None


def _check_delta(nodes: np.ndarray, delta: float) -> None:
    if not delta > 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    span = nodes[-1] - nodes[0]
    if delta > span * (1.0 + 1e-12):
        raise DomainError(f"delta must not exceed the domain span {span}, got {delta}")


def _window_moduli_aligned(values: np.ndarray, m: int) -> float:
    """Max over node-aligned windows of m+1 consecutive values, batched rows."""
    v = np.atleast_2d(values)
    win = np.lib.stride_tricks.sliding_window_view(v, m + 1, axis=1)
    return float(np.max(win.max(axis=2) - win.min(axis=2)))


def _interp_clipped(nodes: np.ndarray, values: np.ndarray, z: float) -> float:
    """Linear interpolation with the result clipped into its segment's range.

    Clipping removes sub-ulp overshoot so window extrema never leave the
    convex hull of the bracketing node values.
    """
    i = int(np.searchsorted(nodes, z, side="right")) - 1
    i = min(max(i, 0), nodes.size - 2)
    x0, x1 = nodes[i], nodes[i + 1]
    v0, v1 = values[i], values[i + 1]
    t = (z - x0) / (x1 - x0)
    t = min(max(t, 0.0), 1.0)
    val = v0 + t * (v1 - v0)
    lo, hi = (v0, v1) if v0 <= v1 else (v1, v0)
    return min(max(val, lo), hi)


def modulus_of_continuity(f: GridFunction, delta: float) -> float:
    """Exact modulus of continuity of a piecewise-linear grid function."""
    _check_delta(f.nodes, delta)
    m = _aligned_steps(f.nodes, delta)
    if m is not None:
        return _window_moduli_aligned(f.values, min(m, f.nodes.size - 1))
    return _modulus_general(f.nodes, f.values, delta)


def _modulus_general(nodes: np.ndarray, values: np.ndarray, delta: float) -> float:
    lo_z = nodes[0]
    hi_z = max(nodes[-1] - delta, lo_z)
    starts = np.unique(np.clip(np.concatenate([nodes, nodes - delta]), lo_z, hi_z))
    best = 0.0
    for z in starts:
        z2 = min(z + delta, nodes[-1])
        a = _interp_clipped(nodes, values, z)
        b = _interp_clipped(nodes, values, z2)
        wmax = a if a >= b else b
        wmin = a if a <= b else b
        lo = int(np.searchsorted(nodes, z, side="right"))
        hi = int(np.searchsorted(nodes, z2, side="left"))
        if hi > lo:
            inner = values[lo:hi]
            wmax = max(wmax, float(inner.max()))
            wmin = min(wmin, float(inner.min()))
        best = max(best, wmax - wmin)
    return best


def ensemble_modulus(e: FunctionEnsemble, delta: float) -> float:
    """Largest member modulus at the given delta."""
    _check_delta(e.nodes, delta)
    m = _aligned_steps(e.nodes, delta)
    if m is not None:
        return _window_moduli_aligned(e.values_matrix(), min(m, e.nodes.size - 1))
    return max(_modulus_general(e.nodes, mem.values, delta) for mem in e.members)


@dataclass(frozen=True)
class MncEstimate:
    """Modulus ladder with its delta -> 0 extrapolation."""

    deltas: np.ndarray
    moduli: np.ndarray
    mu0: float
    hausdorff: float

    def __post_init__(self) -> None:
        d = np.asarray(self.deltas, dtype=float)
        m = np.asarray(self.moduli, dtype=float)
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "moduli", m)
        if d.shape != m.shape or d.ndim != 1:
            raise DomainError("deltas and moduli must be matching vectors")
        if not np.all(np.diff(d) < 0.0):
            raise DomainError("deltas must be strictly decreasing")
        # shrinking delta cannot increase the modulus (ulp slack for the
        # interpolated general path)
        if not np.all(np.diff(m) <= 1e-12):
            raise DomainError("moduli must be nonincreasing along the ladder")
        if not self.mu0 >= 0.0:
            raise DomainError("mu0 must be >= 0")
        if self.hausdorff != 0.5 * self.mu0:
            raise DomainError("hausdorff must equal mu0 / 2")


def mnc_estimate(e: FunctionEnsemble, deltas: Sequence[float]) -> MncEstimate:
    """Evaluate the modulus ladder and extrapolate to delta -> 0.

    The limit is the intercept of a linear fit through the three smallest
    ladder points, clamped at zero; half of it estimates the ball measure.
    """
    d = np.asarray(deltas, dtype=float)
    if d.ndim != 1 or d.size < 3:
        raise DomainError("deltas needs at least 3 entries")
    if not np.all(np.diff(d) < 0.0):
        raise DomainError("deltas must be strictly decreasing")
    moduli = np.array([ensemble_modulus(e, float(x)) for x in d])
    intercept = float(np.polyfit(d[-3:], moduli[-3:], 1)[1])
    mu0 = max(0.0, intercept)
    return MncEstimate(deltas=d, moduli=moduli, mu0=mu0, hausdorff=0.5 * mu0)


@dataclass(frozen=True)
class AxiomReport:
    """Estimator-level checks of the monotonicity and convexity axioms.

    Slacks are the largest per-rung violation (<= 0 means the inequality
    held on every rung). Monotonicity is only asserted when e1 really is a
    sub-list of e2.
    """

    monotonicity_applicable: bool
    monotonicity_pass: bool
    monotonicity_slack: float
    convexity_pass: bool
    convexity_slack: float


def _is_sublist(e1: FunctionEnsemble, e2: FunctionEnsemble) -> bool:
    return all(
        any(np.array_equal(m1.values, m2.values) for m2 in e2.members) for m1 in e1.members
    )


def mnc_axiom_checks(
    e1: FunctionEnsemble,
    e2: FunctionEnsemble,
    L: float,
    deltas: Sequence[float],
) -> AxiomReport:
    """Per-rung monotonicity (sub-list) and convexity checks.

    Convexity combines the ensembles memberwise over all pairs with weight
    L and compares the combination's modulus against the convex combination
    of the members' moduli, rung by rung.
    """
    if not 0.0 <= L <= 1.0:
        raise DomainError(f"L must lie in [0, 1], got {L}")
    if not np.array_equal(e1.nodes, e2.nodes):
        raise DomainError("ensembles must share one node set")
    d = np.asarray(deltas, dtype=float)
    if d.size < 1:
        raise DomainError("deltas must be nonempty")
    v1 = e1.values_matrix()
    v2 = e2.values_matrix()
    combined = (L * v1[:, None, :] + (1.0 - L) * v2[None, :, :]).reshape(-1, v1.shape[1])
    comb = FunctionEnsemble.from_matrix(e1.nodes, combined)
    mono_slack = -np.inf
    conv_slack = -np.inf
    for delta in d:
        m1 = ensemble_modulus(e1, float(delta))
        m2 = ensemble_modulus(e2, float(delta))
        mc = ensemble_modulus(comb, float(delta))
        mono_slack = max(mono_slack, m1 - m2)
        conv_slack = max(conv_slack, mc - (L * m1 + (1.0 - L) * m2))
    applicable = _is_sublist(e1, e2)
    return AxiomReport(
        monotonicity_applicable=applicable,
        monotonicity_pass=(mono_slack <= _AXIOM_TOL) if applicable else True,
        monotonicity_slack=float(mono_slack),
        convexity_pass=conv_slack <= _AXIOM_TOL,
        convexity_slack=float(conv_slack),
    )


Operator = Union[EquationSpec, Callable[[GridFunction], GridFunction]]


def _image_rows(op: Operator, nodes: np.ndarray, values: np.ndarray, threads: int) -> np.ndarray:
    """Operator image of every row. Rows are processed one at a time so the
    result is bitwise identical for any thread count."""
    if isinstance(op, EquationSpec):
        def one(i: int) -> np.ndarray:
            return apply_operator_batch(op, nodes, values[i : i + 1])[0]
    else:
        def one(i: int) -> np.ndarray:
            return np.asarray(op(GridFunction(nodes=nodes, values=values[i])).values)

    idx = range(values.shape[0])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, idx))
    else:
        rows = [one(i) for i in idx]
    return np.vstack(rows)


def darbo_iterate(
    op: Operator,
    seed: FunctionEnsemble,
    p_max: int,
    convex_samples: int,
    deltas: Sequence[float],
    rng_seed: int = 0,
    threads: int | None = None,
) -> list[MncEstimate]:
    """Measure trace of the sampled Darbo scheme, seed ensemble included.

    Each step replaces the ensemble with the operator images of every
    member plus convex_samples Dirichlet-weighted convex combinations of
    those images. Sampling the convex hull can only under-estimate its
    modulus, so a decaying trace is evidence in the conservative direction.
    """
    if p_max < 1:
        raise DomainError(f"p_max must be >= 1, got {p_max}")
    if convex_samples < 0:
        raise DomainError(f"convex_samples must be >= 0, got {convex_samples}")
    workers = thread_count() if threads is None else max(1, threads)
    rng = np.random.default_rng(rng_seed)
    nodes = seed.nodes
    values = seed.values_matrix()
    trace = [mnc_estimate(seed, deltas)]
    for _ in range(p_max):
        images = _image_rows(op, nodes, values, workers)
        if convex_samples > 0:
            weights = rng.dirichlet(np.ones(images.shape[0]), size=convex_samples)
            values = np.vstack([images, weights @ images])
        else:
            values = images
        trace.append(mnc_estimate(FunctionEnsemble.from_matrix(nodes, values), deltas))
    return trace


@dataclass(frozen=True)
class ContractionCertificate:
    """Comparison functions for the generalized contraction inequality.

    h combines a measure with its phi-transform, upsilon halves (the
    built-in), gamma_cmp is the strictly positive comparison gain, phi is a
    nondecreasing transform (identity by default).
    """

    h: Callable[[float, float], float]
    upsilon: Callable[[float], float]
    gamma_cmp: Callable[[float], float]
    phi: Callable[[float], float]


def default_certificate(gain: float, phi: Callable[[float], float] | None = None) -> ContractionCertificate:
    """Built-ins: h = sum, upsilon = half, gamma_cmp = gain * x."""
    if not 0.0 < gain < 1.0:
        raise DomainError(f"gain must lie in (0, 1), got {gain}")
    return ContractionCertificate(
        h=lambda z1, z2: z1 + z2,
        upsilon=lambda v: 0.5 * v,
        gamma_cmp=lambda v: gain * v,
        phi=(lambda v: v) if phi is None else phi,
    )


def check_certificate_classes(cert: ContractionCertificate, samples: int = 100, seed: int = 7) -> bool:
    """Sampled membership checks for h, upsilon, and gamma_cmp.

    h must dominate max and be subadditive pairwise; upsilon must vanish at
    0 and be nondecreasing; gamma_cmp must vanish at 0 and be positive
    elsewhere. True when every sampled inequality holds.
    """
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.0, 10.0, size=(samples, 4))
    for z1, z2, x1, x2 in z:
        if cert.h(z1, z2) < max(z1, z2) - _AXIOM_TOL:
            return False
        if cert.h(z1 + z2, x1 + x2) > cert.h(z1, x1) + cert.h(z2, x2) + _AXIOM_TOL:
            return False
    if abs(cert.upsilon(0.0)) > _AXIOM_TOL:
        return False
    pts = np.sort(rng.uniform(0.0, 10.0, size=samples))
    ups = [cert.upsilon(float(p)) for p in pts]
    if any(b < a - _AXIOM_TOL for a, b in zip(ups, ups[1:])):
        return False
    if abs(cert.gamma_cmp(0.0)) > _AXIOM_TOL:
        return False
    if any(cert.gamma_cmp(float(p)) <= 0.0 for p in pts if p > 0.0):
        return False
    return True


@dataclass(frozen=True)
class StepCheck:
    p: int
    lhs: float
    rhs: float
    allowed_slack: float
    passed: bool


@dataclass(frozen=True)
class InequalityReport:
    gain: float
    factor: float
    steps: tuple[StepCheck, ...]

    @property
    def all_pass(self) -> bool:
        return all(s.passed for s in self.steps)


def certificate_inequality_check(
    cert: ContractionCertificate,
    trace: Sequence[MncEstimate],
    factor: float,
    slack: float = 0.05,
) -> InequalityReport:
    """Check h(Q_{p+1}, phi(Q_{p+1})) <= (1 - 2*gain) * h(Q_p, phi(Q_p)).

    gain = (1 - factor)/2, so the right side contracts by exactly the
    certified factor. Each step may overshoot by slack * Q_p to absorb
    grid and extrapolation noise.
    """
    if not 0.0 < factor < 1.0:
        raise DomainError(f"factor must lie in (0, 1), got {factor}")
    if len(trace) < 2:
        raise DomainError("trace needs at least 2 estimates")
    gain = 0.5 * (1.0 - factor)
    m = 1.0 - 2.0 * gain
    steps = []
    for p in range(len(trace) - 1):
        qp = trace[p].hausdorff
        qn = trace[p + 1].hausdorff
        lhs = cert.h(qn, cert.phi(qn))
        rhs = m * cert.h(qp, cert.phi(qp))
        allowed = slack * qp
        steps.append(
            StepCheck(p=p, lhs=lhs, rhs=rhs, allowed_slack=allowed, passed=lhs <= rhs + allowed)
        )
    return InequalityReport(gain=gain, factor=factor, steps=tuple(steps))
