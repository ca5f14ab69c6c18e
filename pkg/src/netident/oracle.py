"""Numerical ground truth for the structural checks.

Random rational modules are placed on every edge and the network transfer
matrix ``T(z) = (I - G(z))^{-1}`` is evaluated at a handful of complex
points. Generic ranks become numerical ranks over those points, local
identifiability becomes the column rank of a finite-difference Jacobian,
and the layer-by-layer reconstruction recovers every module from
``[T]_{C,R}`` alone.

Two evaluation routes are kept on purpose: :func:`eval_T` walks the graph in
topological order, while :func:`transfer_batch` inverts ``I - G`` densely
and knows nothing about the graph. Rank and Jacobian computations use the
dense route only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import IllConditioned, RankDeficientSolve, SingularAtSample
from .graph import (Dag, Edge, build_dag, enumerate_paths, min_disconnecting_set, path_edges,
                    reachable_set)
from .model import ModelSet

INSTANCE_FORMAT = "netident.instance/1"
DEFAULT_ORDERS = (1, 1)
DEFAULT_SAMPLES = 8
RANK_TOL = 1e-8
LEADING_GAP = 0.05
FD_STEP = 1e-6
# second step for telling finite-difference noise from small singular values
FD_CHECK_STEP = 1e-4
JAC_FLOOR = 1e-11
JAC_STABLE = 10.0
# required separation between the smallest kept and largest dropped value
JAC_GAP = 1e3


@dataclass(frozen=True)
class Module:
    """Rational module ``(b0 + b1 w + ...) / (1 + a1 w + ...)`` with ``w = z^{-1}``."""

    num: tuple[float, ...]
    den: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "num", tuple(float(c) for c in self.num))
        object.__setattr__(self, "den", tuple(float(c) for c in self.den))
        if not self.num:
            raise ValueError("numerator needs at least one coefficient")
        if not self.den or self.den[0] != 1.0:
            raise ValueError("denominator must be monic (leading coefficient 1)")

    @property
    def orders(self) -> tuple[int, int]:
        return len(self.num) - 1, len(self.den) - 1

    @property
    def parameters(self) -> tuple[float, ...]:
        return self.num + self.den[1:]

    def with_parameters(self, theta: Sequence[float]) -> "Module":
        m = len(self.num)
        return Module(tuple(theta[:m]), (1.0,) + tuple(theta[m:]))

    def denominator(self, z) -> np.ndarray:
        w = 1.0 / np.asarray(z, dtype=complex)
        return np.polyval(self.den[::-1], w)

    def __call__(self, z) -> np.ndarray:
        w = 1.0 / np.asarray(z, dtype=complex)
        return np.polyval(self.num[::-1], w) / np.polyval(self.den[::-1], w)


@dataclass(frozen=True)
class TransferInstance:
    """One concrete network: a module per edge, plus the seed that produced it."""

    dag: Dag
    modules: Mapping[Edge, Module]
    known: frozenset[Edge] = frozenset()
    seed: Optional[int] = None

    @property
    def parameterized_edges(self) -> list[Edge]:
        return [e for e in sorted(self.modules) if e not in self.known]

    @property
    def parameter_count(self) -> int:
        return sum(len(self.modules[e].parameters) for e in self.parameterized_edges)

    def parameter_vector(self) -> np.ndarray:
        return np.array([p for e in self.parameterized_edges for p in self.modules[e].parameters])

    def with_parameters(self, theta: Sequence[float]) -> "TransferInstance":
        mods = dict(self.modules)
        k = 0
        for e in self.parameterized_edges:
            n = len(mods[e].parameters)
            mods[e] = mods[e].with_parameters(theta[k:k + n])
            k += n
        if k != len(theta):
            raise ValueError(f"expected {k} parameters, got {len(theta)}")
        return TransferInstance(self.dag, mods, self.known, self.seed)

    def transposed(self) -> "TransferInstance":
        mods = {(j, i): m for (i, j), m in self.modules.items()}
        from .graph import transpose

        return TransferInstance(transpose(self.dag), mods,
                                frozenset((j, i) for i, j in self.known), self.seed)


def _draw(rng: np.random.Generator, leading: bool) -> float:
    while True:
        x = rng.uniform(-1.0, 1.0)
        if not leading or abs(x) > LEADING_GAP:
            return float(x)


def sample_instance(ms: ModelSet, seed: int = 0,
                    orders: tuple[int, int] | Mapping[Edge, tuple[int, int]] = DEFAULT_ORDERS
                    ) -> TransferInstance:
    """Draw coefficients for every edge, deterministically in ``seed``.

    ``orders`` is either one ``(m, n)`` pair for all edges or a per-edge map
    (missing edges fall back to the default). The leading numerator
    coefficient avoids a small band around zero.
    """
    rng = np.random.default_rng(seed)
    mods = {}
    for e in ms.dag.sorted_edges():
        m, n = orders.get(e, DEFAULT_ORDERS) if isinstance(orders, Mapping) else orders
        num = [_draw(rng, k == 0) for k in range(m + 1)]
        den = [1.0] + [_draw(rng, False) for _ in range(n)]
        mods[e] = Module(tuple(num), tuple(den))
    return TransferInstance(ms.dag, mods, ms.known, seed)


# ---------------------------------------------------------------------------
# evaluation


def frequency_samples(count: int = DEFAULT_SAMPLES, seed: int = 0) -> np.ndarray:
    """Distinct complex points ``rho * exp(i phi)`` with ``rho`` in [1.1, 1.5]."""
    rng = np.random.default_rng([seed, 0x5A])
    rho = rng.uniform(1.1, 1.5, count)
    phi = rng.uniform(0.0, 2.0 * np.pi, count)
    return rho * np.exp(1j * phi)


def required_samples(parameters: int, rows: int, cols: int, margin: int = 2) -> int:
    """Enough points for the stacked equations to outnumber the parameters."""
    if rows * cols == 0:
        return DEFAULT_SAMPLES
    return max(DEFAULT_SAMPLES, math.ceil(parameters / (rows * cols)) + margin)


def _check_samples(inst: TransferInstance, zs: np.ndarray) -> None:
    for e, mod in inst.modules.items():
        if np.any(np.abs(mod.denominator(zs)) < 1e-10):
            raise SingularAtSample(f"module on edge {e} has a pole at a sample point")


def module_matrix(inst: TransferInstance, zs) -> np.ndarray:
    """Stack of ``G(z)`` over the sample points, shape (s, L, L)."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    _check_samples(inst, zs)
    L = inst.dag.vertex_count
    G = np.zeros((len(zs), L, L), dtype=complex)
    for (i, j), mod in inst.modules.items():
        G[:, j - 1, i - 1] = mod(zs)
    return G


def eval_T(inst: TransferInstance, z: complex) -> np.ndarray:
    """``T(z)`` by back-substitution along a topological order.

    Row ``v`` of ``T`` is ``e_v + sum_u G_vu T_u`` over the in-neighbours
    ``u``, so each row is final once its in-neighbours are done.
    """
    G = module_matrix(inst, [z])[0]
    L = inst.dag.vertex_count
    T = np.zeros((L, L), dtype=complex)
    for v in inst.dag.topological_order:
        row = np.zeros(L, dtype=complex)
        row[v - 1] = 1.0
        for u in inst.dag.pred[v]:
            row += G[v - 1, u - 1] * T[u - 1]
        T[v - 1] = row
    return T


def transfer_batch(inst: TransferInstance, zs) -> np.ndarray:
    """``(I - G(z))^{-1}`` for every sample by dense inversion, shape (s, L, L)."""
    G = module_matrix(inst, zs)
    eye = np.eye(G.shape[1])
    return np.linalg.inv(eye[None] - G)


def path_sum_T(inst: TransferInstance, z: complex, target: int, origin: int) -> complex:
    """``T_{target, origin}(z)`` as a sum of module products over every path."""
    total = 0j
    for path in enumerate_paths(inst.dag, origin, target):
        prod = 1.0 + 0j
        for i, j in path_edges(path):
            prod *= complex(inst.modules[(i, j)](z))
        total += prod
    return total


def _idx(vs: Iterable[int]) -> list[int]:
    return [v - 1 for v in sorted(vs)]


def numeric_rank(inst: TransferInstance, rows: Iterable[int], cols: Iterable[int],
                 samples=None, tol: float = RANK_TOL) -> int:
    """Largest numerical rank of ``[T(z)]_{rows,cols}`` over the samples, relative to ``|T(z)|``."""
    rows, cols = _idx(rows), _idx(cols)
    if not rows or not cols:
        return 0
    zs = frequency_samples(seed=inst.seed or 0) if samples is None else samples
    full = transfer_batch(inst, zs)
    best = 0
    for Tz in full:
        # scale by the whole T(z), whose unit diagonal keeps roundoff in
        # structurally zero blocks from passing as rank
        scale = np.linalg.norm(Tz, 2)
        s = np.linalg.svd(Tz[np.ix_(rows, cols)], compute_uv=False)
        best = max(best, int(np.sum(s > tol * scale)))
    return best


# ---------------------------------------------------------------------------
# local identifiability


@dataclass
class JacobianReport:
    """Spectra of the normalized Jacobian at the main and the check step.

    A direction counts toward the rank when its relative singular value is
    above ``JAC_FLOOR`` at both steps and the two agree within
    ``JAC_STABLE``; it counts as null when either falls below the floor.
    The decision is ``ambiguous`` when some value is neither, or when kept
    and dropped values are closer than ``JAC_GAP``.
    """

    rank: int
    parameters: int
    singular_values: np.ndarray
    samples: int
    check_values: np.ndarray | None = None
    ambiguous_count: int = 0

    @property
    def full_rank(self) -> bool:
        return self.rank == self.parameters and not self.ambiguous

    @property
    def ambiguous(self) -> bool:
        return self.ambiguous_count > 0


def _relative(s: np.ndarray) -> np.ndarray:
    return s / s[0] if s.size and s[0] > 0 else np.zeros_like(s)


def classify_spectra(s_main: np.ndarray, s_check: np.ndarray) -> tuple[int, int]:
    """Return (rank, ambiguous count) from two finite-difference spectra."""
    r1, r2 = _relative(s_main), _relative(s_check)
    low = np.minimum(r1, r2)
    high = np.maximum(r1, r2)
    nonzero = (low > JAC_FLOOR) & (high <= JAC_STABLE * low)
    null = low <= JAC_FLOOR
    ambiguous = int((~nonzero & ~null).sum())
    if nonzero.any() and (~nonzero).any() and r1[nonzero].min() < JAC_GAP * r1[~nonzero].max():
        ambiguous += 1
    return int(nonzero.sum()), ambiguous


def _jacobian(inst: TransferInstance, T: np.ndarray, samples, rows, cols, step: float) -> np.ndarray:
    # Perturbing one parameter changes a single module G_ji. On an acyclic
    # graph T_ij = 0, so the perturbed T is exactly T + dG * T[:, j] T[i, :]
    # and each central difference costs one outer product.
    J = np.empty((2 * len(samples) * len(rows) * len(cols), inst.parameter_count))
    k = 0
    for i, j in inst.parameterized_edges:
        mod = inst.modules[(i, j)]
        theta = np.array(mod.parameters)
        outer = T[:, rows, j - 1][:, :, None] * T[:, i - 1, cols][:, None, :]
        for a in range(theta.size):
            h = step * max(1.0, abs(theta[a]))
            up, down = theta.copy(), theta.copy()
            up[a] += h
            down[a] -= h
            dG = (mod.with_parameters(up)(samples) - mod.with_parameters(down)(samples)) / (2 * h)
            col = (dG[:, None, None] * outer).ravel()
            J[:, k] = np.concatenate([col.real, col.imag])
            k += 1
    norms = np.linalg.norm(J, axis=0)
    return J / np.where(norms > 0, norms, 1.0)


def _reach_mask(dag) -> np.ndarray:
    """1 where T_ab can be nonzero (b reaches a, or a == b), else 0.

    Dense inversion leaves roundoff in structurally zero entries, which
    column normalization would otherwise blow up.
    """
    L = dag.vertex_count
    mask = np.eye(L)
    for b in dag.vertices:
        for a in reachable_set(dag, b):
            mask[a - 1, b - 1] = 1.0
    return mask


def _spectrum(J: np.ndarray, P: int) -> np.ndarray:
    s = np.linalg.svd(J, compute_uv=False)
    return np.concatenate([s, np.zeros(P - s.size)]) if s.size < P else s


def jacobian_report(ms: ModelSet, seed: int = 0, samples=None,
                    orders=DEFAULT_ORDERS, instance: TransferInstance | None = None) -> JacobianReport:
    """Column rank of d vec([T]_{C,R}) / d theta by central differences at a random theta."""
    inst = instance if instance is not None else sample_instance(ms, seed, orders)
    rows, cols = _idx(ms.measured), _idx(ms.excited)
    P = inst.parameter_count
    if samples is None:
        samples = frequency_samples(required_samples(P, len(rows), len(cols)), seed)
    if P == 0:
        return JacobianReport(0, 0, np.zeros(0), len(samples))
    if not rows or not cols:
        return JacobianReport(0, P, np.zeros(P), len(samples), np.zeros(P))
    T = transfer_batch(inst, samples) * _reach_mask(inst.dag)[None]
    s_main = _spectrum(_jacobian(inst, T, samples, rows, cols, FD_STEP), P)
    s_check = _spectrum(_jacobian(inst, T, samples, rows, cols, FD_CHECK_STEP), P)
    rank, amb = classify_spectra(s_main, s_check)
    return JacobianReport(rank, P, s_main, len(samples), s_check, amb)


def jacobian_local_identifiability(ms: ModelSet, seed: int = 0, samples=None,
                                   orders=DEFAULT_ORDERS) -> bool:
    """Whether the finite-difference Jacobian has full column rank.

    Raises:
        IllConditioned: a singular value is neither clearly null nor stable across steps.
    """
    rep = jacobian_report(ms, seed, samples, orders)
    if rep.ambiguous:
        raise IllConditioned(f"singular values straddle the rank threshold "
                             f"(rank {rep.rank} of {rep.parameters})")
    return rep.full_rank


# ---------------------------------------------------------------------------
# constructive reconstruction


@dataclass
class ReconstructionResult:
    """Estimated module responses at the sample points and their errors."""

    estimates: dict[Edge, np.ndarray]
    errors: dict[Edge, float]
    samples: np.ndarray
    order: list[int]
    disconnecting_sets: dict[int, frozenset[int]] = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return max(self.errors.values(), default=0.0)


def measured_data(inst: TransferInstance, ms: ModelSet, samples) -> np.ndarray:
    """``T(z)`` with every entry outside measured rows / excited columns set to NaN."""
    T = transfer_batch(inst, samples)
    mask = np.full(T.shape[1:], np.nan)
    rows, cols = _idx(ms.measured), _idx(ms.excited)
    mask[np.ix_(rows, cols)] = 1.0
    return T * mask[None]


def _lstsq(A: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    if A.shape[1] == 0:
        return np.zeros((0,) + b.shape[1:], dtype=complex)
    s = np.linalg.svd(A, compute_uv=False)
    if s.size < A.shape[1] or s[0] == 0 or s[-1] < 1e-10 * s[0]:
        raise RankDeficientSolve(what)
    return np.linalg.lstsq(A, b, rcond=None)[0]


def layered_reconstruction(inst: TransferInstance, ms: ModelSet, witnesses=None,
                           samples=None) -> ReconstructionResult:
    """Recover every module from ``[T]_{C,R}`` vertex by vertex in topological order.

    A measured vertex ``j`` regresses its measured row on the rows of its
    in-neighbours, which are rebuilt from the modules already recovered
    upstream. An unmeasured vertex ``j`` uses its witness pair ``(C_j, R_j)``:
    for each in-neighbour ``i`` the column ``[T]_{C_j,i}`` (zero when ``i`` is
    not excited) minus the indicator of ``i`` in ``C_j`` is regressed on
    ``[T]_{C_j,R_j}``, and the coefficient of ``j`` is ``G_ji``.

    Args:
        witnesses: vertex -> object with ``measured_set`` and ``excited_set``;
            computed with the vertex-wise check when omitted.

    Raises:
        RankDeficientSolve: a regression lost full column rank.
        ValueError: some vertex is neither excited nor measured, or lacks a witness.
    """
    dag = ms.dag
    if not ms.full_cover:
        raise ValueError("reconstruction needs every vertex excited or measured")
    if witnesses is None:
        from .checkers import theorem1_check

        witnesses = theorem1_check(ms).witnesses
    zs = frequency_samples(seed=inst.seed or 0) if samples is None else np.asarray(samples)
    data = measured_data(inst, ms, zs)
    s, L = len(zs), dag.vertex_count
    G_hat = np.zeros((s, L, L), dtype=complex)
    estimates: dict[Edge, np.ndarray] = {}
    cuts: dict[int, frozenset[int]] = {}
    order = list(dag.topological_order)
    R = sorted(ms.excited)
    eye = np.eye(L)
    for j in order:
        ins = list(dag.pred[j])
        if not ins:
            continue
        g = np.zeros((s, len(ins)), dtype=complex)
        if j in ms.measured:
            cols = [r for r in R if r != j]
            T_up = np.linalg.inv(eye[None] - G_hat)
            for k in range(s):
                A = T_up[k][np.ix_(_idx(ins), _idx(cols))].T
                b = data[k, j - 1, _idx(cols)]
                g[k] = _lstsq(A, b, f"in-neighbour rows of vertex {j}")
        else:
            w = witnesses.get(j)
            if w is None:
                raise ValueError(f"no witness for unmeasured vertex {j}")
            Cj, Rj = sorted(w.measured_set), [j] + sorted(set(w.excited_set) - {j})
            S = set(ins) - ms.excited
            for i in ins:
                S |= set(dag.succ[i])
            cuts[j] = min_disconnecting_set(dag, (set(Rj) | S) - {j}, Cj)
            for k in range(s):
                A = data[k][np.ix_(_idx(Cj), [r - 1 for r in Rj])]
                lhs = np.zeros((len(Cj), len(ins)), dtype=complex)
                for c, i in enumerate(ins):
                    if i in ms.excited:
                        lhs[:, c] = data[k][_idx(Cj), i - 1]
                    if i in Cj:
                        lhs[Cj.index(i), c] -= 1.0
                g[k] = _lstsq(A, lhs, f"witness block of vertex {j}")[0]
        for c, i in enumerate(ins):
            if (i, j) in ms.known:
                g[:, c] = inst.modules[(i, j)](zs)
            G_hat[:, j - 1, i - 1] = g[:, c]
            estimates[(i, j)] = g[:, c]
    errors = {}
    for e, est in estimates.items():
        truth = inst.modules[e](zs)
        errors[e] = float(np.max(np.abs(est - truth) / np.maximum(np.abs(truth), 1e-300)))
    return ReconstructionResult(estimates, errors, zs, order, cuts)


# ---------------------------------------------------------------------------
# JSON round trip


def instance_to_dict(inst: TransferInstance) -> dict:
    return {
        "format": INSTANCE_FORMAT,
        "vertex_count": inst.dag.vertex_count,
        "seed": inst.seed,
        "modules": [{"edge": list(e), "num": list(m.num), "den": list(m.den),
                     "known": e in inst.known}
                    for e, m in sorted(inst.modules.items())],
    }


def instance_from_dict(doc: Mapping) -> TransferInstance:
    if doc.get("format") != INSTANCE_FORMAT:
        raise ValueError(f"unsupported instance format {doc.get('format')!r}")
    mods, known = {}, set()
    for entry in doc["modules"]:
        e = (int(entry["edge"][0]), int(entry["edge"][1]))
        mods[e] = Module(entry["num"], entry["den"])
        if entry.get("known"):
            known.add(e)
    dag = build_dag(int(doc["vertex_count"]), mods)
    return TransferInstance(dag, mods, frozenset(known), doc.get("seed"))


def dump_instance(inst: TransferInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2, sort_keys=True)


def load_instance(text: str) -> TransferInstance:
    return instance_from_dict(json.loads(text))
