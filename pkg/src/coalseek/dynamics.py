"""Continuous-time seeking dynamics and their fixed-step integration.

Each agent descends its own estimated gradient component while a consensus
protocol, run per component over the neighborhood communication graph, drives
the per-agent estimates toward the block average of the cost partials.  The
same right-hand side covers single-agent descent, single-coalition social
minimization and the general multi-coalition game without special cases:
degenerate blocks simply have zero Laplacians.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .expr import Const, DomainError, Expression, Unary, Var
from .game import Game, Layout

__all__ = [
    "SeekerState",
    "Trajectory",
    "IntegrateParams",
    "Seeker",
    "NumericsError",
    "DomainUnrecoverableError",
    "NonFiniteStateError",
    "compute_estimates",
    "rhs",
    "integrate",
]


class NumericsError(RuntimeError):
    pass


class DomainUnrecoverableError(NumericsError):
    """A step could not be completed inside the cost domain even after the
    maximum number of step halvings."""


class NonFiniteStateError(NumericsError):
    pass


@dataclass
class SeekerState:
    """Full dynamical state: actions ``x``, flat auxiliary vector ``w``
    (ordered per ``Game.layout``), virtual time ``t``."""

    x: np.ndarray
    w: np.ndarray
    t: float = 0.0

    def copy(self) -> "SeekerState":
        return SeekerState(self.x.copy(), self.w.copy(), self.t)


@dataclass
class IntegrateParams:
    method: str = "rk4"  # "rk4" | "euler"
    step: float = 1e-3
    horizon: float = 100.0
    record_stride: int = 100
    stop_tol: float | None = 1e-8
    record_w: bool = False
    record_estimates: bool = False
    diagnostics: bool = True
    lyapunov: Callable[["SeekerState"], float] | None = None
    max_halvings: int = 40

    def __post_init__(self):
        if not (self.step > 0):
            raise ValueError("step must be positive")
        if not (self.horizon > 0):
            raise ValueError("horizon must be positive")
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")
        if self.method not in ("rk4", "euler"):
            raise ValueError(f"unknown method '{self.method}'")


@dataclass
class Trajectory:
    """Time-indexed record of a run; optional columns are None when not recorded."""

    var_names: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    w_samples: np.ndarray | None = None
    estimate_samples: np.ndarray | None = None
    pg_norm: np.ndarray | None = None
    gbar_norm: np.ndarray | None = None
    lyapunov: np.ndarray | None = None
    stopped_early: bool = False
    steps: int = 0
    wall_time: float = 0.0

    @property
    def final_x(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def write_csv(self, target) -> None:
        """Write ``t, <actions> [, pgnorm, V, gbar_norm]`` rows; float fields
        use shortest round-trip decimal formatting."""
        close = False
        if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
            fh = open(target, "w", encoding="utf-8")
            close = True
        else:
            fh = target
        try:
            header = ["t", *self.var_names]
            columns = [self.times] + [self.states[:, i] for i in range(self.states.shape[1])]
            if self.pg_norm is not None:
                header.append("pgnorm")
                columns.append(self.pg_norm)
            if self.lyapunov is not None:
                header.append("V")
                columns.append(self.lyapunov)
            if self.gbar_norm is not None:
                header.append("gbar_norm")
                columns.append(self.gbar_norm)
            fh.write(",".join(header) + "\n")
            for row in zip(*columns):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        finally:
            if close:
                fh.close()


# ---------------------------------------------------------------------------
# Compiled partial derivatives
# ---------------------------------------------------------------------------


def _py_source(e: Expression, slot_of: dict[str, int]) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return f"v{slot_of[e.name]}"
    if isinstance(e, Unary):
        inner = _py_source(e.arg, slot_of)
        if e.op == "neg":
            return f"(-{inner})"
        return f"_{e.op}({inner})"
    left = _py_source(e.left, slot_of)
    right = _py_source(e.right, slot_of)
    if e.op == "pow":
        if isinstance(e.right, Const) and e.right.value == int(e.right.value):
            return f"({left})**{int(e.right.value)}"
        return f"_pw({left}, {right})"
    op = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[e.op]
    return f"({left} {op} {right})"


def compile_vector_function(
    exprs: Iterable[Expression], names: tuple[str, ...]
) -> Callable[..., tuple[float, ...]]:
    """Compile expressions into one positional-argument function returning a
    tuple; arguments follow ``names`` order.  Shared by the integrator and the
    stationary-point solver."""
    slot_of = {name: i for i, name in enumerate(names)}
    body = ", ".join(_py_source(e, slot_of) for e in exprs)
    args = ", ".join(f"v{i}" for i in range(len(names)))
    source = f"def _fn({args}):\n    return ({body}{',' if body else ''})\n"
    namespace = {"_exp": math.exp, "_log": math.log, "_pw": math.pow}
    exec(compile(source, "<coalseek-compiled>", "exec"), namespace)
    return namespace["_fn"]


class Seeker:
    """Dynamics engine bound to one game; reusable across integrations."""

    def __init__(self, game: Game):
        self.game = game
        self.layout: Layout = game.layout
        self._pfun = compile_vector_function(self.layout.partial_exprs(), game.var_names)
        self._cfun = compile_vector_function(
            [f for c in game.coalitions for f in c.costs], game.var_names
        )
        self._big_l = self.layout.big_laplacian
        self._own = self.layout.own_slots
        self._gain = game.delta * np.array(
            [d for c in game.coalitions for d in c.dbar]
        )
        self._component_sum = self.layout.component_sum
        self._block_slices = [
            (b.start, b.stop) for b in self.layout.blocks if b.size > 1
        ]

    # -- state construction --------------------------------------------------

    def initial_state(self, x0, w0=None, t: float = 0.0) -> SeekerState:
        x = self.game.as_profile(x0)
        if w0 is None:
            w = np.zeros(self.layout.size)
        else:
            w = np.asarray(w0, dtype=float)
            if w.shape != (self.layout.size,):
                raise ValueError(
                    f"w must have {self.layout.size} entries (one per stored estimate)"
                )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise NonFiniteStateError("initial state contains non-finite entries")
        return SeekerState(x, w, t)

    # -- core evaluations -----------------------------------------------------

    def partial_vector(self, x: np.ndarray) -> np.ndarray:
        """Flat cost-partial vector at ``x``; the point must lie inside every
        cost's domain, which is checked by evaluating the costs themselves."""
        args = x.tolist()
        try:
            costs = self._cfun(*args)
            vals = np.array(self._pfun(*args))
        except (ValueError, ZeroDivisionError, OverflowError) as err:
            raise DomainError(str(err)) from err
        if not (np.all(np.isfinite(vals)) and all(math.isfinite(v) for v in costs)):
            raise DomainError("non-finite cost or partial derivative")
        return vals

    def estimates_flat(self, state: SeekerState) -> np.ndarray:
        return state.w + self.partial_vector(state.x)

    def estimates(self, state: SeekerState) -> dict[tuple[int, int, int], float]:
        flat = self.estimates_flat(state)
        return {key: float(flat[slot]) for key, slot in self.layout.slots.items()}

    def _rhs_from_pvec(self, w: np.ndarray, pvec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = w + pvec
        dx = -self._gain * g[self._own]
        dw = -(self._big_l @ g)
        return dx, dw

    def rhs_arrays(self, x: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self._rhs_from_pvec(w, self.partial_vector(x))

    def rhs(self, state: SeekerState) -> tuple[np.ndarray, np.ndarray]:
        return self.rhs_arrays(state.x, state.w)

    def pseudo_gradient_inf(self, x: np.ndarray) -> float:
        p = self._component_sum @ self.partial_vector(x)
        return float(np.abs(p).max())

    def block_residuals(self, g: np.ndarray) -> np.ndarray:
        """Per-block 2-norm of the disagreement component (estimates minus
        their block mean); zero for singleton blocks."""
        out = np.zeros(len(self._block_slices))
        for idx, (a, b) in enumerate(self._block_slices):
            seg = g[a:b]
            out[idx] = float(np.linalg.norm(seg - seg.mean()))
        return out

    # -- stepping ---------------------------------------------------------------

    def _step(self, x, w, h, method, pvec):
        """One accepted step needs every stage AND the committed endpoint to
        stay inside the cost domains; the endpoint's partial vector doubles as
        the next step's first stage."""
        if method == "euler":
            k1x, k1w = self._rhs_from_pvec(w, pvec)
            xn, wn = x + h * k1x, w + h * k1w
        else:
            k1x, k1w = self._rhs_from_pvec(w, pvec)
            k2x, k2w = self.rhs_arrays(x + 0.5 * h * k1x, w + 0.5 * h * k1w)
            k3x, k3w = self.rhs_arrays(x + 0.5 * h * k2x, w + 0.5 * h * k2w)
            k4x, k4w = self.rhs_arrays(x + h * k3x, w + h * k3w)
            xn = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            wn = w + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        if not (np.all(np.isfinite(xn)) and np.all(np.isfinite(wn))):
            raise DomainError("step produced a non-finite state")
        return xn, wn, self.partial_vector(xn)

    def integrate(self, state0: SeekerState, params: IntegrateParams | None = None) -> Trajectory:
        params = params or IntegrateParams()
        if not (np.all(np.isfinite(state0.x)) and np.all(np.isfinite(state0.w))):
            raise NonFiniteStateError("initial state contains non-finite entries")
        start = time.perf_counter()
        x = state0.x.copy()
        w = state0.w.copy()
        t = state0.t
        t_end = state0.t + params.horizon
        pvec = self.partial_vector(x)  # validates the initial cost domain

        times = [t]
        states = [x.copy()]
        w_samples = [w.copy()] if params.record_w else None
        g_samples = [w + pvec] if params.record_estimates else None
        pg, gbar, vvals = ([], [], []) if params.diagnostics else (None, None, None)

        def record_diag() -> tuple[float, float]:
            g = w + pvec
            p = self._component_sum @ pvec
            p_inf = float(np.abs(p).max())
            resid = self.block_residuals(g)
            max_resid = float(resid.max()) if resid.size else 0.0
            if params.diagnostics:
                pg.append(p_inf)
                gbar.append(float(np.sqrt((resid**2).sum())))
                if params.lyapunov is not None:
                    vvals.append(params.lyapunov(SeekerState(x, w, t)))
            return p_inf, max_resid

        record_diag()
        stopped = False
        steps = 0
        eps = 1e-12 * max(1.0, abs(t_end))
        while t < t_end - eps:
            h_try = min(params.step, t_end - t)
            halvings = 0
            while True:
                try:
                    xn, wn, pvec_n = self._step(x, w, h_try, params.method, pvec)
                    break
                except DomainError:
                    halvings += 1
                    if halvings > params.max_halvings:
                        raise DomainUnrecoverableError(
                            f"step at t={t:.6g} failed after {params.max_halvings} halvings"
                        ) from None
                    h_try *= 0.5
            x, w, t, pvec = xn, wn, t + h_try, pvec_n
            steps += 1
            at_end = t >= t_end - eps
            if steps % params.record_stride == 0 or at_end:
                times.append(t)
                states.append(x.copy())
                if w_samples is not None:
                    w_samples.append(w.copy())
                if g_samples is not None:
                    g_samples.append(w + pvec)
                p_inf, max_resid = record_diag()
                if (
                    params.stop_tol is not None
                    and p_inf <= params.stop_tol
                    and max_resid <= params.stop_tol
                ):
                    stopped = True
                    break

        return Trajectory(
            var_names=self.game.var_names,
            times=np.array(times),
            states=np.array(states),
            w_samples=np.array(w_samples) if w_samples is not None else None,
            estimate_samples=np.array(g_samples) if g_samples is not None else None,
            pg_norm=np.array(pg) if pg is not None else None,
            gbar_norm=np.array(gbar) if gbar is not None else None,
            lyapunov=np.array(vvals) if (vvals is not None and params.lyapunov is not None) else None,
            stopped_early=stopped,
            steps=steps,
            wall_time=time.perf_counter() - start,
        )


# ---------------------------------------------------------------------------
# One-shot conveniences (construct a Seeker directly for repeated use)
# ---------------------------------------------------------------------------


def compute_estimates(game: Game, state: SeekerState) -> dict[tuple[int, int, int], float]:
    """Estimate table g_ijk = w_ijk + d f_ij / d x_ik at the given state."""
    return Seeker(game).estimates(state)


def rhs(game: Game, state: SeekerState) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative (dx, dw) of the seeking dynamics at ``state``."""
    return Seeker(game).rhs(state)


def integrate(
    game: Game, state0: SeekerState, params: IntegrateParams | None = None
) -> Trajectory:
    return Seeker(game).integrate(state0, params)
