"""
Method-of-steps integration of discrete-delay equations

Classical RK4 on a uniform mesh with cubic Hermite dense output. The step is
capped at a quarter of the smallest delay, so every delayed lookup falls on
an already completed interval.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.cluster.hierarchy import fclusterdata
from scipy.optimize import brentq
from tqdm import tqdm

from ddenorm.errors import InvalidInput, NonFiniteState
from ddenorm.model import DelayModel

logger = logging.getLogger(__name__)

History = Union[Callable[[float], Sequence[float]], Sequence[float], np.ndarray]

TRIM_EVERY = 2048


@dataclass
class SimulationOptions:
    dt_max: float = 1e-2
    keep_last: Optional[float] = None
    progress: bool = False


@dataclass
class Trajectory:
    """Mesh values, derivatives and the initial history of one simulation"""

    model: DelayModel
    alpha: np.ndarray
    h: float
    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    history: Callable[[float], np.ndarray] = field(repr=False)
    t_final: float = 0.0

    @property
    def span(self) -> Tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    def _interval(self, s: float) -> int:
        k = int(math.floor((s - self.t[0]) / self.h)) if self.h > 0 else 0
        return min(max(k, 0), max(len(self.t) - 2, 0))

    def value(self, s: float) -> np.ndarray:
        if len(self.t) == 1:
            return self.x[0].copy()
        k = self._interval(s)
        return _hermite(self.t[k], self.h, self.x[k], self.dx[k], self.x[k + 1], self.dx[k + 1], s)

    def sample(self, times: Sequence[float]) -> np.ndarray:
        lo, hi = self.span
        times = np.atleast_1d(np.asarray(times, dtype=float))
        tol = 1e-12 * max(1.0, abs(hi))
        if np.any(times < lo - tol) or np.any(times > hi + tol):
            raise InvalidInput("sample times outside the stored span", {"span": [lo, hi]})
        return np.array([self.value(s) for s in times])

    def to_frame(self, rate: Optional[float] = None) -> pd.DataFrame:
        """(t, x1..xn) at the mesh points, or every 1/rate time units"""
        if rate is None:
            times, values = self.t, self.x
        else:
            lo, hi = self.span
            times = lo + np.arange(int(math.floor((hi - lo) * rate + 1e-9)) + 1) / rate
            values = self.sample(times)
        frame = pd.DataFrame(values, columns=[f"x{i + 1}" for i in range(self.model.n)])
        frame.insert(0, "t", times)
        return frame


def _hermite(t0: float, h: float, x0: np.ndarray, f0: np.ndarray, x1: np.ndarray, f1: np.ndarray,
             s: float) -> np.ndarray:
    u = (s - t0) / h
    u2, u3 = u * u, u * u * u
    return ((2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * h * f0
            + (-2 * u3 + 3 * u2) * x1 + (u3 - u2) * h * f1)


def _as_history(history: History, n: int) -> Callable[[float], np.ndarray]:
    if callable(history):
        def fn(theta: float) -> np.ndarray:
            return np.asarray(history(theta), dtype=float).reshape(n)
        return fn
    const = np.asarray(history, dtype=float).reshape(n)
    return lambda theta: const


class _Store:
    """Uniform-mesh buffer with dense-output lookups into the past"""

    def __init__(self, n: int, h: float, history: Callable[[float], np.ndarray], keep: Optional[float]):
        self.h = h
        self.history = history
        self.keep = keep
        self.offset = 0
        self.t: List[float] = []
        self.x: List[np.ndarray] = []
        self.dx: List[np.ndarray] = []

    def append(self, k: int, x: np.ndarray, dx: np.ndarray):
        self.t.append(k * self.h)
        self.x.append(x)
        self.dx.append(dx)

    def lookup(self, s: float) -> np.ndarray:
        if s <= 0.0:
            return self.history(s)
        k = int(math.floor(s / self.h)) - self.offset
        k = min(max(k, 0), len(self.t) - 2)
        return _hermite(self.t[k], self.h, self.x[k], self.dx[k], self.x[k + 1], self.dx[k + 1], s)

    def trim(self, t_now: float, tau_max: float):
        if self.keep is None:
            return
        cutoff = t_now - max(self.keep, tau_max + 2 * self.h)
        drop = int(math.floor(cutoff / self.h)) - self.offset - 1
        if drop > 0:
            del self.t[:drop], self.x[:drop], self.dx[:drop]
            self.offset += drop


def simulate(
    model: DelayModel,
    alpha: Sequence[float],
    history: History,
    t_final: float,
    options: Optional[SimulationOptions] = None,
) -> Trajectory:
    """
    Integrate x'(t) = f(x(t), x(t - tau_1), ..., alpha) on [0, t_final]

    Args:
        model: the DDE
        alpha: parameter vector (delays are constant along the run)
        history: function theta -> x(theta) on [-tau_max, 0], or a constant state
        t_final: end time (0 gives the initial point only)
        options: step cap, storage window and progress display

    Returns:
        Trajectory with the stored mesh values
    """
    options = options or SimulationOptions()
    if t_final < 0:
        raise InvalidInput("t_final must be non-negative", {"t_final": t_final})
    if options.dt_max <= 0:
        raise InvalidInput("dt_max must be positive", {"dt_max": options.dt_max})
    alpha = np.asarray(alpha, dtype=float)
    taus = model.delay_values(alpha)
    positive = taus[taus > 0]
    cap = min(options.dt_max, positive.min() / 4) if positive.size else options.dt_max
    steps = int(math.ceil(t_final / cap - 1e-12)) if t_final > 0 else 0
    h = t_final / steps if steps else cap
    hist = _as_history(history, model.n)
    store = _Store(model.n, h, hist, options.keep_last)
    tau_max = float(taus.max())

    def rhs(s: float, xs: np.ndarray) -> np.ndarray:
        X = np.empty((model.n, taus.size))
        X[:, 0] = xs
        for j in range(1, taus.size):
            X[:, j] = store.lookup(s - taus[j])
        return np.asarray(model.rhs(X, alpha), dtype=float).reshape(model.n)

    x = hist(0.0).copy()
    store.append(0, x, rhs(0.0, x))
    indices = range(steps)
    if options.progress:
        indices = tqdm(indices, desc="simulate")
    for k in indices:
        t = k * h
        k1 = store.dx[-1]
        k2 = rhs(t + h / 2, x + h / 2 * k1)
        k3 = rhs(t + h / 2, x + h / 2 * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState("state blew up", {"t": t + h})
        store.append(k + 1, x, rhs(t + h, x))
        if (k + 1) % TRIM_EVERY == 0:
            store.trim(t + h, tau_max)
    store.trim(steps * h, tau_max)
    logger.info("simulated %d steps of size %.3g up to t = %.6g", steps, h, t_final)
    return Trajectory(model, alpha, h, np.asarray(store.t), np.asarray(store.x), np.asarray(store.dx),
                      hist, float(t_final))


def sample(traj: Trajectory, times: Sequence[float]) -> np.ndarray:
    return traj.sample(times)


def poincare_crossings(
    traj: Trajectory,
    functional: Union[int, Callable[[np.ndarray], float]],
    level: float = 0.0,
    direction: int = 1,
    xtol: float = 1e-10,
) -> List[Tuple[float, np.ndarray]]:
    """
    Crossings of g(x(t)) = level located on the dense output

    Args:
        functional: component index or a scalar function of the state
        direction: +1 upward, -1 downward, 0 both
    """
    g = (lambda v: v[functional]) if isinstance(functional, (int, np.integer)) else functional
    values = np.array([g(v) for v in traj.x]) - level
    crossings = []
    for k in range(len(values) - 1):
        a, b = values[k], values[k + 1]
        up = a < 0.0 <= b
        down = a > 0.0 >= b
        if not ((up and direction >= 0) or (down and direction <= 0)):
            continue
        if b == 0.0:
            t_cross = traj.t[k + 1]
        else:
            t_cross = brentq(lambda s: g(traj.value(s)) - level, traj.t[k], traj.t[k + 1], xtol=xtol)
        crossings.append((float(t_cross), traj.value(t_cross)))
    return crossings


def crossings_frame(crossings: List[Tuple[float, np.ndarray]], n: int) -> pd.DataFrame:
    frame = pd.DataFrame([c[1] for c in crossings], columns=[f"x{i + 1}" for i in range(n)])
    frame.insert(0, "t", [c[0] for c in crossings])
    return frame


def cluster_count(points: np.ndarray, radius: float = 1e-2, max_points: int = 2000) -> int:
    """Number of single-linkage clusters of section points at the given radius"""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if len(points) > max_points:
        points = points[-max_points:]
    if len(points) < 2:
        return len(points)
    return int(fclusterdata(points, t=radius, criterion="distance", method="single").max())


def terminal_amplitude(traj: Trajectory, fraction: float = 0.1) -> float:
    """Largest half peak-to-peak excursion over the last fraction of the run"""
    lo, hi = traj.span
    window = traj.x[traj.t >= hi - fraction * (hi - lo)]
    if len(window) == 0:
        return 0.0
    return float(((window.max(axis=0) - window.min(axis=0)) / 2).max())
