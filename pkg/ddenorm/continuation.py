"""
Branch continuation - pseudo-arclength continuation and codim-2 detection

Equilibrium, fold, transcritical and Hopf branches are continued with a
secant predictor and a Newton corrector on the hyperplane orthogonal to the
secant. Hopf branches carry test functions whose sign changes are bracketed
by bisection and turned into corrected, classified and normal-formed
codimension-two points.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from ddenorm import nmfm
from ddenorm.errors import (
    BisectionFailure,
    BoxExit,
    DDENormError,
    InvalidInput,
    NoConvergence,
    SingularBorder,
    StallDetected,
)
from ddenorm.model import DelayModel, linearize
from ddenorm.points import (
    CodimTwoPoint,
    DefiningSystem,
    Equilibrium,
    FoldPoint,
    HopfPoint,
    classify_codim2,
    correct_codim2,
    hopf_tests,
    newton,
)
from ddenorm.spectrum import DEFAULT_BORDER_SEED, normalize_eigenpair, rightmost

logger = logging.getLogger(__name__)

PROBLEM_BLOCKS = {
    "equilibrium": (),
    "fold": ("zero",),
    "transcritical": ("zero",),
    "hopf": ("imag",),
}

TEST_FOR = {"genh": "L1", "zeho": "nearest_real_eig", "hoho": "unstable_pairs"}
# counting tests bracket a change of value, the others a change of sign
COUNT_TESTS = ("unstable_pairs",)

SeedPoint = Union[Equilibrium, FoldPoint, HopfPoint]


def _same_side(key: str, a: float, b: float) -> bool:
    if key in COUNT_TESTS:
        return a == b
    return a * b >= 0


@dataclass
class ContinuationOptions:
    """Step control and stopping rules for one branch"""

    steps: int = 100
    initial_step: float = 1e-2
    min_step: float = 1e-6
    max_step: float = 5e-2
    fast_iterations: int = 3
    newton_tol: float = 1e-10
    newton_maxiter: int = 8
    weights: Optional[Sequence[float]] = None
    box: Dict[int, Tuple[float, float]] = field(default_factory=dict)
    raise_on_exit: bool = False
    stall_limit: int = 3
    jump_factor: float = 10.0
    progress: bool = False
    seed: int = DEFAULT_BORDER_SEED
    k: int = 6
    N: Optional[int] = None


@dataclass
class BranchPoint:
    y: np.ndarray
    x: np.ndarray
    alpha: np.ndarray
    eigen: List[Tuple[complex, np.ndarray]]
    iterations: int
    residual: float
    arclength: float = 0.0
    tests: Optional[Dict[str, float]] = None

    @property
    def omega(self) -> Optional[float]:
        imag = [lam.imag for lam, _ in self.eigen if lam.imag != 0]
        return float(imag[0]) if imag else None


@dataclass
class Branch:
    model: DelayModel
    kind: str
    free: Tuple[int, ...]
    system: DefiningSystem = field(repr=False)
    options: ContinuationOptions = field(repr=False)
    points: List[BranchPoint] = field(default_factory=list)
    stop_reason: str = ""

    def __len__(self) -> int:
        return len(self.points)

    def hopf_point(self, i: int) -> HopfPoint:
        """Branch point i as a normalized HopfPoint"""
        if self.kind != "hopf":
            raise InvalidInput("only Hopf branches carry Hopf points", {"kind": self.kind})
        return _as_hopf(self.model, self.points[i])

    def tests(self, i: int) -> Dict[str, float]:
        """Test functions of point i, evaluated once and cached"""
        point = self.points[i]
        if point.tests is None:
            if self.kind == "hopf":
                point.tests = hopf_tests(self.model, self.hopf_point(i), self.options.k, self.options.N)
            else:
                point.tests = {}
        return point.tests

    def evaluate_tests(self):
        indices = range(len(self.points))
        if self.options.progress:
            indices = tqdm(indices, desc="test functions")
        for i in indices:
            self.tests(i)

    def to_frame(self) -> pd.DataFrame:
        """One row per point: parameters, state, omega and cached test values"""
        rows = []
        for point in self.points:
            row: Dict[str, Any] = {"arclength": point.arclength}
            row.update({name: point.alpha[k] for k, name in enumerate(self.model.parameter_names)})
            row.update({f"x{i + 1}": v for i, v in enumerate(point.x)})
            if self.kind == "hopf":
                row["omega"] = point.omega
            row["iterations"] = point.iterations
            row["residual"] = point.residual
            for key, value in (point.tests or {}).items():
                row[key] = value
            rows.append(row)
        return pd.DataFrame(rows)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "free": [self.model.parameter_names[k] for k in self.free],
            "stop_reason": self.stop_reason,
            "points": [
                {
                    "arclength": p.arclength,
                    "x": p.x.tolist(),
                    "alpha": p.alpha.tolist(),
                    "eigenvalues": [[complex(lam).real, complex(lam).imag] for lam, _ in p.eigen],
                    "iterations": p.iterations,
                    "residual": p.residual,
                    "tests": p.tests or {},
                }
                for p in self.points
            ],
        }


def _as_hopf(model: DelayModel, point: BranchPoint) -> HopfPoint:
    (lam, q), = point.eigen
    pair = normalize_eigenpair(linearize(model, point.x, point.alpha), lam, q)
    return HopfPoint(Equilibrium(point.x.copy(), point.alpha.copy(), point.residual), pair.omega, pair)


def _seed_eigen(kind: str, seed: SeedPoint) -> List[Tuple[complex, np.ndarray]]:
    if kind == "hopf":
        if not isinstance(seed, HopfPoint):
            raise InvalidInput("Hopf branches need HopfPoint seeds")
        return [(1j * seed.omega, seed.eigenpair.q)]
    if kind in ("fold", "transcritical"):
        if not isinstance(seed, FoldPoint):
            raise InvalidInput(f"{kind} branches need FoldPoint seeds")
        return [(0j, seed.eigenpair.q)]
    return []


def _weights(system: DefiningSystem, options: ContinuationOptions) -> np.ndarray:
    w = np.ones(system.size)
    if options.weights is not None:
        if len(options.weights) != len(system.free):
            raise InvalidInput("one weight per free parameter is required", {"weights": list(options.weights)})
        w[system.n:system.n + len(system.free)] = np.asarray(options.weights, dtype=float)
    return w


class _Continuer:
    def __init__(self, branch: Branch):
        self.branch = branch
        self.system = branch.system
        self.options = branch.options
        self.w = _weights(self.system, self.options)

    def norm(self, v: np.ndarray) -> float:
        return float(np.linalg.norm(self.w * v))

    def param_distance(self, a: np.ndarray, b: np.ndarray) -> float:
        """Weighted distance in the free parameters"""
        free = list(self.system.free)
        weights = self.w[self.system.n:self.system.n + len(free)]
        return float(np.linalg.norm(weights * (np.asarray(a)[free] - np.asarray(b)[free])))

    def correct_on_plane(self, y_pred: np.ndarray, direction: np.ndarray) -> Tuple[np.ndarray, int]:
        wd = self.w ** 2 * direction

        def augmented(y):
            return np.concatenate([self.system.residual(y), [wd @ (y - y_pred)]])

        return newton(augmented, y_pred, tol=self.options.newton_tol,
                      maxiter=self.options.newton_maxiter, scale=self.system.scale)

    def correct_seed(self, y: np.ndarray) -> Tuple[np.ndarray, int]:
        """Fix the first free parameter and correct the rest"""
        idx = self.system.n
        fixed = y[idx]

        def augmented(v):
            return np.concatenate([self.system.residual(v), [v[idx] - fixed]])

        return newton(augmented, y, tol=self.options.newton_tol, maxiter=30, scale=self.system.scale)

    def make_point(self, y: np.ndarray, iterations: int, arclength: float) -> BranchPoint:
        residual = float(np.linalg.norm(self.system.residual(y)))
        return BranchPoint(y.copy(), self.system.x(y).copy(), self.system.alpha(y), self.system.eigen(y),
                           iterations, residual, arclength)

    def outside_box(self, alpha: np.ndarray) -> Optional[str]:
        names = self.branch.model.parameter_names
        for k, (lo, hi) in self.options.box.items():
            if alpha[k] < lo:
                return f"BoxExit:{names[k]}<{lo}"
            if alpha[k] > hi:
                return f"BoxExit:{names[k]}>{hi}"
        return None

    def jumped(self, old: BranchPoint, new: BranchPoint, h: float) -> bool:
        for (lam_old, _), (lam_new, _) in zip(old.eigen, new.eigen):
            if abs(lam_new - lam_old) > self.options.jump_factor * max(h, self.norm(new.y - old.y)):
                return True
        return False

    def run(self, y0: np.ndarray, y1: np.ndarray):
        opts = self.options
        y0, it0 = self.correct_seed(y0)
        y1, it1 = self.correct_seed(y1)
        gap = self.norm(y1 - y0)
        if gap == 0.0:
            raise InvalidInput("the two seed points coincide after correction")
        points = [self.make_point(y0, it0, 0.0), self.make_point(y1, it1, gap)]
        tangent = (y1 - y0) / gap
        h = min(max(opts.initial_step, opts.min_step), opts.max_step)
        stalls = 0
        steps = range(opts.steps)
        if opts.progress:
            steps = tqdm(steps, desc=f"{self.branch.kind} branch")
        self.branch.stop_reason = "MaxSteps"
        for _ in steps:
            current = points[-1]
            y_pred = current.y + h * tangent
            try:
                y, iterations = self.correct_on_plane(y_pred, tangent)
                candidate = self.make_point(y, iterations, current.arclength + self.norm(y - current.y))
                if self.jumped(current, candidate, h):
                    raise NoConvergence("eigenvalue jump between consecutive points", {"step": h})
            except (NoConvergence, SingularBorder) as exc:
                h *= 0.5
                logger.debug("corrector failed (%s), step halved to %.3e", exc, h)
                if h < opts.min_step:
                    stalls += 1
                    h = opts.min_step
                    if stalls >= opts.stall_limit:
                        raise StallDetected(
                            "step size fell below the minimum repeatedly",
                            {"points": len(points), "min_step": opts.min_step, "alpha": current.alpha},
                        )
                continue
            stalls = 0
            exit_reason = self.outside_box(candidate.alpha)
            if exit_reason is not None:
                self.branch.stop_reason = exit_reason
                logger.info("branch left the parameter box: %s", exit_reason)
                if opts.raise_on_exit:
                    self.branch.points = points
                    raise BoxExit("branch left the parameter box", {"reason": exit_reason})
                break
            tangent = (candidate.y - current.y) / self.norm(candidate.y - current.y)
            points.append(candidate)
            if iterations <= opts.fast_iterations:
                h = min(2 * h, opts.max_step)
        self.branch.points = points
        logger.info("%s branch: %d points, stop reason %s", self.branch.kind, len(points), self.branch.stop_reason)


def continue_branch(
    model: DelayModel,
    problem: str,
    seeds: Sequence[SeedPoint],
    free: Sequence[int],
    options: Optional[ContinuationOptions] = None,
) -> Branch:
    """
    Continue an equilibrium-type branch from two nearby seed points

    Args:
        model: the DDE
        problem: one of equilibrium, fold, transcritical, hopf
        seeds: two points on the branch (Equilibrium, FoldPoint or HopfPoint)
        free: free parameter indices (1 for equilibria, 2 otherwise)
        options: step control; defaults to ContinuationOptions()

    Returns:
        Branch with corrected points ordered along arclength
    """
    if problem not in PROBLEM_BLOCKS:
        raise InvalidInput(f"unknown branch problem '{problem}'", {"available": sorted(PROBLEM_BLOCKS)})
    if len(seeds) != 2:
        raise InvalidInput("exactly two seed points are required", {"count": len(seeds)})
    free = tuple(int(k) for k in free)
    expected = 1 if problem == "equilibrium" else 2
    if len(free) != expected:
        raise InvalidInput(f"{problem} branches need {expected} free parameter(s)", {"free": free})
    options = options or ContinuationOptions()
    first = seeds[0].equilibrium if not isinstance(seeds[0], Equilibrium) else seeds[0]
    pin = first.x if problem == "transcritical" else None
    system = DefiningSystem(model, first.alpha, free, PROBLEM_BLOCKS[problem], seed=options.seed,
                            pin=pin)
    packed = []
    for seed in seeds:
        eq = seed if isinstance(seed, Equilibrium) else seed.equilibrium
        packed.append(system.pack(eq.x, eq.alpha, _seed_eigen(problem, seed)))
    branch = Branch(model, problem, free, system, options)
    _Continuer(branch).run(*packed)
    return branch


def continue_both_ways(
    model: DelayModel,
    problem: str,
    seeds: Sequence[SeedPoint],
    free: Sequence[int],
    options: Optional[ContinuationOptions] = None,
) -> Branch:
    """Continue from the seed pair in both directions and join the halves at the first seed"""
    forward = continue_branch(model, problem, seeds, free, options)
    backward = continue_branch(model, problem, list(seeds)[::-1], free, options)
    gap = backward.points[1].arclength
    tail = backward.points[2:][::-1]
    for point in tail:
        point.arclength = -(point.arclength - gap)
    forward.points = tail + forward.points
    forward.stop_reason = f"{backward.stop_reason}|{forward.stop_reason}"
    return forward


# Detection

@dataclass
class Detection:
    kind: str
    point: CodimTwoPoint
    index: int
    arclength: float
    normal_form: Any = None
    error: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        eq = self.point.equilibrium
        out: Dict[str, Any] = {
            "kind": self.kind,
            "index": self.index,
            "arclength": self.arclength,
            "x": eq.x.tolist(),
            "alpha": eq.alpha.tolist(),
            "omegas": list(self.point.omegas),
        }
        if self.point.l1 is not None:
            out["L1"] = self.point.l1
        if self.normal_form is not None:
            out["nmfm"] = self.normal_form.to_dict()
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class DetectionResult:
    detections: List[Detection]
    raw_crossings: Dict[str, int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": [d.to_dict() for d in self.detections],
            "raw_crossings": self.raw_crossings,
            "counts": dict(Counter(d.kind for d in self.detections)),
        }


def _bisect(branch: Branch, cont: _Continuer, i: int, key: str, tol: float, maxiter: int = 60) -> BranchPoint:
    """Bisection on the secant between points i and i + 1 until the parameters agree to tol"""
    left, right = branch.points[i], branch.points[i + 1]
    f_left = branch.tests(i)[key]
    free = list(branch.free)
    for _ in range(maxiter):
        mid_y = 0.5 * (left.y + right.y)
        direction = right.y - left.y
        y, iterations = cont.correct_on_plane(mid_y, direction)
        mid = cont.make_point(y, iterations, 0.5 * (left.arclength + right.arclength))
        value = hopf_tests(branch.model, _as_hopf(branch.model, mid), branch.options.k, branch.options.N)[key]
        if not np.isfinite(value):
            raise BisectionFailure("test function is undefined inside the bracket", {"test": key, "index": i})
        if _same_side(key, value, f_left):
            left, f_left = mid, value
        else:
            right = mid
        if cont.param_distance(left.alpha, right.alpha) <= tol:
            return mid
    raise BisectionFailure(
        "bracket did not shrink below the parameter tolerance",
        {"test": key, "index": i, "width": float(np.linalg.norm(right.alpha[free] - left.alpha[free]))},
    )


def _locate(model: DelayModel, branch: Branch, which: str, located: BranchPoint,
            hopf: HopfPoint, other_omega: Optional[float]) -> CodimTwoPoint:
    unfolding = branch.free
    if which == "genh":
        return classify_codim2(model, hopf, unfolding, expect="genh")
    eq = Equilibrium(located.x.copy(), located.alpha.copy(), located.residual)
    if which == "zeho":
        kind = "thopf" if model.fixed_equilibrium else "zeho"
        return correct_codim2(model, eq, kind, unfolding, omegas=[hopf.omega], N=branch.options.N)
    omegas = [hopf.omega] if other_omega is None else [hopf.omega, other_omega]
    return correct_codim2(model, eq, "hoho", unfolding, omegas=omegas, N=branch.options.N)


def _other_omega(model: DelayModel, point: BranchPoint, hopf: HopfPoint, options: ContinuationOptions) -> Optional[float]:
    eigs = rightmost(linearize(model, point.x, point.alpha), options.k, options.N)
    others = [e for e in eigs if not e.is_real and abs(e.lam - 1j * hopf.omega) > 1e-6 * max(1.0, hopf.omega)]
    if not others:
        return None
    return min(others, key=lambda e: abs(e.lam.real)).omega


def detect_special_points(
    model: DelayModel,
    branch: Branch,
    which: Sequence[str] = ("genh", "zeho", "hoho"),
    param_tol: float = 1e-8,
    merge_tol: float = 1e-4,
    normal_form: bool = True,
) -> DetectionResult:
    """
    Bracket sign changes of the Hopf test functions and turn them into codim-2 points

    genh: L1 changes sign; zeho: the nearest real root crosses zero; hoho: the
    number of unstable complex pairs besides the Hopf pair changes. Points closer than
    merge_tol in the weighted parameter metric are merged.
    """
    if branch.kind != "hopf":
        raise InvalidInput("detection runs on Hopf branches", {"kind": branch.kind})
    unknown = [w for w in which if w not in TEST_FOR]
    if unknown:
        raise InvalidInput("unknown codimension-two test", {"unknown": unknown})
    branch.evaluate_tests()
    cont = _Continuer(branch)
    detections: List[Detection] = []
    raw: Dict[str, int] = {w: 0 for w in which}
    for which_kind in which:
        key = TEST_FOR[which_kind]
        for i in range(len(branch.points) - 1):
            a, b = branch.tests(i)[key], branch.tests(i + 1)[key]
            if not (np.isfinite(a) and np.isfinite(b)) or _same_side(key, a, b):
                continue
            raw[which_kind] += 1
            located = _bisect(branch, cont, i, key, param_tol)
            hopf = _as_hopf(model, located)
            other = _other_omega(model, located, hopf, branch.options) if which_kind == "hoho" else None
            try:
                point = _locate(model, branch, which_kind, located, hopf, other)
            except DDENormError as exc:
                logger.warning("%s crossing between points %d and %d not confirmed: %s", which_kind, i, i + 1, exc)
                continue
            duplicate = any(
                d.point.kind == point.kind
                and cont.param_distance(d.point.equilibrium.alpha, point.equilibrium.alpha)
                < merge_tol
                for d in detections
            )
            if duplicate:
                logger.info("merged duplicate %s point near alpha = %s", point.kind, point.equilibrium.alpha)
                continue
            detection = Detection(point.kind, point, i, located.arclength)
            if normal_form:
                try:
                    detection.normal_form = nmfm.normal_form(model, point)
                    point.data = detection.normal_form
                except DDENormError as exc:
                    logger.warning("normal form at detected %s point failed: %s", point.kind, exc)
                    detection.error = exc.to_dict()
            logger.info("detected %s at alpha = %s", point.kind, point.equilibrium.alpha)
            detections.append(detection)
    return DetectionResult(detections, raw)
