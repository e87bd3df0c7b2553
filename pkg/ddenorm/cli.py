"""
ddenorm CLI - batch front end for analyze / predict / continue / simulate runs
Reads one JSON run configuration and writes JSON/CSV artifacts plus schemas
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from pydantic import ValidationError

from ddenorm import __version__
from ddenorm import schemas
from ddenorm.config import RunConfig, Settings, load_config
from ddenorm.continuation import (
    ContinuationOptions,
    DetectionResult,
    continue_both_ways,
    continue_branch,
    detect_special_points,
)
from ddenorm.errors import ConfigError, DDENormError
from ddenorm.integrate import (
    SimulationOptions,
    cluster_count,
    crossings_frame,
    poincare_crossings,
    simulate,
    terminal_amplitude,
)
from ddenorm.model import DelayModel, linearize
from ddenorm.nmfm import normal_form
from ddenorm.points import (
    CodimTwoPoint,
    Equilibrium,
    FoldPoint,
    HopfPoint,
    classify_codim2,
    correct_codim2,
    correct_equilibrium,
    correct_fold,
    correct_hopf,
    fold_from_equilibrium,
    hopf_from_equilibrium,
    with_l1,
)
from ddenorm.predictors import predictors_for
from ddenorm.spectrum import rightmost
from ddenorm.storage import LocalStorage, metadata, to_json_value
from ddenorm.systems import get_model, list_models

logger = logging.getLogger(__name__)

COMMANDS = ("analyze", "predict", "continue", "simulate", "models")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

AnyPoint = Union[Equilibrium, FoldPoint, HopfPoint, CodimTwoPoint]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddenorm",
        description="Normal forms, predictors, continuation and simulation for delay differential equations",
    )
    parser.add_argument("command", choices=COMMANDS, help="Pipeline to run")
    parser.add_argument("--config", type=str, help="Path to the JSON run configuration")
    parser.add_argument("--out", type=str, default=None, help="Output directory (default: config 'out' or ./out)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a config field by dot path, e.g. continuation.steps=30")
    parser.add_argument("--seed", type=int, default=None, help="Seed for the random border vectors")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    parser.add_argument("--version", action="version", version=f"ddenorm {__version__}")
    return parser


def configure_logging(verbosity: int, settings: Settings):
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.log_level.upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")


def _complex_list(values: Sequence[complex]) -> List[List[float]]:
    return [[float(complex(v).real), float(complex(v).imag)] for v in values]


class Runner:
    """Executes one command for a validated RunConfig"""

    def __init__(self, command: str, config: RunConfig, storage: LocalStorage, settings: Settings,
                 seed: int, verbose: int = 0):
        self.command = command
        self.config = config
        self.storage = storage
        self.settings = settings
        self.seed = seed
        self.verbose = verbose
        self.model: DelayModel = get_model(config.model)
        config.check(self.model, command)
        self.N = config.analysis.collocation_points or settings.collocation_points
        self.k = config.analysis.rightmost

    # Artifacts

    def meta(self) -> Dict[str, Any]:
        return metadata(
            config=self.config.model_dump(mode="json"),
            seed=self.seed,
            tolerances={"newton_tol": self.settings.newton_tol, "collocation_points": self.N},
            command=self.command,
        )

    def write(self, schema: str, filename: str, document: Dict[str, Any]) -> str:
        document = to_json_value({**document, "metadata": self.meta()})
        schemas.validate(schema, document)
        path = self.storage.save_json(filename, document)
        print(f"✓ Wrote {path}")
        return path

    def write_csv(self, filename: str, frame: pd.DataFrame) -> str:
        path = self.storage.save_csv(filename, frame)
        print(f"✓ Wrote {path}")
        return path

    # Points

    def equilibrium(self) -> Equilibrium:
        cfg = self.config
        eq = correct_equilibrium(self.model, cfg.parameter_vector(self.model), cfg.state(self.model),
                                 tol=self.settings.newton_tol)
        print(f"✓ Equilibrium corrected in {eq.iterations} steps (residual {eq.residual:.2e})")
        return eq

    def _free_for_point(self, what: str) -> int:
        cfg = self.config
        free = cfg.point.free or (cfg.unfolding[0] if cfg.unfolding else None)
        if free is None:
            raise ConfigError(f"correcting a {what} point needs point.free or an unfolding pair")
        return cfg.index(self.model, free)

    def hopf(self, eq: Equilibrium, free: Optional[int] = None) -> HopfPoint:
        cfg = self.config
        omegas = cfg.omegas(self.model)
        hp = hopf_from_equilibrium(self.model, eq, omegas[0] if omegas else None, self.k, self.N)
        if cfg.point.correct:
            free = self._free_for_point("Hopf") if free is None else free
            hp = correct_hopf(self.model, hp, free, seed=self.seed, tol=self.settings.newton_tol)
        hp = with_l1(self.model, hp)
        print(f"✓ Hopf point: omega = {hp.omega:.6g}, L1 = {hp.l1:.6g}")
        return hp

    def fold(self, eq: Equilibrium, free: Optional[int] = None) -> FoldPoint:
        fp = fold_from_equilibrium(self.model, eq, self.k, self.N)
        if self.config.point.correct:
            free = self._free_for_point("fold") if free is None else free
            fp = correct_fold(self.model, fp, free, seed=self.seed, tol=self.settings.newton_tol)
        print("✓ Fold point located")
        return fp

    def codim2(self, base: AnyPoint) -> CodimTwoPoint:
        """Codimension-two point; a Hopf point is treated as a genh point with nonzero L1"""
        cfg = self.config
        unfolding = cfg.unfolding_indices(self.model)
        kind = cfg.point.kind
        if kind in ("hopf", "genh"):
            return classify_codim2(self.model, base, unfolding, expect="genh", l1_tol=cfg.analysis.l1_tol,
                                   k=self.k, N=self.N)
        if cfg.point.correct:
            pt = correct_codim2(self.model, base, kind, unfolding, omegas=cfg.omegas(self.model),
                                N=self.N, seed=self.seed, tol=self.settings.newton_tol)
        else:
            pt = classify_codim2(self.model, base, unfolding, expect=kind, l1_tol=cfg.analysis.l1_tol,
                                 k=self.k, N=self.N)
        print(f"✓ {pt.kind} point at alpha = {np.array2string(pt.equilibrium.alpha, precision=6)}")
        return pt

    def locate(self) -> AnyPoint:
        kind = self.config.point.kind
        eq = self.equilibrium()
        if kind == "equilibrium":
            return eq
        if kind == "fold":
            return self.fold(eq)
        if kind in ("hopf", "genh"):
            return self.hopf(eq)
        return eq

    def point_document(self, point: AnyPoint) -> Dict[str, Any]:
        eq = point if isinstance(point, Equilibrium) else point.equilibrium
        eigs = rightmost(linearize(self.model, eq.x, eq.alpha), self.k, self.N)
        doc: Dict[str, Any] = {
            "model": self.model.name,
            "kind": self.config.point.kind,
            "parameter_names": list(self.model.parameter_names),
            "x": eq.x,
            "alpha": eq.alpha,
            "residual": eq.residual,
            "eigenvalues": _complex_list(e.lam for e in eigs),
            "unfolding": list(self.config.unfolding),
        }
        if isinstance(point, HopfPoint):
            doc["omega"] = point.omega
            doc["L1"] = point.l1
        if isinstance(point, CodimTwoPoint):
            doc["kind"] = point.kind
            doc["omegas"] = list(point.omegas)
            if point.l1 is not None:
                doc["L1"] = point.l1
        return doc

    # Commands

    def analyze(self):
        base = self.locate()
        if self.config.point.kind in ("equilibrium", "fold") or not self.config.unfolding:
            self.write("point", "point.json", self.point_document(base))
            return None
        pt = self.codim2(base)
        self.write("point", "point.json", self.point_document(base if isinstance(base, HopfPoint) else pt))
        print("🔧 Computing normal form coefficients...")
        data = normal_form(self.model, pt)
        self.write(f"nmfm_{'zeho' if data.kind == 'thopf' else data.kind}", "nmfm.json", data.to_dict())
        return data

    def predict(self):
        data = self.analyze()
        if data is None:
            raise ConfigError("predict needs a codimension-two point kind and an unfolding pair")
        print("📈 Evaluating predictors...")
        pset = predictors_for(data, self.config.predict.eps_grid())
        for name, reason in pset.excluded.items():
            print(f"⚠️  {name} excluded: {reason['message']}")
        self.write("predictors", "predictors.json", pset.to_dict(with_profile=self.config.predict.profiles))
        rows = []
        for name, predictor in pset.predictors.items():
            for point in predictor.points:
                if point.cycle is None:
                    continue
                for psi, *state in point.cycle.rows():
                    rows.append([name, point.eps, point.cycle.period, psi, *state])
        columns = ["predictor", "eps", "period", "psi"] + [f"x{i + 1}" for i in range(self.model.n)]
        self.write_csv("cycles.csv", pd.DataFrame(rows, columns=columns))
        return pset

    def _continuation_options(self) -> ContinuationOptions:
        block = self.config.continuation
        return ContinuationOptions(
            steps=block.steps,
            initial_step=block.initial_step,
            min_step=block.min_step,
            max_step=block.max_step,
            newton_tol=self.settings.newton_tol,
            weights=block.weights,
            box=self.config.box(self.model),
            progress=self.verbose > 0,
            seed=self.seed,
            k=self.k,
            N=self.N,
        )

    def _seeds(self, free: List[int]) -> List[AnyPoint]:
        """The configured point and a second one shifted by continuation.seed_offset"""
        cfg, model = self.config, self.model
        problem = cfg.continuation.problem
        offset = {cfg.index(model, name): v for name, v in cfg.continuation.seed_offset.items()}
        if not offset:
            offset = {free[-1]: cfg.continuation.initial_step}
        held = [k for k in free if k not in offset]
        eq = self.equilibrium()
        if problem == "equilibrium":
            alpha = eq.alpha.copy()
            for k, shift in offset.items():
                alpha[k] += shift
            return [eq, correct_equilibrium(model, alpha, eq.x, tol=self.settings.newton_tol)]
        if not held:
            raise ConfigError("seed_offset must leave one free parameter to correct",
                              {"free": [model.parameter_names[k] for k in free]})
        first = self.hopf(eq, held[0]) if problem == "hopf" else self.fold(eq, held[0])
        alpha = first.equilibrium.alpha.copy()
        for k, shift in offset.items():
            alpha[k] += shift
        moved = Equilibrium(first.equilibrium.x.copy(), alpha, first.equilibrium.residual)
        if problem == "hopf":
            second = correct_hopf(model, HopfPoint(moved, first.omega, first.eigenpair), held[0],
                                  seed=self.seed, tol=self.settings.newton_tol)
        else:
            second = correct_fold(model, FoldPoint(moved, first.eigenpair), held[0],
                                  seed=self.seed, tol=self.settings.newton_tol)
        return [first, second]

    def continue_(self):
        cfg = self.config
        block = cfg.continuation
        free = cfg.free_indices(self.model)
        seeds = self._seeds(free)
        options = self._continuation_options()
        print(f"🚀 Continuing {block.problem} branch in {[self.model.parameter_names[k] for k in free]}...")
        runner = continue_both_ways if block.both_directions else continue_branch
        branch = runner(self.model, block.problem, seeds, free, options)
        print(f"✓ {len(branch)} points, stop reason {branch.stop_reason}")
        if block.problem == "hopf" and block.detect:
            detected = detect_special_points(self.model, branch, block.detect, param_tol=block.param_tol,
                                             merge_tol=block.merge_tol)
            for kind, count in sorted(detected.to_dict()["counts"].items()):
                print(f"✓ Detected {count} {kind} point(s)")
        else:
            detected = DetectionResult([], {})
        self.write("branch", "branch.json", branch.to_dict())
        self.write_csv("branch.csv", branch.to_frame())
        self.write("detected", "detected.json", detected.to_dict())
        return branch, detected

    def simulate(self):
        cfg, model = self.config, self.model
        block = cfg.simulation
        alpha = cfg.parameter_vector(model)
        history = np.asarray(block.history if block.history is not None else cfg.state(model), dtype=float)
        if history.size != model.n:
            raise ConfigError("history has wrong length", {"expected": model.n, "got": history.tolist()})
        if block.offset is not None:
            if len(block.offset) != model.n:
                raise ConfigError("history offset has wrong length", {"expected": model.n})
            history = history + np.asarray(block.offset, dtype=float)
        print(f"🚀 Simulating up to t = {block.t_final:g}...")
        traj = simulate(model, alpha, history, block.t_final,
                        SimulationOptions(block.dt_max, block.keep_last, progress=self.verbose > 0))
        summary: Dict[str, Any] = {
            "model": model.name,
            "alpha": alpha,
            "t_final": block.t_final,
            "step": traj.h,
            "stored_points": len(traj.t),
            "terminal_amplitude": terminal_amplitude(traj),
        }
        self.write_csv("traj.csv", traj.to_frame(block.sample_rate))
        section = block.section
        if section is not None:
            if section.component >= model.n:
                raise ConfigError("section component out of range", {"component": section.component})
            crossings = poincare_crossings(traj, section.component, section.level, section.direction)
            summary["crossings"] = len(crossings)
            summary["clusters"] = cluster_count(np.array([c[1] for c in crossings]).reshape(len(crossings), -1),
                                                section.cluster_radius) if crossings else 0
            print(f"✓ {len(crossings)} section crossings in {summary['clusters']} cluster(s)")
        else:
            crossings = []
        self.write_csv("sections.csv", crossings_frame(crossings, model.n))
        self.write("simulation", "simulation.json", summary)
        return traj


def cmd_models(storage: LocalStorage, seed: int):
    listing = list_models()
    for entry in listing:
        print(f"📦 {entry['name']}: {entry['description']}")
        print(f"   parameters: {', '.join(entry['parameters'])}; examples: {', '.join(entry['examples']) or '-'}")
    document = to_json_value({"models": listing, "metadata": metadata(seed=seed, command="models")})
    schemas.validate("models", document)
    storage.save_json("models.json", document)


def _error_document(exc: Exception) -> Dict[str, Any]:
    if isinstance(exc, DDENormError):
        return exc.to_dict()
    if isinstance(exc, ValidationError):
        return {"kind": "ValidationError", "message": str(exc),
                "details": {"errors": json.loads(exc.json(include_url=False))}}
    return {"kind": type(exc).__name__, "message": str(exc), "details": {}}


def run(args: argparse.Namespace, settings: Settings) -> int:
    storage: Optional[LocalStorage] = None
    try:
        if args.command == "models":
            storage = LocalStorage(args.out or "./out")
            cmd_models(storage, args.seed if args.seed is not None else settings.default_seed)
            return EXIT_OK
        if not args.config:
            raise ConfigError(f"'{args.command}' needs --config")
        config = load_config(args.config, args.set)
        storage = LocalStorage(args.out or config.out or "./out")
        seed = args.seed if args.seed is not None else (config.seed if config.seed is not None
                                                         else settings.default_seed)
        print("=" * 60)
        print(f"📦 Model: {config.model} | command: {args.command} | seed: {seed}")
        print(f"📁 Output: {storage.base_dir}")
        print("=" * 60)
        schemas.export_schemas(storage)
        runner = Runner(args.command, config, storage, settings, seed, args.verbose)
        getattr(runner, "continue_" if args.command == "continue" else args.command)()
        print("✓ Done")
        return EXIT_OK
    except (ConfigError, ValidationError) as exc:
        code = EXIT_CONFIG
        error = exc
    except DDENormError as exc:
        code = EXIT_NUMERICAL
        error = exc
    except Exception as exc:
        logger.exception("unexpected failure in %s", args.command)
        code = EXIT_NUMERICAL
        error = exc
    document = _error_document(error)
    print(f"❌ {document['kind']}: {document['message']}", file=sys.stderr)
    storage = storage or LocalStorage(args.out or "./out")
    storage.save_json("error.json", document)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    settings = Settings()
    configure_logging(args.verbose, settings)
    return run(args, settings)


if __name__ == "__main__":
    sys.exit(main())
