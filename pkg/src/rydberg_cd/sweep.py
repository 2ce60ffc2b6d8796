"""Parameter scans over gate configurations and local pulse optimisation."""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .gate import ProtocolConfig, cz_phase_defect, prepare_bell, run_cz, two_phi01_minus_phi11
from .units import unit_factor


def _phase_obs(fn):
    return lambda cfg: fn(run_cz(cfg, with_decay=False))


OBSERVABLES: dict[str, Callable[[ProtocolConfig], float]] = {
    "bell_fidelity": lambda cfg: prepare_bell(cfg).fidelity,
    "bell_infidelity": lambda cfg: 1.0 - prepare_bell(cfg).fidelity,
    "phi01": _phase_obs(lambda run: run.phi01),
    "phi11": _phase_obs(lambda run: run.phi11),
    "two_phi01_minus_phi11": _phase_obs(two_phi01_minus_phi11),
    "cz_phase_defect": _phase_obs(cz_phase_defect),
}


def evaluate(config: ProtocolConfig, observable: str) -> float:
    try:
        fn = OBSERVABLES[observable]
    except KeyError:
        raise ValueError(f"unknown observable {observable!r}; choose from {sorted(OBSERVABLES)}") from None
    return float(fn(config))


@dataclass(frozen=True)
class Axis:
    """One scanned parameter.  ``values`` are in ``unit``; the config receives internal units."""

    path: str
    values: tuple
    unit: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError(f"axis {self.path!r} has no values")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"axis {self.path!r} has non-finite values")

    @classmethod
    def linspace(cls, path, start, stop, num, unit=None):
        return cls(path, tuple(np.linspace(start, stop, int(num))), unit)

    def internal(self, value: float) -> float:
        return value * (unit_factor(self.unit) if self.unit else 1.0)

    @property
    def column(self) -> str:
        return f"{self.path} [{self.unit}]" if self.unit else self.path


@dataclass(frozen=True)
class SweepSpec:
    base: ProtocolConfig
    axes: tuple
    observable: str = "bell_fidelity"
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("a sweep needs at least one axis")
        if self.observable not in OBSERVABLES:
            raise ValueError(f"unknown observable {self.observable!r}")

    def points(self) -> list[tuple]:
        return list(itertools.product(*(ax.values for ax in self.axes)))

    def config_at(self, point) -> ProtocolConfig:
        cfg = self.base
        for ax, v in zip(self.axes, point):
            cfg = cfg.set(ax.path, ax.internal(v))
        return cfg


@dataclass
class SweepResult:
    columns: list  # axis column names
    observable: str
    points: list  # tuples of axis values (axis units)
    values: list  # observable per point, nan on failure
    errors: list  # error string or ""
    metadata: dict = field(default_factory=dict)

    def rows(self):
        for pt, val, err in zip(self.points, self.values, self.errors):
            yield list(pt) + [val, err]

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns + [self.observable, "error"])
            for row in self.rows():
                w.writerow([repr(float(x)) for x in row[:-1]] + [row[-1]])
        return path

    @classmethod
    def from_csv(cls, path):
        with Path(path).open(newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            pts, vals, errs = [], [], []
            for row in r:
                pts.append(tuple(float(x) for x in row[: len(header) - 2]))
                vals.append(float(row[-2]))
                errs.append(row[-1])
        return cls(header[:-2], header[-2], pts, vals, errs)

    def to_json(self, path=None):
        doc = {
            "columns": self.columns,
            "observable": self.observable,
            "points": [list(p) for p in self.points],
            "values": [None if math.isnan(v) else v for v in self.values],
            "errors": self.errors,
            "metadata": self.metadata,
        }
        text = json.dumps(doc, indent=1)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source):
        text = Path(source).read_text() if isinstance(source, Path) or str(source).endswith(".json") else source
        doc = json.loads(text)
        vals = [float("nan") if v is None else v for v in doc["values"]]
        pts = [tuple(p) for p in doc["points"]]
        return cls(doc["columns"], doc["observable"], pts, vals, doc["errors"], doc.get("metadata", {}))

    def grid(self):
        """(x values, y values, matrix[i_x, i_y]) for two-axis sweeps."""
        if len(self.columns) != 2:
            raise ValueError("grid() needs exactly two axes")
        xs = sorted({p[0] for p in self.points})
        ys = sorted({p[1] for p in self.points})
        mat = np.full((len(xs), len(ys)), np.nan)
        for (x, y), v in zip(self.points, self.values):
            mat[xs.index(x), ys.index(y)] = v
        return np.array(xs), np.array(ys), mat

    def write_grid(self, path):
        xs, ys, mat = self.grid()
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"{self.columns[0]} \\ {self.columns[1]}"] + [repr(float(y)) for y in ys])
            for x, row in zip(xs, mat):
                w.writerow([repr(float(x))] + [repr(float(v)) for v in row])
        return Path(path)


def _evaluate_point(args):
    spec, point = args
    try:
        return evaluate(spec.config_at(point), spec.observable), ""
    except Exception as exc:  # isolate per-point failures
        return float("nan"), f"{type(exc).__name__}: {exc}"


def run_sweep(spec: SweepSpec, jobs: int | None = None) -> SweepResult:
    """Evaluate the observable on the full grid, in grid order regardless of completion order."""
    jobs = spec.jobs if jobs is None else jobs
    points = spec.points()
    work = [(spec, p) for p in points]
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_point, work))
    else:
        results = [_evaluate_point(w) for w in work]
    return SweepResult(
        columns=[ax.column for ax in spec.axes],
        observable=spec.observable,
        points=points,
        values=[r[0] for r in results],
        errors=[r[1] for r in results],
        metadata={"axes": [{"path": ax.path, "unit": ax.unit} for ax in spec.axes]},
    )


# ---------------------------------------------------------------------------
# optimisation


@dataclass(frozen=True)
class FreeParam:
    path: str
    lower: float
    upper: float
    initial: float
    unit: str | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper) and self.lower < self.upper):
            raise ValueError(f"bounds of {self.path!r} must be finite with lower < upper")
        if not self.lower <= self.initial <= self.upper:
            raise ValueError(f"initial value of {self.path!r} lies outside its bounds")

    @property
    def factor(self) -> float:
        return unit_factor(self.unit) if self.unit else 1.0


@dataclass(frozen=True)
class OptimizerSpec:
    """Bounded Nelder-Mead over a few config parameters.

    ``objective`` is an observable name or a callable on configs; by default
    it is the Bell infidelity with decay switched off.  ``initial_simplex_scale``
    is a fraction of each parameter's bound range.
    """

    base: ProtocolConfig
    params: tuple
    objective: object = "bell_infidelity"
    zero_decay: bool = True
    initial_simplex_scale: float = 0.1
    max_evals: int = 200
    fatol: float = 1e-9
    xatol: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if not self.params:
            raise ValueError("nothing to optimise")


@dataclass
class OptimizeResult:
    best: dict  # path -> value in the parameter's unit
    best_value: float
    n_evals: int
    trace: list  # (values in units, objective)
    converged: bool
    message: str

    def to_dict(self):
        return {
            "best": self.best,
            "best_value": self.best_value,
            "n_evals": self.n_evals,
            "converged": self.converged,
            "message": self.message,
            "trace": [{"x": list(x), "f": f} for x, f in self.trace],
        }


def optimize(spec: OptimizerSpec) -> OptimizeResult:
    params = spec.params
    lo = np.array([p.lower for p in params])
    hi = np.array([p.upper for p in params])
    span = hi - lo
    x0 = (np.array([p.initial for p in params]) - lo) / span
    base = spec.base.set("decay", ()) if spec.zero_decay else spec.base
    objective = spec.objective if callable(spec.objective) else (lambda cfg: evaluate(cfg, spec.objective))
    trace = []

    def f(u):
        u = np.clip(u, 0.0, 1.0)
        x = lo + u * span
        cfg = base
        for p, v in zip(params, x):
            cfg = cfg.set(p.path, float(v) * p.factor)
        try:
            val = float(objective(cfg))
        except Exception:
            val = math.inf
        trace.append((tuple(float(v) for v in x), val))
        return val

    simplex = [x0]
    for i in range(len(params)):
        step = np.zeros(len(params))
        step[i] = spec.initial_simplex_scale
        cand = x0 + step
        simplex.append(cand if cand[i] <= 1.0 else x0 - step)
    res = minimize(
        f,
        x0,
        method="Nelder-Mead",
        bounds=[(0.0, 1.0)] * len(params),
        options={
            "initial_simplex": np.array(simplex),
            "maxfev": spec.max_evals,
            "fatol": spec.fatol,
            "xatol": spec.xatol,
        },
    )
    best_i = int(np.argmin([v for _, v in trace]))
    best_x, best_val = trace[best_i]
    return OptimizeResult(
        best={p.path: v for p, v in zip(params, best_x)},
        best_value=best_val,
        n_evals=len(trace),
        trace=trace,
        converged=bool(res.success),
        message=str(res.message),
    )
