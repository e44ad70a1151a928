"""Run configuration: one JSON document validated against a shipped schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from . import _jsonio
from .errors import ConfigError
from .expr import ExprSyntaxError
from .model import Problem, domain_from_dict


@lru_cache(maxsize=1)
def schema():
    text = resources.files("hjb.schema").joinpath("run_config.schema.json").read_text()
    return json.loads(text)


def _tuple(v):
    return None if v is None else tuple(v)


@dataclass(frozen=True)
class ProblemConfig:
    alpha: float
    sigma: float
    domain: dict
    h: object = 0.0
    g: float = 0.0

    def build(self):
        try:
            return Problem(alpha=self.alpha, sigma=self.sigma,
                           domain=domain_from_dict(self.domain), h=self.h, g=self.g)
        except ExprSyntaxError as exc:
            raise ConfigError(f"problem.h: {exc.reason} (at byte {exc.offset})",
                              module="expr") from None

    def to_dict(self):
        return {"alpha": self.alpha, "sigma": self.sigma, "g": self.g, "h": self.h,
                "domain": self.domain}


@dataclass(frozen=True)
class GridConfig:
    nodes: object = 101
    radial_nodes: int = 401

    def to_dict(self):
        n = list(self.nodes) if isinstance(self.nodes, tuple) else self.nodes
        return {"nodes": n, "radial_nodes": self.radial_nodes}


@dataclass(frozen=True)
class SolverConfig:
    eps: float = 1e-8
    max_iters: int = 500
    linear_tol: float = 1e-10
    B: float | None = None
    strict: bool = False
    cross_check: bool = True

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class PolicyConfig:
    type: str
    name: str | None = None
    drift: tuple | None = None
    exprs: tuple | None = None

    def to_dict(self):
        d = {"type": self.type}
        if self.name is not None:
            d["name"] = self.name
        if self.drift is not None:
            d["drift"] = list(self.drift)
        if self.exprs is not None:
            d["exprs"] = list(self.exprs)
        return d


@dataclass(frozen=True)
class MCConfig:
    dt: float = 1e-3
    n_paths: int = 10000
    seed: int = 0
    x0: tuple | None = None
    allowance: float = 0.03
    max_steps: int = 10 ** 6
    compare: tuple = (PolicyConfig("zero"),)

    def to_dict(self):
        return {"dt": self.dt, "n_paths": self.n_paths, "seed": self.seed,
                "x0": None if self.x0 is None else list(self.x0),
                "allowance": self.allowance, "max_steps": self.max_steps,
                "compare": [p.to_dict() for p in self.compare]}


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "hjb_out"
    field_csv: str | None = "field.csv"
    convergence_csv: str | None = "convergence.csv"
    profile_csv: str | None = "profile.csv"
    summary_json: str | None = "summary.json"
    report_json: str | None = "report.json"

    def path(self, name):
        value = getattr(self, name)
        if value is None:
            return None
        return Path(self.dir) / value

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemConfig
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    mc: MCConfig | None = None
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_dict(cls, data):
        try:
            jsonschema.validate(data, schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"{where}: {exc.message}", module="config") from None
        p = data["problem"]
        problem = ProblemConfig(alpha=float(p["alpha"]), sigma=float(p["sigma"]),
                                domain=_normalize_domain(p["domain"]),
                                h=p.get("h", 0.0), g=float(p.get("g", 0.0)))
        g = data.get("grid", {})
        nodes = g.get("nodes", GridConfig.nodes)
        grid = GridConfig(nodes=tuple(nodes) if isinstance(nodes, list) else nodes,
                          radial_nodes=g.get("radial_nodes", GridConfig.radial_nodes))
        s = data.get("solver", {})
        solver = SolverConfig(**{k: s[k] for k in s})
        mc = None
        if "mc" in data:
            m = dict(data["mc"])
            if "x0" in m:
                m["x0"] = _tuple(m["x0"])
            if "compare" in m:
                m["compare"] = tuple(PolicyConfig(type=c["type"], name=c.get("name"),
                                                  drift=_tuple(c.get("drift")),
                                                  exprs=_tuple(c.get("exprs")))
                                     for c in m["compare"])
            mc = MCConfig(**m)
        output = OutputConfig(**data.get("output", {}))
        return cls(problem=problem, grid=grid, solver=solver, mc=mc, output=output)

    def to_dict(self):
        d = {"problem": self.problem.to_dict(), "grid": self.grid.to_dict(),
             "solver": self.solver.to_dict()}
        if self.mc is not None:
            d["mc"] = self.mc.to_dict()
        d["output"] = self.output.to_dict()
        return d

    def to_json(self):
        return _jsonio.dumps(self.to_dict())

    def with_overrides(self, eps=None, seed=None, nodes=None, out_dir=None):
        cfg = self
        if eps is not None:
            if not eps > 0:
                raise ConfigError("--eps must be positive", module="config")
            cfg = replace(cfg, solver=replace(cfg.solver, eps=float(eps)))
        if nodes is not None:
            if nodes < 3:
                raise ConfigError("--nodes must be at least 3", module="config")
            cfg = replace(cfg, grid=replace(cfg.grid, nodes=int(nodes), radial_nodes=int(nodes)))
        if seed is not None:
            if seed < 0:
                raise ConfigError("--seed must be non-negative", module="config")
            cfg = replace(cfg, mc=replace(cfg.mc or MCConfig(), seed=int(seed)))
        if out_dir is not None:
            cfg = replace(cfg, output=replace(cfg.output, dir=str(out_dir)))
        return cfg


def _normalize_domain(d):
    kind = d["type"]
    if kind == "interval":
        return {"type": kind, "a": float(d["a"]), "b": float(d["b"])}
    if kind == "rectangle":
        return {"type": kind, "lo": [float(v) for v in d["lo"]],
                "hi": [float(v) for v in d["hi"]]}
    return {"type": kind, "center": [float(v) for v in d["center"]],
            "radius": float(d["radius"])}


def load(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", module="config") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
                          f"{exc.msg}", module="config") from None
    return RunConfig.from_dict(data)
