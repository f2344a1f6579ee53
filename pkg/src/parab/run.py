"""Run configurations and the solve/prove drivers behind the command line."""

import logging
import os
import platform
import time
from fractions import Fraction
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .errors import ConfigError
from .interval import up_mul
from .grid import TARGET_Z, optimize_grid, select_orders
from .pipeline import prove
from .problem import PRESETS, preset
from .solver import integrate_numeric, relax

log = logging.getLogger(__name__)

# physical defaults per preset (desk-scale runs)
DEFAULTS = {
    "heat": dict(tau=1.0, M=4, N_u=4, K=18),
    "swift_hohenberg": dict(tau=0.5, M=20, N_u=24, K=5),
    "ohta_kawasaki": dict(t_start=20.0, tau=30.0, M=20, N_u=32, K=12, to_infinity=True),
    "kuramoto_sivashinsky": dict(tau=None, M=40, N_u=24, K="auto", grid="adaptive"),
}


def preset_name(name):
    key = str(name).strip().lower().replace("-", "_")
    if key not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return key


_FALLBACK = dict(t_start=0.0, to_infinity=False, grid="uniform")


@dataclass
class RunConfig:
    """One run; None fields take the preset default, then a global one."""

    preset: str = "swift_hohenberg"
    params: dict = field(default_factory=dict)
    nu: float = 1.05
    N_u: int = None
    N_L: int = None
    M: int = None
    K: object = None              # int or "auto"
    tau: float = None             # physical end time of the finite part
    t_start: float = None         # physical start, reached by relaxing the initial data numerically
    to_infinity: bool = None
    grid: str = None              # "uniform" or "adaptive"
    y_threshold: float = 1e-10
    z_target: float = TARGET_Z
    relax_steps: int = 4000
    r_star: float = 1e-4
    maximize_r: bool = False
    threads: int = None

    def __post_init__(self):
        self.preset = preset_name(self.preset)
        self.params = {str(k): str(v) for k, v in self.params.items()}
        for k, v in {**_FALLBACK, **DEFAULTS[self.preset]}.items():
            if getattr(self, k) is None:
                setattr(self, k, v)
        if self.tau is None and self.preset == "kuramoto_sivashinsky":
            self.tau = 2.245 / float(Fraction(self.params.get("alpha", "0.127")))
        if self.threads is None:
            try:
                self.threads = int(os.environ.get("PARAB_THREADS") or 1)
            except ValueError:
                raise ConfigError("PARAB_THREADS must be an integer") from None
        self.N_L = self.N_u if self.N_L is None else int(self.N_L)
        if self.K != "auto":
            self.K = int(self.K)
        if self.grid not in ("uniform", "adaptive"):
            raise ConfigError("grid must be 'uniform' or 'adaptive'")
        if self.grid == "uniform" and self.K == "auto":
            raise ConfigError("K = auto needs the adaptive grid")
        if not (self.tau > self.t_start >= 0):
            raise ConfigError("need tau > t_start >= 0")
        if self.M < 1 or self.N_u < 1 or not 1 <= self.N_L <= self.N_u:
            raise ConfigError("need M >= 1 and 1 <= N_L <= N_u")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_parser(cls, cp, **overrides):
        """From a ConfigParser with [problem], [solver] and [proof] sections."""
        kw = {}
        if cp.has_section("problem"):
            sec = dict(cp["problem"])
            kw["preset"] = sec.pop("preset", "swift_hohenberg")
            if "nu" in sec:
                kw["nu"] = sec.pop("nu")
            kw["params"] = sec
        for name in ("solver", "proof"):
            if cp.has_section(name):
                kw.update(dict(cp[name]))
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**_coerce(kw))


_TYPES = {"nu": float, "N_u": int, "N_L": int, "M": int, "tau": float, "t_start": float, "y_threshold": float,
          "z_target": float, "relax_steps": int, "r_star": float, "threads": int}
_BOOLS = ("to_infinity", "maximize_r")
_ALIASES = {"n_u": "N_u", "nu_modes": "N_u", "n_l": "N_L", "nl": "N_L", "m": "M", "k": "K"}


def _coerce(kw):
    out = {}
    names = {f.name for f in fields(RunConfig)}
    for k, v in kw.items():
        key = k if k in names else _ALIASES.get(k.lower(), k)
        if key not in names:
            raise ConfigError(f"unknown setting {k!r}")
        try:
            if key in _TYPES and isinstance(v, str):
                v = _TYPES[key](v)
            elif key in _BOOLS and isinstance(v, str):
                v = v.strip().lower() in ("1", "true", "yes", "on")
            elif key == "K" and isinstance(v, str) and v.strip().lower() != "auto":
                v = int(v)
        except ValueError:
            raise ConfigError(f"cannot parse {k} = {v!r}") from None
        out[key] = v.strip().lower() if key == "K" and isinstance(v, str) else v
    return out


def build_problem(cfg):
    return preset(cfg.preset, nu=cfg.nu, **cfg.params)


def solve(cfg):
    """Approximate solution for a run configuration; returns (problem, sol, manifest)."""
    clock = time.perf_counter()
    p, u0 = build_problem(cfg)
    scale = float(p.time_scale.mid())
    t0, t1 = cfg.t_start * scale, cfg.tau * scale
    start = None
    if cfg.t_start > 0:
        start = relax(p, u0, t0, cfg.N_u, cfg.relax_steps)
    plan = None
    if cfg.grid == "adaptive":
        plan = optimize_grid(p, u0, t1, cfg.M, N=cfg.N_u, nu=cfg.nu, target=cfg.z_target, t_start=t0,
                             start=start)
        if cfg.K == "auto":
            plan = select_orders(plan, p, u0, cfg.y_threshold, N=cfg.N_u, nu=cfg.nu, start=start)
        else:
            plan.orders = [cfg.K] * plan.M
        grid, orders = list(plan.grid), list(plan.orders)
    else:
        grid, orders = list(np.linspace(t0, t1, cfg.M + 1)), cfg.K
    if cfg.to_infinity:
        grid.append(np.inf)
    sol = integrate_numeric(p, u0, grid, cfg.N_u, orders, nu=cfg.nu, start=start)
    manifest = {"tool": "parab", "version": __version__, "config": cfg.to_dict(),
                "plan": plan.to_dict() if plan else None, "relaxed_start": start is not None,
                "solve_seconds": round(time.perf_counter() - clock, 3), "threads": cfg.threads,
                "python": platform.python_version(), "numpy": np.__version__}
    return p, sol, manifest


def prove_solution(sol, N_L=None, r_star=1e-4, maximize=False, threads=1, gap=True):
    """Certificate plus the physical-units error factor of the problem."""
    cert, bounds = prove(sol.problem, sol, N_L=N_L, r_star=r_star, maximize=maximize, gap=gap,
                         threads=threads)
    cert.meta["threads"] = threads
    return cert, bounds


def physical_error(problem, internal):
    """Bound on the physical-variable error from an internal one."""
    return float(up_mul(float(internal), float(np.max(problem.amplitude.mag()))))
