"""Scenario files, sweep execution, CSV tables and SVG plots.

A scenario is a small TOML file::

    system = "gg11"                 # gg11 | gg12star | zero-wait
    arrival = "deterministic(1)"    # shape of the arrival law; rescaled to each lambda
    service = "exp(1)"
    sweep = "lambda"                # lambda | d
    values = [0.3, 0.4, 0.5]
    d = 5                           # fixed age limit for a lambda sweep
    lambda = 0.45                   # fixed arrival rate for a d sweep
    n_peaks = 1000000
    replications = 5
    seed = 1
    nu_hat = "exact"                # exact | min-rate | <number>
    bound_samples = 1000000
"""

from __future__ import annotations

import csv
import io
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import analytic
from .bounds import BoundConfig, eta, gamma_star_lower_bound, phi1_curve, phi2_curve
from .dists import Deterministic, Erlang, Exponential, RngStream, parse_distribution, with_rate
from .oracle import time_above, trajectory_from_log
from .sample_path import Discipline, SystemSpec, departure_rate, simulate, violation_estimate

COLUMNS = ("sweep_value", "sim_p", "stderr", "analytic_p", "phi", "lower_bound",
           "eta", "nu_hat_eta", "oracle_p", "status")

DEFAULT_PEAKS = 1_000_000
DEFAULT_REPLICATIONS = 5
DEFAULT_BOUND_SAMPLES = 1_000_000


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    system: SystemSpec
    sweep: str  # "lambda" | "d"
    values: tuple[float, ...]
    d: float | None = None
    lam: float | None = None
    n_peaks: int = DEFAULT_PEAKS
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    nu_hat: str | float = "min-rate"
    bound_samples: int = DEFAULT_BOUND_SAMPLES
    warmup: int = 100

    def __post_init__(self):
        if self.sweep not in ("lambda", "d"):
            raise ScenarioError(f"sweep must be 'lambda' or 'd', got {self.sweep!r}")
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ScenarioError("sweep values must not be empty")
        if any(v <= 0 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ScenarioError("sweep values must be positive and strictly increasing")
        if self.sweep == "lambda":
            if self.d is None or self.d < 0:
                raise ScenarioError("a lambda sweep needs a fixed non-negative d")
            if self.system.discipline is Discipline.ZERO_WAIT:
                raise ScenarioError("a zero-wait system has no arrival rate to sweep")
        if self.n_peaks < 2 or self.replications < 1 or self.bound_samples < 2:
            raise ScenarioError("n_peaks >= 2, replications >= 1 and bound_samples >= 2 required")
        if isinstance(self.nu_hat, str) and self.nu_hat not in ("exact", "min-rate"):
            raise ScenarioError(f"nu_hat must be 'exact', 'min-rate' or a number, got {self.nu_hat!r}")
        if self.nu_hat == "exact" and self.system.discipline is not Discipline.ZERO_WAIT:
            if _idle_model(self.system) is None or self.system.discipline is not Discipline.GG11:
                raise ScenarioError("exact nu_hat is known only for GI/GI/1/1 with Poisson or periodic arrivals")

    def points(self) -> list[tuple[float, float]]:
        """``(lambda, d)`` for every sweep value."""
        if self.sweep == "lambda":
            return [(v, self.d) for v in self.values]
        lam = self.lam if self.lam is not None else self.system.arrival_rate
        return [(lam, v) for v in self.values]

    def system_at(self, lam: float) -> SystemSpec:
        if self.system.arrival is None:
            return self.system
        return replace(self.system, arrival=with_rate(self.system.arrival, lam))


def _line_of(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), start=1):
        if re.match(rf"\s*{re.escape(key)}\s*=", line):
            return i
    return None


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{source}: {exc}") from None

    def fail(key, msg):
        line = _line_of(text, key)
        where = f"{source}:{line}" if line else source
        raise ScenarioError(f"{where}: {key}: {msg}")

    known = {"system", "arrival", "service", "sweep", "values", "d", "lambda", "n_peaks",
             "replications", "seed", "nu_hat", "bound_samples", "warmup", "name"}
    for key in raw:
        if key not in known:
            fail(key, "unknown key")
    for key in ("system", "service", "sweep", "values"):
        if key not in raw:
            raise ScenarioError(f"{source}: missing required key {key!r}")

    def dist(key):
        try:
            return parse_distribution(str(raw[key]))
        except ValueError as exc:
            fail(key, exc)

    try:
        discipline = Discipline.parse(str(raw["system"]))
    except ValueError as exc:
        fail("system", exc)
    arrival = dist("arrival") if "arrival" in raw else None
    try:
        system = SystemSpec(discipline, dist("service"), arrival)
    except ValueError as exc:
        fail("arrival" if "arrival" in raw else "system", exc)

    nu_hat = raw.get("nu_hat", "min-rate")
    if isinstance(nu_hat, str) and nu_hat not in ("exact", "min-rate"):
        try:
            nu_hat = float(nu_hat)
        except ValueError:
            fail("nu_hat", f"expected exact, min-rate or a number, got {nu_hat!r}")
    if isinstance(nu_hat, (int, float)) and not nu_hat > 0:
        fail("nu_hat", "must be positive")
    if not isinstance(raw["values"], list):
        fail("values", "expected a list")
    try:
        return Scenario(
            system=system,
            sweep=str(raw["sweep"]),
            values=tuple(raw["values"]),
            d=None if "d" not in raw else float(raw["d"]),
            lam=None if "lambda" not in raw else float(raw["lambda"]),
            n_peaks=int(raw.get("n_peaks", DEFAULT_PEAKS)),
            replications=int(raw.get("replications", DEFAULT_REPLICATIONS)),
            seed=int(raw.get("seed", 0)),
            nu_hat=nu_hat,
            bound_samples=int(raw.get("bound_samples", DEFAULT_BOUND_SAMPLES)),
            warmup=int(raw.get("warmup", 100)),
        )
    except (ScenarioError, TypeError, ValueError) as exc:
        key = next((k for k in ("values", "sweep", "d", "n_peaks", "nu_hat") if k in str(exc)), "sweep")
        fail(key, exc)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), str(path))


# ------------------------------------------------------------------- running


def _idle_model(system: SystemSpec) -> str | None:
    if isinstance(system.arrival, Exponential):
        return analytic.EXP_IDLE
    if isinstance(system.arrival, Deterministic):
        return analytic.CEIL_IDLE
    return None


def _exists(system: SystemSpec, lam: float, d: float) -> bool:
    return not (isinstance(system.arrival, Deterministic) and lam * d < 1.0 - 1e-12)


def _analytic(system: SystemSpec, lam: float, d: float) -> float | None:
    mu = system.service_rate
    if system.discipline is Discipline.ZERO_WAIT:
        if isinstance(system.service, Exponential):
            return analytic.zero_wait_exp_violation(mu, d).value
        return None
    if system.discipline is not Discipline.GG11:
        return None
    model = _idle_model(system)
    if model is None:
        return None
    if isinstance(system.service, Exponential):
        if model == analytic.EXP_IDLE:
            return analytic.mm11_violation(lam, mu, d).value
        return analytic.dm11_violation(lam, mu, d).value
    return analytic.general_violation(lam, system.service, model, d).value


def _exact_nu(system: SystemSpec, lam: float) -> float | None:
    if system.discipline is Discipline.ZERO_WAIT:
        return system.service_rate
    model = _idle_model(system)
    if system.discipline is Discipline.GG11 and model is not None:
        return analytic.departure_rate(lam, system.service, model)
    return None


def _seed(scenario: Scenario, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=scenario.seed, spawn_key=key)


def _replicate(args):
    """One simulated path evaluated at every age limit of a sweep group."""
    scenario, group, lam, ds, rep = args
    system = scenario.system_at(lam)
    path = simulate(system, scenario.n_peaks, RngStream(_seed(scenario, group, rep)), warmup=scenario.warmup)
    traj = trajectory_from_log(path.event_log(), start=path.horizon_start, end=path.horizon_end)
    lower = None if system.discipline is Discipline.ZERO_WAIT else gamma_star_lower_bound(path)
    out = []
    for d in ds:
        est = violation_estimate(path, d)
        out.append({
            "sim_p": est.value, "se": est.std_error,
            "oracle_p": time_above(traj, d),
            "lower_bound": None if lower is None else lower(d).value,
        })
    return out, departure_rate(path)


def _bound(args):
    scenario, group, lam, ds, nu_hat, nu = args
    system = scenario.system_at(lam)
    if system.discipline is Discipline.ZERO_WAIT:
        return [None] * len(ds)
    state = _seed(scenario, group, 1_000_003).generate_state(1, np.uint64)[0]
    cfg = BoundConfig.user(nu_hat, n_samples=scenario.bound_samples, seed=int(state))
    curve = phi1_curve if system.discipline is Discipline.GG11 else phi2_curve
    return [r.phi for r in curve(system.arrival, system.service, ds, cfg, nu=nu)]


@dataclass(frozen=True)
class ResultTable:
    sweep: str
    rows: tuple[dict, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in COLUMNS])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        path = Path(path)
        try:
            path.write_text(self.to_csv())
        except OSError as exc:
            raise OSError(f"cannot write CSV {path}: {exc}") from exc


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return f"{v:.9g}"


def run(scenario: Scenario, workers: int = 1) -> ResultTable:
    """Simulate, bound and evaluate every sweep point.

    Rows come back in sweep order whatever ``workers`` is; each path and
    bound sample is seeded from ``(seed, group, replication)`` so results do
    not depend on scheduling.
    """
    pts = scenario.points()
    system = scenario.system
    # a d sweep shares its paths across age limits; a lambda sweep does not
    if scenario.sweep == "d":
        groups = [(pts[0][0], [i for i, _ in enumerate(pts)])]
    else:
        groups = [(lam, [i]) for i, (lam, _) in enumerate(pts)]

    rows: list[dict | None] = [None] * len(pts)
    sim_tasks, bound_tasks, meta = [], [], []
    for g, (lam, idx) in enumerate(groups):
        sys_l = scenario.system_at(lam)
        live = [i for i in idx if _exists(sys_l, lam, pts[i][1])]
        for i in idx:
            if i not in live:
                rows[i] = dict.fromkeys(COLUMNS) | {"sweep_value": scenario.values[i], "status": "nonexistent"}
        if not live:
            continue
        ds = [pts[i][1] for i in live]
        nu = _exact_nu(sys_l, lam)
        mu = sys_l.service_rate
        if scenario.nu_hat == "exact":
            nu_hat = nu
        elif scenario.nu_hat == "min-rate":
            nu_hat = min(lam, mu)
        else:
            nu_hat = float(scenario.nu_hat)
        meta.append((g, lam, live, ds, nu, nu_hat))
        sim_tasks += [(scenario, g, lam, ds, r) for r in range(scenario.replications)]
        bound_tasks.append((scenario, g, lam, ds, nu_hat, nu if nu is not None else nu_hat))

    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            sims = list(pool.map(_replicate, sim_tasks))
            bounds = list(pool.map(_bound, bound_tasks))
    else:
        sims = [_replicate(t) for t in sim_tasks]
        bounds = [_bound(t) for t in bound_tasks]

    R = scenario.replications
    for k, (g, lam, live, ds, nu, nu_hat) in enumerate(meta):
        reps = sims[k * R:(k + 1) * R]
        sys_l = scenario.system_at(lam)
        nu_eff = nu if nu is not None else float(np.mean([rate for _, rate in reps]))
        if sys_l.discipline is Discipline.ZERO_WAIT:
            eta_v = nu_hat_eta = None
        else:
            eta_v = eta(lam, sys_l.service_rate, nu_eff)
            nu_hat_eta = nu_hat * eta_v
        for j, i in enumerate(live):
            evals = [rep[0][j] for rep in reps]
            lows = [e["lower_bound"] for e in evals]
            rows[i] = {
                "sweep_value": scenario.values[i],
                "sim_p": float(np.mean([e["sim_p"] for e in evals])),
                "stderr": math.sqrt(sum(e["se"] ** 2 for e in evals)) / R,
                "analytic_p": _analytic(sys_l, lam, ds[j]),
                "phi": bounds[k][j],
                "lower_bound": None if lows[0] is None else float(np.mean(lows)),
                "eta": eta_v,
                "nu_hat_eta": nu_hat_eta,
                "oracle_p": float(np.mean([e["oracle_p"] for e in evals])),
                "status": "ok",
            }
    return ResultTable(scenario.sweep, tuple(rows))


# ------------------------------------------------------------------ plotting


def plot(table: ResultTable, path: str | Path) -> list[str]:
    """Log-scale violation curve against the sweep variable with the bound
    overlaid; returns the series labels drawn."""
    rows = [r for r in table.rows if r["status"] == "ok"]
    if not rows:
        raise ValueError("cannot plot an empty table")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = [r["sweep_value"] for r in rows]
    series = []
    if any(r["analytic_p"] is not None for r in rows):
        series.append(("exact", "analytic_p", "-", "o"))
    else:
        series.append(("simulated", "sim_p", "-", "o"))
    if any(r["phi"] is not None for r in rows):
        series.append(("phi", "phi", "--", "s"))

    with matplotlib.rc_context({"svg.hashsalt": "aoiviol", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.6))
        for label, key, ls, marker in series:
            pts = [(xi, r[key]) for xi, r in zip(x, rows) if r[key] is not None and r[key] > 0]
            if pts:
                xs, ys = zip(*pts)
                ax.plot(xs, ys, ls, marker=marker, label=label, gid=f"series-{label}")
        ax.set_yscale("log")
        ax.set_xlabel("arrival rate" if table.sweep == "lambda" else "age limit d")
        ax.set_ylabel("P(age > d)")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = Path(path)
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OSError(f"cannot write plot {path}: {exc}") from exc
        finally:
            plt.close(fig)
    return [s[0] for s in series]
