"""Command-line front end: analytic, simulation, sweep and validation runs.

Configuration files are flat ``key = value`` text with ``#`` comments. Keys
are the :class:`~plprelay.model.ModelParams` fields (``threshold`` linear or
``threshold_db``), ``r1`` and the simulation/quadrature settings listed in
``SETTING_KEYS``. Output is CSV with a fixed header per mode.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys
from dataclasses import dataclass, field, fields
from importlib import resources

from .coverage import CoverageError, relay_coverage, scenario_a_coverage
from .model import ModelParams, db_to_linear
from .montecarlo import McConfig, McError, mc_relay, mc_scenario_a, simulate
from .quadrature import IntegrationError, QuadratureSpec

__all__ = [
    "ConfigError",
    "RunSpec",
    "Sweep",
    "parse_config",
    "load_config",
    "sweep_values",
    "render_rows",
    "run",
    "main",
]

MODES = ("analytic", "mc", "validate", "sweep")
SWEEP_VARS = ("threshold_db", "lambda_ru", "rho", "r1")
PARAM_KEYS = tuple(f.name for f in fields(ModelParams))
MC_KEYS = {"drops": int, "seed": int, "window_radius": float, "batch": int, "workers": int}
QUAD_KEYS = {"rel_tol": float, "abs_tol": float, "n_max": int, "series_tail_tol": float}
SETTING_KEYS = ("r1", "threshold_db", *MC_KEYS, *QUAD_KEYS)

ANALYTIC_COLUMNS = ["coverage_a", "coverage_a_err", "xi1", "xi2", "xi3", "relay", "relay_err"]
MC_COLUMNS = [
    "coverage_a_mc",
    "coverage_a_ci",
    "p_joint_b_not_a",
    "p_joint_b_not_a_ci",
    "p_not_a",
    "p_not_a_ci",
    "p_rel",
    "p_rel_ci",
    "relay_mc",
    "relay_mc_ci",
]
VALIDATE_COLUMNS = ["criterion", "check", "status", "value", "reference", "tolerance", "detail"]
ROW_ERRORS = (CoverageError, IntegrationError, McError, ArithmeticError, ValueError)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Sweep:
    var: str
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.var not in SWEEP_VARS:
            raise ValueError(f"sweep variable must be one of {', '.join(SWEEP_VARS)}")
        if self.step == 0 or not all(math.isfinite(v) for v in (self.start, self.stop, self.step)):
            raise ValueError("sweep step must be finite and nonzero")
        if (self.stop - self.start) * self.step < 0:
            raise ValueError("sweep range is empty: step points away from stop")

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError("sweep must look like VAR:FROM:TO:STEP")
        try:
            nums = [float(v) for v in parts[1:]]
        except ValueError:
            raise ValueError(f"sweep bounds must be numbers: {text!r}") from None
        return cls(parts[0], *nums)


@dataclass(frozen=True)
class RunSpec:
    """What to run and with which numerical settings."""

    mode: str = "analytic"
    sweep: Sweep | None = None
    out: str | None = None
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    mc: McConfig = field(default_factory=McConfig)
    r1: float = 0.1
    quiet: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        if self.mode == "sweep" and self.sweep is None:
            raise ValueError("sweep mode needs --sweep VAR:FROM:TO:STEP")
        if not self.r1 > 0:
            raise ValueError("r1 must be > 0")


def sweep_values(sweep: Sweep) -> list[float]:
    """Grid from start to stop inclusive (up to rounding) in steps of ``step``."""
    n = int(math.floor((sweep.stop - sweep.start) / sweep.step + 1e-9)) + 1
    return [round(sweep.start + k * sweep.step, 12) for k in range(n)]


# ---------------------------------------------------------------------------
# configuration


def parse_config(text: str, source: str = "<config>"):
    """Parse flat config text into ``(ModelParams, settings)``.

    Errors name ``source`` and the offending line number.
    """
    values: dict[str, tuple[float, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in PARAM_KEYS and key not in SETTING_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first on line {values[key][1]})")
        try:
            num = float(val)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: value of {key!r} is not a number: {val!r}") from None
        if not math.isfinite(num):
            raise ConfigError(f"{source}:{lineno}: value of {key!r} must be finite")
        if {**MC_KEYS, **QUAD_KEYS}.get(key) is int and num != int(num):
            raise ConfigError(f"{source}:{lineno}: value of {key!r} must be an integer")
        values[key] = (num, lineno)
    if "threshold" in values and "threshold_db" in values:
        raise ConfigError(f"{source}:{values['threshold_db'][1]}: give either threshold or threshold_db, not both")
    kw = {k: v for k, (v, _) in values.items() if k in PARAM_KEYS}
    if "threshold_db" in values:
        kw["threshold"] = db_to_linear(values["threshold_db"][0])
    try:
        params = ModelParams(**kw)
    except ValueError as exc:
        bad = next((k for k in values if re.search(rf"\b{k}\b", str(exc))), None)
        where = f"{source}:{values[bad][1]}" if bad else source
        raise ConfigError(f"{where}: {exc}") from None
    settings = {k: v for k, (v, _) in values.items() if k in SETTING_KEYS and k != "threshold_db"}
    return params, settings


def load_config(path: str | None):
    """Read a config file; ``None`` loads the default shipped with the package."""
    if path is None:
        text = resources.files("plprelay").joinpath("data/default.cfg").read_text(encoding="utf-8")
        return parse_config(text, "default.cfg")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, path)


def _build_spec(args, settings) -> RunSpec:
    mc_kw = {k: MC_KEYS[k](settings[k]) for k in MC_KEYS if k in settings}
    quad_kw = {k: QUAD_KEYS[k](settings[k]) for k in QUAD_KEYS if k in settings}
    for key in ("seed", "drops", "workers"):
        if getattr(args, key) is not None:
            mc_kw[key] = getattr(args, key)
    return RunSpec(
        mode=args.mode,
        sweep=Sweep.parse(args.sweep) if args.sweep else None,
        out=args.out,
        quad=QuadratureSpec(**quad_kw),
        mc=McConfig(**mc_kw),
        r1=float(settings.get("r1", 0.1)),
        quiet=args.quiet,
    )


# ---------------------------------------------------------------------------
# rows


def _point(spec: RunSpec, params: ModelParams, value):
    """Parameters and relay distance of one sweep point."""
    if spec.sweep is None:
        return params, spec.r1
    var = spec.sweep.var
    if var == "threshold_db":
        return params.with_(threshold=db_to_linear(value)), spec.r1
    if var == "r1":
        return params, value
    return params.with_(**{var: value}), spec.r1


def _fmt(x) -> str:
    return repr(float(x))


def _analytic_cells(params, r1, spec):
    direct = scenario_a_coverage(params, spec.quad)
    rel = relay_coverage(r1, params, spec.quad)
    d = rel.diagnostics
    return [direct.value, direct.error, d["xi1"], d["xi2"], d["xi3"], rel.value, rel.error]


class _Samples:
    """Drop samples keyed by parameters with the threshold removed (it does not affect them)."""

    def __init__(self, cfg: McConfig):
        self.cfg = cfg
        self._cache = {}

    def get(self, params, stream):
        key = (params.with_(threshold=1.0), stream)
        if key not in self._cache:
            self._cache = {k: v for k, v in self._cache.items() if k[0] == key[0]}
            self._cache[key] = simulate(params, self.cfg, stream)
        return self._cache[key]


def _mc_cells(params, r1, samples: _Samples):
    main = samples.get(params, 0)
    a = mc_scenario_a(params, samples.cfg, sample=main)
    rel = mc_relay(params, samples.cfg, r1, sample=main, relay_sample=samples.get(params, 1))
    cells = [a]
    cells += [rel.p_joint_b_not_a, rel.p_not_a, rel.p_rel_and_constraint, rel.p_pipeline]
    return [x for e in cells for x in (e.value, e.error)]


def _lead_columns(spec: RunSpec):
    lead = ["threshold_db", "r1"]
    if spec.sweep is not None and spec.sweep.var not in lead:
        lead.insert(0, spec.sweep.var)
    return lead


def _header(spec: RunSpec):
    cols = []
    if spec.mode in ("analytic", "sweep"):
        cols += ANALYTIC_COLUMNS
    if spec.mode in ("mc", "sweep"):
        cols += MC_COLUMNS
    return _lead_columns(spec) + cols + ["status"]


def _rows(spec: RunSpec, params: ModelParams, log=None):
    lead_cols = _lead_columns(spec)
    width = len(_header(spec)) - len(lead_cols) - 1
    values = sweep_values(spec.sweep) if spec.sweep is not None else [None]
    samples = _Samples(spec.mc)
    for v in values:
        lead = dict.fromkeys(lead_cols, "")
        if v is not None:
            lead[spec.sweep.var] = _fmt(v)
        try:
            p, r1 = _point(spec, params, v)
            cells = []
            if spec.mode in ("analytic", "sweep"):
                cells += _analytic_cells(p, r1, spec)
            if spec.mode in ("mc", "sweep"):
                cells += _mc_cells(p, r1, samples)
            # the swept value is echoed as given, not recomputed from the linear threshold
            lead.update({k: _fmt(x) for k, x in (("threshold_db", p.threshold_db), ("r1", r1)) if not lead[k]})
            row = list(lead.values()) + [_fmt(c) for c in cells] + ["ok"]
        except ROW_ERRORS as exc:
            # a failing point is reported in its row; the sweep goes on
            msg = f"error: {type(exc).__name__}: {exc}"
            row = list(lead.values()) + [""] * width + [msg]
            if log is not None:
                log(f"row {v!r}: {msg}")
        yield row


def _to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def render_rows(spec: RunSpec, params: ModelParams, log=None) -> str:
    """CSV text for an analytic, mc or sweep run."""
    if spec.mode == "validate":
        raise ValueError("use run() for validate mode")
    return _to_csv(_header(spec), list(_rows(spec, params, log)))


def _validate(spec: RunSpec, params: ModelParams, say):
    from .validation import ValidationContext, run_checks

    ctx = ValidationContext(params, spec.mc, spec.quad)
    results = run_checks(ctx, on_result=lambda r: say(r.summary()))
    rows = []
    for r in results:
        if r.skipped is not None:
            rows.append([r.criterion, r.title, "SKIP", "", "", "", r.skipped])
        for pt in r.points:
            rows.append(
                [
                    r.criterion,
                    pt.label,
                    "PASS" if pt.passed else "FAIL",
                    _fmt(pt.value),
                    _fmt(pt.reference),
                    _fmt(pt.tolerance),
                    pt.detail,
                ]
            )
    failed = any(r.status == "FAIL" for r in results)
    return _to_csv(VALIDATE_COLUMNS, rows), failed


def run(spec: RunSpec, params: ModelParams) -> int:
    """Execute ``spec`` and write its CSV; returns the process exit status."""

    def say(msg):
        if not spec.quiet:
            print(msg, file=sys.stderr)

    status = 0
    if spec.mode == "validate":
        text, failed = _validate(spec, params, say)
        status = 1 if failed else 0
    else:
        text = render_rows(spec, params, say)
    if spec.out is None:
        sys.stdout.write(text)
    else:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        say(f"wrote {spec.out}")
    return status


def _parser():
    ap = argparse.ArgumentParser(
        prog="plprelay",
        description="Coverage of a vehicle served directly by roadside units or through one relay vehicle.",
    )
    ap.add_argument("--config", metavar="PATH", help="flat key = value config (default: the shipped default.cfg)")
    ap.add_argument("--mode", choices=MODES, default="analytic")
    ap.add_argument("--sweep", metavar="VAR:FROM:TO:STEP", help=f"VAR one of {', '.join(SWEEP_VARS)}")
    ap.add_argument("--out", metavar="PATH", help="CSV output path (default: stdout)")
    ap.add_argument("--seed", type=int, help="base seed of the simulation")
    ap.add_argument("--drops", type=int, help="number of simulated drops")
    ap.add_argument("--workers", type=int, help="simulation worker processes (results do not depend on it)")
    ap.add_argument("--quiet", action="store_true", help="no progress or verdict lines on stderr")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    try:
        params, settings = load_config(args.config)
        spec = _build_spec(args, settings)
    except (ConfigError, ValueError) as exc:
        print(f"plprelay: {exc}", file=sys.stderr)
        return 2
    return run(spec, params)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
