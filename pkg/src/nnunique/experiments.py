"""Phase-transition sweeps, Monte Carlo checks and their CSV / plot artifacts.

Every run is a pure function of its :class:`ExperimentConfig`. The
measurement matrix (or operator) of a sweep is drawn once from stream 0 of
the master seed; each (grid point, trial) pair gets its own derived stream,
so results do not depend on execution order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .ensembles import Seed, bernoulli01, gaussian_matrix, gaussian_sym_operator
from .errors import ContractError, NumericalError
from .linalg import null_space_basis, symmetrize
from .lp import FeasibleSet
from .psd import exact_singleton_psd, probe_singleton_psd_batch
from .sdp import SdpContext
from .vector import _probe_polyhedron, exact_singleton, mplus_membership, wendel_probability

log = logging.getLogger(__name__)

KINDS = ("vector-phase", "matrix-phase", "wendel-mc", "nullspace-support")
L1_TOL = 1e-5
EXACT_VECTOR_MAX_N = 400
EXACT_MATRIX_MAX_N = 6
SUPPORT_TOL = 1e-9


class ConfigError(ContractError):
    pass


class CsvFormatError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass
class ExperimentConfig:
    kind: str
    n: int = 200
    m: int = 50
    density: float = 0.2
    ones_row: bool = False
    grid: tuple = (1,)
    trials: int = 200
    probes: int = 5
    seed: int = 0
    out: Optional[str] = None
    exact: bool = False
    profile: str = "desk"
    pairs: tuple = ()
    samples: int = 1000
    failure_budget: float = 0.05

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.probes < 1:
            raise ConfigError("probes must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if not 0.0 <= self.failure_budget <= 1.0:
            raise ConfigError("failure_budget must lie in [0, 1]")
        if self.kind == "wendel-mc":
            if not self.pairs:
                raise ConfigError("wendel-mc needs at least one (m, n) pair")
            if any(m < 1 or n < 1 for m, n in self.pairs):
                raise ConfigError("wendel pairs need m, n >= 1")
            return self
        if self.n < 1 or self.m < 0:
            raise ConfigError("need n >= 1 and m >= 0")
        if self.kind in ("vector-phase", "nullspace-support") and not 0.0 < self.density < 1.0:
            raise ConfigError("density must lie in (0, 1)")
        if self.kind == "nullspace-support":
            if self.samples < 1:
                raise ConfigError("samples must be at least 1")
            return self
        if not self.grid:
            raise ConfigError("grid must be nonempty")
        if self.kind == "vector-phase" and any(not 0 <= k <= self.n for k in self.grid):
            raise ConfigError(f"sparsity grid must lie in [0, {self.n}]")
        if self.kind == "matrix-phase" and any(not 0 <= r <= self.n for r in self.grid):
            raise ConfigError(f"rank grid must lie in [0, {self.n}]")
        return self

    def header(self) -> dict:
        keys = ["kind", "profile", "n", "m", "density", "ones_row", "grid", "trials", "probes",
                "seed", "exact", "pairs", "samples", "failure_budget"]
        out = {}
        for k in keys:
            v = getattr(self, k)
            if k == "grid":
                v = ",".join(map(str, v))
            elif k == "pairs":
                v = ",".join(f"{a}x{b}" for a, b in v)
            elif isinstance(v, bool):
                v = str(v).lower()
            out[k] = v
        return out


# -- profiles and config parsing ---------------------------------------------

def _rng_grid(lo, hi, step=1):
    return tuple(range(lo, hi + 1, step))


PROFILES = {
    "vector-phase": {
        "desk": dict(n=200, m=50, density=0.2, grid=_rng_grid(2, 40, 2), trials=200),
        "paper": dict(n=200, m=50, density=0.2, grid=_rng_grid(1, 60), trials=200),
    },
    "matrix-phase": {
        "desk": dict(n=16, m=83, grid=_rng_grid(0, 6), trials=50),
        "paper": dict(n=40, m=500, grid=_rng_grid(0, 16), trials=200),
    },
    "wendel-mc": {
        "desk": dict(pairs=((1, 2), (2, 4), (4, 10), (5, 11)), trials=10_000),
        "paper": dict(pairs=((1, 2), (2, 4), (4, 10), (5, 11)), trials=10_000),
    },
    "nullspace-support": {
        "desk": dict(n=100, m=50, density=0.5, ones_row=True, trials=3, samples=1000),
        "paper": dict(n=200, m=100, density=0.5, ones_row=True, trials=10, samples=10_000),
    },
}


def parse_grid(text: str) -> tuple:
    """``lo:hi[:step]`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] < 1):
                raise ValueError
            g = _rng_grid(*parts)
        else:
            g = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; expected lo:hi[:step] or a comma list") from None
    if not g:
        raise ConfigError(f"grid {text!r} is empty")
    return g


def parse_pairs(text: str) -> tuple:
    try:
        return tuple(tuple(int(v) for v in p.lower().split("x")) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"bad pairs {text!r}; expected e.g. 1x2,4x10") from None


def _parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


_FIELD_PARSERS = {
    "n": int, "m": int, "density": float, "ones_row": _parse_bool, "grid": parse_grid,
    "trials": int, "probes": int, "seed": int, "out": str, "exact": _parse_bool,
    "profile": str, "pairs": parse_pairs, "samples": int, "failure_budget": float, "kind": str,
}


def parse_config_text(text: str) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _FIELD_PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: {exc}") from None
    return values


def build_config(kind: str, file_values: Optional[dict] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Profile defaults, then config-file values, then explicit overrides."""
    file_values = dict(file_values or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if file_values.get("kind", kind) != kind:
        raise ConfigError(f"config file is for {file_values['kind']!r}, not {kind!r}")
    file_values.pop("kind", None)
    profile = overrides.get("profile", file_values.get("profile", "desk"))
    if kind not in PROFILES:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    if profile not in PROFILES[kind]:
        raise ConfigError(f"unknown profile {profile!r}")
    values = dict(PROFILES[kind][profile])
    values.update(file_values)
    values.update(overrides)
    values["profile"] = profile
    return ExperimentConfig(kind=kind, **values).validate()


# -- CSV -------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".10g")
    return str(v)


def format_csv(cfg: ExperimentConfig, columns: list, rows: list) -> str:
    lines = [f"# {k}={_fmt(v)}" for k, v in cfg.header().items()]
    lines.append(",".join(columns))
    lines += [",".join(_fmt(r[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


@dataclass
class CsvTable:
    header: dict
    columns: list
    rows: list  # list of dicts of floats


def parse_csv(text: str) -> CsvTable:
    header, columns, rows = {}, None, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if columns is not None:
                raise CsvFormatError(lineno, "header line after the column row")
            body = line[1:].strip()
            if "=" not in body:
                raise CsvFormatError(lineno, "header lines must be '# key=value'")
            k, v = body.split("=", 1)
            header[k.strip()] = v.strip()
            continue
        fields = [f.strip() for f in line.split(",")]
        if columns is None:
            if any(not f for f in fields):
                raise CsvFormatError(lineno, "empty column name")
            columns = fields
            continue
        if len(fields) != len(columns):
            raise CsvFormatError(lineno, f"expected {len(columns)} fields, got {len(fields)}")
        try:
            rows.append({c: float(f) for c, f in zip(columns, fields)})
        except ValueError:
            raise CsvFormatError(lineno, "non-numeric field") from None
    if columns is None:
        raise CsvFormatError(len(text.splitlines()) or 1, "missing column row")
    return CsvTable(header, columns, rows)


# -- results ---------------------------------------------------------------

@dataclass
class PhaseRow:
    grid: int
    trials: int
    singleton: int
    l1_success: Optional[int] = None
    mean_gap: float = 0.0
    inconclusive: Optional[int] = None
    failures: int = 0
    exact_singleton: Optional[int] = None

    @property
    def singleton_fraction(self) -> float:
        return self.singleton / self.trials

    @property
    def l1_fraction(self) -> Optional[float]:
        return None if self.l1_success is None else self.l1_success / self.trials


@dataclass
class RunResult:
    config: ExperimentConfig
    rows: list
    csv: str
    failures: int = 0
    total_trials: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def over_budget(self) -> bool:
        return self.failures > self.config.failure_budget * max(self.total_trials, 1)


def _write(cfg: ExperimentConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(text)


def _mean_finite(values) -> float:
    vals = [v for v in values if math.isfinite(v)]
    return float(np.mean(vals)) if vals else 0.0


def run_vector_phase(cfg: ExperimentConfig) -> RunResult:
    """Singleton fraction and L1 recovery rate against sparsity for one 0-1 matrix."""
    cfg.validate()
    if cfg.kind != "vector-phase":
        raise ConfigError("run_vector_phase needs kind=vector-phase")
    master = Seed(cfg.seed)
    A = bernoulli01(cfg.m, cfg.n, cfg.density, cfg.ones_row, Seed(cfg.seed, 0))
    n = A.shape[1]
    exact = cfg.exact and n <= EXACT_VECTOR_MAX_N
    rows, failures = [], 0
    for k in cfg.grid:
        row = PhaseRow(k, cfg.trials, 0, l1_success=0, exact_singleton=0 if exact else None)
        gaps = []
        for t in range(cfg.trials):
            rng = master.child(1, k, t).rng()
            x0 = np.zeros(n)
            x0[rng.choice(n, size=k, replace=False)] = rng.random(k)
            try:
                fs = FeasibleSet(A, A @ x0)
                if not fs.feasible:
                    raise NumericalError("phase one rejected a feasible x0")
                v = _probe_polyhedron(fs, x0, cfg.probes, rng)
                l1 = fs.minimize(np.ones(n))
                ex = exact_singleton(A, x0, fs=fs) if exact else None
            except NumericalError as exc:
                log.warning("k=%d trial=%d: solver failure: %s", k, t, exc)
                row.failures += 1
                continue
            row.singleton += v.singleton
            gaps.append(v.gap)
            row.l1_success += bool(l1.optimal and np.max(np.abs(l1.x - x0)) <= L1_TOL)
            if ex is not None:
                row.exact_singleton += ex.singleton
        row.mean_gap = _mean_finite(gaps)
        failures += row.failures
        log.info("k=%d singleton=%.3f l1=%.3f", k, row.singleton_fraction, row.l1_fraction)
        rows.append(row)
    cols = ["k", "trials", "singleton_fraction", "l1_fraction", "mean_gap", "failures"]
    if exact:
        cols.append("exact_singleton_fraction")
    recs = [dict(k=r.grid, trials=r.trials, singleton_fraction=r.singleton_fraction,
                 l1_fraction=r.l1_fraction, mean_gap=r.mean_gap, failures=r.failures,
                 exact_singleton_fraction=(r.exact_singleton or 0) / r.trials) for r in rows]
    text = format_csv(cfg, cols, recs)
    _write(cfg, text)
    return RunResult(cfg, rows, text, failures, cfg.trials * len(cfg.grid))


def run_matrix_phase(cfg: ExperimentConfig, ctx: Optional[SdpContext] = None) -> RunResult:
    """Singleton fraction against rank for one Gaussian symmetric operator.

    All trials at one rank are probed as a single solver batch.
    """
    cfg.validate()
    if cfg.kind != "matrix-phase":
        raise ConfigError("run_matrix_phase needs kind=matrix-phase")
    master = Seed(cfg.seed)
    op = gaussian_sym_operator(cfg.n, cfg.m, Seed(cfg.seed, 0))
    ctx = ctx or SdpContext(op)
    exact = cfg.exact and cfg.n <= EXACT_MATRIX_MAX_N
    rows = []
    for r in cfg.grid:
        X0s, rngs = [], []
        for t in range(cfg.trials):
            rng = master.child(2, r, t).rng()
            B = rng.standard_normal((cfg.n, r))
            X0s.append(symmetrize(B @ B.T))
            rngs.append(rng)
        verdicts = probe_singleton_psd_batch(op, X0s, cfg.probes, rngs, ctx)
        row = PhaseRow(r, cfg.trials, sum(v.singleton for v in verdicts),
                       mean_gap=_mean_finite(v.gap for v in verdicts),
                       inconclusive=sum(v.kind == "inconclusive" for v in verdicts))
        if exact:
            row.exact_singleton = sum(exact_singleton_psd(op, X, ctx).singleton for X in X0s)
        log.info("rank=%d singleton=%.3f inconclusive=%d", r, row.singleton_fraction, row.inconclusive)
        rows.append(row)
    cols = ["rank", "trials", "singleton_fraction", "mean_gap", "inconclusive"]
    if exact:
        cols.append("exact_singleton_fraction")
    recs = [dict(rank=r.grid, trials=r.trials, singleton_fraction=r.singleton_fraction,
                 mean_gap=r.mean_gap, inconclusive=r.inconclusive,
                 exact_singleton_fraction=(r.exact_singleton or 0) / r.trials) for r in rows]
    text = format_csv(cfg, cols, recs)
    _write(cfg, text)
    # inconclusive probes are the matrix analogue of solver failures
    failures = sum(r.inconclusive for r in rows)
    return RunResult(cfg, rows, text, failures, cfg.trials * len(cfg.grid))


def run_wendel_mc(cfg: ExperimentConfig) -> RunResult:
    """Empirical frequency of ``0 in conv(columns)`` for Gaussian matrices vs the closed form."""
    cfg.validate()
    if cfg.kind != "wendel-mc":
        raise ConfigError("run_wendel_mc needs kind=wendel-mc")
    master = Seed(cfg.seed)
    recs, failures = [], 0
    for i, (m, n) in enumerate(cfg.pairs):
        hits = 0
        for t in range(cfg.trials):
            A = gaussian_matrix(m, n, master.child(3, i, t))
            try:
                hits += not mplus_membership(A).member
            except NumericalError as exc:
                log.warning("pair %dx%d trial %d: %s", m, n, t, exc)
                failures += 1
        freq = hits / cfg.trials
        p = wendel_probability(m, n)
        sd = math.sqrt(p * (1.0 - p) / cfg.trials)
        z = (freq - p) / sd if sd > 0 else (0.0 if freq == p else math.inf)
        recs.append(dict(m=m, n=n, trials=cfg.trials, hits=hits, frequency=freq, formula=p, z=z))
        log.info("m=%d n=%d freq=%.4f formula=%.4f z=%.2f", m, n, freq, p, z)
    cols = ["m", "n", "trials", "hits", "frequency", "formula", "z"]
    text = format_csv(cfg, cols, recs)
    _write(cfg, text)
    return RunResult(cfg, recs, text, failures, cfg.trials * len(cfg.pairs))


def run_nullspace_support(cfg: ExperimentConfig) -> RunResult:
    """Smallest positive and negative supports of random null vectors of Bernoulli matrices."""
    cfg.validate()
    if cfg.kind != "nullspace-support":
        raise ConfigError("run_nullspace_support needs kind=nullspace-support")
    master = Seed(cfg.seed)
    recs = []
    for t in range(cfg.trials):
        A = bernoulli01(cfg.m, cfg.n, cfg.density, cfg.ones_row, master.child(4, t))
        Z = null_space_basis(A)
        rec = dict(draw=t, n=cfg.n, m=cfg.m, samples=0, min_pos=0, min_neg=0,
                   floor_fraction=0.0, vacuous=True)
        if Z.shape[1] == 0:
            log.info("draw %d: trivial null space, skipped", t)
        else:
            G = master.child(5, t).rng().standard_normal((cfg.samples, Z.shape[1]))
            W = G @ Z.T
            thr = SUPPORT_TOL * np.max(np.abs(W), axis=1, keepdims=True)
            pos = int((W > thr).sum(axis=1).min())
            neg = int((W < -thr).sum(axis=1).min())
            rec.update(samples=cfg.samples, min_pos=pos, min_neg=neg,
                       floor_fraction=min(pos, neg) / cfg.n, vacuous=False)
        recs.append(rec)
    cols = ["draw", "n", "m", "samples", "min_pos", "min_neg", "floor_fraction", "vacuous"]
    text = format_csv(cfg, cols, recs)
    _write(cfg, text)
    return RunResult(cfg, recs, text, 0, cfg.trials)


RUNNERS = {
    "vector-phase": run_vector_phase,
    "matrix-phase": run_matrix_phase,
    "wendel-mc": run_wendel_mc,
    "nullspace-support": run_nullspace_support,
}


def crossing(grid, fractions, level: float = 0.5) -> Optional[float]:
    """First grid value where the curve drops to ``level`` or below, linearly interpolated."""
    g = list(grid)
    f = list(fractions)
    for i in range(len(g)):
        if f[i] <= level:
            if i == 0:
                return float(g[0])
            g0, g1, f0, f1 = g[i - 1], g[i], f[i - 1], f[i]
            return float(g0 + (f0 - level) * (g1 - g0) / (f0 - f1))
    return None


# -- plot scripts ----------------------------------------------------------

def emit_plot(csv_path, kind: Optional[str] = None, out=None) -> str:
    """Write a self-contained gnuplot script for a sweep CSV and return its text.

    The data is embedded as a datablock so the script runs on its own.
    """
    csv_path = Path(csv_path)
    table = parse_csv(csv_path.read_text())
    kind = kind or table.header.get("kind")
    if not table.rows:
        raise CsvFormatError(len(csv_path.read_text().splitlines()), "no data rows")
    if kind == "vector-phase":
        need, xcol, xlabel = ["k", "singleton_fraction", "l1_fraction"], "k", "sparsity k"
    elif kind == "matrix-phase":
        need, xcol, xlabel = ["rank", "singleton_fraction", "inconclusive", "trials"], "rank", "rank r"
    else:
        raise ContractError(f"no plot layout for kind {kind!r}")
    missing = [c for c in need if c not in table.columns]
    if missing:
        raise CsvFormatError(1, f"missing columns {missing}")
    cols = need
    lines = [
        f"# sweep plot for {csv_path.name}",
        "set terminal pngcairo size 800,560",
        f"set output '{csv_path.with_suffix('.png').name}'",
        f"set xlabel '{xlabel}'",
        "set ylabel 'fraction of trials'",
        "set yrange [0:1.05]",
        "set key bottom left",
        "set grid",
        "$data << EOD",
    ]
    lines += [" ".join(_fmt(r[c]) for c in cols) for r in table.rows]
    lines.append("EOD")
    if kind == "vector-phase":
        lines.append("plot $data using 1:2 with linespoints title 'singleton', \\")
        lines.append("     $data using 1:3 with linespoints title 'L1 recovery'")
    else:
        lines.append("plot $data using 1:2:($2 + $3 / $4) with filledcurves fs transparent solid 0.3 "
                     "title 'inconclusive', \\")
        lines.append("     $data using 1:2 with linespoints title 'singleton'")
    text = "\n".join(lines) + "\n"
    target = Path(out) if out else csv_path.with_suffix(".gp")
    target.write_text(text)
    return text
