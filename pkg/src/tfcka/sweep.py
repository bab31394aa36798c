"""Loss sweeps with per-point amplitude optimization and flat-file output."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from . import __version__
from .keyrate import MODES, SearchSpec, optimize_alpha
from .params import ProtocolParams, QuadratureSpec, misalignment_angle

log = logging.getLogger(__name__)

COLUMNS = ("loss_db", "eta", "alpha_opt", "pr_kg", "qber", "qz_bar", "rate", "r1", "r2", "status")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


def db_to_eta(loss_db: float) -> float:
    """Party-to-relay transmittance for a party-to-party loss in dB (the two-party channel is ``eta**2``)."""
    if loss_db < 0:
        raise ValueError(f"loss must be non-negative, got {loss_db} dB")
    return 10.0 ** (-loss_db / 20.0)


def eta_to_db(eta: float) -> float:
    return -20.0 * math.log10(eta)


@dataclass(frozen=True)
class SweepConfig:
    parties: int = 3
    modes_exp: int | None = None
    loss_start: float = 10.0
    loss_stop: float = 80.0
    loss_step: float = 1.0
    dark_counts: tuple[float, ...] = (1e-8, 1e-9, 1e-10)
    misalignment: float = 0.02
    decoy_high: float = 0.5
    decoy_low: float = 0.0
    cutoff: int = 4
    mode: str = "exact-yields"
    quad_nodes: int = 32
    seed: int = 0
    alpha_min: float = 1e-3
    alpha_max: float = 1.2
    alpha_points: int = 40
    alpha_tol: float = 1e-3
    workers: int = 1
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.parties < 2:
            raise ConfigError(f"parties must be at least 2, got {self.parties}")
        if self.modes_exp is not None and (1 << self.modes_exp) < self.parties:
            raise ConfigError(f"2^{self.modes_exp} modes cannot host {self.parties} parties")
        if self.loss_step <= 0:
            raise ConfigError(f"loss_step must be positive, got {self.loss_step}")
        if self.loss_start < 0 or self.loss_stop < self.loss_start:
            raise ConfigError(f"empty or negative loss range [{self.loss_start}, {self.loss_stop}]")
        if not self.dark_counts:
            raise ConfigError("dark_counts must list at least one value")
        if any(not 0 <= d < 1 for d in self.dark_counts):
            raise ConfigError(f"dark counts must lie in [0, 1), got {self.dark_counts}")
        if not 0 <= self.misalignment <= 1:
            raise ConfigError(f"misalignment must lie in [0, 1], got {self.misalignment}")
        if not self.decoy_high > self.decoy_low >= 0:
            raise ConfigError(f"need decoy_high > decoy_low >= 0, got {self.decoy_high}, {self.decoy_low}")
        if self.cutoff < 0 or self.cutoff % 2:
            raise ConfigError(f"cutoff must be even and non-negative, got {self.cutoff}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        object.__setattr__(self, "dark_counts", tuple(float(d) for d in self.dark_counts))

    @property
    def s(self) -> int:
        return self.modes_exp if self.modes_exp is not None else max(1, math.ceil(math.log2(self.parties)))

    def losses(self) -> list[float]:
        count = int(math.floor((self.loss_stop - self.loss_start) / self.loss_step + 1e-9)) + 1
        return [round(self.loss_start + i * self.loss_step, 10) for i in range(count)]

    def params(self, loss_db: float, p_dark: float) -> ProtocolParams:
        angle = misalignment_angle(self.misalignment)
        return ProtocolParams(self.parties, self.s, eta=db_to_eta(loss_db), p_dark=p_dark, theta=angle,
                              phi=angle, decoys=(self.decoy_high, self.decoy_low), cutoff=self.cutoff)

    def echo(self) -> dict[str, Any]:
        d = asdict(self)
        d["dark_counts"] = list(self.dark_counts)
        return d


@dataclass
class SweepRow:
    loss_db: float
    eta: float
    alpha_opt: float
    pr_kg: float
    qber: float
    qz_bar: float
    rate: float
    r1: float
    r2: float
    status: str = "ok"


@dataclass
class SweepResult:
    config: SweepConfig
    p_dark: float
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(r.status.startswith("error") for r in self.rows)


def evaluate_point(cfg: SweepConfig, p_dark: float, loss_db: float) -> SweepRow:
    """One sweep row; failures are reported in the status column rather than raised."""
    nan = math.nan
    eta = db_to_eta(loss_db)
    try:
        p = cfg.params(loss_db, p_dark)
        quad = QuadratureSpec(nodes=cfg.quad_nodes, max_nodes=max(128, cfg.quad_nodes), seed=cfg.seed)
        search = SearchSpec(cfg.alpha_min, cfg.alpha_max, cfg.alpha_points, cfg.alpha_tol)
        alpha, pt = optimize_alpha(p, cfg.mode, quad, search)
    except Exception as exc:  # noqa: BLE001 - any failure becomes a row status
        log.warning("point %.6g dB failed: %s", loss_db, exc)
        return SweepRow(loss_db, eta, nan, nan, nan, nan, nan, nan, nan, f"error: {type(exc).__name__}: {exc}")
    status = "no-key" if pt.no_key else "ok"
    return SweepRow(loss_db, eta, alpha, pt.pr_kg, pt.q_x, pt.q_z_bar, pt.rate, pt.r1, pt.r2, status)


def _evaluate_packed(args):
    return evaluate_point(*args)


def run_sweep(cfg: SweepConfig, p_dark: float | None = None) -> SweepResult:
    """Sweep the loss range at one dark-count probability (the first listed by default)."""
    p_dark = cfg.dark_counts[0] if p_dark is None else p_dark
    jobs = [(cfg, p_dark, loss) for loss in cfg.losses()]
    log.info("sweeping %d loss points, N=%d, mode=%s, p_d=%g", len(jobs), cfg.parties, cfg.mode, p_dark)
    if cfg.workers == 1 or len(jobs) == 1:
        rows = [_evaluate_packed(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_evaluate_packed, jobs))
    return SweepResult(cfg, p_dark, rows)


def run_sweeps(cfg: SweepConfig) -> list[SweepResult]:
    return [run_sweep(cfg, d) for d in cfg.dark_counts]


def _fmt(x: float) -> str:
    return "%.12g" % x


def _round(x):
    if isinstance(x, float):
        return None if math.isnan(x) else float(_fmt(x))
    return x


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in result.rows:
        w.writerow([_fmt(getattr(r, c)) if c != "status" else r.status for c in COLUMNS])
    return buf.getvalue()


def to_json(result: SweepResult) -> str:
    doc = {
        "provenance": {
            "version": __version__,
            "seed": result.config.seed,
            "p_dark": _round(result.p_dark),
            "config": {k: _round(v) if not isinstance(v, list) else [_round(x) for x in v]
                       for k, v in result.config.echo().items()},
        },
        "rows": [{c: _round(getattr(r, c)) for c in COLUMNS} for r in result.rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def result_from_json(text: str) -> SweepResult:
    doc = json.loads(text)
    cfg_d = dict(doc["provenance"]["config"])
    cfg_d["dark_counts"] = tuple(cfg_d["dark_counts"])
    cfg = SweepConfig(**cfg_d)
    rows = [SweepRow(**{c: (math.nan if v is None else v) for c, v in row.items()}) for row in doc["rows"]]
    return SweepResult(cfg, doc["provenance"]["p_dark"], rows)


def emit(result: SweepResult, fmt: str, path: str | os.PathLike | None) -> str:
    """Render the result and write it to ``path`` (if given); returns the text."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")
    text = to_csv(result) if fmt == "csv" else to_json(result)
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write sweep output to {path}: {exc}") from exc
    return text


def output_path(base: str, p_dark: float, several: bool) -> str:
    """Output file for one dark-count value; a suffix tells sweeps apart when several are run."""
    if not several:
        return base
    p = Path(base)
    return str(p.with_name(f"{p.stem}_pd{p_dark:g}{p.suffix}"))


# ------------------------------------------------------------------ config files

_FIELD_TYPES = {f.name: f.type for f in fields(SweepConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    if key == "dark_counts":
        return tuple(float(x) for x in raw.replace(",", " ").split())
    if key in ("modes_exp", "out") and raw.lower() in ("", "none", "auto"):
        return None
    if kind in ("int", "int | None"):
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    out: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        try:
            out[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {raw!r}") from exc
    return out


def load_config(path: str | os.PathLike | None = None, **overrides) -> SweepConfig:
    values: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_config_text(text))
    values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(values) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    try:
        return SweepConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def replace_config(cfg: SweepConfig, **changes) -> SweepConfig:
    return dataclasses.replace(cfg, **changes)
