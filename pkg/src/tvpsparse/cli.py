"""Configuration-driven command line for batch estimation runs.

Four subcommands cover the workflows: ``simulate`` scores the
artificial-data grid, ``fit`` estimates one model on a CSV and persists
draws/PIPs/coefficient bands, ``forecast`` runs the expanding-window
evaluation against a configured benchmark, and ``pips`` recomputes
inclusion probabilities from a persisted draw stream. Every run writes
its resolved configuration next to its artifacts, and a rerun with the
same configuration, seed and thread count reproduces identical bytes.

Exit codes: 0 success, 2 usage, 3 data, 4 numerical.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dist_kernels import RngStream
from .errors import DataError, NumericalError, UsageError
from .experiments import (
    DgpConfig,
    ForecastTask,
    McmcProfile,
    PROFILES,
    apply_transform,
    gaussian_iid_benchmark,
    run_forecast_exercise,
    run_simulation_study,
)
from .savs import block_labels
from .tvp_models import (
    PRIOR_KINDS,
    RegressionSpec,
    VarSpec,
    fit_tvp_regression,
    fit_tvp_var,
    reconstruct_beta_path,
)

_BENCHMARK_KEYS = {
    "kind", "prior", "tvp_off", "sv", "lags", "freeze_vol", "prior_hyper",
}


@dataclass
class RunConfig:
    """Validated settings of one command invocation.

    Unknown keys are rejected up front so a typo fails loudly instead of
    silently falling back to a default.
    """

    model: str = "regression"
    prior: str = "dl"
    priors: Optional[List[str]] = None
    prior_hyper: Dict[str, float] = field(default_factory=dict)
    sparsify: bool = True
    tvp_off: bool = False
    sv: Optional[bool] = None
    draws: Optional[int] = None
    burn: Optional[int] = None
    thin: Optional[int] = None
    seed: int = 0
    threads: int = 1
    profile: str = "desk"
    out: str = "runs"
    data: Optional[str] = None
    target: Optional[str] = None
    date_column: str = "date"
    manifest: Optional[str] = None
    variables: Optional[List[str]] = None
    size: Optional[str] = None
    lags: int = 2
    k: List[int] = field(default_factory=lambda: [5])
    t: List[int] = field(default_factory=lambda: [250])
    sparsity: List[float] = field(default_factory=lambda: [0.9])
    replications: int = 2
    origin: Optional[int] = None
    horizons: List[int] = field(default_factory=lambda: [1])
    n_origins: Optional[int] = None
    focus: Optional[List[str]] = None
    benchmark: Optional[Dict] = None
    freeze_vol: bool = False
    fit_dir: Optional[str] = None

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        allowed = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise UsageError(f"unknown configuration keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg._validate()
        return cfg

    def to_mapping(self) -> dict:
        return asdict(self)

    def _validate(self):
        if self.model not in ("regression", "var"):
            raise UsageError("model must be 'regression' or 'var'")
        if self.prior not in PRIOR_KINDS:
            raise UsageError(f"prior must be one of {PRIOR_KINDS}")
        if self.priors is not None:
            self.priors = [str(p) for p in self.priors]
            bad = [p for p in self.priors if p not in PRIOR_KINDS]
            if bad:
                raise UsageError(f"unknown priors: {', '.join(bad)}")
        if self.profile not in PROFILES:
            raise UsageError(f"profile must be one of {sorted(PROFILES)}")
        for name in ("draws", "burn", "thin"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < (0 if name == "burn" else 1)):
                raise UsageError(f"{name} must be a nonnegative integer")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise UsageError("seed must be a nonnegative integer")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise UsageError("threads must be a positive integer")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise UsageError("replications must be a positive integer")
        if not isinstance(self.lags, int) or self.lags < 1:
            raise UsageError("lags must be a positive integer")
        self.k = [int(v) for v in _as_list(self.k)]
        self.t = [int(v) for v in _as_list(self.t)]
        self.sparsity = [float(v) for v in _as_list(self.sparsity)]
        self.horizons = [int(v) for v in _as_list(self.horizons)]
        if any(h < 1 for h in self.horizons):
            raise UsageError("horizons must be positive integers")
        if self.benchmark is not None:
            extra = sorted(set(self.benchmark) - _BENCHMARK_KEYS)
            if extra:
                raise UsageError(f"unknown benchmark keys: {', '.join(extra)}")
        if not isinstance(self.prior_hyper, dict):
            raise UsageError("prior_hyper must be a mapping")

    def resolved_profile(self) -> McmcProfile:
        base = PROFILES[self.profile]
        n_draws = self.draws if self.draws is not None else base.n_draws
        n_burn = self.burn if self.burn is not None else base.n_burn
        thin = self.thin if self.thin is not None else base.thin
        if n_burn >= n_draws:
            raise UsageError("burn must be smaller than draws")
        return McmcProfile(n_draws=n_draws, n_burn=n_burn, thin=thin)

    def uses_sv(self) -> bool:
        # volatility is the VAR default; regressions default to
        # homoscedastic noise
        if self.sv is None:
            return self.model == "var"
        return bool(self.sv)


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


# ---------------------------------------------------------------------------
# file IO


def _read_panel(path: str, date_column: str) -> Tuple[List[str], np.ndarray]:
    """CSV with a header row, an optional date column, numeric series."""
    if not path:
        raise UsageError("this command needs a 'data' path in the configuration")
    if not os.path.exists(path):
        raise UsageError(f"data file {path!r} does not exist")
    names: List[str] = []
    keep: List[int] = []
    rows: List[List[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        names = [h.strip() for h in header]
        keep = [
            i for i, nm in enumerate(names)
            if nm.lower() != (date_column or "").lower()
        ]
        if not keep:
            raise DataError(f"{path}: no series columns")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(names):
                raise DataError(
                    f"{path}:{lineno}: expected {len(names)} fields, got {len(row)}"
                )
            try:
                rows.append([float(row[i]) for i in keep])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    return [names[i] for i in keep], np.asarray(rows, float)


def _read_manifest(path: str) -> Dict[str, dict]:
    """Series metadata: name -> {tcode, sizes}. JSON mapping/list or CSV."""
    if not os.path.exists(path):
        raise UsageError(f"manifest {path!r} does not exist")
    out: Dict[str, dict] = {}
    if path.endswith(".json"):
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: {exc}") from None
        entries = raw.get("series", raw) if isinstance(raw, dict) else raw
        if isinstance(entries, dict):
            entries = [
                {"name": nm, **(v if isinstance(v, dict) else {"tcode": v})}
                for nm, v in entries.items()
            ]
        for entry in entries:
            out[str(entry["name"])] = {
                "tcode": int(entry.get("tcode", 1)),
                "sizes": set(entry.get("sizes", [])),
            }
        return out
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                out[row["name"].strip()] = {
                    "tcode": int(row["tcode"]),
                    "sizes": set(filter(None, (row.get("sizes") or "").split("|"))),
                }
            except (KeyError, TypeError, ValueError):
                raise DataError(f"{path}:{lineno}: bad manifest row") from None
    if not out:
        raise DataError(f"{path}: empty manifest")
    return out


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_draws(prefix: str, matrix: np.ndarray, sidecar: dict) -> None:
    """Columnar little-endian float64 rows plus a JSON description."""
    data = np.ascontiguousarray(matrix, dtype="<f8")
    with open(prefix + ".bin", "wb") as fh:
        fh.write(data.tobytes())
    sidecar = dict(sidecar, n_rows=int(data.shape[0]), n_cols=int(data.shape[1]),
                   dtype="<f8", layout="row-major")
    _write_json(prefix + ".json", sidecar)


def _read_draws(prefix: str) -> Tuple[np.ndarray, dict]:
    with open(prefix + ".json") as fh:
        sidecar = json.load(fh)
    raw = np.fromfile(prefix + ".bin", dtype=sidecar["dtype"])
    return raw.reshape(sidecar["n_rows"], sidecar["n_cols"]), sidecar


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg: RunConfig) -> int:
    priors = cfg.priors if cfg.priors is not None else [cfg.prior]
    profile = cfg.resolved_profile()
    cells = [
        DgpConfig(k=k, t=t, sparsity=s, replications=cfg.replications, seed=cfg.seed)
        for k in cfg.k for t in cfg.t for s in cfg.sparsity
    ]
    rows: List[dict] = []
    failures: List[Tuple[str, Exception]] = []
    for ci, cell in enumerate(cells):
        for prior in priors:
            tag = f"k={cell.k} t={cell.t} sparsity={cell.sparsity} prior={prior}"
            try:
                rows.extend(
                    _patched_cell(cell, ci, prior, profile, cfg)
                )
            except (UsageError, DataError, NumericalError) as exc:
                failures.append((tag, exc))
                print(f"cell failed [{tag}]: {exc}", file=sys.stderr)
    os.makedirs(cfg.out, exist_ok=True)
    _write_csv(
        os.path.join(cfg.out, "cells.csv"),
        ["k", "t", "sparsity", "prior", "rep", "mae_raw", "mae_sparsified", "hit_rate"],
        [
            [r["k"], r["t"], r["sparsity"], r["prior"], r["rep"],
             r["mae_raw"], r["mae_sparsified"], r["hit_rate"]]
            for r in rows
        ],
    )
    _write_csv(
        os.path.join(cfg.out, "mae.csv"),
        ["k", "t", "sparsity", "prior", "sparsified", "mae"],
        _aggregate_mae(rows),
    )
    _write_csv(
        os.path.join(cfg.out, "hitrate.csv"),
        ["k", "t", "sparsity", "prior", "hit_rate"],
        _aggregate_hits(rows),
    )
    _write_json(os.path.join(cfg.out, "run_config.json"),
                {"command": "simulate", "config": cfg.to_mapping()})
    if failures:
        return _exit_code(failures[0][1])
    return 0


def _patched_cell(cell, ci, prior, profile, cfg) -> List[dict]:
    # one grid cell at a time so failures stay local to it
    out = run_simulation_study(
        [cell], [prior], profile, sv=bool(cfg.sv), threads=cfg.threads
    )
    for row in out:
        row["cell"] = ci
    return out


def _group(rows, keyfn):
    grouped: Dict[tuple, List[dict]] = {}
    for row in rows:
        grouped.setdefault(keyfn(row), []).append(row)
    return grouped


def _aggregate_mae(rows):
    out = []
    key = lambda r: (r["k"], r["t"], r["sparsity"], r["prior"])
    for (k, t, s, prior), grp in _group(rows, key).items():
        out.append([k, t, s, prior, 0, float(np.mean([g["mae_raw"] for g in grp]))])
        out.append([k, t, s, prior, 1, float(np.mean([g["mae_sparsified"] for g in grp]))])
    return out


def _aggregate_hits(rows):
    out = []
    key = lambda r: (r["k"], r["t"], r["sparsity"], r["prior"])
    for (k, t, s, prior), grp in _group(rows, key).items():
        out.append([k, t, s, prior, float(np.mean([g["hit_rate"] for g in grp]))])
    return out


def _coef_labels(reg_names: Sequence[str], k: int, n_cov: int) -> List[str]:
    names = list(reg_names)
    if len(names) != k + n_cov:
        raise UsageError("regressor names do not match the design width")
    return names + names  # constants then loadings, block column disambiguates


def _fit_equation(records, reg_names, k, n_cov, thin, quantiles):
    """Stream one equation's draws into persistence and summary pieces."""
    bin_rows, raw_paths, sparse_paths = [], [], []
    counts = None
    sv_any = False
    for j, rec in enumerate(records):
        if j % thin:
            continue
        pieces = [rec.alpha.concat()]
        if rec.sparsified is not None:
            pieces.append(rec.sparsified.gamma_bar)
            inc = rec.sparsified.mask.astype(np.int64)
            counts = inc if counts is None else counts + inc
            sparse_paths.append(
                reconstruct_beta_path(rec, sparsified=True).astype(np.float32)
            )
        if rec.sv is not None:
            sv_any = True
            pieces.append([rec.sv.mu, rec.sv.rho, rec.sv.sig_eta2, float(rec.sv.h.mean())])
        else:
            pieces.append([rec.sigma2])
        bin_rows.append(np.concatenate([np.asarray(p, float).ravel() for p in pieces]))
        raw_paths.append(reconstruct_beta_path(rec, sparsified=False).astype(np.float32))
    if not bin_rows:
        raise UsageError("no draws recorded; check draws/burn/thin")
    labels = _coef_labels(reg_names, k, n_cov)
    blocks = block_labels(k, n_cov)
    columns = [f"alpha:{b}:{l}" for b, l in zip(blocks, labels)]
    if counts is not None:
        columns += [f"gamma:{b}:{l}" for b, l in zip(blocks, labels)]
    columns += ["sv_mu", "sv_rho", "sv_sig_eta2", "sv_h_mean"] if sv_any else ["sigma2"]
    summary = {
        "matrix": np.stack(bin_rows),
        "columns": columns,
        "labels": labels,
        "blocks": blocks,
        "pips": None if counts is None else counts / len(bin_rows),
        "raw_q": np.quantile(np.stack(raw_paths), quantiles, axis=0),
        "sparse_q": (
            np.quantile(np.stack(sparse_paths), quantiles, axis=0)
            if sparse_paths else None
        ),
    }
    return summary


def cmd_fit(cfg: RunConfig) -> int:
    names, panel = _read_panel(cfg.data, cfg.date_column)
    profile = cfg.resolved_profile()
    quantiles = (0.05, 0.5, 0.95)
    os.makedirs(cfg.out, exist_ok=True)
    equations = []
    if cfg.model == "regression":
        target = cfg.target if cfg.target is not None else names[0]
        if target not in names:
            raise UsageError(f"target column {target!r} not in {names}")
        ti = names.index(target)
        y = panel[:, ti]
        x = np.delete(panel, ti, axis=1)
        reg_names = [nm for nm in names if nm != target]
        spec = RegressionSpec(
            y=y, X=x, prior=cfg.prior, prior_hyper=cfg.prior_hyper,
            n_draws=profile.n_draws, n_burn=profile.n_burn,
            sparsify=cfg.sparsify, sv=cfg.uses_sv(), tvp_off=cfg.tvp_off,
        )
        records = fit_tvp_regression(spec, RngStream(cfg.seed, 0))
        equations.append((0, _fit_equation(
            records, reg_names, x.shape[1], 0, profile.thin, quantiles
        )))
    else:
        if cfg.variables:
            missing = [v for v in cfg.variables if v not in names]
            if missing:
                raise UsageError(f"variables not in panel: {', '.join(missing)}")
            order = [names.index(v) for v in cfg.variables]
            names = [names[i] for i in order]
            panel = panel[:, order]
        spec = VarSpec(
            Y=panel, p=cfg.lags, prior=cfg.prior, prior_hyper=cfg.prior_hyper,
            n_draws=profile.n_draws, n_burn=profile.n_burn,
            sparsify=cfg.sparsify, sv=cfg.uses_sv(), tvp_off=cfg.tvp_off,
        )
        lag_names = [
            f"{nm}.l{lag}" for lag in range(1, cfg.lags + 1) for nm in names
        ] + ["const"]
        per_eq: List[List] = [[] for _ in range(spec.m)]
        for sweep in fit_tvp_var(spec, RngStream(cfg.seed, 0)):
            for i, rec in enumerate(sweep):
                per_eq[i].append(rec)
        for i, recs in enumerate(per_eq):
            equations.append((i, _fit_equation(
                recs, lag_names + names[:i], len(lag_names), i,
                profile.thin, quantiles,
            )))

    pip_rows, band_rows = [], []
    for eq, summary in equations:
        prefix = os.path.join(
            cfg.out, "draws" if len(equations) == 1 else f"draws_eq{eq}"
        )
        _write_draws(prefix, summary["matrix"], {
            "columns": summary["columns"],
            "equation": eq,
            "model": cfg.model,
            "prior": cfg.prior,
            "seed": cfg.seed,
            "sparsify": cfg.sparsify,
            "sv": cfg.uses_sv(),
        })
        if summary["pips"] is not None:
            for label, blk, pip in zip(
                summary["labels"], summary["blocks"], summary["pips"]
            ):
                pip_rows.append([eq, label, blk, float(pip)])
        kw = len(summary["labels"]) // 2
        for j in range(kw):
            for qi, q in enumerate(quantiles):
                for tt in range(summary["raw_q"].shape[1]):
                    band_rows.append([
                        eq, summary["labels"][j], q, tt,
                        float(summary["raw_q"][qi, tt, j]),
                        float(summary["sparse_q"][qi, tt, j])
                        if summary["sparse_q"] is not None else "",
                    ])
    if pip_rows:
        _write_csv(
            os.path.join(cfg.out, "pips.csv"),
            ["equation", "label", "block", "pip"], pip_rows,
        )
    _write_csv(
        os.path.join(cfg.out, "bands.csv"),
        ["equation", "coefficient", "quantile", "t", "raw", "sparsified"],
        band_rows,
    )
    _write_json(os.path.join(cfg.out, "run_config.json"),
                {"command": "fit", "config": cfg.to_mapping()})
    return 0


def _select_panel(cfg: RunConfig) -> Tuple[List[str], np.ndarray]:
    names, panel = _read_panel(cfg.data, cfg.date_column)
    manifest = _read_manifest(cfg.manifest) if cfg.manifest else None
    if cfg.variables:
        chosen = list(cfg.variables)
    elif cfg.size is not None:
        if manifest is None:
            raise UsageError("selecting by size requires a manifest")
        chosen = [nm for nm in names if cfg.size in manifest.get(nm, {}).get("sizes", ())]
        if not chosen:
            raise UsageError(f"no series tagged with size {cfg.size!r}")
    else:
        chosen = list(names)
    missing = [nm for nm in chosen if nm not in names]
    if missing:
        raise UsageError(f"variables not in panel: {', '.join(missing)}")
    cols = []
    for nm in chosen:
        series = panel[:, names.index(nm)]
        tcode = manifest[nm]["tcode"] if manifest and nm in manifest else 1
        cols.append(apply_transform(series, tcode, name=nm))
    length = min(col.shape[0] for col in cols)
    stacked = np.column_stack([col[-length:] for col in cols])
    return chosen, stacked


def cmd_forecast(cfg: RunConfig) -> int:
    names, panel = _select_panel(cfg)
    if cfg.origin is None:
        raise UsageError("forecast needs an 'origin' row index")
    if cfg.benchmark is None:
        raise UsageError("forecast needs a 'benchmark' configuration")
    focus = None
    if cfg.focus is not None:
        focus = tuple(
            names.index(f) if isinstance(f, str) else int(f) for f in cfg.focus
        )
    task = ForecastTask(
        data=panel, origin=cfg.origin, horizons=tuple(cfg.horizons),
        n_origins=cfg.n_origins, focus=focus,
    )
    profile = cfg.resolved_profile()
    main_settings = {
        "prior": cfg.prior, "p": cfg.lags, "sv": cfg.uses_sv(),
        "tvp_off": cfg.tvp_off, "freeze_vol": cfg.freeze_vol,
        "prior_hyper": tuple(sorted(cfg.prior_hyper.items())),
    }
    raw, sparse = run_forecast_exercise(
        task, RngStream(cfg.seed, 0), sparsify=cfg.sparsify,
        profile=profile, **main_settings,
    )
    bench_cfg = dict(cfg.benchmark)
    bench_kind = bench_cfg.pop("kind", "model")
    if bench_kind == "white-noise":
        if bench_cfg:
            raise UsageError("the white-noise benchmark takes no model settings")
        bench = gaussian_iid_benchmark(task)
    elif bench_kind == "model":
        if "lags" in bench_cfg:
            bench_cfg["p"] = int(bench_cfg.pop("lags"))
        if "prior_hyper" in bench_cfg:
            bench_cfg["prior_hyper"] = tuple(
                sorted(dict(bench_cfg["prior_hyper"]).items())
            )
        bench_settings = dict(main_settings, **bench_cfg)
        if bench_settings == main_settings:
            bench = raw  # self-benchmark: reuse the identical run
        else:
            bench, _ = run_forecast_exercise(
                task, RngStream(cfg.seed, 1), sparsify=False,
                profile=profile, **bench_settings,
            )
    else:
        raise UsageError("benchmark kind must be 'model' or 'white-noise'")

    metric_rows, traj_rows = [], []
    variants = [("main", 0, raw), ("benchmark", 0, bench)]
    if sparse is not None:
        variants.insert(1, ("main", 1, sparse))
    for h in task.horizons:
        for model, flag, res in variants:
            rmse = res.rmse(h)
            rel = rmse / bench.rmse(h)
            marg = res.avg_marginal_lpl(h)
            for vi, nm in enumerate(names):
                metric_rows.append([model, flag, nm, h, "rmse", float(rmse[vi])])
                metric_rows.append([model, flag, nm, h, "rel_rmse", float(rel[vi])])
                metric_rows.append([model, flag, nm, h, "lpl", float(marg[vi])])
            metric_rows.append([model, flag, "joint", h, "lpl", res.avg_lpl(h)])
            metric_rows.append([
                model, flag, "joint", h, "lpl_diff",
                res.avg_lpl(h) - bench.avg_lpl(h),
            ])
            bf = res.cumulative_log_bf(bench, h)
            cse = res.cumulative_sq_errors(h)
            for step in range(bf.shape[0]):
                row_id = int(res.target_rows[h][step])
                traj_rows.append([
                    model, flag, h, step, row_id, "cum_log_bf", "joint",
                    float(bf[step]),
                ])
                traj_rows.append([
                    model, flag, h, step, row_id, "lpl", "joint",
                    float(res.lpl[h][step]),
                ])
                for vi, nm in enumerate(names):
                    traj_rows.append([
                        model, flag, h, step, row_id, "cum_sq_error", nm,
                        float(cse[step, vi]),
                    ])
                    traj_rows.append([
                        model, flag, h, step, row_id, "pit", nm,
                        float(res.pit[h][step, vi]),
                    ])
    os.makedirs(cfg.out, exist_ok=True)
    _write_csv(
        os.path.join(cfg.out, "metrics.csv"),
        ["model", "sparsified", "variable", "horizon", "metric", "value"],
        metric_rows,
    )
    _write_csv(
        os.path.join(cfg.out, "trajectories.csv"),
        ["model", "sparsified", "horizon", "step", "target_row",
         "metric", "variable", "value"],
        traj_rows,
    )
    _write_json(os.path.join(cfg.out, "run_config.json"),
                {"command": "forecast", "config": cfg.to_mapping()})
    return 0


def cmd_pips(cfg: RunConfig) -> int:
    if not cfg.fit_dir:
        raise UsageError("pips needs 'fit_dir' pointing at a fit output directory")
    if not os.path.isdir(cfg.fit_dir):
        raise UsageError(f"fit directory {cfg.fit_dir!r} does not exist")
    prefixes = sorted(
        os.path.join(cfg.fit_dir, fn[: -len(".json")])
        for fn in os.listdir(cfg.fit_dir)
        if fn.startswith("draws") and fn.endswith(".json")
    )
    if not prefixes:
        raise UsageError(f"no draw sidecars found in {cfg.fit_dir!r}")
    rows = []
    for prefix in prefixes:
        matrix, sidecar = _read_draws(prefix)
        gamma_cols = [
            (ci, col) for ci, col in enumerate(sidecar["columns"])
            if col.startswith("gamma:")
        ]
        if not gamma_cols:
            raise UsageError(
                f"{prefix}.json holds no sparsified draws; rerun fit with sparsify"
            )
        for ci, col in gamma_cols:
            _, blk, label = col.split(":", 2)
            pip = float(np.mean(matrix[:, ci] != 0.0))
            rows.append([sidecar.get("equation", 0), label, blk, pip])
    os.makedirs(cfg.out, exist_ok=True)
    _write_csv(
        os.path.join(cfg.out, "pips.csv"),
        ["equation", "label", "block", "pip"], rows,
    )
    _write_json(os.path.join(cfg.out, "run_config.json"),
                {"command": "pips", "config": cfg.to_mapping()})
    return 0


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "forecast": cmd_forecast,
    "pips": cmd_pips,
}


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (UsageError,)):
        return 2
    if isinstance(exc, DataError):
        return 3
    if isinstance(exc, NumericalError):
        return 4
    raise exc


def _load_config(args: argparse.Namespace) -> RunConfig:
    payload: dict = {}
    if args.config:
        if not os.path.exists(args.config):
            raise UsageError(f"config file {args.config!r} does not exist")
        with open(args.config) as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"{args.config}: {exc}") from None
        if not isinstance(payload, dict):
            raise UsageError("configuration must be a JSON object")
        # a stored run_config.json round-trips directly
        if set(payload) == {"command", "config"}:
            payload = payload["config"]
    for name in ("seed", "threads", "out", "profile"):
        value = getattr(args, name)
        if value is not None:
            payload[name] = value
    return RunConfig.from_mapping(payload)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tvpsparse",
        description="Shrink-then-sparsify estimation and forecasting runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("simulate", "score the artificial-data grid"),
        ("fit", "estimate one model and persist draws, PIPs and bands"),
        ("forecast", "expanding-window forecast evaluation"),
        ("pips", "recompute inclusion probabilities from stored draws"),
    ):
        sp = sub.add_parser(name, help=blurb)
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--seed", type=int, help="override the run seed")
        sp.add_argument("--threads", type=int, help="worker count for grid jobs")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--profile", choices=sorted(PROFILES), help="MCMC budget")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return _COMMANDS[args.command](cfg)
    except (UsageError, DataError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
