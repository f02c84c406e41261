"""Config handling and file output for ``seqdiff experiment``.

Config files are plain ``key = value`` lines; ``#`` starts a comment.
Lists are comma separated; the LPD grid is ``start:stop:points``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dtest import TestConfig
from .experiments import (ExperimentSweep, binomial_band, mc_confidence_band, run_local_validity,
                          run_lpd_recovery, run_power, run_validity, write_rows)
from .core import Rng
from .svgplot import line_plot


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _words(text) -> tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(text)
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _grid(text) -> np.ndarray:
    if isinstance(text, np.ndarray):
        return text
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:points, got {text!r}")
    return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))


def _opt_float(text):
    return None if text in (None, "", "none", "None") else float(text)


# key -> (parser, default)
SCHEMA = {
    "setting": (str, "C"),
    "settings": (_words, ("A", "B", "C")),
    "null": (str, "bootstrap"),
    "nulls": (_words, ("permutation", "bootstrap")),
    "param": (str, "gamma"),
    "values": (_floats, (0.0, 0.25, 0.5, 0.75, 1.0)),
    "trials": (int, None),
    "seed": (int, 0),
    "B": (int, 200),
    "k": (int, 4),
    "alpha": (float, 0.5),
    "gamma": (_opt_float, None),
    "delta": (float, 0.25),
    "phi": (_opt_float, None),
    "phi_prime": (_opt_float, None),
    "t1": (int, 250),
    "t2": (int, 250),
    "v": (int, 250),
    "sizes": (lambda t: tuple(int(x) for x in _floats(t)), (250, 1000, 4000)),
    "grid": (_grid, np.linspace(-2.0, 2.0, 81)),
    "center": (float, 0.0),
    "epsilon": (float, 0.5),
    "sims": (int, 10_000),
    "threads": (int, 1),
    "svg": (_bool, True),
    "level": (float, 0.05),
}

DEFAULT_TRIALS = {"validity": 500, "power": 1000, "lpd": 200, "local": 500}


def load_config(path: str | Path | None = None, overrides=()) -> dict:
    """Read a key=value file, then apply ``KEY=VALUE`` overrides; unknown keys raise."""
    raw: dict[str, str] = {}
    lines = Path(path).read_text().splitlines() if path is not None else []
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        raw[key] = val
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not KEY=VALUE")
        key, val = (x.strip() for x in item.split("=", 1))
        raw[key] = val
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    cfg = {k: default for k, (_, default) in SCHEMA.items()}
    for key, val in raw.items():
        cfg[key] = SCHEMA[key][0](val)
    return cfg


def _sweep(cfg: dict, kind: str, setting: str, null: str, **over) -> ExperimentSweep:
    test = TestConfig(null_model=null, B=cfg["B"], k=cfg["k"], alpha=cfg["alpha"])
    gamma = cfg["gamma"]
    if gamma is None:
        gamma = 0.5 if kind == "lpd" else 0.0
    kw = dict(
        setting=setting,
        param=cfg["param"],
        values=cfg["values"],
        trials=cfg["trials"] or DEFAULT_TRIALS[kind],
        base_seed=cfg["seed"],
        test=test,
        gamma=gamma,
        delta=cfg["delta"],
        phi=cfg["phi"],
        phi_prime=cfg["phi_prime"],
        t1_size=cfg["t1"],
        t2_size=cfg["t2"],
        v_size=cfg["v"],
    )
    kw.update(over)
    return ExperimentSweep(**kw)


def run_experiment(kind: str, cfg: dict, out: Path) -> list[Path]:
    """Run one study and return the paths written."""
    out = Path(out)
    workers = cfg["threads"]
    written: list[Path] = []

    if kind == "validity":
        trials = cfg["trials"] or DEFAULT_TRIALS[kind]
        band = mc_confidence_band(trials, cfg["sims"], 0.95, Rng(cfg["seed"]).child(99),
                                  replicates=cfg["B"])
        lo_rate, hi_rate = binomial_band(trials, cfg["level"])
        p_rows, qq_rows, summary, curves = [], [], [], {}
        for null in cfg["nulls"]:
            for setting in cfg["settings"]:
                res = run_validity(_sweep(cfg, kind, setting, null), workers, cfg["level"])
                p_rows += [(setting, res.null_model, i, p) for i, p in enumerate(res.pvalues)]
                qq = res.qq
                qq_rows += [
                    (setting, res.null_model, i + 1, q, p, d, lo, hi, slo, shi)
                    for i, (q, p, d, lo, hi, slo, shi) in enumerate(zip(
                        qq.quantiles, qq.pvalues, qq.deviations, band.lower, band.upper,
                        band.sim_lower, band.sim_upper))
                ]
                summary.append((
                    setting, res.null_model, trials, res.rejection_rate, lo_rate, hi_rate,
                    int(np.count_nonzero(~band.contains(qq.deviations, simultaneous=False))),
                    int(np.count_nonzero(~band.contains(qq.deviations))),
                ))
                curves.setdefault(res.null_model, []).append((f"Setting {setting}", qq.quantiles, qq.deviations))
        paths = [out / "validity_pvalues.csv", out / "validity_qq.csv", out / "validity_summary.csv"]
        write_rows(paths[0], ["setting", "null", "trial", "p_value"], p_rows)
        write_rows(paths[1], ["setting", "null", "rank", "quantile", "p_value", "deviation",
                              "band_lower", "band_upper", "sim_lower", "sim_upper"], qq_rows)
        write_rows(paths[2], ["setting", "null", "trials", "rejection_rate", "rate_band_low",
                              "rate_band_high", "outside_pointwise", "outside_simultaneous"], summary)
        written += paths
        if cfg["svg"]:
            for null, lines in curves.items():
                p = out / f"validity_{null}.svg"
                line_plot(p, lines, title=f"QQ deviation, {null} null", xlabel="uniform quantile",
                          ylabel="empirical - uniform", band=(band.quantiles, band.lower, band.upper))
                written.append(p)

    elif kind == "power":
        null = "mc_bootstrap" if cfg["null"].endswith("bootstrap") else cfg["null"]
        setting = cfg["setting"]
        result = run_power(_sweep(cfg, kind, setting, null), workers, cfg["level"])
        rows = [(setting, null, cfg["param"], r.value, r.trials, r.rejections, r.power,
                 r.ci_low, r.ci_high) for r in result]
        lines = [(f"Setting {setting}", [r.value for r in result], [r.power for r in result])]
        p = out / "power.csv"
        write_rows(p, ["setting", "null", "param", "value", "trials", "rejections", "power",
                       "ci_low", "ci_high"], rows)
        written.append(p)
        if cfg["svg"]:
            p = out / "power.svg"
            line_plot(p, lines, title=f"Power vs {cfg['param']}", xlabel=cfg["param"],
                      ylabel="rejection rate", markers=True)
            written.append(p)

    elif kind == "lpd":
        sweep = _sweep(cfg, kind, cfg["setting"], "mc_bootstrap")
        curves = run_lpd_recovery(sweep, cfg["sizes"], cfg["grid"], workers)
        rows = []
        for i, n in enumerate(curves.sizes):
            rows += [(n, s, m, sd, t, f) for s, m, sd, t, f in zip(
                curves.grid, curves.mean[i], curves.sd[i], curves.truth, curves.fallback_fraction[i])]
        p = out / "lpd.csv"
        write_rows(p, ["t1_size", "s", "mean_lpd", "sd_lpd", "true_lpd", "fallback_fraction"], rows)
        written.append(p)
        if cfg["svg"]:
            lines = [("true LPD", curves.grid, curves.truth)]
            lines += [(f"|T1|={n} mean", curves.grid, curves.mean[i]) for i, n in enumerate(curves.sizes)]
            p = out / "lpd.svg"
            line_plot(p, lines, title="Local posterior difference", xlabel="s", ylabel="LPD")
            written.append(p)

    elif kind == "local":
        sweep = _sweep(cfg, kind, cfg["setting"], "mc_bootstrap", test=TestConfig(B=cfg["B"], k=0))
        pv = run_local_validity(sweep, cfg["center"], cfg["epsilon"], workers)
        p = out / "local_pvalues.csv"
        write_rows(p, ["trial", "p_value"], list(enumerate(pv)))
        written.append(p)
    else:
        raise ValueError(f"unknown experiment kind {kind!r}")
    return written
