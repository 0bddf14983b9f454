"""Command-line orchestration: sampling, exact bound evaluation, Monte Carlo
sweeps, and report emission.

Subcommands: sample | discrepancy | berry | rate | bracket-table.
Exit codes: 0 success, 2 usage/config error, 3 numerical failure.  stderr
carries diagnostics; stdout and output files carry data only.  All randomness
flows from the single --seed value, expanded into one stream id per task
(position in the n sweep; the supercritical proxy batch uses stream 1000).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from scipy.special import ndtr

from .distances import SampleSet, coupled_l2, ks_distance, ks_distance_two_sample, rate_fit
from .fgn import FactorizationError, Hurst, Seed, sample_fgn
from .kernel_norms import bracket_table, discrepancy, tv_rate_curve
from .malliavin_bound import CriticalSpec, berry_estimate
from .variations import Regime, RegimeSpec, sample_zn

_PROXY_STREAM = 1000

_DEFAULTS = {
    "q": 2,
    "hurst": "critical",
    "n": "2^6..12",
    "batch": 1000,
    "seed": 20080401,
    "format": "csv",
    "out": None,
    "proxy_n": 4096,
    "rmax": 100,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    q: int
    hurst_raw: str
    n_list: list[int]
    batch: int
    seed: int
    out_format: str
    out_path: str | None
    proxy_n: int
    rmax: int

    @property
    def spec(self) -> RegimeSpec:
        if self.hurst_raw == "critical":
            return RegimeSpec.classify(self.q, Hurst(1.0 - 1.0 / (2 * self.q)))
        return RegimeSpec.classify(self.q, Hurst(float(self.hurst_raw)))


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def parse_n_list(text: str) -> list[int]:
    """Parse '64,128,256' or a dyadic range 'a^b..c' such as '2^8..16'."""
    text = text.strip()
    if ".." in text:
        head, _, hi = text.partition("..")
        base_s, _, lo = head.partition("^")
        if not base_s or not lo or not hi:
            raise ConfigError(f"bad n range {text!r}; expected e.g. 2^8..16")
        try:
            base, lo_e, hi_e = int(base_s), int(lo), int(hi)
        except ValueError as exc:
            raise ConfigError(f"bad n range {text!r}: {exc}") from exc
        if hi_e < lo_e:
            raise ConfigError(f"empty n range {text!r}")
        ns = [base**e for e in range(lo_e, hi_e + 1)]
    else:
        try:
            ns = [int(tok) for tok in text.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad n list {text!r}: {exc}") from exc
    if not ns:
        raise ConfigError("n list is empty")
    if any(v < 1 for v in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError(f"n list must be strictly increasing positive integers, got {ns}")
    return ns


def _read_config_file(path: str) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key = key.strip().replace("-", "_")
        if key not in _DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = val.strip()
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults < config file < explicit command-line flags."""
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(_read_config_file(args.config))
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    try:
        q = int(merged["q"])
        batch = int(merged["batch"])
        seed = int(merged["seed"])
        proxy_n = int(merged["proxy_n"])
        rmax = int(merged["rmax"])
    except ValueError as exc:
        raise ConfigError(f"bad integer option: {exc}") from exc
    hurst_raw = str(merged["hurst"]).strip()
    if hurst_raw != "critical":
        try:
            float(hurst_raw)
        except ValueError as exc:
            raise ConfigError(f"--hurst must be a number or 'critical', got {hurst_raw!r}") from exc
    out_format = str(merged["format"])
    if out_format not in ("csv", "json"):
        raise ConfigError(f"--format must be csv or json, got {out_format!r}")
    if batch < 1:
        raise ConfigError(f"--batch must be >= 1, got {batch}")
    n_list = merged["n"] if isinstance(merged["n"], list) else parse_n_list(str(merged["n"]))
    return RunConfig(
        q=q,
        hurst_raw=hurst_raw,
        n_list=n_list,
        batch=batch,
        seed=seed,
        out_format=out_format,
        out_path=merged["out"],
        proxy_n=proxy_n,
        rmax=rmax,
    )


def _emit_table(cfg: RunConfig, header: list[str], rows: list[tuple], fit=None, meta=None) -> None:
    """Write the sweep table (and rate fit, when present) per the output config.

    csv: table to --out or stdout; the fit goes to <out>.fit.json, or to a
    trailing '# ratefit ...' line on stdout when no --out is given.
    json: one document {meta..., rows: [...], fit: {...}} to --out or stdout.
    """
    if cfg.out_format == "json":
        doc = dict(meta or {})
        doc["rows"] = [dict(zip(header, row)) for row in rows]
        if fit is not None:
            doc["fit"] = fit.to_json()
        text = json.dumps(doc, indent=2) + "\n"
        if cfg.out_path:
            Path(cfg.out_path).write_text(text)
        else:
            sys.stdout.write(text)
        return
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if cfg.out_path:
        Path(cfg.out_path).write_text(text)
        if fit is not None:
            Path(str(cfg.out_path) + ".fit.json").write_text(json.dumps(fit.to_json(), indent=2) + "\n")
    else:
        sys.stdout.write(text)
        if fit is not None:
            sys.stdout.write("# ratefit " + json.dumps(fit.to_json()) + "\n")


def cmd_sample(cfg: RunConfig) -> int:
    if not cfg.out_path:
        raise ConfigError("sample writes one CSV file per n; --out DIR is required")
    spec = cfg.spec
    out_dir = Path(cfg.out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    for idx, n in enumerate(cfg.n_list):
        path = sample_fgn(spec.h, n, Seed(cfg.seed, idx))
        with open(out_dir / f"fgn_n{n}.csv", "w") as f:
            path.to_csv(f)
    return 0


def cmd_discrepancy(cfg: RunConfig) -> int:
    spec = cfg.spec
    if spec.regime is not Regime.SUPERCRITICAL:
        raise ConfigError(
            f"discrepancy requires the supercritical regime H > 1 - 1/(2q); "
            f"H={spec.h.value} with q={spec.q} is {spec.regime.value}"
        )
    rows = []
    for n in cfg.n_list:
        rep = discrepancy(spec.q, spec.h, n)
        rows.append((n, rep.delta, rep.l2_error, rep.normalized))
    fit = rate_fit([(n, d) for n, d, _, _ in rows])
    _emit_table(
        cfg,
        ["n", "delta", "l2_error", "normalized"],
        rows,
        fit=fit,
        meta={"q": spec.q, "H": spec.h.value},
    )
    return 0


def cmd_berry(cfg: RunConfig) -> int:
    spec = cfg.spec
    if spec.regime is not Regime.CRITICAL:
        raise ConfigError(
            f"berry requires the critical regime H = 1 - 1/(2q); "
            f"H={spec.h.value} with q={spec.q} is {spec.regime.value}"
        )
    if cfg.batch < 100:
        raise ConfigError(f"berry needs --batch >= 100, got {cfg.batch}")
    cspec = CriticalSpec(spec.q)
    rows = []
    for idx, n in enumerate(cfg.n_list):
        est = berry_estimate(cspec, n, cfg.batch, Seed(cfg.seed, idx))
        rows.append((n, est.mean_sq, est.se, est.tv_bound, cfg.seed, idx))
    _emit_table(
        cfg,
        ["n", "mean_sq", "se", "tv_bound", "seed", "stream"],
        rows,
        meta={"q": spec.q, "H": spec.h.value, "batch": cfg.batch},
    )
    return 0


def cmd_rate(cfg: RunConfig) -> int:
    spec = cfg.spec
    meta = {"q": spec.q, "H": spec.h.value, "regime": spec.regime.value, "batch": cfg.batch}
    if spec.regime is Regime.SUPERCRITICAL:
        N = cfg.proxy_n
        bad = [n for n in cfg.n_list if n >= N or N % n != 0]
        if bad:
            raise ConfigError(
                f"supercritical rate scan needs every n to divide and be below the "
                f"proxy resolution {N}; offending n: {bad}"
            )
        proxy = sample_zn(spec, N, cfg.batch, Seed(cfg.seed, _PROXY_STREAM))
        theory = tv_rate_curve(spec.q, spec.h, cfg.n_list)
        rows = []
        for idx, n in enumerate(cfg.n_list):
            mean, se = coupled_l2(spec.q, spec.h, n, N, cfg.batch, Seed(cfg.seed, idx))
            zn = sample_zn(spec, n, cfg.batch, Seed(cfg.seed, _PROXY_STREAM + 1 + idx))
            ks = ks_distance_two_sample(SampleSet(zn), SampleSet(proxy))
            rows.append((n, float(theory[idx]), mean, se, ks))
        fit = rate_fit([(r[0], r[2]) for r in rows])
        _emit_table(cfg, ["n", "rate_theory", "coupled_mean", "coupled_se", "ks"], rows, fit=fit, meta=meta)
        return 0
    if spec.regime is Regime.CRITICAL:
        if cfg.batch < 100:
            raise ConfigError(f"critical rate scan needs --batch >= 100, got {cfg.batch}")
        cspec = CriticalSpec(spec.q)
        rows = []
        for idx, n in enumerate(cfg.n_list):
            est = berry_estimate(cspec, n, cfg.batch, Seed(cfg.seed, idx))
            zn = sample_zn(spec, n, cfg.batch, Seed(cfg.seed, _PROXY_STREAM + 1 + idx))
            ks = ks_distance(SampleSet(zn), ndtr)
            rows.append((n, est.mean_sq, est.se, est.tv_bound, ks))
        fit = rate_fit([(r[0], r[3]) for r in rows])
        _emit_table(cfg, ["n", "mean_sq", "se", "tv_bound", "ks"], rows, fit=fit, meta=meta)
        return 0
    rows = []
    for idx, n in enumerate(cfg.n_list):
        zn = sample_zn(spec, n, cfg.batch, Seed(cfg.seed, idx))
        ks = ks_distance(SampleSet(zn), ndtr)
        rows.append((n, ks, float(zn.var(ddof=1))))
    fit = rate_fit([(n, ks) for n, ks, _ in rows])
    _emit_table(cfg, ["n", "ks", "var"], rows, fit=fit, meta=meta)
    return 0


def cmd_bracket_table(cfg: RunConfig) -> int:
    spec = cfg.spec
    if spec.regime is not Regime.SUPERCRITICAL:
        raise ConfigError(
            f"bracket-table requires the supercritical regime; "
            f"H={spec.h.value} with q={spec.q} is {spec.regime.value}"
        )
    if cfg.rmax < 0:
        raise ConfigError(f"--rmax must be >= 0, got {cfg.rmax}")
    t1, t2, t3, br = bracket_table(spec.q, spec.h, cfg.rmax)
    rows = [
        (r, float(t1[r]), float(t2[r]), float(t3[r]), float(br[r]))
        for r in range(cfg.rmax + 1)
    ]
    _emit_table(cfg, ["r", "t1", "t2", "t3", "bracket"], rows, meta={"q": spec.q, "H": spec.h.value})
    return 0


_COMMANDS = {
    "sample": cmd_sample,
    "discrepancy": cmd_discrepancy,
    "berry": cmd_berry,
    "rate": cmd_rate,
    "bracket-table": cmd_bracket_table,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hermvar",
        description="Hermite power variations of fractional Brownian motion: "
        "exact discrepancies, Berry-type bounds, and rate sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("sample", "write exact fGn paths as CSV, one file per n"),
        ("discrepancy", "exact kernel discrepancy sweep (supercritical)"),
        ("berry", "Monte Carlo Berry-type bound sweep (critical)"),
        ("rate", "regime-dispatched empirical rate scan"),
        ("bracket-table", "per-lag bracket terms t1, t2, t3 (supercritical)"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--q", type=int, default=None, help="Hermite order, 2..16")
        p.add_argument("--hurst", default=None, help="Hurst index in (0,1), or 'critical'")
        p.add_argument("--n", default=None, help="comma list '64,128' or dyadic range '2^8..16'")
        p.add_argument("--batch", type=int, default=None, help="Monte Carlo batch size")
        p.add_argument("--seed", type=int, default=None, help="master seed (streams derive from it)")
        p.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
        p.add_argument("--out", default=None, help="output path (directory for sample)")
        p.add_argument("--config", default=None, help="flat key = value config file")
        if name == "rate":
            p.add_argument(
                "--proxy-n",
                dest="proxy_n",
                type=int,
                default=None,
                help="resolution of the coupled limit proxy (supercritical; default 4096)",
            )
        if name == "bracket-table":
            p.add_argument("--rmax", type=int, default=None, help="largest lag in the table")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"hermvar: error: {exc}", file=sys.stderr)
        return 2
    except (FactorizationError, FloatingPointError) as exc:
        print(f"hermvar: numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"hermvar: i/o failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
