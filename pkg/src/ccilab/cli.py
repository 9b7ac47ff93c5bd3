"""Batch runner: every scenario as a subcommand emitting CSV and SVG files.

Each subcommand reads a JSON config, evaluates its parameter grid, and
writes RFC-4180 CSV tables (plus deterministic SVG line plots where a
figure is meaningful).  Runs are reproducible: a fixed config and seed
yield byte-identical CSV output, and grid points may be evaluated in
parallel (capped by the CCILAB_THREADS environment variable) without
affecting row order.

Config schemas (JSON objects; grids are either {"start", "stop", "step"}
or {"values": [...]}):

  erasure    {"visibility": <grid>, "gamma": float, "phi": float}
  threshold  {"n1": int, "n2": int, "n_photon": int, "aux_norms": [floats]}
  bell       {"visibility": <grid>, "overlap": <grid>, "phi": float}
  alkali     {"radial_file": str, "configurations": ["open", "closed"],
              "draws": int, "suppress_top_channel": bool, "input_port": -1|+1|null}
  response   {"base_frequency": float, "amp1": float, "amp2": float,
              "phi1": <grid>, "phi2": float}

Exit codes: 0 success, 2 config error, 3 input-file error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import alkali as alkali_mod
from . import bell as bell_mod
from . import delayed_choice as dc_mod
from . import erasure as erasure_mod
from . import response as response_mod
from .interferometer import metrics, schmidt, symmetric_state, synthetic_outgoing_pair
from .oracle import grid_optimize
from .field import coherent_amplitude

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_VERIFY = 4

RESIDUAL_CEILING = 1e-9


class ConfigError(Exception):
    pass


class InputFileError(Exception):
    pass


class VerificationFailure(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _grid(cfg: dict, key: str, default: dict, step_override: float | None) -> list[float]:
    spec = cfg.get(key, default)
    if isinstance(spec, dict) and "values" in spec:
        values = [float(v) for v in spec["values"]]
    elif isinstance(spec, dict):
        try:
            start, stop = float(spec["start"]), float(spec["stop"])
            step = float(step_override if step_override is not None else spec["step"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"grid {key!r} needs start/stop/step or values") from exc
        if step <= 0:
            raise ConfigError(f"grid {key!r} needs a positive step")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [start + i * step for i in range(count)]
    else:
        raise ConfigError(f"grid {key!r} must be an object")
    if not values:
        raise ConfigError(f"grid {key!r} is empty")
    return values


def _thread_count() -> int:
    raw = os.environ.get("CCILAB_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    workers = _thread_count()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _save_plot(path: Path, curves, xlabel: str, ylabel: str, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "ccilab"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for x, y, label in curves:
        ax.plot(x, y, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_erasure(cfg: dict, out: Path, fmt: str, step: float | None, seed: int) -> int:
    grid = _grid(cfg, "visibility", {"start": 0.0, "stop": 0.95, "step": 0.05}, step)
    gamma = float(cfg.get("gamma", 0.4))
    phi = float(cfg.get("phi", 0.3))

    def evaluate(v: float) -> list:
        one_out, n_out = synthetic_outgoing_pair(v, phi)
        state = symmetric_state(one_out, n_out, gamma)
        m = metrics(state)
        dec = schmidt(state)
        ports = erasure_mod.conditioned_ports(state, erasure_mod.erasure_projector(dec))
        click_contrast = abs(ports.click[+1] - ports.click[-1])
        noclick_contrast = abs(ports.noclick[+1] - ports.noclick[-1])
        return [
            v,
            m.predictability,
            m.distinguishability,
            m.coherence,
            m.concurrence,
            m.lambda_plus,
            m.lambda_minus,
            click_contrast,
            noclick_contrast,
            ports.click_weight,
        ]

    rows = _parallel_map(evaluate, grid)
    header = [
        "visibility[dimensionless]",
        "predictability[|w+-w-|]",
        "distinguishability[trace-norm]",
        "coherence[2*trace-norm]",
        "concurrence[sqrt(1-V^2)]",
        "lambda_plus[(1+V)/2]",
        "lambda_minus[(1-V)/2]",
        "click_contrast[at phase phi+gamma]",
        "noclick_contrast[at phase phi+gamma]",
        "click_weight[lambda_plus]",
    ]
    if fmt in ("csv", "both"):
        _write_csv(out / "erasure.csv", header, rows)
    return EXIT_OK


def cmd_threshold(cfg: dict, out: Path, fmt: str, step: float | None, seed: int) -> int:
    n1 = int(cfg.get("n1", 2))
    n2 = int(cfg.get("n2", 1))
    n_photon = int(cfg.get("n_photon", 2))
    if n2 < 1 or n1 < n_photon:
        raise ConfigError("need n1 >= n_photon and n2 >= 1")
    aux_norms = [float(v) for v in cfg.get("aux_norms", [0.6, 1.0, 1.5])]
    alpha, beta, u = erasure_mod.optimal_aux_direction(n1, n2)
    norm_opt = erasure_mod.optimal_aux_norm(n1, n2, n_photon, (alpha, beta))

    rows = []
    for norm in aux_norms + [norm_opt]:
        rep = erasure_mod.threshold_scheme(n1, n2, n_photon, (alpha, beta), norm)
        kind = "optimum" if norm == norm_opt else "sweep"
        rows.append(
            [
                kind,
                norm,
                rep.alpha_abs,
                rep.beta_abs,
                rep.u,
                rep.v_noclick,
                rep.v_click,
                rep.weight_noclick,
                rep.matrix_weight,
            ]
        )

    # independent grid search over direction and amplitude: the usable
    # weight (product of the two projection amplitudes) peaks where the
    # no-click fringes are perfect, so its maximum is the optimum weight
    def usable_weight(a: float, norm: float) -> float:
        b = math.sqrt(max(0.0, 1.0 - a * a))
        z = (norm * a, norm * b)
        amp_one = coherent_amplitude(z, (n1, n2 - 1))
        amp_n = coherent_amplitude(z, (n1 - n_photon, n2))
        return abs(amp_one) * abs(amp_n)

    (a_best, norm_best), w_best = grid_optimize(
        usable_weight, [(0.0, 1.0), (1e-6, 4.0)], resolution=200
    )
    rows.append(
        [
            "grid_search",
            norm_best,
            a_best,
            math.sqrt(max(0.0, 1.0 - a_best**2)),
            1.0 / a_best**2 if a_best > 0 else math.inf,
            math.nan,
            math.nan,
            w_best,
            w_best,
        ]
    )
    header = [
        "row_kind",
        "aux_norm[coherent amplitude]",
        "alpha_abs[overlap with mode 1]",
        "beta_abs[overlap with mode 2]",
        "u[1/alpha^2]",
        "v_noclick[fringe contrast]",
        "v_click[w*v/(1-w)]",
        "weight_noclick[closed form]",
        "weight_noclick[matrix]",
    ]
    if fmt in ("csv", "both"):
        _write_csv(out / "threshold.csv", header, rows)
    return EXIT_OK


def cmd_bell(cfg: dict, out: Path, fmt: str, step: float | None, seed: int) -> int:
    vis_grid = _grid(cfg, "visibility", {"start": 0.0, "stop": 0.95, "step": 0.05}, step)
    s_grid = _grid(cfg, "overlap", {"start": 0.05, "stop": 0.95, "step": 0.05}, step)
    gamma = float(cfg.get("gamma", 0.0))
    phi = float(cfg.get("phi", 0.0))

    def erasure_point(v: float) -> list:
        one_out, n_out = synthetic_outgoing_pair(v, phi)
        state = symmetric_state(one_out, n_out, gamma)
        setting = bell_mod.erasure_setting(
            v, state.phi, state.gamma, one_out, n_out, schmidt(state)
        )
        matrix = bell_mod.bell_expectation(state, setting)
        closed = bell_mod.erasure_closed_form(v)
        return [v, matrix, closed, abs(matrix - closed)]

    def dc_point(s: float) -> list:
        state, _, open_state, closed_state = dc_mod.delayed_choice_scenario(0.0, s)
        setting = bell_mod.delayed_choice_setting(s, open_state, closed_state)
        matrix = bell_mod.bell_expectation(state, setting)
        closed = bell_mod.delayed_choice_closed_form(0.0, s)
        return [s, matrix, closed, abs(matrix - closed)]

    rows_er = _parallel_map(erasure_point, vis_grid)
    rows_dc = _parallel_map(dc_point, s_grid)
    bad = [r for r in rows_er + rows_dc if r[3] > RESIDUAL_CEILING]
    if fmt in ("csv", "both"):
        _write_csv(
            out / "bell_erasure.csv",
            [
                "visibility[dimensionless]",
                "bell_matrix[<B>]",
                "bell_closed_form[2*sqrt(2-V^2)]",
                "residual[abs difference]",
            ],
            rows_er,
        )
        _write_csv(
            out / "bell_delayed_choice.csv",
            [
                "overlap[branch overlap s]",
                "bell_matrix[<B>]",
                "bell_closed_form[2*sqrt(6-4*sqrt(2)*s)/(2-sqrt(2)*s)]",
                "residual[abs difference]",
            ],
            rows_dc,
        )
    if fmt in ("svg", "both"):
        _save_plot(
            out / "bell_erasure.svg",
            [([r[0] for r in rows_er], [r[1] for r in rows_er], "matrix <B>")],
            "fringe visibility",
            "CHSH value",
            "Erasure Bell curve",
        )
        _save_plot(
            out / "bell_delayed_choice.svg",
            [([r[0] for r in rows_dc], [r[1] for r in rows_dc], "matrix <B>")],
            "branch overlap",
            "CHSH value",
            "Wave/particle superposition Bell curve",
        )
    if bad:
        raise VerificationFailure(
            f"{len(bad)} grid points exceed the {RESIDUAL_CEILING:g} residual ceiling"
        )
    return EXIT_OK


def cmd_alkali(cfg: dict, out: Path, fmt: str, step: float | None, seed: int) -> int:
    radial_file = cfg.get("radial_file")
    if radial_file is None:
        raise ConfigError("alkali config needs 'radial_file'")
    try:
        base = alkali_mod.load_radial_params(radial_file)
    except FileNotFoundError as exc:
        raise InputFileError(f"radial parameter file not found: {radial_file}") from exc
    except (ValueError, json.JSONDecodeError) as exc:
        raise InputFileError(f"cannot parse radial parameter file: {exc}") from exc
    configurations = cfg.get("configurations", ["open", "closed"])
    draws = int(cfg.get("draws", 0))
    suppress = bool(cfg.get("suppress_top_channel", False))
    input_port = cfg.get("input_port")
    rng = np.random.default_rng(seed)

    sources = [("file", base)]
    for i in range(draws):
        sources.append((f"draw{i}", alkali_mod.RadialParams.random(rng)))

    rows = []
    any_required_failure = False
    for which in configurations:
        if which not in ("open", "closed"):
            raise ConfigError(f"unknown configuration {which!r}")
        geometry = (
            alkali_mod.Geometry.open_config() if which == "open" else alkali_mod.Geometry.closed_config()
        )
        for source, params in sources:
            if which == "closed" and suppress:
                params = params.with_top_channel_suppressed()
            table = alkali_mod.spin_amplitudes(geometry, params)
            report = alkali_mod.verify_configuration(table, which)
            for check in report.checks:
                required = True
                if which == "closed" and input_port is not None:
                    required = ("spin-down" in check.name) == (int(input_port) == -1)
                rows.append(
                    [which, source, check.name, "PASS" if check.passed else "FAIL",
                     check.residual, required]
                )
                if required and not check.passed:
                    any_required_failure = True

    header = [
        "configuration",
        "radial_source",
        "check[condition name]",
        "verdict",
        "residual[relative]",
        "required",
    ]
    if fmt in ("csv", "both"):
        _write_csv(out / "alkali_report.csv", header, rows)
    for row in rows:
        print(f"{row[0]:6s} {row[1]:8s} {row[3]:4s} residual={row[4]:.3e}  {row[2]}")
    if any_required_failure:
        raise VerificationFailure("alkali configuration checks failed")
    return EXIT_OK


def cmd_response(cfg: dict, out: Path, fmt: str, step: float | None, seed: int) -> int:
    base = float(cfg.get("base_frequency", 1.0))
    amp1 = float(cfg.get("amp1", 0.7))
    amp2 = float(cfg.get("amp2", 0.5))
    phi2 = float(cfg.get("phi2", 0.0))
    phis = _grid(cfg, "phi1", {"start": 0.0, "stop": 6.2, "step": 0.2}, step)
    kernels = response_mod.toy_kernels()

    def point(phi1: float) -> list:
        field_1 = response_mod.Spectrum.from_cosines([(base, amp1, phi1)])
        field_2 = response_mod.Spectrum.from_cosines([(2.0 * base, amp2, phi2)])
        cross = response_mod.time_averaged_cross_term(kernels, field_1, field_2)
        direct1 = response_mod.time_averaged_response(kernels, field_1)
        direct2 = response_mod.time_averaged_response(kernels, field_2)
        return [phi1, 2.0 * phi1 - phi2, cross, direct1, direct2]

    rows = _parallel_map(point, phis)
    control = np.array([r[1] for r in rows])
    values = np.array([r[2] for r in rows])
    amplitude, theta, resid = response_mod.fit_cosine(control, values)
    for row in rows:
        row.append(amplitude * math.cos(row[1] - theta))
    header = [
        "phi1[rad]",
        "control_phase[2*phi1-phi2, rad]",
        "cross_dc[time-averaged cross term]",
        "direct1_dc[time-averaged]",
        "direct2_dc[time-averaged]",
        "cosine_fit[a*cos(control-theta)]",
    ]
    if fmt in ("csv", "both"):
        _write_csv(out / "response.csv", header, rows)
    if fmt in ("svg", "both"):
        _save_plot(
            out / "response.svg",
            [(control.tolist(), values.tolist(), "cross term")],
            "control phase 2*phi1 - phi2",
            "time-averaged cross response",
            "Two-color cross response",
        )
    print(f"cosine fit: amplitude={amplitude:.9g} theta={theta:.9g} max residual={resid:.3e}")
    if resid > RESIDUAL_CEILING:
        raise VerificationFailure("cross term deviates from a pure cosine")
    return EXIT_OK


COMMANDS = {
    "erasure": cmd_erasure,
    "threshold": cmd_threshold,
    "bell": cmd_bell,
    "alkali": cmd_alkali,
    "response": cmd_response,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ccilab", description="batch scenarios for the phase-control interferometry lab"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", default="ccilab-out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--grid-step", type=float, default=None)
        p.add_argument("--format", choices=("csv", "svg", "both"), default="csv")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return COMMANDS[args.command](
            cfg, Path(args.out), args.format, args.grid_step, args.seed
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputFileError as exc:
        print(f"input file error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
