"""Batch harness: run models described by JSON configs, write CSV/JSON.

``intham run config.json`` executes one mode and writes its outputs into the
chosen directory.  Modes:

- ``trajectory``: step one or more decoupled pairs, dump the orbit table.
- ``invert``: run N steps forward then N backward, report exact match.
- ``shell``: enumerate and classify one energy shell.
- ``spectral``: shell permutation, eigenphase table, operator residuals.
- ``census``: site counts and continuum periods over an energy ladder.
- ``margolus-contrast``: two-layer automaton energy series plus round trip.
- ``lightcone``: spread of a single-site perturbation against its bound.

Exit status: 0 on success, 2 for configuration problems, 3 for model errors
(unbounded contours, unclosed shells, regime violations, failed checks), with
a JSON error report on stderr naming the offending pair or site.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import fields
from .census import census, census_rows
from .contours import classify_site, enumerate_shell, next_site
from .errors import ConfigError, IntHamError
from .evolver import PhaseState, decoupled, step, step_inverse, total_energy
from .hamiltonians import PowerLawFamily, fraction_from_json, hamiltonian_from_json
from .spectral import (
    ShellPermutation,
    TruncationConfig,
    eigenphases,
    hfract_operator_check,
    spectrum_rows,
)

MODES = (
    "trajectory",
    "invert",
    "shell",
    "spectral",
    "census",
    "margolus-contrast",
    "lightcone",
)


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"config needs '{key}' for this mode")
    return cfg[key]


def _load_models(cfg: dict):
    if "models" in cfg:
        entries = cfg["models"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("'models' must be a nonempty list")
    elif "model" in cfg:
        entries = [cfg["model"]]
    else:
        raise ConfigError("config needs 'model' or 'models'")
    try:
        return [hamiltonian_from_json(m) for m in entries]
    except ValueError as exc:
        raise ConfigError(f"bad model: {exc}") from exc


def _load_start(cfg: dict, pairs: int) -> PhaseState:
    start = _require(cfg, "start")
    if pairs == 1 and len(start) == 2 and not isinstance(start[0], list):
        start = [start]
    if len(start) != pairs:
        raise ConfigError(f"'start' must give {pairs} (Q, P) pairs")
    try:
        qs = tuple(int(s[0]) for s in start)
        ps = tuple(int(s[1]) for s in start)
    except (TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"bad 'start' entry: {start!r}") from exc
    return PhaseState(qs, ps)


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _flat(state: PhaseState) -> list[int]:
    out = []
    for q, p in zip(state.positions, state.momenta):
        out.extend((q, p))
    return out


def _mode_trajectory(cfg: dict, out: Path, steps: int, seed: int) -> dict:
    system = decoupled(_load_models(cfg))
    state = _load_start(cfg, system.pairs)
    energy = total_energy(state, system)
    rows = [[state.time, *_flat(state), energy]]
    for _ in range(steps):
        state = step(state, system)
        rows.append([state.time, *_flat(state), total_energy(state, system)])
    header = ["t"]
    for i in range(system.pairs):
        header += [f"q{i}", f"p{i}"]
    header.append("energy")
    _write_csv(out / "trajectory.csv", header, rows)
    return {
        "ok": True,
        "steps": steps,
        "energy": energy,
        "final": _flat(state),
    }


def _mode_invert(cfg: dict, out: Path, steps: int, seed: int) -> dict:
    system = decoupled(_load_models(cfg))
    initial = _load_start(cfg, system.pairs)
    energy = total_energy(initial, system)
    state = initial
    for _ in range(steps):
        state = step(state, system)
    midway = _flat(state)
    for _ in range(steps):
        state = step_inverse(state, system)
    match = state == initial
    return {
        "ok": match,
        "steps": steps,
        "energy": energy,
        "midway": midway,
        "match": match,
    }


def _mode_shell(cfg: dict, out: Path, steps: int, seed: int) -> dict:
    (ham,) = _load_models(cfg)
    energy = int(_require(cfg, "energy"))
    sites = enumerate_shell(ham, energy)
    rows = []
    by_kind: dict[str, int] = {}
    for q, p in sites:
        kind = classify_site(ham, q, p, energy).value
        by_kind[kind] = by_kind.get(kind, 0) + 1
        rows.append([q, p, kind])
    _write_csv(out / "shell.csv", ["q", "p", "kind"], rows)
    return {"ok": True, "energy": energy, "count": len(sites), "by_kind": by_kind}


def _mode_spectral(cfg: dict, out: Path, steps: int, seed: int) -> dict:
    (ham,) = _load_models(cfg)
    energy = int(_require(cfg, "energy"))
    shell = enumerate_shell(ham, energy)
    if not shell:
        raise ConfigError(f"energy level {energy} has no states in the window")
    perm = ShellPermutation.from_step(lambda s: next_site(ham, *s), shell, energy)
    entries = eigenphases(perm)
    _write_csv(
        out / "spectral.csv",
        ["cycle", "length", "index", "omega", "phase", "energy", "total", "boundary"],
        spectrum_rows(entries),
    )
    report = {
        "ok": True,
        "energy": energy,
        "size": perm.size,
        "cycle_lengths": sorted(len(c) for c in perm.cycles),
        "boundary_count": sum(1 for e in entries if e.boundary),
        "operator_check": None,
    }
    size_cap = int(cfg.get("size_cap", 64))
    wanted = cfg.get("operator_check", perm.size <= size_cap)
    if wanted:
        cfg_trunc = TruncationConfig.for_radius(
            float(fraction_from_json(cfg.get("radius", 20)))
        )
        result = hfract_operator_check(perm, cfg_trunc, size_cap=size_cap)
        report["operator_check"] = {
            "radius": cfg_trunc.radius,
            "terms": cfg_trunc.terms,
            "max_residual": result.max_residual,
        }
    return report


def _census_family(entry: dict, kind: str) -> PowerLawFamily:
    if not isinstance(entry, dict):
        raise ConfigError(f"census '{kind}' must be an object")
    exponent = fraction_from_json(entry.get("exponent", 1))
    try:
        if kind == "kinetic":
            return PowerLawFamily(
                "kinetic",
                exponent,
                mass=fraction_from_json(entry.get("mass", "1/2")),
            )
        return PowerLawFamily(
            "potential", exponent, scale=fraction_from_json(entry.get("scale", 1))
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _mode_census(cfg: dict, out: Path, steps: int, seed: int) -> dict:
    section = _require(cfg, "census")
    kinetic = _census_family(_require(section, "kinetic"), "kinetic")
    potential = _census_family(_require(section, "potential"), "potential")
    energies = _require(section, "energies")
    if (
        isinstance(energies, list)
        and len(energies) == 2
        and all(isinstance(e, int) for e in energies)
        and energies[1] > energies[0] + 1
    ):
        energies = range(energies[0], energies[1] + 1)
    report = census(
        kinetic,
        potential,
        energies,
        fit_floor=int(section.get("fit_floor", 10)),
        with_periods=bool(section.get("periods", True)),
    )
    _write_csv(
        out / "census.csv", ["energy", "count", "period", "ratio"], census_rows(report)
    )
    return {
        "ok": True,
        "kinetic_exponent": str(report.kinetic_exponent),
        "potential_exponent": str(report.potential_exponent),
        "exponent": report.exponent,
        "predicted_exponent": report.predicted_exponent,
        "amplitude": report.amplitude,
        "constant": report.constant,
        "fit_floor": report.fit_floor,
    }


def _field_setup(cfg: dict, seed: int):
    try:
        return fields.spec_from_json(_require(cfg, "field"))
    except ValueError as exc:
        raise ConfigError(f"bad field spec: {exc}") from exc


def _random_array(rng: random.Random, shape, lo: int, hi: int):
    flat = [rng.randint(lo, hi) for _ in range(int(np.prod(shape)))]
    return np.array(flat, dtype=np.int64).reshape(shape)


def _field_state(cfg: dict, spec, rng: random.Random) -> fields.FieldState:
    shape = (spec.components, *spec.shape.sizes)
    if "state" in cfg:
        state = fields.state_from_json(cfg["state"])
        if state.phi.shape != shape:
            raise ConfigError(f"state shape {state.phi.shape} != {shape}")
        return state
    spread = cfg.get("random", {})
    lo = int(spread.get("lo", -3))
    hi = int(spread.get("hi", 3))
    return fields.FieldState(
        _random_array(rng, shape, lo, hi), _random_array(rng, shape, lo, hi)
    )


def _mode_margolus(cfg: dict, out: Path, steps: int, seed: int) -> dict:
    spec = _field_setup(cfg, seed)
    rng = random.Random(seed)
    shape = (spec.components, *spec.shape.sizes)
    if "layers" in cfg:
        layers = cfg["layers"]
        state = fields.MargolusFieldState(layers["older"], layers["newer"])
    else:
        spread = cfg.get("random", {})
        lo = int(spread.get("lo", -3))
        hi = int(spread.get("hi", 3))
        state = fields.MargolusFieldState(
            _random_array(rng, shape, lo, hi), _random_array(rng, shape, lo, hi)
        )
    if state.newer.shape != shape:
        raise ConfigError(f"layer shape {state.newer.shape} != {shape}")
    initial = state
    energies = [fields.margolus_energy(state, spec)]
    for _ in range(steps):
        state = fields.margolus_step(state)
        energies.append(fields.margolus_energy(state, spec))
    back = state
    for _ in range(steps):
        back = fields.margolus_unstep(back)
    reversible = fields.margolus_states_equal(back, initial)
    rows = [[t, e] for t, e in enumerate(energies)]
    _write_csv(out / "margolus-contrast.csv", ["t", "energy"], rows)
    return {
        "ok": reversible,
        "steps": steps,
        "reversible": reversible,
        "drifted": energies[-1] != energies[0],
        "energies": [str(e) for e in energies],
    }


def _mode_lightcone(cfg: dict, out: Path, steps: int, seed: int) -> dict:
    spec = _field_setup(cfg, seed)
    rng = random.Random(seed)
    base = _field_state(cfg, spec, rng)
    perturb = cfg.get("perturb", {})
    site = tuple(perturb.get("site", (0,) * spec.shape.dimensions))
    component = int(perturb.get("component", 0))
    amount = int(perturb.get("amount", 1))
    if len(site) != spec.shape.dimensions:
        raise ConfigError(f"perturbation site {site} has wrong dimension")
    phi = np.array(base.phi)
    phi[(component, *site)] += amount
    other = fields.FieldState(phi, base.mom)

    rows = []
    ok = True
    a, b = base, other
    for t in range(1, steps + 1):
        a = fields.step(a, spec)
        b = fields.step(b, spec)
        diff = fields.diff_sites(a, b)
        radius = fields.spread_radius(spec.shape, site, diff)
        cap = 2 * t
        ok = ok and radius <= cap
        rows.append([t, len(diff), radius, cap])
    _write_csv(out / "lightcone.csv", ["t", "changed", "radius", "cap"], rows)
    return {"ok": ok, "steps": steps, "origin": list(site), "within_bound": ok}


_MODE_RUNNERS = {
    "trajectory": _mode_trajectory,
    "invert": _mode_invert,
    "shell": _mode_shell,
    "spectral": _mode_spectral,
    "census": _mode_census,
    "margolus-contrast": _mode_margolus,
    "lightcone": _mode_lightcone,
}


def run(
    config: dict,
    mode: Optional[str] = None,
    steps: Optional[int] = None,
    out_dir: Optional[str] = None,
    seed: Optional[int] = None,
) -> tuple[int, dict]:
    """Execute one mode; returns (exit status, report).

    Raises :class:`ConfigError` for bad configs and :class:`IntHamError`
    subclasses for model failures; the CLI wrapper maps those to exit codes.
    """
    mode = mode or config.get("mode")
    if mode not in _MODE_RUNNERS:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    if steps is None:
        steps = int(config.get("steps", 8))
    if steps < 0:
        raise ConfigError("steps must be nonnegative")
    if seed is None:
        seed = int(config.get("seed", 0))
    out = Path(out_dir if out_dir is not None else config.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)

    report = _MODE_RUNNERS[mode](config, out, steps, seed)
    report = {"mode": mode, "seed": seed, **report}
    with (out / f"{mode}.json").open("w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return (0 if report.get("ok", True) else 3), report


def _error_report(exc: IntHamError) -> dict:
    report = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("pair_index", "field_site", "site", "energy", "argument",
                 "size", "limit", "degenerate"):
        value = getattr(exc, attr, None)
        if value is not None:
            report[attr] = repr(value) if not isinstance(
                value, (int, float, bool, str)
            ) else value
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="intham",
        description="Integer-Hamiltonian automata harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runner = sub.add_parser("run", help="execute a JSON run config")
    runner.add_argument("config", help="path to the JSON config")
    runner.add_argument("--mode", choices=MODES, help="override config mode")
    runner.add_argument("--steps", type=int, help="override step count")
    runner.add_argument("--out", help="output directory")
    runner.add_argument("--seed", type=int, help="override RNG seed")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    if not isinstance(config, dict):
        print("config must be a JSON object", file=sys.stderr)
        return 2

    try:
        status, report = run(
            config,
            mode=args.mode,
            steps=args.steps,
            out_dir=args.out,
            seed=args.seed,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IntHamError as exc:
        json.dump(_error_report(exc), sys.stderr, indent=2, sort_keys=True)
        sys.stderr.write("\n")
        return 3
    if status != 0:
        print(f"{report['mode']}: check failed", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
