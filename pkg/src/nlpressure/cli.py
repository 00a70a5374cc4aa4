"""Command-line experiment runner.

    nlpressure CONFIG [--output-dir DIR] [--workers N] [--precision float|exact]
                      [--seed S] [--validate-only]

Exit status: 0 all audits passed, 1 an audit failed, 2 invalid config,
3 an exact computation exceeded the resolution cap.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy
import yaml

from . import __version__
from .covers import Cover, CylSet, enumerate_assignments
from .energy import CylinderFunction, EnergyFunctional
from .entropy import h_plus, h_rate_cover, htop_cover
from .factor import SlidingBlockCode, factor_pressure_identity
from .measures import MarkovMeasure
from .pressure import (
    ResolutionCapExceeded,
    greedy_bn,
    greedy_disjointify,
    pressure_report,
)
from .subshift import Subshift, transition_diagnostics
from .variational import abundance_check, optimize

log = logging.getLogger("nlpressure")

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3
TASKS = ("pressure", "entropy", "variational", "factor_audit", "inequality_audit")


class ConfigError(Exception):
    def __init__(self, diagnostics):
        super().__init__("; ".join(d["message"] for d in diagnostics))
        self.diagnostics = diagnostics


def _schema() -> dict:
    return json.loads(resources.files("nlpressure").joinpath("configs/schema.json").read_text())


def _number(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def _word(w) -> tuple:
    if isinstance(w, str):
        return tuple(int(c) for c in w)
    return tuple(int(c) for c in w)


def _n_values(spec) -> list:
    if isinstance(spec, dict):
        return list(range(spec["start"], spec["stop"] + 1))
    return sorted(set(spec))


def validate(config) -> list:
    """Problems with ``config``, each a ``{"path", "message"}`` dict; never runs tasks."""
    out = []
    if not isinstance(config, dict):
        return [{"path": "", "message": "config must be a mapping"}]
    validator = jsonschema.Draft202012Validator(_schema())
    for err in sorted(validator.iter_errors(config), key=lambda e: list(e.path)):
        out.append({"path": "/".join(map(str, err.path)), "message": err.message})
    if out:
        return out
    rows = config["system"]["transitions"]
    for msg in transition_diagnostics(rows):
        out.append({"path": "system/transitions", "message": msg})
    if "alphabet_size" in config["system"] and config["system"]["alphabet_size"] != len(rows):
        out.append({"path": "system/alphabet_size", "message": "alphabet_size does not match the matrix"})
    if out:
        return out
    system = Subshift.from_matrix(rows)
    if not config["tasks"]:
        out.append({"path": "tasks", "message": "task list is empty"})
    n_vals = _n_values(config["n_range"])
    if not n_vals:
        out.append({"path": "n_range", "message": "n_range is empty"})
    names = set()
    for i, c in enumerate(config["covers"]):
        if c["name"] in names:
            out.append({"path": f"covers/{i}/name", "message": f"duplicate cover name {c['name']!r}"})
        names.add(c["name"])
        try:
            _cover(system, c)
        except ValueError as exc:
            msg = str(exc)
            if "not a cover" in msg:
                msg = f"not a cover: {c['name']!r} misses part of the space"
            out.append({"path": f"covers/{i}", "message": msg})
    try:
        _energy(system, config.get("energy", {}))
    except (ValueError, KeyError) as exc:
        out.append({"path": "energy", "message": str(exc)})
    for i, m in enumerate(config.get("entropy", {}).get("measures", [])):
        try:
            _markov(system, m)
        except ValueError as exc:
            out.append({"path": f"entropy/measures/{i}", "message": str(exc)})
    if "factor_audit" in config["tasks"]:
        if "factor" not in config:
            out.append({"path": "factor", "message": "factor_audit needs a factor section"})
        else:
            try:
                _code(system, config["factor"])
            except ValueError as exc:
                out.append({"path": "factor", "message": str(exc)})
    if not out and n_vals and config.get("cap") is not None:
        cap = config["cap"]
        width = max([c.resolution for _, c in _covers(system, config)]
                    + [_energy(system, config.get("energy", {})).window, 1])
        need = max(n_vals) + max(width - 1, max(config.get("m_list") or [0]))
        if need > cap:
            out.append({"path": "cap", "message": f"cap {cap} is below the resolution {need} implied by n_range"})
    return out


def _covers(system: Subshift, config: dict) -> list:
    return [(c["name"], _cover(system, c)) for c in config["covers"]]


def _cover(system: Subshift, spec: dict) -> Cover:
    elements = []
    for words in spec["elements"]:
        ws = [_word(w) for w in words]
        for w in ws:
            if not system.is_admissible(w):
                raise ValueError(f"word {''.join(map(str, w))} is not admissible")
        elements.append(CylSet.of(system, ws))
    if any(e.is_empty() for e in elements):
        raise ValueError("cover elements must be nonempty")
    return Cover(system, tuple(elements))


def _energy(system: Subshift, spec: dict) -> EnergyFunctional:
    terms = []
    for t in spec.get("terms", []):
        values = {_word(k): _number(v) for k, v in t["values"].items()}
        window = t.get("window", max((len(k) for k in values), default=1))
        if any(len(k) > window for k in values):
            raise ValueError("energy table word longer than its window")
        f = CylinderFunction.from_mapping(system, window, values, default=_number(t.get("default", 0)))
        terms.append((tuple(_number(c) for c in t.get("poly", [0, 1])), f))
    return EnergyFunctional(tuple(terms))


def _markov(system: Subshift, spec: dict) -> MarkovMeasure:
    P = np.array([[float(_number(v)) for v in row] for row in spec["transition"]])
    pi = spec.get("stationary")
    if pi is not None:
        pi = [float(_number(v)) for v in pi]
    return MarkovMeasure(system, P, pi)


def _code(target: Subshift, spec: dict) -> SlidingBlockCode:
    source = Subshift.from_matrix(spec["source"])
    table = {_word(k): v for k, v in spec["block_map"].items()}
    words = source.words(spec["window"])
    missing = [w for w in words if w not in table]
    if missing:
        raise ValueError(f"block map has no entry for {''.join(map(str, missing[0]))}")
    return SlidingBlockCode(source, target, spec["window"], tuple(table[w] for w in words))


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        config = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError([{"path": "", "message": f"cannot parse config: {exc}"}])
    return config, raw


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


class _Task:
    def __init__(self, name, timings):
        self.name, self.timings = name, timings

    def __enter__(self):
        self.t0 = time.perf_counter()
        log.info("task %s started", self.name)
        return self

    def __exit__(self, *exc):
        self.timings[self.name] = self.timings.get(self.name, 0.0) + time.perf_counter() - self.t0
        return False


def run(config: dict, output_dir, workers: int = 1, precision: str | None = None,
        seed: int | None = None, raw: bytes | None = None) -> tuple:
    """Execute the configured tasks; returns ``(exit_code, manifest)``."""
    problems = validate(config)
    if problems:
        raise ConfigError(problems)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    system = Subshift.from_matrix(config["system"]["transitions"])
    E = _energy(system, config.get("energy", {}))
    covers = _covers(system, config)
    n_vals = _n_values(config["n_range"])
    m_list = config.get("m_list", [])
    tasks = config["tasks"]
    exact = (precision or config.get("precision", "float")) == "exact"
    if exact and not E.is_exact():
        raise ConfigError([{"path": "energy", "message": "exact precision needs rational energy values"}])
    seed = config.get("seed", 0) if seed is None else seed
    cap = config.get("cap")
    timings: dict = {}
    audits: dict = {"pressure": {}, "greedy": {}, "factor": None, "abundance": {}}
    counts = {"passed": 0, "failed": 0}

    def tally(ok: bool):
        counts["passed" if ok else "failed"] += 1

    reports = {}
    current = None
    try:
        if "pressure" in tasks or "inequality_audit" in tasks or "variational" in tasks:
            current = "pressure"
            with _Task("pressure", timings):
                audit = "inequality_audit" in tasks
                for name, U in covers:
                    reports[name] = pressure_report(system, U, E, n_vals, m_list, exact=exact,
                                                    window=config.get("window"), cap=cap,
                                                    audit=audit, workers=workers)
            header = None
            lines = []
            for name, rep in reports.items():
                text = rep.to_csv().splitlines()
                if header is None:
                    header = [text[0], "cover," + text[1]]
                lines += [f"{name}," + line for line in text[2:]]
            (out / "pressure.csv").write_text("\n".join(header + lines) + "\n")
            if audit:
                for name, rep in reports.items():
                    audits["pressure"][name] = rep.to_dict()["audits"]
                    for a in rep.audits:
                        for ok in a["checks"].values():
                            tally(ok)

        if "inequality_audit" in tasks:
            current = "inequality_audit"
            with _Task("inequality_audit", timings):
                for name, U in covers:
                    entries = []
                    partitions = list(enumerate_assignments(U))
                    for n in n_vals:
                        gb = greedy_bn(system, E, n, partitions, cover=U, exact=exact, cap=cap)
                        gd = greedy_disjointify(system, U, E, n, exact=exact, cap=cap)
                        tally(gb.passed)
                        tally(gd.passed)
                        entries.append({"n": n, "greedy_bn": gb.certificate,
                                        "greedy_disjointify": gd.certificate})
                    audits["greedy"][name] = entries

        if "entropy" in tasks:
            current = "entropy"
            with _Task("entropy", timings):
                spec = config.get("entropy", {})
                n_max = spec.get("n_max", min(4, max(n_vals)))
                measures = [(m["name"], _markov(system, m)) for m in spec.get("measures", [])]
                rows = ["# nlpressure entropy table, columns v1", "kind,cover,measure,n,value"]
                for name, U in covers:
                    est = htop_cover(system, U, n_max, cap=cap)
                    rows += [f"htop_cover,{name},,{n},{v!r}" for n, v in est.per_n]
                    for mname, mu in measures:
                        est = h_rate_cover(mu, U, n_max, cap=cap)
                        rows += [f"h_rate_cover,{name},{mname},{n},{v!r}" for n, v in est.per_n]
                        rows.append(f"h_plus,{name},{mname},{n_max},{h_plus(mu, U, n_max)!r}")
                (out / "entropy.csv").write_text("\n".join(rows) + "\n")

        if "variational" in tasks:
            current = "variational"
            with _Task("variational", timings):
                spec = config.get("variational", {})
                result = {}
                for name, U in covers:
                    rep = optimize(system, U, E, memory=spec.get("memory", 1),
                                   budget=spec.get("budget", 5000), n_starts=spec.get("starts", 3),
                                   seed=seed, n_ent=spec.get("n_ent", 4), workers=workers)
                    summ = reports[name].summary
                    rep.attach_pressure(summ["lower_p1"], summ["upper_p1"])
                    entry = rep.to_dict()
                    if rep.memory == 1:
                        ab = abundance_check(system, [rep.best_measure], U, E,
                                             spec.get("abundance_eps", 1e-3), n_ent=spec.get("n_ent", 4))
                        entry["abundance_check"] = ab
                        audits["abundance"][name] = ab
                    result[name] = entry
                _dump(out / "variational.json", result)

        if "factor_audit" in tasks:
            current = "factor_audit"
            with _Task("factor_audit", timings):
                fspec = config["factor"]
                code = _code(system, fspec)
                res = {}
                for name, U in covers:
                    r = factor_pressure_identity(code, U, E, range(1, fspec.get("n_max", 3) + 1),
                                                 exact=exact, cap=cap)
                    tally(r["passed"])
                    res[name] = r
                audits["factor"] = res
    except ResolutionCapExceeded as exc:
        manifest = _manifest(config, raw, seed, exact, workers, timings, counts, tasks)
        manifest["error"] = {"task": current, "message": str(exc)}
        _dump(out / "manifest.json", manifest)
        return EXIT_CAP, manifest

    _dump(out / "audits.json", {"counts": counts, **audits})
    manifest = _manifest(config, raw, seed, exact, workers, timings, counts, tasks)
    _dump(out / "manifest.json", manifest)
    return (EXIT_OK if counts["failed"] == 0 else EXIT_AUDIT), manifest


def _manifest(config, raw, seed, exact, workers, timings, counts, tasks) -> dict:
    blob = raw if raw is not None else json.dumps(config, sort_keys=True, default=str).encode()
    return {
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "versions": {
            "nlpressure": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "seed": seed,
        "precision": "exact" if exact else "float",
        "workers": workers,
        "tasks": list(tasks),
        "timings_seconds": {k: round(v, 6) for k, v in timings.items()},
        "audits": counts,
    }


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlpressure", description=__doc__.splitlines()[0])
    p.add_argument("config", help="experiment config (YAML)")
    p.add_argument("--output-dir", default="nlpressure-out")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--precision", choices=["float", "exact"], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--validate-only", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def bundled_config(name: str) -> Path:
    return Path(str(resources.files("nlpressure").joinpath(f"configs/{name}")))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config, raw = load_config(args.config)
    except OSError as exc:
        print(json.dumps([{"path": "", "message": str(exc)}]), file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(json.dumps(exc.diagnostics), file=sys.stderr)
        return EXIT_CONFIG
    problems = validate(config)
    if args.validate_only:
        print(json.dumps(problems, indent=2))
        return EXIT_CONFIG if problems else EXIT_OK
    if problems:
        print(json.dumps(problems, indent=2), file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, manifest = run(config, args.output_dir, workers=max(1, args.workers),
                             precision=args.precision, seed=args.seed, raw=raw)
    except ConfigError as exc:
        print(json.dumps(exc.diagnostics, indent=2), file=sys.stderr)
        return EXIT_CONFIG
    if code == EXIT_CAP:
        print(f"resolution cap exceeded in task {manifest['error']['task']}: "
              f"{manifest['error']['message']}", file=sys.stderr)
    elif code == EXIT_AUDIT:
        print(f"{manifest['audits']['failed']} audit check(s) failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
