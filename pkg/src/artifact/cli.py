"""Command-line front end.

Commands
--------
verify   identity checks plus a registry subset; exit 0 iff everything passes
probe    one registry entry, JSON report plus CSV rows
evolve   homogeneous time evolution, CSV series plus fit JSON
report   print a stored run after re-hashing its files
check    re-hash the files of a stored run and report tampering

Exit codes: 0 pass, 1 numeric failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import ConfigurationError, NumericFailure

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
MANIFEST = "manifest.json"


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class RunWriter:
    """The single writer of a run directory; records hashes in the manifest."""

    def __init__(self, config: RunConfig, command: str):
        self.config = config
        self.command = command
        self.run_id = config.run_id_for(command)
        self.root = os.path.join(config["output_dir"], self.run_id)
        os.makedirs(self.root, exist_ok=True)
        self.files: dict[str, str] = {}
        self.started = datetime.now(timezone.utc).isoformat()

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.root, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.files[name] = _sha256(path)
        return path

    def write_json(self, name: str, doc: dict) -> str:
        from .lab.report import dumps

        return self.write(name, dumps(dict(doc, run_id=self.run_id)))

    def write_csv(self, name: str, body: str) -> str:
        return self.write(name, f"# run_id={self.run_id}\n" + body)

    def close(self, status: int) -> str:
        self.write("config.json", json.dumps(self.config.raw, sort_keys=True, indent=1) + "\n")
        manifest = {
            "run_id": self.run_id,
            "command": self.command,
            "tool_version": __version__,
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "exit_status": status,
            "files": dict(sorted(self.files.items())),
        }
        path = os.path.join(self.root, MANIFEST)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=1)
            fh.write("\n")
        return path


def check_run(root: str) -> dict:
    """Re-hash the files listed in a run manifest.

    Returns ``{"run_id", "ok", "mismatched", "missing", "foreign_id"}``;
    ``foreign_id`` lists files whose embedded run id differs from the
    manifest.
    """
    with open(os.path.join(root, MANIFEST), encoding="utf-8") as fh:
        manifest = json.load(fh)
    rid = manifest["run_id"]
    mismatched, missing, foreign = [], [], []
    for name, digest in manifest["files"].items():
        path = os.path.join(root, name)
        if not os.path.exists(path):
            missing.append(name)
            continue
        if _sha256(path) != digest:
            mismatched.append(name)
        if name.endswith(".csv") or (name.endswith(".json") and name != "config.json"):
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
            if rid not in text:
                foreign.append(name)
    ok = not (mismatched or missing or foreign)
    return {"run_id": rid, "ok": ok, "mismatched": mismatched, "missing": missing, "foreign_id": foreign}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify(config: RunConfig, out=sys.stdout) -> int:
    from .lab.identities import IDENTITIES
    from .lab.registry import REGISTRY
    from .lab.report import registry_report

    v = config.raw.get("verify", {})
    subset = v.get("subset")
    ids = sorted(REGISTRY) if subset is None else subset
    idents = v.get("identities", sorted(IDENTITIES))
    gammas = tuple(float(g) for g in v.get("gammas", [0.0, -1.0]))
    rep = registry_report(ids, tier=config.tier, seed=config.seed, run_id=config.run_id_for("verify"),
                          identities=idents, gammas=gammas, workers=v.get("workers", 1),
                          samples=config["mc"]["samples"], kernel=config.raw["kernel"])
    status = EXIT_PASS if rep.passed else EXIT_FAIL
    writer = RunWriter(config, "verify")
    writer.write_json("report.json", rep.to_dict())
    writer.write_csv("report.csv", rep.to_csv())
    writer.close(status)
    for e in rep.entries:
        print(f"{'PASS' if e.passed else 'FAIL'} {e.entry_id}  worst ratio {e.worst_ratio:.6g}"
              f"{'  (rerun at 2x)' if e.reran else ''}", file=out)
    for c in rep.identities:
        print(f"{'PASS' if c.passed else 'FAIL'} identity {c.identity_id} gamma={c.gamma:g} z={c.z:+.3f}", file=out)
    print(f"run {writer.run_id}: {writer.root}", file=out)
    return status


def cmd_probe(config: RunConfig, entry_id: str, out=sys.stdout) -> int:
    from .lab.report import probe_bound, rows_to_csv

    sweep = config.raw.get("probe", {}).get("sweep")
    rep = probe_bound(entry_id, sweep_override=sweep, resolution=config.tier, seed=config.seed)
    status = EXIT_PASS if rep.passed else EXIT_FAIL
    writer = RunWriter(config, f"probe {entry_id}")
    writer.write_json(f"probe_{entry_id}.json", {"seed": config.seed, "resolution_tier": config.tier,
                                                 "entries": [rep.to_dict()]})
    writer.write_csv(f"probe_{entry_id}.csv", rows_to_csv(rep.rows))
    writer.close(status)
    print(f"{'PASS' if rep.passed else 'FAIL'} {entry_id}  worst ratio {rep.worst_ratio:.6g}", file=out)
    for c in rep.claims:
        print(f"  claim {c.kind}: {'pass' if c.passed else 'fail'}  {c.note}", file=out)
    print(f"run {writer.run_id}: {writer.root}", file=out)
    return status


def initial_data(spec: dict):
    """Callable f0(v) for an ``evolve.initial`` block (None for zero data)."""
    kind = spec.get("kind", "zero")
    amp = float(spec.get("amplitude", 1.0))
    mu = lambda r2: np.exp(-0.5 * r2) / (2.0 * np.pi) ** 1.5  # noqa: E731
    if kind == "zero":
        return None
    if kind == "moment":
        p = float(spec.get("power", 4))
        return lambda v: amp * np.sum(v * v, -1) ** (0.5 * p) * mu(np.sum(v * v, -1))
    if kind == "bracket":
        p = float(spec.get("power", 14))
        return lambda v: amp * (1.0 + np.sum(v * v, -1)) ** (-0.5 * p)
    if kind == "exp":
        a, b = float(spec.get("a", 1.0)), float(spec.get("b", 1.0))
        return lambda v: amp * np.exp(-a * (1.0 + np.sum(v * v, -1)) ** (0.5 * b))
    temps = [float(t) for t in spec.get("temperatures", [0.7, 1.3])]
    wts = [float(w) for w in spec.get("weights", [0.5] * len(temps))]
    if len(temps) != len(wts):
        raise ConfigurationError("gaussian_mix needs one weight per temperature")

    def mix(v):
        r2 = np.sum(v * v, -1)
        out = sum(w * np.exp(-0.5 * r2 / T) / (2.0 * np.pi * T) ** 1.5 for w, T in zip(wts, temps))
        return amp * (out - mu(r2))
    return mix


def cmd_evolve(config: RunConfig, out=sys.stdout) -> int:
    from .evolution import EvolutionConfig, RadialGrid, evolve, fit_decay, picard_iterate
    from .evolution.dynamics import context_label
    from .lab.report import dumps

    if "evolve" not in config.raw:
        config = RunConfig.from_dict(dict(config.raw, evolve={}))
    e = config["evolve"]
    rad = e["radial"]
    grid = RadialGrid(rad["R"], rad["n"], rad["stretch"])
    mode = e["mode"]
    monitor = tuple(tuple(c) for c in e["monitor"])
    spec = config.kernel_spec()
    init = e["initial"]
    ecfg = EvolutionConfig(spec, mode, e["dt"], e["t_end"], monitor, grid, tuple(e["channels"]),
                           e["project_initial"], e["sample_every"])
    f0 = initial_data(init)
    writer = RunWriter(config, "evolve")
    if mode == "picard":
        from .evolution.radial import ChannelField

        pk = e["picard"]
        data = f0 if f0 is not None else ChannelField.zeros(grid, ecfg.channels)
        try:
            _, rep = picard_iterate(ecfg, data, pk["k"], pk["n_iter"])
        except NumericFailure as exc:
            writer.write_json("picard.json", {"error": str(exc)})
            writer.close(EXIT_FAIL)
            print(f"FAIL picard: {exc}", file=out)
            print(f"run {writer.run_id}: {writer.root}", file=out)
            return EXIT_FAIL
        writer.write_json("picard.json", {"contraction": rep.to_dict()})
        writer.close(EXIT_PASS)
        print(f"PASS picard window T={rep.T:g} ratios={['%.3g' % r for r in rep.ratios]}", file=out)
        print(f"run {writer.run_id}: {writer.root}", file=out)
        return EXIT_PASS

    series = evolve(ecfg, f0)
    writer.write_csv("series.csv", series.to_csv())
    model = e["model"]
    doc = {"model": model, "max_drift": series.max_drift,
           "entropy_violations": series.entropy_violations, "floors": series.floors, "fits": {}}
    status = EXIT_PASS
    for ctx in monitor:
        lab = context_label(ctx)
        if not np.any(series.norms[lab]):
            doc["fits"][lab] = {"skipped": "identically zero norm"}
            continue
        kw = {key: e[key] for key in ("transient", "t_max") if key in e}
        try:
            doc["fits"][lab] = fit_decay(series, model, lab, **kw).to_dict()
        except NumericFailure as exc:
            doc["fits"][lab] = {"error": str(exc)}
            status = EXIT_FAIL
    if mode == "nonlinear" and series.entropy_violations:
        status = EXIT_FAIL
    writer.write("fit.json", dumps(dict(doc, run_id=writer.run_id)))
    writer.close(status)
    print(f"{'PASS' if status == EXIT_PASS else 'FAIL'} evolve {mode} model={model}", file=out)
    for lab, fit in doc["fits"].items():
        print(f"  {lab}: {fit}", file=out)
    print(f"run {writer.run_id}: {writer.root}", file=out)
    return status


def cmd_report(run_id: str, output_dir: str, out=sys.stdout, verify_only: bool = False) -> int:
    root = os.path.join(output_dir, run_id)
    if not os.path.exists(os.path.join(root, MANIFEST)):
        raise ConfigurationError(f"no run {run_id!r} under {output_dir!r}")
    res = check_run(root)
    if not res["ok"]:
        print(f"TAMPERED run {run_id}: mismatched={res['mismatched']} missing={res['missing']} "
              f"foreign_id={res['foreign_id']}", file=out)
        return EXIT_FAIL
    if verify_only:
        print(f"OK run {run_id}", file=out)
        return EXIT_PASS
    with open(os.path.join(root, MANIFEST), encoding="utf-8") as fh:
        manifest = json.load(fh)
    print(f"run {run_id} ({manifest['command']}, exit {manifest['exit_status']})", file=out)
    for name in sorted(manifest["files"]):
        if name.endswith(".json") and name != "config.json":
            with open(os.path.join(root, name), encoding="utf-8") as fh:
                doc = json.load(fh)
            for ent in doc.get("entries", []):
                print(f"  {'PASS' if ent['pass'] else 'FAIL'} {ent['id']}", file=out)
            for ident in doc.get("identities", []):
                print(f"  {'PASS' if ident['passed'] else 'FAIL'} identity {ident['identity_id']} "
                      f"gamma={ident['gamma']:g}", file=out)
            if "fits" in doc:
                for lab, fit in doc["fits"].items():
                    print(f"  fit {lab}: {fit}", file=out)
    return EXIT_PASS if manifest["exit_status"] == 0 else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="identity checks and registry entries")
    v.add_argument("--subset", help="comma-separated entry ids")
    v.add_argument("--tier", choices=("smoke", "standard", "deep"))
    v.add_argument("--config", required=True)
    pr = sub.add_parser("probe", help="probe one registry entry")
    pr.add_argument("entry")
    pr.add_argument("--config", required=True)
    ev = sub.add_parser("evolve", help="homogeneous evolution and decay fit")
    ev.add_argument("--config", required=True)
    for name in ("report", "check"):
        r = sub.add_parser(name, help="show a stored run" if name == "report" else "re-hash a stored run")
        r.add_argument("--run-id", required=True)
        r.add_argument("--output-dir", default="runs")
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_PASS
    try:
        if args.command in ("report", "check"):
            return cmd_report(args.run_id, args.output_dir, out, verify_only=args.command == "check")
        overrides = {}
        if args.command == "verify":
            if args.tier:
                overrides["resolution_tier"] = args.tier
            if args.subset is not None:
                overrides["verify.subset"] = [s for s in args.subset.split(",") if s]
        config = RunConfig.load(args.config, overrides)
        if args.command == "verify":
            return cmd_verify(config, out)
        if args.command == "probe":
            return cmd_probe(config, args.entry, out)
        return cmd_evolve(config, out)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
