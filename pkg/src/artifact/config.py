"""Run configuration: a single JSON document, validated strictly and content-hashed."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

from . import __version__
from .errors import ConfigurationError
from .kernel_geometry import NAMED_PROFILES, CollisionKernelSpec

TIERS = {
    "smoke": {"n_per_axis": 32, "samples": 10_000},
    "standard": {"n_per_axis": 64, "samples": 100_000},
    "deep": {"n_per_axis": 96, "samples": 1_000_000},
}

INITIAL_KINDS = ("zero", "moment", "bracket", "exp", "gaussian_mix")

# allowed keys per block; None marks a free-form value
SCHEMA = {
    "kernel": {"gamma", "b_profile", "K"},
    "grid": {"v_max", "n_per_axis"},
    "sphere": {"n_theta", "n_phi"},
    "mc": {"samples", "seed"},
    "resolution_tier": None,
    "output_dir": None,
    "verify": {"subset", "identities", "gammas", "workers"},
    "probe": {"sweep"},
    "evolve": {"mode", "dt", "t_end", "radial", "initial", "monitor", "channels", "model",
               "sample_every", "project_initial", "transient", "t_max", "picard"},
}
RADIAL_KEYS = {"R", "n", "stretch"}
INITIAL_KEYS = {"kind", "power", "a", "b", "temperatures", "weights", "amplitude"}
PICARD_KEYS = {"k", "n_iter"}


def _check_keys(block: dict, allowed: set, where: str):
    if not isinstance(block, dict):
        raise ConfigurationError(f"{where} must be an object")
    extra = set(block) - allowed
    if extra:
        raise ConfigurationError(f"unknown keys in {where}: {sorted(extra)}")


def _number(x, where, lo=None, hi=None, integer=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigurationError(f"{where} must be a number")
    if integer and int(x) != x:
        raise ConfigurationError(f"{where} must be an integer")
    if lo is not None and x < lo:
        raise ConfigurationError(f"{where} must be >= {lo}")
    if hi is not None and x > hi:
        raise ConfigurationError(f"{where} must be <= {hi}")
    return int(x) if integer else float(x)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration with tier defaults filled in.

    ``raw`` keeps the effective document (defaults applied, CLI overrides
    merged); the run id is the SHA-256 of its canonical JSON, the command
    and the package version.
    """

    raw: dict

    @classmethod
    def from_dict(cls, doc: dict, overrides: dict | None = None) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigurationError("configuration must be a JSON object")
        doc = copy.deepcopy(doc)
        for key, val in (overrides or {}).items():
            block, _, sub = key.partition(".")
            if sub:
                doc.setdefault(block, {})[sub] = val
            else:
                doc[key] = val
        _check_keys(doc, set(SCHEMA), "configuration")
        for block, allowed in SCHEMA.items():
            if allowed is not None and block in doc:
                _check_keys(doc[block], allowed, block)
        tier = doc.setdefault("resolution_tier", "smoke")
        if tier not in TIERS:
            raise ConfigurationError(f"unknown resolution tier {tier!r}")
        t = TIERS[tier]
        k = doc.setdefault("kernel", {})
        k["gamma"] = _number(k.get("gamma", 0.0), "kernel.gamma")
        k.setdefault("b_profile", "one")
        if k["b_profile"] not in NAMED_PROFILES:
            raise ConfigurationError(f"unknown angular profile {k['b_profile']!r}")
        k["K"] = _number(k.get("K", 1.0), "kernel.K")
        g = doc.setdefault("grid", {})
        g["v_max"] = _number(g.get("v_max", 8.0), "grid.v_max", lo=1e-6)
        g["n_per_axis"] = _number(g.get("n_per_axis", t["n_per_axis"]), "grid.n_per_axis", lo=4, integer=True)
        s = doc.setdefault("sphere", {})
        s["n_theta"] = _number(s.get("n_theta", 32), "sphere.n_theta", lo=1, integer=True)
        s["n_phi"] = _number(s.get("n_phi", 64), "sphere.n_phi", lo=1, integer=True)
        m = doc.setdefault("mc", {})
        m["samples"] = _number(m.get("samples", t["samples"]), "mc.samples", lo=2, integer=True)
        m["seed"] = _number(m.get("seed", 0), "mc.seed", lo=0, integer=True)
        doc.setdefault("output_dir", "runs")
        if not isinstance(doc["output_dir"], str):
            raise ConfigurationError("output_dir must be a string")
        cfg = cls(doc)
        cfg.kernel_spec()  # kernel preconditions
        if "evolve" in doc:
            cfg._check_evolve(doc["evolve"])
        if "verify" in doc:
            cfg._check_verify(doc["verify"])
        if "probe" in doc:
            sw = doc["probe"].get("sweep")
            if sw is not None and not (isinstance(sw, list) and all(isinstance(p, dict) for p in sw)):
                raise ConfigurationError("probe.sweep must be a list of parameter objects")
        return cfg

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read configuration: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"malformed JSON configuration: {exc}") from exc
        return cls.from_dict(doc, overrides)

    # -- accessors ---------------------------------------------------------

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def tier(self) -> str:
        return self.raw["resolution_tier"]

    @property
    def seed(self) -> int:
        return self.raw["mc"]["seed"]

    def canonical(self) -> str:
        """Canonical JSON of everything that affects results (not the output location)."""
        doc = {k: v for k, v in self.raw.items() if k != "output_dir"}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def run_id_for(self, command: str) -> str:
        h = hashlib.sha256()
        for part in (self.canonical(), command, __version__):
            h.update(part.encode())
            h.update(b"\0")
        return h.hexdigest()[:16]

    def kernel_spec(self, gamma: float | None = None) -> CollisionKernelSpec:
        k = self.raw["kernel"]
        return CollisionKernelSpec.named(k["gamma"] if gamma is None else gamma, k["b_profile"],
                                         cutoff_lower=k["K"])

    # -- block checks ------------------------------------------------------

    def _check_verify(self, v):
        sub = v.get("subset")
        if sub is not None and not (isinstance(sub, list) and all(isinstance(x, str) for x in sub)):
            raise ConfigurationError("verify.subset must be a list of entry ids")
        ids = v.get("identities")
        if ids is not None and not (isinstance(ids, list) and all(isinstance(x, str) for x in ids)):
            raise ConfigurationError("verify.identities must be a list of identity ids")
        for gm in v.get("gammas", []):
            self.kernel_spec(_number(gm, "verify.gammas"))
        if "workers" in v:
            _number(v["workers"], "verify.workers", lo=1, integer=True)

    def _check_evolve(self, e):
        """Validate the evolve block and write its defaults back (they enter the run id)."""
        from .evolution.dynamics import MODES
        from .evolution.fit import MODELS, regime_model

        e.setdefault("mode", "linearized")
        if e["mode"] not in MODES:
            raise ConfigurationError(f"unknown evolve.mode {e['mode']!r}")
        e["dt"] = _number(e.get("dt", 0.05), "evolve.dt", lo=1e-12)
        e["t_end"] = _number(e.get("t_end", 5.0), "evolve.t_end", lo=1e-12)
        rad = e.setdefault("radial", {})
        _check_keys(rad, RADIAL_KEYS, "evolve.radial")
        g = self.raw["grid"]
        rad["R"] = _number(rad.get("R", g["v_max"]), "evolve.radial.R", lo=1e-6)
        rad["n"] = _number(rad.get("n", g["n_per_axis"] + 1), "evolve.radial.n", lo=4, integer=True)
        rad["stretch"] = _number(rad.get("stretch", 0.0), "evolve.radial.stretch", lo=0)
        init = e.setdefault("initial", {"kind": "zero"})
        _check_keys(init, INITIAL_KEYS, "evolve.initial")
        if init.get("kind") not in INITIAL_KINDS:
            raise ConfigurationError(f"evolve.initial.kind must be one of {INITIAL_KINDS}")
        e.setdefault("model", regime_model(self.raw["kernel"]["gamma"], init["kind"] == "exp"))
        if e["model"] not in MODELS:
            raise ConfigurationError(f"unknown evolve.model {e['model']!r}")
        pk = e.setdefault("picard", {})
        _check_keys(pk, PICARD_KEYS, "evolve.picard")
        pk["k"] = _number(pk.get("k", 4.0), "evolve.picard.k")
        pk["n_iter"] = _number(pk.get("n_iter", 6), "evolve.picard.n_iter", lo=2, integer=True)
        mon = e.setdefault("monitor", [[0]])
        if not (isinstance(mon, list) and all(isinstance(c, list) and len(c) in (1, 3) for c in mon)):
            raise ConfigurationError("evolve.monitor must be a list of [k] or [k, a, b]")
        ch = e.setdefault("channels", [0])
        if not (isinstance(ch, list) and ch and all(isinstance(c, int) and c >= 0 for c in ch)):
            raise ConfigurationError("evolve.channels must be a non-empty list of integers")
        e["project_initial"] = bool(e.get("project_initial", True))
        e["sample_every"] = _number(e.get("sample_every", 1), "evolve.sample_every", lo=1, integer=True)
        for key in ("transient", "t_max"):
            if key in e:
                e[key] = _number(e[key], f"evolve.{key}", lo=0)
