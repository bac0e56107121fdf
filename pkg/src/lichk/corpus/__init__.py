"""Fixture designs with expected verdicts, driven by ``manifest.json``."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..engine.check import EngineTimeout, Falsified, ProvenInductive, replay
from ..pipeline import CheckConfig, build_model, load_design, run_engine

CORPUS_DIR = Path(__file__).parent


@dataclass(frozen=True)
class Fixture:
    name: str
    family: str
    version: str
    path: Path
    check: str
    engine: str
    bound: int
    expected: str
    budget_s: float
    config: dict = field(default_factory=dict)
    max_depth: int | None = None
    max_k: int | None = None
    note: str = ""

    def check_config(self, **overrides) -> CheckConfig:
        kw = dict(check=self.check, engine=self.engine, bound=self.bound, timeout=self.budget_s)
        kw.update(self.config)
        kw.update(overrides)
        return CheckConfig(**kw)


@dataclass
class FixtureResult:
    fixture: Fixture
    verdict: str
    depth_or_k: int | None
    seconds: float
    replayed: bool | None
    message: str = ""

    @property
    def ok(self) -> bool:
        fx = self.fixture
        if self.verdict != fx.expected:
            return False
        if self.verdict == "falsified":
            if not self.replayed:
                return False
            if fx.max_depth is not None and self.depth_or_k > fx.max_depth:
                return False
        if self.verdict == "proven" and fx.max_k is not None and self.depth_or_k > fx.max_k:
            return False
        return self.seconds <= fx.budget_s


def corpus_suite(manifest: str | Path | None = None) -> list[Fixture]:
    path = Path(manifest) if manifest else CORPUS_DIR / "manifest.json"
    data = json.loads(path.read_text())
    out = []
    for fx in data["fixtures"]:
        fx = dict(fx)
        fx["path"] = (path.parent / fx["path"]).resolve()
        out.append(Fixture(**fx))
    return out


def fixture(name: str) -> Fixture:
    """Look up a fixture by its manifest name, or by bare design name if unique."""
    suite = corpus_suite()
    hits = [f for f in suite if f.name == name] or [f for f in suite if f.path.stem == name]
    if len(hits) != 1:
        raise KeyError(f"no unique fixture named {name!r}")
    return hits[0]


def design_path(stem: str) -> Path:
    return CORPUS_DIR / "designs" / f"{stem}.li"


def run_fixture(fx: Fixture, **overrides) -> FixtureResult:
    cfg = fx.check_config(**overrides)
    t0 = time.perf_counter()
    try:
        model = build_model(load_design(fx.path), cfg)
        verdict = run_engine(model, cfg)
    except EngineTimeout as exc:
        return FixtureResult(fx, "timeout", exc.last_depth, time.perf_counter() - t0, None)
    secs = time.perf_counter() - t0
    if isinstance(verdict, Falsified):
        return FixtureResult(fx, verdict.name, verdict.depth, secs, replay(model, verdict.trace))
    if isinstance(verdict, ProvenInductive):
        return FixtureResult(fx, verdict.name, verdict.k, secs, None)
    return FixtureResult(fx, verdict.name, verdict.bound, secs, None)
