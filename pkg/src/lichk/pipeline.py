"""Parse -> elaborate -> wrap -> check, shared by the CLI and the corpus runner."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .elaborate import ElabOptions, ElaboratedDesign, elaborate
from .engine.check import BoundReached, Falsified, ProvenInductive, bmc, k_induction
from .lang import DesignAst, parse
from .model import DEADLOCK, INVALID_INPUT, CheckModel
from .wrappers import build_deadlock_model, build_invalid_input_model

CHECKS = (INVALID_INPUT, DEADLOCK)
ENGINES = ("bmc", "kind")


@dataclass
class CheckConfig:
    check: str = DEADLOCK
    engine: str = "bmc"
    bound: int = 50
    nb_stall_cycles: int = 8
    nb_stall_mode: str = "rdy"
    env_valid: str = "constrained"
    strict_input_ready: bool = False
    timeout: float | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.check not in CHECKS:
            raise ValueError(f"unknown check {self.check!r}")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.bound < 0:
            raise ValueError("bound must be >= 0")
        if self.engine == "kind" and self.bound < 1:
            raise ValueError("k-induction needs a bound of at least 1")
        if self.nb_stall_cycles < 1:
            raise ValueError("nb_stall_cycles must be >= 1")
        if self.timeout is not None and self.timeout <= 0:
            raise ValueError("timeout must be > 0")

    def model_options(self) -> dict:
        """The options that determine the check model (echoed into traces)."""
        return {"check": self.check, "nb_stall_cycles": self.nb_stall_cycles, "nb_stall_mode": self.nb_stall_mode,
                "env_valid": self.env_valid, "strict_input_ready": self.strict_input_ready}


def default_seed() -> int:
    return int(os.environ.get("LICHK_SEED", "0"))


def load_design(path: str | Path) -> DesignAst:
    text = Path(path).read_bytes().decode("utf-8")
    return parse(text)


def elaborate_for(ast: DesignAst, cfg: CheckConfig) -> ElaboratedDesign:
    return elaborate(ast, ElabOptions(cfg.nb_stall_cycles, cfg.nb_stall_mode))


def build_model(ast: DesignAst, cfg: CheckConfig) -> CheckModel:
    elab = elaborate_for(ast, cfg)
    if cfg.check == INVALID_INPUT:
        return build_invalid_input_model(elab, strict_input_ready=cfg.strict_input_ready)
    return build_deadlock_model(elab, env_valid=cfg.env_valid)


def run_engine(model: CheckModel, cfg: CheckConfig, progress=None) -> Falsified | ProvenInductive | BoundReached:
    if cfg.engine == "kind":
        return k_induction(model, cfg.bound, timeout=cfg.timeout, seed=cfg.seed, progress=progress)
    return bmc(model, cfg.bound, timeout=cfg.timeout, seed=cfg.seed, progress=progress)
