"""Run reports, the benchmark sweep and the random baseline measurement."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd
import yaml

from .builder import BuilderConfig, FailureReport, build_family_randomized, construct_family
from .formats import family_to_text, read_family
from .labels import GoodFamily, Variant, infer_escalations
from .verifier import verify_strong_goodness

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ["n", "k", "variant", "gamma", "R_size", "escalations", "max_steps", "wall_ms"]


# pylint: disable=too-many-instance-attributes
@dataclass
class RunReport:
    """What one build-family run produced.

    The family file is the source of truth.  Loading a report recomputes every family derived number from it; only
    the step counts and wall time are measurements kept as written.
    """
    params: dict
    subset_count: int
    steps: List[int]
    escalations: Optional[int]
    wall_ms: float
    violations: int
    family_path: Optional[str] = None
    builder: dict = field(default_factory=dict)
    solution: Optional[dict] = None

    @property
    def strongly_good(self) -> bool:
        """True when the family had no strong goodness violations."""
        return self.violations == 0

    @classmethod
    def from_construction(cls, result, config: BuilderConfig,
                          family_path: Optional[Union[str, Path]] = None) -> "RunReport":
        """Summarize a ConstructionResult."""
        fam = result.family
        return cls(params=fam.params.as_dict(), subset_count=fam.params.subset_count, steps=list(result.steps),
                   escalations=fam.params.escalations, wall_ms=round(result.wall_ms, 3),
                   violations=len(verify_strong_goodness(fam)),
                   family_path=None if family_path is None else str(family_path),
                   builder={"c_mult": config.c_mult, "zeta": config.zeta,
                            "escalation_factor": config.escalation_factor})

    def as_dict(self) -> dict:
        """Plain types only, ready for YAML."""
        out = {"family_path": self.family_path, "params": dict(self.params), "R_size": self.subset_count,
               "escalations": self.escalations, "steps": list(self.steps),
               "max_steps": max(self.steps, default=0), "wall_ms": self.wall_ms,
               "strongly_good": self.strongly_good, "violations": self.violations, "builder": dict(self.builder)}
        if self.solution is not None:
            out["solution"] = self.solution
        return out

    def write(self, path: Union[str, Path]):
        """Write the report as YAML."""
        with open(path, mode="w", encoding="utf-8") as f:
            yaml.safe_dump(self.as_dict(), f, sort_keys=False)

    @classmethod
    def load(cls, path: Union[str, Path], family_path: Optional[Union[str, Path]] = None) -> "RunReport":
        """Read a report and recompute it from its family file.

        Args:
            path: The YAML report
            family_path: The family file.  Defaults to the one named in the report, relative to the report.
        """
        path = Path(path)
        with open(path, mode="r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}

        if family_path is None:
            if not data.get("family_path"):
                raise ValueError(f"{path} does not name a family file")
            family_path = Path(data["family_path"])
            if not family_path.is_absolute() and not family_path.exists():
                family_path = path.parent / family_path
        fam = read_family(family_path)

        builder = data.get("builder") or {}
        escalations = None
        if "c_mult" in builder and "zeta" in builder:
            escalations = infer_escalations(fam.params, c_mult=builder["c_mult"], zeta=builder["zeta"],
                                            factor=builder.get("escalation_factor", 1.5))
        params = fam.params.as_dict()
        params["escalations"] = escalations
        if data.get("params") and any(data["params"].get(key) != value for key, value in params.items()
                                      if key != "escalations"):
            logger.warning("Report %s disagrees with %s; using the family file", path, family_path)

        return cls(params=params, subset_count=fam.params.subset_count, steps=list(data.get("steps") or []),
                   escalations=escalations, wall_ms=float(data.get("wall_ms") or 0.0),
                   violations=len(verify_strong_goodness(fam)), family_path=str(family_path), builder=builder,
                   solution=data.get("solution"))


def _bench_point(n: int, k: int, variant: Variant, trials: int, config: BuilderConfig) -> dict:
    texts = []
    walls = []
    result = None
    for _ in range(trials):
        result = construct_family(n, k, variant, config)
        texts.append(family_to_text(result.family))
        walls.append(result.wall_ms)
    params = result.family.params
    identical = len(set(texts)) == 1
    if not identical:
        logger.warning("Construction for n=%s, k=%s (%s) differed between trials", n, k, variant.value)
    return {"n": n, "k": k, "variant": variant.value, "gamma": params.gamma, "R_size": params.subset_count,
            "escalations": params.escalations, "max_steps": result.max_steps,
            "wall_ms": round(float(pd.Series(walls).median()), 3), "identical": identical}


# pylint: disable=too-many-arguments
def run_benchmark(n_grid: Sequence[int], k_grid: Sequence[int],
                  variants: Sequence[Union[str, Variant]] = (Variant.GENERAL,), trials: int = 1,
                  config: Optional[BuilderConfig] = None) -> pd.DataFrame:
    """Build a family at every grid point, trials times each.

    Returns one row per (variant, n, k) with the BENCH_COLUMNS plus 'identical', which is False when the trials did
    not all produce the same family.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    config = BuilderConfig() if config is None else config
    rows = []
    for variant in variants:
        variant = Variant.parse(variant)
        for n in n_grid:
            for k in k_grid:
                rows.append(_bench_point(n, k, variant, trials, config))
                logger.info("bench n=%s k=%s %s: gamma=%s |R|=%s", n, k, variant.value, rows[-1]["gamma"],
                            rows[-1]["R_size"])
    return pd.DataFrame(rows, columns=BENCH_COLUMNS + ["identical"])


def write_benchmark_csv(frame: pd.DataFrame, path: Union[str, Path]):
    """Write the benchmark columns as CSV."""
    frame[BENCH_COLUMNS].to_csv(path, index=False)


# pylint: disable=too-many-arguments
def run_random_baseline(n: int, k: int, variant: Union[str, Variant] = Variant.GENERAL,
                        seeds: Sequence[int] = range(100), gamma_multiplier: int = 1,
                        config: Optional[BuilderConfig] = None) -> pd.DataFrame:
    """Draw one uniform family per seed.  One row per seed: success, violation and duplicate counts."""
    rows = []
    for seed in seeds:
        outcome = build_family_randomized(n, k, variant, config=config, rng_seed=seed,
                                          gamma_multiplier=gamma_multiplier)
        if isinstance(outcome, GoodFamily):
            rows.append({"seed": seed, "gamma": outcome.params.gamma, "success": True, "violations": 0,
                         "duplicates": 0})
        else:
            failure: FailureReport = outcome
            rows.append({"seed": seed, "gamma": failure.params.gamma, "success": False,
                         "violations": len(failure.violations), "duplicates": len(failure.duplicates)})
    return pd.DataFrame(rows, columns=["seed", "gamma", "success", "violations", "duplicates"])
