"""Verify every family at its reference point and write one JSON report per family."""
import argparse
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from cmc_forge.catalog import REFERENCE_POINTS, reference_instance
from cmc_forge.curvature_verify import verify_instance


@dataclass
class Config:
    out_dir: str = "runs/verify"
    base_count: int = 8
    u_count: int = 32
    seed: int = 0


def run(cfg: Config) -> bool:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    for fid in REFERENCE_POINTS:
        t0 = time.perf_counter()
        rep = verify_instance(reference_instance(fid), cfg.base_count, cfg.u_count, cfg.seed)
        (out / f"{fid}.json").write_text(rep.to_json(indent=1) + "\n")
        print(f"{rep.summary()}  [{time.perf_counter() - t0:.2f}s]")
        ok &= rep.passed
    (out / "config.json").write_text(json.dumps(asdict(cfg), indent=1) + "\n")
    return ok


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(Config()).items():
        p.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    raise SystemExit(0 if run(Config(**vars(p.parse_args()))) else 1)
