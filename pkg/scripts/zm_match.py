"""Theta(c) curve for the S4 family and the c values closing up with Z_m symmetry."""
import argparse
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from cmc_forge.errors import NoSignChange
from cmc_forge.moduli_classify import build_instance, classify, closure_residual, embedded_window, match_angle


@dataclass
class Config:
    n: int = 2
    h: float = 0.8
    c_lo: float = 4.2
    c_hi: float = 200.0
    samples: int = 40
    m_max: int = 6
    out: str = "runs/theta_curve.csv"


def run(cfg: Config):
    cs = np.geomspace(cfg.c_lo, cfg.c_hi, cfg.samples)
    thetas = []
    for c in cs:
        rec = classify("S4", cfg.n, 1, cfg.h, float(c))
        thetas.append(rec.theta_advance if rec.theta_advance is not None else math.nan)
    os.makedirs(os.path.dirname(cfg.out) or ".", exist_ok=True)
    with open(cfg.out, "w") as fh:
        fh.write("c,theta_advance\n")
        for c, t in zip(cs, thetas):
            fh.write(f"{c:.17g},{t:.17g}\n")
    thetas = np.array(thetas)
    for m in range(2, cfg.m_max + 1):
        target = 2 * math.pi / m
        window = embedded_window(cfg.n, m)
        crossing = np.nonzero(np.diff(np.sign(thetas - target)) != 0)[0]
        if not len(crossing):
            print(f"m={m}: no crossing on the sampled c range (h in window: {window.contains(cfg.h)})")
            continue
        i = int(crossing[0])
        try:
            c = match_angle(cfg.n, cfg.h, target, (cs[i], cs[i + 1]))
        except NoSignChange as exc:
            print(f"m={m}: {exc}")
            continue
        res = closure_residual(build_instance(classify("S4", cfg.n, 1, cfg.h, c)), m)
        print(f"m={m}: c={c:.15g}, closure residual {res['max']:.2e}, h in window: {window.contains(cfg.h)}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(Config()).items():
        p.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    run(Config(**vars(p.parse_args())))
