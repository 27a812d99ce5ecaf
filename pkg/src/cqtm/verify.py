"""Recursion vs brute-force cross-check over random momenta on both branches."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cqtm.barrier import ModelParams, default_k_lo
from cqtm.spectra import assemble_zn, brute_force_zn, landauer
from cqtm.xmatrix import half_trace

LR_TOL = 1e-6
FLAG_MARGIN = 1e-8
UNBOUND_K_MAX = 1.5


@dataclass(frozen=True)
class OracleCheck:
    n: int
    gamma: float
    branch: str
    samples: int
    max_lr_diff: float
    flag_mismatches: int

    @property
    def ok(self) -> bool:
        return self.max_lr_diff < LR_TOL and self.flag_mismatches == 0


def branch_ranges(gamma: float) -> dict[str, tuple[float, float]]:
    k_star = math.acos(gamma)
    out = {"unbound": (k_star, UNBOUND_K_MAX)}
    if k_star > 0:
        lo = default_k_lo(gamma) or 0.5 * k_star
        out["bound"] = (lo, k_star)
    return out


def oracle_equivalence(
    n_max: int = 10,
    gammas=(0.9, 0.99, 0.999),
    samples: int = 200,
    seed: int = 0,
) -> list[OracleCheck]:
    rng = np.random.default_rng(seed)
    out = []
    for gamma in gammas:
        params = ModelParams(gamma)
        for branch, (lo, hi) in branch_ranges(gamma).items():
            k = rng.uniform(lo, hi, samples)
            # keep strictly inside the branch
            k = np.clip(k, np.nextafter(lo, hi), np.nextafter(hi, lo))
            for n in range(1, n_max + 1):
                za = assemble_zn(n, k, params)
                zb = brute_force_zn(n, k, params)
                la, _ = landauer(za)
                lb, _ = landauer(zb)
                diff = np.abs(la - lb)
                diff = np.where(np.isneginf(la) & np.isneginf(lb), 0.0, diff)
                _, ha, _ = half_trace(za, check=False)
                _, hb, _ = half_trace(zb, check=False)
                decisive = (np.abs(ha) >= FLAG_MARGIN) & (np.abs(hb) >= FLAG_MARGIN)
                mism = int(np.sum(((ha <= 0) != (hb <= 0)) & decisive))
                out.append(OracleCheck(n, gamma, branch, len(k), float(diff.max()), mism))
    return out
