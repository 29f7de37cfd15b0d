#!/usr/bin/env python3
"""Dynamics-versus-Newton study on a corpus of random strongly monotone
quadratic games, plus energy-decrease statistics at a small gain.

    python scripts/quadratic_corpus_study.py [--games 20] [--seed 20240517]
"""

import argparse
import dataclasses
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from coalseek.analysis import build_block_transforms, lyapunov_value
from coalseek.corpus import random_quadratic_game
from coalseek.dynamics import IntegrateParams, Seeker
from coalseek.oracle import solve_stationary


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--games", type=int, default=20)
    parser.add_argument("--seed", type=int, default=20240517)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'sizes':>12} {'endpoint gap':>14} {'newton it':>10} {'V rise max':>12}")
    worst_gap = 0.0
    start = time.perf_counter()
    for _ in range(args.games):
        sample = random_quadratic_game(rng)
        game = sample.game
        newton = solve_stationary(game, np.zeros(game.n_actions), tol=1e-11)
        seeker = Seeker(game)
        traj = seeker.integrate(
            seeker.initial_state(np.zeros(game.n_actions)),
            IntegrateParams(step=0.05, horizon=900.0, record_stride=100, stop_tol=1e-9),
        )
        gap = float(np.abs(traj.final_x - newton.x).max())
        worst_gap = max(worst_gap, gap)

        slow = dataclasses.replace(game, delta=0.01)
        transforms = build_block_transforms(slow)
        x_star = sample.equilibrium()
        vparams = IntegrateParams(
            step=0.05, horizon=40.0, record_stride=10, stop_tol=None,
            lyapunov=lambda s, g=slow, xs=x_star, t=transforms: lyapunov_value(g, s, xs, t),
        )
        sseeker = Seeker(slow)
        vtraj = sseeker.integrate(
            sseeker.initial_state(rng.uniform(-2, 2, game.n_actions)), vparams
        )
        rise = float(np.diff(vtraj.lyapunov).max())
        sizes = "x".join(str(m) for m in game.sizes)
        print(f"{sizes:>12} {gap:>14.2e} {newton.iterations:>10} {rise:>12.2e}")
    print(f"\nworst endpoint gap {worst_gap:.2e} over {args.games} games "
          f"({time.perf_counter() - start:.1f}s)")


if __name__ == "__main__":
    main()
