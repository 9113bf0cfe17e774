"""
Predicted against simulated multi-walk speedup
==============================================

Fit the sequential RTD, predict the speedup for each core count, then race
fresh seeded walks and compare.  Flip counts make the race reproducible.
"""

from rtdspeedup import (SolverConfig, collect_rtd, generate_uniform_ksat, select_model,
                        simulate_logical, speedup_curve, summary)
from rtdspeedup.orderstats import empirical_expected_min

formula = generate_uniform_ksat(150, 3, 4.2, seed=3)
config = SolverConfig()
rtd = collect_rtd(formula, config, 500, base_seed=1)
seq_mean = summary(rtd).mean

best = select_model(rtd)
print(f"selected {best.family} (p={best.p_value:.3f})")

cores = [2, 4, 8, 16, 32, 64]
curve = speedup_curve(best.model, cores)

print(f"{'n':>4} {'predicted':>10} {'bootstrap':>10} {'simulated':>10}")
for point in curve.points:
    n = point.n
    # resampling the RTD itself needs no model at all
    boot = seq_mean / empirical_expected_min(rtd, n, trials=100_000, seed=0)
    sim = simulate_logical(formula, config, n, trials=50, base_seed=10**6, seq_mean=seq_mean)
    print(f"{n:>4} {point.speedup:>10.2f} {boot:>10.2f} {sim.empirical_speedup:>10.2f}")
