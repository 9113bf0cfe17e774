"""
Speedup of independent walks from a runtime model
=================================================

The first walk to finish decides the parallel runtime, so n walks run as
fast as the minimum of n draws.  Three models, three very different curves.
"""

from rtdspeedup import Exponential, Lognormal, ShiftedExponential, speedup_curve

cores = [1, 2, 8, 48, 96, 192, 384, 10**4]

models = {
    "exponential, mean 800": Exponential(1 / 800),
    "shifted, x0=100 mean 800": ShiftedExponential(100, 1 / 700),
    "lognormal mu=6 sigma=0.8": Lognormal(6, 0.8),
}

print(f"{'cores':>8}" + "".join(f"{name:>28}" for name in models))
curves = {name: speedup_curve(m, cores) for name, m in models.items()}
for i, n in enumerate(cores):
    print(f"{n:>8}" + "".join(f"{c.points[i].speedup:>28.2f}" for c in curves.values()))

# exponential: linear forever; shifted: capped at 1 + 1/(x0*lam)
for name, c in curves.items():
    lim = c.limit
    if lim.finite:
        shown = f"{lim.value:.3f}"
    elif lim.probe_n is None:
        shown = "none"
    else:
        shown = f"none found numerically, G(2^20) = {lim.probe_speedup:.1f}"
    print(f"limit for {name}: {shown}")
