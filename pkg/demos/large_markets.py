"""When every item is small relative to each agent's total, the solver is near-optimal.

Compares the measured OPT/ALG with the guarantee (1+4 eps)/(1-delta) on
delta-large markets for a few values of delta.
"""
from fractions import Fraction

from nashcap import brute_force_opt, gen_delta_large, large_market_check, nsw_nth_power, solve
from nashcap.numerics import rat_root_ratio

eps = Fraction(1, 20)
for delta in (Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)):
    worst = 1.0
    for seed in range(15):
        inst = gen_delta_large(2, int(4 / delta), delta, seed=seed, max_util=2)
        out = solve(inst, eps)
        rep = large_market_check(out, delta)
        opt = brute_force_opt(out.instance).best_nsw_nth_power
        worst = max(worst, rat_root_ratio(opt, nsw_nth_power(out.instance, out.allocation), inst.n))
        assert rep.ok
    print(f"delta = {str(delta):>4}: worst OPT/ALG {worst:.4f}, guarantee {float(rep.limit):.4f}")
