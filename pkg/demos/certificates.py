"""Certifying solver outputs without trusting the solver.

For a handful of random capped instances, print the solver's NSW, the exact
optimum from exhaustive search, and the upper bound read off the final prices
and MBB ratios.  The bound never falls below the optimum, and the ratio
bound/ALG stays under r * exp(exp(-1/(1+4 eps))).
"""
from fractions import Fraction

from nashcap import auxiliary_bound, brute_force_opt, gen_random, solve
from nashcap.certify import certify
from nashcap.numerics import geometric_mean

eps = Fraction(1, 10)
print(f"{'seed':>4} {'ALG':>8} {'OPT':>8} {'UB':>8} {'UB/ALG':>7} {'cap':>6}  EF1")
for seed in range(8):
    inst = gen_random(3, 3, 2, 9, cap_mode="random", seed=seed)
    out = solve(inst, eps)
    cert = certify(inst, out)
    opt = brute_force_opt(out.instance).best_nsw_nth_power
    g = lambda q: geometric_mean(q, inst.n)  # noqa: E731
    print(
        f"{seed:>4} {g(cert.alg_nsw_nth_power):>8.3f} {g(opt):>8.3f} {g(cert.upper_bound_nth_power):>8.3f}"
        f" {cert.ratio:>7.4f} {cert.theoretical_cap:>6.3f}  {cert.ef1_ok}"
    )

# the three-goods example: one big item stays whole, the rest is shared at level 2
aux = auxiliary_bound([3, 1, 1], [None, None])
print(f"\nitems (3, 1, 1), two agents: h={aux.h}, k={aux.k}, delta={aux.delta}, bound^2={aux.bound_nth_power}")
