"""How far the solver can land from the optimum on the identical-agents family.

Every agent values the K-goods at K and the unit goods at 1.  The greedy start
pairs each K-good with a unit good and is already price-envy-free, so the solver
stops there.  The optimum instead gives the K-goods away alone and pools the
unit goods, and the gap approaches k^(1/k) as K grows.
"""
from fractions import Fraction

from nashcap import brute_force_opt, gen_lower_bound, nsw_nth_power, solve
from nashcap.numerics import rat_root_ratio

EPS = Fraction(1, 4)

print(f"{'k':>2} {'K':>5} {'OPT/ALG':>10} {'closed form':>12}")
for k in (2, 3):
    for K in (k, 10, 100, 666):
        inst = gen_lower_bound(k, 1, K)
        out = solve(inst, EPS)
        opt = brute_force_opt(inst).best_nsw_nth_power
        ratio = rat_root_ratio(opt, nsw_nth_power(inst, out.allocation), inst.n)
        closed = (K / (K + 1)) ** ((k - 1) / k) * k ** (1 / k)
        print(f"{k:>2} {K:>5} {ratio:>10.6f} {closed:>12.6f}")

# k = 3 is the best integer choice: 3^(1/3) beats 2^(1/2) and 4^(1/4)
print("limits:", {k: round(k ** (1 / k), 5) for k in (2, 3, 4)})
