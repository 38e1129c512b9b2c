"""The two small instances where the optimum is not envy-free up to one item.

Walks through one solver run on each and prints the price step that ends the
multi-copy run, then shows why a per-agent guarantee needs a factor above 1.2.
"""
from fractions import Fraction

from nashcap import (
    brute_force_opt,
    gen_capped_envy,
    gen_multicopy_envy,
    individual_guarantee,
    is_utility_ef1,
    solve,
)
from nashcap.generators import envy_unit

eps = Fraction(1, 100)
r = 1 + eps
s = envy_unit(eps)
print(f"eps = {eps}, s = r^72 = {float(s):.5f} (smallest power of r that is at least 2r^2)")

mc = gen_multicopy_envy(eps)
events = []
out = solve(mc, eps, observer=events.append)
step = out.price_steps[0]
print("\nmulti-copy instance")
print("  start allocation     ", events[0].before.mult)
print("  beta1, beta2         ", step.beta1 == s, step.beta2)
print("  beta3 == 2/r^2       ", step.beta3 == 2 / r ** 2)
print("  beta4 == r^93        ", step.beta4 == r ** 93)
print("  final MBB ratios     ", [str(a) for a in out.mbb], "(alpha_1 = r^2/2)")
opt = brute_force_opt(mc)
print("  optimum NSW^2 / s^2  ", opt.best_nsw_nth_power / s ** 2, opt.allocation)
print("  EF1 in utilities?    ", is_utility_ef1(mc, opt.allocation))
ratio, pair = individual_guarantee(out)
print(f"  worst u_i(x_k - j)/u_i(x_i) = {float(ratio):.4f} for agents {pair}, above 1.2")

ce = gen_capped_envy(eps)
out = solve(ce, eps)
opt = brute_force_opt(ce)
print("\ncapped instance (agent 1 capped at 3)")
print("  solver allocation    ", out.allocation)
print("  optimum NSW^2 / s^2  ", opt.best_nsw_nth_power / s ** 2, opt.allocation)
print("  EF1 in utilities?    ", is_utility_ef1(ce, opt.allocation))
