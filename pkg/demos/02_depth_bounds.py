"""Check the depth bounds on random shallow networks.

Two bounds are verified on seeded random circuits:

  * prepared states:  e(A(rho)) <= sqrt(2/n) * 2^k for separable inputs
  * measured projections:  ||[abar, A*(P)]|| <= 2^k / sqrt(2n)

and the inverse reading: a state whose uncertainty reaches r needs depth at
least (ln r - ln sqrt(2/n)) / ln 2.
"""

import numpy as np

from shallownet import RunConfig, depth_lower_bound, run_sweep

config = RunConfig(seed=7, trials=18, n_values=(4, 6, 8), k_values=(0, 1, 2), noise=0.1)

print("prepared-state bound (odd trials add depolarizing noise):")
print(f"{'trial':>5} {'n':>3} {'k':>3} {'noise':>6} {'achieved':>10} {'bound':>8}")
for row in run_sweep(1, config):
    print(f"{row['trial']:>5} {row['n']:>3} {row['k']:>3} {row['noise']:>6.2f} "
          f"{row['lhs']:>10.4f} {row['bound']:>8.4f}  {'ok' if row['pass'] else 'VIOLATION'}")

print("\nmeasured-projection bound (unitary networks):")
for row in run_sweep(2, config)[:6]:
    print(f"{row['trial']:>5} {row['n']:>3} {row['k']:>3}        "
          f"{row['lhs']:>10.4f} {row['bound']:>8.4f}  {'ok' if row['pass'] else 'VIOLATION'}")

# --- the corollary, read as a depth requirement ---------------------------
print("\nminimum depth to reach uncertainty level r, starting separable:")
for n in (8, 64, 2**20):
    needed = depth_lower_bound(n, 1.0)
    print(f"  n = {n:>8}: depth >= {needed:.2f}  (so ceil = {int(np.ceil(needed))})")
