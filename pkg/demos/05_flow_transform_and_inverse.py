"""The regularizing change of variables and its inverse.

Solves the component equations at the damping threshold that certifies
|grad u| <= 1/2, assembles the transform x + u(t, x), and inverts it by
Newton iteration.  The certificate makes the inverse 2-Lipschitz, which
the probe set confirms with a huge margin at desk resolution.
"""

import numpy as np

from besovpde import (
    DriftSpec,
    SolverConfig,
    TimeField,
    TorusGrid,
    build_phi,
    dyadic_partition,
    evaluate_at,
    gen_drift,
    invert_phi,
    lambda_threshold,
)

grid = TorusGrid(d=1, n=128)
part = dyadic_partition(grid)
T, M = 0.5, 64
mesh = TimeField.uniform_mesh(T, M)
spec = DriftSpec(kind="dyadic-random", regularity=0.3, seed=21, amplitude=1.0)
b = gen_drift(spec, grid, mesh, part)

cfg0 = SolverConfig(beta=0.3, eps=0.1, T=T, M=M, lam=1.0, rho=1.0)
lam = lambda_threshold(b, cfg0, c_cal=2.0, part=part)
print(f"damping threshold lambda = {lam:.3g} "
      f"(conservative by design; the gradient bound follows)")

cfg = SolverConfig(beta=0.3, eps=0.1, T=T, M=M, lam=lam, rho=1.0)
res = build_phi(b, cfg, part=part)
print(f"sup |grad u| = {res.grad_sup:.3e}  (certified <= 1/2)")
print(f"weak residual of the identity against source b_1: "
      f"{res.corollary_residual:.2e}")

rng = np.random.default_rng(3)
probes = rng.uniform(0.0, grid.L, size=(16, 1))
node = M // 2
t_mid = float(res.phi.t_grid[node])
slice_mid = res.phi.slices[node]
worst = 0.0
for y in probes:
    x = invert_phi(res.phi, t_mid, y, tol=1e-12)
    fwd = slice_mid.slope @ x + evaluate_at(slice_mid.periodic, x)
    worst = max(worst, float(np.abs(fwd - y).max()))
print(f"max |phi(psi(y)) - y| over 16 probes at t = {t_mid}: {worst:.2e}")

inv = [invert_phi(res.phi, t_mid, y, tol=1e-12)[0] for y in probes]
lip = max(abs(inv[i] - inv[j]) / abs(probes[i, 0] - probes[j, 0])
          for i in range(16) for j in range(i + 1, 16))
print(f"empirical Lipschitz constant of the inverse: {lip:.4f} (<= 2)")
