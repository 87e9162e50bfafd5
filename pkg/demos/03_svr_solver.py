"""A close look at the SVR solver: support vectors, the KKT certificate,
and why the dual objective is worth trusting.

The trained coefficients should (a) satisfy the KKT conditions within the
solver tolerance and (b) dominate any feasible competitor's dual objective.
Both are checked here explicitly.
"""

import numpy as np

from embmte import Hyperparams, check_kkt, dual_objective, svr_predict_batch, svr_train

rng = np.random.Generator(np.random.PCG64(3))
X = rng.standard_normal((40, 3))
y = np.sin(X).sum(axis=1) + 0.05 * rng.standard_normal(40)
params = Hyperparams(C=1.0, epsilon=0.1, gamma=0.5)

model = svr_train(X, y, params, tol=1e-4)
print(f"trained: {model.n_sv}/{len(y)} support vectors, bias {model.bias:+.4f}")

report = check_kkt(model, X, y)
print(f"KKT certificate: max violation {report.max_violation:.2e} "
      f"(tolerance 1e-4 -> passes: {report.passes(1e-4)})")
print(f"dual equality residual: sum(beta) = {report.beta_sum:.2e}")

betas = np.zeros(len(y))
betas[model.support_indices] = model.dual_coefs
trained_value = dual_objective(X, y, params, betas)
print(f"\ndual objective of the trained solution: {trained_value:.6f}")

worst_gap = np.inf
for _ in range(500):
    raw = rng.uniform(-params.C, params.C, size=len(y))
    feasible = raw - raw.mean()
    peak = np.abs(feasible).max()
    if peak > params.C:
        feasible *= params.C / peak
    worst_gap = min(worst_gap, trained_value - dual_objective(X, y, params, feasible))
print(f"closest of 500 random feasible competitors is {worst_gap:.6f} below it")

inside = np.abs(svr_predict_batch(model, X) - y) <= params.epsilon + 1e-4
print(f"\n{int(inside.sum())}/{len(y)} training points sit inside the epsilon-tube")
