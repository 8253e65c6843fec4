"""Kernel gallery: which similarity functions make valid covariances.

A Gram matrix with negative eigenvalues cannot parameterize a Gaussian,
so each candidate kernel is screened with psd_check and the one designed
to be repairable is run through the eigenvalue clip.
"""

import numpy as np

from rulemine import KernelSpec, build_covariance, orthant_prob_analytic, psd_check, psd_repair

grid = np.array([[0.0], [1.0], [2.0], [3.0]])

for kind, extra in (
    ("rbf", {}),
    ("eimq", {}),
    ("arcsin_nn", {}),
    ("ntk3", {"width": 3}),
    ("shifted_rbf", {"shift": 2.0}),
    ("absolute_rbf", {}),
):
    K = build_covariance(KernelSpec(kind, **extra), grid)
    ok, min_eig = psd_check(K, tol=1e-8)
    print(f"{kind:>13}: min eigenvalue {min_eig:+.4f}  {'valid' if ok else 'NOT PSD'}")

K_shift = build_covariance(KernelSpec("shifted_rbf", shift=2.0), grid)
repaired = psd_repair(K_shift)
_, min_eig = psd_check(repaired, tol=0.0)
print(f"\nshifted_rbf after repair: min eigenvalue {min_eig:+.2e} (clipped to >= 0)")

print("\nbivariate orthant probabilities, closed form:")
for rho in (-0.9, 0.0, 0.9):
    K = np.array([[1.0, rho], [rho, 1.0]])
    print(f"  rho={rho:+.1f}: P(both positive) = {orthant_prob_analytic(K):.4f}")
