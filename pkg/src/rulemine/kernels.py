"""Kernel zoo, covariance assembly, PSD verification and repair.

Six kernel forms over item feature vectors. rbf, arcsin_nn, and ntk3 are
positive semidefinite by construction; shifted_rbf (with shift > 0), eimq,
and absolute_rbf are deliberately not, and exist to exercise the numeric
PSD check and the eigenvalue-clipping repair that makes such a matrix
usable as a covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MiningError

KERNEL_KINDS = ("rbf", "shifted_rbf", "eimq", "absolute_rbf", "arcsin_nn", "ntk3")


class KernelError(MiningError):
    """Invalid kernel parameters, non-finite values, or broken covariances."""


@dataclass(frozen=True)
class KernelSpec:
    """Kernel kind plus hyper-parameters. Unused fields are ignored per kind.

    noise is the variance added to the covariance diagonal when requested.
    repair opts a non-PSD kernel into eigenvalue repair before GP use;
    shifted_rbf with shift > 0 is repaired regardless.
    """

    kind: str
    sigma_f2: float = 1.0
    length_scale: float = 1.0
    shift: float = 0.0
    c: float = 1.0
    beta: float = 1.0
    weight_var: tuple[float, ...] | None = None
    width: float = 1.0
    noise: float = 0.0
    repair: bool = False

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise KernelError(f"unknown kernel kind {self.kind!r}")
        for name in ("sigma_f2", "length_scale", "c", "beta", "width"):
            if getattr(self, name) <= 0:
                raise KernelError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.shift < 0:
            raise KernelError(f"shift must be >= 0, got {self.shift}")
        if self.noise < 0:
            raise KernelError(f"noise must be >= 0, got {self.noise}")
        if self.weight_var is not None and any(v <= 0 for v in self.weight_var):
            raise KernelError("weight_var entries must be > 0")

    def needs_repair(self) -> bool:
        return self.repair or (self.kind == "shifted_rbf" and self.shift > 0)


def _arcsin_weights(spec: KernelSpec, d: int) -> np.ndarray:
    if spec.weight_var is None:
        return np.ones(d + 1)
    w = np.asarray(spec.weight_var, dtype=float)
    if w.shape != (d + 1,):
        raise KernelError(f"weight_var needs {d + 1} entries (bias + {d} dims), got {w.shape}")
    return w


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Closed-form kernel value for one pair of feature vectors."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise KernelError(f"dimension mismatch: {x.shape} vs {y.shape}")
    kind = spec.kind
    if kind == "rbf":
        r2 = float(np.dot(x - y, x - y))
        return spec.sigma_f2 * float(np.exp(-r2 / (2.0 * spec.length_scale**2)))
    if kind == "shifted_rbf":
        # similarity peaks at distance = shift instead of 0
        r = float(np.linalg.norm(x - y))
        return float(np.exp(-((r - spec.shift) ** 2) / (2.0 * spec.length_scale**2)))
    if kind == "eimq":
        # tends to 1 at large distance, exp(-c^(-2 beta)) at zero distance
        r2 = float(np.dot(x - y, x - y))
        return float(np.exp(-((r2 + spec.c**2) ** (-spec.beta))))
    if kind == "absolute_rbf":
        # rbf with the exponent sign removed; grows with distance, not PSD
        r2 = float(np.dot(x - y, x - y))
        return float(np.exp(r2 / (2.0 * spec.length_scale**2)))
    if kind == "arcsin_nn":
        w = _arcsin_weights(spec, x.shape[0])
        xa = np.concatenate(([1.0], x))
        ya = np.concatenate(([1.0], y))
        num = 2.0 * float(xa @ (w * ya))
        den = np.sqrt(
            (1.0 + 2.0 * float(xa @ (w * xa))) * (1.0 + 2.0 * float(ya @ (w * ya)))
        )
        arg = np.clip(num / den, -1.0, 1.0)
        return float((2.0 / np.pi) * np.arcsin(arg))
    if kind == "ntk3":
        nx = float(np.linalg.norm(x))
        ny = float(np.linalg.norm(y))
        dot = float(np.dot(x, y))
        if np.array_equal(x, y):
            # self-pair collapses to width * |x|^2; the generic path loses
            # 1e-8 of that to cancellation in sqrt(1 - rho^2) near rho = 1
            return spec.width * dot
        if nx == 0.0 or ny == 0.0:
            # analytic limit: arc term vanishes with the norms, rho taken as 0
            return spec.width * 0.25 * dot
        rho = min(1.0, max(-1.0, dot / (nx * ny)))
        arc = (nx * ny / (2.0 * np.pi)) * (
            np.sqrt(max(0.0, 1.0 - rho * rho)) + rho * np.arccos(-rho)
        )
        return spec.width * float(arc + (0.25 + np.arcsin(rho) / (2.0 * np.pi)) * dot)
    raise KernelError(f"unknown kernel kind {kind!r}")


def build_covariance(spec: KernelSpec, X, add_noise: bool = False) -> np.ndarray:
    """Gram matrix K[i,j] = k(x_i, x_j), optionally plus noise on the diagonal."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    M = X.shape[0]
    if M < 1:
        raise KernelError("feature matrix needs at least one row")
    K = np.empty((M, M))
    for i in range(M):
        for j in range(i, M):
            v = kernel_eval(spec, X[i], X[j])
            if not np.isfinite(v):
                raise KernelError(f"non-finite kernel value for item pair ({i}, {j})")
            K[i, j] = v
            K[j, i] = v
    if add_noise:
        K = K + spec.noise * np.eye(M)
    return K


def _require_symmetric(K: np.ndarray) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise KernelError(f"covariance must be square, got shape {K.shape}")
    scale = max(1.0, float(np.abs(K).max()))
    if float(np.abs(K - K.T).max()) > 1e-12 * scale:
        raise KernelError("covariance is not symmetric")
    return K


def psd_check(K, tol: float = 1e-8) -> tuple[bool, float]:
    """(is_psd, min eigenvalue); PSD iff min_eig >= -tol * max(1, max_eig)."""
    K = _require_symmetric(K)
    eigs = np.linalg.eigvalsh(K)
    min_eig = float(eigs[0])
    max_eig = float(eigs[-1])
    return min_eig >= -tol * max(1.0, max_eig), min_eig


def psd_repair(K) -> np.ndarray:
    """Zero out non-positive eigenvalues and rebuild.

    Among matrices sharing K's eigenvectors this is the Frobenius-nearest
    PSD matrix. Idempotent on already-PSD input to numerical tolerance;
    eigenvalues in [-1e-10 * max_eig, 0] count as zero rather than errors.
    """
    K = _require_symmetric(K)
    w, Q = np.linalg.eigh(K)
    w = np.where(w > 0.0, w, 0.0)
    out = (Q * w) @ Q.T
    return (out + out.T) / 2.0


def orthant_prob_analytic(K_I) -> float:
    """Exact positive-orthant probability for a 1x1 or 2x2 covariance.

    Size 1 is 0.5 regardless of variance; size 2 is 1/4 + arcsin(rho)/(2 pi)
    with rho the correlation.
    """
    K_I = np.asarray(K_I, dtype=float)
    if K_I.shape == ():
        K_I = K_I.reshape(1, 1)
    if K_I.shape == (1, 1):
        if K_I[0, 0] <= 0:
            raise KernelError("variance must be positive")
        return 0.5
    if K_I.shape != (2, 2):
        raise KernelError(f"analytic orthant needs size 1 or 2, got {K_I.shape}")
    v0, v1 = K_I[0, 0], K_I[1, 1]
    if v0 <= 0 or v1 <= 0:
        raise KernelError("diagonal must be positive")
    rho = K_I[0, 1] / np.sqrt(v0 * v1)
    if abs(rho) > 1.0 + 1e-12:
        raise KernelError(f"invalid covariance, correlation {rho} outside [-1, 1]")
    rho = min(1.0, max(-1.0, float(rho)))
    return 0.25 + float(np.arcsin(rho)) / (2.0 * np.pi)
