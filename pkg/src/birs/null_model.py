"""Null generalized linear model fit and the bootstrap residual factor.

The null model regresses the outcome on covariates only.  Two families
are supported: gaussian with identity link and binomial with logit
link.  Besides the fitted coefficients the model carries everything the
score engine needs: response residuals, the variance-weight diagonal,
and a factorization that applies

    M = W^{1/2} (I - H),   H = W^{1/2} X (X' W X)^{-1} X' W^{1/2}

to arbitrary vectors in O(n q) per vector, where W is the diagonal of
per-sample outcome variances.  M M' equals the residual projection
covariance W - W X (X' W X)^{-1} X' W, so M e with e ~ N(0, I) has
exactly the asymptotic null covariance of the response residuals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.special import expit

from .errors import (
    DegenerateVariance,
    DimensionMismatch,
    NoConvergence,
    SeparationDetected,
    SingularDesign,
)

IRLS_TOL = 1e-8
IRLS_MAX_ITER = 50
SEPARATION_EPS = 1e-10
SEPARATION_FRACTION = 0.01


class Family(enum.Enum):
    """Outcome family with its canonical link."""

    GAUSSIAN_IDENTITY = "gaussian_identity"
    BINOMIAL_LOGIT = "binomial_logit"

    def variance(self, mean: np.ndarray) -> np.ndarray:
        if self is Family.GAUSSIAN_IDENTITY:
            return np.ones_like(mean)
        return mean * (1.0 - mean)

    @property
    def fixed_dispersion(self) -> bool:
        return self is Family.BINOMIAL_LOGIT


class BootFactor:
    """Cached pieces for applying M = W^{1/2}(I - H) in O(n q) per vector."""

    def __init__(self, x: np.ndarray, lam: np.ndarray):
        if np.any(lam <= 0.0) or not np.all(np.isfinite(lam)):
            raise DegenerateVariance(
                "variance weights must be strictly positive to form the bootstrap factor"
            )
        self.n, self.q = x.shape
        self._x = x
        self._sqrt_lam = np.sqrt(lam)
        self._lam_x = lam[:, None] * x
        gram = x.T @ self._lam_x
        try:
            self._gram_cho = sla.cho_factor(gram)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded upstream
            raise SingularDesign("X' W X is singular") from exc

    def apply(self, e: np.ndarray) -> np.ndarray:
        """Return M @ e for a vector (n,) or matrix (n, m) of columns."""
        t = self._sqrt_lam[..., None] * e if e.ndim == 2 else self._sqrt_lam * e
        proj = self._lam_x @ sla.cho_solve(self._gram_cho, self._x.T @ t)
        return t - proj


@dataclass
class NullModel:
    """Fitted covariate-only GLM.

    Immutable after construction; safe to share read-only across
    concurrent workers.
    """

    family: Family
    gamma_hat: np.ndarray
    eta0_hat: np.ndarray
    lambda_hat: np.ndarray
    phi_hat: float
    residuals: np.ndarray
    covariates: np.ndarray
    _factor: BootFactor | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def q(self) -> int:
        return self.covariates.shape[1]

    @property
    def boot_factor(self) -> BootFactor:
        if self._factor is None:
            self._factor = BootFactor(self.covariates, self.lambda_hat)
        return self._factor

    def to_dict(self) -> dict:
        return {
            "format": "birs-null-model",
            "version": 1,
            "family": self.family.value,
            "n": int(self.n),
            "q": int(self.q),
            "gamma_hat": self.gamma_hat.tolist(),
            "phi_hat": float(self.phi_hat),
            "eta0_hat": self.eta0_hat.tolist(),
            "lambda_hat": self.lambda_hat.tolist(),
            "residuals": self.residuals.tolist(),
            "covariates": self.covariates.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "NullModel":
        return cls(
            family=Family(payload["family"]),
            gamma_hat=np.asarray(payload["gamma_hat"], dtype=np.float64),
            eta0_hat=np.asarray(payload["eta0_hat"], dtype=np.float64),
            lambda_hat=np.asarray(payload["lambda_hat"], dtype=np.float64),
            phi_hat=float(payload["phi_hat"]),
            residuals=np.asarray(payload["residuals"], dtype=np.float64),
            covariates=np.asarray(payload["covariates"], dtype=np.float64),
        )


def _validate_design(y: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.float64).ravel()
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch("covariate matrix must be 2-dimensional")
    n, q = x.shape
    if y.shape[0] != n:
        raise DimensionMismatch(f"outcome length {y.shape[0]} != covariate rows {n}")
    if n <= q:
        raise ValueError(f"need n > q, got n={n}, q={q}")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
        raise ValueError("outcome and covariates must be finite (no missing values)")
    if not np.all(x[:, 0] == 1.0):
        raise ValueError("first covariate column must be an all-ones intercept")
    return y, x


def _fit_gaussian(y: np.ndarray, x: np.ndarray) -> NullModel:
    n, q = x.shape
    gram = x.T @ x
    try:
        cho = sla.cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularDesign("X' X is singular") from exc
    gamma = sla.cho_solve(cho, x.T @ y)
    eta0 = x @ gamma
    resid = y - eta0
    phi = float(resid @ resid) / (n - q)
    lam = np.full(n, phi)
    return NullModel(
        family=Family.GAUSSIAN_IDENTITY,
        gamma_hat=gamma,
        eta0_hat=eta0,
        lambda_hat=lam,
        phi_hat=phi,
        residuals=resid,
        covariates=x,
    )


def _fit_binomial(y: np.ndarray, x: np.ndarray) -> NullModel:
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("binomial outcomes must lie in {0, 1}")
    n, q = x.shape
    gamma = np.zeros(q)
    converged = False
    eta = np.full(n, 0.5)
    for _ in range(IRLS_MAX_ITER):
        eta = expit(x @ gamma)
        boundary = np.minimum(eta, 1.0 - eta) < SEPARATION_EPS
        if boundary.mean() > SEPARATION_FRACTION:
            raise SeparationDetected(
                f"{boundary.mean():.1%} of fitted probabilities are within "
                f"{SEPARATION_EPS} of 0/1"
            )
        w = eta * (1.0 - eta)
        gram = (x * w[:, None]).T @ x
        try:
            step = sla.cho_solve(sla.cho_factor(gram), x.T @ (y - eta))
        except np.linalg.LinAlgError as exc:
            raise SingularDesign("X' W X is singular during IRLS") from exc
        gamma = gamma + step
        if np.max(np.abs(step)) < IRLS_TOL:
            converged = True
            break
    if not converged:
        raise NoConvergence(f"IRLS did not converge within {IRLS_MAX_ITER} iterations")
    eta = expit(x @ gamma)
    lam = eta * (1.0 - eta)
    return NullModel(
        family=Family.BINOMIAL_LOGIT,
        gamma_hat=gamma,
        eta0_hat=eta,
        lambda_hat=lam,
        phi_hat=1.0,
        residuals=y - eta,
        covariates=x,
    )


def fit_null(y: np.ndarray, x: np.ndarray, family: Family) -> NullModel:
    """Fit the covariate-only null model.

    Args:
        y: length-n outcome vector; in {0, 1} for the binomial family.
        x: n-by-q covariate matrix whose first column is the intercept.
        family: outcome family with canonical link.

    Returns:
        The fitted :class:`NullModel`.

    Raises:
        SingularDesign: the weighted covariate Gram matrix is not invertible.
        NoConvergence: the logistic fit hit its iteration cap.
        SeparationDetected: fitted probabilities degenerate for >1% of samples.
    """
    y, x = _validate_design(y, x)
    if family is Family.GAUSSIAN_IDENTITY:
        return _fit_gaussian(y, x)
    if family is Family.BINOMIAL_LOGIT:
        return _fit_binomial(y, x)
    raise ValueError(f"unsupported family: {family}")


def apply_boot_factor(model: NullModel, e: np.ndarray) -> np.ndarray:
    """Apply the residual factor M to a length-n vector.

    cov(M e) equals W - W X (X' W X)^{-1} X' W exactly when e ~ N(0, I).

    Raises:
        DimensionMismatch: e does not have length n.
        DegenerateVariance: the fit produced non-positive variance weights.
    """
    e = np.asarray(e, dtype=np.float64)
    if e.shape != (model.n,):
        raise DimensionMismatch(f"expected shape ({model.n},), got {e.shape}")
    return model.boot_factor.apply(e)
