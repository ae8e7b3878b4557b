"""RBF-kernel SVM trained with an SMO dual solver."""

from dataclasses import dataclass

import numpy as np

from rhythmformants import kernels


class SVMError(ValueError):
    """Raised for inputs the SVM cannot be trained or evaluated on."""


def fit_scaler(train: np.ndarray):
    """Per-dim (mean, std) from training rows; zero-std dims pass through unscaled."""
    train = np.asarray(train, dtype=np.float64)
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    passthrough = std == 0.0
    mean = np.where(passthrough, 0.0, mean)
    std = np.where(passthrough, 1.0, std)
    return mean, std


def standardize(train: np.ndarray, apply_to: np.ndarray | None = None):
    """Z-score both matrices using the training statistics."""
    mean, std = fit_scaler(train)
    train_s = (np.asarray(train, dtype=np.float64) - mean) / std
    if apply_to is None:
        return train_s, None
    return train_s, (np.asarray(apply_to, dtype=np.float64) - mean) / std


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """K(u, v) = exp(-gamma * ||u - v||^2) for all row pairs."""
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass
class SVMModel:
    """Trained binary SVM; support vectors live in standardized space."""

    support_vectors: np.ndarray
    alphas: np.ndarray
    labels: np.ndarray  # +/-1 per support vector
    bias: float
    gamma: float
    C: float
    scaler_mean: np.ndarray
    scaler_std: np.ndarray
    n_iter: int = 0
    converged: bool = True
    objective_trace: np.ndarray | None = None


def svm_train(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    gamma: float,
    scaler=None,
    tol: float = 1e-3,
    max_iter: int = 100_000,
    keep_objective: bool = False,
) -> SVMModel:
    """SMO-fit an RBF SVM on standardized rows X with labels y in {-1, +1}.

    `scaler` is the (mean, std) pair used to standardize X; it is stored on
    the model so svm_predict can scale raw inputs.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise SVMError("non-finite feature values in training data")
    if len(set(np.sign(y))) < 2:
        raise SVMError("training data contains a single class")
    if np.any(np.abs(y) != 1.0):
        raise SVMError("labels must be +1 or -1")

    K = rbf_kernel(X, X, gamma)
    alphas, bias, n_iter, converged, obj = kernels.smo_solve(K, y, float(C), tol, max_iter)

    sv = alphas > 1e-12
    if not sv.any():  # degenerate but possible at extreme C; keep everything
        sv = np.ones(len(y), dtype=bool)
    if scaler is None:
        scaler = (np.zeros(X.shape[1]), np.ones(X.shape[1]))
    return SVMModel(
        support_vectors=X[sv].copy(),
        alphas=alphas[sv].copy(),
        labels=y[sv].copy(),
        bias=bias,
        gamma=float(gamma),
        C=float(C),
        scaler_mean=np.asarray(scaler[0], dtype=np.float64),
        scaler_std=np.asarray(scaler[1], dtype=np.float64),
        n_iter=n_iter,
        converged=converged,
        objective_trace=obj if keep_objective else None,
    )


def decision_value(model: SVMModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.support_vectors.shape[1],):
        raise SVMError(
            f"feature dimension {x.shape} does not match model "
            f"({model.support_vectors.shape[1]},)"
        )
    x_s = (x - model.scaler_mean) / model.scaler_std
    k = rbf_kernel(model.support_vectors, x_s[None, :], model.gamma)[:, 0]
    return float(np.dot(model.alphas * model.labels, k) + model.bias)


def svm_predict(model: SVMModel, x: np.ndarray):
    """Predict one raw (unscaled) feature row; ties at 0 go to +1."""
    value = decision_value(model, x)
    return (1 if value >= 0.0 else -1), value


def svm_predict_batch(model: SVMModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    X_s = (X - model.scaler_mean) / model.scaler_std
    k = rbf_kernel(X_s, model.support_vectors, model.gamma)
    values = k @ (model.alphas * model.labels) + model.bias
    return np.where(values >= 0.0, 1, -1)
