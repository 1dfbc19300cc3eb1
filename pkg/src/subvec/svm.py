"""Linear SVM trained with Pegasos (primal stochastic sub-gradient descent).

The bias is learned as the weight of a constant feature appended to every
input, so it is regularized together with ``w``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyClass


@dataclass(frozen=True)
class SvmParams:
    lam: float = 1e-4
    epochs: int = 20
    project: bool = True

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "epochs": self.epochs, "projection": self.project,
                "kernel": "linear", "inputs": "raw vectors", "solver": "pegasos"}


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    bias: float

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        return self.decision(X) > 0


def train_linear_svm(positives, negatives, params: SvmParams = SvmParams(), seed: int = 0) -> LinearModel:
    pos = np.atleast_2d(np.asarray(positives, dtype=np.float64))
    neg = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    if pos.size == 0 or neg.size == 0:
        raise EmptyClass("both classes need at least one example")
    X = np.vstack([pos, neg])
    X = np.hstack([X, np.ones((X.shape[0], 1))])
    y = np.concatenate([np.ones(len(pos)), -np.ones(len(neg))])
    lam = params.lam
    radius = 1.0 / np.sqrt(lam)
    rng = np.random.default_rng(seed)
    w = np.zeros(X.shape[1])
    t = 0
    for _ in range(params.epochs):
        for i in rng.permutation(len(y)):
            t += 1
            eta = 1.0 / (lam * t)
            violated = y[i] * (X[i] @ w) < 1.0
            w *= 1.0 - 1.0 / t
            if violated:
                w += (eta * y[i]) * X[i]
            if params.project:
                n = np.sqrt(w @ w)
                if n > radius:
                    w *= radius / n
    return LinearModel(w[:-1].copy(), float(w[-1]))
