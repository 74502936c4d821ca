"""Point losses and their derivative in the prediction argument.

Squared loss for regression, logistic loss for +/-1 classification.  Both
are convex and smooth in the prediction, which is what the gradient-based
solvers rely on.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from scipy.special import expit


class LossKind(Enum):
    SQUARED = "squared"
    LOGISTIC = "logistic"

    @classmethod
    def parse(cls, text: str) -> "LossKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown loss {text!r}; expected 'squared' or 'logistic'"
            ) from None


def _check_label(y: float) -> None:
    if y not in (-1.0, 1.0):
        raise ValueError(f"logistic labels must be -1 or +1, got {y}")


def loss_value(kind: LossKind, y: float, yhat: float) -> float:
    """Loss of predicting ``yhat`` when the response is ``y``."""
    if kind is LossKind.SQUARED:
        return 0.5 * (y - yhat) ** 2
    _check_label(y)
    # log(1 + exp(-y*yhat)) without overflow for large |yhat|
    return float(np.logaddexp(0.0, -y * yhat))


def loss_grad2(kind: LossKind, y: float, yhat: float) -> float:
    """Derivative of the loss with respect to the prediction."""
    if kind is LossKind.SQUARED:
        return yhat - y
    _check_label(y)
    return float(-y * expit(-y * yhat))
