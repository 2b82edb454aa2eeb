"""Transfer functions, bias fitting and the logistic output stage.

Eight transfer functions combine the drive r with the context c.  Four are
modulatory (the context rescales transmission of the drive without being
added on its own):

    M1 = r (1 + exp(r c)) / 2      M3 = r (1 + tanh(r c))
    M2 = r + r c                   M4 = r 2**(r c)

and four are plain arithmetic:

    A = r + c    S = r - c    P = r c    D = r / c

The raw value minus a bias b is clamped to +-500 before the logistic link;
the logistic already saturates around |T| = 37, so the clamp is lossless
while keeping exp() finite.  b is 0 for bipolar (mixture-model) runs and
the sample median of the raw values for unipolar runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .models import SampleBatch

CLAMP = 500.0
_EXP_ARG_MAX = 700.0     # exp overflow guard; result is clamped far below this
_POW2_ARG_MAX = 1000.0

TAGS = ("M1", "M2", "M3", "M4", "A", "S", "P", "D")
MODULATORY_TAGS = ("M1", "M2", "M3", "M4")
ARITHMETIC_TAGS = ("A", "S", "P", "D")

# CLI spellings.
CLI_TO_TAG = {
    "m1": "M1", "m2": "M2", "m3": "M3", "m4": "M4",
    "add": "A", "sub": "S", "mul": "P", "div": "D",
}
TAG_TO_CLI = {v: k for k, v in CLI_TO_TAG.items()}


class UnknownTransferError(ValueError):
    pass


@dataclass(frozen=True)
class TransferKind:
    """A transfer function tag plus the bias subtracted from its raw value."""

    tag: str
    bias: float = 0.0

    def __post_init__(self):
        if self.tag not in TAGS:
            raise UnknownTransferError(f"unknown transfer tag {self.tag!r}")
        if not np.isfinite(self.bias):
            raise ValueError("bias must be finite")


def parse_tag(token: str) -> str:
    key = token.strip().lower()
    if key in CLI_TO_TAG:
        return CLI_TO_TAG[key]
    if token.strip().upper() in TAGS:
        return token.strip().upper()
    raise UnknownTransferError(
        f"unknown transfer {token!r}; expected one of {'|'.join(CLI_TO_TAG)}")


def raw_transfer(tag: str, r, c):
    """Transfer value before bias subtraction and clamping."""
    r = np.asarray(r, dtype=float)
    c = np.asarray(c, dtype=float)
    if tag == "M1":
        return 0.5 * r * (1.0 + np.exp(np.minimum(r * c, _EXP_ARG_MAX)))
    if tag == "M2":
        return r * (1.0 + c)
    if tag == "M3":
        return r * (1.0 + np.tanh(r * c))
    if tag == "M4":
        return r * np.exp2(np.minimum(r * c, _POW2_ARG_MAX))
    if tag == "A":
        return r + c
    if tag == "S":
        return r - c
    if tag == "P":
        return r * c
    if tag == "D":
        # division by exact zero: keep the limit direction at the clamp value
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(c == 0.0, np.sign(r) * CLAMP, r / c)
        return out
    raise UnknownTransferError(f"unknown transfer tag {tag!r}")


def eval_transfer(kind: TransferKind, r, c):
    """Biased, clamped transfer value T(r, c) - b in [-CLAMP, CLAMP]."""
    return np.clip(raw_transfer(kind.tag, r, c) - kind.bias, -CLAMP, CLAMP)


def fit_bias(tag: str, batch: SampleBatch) -> float:
    """Median of the raw transfer values over the batch.

    Subtracting it balances the sign of the transfer values, so simulated
    outputs are near-equally likely +1 or -1 and H(Y) sits near 1 bit.
    For an even count the mean of the two middle order statistics is used.
    """
    if batch.n < 1:
        raise ValueError("batch must be nonempty")
    return float(np.median(raw_transfer(tag, batch.r, batch.c)))


def output_prob(t):
    """Logistic link: probability of output +1 given the transfer value."""
    return expit(np.asarray(t, dtype=float))


def simulate_outputs(theta, seed) -> np.ndarray:
    """Independent draws y_i in {-1, +1} with P(y_i = +1) = theta_i."""
    theta = np.asarray(theta, dtype=float)
    if ((theta < 0.0) | (theta > 1.0)).any():
        raise ValueError("probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    return np.where(rng.random(theta.shape) < theta, 1, -1)
