"""Frame-level lambda-domain rate control.

The controller allocates a per-frame bit budget toward a target bitrate,
converts bits/pixel to lambda through the hyperbolic model

    lambda = alpha * bpp ** beta        (beta < 0)

maps lambda to a base QP, and after each frame adapts alpha/beta from the
log ratio between the lambda actually used and the lambda the model
predicts for the realized bits:

    lambda_comp = alpha_old * bpp_real ** beta_old
    lr          = ln(lambda_real / lambda_comp), clamped to [-1, 1]
    alpha_new   = alpha_old + 0.1  * lr * alpha_old
    beta_new    = beta_old  + 0.05 * lr * beta_old * ln(bpp_real)

Budgets use cumulative deficit feedback (nominal minus spent bits), so
overshooting one frame shrinks the following budgets and the closed loop
converges on the target rate. Low-delay operation: the budget for frame
k+1 depends on realized bits of frame k, nothing further ahead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

DELTA_ALPHA = 0.1
DELTA_BETA = 0.05

ALPHA_INIT = 3.2003
BETA_INIT = -1.367
ALPHA_RANGE = (0.05, 500.0)
BETA_RANGE = (-3.0, -0.1)
LAMBDA_RANGE = (0.05, 10000.0)
LR_RANGE = (-1.0, 1.0)

# De-facto standard pairing for hyperbolic-model controllers; pinned here
# so the lambda -> QP mapping is exactly reproducible.
QP_LAMBDA_SCALE = 4.2005
QP_LAMBDA_OFFSET = 13.7122

QP_MIN, QP_MAX = 0, 51

BUDGET_FLOOR_FRACTION = 0.1


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


@dataclass(frozen=True)
class RcModelState:
    """Hyperbolic rate model coefficients plus feedback bookkeeping."""

    alpha: float = ALPHA_INIT
    beta: float = BETA_INIT
    delta_alpha: float = DELTA_ALPHA
    delta_beta: float = DELTA_BETA
    last_lambda: float | None = None
    last_target_bpp: float | None = None
    last_bpp_real: float | None = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.beta >= 0:
            raise ValueError(f"beta must be negative, got {self.beta}")


@dataclass(frozen=True)
class FrameBudget:
    target_bits: int
    target_bpp: float | None
    buffer_deficit: float

    def __post_init__(self):
        if self.target_bits <= 0:
            raise ValueError(f"target_bits must be positive, got {self.target_bits}")


def plan_frame_budget(
    target_bitrate: float,
    fps: float,
    deficit: float = 0.0,
    window: int = 30,
    frame_pixels: int | None = None,
) -> FrameBudget:
    """Allocate bits for the next frame.

    target_bits = bitrate/fps + deficit/window, floored at 10% of the
    nominal per-frame budget so a deep deficit can never starve a frame
    completely.
    """
    if target_bitrate <= 0:
        raise ValueError(f"target_bitrate must be positive, got {target_bitrate}")
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    nominal = target_bitrate / fps
    bits = max(nominal + deficit / window, BUDGET_FLOOR_FRACTION * nominal)
    target_bits = int(bits)
    bpp = target_bits / frame_pixels if frame_pixels else None
    return FrameBudget(target_bits=target_bits, target_bpp=bpp, buffer_deficit=deficit)


def lambda_from_bpp(state: RcModelState, bpp: float) -> float:
    """Hyperbolic model lambda = alpha * bpp**beta, clamped to a sane band."""
    if bpp <= 0:
        raise ValueError(f"bpp must be positive, got {bpp}")
    return _clamp(state.alpha * bpp**state.beta, *LAMBDA_RANGE)


def qp_from_lambda(lam: float) -> int:
    """Base frame QP from lambda, rounded half up and clipped to [0, 51]."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    qp = math.floor(QP_LAMBDA_SCALE * math.log(lam) + QP_LAMBDA_OFFSET + 0.5)
    return int(_clamp(qp, QP_MIN, QP_MAX))


def compose_ctu_qp(qp_base: int, dqp: int) -> int:
    """Per-CTU QP = base + delta, clipped into the valid [0, 51] range."""
    return int(_clamp(qp_base + dqp, QP_MIN, QP_MAX))


def update_model(
    state: RcModelState,
    target_bpp: float,
    bpp_real: float,
    lambda_real: float,
) -> RcModelState:
    """Adapt alpha/beta from one encoded frame; returns the new state.

    If the model already explains the realized bits (lambda_real equals
    the model prediction at bpp_real), the log ratio is zero and the state
    is a fixed point.
    """
    if bpp_real <= 0:
        raise ValueError(f"bpp_real must be positive, got {bpp_real}")
    if lambda_real <= 0:
        raise ValueError(f"lambda_real must be positive, got {lambda_real}")
    lambda_comp = state.alpha * bpp_real**state.beta
    lr = _clamp(math.log(lambda_real / lambda_comp), *LR_RANGE)
    alpha = state.alpha + state.delta_alpha * lr * state.alpha
    beta = state.beta + state.delta_beta * lr * state.beta * math.log(bpp_real)
    return replace(
        state,
        alpha=_clamp(alpha, *ALPHA_RANGE),
        beta=_clamp(beta, *BETA_RANGE),
        last_lambda=lambda_real,
        last_target_bpp=target_bpp,
        last_bpp_real=bpp_real,
    )


@dataclass
class RcTraceRow:
    """Everything the controller knew and decided for one frame."""

    frame: int
    target_bits: int
    target_bpp: float
    lam: float
    qp_base: int
    actual_bits: int = 0
    bpp_real: float = 0.0
    deficit_after: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0


class RateController:
    """Sequential owner of the rate model for one encode.

    Protocol per frame: ``plan()`` before encoding, ``record(bits)`` after.
    """

    def __init__(self, bitrate: float, fps: float, width: int, height: int,
                 window: int = 30):
        if width <= 0 or height <= 0:
            raise ValueError(f"bad frame dimensions {width}x{height}")
        self.bitrate = float(bitrate)
        self.fps = float(fps)
        self.window = int(window)
        self.pixels = width * height
        self.nominal_bits = self.bitrate / self.fps
        self.state = RcModelState()
        self.deficit = 0.0
        self.frame_index = 0
        self.trace: list[RcTraceRow] = []
        self._pending: RcTraceRow | None = None

    def plan(self) -> tuple[FrameBudget, float, int]:
        """Budget, lambda and base QP for the next frame."""
        if self._pending is not None:
            raise RuntimeError("plan() called twice without record()")
        budget = plan_frame_budget(
            self.bitrate, self.fps, self.deficit, self.window, self.pixels
        )
        lam = lambda_from_bpp(self.state, budget.target_bpp)
        qp_base = qp_from_lambda(lam)
        self._pending = RcTraceRow(
            frame=self.frame_index,
            target_bits=budget.target_bits,
            target_bpp=budget.target_bpp,
            lam=lam,
            qp_base=qp_base,
        )
        return budget, lam, qp_base

    def record(self, bits_spent: int) -> None:
        """Feed realized bits back: update deficit and adapt the model."""
        row = self._pending
        if row is None:
            raise RuntimeError("record() called without a pending plan()")
        self._pending = None
        bpp_real = bits_spent / self.pixels
        self.state = update_model(self.state, row.target_bpp, bpp_real, row.lam)
        self.deficit += self.nominal_bits - bits_spent
        row.actual_bits = int(bits_spent)
        row.bpp_real = bpp_real
        row.deficit_after = self.deficit
        row.alpha = self.state.alpha
        row.beta = self.state.beta
        self.trace.append(row)
        self.frame_index += 1
