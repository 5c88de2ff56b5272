"""Adam optimizer with bias correction.

Defaults follow the canonical parameterization used for the gesture
classifier: learning rate 0.01, beta1 0.9, beta2 0.999, eps 1e-8. No
weight decay, no gradient clipping, no schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mlp import DenseLayer, GradientSet, MlpModel


@dataclass
class AdamState:
    """Optimizer state: step count plus first/second moment estimates.

    Moments are stored per layer in (weights, bias) pairs, shape-congruent
    with the model being optimized.
    """

    alpha: float
    beta1: float
    beta2: float
    eps: float
    step_count: int = 0
    m_weights: list[np.ndarray] = field(default_factory=list)
    m_biases: list[np.ndarray] = field(default_factory=list)
    v_weights: list[np.ndarray] = field(default_factory=list)
    v_biases: list[np.ndarray] = field(default_factory=list)


def adam_new(
    model: MlpModel,
    alpha: float = 0.01,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """Fresh state for `model`: t = 0, zero moments."""
    if not alpha > 0:
        raise ValueError(f"learning rate must be positive, got {alpha!r}")
    if not 0.0 <= beta1 < 1.0:
        raise ValueError(f"beta1 must be in [0, 1), got {beta1!r}")
    if not 0.0 <= beta2 < 1.0:
        raise ValueError(f"beta2 must be in [0, 1), got {beta2!r}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    return AdamState(
        alpha=alpha,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
        step_count=0,
        m_weights=[np.zeros_like(layer.weights) for layer in model.layers],
        m_biases=[np.zeros_like(layer.bias) for layer in model.layers],
        v_weights=[np.zeros_like(layer.weights) for layer in model.layers],
        v_biases=[np.zeros_like(layer.bias) for layer in model.layers],
    )


def _update(theta, g, m, v, state: AdamState, t: int):
    m_new = state.beta1 * m + (1.0 - state.beta1) * g
    v_new = state.beta2 * v + (1.0 - state.beta2) * g * g
    m_hat = m_new / (1.0 - state.beta1**t)
    v_hat = v_new / (1.0 - state.beta2**t)
    theta_new = theta - state.alpha * m_hat / (np.sqrt(v_hat) + state.eps)
    return theta_new, m_new, v_new


def adam_step(state: AdamState, model: MlpModel, grads: GradientSet) -> tuple[MlpModel, AdamState]:
    """One bias-corrected Adam update; returns the new model and state.

    t <- t+1; m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2;
    theta <- theta - alpha * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
    """
    if len(state.m_weights) != len(model.layers):
        raise ValueError("optimizer state does not match model layer count")
    if len(grads.weights) != len(model.layers):
        raise ValueError("gradient set does not match model layer count")
    t = state.step_count + 1
    new_layers = []
    new_state = AdamState(state.alpha, state.beta1, state.beta2, state.eps, step_count=t)
    for k, layer in enumerate(model.layers):
        gw, gb = grads.weights[k], grads.biases[k]
        if gw.shape != layer.weights.shape or gb.shape != layer.bias.shape:
            raise ValueError(f"gradient shape mismatch at layer {k}")
        w, mw, vw = _update(layer.weights, gw, state.m_weights[k], state.v_weights[k], state, t)
        b, mb, vb = _update(layer.bias, gb, state.m_biases[k], state.v_biases[k], state, t)
        new_layers.append(DenseLayer(w, b))
        new_state.m_weights.append(mw)
        new_state.m_biases.append(mb)
        new_state.v_weights.append(vw)
        new_state.v_biases.append(vb)
    return MlpModel(new_layers), new_state
