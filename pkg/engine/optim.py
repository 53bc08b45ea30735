from typing import Dict, Iterable, Tuple
import numpy as np
from core.errors import NonFiniteError
from engine.layers import Parameter


AdamMoments = Dict[str, Tuple[np.ndarray, np.ndarray]]


def adam_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdamMoments,
              lr: float, beta1: float, beta2: float, eps: float,
              t: int) -> Tuple[Dict[str, np.ndarray], AdamMoments]:
    """
    One Adam update with bias correction, t >= 1.
    Returns new parameter arrays and moments; inputs are left untouched.
    """
    if t < 1:
        raise ValueError("Adam step counter starts at 1")
    new_params, new_state = {}, {}
    for name, theta in params.items():
        g = grads[name]
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for parameter '{name}'")
        m, v = state.get(name, (np.zeros_like(theta), np.zeros_like(theta)))
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        new_params[name] = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_state[name] = (m, v)
    return new_params, new_state


class Adam:
    def __init__(self, named_params: Iterable[Tuple[str, Parameter]], lr: float = 0.005,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = dict(named_params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state: AdamMoments = {}
        self.t = 0

    def step(self):
        self.t += 1
        data = {name: p.data for name, p in self.params.items()}
        grads = {name: p.grad if p.grad is not None else np.zeros_like(p.data)
                 for name, p in self.params.items()}
        updated, self.state = adam_step(data, grads, self.state, self.lr,
                                        self.beta1, self.beta2, self.eps, self.t)
        for name, p in self.params.items():
            p.data = updated[name]
