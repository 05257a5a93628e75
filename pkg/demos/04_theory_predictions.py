"""Walkthrough: positional-encoding and attention-based threshold predictions.

The rotary base angle theta fixes an approximate positional period
P = 2*pi/theta; dividing a fraction alpha of that period by the context
capacity predicts where degradation should start.  Attention matrices
supply two complementary proxies: row-max concentration and row entropy.
The unified prediction is simply the tightest available bound.

Run:  python3 demos/04_theory_predictions.py
"""
from __future__ import annotations

import numpy as np

from cliffpoint import (
    AttentionMatrix,
    RopeParams,
    attention_concentration,
    attention_entropy,
    rope_period,
    rope_threshold,
    unified_threshold,
)

params = RopeParams(theta=1e-4, alpha=1.0, t_max=131072)
period = rope_period(params.theta)
threshold = rope_threshold(params)
print(f"theta = {params.theta:g}  ->  period P = {period:,.2f} tokens")
print(f"usable fraction of a {params.t_max:,}-token window: {threshold:.4f} "
      f"({threshold:.1%})")
print()

focused = AttentionMatrix(np.eye(4))
diffuse = AttentionMatrix(np.full((4, 4), 0.25))
mixed = AttentionMatrix(np.array([[0.7, 0.3], [0.4, 0.6]]))
for name, m in [("one-hot", focused), ("uniform", diffuse), ("mixed", mixed)]:
    print(f"{name:8s} concentration C = {attention_concentration(m):.4f}, "
          f"entropy H = {attention_entropy(m):.4f}")
print()

unified = unified_threshold(l_rope=threshold, l_attention=0.43, l_info=0.44)
print(f"unified prediction: {unified.threshold} (bottleneck: {unified.bottleneck})")
print(f"inputs considered: {unified.inputs}")
