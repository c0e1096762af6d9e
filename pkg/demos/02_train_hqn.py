"""Train the hierarchical learner on a 12x12 Wythoff board and watch the model.

Every period the Q-agent plays self-play games, a small network is fitted to
the states the Q-table is confident about, and the network is scored by
playing it against the Q-agent on a 50x50 board. The best network so far is
printed as a heatmap: dark characters are cells it believes are cold.
"""
import numpy as np

from hqnlab.bench import model_heatmap, render_heatmap, run_dimension_sweep
from hqnlab.controller import ControllerState, HQNConfig, run_hqn

rng = np.random.default_rng(0)
state = ControllerState()
config = HQNConfig(periods=15, games_per_period=2000)

for rec in run_hqn(config, rng, state=state):
    print(f"period {rec.period:2d}  games {rec.games:6d}  best_perf {rec.best_perf:.2f}  "
          f"move accuracy on 50x50 {rec.move_accuracy:.3f}")
    if rec.period in (2, 8, 14) and state.best_model is not None and state.best_model.net is not None:
        # invert so cold (low output) cells print dark
        print(render_heatmap(1 - model_heatmap(state.best_model, 30, 30)))

if state.best_model is not None and state.best_model.net is not None:
    print("dim  classification  move")
    for d, cls_acc, mv_acc, base in run_dimension_sweep(state.best_model, [12, 50, 100, 300]):
        print(f"{d:3d}  {cls_acc:.3f}           {mv_acc:.3f}   (random play {base:.3f})")
