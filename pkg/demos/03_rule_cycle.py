"""Swap the rules under the learner's feet: Wythoff, then Nim, then Euclid, twice.

The learner is never told that the game changed. It only sees its best model's
score fall, resets its Q-table, and stores the old model. When a game returns,
a stored model that still wins is recalled at once.
"""
import numpy as np

from hqnlab.bench import RuleCycleConfig, cycle_report, run_rule_cycle, switch_events

config = RuleCycleConfig()
records = []
for rec in run_rule_cycle(config, np.random.default_rng(0)):
    records.append(rec)
    flag = " drop" if rec.drop else ""
    flag += " recall" if rec.recall else ""
    if rec.drop or rec.recall or (records and len(records) > 1 and
                                  records[-2].rules != rec.rules):
        print(f"period {rec.period:3d} {rec.rules.value:8s} perceived {rec.best_perf:.2f} "
              f"current {rec.current_perf:.2f} true move accuracy {rec.move_accuracy:.2f}{flag}")
    sw = switch_events(records)
    if len(sw) == len(config.cycle) - 1 and len(records) >= sw[-1] + 2:
        break

for row in cycle_report(records):
    print(row)
