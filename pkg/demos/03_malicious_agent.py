"""The inside job: one participant measures the other's returned qubits.

TP only Bell-verifies positions where BOTH participants reflected, so a
participant who intercepts at its own SIFT positions can never be caught
there.  Both SIFT sets are random L-subsets of the 2L positions, so the
overlap, and with it the stolen fraction of the victim's secret, averages
one half.
"""

import numpy as np

from sqpc import ExperimentSpec, MaliciousAgent, SessionConfig, run_experiment
from sqpc.jiang import random_bits, run_session

spec = ExperimentSpec(scenario="jiang", attack="malicious-agent", L=32, trials=2_000, seed=7)
stats = run_experiment(spec)
print(f"victim=A attacker=B L={spec.L} trials={spec.trials}")
for name in ("leak_fraction", "leak_accuracy", "detected_rate"):
    print(f"  {name:15s} {stats.metrics[name].mean:.4f}")
print()

# One concrete session, spelled out.
rng = np.random.default_rng(99)
key = random_bits(8, rng)
secret_a = random_bits(8, rng)
secret_b = random_bits(8, rng)
agent = MaliciousAgent(victim="A", key=key)
transcript, outcome, reports = run_session(SessionConfig(L=8), secret_a, secret_b, key, [agent], rng)
report = reports[0]

print("one L=8 session in detail:")
print(f"  victim secret        {''.join(map(str, secret_a))}")
stolen = ["?"] * 8
for idx, bit in report.secret_bits.items():
    stolen[idx] = str(bit)
print(f"  attacker recovered   {''.join(stolen)}   ('?' = not intercepted)")
print(f"  outcome: {outcome.kind}, attack detected: {report.detected}")
