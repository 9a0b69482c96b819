"""Detection odds for returned-qubit tampering in the improved protocol.

Blocking (X-measuring everything the victim sends back) corrupts each
disclosed R bit with probability 1/2, so with k disclosed-and-attacked
bits the session aborts with probability 1 - (1/2)^k.  A malicious agent
Z-measuring m random return positions instead gets caught through the
reflected photons it hits: undetected probability E[(1/2)^{#hits}].
"""

import math

from sqpc import ExperimentSpec, estimate_detection_curve

print("blocking attack, k disclosed-and-attacked bits:")
spec = ExperimentSpec(scenario="improved", attack="blocking", L=1, trials=2_000, seed=11)
curve = estimate_detection_curve(spec, [1, 2, 4, 8])
print("  k   measured   closed form 1-(1/2)^k")
for row in curve.rows:
    print(f"  {row.k}   {row.detection_rate:.4f}     {1 - 0.5 ** row.k:.4f}")
print()

print("malicious agent measuring m of the victim's 8 returns (L=2):")


def undetected(m):
    total = math.comb(8, m)
    return sum(
        math.comb(4, j) * math.comb(4, m - j) / total * 0.5**j
        for j in range(max(0, m - 4), min(4, m) + 1)
    )


spec = ExperimentSpec(scenario="improved", attack="malicious-agent", L=2, trials=2_000, seed=11)
curve = estimate_detection_curve(spec, [0, 2, 4, 8])
print("  m   measured   hypergeometric mixture")
for row in curve.rows:
    print(f"  {row.k}   {row.detection_rate:.4f}     {1 - undetected(row.k):.4f}")
print()
print("blocking yields the attacker nothing either way: the X outcomes are")
print("independent of the Z bits they destroy.")
