"""The synthetic knowledge base and the simulated answerer.

The generator plants a block of "code questions" that binary-code every
object, so an agent that discovers them can always win; the remaining
filler questions are nearly uninformative.  The simulator answers with
the argmax of (R, W, U) and can corrupt answers with probability epsilon.
"""

import numpy as np

from q20 import SimulatorConfig, generate_synthetic_kb, initial_belief, noisy_answer, sample_target
from q20.simulator import answer

kb = generate_synthetic_kb(
    n_objects=16,
    n_questions=12,
    n_code_questions=4,
    count_scale=1000,
    answer_ambiguity=0.05,
    seed=7,
)

print("object 13 answers the 4 code questions with its binary code (1101):")
for j in range(4):
    print(f"  bit {j}: {answer(kb, 13, j).value}")

print("\npopularity prior is heavy-tailed:")
prior = initial_belief(kb, "popularity")
top = np.argsort(prior)[::-1][:4]
for i in top:
    print(f"  {kb.objects[i]}: {prior[i]:.3f}")

config = SimulatorConfig(target_mode="popularity", noise_epsilon=0.0, seed=0)
rng = np.random.default_rng(config.seed)
draws = [sample_target(kb, config, rng) for _ in range(2000)]
print(f"\nmost sampled target over 2000 draws: {kb.objects[np.bincount(draws).argmax()]}")

rng = np.random.default_rng(1)
flips = sum(
    noisy_answer(kb, 13, 0, 0.2, rng) is not answer(kb, 13, 0) for _ in range(10_000)
)
print(f"with epsilon=0.2 the answer flipped {flips / 10_000:.3f} of the time")
