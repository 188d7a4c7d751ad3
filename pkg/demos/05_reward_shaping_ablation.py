"""Compare the three reward regimes on one small task.

direct:        only the terminal +/-30 carries signal
rewardnet:     a sigmoid MLP fills in intermediate rewards
object_aware:  the reward MLP also sees the revealed target object

All runs share the same evaluation targets, so curves are paired.
"""

from q20 import SimulatorConfig, TrainingConfig
from q20.evaluation import run_ablation
from q20.kb import generate_synthetic_kb

kb = generate_synthetic_kb(16, 20, 4, count_scale=1000, answer_ambiguity=0.05, seed=3)
train_sim = SimulatorConfig(target_mode="uniform", noise_epsilon=0.05, seed=10)
eval_sim = SimulatorConfig(target_mode="uniform", noise_epsilon=0.0, seed=10)
base = TrainingConfig(
    episodes=300,
    hidden_size=48,
    batch_size=32,
    d1_capacity=6000,
    d2_capacity=6000,
    d1_threshold=400,
    d2_threshold=400,
    eval_interval=750,
    eval_episodes=150,
    horizon=10,
    eval_seed=99,
)

report = run_ablation(
    kb,
    train_sim,
    base,
    modes=("direct", "rewardnet", "object_aware"),
    seeds=(0, 1),
    final_eval_episodes=300,
    eval_sim_config=eval_sim,
    progress=lambda run: print(
        f"  {run.mode:13s} seed {run.seed}: final {run.final.win_rate:.3f}"
    ),
)

print("\nmean noise-free final win rate per reward mode:")
for mode in ("direct", "rewardnet", "object_aware"):
    runs = report.runs_for(mode)
    curve = " ".join(f"{row.win_rate:.2f}" for row in runs[0].metrics)
    print(f"  {mode:13s}: {report.mean_final(mode):.3f}   (seed-0 curve: {curve})")
