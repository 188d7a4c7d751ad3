"""Answer noise hurts everyone; sampled policies degrade more gracefully.

A trained policy is swept against increasing answer-corruption levels and
compared with the deterministic information-gain baseline on the same
paired episodes.
"""

from q20 import InfoGainAgent, PolicyAgent, SimulatorConfig, TrainingConfig, run_training
from q20.evaluation import noise_sweep
from q20.kb import generate_synthetic_kb

kb = generate_synthetic_kb(16, 20, 4, count_scale=1000, answer_ambiguity=0.05, seed=3)
train_sim = SimulatorConfig(target_mode="uniform", noise_epsilon=0.05, seed=10)
result = run_training(
    kb,
    train_sim,
    TrainingConfig(
        episodes=400,
        hidden_size=64,
        batch_size=32,
        d1_capacity=8000,
        d2_capacity=8000,
        d1_threshold=500,
        d2_threshold=500,
        eval_interval=4000,
        eval_episodes=100,
        reward_mode="rewardnet",
        horizon=10,
        seed=0,
        eval_seed=99,
    ),
)

eval_sim = SimulatorConfig(target_mode="uniform", noise_epsilon=0.0, seed=99)
epsilons = [0.0, 0.05, 0.1, 0.2, 0.4]
agents = {
    "info-gain": InfoGainAgent(kb),
    "RL sampled": PolicyAgent(result.policy, "sample"),
    "RL greedy": PolicyAgent(result.policy, "greedy"),
}

print(f"{'epsilon':>8} " + " ".join(f"{name:>11}" for name in agents))
series = {name: noise_sweep(agent, kb, eval_sim, epsilons, 400, horizon=10) for name, agent in agents.items()}
for i, eps in enumerate(epsilons):
    row = " ".join(f"{series[name][i][1].win_rate:>11.3f}" for name in agents)
    print(f"{eps:>8.2f} {row}")
