"""The expected-information-gain baseline bisects the object space.

On a KB whose code questions perfectly identify each object, the
baseline needs exactly ceil(log2 n) questions, and the budget curve
shows it.  Transcripts of a few games are dumped alongside.
"""

from pathlib import Path

from q20 import InfoGainAgent, SimulatorConfig, generate_synthetic_kb, run_episode
from q20.agents import info_gain_select
from q20.evaluation import dump_transcripts, evaluate_win_rate, win_rate_vs_budget
from q20.simulator import answer

kb = generate_synthetic_kb(16, 20, 4, count_scale=1000, answer_ambiguity=0.0, seed=2)
agent = InfoGainAgent(kb)
sim = SimulatorConfig(target_mode="uniform", noise_epsilon=0.0, seed=0)

result = evaluate_win_rate(agent, kb, sim, 16, targets=range(16))
print(f"win rate over all 16 targets: {result}")

print("\nwin rate by question budget (bisection completes at log2(16) = 4):")
for budget, res in win_rate_vs_budget(agent, kb, sim, [0, 1, 2, 3, 4, 6], 16, targets=range(16)):
    bar = "#" * int(res.win_rate * 40)
    print(f"  {budget:2d} questions: {res.win_rate:5.3f} {bar}")

episodes = [
    run_episode(
        lambda s, asked: info_gain_select(kb, s, asked),
        lambda t, q: answer(kb, t, q),
        kb,
        target,
        horizon=6,
    )
    for target in (3, 9)
]
out = Path(__file__).with_name("info_gain_transcripts.txt")
dump_transcripts(episodes, kb, out)
print(f"\ntwo sample transcripts written to {out.name}:")
print(out.read_text())
