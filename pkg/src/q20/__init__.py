"""Belief-state 20 Questions: a policy-gradient questioner and its tooling.

The package is organized as a small numpy library:

  kb          objects, questions, answer counts, smoothing, file I/O
  engine      belief transitions, guessing, episode rollout, transcripts
  simulator   the automated answerer with optional answer noise
  nn          one-hidden-layer MLPs, manual gradients, ADAM
  agents      returns, reward regimes, REINFORCE training, baselines
  evaluation  win rates, budget curves, noise sweeps, ablations
  service     live-play HTTP/JSON game server
  cli         gen-kb / train / eval / play / serve entry points
"""

from .engine import (
    Answer,
    EpisodeRecord,
    EpisodeStep,
    run_episode,
    update_belief,
    make_guess,
    terminal_reward,
)
from .kb import (
    KnowledgeBase,
    derive_answer_model,
    generate_synthetic_kb,
    initial_belief,
    load_kb,
    save_kb,
)
from .simulator import SimulatorConfig, answer, noisy_answer, sample_target
from .nn import MlpParams, AdamState, init_params, init_adam, adam_step
from .agents import (
    InfoGainAgent,
    PolicyAgent,
    ReplayMemory,
    TrainingConfig,
    TrainingResult,
    compute_returns,
    info_gain_select,
    load_checkpoint,
    run_training,
    save_checkpoint,
    select_action,
)
from .evaluation import (
    WinRateResult,
    evaluate_win_rate,
    noise_sweep,
    run_ablation,
    win_rate_vs_budget,
    wilson_interval,
)
from .service import GameService, ServiceError, make_server

__version__ = "0.1.0"
