"""The live-play server, driven by a scripted HTTP client.

This is the same loop the web UI runs: create a game, answer each
question, receive the guess, report whether it was right.  Here the
"human" is the simulator answering for a secretly chosen object.
"""

import json
import threading
import urllib.request

from q20 import GameService, TrainingConfig, SimulatorConfig, run_training
from q20.engine import parse_transcripts
from q20.kb import generate_synthetic_kb
from q20.service import make_server
from q20.simulator import answer

kb = generate_synthetic_kb(16, 20, 4, count_scale=1000, answer_ambiguity=0.05, seed=3)
result = run_training(
    kb,
    SimulatorConfig(target_mode="uniform", noise_epsilon=0.05, seed=10),
    TrainingConfig(
        episodes=300,
        hidden_size=64,
        batch_size=32,
        d1_capacity=6000,
        d2_capacity=6000,
        d1_threshold=400,
        d2_threshold=400,
        eval_interval=3000,
        eval_episodes=100,
        horizon=10,
        seed=0,
        eval_seed=99,
    ),
)

log_path = "live_games.log"
service = GameService(kb, result.policy, policy_mode="greedy", horizon=10, transcript_path=log_path)
server = make_server(service, ("127.0.0.1", 0))
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"
print(f"server listening on {base}")


def call(method, path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    request = urllib.request.Request(
        base + path, data=data, method=method,
        headers={"Content-Type": "application/json"} if data else {},
    )
    with urllib.request.urlopen(request, timeout=10) as response:
        return json.loads(response.read().decode())


secret = 13
print(f"(the human is thinking of {kb.objects[secret]})\n")
state = call("POST", "/games", {})
game_id = state["id"]
while "question_index" in state:
    reply = answer(kb, secret, state["question_index"])
    print(f"  {state['question_number']:>2}. {state['question_text']:46s} -> {reply.value}")
    state = call("POST", f"/games/{game_id}/answer", {"answer": reply.value})

correct = state["guess_index"] == secret
print(f"\nserver guesses: {state['guess']}")
summary = call("POST", f"/games/{game_id}/result", {"correct": correct})
print(f"outcome: {'won' if summary['won'] else 'lost'} (reward {summary['reward']:+.0f})")

records = parse_transcripts(open(log_path).read())
print(f"{len(records)} game persisted to {log_path}")
server.shutdown()
server.server_close()
