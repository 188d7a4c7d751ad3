"""Answer counts, smoothing, and Bayesian belief updates.

The knowledge base stores raw yes/no/unknown answer counts per
(object, question) pair.  Smoothing turns them into the R/W/U answer
probabilities, and a game is nothing but repeated elementwise products
of the belief with one of those columns.
"""

import numpy as np

from q20 import Answer, KnowledgeBase, derive_answer_model, update_belief

# A famous pair: almost everyone answers "yes" when the hidden person is
# the American president and the question asks exactly that.
counts = np.array(
    [
        # yes   no  unknown      question 0            question 1
        [[9500, 50, 450], [3000, 5000, 2000]],  # Donald Trump
        [[30, 9000, 970], [8000, 1000, 1000]],  # Elon Musk
    ]
)
kb = KnowledgeBase(
    objects=["Donald Trump", "Elon Musk"],
    questions=["Is your role the American president?", "Did your role found a company?"],
    counts=counts,
    popularity=np.array([800, 600]),
)

print("smoothed answer model (delta=1, lambda=3):")
for i, name in enumerate(kb.objects):
    print(f"  {name:13s} R={kb.R[i, 0]:.4f} W={kb.W[i, 0]:.4f} U={kb.U[i, 0]:.4f}")
print(f"  rows sum to one: max deviation {abs(kb.R + kb.W + kb.U - 1).max():.1e}")

r, w, u = derive_answer_model(counts, delta=1.0, lam=3.0)
assert np.array_equal(r, kb.R), "the stored model is always rederived from counts"

print("\na two-question game against a uniform prior:")
belief = np.full(2, 0.5)
for question, reply in [(0, Answer.YES), (1, Answer.NO)]:
    belief = update_belief(belief, question, reply, kb)
    print(f"  Q: {kb.questions[question]!r} A: {reply.value:8s} -> belief {np.round(belief, 4)}")

print(f"\nfinal guess: {kb.objects[int(np.argmax(belief))]}")
