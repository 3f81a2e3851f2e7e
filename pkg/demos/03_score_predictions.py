"""Score a bundle of model outputs with the full metric suite.

Shows the response metrics (corpus BLEU, inform, success, combined
score), the state-tracking metric (joint goal accuracy), intent
accuracy, and the summarization ROUGE variants, all on the 0-100 scale.
"""

from dialokit import (
    BeliefState,
    EntityDb,
    PredictionSet,
    TaskKind,
    bleu_corpus,
    combined_score,
    inform_success,
    intent_accuracy,
    joint_goal_accuracy,
    rouge_scores,
    tokenize,
)
from dialokit.metrics import evaluate_e2e
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from helpers import tod_dialogue  # the shared toy corpus builders

# --- response generation ---------------------------------------------------
pairs = [
    (tokenize("there are two cheap italian places in the centre"),
     tokenize("i found two cheap italian restaurants in the centre")),
    (tokenize("[restaurant_name] serves italian food"),
     tokenize("[restaurant_name] serves italian food")),
]
print("corpus BLEU:", round(bleu_corpus(pairs), 2))

# --- end-to-end: inform, success, combined ----------------------------------
corpus = [tod_dialogue(i) for i in range(4)]
records = []
for d in corpus:
    records.append((d.id, 3, "[restaurant_name] matches what you asked for"))
    records.append((d.id, 5, "their phone is [restaurant_phone]"))
preds = PredictionSet.from_records(TaskKind.NLG, records)
db = EntityDb.from_entities(
    [("restaurant", {"name": "pizzeria roma", "food": "italian", "area": "centre"})]
)
inform, success = inform_success(corpus, preds, db)
report = evaluate_e2e(corpus, preds, db)
print("inform:", inform, "success:", success)
print("combined:", round(combined_score(report.values["bleu"], inform, success), 2))

# --- dialogue state tracking -------------------------------------------------
gold = {
    ("d", 0): BeliefState([("restaurant", "food", "thai")]),
    ("d", 2): BeliefState([("restaurant", "food", "thai"), ("restaurant", "area", "north")]),
}
dst_preds = PredictionSet.from_records(
    TaskKind.DST,
    [
        ("d", 0, "[restaurant] food thai"),
        ("d", 2, "[restaurant] area north , food thai"),  # order does not matter
    ],
)
print("JGA:", joint_goal_accuracy(gold, dst_preds))

# --- intent classification ---------------------------------------------------
print("intent accuracy:",
      intent_accuracy(["Book_Flight", "get_weather"], ["book_flight", "play_music"]))

# --- summarization -----------------------------------------------------------
r1, r2, rl = rouge_scores(
    tokenize("the user books a cheap italian restaurant"),
    tokenize("the user books a cheap italian restaurant in the centre"),
)
print("ROUGE-1/2/L:", round(r1, 1), round(r2, 1), round(rl, 1))
