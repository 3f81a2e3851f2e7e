"""Compile one annotated dialogue into prompted records for every task.

The same dialogue can feed several tasks at once; each task derives its
own (source, target) pairs and wraps them in its template.  Compilation
is deterministic: same corpus, templates, neg_k and seed give byte
identical output, which is what makes training corpora reproducible.
"""

from dialokit import (
    BeliefState,
    Dialogue,
    DialogueAct,
    Speaker,
    TaskKind,
    Turn,
    compile_corpus,
    linearize_belief_state,
    parse_belief_state,
)

state1 = BeliefState([("hotel", "stars", "4")])
state2 = state1.updated([("hotel", "area", "north")])

dialogue = Dialogue(
    id="demo-hotel-1",
    dataset="demo",
    domains=frozenset({"hotel"}),
    turns=(
        Turn(0, Speaker.SPEAKER1, "i need a four star hotel", belief=state1),
        Turn(1, Speaker.SPEAKER2, "any particular area?",
             acts=(DialogueAct("request", "hotel", "area"),)),
        Turn(2, Speaker.SPEAKER1, "somewhere in the north", belief=state2),
        Turn(3, Speaker.SPEAKER2, "[hotel_name] is a four star hotel in the north.",
             acts=(DialogueAct("inform", "hotel", "name"),), db_result=3),
    ),
    summary="a traveller books a four star hotel in the north",
)

records, stats = compile_corpus([dialogue], list(TaskKind), neg_k=1, seed=0)
print("records per task:", {t.value: n for t, n in stats.per_task.items()})

for record in records:
    print(f"\n[{record.task.value}] {record.id}")
    print("  source:", record.source_text)
    print("  target:", record.target_text)

# The belief-state rendering used in DST targets has a lenient inverse,
# which is how generated text gets scored later.
rendered = linearize_belief_state(state2)
assert parse_belief_state(rendered) == state2
print("\nround trip ok:", rendered)
