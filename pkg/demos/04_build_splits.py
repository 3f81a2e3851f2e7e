"""Build the three deterministic split protocols.

Every selection flows through a seeded PCG64 generator, so a manifest
is fully reproducible from (protocol, parameters, seed).  Manifests
then filter later compile/evaluate runs.
"""

import sys
from pathlib import Path

from dialokit import (
    SplitManifest,
    k_per_intent,
    leave_one_domain_out,
    percent_subsample,
)

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from helpers import tod_dialogue

# --- percentage subsample ----------------------------------------------------
ids = [f"dlg-{i:04d}" for i in range(1000)]
for pct in (1, 5, 10, 20):
    picked = percent_subsample(ids, pct, seed=13)
    print(f"{pct:>3}% of 1000 dialogues -> {len(picked)} ids, first: {picked[:3]}")

# --- k examples per intent ---------------------------------------------------
examples = [(f"utt-{i}-{j}", f"intent-{i % 6}") for i in range(6) for j in range(40)]
for k in (10, 30):
    picked = k_per_intent(examples, k, seed=13)
    print(f"k={k:>2} over 6 intents -> {len(picked)} examples")

# --- leave one domain out ----------------------------------------------------
corpus = []
for domain in ("train", "taxi", "restaurant", "hotel", "attraction"):
    corpus.extend(
        tod_dialogue(i, dataset=f"demo-{domain}", domain=domain) for i in range(80)
    )
train, validation, test = leave_one_domain_out(corpus, "taxi", seed=13)
print(f"\nhold out taxi: train={len(train)} validation={len(validation)} test={len(test)}")

manifest = SplitManifest(
    protocol="domain_transfer",
    seed=13,
    parameters={"target_domain": "taxi", "validation_size": 200},
    partitions={"source_train": train, "source_validation": validation,
                "target_test": test},
)
print("manifest partitions:", {k: len(v) for k, v in manifest.partitions.items()})

# determinism: running the same protocol again reproduces the selection
again = leave_one_domain_out(corpus, "taxi", seed=13)
assert (train, validation, test) == again
print("same seed, same split: ok")
