#!/usr/bin/env python3
"""The two evaluation schemes that need no model: containment-based retrieval
precision*/recall* and the soft answer accuracy min(count/3, 1).

The star metrics treat any retrieved knowledge containing any gold answer as
relevant; recall* is binary per question.
"""
from snippetqa.metrics import QAInstance, precision_star, recall_star, vqa_score

answers = ["savannah", "grassland"]
retrieved = [
    "zebras roam the open savannah grasslands with grazing herds",   # savannah
    "city streets are full of traffic and neon",                      # miss
    "the savannah supports grassland animals alongside acacia trees", # both answers -> still one hit
    "deserts receive very little rainfall through the year",          # miss
    "temperate grassland regions are called prairies",                # grassland
]
print(f"precision* = {precision_star(answers, retrieved):.2f}  (3 of 5 hits contain an answer)")
print(f"recall*    = {recall_star(answers, retrieved):.0f}")

# recall* at growing K over nested lists never decreases:
for k in range(1, 6):
    print(f"  R*@{k} = {recall_star(answers, retrieved[:k]):.0f}")

# Soft accuracy: ten annotations per question (five humans counted twice);
# three agreeing annotations earn full credit.
instance = QAInstance(
    qid="q0",
    question="What is the natural habitat of these animals?",
    image_id="img0",
    caption="",
    answers=(("savannah", 6), ("grassland", 4)),
)
for prediction in ("savannah", "grassland", "Grassland!", "desert"):
    print(f"vqa_score({prediction!r}) = {vqa_score(prediction, instance):.3f}")

# Two of ten annotations earn 2/3:
sparse = QAInstance("q1", "?", "", "", (("zebra", 2), ("horse", 8)))
print(f"2-of-10 case: {vqa_score('zebra', sparse):.3f}")
