"""Hand-built end-to-end fixture.

Five question groups with mutually disjoint vocabularies: each query matches
every snippet of its own group (via a shared marker term) and no snippet of
any other group. Top-4 membership is therefore exact regardless of score
order inside a group, which makes the chain's precision*/recall* values
hand-computable:

  q_animal  : 4/4 snippets contain the answer          -> P*=1.0,  R*=1
  q_tool    : 2/4 contain one (one snippet has BOTH
              gold answers; it still counts once)      -> P*=0.5,  R*=1
  q_vehicle : 1/4 contain                              -> P*=0.25, R*=1
  q_fruit   : 2/4 contain                              -> P*=0.5,  R*=1
  q_color   : query matches nothing; the four zero-
              score ids 0..3 contain no answer         -> P*=0.0,  R*=0

  mean P* = (1.0 + 0.5 + 0.25 + 0.5 + 0.0) / 5 = 0.45
  mean R* = 4 / 5 = 0.8
"""
import json

GROUP_SNIPPETS = {
    "animal": [
        "kitten animal lounges velvet cushions beside warm window light dozing peacefully",
        "kitten animal stretches whiskers grooming fur climbing shelves chasing yarn quietly",
        "kitten animal pounces feathers playful paws batting ribbons tumbling softly giggling",
        "kitten animal naps sunbeam blankets curled purring gently heartbeat slowing comfortably",
    ],
    "tool": [
        "wrench spanner toolbox gripping tightens bolts metal torque handle workshop drawer",
        "wrench toolbox loosens fasteners ratchets sockets hexagonal torque calibrated mechanic garage",
        "toolbox gripping organizer compartments bolts screwdrivers rack storage neatly labeled hooks",
        "toolbox hammers pliers chisels sandpaper clamps vise workbench sawdust aprons goggles",
    ],
    "vehicle": [
        "firetruck couples hoses hydrant valves pressurized firefighting engines ladders sirens red",
        "hydrant curbside valves painted pressurized municipal water emergency supply lines",
        "hydrant inspection caps threaded outlets flow rated gallons stamped castings iron",
        "hydrant winter insulation frostproof barrels buried mains shutoff exercised annually crews",
    ],
    "fruit": [
        "apple orchard fruit ripens sweetly autumn harvest baskets cider pressing festivals",
        "apple orchard grafting rootstocks varieties heirloom tart crisp flesh pomace jugs",
        "orchard rows blossom pollinators fruit growers prune branches springtime mornings gently",
        "orchard ladders pickers bushels weighing stations crates stacked coolstore shipping manifests",
    ],
    "distractor": [
        "granite boulders weathered lichen crevices alpine ridgelines scrambling cairns marking routes",
        "granite quarry blocks polished slabs countertops sealed edges beveled installers measuring",
        "granite monument carvings inscriptions dedication plaques memorial gardens visitors quiet reflection",
        "granite cliffs climbers ropes anchors belaying chalk grips ascending weathered faces",
    ],
}

QUESTIONS = {
    "q_animal": ("what animal lounges here?", "kitten photo", [("kitten", 10)]),
    "q_tool": ("which gripping tool tightens bolts?", "metal toolbox", [("wrench", 6), ("spanner", 4)]),
    "q_vehicle": ("what vehicle couples hydrant hoses?", "hydrant curbside", [("firetruck", 10)]),
    "q_fruit": ("which orchard fruit ripens sweetly?", "orchard harvest", [("apple", 10)]),
    "q_color": ("what color paints evening skies?", "skyline dusk", [("blue", 10)]),
}

GROUP_OF_QUESTION = {
    "q_animal": "animal",
    "q_tool": "tool",
    "q_vehicle": "vehicle",
    "q_fruit": "fruit",
    "q_color": "distractor",
}

EXPECTED_PER_QUESTION = {
    "q_animal": (1.0, 1.0),
    "q_tool": (0.5, 1.0),
    "q_vehicle": (0.25, 1.0),
    "q_fruit": (0.5, 1.0),
    "q_color": (0.0, 0.0),
}
EXPECTED_MEAN_PRECISION = (1.0 + 0.5 + 0.25 + 0.5 + 0.0) / 5
EXPECTED_MEAN_RECALL = 4 / 5
CHAIN_K = 4
CORPUS_SIZE = 20


def write_raw_search_results(path):
    """Raw search-result JSONL: one record per question group, plus a
    duplicate snippet, a too-short snippet, and an item with no snippet."""
    lines = []
    for qid, (question, _caption, answers) in QUESTIONS.items():
        group = GROUP_OF_QUESTION[qid]
        items = [
            {"title": f"{group} page {i}", "link": f"http://example.test/{group}/{i}", "snippet": text}
            for i, text in enumerate(GROUP_SNIPPETS[group])
        ]
        if group == "animal":
            # whitespace-variant duplicate, a too-short snippet, a missing snippet
            items.append({"title": "dup", "link": "http://example.test/dup", "snippet": GROUP_SNIPPETS["animal"][0].replace(" ", "  ")})
            items.append({"title": "short", "link": "http://example.test/short", "snippet": "far too short"})
            items.append({"title": "broken", "link": "http://example.test/broken"})
        lines.append({"question": question, "answer": answers[0][0], "items": items})
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(json.dumps(line) + "\n")


def write_instances(path):
    with open(path, "w", encoding="utf-8") as fh:
        for qid, (question, caption, answers) in QUESTIONS.items():
            rec = {
                "qid": qid,
                "question": question,
                "image": f"img_{qid}",
                "caption": caption,
                "answers": [{"text": t, "count": c} for t, c in answers],
            }
            fh.write(json.dumps(rec) + "\n")


def write_queries(path):
    with open(path, "w", encoding="utf-8") as fh:
        for qid, (question, caption, _answers) in QUESTIONS.items():
            fh.write(json.dumps({"qid": qid, "question": question, "caption": caption}) + "\n")


def expected_corpus_texts():
    out = []
    for group in ("animal", "tool", "vehicle", "fruit", "distractor"):
        out.extend(GROUP_SNIPPETS[group])
    return out


def write_score_matrices(path, hits_by_qid, answer_by_qid):
    """Score-matrix JSONL for the read command: the first hit of each question
    decodes to its gold answer, every later hit to the sentinel."""
    with open(path, "w", encoding="utf-8") as fh:
        for qid, result in hits_by_qid.items():
            answer_tokens = answer_by_qid[qid].split()
            for rank, (kid, _score) in enumerate(result.hits):
                if rank == 0:
                    tokens = ["unanswerable"] + answer_tokens + ["filler"]
                    n = len(tokens)
                    start = [-5.0] + [8.0] + [0.0] * (n - 2)
                    end = [-5.0] + [0.0] * (len(answer_tokens) - 1) + [8.0] + [0.0]
                else:
                    tokens = ["unanswerable", "noise", "words"]
                    start = [9.0, 0.0, 0.0]
                    end = [9.0, 0.0, 0.0]
                rec = {"qid": qid, "kid": kid, "tokens": tokens, "start": start, "end": end}
                fh.write(json.dumps(rec) + "\n")
