"""Regenerates the CLI test fixtures in this directory."""
import csv
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))

DOCS = [
    ("a", "We study token labels in scientific prose and rewrite segments accordingly .", [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 0]),
    ("b", "Generated paragraphs often summarize prior work compactly .", [2, 2, 2, 3, 3, 3, 3, 0]),
    ("c", "Results confirm the approach ; summaries condense findings .", [0, 0, 0, 0, 0, 3, 3, 3, 0]),
]

GRID = {
    256: ["97.32", "97.00", "79.20", "95.88", "82.74", "96.99", "96.22", "89.68", "-", "-", "98.12", "98.17"],
    512: ["98.33", "97.71", "78.49", "98.81", "83.31", "98.55", "98.72", "90.66", "-", "98.83", "98.82", "99.07"],
    1024: ["86.38", "85.82", "55.65", "88.13", "63.14", "88.12", "80.97", "71.24", "96.29", "-", "98.84", "99.21"],
    2048: ["67.87", "62.95", "28.99", "65.30", "45.47", "66.21", "56.40", "50.25", "92.87", "92.87", "-", "-"],
}
COLUMNS = [("xsmall", 0), ("xsmall", 6), ("xsmall", 12), ("small", 0), ("small", 6), ("base", 0), ("base", 6),
           ("base", 12), ("large", 0), ("large", 6), ("large", 12), ("large", 18)]


def dump(path, obj, **kw):
    with open(os.path.join(HERE, path), "w") as f:
        json.dump(obj, f, **kw)
        f.write("\n")


def main():
    rule = {}
    with open(os.path.join(HERE, "corpus.jsonl"), "w") as f:
        for doc_id, text, labels in DOCS:
            tokens = text.split()
            assert len(tokens) == len(labels), doc_id
            for w, l in zip(tokens, labels):
                assert rule.setdefault(w, l) == l, w
            f.write(json.dumps({"id": doc_id, "text": text, "tokens": tokens, "labels": labels}, separators=(",", ":")) + "\n")
    # Words absent from the rule are labelled human.
    dump("rules.json", {w: l for w, l in sorted(rule.items()) if l != 0}, indent=1)

    with open(os.path.join(HERE, "corpus.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "text", "tokens", "token_label_ids"])
        for doc_id, text, labels in DOCS:
            w.writerow([doc_id, text, repr(text.split()), repr(labels)])

    dump("hand_gold.jsonl", {"id": "h", "text": "w0 w1 w2 w3", "tokens": ["w0", "w1", "w2", "w3"], "labels": [0, 0, 1, 1]}, separators=(",", ":"))
    dump("hand_pred.jsonl", {"doc_id": "h", "labels": [0, 1, 1, 1]}, separators=(",", ":"))

    for sub in ("grid", "xsmall_column"):
        os.makedirs(os.path.join(HERE, sub), exist_ok=True)
    for length, row in GRID.items():
        for (preset, frozen), value in zip(COLUMNS, row):
            rec = {"preset": preset, "frozen_layers": frozen, "input_length": length}
            if value == "-":
                rec["status"] = "dash"
            else:
                rec["test_f1"] = float(value)
                rec["status"] = "ok"
            name = f"{preset}-f{frozen}-L{length}.json"
            dump(os.path.join("grid", name), rec)
            if (preset, frozen) == ("xsmall", 0):
                dump(os.path.join("xsmall_column", name), rec)


if __name__ == "__main__":
    main()
