"""Regenerates the tiny exported artifacts used by the ONNX scorer tests.

    python make_fixture.py

Writes `base/` (a Base-preset artifact whose head maps each vocabulary entry
to a fixed class) `three_class/model.onnx` (a head with the wrong class count) and
`large/tokenizer.json` (a tokenizer with a different
vocabulary, used to check mismatch detection).
"""

import hashlib
import json
import os

import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper
from tokenizers import Tokenizer, models, pre_tokenizers

HERE = os.path.dirname(os.path.abspath(__file__))
MAX_LEN = 512

SPECIALS = ["[PAD]", "[CLS]", "[SEP]", "[UNK]"]
# piece -> class the head favours
PIECES = {
    "the": 0, "human": 0, "wrote": 0, "this": 0,
    "swap": 1, "##ped": 1, "synonym": 1,
    "gen": 2, "##erated": 2, "model": 2,
    "sum": 3, "##mary": 3, "brief": 3,
    "##s": 0, "##ly": 0,
}


def build_tokenizer(pieces):
    vocab = {tok: i for i, tok in enumerate(SPECIALS + list(pieces))}
    tok = Tokenizer(models.WordPiece(vocab=vocab, unk_token="[UNK]", max_input_chars_per_word=100))
    tok.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    return tok, vocab


def sha256(path):
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def build_model(vocab, path, classes=4):
    logits = np.zeros((len(vocab), classes), dtype=np.float32)
    for tok, idx in vocab.items():
        cls = PIECES.get(tok, 0) % classes
        logits[idx, cls] = 4.0
    bias = np.zeros(classes, dtype=np.float32)
    bias[0] = 0.05

    ids = helper.make_tensor_value_info("input_ids", TensorProto.INT64, [1, MAX_LEN])
    mask = helper.make_tensor_value_info("attention_mask", TensorProto.INT64, [1, MAX_LEN])
    out = helper.make_tensor_value_info("logits", TensorProto.FLOAT, [1, MAX_LEN, classes])
    nodes = [
        helper.make_node("Gather", ["head", "input_ids"], ["gathered"], axis=0),
        helper.make_node("Add", ["gathered", "bias"], ["biased"]),
        helper.make_node("Unsqueeze", ["attention_mask", "axes"], ["mask3"]),
        helper.make_node("Cast", ["mask3"], ["maskf"], to=TensorProto.FLOAT),
        helper.make_node("Mul", ["biased", "maskf"], ["logits"]),
    ]
    inits = [
        numpy_helper.from_array(logits, "head"),
        numpy_helper.from_array(bias, "bias"),
        numpy_helper.from_array(np.array([2], dtype=np.int64), "axes"),
    ]
    graph = helper.make_graph(nodes, "linear_head", [ids, mask], [out], initializer=inits)
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 13)])
    model.ir_version = 8
    onnx.checker.check_model(model)
    onnx.save(model, path)


def main():
    base = os.path.join(HERE, "base")
    os.makedirs(base, exist_ok=True)
    tok, vocab = build_tokenizer(PIECES)
    tok_path = os.path.join(base, "tokenizer.json")
    tok.save(tok_path)
    build_model(vocab, os.path.join(base, "model.onnx"))
    meta = {
        "preset": "Base",
        "layers": 12,
        "hidden_size": 768,
        "max_input_length": MAX_LEN,
        "num_classes": 4,
        "label_map": {"0": "human", "1": "synonym-replaced", "2": "machine-generated", "3": "summarized"},
        "training_config_hash": "fixture-linear-head",
        "tokenizer_sha256": sha256(tok_path),
        "vocab_size": len(vocab),
        "special_tokens": {"prefix": [1], "suffix": [2], "pad": 0, "unk": 3},
        "inputs": ["input_ids", "attention_mask"],
        "output": "logits",
    }
    with open(os.path.join(base, "metadata.json"), "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")

    three = os.path.join(HERE, "three_class")
    os.makedirs(three, exist_ok=True)
    build_model(vocab, os.path.join(three, "model.onnx"), classes=3)

    large = os.path.join(HERE, "large")
    os.makedirs(large, exist_ok=True)
    other, _ = build_tokenizer(list(PIECES) + ["extra", "##piece"])
    other.save(os.path.join(large, "tokenizer.json"))


if __name__ == "__main__":
    main()
