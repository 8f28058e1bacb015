#pragma once

// Sources of the Python helper tools, embedded so the binaries stay
// relocatable. Materialized to the work directory on first use. Both tools
// take <request.json> <response.json> argument pairs and report problems as
// {"error": str, "kind": str} payloads instead of crashing.

namespace patentkg {

inline constexpr char parse_tool_source[] = R"PY(
import json
import sys


def build(request):
    try:
        import spacy
        from spacy.lang.char_classes import (ALPHA, ALPHA_LOWER, ALPHA_UPPER,
                                             CONCAT_QUOTES, LIST_ELLIPSES,
                                             LIST_ICONS)
        from spacy.util import compile_infix_regex
        nlp = spacy.load(request.get("model", "en_core_web_sm"))
    except Exception as exc:
        return {"error": str(exc), "kind": "unavailable"}

    # Keep letter-flanked hyphens inside one token ("mother-in-law");
    # digit-flanked hyphens still split. Everything else is the stock rule
    # set.
    infixes = (
        LIST_ELLIPSES
        + LIST_ICONS
        + [
            r"(?<=[0-9])[+\-\*^](?=[0-9-])",
            r"(?<=[{al}{q}])\.(?=[{au}{q}])".format(
                al=ALPHA_LOWER, au=ALPHA_UPPER, q=CONCAT_QUOTES),
            r"(?<=[{a}]),(?=[{a}])".format(a=ALPHA),
            r"(?<=[{a}0-9])[:<>=/](?=[{a}])".format(a=ALPHA),
        ]
    )
    nlp.tokenizer.infix_finditer = compile_infix_regex(infixes).finditer

    sentences = []
    for sentence in request["sentences"]:
        doc = nlp(sentence)
        sentences.append({
            "sentence": sentence,
            "tokens": [{"text": t.text, "pos": t.pos_, "dep": t.dep_,
                        "head_index": t.head.i} for t in doc],
            "noun_chunks": [[c.start, c.end] for c in doc.noun_chunks],
        })
    return {"sentences": sentences}


def main():
    with open(sys.argv[1]) as f:
        request = json.load(f)
    try:
        response = build(request)
    except Exception as exc:
        response = {"error": str(exc), "kind": "error"}
    with open(sys.argv[2], "w") as f:
        json.dump(response, f)


if __name__ == "__main__":
    main()
)PY";

inline constexpr char attention_tool_source[] = R"PY(
import json
import os
import sys


def build(request):
    try:
        import torch
        from transformers import AutoModel, AutoTokenizer
    except Exception as exc:
        return {"error": str(exc), "kind": "unavailable"}

    cache = os.environ.get("PATENT_KG_CACHE")
    kwargs = {"cache_dir": cache} if cache else {}
    try:
        tokenizer = AutoTokenizer.from_pretrained(request["model"], **kwargs)
        model = AutoModel.from_pretrained(request["model"],
                                          output_attentions=True, **kwargs)
    except Exception as exc:
        return {"error": str(exc), "kind": "unavailable"}
    model.eval()

    enc = tokenizer(request["tokens"], is_split_into_words=True,
                    return_tensors="pt")
    total = int(enc["input_ids"].shape[1])
    if total > request["max_tokens"]:
        return {"error": "sentence needs %d encoder tokens (limit %d)"
                         % (total, request["max_tokens"]),
                "kind": "too_long"}

    layer = request["layer"]
    if not 1 <= layer <= model.config.num_hidden_layers:
        return {"error": "layer %d outside 1..%d"
                         % (layer, model.config.num_hidden_layers),
                "kind": "config"}

    with torch.no_grad():
        attention = model(**enc).attentions[layer - 1][0].mean(dim=0)

    # Drop special markers without renormalizing; record which contiguous
    # run of encoder pieces belongs to each input token.
    word_ids = enc.word_ids(0)
    keep = [i for i, w in enumerate(word_ids) if w is not None]
    matrix = attention[keep][:, keep]

    spans, at = [], 0
    for t in range(len(request["tokens"])):
        count = sum(1 for i in keep if word_ids[i] == t)
        if count == 0:
            return {"error": "token %r produced no encoder pieces"
                             % request["tokens"][t],
                    "kind": "data"}
        spans.append([at, at + count])
        at += count

    pieces = tokenizer.convert_ids_to_tokens(enc["input_ids"][0])
    return {"subwords": [pieces[i] for i in keep],
            "matrix": matrix.tolist(),
            "token_to_subwords": spans}


def main():
    with open(sys.argv[1]) as f:
        request = json.load(f)
    try:
        response = build(request)
    except Exception as exc:
        response = {"error": str(exc), "kind": "error"}
    with open(sys.argv[2], "w") as f:
        json.dump(response, f)


if __name__ == "__main__":
    main()
)PY";

}  // namespace patentkg
