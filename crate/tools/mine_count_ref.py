#!/usr/bin/env python3
"""Independent reference count of relations mined from the fixture corpus.

Mirrors the corpus-mining rules end to end: sentence splitting, greedy
longest-match gazetteer recognition over stemmed tokens, trigger-based
relation tagging (ASSOCIATED_WITH default), ordered distinct entity pairs
per sentence, and corpus-wide co-occurrence counting. Reports the number
of distinct mined edge records and how many of them are new triples not
already present in the curated graph, so the integration test can freeze
both numbers.

Usage: python3 tools/mine_count_ref.py [corpus.jsonl graph.jsonl]
"""
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
from porter_ref import stem  # noqa: E402

TRIGGERS = [
    ("prefix", "treat", "TREATS"),
    ("prefix", "help", "TREATS"),
    ("prefix", "symptom", "HAS_SYMPTOM"),
    ("exact", "gene", "ASSOCIATED_GENE"),
    ("prefix", "genet", "ASSOCIATED_GENE"),
    ("prefix", "interact", "INTERACTS_WITH"),
    ("prefix", "contraind", "CONTRAINDICATED_WITH"),
    ("prefix", "associ", "ASSOCIATED_WITH"),
]


def tokenize(text):
    tokens, current = [], []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def split_sentences(text):
    """Terminator (. ! ?) followed by whitespace or end of text ends a
    sentence, except a period closing a dotted abbreviation."""
    sentences, start = [], 0
    chars = list(text)
    for i, ch in enumerate(chars):
        if ch not in ".!?":
            continue
        next_is_space = i + 1 >= len(chars) or chars[i + 1].isspace()
        if not next_is_space:
            continue
        if ch == ".":
            j = i - 1
            abbrev = False
            while j >= 0 and not chars[j].isspace():
                if chars[j] == ".":
                    abbrev = True
                    break
                j -= 1
            if abbrev:
                continue
        piece = text[start : i + 1].strip()
        if piece:
            sentences.append(piece)
        start = i + 1
    piece = text[start:].strip()
    if piece:
        sentences.append(piece)
    return sentences


def build_gazetteer(nodes):
    """alias-key -> entity id; stemmed-token keys, smallest id wins."""
    gaz = {}
    for node in nodes:
        aliases = {a.lower() for a in node.get("aliases", []) if a.strip()}
        aliases.add(node["label"].lower())
        for alias in aliases:
            key = " ".join(stem(t) for t in tokenize(alias))
            if not key:
                continue
            if key not in gaz or node["id"] < gaz[key]:
                gaz[key] = node["id"]
    return gaz


def recognize(sentence, gaz, max_tokens):
    stems = [stem(t) for t in tokenize(sentence)]
    ids, i = [], 0
    while i < len(stems):
        matched = 0
        for length in range(min(max_tokens, len(stems) - i), 0, -1):
            key = " ".join(stems[i : i + length])
            if key in gaz:
                if gaz[key] not in ids:
                    ids.append(gaz[key])
                matched = length
                break
        i += matched if matched else 1
    return ids


def detect_intent(terms):
    for term in terms:
        for mode, pattern, rel in TRIGGERS:
            if (mode == "exact" and term == pattern) or (
                mode == "prefix" and term.startswith(pattern)
            ):
                return rel
    return None


def main():
    corpus_path = sys.argv[1] if len(sys.argv) > 1 else "data/corpus.jsonl"
    graph_path = sys.argv[2] if len(sys.argv) > 2 else "data/graph.jsonl"

    nodes, curated = [], set()
    with open(graph_path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rec = json.loads(line)
            if rec["type"] == "node":
                nodes.append(rec)
            else:
                curated.add((rec["src"], rec["dst"], rec["rel"]))

    gaz = build_gazetteer(nodes)
    max_tokens = max(len(k.split(" ")) for k in gaz)

    mined = {}
    with open(corpus_path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            doc = json.loads(line)
            for sentence in split_sentences(doc["text"]):
                ids = recognize(sentence, gaz, max_tokens)
                if len(ids) < 2:
                    continue
                terms = [stem(t) for t in tokenize(sentence)]
                rel = detect_intent(terms) or "ASSOCIATED_WITH"
                for i in range(len(ids)):
                    for j in range(i + 1, len(ids)):
                        key = (ids[i], ids[j], rel)
                        mined[key] = mined.get(key, 0) + 1

    new = sorted(k for k in mined if k not in curated)
    print(f"curated edges:       {len(curated)}")
    print(f"mined edge records:  {len(mined)}")
    print(f"new triples:         {len(new)}")
    print(f"merged into curated: {len(mined) - len(new)}")
    for src, dst, rel in new:
        print(f"  new: {src} -{rel}-> {dst}")


if __name__ == "__main__":
    main()
