"""Reference implementations of the text-generation metrics.

Independent of the Rust code: used only to produce frozen expected values for
the test suite. All five metrics operate on lowercase tokens split on
non-alphanumeric characters; only the stem-match stage of the simplified
METEOR applies the stemmer from porter_ref.
"""

import math
from collections import Counter

import porter_ref


def tokenize(text):
    tokens = []
    current = []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def ngrams(tokens, n):
    if len(tokens) < n:
        return []
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def bleu(candidate, reference):
    cand = tokenize(candidate)
    ref = tokenize(reference)
    c = len(cand)
    r = len(ref)
    if c == 0:
        return 0.0
    matches = []
    totals = []
    for n in range(1, 5):
        cand_counts = Counter(ngrams(cand, n))
        ref_counts = Counter(ngrams(ref, n))
        m = sum(min(count, ref_counts[g]) for g, count in cand_counts.items())
        t = sum(cand_counts.values())
        matches.append(m)
        totals.append(t)
    if totals[0] == 0 or matches[0] == 0:
        return 0.0
    smooth = any(m == 0 or t == 0 for m, t in zip(matches, totals))
    log_sum = 0.0
    for n in range(4):
        if n == 0:
            p = matches[0] / totals[0]
        elif smooth:
            p = (matches[n] + 1.0) / (totals[n] + 1.0)
        else:
            p = matches[n] / totals[n]
        log_sum += 0.25 * math.log(p)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum)


def _f1(overlap, cand_total, ref_total):
    if cand_total == 0 or ref_total == 0:
        return 0.0
    p = overlap / cand_total
    rec = overlap / ref_total
    if p + rec == 0.0:
        return 0.0
    return 2.0 * p * rec / (p + rec)


def rouge_n(candidate, reference, n):
    cand_counts = Counter(ngrams(tokenize(candidate), n))
    ref_counts = Counter(ngrams(tokenize(reference), n))
    overlap = sum(min(count, ref_counts[g]) for g, count in cand_counts.items())
    return _f1(overlap, sum(cand_counts.values()), sum(ref_counts.values()))


def _lcs_len(a, b):
    prev = [0] * (len(b) + 1)
    for x in a:
        row = [0]
        for j, y in enumerate(b):
            if x == y:
                row.append(prev[j] + 1)
            else:
                row.append(max(prev[j + 1], row[j]))
        prev = row
    return prev[len(b)]


def rouge_l(candidate, reference):
    cand = tokenize(candidate)
    ref = tokenize(reference)
    return _f1(_lcs_len(cand, ref), len(cand), len(ref))


def meteor(candidate, reference):
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    ref_used = [False] * len(ref)
    cand_to_ref = {}
    # Stage 1: exact matches, candidate order, first free reference slot.
    for i, tok in enumerate(cand):
        for j, rtok in enumerate(ref):
            if not ref_used[j] and rtok == tok:
                ref_used[j] = True
                cand_to_ref[i] = j
                break
    # Stage 2: stem matches over what remains.
    cand_stems = [porter_ref.stem(t) for t in cand]
    ref_stems = [porter_ref.stem(t) for t in ref]
    for i in range(len(cand)):
        if i in cand_to_ref:
            continue
        for j in range(len(ref)):
            if not ref_used[j] and ref_stems[j] == cand_stems[i]:
                ref_used[j] = True
                cand_to_ref[i] = j
                break
    m = len(cand_to_ref)
    if m == 0:
        return 0.0
    precision = m / len(cand)
    recall = m / len(ref)
    f_mean = 10.0 * precision * recall / (recall + 9.0 * precision)
    pairs = sorted(cand_to_ref.items())
    chunks = 0
    prev = None
    for i, j in pairs:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    penalty = 0.5 * (chunks / m) ** 3
    return f_mean * (1.0 - penalty)


def overall(b, r1, r2, rl, met):
    return (b + r1 + r2 + rl + met) / 5.0


def score_pair(candidate, reference):
    b = bleu(candidate, reference)
    r1 = rouge_n(candidate, reference, 1)
    r2 = rouge_n(candidate, reference, 2)
    rl = rouge_l(candidate, reference)
    met = meteor(candidate, reference)
    return {
        "bleu": b,
        "rouge1": r1,
        "rouge2": r2,
        "rouge_l": rl,
        "meteor": met,
        "overall": overall(b, r1, r2, rl, met),
    }


def self_check():
    eps = 1e-12
    text = "lithium stabilizes mood in patients with bipolar disorder"
    s = score_pair(text, text)
    assert abs(s["bleu"] - 1.0) < eps, s
    assert abs(s["rouge1"] - 1.0) < eps, s
    assert abs(s["rouge2"] - 1.0) < eps, s
    assert abs(s["rouge_l"] - 1.0) < eps, s
    # Identical m-token texts align in a single chunk: 1 - 0.5 / m^3.
    m = len(tokenize(text))
    assert abs(s["meteor"] - (1.0 - 0.5 / m**3)) < eps, s
    assert abs(meteor("hello world", "hello world") - 0.9375) < eps
    assert abs(rouge_n("a b c", "a x c", 1) - 2.0 / 3.0) < eps
    assert abs(rouge_l("a b c", "a x c") - 2.0 / 3.0) < eps
    assert bleu("x y z", "a b c") == 0.0
    assert meteor("x y z", "a b c") == 0.0
    assert bleu("", "a b c") == 0.0
    # Order insensitivity of ROUGE-1 vs sensitivity of ROUGE-L.
    assert abs(rouge_n("c b a", "a b c", 1) - 1.0) < eps
    assert rouge_l("c b a", "a b c") < 1.0
    print("metrics_ref: self-check passed")


if __name__ == "__main__":
    self_check()
