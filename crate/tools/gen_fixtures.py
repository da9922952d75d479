"""Generates frozen test fixtures from the reference implementations.

Outputs (all under crates/core/tests/data/):
  porter_vectors.json  word -> stem pairs (hand-verified anchors + corpus vocab)
  metric_oracle.json   20 candidate/reference pairs with expected metric values
  embed_oracle.json    exact low-dim vector plus a disjoint-text cosine probe

Run from the tools/ directory: python3 gen_fixtures.py
"""

import json
import os

import hash_embed_ref
import metrics_ref
import porter_ref

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "data")

EXTRA_VOCAB = """
anxiety depression depressive schizophrenia psychosis psychotic insomnia
fatigue irritability mania manic episode episodes medication medications
psychotherapy therapy therapies counseling cognitive behavioral serotonin
dopamine receptor receptors inhibitor inhibitors reuptake selective panic
attack attacks phobia obsessive compulsive trauma traumatic stress
supplement supplements omega acids vitamin vitamins deficiency magnesium
exercise meditation mindfulness relaxation breathing hygiene melatonin
valerian chamomile lavender kava wort hypericum interactions exposure
contraindications serotonergic syndrome pressure monitoring lithium
lamotrigine valproate quetiapine sertraline fluoxetine escitalopram
venlafaxine bupropion buspirone diazepam lorazepam clonazepam gabapentin
marker markers variant variants chromosome genome genomic heritability
polymorphism allele alleles susceptibility predisposition expression
neurotransmitter neurotransmitters hippocampus amygdala cortex prefrontal
plasticity inflammation inflammatory cortisol circadian rhythm rhythms
appetite concentration worthlessness guilt hopelessness restlessness
palpitations sweating trembling dizziness nausea headaches tension worry
worrying rumination avoidance flashbacks nightmares hypervigilance startle
numbing detachment patients patient responds respond responded helping
helps helped stabilizes stabilizer stabilizing reduces reducing reduced
improves improving improved increases increased decreases decreased risk
risks relapse remission severity chronic acute persistent recurrent
clinician clinicians prescribed prescribing dosage doses tapering
withdrawal dependence tolerance efficacy evidence guideline guidelines
first line adjunct adjunctive augmentation monotherapy combination
"""


def write_json(name, payload):
    path = os.path.join(OUT_DIR, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")


def gen_porter_vectors():
    words = dict(porter_ref.HAND_VERIFIED)
    for word in EXTRA_VOCAB.split():
        words.setdefault(word, porter_ref.stem(word))
    pairs = [[w, words[w]] for w in sorted(words)]
    write_json("porter_vectors.json", {"pairs": pairs})


METRIC_PAIRS = [
    # [id, candidate, reference]
    ["identical-15-token",
     "lithium remains the standard first line treatment for bipolar disorder and reduces relapse risk substantially",
     "lithium remains the standard first line treatment for bipolar disorder and reduces relapse risk substantially"],
    ["partial-15-token",
     "lithium remains the standard first line treatment for bipolar disorder and reduces relapse risk substantially",
     "lithium is considered a first line treatment for bipolar disorder because it reduces relapse risk"],
    ["reordered",
     "disorder bipolar for treatment line first",
     "first line treatment for bipolar disorder"],
    ["half-overlap",
     "regular aerobic exercise improves mood and lowers anxiety in many adults",
     "daily aerobic exercise lifts mood and eases tension for most people"],
    ["disjoint",
     "quantum harmonics resonate beneath turquoise skies",
     "gentle rivers meander through ancient villages"],
    ["short-candidate-brevity",
     "ssri medications help",
     "ssri medications help many patients manage chronic anxiety symptoms effectively"],
    ["long-candidate-no-penalty",
     "ssri medications help many patients manage chronic anxiety symptoms effectively",
     "ssri medications help"],
    ["three-token-smoothing",
     "therapy reduces anxiety",
     "exposure therapy gradually reduces anxiety"],
    ["clipping-repeats",
     "pain pain pain pain",
     "chronic pain affects sleep"],
    ["stem-only-matches",
     "doctors treating depressed patients",
     "doctor treats depression patient"],
    ["case-and-punctuation",
     "Lithium, treats Bipolar-Disorder!",
     "lithium treats bipolar disorder"],
    ["single-token",
     "lithium",
     "lithium"],
    ["unicode-tokens",
     "café au lait improves naïve mood",
     "café au lait boosts naïve mood"],
    ["digit-tokens",
     "take 100 mg of 5 htp daily",
     "take 100 mg of 5 htp every morning"],
    ["long-high-overlap",
     "cognitive behavioral therapy teaches patients to notice automatic thoughts challenge distorted beliefs and practice new coping skills between sessions with measurable gains",
     "cognitive behavioral therapy teaches patients to notice automatic thoughts question distorted beliefs and rehearse new coping skills between sessions with lasting gains"],
    ["long-low-overlap",
     "sleep restriction and stimulus control remain core techniques for treating chronic insomnia in adults",
     "mindfulness based stress reduction lowers rumination scores after eight weekly group sessions"],
    ["superset-candidate",
     "in many controlled studies regular exercise clearly reduces depressive symptoms over time",
     "exercise reduces depressive symptoms"],
    ["subset-candidate",
     "exercise reduces depressive symptoms",
     "in many controlled studies regular exercise clearly reduces depressive symptoms over time"],
    ["scattered-chunks",
     "sleep therapy mood exercise diet routine",
     "sleep hygiene mood balance diet plan"],
    ["mixed-exact-stem",
     "patients respond to treatments quickly",
     "patient responds to treatment quickly"],
]


def gen_metric_oracle():
    cases = []
    for case_id, cand, ref in METRIC_PAIRS:
        scores = metrics_ref.score_pair(cand, ref)
        cases.append({
            "id": case_id,
            "candidate": cand,
            "reference": ref,
            "expected": scores,
        })
    assert len(cases) == 20, len(cases)
    # Spot-check properties of the corpus itself.
    by_id = {c["id"]: c["expected"] for c in cases}
    assert by_id["identical-15-token"]["bleu"] == 1.0
    assert by_id["identical-15-token"]["overall"] > 0.99
    assert by_id["disjoint"]["overall"] == 0.0
    assert by_id["stem-only-matches"]["bleu"] == 0.0
    assert by_id["stem-only-matches"]["meteor"] > 0.0
    assert by_id["case-and-punctuation"]["rouge1"] == 1.0
    write_json("metric_oracle.json", {"cases": cases})


def gen_embed_oracle():
    text16 = "lithium treats bipolar disorder effectively"
    vec16 = hash_embed_ref.embed(text16, 16)
    text_a = "lithium stabilizes mood and reduces manic episodes in adults"
    text_b = "cognitive therapy helps clients challenge distorted thinking patterns"
    # The disjoint probe only works if the texts share no stemmed token.
    stems_a = set(hash_embed_ref.normalize(text_a))
    stems_b = set(hash_embed_ref.normalize(text_b))
    assert not (stems_a & stems_b), stems_a & stems_b
    dim = 4096
    cos = hash_embed_ref.cosine(
        hash_embed_ref.embed(text_a, dim), hash_embed_ref.embed(text_b, dim)
    )
    assert abs(cos) < 0.2, cos
    write_json("embed_oracle.json", {
        "dim16": {"text": text16, "dim": 16, "values": vec16},
        "disjoint": {"text_a": text_a, "text_b": text_b, "dim": dim, "cosine": cos},
    })


def main():
    porter_ref.self_check()
    metrics_ref.self_check()
    hash_embed_ref.self_check()
    os.makedirs(OUT_DIR, exist_ok=True)
    gen_porter_vectors()
    gen_metric_oracle()
    gen_embed_oracle()


if __name__ == "__main__":
    main()
