//! Checks every text metric against a frozen fixture produced by an
//! independent reference implementation (`tools/metrics_ref.py`). Each
//! case pins all five metrics plus their mean to within 1e-6.

use fuserag_core::metrics::score_pair;

#[derive(serde::Deserialize)]
struct Fixture {
    cases: Vec<Case>,
}

#[derive(serde::Deserialize)]
struct Case {
    id: String,
    candidate: String,
    reference: String,
    expected: Expected,
}

#[derive(serde::Deserialize)]
struct Expected {
    bleu: f64,
    rouge1: f64,
    rouge2: f64,
    rouge_l: f64,
    meteor: f64,
    overall: f64,
}

const TOLERANCE: f64 = 1e-6;

#[test]
fn metrics_match_frozen_reference_cases() {
    let raw = include_str!("data/metric_oracle.json");
    let fixture: Fixture = serde_json::from_str(raw).expect("fixture parses");
    assert!(
        fixture.cases.len() >= 15,
        "fixture unexpectedly small: {}",
        fixture.cases.len()
    );
    let mut failures = Vec::new();
    for case in &fixture.cases {
        let row = score_pair(&case.candidate, &case.reference);
        let checks = [
            ("bleu", row.bleu, case.expected.bleu),
            ("rouge1", row.rouge1, case.expected.rouge1),
            ("rouge2", row.rouge2, case.expected.rouge2),
            ("rouge_l", row.rouge_l, case.expected.rouge_l),
            ("meteor", row.meteor, case.expected.meteor),
            ("overall", row.overall, case.expected.overall),
        ];
        for (name, got, expected) in checks {
            if (got - expected).abs() > TOLERANCE {
                failures.push(format!(
                    "case `{}` {name}: expected {expected}, got {got}",
                    case.id
                ));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} mismatches:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
