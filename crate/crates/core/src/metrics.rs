//! Text-overlap metrics for evaluating generated answers against
//! references: BLEU (orders 1-4), ROUGE-1/2/L, a simplified METEOR
//! (exact + stem matching, no synonym stage), and their arithmetic mean
//! as the overall score. All scores lie in [0, 1].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::text::{stem, tokenize};

/// All five metrics plus their mean for one candidate/reference pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub bleu: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    pub meteor: f64,
    pub overall: f64,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_default() += 1;
        }
    }
    counts
}

fn clipped_overlap(candidate: &[String], reference: &[String], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let total: usize = cand.values().sum();
    let matched: usize = cand
        .iter()
        .map(|(gram, &count)| count.min(refc.get(gram).copied().unwrap_or(0)))
        .sum();
    (matched, total)
}

/// Corpus-free sentence BLEU with uniform quarter weights over orders
/// 1-4 and a brevity penalty. When any order has zero matches or zero
/// n-grams, orders 2-4 switch to add-one smoothing; order 1 is never
/// smoothed, and zero unigram overlap scores 0.
pub fn bleu(candidate: &str, reference: &str) -> f64 {
    let c_tokens = tokenize(candidate);
    let r_tokens = tokenize(reference);
    if c_tokens.is_empty() || r_tokens.is_empty() {
        return 0.0;
    }
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];
    for n in 1..=4 {
        let (m, t) = clipped_overlap(&c_tokens, &r_tokens, n);
        matches[n - 1] = m;
        totals[n - 1] = t;
    }
    if totals[0] == 0 || matches[0] == 0 {
        return 0.0;
    }
    let smooth = (0..4).any(|i| matches[i] == 0 || totals[i] == 0);
    let mut log_sum = 0.0f64;
    for n in 1..=4 {
        let m = matches[n - 1] as f64;
        let t = totals[n - 1] as f64;
        let p = if n == 1 {
            m / t
        } else if smooth {
            (m + 1.0) / (t + 1.0)
        } else {
            m / t
        };
        log_sum += 0.25 * p.ln();
    }
    let c = c_tokens.len() as f64;
    let r = r_tokens.len() as f64;
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    bp * log_sum.exp()
}

fn f1(matched: usize, candidate_total: usize, reference_total: usize) -> f64 {
    if candidate_total == 0 || reference_total == 0 {
        return 0.0;
    }
    let p = matched as f64 / candidate_total as f64;
    let r = matched as f64 / reference_total as f64;
    if p + r == 0.0 {
        return 0.0;
    }
    2.0 * p * r / (p + r)
}

/// Clipped n-gram overlap F1.
pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> f64 {
    let c_tokens = tokenize(candidate);
    let r_tokens = tokenize(reference);
    let (matched, c_total) = clipped_overlap(&c_tokens, &r_tokens, n);
    let r_total = if r_tokens.len() >= n {
        r_tokens.len() - n + 1
    } else {
        0
    };
    f1(matched, c_total, r_total)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Longest-common-subsequence F1.
pub fn rouge_l(candidate: &str, reference: &str) -> f64 {
    let c_tokens = tokenize(candidate);
    let r_tokens = tokenize(reference);
    let lcs = lcs_len(&c_tokens, &r_tokens);
    f1(lcs, c_tokens.len(), r_tokens.len())
}

/// Simplified METEOR: greedy exact alignment in candidate order, a second
/// stem-level pass over the leftovers, recall-weighted harmonic F-mean,
/// and a fragmentation penalty over contiguous aligned chunks. There is
/// no synonym-matching stage.
pub fn meteor(candidate: &str, reference: &str) -> f64 {
    let c_tokens = tokenize(candidate);
    let r_tokens = tokenize(reference);
    if c_tokens.is_empty() || r_tokens.is_empty() {
        return 0.0;
    }
    let mut cand_to_ref: Vec<Option<usize>> = vec![None; c_tokens.len()];
    let mut used = vec![false; r_tokens.len()];
    for (i, token) in c_tokens.iter().enumerate() {
        for (j, r_token) in r_tokens.iter().enumerate() {
            if !used[j] && r_token == token {
                cand_to_ref[i] = Some(j);
                used[j] = true;
                break;
            }
        }
    }
    let c_stems: Vec<String> = c_tokens.iter().map(|t| stem(t)).collect();
    let r_stems: Vec<String> = r_tokens.iter().map(|t| stem(t)).collect();
    for i in 0..c_tokens.len() {
        if cand_to_ref[i].is_some() {
            continue;
        }
        for j in 0..r_tokens.len() {
            if !used[j] && r_stems[j] == c_stems[i] {
                cand_to_ref[i] = Some(j);
                used[j] = true;
                break;
            }
        }
    }
    let m = cand_to_ref.iter().flatten().count();
    if m == 0 {
        return 0.0;
    }
    let precision = m as f64 / c_tokens.len() as f64;
    let recall = m as f64 / r_tokens.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let mut chunks = 0usize;
    let mut prev: Option<(usize, usize)> = None;
    for (i, j) in cand_to_ref
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
    {
        let contiguous = prev
            .map(|(pi, pj)| i == pi + 1 && j == pj + 1)
            .unwrap_or(false);
        if !contiguous {
            chunks += 1;
        }
        prev = Some((i, j));
    }
    let penalty = 0.5 * (chunks as f64 / m as f64).powi(3);
    f_mean * (1.0 - penalty)
}

/// Arithmetic mean of the five metric scores.
pub fn overall(bleu: f64, rouge1: f64, rouge2: f64, rouge_l: f64, meteor: f64) -> f64 {
    (bleu + rouge1 + rouge2 + rouge_l + meteor) / 5.0
}

/// Computes the full metric row for one pair.
pub fn score_pair(candidate: &str, reference: &str) -> MetricRow {
    let b = bleu(candidate, reference);
    let r1 = rouge_n(candidate, reference, 1);
    let r2 = rouge_n(candidate, reference, 2);
    let rl = rouge_l(candidate, reference);
    let met = meteor(candidate, reference);
    MetricRow {
        bleu: b,
        rouge1: r1,
        rouge2: r2,
        rouge_l: rl,
        meteor: met,
        overall: overall(b, r1, r2, rl, met),
    }
}
