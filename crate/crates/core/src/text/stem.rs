//! Classic suffix-stripping stemmer (the original 1980 rule tables).
//!
//! Operates on lowercase words. Words of one or two characters are
//! returned unchanged. Non-ASCII letters and digits are treated as
//! consonants, which keeps behavior total and deterministic for arbitrary
//! token input.

/// Returns the stem of a lowercase word.
pub fn stem(word: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() <= 2 {
        return word.to_string();
    }
    let w = step_1a(chars);
    let w = step_1b(w);
    let w = step_1c(w);
    let w = apply_table(w, STEP2);
    let w = apply_table(w, STEP3);
    let w = step_4(w);
    let w = step_5a(w);
    let w = step_5b(w);
    w.into_iter().collect()
}

fn is_consonant(word: &[char], i: usize) -> bool {
    match word[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => false,
        'y' => i == 0 || !is_consonant(word, i - 1),
        _ => true,
    }
}

/// The measure m: the number of vowel-consonant sequences in the stem.
fn measure(stem: &[char]) -> usize {
    let n = stem.len();
    let mut m = 0;
    let mut i = 0;
    while i < n && is_consonant(stem, i) {
        i += 1;
    }
    while i < n {
        while i < n && !is_consonant(stem, i) {
            i += 1;
        }
        if i >= n {
            break;
        }
        m += 1;
        while i < n && is_consonant(stem, i) {
            i += 1;
        }
    }
    m
}

fn has_vowel(stem: &[char]) -> bool {
    (0..stem.len()).any(|i| !is_consonant(stem, i))
}

fn ends_double_consonant(word: &[char]) -> bool {
    let n = word.len();
    n >= 2 && word[n - 1] == word[n - 2] && is_consonant(word, n - 1)
}

/// consonant-vowel-consonant ending where the final consonant is not w, x
/// or y; gates the "restore e" rules.
fn ends_cvc(word: &[char]) -> bool {
    let n = word.len();
    if n < 3 {
        return false;
    }
    is_consonant(word, n - 3)
        && !is_consonant(word, n - 2)
        && is_consonant(word, n - 1)
        && !matches!(word[n - 1], 'w' | 'x' | 'y')
}

fn ends_with(word: &[char], suffix: &str) -> bool {
    let suf: Vec<char> = suffix.chars().collect();
    word.len() >= suf.len() && word[word.len() - suf.len()..] == suf[..]
}

fn truncated(word: &[char], by: usize) -> Vec<char> {
    word[..word.len() - by].to_vec()
}

fn step_1a(w: Vec<char>) -> Vec<char> {
    if ends_with(&w, "sses") || ends_with(&w, "ies") {
        truncated(&w, 2)
    } else if ends_with(&w, "ss") {
        w
    } else if ends_with(&w, "s") {
        truncated(&w, 1)
    } else {
        w
    }
}

fn step_1b(mut w: Vec<char>) -> Vec<char> {
    if ends_with(&w, "eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            return truncated(&w, 1);
        }
        return w;
    }
    let removed = if ends_with(&w, "ed") && has_vowel(&w[..w.len() - 2]) {
        w.truncate(w.len() - 2);
        true
    } else if ends_with(&w, "ing") && has_vowel(&w[..w.len() - 3]) {
        w.truncate(w.len() - 3);
        true
    } else {
        false
    };
    if removed {
        if ends_with(&w, "at") || ends_with(&w, "bl") || ends_with(&w, "iz") {
            w.push('e');
        } else if ends_double_consonant(&w) && !matches!(w[w.len() - 1], 'l' | 's' | 'z') {
            w.truncate(w.len() - 1);
        } else if measure(&w) == 1 && ends_cvc(&w) {
            w.push('e');
        }
    }
    w
}

fn step_1c(mut w: Vec<char>) -> Vec<char> {
    if ends_with(&w, "y") && has_vowel(&w[..w.len() - 1]) {
        let n = w.len();
        w[n - 1] = 'i';
    }
    w
}

/// Ordered longest-first; the first matching suffix is the only one tried.
const STEP2: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("ization", "ize"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("tional", "tion"),
    ("alism", "al"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
    ("ation", "ate"),
    ("entli", "ent"),
    ("ousli", "ous"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("ator", "ate"),
    ("eli", "e"),
];

const STEP3: &[(&str, &str)] = &[
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ness", ""),
    ("ful", ""),
];

fn apply_table(w: Vec<char>, table: &[(&str, &str)]) -> Vec<char> {
    for (suffix, replacement) in table {
        if ends_with(&w, suffix) {
            let stem_len = w.len() - suffix.chars().count();
            if measure(&w[..stem_len]) > 0 {
                let mut out = w[..stem_len].to_vec();
                out.extend(replacement.chars());
                return out;
            }
            return w;
        }
    }
    w
}

const STEP4: &[&str] = &[
    "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism", "ate", "iti", "ous",
    "ive", "ize", "ion", "al", "er", "ic", "ou",
];

fn step_4(w: Vec<char>) -> Vec<char> {
    for suffix in STEP4 {
        if ends_with(&w, suffix) {
            let stem_len = w.len() - suffix.chars().count();
            let stem = &w[..stem_len];
            if measure(stem) > 1 {
                if *suffix == "ion" && !(ends_with(stem, "s") || ends_with(stem, "t")) {
                    return w;
                }
                return stem.to_vec();
            }
            return w;
        }
    }
    w
}

fn step_5a(w: Vec<char>) -> Vec<char> {
    if ends_with(&w, "e") {
        let stem = &w[..w.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            return stem.to_vec();
        }
    }
    w
}

fn step_5b(w: Vec<char>) -> Vec<char> {
    if measure(&w) > 1 && ends_double_consonant(&w) && w[w.len() - 1] == 'l' {
        return truncated(&w, 1);
    }
    w
}
