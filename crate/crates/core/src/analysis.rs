//! Evaluation metrics: BLEU-4, exact match, ROC/AUC, operating points and
//! 4-gram novelty.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whitespace tokenization used by every text metric here.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Numerator used in place of a zero clipped n-gram count.
pub const BLEU_EPSILON: f64 = 1e-9;

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Sentence BLEU-4 in `[0, 100]`: geometric mean of clipped 1..4-gram
/// precisions (zero counts replaced by [`BLEU_EPSILON`]) times the brevity
/// penalty. An empty candidate scores 0.
pub fn bleu4<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T]) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let cand = ngram_counts(candidate, n);
        let refs = ngram_counts(reference, n);
        let total = candidate.len().saturating_sub(n - 1);
        let clipped: usize = cand
            .iter()
            .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
            .sum();
        let numerator = if clipped == 0 { BLEU_EPSILON } else { clipped as f64 };
        log_sum += (numerator / total.max(1) as f64).ln();
    }
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    100.0 * bp * (log_sum / 4.0).exp()
}

/// Fraction of byte-exact pairs; 0 for an empty list.
pub fn exact_match<A: AsRef<[u8]>, B: AsRef<[u8]>>(pairs: &[(A, B)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs.iter().filter(|(a, b)| a.as_ref() == b.as_ref()).count() as f64 / pairs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub score: f64,
    pub label: bool,
}

impl ScoredSample {
    pub fn new(score: f64, label: bool) -> Self {
        ScoredSample { score, label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    /// Samples with `score >= threshold` are called positive.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Roc {
    /// Starts at `(0, 0)` (threshold `+inf`) and ends at `(1, 1)`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl Roc {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            out.push_str(&format!("{},{:.6},{:.6}\n", p.threshold, p.fpr, p.tpr));
        }
        out
    }
}

fn counts(samples: &[ScoredSample]) -> Result<(usize, usize)> {
    if let Some(s) = samples.iter().find(|s| !s.score.is_finite()) {
        return Err(Error::Domain(format!("non-finite score {}", s.score)));
    }
    let n_pos = samples.iter().filter(|s| s.label).count();
    Ok((n_pos, samples.len() - n_pos))
}

fn sorted_desc(samples: &[ScoredSample]) -> Vec<ScoredSample> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    sorted
}

/// ROC over the distinct scores, ties grouped; AUC by trapezoid.
pub fn roc(samples: &[ScoredSample]) -> Result<Roc> {
    let (n_pos, n_neg) = counts(samples)?;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels("ROC needs both positive and negative samples"));
    }
    let sorted = sorted_desc(samples);
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].score;
        let (tp0, fp0) = (tp, fp);
        while i < sorted.len() && sorted[i].score == threshold {
            if sorted[i].label {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // trapezoid in count space, normalized once at the end
        auc += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
        });
    }
    Ok(Roc {
        points,
        auc: auc / (n_pos as f64 * n_neg as f64),
        n_pos,
        n_neg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub target_fpr: f64,
    pub threshold: f64,
    pub achieved_tpr: f64,
    pub achieved_fpr: f64,
}

/// Smallest observed score `t` with `Pr(score >= t | negative) <= target_fpr`.
/// When no observed score qualifies the threshold is `max score + 1`.
pub fn threshold_at_fpr(samples: &[ScoredSample], target_fpr: f64) -> Result<OperatingPoint> {
    let (n_pos, n_neg) = counts(samples)?;
    if n_neg == 0 {
        return Err(Error::DegenerateLabels("threshold selection needs negative samples"));
    }
    if !(target_fpr > 0.0 && target_fpr <= 1.0) {
        return Err(Error::Domain(format!("target FPR {target_fpr} outside (0, 1]")));
    }
    let sorted = sorted_desc(samples);
    let rate = |count: usize, total: usize| if total == 0 { 0.0 } else { count as f64 / total as f64 };
    // walk thresholds from high to low; FPR only grows, so keep the last
    // threshold still within budget
    let mut best = None;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].score;
        while i < sorted.len() && sorted[i].score == t {
            if sorted[i].label {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        if rate(fp, n_neg) <= target_fpr {
            best = Some((t, tp, fp));
        } else {
            break;
        }
    }
    Ok(match best {
        Some((threshold, tp, fp)) => OperatingPoint {
            target_fpr,
            threshold,
            achieved_tpr: rate(tp, n_pos),
            achieved_fpr: rate(fp, n_neg),
        },
        None => OperatingPoint {
            target_fpr,
            threshold: sorted[0].score + 1.0,
            achieved_tpr: 0.0,
            achieved_fpr: 0.0,
        },
    })
}

/// Parses `score,label` CSV (header optional). Labels: `1/0`, `true/false`,
/// `trusted/untrusted`.
pub fn parse_scored_csv(text: &str) -> Result<Vec<ScoredSample>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| Error::Config {
            path: format!("line {}", lineno + 1),
            reason: reason.to_string(),
        };
        let (score, label) = line.split_once(',').ok_or_else(|| bad("expected `score,label`"))?;
        let score = match score.trim().parse::<f64>() {
            Ok(s) => s,
            Err(_) if lineno == 0 => continue,
            Err(_) => return Err(bad("score is not a number")),
        };
        let label = match label.trim().to_ascii_lowercase().as_str() {
            "1" | "true" | "trusted" => true,
            "0" | "false" | "untrusted" => false,
            _ => return Err(bad("label must be 1/0, true/false or trusted/untrusted")),
        };
        out.push(ScoredSample::new(score, label));
    }
    Ok(out)
}

/// Set of token n-grams seen in a training corpus.
#[derive(Debug, Clone, Default)]
pub struct NgramIndex {
    n: usize,
    grams: HashSet<Vec<String>>,
}

impl NgramIndex {
    pub const DEFAULT_N: usize = 4;

    pub fn new(n: usize) -> Self {
        assert!(n > 0, "n-gram order must be positive");
        NgramIndex {
            n,
            grams: HashSet::new(),
        }
    }

    /// 4-gram index over whitespace-tokenized lines.
    pub fn from_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Self {
        let mut index = Self::new(Self::DEFAULT_N);
        for line in lines {
            index.add_sentence(&tokenize(line));
        }
        index
    }

    pub fn add_sentence<S: AsRef<str>>(&mut self, tokens: &[S]) {
        if tokens.len() >= self.n {
            for w in tokens.windows(self.n) {
                self.grams.insert(w.iter().map(|t| t.as_ref().to_string()).collect());
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    fn contains<S: AsRef<str>>(&self, gram: &[S]) -> bool {
        let key: Vec<String> = gram.iter().map(|t| t.as_ref().to_string()).collect();
        self.grams.contains(&key)
    }
}

/// Fraction of the sentence's n-grams (as a multiset) absent from `index`.
/// `None` when the sentence is shorter than `n` tokens.
pub fn novelty_score<S: AsRef<str>>(sentence: &[S], index: &NgramIndex) -> Option<f64> {
    if sentence.len() < index.n {
        return None;
    }
    let windows: Vec<_> = sentence.windows(index.n).collect();
    let novel = windows.iter().filter(|w| !index.contains(w)).count();
    Some(novel as f64 / windows.len() as f64)
}
