//! Ranking metrics over scored positive and negative pairs.
//!
//! Tie rules: Hits@K counts a positive only when it is strictly above the
//! K-th largest negative; MRR and AUC give half credit to ties.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_finite(name: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| x.is_nan()) {
        Some(i) => Err(Error::Data(format!("{name} score {i} is NaN"))),
        None => Ok(()),
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Number of elements of ascending `s` strictly below / equal to `x`.
fn below_and_equal(s: &[f64], x: f64) -> (usize, usize) {
    let lo = s.partition_point(|&y| y < x);
    let hi = s.partition_point(|&y| y <= x);
    (lo, hi - lo)
}

/// Fraction of positives scored strictly above the K-th largest negative.
pub fn hits_at_k(pos: &[f64], neg: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Config("K must be >= 1".into()));
    }
    if neg.len() < k {
        return Err(Error::TooFewNegatives {
            needed: k,
            have: neg.len(),
        });
    }
    if pos.is_empty() {
        return Err(Error::Data("no positive scores".into()));
    }
    check_finite("positive", pos)?;
    check_finite("negative", neg)?;
    let s = sorted(neg);
    let threshold = s[s.len() - k];
    let hits = pos.iter().filter(|&&p| p > threshold).count();
    Ok(hits as f64 / pos.len() as f64)
}

fn reciprocal_rank(sorted_neg: &[f64], p: f64) -> f64 {
    let (below, equal) = below_and_equal(sorted_neg, p);
    let greater = sorted_neg.len() - below - equal;
    // 1 + greater + equal/2, kept in halves so it is exact
    2.0 / (2 * (1 + greater) + equal) as f64
}

/// MRR with every positive ranked against the same negative pool.
pub fn mrr(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() {
        return Err(Error::Data("no positive scores".into()));
    }
    check_finite("positive", pos)?;
    check_finite("negative", neg)?;
    let s = sorted(neg);
    let total: f64 = pos.iter().map(|&p| reciprocal_rank(&s, p)).sum();
    Ok(total / pos.len() as f64)
}

/// MRR where positive `i` is ranked against its own list `negs[i]`.
pub fn mrr_per_source(pos: &[f64], negs: &[Vec<f64>]) -> Result<f64> {
    if pos.is_empty() {
        return Err(Error::Data("no positive scores".into()));
    }
    if pos.len() != negs.len() {
        return Err(Error::Shape(format!(
            "{} positives but {} negative lists",
            pos.len(),
            negs.len()
        )));
    }
    check_finite("positive", pos)?;
    let mut total = 0.0;
    for (&p, neg) in pos.iter().zip(negs) {
        check_finite("negative", neg)?;
        total += reciprocal_rank(&sorted(neg), p);
    }
    Ok(total / pos.len() as f64)
}

/// `P(pos > neg) + ½ P(pos = neg)` over all cross pairs, via sorting.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Data("AUC needs at least one positive and one negative".into()));
    }
    check_finite("positive", pos)?;
    check_finite("negative", neg)?;
    let s = sorted(neg);
    // twice the numerator, as an integer
    let twice: u128 = pos
        .iter()
        .map(|&p| {
            let (below, equal) = below_and_equal(&s, p);
            2 * below as u128 + equal as u128
        })
        .sum();
    Ok(twice as f64 / (2 * pos.len() as u128 * neg.len() as u128) as f64)
}

/// The standard report; a Hits@K entry is `None` when there are fewer than
/// `K` negatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "hits@20")]
    pub hits_20: Option<f64>,
    #[serde(rename = "hits@50")]
    pub hits_50: Option<f64>,
    #[serde(rename = "hits@100")]
    pub hits_100: Option<f64>,
    pub mrr: f64,
    pub auc: f64,
}

impl MetricsReport {
    pub fn compute(pos: &[f64], neg: &[f64]) -> Result<Self> {
        let hits = |k| match hits_at_k(pos, neg, k) {
            Ok(h) => Ok(Some(h)),
            Err(Error::TooFewNegatives { .. }) => Ok(None),
            Err(e) => Err(e),
        };
        Ok(Self {
            hits_20: hits(20)?,
            hits_50: hits(50)?,
            hits_100: hits(100)?,
            mrr: mrr(pos, neg)?,
            auc: auc(pos, neg)?,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "metric,value\nhits@20,{}\nhits@50,{}\nhits@100,{}\nmrr,{}\nauc,{}\n",
            cell(self.hits_20),
            cell(self.hits_50),
            cell(self.hits_100),
            self.mrr,
            self.auc
        )
    }
}
