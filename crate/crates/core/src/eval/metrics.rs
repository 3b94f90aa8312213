use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::Stance;

/// Per-class counts derived from a confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// Gold-by-predicted counts over {Favor, Against, None}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    /// `matrix[gold][predicted]`, classes in `Stance::ALL` order.
    pub matrix: [[u64; 3]; 3],
}

impl ConfusionCounts {
    pub fn record(&mut self, gold: Stance, predicted: Stance) {
        self.matrix[gold.idx()][predicted.idx()] += 1;
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Stance, Stance)>) -> Self {
        let mut c = ConfusionCounts::default();
        for (g, p) in pairs {
            c.record(g, p);
        }
        c
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        for g in 0..3 {
            for p in 0..3 {
                self.matrix[g][p] += other.matrix[g][p];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.matrix.iter().flatten().sum()
    }

    pub fn gold_count(&self, s: Stance) -> u64 {
        self.matrix[s.idx()].iter().sum()
    }

    pub fn predicted_count(&self, s: Stance) -> u64 {
        self.matrix.iter().map(|row| row[s.idx()]).sum()
    }

    pub fn class(&self, s: Stance) -> ClassCounts {
        let tp = self.matrix[s.idx()][s.idx()];
        ClassCounts {
            tp,
            fp: self.predicted_count(s) - tp,
            fn_: self.gold_count(s) - tp,
        }
    }
}

/// Harmonic mean of precision and recall, `2tp / (2tp + fp + fn)`; zero
/// whenever precision or recall is undefined or both are zero.
pub fn f1_exact(tp: u64, fp: u64, fn_: u64) -> Ratio<u64> {
    if tp == 0 {
        return Ratio::from_integer(0);
    }
    Ratio::new(2 * tp, 2 * tp + fp + fn_)
}

pub fn f1(tp: u64, fp: u64, fn_: u64) -> f64 {
    to_f64(f1_exact(tp, fp, fn_))
}

fn class_f1(c: &ConfusionCounts, s: Stance) -> Ratio<u64> {
    let k = c.class(s);
    f1_exact(k.tp, k.fp, k.fn_)
}

/// Mean of the Favor and Against F1 scores. None predictions still count as
/// misses for the other two classes.
pub fn f_avg_exact(c: &ConfusionCounts) -> Ratio<u64> {
    (class_f1(c, Stance::Favor) + class_f1(c, Stance::Against)) / 2
}

pub fn f_avg(c: &ConfusionCounts) -> f64 {
    to_f64(f_avg_exact(c))
}

/// Unweighted mean of all three per-class F1 scores; an absent, never
/// predicted class contributes 0.
pub fn macro_f1_exact(c: &ConfusionCounts) -> Ratio<u64> {
    Stance::ALL.iter().map(|&s| class_f1(c, s)).sum::<Ratio<u64>>() / 3
}

pub fn macro_f1(c: &ConfusionCounts) -> f64 {
    to_f64(macro_f1_exact(c))
}

fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
