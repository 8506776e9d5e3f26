//! Frame-level segmentation metrics.
//!
//! Counts are pooled over all frames of all videos before any ratio is
//! taken. Class averages skip classes whose denominator is empty:
//! MoC averages over classes present in the ground truth, IoU over classes
//! present in either labeling, IoD over classes present in the hypothesis.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::corpus::{FrameLabeling, LabelId};
use crate::error::{invalid_arg, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    /// Frames labeled with the class in the ground truth (`|G|`).
    pub truth: u64,
    /// Frames hypothesized as the class (`|D|`).
    pub hypothesis: u64,
    /// `|G ∩ D|`
    pub both: u64,
}

impl ClassCounts {
    pub fn accuracy(&self) -> Option<f64> {
        (self.truth > 0).then(|| self.both as f64 / self.truth as f64)
    }

    pub fn iou(&self) -> Option<f64> {
        let union = self.truth + self.hypothesis - self.both;
        (union > 0).then(|| self.both as f64 / union as f64)
    }

    pub fn iod(&self) -> Option<f64> {
        (self.hypothesis > 0).then(|| self.both as f64 / self.hypothesis as f64)
    }
}

/// Pooled frame counts over a set of (ground truth, hypothesis) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tally {
    pub per_class: BTreeMap<LabelId, ClassCounts>,
    pub correct: u64,
    pub frames: u64,
}

impl Tally {
    pub fn add(&mut self, truth: &FrameLabeling, hypothesis: &FrameLabeling) -> Result<()> {
        if truth.len() != hypothesis.len() {
            return Err(invalid_arg(format!(
                "labeling lengths differ: {} ground truth vs {} hypothesis",
                truth.len(),
                hypothesis.len()
            )));
        }
        for (&g, &d) in truth.labels.iter().zip(&hypothesis.labels) {
            self.per_class.entry(g).or_default().truth += 1;
            self.per_class.entry(d).or_default().hypothesis += 1;
            if g == d {
                self.per_class.entry(g).or_default().both += 1;
                self.correct += 1;
            }
            self.frames += 1;
        }
        Ok(())
    }

    pub fn from_pairs(pairs: &[(&FrameLabeling, &FrameLabeling)]) -> Result<Self> {
        let mut tally = Tally::default();
        for (g, d) in pairs {
            tally.add(g, d)?;
        }
        if tally.frames == 0 {
            return Err(invalid_arg("no frames to evaluate"));
        }
        Ok(tally)
    }

    pub fn mof(&self) -> f64 {
        self.correct as f64 / self.frames as f64
    }

    fn class_mean(&self, f: impl Fn(&ClassCounts) -> Option<f64>) -> f64 {
        let values: Vec<f64> = self.per_class.values().filter_map(f).collect();
        if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        }
    }

    pub fn moc(&self) -> f64 {
        self.class_mean(ClassCounts::accuracy)
    }

    pub fn jaccard_iou(&self) -> f64 {
        self.class_mean(ClassCounts::iou)
    }

    pub fn jaccard_iod(&self) -> f64 {
        self.class_mean(ClassCounts::iod)
    }
}

/// Correct frames over all frames.
pub fn mof(pairs: &[(&FrameLabeling, &FrameLabeling)]) -> Result<f64> {
    Ok(Tally::from_pairs(pairs)?.mof())
}

/// Mean per-class frame accuracy over classes in the ground truth.
pub fn moc(pairs: &[(&FrameLabeling, &FrameLabeling)]) -> Result<f64> {
    Ok(Tally::from_pairs(pairs)?.moc())
}

/// Mean per-class `|G ∩ D| / |G ∪ D|`.
pub fn jaccard_iou(pairs: &[(&FrameLabeling, &FrameLabeling)]) -> Result<f64> {
    Ok(Tally::from_pairs(pairs)?.jaccard_iou())
}

/// Mean per-class `|G ∩ D| / |D|`.
pub fn jaccard_iod(pairs: &[(&FrameLabeling, &FrameLabeling)]) -> Result<f64> {
    Ok(Tally::from_pairs(pairs)?.jaccard_iod())
}

/// Fraction of videos whose hypothesized activity equals the ground truth.
/// A missing tag on either side counts as wrong.
pub fn activity_accuracy(pairs: &[(Option<&str>, Option<&str>)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(invalid_arg("no videos to evaluate"));
    }
    let correct = pairs
        .iter()
        .filter(|(g, h)| g.is_some() && g == h)
        .count();
    Ok(correct as f64 / pairs.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mof: f64,
    pub moc: f64,
    pub jacc_iou: f64,
    pub jacc_iod: f64,
    pub per_class: BTreeMap<LabelId, ClassCounts>,
    pub activity_accuracy: Option<f64>,
    pub evaluated: usize,
    pub skipped: usize,
}

impl EvalReport {
    pub fn new(pairs: &[(&FrameLabeling, &FrameLabeling)], skipped: usize) -> Result<Self> {
        let tally = Tally::from_pairs(pairs)?;
        Ok(EvalReport {
            mof: tally.mof(),
            moc: tally.moc(),
            jacc_iou: tally.jaccard_iou(),
            jacc_iod: tally.jaccard_iod(),
            per_class: tally.per_class,
            activity_accuracy: None,
            evaluated: pairs.len(),
            skipped,
        })
    }
}
