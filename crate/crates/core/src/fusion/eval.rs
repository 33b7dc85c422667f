use std::ops::{Add, AddAssign};
use std::str::FromStr;

use super::FusionError;
use crate::mask::RoadMask;

/// KITTI road scene categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Um,
    Umm,
    Uu,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Um, Category::Umm, Category::Uu];

    pub fn name(self) -> &'static str {
        match self {
            Category::Um => "UM",
            Category::Umm => "UMM",
            Category::Uu => "UU",
        }
    }

    /// From a frame name such as `umm_000012`.
    pub fn from_frame(name: &str) -> Result<Category, FusionError> {
        let lower = name.to_ascii_lowercase();
        // umm_ must be tested before um_
        [("umm_", Category::Umm), ("um_", Category::Um), ("uu_", Category::Uu)]
            .into_iter()
            .find(|(p, _)| lower.starts_with(p))
            .map(|(_, c)| c)
            .ok_or_else(|| FusionError::UnknownCategory(name.to_string()))
    }
}

impl FromStr for Category {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "um" => Ok(Category::Um),
            "umm" => Ok(Category::Umm),
            "uu" => Ok(Category::Uu),
            _ => Err(FusionError::UnknownCategory(s.to_string())),
        }
    }
}

/// Pixel confusion counts; sums across frames give micro-averaged scores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Counts {
    /// Predicted road is any positive value.
    pub fn from_masks(pred: &RoadMask, gt: &RoadMask) -> Result<Counts, FusionError> {
        pred.same_shape(gt)?;
        let mut c = Counts::default();
        for (&p, &g) in pred.data().iter().zip(gt.data()) {
            match (p > 0.0, g > 0.0) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn result(&self, category: Option<Category>) -> EvalResult {
        let ratio = |num: u64, den: u64| if den == 0 { (0.0, true) } else { (num as f64 / den as f64, false) };
        let (precision, precision_undefined) = ratio(self.tp, self.tp + self.fp);
        let (recall, recall_undefined) = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        EvalResult { precision, recall, f1, counts: *self, category, precision_undefined, recall_undefined }
    }
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_, tn: self.tn + o.tn }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Counts,
    pub category: Option<Category>,
    /// No predicted road pixels, precision reported as 0.
    pub precision_undefined: bool,
    /// No ground-truth road pixels, recall reported as 0.
    pub recall_undefined: bool,
}

pub fn evaluate(pred: &RoadMask, gt: &RoadMask, category: Option<Category>) -> Result<EvalResult, FusionError> {
    Ok(Counts::from_masks(pred, gt)?.result(category))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrPoint {
    pub t: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrSweep {
    pub points: Vec<PrPoint>,
    /// Highest F1; ties go to the lowest threshold.
    pub best: PrPoint,
}

impl PrSweep {
    pub fn from_counts(counts: &[(f64, Counts)]) -> PrSweep {
        let points: Vec<PrPoint> = counts
            .iter()
            .map(|&(t, c)| {
                let r = c.result(None);
                PrPoint { t, precision: r.precision, recall: r.recall, f1: r.f1 }
            })
            .collect();
        let best = points.iter().fold(points[0], |b, p| if p.f1 > b.f1 { *p } else { b });
        PrSweep { points, best }
    }
}

fn thresholds(step: f64) -> Result<Vec<f64>, FusionError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(FusionError::BadStep(step));
    }
    let n = (1.0 / step).round() as usize;
    Ok((0..=n).map(|k| (k as f64 * step).min(1.0)).collect())
}

/// Confusion counts of `conf > t` for each threshold `0, step, ..., 1`.
pub fn sweep_counts(conf: &RoadMask, gt: &RoadMask, step: f64) -> Result<Vec<(f64, Counts)>, FusionError> {
    conf.same_shape(gt)?;
    let ts = thresholds(step)?;
    let mut out: Vec<(f64, Counts)> = ts.iter().map(|&t| (t, Counts::default())).collect();
    for (&v, &g) in conf.data().iter().zip(gt.data()) {
        let g = g > 0.0;
        for (t, c) in out.iter_mut() {
            match (v > *t, g) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(out)
}

pub fn pr_sweep(conf: &RoadMask, gt: &RoadMask, step: f64) -> Result<PrSweep, FusionError> {
    Ok(PrSweep::from_counts(&sweep_counts(conf, gt, step)?))
}
