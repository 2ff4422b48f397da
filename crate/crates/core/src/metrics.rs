//! Mission evaluation metrics, all restricted to ground-truth areas of interest
//! and reported on a 0-100 scale.

use serde::{Deserialize, Serialize};

use crate::belief::{shannon_entropy, GaussianMapBelief, MapBelief, OccupancyMapBelief};
use crate::error::{IppError, Result};
use crate::grid::{FieldValues, InterestSpec, TerrainField};
use crate::scalar::Real;

/// How final Gaussian-map uncertainty is normalised by the prior.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncNormalization {
    /// `Tr(P_t) / Tr(P_0)` over interest cells.
    #[default]
    TraceRatio,
    /// `ln Tr(P_t) / ln Tr(P_0)` over interest cells.
    LogTraceRatio,
}

/// Normalised uncertainty over budget, starting at `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyTrace<T> {
    points: Vec<(T, T)>,
}

impl<T: Real> Default for UncertaintyTrace<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> UncertaintyTrace<T> {
    pub fn new() -> Self {
        UncertaintyTrace { points: vec![(T::zero(), T::one())] }
    }

    pub fn push(&mut self, consumed_budget: T, normalized: T) -> Result<()> {
        let last = self.points.last().expect("trace starts non-empty").0;
        if !(consumed_budget > last) {
            return Err(IppError::metric(format!(
                "trace budgets must increase strictly ({consumed_budget} after {last})"
            )));
        }
        self.points.push((consumed_budget, normalized));
        Ok(())
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }
}

fn check_mask(mask: &[bool], n: usize) -> Result<()> {
    if mask.len() != n {
        return Err(IppError::metric(format!("mask has {} cells, map has {n}", mask.len())));
    }
    if !mask.iter().any(|m| *m) {
        return Err(IppError::metric("area of interest is empty"));
    }
    Ok(())
}

/// Uncertainty over interest cells relative to the prior, as a fraction.
///
/// Gaussian maps compare covariance traces, occupancy maps summed Shannon
/// entropies.
pub fn normalized_uncertainty<T: Real>(
    belief: &MapBelief<T>,
    prior: &MapBelief<T>,
    mask: &[bool],
    normalization: UncNormalization,
) -> Result<T> {
    let n = belief.geometry().len();
    check_mask(mask, n)?;
    if prior.geometry() != belief.geometry() {
        return Err(IppError::metric("prior and belief grids differ"));
    }
    let masked_sum = |f: &dyn Fn(usize) -> T| -> T { (0..n).filter(|c| mask[*c]).map(f).sum() };
    match (belief, prior) {
        (MapBelief::Gaussian(b), MapBelief::Gaussian(p)) => {
            let now = masked_sum(&|c| b.variance(c));
            let before = masked_sum(&|c| p.variance(c));
            Ok(match normalization {
                UncNormalization::TraceRatio => now / before,
                UncNormalization::LogTraceRatio => now.ln() / before.ln(),
            })
        }
        (MapBelief::Occupancy(b), MapBelief::Occupancy(p)) => {
            let now = masked_sum(&|c| shannon_entropy(b.cell(c)));
            let before = masked_sum(&|c| shannon_entropy(p.cell(c)));
            Ok(now / before)
        }
        _ => Err(IppError::metric("prior and belief kinds differ")),
    }
}

/// Final uncertainty (Unc.), percent of the prior.
pub fn unc_metric<T: Real>(
    belief: &MapBelief<T>,
    prior: &MapBelief<T>,
    mask: &[bool],
    normalization: UncNormalization,
) -> Result<T> {
    Ok(T::lit(100.0) * normalized_uncertainty(belief, prior, mask, normalization)?)
}

/// `100 · (1 − AUC)` of normalised uncertainty against budget fraction; the
/// curve is held flat from its last point to the full budget.
pub fn ii_metric<T: Real>(trace: &UncertaintyTrace<T>, total_budget: T) -> Result<T> {
    if !(total_budget > T::zero()) {
        return Err(IppError::metric("total budget must be positive"));
    }
    let pts = trace.points();
    let (last_b, last_u) = *pts.last().expect("non-empty");
    if last_b > total_budget {
        return Err(IppError::metric("trace exceeds the total budget"));
    }
    let half = T::lit(0.5);
    let mut area = T::zero();
    for w in pts.windows(2) {
        let ((b0, u0), (b1, u1)) = (w[0], w[1]);
        area += (b1 - b0) * (u0 + u1) * half;
    }
    area += (total_budget - last_b) * last_u;
    Ok(T::lit(100.0) * (T::one() - area / total_budget))
}

fn continuous_truth<'a, T: Real>(
    belief: &GaussianMapBelief<T>,
    field: &'a TerrainField<T>,
    mask: &[bool],
) -> Result<&'a [T]> {
    if belief.geometry() != field.geometry() {
        return Err(IppError::metric("belief and field grids differ"));
    }
    check_mask(mask, field.geometry().len())?;
    field
        .continuous_values()
        .ok_or_else(|| IppError::metric("continuous metric on a discrete field"))
}

/// Root mean squared error of the posterior mean over interest cells, ×100.
pub fn rmse_metric<T: Real>(belief: &GaussianMapBelief<T>, field: &TerrainField<T>, mask: &[bool]) -> Result<T> {
    let truth = continuous_truth(belief, field, mask)?;
    let (mut sse, mut count) = (T::zero(), 0);
    for c in (0..truth.len()).filter(|c| mask[*c]) {
        let r = belief.mean()[c] - truth[c];
        sse += r * r;
        count += 1;
    }
    Ok(T::lit(100.0) * (sse / T::from_count(count)).sqrt())
}

/// Mean negative log predictive density of the ground truth, ×100.
pub fn mll_metric<T: Real>(belief: &GaussianMapBelief<T>, field: &TerrainField<T>, mask: &[bool]) -> Result<T> {
    let truth = continuous_truth(belief, field, mask)?;
    let (half, two_pi) = (T::lit(0.5), T::lit(2.0) * T::PI());
    let (mut total, mut count) = (T::zero(), 0);
    for c in (0..truth.len()).filter(|c| mask[*c]) {
        let var = belief.variance(c);
        if !(var > T::zero()) {
            return Err(IppError::metric(format!("zero predictive variance at cell {c}")));
        }
        let r = truth[c] - belief.mean()[c];
        total += half * (two_pi * var).ln() + r * r / (T::lit(2.0) * var);
        count += 1;
    }
    Ok(T::lit(100.0) * total / T::from_count(count))
}

/// Mean IoU and macro F1 of the per-cell argmax map, ×100.
///
/// Both average over the classes that occur in the ground truth inside the mask.
pub fn classification_metrics<T: Real>(
    belief: &OccupancyMapBelief<T>,
    field: &TerrainField<T>,
    spec: &InterestSpec<T>,
    mask: &[bool],
) -> Result<(T, T)> {
    let (labels, classes) = match field.values() {
        FieldValues::Discrete { labels, classes } => (labels, *classes),
        FieldValues::Continuous { .. } => return Err(IppError::metric("classification metrics need a discrete field")),
    };
    if belief.classes() != classes || belief.geometry() != field.geometry() {
        return Err(IppError::metric("belief and field disagree on classes or grid"));
    }
    if !matches!(spec, InterestSpec::Classes { classes: k, .. } if *k == classes) {
        return Err(IppError::metric("interest spec does not match the field's classes"));
    }
    check_mask(mask, labels.len())?;
    let k = classes as usize;
    let (mut tp, mut fp, mut fn_) = (vec![0usize; k], vec![0usize; k], vec![0usize; k]);
    let mut present = vec![false; k];
    for c in (0..labels.len()).filter(|c| mask[*c]) {
        let truth = labels[c] as usize - 1;
        let pred = belief.argmax(c) as usize - 1;
        present[truth] = true;
        if truth == pred {
            tp[truth] += 1;
        } else {
            fn_[truth] += 1;
            fp[pred] += 1;
        }
    }
    let (mut iou, mut f1, mut count) = (T::zero(), T::zero(), 0);
    for f in (0..k).filter(|f| present[*f]) {
        let t = T::from_count(tp[f]);
        iou += t / T::from_count(tp[f] + fp[f] + fn_[f]);
        f1 += T::lit(2.0) * t / T::from_count(2 * tp[f] + fp[f] + fn_[f]);
        count += 1;
    }
    let scale = T::lit(100.0) / T::from_count(count);
    Ok((iou * scale, f1 * scale))
}

/// Final metrics of one mission; the continuous and discrete blocks are
/// mutually exclusive.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub ii: f64,
    pub unc: f64,
    pub mll: Option<f64>,
    pub rmse: Option<f64>,
    pub miou: Option<f64>,
    pub f1: Option<f64>,
}

impl MetricsRecord {
    /// Column order of [`MetricsRecord::csv_row`].
    pub const CSV_HEADER: &'static str = "II,Unc,MLL,RMSE,mIoU,F1";

    /// Values in `CSV_HEADER` order; non-applicable metrics are empty.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.ii,
            self.unc,
            opt(self.mll),
            opt(self.rmse),
            opt(self.miou),
            opt(self.f1)
        )
    }

    pub fn values(&self) -> [Option<f64>; 6] {
        [Some(self.ii), Some(self.unc), self.mll, self.rmse, self.miou, self.f1]
    }

    pub fn from_values(v: [Option<f64>; 6]) -> Self {
        MetricsRecord {
            ii: v[0].unwrap_or(f64::NAN),
            unc: v[1].unwrap_or(f64::NAN),
            mll: v[2],
            rmse: v[3],
            miou: v[4],
            f1: v[5],
        }
    }
}
