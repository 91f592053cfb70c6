//! Overlap and per-pixel classification metrics between an estimated
//! breast mask and its ground truth, plus corpus-level aggregation.

use std::io::Write;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// The seven segmentation metrics, each a fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub dsc: f64,
    pub jac: f64,
    pub spe: f64,
    pub sen: f64,
    pub acc: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub counts: ConfusionCounts,
}

/// Metric names in report and CSV column order.
pub const METRIC_NAMES: [&str; 7] = ["DSC", "JAC", "SPE", "SEN", "ACC", "FPR", "FNR"];

impl MetricsReport {
    pub fn values(&self) -> [f64; 7] {
        [
            self.dsc, self.jac, self.spe, self.sen, self.acc, self.fpr, self.fnr,
        ]
    }
}

/// Per-pixel agreement of an estimate `r` with ground truth `r_g`.
pub fn confusion(r: &BinaryMask, r_g: &BinaryMask) -> Result<ConfusionCounts> {
    r.check_same_shape(r_g, "estimate vs ground truth")?;
    let mut c = ConfusionCounts::default();
    for (&est, &gt) in r.data().iter().zip(r_g.data()) {
        match (est, gt) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Computes all seven metrics. Both ground-truth classes must be present,
/// otherwise the rates they normalize are undefined.
pub fn compute_metrics(c: ConfusionCounts) -> Result<MetricsReport> {
    let mut undefined = Vec::new();
    if c.tp + c.fn_ == 0 {
        undefined.extend(["SEN", "FNR"]);
    }
    if c.tn + c.fp == 0 {
        undefined.extend(["SPE", "FPR"]);
    }
    if !undefined.is_empty() {
        return Err(Error::UndefinedMetric(undefined.join(", ")));
    }
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    // |R| + |R_G| >= tp + fn > 0, so neither overlap ratio can divide by zero
    Ok(MetricsReport {
        dsc: 2.0 * tp / (2.0 * tp + fp + fn_),
        jac: tp / (tp + fp + fn_),
        spe: tn / (tn + fp),
        sen: tp / (tp + fn_),
        acc: (tp + tn) / (tp + tn + fp + fn_),
        fpr: fp / (fp + tn),
        fnr: fn_ / (fn_ + tp),
        counts: c,
    })
}

/// Convenience: [`confusion`] followed by [`compute_metrics`].
pub fn evaluate_masks(r: &BinaryMask, r_g: &BinaryMask) -> Result<MetricsReport> {
    compute_metrics(confusion(r, r_g)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub stddev: f64,
}

/// Mean and sample standard deviation of every metric, in
/// [`METRIC_NAMES`] order.
pub fn aggregate(reports: &[MetricsReport]) -> Result<[MeanStd; 7]> {
    if reports.len() < 2 {
        return Err(Error::InsufficientData(reports.len()));
    }
    let n = reports.len() as f64;
    let mut out = [MeanStd {
        mean: 0.0,
        stddev: 0.0,
    }; 7];
    // Welford's update
    let mut m2 = [0.0f64; 7];
    for (k, r) in reports.iter().enumerate() {
        for (i, v) in r.values().into_iter().enumerate() {
            let delta = v - out[i].mean;
            out[i].mean += delta / (k + 1) as f64;
            m2[i] += delta * (v - out[i].mean);
        }
    }
    for (o, m) in out.iter_mut().zip(m2) {
        o.stddev = (m / (n - 1.0)).max(0.0).sqrt();
    }
    Ok(out)
}

/// Writes one row per image (id, seven metrics, four counts) followed by a
/// `summary` row of `mean±stddev` cells. Values carry six fractional digits.
/// The summary row is omitted when fewer than two rows are present.
pub fn write_csv<W: Write>(out: W, rows: &[(String, MetricsReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Format(format!("csv: {e}"));
    let mut header: Vec<&str> = vec!["id"];
    header.extend(METRIC_NAMES);
    header.extend(["TP", "TN", "FP", "FN"]);
    w.write_record(&header).map_err(csv_err)?;
    for (id, r) in rows {
        let mut rec = vec![id.clone()];
        rec.extend(r.values().iter().map(|v| format!("{v:.6}")));
        let c = r.counts;
        rec.extend([c.tp, c.tn, c.fp, c.fn_].iter().map(u64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    if rows.len() >= 2 {
        let reports: Vec<MetricsReport> = rows.iter().map(|(_, r)| *r).collect();
        let summary = aggregate(&reports)?;
        let mut rec = vec!["summary".to_string()];
        rec.extend(
            summary
                .iter()
                .map(|s| format!("{:.6}±{:.6}", s.mean, s.stddev)),
        );
        rec.extend(std::iter::repeat_n(String::new(), 4));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::Format(format!("csv flush: {e}")))?;
    Ok(())
}
