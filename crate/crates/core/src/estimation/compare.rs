//! Side-by-side fits of one histogram with three line-shape/objective
//! combinations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::objective::ObjectiveKind;
use super::peaks::{ModelSpec, PeakShape};
use super::separable::{fit_separable, FitOptions, FitResult};
use super::EstimationError;
use crate::analysis::{visibility_from_fit, AnalysisError};
use crate::model::Histogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    ExpIrfMle,
    LorentzianLs,
    ExpIrfLs,
}

impl Pipeline {
    pub const ALL: [Pipeline; 3] = [Pipeline::ExpIrfMle, Pipeline::LorentzianLs, Pipeline::ExpIrfLs];

    pub fn label(self) -> &'static str {
        match self {
            Pipeline::ExpIrfMle => "Exp&IRF/MLE",
            Pipeline::LorentzianLs => "Lorentzian/LS",
            Pipeline::ExpIrfLs => "Exp&IRF/LS",
        }
    }

    fn shape(self) -> PeakShape {
        match self {
            Pipeline::LorentzianLs => PeakShape::Lorentzian,
            _ => PeakShape::ExpIrf,
        }
    }

    fn objective(self) -> ObjectiveKind {
        match self {
            Pipeline::ExpIrfMle => ObjectiveKind::Mle,
            _ => ObjectiveKind::Ls,
        }
    }

    /// Spec and options used by this pipeline. Least-squares fits leave the
    /// background unbounded.
    pub fn configure(self, spec: &ModelSpec, opts: &FitOptions) -> (ModelSpec, FitOptions) {
        let mut s = spec.with_shape(self.shape());
        if self.objective() == ObjectiveKind::Ls {
            s.background_lower = None;
        }
        (
            s,
            FitOptions {
                objective: self.objective(),
                ..*opts
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub pipeline: Pipeline,
    pub visibility: f64,
    /// 95 % half-width of the visibility.
    pub visibility_uncertainty: f64,
    /// Objective normalized by `n - nu`.
    pub chi2: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub const COLUMNS: [&'static str; 2] = ["Visibility", "χ²"];

    pub fn row(&self, p: Pipeline) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.pipeline == p)
    }

    /// Plain-text table with one line per pipeline.
    pub fn render(&self) -> String {
        let mut s = format!("{:<16}{:>20}{:>10}\n", "", Self::COLUMNS[0], Self::COLUMNS[1]);
        for r in &self.rows {
            let v = format!("{:.3} ± {:.3}", r.visibility, r.visibility_uncertainty);
            let _ = writeln!(s, "{:<16}{:>20}{:>10.3}", r.pipeline.label(), v, r.chi2);
        }
        s
    }
}

fn to_estimation(e: AnalysisError) -> EstimationError {
    match e {
        AnalysisError::Estimation(e) => e,
        other => EstimationError::Numerical(other.to_string()),
    }
}

/// Fits `data` with each pipeline and tabulates visibility and normalized
/// objective.
pub fn compare_fitters(data: &Histogram, spec: &ModelSpec, opts: &FitOptions) -> Result<ComparisonReport, EstimationError> {
    let y = data.counts_f64();
    let mut rows = Vec::new();
    for p in Pipeline::ALL {
        let (s, o) = p.configure(spec, opts);
        let model = s.bind(data.grid())?;
        let fit = fit_separable(&model, &y, &o)?;
        let v = visibility_from_fit(&model, &fit).map_err(to_estimation)?;
        rows.push(ComparisonRow {
            pipeline: p,
            visibility: v.v,
            visibility_uncertainty: v.uncertainty,
            chi2: fit.chi2_normalized,
            fit,
        });
    }
    Ok(ComparisonReport { rows })
}
