//! Data series behind each figure, one row type per figure family.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use poik::fit::{delta_k_eval, residual_report, DeltaFit, FitModel, MuSample, SeriesFit};
use poik::solver::{solve_lambda_star, SolveMethod};
use poik::sweep::{default_n_lo, sweep_base_median_diff, sweep_nu_mu};
use poik::{Record, Residuals, Result, SolveResult};

use crate::output::{Format, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub k: u64,
    pub nu: u64,
    pub lambda_star: f64,
    pub mu_star: f64,
    pub method: SolveMethod,
}

impl From<&SolveResult> for BoundaryRow {
    fn from(r: &SolveResult) -> Self {
        Self {
            k: r.k,
            nu: r.nu,
            lambda_star: r.lambda_star,
            mu_star: r.mu_star,
            method: r.method,
        }
    }
}

/// `μ_{k,*} − k − Δ_k` at `ν = k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaResidualRow {
    pub k: u64,
    pub mu_star: f64,
    pub delta_k: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledMeanRow {
    pub k: u64,
    pub nu: u64,
    /// `ν/k`
    pub x: f64,
    /// `μ_{ν,*}/(k+1)`
    pub scaled_mean: f64,
    /// Published cubic at `x`.
    pub series: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResidualRow {
    pub k: u64,
    pub nu: u64,
    pub x: f64,
    pub residual: f64,
}

pub enum FigureData {
    Boundary(Vec<BoundaryRow>),
    DeltaResidual(Vec<DeltaResidualRow>, Residuals),
    ScaledMean(Vec<ScaledMeanRow>),
    SeriesResidual(Vec<SeriesResidualRow>, Residuals),
    Sweep(Vec<Record>),
}

impl FigureData {
    pub fn len(&self) -> usize {
        match self {
            Self::Boundary(r) => r.len(),
            Self::DeltaResidual(r, _) => r.len(),
            Self::ScaledMean(r) => r.len(),
            Self::SeriesResidual(r, _) => r.len(),
            Self::Sweep(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Residual summary for the residual figures.
    pub fn residuals(&self) -> Option<&Residuals> {
        match self {
            Self::DeltaResidual(_, r) | Self::SeriesResidual(_, r) => Some(r),
            _ => None,
        }
    }

    pub fn write(&self, sink: &Sink, format: Format) -> std::io::Result<()> {
        match self {
            Self::Boundary(r) => sink.rows(r, format),
            Self::DeltaResidual(r, _) => sink.rows(r, format),
            Self::ScaledMean(r) => sink.rows(r, format),
            Self::SeriesResidual(r, _) => sink.rows(r, format),
            Self::Sweep(r) => sink.rows(r, format),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FigureConfig {
    /// Overrides the figure's default order(s).
    pub k_list: Option<Vec<u64>>,
    /// Upper integer mean for figures 7–9 (default is a multiple of `k`).
    pub n_max: Option<u64>,
    /// Full published `k` range for figure 4.
    pub full_scale: bool,
}

/// Largest order in the `ν = k` sweeps of figures 3 and 4.
pub const FULL_SCALE_K: u64 = 10_000;
/// Figure 4 stops here unless `full_scale` is set.
pub const DESK_SCALE_K: u64 = 2000;

pub fn default_k_list(id: u8, full_scale: bool) -> Vec<u64> {
    match id {
        1 => vec![20],
        2 => (2..=100).collect(),
        3 => (2..=FULL_SCALE_K).collect(),
        4 if full_scale => (2..=FULL_SCALE_K).collect(),
        4 => (2..=DESK_SCALE_K).collect(),
        5 | 6 => vec![100, 500, 1000, 2000],
        7 => vec![100, 200, 300, 400, 500],
        8 | 9 => vec![1000, 2000, 5000, 10_000],
        _ => Vec::new(),
    }
}

/// `n/k` extent of the sweeps in figures 7–9.
fn default_n_over_k(id: u8) -> u64 {
    if id == 9 {
        5
    } else {
        10
    }
}

pub fn figure(id: u8, config: &FigureConfig) -> Result<FigureData> {
    let ks = config
        .k_list
        .clone()
        .unwrap_or_else(|| default_k_list(id, config.full_scale));
    match id {
        1 => {
            let mut rows = Vec::new();
            for &k in &ks {
                rows.extend(sweep_nu_mu::<f64>(k, 2 * k)?.iter().map(BoundaryRow::from));
            }
            Ok(FigureData::Boundary(rows))
        }
        2 | 3 => Ok(FigureData::Boundary(
            nu_equals_k(&ks)?.iter().map(BoundaryRow::from).collect(),
        )),
        4 => {
            let published = DeltaFit::<f64>::published();
            let solved = nu_equals_k(&ks)?;
            let samples: Vec<MuSample<f64>> = solved.iter().map(MuSample::from).collect();
            let report = residual_report(&FitModel::DeltaK(published), &samples);
            let rows = solved
                .iter()
                .zip(&report.points)
                .map(|(r, &(_, residual))| DeltaResidualRow {
                    k: r.k,
                    mu_star: r.mu_star,
                    delta_k: delta_k_eval(&published, r.k),
                    residual,
                })
                .collect();
            Ok(FigureData::DeltaResidual(rows, report))
        }
        5 | 6 => {
            let published = SeriesFit::<f64>::published();
            let grid: Vec<(u64, u64)> = ks.iter().flat_map(|&k| (0..=k).map(move |nu| (k, nu))).collect();
            let solved: Vec<SolveResult> = grid
                .par_iter()
                .map(|&(k, nu)| solve_lambda_star(k, nu))
                .collect::<Result<_>>()?;
            let samples: Vec<MuSample<f64>> = solved.iter().map(MuSample::from).collect();
            if id == 5 {
                let rows = samples
                    .iter()
                    .map(|s| ScaledMeanRow {
                        k: s.k,
                        nu: s.nu,
                        x: s.nu as f64 / s.k as f64,
                        scaled_mean: s.mu_star / (s.k + 1) as f64,
                        series: published.scaled_mean(s.k, s.nu),
                    })
                    .collect();
                Ok(FigureData::ScaledMean(rows))
            } else {
                let report = residual_report(&FitModel::MuSeries(published), &samples);
                let rows = samples
                    .iter()
                    .zip(&report.points)
                    .map(|(s, &(x, residual))| SeriesResidualRow {
                        k: s.k,
                        nu: s.nu,
                        x,
                        residual,
                    })
                    .collect();
                Ok(FigureData::SeriesResidual(rows, report))
            }
        }
        7..=9 => {
            let mut rows = Vec::new();
            for &k in &ks {
                let n_hi = config
                    .n_max
                    .unwrap_or(default_n_over_k(id) * k)
                    .max(default_n_lo(k));
                rows.extend(sweep_base_median_diff::<f64>(k, None, n_hi)?);
            }
            Ok(FigureData::Sweep(rows))
        }
        _ => Err(poik::Error::InvalidParams(format!(
            "figure id must be in 1..=9, got {id}"
        ))),
    }
}

fn nu_equals_k(ks: &[u64]) -> Result<Vec<SolveResult>> {
    ks.par_iter().map(|&k| solve_lambda_star(k, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_one_defaults() {
        let FigureData::Boundary(rows) = figure(1, &FigureConfig::default()).unwrap() else {
            panic!("wrong row type");
        };
        assert_eq!(rows.len(), 41);
        assert_eq!(rows[0].nu, 0);
        assert!((rows[0].mu_star - 21.0 * std::f64::consts::LN_2 / 2.0).abs() < 1e-12);
        assert_eq!(rows[21].method, SolveMethod::CdfBisection);
    }

    #[test]
    fn sweep_figures_start_near_left_edge_constant() {
        let config = FigureConfig {
            k_list: Some(vec![100, 300]),
            n_max: Some(400),
            full_scale: false,
        };
        let FigureData::Sweep(rows) = figure(7, &config).unwrap() else {
            panic!("wrong row type");
        };
        for k in [100, 300] {
            let first = rows.iter().find(|r| r.k == k).unwrap();
            assert!((first.scaled_diff - 0.22).abs() < 0.02, "{first:?}");
        }
    }

    #[test]
    fn desk_scale_caps_figure_four() {
        assert_eq!(*default_k_list(4, false).last().unwrap(), DESK_SCALE_K);
        assert_eq!(*default_k_list(4, true).last().unwrap(), FULL_SCALE_K);
        assert!(figure(10, &FigureConfig::default()).is_err());
    }
}
