//! Multiple linear regression of final rank on static and emotional features,
//! and the full-versus-reduced model comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BurstinessReport, Emotion, TeamMetadata};
use crate::temporal::mean_std;

pub const INTERCEPT: &str = "intercept";

/// Smallest singular value allowed, relative to the largest, after scaling
/// every column to unit norm.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Regressors with an intercept column first, plus the response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    rows: Vec<String>,
    columns: Vec<String>,
    /// Row-major, `rows × columns`.
    values: Vec<f64>,
    response_name: String,
    response: Vec<f64>,
}

impl DesignMatrix {
    /// Builds a design from per-row predictor values; the intercept is prepended.
    pub fn new(
        rows: Vec<String>,
        predictors: Vec<String>,
        values: Vec<Vec<f64>>,
        response_name: impl Into<String>,
        response: Vec<f64>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("design matrix has no rows"));
        }
        if rows.len() != values.len() || rows.len() != response.len() {
            return Err(Error::InvalidParameter(
                "rows, values and response lengths differ".into(),
            ));
        }
        if predictors.iter().any(|p| p == INTERCEPT) {
            return Err(Error::InvalidParameter(
                "`intercept` is added automatically".into(),
            ));
        }
        let mut flat = Vec::with_capacity(rows.len() * (predictors.len() + 1));
        for (r, row) in values.iter().enumerate() {
            if row.len() != predictors.len() {
                return Err(Error::InvalidParameter(format!(
                    "row `{}` has {} values, expected {}",
                    rows[r],
                    row.len(),
                    predictors.len()
                )));
            }
            flat.push(1.0);
            flat.extend_from_slice(row);
        }
        if let Some(i) = flat.iter().chain(&response).position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value at flat index {i}"
            )));
        }
        let mut columns = vec![INTERCEPT.to_string()];
        columns.extend(predictors);
        Ok(Self {
            rows,
            columns,
            values: flat,
            response_name: response_name.into(),
            response,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(
            (0..self.n_rows())
                .map(|r| self.values[r * self.n_cols() + c])
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_rows(), self.n_cols(), &self.values)
    }

    /// The same design without one non-intercept column.
    pub fn drop_column(&self, name: &str) -> Result<Self> {
        if name == INTERCEPT {
            return Err(Error::InvalidParameter(
                "the intercept cannot be dropped".into(),
            ));
        }
        let c = self
            .columns
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownPredictor(name.to_string()))?;
        let p = self.n_cols();
        let values = self
            .values
            .chunks(p)
            .flat_map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, v)| *v)
            })
            .collect();
        let mut columns = self.columns.clone();
        columns.remove(c);
        Ok(Self {
            rows: self.rows.clone(),
            columns,
            values,
            response_name: self.response_name.clone(),
            response: self.response.clone(),
        })
    }

    /// Multiplies one column by `factor` and adds `shift` (for invariance checks).
    pub fn rescale_column(&self, name: &str, factor: f64, shift: f64) -> Result<Self> {
        let c = self
            .columns
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownPredictor(name.to_string()))?;
        let mut out = self.clone();
        let p = self.n_cols();
        for r in 0..self.n_rows() {
            let v = &mut out.values[r * p + c];
            *v = *v * factor + shift;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    /// Coefficient for the z-scored predictor (`estimate · σ_x`); the
    /// intercept's entry is the response mean.
    pub standardized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub response_name: String,
    pub rows: Vec<String>,
    pub coefficients: Vec<Coefficient>,
    pub response: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `None` when the response has zero variance.
    pub r_squared: Option<f64>,
    pub rmse: f64,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.estimate)
    }
}

fn sum_sq_about_mean(v: &[f64]) -> f64 {
    let (_, sd) = mean_std(v);
    sd * sd * v.len() as f64
}

/// Ordinary least squares on unit-norm columns: SVD for the rank check,
/// Householder QR for the solve.
pub fn fit_ols(dm: &DesignMatrix) -> Result<FitResult> {
    let (n, p) = (dm.n_rows(), dm.n_cols());
    if n < p + 1 {
        return Err(Error::TooFewObservations {
            rows: n,
            columns: p,
            needed: p + 1,
        });
    }
    let x = dm.to_matrix();
    let norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    if let Some(j) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::RankDeficient {
            columns: vec![dm.columns[j].clone()],
        });
    }
    let mut scaled = x.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= norms[j];
    }
    let scaled_for_qr = scaled.clone();
    let svd = scaled.svd(false, true);
    let s = &svd.singular_values;
    let smax = s.max();
    let v_t = svd.v_t.as_ref().expect("V requested");
    let mut collinear = std::collections::BTreeSet::new();
    for (k, &sv) in s.iter().enumerate() {
        if sv <= RANK_TOLERANCE * smax {
            for j in 0..p {
                if v_t[(k, j)].abs() > 1e-6 {
                    collinear.insert(j);
                }
            }
        }
    }
    if !collinear.is_empty() {
        return Err(Error::RankDeficient {
            columns: collinear
                .into_iter()
                .map(|j| dm.columns[j].clone())
                .collect(),
        });
    }

    let y = DVector::from_column_slice(&dm.response);
    let qr = scaled_for_qr.qr();
    let qty = qr.q().transpose() * &y;
    let gamma = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::DegenerateSequence("triangular solve failed".into()))?;
    let beta: Vec<f64> = gamma.iter().zip(&norms).map(|(g, s)| g / s).collect();
    let fitted_v = &x * DVector::from_column_slice(&beta);
    let fitted: Vec<f64> = fitted_v.iter().copied().collect();
    let residuals: Vec<f64> = dm
        .response
        .iter()
        .zip(&fitted)
        .map(|(y, f)| y - f)
        .collect();

    let (y_mean, _) = mean_std(&dm.response);
    let coefficients = dm
        .columns
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let standardized = if j == 0 {
                y_mean
            } else {
                let col: Vec<f64> = x.column(j).iter().copied().collect();
                beta[j] * mean_std(&col).1
            };
            Coefficient {
                name: name.clone(),
                estimate: beta[j],
                standardized,
            }
        })
        .collect();

    let mut fit = FitResult {
        response_name: dm.response_name.clone(),
        rows: dm.rows.clone(),
        coefficients,
        response: dm.response.clone(),
        fitted,
        residuals,
        r_squared: None,
        rmse: 0.0,
    };
    fit.r_squared = r_squared(&fit).ok();
    fit.rmse = rmse(&fit);
    Ok(fit)
}

/// `1 − SS_res / SS_tot`.
pub fn r_squared(fit: &FitResult) -> Result<f64> {
    let ss_tot = sum_sq_about_mean(&fit.response);
    if ss_tot == 0.0 {
        return Err(Error::UndefinedRSquared);
    }
    let ss_res: f64 = fit.residuals.iter().map(|e| e * e).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Root mean squared residual with divisor `n`.
pub fn rmse(fit: &FitResult) -> f64 {
    let n = fit.residuals.len() as f64;
    (fit.residuals.iter().map(|e| e * e).sum::<f64>() / n).sqrt()
}

/// Full and reduced fits and their relative change in quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub dropped: String,
    pub full: FitResult,
    pub reduced: FitResult,
    /// `100 · (R²_full − R²_reduced) / R²_full`; `None` if R²_full is zero or undefined.
    pub delta_r2_pct: Option<f64>,
    /// `100 · (RMSE_reduced − RMSE_full) / RMSE_full`; `None` for a perfect full fit.
    pub delta_rmse_pct: Option<f64>,
}

pub fn ablation_compare(full: &DesignMatrix, drop: &str) -> Result<Ablation> {
    let reduced_dm = full.drop_column(drop)?;
    let full_fit = fit_ols(full)?;
    let reduced_fit = fit_ols(&reduced_dm)?;
    let delta_r2_pct = match (full_fit.r_squared, reduced_fit.r_squared) {
        (Some(f), Some(r)) if f != 0.0 => Some(100.0 * (f - r) / f),
        _ => None,
    };
    let delta_rmse_pct =
        (full_fit.rmse != 0.0).then(|| 100.0 * (reduced_fit.rmse - full_fit.rmse) / full_fit.rmse);
    Ok(Ablation {
        dropped: drop.to_string(),
        full: full_fit,
        reduced: reduced_fit,
        delta_r2_pct,
        delta_rmse_pct,
    })
}

/// Variables available as regressors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Predictor {
    Heritage,
    Pci,
    Unemployment,
    Welfare,
    MarketValue,
    /// Finite-size burstiness of an emotion.
    Burstiness(Emotion),
    /// Lag-1 memory of an emotion.
    Memory(Emotion),
}

impl Predictor {
    pub const FULL_MODEL: [Predictor; 5] = [
        Predictor::Heritage,
        Predictor::Pci,
        Predictor::MarketValue,
        Predictor::Welfare,
        Predictor::Burstiness(Emotion::Joy),
    ];

    fn value(
        &self,
        meta: &TeamMetadata,
        reports: &BTreeMap<(&str, Emotion), &BurstinessReport>,
    ) -> Option<f64> {
        let report = |e: Emotion| reports.get(&(meta.team_id.as_str(), e)).copied();
        match self {
            Predictor::Heritage => Some(f64::from(meta.heritage_rank)),
            Predictor::Pci => Some(meta.pci),
            Predictor::Unemployment => Some(meta.unemployment),
            Predictor::Welfare => Some(meta.welfare),
            Predictor::MarketValue => Some(meta.market_value),
            Predictor::Burstiness(e) => report(*e).map(|r| r.b_n).filter(|v| v.is_finite()),
            Predictor::Memory(e) => report(*e).and_then(|r| r.memory),
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predictor::Heritage => f.write_str("heritage"),
            Predictor::Pci => f.write_str("pci"),
            Predictor::Unemployment => f.write_str("unemployment"),
            Predictor::Welfare => f.write_str("welfare"),
            Predictor::MarketValue => f.write_str("mv"),
            Predictor::Burstiness(e) => write!(f, "b_{e}"),
            Predictor::Memory(e) => write!(f, "m_{e}"),
        }
    }
}

impl FromStr for Predictor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "heritage" | "r_h" => Predictor::Heritage,
            "pci" => Predictor::Pci,
            "unemployment" | "u" => Predictor::Unemployment,
            "welfare" | "w" => Predictor::Welfare,
            "mv" | "market_value" => Predictor::MarketValue,
            other => {
                if let Some(e) = other.strip_prefix("b_") {
                    Predictor::Burstiness(
                        e.parse().map_err(|_| Error::UnknownPredictor(s.clone()))?,
                    )
                } else if let Some(e) = other.strip_prefix("m_") {
                    Predictor::Memory(e.parse().map_err(|_| Error::UnknownPredictor(s.clone()))?)
                } else {
                    return Err(Error::UnknownPredictor(s));
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Response {
    FinalRank,
    DeltaMv,
    DeltaPci,
}

impl Response {
    fn value(&self, m: &TeamMetadata) -> f64 {
        match self {
            Response::FinalRank => f64::from(m.final_rank),
            Response::DeltaMv => m.delta_mv() as f64,
            Response::DeltaPci => m.delta_pci() as f64,
        }
    }
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Response::FinalRank => "final_rank",
            Response::DeltaMv => "delta_mv",
            Response::DeltaPci => "delta_pci",
        })
    }
}

impl FromStr for Response {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "final_rank" | "rank" => Ok(Response::FinalRank),
            "delta_mv" => Ok(Response::DeltaMv),
            "delta_pci" => Ok(Response::DeltaPci),
            other => Err(Error::InvalidParameter(format!(
                "unknown response `{other}`"
            ))),
        }
    }
}

/// A team left out of a design because a predictor was undefined for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub team_id: String,
    pub predictor: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBuild {
    pub design: DesignMatrix,
    pub excluded: Vec<Exclusion>,
}

/// Assembles a design over the given teams. Teams lacking a value for some
/// predictor (e.g. too few events for burstiness) are excluded and reported.
pub fn build_design(
    meta: &[TeamMetadata],
    reports: &[BurstinessReport],
    response: Response,
    predictors: &[Predictor],
) -> Result<ModelBuild> {
    let index: BTreeMap<(&str, Emotion), &BurstinessReport> = reports
        .iter()
        .map(|r| ((r.team_id.as_str(), r.emotion), r))
        .collect();
    let mut rows = Vec::new();
    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut excluded = Vec::new();
    'teams: for m in meta {
        let mut row = Vec::with_capacity(predictors.len());
        for p in predictors {
            match p.value(m, &index) {
                Some(v) => row.push(v),
                None => {
                    log::warn!("excluding team `{}`: `{p}` is undefined", m.team_id);
                    excluded.push(Exclusion {
                        team_id: m.team_id.clone(),
                        predictor: p.to_string(),
                    });
                    continue 'teams;
                }
            }
        }
        rows.push(m.team_id.clone());
        values.push(row);
        y.push(response.value(m));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("no team has every predictor defined"));
    }
    let design = DesignMatrix::new(
        rows,
        predictors.iter().map(Predictor::to_string).collect(),
        values,
        response.to_string(),
        y,
    )?;
    Ok(ModelBuild { design, excluded })
}

/// Final rank on heritage, PCI, market value, welfare and joy burstiness.
pub fn build_full_model(meta: &[TeamMetadata], reports: &[BurstinessReport]) -> Result<ModelBuild> {
    build_design(meta, reports, Response::FinalRank, &Predictor::FULL_MODEL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assign_expected_ranks, Geo, League};
    use crate::simulate::rng_from_seed;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    /// Normal equations `XᵀX β = Xᵀy` by Gaussian elimination with partial pivoting.
    fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let p = x[0].len();
        let mut a = vec![vec![0.0; p + 1]; p];
        for (row, &yi) in x.iter().zip(y) {
            for i in 0..p {
                for j in 0..p {
                    a[i][j] += row[i] * row[j];
                }
                a[i][p] += row[i] * yi;
            }
        }
        for c in 0..p {
            let pivot = (c..p)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            a.swap(c, pivot);
            for r in 0..p {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    let pivot = a[c].clone();
                    for (v, pv) in a[r].iter_mut().zip(&pivot).skip(c) {
                        *v -= f * pv;
                    }
                }
            }
        }
        (0..p).map(|i| a[i][p] / a[i][i]).collect()
    }

    fn random_system(seed: u64, n: usize, p: usize) -> (DesignMatrix, Vec<Vec<f64>>) {
        let mut rng = rng_from_seed(seed);
        let values: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let full: Vec<Vec<f64>> = values
            .iter()
            .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
            .collect();
        let dm = DesignMatrix::new(
            (0..n).map(|i| format!("r{i}")).collect(),
            (0..p).map(|j| format!("x{j}")).collect(),
            values,
            "y",
            y,
        )
        .unwrap();
        (dm, full)
    }

    fn line(xs: &[f64], ys: &[f64]) -> DesignMatrix {
        DesignMatrix::new(
            (0..xs.len()).map(|i| i.to_string()).collect(),
            vec!["x".into()],
            xs.iter().map(|&x| vec![x]).collect(),
            "y",
            ys.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = fit_ols(&line(&xs, &ys)).unwrap();
        assert_relative_eq!(fit.coefficient("intercept").unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.coefficient("x").unwrap(), 2.0, epsilon = 1e-12);
        assert!(fit.residuals.iter().all(|e| e.abs() < 1e-12));
        assert_relative_eq!(r_squared(&fit).unwrap(), 1.0, epsilon = 1e-12);
        assert!(rmse(&fit) < 1e-12);
    }

    #[test]
    fn constant_response() {
        let fit = fit_ols(&line(&[1.0, 2.0, 3.0, 5.0], &[4.0; 4])).unwrap();
        assert_relative_eq!(fit.coefficient("intercept").unwrap(), 4.0, epsilon = 1e-12);
        assert!(fit.coefficient("x").unwrap().abs() < 1e-12);
        assert_eq!(fit.r_squared, None);
        assert!(matches!(r_squared(&fit), Err(Error::UndefinedRSquared)));
    }

    #[test]
    fn intercept_only_model() {
        let dm = DesignMatrix::new(
            (0..4).map(|i| i.to_string()).collect(),
            vec![],
            vec![vec![]; 4],
            "y",
            vec![1.0, 2.0, 4.0, 9.0],
        )
        .unwrap();
        let fit = fit_ols(&dm).unwrap();
        assert!(r_squared(&fit).unwrap().abs() < 1e-12);
        // RMSE of the mean prediction is the population standard deviation.
        let (_, sd) = mean_std(&[1.0, 2.0, 4.0, 9.0]);
        assert_relative_eq!(rmse(&fit), sd, epsilon = 1e-12);
    }

    #[test]
    fn matches_normal_equations() {
        let (dm, x) = random_system(17, 20, 3);
        let fit = fit_ols(&dm).unwrap();
        let oracle = normal_equations(&x, dm.response());
        for (c, o) in fit.coefficients.iter().zip(&oracle) {
            assert!((c.estimate - o).abs() < 1e-8, "{} vs {o}", c.estimate);
        }
        let ss_res: f64 = x
            .iter()
            .zip(dm.response())
            .map(|(row, y)| (y - row.iter().zip(&oracle).map(|(a, b)| a * b).sum::<f64>()).powi(2))
            .sum();
        let ss_tot = sum_sq_about_mean(dm.response());
        assert!((r_squared(&fit).unwrap() - (1.0 - ss_res / ss_tot)).abs() < 1e-10);
        assert!((rmse(&fit) - (ss_res / 20.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn rank_deficiency_names_columns() {
        let rows: Vec<String> = (0..6).map(|i| i.to_string()).collect();
        let values: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64, 2.0 * i as f64, (i * i) as f64])
            .collect();
        let dm = DesignMatrix::new(
            rows,
            vec!["a".into(), "b".into(), "c".into()],
            values,
            "y",
            vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0],
        )
        .unwrap();
        match fit_ols(&dm) {
            Err(Error::RankDeficient { columns }) => {
                assert_eq!(columns, vec!["a".to_string(), "b".to_string()])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn needs_a_residual_degree_of_freedom() {
        let (dm, _) = random_system(3, 4, 3);
        assert!(matches!(
            fit_ols(&dm),
            Err(Error::TooFewObservations { needed: 5, .. })
        ));
    }

    fn planted(seed: u64, n: usize, noise_sd: f64) -> DesignMatrix {
        let mut rng = rng_from_seed(seed);
        let noise = Normal::new(0.0, noise_sd).unwrap();
        let mut values = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let x: f64 = rng.random_range(0.0..10.0);
            let junk: f64 = rng.random_range(0.0..10.0);
            values.push(vec![x, junk]);
            y.push(3.0 * x + noise.sample(&mut rng));
        }
        DesignMatrix::new(
            (0..n).map(|i| i.to_string()).collect(),
            vec!["x".into(), "noise".into()],
            values,
            "y",
            y,
        )
        .unwrap()
    }

    #[test]
    fn ablation_of_noise_and_signal() {
        let dm = planted(5, 400, 1.0);
        let noise = ablation_compare(&dm, "noise").unwrap();
        assert!(
            noise.delta_r2_pct.unwrap().abs() < 0.5,
            "{:?}",
            noise.delta_r2_pct
        );
        let signal = ablation_compare(&dm, "x").unwrap();
        assert!(signal.delta_r2_pct.unwrap() > 90.0);
        assert!(signal.delta_rmse_pct.unwrap() > 100.0);
        // Dropping then refitting the full design is deterministic.
        assert_eq!(fit_ols(&dm).unwrap(), noise.full);
        assert!(dm.drop_column("intercept").is_err());
        assert!(matches!(
            dm.drop_column("zzz"),
            Err(Error::UnknownPredictor(_))
        ));
    }

    fn team(id: &str, rank: u32, heritage: u32) -> TeamMetadata {
        TeamMetadata {
            team_id: id.into(),
            league: League::B,
            geo: Geo::North,
            pci: 15_000.0 + 1000.0 * f64::from(heritage % 5),
            unemployment: 0.05,
            welfare: 100.0 + 7.0 * f64::from(rank * heritage % 11),
            market_value: 1e6 * f64::from(20 - heritage + rank * 3 % 7),
            heritage_rank: heritage,
            final_rank: rank,
            mv_rank: 0,
            pci_rank: 0,
        }
    }

    fn report(team: &str, b_n: f64) -> BurstinessReport {
        BurstinessReport {
            team_id: team.into(),
            emotion: Emotion::Joy,
            n_tau: 10,
            mu_tau: 1.0,
            sigma_tau: 1.0,
            r: 1.0,
            b: 0.0,
            b_n,
            memory: None,
            lag: 1,
        }
    }

    fn league(n: u32) -> (Vec<TeamMetadata>, Vec<BurstinessReport>) {
        let mut meta: Vec<_> = (1..=n)
            .map(|i| team(&format!("t{i}"), i, (i * 5) % n + 1))
            .collect();
        assign_expected_ranks(&mut meta);
        let reports = (1..=n)
            .map(|i| report(&format!("t{i}"), -0.5 + 0.07 * f64::from(i * 3 % n)))
            .collect();
        (meta, reports)
    }

    #[test]
    fn full_model_shape_and_exclusions() {
        let (meta, reports) = league(6);
        let build = build_full_model(&meta, &reports).unwrap();
        assert_eq!((build.design.n_rows(), build.design.n_cols()), (6, 6));
        assert_eq!(
            build.design.columns(),
            &["intercept", "heritage", "pci", "mv", "welfare", "b_joy"]
        );

        let build = build_full_model(&meta, &reports[1..]).unwrap();
        assert_eq!(build.design.n_rows(), 5);
        assert_eq!(
            build.excluded,
            vec![Exclusion {
                team_id: "t1".into(),
                predictor: "b_joy".into()
            }]
        );

        assert!(build_full_model(&meta, &[]).is_err());
    }

    #[test]
    fn column_scaling_preserves_r_squared() {
        let (meta, reports) = league(14);
        let dm = build_full_model(&meta, &reports).unwrap().design;
        let base = fit_ols(&dm).unwrap();
        let scaled = dm
            .rescale_column("mv", 1e-6, 0.0)
            .unwrap()
            .rescale_column("pci", 3.0, -100.0)
            .unwrap();
        let other = fit_ols(&scaled).unwrap();
        assert!((base.r_squared.unwrap() - other.r_squared.unwrap()).abs() < 1e-10);
        assert!((base.rmse - other.rmse).abs() < 1e-10);
        assert_relative_eq!(
            other.coefficient("mv").unwrap(),
            base.coefficient("mv").unwrap() * 1e6,
            max_relative = 1e-8
        );
    }

    #[test]
    fn predictor_names_round_trip() {
        for p in Predictor::FULL_MODEL
            .iter()
            .chain(&[Predictor::Unemployment, Predictor::Memory(Emotion::Anger)])
        {
            assert_eq!(&p.to_string().parse::<Predictor>().unwrap(), p);
        }
        assert!("b_love".parse::<Predictor>().is_err());
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_and_sums_of_squares_add(seed in 0u64..1000) {
            let (dm, x) = random_system(seed, 15, 3);
            let fit = fit_ols(&dm).unwrap();
            for j in 0..dm.n_cols() {
                let dot: f64 = x.iter().zip(&fit.residuals).map(|(r, e)| r[j] * e).sum();
                let scale: f64 = x.iter().map(|r| r[j].abs()).sum::<f64>() * fit.residuals.iter().map(|e| e.abs()).fold(0.0, f64::max);
                prop_assert!(dot.abs() < 1e-8 * scale.max(1.0));
            }
            let (ybar, _) = mean_std(dm.response());
            let ss_exp: f64 = fit.fitted.iter().map(|f| (f - ybar).powi(2)).sum();
            let ss_tot = sum_sq_about_mean(dm.response());
            prop_assert!((fit.rmse.powi(2) * 15.0 + ss_exp - ss_tot).abs() < 1e-8 * ss_tot.max(1.0));
        }

        #[test]
        fn nested_models_never_lose_r_squared(seed in 0u64..1000) {
            let (dm, _) = random_system(seed, 12, 4);
            let full = fit_ols(&dm).unwrap().r_squared.unwrap();
            let reduced = fit_ols(&dm.drop_column("x3").unwrap()).unwrap().r_squared.unwrap();
            prop_assert!(full >= reduced - 1e-12);
        }

        #[test]
        fn affine_rescaling_keeps_fit(seed in 0u64..1000, factor in 0.01f64..100.0, shift in -50.0f64..50.0) {
            let (dm, _) = random_system(seed, 12, 2);
            let a = fit_ols(&dm).unwrap();
            let b = fit_ols(&dm.rescale_column("x1", factor, shift).unwrap()).unwrap();
            for (fa, fb) in a.fitted.iter().zip(&b.fitted) {
                prop_assert!((fa - fb).abs() < 1e-10);
            }
            prop_assert!((a.rmse - b.rmse).abs() < 1e-10);
            prop_assert!((a.r_squared.unwrap() - b.r_squared.unwrap()).abs() < 1e-10);
        }
    }
}
