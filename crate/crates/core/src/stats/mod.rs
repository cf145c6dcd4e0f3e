//! Pearson correlation with two-tailed significance, and correlation tables
//! of metrics against human judgement dimensions.

mod render;
pub mod special;
mod table;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use render::{render_table, TableFormat};
pub use table::{build_table, CorrelationTable, RowLabel, ScoreTable, Split, TableCell, TableRow};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least 3 pairs, got {0}")]
    TooFew(usize),
    #[error("zero variance in `{0}`")]
    ZeroVariance(String),
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("no cell has at least 3 complete pairs")]
    NoCells,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSeries {
    pub label_x: String,
    pub label_y: String,
    pub pairs: Vec<(f64, f64)>,
}

impl PairedSeries {
    pub fn new(
        label_x: impl Into<String>,
        label_y: impl Into<String>,
        pairs: Vec<(f64, f64)>,
    ) -> Self {
        PairedSeries {
            label_x: label_x.into(),
            label_y: label_y.into(),
            pairs,
        }
    }

    pub fn from_columns(x: &[f64], y: &[f64]) -> Self {
        PairedSeries::new("x", "y", x.iter().copied().zip(y.iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `**` below 0.001, `*` below 0.01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stars {
    None,
    One,
    Two,
}

impl Stars {
    pub fn from_p(p: f64) -> Self {
        if p < 0.001 {
            Stars::Two
        } else if p < 0.01 {
            Stars::One
        } else {
            Stars::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub r: f64,
    pub p: f64,
    pub n: usize,
    pub stars: Stars,
}

impl CorrelationCell {
    pub fn from_r(r: f64, n: usize) -> Self {
        let p = pearson_p_value(r, n);
        CorrelationCell {
            r,
            p,
            n,
            stars: Stars::from_p(p),
        }
    }
}

/// Two-tailed p-value for a Pearson coefficient `r` over `n` pairs, from
/// Student's t with n - 2 degrees of freedom. Uses I_{1-r²}(df/2, 1/2).
pub fn pearson_p_value(r: f64, n: usize) -> f64 {
    assert!(n >= 3, "p-value needs n >= 3");
    let r = r.clamp(-1.0, 1.0);
    if r.abs() == 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let one_minus_r2 = (1.0 - r) * (1.0 + r);
    special::reg_inc_beta_with_complement(one_minus_r2, r * r, 0.5 * df, 0.5).clamp(0.0, 1.0)
}

/// Pearson's r with a two-tailed t-test p-value.
pub fn pearson(series: &PairedSeries) -> Result<CorrelationCell, StatsError> {
    let n = series.len();
    if n < 3 {
        return Err(StatsError::TooFew(n));
    }
    if series.pairs.iter().any(|(x, _)| !x.is_finite()) {
        return Err(StatsError::NonFinite(series.label_x.clone()));
    }
    if series.pairs.iter().any(|(_, y)| !y.is_finite()) {
        return Err(StatsError::NonFinite(series.label_y.clone()));
    }
    let nf = n as f64;
    let mean_x = series.pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = series.pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &series.pairs {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance(series.label_x.clone()));
    }
    if syy == 0.0 {
        return Err(StatsError::ZeroVariance(series.label_y.clone()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(CorrelationCell::from_r(r, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crafted_series() {
        let c = pearson(&PairedSeries::from_columns(
            &[1.0, 2.0, 3.0],
            &[2.0, 4.0, 6.0],
        ))
        .unwrap();
        assert!((c.r - 1.0).abs() < 1e-15);
        let c = pearson(&PairedSeries::from_columns(
            &[1.0, 2.0, 3.0],
            &[3.0, 2.0, 1.0],
        ))
        .unwrap();
        assert!((c.r + 1.0).abs() < 1e-15);
        let c = pearson(&PairedSeries::from_columns(
            &[1.0, 2.0, 3.0, 4.0],
            &[1.0, 3.0, 2.0, 4.0],
        ))
        .unwrap();
        assert!((c.r - 0.8).abs() < 1e-15);
        // df = 2: p = 1 - |t|/sqrt(2 + t²), t = 0.8·sqrt(2/0.36)
        let t = 0.8 * (2.0f64 / 0.36).sqrt();
        assert!((c.p - (1.0 - t / (2.0 + t * t).sqrt())).abs() < 1e-14);
        assert!((c.p - 0.2).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            pearson(&PairedSeries::from_columns(&[1.0, 2.0], &[1.0, 2.0])),
            Err(StatsError::TooFew(2))
        );
        assert!(matches!(
            pearson(&PairedSeries::from_columns(
                &[1.0, 1.0, 1.0],
                &[1.0, 2.0, 3.0]
            )),
            Err(StatsError::ZeroVariance(_))
        ));
        assert!(matches!(
            pearson(&PairedSeries::from_columns(
                &[1.0, f64::NAN, 1.0],
                &[1.0, 2.0, 3.0]
            )),
            Err(StatsError::NonFinite(_))
        ));
    }

    #[test]
    fn star_boundaries() {
        assert_eq!(Stars::from_p(0.01), Stars::None);
        assert_eq!(Stars::from_p(0.0099), Stars::One);
        assert_eq!(Stars::from_p(0.001), Stars::One);
        assert_eq!(Stars::from_p(0.0009), Stars::Two);
    }
}
