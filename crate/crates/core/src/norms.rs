//! Time series of the norms appearing in the decay and smoothing estimates.

use std::fmt::Write as _;

use crate::dynamics::SolverState;
use crate::error::{Result, SqgError};
use crate::field::inverse_unchecked;
use crate::spectral::{gradient_sup_spectral, l2_norm, linf_norm, sobolev_norm};

/// One sample: `t, ‖θ‖_∞, ‖θ‖_{L²}, ‖θ‖_{Ḣ¹}, ‖θ‖_{Ḣ^{3/2}}, ‖θ‖_{Ḣ²}, sup|∇θ|`
/// and one `‖θ‖_{Ḣ^{1+β}}` per configured β.
#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub t: f64,
    pub linf: f64,
    pub l2: f64,
    pub h1: f64,
    pub h3_2: f64,
    pub h2: f64,
    pub grad_sup: f64,
    pub extra: Vec<f64>,
}

/// Addresses one column of a [`NormSeries`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormColumn {
    Linf,
    L2,
    H1,
    H3_2,
    H2,
    GradSup,
    /// Index into the configured β list.
    Extra(usize),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormSeries {
    betas: Vec<f64>,
    rows: Vec<NormRow>,
}

const FIXED_HEADER: [&str; 7] = ["t", "linf", "l2", "h1", "h3_2", "h2", "grad_sup"];

impl NormSeries {
    /// Empty series with extra `Ḣ^{1+β}` columns for each `β`.
    pub fn new(betas: Vec<f64>) -> Self {
        Self {
            betas,
            rows: Vec::new(),
        }
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn rows(&self) -> &[NormRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// Appends a row; times must increase strictly and values be finite and ≥ 0.
    pub fn push(&mut self, row: NormRow) -> Result<()> {
        if row.extra.len() != self.betas.len() {
            return Err(SqgError::InvalidField(format!(
                "row has {} extra columns, series expects {}",
                row.extra.len(),
                self.betas.len()
            )));
        }
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(SqgError::Domain(format!(
                    "sample time {} does not follow {}",
                    row.t, last.t
                )));
            }
        }
        let values = [row.t, row.linf, row.l2, row.h1, row.h3_2, row.h2, row.grad_sup];
        if values.iter().chain(&row.extra).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SqgError::BlowUp {
                t: row.t,
                step: 0,
                m1: 0,
                m2: 0,
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Drops every row with `t > t_cut`.
    pub fn truncate_after(&mut self, t_cut: f64) {
        self.rows.retain(|r| r.t <= t_cut);
    }

    pub fn column(&self, col: NormColumn) -> Result<Vec<f64>> {
        if let NormColumn::Extra(i) = col {
            if i >= self.betas.len() {
                return Err(SqgError::Parameter(format!("no extra column {i}")));
            }
        }
        Ok(self.rows.iter().map(|r| r.get(col)).collect())
    }

    /// Resolves a CSV column name such as `h1`, `grad_sup`, or `h1+0.5`.
    pub fn column_by_name(&self, name: &str) -> Result<NormColumn> {
        let fixed = match name {
            "linf" => Some(NormColumn::Linf),
            "l2" => Some(NormColumn::L2),
            "h1" => Some(NormColumn::H1),
            "h3_2" => Some(NormColumn::H3_2),
            "h2" => Some(NormColumn::H2),
            "grad_sup" => Some(NormColumn::GradSup),
            _ => None,
        };
        if let Some(c) = fixed {
            return Ok(c);
        }
        self.betas
            .iter()
            .position(|b| extra_name(*b) == name)
            .map(NormColumn::Extra)
            .ok_or_else(|| SqgError::Parameter(format!("unknown norm column `{name}`")))
    }

    pub fn header(&self) -> String {
        let mut cols: Vec<String> = FIXED_HEADER.iter().map(|s| s.to_string()).collect();
        cols.extend(self.betas.iter().map(|b| extra_name(*b)));
        cols.join(",")
    }

    /// CSV with a header row and 17-significant-digit values.
    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row_to_csv(row));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| SqgError::Parameter("empty norms CSV".into()))?;
        let names: Vec<&str> = header.split(',').map(str::trim).collect();
        if names.len() < FIXED_HEADER.len() || names[..FIXED_HEADER.len()] != FIXED_HEADER {
            return Err(SqgError::Parameter(format!("unexpected norms header `{header}`")));
        }
        let betas = names[FIXED_HEADER.len()..]
            .iter()
            .map(|name| {
                name.strip_prefix("h1+")
                    .and_then(|b| b.parse::<f64>().ok())
                    .ok_or_else(|| SqgError::Parameter(format!("bad column name `{name}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut series = Self::new(betas);
        for (lineno, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| SqgError::Parameter(format!("row {}: {e}", lineno + 2)))?;
            if vals.len() != names.len() {
                return Err(SqgError::Parameter(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 2,
                    vals.len(),
                    names.len()
                )));
            }
            series.push(NormRow {
                t: vals[0],
                linf: vals[1],
                l2: vals[2],
                h1: vals[3],
                h3_2: vals[4],
                h2: vals[5],
                grad_sup: vals[6],
                extra: vals[7..].to_vec(),
            })?;
        }
        Ok(series)
    }
}

impl NormRow {
    /// One CSV line in header order, without the trailing newline.
    pub fn to_csv_line(&self) -> String {
        row_to_csv(self)
    }

    pub fn get(&self, col: NormColumn) -> f64 {
        match col {
            NormColumn::Linf => self.linf,
            NormColumn::L2 => self.l2,
            NormColumn::H1 => self.h1,
            NormColumn::H3_2 => self.h3_2,
            NormColumn::H2 => self.h2,
            NormColumn::GradSup => self.grad_sup,
            NormColumn::Extra(i) => self.extra[i],
        }
    }
}

fn extra_name(beta: f64) -> String {
    format!("h1+{beta}")
}

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn row_to_csv(row: &NormRow) -> String {
    let mut s = String::new();
    let fixed = [row.t, row.linf, row.l2, row.h1, row.h3_2, row.h2, row.grad_sup];
    for (i, v) in fixed.iter().chain(&row.extra).enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{}", format_f64(*v));
    }
    s
}

/// Computes every configured norm of `state.theta` at `state.t`.
pub fn norm_row(state: &SolverState, betas: &[f64]) -> Result<NormRow> {
    let theta = &state.theta;
    let real = inverse_unchecked(theta);
    let extra = betas
        .iter()
        .map(|b| sobolev_norm(theta, 1.0 + b))
        .collect::<Result<Vec<f64>>>()?;
    Ok(NormRow {
        t: state.t,
        linf: linf_norm(&real),
        l2: l2_norm(&real),
        h1: sobolev_norm(theta, 1.0)?,
        h3_2: sobolev_norm(theta, 1.5)?,
        h2: sobolev_norm(theta, 2.0)?,
        grad_sup: gradient_sup_spectral(theta),
        extra,
    })
}

/// Appends one row for `state` to `series`.
///
/// A non-finite norm is reported as a blow-up at `state.t`.
pub fn record_norms(state: &SolverState, series: &mut NormSeries) -> Result<()> {
    let row = norm_row(state, &series.betas)?;
    series.push(row).map_err(|e| match e {
        SqgError::BlowUp { .. } => SqgError::BlowUp {
            t: state.t,
            step: state.step_count,
            m1: 0,
            m2: 0,
        },
        other => other,
    })
}
