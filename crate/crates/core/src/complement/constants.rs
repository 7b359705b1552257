//! Closed-form projection constants of Hilbertian subspaces.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::lpspace::dual_exponent;

/// (2/√π) Γ((p+1)/2)^{1/p} Γ((p′+1)/2)^{1/p′}; +∞ at p ∈ {1, ∞}.
pub fn c2_formula(p: f64) -> Result<f64> {
    let q = dual_exponent(p)?;
    if p == 1.0 || p.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let log = (2.0 / PI.sqrt()).ln() + ln_gamma((p + 1.0) / 2.0) / p + ln_gamma((q + 1.0) / 2.0) / q;
    Ok(log.exp())
}

/// n Γ(n/2) / (√π Γ((n+1)/2)): projection constant of ℓ₂ⁿ inside L₁.
pub fn c2n_l1(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let x = n as f64;
    Ok((x.ln() + ln_gamma(x / 2.0) - 0.5 * PI.ln() - ln_gamma((x + 1.0) / 2.0)).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct C2Row {
    pub p: f64,
    pub c2: f64,
    /// Whether the step from the previous row moves away from p = 2 in the
    /// expected direction (decreasing below 2, increasing above); true on
    /// the first row.
    pub monotone_flag: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct C2Table {
    pub rows: Vec<C2Row>,
    pub all_monotone: bool,
}

/// Evaluates the constant on a grid of exponents, flagging monotonicity.
pub fn scan_c2(grid: &[f64]) -> Result<C2Table> {
    let mut rows: Vec<C2Row> = Vec::with_capacity(grid.len());
    for &p in grid {
        let c2 = c2_formula(p)?;
        let monotone_flag = match rows.last() {
            None => true,
            Some(prev) if p > prev.p => {
                if p <= 2.0 {
                    c2 < prev.c2
                } else if prev.p >= 2.0 {
                    c2 > prev.c2
                } else {
                    true
                }
            }
            Some(_) => false,
        };
        rows.push(C2Row { p, c2, monotone_flag });
    }
    let all_monotone = rows.iter().all(|r| r.monotone_flag);
    Ok(C2Table { rows, all_monotone })
}

/// Grid `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Usage(format!("bad grid `{spec}`: {e}"))))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::Usage(format!("grid `{spec}` must be start:stop:step")));
    };
    if !start.is_finite() || !stop.is_finite() || step.is_nan() || step <= 0.0 || stop < start {
        return Err(Error::Usage(format!("grid `{spec}` is empty or unbounded")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::Usage(format!("grid `{spec}` has more than a million points")));
    }
    Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

impl C2Table {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "p,c2,monotone_flag")?;
        for r in &self.rows {
            writeln!(out, "{},{},{}", r.p, r.c2, r.monotone_flag)?;
        }
        Ok(())
    }
}
