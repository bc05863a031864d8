//! Bound curves over the one-parameter qubit-pair family and their CSV form.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::purification::PairQuantities;
use crate::states::figure_example;

pub const CSV_HEADER: &str = "theta,trace_distance,wcd,fidelity,lower,upper_const,upper_uhlmann";

/// Significant digits kept in CSV output.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub trace_distance: f64,
    pub wcd: f64,
    pub fidelity: f64,
    pub lower: f64,
    pub upper_const: f64,
    pub upper_uhlmann: f64,
}

impl SweepRow {
    pub fn at(theta: f64) -> Result<Self> {
        let e = figure_example(theta)?;
        let (a, b) = (&e.states()[0], &e.states()[1]);
        let q = PairQuantities::compute(a, b)?;
        let bounds = q.bounds(e.priors()[0].min(e.priors()[1]));
        Ok(Self {
            theta,
            trace_distance: q.trace_distance,
            wcd: q.wcd,
            fidelity: q.fidelity,
            lower: bounds.lower,
            upper_const: bounds.upper_const,
            upper_uhlmann: bounds.upper_uhlmann,
        })
    }

    fn fields(&self) -> [f64; 7] {
        [
            self.theta,
            self.trace_distance,
            self.wcd,
            self.fidelity,
            self.lower,
            self.upper_const,
            self.upper_uhlmann,
        ]
    }

    pub fn csv_line(&self) -> String {
        self.fields()
            .iter()
            .map(|&x| format_number(x))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// `steps` evenly spaced points from `start` to `end`, both included.
pub fn linspace(start: f64, end: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (end - start) / (steps - 1) as f64;
            (0..steps)
                .map(|i| {
                    if i == steps - 1 {
                        end
                    } else {
                        start + h * i as f64
                    }
                })
                .collect()
        }
    }
}

pub fn validate_range(theta_min: f64, theta_max: f64, steps: usize) -> Result<()> {
    if !(theta_min.is_finite() && theta_max.is_finite()) {
        return Err(Error::InvalidArgument("theta bounds must be finite".into()));
    }
    if !(0.0 <= theta_min && theta_min < theta_max && theta_max <= FRAC_PI_2 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= theta-min < theta-max <= pi/2, got [{theta_min}, {theta_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    Ok(())
}

/// Rows over the grid, computed in parallel and returned in grid order.
pub fn sweep(theta_min: f64, theta_max: f64, steps: usize) -> Result<Vec<SweepRow>> {
    validate_range(theta_min, theta_max, steps)?;
    let theta_max = theta_max.min(FRAC_PI_2);
    linspace(theta_min, theta_max, steps)
        .into_par_iter()
        .map(SweepRow::at)
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    out.flush()
}

/// Shortest decimal that round-trips, after rounding to [`CSV_DIGITS`]
/// significant digits. Negative zero prints as `0`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{:.*e}", CSV_DIGITS - 1, x)
        .parse()
        .expect("scientific notation parses");
    format!("{rounded}")
}
