//! Rate grids, risk surfaces and percentile surfaces.

use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::movielens::UserProfile;
use crate::profile::{canonicalize, Pmf};
use crate::solver::{check_rates, InteriorPolicy, Solver};

/// Evenly spaced values `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "axis {lo}:{hi}:{steps} needs finite bounds and at least one step"
            )));
        }
        if steps > 1 && hi <= lo {
            return Err(Error::InvalidArgument(format!(
                "axis {lo}:{hi}:{steps} must be increasing"
            )));
        }
        Ok(Self { lo, hi, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * k as f64 / last
                }
            })
            .collect()
    }
}

/// `rho:LO:HI:N,sigma:LO:HI:N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rho: Axis,
    pub sigma: Axis,
}

impl GridSpec {
    /// `0..0.3 x 0..0.3` at 31 points per axis.
    pub fn percentile_default() -> Self {
        Self {
            rho: Axis { lo: 0.0, hi: 0.3, steps: 31 },
            sigma: Axis { lo: 0.0, hi: 0.3, steps: 31 },
        }
    }

    fn validate(&self) -> Result<()> {
        check_rates(self.rho.lo, self.sigma.lo)?;
        check_rates(self.rho.hi, self.sigma.hi)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidArgument(format!(
                "grid {s:?} should look like rho:LO:HI:N,sigma:LO:HI:N"
            ))
        };
        let mut rho = None;
        let mut sigma = None;
        for part in s.split(',') {
            let fields: Vec<&str> = part.trim().split(':').collect();
            if fields.len() != 4 {
                return Err(bad());
            }
            let lo: f64 = fields[1].parse().map_err(|_| bad())?;
            let hi: f64 = fields[2].parse().map_err(|_| bad())?;
            let n: usize = fields[3].parse().map_err(|_| bad())?;
            let axis = Axis::new(lo, hi, n)?;
            match fields[0] {
                "rho" => rho = Some(axis),
                "sigma" => sigma = Some(axis),
                _ => return Err(bad()),
            }
        }
        let spec = GridSpec {
            rho: rho.ok_or_else(bad)?,
            sigma: sigma.ok_or_else(bad)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Values on a `(rho, sigma)` grid: `values[a][b]` belongs to
/// `(rho_axis[a], sigma_axis[b])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub meta: String,
    pub rho_axis: Vec<f64>,
    pub sigma_axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

const CORNER: &str = "rho\\sigma";

impl SurfaceGrid {
    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.values[a][b]
    }

    /// CSV with a `# meta` first line, a `rho\sigma` corner cell, sigma values
    /// across and one row per rho.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.meta.replace('\n', " ")).map_err(|e| Error::io("<csv>", e))?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![CORNER.to_string()];
        header.extend(self.sigma_axis.iter().map(f64::to_string));
        w.write_record(&header)?;
        for (rho, row) in self.rho_axis.iter().zip(&self.values) {
            let mut rec = vec![rho.to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(mut source: R) -> Result<Self> {
        let mut text = String::new();
        source
            .read_to_string(&mut text)
            .map_err(|e| Error::io("<csv>", e))?;
        let (meta, body) = match text.strip_prefix("# ") {
            Some(rest) => {
                let end = rest.find('\n').unwrap_or(rest.len());
                (rest[..end].trim_end_matches('\r').to_string(), &rest[end..])
            }
            None => (String::new(), text.as_str()),
        };
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(body.trim_start().as_bytes());
        let mut rows = r.records();
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse().map_err(|_| Error::MalformedLine {
                line,
                reason: format!("not a number: {s:?}"),
            })
        };
        let header = rows.next().ok_or_else(|| Error::MalformedLine {
            line: 1,
            reason: "empty surface file".into(),
        })??;
        if header.get(0) != Some(CORNER) {
            return Err(Error::MalformedLine {
                line: 1,
                reason: format!("expected {CORNER:?} corner cell"),
            });
        }
        let sigma_axis = header.iter().skip(1).map(|s| num(s, 1)).collect::<Result<Vec<_>>>()?;
        let mut rho_axis = Vec::new();
        let mut values = Vec::new();
        for (k, rec) in rows.enumerate() {
            let rec = rec?;
            let line = k + 2;
            let cells = rec.iter().map(|s| num(s, line)).collect::<Result<Vec<_>>>()?;
            if cells.len() != sigma_axis.len() + 1 {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("expected {} cells", sigma_axis.len() + 1),
                });
            }
            rho_axis.push(cells[0]);
            values.push(cells[1..].to_vec());
        }
        Ok(Self {
            meta,
            rho_axis,
            sigma_axis,
            values,
        })
    }
}

/// Minimal risk over a grid, from the closed form.
pub fn risk_surface(solver: &Solver, spec: &GridSpec, policy: InteriorPolicy) -> Result<SurfaceGrid> {
    spec.validate()?;
    let rho_axis = spec.rho.values();
    let sigma_axis = spec.sigma.values();
    let values = rho_axis
        .iter()
        .map(|&rho| {
            sigma_axis
                .iter()
                .map(|&sigma| Ok(solver.solve(rho, sigma, policy)?.risk))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceGrid {
        meta: "risk [bits]".into(),
        rho_axis,
        sigma_axis,
        values,
    })
}

/// `100 (R0 - R) / R0`; users already matching the population count as 100.
pub fn relative_reduction(initial: f64, risk: f64) -> f64 {
    if initial <= 0.0 {
        100.0
    } else {
        100.0 * (initial - risk) / initial
    }
}

/// Linear interpolation between order statistics at rank `pct/100 (N-1)`.
/// `sorted` must be ascending and nonempty.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let rank = (pct / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Relative risk reduction of every user on the grid, flattened row-major
/// (rho outer). Output is in user order.
pub fn user_reductions(
    users: &[&UserProfile],
    population: &Pmf,
    spec: &GridSpec,
    policy: InteriorPolicy,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let rho_axis = spec.rho.values();
    let sigma_axis = spec.sigma.values();
    users
        .par_iter()
        .map(|user| {
            let solver = Solver::new(canonicalize(&user.q, population)?);
            let r0 = solver.solve(0.0, 0.0, policy)?.risk;
            let mut out = Vec::with_capacity(rho_axis.len() * sigma_axis.len());
            for &rho in &rho_axis {
                for &sigma in &sigma_axis {
                    let risk = solver.solve(rho, sigma, policy)?.risk;
                    out.push(relative_reduction(r0, risk));
                }
            }
            Ok(out)
        })
        .collect()
}

/// One surface per requested percentile of the relative risk reduction (%).
pub fn percentile_surfaces(
    users: &[&UserProfile],
    population: &Pmf,
    spec: &GridSpec,
    percentiles: &[f64],
    policy: InteriorPolicy,
) -> Result<Vec<SurfaceGrid>> {
    if users.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if let Some(&bad) = percentiles.iter().find(|p| !(0.0..=100.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!("percentile {bad} outside [0, 100]")));
    }
    let per_user = user_reductions(users, population, spec, policy)?;
    let rho_axis = spec.rho.values();
    let sigma_axis = spec.sigma.values();
    let cells = rho_axis.len() * sigma_axis.len();
    let columns: Vec<Vec<f64>> = (0..cells)
        .into_par_iter()
        .map(|c| {
            let mut col: Vec<f64> = per_user.iter().map(|u| u[c]).collect();
            col.sort_by(f64::total_cmp);
            col
        })
        .collect();
    Ok(percentiles
        .iter()
        .map(|&pct| SurfaceGrid {
            meta: format!("percentile {pct} of relative risk reduction [%] over {} users", users.len()),
            rho_axis: rho_axis.clone(),
            sigma_axis: sigma_axis.clone(),
            values: rho_axis
                .iter()
                .enumerate()
                .map(|(a, _)| {
                    (0..sigma_axis.len())
                        .map(|b| percentile(&columns[a * sigma_axis.len() + b], pct))
                        .collect()
                })
                .collect(),
        })
        .collect())
}
