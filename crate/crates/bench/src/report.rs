//! Per-trial CSV rows and their summaries.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

/// Exact CSV header of trial reports.
pub const REPORT_HEADER: [&str; 9] = [
    "solver",
    "noise_px",
    "trial",
    "n_solutions",
    "n_solutions_cheiral",
    "rot_err_deg",
    "trans_err",
    "solve_time_us",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    P2l1,
    P1l2,
}

impl SolverKind {
    pub const ALL: [SolverKind; 2] = [SolverKind::P2l1, SolverKind::P1l2];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::P2l1 => "p2l1",
            SolverKind::P1l2 => "p1l2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    /// The solver ran but returned no pose.
    NoSolution,
    Degenerate,
    Error,
}

/// One solver run on one scene. Errors refer to the returned pose closest to
/// the ground truth and are NaN when there is none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub solver: SolverKind,
    pub noise_px: f64,
    pub trial: u64,
    pub n_solutions: usize,
    pub n_solutions_cheiral: usize,
    pub rot_err_deg: f64,
    pub trans_err: f64,
    /// Wall time of the solver call; 0 when timing is disabled.
    pub solve_time_us: f64,
    pub status: TrialStatus,
}

pub fn write_rows<W: Write>(out: W, rows: &[ReportRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(REPORT_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> csv::Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {:?}", header),
        )));
    }
    r.deserialize().collect()
}

/// Linear-interpolated quantile of the finite values; NaN when there are none.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Mean, sample standard deviation and standard error of the finite values.
pub fn mean_std(values: &[f64]) -> (f64, f64, f64) {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt(), var.sqrt() / n.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantiles {
    pub median: f64,
    pub q90: f64,
    pub q99: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Self {
        Self {
            median: quantile(values, 0.5),
            q90: quantile(values, 0.9),
            q99: quantile(values, 0.99),
            max: quantile(values, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSummary {
    pub solver: SolverKind,
    pub trials: usize,
    pub failed: usize,
    pub rot_err_deg: Quantiles,
    pub trans_err: Quantiles,
    /// Number of trials per solution count.
    pub solutions_histogram: BTreeMap<usize, usize>,
    pub cheiral_solutions_histogram: BTreeMap<usize, usize>,
    pub total_time_us: f64,
    pub median_time_us: f64,
}

pub fn summarize(rows: &[ReportRow]) -> Vec<SolverSummary> {
    SolverKind::ALL
        .iter()
        .filter_map(|&solver| {
            let mine: Vec<&ReportRow> = rows.iter().filter(|r| r.solver == solver).collect();
            if mine.is_empty() {
                return None;
            }
            let col = |f: fn(&ReportRow) -> f64| mine.iter().map(|r| f(r)).collect::<Vec<_>>();
            let hist = |f: fn(&ReportRow) -> usize| {
                let mut h = BTreeMap::new();
                for r in &mine {
                    *h.entry(f(r)).or_insert(0) += 1;
                }
                h
            };
            let times = col(|r| r.solve_time_us);
            Some(SolverSummary {
                solver,
                trials: mine.len(),
                failed: mine.iter().filter(|r| r.status != TrialStatus::Ok).count(),
                rot_err_deg: Quantiles::of(&col(|r| r.rot_err_deg)),
                trans_err: Quantiles::of(&col(|r| r.trans_err)),
                solutions_histogram: hist(|r| r.n_solutions),
                cheiral_solutions_histogram: hist(|r| r.n_solutions_cheiral),
                total_time_us: times.iter().sum(),
                median_time_us: quantile(&times, 0.5),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseLevelSummary {
    pub solver: SolverKind,
    pub noise_px: f64,
    pub trials: usize,
    pub rot_mean: f64,
    pub rot_std: f64,
    pub rot_sem: f64,
    pub trans_mean: f64,
    pub trans_std: f64,
    pub trans_sem: f64,
}

/// Mean and spread of the errors per solver and noise level, levels in the
/// order they first appear.
pub fn summarize_noise(rows: &[ReportRow]) -> Vec<NoiseLevelSummary> {
    let mut levels: Vec<f64> = Vec::new();
    for r in rows {
        if !levels.contains(&r.noise_px) {
            levels.push(r.noise_px);
        }
    }
    let mut out = Vec::new();
    for solver in SolverKind::ALL {
        for &noise_px in &levels {
            let mine: Vec<&ReportRow> = rows
                .iter()
                .filter(|r| r.solver == solver && r.noise_px == noise_px)
                .collect();
            if mine.is_empty() {
                continue;
            }
            let rot: Vec<f64> = mine.iter().map(|r| r.rot_err_deg).collect();
            let trans: Vec<f64> = mine.iter().map(|r| r.trans_err).collect();
            let (rot_mean, rot_std, rot_sem) = mean_std(&rot);
            let (trans_mean, trans_std, trans_sem) = mean_std(&trans);
            out.push(NoiseLevelSummary {
                solver,
                noise_px,
                trials: mine.len(),
                rot_mean,
                rot_std,
                rot_sem,
                trans_mean,
                trans_std,
                trans_sem,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(trial: u64) -> ReportRow {
        ReportRow {
            solver: SolverKind::P1l2,
            noise_px: 1.5,
            trial,
            n_solutions: 3,
            n_solutions_cheiral: 2,
            rot_err_deg: 1e-9,
            trans_err: f64::NAN,
            solve_time_us: 0.0,
            status: TrialStatus::NoSolution,
        }
    }

    #[test]
    fn csv_round_trip_keeps_header() {
        let rows = vec![row(0), row(1)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), REPORT_HEADER.join(","));
        let back = read_rows(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].trial, 1);
        assert!(back[0].trans_err.is_nan());
        assert_eq!(back[0].status, TrialStatus::NoSolution);
        let mut empty = Vec::new();
        write_rows(&mut empty, &[]).unwrap();
        assert_eq!(
            String::from_utf8(empty).unwrap().trim(),
            REPORT_HEADER.join(",")
        );
    }

    #[test]
    fn quantiles_and_moments() {
        let v = [3.0, 1.0, f64::NAN, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!(quantile(&[f64::NAN], 0.5).is_nan());
        let (m, s, e) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((e - s / 2.0).abs() < 1e-15);
    }
}
