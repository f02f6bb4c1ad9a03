//! Aggregation of sweep rows into a bound report, shared by the sweep
//! itself and by re-verification from a results file.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::bounds::{bound_value, exceptional_bound};
use super::sweep::{ResultRow, CSV_COLUMNS};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::measurelab::{box_dimension, BoxInput, DimEstimate};

/// Fewer violating viewpoints than this and no dimension is estimated.
pub const MIN_EXCEPTIONAL_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionalStatus {
    /// No violating viewpoints; the dimension is 0 by convention.
    Empty,
    InsufficientSample,
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub status: ExceptionalStatus,
    pub n_points: usize,
    pub dimension: Option<f64>,
    /// `dimension <= exceptional_bound + tol`.
    pub within_bound: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewpointSummary {
    pub vp_index: usize,
    pub viewpoint: [f64; 2],
    pub dim_visible: Option<f64>,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub experiment_id: String,
    pub curve_kind: String,
    pub d_hat: f64,
    /// Full estimate behind `d_hat` when the report comes from a sweep.
    pub d_hat_estimate: Option<DimEstimate>,
    pub theoretical_dim: Option<f64>,
    pub f_bound: f64,
    pub tol: f64,
    pub s_threshold: f64,
    pub n_viewpoints: usize,
    pub n_errors: usize,
    /// Share of successful viewpoints with `dim_visible <= f_bound + tol`.
    pub fraction_within: f64,
    /// Share of successful viewpoints with `dim_visible > s_threshold`.
    pub exceptional_set_fraction: f64,
    pub exceptional_bound: f64,
    pub exceptional_set: ExceptionalSet,
    pub median_dim_visible: f64,
    /// Largest observed visible dimension, to gauge how far the bound is from tight.
    pub max_dim_visible: f64,
    pub rows: Vec<ViewpointSummary>,
}

impl BoundReport {
    /// Fields that depend only on the rows and the bound parameters.
    pub fn same_aggregate(&self, other: &BoundReport) -> bool {
        self.d_hat == other.d_hat
            && self.f_bound == other.f_bound
            && self.n_viewpoints == other.n_viewpoints
            && self.n_errors == other.n_errors
            && self.fraction_within == other.fraction_within
            && self.exceptional_set_fraction == other.exceptional_set_fraction
            && self.exceptional_bound == other.exceptional_bound
            && self.exceptional_set == other.exceptional_set
            && self.median_dim_visible == other.median_dim_visible
            && self.max_dim_visible == other.max_dim_visible
            && self.rows == other.rows
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Box dimension of a finite viewpoint set over six dyadic scales below a
/// quarter of its diameter.
fn exceptional_dimension(pts: &[Point]) -> Result<f64> {
    let mut diam: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            diam = diam.max(p.dist(*q));
        }
    }
    if diam == 0.0 {
        return Ok(0.0);
    }
    let hi = diam / 4.0;
    Ok(box_dimension(BoxInput::Points(pts), (hi / 32.0, hi), 4)?.value)
}

pub fn aggregate(
    rows: &[ResultRow],
    d_hat: f64,
    d_hat_estimate: Option<DimEstimate>,
    theoretical_dim: Option<f64>,
    tol: f64,
    s_threshold: f64,
) -> Result<BoundReport> {
    if rows.is_empty() {
        return Err(Error::invalid("no result rows"));
    }
    let f_bound = bound_value(d_hat)?;
    let exc_bound = exceptional_bound(d_hat, s_threshold)?;
    let ok: Vec<(&ResultRow, f64)> = rows
        .iter()
        .filter(|r| !r.error_flag)
        .filter_map(|r| r.dim_visible.map(|d| (r, d)))
        .collect();
    if ok.is_empty() {
        return Err(Error::Degenerate(
            "no viewpoint produced a dimension estimate".into(),
        ));
    }
    let n_ok = ok.len() as f64;
    let within = |d: f64| d <= f_bound + tol;
    let fraction_within = ok.iter().filter(|(_, d)| within(*d)).count() as f64 / n_ok;
    let exceptional: Vec<Point> = ok
        .iter()
        .filter(|(_, d)| *d > s_threshold)
        .map(|(r, _)| Point::new(r.vp_x, r.vp_y))
        .collect();
    let exceptional_set_fraction = exceptional.len() as f64 / n_ok;
    let exceptional_set = match exceptional.len() {
        0 => ExceptionalSet {
            status: ExceptionalStatus::Empty,
            n_points: 0,
            dimension: Some(0.0),
            within_bound: Some(0.0 <= exc_bound + tol),
        },
        n if n < MIN_EXCEPTIONAL_POINTS => ExceptionalSet {
            status: ExceptionalStatus::InsufficientSample,
            n_points: n,
            dimension: None,
            within_bound: None,
        },
        n => {
            let dim = exceptional_dimension(&exceptional)?;
            ExceptionalSet {
                status: ExceptionalStatus::Estimated,
                n_points: n,
                dimension: Some(dim),
                within_bound: Some(dim <= exc_bound + tol),
            }
        }
    };
    let mut dims: Vec<f64> = ok.iter().map(|(_, d)| *d).collect();
    dims.sort_by(f64::total_cmp);
    Ok(BoundReport {
        experiment_id: rows[0].experiment_id.clone(),
        curve_kind: rows[0].curve_kind.clone(),
        d_hat,
        d_hat_estimate,
        theoretical_dim,
        f_bound,
        tol,
        s_threshold,
        n_viewpoints: rows.len(),
        n_errors: rows.len() - ok.len(),
        fraction_within,
        exceptional_set_fraction,
        exceptional_bound: exc_bound,
        exceptional_set,
        median_dim_visible: median(&dims),
        max_dim_visible: dims[dims.len() - 1],
        rows: rows
            .iter()
            .map(|r| ViewpointSummary {
                vp_index: r.vp_index,
                viewpoint: [r.vp_x, r.vp_y],
                dim_visible: if r.error_flag { None } else { r.dim_visible },
                within: !r.error_flag && r.dim_visible.is_some_and(within),
            })
            .collect(),
    })
}

/// Parses a results file, checking the header against the expected columns.
pub fn read_rows_csv<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(|e| Error::Csv {
        line: 1,
        msg: e.to_string(),
    })?;
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::Csv {
            line: 1,
            msg: format!("expected columns {}", CSV_COLUMNS.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rd.deserialize::<ResultRow>() {
        rows.push(rec.map_err(|e| Error::Csv {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?);
    }
    Ok(rows)
}

/// Recomputes a bound report from a results file. Row-level `f_bound` and
/// `within_bound` columns are ignored in favour of `d_hat` and `tol`.
pub fn verify_bound<R: Read>(
    results: R,
    d_hat: f64,
    tol: f64,
    s_threshold: f64,
) -> Result<BoundReport> {
    let rows = read_rows_csv(results)?;
    aggregate(&rows, d_hat, None, None, tol, s_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::write_rows_csv;

    fn row(i: usize, dim: Option<f64>) -> ResultRow {
        ResultRow {
            experiment_id: "t".into(),
            curve_kind: "koch".into(),
            target_dim: 1.5,
            level: 5,
            seed: 1,
            vp_index: i,
            vp_x: i as f64 * 0.37,
            vp_y: (i as f64 * 1.3).sin(),
            dist_to_set: dim.map(|_| 0.5),
            n_pieces: dim.map(|_| 10),
            visible_length: dim.map(|_| 1.0),
            angular_coverage: dim.map(|_| 0.4),
            dim_visible: dim,
            dim_visible_stderr: dim.map(|_| 0.01),
            r_squared: dim.map(|_| 0.99),
            f_bound: 1.366,
            within_bound: dim.is_some(),
            error_flag: dim.is_none(),
        }
    }

    fn csv_text(rows: &[ResultRow]) -> Vec<u8> {
        let mut buf = Vec::new();
        write_rows_csv(&mut buf, rows).unwrap();
        buf
    }

    #[test]
    fn all_within() {
        let rows: Vec<_> = (0..10)
            .map(|i| row(i, Some(1.0 + 0.01 * i as f64)))
            .collect();
        let rep = verify_bound(&csv_text(&rows)[..], 1.5, 0.1, 1.45).unwrap();
        assert_eq!(rep.fraction_within, 1.0);
        assert_eq!(rep.exceptional_set.status, ExceptionalStatus::Empty);
        assert_eq!(rep.exceptional_set.dimension, Some(0.0));
        assert!((rep.max_dim_visible - 1.09).abs() < 1e-15);
    }

    #[test]
    fn half_violating() {
        let rows: Vec<_> = (0..10)
            .map(|i| row(i, Some(if i % 2 == 0 { 1.1 } else { 1.9 })))
            .collect();
        let rep = verify_bound(&csv_text(&rows)[..], 1.5, 0.1, 1.45).unwrap();
        assert_eq!(rep.fraction_within, 0.5);
        assert_eq!(rep.exceptional_set_fraction, 0.5);
        assert_eq!(
            rep.exceptional_set.status,
            ExceptionalStatus::InsufficientSample
        );
        assert_eq!(rep.median_dim_visible, 1.5);
    }

    #[test]
    fn error_rows_excluded_from_fractions() {
        let mut rows: Vec<_> = (0..4).map(|i| row(i, Some(1.0))).collect();
        rows.push(row(4, None));
        let rep = verify_bound(&csv_text(&rows)[..], 1.5, 0.1, 1.45).unwrap();
        assert_eq!(rep.n_errors, 1);
        assert_eq!(rep.n_viewpoints, 5);
        assert_eq!(rep.fraction_within, 1.0);
        assert!(!rep.rows[4].within);
    }

    #[test]
    fn exceptional_dimension_estimated() {
        let rows: Vec<_> = (0..40).map(|i| row(i, Some(1.6))).collect();
        let rep = verify_bound(&csv_text(&rows)[..], 1.8, 0.1, 1.5).unwrap();
        assert_eq!(rep.exceptional_set.status, ExceptionalStatus::Estimated);
        let d = rep.exceptional_set.dimension.unwrap();
        assert!((0.0..=2.0).contains(&d));
    }

    #[test]
    fn malformed_csv_reports_line() {
        let rows: Vec<_> = (0..3).map(|i| row(i, Some(1.0))).collect();
        let mut text = String::from_utf8(csv_text(&rows)).unwrap();
        text.push_str("t,koch,1.5,5,1,3,oops,0,,,,,,,,1.366,false,true\n");
        match verify_bound(text.as_bytes(), 1.5, 0.1, 1.45) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        match verify_bound(&b"a,b\n1,2\n"[..], 1.5, 0.1, 1.45) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows: Vec<_> = (0..5)
            .map(|i| row(i, Some(1.0 + 1.0 / (3.0 + i as f64))))
            .collect();
        assert_eq!(read_rows_csv(&csv_text(&rows)[..]).unwrap(), rows);
    }
}
