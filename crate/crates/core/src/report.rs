//! Calibration reports: per-cell sums, discrepancies, z statistics and
//! verdicts.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::two_sided_critical;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Overall,
    Probability,
    Subset,
    HBased,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Overall => "overall",
            Criterion::Probability => "probability",
            Criterion::Subset => "subset",
            Criterion::HBased => "h_based",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Insufficient,
    Empty,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Insufficient => "insufficient",
            Verdict::Empty => "empty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalVerdict {
    Pass,
    Fail,
    /// No cell had enough members to be tested.
    Inconclusive,
}

/// Running sums over the steps of one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CellSums {
    pub count: u64,
    pub sum_p: f64,
    pub sum_e: f64,
    /// `sum p_k (1 - p_k)`, the variance of `sum e_k` under the forecasts.
    pub sum_var: f64,
}

impl CellSums {
    pub fn push(&mut self, e: u8, p: f64) {
        self.count += 1;
        self.sum_p += p;
        self.sum_e += f64::from(e);
        self.sum_var += p * (1.0 - p);
    }

    /// `|mean e - mean p|`, or `None` for an empty cell.
    pub fn delta(&self) -> Option<f64> {
        (self.count > 0).then(|| ((self.sum_e - self.sum_p) / self.count as f64).abs())
    }

    /// `sum (e - p) / sqrt(sum p (1 - p))`; `None` when the cell is empty or
    /// every forecast is 0 or 1.
    pub fn z(&self) -> Option<f64> {
        (self.count > 0 && self.sum_var > 0.0).then(|| (self.sum_e - self.sum_p) / self.sum_var.sqrt())
    }
}

/// Significance level and minimum cell size for the z test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub significance: f64,
    pub m_min: u64,
}

impl Default for ZTest {
    fn default() -> Self {
        Self { significance: 0.01, m_min: 30 }
    }
}

/// Tolerance on `|sum e - sum p|` for cells whose forecasts are all 0 or 1
/// (no sampling variance, so any real discrepancy is a failure).
const DEGENERATE_TOLERANCE: f64 = 1e-9;

/// Finite-sample verdict for one cell.
///
/// Empty cells get [`Verdict::Empty`], cells below `m_min` get
/// [`Verdict::Insufficient`]. Otherwise the cell passes iff `|z|` is at most
/// the two-sided standard normal critical value. A cell whose forecasts are
/// all 0 or 1 has no z statistic and passes iff its sums agree exactly.
pub fn calibration_z_test(sums: &CellSums, test: &ZTest) -> Verdict {
    if sums.count == 0 {
        return Verdict::Empty;
    }
    if sums.count < test.m_min {
        return Verdict::Insufficient;
    }
    let pass = match sums.z() {
        Some(z) => z.abs() <= two_sided_critical(test.significance),
        None => (sums.sum_e - sums.sum_p).abs() <= DEGENERATE_TOLERANCE,
    };
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Rule id or bin label.
    pub id: String,
    pub count: u64,
    pub sum_p: f64,
    pub sum_e: f64,
    pub sum_var: f64,
    pub mean_p: Option<f64>,
    pub freq_e: Option<f64>,
    pub delta: Option<f64>,
    pub z: Option<f64>,
    pub verdict: Verdict,
}

impl Cell {
    pub fn from_sums(id: impl Into<String>, sums: CellSums, test: &ZTest) -> Self {
        let n = sums.count as f64;
        let nonempty = sums.count > 0;
        Self {
            id: id.into(),
            count: sums.count,
            sum_p: sums.sum_p,
            sum_e: sums.sum_e,
            sum_var: sums.sum_var,
            mean_p: nonempty.then(|| sums.sum_p / n),
            freq_e: nonempty.then(|| sums.sum_e / n),
            delta: sums.delta(),
            z: sums.z(),
            verdict: calibration_z_test(&sums, test),
        }
    }

    pub fn sums(&self) -> CellSums {
        CellSums { count: self.count, sum_p: self.sum_p, sum_e: self.sum_e, sum_var: self.sum_var }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub criterion: Criterion,
    pub test: ZTest,
    pub cells: Vec<Cell>,
    pub verdict: GlobalVerdict,
}

impl CalibrationReport {
    pub fn new(criterion: Criterion, test: ZTest, cells: Vec<Cell>) -> Self {
        let verdict = if cells.iter().any(|c| c.verdict == Verdict::Fail) {
            GlobalVerdict::Fail
        } else if cells.iter().any(|c| c.verdict == Verdict::Pass) {
            GlobalVerdict::Pass
        } else {
            GlobalVerdict::Inconclusive
        };
        Self { criterion, test, cells, verdict }
    }

    pub fn cell(&self, id: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.id == id)
    }

    /// Largest discrepancy over non-empty cells.
    pub fn max_delta(&self) -> Option<f64> {
        self.cells.iter().filter_map(|c| c.delta).reduce(f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per cell: `criterion,rule_or_bin,count,mean_p,freq_e,delta,z,verdict`.
    /// Undefined values are written as empty fields.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["criterion", "rule_or_bin", "count", "mean_p", "freq_e", "delta", "z", "verdict"])?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for cell in &self.cells {
            writer.write_record([
                self.criterion.as_str().to_string(),
                cell.id.clone(),
                cell.count.to_string(),
                opt(cell.mean_p),
                opt(cell.freq_e),
                opt(cell.delta),
                opt(cell.z),
                cell.verdict.as_str().to_string(),
            ])?;
        }
        let bytes = writer.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sums(pairs: &[(u8, f64)]) -> CellSums {
        let mut s = CellSums::default();
        for &(e, p) in pairs {
            s.push(e, p);
        }
        s
    }

    #[test]
    fn zero_z_passes_at_any_significance() {
        let s = sums(&[(1, 0.5), (0, 0.5)]);
        assert_eq!(s.z(), Some(0.0));
        for significance in [0.5, 0.1, 0.01, 1e-6] {
            assert_eq!(calibration_z_test(&s, &ZTest { significance, m_min: 1 }), Verdict::Pass);
        }
    }

    #[test]
    fn small_cell_is_insufficient() {
        let s = sums(&[(1, 0.5); 10]);
        assert_eq!(calibration_z_test(&s, &ZTest { significance: 0.01, m_min: 30 }), Verdict::Insufficient);
    }

    #[test]
    fn empty_cell_has_no_discrepancy() {
        let cell = Cell::from_sums("none", CellSums::default(), &ZTest::default());
        assert_eq!(cell.verdict, Verdict::Empty);
        assert_eq!(cell.delta, None);
        assert_eq!(cell.z, None);
    }

    #[test]
    fn extreme_forecasts_have_no_z() {
        let right = sums(&[(1, 1.0), (0, 0.0)]);
        let wrong = sums(&[(1, 0.0), (0, 0.0)]);
        assert_eq!(right.z(), None);
        let test = ZTest { significance: 0.01, m_min: 1 };
        assert_eq!(calibration_z_test(&right, &test), Verdict::Pass);
        assert_eq!(calibration_z_test(&wrong, &test), Verdict::Fail);
    }

    #[test]
    fn single_step_discrepancy() {
        let s = sums(&[(1, 0.2)]);
        assert!((s.delta().unwrap() - 0.8).abs() < 1e-15);
        assert!((s.z().unwrap() - 0.8 / 0.16f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let test = ZTest { significance: 0.01, m_min: 1 };
        let report = CalibrationReport::new(
            Criterion::Subset,
            test,
            vec![Cell::from_sums("odd_steps", sums(&[(1, 0.5), (1, 0.5)]), &test)],
        );
        let csv = report.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("criterion,rule_or_bin,count,mean_p,freq_e,delta,z,verdict"));
        assert_eq!(lines.next(), Some("subset,odd_steps,2,0.5,1,0.5,1.414213562373095,pass"));
    }
}
