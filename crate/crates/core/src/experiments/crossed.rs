//! Students crossed with examinations (and optionally resits).
//!
//! The "risk" that one student fails one exam can be read off the student's
//! row (their other exams) or the exam's column (other students), and the two
//! margins differ because they condition on different information. Neither
//! need equal the cell probability itself.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, Stream};

/// Minimum number of observations behind each margin.
pub const MIN_MARGIN_CELLS: usize = 1000;

/// How repeated attempts at the same exam are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ResitModel {
    /// Every attempt fails independently with the cell probability.
    Independent,
    /// Attempts follow a Pólya urn seeded with weights `c p` (fail) and
    /// `c (1 - p)` (pass); each attempt adds one ball of its own colour.
    Reinforced { concentration: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossedArray {
    /// Row effects; higher ability lowers the failure probability.
    pub abilities: Vec<f64>,
    /// Column effects; higher difficulty raises the failure probability.
    pub difficulties: Vec<f64>,
    pub resits: usize,
    pub resit_model: ResitModel,
    pub seed: u64,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Failures laid out as `[student][exam][attempt]`, 1 meaning fail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeTensor {
    pub students: usize,
    pub exams: usize,
    pub resits: usize,
    pub failures: Vec<u8>,
}

impl OutcomeTensor {
    pub fn cell(&self, student: usize, exam: usize) -> &[u8] {
        let start = (student * self.exams + exam) * self.resits;
        &self.failures[start..start + self.resits]
    }
}

impl CrossedArray {
    pub fn validate(&self) -> Result<()> {
        if self.abilities.is_empty() || self.difficulties.is_empty() || self.resits == 0 {
            return Err(Error::InvalidParameter("crossed array needs students, exams and attempts".into()));
        }
        if self.abilities.iter().chain(&self.difficulties).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("effects must be finite".into()));
        }
        if let ResitModel::Reinforced { concentration } = self.resit_model {
            if !(concentration > 0.0 && concentration.is_finite()) {
                return Err(Error::InvalidParameter(format!("concentration {concentration} must be positive")));
            }
        }
        Ok(())
    }

    /// Failure probability of `student` on `exam`: `logistic(difficulty - ability)`.
    pub fn failure_probability(&self, student: usize, exam: usize) -> f64 {
        logistic(self.difficulties[exam] - self.abilities[student])
    }

    fn attempts(&self, p: f64, rng: &mut impl Rng, out: &mut Vec<u8>) {
        match self.resit_model {
            ResitModel::Independent => {
                out.extend((0..self.resits).map(|_| u8::from(rng.random::<f64>() < p)));
            }
            ResitModel::Reinforced { concentration } => {
                let (mut fail, mut pass) = (concentration * p, concentration * (1.0 - p));
                for _ in 0..self.resits {
                    let e = rng.random::<f64>() * (fail + pass) < fail;
                    if e {
                        fail += 1.0;
                    } else {
                        pass += 1.0;
                    }
                    out.push(u8::from(e));
                }
            }
        }
    }

    pub fn simulate(&self) -> Result<OutcomeTensor> {
        self.validate()?;
        let mut rng = stream(self.seed, Stream::Array);
        let (students, exams) = (self.abilities.len(), self.difficulties.len());
        let mut failures = Vec::with_capacity(students * exams * self.resits);
        for i in 0..students {
            for j in 0..exams {
                self.attempts(self.failure_probability(i, j), &mut rng, &mut failures);
            }
        }
        Ok(OutcomeTensor { students, exams, resits: self.resits, failures })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossedRisks {
    /// Failure frequency over the student's other exams.
    pub row_margin: f64,
    /// Failure frequency over other students sitting the exam.
    pub column_margin: f64,
    /// The cell's own failure probability under the link.
    pub cell_probability: f64,
    pub row_observations: usize,
    pub column_observations: usize,
}

fn check_indices(array: &CrossedArray, student: usize, exam: usize) -> Result<()> {
    array.validate()?;
    if student >= array.abilities.len() {
        return Err(Error::IndexOutOfRange { index: student, size: array.abilities.len() });
    }
    if exam >= array.difficulties.len() {
        return Err(Error::IndexOutOfRange { index: exam, size: array.difficulties.len() });
    }
    Ok(())
}

/// Three readings of one student's risk of failing one exam.
pub fn run_crossed_array(array: &CrossedArray, student: usize, exam: usize) -> Result<CrossedRisks> {
    check_indices(array, student, exam)?;
    let (students, exams) = (array.abilities.len(), array.difficulties.len());
    let row_observations = (exams - 1) * array.resits;
    let column_observations = (students - 1) * array.resits;
    if row_observations.min(column_observations) < MIN_MARGIN_CELLS {
        return Err(Error::InvalidParameter(format!(
            "margins need at least {MIN_MARGIN_CELLS} observations, have {row_observations} and {column_observations}"
        )));
    }
    let tensor = array.simulate()?;
    let failures = |cells: &mut dyn Iterator<Item = (usize, usize)>| -> usize {
        cells.map(|(i, j)| tensor.cell(i, j).iter().map(|&e| usize::from(e)).sum::<usize>()).sum()
    };
    let row_fail = failures(&mut (0..exams).filter(|&j| j != exam).map(|j| (student, j)));
    let col_fail = failures(&mut (0..students).filter(|&i| i != student).map(|i| (i, exam)));
    Ok(CrossedRisks {
        row_margin: row_fail as f64 / row_observations as f64,
        column_margin: col_fail as f64 / column_observations as f64,
        cell_probability: array.failure_probability(student, exam),
        row_observations,
        column_observations,
    })
}

/// Failure frequency of one cell over its attempts, in independent
/// replicates of that cell's attempt sequence (replicate `r` is seeded with
/// `derive_seed(array.seed, "crossed", r)`).
pub fn cell_frequencies(array: &CrossedArray, student: usize, exam: usize, replicates: usize) -> Result<Vec<f64>> {
    check_indices(array, student, exam)?;
    let p = array.failure_probability(student, exam);
    let mut attempts = Vec::with_capacity(array.resits);
    Ok((0..replicates as u64)
        .map(|r| {
            let mut rng = stream(derive_seed(array.seed, "crossed", r), Stream::Array);
            attempts.clear();
            array.attempts(p, &mut rng, &mut attempts);
            attempts.iter().map(|&e| f64::from(e)).sum::<f64>() / array.resits as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean;

    fn array(abilities: Vec<f64>, difficulties: Vec<f64>, resits: usize) -> CrossedArray {
        CrossedArray { abilities, difficulties, resits, resit_model: ResitModel::Independent, seed: 11 }
    }

    #[test]
    fn exchangeable_array_gives_equal_readings() {
        let a = array(vec![0.0; 200], vec![0.0; 200], 10);
        let risks = run_crossed_array(&a, 3, 7).unwrap();
        assert_eq!(risks.cell_probability, 0.5);
        assert!((risks.row_margin - 0.5).abs() < 0.02, "{risks:?}");
        assert!((risks.column_margin - 0.5).abs() < 0.02, "{risks:?}");
    }

    // Oracle: expected margins are averages of the link over the margin cells.
    #[test]
    fn able_student_on_hard_exam() {
        let abilities: Vec<f64> = (0..200).map(|i| -2.0 + 4.0 * i as f64 / 199.0).collect();
        let difficulties: Vec<f64> = (0..200).map(|j| -2.0 + 4.0 * j as f64 / 199.0).collect();
        let a = array(abilities, difficulties, 8);
        let (karl, stats) = (190, 195);
        let risks = run_crossed_array(&a, karl, stats).unwrap();
        let row_expected = mean(&(0..200).filter(|&j| j != stats).map(|j| a.failure_probability(karl, j)).collect::<Vec<_>>());
        let col_expected = mean(&(0..200).filter(|&i| i != karl).map(|i| a.failure_probability(i, stats)).collect::<Vec<_>>());
        assert!((risks.row_margin - row_expected).abs() < 0.03);
        assert!((risks.column_margin - col_expected).abs() < 0.03);
        assert!(risks.row_margin < risks.column_margin);
    }

    #[test]
    fn reinforced_resits_have_random_limits() {
        let mut a = array(vec![0.0; 2], vec![0.0; 2], 2000);
        a.resit_model = ResitModel::Reinforced { concentration: 2.0 };
        let freqs = cell_frequencies(&a, 0, 0, 200).unwrap();
        let m = mean(&freqs);
        let var = freqs.iter().map(|f| (f - m).powi(2)).sum::<f64>() / (freqs.len() - 1) as f64;
        // Beta(1, 1) limit has variance 1/12; independent attempts would give
        // 0.25 / 2000.
        assert!(var > 0.05, "{var}");

        a.resit_model = ResitModel::Independent;
        let freqs = cell_frequencies(&a, 0, 0, 200).unwrap();
        let m = mean(&freqs);
        let var = freqs.iter().map(|f| (f - m).powi(2)).sum::<f64>() / (freqs.len() - 1) as f64;
        assert!(var < 0.001, "{var}");
    }

    #[test]
    fn index_and_size_errors() {
        let a = array(vec![0.0; 200], vec![0.0; 200], 10);
        assert!(matches!(run_crossed_array(&a, 200, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(run_crossed_array(&a, 0, 200), Err(Error::IndexOutOfRange { .. })));
        let small = array(vec![0.0; 20], vec![0.0; 20], 1);
        assert!(matches!(run_crossed_array(&small, 0, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn tensor_layout() {
        let a = array(vec![0.0, 50.0], vec![0.0, 50.0], 3);
        let t = a.simulate().unwrap();
        assert_eq!(t.failures.len(), 12);
        // able student on easy exam essentially never fails
        assert_eq!(t.cell(1, 0), &[0, 0, 0]);
        // weak student on hard exam essentially always fails
        assert_eq!(t.cell(0, 1), &[1, 1, 1]);
    }
}
