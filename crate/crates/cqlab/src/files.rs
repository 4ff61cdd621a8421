//! Channel files, run records, and the JSON/CSV conventions shared by the
//! command-line front end and the tests.
//!
//! Channel file shape (JSON, complex entries as `[re, im]`, matrices
//! row-major):
//!
//! ```json
//! {
//!   "dim": 2,
//!   "inputs": [
//!     {"label": "x0", "state": [[[1.0, 0.0], [0.0, 0.0]],
//!                               [[0.0, 0.0], [0.0, 0.0]]], "cost": 0.0}
//!   ],
//!   "budget": 0.5
//! }
//! ```

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::{CostSpec, CqChannel};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::operator::{CMat, DensityMatrix, HermitianOperator};

/// On-disk description of one channel input.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChannelFileInput {
    pub label: String,
    /// Row-major `dim x dim` matrix of `[re, im]` pairs.
    pub state: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

/// On-disk description of a channel, with an optional per-symbol budget.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChannelFile {
    pub dim: usize,
    pub inputs: Vec<ChannelFileInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

impl ChannelFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel files serialize")
    }

    /// Validates and converts into the in-memory model. The budget, when
    /// present, requires a cost on every input.
    pub fn to_model(&self, tol: &Tolerances) -> Result<(CqChannel, Option<CostSpec>)> {
        let mut inputs = Vec::with_capacity(self.inputs.len());
        for input in &self.inputs {
            let mat = entries_to_matrix(self.dim, &input.state)
                .map_err(|e| Error::ChannelFile(format!("input `{}`: {e}", input.label)))?;
            let op = HermitianOperator::new_with(mat, tol)
                .map_err(|e| Error::ChannelFile(format!("input `{}`: {e}", input.label)))?;
            let state = DensityMatrix::new_with(op, tol)
                .map_err(|e| Error::ChannelFile(format!("input `{}`: {e}", input.label)))?;
            inputs.push((input.label.clone(), state));
        }
        let channel = CqChannel::new(inputs)?;
        let cost = match self.budget {
            Some(budget) => {
                let mut map = std::collections::BTreeMap::new();
                for input in &self.inputs {
                    let c = input.cost.ok_or_else(|| {
                        Error::ChannelFile(format!(
                            "budget given but input `{}` has no cost",
                            input.label
                        ))
                    })?;
                    map.insert(input.label.clone(), c);
                }
                Some(CostSpec::new(map, budget))
            }
            None => None,
        };
        Ok((channel, cost))
    }

    pub fn from_model(channel: &CqChannel, cost: Option<&CostSpec>) -> Self {
        let inputs = channel
            .inputs()
            .iter()
            .map(|(label, state)| ChannelFileInput {
                label: label.clone(),
                state: matrix_to_entries(state.matrix()),
                cost: cost.and_then(|c| c.cost_of(label).ok()),
            })
            .collect();
        ChannelFile {
            dim: channel.dim(),
            inputs,
            budget: cost.map(|c| c.budget()),
        }
    }
}

pub fn entries_to_matrix(dim: usize, rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::ChannelFile(format!(
            "state matrix is not {dim}x{dim}"
        )));
    }
    let mut mat = CMat::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            mat[(i, j)] = Complex::new(re, im);
        }
    }
    Ok(mat)
}

pub fn matrix_to_entries(mat: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..mat.nrows())
        .map(|i| (0..mat.ncols()).map(|j| [mat[(i, j)].re, mat[(i, j)].im]).collect())
        .collect()
}

/// Operator entries as a JSON value (row-major `[re, im]` pairs).
pub fn entries_json(op: &HermitianOperator) -> serde_json::Value {
    serde_json::to_value(matrix_to_entries(op.matrix())).expect("matrix serializes")
}

/// Persistent record of one command invocation. Replaying the record with
/// the same build must reproduce `outputs` byte for byte; `wall_time_ms` is
/// diagnostic only and excluded from that comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub wall_time_ms: f64,
    pub outputs: serde_json::Value,
}

impl RunRecord {
    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("run records serialize")
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Canonical byte rendering of the replay-relevant outputs.
    pub fn outputs_canonical(&self) -> String {
        serde_json::to_string(&self.outputs).expect("outputs serialize")
    }
}

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_state;

    #[test]
    fn channel_file_round_trip_is_exact() {
        let ch = CqChannel::new(vec![
            ("a".into(), random_state(3, 1)),
            ("b".into(), random_state(3, 2)),
        ])
        .unwrap();
        let cost = CostSpec::from_pairs(&[("a", 0.25), ("b", 1.5)], 0.75);
        let file = ChannelFile::from_model(&ch, Some(&cost));
        let text = file.render();
        let parsed = ChannelFile::parse(&text).unwrap();
        assert_eq!(file, parsed);

        let (ch2, cost2) = parsed.to_model(&Tolerances::default()).unwrap();
        for (label, state) in ch.inputs() {
            let diff = (state.matrix() - ch2.state(label).unwrap().matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-15);
        }
        let cost2 = cost2.unwrap();
        assert_eq!(cost2.budget(), 0.75);
        assert_eq!(cost2.cost_of("b").unwrap(), 1.5);
    }

    #[test]
    fn channel_file_rejects_bad_states() {
        let text = r#"{
            "dim": 2,
            "inputs": [
                {"label": "x", "state": [[[1.0, 0.0], [0.5, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}
            ]
        }"#;
        let file = ChannelFile::parse(text).unwrap();
        assert!(matches!(
            file.to_model(&Tolerances::default()),
            Err(Error::ChannelFile(_))
        ));
    }

    #[test]
    fn budget_without_costs_is_rejected() {
        let ch = CqChannel::new(vec![("a".into(), random_state(2, 5))]).unwrap();
        let mut file = ChannelFile::from_model(&ch, None);
        file.budget = Some(1.0);
        assert!(file.to_model(&Tolerances::default()).is_err());
    }

    #[test]
    fn round_trip_is_exact_for_arbitrary_states() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        let strategy = proptest::collection::vec(
            (-1.0f64..1.0, -1.0f64..1.0),
            2 * 9,
        );
        runner
            .run(&strategy, |data| {
                let states: Vec<(String, DensityMatrix)> = data
                    .chunks(9)
                    .enumerate()
                    .map(|(i, chunk)| {
                        let g = CMat::from_fn(3, 3, |r, c| {
                            let (re, im) = chunk[r * 3 + c];
                            Complex::new(re, im)
                        });
                        let h = HermitianOperator::hermitian_part(&g * g.adjoint())
                            .matrix()
                            .clone()
                            + CMat::identity(3, 3).scale(1e-6);
                        let h = HermitianOperator::hermitian_part(h);
                        let rho = DensityMatrix::new(h.scale(1.0 / h.trace())).unwrap();
                        (format!("x{i}"), rho)
                    })
                    .collect();
                let ch = CqChannel::new(states).unwrap();
                let file = ChannelFile::from_model(&ch, None);
                let parsed = ChannelFile::parse(&file.render()).unwrap();
                prop_assert_eq!(&file, &parsed);
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn run_record_round_trip() {
        let rec = RunRecord {
            command: "capacity".into(),
            params: serde_json::json!({"tol": 1e-7}),
            seed: 7,
            version: "0.1.0".into(),
            wall_time_ms: 12.5,
            outputs: serde_json::json!({"value_nats": 0.5}),
        };
        let parsed = RunRecord::parse(&rec.render()).unwrap();
        assert_eq!(parsed.outputs_canonical(), rec.outputs_canonical());
    }
}
