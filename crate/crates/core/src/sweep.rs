//! Parameter sweeps over independent closed-loop runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nussbaum::NussbaumFamily;
use crate::plot::{Chart, Series};
use crate::scenario::{builtin, Scenario, ValidationError};
use crate::simulator::{compute_summary, integrate, SimError, SimTrace, Summary};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown built-in scenario {0:?}")]
    UnknownBuiltin(String),
    #[error("sweep has no values")]
    NoValues,
    #[error("value #{index} does not fit parameter {parameter:?}")]
    ValueKind { index: usize, parameter: SweptParameter },
    #[error("value #{index} yields an invalid scenario: {}", .errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid { index: usize, errors: Vec<ValidationError> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepBase {
    Builtin(String),
    Inline(Box<Scenario<f64>>),
}

/// Parameter applied uniformly to every agent (or to the reference protocol).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    Epsilon,
    /// A value of 0 disables the adaptive gain so that `L ≡ L(0)`.
    Gamma,
    Nussbaum,
    K,
    Alpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Nussbaum(NussbaumFamily<f64>),
}

impl SweepValue {
    pub fn label(&self) -> String {
        match self {
            Self::Number(v) => format!("{v}"),
            Self::Nussbaum(s) => {
                format!("a={} b={} c={} omega={} {:?}", s.a, s.b, s.c, s.omega, s.variant).to_lowercase()
            }
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Self::Number(v) => Some(*v),
            Self::Nussbaum(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub base: SweepBase,
    pub parameter: SweptParameter,
    pub values: Vec<SweepValue>,
    /// Overrides the base scenario's horizon when present.
    #[serde(default)]
    pub horizon: Option<f64>,
}

impl SweepPlan {
    pub fn base_scenario(&self) -> Result<Scenario<f64>, SweepError> {
        let mut sc = match &self.base {
            SweepBase::Builtin(name) => builtin(name).ok_or_else(|| SweepError::UnknownBuiltin(name.clone()))?,
            SweepBase::Inline(sc) => (**sc).clone(),
        };
        if let Some(h) = self.horizon {
            sc.integration.horizon = h;
        }
        Ok(sc)
    }

    /// One scenario per value, each validated.
    pub fn scenarios(&self) -> Result<Vec<Scenario<f64>>, SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::NoValues);
        }
        let base = self.base_scenario()?;
        self.values
            .iter()
            .enumerate()
            .map(|(index, value)| {
                let sc = apply(&base, self.parameter, value)
                    .ok_or(SweepError::ValueKind { index, parameter: self.parameter })?;
                sc.validate().map_err(|errors| SweepError::Invalid { index, errors })?;
                Ok(sc)
            })
            .collect()
    }
}

/// Copy of `base` with `parameter` set to `value`, or `None` on a kind mismatch.
pub fn apply(base: &Scenario<f64>, parameter: SweptParameter, value: &SweepValue) -> Option<Scenario<f64>> {
    let mut sc = base.clone();
    match (parameter, value) {
        (SweptParameter::Nussbaum, SweepValue::Nussbaum(family)) => {
            sc.agents.iter_mut().for_each(|a| a.controller.nussbaum = *family);
        }
        (SweptParameter::Epsilon, SweepValue::Number(v)) => {
            sc.agents.iter_mut().for_each(|a| a.controller.epsilon = *v)
        }
        (SweptParameter::Gamma, SweepValue::Number(v)) => {
            sc.agents.iter_mut().for_each(|a| a.controller.gamma = *v);
            sc.flags.adaptive_gain_enabled = *v != 0.0;
        }
        (SweptParameter::K, SweepValue::Number(v)) => sc.reference.k = *v,
        (SweptParameter::Alpha, SweepValue::Number(v)) => sc.reference.alpha = *v,
        _ => return None,
    }
    sc.name = format!("{}[{:?}={}]", base.name, parameter, value.label()).to_lowercase();
    Some(sc)
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub value: SweepValue,
    pub summary: Summary,
    pub trace: SimTrace<f64>,
}

/// Runs every value concurrently; results keep the order of `plan.values`.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRun>, SweepError> {
    let scenarios = plan.scenarios()?;
    let runs = scenarios
        .par_iter()
        .zip(plan.values.par_iter())
        .map(|(sc, value)| {
            let trace = integrate(sc).map_err(|e| match e {
                SimError::Invalid(errors) => SweepError::Invalid { index: 0, errors },
                SimError::StateShape { .. } => unreachable!("scenario supplies its own state"),
            })?;
            let summary = compute_summary(&trace, sc);
            Ok(SweepRun { value: value.clone(), summary, trace })
        })
        .collect::<Result<Vec<_>, SweepError>>()?;
    Ok(runs)
}

pub const SWEEP_CSV_HEADER: [&str; 8] =
    ["value", "e_final", "settling_time", "bounded", "omega_bound", "steady_pair_band", "peak_abs_y1", "status"];

/// Sweep table as CSV text.
pub fn sweep_csv(runs: &[SweepRun]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_CSV_HEADER).expect("in-memory write");
    for r in runs {
        let s = &r.summary;
        let status = if s.status.is_completed() { "completed" } else { "unstable" };
        w.write_record([
            r.value.label(),
            format!("{:e}", s.e_final),
            s.settling_time.map(|t| format!("{t}")).unwrap_or_default(),
            s.bounded.to_string(),
            format!("{}", s.omega_bound),
            format!("{:e}", s.steady_pair_band),
            format!("{:e}", s.peak_abs_y1),
            status.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("csv is utf-8")
}

/// `E_final` against the swept value; Nussbaum sweeps use the value index.
pub fn sweep_chart(plan: &SweepPlan, runs: &[SweepRun]) -> Chart {
    let x: Vec<f64> = runs.iter().enumerate().map(|(k, r)| r.value.as_number().unwrap_or(k as f64)).collect();
    let y = runs.iter().map(|r| r.summary.e_final).collect();
    Chart {
        title: format!("Final error sum under {:?} sweep", plan.parameter).to_lowercase(),
        x_label: format!("{:?}", plan.parameter).to_lowercase(),
        y_label: "E (mean over final 10%)".into(),
        series: vec![Series { label: "E_final".into(), x, y }],
        guides: vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::BENCHMARK_NAME;

    fn plan(parameter: SweptParameter, values: Vec<SweepValue>) -> SweepPlan {
        SweepPlan { base: SweepBase::Builtin(BENCHMARK_NAME.into()), parameter, values, horizon: Some(0.0) }
    }

    #[test]
    fn sweep_json_shape() {
        let text = r#"{"base": {"builtin": "four-agent-benchmark"}, "parameter": "epsilon", "values": [0.05, 0.1]}"#;
        let s: SweepPlan = serde_json::from_str(text).unwrap();
        assert_eq!(s.values, vec![SweepValue::Number(0.05), SweepValue::Number(0.1)]);
        let text = r#"{"base": {"builtin": "four-agent-benchmark"}, "parameter": "nussbaum",
            "values": [{"a": 1.0, "b": 0.0, "c": 1.0, "omega": 0.4, "variant": "cosine"}]}"#;
        let s: SweepPlan = serde_json::from_str(text).unwrap();
        assert!(matches!(s.values[0], SweepValue::Nussbaum(_)));
    }

    #[test]
    fn epsilon_sweep_scales_omega_bound_exactly() {
        let runs = run_sweep(&plan(
            SweptParameter::Epsilon,
            vec![0.05, 0.1, 0.2].into_iter().map(SweepValue::Number).collect(),
        ))
        .unwrap();
        let bounds: Vec<f64> = runs.iter().map(|r| r.summary.omega_bound).collect();
        assert_eq!(bounds, vec![0.125, 0.25, 0.5]);
    }

    #[test]
    fn gamma_zero_disables_adaptation() {
        let scs =
            plan(SweptParameter::Gamma, vec![SweepValue::Number(0.0), SweepValue::Number(1.5)]).scenarios().unwrap();
        assert!(!scs[0].flags.adaptive_gain_enabled);
        assert!(scs[1].flags.adaptive_gain_enabled);
    }

    #[test]
    fn kind_mismatch_and_invalid_values_are_rejected() {
        let bad = plan(SweptParameter::Nussbaum, vec![SweepValue::Number(1.0)]);
        assert!(matches!(bad.scenarios(), Err(SweepError::ValueKind { .. })));
        let bad = plan(SweptParameter::Alpha, vec![SweepValue::Number(1.5)]);
        assert!(matches!(bad.scenarios(), Err(SweepError::Invalid { .. })));
        assert!(matches!(plan(SweptParameter::K, vec![]).scenarios(), Err(SweepError::NoValues)));
    }

    #[test]
    fn csv_has_a_row_per_value() {
        let runs = run_sweep(&plan(SweptParameter::K, vec![SweepValue::Number(1.0), SweepValue::Number(2.0)])).unwrap();
        let csv = sweep_csv(&runs);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("value,e_final,settling_time,bounded,omega_bound"));
    }
}
