//! Serialization with numbers rounded to a fixed number of significant digits.

use covenant_core::effort::EffortSolution;
use covenant_core::equilibrium::{Corner, EquilibriumSolution};
use covenant_core::{Error, ModelParams, ParamName};
use serde::Serialize;
use serde_json::Value;

/// Significant digits kept in every emitted number.
pub const SIG_DIGITS: usize = 12;

/// `v` rounded to `SIG_DIGITS` significant digits. Non-finite values pass
/// through unchanged.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIG_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Shortest decimal text of `round_sig(v)`.
pub fn format_number(v: f64) -> String {
    let r = round_sig(v);
    if r == 0.0 {
        // Normalises negative zero.
        "0".to_string()
    } else {
        format!("{r}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round_sig)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON text of `value` with rounded numbers and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("output types serialize");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

/// Short machine-readable name of an error's kind.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParams(_) => "invalid_params",
        Error::InvalidDensity(_) => "invalid_density",
        Error::OutOfRange { .. } => "out_of_range",
        Error::Infeasible { .. } => "infeasible",
        Error::Quadrature { .. } => "quadrature",
        Error::NonPositiveAtZero(_) => "non_positive_at_zero",
        Error::ClosedForm(_) => "closed_form",
        Error::NonInterior { .. } => "non_interior",
        Error::NoInteriorCrossing(_) => "no_interior_crossing",
        Error::Statics(_) => "statics",
    }
}

/// Sweep CSV columns, in order.
pub fn sweep_header() -> Vec<&'static str> {
    let mut cols: Vec<&'static str> = ParamName::ALL.iter().map(|p| p.as_str()).collect();
    cols.extend([
        "d1", "d0", "x_star", "corner", "unique", "p_fb", "p_star", "status",
    ]);
    cols
}

/// Outcome of one sweep point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub params: ModelParams,
    pub equilibrium: Option<EquilibriumSolution>,
    pub p_fb: Option<f64>,
    pub effort: Option<EffortSolution>,
    /// `ok`, or `<stage>:<detail>` naming what failed.
    pub status: String,
}

impl SweepRow {
    pub fn record(&self) -> Vec<String> {
        let num = |v: Option<f64>| v.map(format_number).unwrap_or_default();
        let mut rec: Vec<String> = ParamName::ALL
            .iter()
            .map(|&p| format_number(self.params.get(p)))
            .collect();
        let eq = self.equilibrium.as_ref();
        rec.push(num(eq.map(|e| e.d1)));
        rec.push(num(eq.map(|e| e.d0)));
        rec.push(num(eq.map(|e| e.x_star)));
        rec.push(
            eq.map(|e| match e.corner {
                Corner::Interior => "interior".to_string(),
                Corner::FullDisclosure => "full_disclosure".to_string(),
            })
            .unwrap_or_default(),
        );
        rec.push(eq.map(|e| e.unique.to_string()).unwrap_or_default());
        rec.push(num(self.p_fb));
        rec.push(num(self.effort.as_ref().map(|e| e.p_star)));
        rec.push(self.status.clone());
        rec
    }
}

/// CSV text with header for the given rows.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(sweep_header()).expect("in-memory write");
    for r in rows {
        w.write_record(r.record()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
