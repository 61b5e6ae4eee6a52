//! Machine-readable verification reports.

use num_complex::Complex64;
use serde::Serialize;

pub const SCHEMA: &str = "1";

/// Complex number serialized as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Cplx { re: z.re, im: z.im }
    }
}

impl From<Cplx> for Complex64 {
    fn from(z: Cplx) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Status::Pass
    }
}

/// One side of a compared identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Side {
    pub value: Cplx,
    pub tail_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl Side {
    pub fn approx(value: Complex64, tail_bound: f64) -> Self {
        Side { value: value.into(), tail_bound, exact: None }
    }

    pub fn exact(value: impl std::fmt::Display, approx: Complex64) -> Self {
        Side { value: approx.into(), tail_bound: 0.0, exact: Some(value.to_string()) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub schema: &'static str,
    pub identity: String,
    pub s: Option<Cplx>,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub lhs: Option<Side>,
    pub rhs: Option<Side>,
    pub abs_err: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
    pub details: serde_json::Value,
}

impl IdentityReport {
    /// A numeric comparison: pass iff `|lhs - rhs| <= tolerance`.
    pub fn compare(
        identity: &str,
        s: Option<Complex64>,
        n: Option<u64>,
        lhs: Side,
        rhs: Side,
        tolerance: f64,
    ) -> Self {
        let abs_err = (Complex64::from(lhs.value) - Complex64::from(rhs.value)).norm();
        IdentityReport {
            schema: SCHEMA,
            identity: identity.to_string(),
            s: s.map(Cplx::from),
            n,
            lhs: Some(lhs),
            rhs: Some(rhs),
            abs_err: Some(abs_err),
            tolerance: Some(tolerance),
            status: Status::from_bool(abs_err <= tolerance),
            details: serde_json::Value::Null,
        }
    }

    /// A check whose outcome is decided elsewhere (exact scans, certificates).
    pub fn check(identity: &str, n: Option<u64>, ok: bool, details: serde_json::Value) -> Self {
        IdentityReport {
            schema: SCHEMA,
            identity: identity.to_string(),
            s: None,
            n,
            lhs: None,
            rhs: None,
            abs_err: None,
            tolerance: None,
            status: Status::from_bool(ok),
            details,
        }
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }

    pub fn passed(&self) -> bool {
        self.status.is_pass()
    }
}

/// Formats `x` with `digits` significant digits, trimming trailing zeros.
pub fn fmt_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}
