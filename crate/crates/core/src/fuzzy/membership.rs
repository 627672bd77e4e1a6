use serde::{Deserialize, Serialize};

use super::FuzzyError;

/// Piecewise-linear membership function.
///
/// Parameters must be non-decreasing; this is checked when the function is
/// built (directly or through deserialization), so evaluation never fails.
/// A triangle with `a == b` (or `b == c`) is a shoulder that reaches 1 at the
/// degenerate end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMembership", into = "RawMembership")]
pub enum MembershipFunction {
    Triangular { a: f64, b: f64, c: f64 },
    Trapezoidal { a: f64, b: f64, c: f64, d: f64 },
}

impl MembershipFunction {
    pub fn triangular(a: f64, b: f64, c: f64) -> Result<Self, FuzzyError> {
        check_ordered(&[a, b, c])?;
        Ok(Self::Triangular { a, b, c })
    }

    pub fn trapezoidal(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        check_ordered(&[a, b, c, d])?;
        Ok(Self::Trapezoidal { a, b, c, d })
    }

    /// Degree of membership of `x`, in `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Triangular { a, b, c } => ramp(x, a, b, b, c),
            Self::Trapezoidal { a, b, c, d } => ramp(x, a, b, c, d),
        }
    }

    /// Closed support `[first, last]` of the function.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Triangular { a, c, .. } => (a, c),
            Self::Trapezoidal { a, d, .. } => (a, d),
        }
    }

    /// Parameter list in order; the breakpoints of the piecewise-linear graph.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Triangular { a, b, c } => vec![a, b, c],
            Self::Trapezoidal { a, b, c, d } => vec![a, b, c, d],
        }
    }

    /// Location of the apex (midpoint of the plateau for trapezoids).
    pub fn peak(&self) -> f64 {
        match *self {
            Self::Triangular { b, .. } => b,
            Self::Trapezoidal { b, c, .. } => 0.5 * (b + c),
        }
    }
}

fn ramp(x: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    if x < a || x > d {
        0.0
    } else if x >= b && x <= c {
        1.0
    } else if x < b {
        (x - a) / (b - a)
    } else {
        (d - x) / (d - c)
    }
}

fn check_ordered(params: &[f64]) -> Result<(), FuzzyError> {
    if params.iter().any(|p| !p.is_finite()) || params.windows(2).any(|w| w[0] > w[1]) {
        return Err(FuzzyError::MalformedMembership(params.to_vec()));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Shape {
    Triangular,
    Trapezoidal,
}

#[derive(Serialize, Deserialize)]
struct RawMembership {
    shape: Shape,
    params: Vec<f64>,
}

impl TryFrom<RawMembership> for MembershipFunction {
    type Error = FuzzyError;

    fn try_from(raw: RawMembership) -> Result<Self, Self::Error> {
        match (raw.shape, raw.params.as_slice()) {
            (Shape::Triangular, &[a, b, c]) => Self::triangular(a, b, c),
            (Shape::Trapezoidal, &[a, b, c, d]) => Self::trapezoidal(a, b, c, d),
            (_, p) => Err(FuzzyError::MalformedMembership(p.to_vec())),
        }
    }
}

impl From<MembershipFunction> for RawMembership {
    fn from(mf: MembershipFunction) -> Self {
        let shape = match mf {
            MembershipFunction::Triangular { .. } => Shape::Triangular,
            MembershipFunction::Trapezoidal { .. } => Shape::Trapezoidal,
        };
        RawMembership { shape, params: mf.params() }
    }
}
