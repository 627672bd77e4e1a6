use serde::{Deserialize, Serialize};

use super::{FuzzyError, MembershipFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub membership: MembershipFunction,
}

impl Term {
    pub fn new(label: impl Into<String>, membership: MembershipFunction) -> Self {
        Self { label: label.into(), membership }
    }
}

/// A crisp universe `[lo, hi]` partitioned by labelled fuzzy terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVariable", into = "RawVariable")]
pub struct LinguisticVariable {
    name: String,
    universe: (f64, f64),
    terms: Vec<Term>,
}

impl LinguisticVariable {
    /// Builds the variable, checking that the universe is non-empty, every term
    /// lives inside it, labels are unique and the terms cover the universe.
    pub fn new(name: impl Into<String>, universe: (f64, f64), terms: Vec<Term>) -> Result<Self, FuzzyError> {
        let name = name.into();
        let (lo, hi) = universe;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::BadUniverse { variable: name, lo, hi });
        }
        if terms.is_empty() {
            return Err(FuzzyError::NoTerms(name));
        }
        for (i, t) in terms.iter().enumerate() {
            let (s0, s1) = t.membership.support();
            if s0 < lo || s1 > hi {
                return Err(FuzzyError::SupportOutsideUniverse { variable: name, term: t.label.clone() });
            }
            if terms[..i].iter().any(|o| o.label == t.label) {
                return Err(FuzzyError::DuplicateLabel { variable: name, label: t.label.clone() });
            }
        }
        let var = Self { name, universe, terms };
        if let Some(x) = var.uncovered_point() {
            return Err(FuzzyError::NotCovered { variable: var.name, x });
        }
        Ok(var)
    }

    /// Returns a point of the universe where every term is zero, if any.
    ///
    /// All memberships are linear between consecutive breakpoints, so testing
    /// the breakpoints and the midpoints between them is exhaustive.
    fn uncovered_point(&self) -> Option<f64> {
        let (lo, hi) = self.universe;
        let mut knots: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|t| t.membership.params())
            .chain([lo, hi])
            .filter(|x| (lo..=hi).contains(x))
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mids: Vec<f64> = knots.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        knots
            .into_iter()
            .chain(mids)
            .find(|&x| self.terms.iter().all(|t| t.membership.eval(x) <= 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> (f64, f64) {
        self.universe
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.label == label)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.universe.0, self.universe.1)
    }

    /// Membership degree of the clamped input in every term, in term order.
    pub fn fuzzify(&self, x: f64) -> Vec<f64> {
        let x = self.clamp(x);
        self.terms.iter().map(|t| t.membership.eval(x)).collect()
    }

    /// `n` evenly spaced terms with apexes from `lo` to `hi`, neighbours
    /// overlapping by half; the outer terms are shoulders.
    pub fn uniform_partition(name: impl Into<String>, universe: (f64, f64), labels: &[&str]) -> Result<Self, FuzzyError> {
        let (lo, hi) = universe;
        let n = labels.len();
        if n < 2 {
            return Err(FuzzyError::NoTerms(name.into()));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let apex = |i: usize| if i + 1 == n { hi } else { lo + step * i as f64 };
        let terms = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let a = if i == 0 { lo } else { apex(i - 1) };
                let c = if i + 1 == n { hi } else { apex(i + 1) };
                MembershipFunction::triangular(a, apex(i), c).map(|mf| Term::new(*label, mf))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(name, universe, terms)
    }
}

#[derive(Serialize, Deserialize)]
struct RawVariable {
    name: String,
    universe: (f64, f64),
    terms: Vec<Term>,
}

impl TryFrom<RawVariable> for LinguisticVariable {
    type Error = FuzzyError;

    fn try_from(raw: RawVariable) -> Result<Self, Self::Error> {
        Self::new(raw.name, raw.universe, raw.terms)
    }
}

impl From<LinguisticVariable> for RawVariable {
    fn from(v: LinguisticVariable) -> Self {
        RawVariable { name: v.name, universe: v.universe, terms: v.terms }
    }
}
