//! Polynomial schedule ansatze in dimensionless time `s = t / T`.
//!
//! Each kind appends one closure coefficient so that its boundary values
//! are fixed regardless of the free coefficients:
//!
//! | kind        | polynomial                                      | s = 0 | s = 1 |
//! |-------------|-------------------------------------------------|-------|-------|
//! | `Driver`    | `1 + sum a_i s^i + (-1 - sum a_i) s^(k+1)`      | 1     | 0     |
//! | `Problem`   | `sum b_i s^i + (1 - sum b_i) s^(k+1)`           | 0     | 1     |
//! | `Driving`   | `sum e_i s^i - (sum e_i) s^(k+1)`               | 0     | 0     |
//! | `FixedPace` | `s (1 - s)`                                     | 0     | 0     |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScheduleKind {
    /// `A(s)`, multiplies the transverse-field driver.
    Driver,
    /// `B(s)`, multiplies the problem Hamiltonian.
    Problem,
    /// `C(s) = s(1 - s)`, no free coefficients.
    FixedPace,
    /// `C_i(s)`, per-operator optimal-driving schedule.
    Driving,
}

impl ScheduleKind {
    fn token(self) -> &'static str {
        match self {
            ScheduleKind::Driver => "A",
            ScheduleKind::Problem => "B",
            ScheduleKind::FixedPace => "C",
            ScheduleKind::Driving => "Ci",
        }
    }

    fn boundary(self) -> (f64, f64) {
        match self {
            ScheduleKind::Driver => (1.0, 0.0),
            ScheduleKind::Problem => (0.0, 1.0),
            ScheduleKind::FixedPace | ScheduleKind::Driving => (0.0, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialSchedule {
    kind: ScheduleKind,
    coeffs: Vec<f64>,
    /// Power-basis coefficients `c_0 .. c_{k+1}` including the closure term.
    power: Vec<f64>,
}

impl PolynomialSchedule {
    pub fn new(kind: ScheduleKind, coeffs: Vec<f64>) -> Result<Self> {
        if kind == ScheduleKind::FixedPace && !coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "fixed-pace schedule takes no coefficients".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite schedule coefficient".into()));
        }
        let power = match kind {
            ScheduleKind::FixedPace => vec![0.0, 1.0, -1.0],
            _ => {
                let (start, end) = kind.boundary();
                let sum: f64 = coeffs.iter().sum();
                let mut power = Vec::with_capacity(coeffs.len() + 2);
                power.push(start);
                power.extend_from_slice(&coeffs);
                power.push(end - start - sum);
                power
            }
        };
        Ok(Self {
            kind,
            coeffs,
            power,
        })
    }

    pub fn driver(alpha: Vec<f64>) -> Result<Self> {
        Self::new(ScheduleKind::Driver, alpha)
    }

    pub fn problem(beta: Vec<f64>) -> Result<Self> {
        Self::new(ScheduleKind::Problem, beta)
    }

    pub fn driving(epsilon: Vec<f64>) -> Result<Self> {
        Self::new(ScheduleKind::Driving, epsilon)
    }

    pub fn fixed_pace() -> Self {
        Self::new(ScheduleKind::FixedPace, Vec::new()).expect("no coefficients")
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// Number of free coefficients `k`.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Power-basis coefficients including the closure term.
    pub fn power_coeffs(&self) -> &[f64] {
        &self.power
    }

    pub fn degree(&self) -> usize {
        self.power.len() - 1
    }

    /// Checked evaluation; `s` must lie in `[0, 1]`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::TimeOutOfRange(s));
        }
        Ok(self.value(s))
    }

    /// Horner evaluation. The endpoints return the boundary values exactly.
    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        if s == 0.0 {
            return self.kind.boundary().0;
        }
        if s == 1.0 {
            return self.kind.boundary().1;
        }
        self.power.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// `d/ds` of the schedule.
    pub fn derivative(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &c) in self.power.iter().enumerate().skip(1).rev() {
            acc = acc * s + c * i as f64;
        }
        acc
    }

    /// Largest `|value|` over `samples` evenly spaced points of `[0, 1]`.
    pub fn max_abs_on_grid(&self, samples: usize) -> f64 {
        let last = samples.max(2) - 1;
        (0..=last)
            .map(|k| self.value(k as f64 / last as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// `A(s) = 1 - s`, `B(s) = s`.
pub fn linear_schedules() -> (PolynomialSchedule, PolynomialSchedule) {
    (
        PolynomialSchedule::driver(vec![-1.0]).expect("finite"),
        PolynomialSchedule::problem(vec![1.0]).expect("finite"),
    )
}

impl fmt::Display for PolynomialSchedule {
    /// `kind k c1 ... ck`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.token(), self.coeffs.len())?;
        for c in &self.coeffs {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

impl FromStr for PolynomialSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fields = s.split_whitespace();
        let kind = match fields.next() {
            Some("A") => ScheduleKind::Driver,
            Some("B") => ScheduleKind::Problem,
            Some("C") => ScheduleKind::FixedPace,
            Some("Ci") => ScheduleKind::Driving,
            other => return Err(Error::Parse(format!("unknown schedule kind {other:?}"))),
        };
        let k: usize = fields
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("missing coefficient count in {s:?}")))?;
        let coeffs = fields
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad coefficient {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != k {
            return Err(Error::Parse(format!(
                "expected {k} coefficients, found {}",
                coeffs.len()
            )));
        }
        PolynomialSchedule::new(kind, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_coefficient_cases() {
        let a = PolynomialSchedule::driver(vec![0.0, 0.0]).unwrap();
        let b = PolynomialSchedule::problem(vec![0.0, 0.0]).unwrap();
        assert_eq!(a.eval(0.5).unwrap(), 0.875);
        assert_eq!(b.eval(0.5).unwrap(), 0.125);
        let c = PolynomialSchedule::fixed_pace();
        assert!((c.eval(0.3).unwrap() - 0.21).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_time_is_rejected() {
        let a = PolynomialSchedule::driver(vec![0.3]).unwrap();
        assert_eq!(a.eval(1.5), Err(Error::TimeOutOfRange(1.5)));
        assert!(a.eval(-0.1).is_err());
    }

    #[test]
    fn fixed_pace_rejects_coefficients() {
        assert!(PolynomialSchedule::new(ScheduleKind::FixedPace, vec![1.0]).is_err());
    }

    #[test]
    fn linear_pair() {
        let (a, b) = linear_schedules();
        assert_eq!(a.eval(0.25).unwrap(), 0.75);
        assert_eq!(b.eval(1.0).unwrap(), 1.0);
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            assert!((a.value(s) + b.value(s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let a = PolynomialSchedule::driver(vec![0.7, -2.1, 1.3]).unwrap();
        for k in 1..10 {
            let s = k as f64 / 10.0;
            let h = 1e-6;
            let fd = (a.value(s + h) - a.value(s - h)) / (2.0 * h);
            assert!((fd - a.derivative(s)).abs() < 1e-7);
        }
    }

    #[test]
    fn text_record() {
        let c = PolynomialSchedule::driving(vec![0.5, -1.25, 3.0]).unwrap();
        assert_eq!(c.to_string(), "Ci 3 0.5 -1.25 3");
        assert_eq!("Ci 3 0.5 -1.25 3".parse::<PolynomialSchedule>().unwrap(), c);
        assert_eq!("C 0".parse::<PolynomialSchedule>().unwrap(), PolynomialSchedule::fixed_pace());
        assert!("A 2 1.0".parse::<PolynomialSchedule>().is_err());
        assert!("Z 0".parse::<PolynomialSchedule>().is_err());
    }

    fn kind_strategy() -> impl Strategy<Value = ScheduleKind> {
        prop_oneof![
            Just(ScheduleKind::Driver),
            Just(ScheduleKind::Problem),
            Just(ScheduleKind::Driving),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn boundary_values_are_exact(
            kind in kind_strategy(),
            coeffs in prop::collection::vec(-50.0f64..50.0, 0..6),
        ) {
            let sched = PolynomialSchedule::new(kind, coeffs).unwrap();
            let (start, end) = kind.boundary();
            prop_assert_eq!(sched.eval(0.0).unwrap(), start);
            prop_assert_eq!(sched.eval(1.0).unwrap(), end);
        }

        #[test]
        fn high_order_differences_vanish(
            kind in kind_strategy(),
            coeffs in prop::collection::vec(-5.0f64..5.0, 1..5),
        ) {
            let sched = PolynomialSchedule::new(kind, coeffs).unwrap();
            let order = sched.degree() + 1;
            let h = 1.0 / 16.0;
            let mut values: Vec<f64> = (0..=order)
                .map(|i| sched.value(0.1 + i as f64 * h))
                .collect();
            for _ in 0..order {
                values = values.windows(2).map(|w| w[1] - w[0]).collect();
            }
            prop_assert!(values[0].abs() < 1e-9);
        }
    }
}
