//! Closed set of scalar functions accepted by the contour path and the CLI.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::PsfError;

/// Number of angular samples used to estimate sup |f| on a circle.
pub const SUP_SAMPLES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// e^{-z}
    ExpNeg,
    /// e^{-iz}
    ExpNegI,
    /// sum_n coeffs[n] z^n
    Poly { coeffs: Vec<f64> },
    /// 1 / (z + c)
    InvShift { c: f64 },
    /// e^{-t z^power}, used for integer-order decay profiles.
    Decay { t: f64, power: u32 },
}

impl FunctionSpec {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            FunctionSpec::ExpNeg => (-z).exp(),
            FunctionSpec::ExpNegI => (-Complex64::i() * z).exp(),
            FunctionSpec::Poly { coeffs } => coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a),
            FunctionSpec::InvShift { c } => Complex64::new(1.0, 0.0) / (z + c),
            FunctionSpec::Decay { t, power } => (-(*t) * z.powu(*power)).exp(),
        }
    }

    pub fn as_fn(&self) -> impl Fn(Complex64) -> Complex64 + Sync + '_ {
        move |z| self.eval(z)
    }

    pub fn degree(&self) -> Option<usize> {
        match self {
            FunctionSpec::Poly { coeffs } => {
                Some(coeffs.iter().rposition(|&a| a != 0.0).unwrap_or(0))
            }
            _ => None,
        }
    }

    /// Finite singularities of f.
    pub fn poles(&self) -> Vec<Complex64> {
        match self {
            FunctionSpec::InvShift { c } => vec![Complex64::new(-c, 0.0)],
            _ => Vec::new(),
        }
    }

    /// True when f has no singularity within `tol` of the circle |z| = radius.
    pub fn holomorphic_near_circle(&self, radius: f64, tol: f64) -> bool {
        self.poles().iter().all(|p| (p.norm() - radius).abs() > tol)
    }

    /// True when f is holomorphic on the closed disk |z| <= radius.
    pub fn holomorphic_on_disk(&self, radius: f64) -> bool {
        self.poles().iter().all(|p| p.norm() > radius)
    }

    /// Upper bound on sup_{|z| = r} |f(z)| in closed form.
    ///
    /// Exact for e^{-z}, e^{-iz}, 1/(z+c) and for polynomials with
    /// nonnegative coefficients.
    pub fn sup_bound(&self, r: f64) -> f64 {
        match self {
            FunctionSpec::ExpNeg | FunctionSpec::ExpNegI => r.exp(),
            FunctionSpec::Poly { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(n, a)| a.abs() * r.powi(n as i32))
                .sum(),
            FunctionSpec::InvShift { c } => {
                let gap = (c.abs() - r).abs();
                if gap == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / gap
                }
            }
            FunctionSpec::Decay { t, power } => (t.abs() * r.powi(*power as i32)).exp(),
        }
    }
}

/// max |f| over `samples` equispaced points of the circle |z| = r.
pub fn sampled_sup<F>(f: F, r: f64, samples: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    (0..samples)
        .map(|k| f(Complex64::from_polar(r, 2.0 * PI * k as f64 / samples as f64)).norm())
        .fold(0.0, f64::max)
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::ExpNeg => write!(f, "exp-neg"),
            FunctionSpec::ExpNegI => write!(f, "exp-neg-i"),
            FunctionSpec::Poly { coeffs } => {
                let list: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", list.join(","))
            }
            FunctionSpec::InvShift { c } => write!(f, "inv-shift:{c}"),
            FunctionSpec::Decay { t, power } => write!(f, "decay:{t},{power}"),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = PsfError;

    /// Parses `exp-neg`, `exp-neg-i`, `poly:a0,a1,...` or `inv-shift:c`.
    fn from_str(s: &str) -> Result<Self, PsfError> {
        let s = s.trim();
        match s {
            "exp-neg" => return Ok(FunctionSpec::ExpNeg),
            "exp-neg-i" => return Ok(FunctionSpec::ExpNegI),
            _ => {}
        }
        let bad = |why: &str| PsfError::Parse(format!("function spec `{s}`: {why}"));
        if let Some(list) = s.strip_prefix("poly:") {
            let coeffs = list
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad("coefficient is not a number")))
                .collect::<Result<Vec<_>, _>>()?;
            if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                return Err(bad("coefficients must be finite"));
            }
            return Ok(FunctionSpec::Poly { coeffs });
        }
        if let Some(c) = s.strip_prefix("inv-shift:") {
            let c: f64 = c.trim().parse().map_err(|_| bad("shift is not a number"))?;
            if !c.is_finite() {
                return Err(bad("shift must be finite"));
            }
            return Ok(FunctionSpec::InvShift { c });
        }
        Err(bad("expected exp-neg, exp-neg-i, poly:<coeffs> or inv-shift:<c>"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for s in ["exp-neg", "exp-neg-i", "poly:1,2,0,3", "inv-shift:2"] {
            let f: FunctionSpec = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("poly:".parse::<FunctionSpec>().is_err());
        assert!("sin".parse::<FunctionSpec>().is_err());
        assert!("inv-shift:x".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn polynomial_horner_and_degree() {
        let f: FunctionSpec = "poly:1,2,0,3".parse().unwrap();
        assert_eq!(f.degree(), Some(3));
        let z = Complex64::new(0.5, -0.25);
        let direct = 1.0 + 2.0 * z + 3.0 * z * z * z;
        assert!((f.eval(z) - direct).norm() < 1e-15);
    }

    #[test]
    fn closed_form_sup_matches_sampling() {
        let cases: Vec<FunctionSpec> = vec![
            FunctionSpec::ExpNeg,
            FunctionSpec::ExpNegI,
            "poly:1,2,0,3".parse().unwrap(),
            FunctionSpec::InvShift { c: 3.0 },
        ];
        for f in cases {
            let sampled = sampled_sup(|z| f.eval(z), 1.5, SUP_SAMPLES);
            let bound = f.sup_bound(1.5);
            assert!((sampled - bound).abs() <= 1e-9 * bound, "{f}: {sampled} vs {bound}");
        }
    }
}
