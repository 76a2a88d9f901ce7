use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A correlation coefficient, or the marker for a degenerate input
/// (zero variance, or a fully tied vector for τ-b). Never silently zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    Defined(f64),
    Undefined,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Defined(v) => Some(v),
            Correlation::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Correlation::Defined(_))
    }
}

impl fmt::Display for Correlation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correlation::Defined(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{v}"),
            },
            Correlation::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Correlation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Correlation::Defined(v) => s.serialize_f64(*v),
            Correlation::Undefined => s.serialize_none(),
        }
    }
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("correlation inputs must be finite".into()));
    }
    Ok(())
}

/// Sample Pearson correlation, computed with a two-pass (mean-centred) sum.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_inputs(x, y)?;
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation::Undefined);
    }
    Ok(Correlation::Defined((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

/// Pair counts behind Kendall's τ; `ties_x`/`ties_y` include joint ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairCounts {
    pub concordant: u64,
    pub discordant: u64,
    pub ties_x: u64,
    pub ties_y: u64,
    pub pairs: u64,
}

impl PairCounts {
    pub fn tau_b(&self) -> Correlation {
        let left = self.pairs - self.ties_x;
        let right = self.pairs - self.ties_y;
        if left == 0 || right == 0 {
            return Correlation::Undefined;
        }
        let num = self.concordant as f64 - self.discordant as f64;
        Correlation::Defined(num / (left as f64 * right as f64).sqrt())
    }
}

/// Enumerate all n(n-1)/2 pairs.
pub fn pair_counts(x: &[f64], y: &[f64]) -> PairCounts {
    let n = x.len();
    let mut c = PairCounts {
        pairs: (n as u64 * n.saturating_sub(1) as u64) / 2,
        ..Default::default()
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let ox = x[i].partial_cmp(&x[j]).unwrap_or(Ordering::Equal);
            let oy = y[i].partial_cmp(&y[j]).unwrap_or(Ordering::Equal);
            match (ox, oy) {
                (Ordering::Equal, Ordering::Equal) => {
                    c.ties_x += 1;
                    c.ties_y += 1;
                }
                (Ordering::Equal, _) => c.ties_x += 1,
                (_, Ordering::Equal) => c.ties_y += 1,
                (a, b) if a == b => c.concordant += 1,
                _ => c.discordant += 1,
            }
        }
    }
    c
}

/// Kendall τ-b = (C − D) / √((n₀ − Tₓ)(n₀ − Tᵧ)).
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_inputs(x, y)?;
    Ok(pair_counts(x, y).tau_b())
}
