//! Nome validation, truncation control and q-Pochhammer products.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::ComplexValue;

/// A validated nome `q` with `0 < |q| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nome {
    q: Complex64,
    modulus: f64,
}

impl Nome {
    pub fn new(q: Complex64) -> Result<Self> {
        let modulus = q.norm();
        if !(q.re.is_finite() && q.im.is_finite()) || !(modulus > 0.0 && modulus < 1.0) {
            return Err(Error::Domain(format!(
                "nome must satisfy 0 < |q| < 1, got q = {}{:+}i (|q| = {modulus})",
                q.re, q.im
            )));
        }
        Ok(Self { q, modulus })
    }

    pub fn from_real(q: f64) -> Result<Self> {
        Self::new(Complex64::new(q, 0.0))
    }

    /// The nome `exp(iπτ)`; requires `Im τ > 0`.
    pub fn from_tau(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::Domain(format!("Im(tau) must be positive, got {}", tau.im)));
        }
        Self::new((Complex64::i() * std::f64::consts::PI * tau).exp())
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// The nome `q²`, the base used by the fundamental identities.
    pub fn squared(&self) -> Nome {
        let q2 = self.q * self.q;
        Nome {
            q: q2,
            modulus: q2.norm(),
        }
    }
}

/// Target error and term budget for every infinite product or series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub target_abs_error: f64,
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            target_abs_error: 1e-14,
            max_terms: 1_000_000,
        }
    }
}

impl TruncationPolicy {
    pub fn new(target_abs_error: f64, max_terms: usize) -> Result<Self> {
        if !(target_abs_error > 0.0 && target_abs_error.is_finite()) {
            return Err(Error::Domain(format!(
                "target_abs_error must be positive and finite, got {target_abs_error}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::Domain("max_terms must be positive".into()));
        }
        Ok(Self {
            target_abs_error,
            max_terms,
        })
    }

    /// Smallest `n ≥ 1` at which [`tail_bound`] is available and below the
    /// target for a product `∏(1 − a q^j)` with `|a| = a_mod`, `|q| = q_mod`.
    pub fn terms_for(&self, a_mod: f64, q_mod: f64) -> Result<usize> {
        if a_mod == 0.0 || q_mod == 0.0 {
            return Ok(1);
        }
        let fits = |n: usize| {
            matches!(tail_bound(a_mod, q_mod, n), Ok(b) if b <= self.target_abs_error)
        };
        let ln_q = q_mod.ln();
        let by_target = ((self.target_abs_error * (1.0 - q_mod) / (2.0 * a_mod)).ln() / ln_q).ceil();
        let by_regime = ((0.5 / a_mod).ln() / ln_q).ceil();
        let estimate = by_target.max(by_regime).max(1.0);
        if !estimate.is_finite() || estimate > self.max_terms as f64 {
            return Err(self.exceeded(q_mod, estimate));
        }
        let mut n = estimate as usize;
        while n > 1 && fits(n - 1) {
            n -= 1;
        }
        while !fits(n) {
            n += 1;
            if n > self.max_terms {
                return Err(self.exceeded(q_mod, n as f64));
            }
        }
        Ok(n)
    }

    fn exceeded(&self, q_modulus: f64, needed: f64) -> Error {
        Error::TruncationBudgetExceeded {
            q_modulus,
            max_terms: self.max_terms,
            needed: if needed.is_finite() { needed as usize } else { usize::MAX },
        }
    }
}

/// A truncated infinite evaluation together with its error certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncated {
    pub value: ComplexValue,
    pub terms_used: usize,
    /// Upper bound on `|exact − value|` from truncation.
    pub error_bound: f64,
}

impl Truncated {
    fn exact(z: Complex64, terms_used: usize) -> Self {
        Self {
            value: ComplexValue::new(z),
            terms_used,
            error_bound: 0.0,
        }
    }
}

/// Upper bound on `|log ∏_{j≥n}(1 − a q^j)|` for `|a| = a_mod`, `|q| = q_mod`.
///
/// Valid once `a_mod·q_mod^n < 1/2`, where `|log(1−x)| ≤ 2|x|` and the
/// geometric sum gives `2·a_mod·q_mod^n/(1 − q_mod)`.
pub fn tail_bound(a_mod: f64, q_mod: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&q_mod) {
        return Err(Error::Domain(format!("tail_bound needs 0 <= |q| < 1, got {q_mod}")));
    }
    if a_mod == 0.0 {
        return Ok(0.0);
    }
    let lead = a_mod * powu(q_mod, n);
    if lead >= 0.5 {
        return Err(Error::BoundUnavailable(lead));
    }
    Ok(2.0 * lead / (1.0 - q_mod))
}

fn powu(x: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(k) => x.powi(k),
        Err(_) => x.powf(n as f64),
    }
}

/// `(a; q)_∞` for a validated nome.
pub fn pochhammer_inf(a: Complex64, nome: &Nome, policy: &TruncationPolicy) -> Result<Truncated> {
    pochhammer_inf_base(a, nome.q(), policy)
}

/// `(a; q)_∞` for any base with `|q| < 1`, including `q = 0`.
pub fn pochhammer_inf_base(a: Complex64, q: Complex64, policy: &TruncationPolicy) -> Result<Truncated> {
    let q_mod = q.norm();
    if !(q_mod < 1.0) {
        return Err(Error::Domain(format!("product base must satisfy |q| < 1, got {q_mod}")));
    }
    if a == Complex64::new(0.0, 0.0) {
        return Ok(Truncated::exact(Complex64::new(1.0, 0.0), 0));
    }
    if q_mod == 0.0 {
        return Ok(Truncated::exact(Complex64::new(1.0, 0.0) - a, 1));
    }
    let a_mod = a.norm();
    let n = policy.terms_for(a_mod, q_mod)?;
    let value = finite_product(a, q, n);
    let log_tail = tail_bound(a_mod, q_mod, n)?;
    Ok(Truncated {
        value: ComplexValue::new(value),
        terms_used: n,
        error_bound: value.norm() * log_tail.exp_m1(),
    })
}

/// `(a; q)_n`, exact up to rounding; `n = 0` gives 1.
pub fn pochhammer_n(a: Complex64, nome: &Nome, n: usize) -> ComplexValue {
    ComplexValue::new(finite_product(a, nome.q(), n))
}

fn finite_product(a: Complex64, q: Complex64, n: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let mut acc = one;
    let mut aq = a;
    for _ in 0..n {
        acc *= one - aq;
        aq *= q;
    }
    acc
}
