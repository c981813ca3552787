//! The multiplicative theta function `θ(w; q) = (w, q/w; q)_∞` and the four
//! Jacobi theta functions built from it.
//!
//! Two independent evaluation routes are provided: the infinite product on an
//! argument reduced into the fundamental annulus `|q| < |w| ≤ 1`, and the
//! bilateral triple-product series summed in double-double arithmetic. They
//! share nothing except the `(q; q)_∞` prefactor used by the series route.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::precision::{ComplexValue, DdComplex};
use crate::qseries::{pochhammer_inf_base, Nome, Truncated, TruncationPolicy};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn ipow(z: Complex64, k: i64) -> Complex64 {
    match i32::try_from(k) {
        Ok(k) => z.powi(k),
        Err(_) => z.powf(k as f64),
    }
}

/// An argument `w = q^k · r` with `r` in the annulus `|q| < |r| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaArgument {
    w: Complex64,
    reduced_w: Complex64,
    shift_k: i64,
}

impl ThetaArgument {
    pub fn new(w: Complex64, nome: &Nome) -> Result<Self> {
        if w == Complex64::new(0.0, 0.0) || !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::Domain(format!("theta argument must be finite and nonzero, got {w}")));
        }
        let q = nome.q();
        let q_mod = nome.modulus();
        let mut k = (w.norm().ln() / q_mod.ln()).floor() as i64;
        let mut r = w / ipow(q, k);
        // floor() can land one step off when |w| sits on a power of |q|.
        for _ in 0..4 {
            let m = r.norm();
            if m > 1.0 {
                k -= 1;
            } else if m <= q_mod {
                k += 1;
            } else {
                break;
            }
            r = w / ipow(q, k);
        }
        Ok(Self {
            w,
            reduced_w: r,
            shift_k: k,
        })
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn reduced_w(&self) -> Complex64 {
        self.reduced_w
    }

    pub fn shift_k(&self) -> i64 {
        self.shift_k
    }

    /// True when the reduced argument is 1 to within one ulp, i.e. `w ∈ q^ℤ`.
    pub fn is_zero_point(&self) -> bool {
        (self.reduced_w - ONE).norm() <= f64::EPSILON
    }
}

/// Argument `z` of the additive Jacobi functions and the period ratio `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditiveArgument {
    pub z: Complex64,
    pub tau: Complex64,
}

impl AdditiveArgument {
    pub fn new(z: Complex64, tau: Complex64) -> Result<Self> {
        Nome::from_tau(tau)?;
        Ok(Self { z, tau })
    }
}

/// Relative distance of `w` from the zero set `q^ℤ` of `θ(·; q)`:
/// `min(|1 − r|, |1 − q/r|)` for the reduced argument `r`.
pub fn zero_distance(w: Complex64, nome: &Nome) -> f64 {
    match ThetaArgument::new(w, nome) {
        Ok(arg) => {
            let r = arg.reduced_w;
            (ONE - r).norm().min((ONE - nome.q() / r).norm())
        }
        Err(_) => 0.0,
    }
}

/// `θ(w; q)` from the product on the reduced argument, times the exact
/// quasi-periodicity coefficient.
pub fn theta_product(w: &ThetaArgument, nome: &Nome, policy: &TruncationPolicy) -> Result<Truncated> {
    if w.is_zero_point() {
        return Ok(Truncated {
            value: ComplexValue::zero(),
            terms_used: 0,
            error_bound: 0.0,
        });
    }
    let q = nome.q();
    let r = w.reduced_w;
    let left = pochhammer_inf_base(r, q, policy)?;
    let right = pochhammer_inf_base(q / r, q, policy)?;
    let coefficient = ComplexValue::new(shift_law(r, nome, w.shift_k));
    let value = coefficient * left.value * right.value;
    let rel = |t: &Truncated| {
        let m = t.value.norm();
        if m > 0.0 {
            t.error_bound / m
        } else {
            0.0
        }
    };
    let rel_err = (1.0 + rel(&left)) * (1.0 + rel(&right)) - 1.0;
    Ok(Truncated {
        value,
        terms_used: left.terms_used + right.terms_used,
        error_bound: value.norm() * rel_err,
    })
}

/// `θ(w; q)` from the triple-product series `(q;q)_∞⁻¹ Σ (−1)^k q^{k(k−1)/2} w^k`.
pub fn theta_series(w: Complex64, nome: &Nome, policy: &TruncationPolicy) -> Result<Truncated> {
    if w == Complex64::new(0.0, 0.0) || !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain(format!("theta argument must be finite and nonzero, got {w}")));
    }
    let q = nome.q();
    let q_mod = nome.modulus();
    let euler = pochhammer_inf_base(q, q, policy)?;
    let euler_mod = euler.value.norm();

    // u_k = |q|^{k(k-1)/2} M^k dominates the k-th and (-k)-th terms.
    let ln_m = w.norm().ln().abs();
    let ln_q = q_mod.ln();
    let ln_u = |k: f64| 0.5 * k * (k - 1.0) * ln_q + k * ln_m;
    let ln_budget = (policy.target_abs_error * euler_mod * (1.0 - q_mod) / 2.0).ln();
    let mut cutoff = 1usize;
    loop {
        let k = cutoff as f64;
        if k * ln_q + ln_m <= 0.0 && ln_u(k + 1.0) <= ln_budget {
            break;
        }
        cutoff += 1;
        if cutoff > policy.max_terms {
            return Err(Error::TruncationBudgetExceeded {
                q_modulus: q_mod,
                max_terms: policy.max_terms,
                needed: cutoff,
            });
        }
    }

    let qd = DdComplex::from_c64(q);
    let wd = DdComplex::from_c64(w);
    let wd_inv = wd.recip();
    let mut sum = DdComplex::ONE;
    let mut term = DdComplex::ONE;
    let mut q_pow = DdComplex::ONE;
    for _ in 0..cutoff {
        term = -(term * q_pow * wd);
        q_pow = q_pow * qd;
        sum = sum + term;
    }
    term = DdComplex::ONE;
    q_pow = qd;
    for _ in 0..cutoff {
        term = -(term * q_pow * wd_inv);
        q_pow = q_pow * qd;
        sum = sum + term;
    }

    let value = sum.to_c64() / euler.value.value();
    let omitted = 2.0 * ln_u(cutoff as f64 + 1.0).exp() / ((1.0 - q_mod) * euler_mod);
    let euler_rel = euler.error_bound / euler_mod;
    Ok(Truncated {
        value: ComplexValue::new(value),
        terms_used: 2 * cutoff + 1,
        error_bound: omitted + value.norm() * euler_rel / (1.0 - euler_rel),
    })
}

/// `θ(w₁)·…·θ(w_k)`.
pub fn theta_multi(ws: &[Complex64], nome: &Nome, policy: &TruncationPolicy) -> Result<Truncated> {
    if ws.is_empty() {
        return Err(Error::EmptyArgumentList);
    }
    let mut value = ComplexValue::one();
    let mut rel = 1.0;
    let mut terms_used = 0;
    for &w in ws {
        let t = theta_product(&ThetaArgument::new(w, nome)?, nome, policy)?;
        let m = t.value.norm();
        if m > 0.0 {
            rel *= 1.0 + t.error_bound / m;
        }
        value = value * t.value;
        terms_used += t.terms_used;
    }
    Ok(Truncated {
        value,
        terms_used,
        error_bound: value.norm() * (rel - 1.0),
    })
}

/// Coefficient `c` with `θ(1/w) = c·θ(w)`, namely `−1/w`.
pub fn invert_law(w: Complex64) -> Complex64 {
    -w.inv()
}

/// Coefficient `c` with `θ(q^k w) = c·θ(w)`, namely `(−1)^k q^{−k(k−1)/2} w^{−k}`.
pub fn shift_law(w: Complex64, nome: &Nome, k: i64) -> Complex64 {
    if k == 0 {
        return ONE;
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * ipow(nome.q(), -(k * (k - 1) / 2)) * ipow(w, -k)
}

/// Anything that behaves like `θ(·; q)` for a fixed nome. The identity
/// catalog is written against this trait so the same formulas can be fed
/// with transformed or deliberately wrong theta functions in tests.
pub trait ThetaFunction {
    fn nome(&self) -> Nome;

    fn eval(&self, w: Complex64) -> Result<Complex64>;

    fn product(&self, ws: &[Complex64]) -> Result<Complex64> {
        ws.iter().try_fold(ONE, |acc, &w| Ok(acc * self.eval(w)?))
    }
}

/// `θ(·; q)` through [`theta_product`].
#[derive(Debug, Clone, Copy)]
pub struct ThetaKernel {
    nome: Nome,
    policy: TruncationPolicy,
}

impl ThetaKernel {
    pub fn new(nome: Nome, policy: TruncationPolicy) -> Self {
        Self { nome, policy }
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }
}

impl ThetaFunction for ThetaKernel {
    fn nome(&self) -> Nome {
        self.nome
    }

    fn eval(&self, w: Complex64) -> Result<Complex64> {
        let arg = ThetaArgument::new(w, &self.nome)?;
        Ok(theta_product(&arg, &self.nome, &self.policy)?.value.value())
    }
}

/// Index of a Jacobi theta function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Jacobi {
    One,
    Two,
    Three,
    Four,
}

impl Jacobi {
    pub const ALL: [Jacobi; 4] = [Jacobi::One, Jacobi::Two, Jacobi::Three, Jacobi::Four];
}

impl TryFrom<u8> for Jacobi {
    type Error = Error;
    fn try_from(a: u8) -> Result<Self> {
        match a {
            1 => Ok(Jacobi::One),
            2 => Ok(Jacobi::Two),
            3 => Ok(Jacobi::Three),
            4 => Ok(Jacobi::Four),
            _ => Err(Error::Domain(format!("Jacobi theta index must be 1..=4, got {a}"))),
        }
    }
}

/// Precomputed state for evaluating `θ_a(z | τ)` at one `τ`.
#[derive(Debug, Clone, Copy)]
pub struct JacobiKernel {
    tau: Complex64,
    q: Complex64,
    quarter: Complex64,
    prefactor: Complex64,
    kernel: ThetaKernel,
}

impl JacobiKernel {
    pub fn new(tau: Complex64, policy: TruncationPolicy) -> Result<Self> {
        let nome = Nome::from_tau(tau)?;
        let i_pi_tau = Complex64::i() * PI * tau;
        // q² straight from τ, not by squaring q.
        let base = Nome::new((2.0 * i_pi_tau).exp())?;
        let prefactor = pochhammer_inf_base(base.q(), base.q(), &policy)?.value.value();
        Ok(Self {
            tau,
            q: nome.q(),
            quarter: (0.25 * i_pi_tau).exp(),
            prefactor,
            kernel: ThetaKernel::new(base, policy),
        })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn eval(&self, a: Jacobi, z: Complex64) -> Result<Complex64> {
        let i_pi_z = Complex64::i() * PI * z;
        let e = (2.0 * i_pi_z).exp();
        Ok(match a {
            Jacobi::One => {
                Complex64::i() * self.quarter * self.prefactor * (-i_pi_z).exp() * self.kernel.eval(e)?
            }
            Jacobi::Two => self.quarter * self.prefactor * (-i_pi_z).exp() * self.kernel.eval(-e)?,
            Jacobi::Three => self.prefactor * self.kernel.eval(-self.q * e)?,
            Jacobi::Four => self.prefactor * self.kernel.eval(self.q * e)?,
        })
    }
}

/// `θ_a(z | τ)`.
pub fn jacobi_theta(a: Jacobi, arg: &AdditiveArgument, policy: &TruncationPolicy) -> Result<ComplexValue> {
    let kernel = JacobiKernel::new(arg.tau, *policy)?;
    Ok(ComplexValue::new(kernel.eval(a, arg.z)?))
}
