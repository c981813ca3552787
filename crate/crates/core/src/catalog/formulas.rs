//! Term lists for each identity. Every function returns the signed terms
//! whose sum is the residual; the scale is the largest term modulus.
//!
//! Multiplicative forms are generic over [`ThetaFunction`] so the algebraic
//! combinators can be exercised with functions that only share the
//! quasi-periodicity of `θ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qseries::{pochhammer_inf_base, TruncationPolicy};
use crate::theta::{zero_distance, Jacobi, JacobiKernel, ThetaFunction};

type C = Complex64;

/// Denominator arguments closer than this to `q^ℤ` are rejected.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-6;

fn scaled(k: C, terms: impl IntoIterator<Item = C>) -> impl Iterator<Item = C> {
    terms.into_iter().map(move |t| k * t)
}

fn check_denominator<T: ThetaFunction>(th: &T, w: C, label: impl FnOnce() -> String) -> Result<()> {
    let distance = zero_distance(w, &th.nome());
    if distance < ADMISSIBILITY_MARGIN {
        return Err(Error::DegenerateDenominator {
            argument: label(),
            distance,
        });
    }
    Ok(())
}

/// Weierstrass three-term relation, multiplicative form, in the nome of `th`.
pub fn first_fundamental_mult<T: ThetaFunction>(th: &T, x: C, y: C, u: C, v: C) -> Result<Vec<C>> {
    Ok(vec![
        y * u * th.product(&[x * y, x / y, v * u, v / u])?,
        u * v * th.product(&[x * u, x / u, y * v, y / v])?,
        v * y * th.product(&[x * v, x / v, u * y, u / y])?,
    ])
}

/// `F₁(x, y, u, v)`; `th2` must have nome `q²`.
pub fn f1<T: ThetaFunction>(th2: &T, x: C, y: C, u: C, v: C) -> Result<[C; 3]> {
    Ok([
        th2.product(&[x * y, x / y, u * v, u / v])?,
        -th2.product(&[x * v, x / v, u * y, u / y])?,
        -(u / y) * th2.product(&[y * v, y / v, x * u, x / u])?,
    ])
}

/// `F₂(x, y, u, v)`; `th2` must have nome `q²`.
pub fn f2<T: ThetaFunction>(th2: &T, q: C, x: C, y: C, u: C, v: C) -> Result<[C; 5]> {
    let k = x * u / q;
    Ok([
        2.0 * th2.product(&[x * y, x / y, u * v, u / v])?,
        -th2.product(&[x * v, x / v, u * y, u / y])?,
        -th2.product(&[-x * v, -x / v, -u * y, -u / y])?,
        -k * th2.product(&[q * x * v, q * x / v, q * u * y, q * u / y])?,
        k * th2.product(&[-q * x * v, -q * x / v, -q * u * y, -q * u / y])?,
    ])
}

/// `F₁(x,y,u,v) + F₁(−x,y,−u,v) − xy F₁(qx,qy,u,v) − xy F₁(−qx,qy,−u,v) − F₂(x,y,u,v)`,
/// assembled term by term.
pub fn equivalence_f1_to_f2<T: ThetaFunction>(th2: &T, q: C, x: C, y: C, u: C, v: C) -> Result<Vec<C>> {
    let xy = x * y;
    let mut terms = Vec::with_capacity(17);
    terms.extend(f1(th2, x, y, u, v)?);
    terms.extend(f1(th2, -x, y, -u, v)?);
    terms.extend(scaled(-xy, f1(th2, q * x, q * y, u, v)?));
    terms.extend(scaled(-xy, f1(th2, -q * x, q * y, -u, v)?));
    terms.extend(scaled(C::new(-1.0, 0.0), f2(th2, q, x, y, u, v)?));
    Ok(terms)
}

/// `F₂(x,y,u,v) − (u/y) F₂(x,u,y,v) − 2 F₁(x,y,u,v)`, assembled term by term.
pub fn equivalence_f2_to_f1<T: ThetaFunction>(th2: &T, q: C, x: C, y: C, u: C, v: C) -> Result<Vec<C>> {
    let mut terms = Vec::with_capacity(13);
    terms.extend(f2(th2, q, x, y, u, v)?);
    terms.extend(scaled(-u / y, f2(th2, q, x, u, y, v)?));
    terms.extend(scaled(C::new(-2.0, 0.0), f1(th2, x, y, u, v)?));
    Ok(terms)
}

/// Jacobi five-term relation in multiplicative variables; `th2` has nome `q²`.
pub fn second_fundamental_mult<T: ThetaFunction>(th2: &T, q: C, w: C, x: C, y: C, z: C) -> Result<Vec<C>> {
    let w2 = x * y * z / w;
    let x2 = w * y * z / x;
    let y2 = w * x * z / y;
    let z2 = w * x * y / z;
    let k = x * y * z * w / q;
    Ok(vec![
        2.0 * th2.product(&[w * w, x * x, y * y, z * z])?,
        -th2.product(&[w2, x2, y2, z2])?,
        -th2.product(&[-w2, -x2, -y2, -z2])?,
        -k * th2.product(&[q * w2, q * x2, q * y2, q * z2])?,
        k * th2.product(&[-q * w2, -q * x2, -q * y2, -q * z2])?,
    ])
}

/// `Σ_k ∏_j θ(a_k/b_j) / ∏_{j≠k} θ(a_k/a_j)` with `b` already completed by the
/// side condition.
pub fn a_type_sum<T: ThetaFunction>(th: &T, a: &[C], b: &[C]) -> Result<Vec<C>> {
    if a.len() < 2 || a.len() != b.len() {
        return Err(Error::Domain(format!(
            "A-type sum needs n >= 2 sums of equal length, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    let mut terms = Vec::with_capacity(n);
    for k in 0..n {
        let mut den = C::new(1.0, 0.0);
        for j in (0..n).filter(|&j| j != k) {
            let ratio = a[k] / a[j];
            check_denominator(th, ratio, || format!("a{}/a{}", k + 1, j + 1))?;
            den *= th.eval(ratio)?;
        }
        let num: Vec<C> = b.iter().map(|&bj| a[k] / bj).collect();
        terms.push(th.product(&num)? / den);
    }
    Ok(terms)
}

/// Four-term Slater identity; `h` completes `bcdefgh = q²`.
#[allow(clippy::too_many_arguments)]
pub fn slater_four_term<T: ThetaFunction>(th: &T, b: C, c: C, d: C, e: C, f: C, g: C, h: C) -> Result<Vec<C>> {
    Ok(vec![
        b * th.product(&[c * b, d * b, e * b, f * b, g, h, g / h])?,
        -b * th.product(&[c * h, d * h, e * h, f * h, b, g, g / b])?,
        -g * th.product(&[c * g, d * g, e * g, f * g, b, h, b / h])?,
        b * h * th.product(&[c, d, e, f, b / h, g / h, g / b])?,
    ])
}

/// Four-term identity from the Frenkel–Turaev summation at its lowest order.
pub fn bailey_four_term<T: ThetaFunction>(th: &T, a: C, b: C, c: C, d: C, e: C, f: C) -> Result<Vec<C>> {
    let bcd = b * c * d;
    let bcdef = bcd * e * f;
    let a2 = a * a;
    Ok(vec![
        th.product(&[a / b, a / c, a / d, a / e, a / f, bcdef / a2, a2 / bcd])?,
        -th.product(&[b, c, d, e, f, a2 * a / bcdef, a2 / bcd])?,
        bcdef / a2 * th.product(&[a, a / (e * f), a2 / (bcd * e), a2 / (bcd * f), a / b, a / c, a / d])?,
        bcd / a * th.product(&[a, a / (c * d), a / (b * d), a / (b * c), e, f, a2 * a / bcdef])?,
    ])
}

/// Difference form `y θ(xy, x/y)/(θ(x)² θ(y)²) − f(y) + f(x)` with
/// `f(t) = θ(−t)² / (θ(−1)² θ(t)²)`.
pub fn first_fundamental_difference<T: ThetaFunction>(th: &T, x: C, y: C) -> Result<Vec<C>> {
    check_denominator(th, x, || "x".into())?;
    check_denominator(th, y, || "y".into())?;
    let tx = th.eval(x)?;
    let ty = th.eval(y)?;
    let tm1 = th.eval(C::new(-1.0, 0.0))?;
    let f = |t: C, tt: C| -> Result<C> {
        let n = th.eval(-t)?;
        Ok(n * n / (tm1 * tm1 * tt * tt))
    };
    Ok(vec![
        y * th.product(&[x * y, x / y])? / (tx * tx * ty * ty),
        -f(y, ty)?,
        f(x, tx)?,
    ])
}

/// Three-term relation among `θ(·; q²)` at `±q`, `±q²` multiples of `z`.
pub fn special_z_family<T: ThetaFunction>(th2: &T, q: C, z: C) -> Result<Vec<C>> {
    let sq = |w: C| -> Result<C> {
        let t = th2.eval(w)?;
        Ok(t * t)
    };
    let q2 = q * q;
    Ok(vec![
        sq(q)? * sq(q * z)?,
        -sq(-q)? * sq(-q * z)?,
        q * z * sq(-q2)? * sq(-q2 * z)?,
    ])
}

/// The `z = 1` case of [`special_z_family`], computed without the `z` factors.
pub fn special_quartic_nome<T: ThetaFunction>(th2: &T, q: C) -> Result<Vec<C>> {
    let p4 = |w: C| -> Result<C> { Ok(th2.eval(w)?.powi(4)) };
    Ok(vec![p4(q)?, -p4(-q)?, q * p4(-q * q)?])
}

/// Two-term degeneration of the five-term relation.
pub fn special_two_term<T: ThetaFunction>(th2: &T, q: C, z: C) -> Result<Vec<C>> {
    let s = (z * z).inv();
    Ok(vec![
        2.0 * th2.product(&[-s, s / q, -q * s, z * z])?,
        -th2.product(&[C::new(-1.0, 0.0), q, -q.inv(), s * s])?,
    ])
}

/// Right side of the two-term degeneration rebuilt from Pochhammer products
/// alone: `2 q⁻¹ (−q²;q²)² (q²;q⁴)² (s², q²/s²; q²)` with `s = z⁻²`.
pub fn special_two_term_product_form(q: C, z: C, policy: &TruncationPolicy) -> Result<C> {
    let s = (z * z).inv();
    let q2 = q * q;
    let q4 = q2 * q2;
    let p = |a: C, base: C| -> Result<C> { Ok(pochhammer_inf_base(a, base, policy)?.value.value()) };
    let a = p(-q2, q2)?;
    let b = p(q2, q4)?;
    Ok(2.0 / q * a * a * b * b * p(s * s, q2)? * p(q2 / (s * s), q2)?)
}

/// The two numerator terms of Baxter's quotient at `x = q^{2k} u^{sign}`.
#[allow(clippy::too_many_arguments)]
pub fn baxter_numerator<T: ThetaFunction>(th2: &T, q: C, y: C, u: C, v: C, k: i64, sign: i64) -> Result<Vec<C>> {
    let x = baxter_point(q, u, k, sign);
    Ok(vec![
        y / v * th2.product(&[x * y, x / y, v * u, v / u])?,
        y / u * th2.product(&[x * v, x / v, u * y, u / y])?,
    ])
}

/// Zero `x = q^{2k} u^{±1}` of Baxter's denominator.
pub fn baxter_point(q: C, u: C, k: i64, sign: i64) -> C {
    let us = if sign >= 0 { u } else { u.inv() };
    (q * q).powi(k as i32) * us
}

/// `q^{−2k(k−1)} u^{∓2k}`: the factor relating the numerator at `x = q^{2k}u^{±1}`
/// to the numerator at `x = u^{±1}`.
pub fn baxter_shift_factor(q: C, u: C, k: i64, sign: i64) -> C {
    let e = -2 * k * (k - 1);
    let uk = if sign >= 0 { -2 * k } else { 2 * k };
    q.powi(e as i32) * u.powi(uk as i32)
}

// ---------------------------------------------------------------------------
// Additive forms
// ---------------------------------------------------------------------------

/// Weierstrass three-term relation for `θ₁`.
pub fn first_fundamental_theta1(jk: &JacobiKernel, u: C, u1: C, u2: C, u3: C) -> Result<Vec<C>> {
    let t = |z: C| jk.eval(Jacobi::One, z);
    Ok(vec![
        t(u + u1)? * t(u - u1)? * t(u2 + u3)? * t(u2 - u3)?,
        t(u + u2)? * t(u - u2)? * t(u3 + u1)? * t(u3 - u1)?,
        t(u + u3)? * t(u - u3)? * t(u1 + u2)? * t(u1 - u2)?,
    ])
}

/// The bracket products `[a]` and `[a]'` for `a = 1..4`.
#[derive(Debug, Clone, Copy)]
pub struct Brackets {
    pub plain: [C; 4],
    pub primed: [C; 4],
}

impl Brackets {
    pub fn new(jk: &JacobiKernel, w: C, x: C, y: C, z: C) -> Result<Self> {
        let wp = 0.5 * (-w + x + y + z);
        let xp = 0.5 * (w - x + y + z);
        let yp = 0.5 * (w + x - y + z);
        let zp = 0.5 * (w + x + y - z);
        let mut plain = [C::new(0.0, 0.0); 4];
        let mut primed = [C::new(0.0, 0.0); 4];
        for (i, a) in Jacobi::ALL.into_iter().enumerate() {
            let f = |s: C| jk.eval(a, s);
            plain[i] = f(w)? * f(x)? * f(y)? * f(z)?;
            primed[i] = f(wp)? * f(xp)? * f(yp)? * f(zp)?;
        }
        Ok(Self { plain, primed })
    }

    /// Signed terms of `Σ lhs[a]·[a] − Σ rhs[a]·[a]'`.
    pub fn terms(&self, lhs: [f64; 4], rhs: [f64; 4]) -> Vec<C> {
        let mut out = Vec::with_capacity(8);
        for (&k, &t) in lhs.iter().zip(&self.plain) {
            if k != 0.0 {
                out.push(k * t);
            }
        }
        for (&k, &t) in rhs.iter().zip(&self.primed) {
            if k != 0.0 {
                out.push(-k * t);
            }
        }
        out
    }
}

/// `θ₁⁴ + θ₃⁴ − θ₂⁴ − θ₄⁴` at one argument.
pub fn quartic_jacobi(jk: &JacobiKernel, z: C) -> Result<Vec<C>> {
    let p = |a: Jacobi| -> Result<C> { Ok(jk.eval(a, z)?.powi(4)) };
    Ok(vec![p(Jacobi::One)?, p(Jacobi::Three)?, -p(Jacobi::Two)?, -p(Jacobi::Four)?])
}
