//! Registry of theta identities, each compiled into a residual functional.
//!
//! An identity is checked at a point by evaluating its signed terms; the
//! residual is their sum and the scale is the largest term modulus. A point
//! certifies the identity when `|residual| ≤ tol · scale`.

pub mod formulas;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::ComplexValue;
use crate::qseries::{Nome, TruncationPolicy};
use crate::theta::{zero_distance, JacobiKernel, ThetaKernel};

pub use formulas::ADMISSIBILITY_MARGIN;

type C = Complex64;

/// Residual of one identity at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub residual: ComplexValue,
    /// Largest modulus among the identity's terms.
    pub scale: f64,
}

impl Evaluation {
    pub fn from_terms(terms: &[C]) -> Self {
        let residual: C = terms.iter().sum();
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        Self {
            residual: ComplexValue::new(residual),
            scale,
        }
    }

    /// `|residual| / scale`; zero for an identically vanishing point and
    /// infinite when the scale vanishes but the residual does not.
    pub fn normalized(&self) -> f64 {
        let r = self.residual.norm();
        if r == 0.0 {
            0.0
        } else if self.scale > 0.0 && self.scale.is_finite() {
            r / self.scale
        } else {
            f64::INFINITY
        }
    }
}

/// Lines of the compact `[a]`/`[a]'` systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemRelation {
    /// `2[1] = [1]'+[2]'−[3]'+[4]'`
    TwoOne,
    /// `2[2] = [1]'+[2]'+[3]'−[4]'`
    TwoTwo,
    /// `2[3] = −[1]'+[2]'+[3]'+[4]'`
    TwoThree,
    /// `2[4] = [1]'−[2]'+[3]'+[4]'`
    TwoFour,
    /// `[1]+[2] = [1]'+[2]'`
    OnePlusTwo,
    /// `[1]+[3] = [2]'+[4]'`
    OnePlusThree,
    /// `[1]+[4] = [1]'+[4]'`
    OnePlusFour,
    /// `[1]−[2] = [4]'−[3]'`
    OneMinusTwo,
    /// `[1]−[3] = [1]'−[3]'`
    OneMinusThree,
    /// `[1]−[4] = [2]'−[3]'`
    OneMinusFour,
}

impl SystemRelation {
    /// The four doubled relations.
    pub const DOUBLED: [SystemRelation; 4] = [Self::TwoOne, Self::TwoTwo, Self::TwoThree, Self::TwoFour];

    /// The six pairwise relations.
    pub const PAIRWISE: [SystemRelation; 6] = [
        Self::OnePlusTwo,
        Self::OnePlusThree,
        Self::OnePlusFour,
        Self::OneMinusTwo,
        Self::OneMinusThree,
        Self::OneMinusFour,
    ];

    /// Coefficients on `([1],…,[4])` and `([1]',…,[4]')`.
    pub fn coefficients(self) -> ([f64; 4], [f64; 4]) {
        match self {
            Self::TwoOne => ([2.0, 0.0, 0.0, 0.0], [1.0, 1.0, -1.0, 1.0]),
            Self::TwoTwo => ([0.0, 2.0, 0.0, 0.0], [1.0, 1.0, 1.0, -1.0]),
            Self::TwoThree => ([0.0, 0.0, 2.0, 0.0], [-1.0, 1.0, 1.0, 1.0]),
            Self::TwoFour => ([0.0, 0.0, 0.0, 2.0], [1.0, -1.0, 1.0, 1.0]),
            Self::OnePlusTwo => ([1.0, 1.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0]),
            Self::OnePlusThree => ([1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]),
            Self::OnePlusFour => ([1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0]),
            Self::OneMinusTwo => ([1.0, -1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 1.0]),
            Self::OneMinusThree => ([1.0, 0.0, -1.0, 0.0], [1.0, 0.0, -1.0, 0.0]),
            Self::OneMinusFour => ([1.0, 0.0, 0.0, -1.0], [0.0, 1.0, -1.0, 0.0]),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::TwoOne => "2[1]=[1]'+[2]'-[3]'+[4]'",
            Self::TwoTwo => "2[2]=[1]'+[2]'+[3]'-[4]'",
            Self::TwoThree => "2[3]=-[1]'+[2]'+[3]'+[4]'",
            Self::TwoFour => "2[4]=[1]'-[2]'+[3]'+[4]'",
            Self::OnePlusTwo => "[1]+[2]=[1]'+[2]'",
            Self::OnePlusThree => "[1]+[3]=[2]'+[4]'",
            Self::OnePlusFour => "[1]+[4]=[1]'+[4]'",
            Self::OneMinusTwo => "[1]-[2]=[4]'-[3]'",
            Self::OneMinusThree => "[1]-[3]=[1]'-[3]'",
            Self::OneMinusFour => "[1]-[4]=[2]'-[3]'",
        }
    }
}

impl FromStr for SystemRelation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| if c == '−' { '-' } else { c })
            .collect();
        Self::DOUBLED
            .into_iter()
            .chain(Self::PAIRWISE)
            .find(|r| r.as_str() == compact)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}

/// Which identity a spec evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Identity {
    FirstMult,
    FirstTheta1,
    FirstHomogeneous,
    FirstDifference,
    SecondMult,
    SecondAdditive,
    SystemPairwise,
    SystemDoubled,
    EquivalenceF1ToF2,
    EquivalenceF2ToF1,
    /// `rank: None` samples `n` from 2..=8 per trial.
    AType { rank: Option<usize> },
    FourSlater,
    FourBailey,
    FourAType,
    SpecialZ,
    SpecialQuartic,
    SpecialTwoTerm,
    JacobiQuartic,
    /// Unset fields are sampled per trial.
    BaxterNumerator { k: Option<i64>, sign: Option<i64> },
}

/// Whether free parameters are multiplicative (`w`) or additive (`z`, with
/// `w = e^{2πiz}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamDomain {
    Multiplicative,
    Additive,
}

/// A discrete parameter drawn alongside the complex ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    pub name: &'static str,
    pub choices: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub re: f64,
    pub im: f64,
}

impl Param {
    pub fn new(name: impl Into<String>, z: C) -> Self {
        Self {
            name: name.into(),
            re: z.re,
            im: z.im,
        }
    }

    pub fn value(&self) -> C {
        C::new(self.re, self.im)
    }
}

/// One concrete point at which an identity is checked. Dependent parameters
/// are already solved from the side condition.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCase {
    pub spec_id: String,
    pub params: Vec<Param>,
    pub selectors: BTreeMap<String, i64>,
    pub nome: Nome,
}

impl IdentityCase {
    pub fn param(&self, name: &str) -> Option<C> {
        self.params.iter().find(|p| p.name == name).map(Param::value)
    }

    pub fn values(&self) -> Vec<C> {
        self.params.iter().map(Param::value).collect()
    }

    pub fn selector(&self, name: &str) -> Option<i64> {
        self.selectors.get(name).copied()
    }
}

/// Registry entry: metadata plus the residual and admissibility logic.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentitySpec {
    pub id: &'static str,
    pub identity: Identity,
    pub side_condition: Option<&'static str>,
    pub reference: &'static str,
}

const fn spec(
    id: &'static str,
    identity: Identity,
    side_condition: Option<&'static str>,
    reference: &'static str,
) -> IdentitySpec {
    IdentitySpec {
        id,
        identity,
        side_condition,
        reference,
    }
}

static REGISTRY: [IdentitySpec; 19] = [
    spec("ff-mult", Identity::FirstMult, None, "Weierstrass three-term relation, multiplicative form (cyclic in y,u,v)"),
    spec("ff-theta1", Identity::FirstTheta1, None, "Weierstrass three-term relation for theta_1"),
    spec(
        "ff-homog",
        Identity::FirstHomogeneous,
        Some("b3 = a1*a2*a3/(b1*b2), i.e. a1a2a3=b1b2b3"),
        "three-term relation in homogeneous coordinates",
    ),
    spec("ff-diff", Identity::FirstDifference, None, "difference form y*theta(xy,x/y)/(theta(x)^2 theta(y)^2) = f(y)-f(x)"),
    spec("sf-mult", Identity::SecondMult, None, "Jacobi five-term relation, multiplicative form in base q^2"),
    spec("sf-additive", Identity::SecondAdditive, None, "Jacobi five-term relation for theta_1..theta_4 with half-sum arguments"),
    spec("sf-sys3", Identity::SystemPairwise, None, "six pairwise relations [a]+-[b] among bracket products (worst line reported)"),
    spec("sf-sys4", Identity::SystemDoubled, None, "four doubled relations 2[a] among bracket products (worst line reported)"),
    spec("equiv-23", Identity::EquivalenceF1ToF2, None, "F1 combination equals F2 (first implies second)"),
    spec("equiv-25", Identity::EquivalenceF2ToF1, None, "F2(x,y,u,v) - (u/y) F2(x,u,y,v) = 2 F1 (second implies first)"),
    spec(
        "an",
        Identity::AType { rank: None },
        Some("bn = (a1...an)/(b1...b(n-1)), i.e. a1...an=b1...bn; n sampled from 2..8"),
        "n-term generalization for root system A(n-1)",
    ),
    spec(
        "four-slater",
        Identity::FourSlater,
        Some("h = q^2/(bcdefg), i.e. bcdefgh=q^2"),
        "Slater four-term identity",
    ),
    spec("four-bailey", Identity::FourBailey, None, "Frenkel-Turaev n=1 / Bailey b=1 four-term identity"),
    spec(
        "four-a4",
        Identity::FourAType,
        Some("b4 = a1a2a3a4/(b1b2b3), i.e. a1a2a3a4=b1b2b3b4"),
        "four-term case n=4 of the A(n-1) identity",
    ),
    spec("sp-20", Identity::SpecialZ, None, "theta(q;q^2)^2 theta(qz;q^2)^2 three-term special case of the five-term relation"),
    spec("sp-21", Identity::SpecialQuartic, None, "theta(q;q^2)^4 = theta(-q;q^2)^4 - q theta(-q^2;q^2)^4"),
    spec("sp-40", Identity::SpecialTwoTerm, None, "two-term degeneration of the five-term relation"),
    spec("sp-quartic", Identity::JacobiQuartic, None, "theta_1^4 + theta_3^4 = theta_2^4 + theta_4^4"),
    spec(
        "baxter-numerator",
        Identity::BaxterNumerator { k: None, sign: None },
        Some("x = q^(2k) u^(+-1), k in -3..3"),
        "numerator of Baxter's quotient vanishes at the denominator zeros",
    ),
];

/// All registered identities, in a stable order.
pub fn registry() -> &'static [IdentitySpec] {
    &REGISTRY
}

pub fn lookup(id: &str) -> Result<&'static IdentitySpec> {
    REGISTRY
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownIdentity(id.to_string()))
}

fn names(prefix: &str, range: std::ops::RangeInclusive<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

fn strs(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn tau_of(nome: &Nome) -> C {
    nome.q().ln() / (C::i() * PI)
}

impl IdentitySpec {
    /// A-type identity with a fixed rank `n ≥ 2`.
    pub fn a_type(rank: usize) -> Result<Self> {
        if rank < 2 {
            return Err(Error::Domain(format!("A-type identity needs n >= 2, got {rank}")));
        }
        Ok(Self {
            identity: Identity::AType { rank: Some(rank) },
            ..lookup("an")?.clone()
        })
    }

    /// Baxter numerator at a fixed zero `x = q^{2k} u^{sign}`.
    pub fn baxter(k: i64, sign: i64) -> Result<Self> {
        if k.abs() > 3 || sign.abs() != 1 {
            return Err(Error::Domain(format!("baxter-numerator needs |k| <= 3 and sign = ±1, got k={k}, sign={sign}")));
        }
        Ok(Self {
            identity: Identity::BaxterNumerator {
                k: Some(k),
                sign: Some(sign),
            },
            ..lookup("baxter-numerator")?.clone()
        })
    }

    pub fn domain(&self) -> ParamDomain {
        match self.identity {
            Identity::FirstTheta1 | Identity::SecondAdditive | Identity::SystemPairwise | Identity::SystemDoubled | Identity::JacobiQuartic => {
                ParamDomain::Additive
            }
            _ => ParamDomain::Multiplicative,
        }
    }

    /// Discrete parameters sampled per trial.
    pub fn selectors(&self) -> Vec<Selector> {
        match self.identity {
            Identity::AType { rank: None } => vec![Selector {
                name: "n",
                choices: (2..=8).collect(),
            }],
            Identity::BaxterNumerator { k, sign } => {
                let mut out = Vec::new();
                if k.is_none() {
                    out.push(Selector {
                        name: "k",
                        choices: (-3..=3).collect(),
                    });
                }
                if sign.is_none() {
                    out.push(Selector {
                        name: "sign",
                        choices: vec![-1, 1],
                    });
                }
                out
            }
            _ => Vec::new(),
        }
    }

    fn rank(&self, selectors: &BTreeMap<String, i64>) -> Result<usize> {
        match self.identity {
            Identity::AType { rank: Some(n) } => Ok(n),
            Identity::AType { rank: None } => selectors
                .get("n")
                .map(|&n| n as usize)
                .filter(|&n| n >= 2)
                .ok_or_else(|| Error::Domain("an: selector n >= 2 required".into())),
            Identity::FirstHomogeneous => Ok(3),
            Identity::FourAType => Ok(4),
            _ => Err(Error::Domain(format!("{} has no rank", self.id))),
        }
    }

    fn baxter_indices(&self, selectors: &BTreeMap<String, i64>) -> Result<(i64, i64)> {
        let Identity::BaxterNumerator { k, sign } = self.identity else {
            return Err(Error::Domain(format!("{} has no baxter indices", self.id)));
        };
        let get = |fixed: Option<i64>, name: &str| {
            fixed
                .or_else(|| selectors.get(name).copied())
                .ok_or_else(|| Error::Domain(format!("baxter-numerator: selector {name} required")))
        };
        Ok((get(k, "k")?, get(sign, "sign")?))
    }

    /// Number of free complex parameters, when it does not depend on a selector.
    pub fn arity(&self) -> Option<usize> {
        match self.identity {
            Identity::AType { rank: None } => None,
            _ => Some(self.free_params(&BTreeMap::new()).map(|p| p.len()).unwrap_or(0)),
        }
    }

    /// Names of the free parameters, in sampling order.
    pub fn free_params(&self, selectors: &BTreeMap<String, i64>) -> Result<Vec<String>> {
        Ok(match self.identity {
            Identity::FirstMult | Identity::EquivalenceF1ToF2 | Identity::EquivalenceF2ToF1 => strs(&["x", "y", "u", "v"]),
            Identity::FirstTheta1 => strs(&["u", "u1", "u2", "u3"]),
            Identity::SecondMult | Identity::SecondAdditive | Identity::SystemPairwise | Identity::SystemDoubled => {
                strs(&["w", "x", "y", "z"])
            }
            Identity::FirstDifference => strs(&["x", "y"]),
            Identity::FirstHomogeneous | Identity::AType { .. } | Identity::FourAType => {
                let n = self.rank(selectors)?;
                let mut v = names("a", 1..=n);
                v.extend(names("b", 1..=n - 1));
                v
            }
            Identity::FourSlater => strs(&["b", "c", "d", "e", "f", "g"]),
            Identity::FourBailey => strs(&["a", "b", "c", "d", "e", "f"]),
            Identity::SpecialZ | Identity::SpecialTwoTerm | Identity::JacobiQuartic => strs(&["z"]),
            Identity::SpecialQuartic => Vec::new(),
            Identity::BaxterNumerator { .. } => strs(&["y", "u", "v"]),
        })
    }

    /// Builds a case from free parameter values, solving the side condition
    /// for the dependent parameter.
    pub fn case(&self, free: &[C], selectors: BTreeMap<String, i64>, nome: Nome) -> Result<IdentityCase> {
        let names = self.free_params(&selectors)?;
        if names.len() != free.len() {
            return Err(Error::Domain(format!(
                "{} expects {} free parameters, got {}",
                self.id,
                names.len(),
                free.len()
            )));
        }
        let mut params: Vec<Param> = names.iter().zip(free).map(|(n, &z)| Param::new(n.clone(), z)).collect();
        match self.identity {
            Identity::FirstHomogeneous | Identity::AType { .. } | Identity::FourAType => {
                let n = self.rank(&selectors)?;
                let a: C = free[..n].iter().product();
                let b: C = free[n..].iter().product();
                params.push(Param::new(format!("b{n}"), a / b));
            }
            Identity::FourSlater => {
                let p: C = free.iter().product();
                params.push(Param::new("h", nome.q() * nome.q() / p));
            }
            Identity::BaxterNumerator { .. } => {
                let (k, sign) = self.baxter_indices(&selectors)?;
                if k.abs() > 3 || sign.abs() != 1 {
                    return Err(Error::Domain(format!("baxter-numerator: k={k}, sign={sign} out of range")));
                }
            }
            _ => {}
        }
        Ok(IdentityCase {
            spec_id: self.id.to_string(),
            params,
            selectors,
            nome,
        })
    }

    /// Nonzero finite parameters, and every denominator argument at least
    /// [`ADMISSIBILITY_MARGIN`] away from the theta zero set.
    pub fn admissible(&self, case: &IdentityCase) -> bool {
        let vals = case.values();
        if vals.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return false;
        }
        if self.domain() == ParamDomain::Multiplicative && vals.iter().any(|z| z.norm() == 0.0) {
            return false;
        }
        let far = |w: C| zero_distance(w, &case.nome) >= ADMISSIBILITY_MARGIN;
        match self.identity {
            Identity::FirstHomogeneous | Identity::AType { .. } | Identity::FourAType => {
                let Ok(n) = self.rank(&case.selectors) else {
                    return false;
                };
                let a = &vals[..n];
                (0..n).all(|k| (0..n).filter(|&j| j != k).all(|j| far(a[k] / a[j])))
            }
            Identity::FirstDifference => far(vals[0]) && far(vals[1]),
            _ => true,
        }
    }

    /// Signed terms of the identity at `case`.
    pub fn terms(&self, case: &IdentityCase, policy: &TruncationPolicy) -> Result<Vec<C>> {
        let p = case.values();
        let q = case.nome.q();
        let th = || ThetaKernel::new(case.nome, *policy);
        let th2 = || ThetaKernel::new(case.nome.squared(), *policy);
        let jk = || JacobiKernel::new(tau_of(&case.nome), *policy);
        match self.identity {
            Identity::FirstMult => formulas::first_fundamental_mult(&th(), p[0], p[1], p[2], p[3]),
            Identity::FirstTheta1 => formulas::first_fundamental_theta1(&jk()?, p[0], p[1], p[2], p[3]),
            Identity::FirstHomogeneous | Identity::AType { .. } | Identity::FourAType => {
                let n = self.rank(&case.selectors)?;
                formulas::a_type_sum(&th(), &p[..n], &p[n..])
            }
            Identity::FirstDifference => formulas::first_fundamental_difference(&th(), p[0], p[1]),
            Identity::SecondMult => formulas::second_fundamental_mult(&th2(), q, p[0], p[1], p[2], p[3]),
            Identity::SecondAdditive => {
                let b = formulas::Brackets::new(&jk()?, p[0], p[1], p[2], p[3])?;
                let (l, r) = SystemRelation::TwoOne.coefficients();
                Ok(b.terms(l, r))
            }
            Identity::SystemPairwise | Identity::SystemDoubled => {
                // Callers wanting the worst line go through `evaluate`.
                let b = formulas::Brackets::new(&jk()?, p[0], p[1], p[2], p[3])?;
                let (l, r) = self.system_lines()[0].coefficients();
                Ok(b.terms(l, r))
            }
            Identity::EquivalenceF1ToF2 => formulas::equivalence_f1_to_f2(&th2(), q, p[0], p[1], p[2], p[3]),
            Identity::EquivalenceF2ToF1 => formulas::equivalence_f2_to_f1(&th2(), q, p[0], p[1], p[2], p[3]),
            Identity::FourSlater => formulas::slater_four_term(&th(), p[0], p[1], p[2], p[3], p[4], p[5], p[6]),
            Identity::FourBailey => formulas::bailey_four_term(&th(), p[0], p[1], p[2], p[3], p[4], p[5]),
            Identity::SpecialZ => formulas::special_z_family(&th2(), q, p[0]),
            Identity::SpecialQuartic => formulas::special_quartic_nome(&th2(), q),
            Identity::SpecialTwoTerm => formulas::special_two_term(&th2(), q, p[0]),
            Identity::JacobiQuartic => formulas::quartic_jacobi(&jk()?, p[0]),
            Identity::BaxterNumerator { .. } => {
                let (k, sign) = self.baxter_indices(&case.selectors)?;
                formulas::baxter_numerator(&th2(), q, p[0], p[1], p[2], k, sign)
            }
        }
    }

    fn system_lines(&self) -> &'static [SystemRelation] {
        match self.identity {
            Identity::SystemPairwise => &SystemRelation::PAIRWISE,
            _ => &SystemRelation::DOUBLED,
        }
    }

    /// Residual and scale at `case`. The system specs report their worst line.
    pub fn evaluate(&self, case: &IdentityCase, policy: &TruncationPolicy) -> Result<Evaluation> {
        match self.identity {
            Identity::SystemPairwise | Identity::SystemDoubled => {
                let p = case.values();
                let b = formulas::Brackets::new(&JacobiKernel::new(tau_of(&case.nome), *policy)?, p[0], p[1], p[2], p[3])?;
                let worst = self
                    .system_lines()
                    .iter()
                    .map(|r| {
                        let (l, rr) = r.coefficients();
                        Evaluation::from_terms(&b.terms(l, rr))
                    })
                    .max_by(|a, b| a.normalized().total_cmp(&b.normalized()))
                    .expect("system has lines");
                Ok(worst)
            }
            _ => Ok(Evaluation::from_terms(&self.terms(case, policy)?)),
        }
    }
}

// ---------------------------------------------------------------------------
// Direct residual operations
// ---------------------------------------------------------------------------

fn kernels(nome: &Nome, policy: &TruncationPolicy) -> (ThetaKernel, ThetaKernel) {
    (ThetaKernel::new(*nome, *policy), ThetaKernel::new(nome.squared(), *policy))
}

fn nonzero(params: &[C]) -> Result<()> {
    if let Some(z) = params.iter().find(|z| z.norm() == 0.0 || !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Domain(format!("parameters must be finite and nonzero, got {z}")));
    }
    Ok(())
}

/// `F₁(x, y, u, v; q)`.
pub fn residual_first_fundamental(x: C, y: C, u: C, v: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    nonzero(&[x, y, u, v])?;
    let (_, th2) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::f1(&th2, x, y, u, v)?))
}

/// The three-term relation with its cyclic `y, u, v` coefficients, in base `q`.
pub fn residual_first_fundamental_mult(x: C, y: C, u: C, v: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    nonzero(&[x, y, u, v])?;
    let (th, _) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::first_fundamental_mult(&th, x, y, u, v)?))
}

/// `F₂(x, y, u, v; q)`.
pub fn residual_second_fundamental(x: C, y: C, u: C, v: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    nonzero(&[x, y, u, v])?;
    let (_, th2) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::f2(&th2, nome.q(), x, y, u, v)?))
}

/// Five-term relation in its original multiplicative variables `w, x, y, z`.
pub fn residual_second_fundamental_mult(w: C, x: C, y: C, z: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    nonzero(&[w, x, y, z])?;
    let (_, th2) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::second_fundamental_mult(&th2, nome.q(), w, x, y, z)?))
}

/// `2[1] − [1]' − [2]' + [3]' − [4]'`.
pub fn residual_second_fundamental_additive(w: C, x: C, y: C, z: C, tau: C, policy: &TruncationPolicy) -> Result<Evaluation> {
    residual_theta_a_system(SystemRelation::TwoOne, w, x, y, z, tau, policy)
}

/// One line of the bracket systems.
pub fn residual_theta_a_system(
    relation: SystemRelation,
    w: C,
    x: C,
    y: C,
    z: C,
    tau: C,
    policy: &TruncationPolicy,
) -> Result<Evaluation> {
    let jk = JacobiKernel::new(tau, *policy)?;
    let b = formulas::Brackets::new(&jk, w, x, y, z)?;
    let (l, r) = relation.coefficients();
    Ok(Evaluation::from_terms(&b.terms(l, r)))
}

/// Relation by name, e.g. `"[1]+[4]=[1]'+[4]'"`.
pub fn residual_theta_a_system_named(
    variant: &str,
    w: C,
    x: C,
    y: C,
    z: C,
    tau: C,
    policy: &TruncationPolicy,
) -> Result<Evaluation> {
    residual_theta_a_system(variant.parse()?, w, x, y, z, tau, policy)
}

/// Weierstrass relation for `θ₁` in additive arguments.
pub fn residual_first_fundamental_theta1(u: C, u1: C, u2: C, u3: C, tau: C, policy: &TruncationPolicy) -> Result<Evaluation> {
    let jk = JacobiKernel::new(tau, *policy)?;
    Ok(Evaluation::from_terms(&formulas::first_fundamental_theta1(&jk, u, u1, u2, u3)?))
}

pub fn residual_equivalence_23(x: C, y: C, u: C, v: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    nonzero(&[x, y, u, v])?;
    let (_, th2) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::equivalence_f1_to_f2(&th2, nome.q(), x, y, u, v)?))
}

pub fn residual_equivalence_25(x: C, y: C, u: C, v: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    nonzero(&[x, y, u, v])?;
    let (_, th2) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::equivalence_f2_to_f1(&th2, nome.q(), x, y, u, v)?))
}

/// Three-term homogeneous form; `b3` is solved from `a1a2a3 = b1b2b3`.
pub fn residual_homogeneous_29(a1: C, a2: C, a3: C, b1: C, b2: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    residual_an_identity(&[a1, a2, a3], &[b1, b2], nome, policy)
}

/// `Σ_k ∏_j θ(a_k/b_j) / ∏_{j≠k} θ(a_k/a_j)` with `b_n` solved from the
/// side condition. `b` holds the first `n − 1` entries.
pub fn residual_an_identity(a: &[C], b: &[C], nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    if a.len() < 2 || b.len() + 1 != a.len() {
        return Err(Error::Domain(format!(
            "A-type identity needs n >= 2 a's and n-1 b's, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    nonzero(a)?;
    nonzero(b)?;
    let mut full = b.to_vec();
    full.push(a.iter().product::<C>() / b.iter().product::<C>());
    let (th, _) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::a_type_sum(&th, a, &full)?))
}

/// Slater four-term identity; `h` is solved from `bcdefgh = q²`.
#[allow(clippy::too_many_arguments)]
pub fn residual_slater_43(b: C, c: C, d: C, e: C, f: C, g: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    nonzero(&[b, c, d, e, f, g])?;
    let h = nome.q() * nome.q() / (b * c * d * e * f * g);
    let (th, _) = kernels(nome, policy);
    let ev = Evaluation::from_terms(&formulas::slater_four_term(&th, b, c, d, e, f, g, h)?);
    if !(ev.scale > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateDenominator {
            argument: "scale".into(),
            distance: ev.scale,
        });
    }
    Ok(ev)
}

#[allow(clippy::too_many_arguments)]
pub fn residual_bailey_42(a: C, b: C, c: C, d: C, e: C, f: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    nonzero(&[a, b, c, d, e, f])?;
    let (th, _) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::bailey_four_term(&th, a, b, c, d, e, f)?))
}

/// The special cases; the `z`-family and the difference form take their
/// arguments from `params`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCase {
    /// `[z]`
    ZFamily,
    /// `[]`
    QuarticNome,
    /// `[x, y]`
    Difference,
}

pub fn residuals_special(case: SpecialCase, params: &[C], nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    let (th, th2) = kernels(nome, policy);
    let want = match case {
        SpecialCase::ZFamily => 1,
        SpecialCase::QuarticNome => 0,
        SpecialCase::Difference => 2,
    };
    if params.len() != want {
        return Err(Error::Domain(format!("{case:?} takes {want} parameters, got {}", params.len())));
    }
    nonzero(params)?;
    let terms = match case {
        SpecialCase::ZFamily => formulas::special_z_family(&th2, nome.q(), params[0])?,
        SpecialCase::QuarticNome => formulas::special_quartic_nome(&th2, nome.q())?,
        SpecialCase::Difference => formulas::first_fundamental_difference(&th, params[0], params[1])?,
    };
    Ok(Evaluation::from_terms(&terms))
}

/// Two-term degeneration of the five-term relation at free `z`.
pub fn residual_special_two_term(z: C, nome: &Nome, policy: &TruncationPolicy) -> Result<Evaluation> {
    nonzero(&[z])?;
    let (_, th2) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::special_two_term(&th2, nome.q(), z)?))
}

/// Numerator of Baxter's quotient at `x = q^{2k} u^{sign}`.
pub fn baxter_numerator_zero_check(
    y: C,
    u: C,
    v: C,
    k: i64,
    sign: i64,
    nome: &Nome,
    policy: &TruncationPolicy,
) -> Result<Evaluation> {
    nonzero(&[y, u, v])?;
    if k.abs() > 3 || sign.abs() != 1 {
        return Err(Error::Domain(format!("need |k| <= 3 and sign = ±1, got k={k}, sign={sign}")));
    }
    let (_, th2) = kernels(nome, policy);
    Ok(Evaluation::from_terms(&formulas::baxter_numerator(&th2, nome.q(), y, u, v, k, sign)?))
}
