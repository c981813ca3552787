//! Deterministic sampling of identity cases and parallel residual trials.
//!
//! Trial `i` draws from ChaCha20 keyed by the seed on stream `i`, so every
//! trial is reproducible on its own and the report does not depend on how
//! trials are scheduled.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::catalog::{lookup, IdentityCase, IdentitySpec, Param, ParamDomain};
use crate::error::{Error, Result};
use crate::qseries::{Nome, TruncationPolicy};

/// Name of the generator recorded in every report.
pub const PRNG_NAME: &str = "chacha20-stream-per-trial";

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub q_modulus_range: [f64; 2],
    pub arg_modulus_range: [f64; 2],
    pub trials: usize,
    pub max_resamples_per_trial: usize,
    /// Fixed phase of `q`; `None` draws it uniformly.
    pub q_phase: Option<f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            q_modulus_range: [0.05, 0.9],
            arg_modulus_range: [0.5, 2.0],
            trials: 1000,
            max_resamples_per_trial: 100,
            q_phase: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let [q_lo, q_hi] = self.q_modulus_range;
        if !(q_lo > 0.0 && q_lo <= q_hi && q_hi < 1.0) {
            return Err(Error::Domain(format!("q_modulus_range must satisfy 0 < lo <= hi < 1, got [{q_lo}, {q_hi}]")));
        }
        let [r_lo, r_hi] = self.arg_modulus_range;
        if !(r_lo > 0.0 && r_lo <= r_hi && r_hi.is_finite()) {
            return Err(Error::Domain(format!("arg_modulus_range must satisfy 0 < lo <= hi, got [{r_lo}, {r_hi}]")));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be positive".into()));
        }
        if self.max_resamples_per_trial == 0 {
            return Err(Error::Domain("max_resamples_per_trial must be positive".into()));
        }
        if let Some(p) = self.q_phase {
            if !p.is_finite() {
                return Err(Error::Domain(format!("q_phase must be finite, got {p}")));
            }
        }
        Ok(())
    }
}

struct Stream(ChaCha20Rng);

impl Stream {
    fn new(seed: u64, trial_index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(trial_index);
        Self(rng)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn phase(&mut self) -> f64 {
        2.0 * PI * self.unit()
    }

    fn index(&mut self, n: usize) -> usize {
        // n is tiny; modulo bias is far below anything observable.
        (self.0.next_u64() % n as u64) as usize
    }
}

/// Draws one admissible case for trial `trial_index`, resampling up to
/// `max_resamples_per_trial` times.
pub fn sample_case(spec: &IdentitySpec, config: &SamplerConfig, trial_index: u64) -> Result<IdentityCase> {
    config.validate()?;
    let mut rng = Stream::new(config.seed, trial_index);
    let [q_lo, q_hi] = config.q_modulus_range;
    let [r_lo, r_hi] = config.arg_modulus_range;
    let (ln_lo, ln_hi) = (r_lo.ln(), r_hi.ln());
    for _ in 0..config.max_resamples_per_trial {
        let modulus = rng.uniform(q_lo, q_hi);
        let phase = match config.q_phase {
            Some(p) => p,
            None => rng.phase(),
        };
        let nome = Nome::new(Complex64::from_polar(modulus, phase))?;
        let mut selectors = BTreeMap::new();
        for s in spec.selectors() {
            let i = rng.index(s.choices.len());
            selectors.insert(s.name.to_string(), s.choices[i]);
        }
        let count = spec.free_params(&selectors)?.len();
        let free: Vec<Complex64> = (0..count)
            .map(|_| {
                let r = rng.uniform(ln_lo, ln_hi).exp();
                let w = Complex64::from_polar(r, rng.phase());
                match spec.domain() {
                    ParamDomain::Multiplicative => w,
                    ParamDomain::Additive => w.ln() / (2.0 * PI * Complex64::i()),
                }
            })
            .collect();
        let case = spec.case(&free, selectors, nome)?;
        if spec.admissible(&case) {
            return Ok(case);
        }
    }
    Err(Error::AdmissibilityExhausted {
        identity: spec.id.to_string(),
        trial_index,
        attempts: config.max_resamples_per_trial,
    })
}

/// A trial whose normalized residual exceeded the tolerance, with enough
/// data to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub trial_index: u64,
    pub params: Vec<Param>,
    pub selectors: BTreeMap<String, i64>,
    pub q: Complex64,
    pub residual: Complex64,
    pub scale: f64,
    pub normalized_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub identity_id: String,
    pub trials_run: usize,
    pub max_normalized_residual: f64,
    pub mean_normalized_residual: f64,
    pub failures: Vec<Failure>,
    pub config_echo: SamplerConfig,
    pub tolerance: f64,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Pretty JSON with every float in 17-significant-digit scientific form.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Runs `config.trials` trials of the registered identity `spec_id`.
pub fn run_trials(
    spec_id: &str,
    config: &SamplerConfig,
    tolerance: f64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    run_trials_for(lookup(spec_id)?, config, tolerance, policy)
}

/// Same as [`run_trials`] for a spec with some selectors pinned.
pub fn run_trials_for(
    spec: &IdentitySpec,
    config: &SamplerConfig,
    tolerance: f64,
    policy: &TruncationPolicy,
) -> Result<ResidualReport> {
    config.validate()?;
    if !(tolerance >= 0.0) {
        return Err(Error::Domain(format!("tolerance must be non-negative, got {tolerance}")));
    }
    let outcomes = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| {
            let case = sample_case(spec, config, i)?;
            let ev = spec.evaluate(&case, policy)?;
            Ok((i, case, ev))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut max = 0.0f64;
    let mut sum = 0.0f64;
    let mut failures = Vec::new();
    for (i, case, ev) in outcomes {
        let r = ev.normalized();
        // NaN must count as a failure and poison the maximum.
        max = if r.is_nan() || r > max { r } else { max };
        sum += r;
        if !(r <= tolerance) {
            failures.push(Failure {
                trial_index: i,
                params: case.params,
                selectors: case.selectors,
                q: case.nome.q(),
                residual: ev.residual.value(),
                scale: ev.scale,
                normalized_residual: r,
            });
        }
    }
    Ok(ResidualReport {
        identity_id: spec.id.to_string(),
        trials_run: config.trials,
        max_normalized_residual: max,
        mean_normalized_residual: sum / config.trials as f64,
        failures,
        config_echo: config.clone(),
        tolerance,
    })
}

/// One row of a modulus sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub q_modulus: f64,
    pub max_normalized_residual: f64,
    pub mean_normalized_residual: f64,
    pub trials: usize,
}

/// Parses `lo:hi:steps` into an evenly spaced grid of moduli in `(0, 1)`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Domain(format!("q grid must be lo:hi:steps with 0 < lo <= hi < 1 and steps >= 1, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && lo <= hi && hi < 1.0) || steps == 0 {
        return Err(bad());
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { hi } else { lo + step * i as f64 }).collect())
}

/// Runs `trials_per_q` trials at each modulus with phase 0.
pub fn sweep(
    spec_id: &str,
    grid: &[f64],
    trials_per_q: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<Vec<SweepRow>> {
    let spec = lookup(spec_id)?;
    grid.iter()
        .map(|&q| {
            let config = SamplerConfig {
                seed,
                q_modulus_range: [q, q],
                trials: trials_per_q,
                q_phase: Some(0.0),
                ..SamplerConfig::default()
            };
            let r = run_trials_for(spec, &config, f64::INFINITY, policy)?;
            Ok(SweepRow {
                q_modulus: q,
                max_normalized_residual: r.max_normalized_residual,
                mean_normalized_residual: r.mean_normalized_residual,
                trials: r.trials_run,
            })
        })
        .collect()
}

/// `{:.16e}`, which round-trips every binary64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON numbers for finite values; non-finite values become the strings
/// `"inf"`, `"-inf"` and `"nan"`.
struct Sci(f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else if self.0.is_nan() {
            s.serialize_str("nan")
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

struct Pair([f64; 2]);

impl Serialize for Pair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [Sci(self.0[0]), Sci(self.0[1])].serialize(s)
    }
}

impl Serialize for SamplerConfig {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SamplerConfig", 7)?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("q_modulus_range", &Pair(self.q_modulus_range))?;
        st.serialize_field("arg_modulus_range", &Pair(self.arg_modulus_range))?;
        st.serialize_field("trials", &self.trials)?;
        st.serialize_field("max_resamples_per_trial", &self.max_resamples_per_trial)?;
        st.serialize_field("q_phase", &self.q_phase.map(Sci))?;
        st.serialize_field("prng", PRNG_NAME)?;
        st.end()
    }
}

struct ParamOut<'a>(&'a Param);

impl Serialize for ParamOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Param", 3)?;
        st.serialize_field("name", &self.0.name)?;
        st.serialize_field("re", &Sci(self.0.re))?;
        st.serialize_field("im", &Sci(self.0.im))?;
        st.end()
    }
}

impl Serialize for Failure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let params: Vec<ParamOut> = self.params.iter().map(ParamOut).collect();
        let mut st = s.serialize_struct("Failure", 9)?;
        st.serialize_field("trial_index", &self.trial_index)?;
        st.serialize_field("params", &params)?;
        st.serialize_field("selectors", &self.selectors)?;
        st.serialize_field("q_re", &Sci(self.q.re))?;
        st.serialize_field("q_im", &Sci(self.q.im))?;
        st.serialize_field("residual_re", &Sci(self.residual.re))?;
        st.serialize_field("residual_im", &Sci(self.residual.im))?;
        st.serialize_field("scale", &Sci(self.scale))?;
        st.serialize_field("normalized_residual", &Sci(self.normalized_residual))?;
        st.end()
    }
}

impl Serialize for ResidualReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ResidualReport", 7)?;
        st.serialize_field("identity_id", &self.identity_id)?;
        st.serialize_field("trials_run", &self.trials_run)?;
        st.serialize_field("max_normalized_residual", &Sci(self.max_normalized_residual))?;
        st.serialize_field("mean_normalized_residual", &Sci(self.mean_normalized_residual))?;
        st.serialize_field("failures", &self.failures)?;
        st.serialize_field("config_echo", &self.config_echo)?;
        st.serialize_field("tolerance", &Sci(self.tolerance))?;
        st.end()
    }
}
