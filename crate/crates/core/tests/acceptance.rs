//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use thetakit::catalog::{formulas, lookup, residual_theta_a_system, IdentityCase, IdentitySpec, SystemRelation};
use thetakit::harness::{run_trials, run_trials_for, sample_case, SamplerConfig};
use thetakit::qseries::{Nome, TruncationPolicy};
use thetakit::theta::{
    invert_law, shift_law, theta_product, theta_series, Jacobi, JacobiKernel, ThetaArgument, ThetaFunction, ThetaKernel,
};

type C = Complex64;

struct Gate {
    failed: Vec<String>,
}

impl Gate {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} [{id}] {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

struct Rng(ChaCha20Rng);

impl Rng {
    fn new(seed: u64) -> Self {
        Self(ChaCha20Rng::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn nome(&mut self, lo: f64, hi: f64) -> Nome {
        let r = lo + (hi - lo) * self.unit();
        Nome::new(C::from_polar(r, 2.0 * PI * self.unit())).unwrap()
    }

    fn arg(&mut self) -> C {
        let r = (0.5f64.ln() + self.unit() * 4f64.ln()).exp();
        C::from_polar(r, 2.0 * PI * self.unit())
    }
}

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn config(trials: usize) -> SamplerConfig {
    SamplerConfig {
        trials,
        ..SamplerConfig::default()
    }
}

/// Runs `trials` for each spec at `tol`; returns (all passed, summary).
fn batch(specs: &[(String, IdentitySpec)], cfg: &SamplerConfig, tol: f64) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, spec) in specs {
        match run_trials_for(spec, cfg, tol, &policy()) {
            Ok(r) => {
                ok &= r.passed() && r.max_normalized_residual <= tol;
                parts.push(format!("{label}: max {:.2e}, {} failures", r.max_normalized_residual, r.failures.len()));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{label}: error {e}"));
            }
        }
    }
    (ok, parts.join("; "))
}

fn registered(ids: &[&str]) -> Vec<(String, IdentitySpec)> {
    ids.iter().map(|id| (id.to_string(), lookup(id).unwrap().clone())).collect()
}

fn rel(a: C, b: C) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

fn dual_representation(g: &mut Gate) {
    let start = Instant::now();
    let mut rng = Rng::new(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let nome = rng.nome(1e-3, 0.9);
        let w = rng.arg();
        let p = theta_product(&ThetaArgument::new(w, &nome).unwrap(), &nome, &policy()).unwrap().value.value();
        let s = theta_series(w, &nome, &policy()).unwrap().value.value();
        worst = worst.max((p - s).norm() / p.norm().max(1.0));
    }
    let t = start.elapsed();
    g.record(
        "1",
        worst <= 1e-12 && t <= Duration::from_secs(10),
        format!("product vs series, 1000 points: max |diff|/max(1,|θ|) = {worst:.2e} (limit 1e-12), {t:.2?} (limit 10 s)"),
    );
}

fn first_fundamental(g: &mut Gate) {
    let start = Instant::now();
    let (ok, s) = batch(&registered(&["ff-mult", "ff-theta1", "ff-homog", "ff-diff"]), &config(1000), 1e-9);
    let t = start.elapsed();
    g.record("2", ok && t <= Duration::from_secs(60), format!("first fundamental, 1000 trials each at 1e-9: {s}; {t:.2?} (limit 60 s)"));
}

fn second_fundamental(g: &mut Gate) {
    let (ok, s) = batch(&registered(&["sf-mult", "sf-additive", "sf-sys3", "sf-sys4"]), &config(1000), 1e-9);
    // Every line individually on the same sampled points.
    let spec = lookup("sf-additive").unwrap();
    let cfg = config(1000);
    let lines: Vec<SystemRelation> = SystemRelation::DOUBLED.into_iter().chain(SystemRelation::PAIRWISE).collect();
    let mut worst = vec![0.0f64; lines.len()];
    let mut errors = 0;
    for i in 0..1000 {
        let case = sample_case(spec, &cfg, i).unwrap();
        let p = case.values();
        let tau = case.nome.q().ln() / (C::i() * PI);
        for (j, r) in lines.iter().enumerate() {
            match residual_theta_a_system(*r, p[0], p[1], p[2], p[3], tau, &policy()) {
                Ok(ev) => worst[j] = worst[j].max(ev.normalized()),
                Err(_) => errors += 1,
            }
        }
    }
    let lines_ok = errors == 0 && worst.iter().all(|&w| w <= 1e-9);
    let max_line = worst.iter().copied().fold(0.0, f64::max);
    g.record(
        "3",
        ok && lines_ok,
        format!("second fundamental at 1e-9: {s}; ten bracket relations separately: worst {max_line:.2e}, {errors} errors"),
    );
}

fn equivalence(g: &mut Gate) {
    let (ok, s) = batch(&registered(&["equiv-23", "equiv-25"]), &config(1000), 1e-9);
    g.record("4", ok, format!("equivalence combinators, 1000 trials each at 1e-9: {s}"));
}

fn pointwise_agreement(ranked: &IdentitySpec, other: &str, trials: u64) -> f64 {
    let other = lookup(other).unwrap();
    let cfg = config(trials as usize);
    let mut worst = 0.0f64;
    for i in 0..trials {
        let case = sample_case(ranked, &cfg, i).unwrap();
        let n = other.free_params(&Default::default()).unwrap().len();
        let free: Vec<C> = case.values()[..n].to_vec();
        let twin: IdentityCase = other.case(&free, Default::default(), case.nome).unwrap();
        let a = ranked.evaluate(&case, &policy()).unwrap();
        let b = other.evaluate(&twin, &policy()).unwrap();
        worst = worst.max((a.residual.value() - b.residual.value()).norm() / a.scale);
    }
    worst
}

fn a_type_family(g: &mut Gate) {
    let specs: Vec<(String, IdentitySpec)> =
        [2, 3, 4, 5, 8].iter().map(|&n| (format!("an n={n}"), IdentitySpec::a_type(n).unwrap())).collect();
    let (ok, s) = batch(&specs, &config(200), 1e-9);
    let d3 = pointwise_agreement(&IdentitySpec::a_type(3).unwrap(), "ff-homog", 200);
    let d4 = pointwise_agreement(&IdentitySpec::a_type(4).unwrap(), "four-a4", 200);
    g.record(
        "5",
        ok && d3 <= 1e-12 && d4 <= 1e-12,
        format!("A-type family, 200 trials each at 1e-9: {s}; n=3 vs ff-homog {d3:.2e}, n=4 vs four-a4 {d4:.2e} (limit 1e-12)"),
    );
}

fn four_term(g: &mut Gate) {
    let (ok, s) = batch(&registered(&["four-slater", "four-bailey", "four-a4"]), &config(1000), 1e-9);
    // The side condition holds by construction.
    let spec = lookup("four-slater").unwrap();
    let mut drift = 0.0f64;
    for i in 0..1000 {
        let case = sample_case(spec, &config(1000), i).unwrap();
        let q = case.nome.q();
        let p: C = case.values().iter().product();
        drift = drift.max((p / (q * q) - 1.0).norm());
    }
    g.record(
        "6",
        ok && drift <= 8.0 * f64::EPSILON,
        format!("four-term identities, 1000 trials each at 1e-9: {s}; |bcdefgh/q^2 - 1| <= {drift:.1e}"),
    );
}

fn special_cases(g: &mut Gate) {
    let (ok, s) = batch(&registered(&["sp-20", "sp-21", "sp-40", "sp-quartic"]), &config(100), 1e-10);
    let spec = lookup("sp-40").unwrap();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let case = sample_case(spec, &config(100), i).unwrap();
        let q = case.nome.q();
        let z = case.values()[0];
        let th2 = ThetaKernel::new(case.nome.squared(), policy());
        let t = formulas::special_two_term(&th2, q, z).unwrap();
        let p = formulas::special_two_term_product_form(q, z, &policy()).unwrap();
        worst = worst.max(rel(t[0], p)).max(rel(-t[1], p));
    }
    g.record(
        "7",
        ok && worst <= 1e-12,
        format!("special cases over 100 nomes at 1e-10: {s}; two-term case vs Pochhammer route {worst:.2e} (limit 1e-12)"),
    );
}

fn baxter(g: &mut Gate) {
    let specs: Vec<(String, IdentitySpec)> = (-3..=3)
        .flat_map(|k| [-1, 1].map(move |s| (k, s)))
        .map(|(k, s)| (format!("k={k},sign={s:+}"), IdentitySpec::baxter(k, s).unwrap()))
        .collect();
    let (ok, s) = batch(&specs, &config(100), 1e-9);
    let worst = s
        .split("; ")
        .filter_map(|p| p.split("max ").nth(1)?.split(',').next()?.parse::<f64>().ok())
        .fold(0.0, f64::max);
    g.record("8", ok, format!("Baxter numerator, 14 zero families x 100 trials at 1e-9: worst {worst:.2e}"));
}

fn transform_laws(g: &mut Gate) {
    let mut rng = Rng::new(9);
    let mut shift = 0.0f64;
    let mut shift_series = 0.0f64;
    let mut inversion = 0.0f64;
    let mut jacobi = 0.0f64;
    for _ in 0..1000 {
        let nome = rng.nome(0.05, 0.9);
        let w = rng.arg();
        let th = ThetaKernel::new(nome, policy());
        let base = th.eval(w).unwrap();
        for k in -4..=4i64 {
            let qk = nome.q().powi(k as i32);
            let c = shift_law(w, &nome, k);
            shift = shift.max(rel(th.eval(qk * w).unwrap(), c * base));
            // Independent route; the series meets an absolute target, so use
            // the dual-representation scale carried through the law.
            let s = theta_series(qk * w, &nome, &policy()).unwrap().value.value();
            shift_series = shift_series.max((s - c * base).norm() / (c.norm() * base.norm().max(1.0)));
        }
        inversion = inversion.max(rel(th.eval(w.inv()).unwrap(), invert_law(w) * base));
        inversion = inversion.max(rel(th.eval(nome.q() * w).unwrap(), -base / w));

        let tau = nome.q().ln() / (C::i() * PI);
        let jk = JacobiKernel::new(tau, policy()).unwrap();
        let z = w.ln() / (2.0 * PI * C::i());
        let t = |a: Jacobi, z: C| jk.eval(a, z).unwrap();
        let h = C::new(0.5, 0.0);
        jacobi = jacobi
            .max(rel(t(Jacobi::One, -z), -t(Jacobi::One, z)))
            .max(rel(t(Jacobi::Two, -z), t(Jacobi::Two, z)))
            .max(rel(t(Jacobi::Three, -z), t(Jacobi::Three, z)))
            .max(rel(t(Jacobi::Four, -z), t(Jacobi::Four, z)))
            .max(rel(t(Jacobi::One, z + h), t(Jacobi::Two, z)))
            .max(rel(t(Jacobi::Three, z + h), t(Jacobi::Four, z)));
    }
    let ok = shift <= 1e-12 && shift_series <= 1e-12 && inversion <= 1e-12 && jacobi <= 1e-12;
    g.record(
        "9",
        ok,
        format!(
            "transform laws at 1000 points: shift k=-4..4 relative {shift:.2e}, series route {shift_series:.2e}, inversion and unit shift {inversion:.2e}, \
             Jacobi parity and half shifts {jacobi:.2e} (limit 1e-12)"
        ),
    );
}

fn determinism(g: &mut Gate) {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        let path = dir.path().join(out);
        let o = Command::new(env!("CARGO_BIN_EXE_thetakit"))
            .args(["verify", "--identity", "four-slater", "--trials", "500", "--seed", "42", "--tol", "1e-12", "--out"])
            .arg(&path)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        (o.status.code(), o.stdout, std::fs::read(path).unwrap())
    };
    let a = run("1", "a.json");
    let b = run("1", "b.json");
    let c = run("8", "c.json");
    let ok = a == b && a == c && a.1 == a.2 && !a.1.is_empty();
    g.record(
        "10",
        ok,
        format!("verify twice with identical flags: {} bytes, identical = {} (also across 1 and 8 threads)", a.1.len(), ok),
    );
}

fn main() {
    let mut g = Gate { failed: Vec::new() };
    let start = Instant::now();
    dual_representation(&mut g);
    first_fundamental(&mut g);
    second_fundamental(&mut g);
    equivalence(&mut g);
    a_type_family(&mut g);
    four_term(&mut g);
    special_cases(&mut g);
    baxter(&mut g);
    transform_laws(&mut g);
    determinism(&mut g);
    // A quick registry-level smoke check that the default sampler agrees.
    let smoke = run_trials("sp-21", &config(1), 1e-12, &policy()).unwrap();
    println!(
        "acceptance: {} of 10 criteria passed in {:.2?} (sp-21 single trial {:.2e})",
        10 - g.failed.len(),
        start.elapsed(),
        smoke.max_normalized_residual
    );
    if !g.failed.is_empty() {
        eprintln!("failed criteria: {}", g.failed.join(", "));
        std::process::exit(1);
    }
}
