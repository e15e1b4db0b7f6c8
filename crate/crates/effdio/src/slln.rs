//! Bounded random-variable sequences and the effective strong-law check.

use crate::constants::slln_constants;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, sample_rng};
use crate::util::KahanSum;
use crate::verify::{wilson_interval, McConfig, Verdict, ViolationReport, VERDICT_SLACK};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// One bounded random-variable family.
#[derive(Debug, Clone, serde::Serialize)]
pub enum RvFamily {
    Bernoulli {
        p: f64,
    },
    /// uniform on the integers lo..=hi
    DiscreteUniform {
        lo: u64,
        hi: u64,
    },
    /// finite support with probabilities
    Table {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
}

impl RvFamily {
    fn validate(&self) -> Result<()> {
        match self {
            RvFamily::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Domain(format!("Bernoulli p = {p} outside [0,1]")));
                }
            }
            RvFamily::DiscreteUniform { lo, hi } => {
                if lo > hi {
                    return Err(Error::Domain("discrete uniform needs lo <= hi".into()));
                }
            }
            RvFamily::Table { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::Domain(
                        "table needs matching nonempty values/probs".into(),
                    ));
                }
                if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(Error::Domain(
                        "table probabilities must lie in [0,1]".into(),
                    ));
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::Domain(format!(
                        "table probabilities sum to {s}, not 1"
                    )));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::Domain(
                        "table values must be finite and nonnegative".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn mean(&self) -> f64 {
        match self {
            RvFamily::Bernoulli { p } => *p,
            RvFamily::DiscreteUniform { lo, hi } => (*lo as f64 + *hi as f64) / 2.0,
            RvFamily::Table { values, probs } => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
        }
    }

    fn variance(&self) -> f64 {
        match self {
            RvFamily::Bernoulli { p } => p * (1.0 - p),
            RvFamily::DiscreteUniform { lo, hi } => {
                let n = (*hi - *lo + 1) as f64;
                (n * n - 1.0) / 12.0
            }
            RvFamily::Table { values, probs } => {
                let m = self.mean();
                values
                    .iter()
                    .zip(probs)
                    .map(|(v, p)| p * (v - m) * (v - m))
                    .sum()
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            RvFamily::Bernoulli { p } => {
                if rng.gen::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            RvFamily::DiscreteUniform { lo, hi } => rng.gen_range(*lo..=*hi) as f64,
            RvFamily::Table { values, probs } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().unwrap()
            }
        }
    }
}

/// A sequence of independent bounded variables: one family repeated, or a
/// periodic schedule of families (independent, non-identical).
#[derive(Debug, Clone, serde::Serialize)]
pub struct RvSequenceSpec {
    schedule: Vec<RvFamily>,
}

impl RvSequenceSpec {
    pub fn iid(family: RvFamily) -> Result<Self> {
        family.validate()?;
        Ok(RvSequenceSpec {
            schedule: vec![family],
        })
    }

    pub fn schedule(families: Vec<RvFamily>) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::Domain("schedule needs at least one family".into()));
        }
        for f in &families {
            f.validate()?;
        }
        Ok(RvSequenceSpec { schedule: families })
    }

    pub fn is_iid(&self) -> bool {
        self.schedule.len() == 1
    }

    fn family_at(&self, k: u64) -> &RvFamily {
        &self.schedule[((k - 1) % self.schedule.len() as u64) as usize]
    }

    /// F_k.
    pub fn mean_at(&self, k: u64) -> f64 {
        self.family_at(k).mean()
    }

    /// F~_k = max(F_k, 1).
    pub fn f_tilde_at(&self, k: u64) -> f64 {
        self.mean_at(k).max(1.0)
    }

    /// sigma_k^2.
    pub fn variance_at(&self, k: u64) -> f64 {
        self.family_at(k).variance()
    }

    /// The universal variance bound sigma^2 = max(max_k sigma_k^2, 1).
    pub fn sigma2(&self) -> f64 {
        self.schedule
            .iter()
            .map(|f| f.variance())
            .fold(1.0f64, f64::max)
    }

    /// Phi_0 = max_k F~_k (attained within one period).
    pub fn phi0(&self) -> f64 {
        self.schedule
            .iter()
            .map(|f| f.mean().max(1.0))
            .fold(1.0f64, f64::max)
    }
}

/// Analytic windowed variance against its certified bound:
/// sum sigma_k^2 <= sigma^2 sum F~_k over m < k <= n.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VarianceCertificate {
    pub analytic: f64,
    pub bound: f64,
    pub slack: f64,
}

pub fn variance_certificate(spec: &RvSequenceSpec, m: u64, n: u64) -> Result<VarianceCertificate> {
    if m >= n {
        return Err(Error::Domain(format!("need m < n, got ({m}, {n})")));
    }
    let mut analytic = KahanSum::new();
    let mut tilde = KahanSum::new();
    for k in (m + 1)..=n {
        analytic.add(spec.variance_at(k));
        tilde.add(spec.f_tilde_at(k));
    }
    let bound = spec.sigma2() * tilde.value();
    Ok(VarianceCertificate {
        analytic: analytic.value(),
        bound,
        slack: bound - analytic.value(),
    })
}

/// Simulates sample paths and tests |N^-1 sum (F_k(x) - F_k)| against the
/// effective strong-law right side at every grid N.
pub fn simulate_slln(
    spec: &RvSequenceSpec,
    eps: f64,
    delta: f64,
    cfg: &McConfig,
) -> Result<ViolationReport> {
    if cfg.samples == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    let grid = cfg.grid.values()?;
    let nmax = *grid.last().unwrap();

    // prefix Phi(N) = sum F~_k and the per-k means, one period at a time
    let period = spec.schedule.len() as u64;
    let mut phi_prefix = Vec::with_capacity(nmax as usize + 1);
    phi_prefix.push(0.0);
    let mut acc = KahanSum::new();
    for k in 1..=nmax {
        acc.add(spec.f_tilde_at(k));
        phi_prefix.push(acc.value());
    }
    let means: Vec<f64> = (1..=period).map(|k| spec.mean_at(k)).collect();

    let consts = slln_constants(eps, delta, spec.sigma2(), spec.phi0(), spec.mean_at(1))?;
    let mut warnings = consts.warnings.clone();
    let bounds: Vec<f64> = grid
        .iter()
        .map(|&n| consts.bound(phi_prefix[n as usize], n))
        .collect();

    let mut constants = serde_json::to_value(&consts).expect("constants serialization");
    if spec.is_iid() {
        // the identically-distributed corollary writes the additive term with
        // the common mean instead of Phi_0; emit both readings
        let f = spec.mean_at(1);
        constants["iid_corollary_mean_term"] = json!(f);
        if (f.max(1.0) - spec.phi0()).abs() > 1e-12 {
            warnings.push("iid corollary term differs from Phi_0; both emitted".into());
        }
    }

    let outcomes: Vec<(bool, f64)> = map_indexed(cfg.samples, cfg.threads, |path| {
        let mut rng = sample_rng(cfg.seed, path);
        let mut sum = KahanSum::new();
        let mut violated = false;
        let mut gi = 0usize;
        for k in 1..=nmax {
            let fam = spec.family_at(k);
            let x = fam.sample(&mut rng);
            sum.add(x - means[((k - 1) % period) as usize]);
            while gi < grid.len() && grid[gi] == k {
                if (sum.value() / k as f64).abs() > bounds[gi] {
                    violated = true;
                }
                gi += 1;
            }
        }
        (violated, path as f64)
    });

    let samples = outcomes.len() as u64;
    let violators = outcomes.iter().filter(|(v, _)| *v).count() as u64;
    let violator_xs: Vec<f64> = outcomes
        .iter()
        .filter(|(v, _)| *v)
        .map(|&(_, x)| x)
        .collect();
    let fraction = violators as f64 / samples as f64;
    let wilson = wilson_interval(violators, samples);
    let verdict = if wilson[1] <= delta + VERDICT_SLACK {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ViolationReport {
        theorem: "strong-law".into(),
        inputs: json!({
            "eps": eps,
            "delta": delta,
            "spec": serde_json::to_value(spec).expect("spec serialization"),
        }),
        samples,
        violators,
        fraction,
        wilson,
        delta,
        slack: VERDICT_SLACK,
        verdict,
        seed: cfg.seed,
        grid: cfg.grid.clone(),
        warnings,
        constants,
        violator_xs,
    })
}
