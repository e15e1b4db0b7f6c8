//! Every explicit effective constant, plus the bound assembly for each
//! theorem instance.
//!
//! Constants like K_eps blow past 1e5 routinely and past f64 range for small
//! epsilon, so positive quantities are tracked through [`Magnitude`] (natural
//! log internally) and rendered in scientific notation. Searches for burn-in
//! indices are exponential-then-binary on monotone predicates, with an
//! enumeration cap; a capped search reports a certified lower bound rather
//! than a guess.

use crate::error::{Error, Result};
use crate::psi::{gamma_l_chain, AggregateCache, TheoremFamily};
use crate::util::{log_plus, KahanSum};
use serde::ser::SerializeStruct;
use std::f64::consts::{E, LN_2};

const LN3: f64 = 1.0986122886681098;
const LN4: f64 = 1.3862943611198906;
/// exp() overflows f64 a little above this.
const LN_F64_MAX: f64 = 709.0;
/// Integers below 2^52 round-trip exactly through f64, so ceilings there are
/// trustworthy.
const EXACT_CEIL_LIMIT: f64 = 4.5e15;

/// Default cap on burn-in index enumeration.
pub const DEFAULT_SEARCH_CAP: u64 = 20_000_000;

// ---------------------------------------------------------------------------
// Magnitude: positive reals in log space
// ---------------------------------------------------------------------------

/// A nonnegative quantity carrying both its plain value (exact when it was
/// built from one) and its natural log, so that values like exp(1e13) stay
/// representable and never overflow silently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Magnitude {
    value: f64,
    ln: f64,
}

impl Magnitude {
    pub const ZERO: Magnitude = Magnitude {
        value: 0.0,
        ln: f64::NEG_INFINITY,
    };
    pub const INFINITE: Magnitude = Magnitude {
        value: f64::INFINITY,
        ln: f64::INFINITY,
    };

    pub fn from_value(v: f64) -> Self {
        debug_assert!(v >= 0.0);
        Magnitude {
            value: v,
            ln: v.ln(),
        }
    }

    pub fn from_ln(ln: f64) -> Self {
        Magnitude {
            value: ln.exp(),
            ln,
        }
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn log10(&self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// The plain value; +inf when it does not fit an f64.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_astronomical(&self) -> bool {
        !self.value.is_finite() && self.ln > 0.0
    }

    pub fn max(self, other: Magnitude) -> Magnitude {
        let take_self = if self.value.is_finite() && other.value.is_finite() {
            self.value >= other.value
        } else {
            self.ln >= other.ln
        };
        if take_self {
            self
        } else {
            other
        }
    }

    pub fn gt_value(&self, v: f64) -> bool {
        if self.value.is_finite() {
            self.value > v
        } else {
            self.ln > 0.0 && v.is_finite()
        }
    }

    pub fn lt_value(&self, v: f64) -> bool {
        if self.value.is_finite() {
            self.value < v
        } else if self.ln == f64::INFINITY {
            false
        } else {
            // astronomically large but finite
            v == f64::INFINITY
        }
    }
}

impl std::fmt::Display for Magnitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_astronomical() {
            let l10 = self.log10();
            let exp = l10.floor();
            let mant = 10f64.powf(l10 - exp);
            write!(f, "{mant:.4}e+{exp:.0}")
        } else {
            write!(f, "{}", self.value())
        }
    }
}

impl serde::Serialize for Magnitude {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Magnitude", 2)?;
        let v = self.value();
        st.serialize_field("value", &if v.is_finite() { Some(v) } else { None })?;
        st.serialize_field("log10", &self.log10())?;
        st.end()
    }
}

/// ln(a + b) given ln a and ln b, stable when either dominates.
fn ln_add(ln_a: f64, ln_b: f64) -> f64 {
    let (hi, lo) = if ln_a >= ln_b {
        (ln_a, ln_b)
    } else {
        (ln_b, ln_a)
    };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// A burn-in index from a monotone search.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "kind", content = "n")]
pub enum BurnIn {
    /// The search finished; this is the exact index.
    Exact(Magnitude),
    /// Divergence is certain but the crossing lies beyond the enumeration
    /// cap; this is a certified lower bound (conservative: using it can only
    /// over-report violations, never hide one).
    AtLeast(Magnitude),
    /// The aggregate is not known to diverge and never crossed within reach;
    /// the theorem hypotheses are unmet and bounds become infinite.
    Undetermined,
}

impl BurnIn {
    pub fn magnitude(&self) -> Magnitude {
        match self {
            BurnIn::Exact(m) | BurnIn::AtLeast(m) => *m,
            BurnIn::Undetermined => Magnitude::INFINITE,
        }
    }
}

// ---------------------------------------------------------------------------
// Phi evaluators for the burn-in searches
// ---------------------------------------------------------------------------

/// The divergent aggregate a burn-in search runs against.
pub enum PhiEval<'a> {
    /// Phi(n) = slope * n exactly (identically-distributed cases).
    Linear { slope: f64 },
    /// Tabulated/prefix-summed Phi, evaluable for n <= cap.
    Prefix {
        eval: &'a dyn Fn(u64) -> Result<f64>,
        cap: u64,
        divergent: bool,
    },
}

impl PhiEval<'_> {
    /// Phi_0: the minimal positive value Phi attains (the first, since Phi is
    /// non-decreasing).
    pub fn first_positive(&self) -> Result<f64> {
        match self {
            PhiEval::Linear { slope } => {
                if *slope > 0.0 {
                    Ok(*slope)
                } else {
                    Err(Error::NonDivergent {
                        name: "Phi",
                        msg: "linear aggregate with nonpositive slope".into(),
                    })
                }
            }
            PhiEval::Prefix { eval, cap, .. } => {
                for n in 1..=(*cap).min(1_000_000) {
                    let v = eval(n)?;
                    if v > 0.0 {
                        return Ok(v);
                    }
                }
                Err(Error::NonDivergent {
                    name: "Phi",
                    msg: "aggregate is identically zero on the probed range".into(),
                })
            }
        }
    }

    /// min{n : Phi(n) > target}.
    pub fn min_n_above(&self, target: Magnitude) -> Result<BurnIn> {
        match self {
            PhiEval::Linear { slope } => {
                if *slope <= 0.0 {
                    return Err(Error::NonDivergent {
                        name: "Phi",
                        msg: "linear aggregate with nonpositive slope".into(),
                    });
                }
                // smallest n with slope * n > target
                let ln_n = target.ln() - slope.ln();
                if ln_n > LN_F64_MAX {
                    return Ok(BurnIn::Exact(Magnitude::from_ln(ln_n)));
                }
                let raw = ln_n.exp();
                let mut n = raw.floor() + 1.0;
                if raw < EXACT_CEIL_LIMIT {
                    while n > 1.0 && target.lt_value(slope * (n - 1.0)) {
                        n -= 1.0;
                    }
                    while !target.lt_value(slope * n) {
                        n += 1.0;
                    }
                }
                Ok(BurnIn::Exact(Magnitude::from_value(n.max(1.0))))
            }
            PhiEval::Prefix {
                eval,
                cap,
                divergent,
            } => {
                let above = |n: u64| -> Result<bool> { Ok(target.lt_value(eval(n)?)) };
                if above(1)? {
                    return Ok(BurnIn::Exact(Magnitude::from_value(1.0)));
                }
                let mut lo = 1u64; // known not-above
                let mut hi = 2u64;
                loop {
                    if hi >= *cap {
                        if !above(*cap)? {
                            return if *divergent {
                                Ok(BurnIn::AtLeast(Magnitude::from_value(*cap as f64)))
                            } else {
                                Ok(BurnIn::Undetermined)
                            };
                        }
                        hi = *cap;
                        break;
                    }
                    if above(hi)? {
                        break;
                    }
                    lo = hi;
                    hi = hi.saturating_mul(2);
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if above(mid)? {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(BurnIn::Exact(Magnitude::from_value(hi as f64)))
            }
        }
    }

    /// max{n : Phi(n) < r}, with 0 for the empty set.
    pub fn max_n_below(&self, r: Magnitude) -> Result<BurnIn> {
        match self {
            PhiEval::Linear { slope } => {
                if *slope <= 0.0 {
                    return Err(Error::NonDivergent {
                        name: "Phi",
                        msg: "linear aggregate with nonpositive slope".into(),
                    });
                }
                let ln_n = r.ln() - slope.ln();
                if ln_n > LN_F64_MAX {
                    return Ok(BurnIn::Exact(Magnitude::from_ln(ln_n)));
                }
                // largest n with slope * n < r
                let raw = ln_n.exp();
                let mut n = raw.ceil();
                if raw < EXACT_CEIL_LIMIT {
                    while n >= 1.0 && !r.gt_value(slope * n) {
                        n -= 1.0;
                    }
                    while r.gt_value(slope * (n + 1.0)) {
                        n += 1.0;
                    }
                }
                Ok(BurnIn::Exact(Magnitude::from_value(n.max(0.0))))
            }
            PhiEval::Prefix {
                eval,
                cap,
                divergent,
            } => {
                let below = |n: u64| -> Result<bool> { Ok(r.gt_value(eval(n)?)) };
                if !below(1)? {
                    return Ok(BurnIn::Exact(Magnitude::ZERO));
                }
                let mut lo = 1u64; // known below
                let mut hi = 2u64;
                loop {
                    if hi >= *cap {
                        if below(*cap)? {
                            return if *divergent {
                                Ok(BurnIn::AtLeast(Magnitude::from_value(*cap as f64)))
                            } else {
                                Ok(BurnIn::Undetermined)
                            };
                        }
                        hi = *cap;
                        break;
                    }
                    if !below(hi)? {
                        break;
                    }
                    lo = hi;
                    hi = hi.saturating_mul(2);
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if below(mid)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(BurnIn::Exact(Magnitude::from_value(lo as f64)))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Effective Schmidt constants
// ---------------------------------------------------------------------------

/// The constants of the effective Schmidt bound
/// |S(x,Q) - 2 Psi(Q)| <= max(N_burn, K_eps Psi^(1/2)(Q) ln^(2+eps)(Psi(Q)+1)).
#[derive(Debug, Clone, serde::Serialize)]
pub struct SchmidtConstants {
    pub eps: f64,
    pub delta: f64,
    pub k_eps: Magnitude,
    /// ceil((2 K_eps / (eps delta))^(1/eps)) + 1
    pub threshold: Magnitude,
    /// N_{eps,delta}: twice the last index where the threshold still exceeds
    /// 44 Psi(n) L(n) L2(n)
    pub n_eps_delta: BurnIn,
    pub warnings: Vec<String>,
}

/// K_eps = (28 + 858 (eps+1) 7^eps) / (psi(1)^(1/2) ln^(2+eps)(psi(1)+1)).
pub fn schmidt_k_eps(eps: f64, psi1: f64) -> Result<Magnitude> {
    if !(eps > 0.0) {
        return Err(Error::Domain("eps must be positive".into()));
    }
    if !(psi1 > 0.0) {
        return Err(Error::Domain(
            "psi(1) must be positive: K_eps divides by psi(1)^(1/2)".into(),
        ));
    }
    let ln_pow7 = (858.0 * (eps + 1.0)).ln() + eps * 7f64.ln();
    let ln_num = ln_add(28f64.ln(), ln_pow7);
    let ln_den = 0.5 * psi1.ln() + (2.0 + eps) * (psi1 + 1.0).ln().ln();
    Ok(Magnitude::from_ln(ln_num - ln_den))
}

/// Full constant bundle for one (eps, delta, psi) instance of the effective
/// Schmidt bound. The burn-in search walks the monotone predicate
/// exponential-then-binary and stops at `search_cap`.
pub fn est_constants(
    eps: f64,
    delta: f64,
    agg: &AggregateCache,
    search_cap: u64,
) -> Result<SchmidtConstants> {
    if !(delta > 0.0) {
        return Err(Error::Domain("delta must be positive".into()));
    }
    let mut warnings = agg.psi().validate(TheoremFamily::SchmidtCount)?;
    if !agg.psi().divergent() {
        return Err(Error::NonDivergent {
            name: "Psi",
            msg: "N_{eps,delta} unbounded: psi family is not known to diverge".into(),
        });
    }
    let psi1 = agg.psi().eval(1);
    let k_eps = schmidt_k_eps(eps, psi1)?;

    let ln_t_raw = (LN_2 + k_eps.ln() - (eps * delta).ln()) / eps;
    let threshold = if ln_t_raw.exp() < EXACT_CEIL_LIMIT {
        Magnitude::from_value(ln_t_raw.exp().ceil() + 1.0)
    } else {
        warnings
            .push("threshold astronomically large; ceiling absorbed into log-space value".into());
        Magnitude::from_ln(ln_t_raw)
    };

    // predicate: threshold > 44 Psi(n) L(n) L2(n); the right side is
    // non-decreasing in n, so the true region is an initial segment
    let holds = |n: u64| -> Result<bool> {
        let s = agg.psi_sum(n)?;
        let (_, l, l2) = gamma_l_chain(s);
        Ok(threshold.gt_value(44.0 * s * l * l2))
    };
    let cap = match agg.psi().table_limit() {
        Some(limit) => search_cap.min(limit),
        None => search_cap,
    };
    let n_eps_delta = if !holds(1)? {
        BurnIn::Exact(Magnitude::ZERO)
    } else {
        let mut lo = 1u64; // known true
        let mut hi = 2u64;
        let mut capped = false;
        loop {
            if hi >= cap {
                if holds(cap)? {
                    capped = true;
                    lo = cap;
                }
                hi = cap;
                break;
            }
            if !holds(hi)? {
                break;
            }
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        if capped {
            warnings.push(format!(
                "burn-in crossing beyond enumeration cap {cap}; reporting a certified lower bound"
            ));
            BurnIn::AtLeast(Magnitude::from_value(2.0 * cap as f64))
        } else {
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if holds(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            BurnIn::Exact(Magnitude::from_value(2.0 * lo as f64))
        }
    };

    Ok(SchmidtConstants {
        eps,
        delta,
        k_eps,
        threshold,
        n_eps_delta,
        warnings,
    })
}

impl SchmidtConstants {
    /// The right-hand side at one Q, given Psi(Q).
    pub fn bound(&self, psi_sum_q: f64) -> f64 {
        let fluct = if psi_sum_q > 0.0 {
            let ln_f = self.k_eps.ln()
                + 0.5 * psi_sum_q.ln()
                + (2.0 + self.eps) * (psi_sum_q + 1.0).ln().max(f64::MIN_POSITIVE).ln();
            ln_f.exp()
        } else {
            0.0
        };
        self.n_eps_delta.magnitude().value().max(fluct)
    }
}

// ---------------------------------------------------------------------------
// Quantitative Borel-Cantelli constant bundles (prefix and window forms)
// ---------------------------------------------------------------------------

/// Constants of the prefix-variance form: the bound
/// K (Phi^(2/3)(N) ln^(1/3+eps)(Phi(N)+2)) outside a set of measure delta.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PrefixBcConstants {
    pub eps: f64,
    pub delta: f64,
    pub j: Magnitude,
    pub n_eps_delta: BurnIn,
    pub k_eps_delta: Magnitude,
    pub phi0: f64,
    pub warnings: Vec<String>,
}

/// j = 1 + ceil(exp(((1 + ln^(-1-eps) 3) K / (eps delta))^(1/eps))),
/// N = min{n : Phi(n) > j^3 ln^(1+eps)(j+2)},
/// K_{eps,delta} = max(C N / max(Phi_0^(2/3) ln^(1/3+eps)(Phi_0+2), 1), B2)
/// with B2 the delta-independent branch.
pub fn prefix_bc_constants(
    eps: f64,
    delta: f64,
    variance_k: f64,
    bound_c: f64,
    phi: &PhiEval,
) -> Result<PrefixBcConstants> {
    check_eps_delta(eps, delta)?;
    if !(variance_k > 0.0) || !(bound_c > 0.0) {
        return Err(Error::Domain("K and C must be positive".into()));
    }
    let mut warnings = Vec::new();
    let phi0 = phi.first_positive()?;

    let inner = (1.0 + LN3.powf(-1.0 - eps)) * variance_k / (eps * delta);
    let ln_j_raw = inner.powf(1.0 / eps);
    let j = if ln_j_raw < LN_F64_MAX && ln_j_raw.exp() < EXACT_CEIL_LIMIT {
        Magnitude::from_value(1.0 + ln_j_raw.exp().ceil())
    } else {
        warnings.push("j astronomically large; returned in log space".into());
        Magnitude::from_ln(ln_j_raw)
    };

    // target = j^3 ln^(1+eps)(j+2)
    let ln_j_plus2 = if j.is_astronomical() {
        j.ln()
    } else {
        (j.value() + 2.0).ln()
    };
    let target = Magnitude::from_ln(3.0 * j.ln() + (1.0 + eps) * ln_j_plus2.ln());
    let n_eps_delta = phi.min_n_above(target)?;
    if matches!(n_eps_delta, BurnIn::AtLeast(_) | BurnIn::Undetermined) {
        warnings.push("burn-in search capped; constants use a conservative stand-in".into());
    }

    let denom = (phi0.powf(2.0 / 3.0) * (phi0 + 2.0).ln().powf(1.0 / 3.0 + eps)).max(1.0);
    let branch1 = Magnitude::from_ln(bound_c.ln() + n_eps_delta.magnitude().ln() - denom.ln());
    let branch2 = prefix_bc_second_branch(eps, phi0);
    Ok(PrefixBcConstants {
        eps,
        delta,
        j,
        n_eps_delta,
        k_eps_delta: branch1.max(Magnitude::from_value(branch2)),
        phi0,
        warnings,
    })
}

/// The delta-independent branch of the prefix-form K.
pub fn prefix_bc_second_branch(eps: f64, phi0: f64) -> f64 {
    (4.0 / (phi0 + 2.0).ln().powf(2.0 * eps / 3.0))
        * (LN4 / LN3).powf(1.0 + eps)
        * (4.0 + (1.0 + eps) / LN3 + 1.0 / (4.0 * LN4.powf(1.0 + eps)))
}

/// Constants of the windowed-variance form: the bound
/// K (Phi^(1/2)(N) ln^(3/2+eps)(Phi(N)) + max f_k) outside measure delta.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WindowBcConstants {
    pub eps: f64,
    pub delta: f64,
    pub r: Magnitude,
    pub n_eps_delta: BurnIn,
    pub k_eps_delta: Magnitude,
    pub phi0: f64,
    pub warnings: Vec<String>,
}

/// r = ceil((2K/(eps delta))^(1/eps)) + 1, N = max{n : Phi(n) < r},
/// K_{eps,delta} = max(C N / max(Phi_0^(1/2) ln^(3/2+eps)(Phi_0+2) + f_1, 1), B2).
pub fn window_bc_constants(
    eps: f64,
    delta: f64,
    variance_k: f64,
    bound_c: f64,
    f1: f64,
    phi: &PhiEval,
) -> Result<WindowBcConstants> {
    check_eps_delta(eps, delta)?;
    if !(variance_k > 0.0) || !(bound_c > 0.0) {
        return Err(Error::Domain("K and C must be positive".into()));
    }
    let mut warnings = Vec::new();
    let phi0 = phi.first_positive()?;
    let r = window_bc_r(eps, delta, variance_k, &mut warnings);
    let n_eps_delta = phi.max_n_below(r)?;
    match n_eps_delta {
        BurnIn::AtLeast(_) => {
            warnings.push("burn-in search capped; constants use a certified lower bound".into())
        }
        BurnIn::Undetermined => warnings.push(
            "aggregate not known to diverge within reach; burn-in undetermined and the bound \
             is infinite (theorem hypotheses unmet at this scale)"
                .into(),
        ),
        BurnIn::Exact(_) => {}
    }

    let denom = (phi0.sqrt() * (phi0 + 2.0).ln().powf(1.5 + eps) + f1).max(1.0);
    let branch1 = Magnitude::from_ln(bound_c.ln() + n_eps_delta.magnitude().ln() - denom.ln());
    let branch2 = window_bc_second_branch(eps);
    Ok(WindowBcConstants {
        eps,
        delta,
        r,
        n_eps_delta,
        k_eps_delta: branch1.max(Magnitude::from_value(branch2)),
        phi0,
        warnings,
    })
}

/// r_{eps,delta} = ceil((2K/(eps delta))^(1/eps)) + 1.
pub fn window_bc_r(eps: f64, delta: f64, variance_k: f64, warnings: &mut Vec<String>) -> Magnitude {
    let ln_raw = (LN_2 + variance_k.ln() - (eps * delta).ln()) / eps;
    if ln_raw < LN_F64_MAX && ln_raw.exp() < EXACT_CEIL_LIMIT {
        Magnitude::from_value(ln_raw.exp().ceil() + 1.0)
    } else {
        warnings.push("r astronomically large; ceiling absorbed into log-space value".into());
        Magnitude::from_ln(ln_raw)
    }
}

/// The delta-independent branch of the window-form K:
/// (2 / ln^(3/2+eps/2) 2)(1 + 1/(sqrt2 ln^(3/2+eps) 4))(ln4/ln3)^(3/2+eps).
pub fn window_bc_second_branch(eps: f64) -> f64 {
    (2.0 / LN_2.powf(1.5 + eps / 2.0))
        * (1.0 + 1.0 / (2f64.sqrt() * LN4.powf(1.5 + eps)))
        * (LN4 / LN3).powf(1.5 + eps)
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0) || !(delta > 0.0) {
        return Err(Error::Domain("eps and delta must be positive".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Coprime-count (Aistleitner-Borda-Hauke form) constants
// ---------------------------------------------------------------------------

const ABH_SCAN_CAP: u64 = 1_000_000_000;

/// k_{C,delta} = min{k : script_c k^(-sqrt(C)/2) (1 + 2k/(sqrt(C)-2)) < delta},
/// found by upward scan; the scanned function is strictly decreasing for
/// C > 4, so the scan terminates.
pub fn abh_k(c: f64, delta: f64, script_c: f64) -> Result<u64> {
    if !(c > 4.0) {
        return Err(Error::Domain(format!(
            "C = {c} must exceed 4: the sqrt(C) - 2 denominator vanishes at 4"
        )));
    }
    if !(delta > 0.0) || !(script_c > 0.0) {
        return Err(Error::Domain("delta and script C must be positive".into()));
    }
    let s = c.sqrt();
    let f = |k: f64| script_c * k.powf(-s / 2.0) * (1.0 + 2.0 * k / (s - 2.0));
    let mut k = 1u64;
    while f(k as f64) >= delta {
        k += 1;
        if k > ABH_SCAN_CAP {
            return Err(Error::SearchCapExceeded {
                what: "k_{C,delta} upward scan",
                cap: ABH_SCAN_CAP,
            });
        }
    }
    Ok(k)
}

/// Bound bundle for the coprime-count check:
/// |S'(x,Q) - Psi'(Q)| <= max(k/2, (2e Psi' + 1)/(ln Psi')^C + 1/2).
#[derive(Debug, Clone, serde::Serialize)]
pub struct AbhConstants {
    pub c: f64,
    pub delta: f64,
    pub script_c: f64,
    pub k_c_delta: u64,
    pub warnings: Vec<String>,
}

pub fn abh_constants(c: f64, delta: f64, script_c: f64) -> Result<AbhConstants> {
    let k_c_delta = abh_k(c, delta, script_c)?;
    Ok(AbhConstants {
        c,
        delta,
        script_c,
        k_c_delta,
        warnings: vec![
            "script C is user-supplied and unverified: its published value is deferred".into(),
        ],
    })
}

impl AbhConstants {
    /// The logarithmic branch is meaningless until Psi'(Q) clears e; below
    /// that the max structure already covers small Q through k alone.
    pub fn bound(&self, psi_prime_q: f64) -> f64 {
        let first = self.k_c_delta as f64 / 2.0;
        if psi_prime_q > E {
            let second = (2.0 * E * psi_prime_q + 1.0) / psi_prime_q.ln().powf(self.c) + 0.5;
            first.max(second)
        } else {
            first
        }
    }
}

// ---------------------------------------------------------------------------
// M0-set constants (Lebesgue instantiation)
// ---------------------------------------------------------------------------

/// Inputs for the M0 constant bundle.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct M0Params {
    pub nu: f64,
    pub decay_a: f64,
    pub growth_b: f64,
    pub growth_c: f64,
    pub alpha: f64,
    pub k0: f64,
    pub delta: f64,
}

/// Every closed-form constant of the lacunary and separated M0 bounds.
#[derive(Debug, Clone, serde::Serialize)]
pub struct M0Constants {
    pub k_prime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub m1: f64,
    pub m2: f64,
    /// variance constant for the lacunary form: 6 max(48, c1, c2)
    pub variance_k_lacunary: f64,
    /// variance constant for the separated form: 2 max(48, c3)
    pub variance_k_separated: f64,
    /// printed closed forms for the tail cut, statement and derivation
    /// versions (signs read positively; the exact t comes from
    /// [`t_delta_exact`])
    pub t1_statement: f64,
    pub t1_derivation: f64,
    pub t2_statement: f64,
    pub t2_derivation: f64,
    /// every zeta evaluation that entered the bundle, as (argument, value)
    pub zeta_calls: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

const M0_ZETA_TOL: f64 = 1e-13;

pub fn m0_constants(p: &M0Params) -> Result<M0Constants> {
    if !(p.decay_a > 2.0 * p.growth_b) {
        return Err(Error::Domain(format!(
            "need A > 2B (A = {}, B = {})",
            p.decay_a, p.growth_b
        )));
    }
    if !(p.growth_b >= 1.0) || !(p.growth_c > 0.0) {
        return Err(Error::Domain("need B >= 1 and C > 0".into()));
    }
    if !(p.k0 > 1.0) {
        return Err(Error::Domain(format!(
            "lacunary constant K0 = {} must exceed 1",
            p.k0
        )));
    }
    if !(0.0 < p.alpha && p.alpha < 1.0) {
        return Err(Error::Domain(format!(
            "alpha = {} must lie in (0,1)",
            p.alpha
        )));
    }
    if !(p.nu > 0.0) || !(p.delta > 0.0) {
        return Err(Error::Domain("nu and delta must be positive".into()));
    }
    let (a, b) = (p.decay_a, p.growth_b);
    let mut zeta_calls = Vec::new();
    let mut z = |s: f64, forced_by: &str| -> Result<f64> {
        let v = crate::numtheory::zeta(s, M0_ZETA_TOL)
            .map_err(|e| Error::Domain(format!("{forced_by} needs zeta({s}): {e}")))?;
        zeta_calls.push((s, v));
        Ok(v)
    };

    let k_prime = 1.0 / (p.k0 - 1.0);
    let c1 = 22.0 / (p.k0 - 1.0);
    let nu_ca = p.nu * p.growth_c.powf(-a);
    let m2 = 3.0 / 2f64.powf(2.0 / 3.0);
    let c2 = 12.0 * (m2 + 1.0) * (1.0 + z(a - 1.0, "c2")?)
        + 8.0 / (p.k0 - 1.0)
        + 18.0
            * nu_ca
            * (2f64.sqrt() * z(a - 0.5, "c2")? * (2.0 + p.alpha.powf(-a))
                + 2f64.powf(a + 1.0) * z(a / 2.0, "c2")?);
    let m1 = 3.0 + 3.0 * z(a / b - 1.0, "m1")?;
    let c3 = 4.0
        + 18.0
            * nu_ca
            * (2f64.sqrt() * z(a / b - 0.5, "c3")? * (2.0 + p.alpha.powf(-a))
                + 2f64.powf(a + 1.0) * z(a / (2.0 * b), "c3")?)
        + c2;

    // Printed tail-cut closed forms. The printed bases (1-A) delta / ... are
    // negative as typeset; the derivations solve for (A-1) delta / ..., which
    // is how they are evaluated here.
    let t1_statement = 0.5 + ((a - 1.0) * p.delta / (2.0 * (3.0 + nu_ca))).powf(1.0 / (1.0 - a));
    let t1_derivation = 0.5 + ((a / b - 1.0) * p.delta / (3.0 + nu_ca)).powf(1.0 / (1.0 - a / b));
    let d = (a / b).min(9.0);
    let t2_statement = 0.5 + ((d - 1.0) * p.delta / (2.0 * (1.0 + nu_ca))).powf(1.0 / (1.0 - d));
    let t2_derivation = 0.5 + ((d - 1.0) * p.delta / (1.0 + nu_ca)).powf(1.0 / (1.0 - d));

    Ok(M0Constants {
        k_prime,
        c1,
        c2,
        c3,
        m1,
        m2,
        variance_k_lacunary: 6.0 * 48f64.max(c1).max(c2),
        variance_k_separated: 2.0 * 48f64.max(c3),
        t1_statement,
        t1_derivation,
        t2_statement,
        t2_derivation,
        zeta_calls,
        warnings: vec![
            "printed tail-cut closed forms carry sign/factor discrepancies between statement \
             and derivation; the exact tail cut is computed independently and used in bounds"
                .into(),
        ],
    })
}

// ---------------------------------------------------------------------------
// Exact tail cut t_delta
// ---------------------------------------------------------------------------

/// A summable majorant with a certified tail bound.
#[derive(Debug, Clone, Copy)]
pub enum OmegaFn {
    Zero,
    /// coef * n^(-exponent) with exponent > 1
    PowerLaw {
        coef: f64,
        exponent: f64,
    },
}

impl OmegaFn {
    fn eval(&self, n: u64) -> f64 {
        match self {
            OmegaFn::Zero => 0.0,
            OmegaFn::PowerLaw { coef, exponent } => coef * (n as f64).powf(-exponent),
        }
    }

    /// Upper bound on the tail sum from m (inclusive).
    fn tail_upper(&self, m: u64) -> Result<f64> {
        match self {
            OmegaFn::Zero => Ok(0.0),
            OmegaFn::PowerLaw { coef, exponent } => {
                if !(*exponent > 1.0) {
                    return Err(Error::Domain(format!(
                        "omega exponent {exponent} must exceed 1 for a summable tail"
                    )));
                }
                let m = m as f64;
                Ok(coef * (m.powf(-exponent) + m.powf(1.0 - exponent) / (exponent - 1.0)))
            }
        }
    }
}

/// The exact tail cut and the printed closed forms next to it.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TailCut {
    /// minimal t with tail sum below delta/3, certified by partial sums plus
    /// integral tail bounds
    pub t_exact: u64,
    /// certified upper bound of the tail at t_exact
    pub tail_at_t: f64,
    pub t1_statement: f64,
    pub t1_derivation: f64,
    pub t2_statement: f64,
    pub t2_derivation: f64,
}

const T_DELTA_CAP: u64 = 10_000_000;

/// t_delta = min{t : sum_{n >= t} (omega(n) + nu / (C^A n^(A/B))) < delta/3},
/// decided rigorously: a partial sum plus an integral upper bound certifies
/// acceptance, the partial sum alone certifies refusal.
pub fn t_delta_exact(
    omega: &OmegaFn,
    nu: f64,
    decay_a: f64,
    growth_b: f64,
    growth_c: f64,
    delta: f64,
) -> Result<TailCut> {
    if !(decay_a / growth_b > 1.0) {
        return Err(Error::Domain(
            "need A/B > 1 for a summable decay tail".into(),
        ));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain("delta must be positive".into()));
    }
    let nu_ca = nu * growth_c.powf(-decay_a);
    let decay = OmegaFn::PowerLaw {
        coef: nu_ca,
        exponent: decay_a / growth_b,
    };
    let target = delta / 3.0;
    let tail_from = |t: u64| -> Result<(f64, f64)> {
        // (certified lower, certified upper) of the tail from t
        let mut partial = KahanSum::new();
        let mut m = t;
        loop {
            let upper = partial.value() + omega.tail_upper(m)? + decay.tail_upper(m)?;
            let lower = partial.value();
            if upper < target || lower >= target {
                return Ok((lower, upper));
            }
            // extend the partial sum a block at a time until decidable
            let stop = m.saturating_add(100_000);
            while m < stop {
                partial.add(omega.eval(m) + decay.eval(m));
                m += 1;
            }
            if m > t.saturating_add(100_000_000) {
                return Err(Error::Domain(
                    "tail cut undecidable within budget; delta/3 too close to a tail value".into(),
                ));
            }
        }
    };
    let mut t = 1u64;
    let t_exact = loop {
        let (lower, upper) = tail_from(t)?;
        if upper < target {
            break t;
        }
        debug_assert!(lower >= target || upper >= target);
        t += 1;
        if t > T_DELTA_CAP {
            return Err(Error::SearchCapExceeded {
                what: "t_delta search",
                cap: T_DELTA_CAP,
            });
        }
    };
    let (_, tail_at_t) = tail_from(t_exact)?;
    let (a, b) = (decay_a, growth_b);
    let d = (a / b).min(9.0);
    Ok(TailCut {
        t_exact,
        tail_at_t,
        t1_statement: 0.5 + ((a - 1.0) * delta / (2.0 * (3.0 + nu_ca))).powf(1.0 / (1.0 - a)),
        t1_derivation: 0.5 + ((a / b - 1.0) * delta / (3.0 + nu_ca)).powf(1.0 / (1.0 - a / b)),
        t2_statement: 0.5 + ((d - 1.0) * delta / (2.0 * (1.0 + nu_ca))).powf(1.0 / (1.0 - d)),
        t2_derivation: 0.5 + ((d - 1.0) * delta / (1.0 + nu_ca)).powf(1.0 / (1.0 - d)),
    })
}

// ---------------------------------------------------------------------------
// Effective strong-law constants
// ---------------------------------------------------------------------------

/// Constants for the effective strong law:
/// |N^-1 sum (F_k(x)-F_k)| <= K (Phi^(1/2)(N) ln^(3/2+eps)(Phi(N))/N + Phi_0/N).
#[derive(Debug, Clone, serde::Serialize)]
pub struct SllnConstants {
    pub eps: f64,
    pub delta: f64,
    pub sigma2: f64,
    pub r: Magnitude,
    pub n_eps_delta: Magnitude,
    pub k_eps_delta: Magnitude,
    /// Phi_0 = max_k F~_k over the probed range
    pub phi0: f64,
    pub warnings: Vec<String>,
}

/// r = ceil((2 sigma^2/(eps delta))^(1/eps)) + 1, N = ceil(r/Phi_0 - 1),
/// K = max(N / max(Phi_0^(1/2) ln^(3/2+eps)(Phi_0+2) + F, 1), B2).
pub fn slln_constants(
    eps: f64,
    delta: f64,
    sigma2: f64,
    phi0: f64,
    mean_f: f64,
) -> Result<SllnConstants> {
    check_eps_delta(eps, delta)?;
    if !(sigma2 > 0.0) {
        return Err(Error::Domain("sigma^2 must be positive".into()));
    }
    if !(phi0 >= 1.0) {
        return Err(Error::Domain(
            "Phi_0 = max F~_k is at least 1 by construction".into(),
        ));
    }
    let mut warnings = Vec::new();
    let r = window_bc_r(eps, delta, sigma2, &mut warnings);
    let n = if r.is_astronomical() {
        Magnitude::from_ln(r.ln() - phi0.ln())
    } else {
        Magnitude::from_value((r.value() / phi0 - 1.0).ceil().max(0.0))
    };
    let denom = (phi0.sqrt() * (phi0 + 2.0).ln().powf(1.5 + eps) + mean_f).max(1.0);
    let branch1 = Magnitude::from_ln(n.ln() - denom.ln());
    let branch2 = Magnitude::from_value(window_bc_second_branch(eps));
    Ok(SllnConstants {
        eps,
        delta,
        sigma2,
        r,
        n_eps_delta: n,
        k_eps_delta: branch1.max(branch2),
        phi0,
        warnings,
    })
}

impl SllnConstants {
    /// The strong-law right side at one N, given Phi(N) = sum of F~_k. Since
    /// every F~_k >= 1, Phi(N) >= 1 and the log power is well defined.
    pub fn bound(&self, phi_n: f64, n: u64) -> f64 {
        let k = self.k_eps_delta.value();
        k * (phi_n.sqrt() * log_plus(phi_n).powf(1.5 + self.eps) + self.phi0) / n as f64
    }
}

// ---------------------------------------------------------------------------
// Assembled bounds for the M0 and normal-number forms
// ---------------------------------------------------------------------------

/// Lacunary M0 right side: 2 K_{eps,delta/2} Psi(N)^(2/3) (ln Psi(N)+2)^(2+eps)
/// plus the exact tail cut. The log base clamps at zero for tiny Psi, which
/// can only shrink the bound (conservative for violation counting).
pub fn m0_lacunary_bound(k_eps_delta_half: Magnitude, eps: f64, t_cut: u64, psi_n: f64) -> f64 {
    if psi_n <= 0.0 {
        return t_cut as f64;
    }
    let base = (psi_n.ln() + 2.0).max(0.0);
    2.0 * k_eps_delta_half.value() * psi_n.powf(2.0 / 3.0) * base.powf(2.0 + eps) + t_cut as f64
}

/// Separated M0 right side:
/// K_{eps,delta/2} (Phi^(1/2)(N) (ln Phi(N))^(3/2+eps) + 2) + t_cut
/// with Phi(N) = Psi(N)(log+ Psi(N) + 2) + E(N).
pub fn m0_separated_bound(k_eps_delta_half: Magnitude, eps: f64, t_cut: u64, phi_n: f64) -> f64 {
    if phi_n <= 0.0 {
        return k_eps_delta_half.value() * 2.0 + t_cut as f64;
    }
    let logpow = log_plus(phi_n).powf(1.5 + eps);
    k_eps_delta_half.value() * (phi_n.sqrt() * logpow + 2.0) + t_cut as f64
}

/// The separated-form aggregate Phi(N) = Psi(N)(log+ Psi(N) + 2) + E(N).
pub fn m0_separated_phi(psi_n: f64, e_n: f64) -> f64 {
    psi_n * (log_plus(psi_n) + 2.0) + e_n
}

/// Digit-count envelope: min(N, N/b + K N^(2/3) ln^(1/3+eps)(N+2)).
pub fn normal_envelope(k_eps_delta: Magnitude, eps: f64, base: u64, n: u64) -> f64 {
    let nf = n as f64;
    let fluct = k_eps_delta.value() * nf.powf(2.0 / 3.0) * (nf + 2.0).ln().powf(1.0 / 3.0 + eps);
    nf.min(nf / base as f64 + fluct)
}
