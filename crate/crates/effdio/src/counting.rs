//! Counting functions: solution counts S, S', S*, the inhomogeneous count R
//! along a sequence, base-b digit counts, and the pairwise gcd sum E(N).
//!
//! Boundary conventions: S and S' use a strict comparison, R uses a
//! non-strict one. All comparisons against psi thresholds are exact on the
//! stored representation of x, so counts never flip on rounding noise.

use crate::error::{Error, Result};
use crate::numtheory::UnitReal;
use crate::psi::{AggregateCache, ApproxFunction};
use crate::util::KahanSum;
use num_integer::Integer;

/// An increasing integer sequence (q_n) with its declared structure.
#[derive(Debug, Clone)]
pub struct SequenceSpec {
    kind: SeqKind,
    /// lacunary constant K0 with q_(n+1)/q_n >= K0
    pub lacunary_k0: Option<f64>,
    /// growth parameters (C, B) with log q_n > C n^(1/B)
    pub growth: Option<(f64, f64)>,
    /// separation exponent alpha and offset m0, declared not verified
    pub separation: Option<(f64, u64)>,
}

#[derive(Debug, Clone)]
enum SeqKind {
    PowersOfTwo,
    Geometric { a: f64, r: f64 },
    Explicit(Vec<u64>),
}

impl SequenceSpec {
    pub fn powers_of_two() -> Self {
        SequenceSpec {
            kind: SeqKind::PowersOfTwo,
            lacunary_k0: Some(2.0),
            growth: Some((0.5, 1.0)),
            separation: None,
        }
    }

    /// q_n = floor(a * r^n); requires a > 0, r > 1.
    pub fn geometric(a: f64, r: f64) -> Result<Self> {
        if !(a > 0.0) || !(r > 1.0) {
            return Err(Error::Domain(
                "geometric sequence needs a > 0, r > 1".into(),
            ));
        }
        Ok(SequenceSpec {
            kind: SeqKind::Geometric { a, r },
            lacunary_k0: None,
            growth: None,
            separation: None,
        })
    }

    pub fn explicit(terms: Vec<u64>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("explicit sequence has no terms".into()));
        }
        Ok(SequenceSpec {
            kind: SeqKind::Explicit(terms),
            lacunary_k0: None,
            growth: None,
            separation: None,
        })
    }

    pub fn with_lacunary(mut self, k0: f64) -> Self {
        self.lacunary_k0 = Some(k0);
        self
    }

    pub fn with_growth(mut self, c: f64, b: f64) -> Self {
        self.growth = Some((c, b));
        self
    }

    pub fn with_separation(mut self, alpha: f64, m0: u64) -> Self {
        self.separation = Some((alpha, m0));
        self
    }

    /// The largest prefix length the generator can produce, capped.
    pub fn max_terms(&self, cap: u64) -> u64 {
        match &self.kind {
            SeqKind::PowersOfTwo => cap.min(62),
            SeqKind::Explicit(terms) => cap.min(terms.len() as u64),
            SeqKind::Geometric { .. } => {
                let mut lo = 0u64; // known producible
                let mut hi = 1u64;
                while hi <= cap && self.terms(hi).is_ok() {
                    lo = hi;
                    hi *= 2;
                }
                let mut hi = hi.min(cap + 1);
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if self.terms(mid).is_ok() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    /// The first n terms, checked strictly increasing and against every
    /// declared structural property.
    pub fn terms(&self, n: u64) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(n as usize);
        match &self.kind {
            SeqKind::PowersOfTwo => {
                if n > 62 {
                    return Err(Error::SequenceExhausted {
                        needed: n,
                        have: 62,
                    });
                }
                for i in 1..=n {
                    out.push(1u64 << i);
                }
            }
            SeqKind::Geometric { a, r } => {
                for i in 1..=n {
                    let v = (a * r.powi(i as i32)).floor();
                    if !(v >= 1.0) || v >= (1u64 << 62) as f64 {
                        return Err(Error::SequenceExhausted {
                            needed: n,
                            have: i - 1,
                        });
                    }
                    out.push(v as u64);
                }
            }
            SeqKind::Explicit(terms) => {
                if n > terms.len() as u64 {
                    return Err(Error::SequenceExhausted {
                        needed: n,
                        have: terms.len() as u64,
                    });
                }
                out.extend_from_slice(&terms[..n as usize]);
            }
        }
        for i in 1..out.len() {
            if out[i] <= out[i - 1] {
                return Err(Error::Domain(format!(
                    "sequence not strictly increasing at n = {}",
                    i + 1
                )));
            }
        }
        if let Some(k0) = self.lacunary_k0 {
            for i in 1..out.len() {
                if (out[i] as f64) < k0 * out[i - 1] as f64 {
                    return Err(Error::LacunarityViolation { n: i as u64 });
                }
            }
        }
        if let Some((c, b)) = self.growth {
            for (i, &q) in out.iter().enumerate() {
                let nn = (i + 1) as f64;
                if (q as f64).ln() <= c * nn.powf(1.0 / b) {
                    return Err(Error::GrowthViolation {
                        n: (i + 1) as u64,
                        q,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Inhomogeneous parameters: the shift gamma and the Fourier-decay pair
/// (nu, A). For Lebesgue measure nu = 1/pi is the recorded instantiation.
#[derive(Debug, Clone)]
pub struct InhomParams {
    pub gamma: UnitReal,
    pub nu: f64,
    pub decay_a: f64,
}

impl InhomParams {
    pub fn lebesgue(gamma: UnitReal, decay_a: f64) -> Result<Self> {
        if !(decay_a > 2.0) {
            return Err(Error::Domain(format!(
                "decay exponent A = {decay_a} must exceed 2"
            )));
        }
        Ok(InhomParams {
            gamma,
            nu: std::f64::consts::FRAC_1_PI,
            decay_a,
        })
    }
}

/// S(x, Q) = #{q <= Q : ||q x|| < psi(q)}.
///
/// For psi < 1/2 the nearest integer p is the unique candidate, so the pair
/// count equals this q count; q is counted once even if several p work.
pub fn count_s(x: &UnitReal, qmax: u64, psi: &ApproxFunction) -> Result<u64> {
    psi.check_coverage(qmax)?;
    let mut count = 0u64;
    for q in 1..=qmax {
        if x.scaled_dist(q).lt(psi.eval(q)) {
            count += 1;
        }
    }
    Ok(count)
}

/// S(x, Q) at each grid point, in one cumulative pass.
pub fn count_s_grid(x: &UnitReal, grid: &[u64], psi: &ApproxFunction) -> Result<Vec<u64>> {
    let qmax = *grid.last().unwrap_or(&0);
    psi.check_coverage(qmax)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut count = 0u64;
    let mut gi = 0usize;
    for q in 1..=qmax {
        if x.scaled_dist(q).lt(psi.eval(q)) {
            count += 1;
        }
        while gi < grid.len() && grid[gi] == q {
            out.push(count);
            gi += 1;
        }
    }
    Ok(out)
}

#[inline]
fn coprime_hit(x: &UnitReal, q: u64, threshold: f64) -> bool {
    let parts = x.scaled_parts(q);
    if parts.down.lt(threshold) && parts.floor.gcd(&q) == 1 {
        return true;
    }
    if let Some(up) = parts.up {
        if up.lt(threshold) && (parts.floor + 1).gcd(&q) == 1 {
            return true;
        }
    }
    false
}

/// S'(x, Q): as S but the witness p must be coprime to q. Candidates are the
/// nearest integers to q x on both sides; gcd(0, q) = q, so p = 0 only ever
/// works for q = 1.
pub fn count_s_prime(x: &UnitReal, qmax: u64, psi: &ApproxFunction) -> Result<u64> {
    psi.check_coverage(qmax)?;
    let mut count = 0u64;
    for q in 1..=qmax {
        if coprime_hit(x, q, psi.eval(q)) {
            count += 1;
        }
    }
    Ok(count)
}

pub fn count_s_prime_grid(x: &UnitReal, grid: &[u64], psi: &ApproxFunction) -> Result<Vec<u64>> {
    let qmax = *grid.last().unwrap_or(&0);
    psi.check_coverage(qmax)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut count = 0u64;
    let mut gi = 0usize;
    for q in 1..=qmax {
        if coprime_hit(x, q, psi.eval(q)) {
            count += 1;
        }
        while gi < grid.len() && grid[gi] == q {
            out.push(count);
            gi += 1;
        }
    }
    Ok(out)
}

/// S*(x, u, v): #{u < n <= v : ||n x|| < psi(n) with a witness m satisfying
/// gcd(m, n) <= Gamma(n)}.
pub fn count_s_star(
    x: &UnitReal,
    u: u64,
    v: u64,
    psi: &ApproxFunction,
    agg: &AggregateCache,
) -> Result<u64> {
    if u >= v {
        return Err(Error::Domain(format!("need u < v, got ({u}, {v})")));
    }
    psi.check_coverage(v)?;
    let mut count = 0u64;
    for n in (u + 1)..=v {
        let gamma = agg.gamma(n)?;
        let threshold = psi.eval(n);
        let parts = x.scaled_parts(n);
        let mut hit = parts.down.lt(threshold) && parts.floor.gcd(&n) as f64 <= gamma;
        if !hit {
            if let Some(up) = parts.up {
                hit = up.lt(threshold) && (parts.floor + 1).gcd(&n) as f64 <= gamma;
            }
        }
        if hit {
            count += 1;
        }
    }
    Ok(count)
}

/// R(x, N) = #{1 <= n <= N : ||q_n x - gamma|| <= psi(q_n)} (non-strict).
pub fn count_r(
    x: &UnitReal,
    n: u64,
    params: &InhomParams,
    psi: &ApproxFunction,
    seq: &SequenceSpec,
) -> Result<u64> {
    let terms = seq.terms(n)?;
    count_r_over_terms(x, &terms, &params.gamma, psi)
}

/// R over pre-generated sequence terms.
pub fn count_r_over_terms(
    x: &UnitReal,
    terms: &[u64],
    gamma: &UnitReal,
    psi: &ApproxFunction,
) -> Result<u64> {
    let mut count = 0u64;
    for &q in terms {
        psi.check_coverage(q)?;
        if x.scaled_dist_shifted(q, gamma)?.le(psi.eval(q)) {
            count += 1;
        }
    }
    Ok(count)
}

/// R at each grid point over n, one pass.
pub fn count_r_grid(
    x: &UnitReal,
    terms: &[u64],
    grid: &[u64],
    gamma: &UnitReal,
    psi: &ApproxFunction,
) -> Result<Vec<u64>> {
    let nmax = *grid.last().unwrap_or(&0);
    if nmax > terms.len() as u64 {
        return Err(Error::SequenceExhausted {
            needed: nmax,
            have: terms.len() as u64,
        });
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut count = 0u64;
    let mut gi = 0usize;
    for (i, &q) in terms[..nmax as usize].iter().enumerate() {
        psi.check_coverage(q)?;
        if x.scaled_dist_shifted(q, gamma)?.le(psi.eval(q)) {
            count += 1;
        }
        let n = (i + 1) as u64;
        while gi < grid.len() && grid[gi] == n {
            out.push(count);
            gi += 1;
        }
    }
    Ok(out)
}

/// Streams the base-b digits of the fractional part of x, using exact
/// multiply-and-carry; terminating expansions continue with zeros.
pub struct DigitStream {
    state: DigitState,
    base: u64,
}

enum DigitState {
    Fixed(u128),
    Ratio { r: u64, den: u64 },
}

impl DigitStream {
    pub fn new(x: &UnitReal, base: u64) -> Result<Self> {
        if !(2..=u32::MAX as u64).contains(&base) {
            return Err(Error::Domain(format!(
                "base {base} out of range 2..=2^32-1"
            )));
        }
        let state = match x {
            UnitReal::Fixed(f) => DigitState::Fixed(f.bits()),
            UnitReal::Ratio { num, den } => DigitState::Ratio { r: *num, den: *den },
        };
        Ok(DigitStream { state, base })
    }
}

impl Iterator for DigitStream {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        const M64: u128 = (1u128 << 64) - 1;
        match &mut self.state {
            DigitState::Fixed(bits) => {
                let hi = (*bits >> 64) * self.base as u128;
                let lo = (*bits & M64) * self.base as u128;
                let s = hi + (lo >> 64);
                let digit = (s >> 64) as u64;
                *bits = ((s & M64) << 64) | (lo & M64);
                Some(digit)
            }
            DigitState::Ratio { r, den } => {
                let prod = *r as u128 * self.base as u128;
                let digit = (prod / *den as u128) as u64;
                *r = (prod % *den as u128) as u64;
                Some(digit)
            }
        }
    }
}

/// A(d, b, N): occurrences of digit d among the first N base-b digits.
pub fn digit_count(x: &UnitReal, d: u64, base: u64, n: u64) -> Result<u64> {
    if d >= base {
        return Err(Error::Domain(format!("digit {d} not below base {base}")));
    }
    let stream = DigitStream::new(x, base)?;
    Ok(stream.take(n as usize).filter(|&a| a == d).count() as u64)
}

/// E(N): the double sum over 1 <= m < n <= N of
/// gcd(q_m, q_n) min(psi(q_m)/q_m, psi(q_n)/q_n).
pub fn gcd_sum_e(n: u64, seq: &SequenceSpec, psi: &ApproxFunction) -> Result<f64> {
    let terms = seq.terms(n)?;
    Ok(gcd_sum_e_over_terms(&terms, psi)?
        .last()
        .copied()
        .unwrap_or(0.0))
}

/// E(1), E(2), ..., E(len) as a prefix series (E(1) = 0, the empty sum).
pub fn gcd_sum_e_over_terms(terms: &[u64], psi: &ApproxFunction) -> Result<Vec<f64>> {
    let mut weights = Vec::with_capacity(terms.len());
    for &q in terms {
        psi.check_coverage(q)?;
        weights.push(psi.eval(q) / q as f64);
    }
    let mut out = Vec::with_capacity(terms.len());
    let mut sum = KahanSum::new();
    for n in 0..terms.len() {
        for m in 0..n {
            let g = terms[m].gcd(&terms[n]) as f64;
            sum.add(g * weights[m].min(weights[n]));
        }
        out.push(sum.value());
    }
    Ok(out)
}

/// One record of a per-Q counting series.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CountRow {
    pub q: u64,
    pub count: u64,
    pub main_term: f64,
    pub bound: f64,
    pub violated: bool,
}

/// A per-Q series of counts with main terms and effective bounds, emitted as
/// bit-stable CSV (`Q,count,main_term,bound,violated`, LF endings).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountSeries {
    pub rows: Vec<CountRow>,
}

impl CountSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("Q,count,main_term,bound,violated\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.q, r.count, r.main_term, r.bound, r.violated
            ));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "Q,count,main_term,bound,violated")) => {}
            _ => {
                return Err(Error::CsvParse {
                    line: 1,
                    msg: "missing series header".into(),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let mut field = |name: &str| {
                it.next().ok_or(Error::CsvParse {
                    line: i + 1,
                    msg: format!("missing field {name}"),
                })
            };
            let q = field("Q")?.parse().map_err(|e| Error::CsvParse {
                line: i + 1,
                msg: format!("Q: {e}"),
            })?;
            let count = field("count")?.parse().map_err(|e| Error::CsvParse {
                line: i + 1,
                msg: format!("count: {e}"),
            })?;
            let main_term = field("main_term")?.parse().map_err(|e| Error::CsvParse {
                line: i + 1,
                msg: format!("main_term: {e}"),
            })?;
            let bound = field("bound")?.parse().map_err(|e| Error::CsvParse {
                line: i + 1,
                msg: format!("bound: {e}"),
            })?;
            let violated = field("violated")?.parse().map_err(|e| Error::CsvParse {
                line: i + 1,
                msg: format!("violated: {e}"),
            })?;
            rows.push(CountRow {
                q,
                count,
                main_term,
                bound,
                violated,
            });
        }
        Ok(CountSeries { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::CustomPsi;

    fn psi(spec: &str) -> ApproxFunction {
        ApproxFunction::parse(spec).unwrap()
    }

    #[test]
    fn count_s_zero_point() {
        // x = 0: p = 0 solves every q
        let x = UnitReal::from_f64(0.0).unwrap();
        assert_eq!(count_s(&x, 100, &psi("inv:0.25")).unwrap(), 100);
    }

    #[test]
    fn count_s_half_parity() {
        // ||q/2|| = 0 iff q even, else 1/2 > 0.49
        let x = UnitReal::from_f64(0.5).unwrap();
        assert_eq!(count_s(&x, 10, &psi("const:0.49")).unwrap(), 5);
    }

    #[test]
    fn count_s_monotone_steps() {
        let x = UnitReal::from_f64(0.6180339887498949).unwrap();
        let f = psi("inv:0.2");
        let mut last = 0;
        for q in 1..=300 {
            let c = count_s(&x, q, &f).unwrap();
            assert!(c == last || c == last + 1);
            last = c;
        }
    }

    #[test]
    fn count_s_prime_examples() {
        // x = 1/2: only q = 2 (p = 1); even q > 2 share a factor, odd q miss
        let x = UnitReal::rational(1, 2).unwrap();
        assert_eq!(count_s_prime(&x, 10, &psi("const:0.49")).unwrap(), 1);

        // x = 0: gcd(0, q) = q, so only q = 1
        let x = UnitReal::from_f64(0.0).unwrap();
        assert_eq!(count_s_prime(&x, 10, &psi("const:0.4")).unwrap(), 1);

        // psi = 0: nothing
        assert_eq!(count_s_prime(&x, 10, &psi("const:0")).unwrap(), 0);
    }

    #[test]
    fn count_s_prime_below_count_s() {
        let f = psi("const:0.35");
        for seed in 0..20u64 {
            let x = UnitReal::from_sample_bits(seed.wrapping_mul(0x9e3779b97f4a7c15));
            let s = count_s(&x, 200, &f).unwrap();
            let sp = count_s_prime(&x, 200, &f).unwrap();
            assert!(sp <= s);
        }
    }

    #[test]
    fn count_s_star_reduces_to_count_s() {
        // psi = 1/2: Gamma(n) = (n/2)^2 + 1 >= n for every n, so the gcd
        // constraint is vacuous and the counts coincide
        let f = psi("const:0.5");
        let agg = AggregateCache::new(f.clone());
        for n in 1..=200u64 {
            assert!(agg.gamma(n).unwrap() >= n as f64);
        }
        let x = UnitReal::from_sample_bits(0x123456789abcdef0);
        assert_eq!(
            count_s_star(&x, 0, 200, &f, &agg).unwrap(),
            count_s(&x, 200, &f).unwrap()
        );
    }

    #[test]
    fn count_s_star_zero_psi() {
        let f = psi("const:0");
        let agg = AggregateCache::new(f.clone());
        let x = UnitReal::from_f64(0.25).unwrap();
        assert_eq!(count_s_star(&x, 0, 50, &f, &agg).unwrap(), 0);
    }

    #[test]
    fn count_s_star_zero_point_witness_gcd() {
        // x = 0: witness m = 0 has gcd(0, n) = n, admissible iff Gamma(n) >= n
        let f = psi("inv:0.25");
        let agg = AggregateCache::new(f.clone());
        let x = UnitReal::from_f64(0.0).unwrap();
        let got = count_s_star(&x, 0, 10, &f, &agg).unwrap();
        let mut expect = 0;
        for n in 1..=10u64 {
            let gamma = agg.gamma(n).unwrap();
            if gamma >= n as f64 {
                expect += 1;
            }
        }
        assert_eq!(got, expect);
    }

    #[test]
    fn count_r_examples() {
        let seq = SequenceSpec::powers_of_two();
        let zero = UnitReal::from_f64(0.0).unwrap();
        let params = InhomParams::lebesgue(zero, 2.5).unwrap();

        // x = 0, gamma = 0: every n hits (distance 0 <= psi)
        let f = psi("const:0.25");
        assert_eq!(count_r(&zero, 20, &params, &f, &seq).unwrap(), 20);

        // x = 1/3: ||2^n/3|| = 1/3 > 0.25 always
        let x = UnitReal::rational(1, 3).unwrap();
        let g0 = UnitReal::rational(0, 1).unwrap();
        let p = InhomParams::lebesgue(g0, 2.5).unwrap();
        assert_eq!(count_r(&x, 20, &p, &f, &seq).unwrap(), 0);

        // gamma = 1/3: hits exactly when 2^n = 1 mod 3, i.e. even n
        let g = UnitReal::rational(1, 3).unwrap();
        let p = InhomParams::lebesgue(g, 2.5).unwrap();
        let f = psi("const:0.01");
        assert_eq!(count_r(&x, 20, &p, &f, &seq).unwrap(), 10);
    }

    #[test]
    fn count_r_fractional_part_only() {
        // shifting x by an integer cannot change R since q x mod 1 is all
        // that enters; rationals reduce mod 1 at construction
        let a = UnitReal::rational(1, 3).unwrap();
        let b = UnitReal::rational(4, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn count_r_sequence_exhausted() {
        let seq = SequenceSpec::powers_of_two();
        let zero = UnitReal::from_f64(0.0).unwrap();
        let params = InhomParams::lebesgue(zero, 2.5).unwrap();
        assert!(matches!(
            count_r(&zero, 100, &params, &psi("const:0.25"), &seq),
            Err(Error::SequenceExhausted { .. })
        ));
    }

    #[test]
    fn digit_counts_third_in_binary() {
        // 1/3 = 0.010101... in base 2
        let x = UnitReal::rational(1, 3).unwrap();
        assert_eq!(digit_count(&x, 0, 2, 10).unwrap(), 5);
        assert_eq!(digit_count(&x, 1, 2, 10).unwrap(), 5);
        assert_eq!(digit_count(&x, 1, 2, 9).unwrap(), 4);
    }

    #[test]
    fn digit_counts_zero_point() {
        let x = UnitReal::from_f64(0.0).unwrap();
        for b in [2u64, 7, 10] {
            assert_eq!(digit_count(&x, 0, b, 50).unwrap(), 50);
        }
    }

    #[test]
    fn digit_counts_sum_to_n() {
        for seed in 1..=20u64 {
            let x = UnitReal::from_sample_bits(seed.wrapping_mul(0x2545f4914f6cdd1d));
            for b in [2u64, 3, 10] {
                let total: u64 = (0..b).map(|d| digit_count(&x, d, b, 64).unwrap()).sum();
                assert_eq!(total, 64);
            }
        }
    }

    #[test]
    fn digit_stream_matches_long_division_fixed_vs_ratio() {
        // 5/7 in base 10 both as a rational and as the nearest dyadic
        let exact = UnitReal::rational(5, 7).unwrap();
        let dy = UnitReal::from_f64(5.0 / 7.0).unwrap();
        let de: Vec<u64> = DigitStream::new(&exact, 10).unwrap().take(12).collect();
        let dd: Vec<u64> = DigitStream::new(&dy, 10).unwrap().take(12).collect();
        assert_eq!(de, dd); // f64(5/7) agrees with 5/7 to ~16 digits
        assert_eq!(&de[..6], &[7, 1, 4, 2, 8, 5]);
    }

    #[test]
    fn gcd_sum_examples() {
        // N = 2, q = (2, 4), psi = 1: gcd(2,4) min(1/2, 1/4) = 0.5
        let seq = SequenceSpec::explicit(vec![2, 4]).unwrap();
        let one = psi("const:1");
        assert!((gcd_sum_e(2, &seq, &one).unwrap() - 0.5).abs() < 1e-15);

        // N = 1: empty sum
        assert_eq!(gcd_sum_e(1, &seq, &one).unwrap(), 0.0);

        // pairwise coprime: collapses to sum of min(1/q_m, 1/q_n)
        let co = SequenceSpec::explicit(vec![3, 7, 31, 211]).unwrap();
        let e = gcd_sum_e(4, &co, &one).unwrap();
        let terms = [3u64, 7, 31, 211];
        let mut expect = 0.0;
        for n in 0..4 {
            for m in 0..n {
                expect += (1.0 / terms[m] as f64).min(1.0 / terms[n] as f64);
            }
        }
        assert!((e - expect).abs() < 1e-15);
    }

    #[test]
    fn sequence_validation() {
        let seq = SequenceSpec::powers_of_two();
        assert_eq!(seq.terms(5).unwrap(), vec![2, 4, 8, 16, 32]);
        // powers of two are lacunary with K0 = 2 and satisfy log q_n > 0.5 n
        assert!(seq.terms(62).is_ok());
        assert!(seq.terms(63).is_err());

        let bad = SequenceSpec::explicit(vec![2, 4, 4]).unwrap();
        assert!(bad.terms(3).is_err());

        let not_lac = SequenceSpec::explicit(vec![2, 3, 4])
            .unwrap()
            .with_lacunary(2.0);
        assert!(matches!(
            not_lac.terms(3),
            Err(Error::LacunarityViolation { .. })
        ));

        let slow = SequenceSpec::explicit(vec![2, 3, 4])
            .unwrap()
            .with_growth(2.0, 1.0);
        assert!(matches!(slow.terms(3), Err(Error::GrowthViolation { .. })));
    }

    #[test]
    fn geometric_sequence_generation() {
        let seq = SequenceSpec::geometric(1.5, 3.0).unwrap();
        assert_eq!(seq.terms(4).unwrap(), vec![4, 13, 40, 121]);
        // floor(1.5 * 3^n) is lacunary with ratio just under 3
        let seq = seq.with_lacunary(2.9).with_growth(1.0, 1.0);
        assert!(seq.terms(20).is_ok());
        let cap = seq.max_terms(1000);
        assert!(seq.terms(cap).is_ok());
        assert!(seq.terms(cap + 1).is_err());
    }

    #[test]
    fn grid_counts_match_pointwise() {
        let x = UnitReal::from_sample_bits(0xdeadbeefcafef00d);
        let f = psi("capinv:0.4,1");
        let grid = [1u64, 3, 10, 50, 200];
        let got = count_s_grid(&x, &grid, &f).unwrap();
        for (i, &q) in grid.iter().enumerate() {
            assert_eq!(got[i], count_s(&x, q, &f).unwrap());
        }
        let got = count_s_prime_grid(&x, &grid, &f).unwrap();
        for (i, &q) in grid.iter().enumerate() {
            assert_eq!(got[i], count_s_prime(&x, q, &f).unwrap());
        }
    }

    #[test]
    fn series_csv_round_trip() {
        let series = CountSeries {
            rows: vec![
                CountRow {
                    q: 10,
                    count: 5,
                    main_term: 4.2,
                    bound: f64::INFINITY,
                    violated: false,
                },
                CountRow {
                    q: 100,
                    count: 48,
                    main_term: 42.0,
                    bound: 1e6,
                    violated: false,
                },
            ],
        };
        let text = series.to_csv();
        let back = CountSeries::from_csv(&text).unwrap();
        assert_eq!(back, series);
        assert_eq!(back.to_csv(), text);
        assert!(text.starts_with("Q,count,main_term,bound,violated\n"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn prime_supported_table_matches_exact_rational_oracle() {
        // psi supported only on primes, supplied as a table; counts must
        // match a fully exact rational oracle over all pairs up to Q = 300
        use num_bigint::BigInt;
        use num_rational::BigRational;
        let qmax = 300u64;
        let dir = std::env::temp_dir().join("effdio-prime-table");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("primes.csv");
        let is_prime = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        let mut text = String::from("q,psi\n");
        for q in 1..=qmax {
            text.push_str(&format!("{q},{}\n", if is_prime(q) { 0.45 } else { 0.0 }));
        }
        std::fs::write(&path, text).unwrap();
        let psi = ApproxFunction::parse(&format!("table:{}", path.display())).unwrap();

        for (a, b) in [(89u64, 233u64), (1, 7), (144, 233), (0, 1)] {
            let x = UnitReal::rational(a, b).unwrap();
            let mut s_oracle = 0u64;
            let mut sp_oracle = 0u64;
            for q in 1..=qmax {
                let t = BigRational::from_float(psi.eval(q)).unwrap();
                let mut any = false;
                let mut any_coprime = false;
                for p in 0..=q {
                    // |a/b - p/q| < psi/q  <=>  |a q - p b| / b < psi
                    let diff = (a * q).abs_diff(p * b);
                    let lhs = BigRational::new(BigInt::from(diff), BigInt::from(b));
                    if lhs < t {
                        any = true;
                        if p.gcd(&q) == 1 {
                            any_coprime = true;
                        }
                    }
                }
                s_oracle += any as u64;
                sp_oracle += any_coprime as u64;
                assert_eq!(
                    count_s(&x, q, &psi).unwrap(),
                    s_oracle,
                    "S at ({a}/{b}, {q})"
                );
                assert_eq!(
                    count_s_prime(&x, q, &psi).unwrap(),
                    sp_oracle,
                    "S' at ({a}/{b}, {q})"
                );
            }
        }
    }

    #[test]
    fn custom_psi_drives_counting() {
        let f = ApproxFunction::custom(CustomPsi {
            eval: Box::new(|q| 0.5 / (q + 1) as f64),
            sup: 0.25,
            positive: true,
            non_increasing: true,
            divergent: true,
        })
        .unwrap();
        let x = UnitReal::from_f64(0.0).unwrap();
        assert_eq!(count_s(&x, 10, &f).unwrap(), 10);
    }
}
