//! Exact integer arithmetic primitives: totient sieves, restricted
//! totients/divisors, nearest-integer distances on fixed-point or rational
//! points, and a real-argument zeta evaluator with a certified tail bound.

use crate::error::{Error, Result};
use num_integer::Integer;

/// Largest sieve limit accepted; beyond this a segmented sieve would be
/// needed and desk-scale runs never get close.
pub const MAX_SIEVE_LIMIT: u64 = 100_000_000;

/// Exact Euler totients for every q up to a limit.
///
/// Built once by a linear sieve, then immutable; safe to share across threads.
pub struct PhiTable {
    limit: u64,
    values: Vec<u32>,
}

impl PhiTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// phi(q) for 1 <= q <= limit.
    #[inline]
    pub fn phi(&self, q: u64) -> Result<u64> {
        if q == 0 || q > self.limit {
            return Err(Error::SieveLimitExceeded {
                q,
                limit: self.limit,
            });
        }
        Ok(self.values[q as usize] as u64)
    }

    /// Unchecked access for hot loops; `q` must be in 1..=limit.
    #[inline]
    pub fn phi_unchecked(&self, q: u64) -> u64 {
        self.values[q as usize] as u64
    }
}

/// Linear-time totient sieve.
pub fn euler_phi_sieve(limit: u64) -> Result<PhiTable> {
    if limit == 0 {
        return Err(Error::ZeroSieveLimit);
    }
    if limit > MAX_SIEVE_LIMIT {
        return Err(Error::SieveLimitTooLarge {
            limit,
            max: MAX_SIEVE_LIMIT,
        });
    }
    let n = limit as usize;
    let mut phi = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    phi[0] = 0;
    if n >= 1 {
        phi[1] = 1;
    }
    for i in 2..=n {
        if phi[i] == 0 {
            primes.push(i as u32);
            phi[i] = (i - 1) as u32;
        }
        for &p in &primes {
            let ip = i * p as usize;
            if ip > n {
                break;
            }
            if i % p as usize == 0 {
                phi[ip] = phi[i] * p;
                break;
            }
            phi[ip] = phi[i] * (p - 1);
        }
    }
    Ok(PhiTable { limit, values: phi })
}

/// Prime factorization by trial division; fine for n up to ~10^12 here.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut a = 0;
            while n.is_multiple_of(p) {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All divisors of n paired with their totients, sorted by divisor.
pub fn divisors_with_phi(n: u64) -> Vec<(u64, u64)> {
    let mut out = vec![(1u64, 1u64)];
    for (p, a) in factorize(n) {
        let base = out.clone();
        let mut pk = 1u64;
        let mut phi_pk = 1u64;
        for j in 1..=a {
            pk *= p;
            phi_pk = if j == 1 { p - 1 } else { phi_pk * p };
            for &(d, ph) in &base {
                out.push((d * pk, ph * phi_pk));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Restricted totient phi(k, n) = #{1 <= m <= n : gcd(m, n) <= k}.
///
/// Uses the identity phi(k, n) = sum over divisors d <= k of phi(n/d),
/// since gcd(m, n) = d partitions 1..=n into classes of size phi(n/d).
pub fn restricted_totient(k: u64, n: u64) -> Result<u64> {
    if k == 0 || n == 0 {
        return Err(Error::Domain(
            "restricted_totient needs k >= 1, n >= 1".into(),
        ));
    }
    if k >= n {
        return Ok(n);
    }
    let divs = divisors_with_phi(n);
    let mut total = 0u64;
    for &(d, _) in &divs {
        if d > k {
            break;
        }
        let co = n / d;
        let idx = divs
            .binary_search_by_key(&co, |&(dd, _)| dd)
            .expect("complement of a divisor is a divisor");
        total += divs[idx].1;
    }
    Ok(total)
}

/// One row of restricted totients: out[n] = phi(k, n) for 1 <= n <= nmax,
/// with out[0] unused. Used by the lemma sweeps where every n is needed.
pub fn restricted_totient_row(k: u64, nmax: u64, phi: &PhiTable) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::Domain("restricted_totient needs k >= 1".into()));
    }
    if nmax > phi.limit() {
        return Err(Error::SieveLimitExceeded {
            q: nmax,
            limit: phi.limit(),
        });
    }
    let n = nmax as usize;
    let mut out: Vec<u64> = (0..=n as u64).collect();
    let mut d = k + 1;
    while d <= nmax {
        let mut m = d;
        while m <= nmax {
            out[m as usize] -= phi.phi_unchecked(m / d);
            m += d;
        }
        d += 1;
    }
    Ok(out)
}

/// d*(n) restricted to a real bound: #{d | n : d <= bound}.
pub fn restricted_divisor_count(n: u64, bound: f64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain(
            "restricted_divisor_count needs n >= 1".into(),
        ));
    }
    let mut count = 0u64;
    let mut i = 1u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            if (i as f64) <= bound {
                count += 1;
            }
            let j = n / i;
            if j != i && (j as f64) <= bound {
                count += 1;
            }
        }
        i += 1;
    }
    Ok(count)
}

// ---------------------------------------------------------------------------
// Fixed-point and rational points of [0, 1)
// ---------------------------------------------------------------------------

const M64: u128 = (1u128 << 64) - 1;

/// A point of [0, 1) held as a 128-bit binary fraction (value = bits / 2^128).
///
/// Scaling by an integer q <= 2^63 and reducing mod 1 is exact on the stored
/// value; sampled points carry 64 fractional bits of resolution, so the only
/// representation error is the initial quantization (< 2^-64), comfortably
/// below the q * 2^-128 + 2^-64 budget documented for the type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPointFraction {
    bits: u128,
}

impl FixedPointFraction {
    pub fn from_bits(bits: u128) -> Self {
        Self { bits }
    }

    /// Sampled points: a uniform u64 becomes a / 2^64.
    pub fn from_u64_resolution(a: u64) -> Self {
        Self {
            bits: (a as u128) << 64,
        }
    }

    /// Exact for every f64 in [0, 1) with magnitude >= 2^-75; smaller values
    /// are truncated to the 128-bit grid.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!("point {x} outside [0,1)")));
        }
        if x == 0.0 {
            return Ok(Self { bits: 0 });
        }
        let (m, e) = decompose_f64(x);
        let s = e + 128;
        let bits = if s >= 0 {
            (m as u128) << s
        } else {
            (m as u128) >> ((-s).min(127))
        };
        Ok(Self { bits })
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn to_f64(&self) -> f64 {
        self.bits as f64 / 2f64.powi(128)
    }

    /// q * x split into integer part and the exact 128-bit fractional part.
    #[inline]
    pub fn scale(&self, q: u64) -> (u64, u128) {
        let hi = (self.bits >> 64) * q as u128;
        let lo = (self.bits & M64) * q as u128;
        let s = hi + (lo >> 64);
        let int_part = (s >> 64) as u64;
        let frac = ((s & M64) << 64) | (lo & M64);
        (int_part, frac)
    }
}

/// A point of [0, 1): either a sampled/dyadic fixed-point value or an exact
/// rational a/b kept in integer arithmetic for oracle tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitReal {
    Fixed(FixedPointFraction),
    Ratio { num: u64, den: u64 },
}

impl UnitReal {
    pub fn from_f64(x: f64) -> Result<Self> {
        Ok(UnitReal::Fixed(FixedPointFraction::from_f64(x)?))
    }

    pub fn from_sample_bits(a: u64) -> Self {
        UnitReal::Fixed(FixedPointFraction::from_u64_resolution(a))
    }

    /// Exact rational a/b reduced mod 1.
    pub fn rational(a: u64, b: u64) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidRational("zero denominator".into()));
        }
        let a = a % b;
        let g = a.gcd(&b);
        let (num, den) = if a == 0 { (0, 1) } else { (a / g, b / g) };
        Ok(UnitReal::Ratio { num, den })
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            UnitReal::Fixed(f) => f.to_f64(),
            UnitReal::Ratio { num, den } => *num as f64 / *den as f64,
        }
    }

    /// ||q x||: exact distance from q x to the nearest integer.
    #[inline]
    pub fn scaled_dist(&self, q: u64) -> Dist {
        match self {
            UnitReal::Fixed(f) => {
                let (_, frac) = f.scale(q);
                Dist::Dyadic {
                    num: frac.min(frac.wrapping_neg()),
                }
            }
            UnitReal::Ratio { num, den } => {
                let r = ((q as u128 % *den as u128) * (*num as u128) % *den as u128) as u64;
                Dist::Ratio {
                    num: r.min(den - r),
                    den: *den,
                }
            }
        }
    }

    /// ||q x - gamma||, same-kind operands only.
    pub fn scaled_dist_shifted(&self, q: u64, gamma: &UnitReal) -> Result<Dist> {
        match (self, gamma) {
            (UnitReal::Fixed(f), UnitReal::Fixed(g)) => {
                let (_, frac) = f.scale(q);
                let d = frac.wrapping_sub(g.bits);
                Ok(Dist::Dyadic {
                    num: d.min(d.wrapping_neg()),
                })
            }
            (UnitReal::Ratio { num: a, den: b }, UnitReal::Ratio { num: c, den: d }) => {
                let m = (*b as u128)
                    .checked_mul(*d as u128)
                    .filter(|&m| m <= 1u128 << 63)
                    .ok_or(Error::RationalOverflow {
                        den: *b as u128 * *d as u128,
                    })?;
                let qa = (q as u128 % m) * (*a as u128 * *d as u128 % m) % m;
                let cb = *c as u128 * *b as u128 % m;
                let r = ((qa + m - cb) % m) as u64;
                let m = m as u64;
                Ok(Dist::Ratio {
                    num: r.min(m - r),
                    den: m,
                })
            }
            _ => Err(Error::MixedOperands),
        }
    }

    /// floor(q x) together with the exact distances to floor and floor + 1.
    /// The upward distance is None when it equals exactly 1 (never a witness
    /// for any psi <= 1 under a strict comparison).
    #[inline]
    pub fn scaled_parts(&self, q: u64) -> ScaledParts {
        match self {
            UnitReal::Fixed(f) => {
                let (int_part, frac) = f.scale(q);
                ScaledParts {
                    floor: int_part,
                    down: Dist::Dyadic { num: frac },
                    up: if frac == 0 {
                        None
                    } else {
                        Some(Dist::Dyadic {
                            num: frac.wrapping_neg(),
                        })
                    },
                }
            }
            UnitReal::Ratio { num, den } => {
                let prod = q as u128 * *num as u128;
                let floor = (prod / *den as u128) as u64;
                let r = (prod % *den as u128) as u64;
                ScaledParts {
                    floor,
                    down: Dist::Ratio { num: r, den: *den },
                    up: if r == 0 {
                        None
                    } else {
                        Some(Dist::Ratio {
                            num: *den - r,
                            den: *den,
                        })
                    },
                }
            }
        }
    }
}

/// floor(q x) plus the two candidate distances |q x - floor| and
/// |q x - (floor + 1)|.
pub struct ScaledParts {
    pub floor: u64,
    pub down: Dist,
    pub up: Option<Dist>,
}

/// A nonnegative fraction (of value at most 1) compared exactly against f64
/// thresholds, so counting never depends on rounding luck.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    /// num / 2^128
    Dyadic { num: u128 },
    /// num / den
    Ratio { num: u64, den: u64 },
}

impl Dist {
    #[inline]
    pub fn lt(&self, t: f64) -> bool {
        match self {
            Dist::Dyadic { num } => frac128_cmp(*num, t, false),
            Dist::Ratio { num, den } => ratio_cmp(*num, *den, t, false),
        }
    }

    #[inline]
    pub fn le(&self, t: f64) -> bool {
        match self {
            Dist::Dyadic { num } => frac128_cmp(*num, t, true),
            Dist::Ratio { num, den } => ratio_cmp(*num, *den, t, true),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Dist::Dyadic { num } => *num == 0,
            Dist::Ratio { num, .. } => *num == 0,
        }
    }

    /// Exactly 1/2: the equidistant case.
    pub fn is_half(&self) -> bool {
        match self {
            Dist::Dyadic { num } => *num == 1u128 << 127,
            Dist::Ratio { num, den } => 2 * *num == *den,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Dist::Dyadic { num } => *num as f64 / 2f64.powi(128),
            Dist::Ratio { num, den } => *num as f64 / *den as f64,
        }
    }
}

#[inline]
fn decompose_f64(t: f64) -> (u64, i32) {
    let bits = t.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    }
}

/// num / 2^128 < t (or <= when `eq`), exact.
#[inline]
fn frac128_cmp(num: u128, t: f64, eq: bool) -> bool {
    if t.is_nan() || t <= 0.0 {
        return eq && t == 0.0 && num == 0;
    }
    if t >= 1.0 {
        return true; // num / 2^128 < 1 <= t
    }
    let (m, e) = decompose_f64(t);
    let s = e + 128;
    if s >= 0 {
        let s = s as u32;
        if s >= 128 || (s > 0 && (m as u128) >> (128 - s) != 0) {
            return true;
        }
        let rhs = (m as u128) << s;
        if eq {
            num <= rhs
        } else {
            num < rhs
        }
    } else {
        let sh = (-s) as u32;
        if sh >= 64 {
            // t < 2^-11; rhs has value m / 2^sh with m < 2^53
            return num == 0 && (eq || m != 0);
        }
        let q = m >> sh;
        let r = m & ((1u64 << sh) - 1);
        match num.cmp(&(q as u128)) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => {
                if r > 0 {
                    true
                } else {
                    eq
                }
            }
        }
    }
}

/// num / den < t (or <= when `eq`), exact. Requires den >= 1.
#[inline]
fn ratio_cmp(num: u64, den: u64, t: f64, eq: bool) -> bool {
    if t.is_nan() || t <= 0.0 {
        return eq && t == 0.0 && num == 0;
    }
    if t.is_infinite() {
        return true;
    }
    let (m, e) = decompose_f64(t);
    // compare num * 2^max(0,-e) against m * den * 2^max(0,e)
    let lhs = num as u128;
    let md = m as u128 * den as u128; // <= 2^117
    if e >= 0 {
        let e = e as u32;
        if e >= 128 || (e > 0 && md >> (128 - e) != 0) {
            return true;
        }
        let rhs = md << e;
        if eq {
            lhs <= rhs
        } else {
            lhs < rhs
        }
    } else {
        let sh = (-e) as u32;
        if lhs == 0 {
            return true;
        }
        if sh >= 128 || lhs >> (128 - sh) != 0 {
            return false;
        }
        let l = lhs << sh;
        if eq {
            l <= md
        } else {
            l < md
        }
    }
}

// ---------------------------------------------------------------------------
// Riemann zeta for real s > 1
// ---------------------------------------------------------------------------

/// Smallest accepted argument; the pole at 1 makes the direct method useless
/// below this.
pub const ZETA_MARGIN: f64 = 1.01;
const ZETA_TERM_CAP: u64 = 100_000_000;

/// zeta(s) by direct summation with an integral tail bound.
///
/// After the partial sum to n0, the tail sum lies between the integrals from
/// n0+1 and n0, so adding the n0 integral leaves an error below the first
/// omitted term n0^-s, which is pushed under `tol` by the choice of n0.
pub fn zeta(s: f64, tol: f64) -> Result<f64> {
    if !(s > ZETA_MARGIN) {
        return Err(Error::ZetaNearPole {
            s,
            margin: ZETA_MARGIN,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("zeta tolerance must be positive".into()));
    }
    let required = tol.powf(-1.0 / s).ceil();
    if required > ZETA_TERM_CAP as f64 {
        return Err(Error::ZetaTolUnreachable {
            s,
            tol,
            required,
            cap: ZETA_TERM_CAP,
        });
    }
    let n0 = (required as u64).max(10);
    let mut sum = crate::util::KahanSum::new();
    for n in 1..=n0 {
        sum.add((n as f64).powf(-s));
    }
    let tail = (n0 as f64).powf(1.0 - s) / (s - 1.0);
    Ok(sum.value() + tail)
}
