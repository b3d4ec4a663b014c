//! Number theory and finite-field arithmetic.
//!
//! Everything here works on machine integers with `u128` intermediates, which
//! is plenty for the moduli the constructions produce (well below 2^32).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Prime factorization `n = p_1^{m_1} ... p_s^{m_s}` with `p_1 < ... < p_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Smallest prime divisor; `None` for `n = 1`.
    pub fn least_prime(&self) -> Option<u64> {
        self.factors.first().map(|&(p, _)| p)
    }

    /// The coprime prime-power components `p_i^{m_i}`.
    pub fn prime_powers(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, e)| p.pow(e)).collect()
    }

    pub fn is_prime_power(&self) -> bool {
        self.factors.len() == 1
    }
}

/// Factorizes `n >= 1` by trial division.
///
/// # Panics
/// If `n == 0`.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "cannot factorize zero");
    let mut factors = Vec::new();
    let mut rest = n;
    let mut d = 2u64;
    while d * d <= rest {
        if rest.is_multiple_of(d) {
            let mut e = 0;
            while rest.is_multiple_of(d) {
                rest /= d;
                e += 1;
            }
            factors.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Factorization { n, factors }
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .factors
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Solves `x ≡ r_i (mod m_i)` for pairwise coprime moduli, returning the
/// unique solution in `[0, ∏ m_i)`.
pub fn crt_solve(residues: &[(u64, u64)]) -> Result<u64> {
    for (i, &(_, mi)) in residues.iter().enumerate() {
        if mi == 0 {
            return Err(invalid("CRT modulus must be positive"));
        }
        for &(_, mj) in &residues[i + 1..] {
            if gcd(mi, mj) != 1 {
                return Err(invalid(format!(
                    "CRT moduli {mi} and {mj} are not coprime"
                )));
            }
        }
    }
    let mut x = 0u128;
    let mut modulus = 1u128;
    for &(r, m) in residues {
        let m128 = m as u128;
        let r = r as u128 % m128;
        // x + modulus * k ≡ r (mod m)
        let inv = mod_inverse((modulus % m128) as u64, m)
            .expect("coprimality checked above") as u128;
        let diff = (r + m128 - x % m128) % m128;
        let k = diff * inv % m128;
        x += modulus * k;
        modulus *= m128;
        if modulus > u64::MAX as u128 {
            return Err(invalid("CRT modulus product overflows u64"));
        }
    }
    Ok(x as u64)
}

/// Smallest `d >= 1` with `x^d ≡ 1 (mod n)`.
pub fn multiplicative_order(x: u64, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(invalid("modulus must be positive"));
    }
    if gcd(x % n, n) != 1 {
        return Err(invalid(format!("{x} is not a unit modulo {n}")));
    }
    if n == 1 {
        return Ok(1);
    }
    let mut d = euler_phi(n);
    for q in factorize(d).primes().collect::<Vec<_>>() {
        while d.is_multiple_of(q) && pow_mod(x, d / q, n) == 1 {
            d /= q;
        }
    }
    Ok(d)
}

/// Smallest primitive root modulo an odd or even prime `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    if p == 2 {
        return Ok(1);
    }
    let phi = p - 1;
    let qs: Vec<u64> = factorize(phi).primes().collect();
    (2..p)
        .find(|&g| qs.iter().all(|&q| pow_mod(g, phi / q, p) != 1))
        .ok_or_else(|| invalid(format!("no primitive root modulo {p}")))
}

/// Smallest `g` that is a primitive root modulo `p` and `p^2`, hence modulo
/// every power `p^t`.
pub fn primitive_root_prime_power_stable(p: u64) -> Result<u64> {
    if p == 2 || !is_prime(p) {
        return Err(invalid(format!("{p} is not an odd prime")));
    }
    let p2 = p * p;
    let phi2 = p * (p - 1);
    (2..p2)
        .filter(|g| g % p != 0)
        .find(|&g| {
            multiplicative_order(g, p) == Ok(p - 1) && multiplicative_order(g, p2) == Ok(phi2)
        })
        .ok_or_else(|| invalid(format!("no stable primitive root for {p}")))
}

/// Element of `GF(p^m)` packed as `Σ c_i p^i` over its coefficient vector in
/// the power basis `1, α, ..., α^{m-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);
}

/// Largest field order accepted by [`build_field`].
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

/// `GF(p^m)` presented by a primitive polynomial with exp/log tables.
#[derive(Debug, Clone)]
pub struct FieldTable {
    p: u32,
    m: u32,
    order: u32,
    /// Monic modulus, constant term first, length `m + 1`.
    modulus: Vec<u32>,
    exp: Vec<FieldElement>,
    log: Vec<u32>,
}

impl FieldTable {
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// `p^m`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// `α^i`, with the exponent reduced modulo `p^m - 1`.
    pub fn exp(&self, i: u64) -> FieldElement {
        self.exp[(i % (self.order as u64 - 1)) as usize]
    }

    /// Discrete log base `α`; `None` for zero.
    pub fn log(&self, x: FieldElement) -> Option<u32> {
        match self.log[x.0 as usize] {
            u32::MAX => None,
            l => Some(l),
        }
    }

    pub fn coefficients(&self, x: FieldElement) -> Vec<u32> {
        let mut v = x.0;
        (0..self.m)
            .map(|_| {
                let c = v % self.p;
                v /= self.p;
                c
            })
            .collect()
    }

    pub fn from_coefficients(&self, coeffs: &[u32]) -> Result<FieldElement> {
        if coeffs.len() != self.m as usize {
            return Err(invalid(format!(
                "expected {} coefficients, got {}",
                self.m,
                coeffs.len()
            )));
        }
        let mut v = 0u32;
        for &c in coeffs.iter().rev() {
            if c >= self.p {
                return Err(invalid(format!("coefficient {c} not in GF({})", self.p)));
            }
            v = v * self.p + c;
        }
        Ok(FieldElement(v))
    }

    pub fn add(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        let (mut a, mut b) = (x.0, y.0);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.m {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        FieldElement(out)
    }

    pub fn neg(&self, x: FieldElement) -> FieldElement {
        let mut a = x.0;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.m {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        FieldElement(out)
    }

    pub fn sub(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        match (self.log(x), self.log(y)) {
            (Some(a), Some(b)) => self.exp(a as u64 + b as u64),
            _ => FieldElement::ZERO,
        }
    }

    /// The prime-field element `c·1`.
    pub fn scalar(&self, c: u32) -> FieldElement {
        FieldElement(c % self.p)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.order).map(FieldElement)
    }
}

/// Builds `GF(p^m)` from the smallest monic primitive polynomial.
///
/// Candidates `x^m + c_{m-1}x^{m-1} + ... + c_0` are scanned in increasing
/// order of `Σ c_i p^i`, i.e. lexicographically from the highest non-leading
/// coefficient down; the modulus is stored constant term first.
pub fn build_field(p: u32, m: u32) -> Result<FieldTable> {
    if !is_prime(p as u64) {
        return Err(invalid(format!("{p} is not prime")));
    }
    if m == 0 {
        return Err(invalid("extension degree must be at least 1"));
    }
    let order = (p as u64)
        .checked_pow(m)
        .filter(|&q| q <= MAX_FIELD_ORDER)
        .ok_or_else(|| invalid(format!("GF({p}^{m}) is larger than supported")))?;
    let order = order as u32;
    let (pu, mu) = (p as u64, m as usize);
    for packed in 1..order {
        let mut low = Vec::with_capacity(mu);
        let mut v = packed;
        for _ in 0..m {
            low.push(v % p);
            v /= p;
        }
        if low[0] == 0 {
            continue;
        }
        if let Some(exp) = powers_of_x(&low, pu, order) {
            let mut log = vec![u32::MAX; order as usize];
            for (i, e) in exp.iter().enumerate() {
                log[e.0 as usize] = i as u32;
            }
            let mut modulus = low;
            modulus.push(1);
            return Ok(FieldTable {
                p,
                m,
                order,
                modulus,
                exp,
                log,
            });
        }
    }
    Err(invalid(format!("no primitive polynomial of degree {m} over GF({p})")))
}

/// Powers `x^0, ..., x^{p^m-2}` modulo the monic polynomial with lower
/// coefficients `low`, or `None` if `x` does not have order `p^m - 1`.
fn powers_of_x(low: &[u32], p: u64, order: u32) -> Option<Vec<FieldElement>> {
    let m = low.len();
    let target = order as usize - 1;
    let mut cur = vec![0u64; m];
    cur[0] = 1;
    let mut out = Vec::with_capacity(target);
    for k in 0..target {
        if k > 0 && cur[0] == 1 && cur[1..].iter().all(|&c| c == 0) {
            return None;
        }
        out.push(pack(&cur, p));
        // multiply by x: shift up, reduce x^m = -Σ c_i x^i
        let top = cur[m - 1];
        for i in (1..m).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        for i in 0..m {
            cur[i] = (cur[i] + (p - low[i] as u64) * top) % p;
        }
    }
    let back_to_one = cur[0] == 1 && cur[1..].iter().all(|&c| c == 0);
    back_to_one.then_some(out)
}

fn pack(coeffs: &[u64], p: u64) -> FieldElement {
    FieldElement(coeffs.iter().rev().fold(0u64, |acc, &c| acc * p + c) as u32)
}

/// Additive map `GF(p^m) → GF(p^u)` sending
/// `a_0 + a_1α + ... + a_{m-1}α^{m-1}` to `a_0 + a_1β + ... + a_{u-1}β^{u-1}`.
#[derive(Debug, Clone, Copy)]
pub struct SigmaMap<'a> {
    source: &'a FieldTable,
    target: &'a FieldTable,
}

impl<'a> SigmaMap<'a> {
    pub fn new(source: &'a FieldTable, target: &'a FieldTable) -> Result<Self> {
        if source.p != target.p {
            return Err(invalid("fields have different characteristics"));
        }
        if target.m > source.m {
            return Err(invalid(format!(
                "target degree {} exceeds source degree {}",
                target.m, source.m
            )));
        }
        Ok(SigmaMap { source, target })
    }

    pub fn source(&self) -> &FieldTable {
        self.source
    }

    pub fn target(&self) -> &FieldTable {
        self.target
    }

    pub fn apply(&self, x: FieldElement) -> Result<FieldElement> {
        if x.0 >= self.source.order {
            return Err(invalid(format!(
                "{} is not an element of GF({}^{})",
                x.0, self.source.p, self.source.m
            )));
        }
        // packed form is little-endian in the basis, so truncation is a remainder
        Ok(FieldElement(x.0 % self.target.order))
    }

    /// `|N_y|` for every `y` in the target, by full enumeration.
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.target.order as usize];
        for x in self.source.elements() {
            sizes[(x.0 % self.target.order) as usize] += 1;
        }
        sizes
    }
}
