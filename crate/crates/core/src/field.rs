//! The finite field F_q, q = p^f with p an odd prime.
//!
//! Elements are indices 0..q encoding coefficient vectors of F_p[x]/(m):
//! index = sum of c_i * p^i with c_0 the constant coefficient. All arithmetic
//! is table driven so downstream group enumeration stays cheap. The modulus
//! is the monic irreducible of degree f whose non-leading coefficient vector
//! has the smallest index in this encoding (for f = 1 the modulus is x).

use crate::error::{Error, Result};

pub type FqEl = u16;

#[derive(Debug, Clone)]
pub struct Fq {
    pub p: u32,
    pub f: u32,
    pub q: u32,
    /// Monic modulus, lowest-degree coefficient first, length f+1.
    pub modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    /// Trace to F_p, stored as a residue in 0..p.
    trace_p: Vec<u16>,
    /// Discrete log base `generator`; dlog[0] is unused.
    dlog: Vec<u32>,
    pub generator: FqEl,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Dense polynomial arithmetic over F_p used only while constructing the
/// field tables; vectors are lowest-degree-first and kept trimmed.
mod poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u32; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(&mut out);
        out
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r: Vec<u32> = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = mod_inv(m[dm], p);
        while r.len() > dm {
            let dr = r.len() - 1;
            let c = (r[dr] * lead_inv) % p;
            for i in 0..=dm {
                let idx = dr - dm + i;
                r[idx] = (r[idx] + p - (c * m[i]) % p) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out = vec![0u32; n];
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            out[i] = (x + p - y) % p;
        }
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    pub fn mod_inv(a: u32, p: u32) -> u32 {
        // p is prime and a != 0 mod p.
        let mut r = 1u64;
        let mut base = (a % p) as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        r as u32
    }

    /// x^(p^k) mod m, by repeated p-th powering.
    pub fn x_pow_p_iter(m: &[u32], p: u32, k: u32) -> Vec<u32> {
        let mut cur = vec![0u32, 1]; // x
        for _ in 0..k {
            cur = pow_mod(&cur, p as u64, m, p);
        }
        cur
    }

    pub fn pow_mod(a: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut base = rem(a, m, p);
        let mut acc = vec![1u32];
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &base, p), m, p);
            }
            base = rem(&mul(&base, &base, p), m, p);
            e >>= 1;
        }
        acc
    }
}

fn is_irreducible(m: &[u32], p: u32, f: u32) -> bool {
    // Degree-f m is irreducible iff x^(p^f) = x mod m and, for every prime
    // l dividing f, gcd(x^(p^(f/l)) - x, m) = 1.
    let x = vec![0u32, 1];
    let xqf = poly::x_pow_p_iter(m, p, f);
    if poly::sub(&xqf, &x, p) != Vec::<u32>::new() {
        return false;
    }
    let mut n = f;
    let mut l = 2;
    let mut prime_divs = vec![];
    while l * l <= n {
        if n % l == 0 {
            prime_divs.push(l);
            while n % l == 0 {
                n /= l;
            }
        }
        l += 1;
    }
    if n > 1 {
        prime_divs.push(n);
    }
    for l in prime_divs {
        let xq = poly::x_pow_p_iter(m, p, f / l);
        let diff = poly::sub(&xq, &x, p);
        let g = poly::gcd(&diff, m, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

impl Fq {
    /// Construct F_{p^f}. Rejects p = 2, non-prime p and oversized fields.
    pub fn new(p: u32, f: u32) -> Result<Fq> {
        if !is_prime(p) {
            return Err(Error::InvalidParam(format!("p = {p} is not prime")));
        }
        if p == 2 {
            return Err(Error::InvalidParam("p = 2 is outside scope (odd residue characteristic only)".into()));
        }
        if f == 0 {
            return Err(Error::InvalidParam("f must be positive".into()));
        }
        let q = (p as u64).checked_pow(f);
        let q = match q {
            Some(q) if q <= 1 << 14 => q as u32,
            _ => return Err(Error::Budget(format!("q = {p}^{f} too large for table-driven arithmetic"))),
        };

        let modulus: Vec<u32> = if f == 1 {
            vec![0, 1]
        } else {
            let mut found = None;
            for code in 0..q {
                let mut m: Vec<u32> = (0..f).map(|i| (code / p.pow(i)) % p).collect();
                m.push(1);
                if is_irreducible(&m, p, f) {
                    found = Some(m);
                    break;
                }
            }
            found.ok_or_else(|| Error::Check("no irreducible modulus found".into()))?
        };

        let idx = |coeffs: &[u32]| -> u16 {
            let mut v = 0u32;
            for i in (0..f as usize).rev() {
                v = v * p + coeffs.get(i).copied().unwrap_or(0);
            }
            v as u16
        };
        let coeffs_of = |i: u16| -> Vec<u32> {
            let mut v = i as u32;
            (0..f)
                .map(|_| {
                    let c = v % p;
                    v /= p;
                    c
                })
                .collect()
        };

        let n = q as usize;
        let mut add = vec![0u16; n * n];
        let mut mul = vec![0u16; n * n];
        let mut neg = vec![0u16; n];
        for a in 0..n {
            let ca = coeffs_of(a as u16);
            let nc: Vec<u32> = ca.iter().map(|&c| (p - c) % p).collect();
            neg[a] = idx(&nc);
            for b in 0..n {
                let cb = coeffs_of(b as u16);
                let cs: Vec<u32> = ca.iter().zip(&cb).map(|(&x, &y)| (x + y) % p).collect();
                add[a * n + b] = idx(&cs);
                let prod = poly::rem(&poly::mul(&ca, &cb, p), &modulus, p);
                mul[a * n + b] = idx(&prod);
            }
        }
        let mut inv = vec![0u16; n];
        for a in 1..n {
            for b in 1..n {
                if mul[a * n + b] == 1 {
                    inv[a] = b as u16;
                    break;
                }
            }
        }

        // Trace to F_p via the regular representation over F_p.
        let mut trace_p = vec![0u16; n];
        for a in 0..n {
            let mut t = 0u32;
            for i in 0..f {
                let basis = idx(&{
                    let mut v = vec![0u32; f as usize];
                    v[i as usize] = 1;
                    v
                });
                let prod = mul[a * n + basis as usize];
                t = (t + coeffs_of(prod)[i as usize]) % p;
            }
            trace_p[a] = t as u16;
        }

        let mut fq = Fq { p, f, q, modulus, add, mul, neg, inv, trace_p, dlog: vec![], generator: 0 };

        // Deterministic generator: smallest index of full multiplicative order.
        let mut dlog = vec![u32::MAX; n];
        'outer: for g in 1..q as u16 {
            let mut seen = vec![u32::MAX; n];
            let mut cur = 1u16;
            for j in 0..(q - 1) {
                if seen[cur as usize] != u32::MAX {
                    continue 'outer;
                }
                seen[cur as usize] = j;
                cur = fq.mul(cur, g);
            }
            fq.generator = g;
            dlog = seen;
            break;
        }
        if fq.generator == 0 {
            return Err(Error::Check("no multiplicative generator found".into()));
        }
        fq.dlog = dlog;
        Ok(fq)
    }

    #[inline(always)]
    pub fn add(&self, a: FqEl, b: FqEl) -> FqEl {
        self.add[a as usize * self.q as usize + b as usize]
    }
    #[inline(always)]
    pub fn mul(&self, a: FqEl, b: FqEl) -> FqEl {
        self.mul[a as usize * self.q as usize + b as usize]
    }
    #[inline(always)]
    pub fn neg(&self, a: FqEl) -> FqEl {
        self.neg[a as usize]
    }
    #[inline(always)]
    pub fn sub(&self, a: FqEl, b: FqEl) -> FqEl {
        self.add(a, self.neg(b))
    }
    #[inline(always)]
    pub fn inv(&self, a: FqEl) -> FqEl {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }
    pub fn pow(&self, a: FqEl, mut e: u64) -> FqEl {
        let mut base = a;
        let mut acc = 1u16;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
    /// Trace to the prime field, as a residue in 0..p.
    #[inline]
    pub fn trace_p(&self, a: FqEl) -> u16 {
        self.trace_p[a as usize]
    }
    pub fn dlog(&self, a: FqEl) -> u32 {
        debug_assert!(a != 0);
        self.dlog[a as usize]
    }
    pub fn is_square(&self, a: FqEl) -> bool {
        a == 0 || self.dlog(a) % 2 == 0
    }
    /// A square root when one exists; for nonzero squares, the generator
    /// raised to half the discrete log.
    pub fn sqrt(&self, a: FqEl) -> Option<FqEl> {
        if a == 0 {
            return Some(0);
        }
        let k = self.dlog(a);
        if k % 2 != 0 {
            return None;
        }
        Some(self.pow(self.generator, (k / 2) as u64))
    }
    /// Embed a prime-field residue (0..p) as a field element.
    #[inline]
    pub fn from_residue(&self, r: u32) -> FqEl {
        (r % self.p) as u16
    }
    pub fn coeffs(&self, a: FqEl) -> Vec<u32> {
        let mut v = a as u32;
        (0..self.f)
            .map(|_| {
                let c = v % self.p;
                v /= self.p;
                c
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f3_basics() {
        let f = Fq::new(3, 1).unwrap();
        assert_eq!(f.q, 3);
        assert_eq!(f.modulus, vec![0, 1]);
        assert_eq!(f.add(2, 2), 1);
        assert_eq!(f.mul(2, 2), 1);
        assert_eq!(f.inv(2), 2);
        assert!(!f.is_square(2));
        assert!(f.is_square(1));
    }

    #[test]
    fn f9_modulus_is_least_irreducible() {
        let f = Fq::new(3, 2).unwrap();
        // x^2 + 1 is the first irreducible quadratic in the scan order.
        assert_eq!(f.modulus, vec![1, 0, 1]);
        assert_eq!(f.q, 9);
        // Multiplicative group is cyclic of order 8.
        let g = f.generator;
        let mut seen = std::collections::HashSet::new();
        let mut cur = 1u16;
        for _ in 0..8 {
            seen.insert(cur);
            cur = f.mul(cur, g);
        }
        assert_eq!(seen.len(), 8);
        assert_eq!(cur, 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Fq::new(2, 1).is_err());
        assert!(Fq::new(4, 1).is_err());
        assert!(Fq::new(9, 1).is_err());
        assert!(Fq::new(3, 0).is_err());
    }

    #[test]
    fn field_axioms_exhaustive_f9() {
        let f = Fq::new(3, 2).unwrap();
        for a in 0..9u16 {
            for b in 0..9u16 {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in 0..9u16 {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                }
            }
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a)), 1);
            }
        }
    }

    #[test]
    fn trace_is_fp_linear_and_surjective() {
        let f = Fq::new(3, 2).unwrap();
        let mut hit = std::collections::HashSet::new();
        for a in 0..9u16 {
            hit.insert(f.trace_p(a));
            for b in 0..9u16 {
                let s = f.add(a, b);
                assert_eq!((f.trace_p(a) + f.trace_p(b)) % 3, f.trace_p(s) % 3);
            }
        }
        assert_eq!(hit.len(), 3);
    }
}
