//! Class functions on a group with enumerated conjugacy classes: inner
//! products with strict integrality rounding, induction from subgroups by
//! class fusion, decomposition into a basis, and character machinery for
//! finite abelian groups (stepwise extension along a chain of subgroups).

use crate::error::{Error, Result};
use crate::groups::ConjClasses;
use crate::num::{round_int, Cx, INT_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// A complex-valued class function, one value per conjugacy class, aligned
/// with `ConjClasses::reps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFunction {
    pub values: Vec<Cx>,
}

impl ClassFunction {
    pub fn from_fn(cls: &ConjClasses, f: impl Fn(u32) -> Cx) -> ClassFunction {
        ClassFunction { values: cls.reps.iter().map(|&r| f(r)).collect() }
    }

    pub fn zero(cls: &ConjClasses) -> ClassFunction {
        ClassFunction { values: vec![Cx::new(0.0, 0.0); cls.class_count()] }
    }

    /// Value on the class of a packed element.
    pub fn at(&self, cls: &ConjClasses, packed: u32) -> Cx {
        self.values[cls.class_id(packed) as usize]
    }

    pub fn add(&self, other: &ClassFunction) -> ClassFunction {
        ClassFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: Cx) -> ClassFunction {
        ClassFunction { values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn max_abs_diff(&self, other: &ClassFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Frobenius inner product (1/|G|) sum over classes of |c| a(c) conj(b(c)).
pub fn inner_product(cls: &ConjClasses, a: &ClassFunction, b: &ClassFunction) -> Cx {
    let mut acc = Cx::new(0.0, 0.0);
    for k in 0..cls.class_count() {
        acc += cls.sizes[k] as f64 * a.values[k] * b.values[k].conj();
    }
    acc / cls.group_order as f64
}

/// Inner product that must be a non-negative integer within tolerance.
pub fn inner_product_int(cls: &ConjClasses, a: &ClassFunction, b: &ClassFunction) -> Result<i64> {
    round_int(inner_product(cls, a, b))
}

/// Induction of a character chi of a subgroup H (given by its packed
/// elements) to the ambient group, computed by the class-fusion formula
/// Ind(c) = |G| / (|c| |H|) * sum of chi over H meeting c.
pub fn induce_from(
    cls: &ConjClasses,
    sub_elements: &[u32],
    chi: impl Fn(u32) -> Cx,
) -> Result<ClassFunction> {
    let mut acc = vec![Cx::new(0.0, 0.0); cls.class_count()];
    for &h in sub_elements {
        let k = cls.class_id(h);
        if k == u32::MAX {
            return Err(Error::Check("subgroup element outside the enumerated group".into()));
        }
        acc[k as usize] += chi(h);
    }
    let hn = sub_elements.len() as f64;
    let values = acc
        .into_iter()
        .enumerate()
        .map(|(k, a)| a * (cls.group_order as f64 / (cls.sizes[k] as f64 * hn)))
        .collect();
    Ok(ClassFunction { values })
}

/// (1/|H|) sum over H of v(h) conj(chi(h)): the multiplicity pairing of the
/// restriction of v to H against a character chi of H.
pub fn restricted_inner_product(
    cls: &ConjClasses,
    v: &ClassFunction,
    sub_elements: &[u32],
    chi: impl Fn(u32) -> Cx,
) -> Cx {
    let mut acc = Cx::new(0.0, 0.0);
    for &h in sub_elements {
        acc += v.at(cls, h) * chi(h).conj();
    }
    acc / sub_elements.len() as f64
}

/// Decompose v in an orthonormal basis with integer coefficients; fails if
/// any coefficient is non-integral or the expansion does not reproduce v.
pub fn decompose(
    cls: &ConjClasses,
    v: &ClassFunction,
    basis: &[ClassFunction],
) -> Result<Vec<i64>> {
    let mut coeffs = Vec::with_capacity(basis.len());
    let mut recon = ClassFunction::zero(cls);
    for b in basis {
        let m = round_int(inner_product(cls, v, b))?;
        coeffs.push(m);
        recon = recon.add(&b.scale(Cx::new(m as f64, 0.0)));
    }
    let diff = recon.max_abs_diff(v);
    if diff > INT_TOL {
        return Err(Error::Check(format!(
            "decomposition does not span the target, residual {diff:.3e}"
        )));
    }
    Ok(coeffs)
}

/// Verify the basis is orthonormal under the Frobenius product.
pub fn assert_orthonormal(cls: &ConjClasses, basis: &[ClassFunction]) -> Result<()> {
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let ip = inner_product(cls, &basis[i], &basis[j]);
            let want = if i == j { 1i64 } else { 0 };
            let got = round_int(ip)?;
            if got != want {
                return Err(Error::Check(format!(
                    "Gram defect at ({i},{j}): got {got}, expected {want}"
                )));
            }
        }
    }
    Ok(())
}

/// Deterministic spot check that f is constant on conjugacy classes:
/// samples (g, x) pairs and compares f(g x g^-1) with the value at the class
/// representative of x.
pub fn check_class_invariance(
    cls: &ConjClasses,
    elements: &[u32],
    conj: impl Fn(u32, u32) -> u32,
    f: impl Fn(u32) -> Cx,
    samples: usize,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for _ in 0..samples {
        let g = elements[rng.gen_range(0..elements.len())];
        let x = elements[rng.gen_range(0..elements.len())];
        let y = conj(g, x);
        let vx = f(cls.reps[cls.class_id(x) as usize]);
        let vy = f(y);
        if (vx - vy).norm() > INT_TOL {
            return Err(Error::Check("function is not a class function".into()));
        }
    }
    Ok(())
}

// ---- Abelian character machinery. ----

/// One character value table per element of an abelian group, as a map from
/// packed elements to unit complex numbers.
pub type AbelianChar = HashMap<u32, Cx>;

fn principal_root(z: Cx, m: u32) -> Cx {
    // z is a root of unity; take the root with argument arg(z)/m.
    Cx::from_polar(1.0, z.arg() / m as f64)
}

/// Order of g relative to a subgroup: least m >= 1 with g^m in `inside`.
fn rel_order(g: u32, inside: &AbelianChar, mul: &impl Fn(u32, u32) -> u32) -> (u32, u32) {
    let mut pow = g;
    let mut m = 1u32;
    while !inside.contains_key(&pow) {
        pow = mul(pow, g);
        m += 1;
        assert!(m < 1 << 24, "relative order diverged; not a finite subgroup chain");
    }
    (m, pow)
}

fn extend_by(
    chi: &AbelianChar,
    g: u32,
    root: Cx,
    m: u32,
    mul: &impl Fn(u32, u32) -> u32,
) -> AbelianChar {
    let mut out = chi.clone();
    let mut gp = g;
    let mut val = root;
    for _ in 1..m {
        for (&h, &v) in chi.iter() {
            out.insert(mul(gp, h), val * v);
        }
        gp = mul(gp, g);
        val *= root;
    }
    out
}

/// Extend a character chi of a subgroup S to the whole abelian group C,
/// choosing the principal root at each step. Deterministic: generators are
/// taken in ascending packed order.
pub fn one_extension(
    elements: &[u32],
    chi_sub: &AbelianChar,
    mul: impl Fn(u32, u32) -> u32,
) -> Result<AbelianChar> {
    let mut chi = chi_sub.clone();
    loop {
        let next = elements.iter().copied().find(|e| !chi.contains_key(e));
        let Some(g) = next else { break };
        let (m, gm) = rel_order(g, &chi, &mul);
        let target = chi[&gm];
        let root = principal_root(target, m);
        chi = extend_by(&chi, g, root, m, &mul);
    }
    check_hom(&chi, &mul)?;
    Ok(chi)
}

/// All extensions of chi_sub to the whole group; there are [C : S] of them,
/// in a deterministic order (root branches cycle fastest at the innermost
/// extension step).
pub fn all_extensions(
    elements: &[u32],
    chi_sub: &AbelianChar,
    mul: impl Fn(u32, u32) -> u32,
) -> Result<Vec<AbelianChar>> {
    let mut partial = vec![chi_sub.clone()];
    loop {
        let probe = &partial[0];
        let next = elements.iter().copied().find(|e| !probe.contains_key(e));
        let Some(g) = next else { break };
        let mut grown = Vec::with_capacity(partial.len() * 2);
        for chi in &partial {
            let (m, gm) = rel_order(g, chi, &mul);
            let target = chi[&gm];
            let root0 = principal_root(target, m);
            for k in 0..m {
                let tw = Cx::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
                grown.push(extend_by(chi, g, root0 * tw, m, &mul));
            }
        }
        partial = grown;
    }
    for chi in &partial {
        check_hom(chi, &mul)?;
    }
    Ok(partial)
}

fn check_hom(chi: &AbelianChar, mul: &impl Fn(u32, u32) -> u32) -> Result<()> {
    // Exhaustive when small, sampled otherwise.
    let keys: Vec<u32> = chi.keys().copied().collect();
    let full = keys.len() <= 1024;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pairs: Vec<(u32, u32)> = if full {
        keys.iter().flat_map(|&a| keys.iter().map(move |&b| (a, b))).collect()
    } else {
        (0..200_000)
            .map(|_| (keys[rng.gen_range(0..keys.len())], keys[rng.gen_range(0..keys.len())]))
            .collect()
    };
    for (a, b) in pairs {
        let want = chi[&a] * chi[&b];
        let got = chi
            .get(&mul(a, b))
            .ok_or_else(|| Error::Check("character domain is not closed under product".into()))?;
        if (want - got).norm() > 1e-7 {
            return Err(Error::Check("character extension is not a homomorphism".into()));
        }
    }
    Ok(())
}
