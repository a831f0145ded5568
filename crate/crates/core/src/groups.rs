//! Matrix groups over F_q and o2: generic 2x2 and 4x4 arithmetic, the
//! regular-representation embeddings of the tower into matrix rings,
//! subgroup descriptors with exact orders, and conjugacy-class enumeration.
//!
//! Matrices are fixed arrays of scalar indices in row-major order; all
//! scalar arithmetic goes through the `Scalars` trait so the same code runs
//! at the residue level (F_q) and at the ring level (o2).

use crate::error::{Error, Result};
use crate::field::{Fq, FqEl};
use crate::tower::{O2Ring, Tower, O4, Q4};

/// Row-major 2x2 matrix [a, b, c, d] = [[a, b], [c, d]].
pub type M2 = [u16; 4];
/// Row-major 4x4 matrix.
pub type M4 = [u16; 16];

pub trait Scalars {
    fn size(&self) -> u32;
    fn add(&self, a: u16, b: u16) -> u16;
    fn mul(&self, a: u16, b: u16) -> u16;
    fn neg(&self, a: u16) -> u16;
    fn inv(&self, a: u16) -> u16;
    fn is_unit(&self, a: u16) -> bool;
    #[inline(always)]
    fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg(b))
    }
}

impl Scalars for Fq {
    #[inline(always)]
    fn size(&self) -> u32 {
        self.q
    }
    #[inline(always)]
    fn add(&self, a: u16, b: u16) -> u16 {
        Fq::add(self, a, b)
    }
    #[inline(always)]
    fn mul(&self, a: u16, b: u16) -> u16 {
        Fq::mul(self, a, b)
    }
    #[inline(always)]
    fn neg(&self, a: u16) -> u16 {
        Fq::neg(self, a)
    }
    #[inline(always)]
    fn inv(&self, a: u16) -> u16 {
        Fq::inv(self, a)
    }
    #[inline(always)]
    fn is_unit(&self, a: u16) -> bool {
        a != 0
    }
}

impl Scalars for O2Ring {
    #[inline(always)]
    fn size(&self) -> u32 {
        self.size
    }
    #[inline(always)]
    fn add(&self, a: u16, b: u16) -> u16 {
        O2Ring::add(self, a, b)
    }
    #[inline(always)]
    fn mul(&self, a: u16, b: u16) -> u16 {
        O2Ring::mul(self, a, b)
    }
    #[inline(always)]
    fn neg(&self, a: u16) -> u16 {
        O2Ring::neg(self, a)
    }
    #[inline(always)]
    fn inv(&self, a: u16) -> u16 {
        O2Ring::inv(self, a)
    }
    #[inline(always)]
    fn is_unit(&self, a: u16) -> bool {
        O2Ring::is_unit(self, a)
    }
}

// ---- 2x2 operations. ----

pub fn m2_id<S: Scalars>(_s: &S) -> M2 {
    [1, 0, 0, 1]
}

pub fn m2_scalar<S: Scalars>(_s: &S, c: u16) -> M2 {
    [c, 0, 0, c]
}

pub fn m2_add<S: Scalars>(s: &S, x: M2, y: M2) -> M2 {
    [s.add(x[0], y[0]), s.add(x[1], y[1]), s.add(x[2], y[2]), s.add(x[3], y[3])]
}

pub fn m2_sub<S: Scalars>(s: &S, x: M2, y: M2) -> M2 {
    [s.sub(x[0], y[0]), s.sub(x[1], y[1]), s.sub(x[2], y[2]), s.sub(x[3], y[3])]
}

pub fn m2_neg<S: Scalars>(s: &S, x: M2) -> M2 {
    [s.neg(x[0]), s.neg(x[1]), s.neg(x[2]), s.neg(x[3])]
}

pub fn m2_mul<S: Scalars>(s: &S, x: M2, y: M2) -> M2 {
    [
        s.add(s.mul(x[0], y[0]), s.mul(x[1], y[2])),
        s.add(s.mul(x[0], y[1]), s.mul(x[1], y[3])),
        s.add(s.mul(x[2], y[0]), s.mul(x[3], y[2])),
        s.add(s.mul(x[2], y[1]), s.mul(x[3], y[3])),
    ]
}

pub fn m2_scale<S: Scalars>(s: &S, c: u16, x: M2) -> M2 {
    [s.mul(c, x[0]), s.mul(c, x[1]), s.mul(c, x[2]), s.mul(c, x[3])]
}

pub fn m2_tr<S: Scalars>(s: &S, x: M2) -> u16 {
    s.add(x[0], x[3])
}

pub fn m2_det<S: Scalars>(s: &S, x: M2) -> u16 {
    s.sub(s.mul(x[0], x[3]), s.mul(x[1], x[2]))
}

pub fn m2_is_invertible<S: Scalars>(s: &S, x: M2) -> bool {
    s.is_unit(m2_det(s, x))
}

pub fn m2_inv<S: Scalars>(s: &S, x: M2) -> Result<M2> {
    let d = m2_det(s, x);
    if !s.is_unit(d) {
        return Err(Error::NotUnit);
    }
    let di = s.inv(d);
    Ok([
        s.mul(di, x[3]),
        s.mul(di, s.neg(x[1])),
        s.mul(di, s.neg(x[2])),
        s.mul(di, x[0]),
    ])
}

/// Dense packing of a 2x2 matrix with entries below s.size().
#[inline(always)]
pub fn pack2<S: Scalars>(s: &S, m: M2) -> u32 {
    let b = s.size();
    ((m[3] as u32 * b + m[2] as u32) * b + m[1] as u32) * b + m[0] as u32
}

#[inline(always)]
pub fn unpack2<S: Scalars>(s: &S, mut v: u32) -> M2 {
    let b = s.size();
    let e0 = (v % b) as u16;
    v /= b;
    let e1 = (v % b) as u16;
    v /= b;
    let e2 = (v % b) as u16;
    v /= b;
    [e0, e1, e2, (v % b) as u16]
}

// ---- 4x4 operations. ----

pub fn m4_id<S: Scalars>(_s: &S) -> M4 {
    let mut m = [0u16; 16];
    for i in 0..4 {
        m[i * 4 + i] = 1;
    }
    m
}

pub fn m4_add<S: Scalars>(s: &S, x: &M4, y: &M4) -> M4 {
    let mut z = [0u16; 16];
    for i in 0..16 {
        z[i] = s.add(x[i], y[i]);
    }
    z
}

pub fn m4_mul<S: Scalars>(s: &S, x: &M4, y: &M4) -> M4 {
    let mut z = [0u16; 16];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = 0u16;
            for k in 0..4 {
                acc = s.add(acc, s.mul(x[i * 4 + k], y[k * 4 + j]));
            }
            z[i * 4 + j] = acc;
        }
    }
    z
}

pub fn m4_tr<S: Scalars>(s: &S, x: &M4) -> u16 {
    let mut acc = 0u16;
    for i in 0..4 {
        acc = s.add(acc, x[i * 4 + i]);
    }
    acc
}

pub fn m4_scale<S: Scalars>(s: &S, c: u16, x: &M4) -> M4 {
    let mut z = [0u16; 16];
    for i in 0..16 {
        z[i] = s.mul(c, x[i]);
    }
    z
}

/// Assemble [[A, B], [C, D]] from 2x2 blocks.
pub fn m4_from_blocks(a: M2, b: M2, c: M2, d: M2) -> M4 {
    let mut m = [0u16; 16];
    for i in 0..2 {
        for j in 0..2 {
            m[i * 4 + j] = a[i * 2 + j];
            m[i * 4 + j + 2] = b[i * 2 + j];
            m[(i + 2) * 4 + j] = c[i * 2 + j];
            m[(i + 2) * 4 + j + 2] = d[i * 2 + j];
        }
    }
    m
}

/// Split into 2x2 blocks (A, B, C, D).
pub fn m4_blocks(m: &M4) -> (M2, M2, M2, M2) {
    let g = |i: usize, j: usize| m[i * 4 + j];
    (
        [g(0, 0), g(0, 1), g(1, 0), g(1, 1)],
        [g(0, 2), g(0, 3), g(1, 2), g(1, 3)],
        [g(2, 0), g(2, 1), g(3, 0), g(3, 1)],
        [g(2, 2), g(2, 3), g(3, 2), g(3, 3)],
    )
}

fn m3_det<S: Scalars>(s: &S, m: [u16; 9]) -> u16 {
    let t1 = s.mul(m[0], s.sub(s.mul(m[4], m[8]), s.mul(m[5], m[7])));
    let t2 = s.mul(m[1], s.sub(s.mul(m[3], m[8]), s.mul(m[5], m[6])));
    let t3 = s.mul(m[2], s.sub(s.mul(m[3], m[7]), s.mul(m[4], m[6])));
    s.add(s.sub(t1, t2), t3)
}

pub fn m4_det<S: Scalars>(s: &S, m: &M4) -> u16 {
    let minor = |col: usize| -> [u16; 9] {
        let mut out = [0u16; 9];
        let mut idx = 0;
        for i in 1..4 {
            for j in 0..4 {
                if j != col {
                    out[idx] = m[i * 4 + j];
                    idx += 1;
                }
            }
        }
        out
    };
    let mut acc = 0u16;
    for j in 0..4 {
        let term = s.mul(m[j], m3_det(s, minor(j)));
        acc = if j % 2 == 0 { s.add(acc, term) } else { s.sub(acc, term) };
    }
    acc
}

pub fn m4_is_invertible<S: Scalars>(s: &S, m: &M4) -> bool {
    s.is_unit(m4_det(s, m))
}

/// Gauss-Jordan inverse over a field.
pub fn m4_inv_field(fq: &Fq, m: &M4) -> Result<M4> {
    let mut a = *m;
    let mut inv = m4_id(fq);
    for col in 0..4 {
        let mut piv = None;
        for row in col..4 {
            if a[row * 4 + col] != 0 {
                piv = Some(row);
                break;
            }
        }
        let piv = piv.ok_or(Error::NotUnit)?;
        if piv != col {
            for j in 0..4 {
                a.swap(piv * 4 + j, col * 4 + j);
                inv.swap(piv * 4 + j, col * 4 + j);
            }
        }
        let d = fq.inv(a[col * 4 + col]);
        for j in 0..4 {
            a[col * 4 + j] = fq.mul(d, a[col * 4 + j]);
            inv[col * 4 + j] = fq.mul(d, inv[col * 4 + j]);
        }
        for row in 0..4 {
            if row != col && a[row * 4 + col] != 0 {
                let c = a[row * 4 + col];
                for j in 0..4 {
                    a[row * 4 + j] = fq.sub(a[row * 4 + j], fq.mul(c, a[col * 4 + j]));
                    inv[row * 4 + j] = fq.sub(inv[row * 4 + j], fq.mul(c, inv[col * 4 + j]));
                }
            }
        }
    }
    Ok(inv)
}

pub fn m4_reduce(tw: &Tower, m: &M4) -> M4 {
    let mut out = [0u16; 16];
    for i in 0..16 {
        out[i] = tw.o2.reduce(m[i]);
    }
    out
}

pub fn m4_lift(tw: &Tower, m: &M4) -> M4 {
    let mut out = [0u16; 16];
    for i in 0..16 {
        out[i] = tw.o2.lift(m[i]);
    }
    out
}

/// Inverse over o2 by lifting the residue inverse one step: if M*L = I + pi*E
/// then L*(2I - M*L) is exact because pi^2 = 0.
pub fn m4_inv_o2(tw: &Tower, m: &M4) -> Result<M4> {
    let r = &tw.o2;
    let lbar = m4_inv_field(&r.fq, &m4_reduce(tw, m))?;
    let l = m4_lift(tw, &lbar);
    let ml = m4_mul(r, m, &l);
    let mut two_i_minus = m4_scale(r, r.neg(1), &ml);
    for i in 0..4 {
        two_i_minus[i * 4 + i] = r.add(two_i_minus[i * 4 + i], r.from_int(2));
    }
    let out = m4_mul(r, &l, &two_i_minus);
    debug_assert_eq!(m4_mul(r, m, &out), m4_id(r));
    Ok(out)
}

pub fn m2_reduce(tw: &Tower, m: M2) -> M2 {
    [tw.o2.reduce(m[0]), tw.o2.reduce(m[1]), tw.o2.reduce(m[2]), tw.o2.reduce(m[3])]
}

pub fn m2_lift(tw: &Tower, m: M2) -> M2 {
    [tw.o2.lift(m[0]), tw.o2.lift(m[1]), tw.o2.lift(m[2]), tw.o2.lift(m[3])]
}

/// Dense packing of a 4x4 residue matrix, base q, little-endian in the
/// row-major entry order. Fits u64 for q <= 13.
pub fn pack4_res(fq: &Fq, m: &M4) -> u64 {
    let q = fq.q as u64;
    let mut v = 0u64;
    for i in (0..16).rev() {
        v = v * q + m[i] as u64;
    }
    v
}

// ---- Embeddings of the tower. ----

/// Matrix of multiplication by x0 + x1*beta^2 on O2quad in the basis
/// {1, beta^2}, with structure constants (s, n) of the right level.
pub fn embed_quad<S: Scalars>(s: &S, sc: u16, nc: u16, x0: u16, x1: u16) -> M2 {
    [x0, s.neg(s.mul(nc, x1)), x1, s.add(x0, s.mul(sc, x1))]
}

/// Matrix of multiplication by x on O2quartic in the ordered basis
/// {1, beta^2, beta, beta^3}, as 2x2 blocks over the quad level.
pub fn embed_quartic<S: Scalars>(s: &S, sc: u16, nc: u16, x: [u16; 4]) -> M4 {
    let x1 = embed_quad(s, sc, nc, x[0], x[1]);
    let x3 = embed_quad(s, sc, nc, x[2], x[3]);
    let c = s.add(x[2], s.mul(sc, x[3]));
    let x2 = [
        s.neg(s.mul(nc, x[3])),
        s.neg(s.mul(nc, c)),
        c,
        s.add(s.mul(sc, x[2]), s.mul(s.sub(s.mul(sc, sc), nc), x[3])),
    ];
    m4_from_blocks(x1, x2, x3, x1)
}

pub fn embed4_o2(tw: &Tower, x: O4) -> M4 {
    embed_quartic(&tw.o2, tw.s_o2, tw.n_o2, x)
}

pub fn embed4_res(tw: &Tower, c: Q4) -> M4 {
    embed_quartic(&tw.o2.fq, tw.s_fq, tw.n_fq, c)
}

pub fn embed2_o2(tw: &Tower, x0: u16, x1: u16) -> M2 {
    embed_quad(&tw.o2, tw.s_o2, tw.n_o2, x0, x1)
}

pub fn embed2_res(tw: &Tower, c0: FqEl, c1: FqEl) -> M2 {
    embed_quad(&tw.o2.fq, tw.s_fq, tw.n_fq, c0, c1)
}

#[inline]
pub fn col0_4(m: &M4) -> [u16; 4] {
    [m[0], m[4], m[8], m[12]]
}

#[inline]
pub fn col0_2(m: M2) -> (u16, u16) {
    (m[0], m[2])
}

// ---- GL4(o2) subgroup membership. ----

/// Strict (2,2) block-upper-triangular parabolic over o2.
pub fn in_parabolic_o2(tw: &Tower, m: &M4) -> bool {
    let (_, _, c, _) = m4_blocks(m);
    c == [0, 0, 0, 0] && m4_is_invertible(&tw.o2, m)
}

pub fn in_parabolic_res(fq: &Fq, m: &M4) -> bool {
    let (_, _, c, _) = m4_blocks(m);
    c == [0, 0, 0, 0] && m4_is_invertible(fq, m)
}

/// The elliptic torus T < GL4(o2): the full preimage of the residue torus
/// embed(F_{q^4}^x). Membership reconstructs the candidate from the first
/// column, which determines a multiplication matrix uniquely.
pub fn in_torus_res(tw: &Tower, mbar: &M4) -> bool {
    let c = col0_4(mbar);
    c != [0, 0, 0, 0] && embed4_res(tw, c) == *mbar
}

pub fn in_torus_o2(tw: &Tower, m: &M4) -> bool {
    in_torus_res(tw, &m4_reduce(tw, m))
}

pub fn in_k1_4(tw: &Tower, m: &M4) -> bool {
    m4_reduce(tw, m) == m4_id(&tw.o2.fq)
}

/// [[I, X], [0, I]] for X over o2.
pub fn unipotent_upper(tw: &Tower, x: M2) -> M4 {
    m4_from_blocks(m2_id(&tw.o2), x, [0; 4], m2_id(&tw.o2))
}

// ---- GL2(o2) element and subgroup enumeration. ----

pub fn gl2_o2_order(q: u64) -> u64 {
    q.pow(4) * (q * q - 1) * (q * q - q)
}

pub fn gl2_fq_order(q: u64) -> u64 {
    (q * q - 1) * (q * q - q)
}

/// All invertible packed 2x2 matrices over o2, ascending.
pub fn gl2_o2_elements(tw: &Tower) -> Vec<u32> {
    let r = &tw.o2;
    let total = (r.size as u64).pow(4);
    (0..total as u32)
        .filter(|&id| m2_is_invertible(r, unpack2(r, id)))
        .collect()
}

/// All invertible packed 2x2 matrices over F_q, ascending.
pub fn gl2_fq_elements(fq: &Fq) -> Vec<u32> {
    let total = (fq.q as u64).pow(4);
    (0..total as u32)
        .filter(|&id| m2_is_invertible(fq, unpack2(fq, id)))
        .collect()
}

/// Named subgroups of GL2(o2) used throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gl2Subgroup {
    /// Scalar units.
    Center,
    /// Kernel of reduction, I + pi*M2(o2).
    KernelOne,
    /// Preimage of the embedded quadratic residue torus: embed(O2quad^x) * K1.
    QuadUnitsTimesK1,
    /// Preimage of F_q[B]^x for a regular residue matrix B (its centralizer).
    Inertia(M2),
}

impl Gl2Subgroup {
    pub fn order(&self, tw: &Tower) -> u64 {
        let q = tw.o2.fq.q as u64;
        match self {
            Gl2Subgroup::Center => q * (q - 1),
            Gl2Subgroup::KernelOne => q.pow(4),
            Gl2Subgroup::QuadUnitsTimesK1 => (q * q - 1) * q.pow(4),
            Gl2Subgroup::Inertia(b) => {
                let fq = &tw.o2.fq;
                let t = m2_tr(fq, *b);
                let d = m2_det(fq, *b);
                // |F_q[B]^x| by the factorization type of x^2 - t*x + d.
                let disc = fq.sub(fq.mul(t, t), fq.mul(fq.from_residue(4), d));
                let fixed = if disc == 0 {
                    q * (q - 1)
                } else if fq.is_square(disc) {
                    (q - 1) * (q - 1)
                } else {
                    q * q - 1
                };
                fixed * q.pow(4)
            }
        }
    }

    pub fn contains(&self, tw: &Tower, m: M2) -> bool {
        let r = &tw.o2;
        match self {
            Gl2Subgroup::Center => m[1] == 0 && m[2] == 0 && m[0] == m[3] && r.is_unit(m[0]),
            Gl2Subgroup::KernelOne => m2_reduce(tw, m) == m2_id(&r.fq),
            Gl2Subgroup::QuadUnitsTimesK1 => {
                let mb = m2_reduce(tw, m);
                let (c0, c1) = col0_2(mb);
                (c0, c1) != (0, 0) && embed2_res(tw, c0, c1) == mb
            }
            Gl2Subgroup::Inertia(b) => {
                let fq = &r.fq;
                let mb = m2_reduce(tw, m);
                m2_is_invertible(fq, mb) && m2_mul(fq, mb, *b) == m2_mul(fq, *b, mb)
            }
        }
    }

    /// Exhaustive packed element list, ascending.
    pub fn elements(&self, tw: &Tower) -> Result<Vec<u32>> {
        let r = &tw.o2;
        if r.fq.q > 7 {
            return Err(Error::Budget("subgroup enumeration capped at q <= 7".into()));
        }
        let total = (r.size as u64).pow(4);
        Ok((0..total as u32)
            .filter(|&id| self.contains(tw, unpack2(r, id)))
            .collect())
    }
}

/// Normalizer of QuadUnitsTimesK1 in GL2(o2) by scan. Both the subgroup H
/// and its conjugates contain K1 and are generated over K1 by any single
/// element whose residue generates the cyclic group F_{q^2}^x, so one
/// conjugation test per candidate suffices.
pub fn normalizer_of_quad_units(tw: &Tower) -> Vec<u32> {
    let r = &tw.o2;
    let h = Gl2Subgroup::QuadUnitsTimesK1;
    let g2 = tw.q2_g0;
    let l = m2_lift(tw, embed2_res(tw, g2.0, g2.1));
    gl2_o2_elements(tw)
        .into_iter()
        .filter(|&id| {
            let g = unpack2(r, id);
            let gi = m2_inv(r, g).expect("enumerated elements are invertible");
            h.contains(tw, m2_mul(r, m2_mul(r, g, l), gi))
        })
        .collect()
}

// ---- Conjugacy classes. ----

#[derive(Debug, Clone)]
pub struct ConjClasses {
    /// Canonical representatives: the least packed id in each class,
    /// ascending.
    pub reps: Vec<u32>,
    pub sizes: Vec<u64>,
    /// Class index per packed id; u32::MAX outside the underlying set.
    pub class_of: Vec<u32>,
    pub group_order: u64,
}

impl ConjClasses {
    pub fn class_count(&self) -> usize {
        self.reps.len()
    }
    #[inline]
    pub fn class_id(&self, packed: u32) -> u32 {
        self.class_of[packed as usize]
    }
}

fn conj_orbit_bfs<S: Scalars>(
    s: &S,
    seeds: &[u32],
    in_set: impl Fn(u32) -> bool,
    gens: &[(M2, M2)],
    group_order: u64,
) -> ConjClasses {
    let total = (s.size() as u64).pow(4) as usize;
    let mut class_of = vec![u32::MAX; total];
    let mut reps = Vec::new();
    let mut sizes = Vec::new();
    let mut queue: Vec<u32> = Vec::new();
    for &seed in seeds {
        if class_of[seed as usize] != u32::MAX {
            continue;
        }
        let k = reps.len() as u32;
        reps.push(seed);
        class_of[seed as usize] = k;
        queue.clear();
        queue.push(seed);
        let mut size = 1u64;
        while let Some(id) = queue.pop() {
            let x = unpack2(s, id);
            for (g, gi) in gens {
                let y = m2_mul(s, m2_mul(s, *g, x), *gi);
                let yid = pack2(s, y);
                if class_of[yid as usize] == u32::MAX {
                    debug_assert!(in_set(yid));
                    class_of[yid as usize] = k;
                    queue.push(yid);
                    size += 1;
                }
            }
        }
        sizes.push(size);
    }
    ConjClasses { reps, sizes, class_of, group_order }
}

/// Generators of GL2 over the given scalars, paired with inverses:
/// elementary transvections, diagonal units, and the Weyl reflection.
/// The diagonal generators matter: elementaries alone only give SL2, whose
/// conjugation orbits can be strictly finer.
fn gl2_generators<S: Scalars>(s: &S) -> Vec<(M2, M2)> {
    let mut gens = Vec::new();
    for r in 1..s.size() as u16 {
        gens.push(([1, r, 0, 1], [1, s.neg(r), 0, 1]));
        gens.push(([1, 0, r, 1], [1, 0, s.neg(r), 1]));
    }
    for u in 2..s.size() as u16 {
        if s.is_unit(u) {
            gens.push(([u, 0, 0, 1], [s.inv(u), 0, 0, 1]));
        }
    }
    let w: M2 = [0, 1, s.neg(1), 0];
    gens.push((w, m2_inv(s, w).expect("Weyl element is invertible")));
    gens
}

/// Conjugacy classes of GL2(o2); capped at q <= 7.
pub fn gl2_o2_classes(tw: &Tower) -> Result<ConjClasses> {
    let r = &tw.o2;
    if r.fq.q > 7 {
        return Err(Error::Budget("class enumeration capped at q <= 7".into()));
    }
    let seeds = gl2_o2_elements(tw);
    let gens = gl2_generators(r);
    let classes = conj_orbit_bfs(
        r,
        &seeds,
        |id| m2_is_invertible(r, unpack2(r, id)),
        &gens,
        gl2_o2_order(r.fq.q as u64),
    );
    if classes.sizes.iter().sum::<u64>() != classes.group_order {
        return Err(Error::Check("class sizes do not sum to the group order".into()));
    }
    Ok(classes)
}

/// GL2(F_q)-conjugation classes of all of M2(F_q).
pub fn m2_fq_classes(fq: &Fq) -> Result<ConjClasses> {
    if fq.q > 49 {
        return Err(Error::Budget("class enumeration capped at q <= 49".into()));
    }
    let total = (fq.q as u64).pow(4) as u32;
    let seeds: Vec<u32> = (0..total).collect();
    let gens = gl2_generators(fq);
    let classes = conj_orbit_bfs(fq, &seeds, |_| true, &gens, gl2_fq_order(fq.q as u64));
    if classes.sizes.iter().sum::<u64>() != total as u64 {
        return Err(Error::Check("class sizes do not cover M2".into()));
    }
    Ok(classes)
}

/// Conjugacy classes of GL2(F_q).
pub fn gl2_fq_classes(fq: &Fq) -> Result<ConjClasses> {
    if fq.q > 49 {
        return Err(Error::Budget("class enumeration capped at q <= 49".into()));
    }
    let seeds = gl2_fq_elements(fq);
    let gens = gl2_generators(fq);
    let classes = conj_orbit_bfs(
        fq,
        &seeds,
        |id| m2_is_invertible(fq, unpack2(fq, id)),
        &gens,
        gl2_fq_order(fq.q as u64),
    );
    if classes.sizes.iter().sum::<u64>() != classes.group_order {
        return Err(Error::Check("class sizes do not sum to the group order".into()));
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::RingFlavor;

    fn tower(flavor: RingFlavor) -> Tower {
        Tower::build(Fq::new(3, 1).unwrap(), flavor).unwrap()
    }

    #[test]
    fn embeddings_are_ring_homomorphisms() {
        for flavor in [RingFlavor::EqualChar, RingFlavor::MixedChar] {
            let tw = tower(flavor);
            let r = &tw.o2;
            assert_eq!(embed4_o2(&tw, [1, 0, 0, 0]), m4_id(r));
            // Spot-check multiplicativity on a spread of elements.
            for i in 0..40u32 {
                let x = tw.o4_unpack((i * 167) % 6561);
                let y = tw.o4_unpack((i * 331 + 7) % 6561);
                let lhs = m4_mul(r, &embed4_o2(&tw, x), &embed4_o2(&tw, y));
                let rhs = embed4_o2(&tw, tw.o4_mul(x, y));
                assert_eq!(lhs, rhs);
                let sum = m4_add(r, &embed4_o2(&tw, x), &embed4_o2(&tw, y));
                assert_eq!(sum, embed4_o2(&tw, tw.o4_add(x, y)));
                // First column recovers the element.
                assert_eq!(col0_4(&embed4_o2(&tw, x)), x);
            }
        }
    }

    #[test]
    fn quad_embedding_matches_quartic_on_the_subring() {
        let tw = tower(RingFlavor::EqualChar);
        let r = &tw.o2;
        for x0 in 0..r.size as u16 {
            for x1 in [0u16, 1, 3, 7] {
                let e2 = embed2_o2(&tw, x0, x1);
                let e4 = embed4_o2(&tw, [x0, x1, 0, 0]);
                let (a, b, c, d) = m4_blocks(&e4);
                assert_eq!(a, e2);
                assert_eq!(d, e2);
                assert_eq!(b, [0, 0, 0, 0]);
                assert_eq!(c, [0, 0, 0, 0]);
            }
        }
    }

    #[test]
    fn quad_embedding_determinant_is_the_norm() {
        let tw = tower(RingFlavor::MixedChar);
        let r = &tw.o2;
        for x0 in 0..r.size as u16 {
            for x1 in 0..r.size as u16 {
                let e = embed2_o2(&tw, x0, x1);
                let conj = tw.quad_conj((x0, x1));
                // norm = x * conj(x), computed inside the quartic ring.
                let prod = tw.o4_mul([x0, x1, 0, 0], [conj.0, conj.1, 0, 0]);
                assert_eq!((prod[1], prod[2], prod[3]), (0, 0, 0));
                assert_eq!(m2_det(r, e), prod[0]);
                // trace = x + conj(x).
                let s = tw.o4_add([x0, x1, 0, 0], [conj.0, conj.1, 0, 0]);
                assert_eq!(m2_tr(r, e), s[0]);
            }
        }
    }

    #[test]
    fn quartic_trace_matches_rel_trace() {
        use crate::tower::TowerElem;
        let tw = tower(RingFlavor::EqualChar);
        for i in 0..30u32 {
            let x = tw.o4_unpack((i * 219 + 5) % 6561);
            let tr = m4_tr(&tw.o2, &embed4_o2(&tw, x));
            let want = tw.rel_trace(&TowerElem::quartic(x), crate::tower::Level::O2).unwrap();
            assert_eq!(tr, want.coords[0]);
        }
    }

    #[test]
    fn hensel_inverse_is_exact() {
        for flavor in [RingFlavor::EqualChar, RingFlavor::MixedChar] {
            let tw = tower(flavor);
            let r = &tw.o2;
            let mut tried = 0;
            for i in 0..200u32 {
                let x = tw.o4_unpack((i * 1237 + 11) % 6561);
                let m = embed4_o2(&tw, x);
                if !m4_is_invertible(r, &m) {
                    continue;
                }
                tried += 1;
                let mi = m4_inv_o2(&tw, &m).unwrap();
                assert_eq!(m4_mul(r, &m, &mi), m4_id(r));
                assert_eq!(m4_mul(r, &mi, &m), m4_id(r));
            }
            assert!(tried > 50);
            // Non-invertible input errors.
            let bad = m4_scale(r, tw.o2.pi, &m4_id(r));
            assert!(m4_inv_o2(&tw, &bad).is_err());
        }
    }

    #[test]
    fn det4_of_embedding_is_quartic_norm_like() {
        // det(embed(x)) is a unit exactly when x is.
        let tw = tower(RingFlavor::EqualChar);
        let r = &tw.o2;
        for i in 0..60u32 {
            let x = tw.o4_unpack((i * 709 + 3) % 6561);
            let d = m4_det(r, &embed4_o2(&tw, x));
            assert_eq!(r.is_unit(d), tw.o4_is_unit(x));
        }
    }

    #[test]
    fn torus_membership_is_the_preimage_of_the_residue_torus() {
        let tw = tower(RingFlavor::EqualChar);
        let r = &tw.o2;
        // Teichmueller powers times kernel elements are in T.
        for j in [0u32, 1, 7, 40, 79] {
            let t = embed4_o2(&tw, tw.teich_pow(j));
            assert!(in_torus_o2(&tw, &t));
            // Multiply by a kernel element.
            let mut k = m4_id(r);
            k[1] = r.pi;
            k[14] = r.pi_mul(r.from_int(2));
            let tk = m4_mul(r, &t, &k);
            assert!(in_k1_4(&tw, &k));
            assert!(in_torus_o2(&tw, &tk));
        }
        // A permutation-like matrix is not in T.
        let mut w = [0u16; 16];
        w[0] = 1;
        w[6] = 1;
        w[9] = 1;
        w[15] = 1;
        assert!(!in_torus_o2(&tw, &w));
        // |T-bar| = q^4 - 1 over the residue field.
        let count = (0..6561u32)
            .map(|v| {
                let c = tw.q4_unpack(v % 81);
                let mut m = embed4_res(&tw, c);
                if v >= 81 {
                    // scramble to make sure only true embeddings pass
                    m[1] = (v % 3) as u16;
                }
                m
            })
            .filter(|m| in_torus_res(&tw, m))
            .count();
        assert!(count >= 80);
    }

    #[test]
    fn subgroup_orders_match_enumeration() {
        for flavor in [RingFlavor::EqualChar, RingFlavor::MixedChar] {
            let tw = tower(flavor);
            let fq = &tw.o2.fq;
            let subs: Vec<Gl2Subgroup> = vec![
                Gl2Subgroup::Center,
                Gl2Subgroup::KernelOne,
                Gl2Subgroup::QuadUnitsTimesK1,
                // one regular matrix of each factorization type
                Gl2Subgroup::Inertia(embed2_res(&tw, 0, 1)), // irreducible charpoly
                Gl2Subgroup::Inertia([1, 1, 0, 1]),          // repeated root, non-scalar
                Gl2Subgroup::Inertia([1, 0, 0, 2]),          // distinct roots
            ];
            let want = [6u64, 81, 648, 8 * 81, 6 * 81, 4 * 81];
            for (sg, w) in subs.iter().zip(want) {
                assert_eq!(sg.order(&tw), w, "{sg:?}");
                assert_eq!(sg.elements(&tw).unwrap().len() as u64, w, "{sg:?}");
            }
            // The full group.
            assert_eq!(gl2_o2_elements(&tw).len() as u64, gl2_o2_order(fq.q as u64));
            assert_eq!(gl2_o2_order(3), 3888);
        }
    }

    #[test]
    fn quad_units_subgroup_is_closed_and_contains_the_torus() {
        let tw = tower(RingFlavor::EqualChar);
        let r = &tw.o2;
        let h = Gl2Subgroup::QuadUnitsTimesK1;
        let els = h.elements(&tw).unwrap();
        // Closure under product on a sample.
        for (i, &x) in els.iter().enumerate().step_by(37) {
            for (_, &y) in els.iter().enumerate().step_by(53) {
                let _ = i;
                let p = m2_mul(r, unpack2(r, x), unpack2(r, y));
                assert!(h.contains(&tw, p));
            }
        }
        for x0 in 0..r.size as u16 {
            for x1 in 0..r.size as u16 {
                let e = embed2_o2(&tw, x0, x1);
                if m2_is_invertible(r, e) {
                    assert!(h.contains(&tw, e));
                }
            }
        }
    }

    #[test]
    fn normalizer_has_index_two_over_the_subgroup() {
        for flavor in [RingFlavor::EqualChar, RingFlavor::MixedChar] {
            let tw = tower(flavor);
            let n = normalizer_of_quad_units(&tw);
            assert_eq!(n.len() as u64, 2 * Gl2Subgroup::QuadUnitsTimesK1.order(&tw));
        }
    }

    #[test]
    fn class_counts_at_q3() {
        let tw = tower(RingFlavor::EqualChar);
        let cls = gl2_o2_classes(&tw).unwrap();
        assert_eq!(cls.class_count(), 78);
        assert_eq!(cls.sizes.iter().sum::<u64>(), 3888);
        // Conjugation by arbitrary group elements preserves class ids.
        let r = &tw.o2;
        let els = gl2_o2_elements(&tw);
        for (i, &gid) in els.iter().enumerate().step_by(311) {
            let g = unpack2(r, gid);
            let gi = m2_inv(r, g).unwrap();
            for &xid in els.iter().step_by(97 + i % 7) {
                let y = m2_mul(r, m2_mul(r, g, unpack2(r, xid)), gi);
                assert_eq!(cls.class_id(pack2(r, y)), cls.class_id(xid));
            }
        }
        // Central elements are singleton classes.
        let id_class = cls.class_id(pack2(r, m2_scalar(r, 1)));
        assert_eq!(cls.sizes[id_class as usize], 1);
        let fq = &tw.o2.fq;
        let m2 = m2_fq_classes(fq).unwrap();
        assert_eq!(m2.class_count(), 12); // q^2 + q
        let gl2 = gl2_fq_classes(fq).unwrap();
        assert_eq!(gl2.class_count(), 8); // q^2 - 1
    }

    #[test]
    fn m2_class_map_respects_similarity_invariants() {
        let fq = Fq::new(3, 1).unwrap();
        let cls = m2_fq_classes(&fq).unwrap();
        for id in 0..81u32 {
            let m = unpack2(&fq, id);
            let rep = unpack2(&fq, cls.reps[cls.class_id(id) as usize]);
            assert_eq!(m2_tr(&fq, m), m2_tr(&fq, rep));
            assert_eq!(m2_det(&fq, m), m2_det(&fq, rep));
        }
    }

    #[test]
    fn trace_pairing_on_m2_is_injective() {
        for flavor in [RingFlavor::EqualChar, RingFlavor::MixedChar] {
            let tw = tower(flavor);
            let fq = &tw.o2.fq;
            let mut sigs = std::collections::HashSet::new();
            for id in 0..81u32 {
                let a = unpack2(fq, id);
                let sig: Vec<(i64, i64)> = (0..81u32)
                    .map(|bid| {
                        let b = unpack2(fq, bid);
                        let v = tw.o2.psi0_res(m2_tr(fq, m2_mul(fq, a, b)));
                        ((v.re * 1e6).round() as i64, (v.im * 1e6).round() as i64)
                    })
                    .collect();
                assert!(sigs.insert(sig), "A -> psi(tr(A.)) must be injective");
            }
        }
    }

    #[test]
    fn block_roundtrip_and_det4() {
        let fq = Fq::new(3, 1).unwrap();
        let a: M2 = [1, 2, 0, 1];
        let b: M2 = [0, 1, 1, 0];
        let c: M2 = [2, 0, 0, 2];
        let d: M2 = [1, 1, 1, 2];
        let m = m4_from_blocks(a, b, c, d);
        assert_eq!(m4_blocks(&m), (a, b, c, d));
        // det of block-triangular = det(A) * det(D).
        let t = m4_from_blocks(a, b, [0; 4], d);
        assert_eq!(m4_det(&fq, &t), fq.mul(m2_det(&fq, a), m2_det(&fq, d)));
        // Field inverse agrees with multiplication.
        if m4_is_invertible(&fq, &m) {
            let mi = m4_inv_field(&fq, &m).unwrap();
            assert_eq!(m4_mul(&fq, &m, &mi), m4_id(&fq));
        }
    }
}
