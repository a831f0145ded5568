//! Double cosets of the elliptic torus and the (2,2) parabolic in GL4, and
//! the analogous residue-level coset families for GL2.
//!
//! A coset representative A_{u,v} is [[I, 0], [U, I]] with U = [[0, u], [0, v]].
//! Two representatives lie in the same T\G/P double coset exactly when an
//! explicit antisymmetric polynomial pairing C vanishes; this is certified
//! here against two independent brute-force oracles:
//!   * direct matrix search over the residue torus, valid because both T and
//!     the double cosets are unions of fibers of reduction;
//!   * orbit structure of the residue torus acting on the Grassmannian of
//!     2-planes, where A_{u,v} corresponds to span{1, beta^2 + u*beta + v*beta^3},
//!     cross-checked once more against Moebius-action orbits on F_{q^4} - F_q.

use crate::error::{Error, Result};
use crate::field::{Fq, FqEl};
use crate::groups::{
    embed2_res, embed4_res, gl2_fq_elements, in_parabolic_res, m2_mul, m4_from_blocks,
    m4_inv_field, m4_mul, unpack2, M2, M4,
};
use crate::tower::Tower;
use std::collections::HashMap;

/// The representative A_{u,v}; (0,0) is the identity coset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CosetRep {
    pub u: FqEl,
    pub v: FqEl,
}

impl CosetRep {
    pub fn identity() -> Self {
        CosetRep { u: 0, v: 0 }
    }
    pub fn is_identity(&self) -> bool {
        self.u == 0 && self.v == 0
    }
    /// The lower-left block U.
    pub fn u_block(&self) -> M2 {
        [0, self.u, 0, self.v]
    }
}

/// A_{u,v} over the residue field.
pub fn a_uv_res(fq: &Fq, rep: CosetRep) -> M4 {
    m4_from_blocks(crate::groups::m2_id(fq), [0; 4], rep.u_block(), crate::groups::m2_id(fq))
}

/// A_{u,v} over o2 (constant lifts of the residue entries).
pub fn a_uv_o2(tw: &Tower, rep: CosetRep) -> M4 {
    crate::groups::m4_lift(tw, &a_uv_res(&tw.o2.fq, rep))
}

/// The auxiliary representative A_w with rows
/// (1,0,0,0), (0,0,1,0), (0,1,0,0), (0,w,0,1).
pub fn a_w_res(_fq: &Fq, w: FqEl) -> M4 {
    let mut m = [0u16; 16];
    m[0] = 1;
    m[6] = 1;
    m[9] = 1;
    m[13] = w;
    m[15] = 1;
    m
}

/// The antisymmetric pairing whose vanishing characterizes equality of the
/// double cosets of A_{u,v} and A_{u',v'}.
pub fn coset_pairing(tw: &Tower, d: CosetRep, e: CosetRep) -> FqEl {
    let f = &tw.o2.fq;
    let (u, v, up, vp) = (d.u, d.v, e.u, e.v);
    let two_a = tw.s_fq;
    let n = tw.n_fq;
    // 3a^2 + b^2*alpha = (2a)^2 - (a^2 - b^2*alpha).
    let s2n = f.sub(f.mul(two_a, two_a), n);
    let sq = |x: FqEl| f.mul(x, x);
    let mut c = f.sub(sq(u), sq(up));
    c = f.add(c, f.sub(f.mul(f.mul(u, v), sq(up)), f.mul(sq(u), f.mul(up, vp))));
    c = f.add(c, f.mul(two_a, f.sub(f.mul(sq(v), sq(up)), f.mul(sq(u), sq(vp)))));
    c = f.add(c, f.mul(two_a, f.sub(f.mul(u, v), f.mul(up, vp))));
    c = f.add(
        c,
        f.mul(s2n, f.sub(f.mul(f.mul(up, vp), sq(v)), f.mul(f.mul(u, v), sq(vp)))),
    );
    c = f.add(c, f.mul(f.sub(sq(v), sq(vp)), n));
    c
}

/// Deterministic transversal of the A_{u,v} double cosets: scan (u, v) in
/// lexicographic order, keep a representative when it pairs nontrivially
/// with everything kept so far. The identity (0,0) always comes first.
pub fn build_omega0(tw: &Tower) -> Vec<CosetRep> {
    let q = tw.o2.fq.q as u16;
    let mut out: Vec<CosetRep> = Vec::new();
    for u in 0..q {
        for v in 0..q {
            let cand = CosetRep { u, v };
            if out.iter().all(|&o| coset_pairing(tw, cand, o) != 0) {
                out.push(cand);
            }
        }
    }
    out
}

/// All residue-torus elements embed(g0^j), j in 0..q^4-1.
pub fn torus_res_elements(tw: &Tower) -> Vec<M4> {
    let ord = (tw.o2.fq.q as u64).pow(4) as u32 - 1;
    let mut out = Vec::with_capacity(ord as usize);
    let mut cur = [1u16, 0, 0, 0];
    for _ in 0..ord {
        out.push(embed4_res(tw, cur));
        cur = tw.q4_mul(cur, tw.q4_g0);
    }
    out
}

/// Matrix-level double-coset equality by scanning the residue torus. Both T
/// and P-cosets of T are unions of reduction fibers, so the residue level
/// decides equality over o2.
pub fn same_double_coset_brute(tw: &Tower, d: &M4, e: &M4, torus: &[M4]) -> Result<bool> {
    let fq = &tw.o2.fq;
    let di = m4_inv_field(fq, d)?;
    for t in torus {
        let ti = m4_inv_field(fq, t)?;
        let p = m4_mul(fq, &m4_mul(fq, &di, &ti), e);
        if in_parabolic_res(fq, &p) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Count of residue-torus elements conjugated into the residue parabolic by
/// a representative; together with the reduction-kernel factor q^12 this is
/// the order of delta^{-1} T delta intersected with P.
pub fn torus_slice_count(tw: &Tower, delta_res: &M4) -> Result<u32> {
    let fq = &tw.o2.fq;
    let di = m4_inv_field(fq, delta_res)?;
    let mut n = 0u32;
    for t in torus_res_elements(tw) {
        let c = m4_mul(fq, &m4_mul(fq, &di, &t), delta_res);
        if in_parabolic_res(fq, &c) {
            n += 1;
        }
    }
    Ok(n)
}

// ---- Grassmannian oracle. ----

/// Orbits of the residue torus on 2-planes in F_q^4, with the plane of a
/// representative A being the span of its first two columns.
pub struct GrassmannOracle {
    /// Canonical (echelonized) plane keys, sorted.
    pub planes: Vec<u64>,
    /// Orbit index per plane, aligned with `planes`.
    orbit_of: HashMap<u64, u32>,
    pub orbit_sizes: Vec<u32>,
}

fn pack_vec(q: u32, v: [u16; 4]) -> u32 {
    ((v[3] as u32 * q + v[2] as u32) * q + v[1] as u32) * q + v[0] as u32
}

/// Canonical reduced row-echelon basis of span{x, y}, packed.
fn plane_key(fq: &Fq, x: [u16; 4], y: [u16; 4]) -> u64 {
    let mut rows = [x, y];
    // Gaussian elimination on 2 rows of length 4.
    let mut pivot_cols = [usize::MAX; 2];
    let mut r = 0;
    for c in 0..4 {
        if r >= 2 {
            break;
        }
        let mut piv = None;
        for i in r..2 {
            if rows[i][c] != 0 {
                piv = Some(i);
                break;
            }
        }
        if let Some(p) = piv {
            rows.swap(r, p);
            let inv = fq.inv(rows[r][c]);
            for j in 0..4 {
                rows[r][j] = fq.mul(inv, rows[r][j]);
            }
            for i in 0..2 {
                if i != r && rows[i][c] != 0 {
                    let f = rows[i][c];
                    for j in 0..4 {
                        rows[i][j] = fq.sub(rows[i][j], fq.mul(f, rows[r][j]));
                    }
                }
            }
            pivot_cols[r] = c;
            r += 1;
        }
    }
    assert_eq!(r, 2, "vectors must be independent");
    let q = fq.q;
    pack_vec(q, rows[0]) as u64 * (q as u64).pow(4) + pack_vec(q, rows[1]) as u64
}

fn unpack_plane(fq: &Fq, key: u64) -> ([u16; 4], [u16; 4]) {
    let base = (fq.q as u64).pow(4);
    let hi = (key / base) as u32;
    let lo = (key % base) as u32;
    let unp = |mut v: u32| -> [u16; 4] {
        let q = fq.q;
        let c0 = (v % q) as u16;
        v /= q;
        let c1 = (v % q) as u16;
        v /= q;
        let c2 = (v % q) as u16;
        v /= q;
        [c0, c1, c2, (v % q) as u16]
    };
    (unp(hi), unp(lo))
}

impl GrassmannOracle {
    pub fn build(tw: &Tower) -> Result<GrassmannOracle> {
        let fq = &tw.o2.fq;
        let q = fq.q;
        if q > 13 {
            return Err(Error::Budget("Grassmannian oracle capped at q <= 13".into()));
        }
        let n4 = q.pow(4);
        // Enumerate all planes.
        let mut keys: Vec<u64> = Vec::new();
        {
            let mut seen = std::collections::HashSet::new();
            for xi in 1..n4 {
                let x = tw.q4_unpack(xi);
                for yi in (xi + 1)..n4 {
                    let y = tw.q4_unpack(yi);
                    // Skip dependent pairs: y in span{x}.
                    let mut dependent = false;
                    for c in 1..q as u16 {
                        let cx = [fq.mul(c, x[0]), fq.mul(c, x[1]), fq.mul(c, x[2]), fq.mul(c, x[3])];
                        if cx == y {
                            dependent = true;
                            break;
                        }
                    }
                    if dependent {
                        continue;
                    }
                    let k = plane_key(fq, x, y);
                    if seen.insert(k) {
                        keys.push(k);
                    }
                }
            }
        }
        keys.sort_unstable();
        let expected = {
            let q = q as u64;
            (q * q + 1) * (q * q + q + 1)
        };
        if keys.len() as u64 != expected {
            return Err(Error::Check(format!(
                "Grassmannian has {} planes, expected {expected}",
                keys.len()
            )));
        }
        // Orbits of the cyclic residue torus: cycles of the permutation
        // induced by a generator.
        let g = embed4_res(tw, tw.q4_g0);
        let apply = |key: u64| -> u64 {
            let (x, y) = unpack_plane(fq, key);
            let mv = |v: [u16; 4]| -> [u16; 4] {
                let mut out = [0u16; 4];
                for i in 0..4 {
                    let mut acc = 0u16;
                    for j in 0..4 {
                        acc = fq.add(acc, fq.mul(g[i * 4 + j], v[j]));
                    }
                    out[i] = acc;
                }
                out
            };
            plane_key(fq, mv(x), mv(y))
        };
        let mut orbit_of: HashMap<u64, u32> = HashMap::new();
        let mut orbit_sizes: Vec<u32> = Vec::new();
        for &k in &keys {
            if orbit_of.contains_key(&k) {
                continue;
            }
            let idx = orbit_sizes.len() as u32;
            let mut size = 0u32;
            let mut cur = k;
            loop {
                let prev = orbit_of.insert(cur, idx);
                if prev.is_some() {
                    break;
                }
                size += 1;
                cur = apply(cur);
            }
            orbit_sizes.push(size);
        }
        Ok(GrassmannOracle { planes: keys, orbit_of, orbit_sizes })
    }

    pub fn orbit_count(&self) -> usize {
        self.orbit_sizes.len()
    }

    pub fn orbit_of_key(&self, key: u64) -> u32 {
        self.orbit_of[&key]
    }

    /// Orbit of the plane of A_{u,v}: span{1, beta^2 + u*beta + v*beta^3}.
    pub fn orbit_of_auv(&self, tw: &Tower, rep: CosetRep) -> u32 {
        let fq = &tw.o2.fq;
        self.orbit_of_key(plane_key(fq, [1, 0, 0, 0], [0, 1, rep.u, rep.v]))
    }

    /// Orbit of the plane of A_w: span{1, beta + w*beta^3}.
    pub fn orbit_of_aw(&self, tw: &Tower, w: FqEl) -> u32 {
        let fq = &tw.o2.fq;
        self.orbit_of_key(plane_key(fq, [1, 0, 0, 0], [0, 0, 1, w]))
    }
}

// ---- Moebius oracle. ----

/// Orbits of GL2(F_q) acting on F_{q^4} - F_q by fractional-linear maps
/// y -> (p*y + r) / (s*y + t). Orbits correspond to torus orbits on planes
/// via span{1, y} and give an independent count and size profile.
pub struct MoebiusOracle {
    /// Orbit index for each packed element of F_{q^4}; u32::MAX on F_q.
    orbit_of: Vec<u32>,
    pub orbit_sizes: Vec<u32>,
}

impl MoebiusOracle {
    pub fn build(tw: &Tower) -> Result<MoebiusOracle> {
        let fq = &tw.o2.fq;
        let q = fq.q;
        if q > 13 {
            return Err(Error::Budget("Moebius oracle capped at q <= 13".into()));
        }
        let n4 = q.pow(4) as usize;
        let in_fq = |v: u32| -> bool {
            let c = tw.q4_unpack(v);
            c[1] == 0 && c[2] == 0 && c[3] == 0
        };
        let apply = |gid: u32, y: [u16; 4]| -> [u16; 4] {
            let m = unpack2(fq, gid);
            let scl = |c: u16| [c, 0, 0, 0];
            let num = tw.q4_add(tw.q4_mul(scl(m[0]), y), scl(m[1]));
            let den = tw.q4_add(tw.q4_mul(scl(m[2]), y), scl(m[3]));
            tw.q4_mul(num, tw.q4_inv(den))
        };
        let gens = gl2_fq_elements(fq);
        let mut orbit_of = vec![u32::MAX; n4];
        let mut orbit_sizes = Vec::new();
        for start in 0..n4 as u32 {
            if in_fq(start) || orbit_of[start as usize] != u32::MAX {
                continue;
            }
            let idx = orbit_sizes.len() as u32;
            let mut queue = vec![start];
            orbit_of[start as usize] = idx;
            let mut size = 1u32;
            while let Some(v) = queue.pop() {
                let y = tw.q4_unpack(v);
                for &g in &gens {
                    let z = apply(g, y);
                    let zi = tw.q4_pack(z);
                    debug_assert!(!in_fq(zi), "Moebius action must preserve the complement of F_q");
                    if orbit_of[zi as usize] == u32::MAX {
                        orbit_of[zi as usize] = idx;
                        size += 1;
                        queue.push(zi);
                    }
                }
            }
            orbit_sizes.push(size);
        }
        Ok(MoebiusOracle { orbit_of, orbit_sizes })
    }

    pub fn orbit_count(&self) -> usize {
        self.orbit_sizes.len()
    }

    pub fn orbit_of(&self, packed: u32) -> u32 {
        self.orbit_of[packed as usize]
    }
}

// ---- Residue coset families for GL2. ----

/// gamma(y, z) = [[1, y], [0, z]], a transversal of the embedded quadratic
/// torus F_{q^2}^x in GL2(F_q); scanned in (y, z) lexicographic order.
pub fn gamma_all(fq: &Fq) -> Vec<M2> {
    let mut out = Vec::new();
    for y in 0..fq.q as u16 {
        for z in 1..fq.q as u16 {
            out.push([1, y, 0, z]);
        }
    }
    out
}

pub fn gamma1(fq: &Fq) -> Vec<M2> {
    (0..fq.q as u16).map(|y| [1, y, 0, 1]).collect()
}

pub fn gamma2(fq: &Fq) -> Vec<M2> {
    (1..fq.q as u16).map(|z| [1, 0, 0, z]).collect()
}

/// Scalar invariant separating the double cosets
/// F_{q^2}^x gamma F_{q^2}^x: (y^2 + 2a*y*(z-1) + (1 + z^2)(a^2 - b^2 alpha)) / z.
pub fn gamma_invariant(tw: &Tower, y: FqEl, z: FqEl) -> FqEl {
    let f = &tw.o2.fq;
    let num = {
        let t1 = f.mul(y, y);
        let t2 = f.mul(tw.s_fq, f.mul(y, f.sub(z, 1)));
        let t3 = f.mul(f.add(1, f.mul(z, z)), tw.n_fq);
        f.add(f.add(t1, t2), t3)
    };
    f.mul(num, f.inv(z))
}

/// First-wins transversal of the double cosets of the embedded quadratic
/// torus, deduplicated by `gamma_invariant`.
pub fn gamma0(tw: &Tower) -> Vec<M2> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for g in gamma_all(&tw.o2.fq) {
        let inv = gamma_invariant(tw, g[1], g[3]);
        if seen.insert(inv) {
            out.push(g);
        }
    }
    out
}

/// Brute partition of `gamma_all` into double cosets of the embedded
/// quadratic torus, for cross-validation; returns the partition as a class
/// index per gamma, first-wins numbering.
pub fn gamma_double_coset_partition_brute(tw: &Tower) -> Vec<u32> {
    let fq = &tw.o2.fq;
    let gammas = gamma_all(fq);
    // All residue-torus elements as matrices.
    let torus: Vec<M2> = {
        let q = fq.q as u16;
        let mut v = Vec::new();
        for c0 in 0..q {
            for c1 in 0..q {
                if (c0, c1) != (0, 0) {
                    v.push(embed2_res(tw, c0, c1));
                }
            }
        }
        v
    };
    let same = |x: M2, y: M2| -> bool {
        for t in &torus {
            for s in &torus {
                if m2_mul(fq, m2_mul(fq, *t, x), *s) == y {
                    return true;
                }
            }
        }
        false
    };
    let mut class = vec![u32::MAX; gammas.len()];
    let mut next = 0u32;
    for i in 0..gammas.len() {
        if class[i] != u32::MAX {
            continue;
        }
        class[i] = next;
        for j in (i + 1)..gammas.len() {
            if class[j] == u32::MAX && same(gammas[i], gammas[j]) {
                class[j] = next;
            }
        }
        next += 1;
    }
    class
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{m2_inv, m4_id, pack2};
    use crate::tower::RingFlavor;

    fn tower() -> Tower {
        Tower::build(Fq::new(3, 1).unwrap(), RingFlavor::EqualChar).unwrap()
    }

    #[test]
    fn a_uv_inverse_is_a_minus_u_minus_v() {
        let tw = tower();
        let fq = &tw.o2.fq;
        for u in 0..3u16 {
            for v in 0..3u16 {
                let a = a_uv_res(fq, CosetRep { u, v });
                let b = a_uv_res(fq, CosetRep { u: fq.neg(u), v: fq.neg(v) });
                assert_eq!(m4_mul(fq, &a, &b), m4_id(fq));
                // And over o2.
                let ao = a_uv_o2(&tw, CosetRep { u, v });
                let bo = a_uv_o2(&tw, CosetRep { u: fq.neg(u), v: fq.neg(v) });
                assert_eq!(m4_mul(&tw.o2, &ao, &bo), m4_id(&tw.o2));
            }
        }
    }

    #[test]
    fn pairing_is_antisymmetric() {
        let tw = tower();
        let fq = &tw.o2.fq;
        for a in 0..9u16 {
            for b in 0..9u16 {
                let d = CosetRep { u: a % 3, v: a / 3 };
                let e = CosetRep { u: b % 3, v: b / 3 };
                let c1 = coset_pairing(&tw, d, e);
                let c2 = coset_pairing(&tw, e, d);
                assert_eq!(c1, fq.neg(c2));
            }
        }
    }

    #[test]
    fn pairing_vanishing_matches_matrix_level_brute_force() {
        let tw = tower();
        let fq = &tw.o2.fq;
        let torus = torus_res_elements(&tw);
        assert_eq!(torus.len(), 80);
        for a in 0..9u16 {
            for b in 0..9u16 {
                let d = CosetRep { u: a % 3, v: a / 3 };
                let e = CosetRep { u: b % 3, v: b / 3 };
                let same =
                    same_double_coset_brute(&tw, &a_uv_res(fq, d), &a_uv_res(fq, e), &torus)
                        .unwrap();
                assert_eq!(
                    same,
                    coset_pairing(&tw, d, e) == 0,
                    "pairing criterion disagrees with brute force at {d:?} {e:?}"
                );
            }
        }
    }

    #[test]
    fn omega0_is_a_transversal() {
        let tw = tower();
        let om = build_omega0(&tw);
        assert_eq!(om.len(), 4);
        assert_eq!(om[0], CosetRep::identity());
        // Every (u,v) pairs to zero with exactly one member.
        for a in 0..9u16 {
            let d = CosetRep { u: a % 3, v: a / 3 };
            let hits = om.iter().filter(|&&o| coset_pairing(&tw, d, o) == 0).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn grassmannian_orbits_certify_the_transversal() {
        let tw = tower();
        let gr = GrassmannOracle::build(&tw).unwrap();
        assert_eq!(gr.planes.len(), 130);
        assert_eq!(gr.orbit_count(), 4);
        let mut sizes = gr.orbit_sizes.clone();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![10, 40, 40, 40]);
        // Omega0 hits each orbit exactly once; the identity rep lands in the
        // small orbit.
        let om = build_omega0(&tw);
        let mut hit: Vec<u32> = om.iter().map(|&o| gr.orbit_of_auv(&tw, o)).collect();
        assert_eq!(hit[0], gr.orbit_of_key(plane_key(&tw.o2.fq, [1, 0, 0, 0], [0, 1, 0, 0])));
        assert_eq!(gr.orbit_sizes[hit[0] as usize], 10);
        hit.sort_unstable();
        hit.dedup();
        assert_eq!(hit.len(), 4);
        // Orbit equality agrees with the pairing on all pairs.
        for a in 0..9u16 {
            for b in 0..9u16 {
                let d = CosetRep { u: a % 3, v: a / 3 };
                let e = CosetRep { u: b % 3, v: b / 3 };
                assert_eq!(
                    gr.orbit_of_auv(&tw, d) == gr.orbit_of_auv(&tw, e),
                    coset_pairing(&tw, d, e) == 0
                );
            }
        }
        // The A_w planes are covered by the same orbit set.
        for w in 0..3u16 {
            let o = gr.orbit_of_aw(&tw, w);
            assert!(gr.orbit_sizes[o as usize] == 40 || gr.orbit_sizes[o as usize] == 10);
        }
    }

    #[test]
    fn moebius_orbits_match_grassmannian_orbits() {
        let tw = tower();
        let mo = MoebiusOracle::build(&tw).unwrap();
        assert_eq!(mo.orbit_count(), 4);
        let mut sizes = mo.orbit_sizes.clone();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![6, 24, 24, 24]);
        // span{1, y} induces a well-defined bijection between Moebius orbits
        // and plane orbits.
        let gr = GrassmannOracle::build(&tw).unwrap();
        let fq = &tw.o2.fq;
        let mut assoc: HashMap<u32, u32> = HashMap::new();
        for v in 1..81u32 {
            let y = tw.q4_unpack(v);
            if y[1] == 0 && y[2] == 0 && y[3] == 0 {
                continue;
            }
            let plane = gr.orbit_of_key(plane_key(fq, [1, 0, 0, 0], y));
            let m = mo.orbit_of(v);
            if let Some(&prev) = assoc.get(&m) {
                assert_eq!(prev, plane);
            } else {
                assert!(!assoc.values().any(|&p| p == plane));
                assoc.insert(m, plane);
            }
        }
        assert_eq!(assoc.len(), 4);
    }

    #[test]
    fn slice_counts_match_the_stabilizer_orders() {
        let tw = tower();
        let fq = &tw.o2.fq;
        let om = build_omega0(&tw);
        for (i, &rep) in om.iter().enumerate() {
            let n = torus_slice_count(&tw, &a_uv_res(fq, rep)).unwrap();
            if i == 0 {
                assert_eq!(n, 8); // q^2 - 1
            } else {
                assert_eq!(n, 2); // q - 1
            }
        }
    }

    #[test]
    fn gamma_is_a_left_transversal_of_the_quad_torus() {
        let tw = tower();
        let fq = &tw.o2.fq;
        let gammas = gamma_all(fq);
        assert_eq!(gammas.len(), 6);
        let mut seen = std::collections::HashSet::new();
        for c0 in 0..3u16 {
            for c1 in 0..3u16 {
                if (c0, c1) == (0, 0) {
                    continue;
                }
                let t = embed2_res(&tw, c0, c1);
                for g in &gammas {
                    let m = m2_mul(fq, t, *g);
                    assert!(seen.insert(pack2(fq, m)));
                }
            }
        }
        assert_eq!(seen.len(), 48); // |GL2(F_3)|
    }

    #[test]
    fn gamma_factorizes_through_gamma1_times_gamma2() {
        let tw = tower();
        let fq = &tw.o2.fq;
        let mut products = std::collections::HashSet::new();
        for g1 in gamma1(fq) {
            for g2 in gamma2(fq) {
                products.insert(pack2(fq, m2_mul(fq, g1, g2)));
            }
        }
        let all: std::collections::HashSet<u32> =
            gamma_all(fq).into_iter().map(|g| pack2(fq, g)).collect();
        assert_eq!(products, all);
    }

    #[test]
    fn gamma_invariant_separates_exactly_the_double_cosets() {
        for flavor in [RingFlavor::EqualChar, RingFlavor::MixedChar] {
            let tw = Tower::build(Fq::new(3, 1).unwrap(), flavor).unwrap();
            let brute = gamma_double_coset_partition_brute(&tw);
            let gammas = gamma_all(&tw.o2.fq);
            for i in 0..gammas.len() {
                for j in 0..gammas.len() {
                    let same_brute = brute[i] == brute[j];
                    let same_inv = gamma_invariant(&tw, gammas[i][1], gammas[i][3])
                        == gamma_invariant(&tw, gammas[j][1], gammas[j][3]);
                    assert_eq!(same_brute, same_inv, "at {i} {j}");
                }
            }
            // gamma0 therefore is a transversal.
            let g0 = gamma0(&tw);
            let classes: std::collections::HashSet<u32> = brute.iter().copied().collect();
            assert_eq!(g0.len(), classes.len());
        }
    }

    #[test]
    fn identity_rep_matrices_are_consistent() {
        let tw = tower();
        let fq = &tw.o2.fq;
        assert_eq!(a_uv_res(fq, CosetRep::identity()), m4_id(fq));
        // A_w is invertible and not in the parabolic for any w.
        for w in 0..3u16 {
            let m = a_w_res(fq, w);
            assert!(m4_inv_field(fq, &m).is_ok());
            assert!(!in_parabolic_res(fq, &m));
        }
        let _ = m2_inv(fq, [1, 0, 0, 1]).unwrap();
    }
}
