//! Character data of a strongly cuspidal representation of GL4 over a
//! length-two local ring, and exact formulas for the character of each
//! double-coset piece of its degenerate Whittaker space.
//!
//! The datum is a residue parameter x generating the quartic extension plus a
//! Teichmueller exponent c; together they determine a character theta of the
//! quartic unit group, its extension phi~ to the inertia subgroup T of GL4,
//! and per-coset invariants L_delta and B_delta. The piece at the identity
//! coset is induced from the quadratic-unit subgroup of GL2 and certified
//! against three region formulas; the pieces at nontrivial cosets are
//! supported on scalar-residue classes and given by an explicit exponential
//! sum over GL2 of the residue field. Every closed form here is exercised
//! against a slower independent computation, either in the tests of this
//! module or by the full Mackey-theoretic oracle.

use crate::classfn::{induce_from, ClassFunction};
use crate::cosets::{a_uv_o2, a_uv_res, CosetRep};
use crate::error::{Error, Result};
use crate::field::FqEl;
use crate::groups::{
    col0_4, embed2_res, embed4_o2, embed4_res, gl2_fq_elements, gl2_fq_order, m2_add, m2_id,
    m2_inv, m2_is_invertible, m2_lift, m2_mul, m2_reduce, m2_scale, m2_sub, m2_tr, m4_from_blocks,
    m4_id, m4_inv_field, m4_inv_o2, m4_mul, m4_reduce, normalizer_of_quad_units, pack2, unpack2,
    ConjClasses, Gl2Subgroup, M2, M4,
};
use crate::num::{round_int, unit_root, Cx, ZERO};
use crate::tower::{O2El, Q4, Tower, O4};
use std::collections::HashMap;

/// Entrywise pi-part of k - I for k in the principal congruence kernel of
/// GL4(o2); the result is a residue matrix.
fn k1_log4(tw: &Tower, k: &M4) -> Result<M4> {
    let r = &tw.o2;
    let idm = m4_id(r);
    let mut out = [0u16; 16];
    for i in 0..16 {
        let d = r.sub(k[i], idm[i]);
        if r.reduce(d) != 0 {
            return Err(Error::Check("matrix is not in the congruence kernel of GL4".into()));
        }
        out[i] = r.pi_part(d);
    }
    Ok(out)
}

/// Entrywise pi-part of k - I for k in the congruence kernel of GL2(o2).
fn k1_log2(tw: &Tower, k: M2) -> Result<M2> {
    let r = &tw.o2;
    let idm = m2_id(r);
    let mut out = [0u16; 4];
    for i in 0..4 {
        let d = r.sub(k[i], idm[i]);
        if r.reduce(d) != 0 {
            return Err(Error::Check("matrix is not in the congruence kernel of GL2".into()));
        }
        out[i] = r.pi_part(d);
    }
    Ok(out)
}

/// tr(a*b) for 4x4 residue matrices without forming the product.
fn trace_pair4(tw: &Tower, a: &M4, b: &M4) -> FqEl {
    let f = &tw.o2.fq;
    let mut acc = 0u16;
    for i in 0..4 {
        for j in 0..4 {
            acc = f.add(acc, f.mul(a[4 * i + j], b[4 * j + i]));
        }
    }
    acc
}

/// Block-diagonal embedding of a pair of GL2 elements into GL4.
pub fn diag4(a: M2, d: M2) -> M4 {
    m4_from_blocks(a, [0; 4], [0; 4], d)
}

/// I + pi * m over o2; the pi-part of m is immaterial since pi^2 = 0.
fn one_plus_pi2(tw: &Tower, m: M2) -> M2 {
    let r = &tw.o2;
    let idm = m2_id(r);
    let mut out = [0u16; 4];
    for i in 0..4 {
        out[i] = r.add(idm[i], r.pi_mul(m[i]));
    }
    out
}

/// The character datum: a residue parameter x generating the quartic field
/// extension and the Teichmueller exponent c, with cached residue blocks of
/// the 4x4 multiplication matrix of x.
#[derive(Debug, Clone)]
pub struct CuspidalDatum {
    /// Coordinates of x in the basis {1, beta^2, beta, beta^3}.
    pub x: Q4,
    /// theta on the Teichmueller generator t is the (q^4-1)-th root of unity
    /// with exponent c.
    pub c: u32,
    /// Multiplication matrix of x over the residue field.
    pub emb_res: M4,
    /// Upper-left block; multiplication by the even part of x.
    pub x1: M2,
    /// Upper-right block.
    pub x2: M2,
    /// Lower-left block; multiplication by the odd part of x.
    pub x3: M2,
    /// 2 * x1, the conjugacy invariant attached to the identity coset.
    pub two_x1: M2,
    /// Coset invariant a1^2 - a2 a3 - 2a a3^2.
    pub inv_x: FqEl,
    /// Coset invariant a2^2 + a3^2 (a^2 - b^2 alpha) + 2a a2 a3; the
    /// determinant of x3, never zero for a generating x.
    pub inv_y: FqEl,
}

impl CuspidalDatum {
    /// Validates that x generates the quartic extension, which for a basis
    /// {1, beta^2, beta, beta^3} means the odd coordinates are not both zero.
    pub fn new(tw: &Tower, x: Q4, c: u32) -> Result<CuspidalDatum> {
        let f = &tw.o2.fq;
        if x[2] == 0 && x[3] == 0 {
            return Err(Error::InvalidParam(
                "parameter lies in the quadratic subfield; it must generate the quartic extension"
                    .into(),
            ));
        }
        for &coord in &x {
            if coord as u32 >= f.q {
                return Err(Error::InvalidParam("parameter coordinate outside the residue field".into()));
            }
        }
        let ord = (f.q as u64).pow(4) - 1;
        if c as u64 >= ord {
            return Err(Error::InvalidParam(format!("twist exponent must be below {ord}")));
        }
        let emb_res = embed4_res(tw, x);
        let (x1, x2, x3, x1_again) = crate::groups::m4_blocks(&emb_res);
        if x1 != embed2_res(tw, x[0], x[1]) || x3 != embed2_res(tw, x[2], x[3]) || x1 != x1_again {
            return Err(Error::Check("multiplication matrix of x has unexpected block structure".into()));
        }
        let s = tw.s_fq;
        let n = tw.n_fq;
        let inv_x = f.sub(f.sub(f.mul(x[1], x[1]), f.mul(x[2], x[3])), f.mul(s, f.mul(x[3], x[3])));
        let inv_y = f.add(
            f.add(f.mul(x[2], x[2]), f.mul(n, f.mul(x[3], x[3]))),
            f.mul(s, f.mul(x[2], x[3])),
        );
        if inv_y == 0 {
            return Err(Error::Check("determinant invariant of the odd part vanished".into()));
        }
        Ok(CuspidalDatum {
            x,
            c,
            emb_res,
            x1,
            x2,
            x3,
            two_x1: m2_add(f, x1, x1),
            inv_x,
            inv_y,
        })
    }

    /// theta on a unit u of the quartic ring: split u = t^j * (1 + pi e)
    /// along the Teichmueller section, send t^j to the c j-th power of a
    /// principal root of unity and the kernel part to the additive character
    /// of the residue trace form at x.
    pub fn theta(&self, tw: &Tower, u: O4) -> Result<Cx> {
        if !tw.o4_is_unit(u) {
            return Err(Error::NotUnit);
        }
        let r = &tw.o2;
        let ord = (r.fq.q as u64).pow(4) - 1;
        let j = tw.q4_dlog(tw.o4_reduce(u)) as u64;
        let v = tw.o4_mul(u, tw.teich_pow(((ord - j) % ord) as u32));
        debug_assert_eq!(tw.o4_reduce(v), [1, 0, 0, 0]);
        let e = [r.pi_part(r.sub(v[0], 1)), r.pi_part(v[1]), r.pi_part(v[2]), r.pi_part(v[3])];
        let tr = tw.q4_trace(tw.q4_mul(self.x, e));
        Ok(unit_root(ord, (self.c as u64 * j % ord) as i64) * r.psi0_res(tr))
    }

    /// Central character: theta restricted to the units of the base ring.
    pub fn omega(&self, tw: &Tower, z: O2El) -> Result<Cx> {
        self.theta(tw, [z, 0, 0, 0])
    }

    /// The character of the congruence kernel of GL4 attached to x.
    pub fn phi_x(&self, tw: &Tower, k: &M4) -> Result<Cx> {
        let abar = k1_log4(tw, k)?;
        Ok(tw.o2.psi0_res(trace_pair4(tw, &self.emb_res, &abar)))
    }

    /// The extension of phi_x to the inertia subgroup T, the full preimage of
    /// the embedded quartic unit group: factor w = emb(u) * k with k in the
    /// congruence kernel and multiply theta(u) by phi_x(k). Well defined
    /// because theta and phi_x agree on emb(1 + pi e).
    pub fn phi_tilde(&self, tw: &Tower, w: &M4) -> Result<Cx> {
        let wbar = m4_reduce(tw, w);
        let cbar = col0_4(&wbar);
        if cbar == [0; 4] || embed4_res(tw, cbar) != wbar {
            return Err(Error::Check("matrix is outside the inertia subgroup".into()));
        }
        let u = tw.o4_lift(cbar);
        let k = m4_mul(&tw.o2, &embed4_o2(tw, tw.o4_inv(u)?), w);
        Ok(self.theta(tw, u)? * self.phi_x(tw, &k)?)
    }

    /// phi~ transported by the coset representative: w -> phi~(d w d^{-1}).
    pub fn phi_tilde_conj(&self, tw: &Tower, rep: CosetRep, w: &M4) -> Result<Cx> {
        let r = &tw.o2;
        let d = a_uv_o2(tw, rep);
        let di = m4_inv_o2(tw, &d)?;
        self.phi_tilde(tw, &m4_mul(r, &m4_mul(r, &d, w), &di))
    }

    /// Lower-left block of the multiplication matrix of x conjugated by the
    /// coset representative: x1 U - U x1 + x3 - U x2 U.
    pub fn l_delta(&self, tw: &Tower, rep: CosetRep) -> M2 {
        let f = &tw.o2.fq;
        let u = rep.u_block();
        let comm = m2_sub(f, m2_mul(f, self.x1, u), m2_mul(f, u, self.x1));
        m2_sub(f, m2_add(f, comm, self.x3), m2_mul(f, u, m2_mul(f, self.x2, u)))
    }

    /// det L_delta in closed form: -u^2 X - uv(2a X + Y) - v^2(2a Y + X n) + Y
    /// where n is the norm constant of the quadratic layer.
    pub fn det_l_closed(&self, tw: &Tower, rep: CosetRep) -> FqEl {
        let f = &tw.o2.fq;
        let (x, y) = (self.inv_x, self.inv_y);
        let s = tw.s_fq;
        let n = tw.n_fq;
        let (u, v) = (rep.u, rep.v);
        let mut acc = f.neg(f.mul(f.mul(u, u), x));
        acc = f.sub(acc, f.mul(f.mul(u, v), f.add(f.mul(s, x), y)));
        acc = f.sub(acc, f.mul(f.mul(v, v), f.add(f.mul(s, y), f.mul(x, n))));
        f.add(acc, y)
    }

    /// All four blocks of the conjugated multiplication matrix; the lower
    /// left is l_delta, computed here by an independent matrix product.
    pub fn conjugated_blocks(&self, tw: &Tower, rep: CosetRep) -> Result<(M2, M2, M2, M2)> {
        let f = &tw.o2.fq;
        let d = a_uv_res(f, rep);
        let di = m4_inv_field(f, &d)?;
        Ok(crate::groups::m4_blocks(&m4_mul(f, &m4_mul(f, &di, &self.emb_res), &d)))
    }

    /// The invariant matrix of the coset piece: L (x1 + x2 U) L^{-1} + x1 - U x2.
    /// Defined when L_delta is invertible; at the identity coset it is 2 x1.
    pub fn b_delta(&self, tw: &Tower, rep: CosetRep) -> Result<M2> {
        let f = &tw.o2.fq;
        let l = self.l_delta(tw, rep);
        let li = m2_inv(f, l)?;
        let u = rep.u_block();
        let a = m2_add(f, self.x1, m2_mul(f, self.x2, u));
        let d = m2_sub(f, self.x1, m2_mul(f, u, self.x2));
        Ok(m2_add(f, m2_mul(f, l, m2_mul(f, a, li)), d))
    }

    /// Dimension of the coset piece in closed form: q(q-1) at the identity
    /// coset, q(q^2-1) at a nontrivial coset with invertible L, else zero.
    pub fn dim_delta(&self, tw: &Tower, rep: CosetRep) -> u64 {
        let q = tw.o2.fq.q as u64;
        if rep.is_identity() {
            q * (q - 1)
        } else if self.det_l_closed(tw, rep) != 0 {
            q * (q * q - 1)
        } else {
            0
        }
    }

    /// Dimension of the coset piece by direct count: pairs (g1, g2) with g1
    /// running over a transversal of S\GL2 of the residue field (S the
    /// embedded quadratic units at the identity coset, the scalars
    /// otherwise), g2 free in GL2, subject to g2 = L_delta g1.
    pub fn dim_delta_counted(&self, tw: &Tower, rep: CosetRep) -> Result<u64> {
        let f = &tw.o2.fq;
        let q = f.q as u16;
        let mut sub: Vec<M2> = Vec::new();
        if rep.is_identity() {
            for c0 in 0..q {
                for c1 in 0..q {
                    if (c0, c1) != (0, 0) {
                        sub.push(embed2_res(tw, c0, c1));
                    }
                }
            }
        } else {
            for z in 1..q {
                sub.push(m2_scale(f, z, m2_id(f)));
            }
        }
        let l = self.l_delta(tw, rep);
        let mut reps = 0u64;
        let mut count = 0u64;
        for &gid in &gl2_fq_elements(f) {
            let g = unpack2(f, gid);
            let canonical =
                sub.iter().map(|&s| pack2(f, m2_mul(f, s, g))).min().expect("nonempty subgroup");
            if canonical != gid {
                continue;
            }
            reps += 1;
            if m2_is_invertible(f, m2_mul(f, l, g)) {
                count += 1;
            }
        }
        if reps != gl2_fq_order(f.q as u64) / sub.len() as u64 {
            return Err(Error::Check("transversal size of the coset space is wrong".into()));
        }
        Ok(count)
    }

    /// Character of the coset piece on the congruence kernel of GL2, as a
    /// function of the residue matrix abar: an average of the additive
    /// character of tr(R B_delta R^{-1} abar) over R in GL2 of the residue
    /// field, weighted by 1/(q^2-1) at the identity coset and 1/(q-1)
    /// otherwise.
    pub fn theta_delta_on_j1(&self, tw: &Tower, rep: CosetRep, abar: M2) -> Result<Cx> {
        let f = &tw.o2.fq;
        let b = self.b_delta(tw, rep)?;
        let q = f.q as f64;
        let pref = if rep.is_identity() { 1.0 / (q * q - 1.0) } else { 1.0 / (q - 1.0) };
        let mut acc = ZERO;
        for &rid in &gl2_fq_elements(f) {
            let r = unpack2(f, rid);
            let ri = m2_inv(f, r)?;
            let conj_b = m2_mul(f, r, m2_mul(f, b, ri));
            acc += tw.o2.psi0_res(m2_tr(f, m2_mul(f, conj_b, abar)));
        }
        Ok(acc.scale(pref))
    }

    /// Full character of the coset piece as a class function on GL2(o2).
    ///
    /// At a nontrivial coset the piece vanishes off scalar-residue classes
    /// and on g = z(I + pi A) equals omega(z) times the kernel formula. At
    /// the identity coset the piece is induced from the quadratic-unit
    /// subgroup H via h -> phi~(diag(h, h)), then certified against the
    /// independent region formulas (vanishing off classes meeting H, the
    /// central twist on scalar-residue classes, and the normalizer average
    /// elsewhere); any mismatch is an error.
    pub fn theta_delta_class_function(
        &self,
        tw: &Tower,
        rep: CosetRep,
        cls: &ConjClasses,
    ) -> Result<ClassFunction> {
        if rep.is_identity() {
            return self.theta_identity_certified(tw, cls);
        }
        if self.det_l_closed(tw, rep) == 0 {
            return Ok(ClassFunction::zero(cls));
        }
        let r = &tw.o2;
        let mut values = Vec::with_capacity(cls.class_count());
        for &packed in &cls.reps {
            let g = unpack2(r, packed);
            let gbar = m2_reduce(tw, g);
            let scalar = gbar[1] == 0 && gbar[2] == 0 && gbar[0] == gbar[3] && gbar[0] != 0;
            if !scalar {
                values.push(ZERO);
                continue;
            }
            let z = r.lift(gbar[0]);
            let k = m2_scale(r, r.inv(z), g);
            let abar = k1_log2(tw, k)?;
            values.push(self.omega(tw, z)? * self.theta_delta_on_j1(tw, rep, abar)?);
        }
        Ok(ClassFunction { values })
    }

    /// Identity-coset piece: induction of h -> phi~(diag(h,h)) from the
    /// quadratic-unit subgroup H, certified against the region formulas.
    fn theta_identity_certified(&self, tw: &Tower, cls: &ConjClasses) -> Result<ClassFunction> {
        let r = &tw.o2;
        let f = &r.fq;
        let rep = CosetRep::identity();
        let h_elems = Gl2Subgroup::QuadUnitsTimesK1.elements(tw)?;
        let mut chi: HashMap<u32, Cx> = HashMap::with_capacity(h_elems.len());
        for &h in &h_elems {
            let hm = unpack2(r, h);
            chi.insert(h, self.phi_tilde(tw, &diag4(hm, hm))?);
        }
        let out = induce_from(cls, &h_elems, |h| chi[&h])?;

        // One representative inside H per class that meets H.
        let mut h_in_class: HashMap<u32, M2> = HashMap::new();
        for &h in &h_elems {
            h_in_class.entry(cls.class_id(h)).or_insert_with(|| unpack2(r, h));
        }
        let q = f.q as f64;
        let normalizer = normalizer_of_quad_units(tw);
        for k in 0..cls.class_count() {
            let got = out.values[k];
            let want = match h_in_class.get(&(k as u32)) {
                // Classes that do not meet H carry no induced character.
                None => ZERO,
                Some(&g) => {
                    let gbar = m2_reduce(tw, g);
                    let scalar = gbar[1] == 0 && gbar[2] == 0 && gbar[0] == gbar[3] && gbar[0] != 0;
                    if scalar {
                        // Central twist of the kernel formula.
                        let z = r.lift(gbar[0]);
                        let kk = m2_scale(r, r.inv(z), g);
                        let abar = k1_log2(tw, kk)?;
                        self.omega(tw, z)? * self.theta_delta_on_j1(tw, rep, abar)?
                    } else {
                        // Average of the diagonal character over the
                        // normalizer of H.
                        let mut acc = ZERO;
                        for &nid in &normalizer {
                            let nm = unpack2(r, nid);
                            let ni = m2_inv(r, nm)?;
                            let conj = m2_mul(r, ni, m2_mul(r, g, nm));
                            acc += self.phi_tilde(tw, &diag4(conj, conj))?;
                        }
                        acc.scale(1.0 / (q.powi(4) * (q * q - 1.0)))
                    }
                }
            };
            if (got - want).norm() > crate::num::INT_TOL {
                return Err(Error::Check(format!(
                    "identity-coset character disagrees with the region formula on class {k}"
                )));
            }
        }
        Ok(out)
    }

    // ---- Verification routines for the closed forms used above. They are
    // slower direct computations, exposed for the test suites and the
    // verifier checklist. ----

    /// Direct sum over X in pi M2(o2) of phi~^d([[I, S^-1 X R], [0, I]])
    /// conj(psi(X)); equals q^4 exactly when Sbar = Rbar L_delta and zero
    /// otherwise. Returns the sum and the criterion.
    pub fn kernel_x_sum(&self, tw: &Tower, rep: CosetRep, s: M2, r: M2) -> Result<(Cx, bool)> {
        let o = &tw.o2;
        let f = &o.fq;
        let si = m2_inv(o, s)?;
        let idm = m2_id(o);
        let mut acc = ZERO;
        let q4 = (f.q as u32).pow(4);
        for xid in 0..q4 {
            let xbar = unpack2(f, xid);
            let mut x = [0u16; 4];
            for i in 0..4 {
                x[i] = o.pi_mul(o.lift(xbar[i]));
            }
            let upper = m2_mul(o, m2_mul(o, si, x), r);
            let y = m4_from_blocks(idm, upper, [0; 4], idm);
            acc += self.phi_tilde_conj(tw, rep, &y)? * o.psi0(m2_tr(o, x)).conj();
        }
        let criterion = m2_reduce(tw, s) == m2_mul(f, m2_reduce(tw, r), self.l_delta(tw, rep));
        Ok((acc, criterion))
    }

    /// Direct sum over Q in M2(o2) of phi~^d([[I, pi(S^-1 A Q - S^-1 Q R^-1 A R)], [0, I]])
    /// with S = R lift(L_delta); the summand character is trivial so the sum
    /// is q^8.
    pub fn kernel_q_sum(&self, tw: &Tower, rep: CosetRep, r: M2, a: M2) -> Result<Cx> {
        let o = &tw.o2;
        let s = m2_mul(o, r, m2_lift(tw, self.l_delta(tw, rep)));
        let si = m2_inv(o, s)?;
        let ri = m2_inv(o, r)?;
        let sia = m2_mul(o, si, a);
        let riar = m2_mul(o, ri, m2_mul(o, a, r));
        let idm = m2_id(o);
        let total = (o.fq.q as u64).pow(8);
        let mut acc = ZERO;
        for qid in 0..total as u32 {
            let qm = unpack2(o, qid);
            let w = m2_sub(o, m2_mul(o, sia, qm), m2_mul(o, m2_mul(o, si, qm), riar));
            let mut upper = [0u16; 4];
            for i in 0..4 {
                upper[i] = o.pi_mul(w[i]);
            }
            let y = m4_from_blocks(idm, upper, [0; 4], idm);
            acc += self.phi_tilde_conj(tw, rep, &y)?;
        }
        Ok(acc)
    }

    /// Value of phi~^d on diag(I + pi S^-1 A S, I + pi R^-1 A R) with
    /// S = R lift(L_delta), paired with its closed form
    /// psi0(tr(Rbar B_delta Rbar^-1 Abar)).
    pub fn diagonal_value_pair(&self, tw: &Tower, rep: CosetRep, r: M2, a: M2) -> Result<(Cx, Cx)> {
        let o = &tw.o2;
        let f = &o.fq;
        let s = m2_mul(o, r, m2_lift(tw, self.l_delta(tw, rep)));
        let si = m2_inv(o, s)?;
        let ri = m2_inv(o, r)?;
        let top = m2_mul(o, si, m2_mul(o, a, s));
        let bot = m2_mul(o, ri, m2_mul(o, a, r));
        let y = diag4(one_plus_pi2(tw, top), one_plus_pi2(tw, bot));
        let direct = self.phi_tilde_conj(tw, rep, &y)?;
        let rbar = m2_reduce(tw, r);
        let ribar = m2_inv(f, rbar)?;
        let b = self.b_delta(tw, rep)?;
        let abar = m2_reduce(tw, a);
        let closed =
            tw.o2.psi0_res(m2_tr(f, m2_mul(f, m2_mul(f, rbar, m2_mul(f, b, ribar)), abar)));
        Ok((direct, closed))
    }

    /// Identity-coset pair sum: over Q in M2(o2) and X lifting the commutator
    /// residue Qbar R^-1bar gbar - gbar Qbar R^-1bar, of
    /// phi~([[I, W], [0, I]]) conj(psi(X g^-1)) with
    /// W = S^-1 Q + S^-1 g^-1 X R - S^-1 g^-1 Q R^-1 g R. For S, R in the
    /// normalizer of H with R S^-1 in H and g in H off the central region,
    /// the sum is q^12 when R S^-1 lies in the congruence kernel and zero
    /// otherwise; that support of density 1/(q^2-1) is exactly what produces
    /// the 1/(q^4(q^2-1)) prefactor of the normalizer-average formula.
    pub fn pair_sum_identity(&self, tw: &Tower, g: M2, s: M2, r: M2) -> Result<Cx> {
        let o = &tw.o2;
        let f = &o.fq;
        let si = m2_inv(o, s)?;
        let ri = m2_inv(o, r)?;
        let gi = m2_inv(o, g)?;
        let sigi = m2_mul(o, si, gi);
        let rigr = m2_mul(o, ri, m2_mul(o, g, r));
        let gbar = m2_reduce(tw, g);
        let ribar = m2_reduce(tw, ri);
        let idm = m2_id(o);
        let q4 = (f.q as u32).pow(4);
        let q8 = (f.q as u64).pow(8) as u32;
        let mut acc = ZERO;
        for qid in 0..q8 {
            let qm = unpack2(o, qid);
            let qpbar = m2_mul(f, m2_reduce(tw, qm), ribar);
            let xbar = m2_sub(f, m2_mul(f, qpbar, gbar), m2_mul(f, gbar, qpbar));
            let siq = m2_mul(o, si, qm);
            let tail = m2_mul(o, m2_mul(o, sigi, qm), rigr);
            for mid in 0..q4 {
                let mbar = unpack2(f, mid);
                let mut x = [0u16; 4];
                for i in 0..4 {
                    x[i] = o.add(o.lift(xbar[i]), o.pi_mul(o.lift(mbar[i])));
                }
                let w = m2_sub(o, m2_add(o, siq, m2_mul(o, m2_mul(o, sigi, x), r)), tail);
                let y = m4_from_blocks(idm, w, [0; 4], idm);
                acc += self.phi_x(tw, &y)? * o.psi0(m2_tr(o, m2_mul(o, x, gi))).conj();
            }
        }
        Ok(acc)
    }

    /// phi~ on diag(S^-1 g S, R^-1 g R) against phi~ on diag(R^-1 g R, R^-1 g R),
    /// for S, R normalizing H with S R^-1 in H; the two agree.
    pub fn diagonal_independence_pair(
        &self,
        tw: &Tower,
        g: M2,
        s: M2,
        r: M2,
    ) -> Result<(Cx, Cx)> {
        let o = &tw.o2;
        let si = m2_inv(o, s)?;
        let ri = m2_inv(o, r)?;
        let a = m2_mul(o, si, m2_mul(o, g, s));
        let d = m2_mul(o, ri, m2_mul(o, g, r));
        Ok((self.phi_tilde(tw, &diag4(a, d))?, self.phi_tilde(tw, &diag4(d, d))?))
    }

    /// The normalizer-average value of the identity-coset character at
    /// g in H off the central region.
    pub fn normalizer_average(&self, tw: &Tower, g: M2) -> Result<Cx> {
        let o = &tw.o2;
        let q = o.fq.q as f64;
        let mut acc = ZERO;
        for &nid in &normalizer_of_quad_units(tw) {
            let nm = unpack2(o, nid);
            let ni = m2_inv(o, nm)?;
            let conj = m2_mul(o, ni, m2_mul(o, g, nm));
            acc += self.phi_tilde(tw, &diag4(conj, conj))?;
        }
        Ok(acc.scale(1.0 / (q.powi(4) * (q * q - 1.0))))
    }
}

/// Summary of one coset piece.
#[derive(Debug, Clone)]
pub struct DeltaPiece {
    pub rep: CosetRep,
    pub dim: u64,
    pub theta: ClassFunction,
}

/// The assembled degenerate Whittaker character: per-coset dimensions and
/// class functions, their sum, and the central character on a generator-free
/// listing of the base units.
#[derive(Debug, Clone)]
pub struct WhittakerReport {
    pub q: u32,
    pub flavor: crate::tower::RingFlavor,
    pub x: Q4,
    pub c: u32,
    pub pieces: Vec<DeltaPiece>,
    pub total: ClassFunction,
    pub dim_total: u64,
}

/// Builds every coset piece over the given transversal, certifying that the
/// closed-form and counted dimensions agree, that each piece's character
/// evaluates to its dimension at the identity, and that the total dimension
/// is q^3(q-1).
pub fn assemble(
    tw: &Tower,
    datum: &CuspidalDatum,
    omega0: &[CosetRep],
    cls: &ConjClasses,
) -> Result<WhittakerReport> {
    let o = &tw.o2;
    let q = o.fq.q as u64;
    let id_packed = pack2(o, m2_id(o));
    let mut total = ClassFunction::zero(cls);
    let mut pieces = Vec::with_capacity(omega0.len());
    let mut dim_total = 0u64;
    for &rep in omega0 {
        let dim = datum.dim_delta(tw, rep);
        let counted = datum.dim_delta_counted(tw, rep)?;
        if dim != counted {
            return Err(Error::Check(format!(
                "dimension mismatch at coset ({}, {}): closed {dim}, counted {counted}",
                rep.u, rep.v
            )));
        }
        let theta = datum.theta_delta_class_function(tw, rep, cls)?;
        let at_one = round_int(theta.at(cls, id_packed))?;
        if at_one != dim as i64 {
            return Err(Error::Check(format!(
                "character of coset ({}, {}) evaluates to {at_one} at 1, expected {dim}",
                rep.u, rep.v
            )));
        }
        total = total.add(&theta);
        dim_total += dim;
        pieces.push(DeltaPiece { rep, dim, theta });
    }
    if dim_total != q * q * q * (q - 1) {
        return Err(Error::Check(format!("total dimension {dim_total} is not q^3(q-1)")));
    }
    Ok(WhittakerReport {
        q: o.fq.q,
        flavor: tw.params().flavor,
        x: datum.x,
        c: datum.c,
        pieces,
        total,
        dim_total,
    })
}

impl WhittakerReport {
    pub fn to_json(&self, cls: &ConjClasses) -> serde_json::Value {
        let piece_json: Vec<serde_json::Value> = self
            .pieces
            .iter()
            .map(|p| {
                serde_json::json!({
                    "u": p.rep.u,
                    "v": p.rep.v,
                    "dim": p.dim,
                    "theta": p.theta.values.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "q": self.q,
            "flavor": self.flavor,
            "x": self.x,
            "c": self.c,
            "dim_total": self.dim_total,
            "class_sizes": cls.sizes,
            "pieces": piece_json,
            "total": self.total.values.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
        })
    }
}
