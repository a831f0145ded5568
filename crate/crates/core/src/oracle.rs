//! Brute-force evaluator for the character of each coset piece, straight
//! from its definition: the piece is induced to the block parabolic P of GL4
//! from the subgroup H = d^{-1} T d ∩ P, where T is the inertia subgroup and
//! d the coset representative, and the degenerate Whittaker character at g
//! averages the induced character over the top-right block against the
//! standard additive character. Nothing here uses the closed forms of the
//! companion module; the only shared ingredients are ring arithmetic and the
//! extended character phi~ itself, so agreement between the two paths is a
//! genuine cross-check of every intermediate formula.
//!
//! The transversal of P/H is enumerated at the residue level: the reduction
//! kernel of P lies inside H, so cosets of H in P biject with cosets of the
//! residue image of H in the residue parabolic, and a coset keeps its
//! lexicographically minimal member. This is exhaustive and exact, at the
//! price of holding the full transversal in memory, which confines the
//! oracle to the smallest field.

use crate::cosets::{a_uv_o2, a_uv_res, CosetRep};
use crate::error::{Error, Result};
use crate::groups::{
    embed4_res, gl2_fq_elements, in_parabolic_o2, in_parabolic_res, m2_inv, m2_mul, m2_reduce,
    m2_tr, m4_from_blocks, m4_id, m4_inv_field, m4_inv_o2, m4_lift, m4_mul, m4_reduce, pack4_res,
    unpack2, M2, M4,
};
use crate::num::{Cx, ZERO};
use crate::tower::Tower;
use crate::whittaker::CuspidalDatum;
use rayon::prelude::*;
use std::sync::OnceLock;

/// Shared worker pool; WHITTAKER_THREADS bounds its size when set.
fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("WHITTAKER_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1)
        {
            builder = builder.num_threads(n);
        }
        builder.build().expect("worker pool construction cannot fail")
    })
}

/// Precomputed data for one coset representative: the residue image of H and
/// an exact transversal of P/H, stored both at residue level (for the fast
/// membership scan) and lifted (for exact evaluation).
pub struct MackeyOracle {
    pub rep: CosetRep,
    h_bar_packed: Vec<u64>,
    trans_res: Vec<M4>,
    trans_res_inv: Vec<M4>,
    trans_o2: Vec<M4>,
    trans_o2_inv: Vec<M4>,
    d_o2: M4,
    d_o2_inv: M4,
}

impl MackeyOracle {
    pub fn build(tw: &Tower, rep: CosetRep) -> Result<MackeyOracle> {
        let f = &tw.o2.fq;
        let q = f.q;
        if q != 3 {
            return Err(Error::Budget(format!(
                "exhaustive transversal enumeration is limited to q = 3, got q = {q}"
            )));
        }
        let d_res = a_uv_res(f, rep);
        let d_res_inv = m4_inv_field(f, &d_res)?;

        // Residue image of H: conjugates of embedded quartic units that land
        // in the residue parabolic.
        let mut h_bar: Vec<M4> = Vec::new();
        let mut h_bar_packed: Vec<u64> = Vec::new();
        for yid in 1..q.pow(4) {
            let y = tw.q4_unpack(yid);
            let m = m4_mul(f, &m4_mul(f, &d_res_inv, &embed4_res(tw, y)), &d_res);
            if in_parabolic_res(f, &m) {
                h_bar_packed.push(pack4_res(f, &m));
                h_bar.push(m);
            }
        }
        h_bar_packed.sort_unstable();
        let expected = if rep.is_identity() { (q * q - 1) as usize } else { (q - 1) as usize };
        if h_bar.len() != expected {
            return Err(Error::Check(format!(
                "residue image of H has {} elements, expected {expected}",
                h_bar.len()
            )));
        }

        // Transversal: keep each residue-parabolic element that is minimal in
        // its H-coset under the packed label.
        let gl2 = gl2_fq_elements(f);
        let mut trans_res = Vec::new();
        let mut trans_res_inv = Vec::new();
        let mut trans_o2 = Vec::new();
        let mut trans_o2_inv = Vec::new();
        for &sid in &gl2 {
            let s = unpack2(f, sid);
            for &rid in &gl2 {
                let r = unpack2(f, rid);
                for qid in 0..q.pow(4) {
                    let qm = unpack2(f, qid);
                    let gamma = m4_from_blocks(s, qm, [0; 4], r);
                    let label = pack4_res(f, &gamma);
                    let min = h_bar
                        .iter()
                        .map(|h| pack4_res(f, &m4_mul(f, &gamma, h)))
                        .min()
                        .expect("nonempty residue image");
                    if min != label {
                        continue;
                    }
                    trans_res_inv.push(m4_inv_field(f, &gamma)?);
                    let lifted = m4_lift(tw, &gamma);
                    trans_o2_inv.push(m4_inv_o2(tw, &lifted)?);
                    trans_res.push(gamma);
                    trans_o2.push(lifted);
                }
            }
        }
        let parabolic_order = (gl2.len() * gl2.len() * q.pow(4) as usize) as u64;
        if trans_res.len() as u64 != parabolic_order / h_bar.len() as u64 {
            return Err(Error::Check(format!(
                "transversal has {} cosets, expected {}",
                trans_res.len(),
                parabolic_order / h_bar.len() as u64
            )));
        }

        let d_o2 = a_uv_o2(tw, rep);
        let d_o2_inv = m4_inv_o2(tw, &d_o2)?;
        Ok(MackeyOracle {
            rep,
            h_bar_packed,
            trans_res,
            trans_res_inv,
            trans_o2,
            trans_o2_inv,
            d_o2,
            d_o2_inv,
        })
    }

    pub fn transversal_len(&self) -> usize {
        self.trans_res.len()
    }

    /// Indices of transversal members whose conjugate of the residue matrix
    /// lands in the residue image of H. Conjugation fixes central scalars, so
    /// those short-circuit to the full index range.
    fn survivors(&self, tw: &Tower, ybar: &M4) -> Vec<u32> {
        let f = &tw.o2.fq;
        let idm = m4_id(f);
        let central = (0..16).all(|i| {
            if i % 5 == 0 { ybar[i] == ybar[0] } else { ybar[i] == 0 }
        }) && ybar[0] != 0;
        if central {
            let packed = pack4_res(f, ybar);
            debug_assert!(self.h_bar_packed.binary_search(&packed).is_ok());
            let _ = idm;
            return (0..self.trans_res.len() as u32).collect();
        }
        let mut out = Vec::new();
        for i in 0..self.trans_res.len() {
            let m = m4_mul(f, &m4_mul(f, &self.trans_res_inv[i], ybar), &self.trans_res[i]);
            if self.h_bar_packed.binary_search(&pack4_res(f, &m)).is_ok() {
                out.push(i as u32);
            }
        }
        out
    }

    /// Character of the induced representation of P at y, by definition:
    /// sum of phi~(d (gamma^-1 y gamma) d^-1) over transversal members gamma
    /// whose conjugate lands in H.
    pub fn induced_character(&self, tw: &Tower, datum: &CuspidalDatum, y: &M4) -> Result<Cx> {
        if !in_parabolic_o2(tw, y) {
            return Err(Error::InvalidParam("induced character is a function on P".into()));
        }
        let o = &tw.o2;
        let ybar = m4_reduce(tw, y);
        let mut acc = ZERO;
        for &i in &self.survivors(tw, &ybar) {
            let i = i as usize;
            let w = m4_mul(o, &m4_mul(o, &self.trans_o2_inv[i], y), &self.trans_o2[i]);
            let t = m4_mul(o, &m4_mul(o, &self.d_o2, &w), &self.d_o2_inv);
            acc += datum.phi_tilde(tw, &t)?;
        }
        Ok(acc)
    }

    /// Degenerate Whittaker character of the coset piece at g, straight from
    /// the definition: average the induced character on block matrices
    /// [[g, X], [0, g]] over all q^8 top-right blocks X against the
    /// conjugated additive character of tr(X g^-1).
    pub fn whittaker_value(&self, tw: &Tower, datum: &CuspidalDatum, g: M2) -> Result<Cx> {
        let o = &tw.o2;
        let f = &o.fq;
        let q = f.q;
        let gi = m2_inv(o, g)?;
        let gbar = m2_reduce(tw, g);
        let partials: Vec<Result<Cx>> = pool().install(|| {
            (0..q.pow(4))
                .into_par_iter()
                .map(|xbar_id| self.residue_slice(tw, datum, g, gi, gbar, xbar_id))
                .collect()
        });
        let mut acc = ZERO;
        for p in partials {
            acc += p?;
        }
        Ok(acc.scale(1.0 / (q as f64).powi(8)))
    }

    /// Contribution of all X lifting one residue block: the survivor set
    /// depends only on the residue, the exact values on the lift.
    fn residue_slice(
        &self,
        tw: &Tower,
        datum: &CuspidalDatum,
        g: M2,
        gi: M2,
        gbar: M2,
        xbar_id: u32,
    ) -> Result<Cx> {
        let o = &tw.o2;
        let f = &o.fq;
        let q = f.q;
        let xbar = unpack2(f, xbar_id);
        let ybar = m4_from_blocks(gbar, xbar, [0; 4], gbar);
        let survivors = self.survivors(tw, &ybar);
        if survivors.is_empty() {
            return Ok(ZERO);
        }
        let mut acc = ZERO;
        for mid in 0..q.pow(4) {
            let m = unpack2(f, mid);
            let mut x = [0u16; 4];
            for i in 0..4 {
                x[i] = o.add(o.lift(xbar[i]), o.pi_mul(o.lift(m[i])));
            }
            let y = m4_from_blocks(g, x, [0; 4], g);
            let mut inner = ZERO;
            for &si in &survivors {
                let si = si as usize;
                let w = m4_mul(o, &m4_mul(o, &self.trans_o2_inv[si], &y), &self.trans_o2[si]);
                let t = m4_mul(o, &m4_mul(o, &self.d_o2, &w), &self.d_o2_inv);
                inner += datum.phi_tilde(tw, &t)?;
            }
            acc += inner * o.psi0(m2_tr(o, m2_mul(o, x, gi))).conj();
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosets::build_omega0;
    use crate::field::Fq;
    use crate::groups::{gl2_o2_classes, m2_id, m2_scale, pack2};
    use crate::num::approx_eq;
    use crate::tower::RingFlavor;
    use std::sync::OnceLock;

    fn tw3e() -> &'static Tower {
        static T: OnceLock<Tower> = OnceLock::new();
        T.get_or_init(|| Tower::build(Fq::new(3, 1).unwrap(), RingFlavor::EqualChar).unwrap())
    }

    fn datum(tw: &Tower) -> CuspidalDatum {
        CuspidalDatum::new(tw, [0, 1, 1, 0], 1).unwrap()
    }

    #[test]
    fn rejects_large_fields() {
        let tw = Tower::build(Fq::new(5, 1).unwrap(), RingFlavor::EqualChar).unwrap();
        assert!(MackeyOracle::build(&tw, CosetRep::identity()).is_err());
    }

    #[test]
    fn transversal_sizes_and_dimension_at_identity() {
        let tw = tw3e();
        let d = datum(tw);
        let o = &tw.o2;
        let idm4 = m4_id(o);
        let oracle_id = MackeyOracle::build(tw, CosetRep::identity()).unwrap();
        assert_eq!(oracle_id.transversal_len(), 23328);
        let v = oracle_id.induced_character(tw, &d, &idm4).unwrap();
        assert!(approx_eq(v, Cx::new(23328.0, 0.0), 1e-6));

        let nontrivial = build_omega0(tw)
            .into_iter()
            .find(|r| !r.is_identity() && d.det_l_closed(tw, *r) != 0)
            .unwrap();
        let oracle_nt = MackeyOracle::build(tw, nontrivial).unwrap();
        assert_eq!(oracle_nt.transversal_len(), 93312);
    }

    #[test]
    fn oracle_matches_closed_form_on_identity_coset() {
        let tw = tw3e();
        let d = datum(tw);
        let o = &tw.o2;
        let cls = gl2_o2_classes(tw).unwrap();
        let rep = CosetRep::identity();
        let oracle = MackeyOracle::build(tw, rep).unwrap();
        let closed = d.theta_delta_class_function(tw, rep, &cls).unwrap();
        // identity, a central lift, a kernel element, and a quadratic unit
        // with residue outside the scalars
        let idm = m2_id(o);
        let mut kernel = idm;
        kernel[1] = o.add(kernel[1], o.pi_mul(1));
        let central = m2_scale(o, o.lift(2), idm);
        let quad = crate::groups::embed2_o2(tw, 0, 1);
        for g in [idm, central, kernel, quad] {
            let got = oracle.whittaker_value(tw, &d, g).unwrap();
            let want = closed.at(&cls, pack2(o, g));
            assert!(
                approx_eq(got, want, 1e-6),
                "oracle {got} vs closed {want} at g={g:?}"
            );
        }
    }

    #[test]
    fn oracle_matches_closed_form_on_a_nontrivial_coset() {
        let tw = tw3e();
        let d = datum(tw);
        let o = &tw.o2;
        let cls = gl2_o2_classes(tw).unwrap();
        let rep = build_omega0(tw)
            .into_iter()
            .find(|r| !r.is_identity() && d.det_l_closed(tw, *r) != 0)
            .unwrap();
        let oracle = MackeyOracle::build(tw, rep).unwrap();
        let closed = d.theta_delta_class_function(tw, rep, &cls).unwrap();
        let idm = m2_id(o);
        let mut kernel = idm;
        kernel[2] = o.add(kernel[2], o.pi_mul(1));
        for g in [idm, kernel] {
            let got = oracle.whittaker_value(tw, &d, g).unwrap();
            let want = closed.at(&cls, pack2(o, g));
            assert!(
                approx_eq(got, want, 1e-6),
                "oracle {got} vs closed {want} at g={g:?}"
            );
        }
    }
}
