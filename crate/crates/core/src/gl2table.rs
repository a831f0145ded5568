//! The complete ordinary character table of GL2(o2), certified by exact
//! orthonormality and completeness checks.
//!
//! Irreducible characters come in two families:
//!   * regular characters: for a non-scalar residue matrix B, the character
//!     phi_B of the abelian kernel subgroup K1 = I + pi*M2(o2) has inertia
//!     group o2[B^]^x * K1; each extension of phi_B to the inertia group
//!     induces irreducibly, and distinct extensions give distinct
//!     irreducibles;
//!   * inflated characters: pullbacks of GL2(F_q) irreducibles twisted by a
//!     character of o2^x through the determinant, deduplicated by value.
//! Completeness is certified by counting (rows == conjugacy classes) plus a
//! full Gram matrix check, not assumed.

use crate::classfn::{
    all_extensions, assert_orthonormal, inner_product_int, induce_from, AbelianChar,
    ClassFunction,
};
use crate::error::{Error, Result};
use crate::field::{Fq, FqEl};
use crate::groups::{
    gl2_fq_classes, gl2_o2_classes, m2_det, m2_id, m2_mul, m2_reduce, m2_scalar, m2_tr,
    pack2, unpack2, ConjClasses, Gl2Subgroup, M2,
};
use crate::num::{unit_root, Cx};
use crate::tower::Tower;
use serde::Serialize;
use std::collections::HashMap;

/// Factorization type of the characteristic polynomial of a regular
/// (non-scalar) 2x2 residue matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BType {
    /// Irreducible characteristic polynomial.
    Elliptic,
    /// Repeated eigenvalue, non-scalar matrix.
    NonSemisimple,
    /// Two distinct eigenvalues in F_q.
    SplitSemisimple,
}

pub fn regular_type(fq: &Fq, b: M2) -> Option<BType> {
    if b[1] == 0 && b[2] == 0 && b[0] == b[3] {
        return None; // scalar, not regular
    }
    let t = m2_tr(fq, b);
    let d = m2_det(fq, b);
    let disc = fq.sub(fq.mul(t, t), fq.mul(fq.from_residue(4), d));
    Some(if disc == 0 {
        BType::NonSemisimple
    } else if fq.is_square(disc) {
        BType::SplitSemisimple
    } else {
        BType::Elliptic
    })
}

/// |F_q[B]^x| for regular B.
pub fn centralizer_unit_order(fq: &Fq, b: M2) -> u64 {
    let q = fq.q as u64;
    match regular_type(fq, b).expect("B must be regular") {
        BType::Elliptic => q * q - 1,
        BType::NonSemisimple => q * (q - 1),
        BType::SplitSemisimple => (q - 1) * (q - 1),
    }
}

/// phi_B(I + pi*A) = psi0_res(tr(B * A-bar)) as a character value on a
/// kernel-subgroup element given by its packed matrix.
pub fn phi_b_value(tw: &Tower, b: M2, kernel_elem: M2) -> Cx {
    let r = &tw.o2;
    let fq = &r.fq;
    let a = [
        r.pi_part(kernel_elem[0]),
        r.pi_part(kernel_elem[1]),
        r.pi_part(kernel_elem[2]),
        r.pi_part(kernel_elem[3]),
    ];
    // tr(B A) = b0 a0 + b1 a2 + b2 a1 + b3 a3.
    let t = fq.add(
        fq.add(fq.mul(b[0], a[0]), fq.mul(b[1], a[2])),
        fq.add(fq.mul(b[2], a[1]), fq.mul(b[3], a[3])),
    );
    r.psi0_res(t)
}

/// The abelian algebra units o2[B^]^x = {x*I + y*B^ invertible}, packed and
/// sorted, for the constant lift B^ of a regular residue matrix.
pub fn algebra_units(tw: &Tower, b: M2) -> Vec<u32> {
    let r = &tw.o2;
    let bh = crate::groups::m2_lift(tw, b);
    let mut out = Vec::new();
    for x in 0..r.size as u16 {
        for y in 0..r.size as u16 {
            let m = [
                r.add(x, r.mul(y, bh[0])),
                r.mul(y, bh[1]),
                r.mul(y, bh[2]),
                r.add(x, r.mul(y, bh[3])),
            ];
            if crate::groups::m2_is_invertible(r, m) {
                out.push(pack2(r, m));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// 1 + pi*o2[B^], the intersection of the algebra units with the kernel
/// subgroup, with its phi_B values.
fn phi_b_on_algebra_kernel(tw: &Tower, b: M2) -> AbelianChar {
    let r = &tw.o2;
    let fq = &r.fq;
    let mut out = AbelianChar::new();
    for x in 0..fq.q as u16 {
        for y in 0..fq.q as u16 {
            let m: M2 = [
                r.add(1, r.pi_mul(r.lift(fq.add(x, fq.mul(y, b[0]))))),
                r.pi_mul(r.lift(fq.mul(y, b[1]))),
                r.pi_mul(r.lift(fq.mul(y, b[2]))),
                r.add(1, r.pi_mul(r.lift(fq.add(x, fq.mul(y, b[3]))))),
            ];
            out.insert(pack2(r, m), phi_b_value(tw, b, m));
        }
    }
    out
}

/// Decompose an inertia-group element as c * j with c in the algebra units
/// and j in the kernel subgroup, and return chi(c) * phi_B(j).
fn inertia_char_value(
    tw: &Tower,
    b: M2,
    chi_c: &AbelianChar,
    g: M2,
) -> Result<Cx> {
    let r = &tw.o2;
    let fq = &r.fq;
    let gbar = m2_reduce(tw, g);
    // gbar = x*I + y*B uniquely; solve the 2x2 linear system from an
    // off-diagonal entry of B (B is non-scalar, so one exists).
    let (x, y) = if b[1] != 0 {
        let y = fq.mul(gbar[1], fq.inv(b[1]));
        (fq.sub(gbar[0], fq.mul(y, b[0])), y)
    } else if b[2] != 0 {
        let y = fq.mul(gbar[2], fq.inv(b[2]));
        (fq.sub(gbar[0], fq.mul(y, b[0])), y)
    } else {
        // diagonal with distinct entries
        let y = fq.mul(fq.sub(gbar[0], gbar[3]), fq.inv(fq.sub(b[0], b[3])));
        (fq.sub(gbar[0], fq.mul(y, b[0])), y)
    };
    let bh = crate::groups::m2_lift(tw, b);
    let c: M2 = [
        r.add(r.lift(x), r.mul(r.lift(y), bh[0])),
        r.mul(r.lift(y), bh[1]),
        r.mul(r.lift(y), bh[2]),
        r.add(r.lift(x), r.mul(r.lift(y), bh[3])),
    ];
    let ci = crate::groups::m2_inv(r, c)?;
    let j = m2_mul(r, ci, g);
    debug_assert_eq!(m2_reduce(tw, j), m2_id(fq));
    let chi_val = chi_c
        .get(&pack2(r, c))
        .ok_or_else(|| Error::Check("algebra-unit part outside the character domain".into()))?;
    Ok(chi_val * phi_b_value(tw, b, j))
}

// ---- The classical GL2(F_q) character table. ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FqRowKind {
    /// chi_j composed with det; dimension 1.
    Det { j: u32 },
    /// Steinberg twisted by chi_j; dimension q.
    Steinberg { j: u32 },
    /// Principal series for an unordered pair of distinct characters.
    Principal { j1: u32, j2: u32 },
    /// Cuspidal attached to a regular character of F_{q^2}^x.
    Cuspidal { j: u32 },
}

#[derive(Debug, Clone)]
pub struct FqIrrep {
    pub kind: FqRowKind,
    pub theta: ClassFunction,
}

/// Conjugacy invariants of an invertible residue matrix.
enum FqClassKind {
    Central(FqEl),
    NonSemisimple(FqEl),
    Split(FqEl, FqEl),
    Elliptic((FqEl, FqEl)),
}

fn fq_class_kind(tw: &Tower, m: M2) -> FqClassKind {
    let fq = &tw.o2.fq;
    if m[1] == 0 && m[2] == 0 && m[0] == m[3] {
        return FqClassKind::Central(m[0]);
    }
    let t = m2_tr(fq, m);
    let d = m2_det(fq, m);
    let disc = fq.sub(fq.mul(t, t), fq.mul(fq.from_residue(4), d));
    if disc == 0 {
        let half = fq.inv(fq.from_residue(2));
        return FqClassKind::NonSemisimple(fq.mul(t, half));
    }
    if fq.is_square(disc) {
        let r = fq.sqrt(disc).expect("square discriminant");
        let half = fq.inv(fq.from_residue(2));
        let a = fq.mul(fq.add(t, r), half);
        let b = fq.mul(fq.sub(t, r), half);
        return FqClassKind::Split(a.min(b), a.max(b));
    }
    // Eigenvalue in F_{q^2} - F_q: first root of z^2 - t z + d in the scan
    // order (c0, c1), c1 > 0.
    for c1 in 1..fq.q as u16 {
        for c0 in 0..fq.q as u16 {
            let lam = (c0, c1);
            let sq = tw.q2_mul(lam, lam);
            let want = (fq.sub(fq.mul(t, lam.0), d), fq.mul(t, lam.1));
            if sq == want {
                return FqClassKind::Elliptic(lam);
            }
        }
    }
    unreachable!("irreducible quadratic must have a root in F_q^2")
}

/// Character of F_q^x: c -> zeta_{q-1}^{j * dlog(c)}.
fn chi_fq(fq: &Fq, j: u32, c: FqEl) -> Cx {
    debug_assert!(c != 0);
    unit_root(fq.q as u64 - 1, (j as u64 * fq.dlog(c) as u64) as i64)
}

/// Character of F_{q^2}^x: x -> zeta_{q^2-1}^{j * dlog2(x)}.
fn lambda_q2(tw: &Tower, j: u32, x: (FqEl, FqEl)) -> Cx {
    let ord = (tw.o2.fq.q as u64).pow(2) - 1;
    unit_root(ord, (j as u64 * tw.q2_dlog(x) as u64 % ord) as i64)
}

/// The full character table of GL2(F_q), with standard value formulas,
/// certified orthonormal and complete.
pub fn gl2_fq_char_table(tw: &Tower) -> Result<(ConjClasses, Vec<FqIrrep>)> {
    let fq = &tw.o2.fq;
    let q = fq.q as u64;
    let cls = gl2_fq_classes(fq)?;
    let mut rows: Vec<FqIrrep> = Vec::new();
    let value = |kind: FqRowKind, rep: u32| -> Cx {
        let m = unpack2(fq, rep);
        let det = m2_det(fq, m);
        match kind {
            FqRowKind::Det { j } => chi_fq(fq, j, det),
            FqRowKind::Steinberg { j } => {
                let st = match fq_class_kind(tw, m) {
                    FqClassKind::Central(_) => q as f64,
                    FqClassKind::NonSemisimple(_) => 0.0,
                    FqClassKind::Split(_, _) => 1.0,
                    FqClassKind::Elliptic(_) => -1.0,
                };
                chi_fq(fq, j, det) * st
            }
            FqRowKind::Principal { j1, j2 } => match fq_class_kind(tw, m) {
                FqClassKind::Central(a) => {
                    chi_fq(fq, j1, a) * chi_fq(fq, j2, a) * (q as f64 + 1.0)
                }
                FqClassKind::NonSemisimple(a) => chi_fq(fq, j1, a) * chi_fq(fq, j2, a),
                FqClassKind::Split(a, b) => {
                    chi_fq(fq, j1, a) * chi_fq(fq, j2, b) + chi_fq(fq, j1, b) * chi_fq(fq, j2, a)
                }
                FqClassKind::Elliptic(_) => Cx::new(0.0, 0.0),
            },
            FqRowKind::Cuspidal { j } => match fq_class_kind(tw, m) {
                FqClassKind::Central(a) => lambda_q2(tw, j, (a, 0)) * (q as f64 - 1.0),
                FqClassKind::NonSemisimple(a) => -lambda_q2(tw, j, (a, 0)),
                FqClassKind::Split(_, _) => Cx::new(0.0, 0.0),
                FqClassKind::Elliptic(lam) => {
                    // -(Lambda(lambda) + Lambda(lambda^q))
                    let lam_q = {
                        let e = q;
                        let mut acc = (1u16, 0u16);
                        let mut base = lam;
                        let mut k = e;
                        while k > 0 {
                            if k & 1 == 1 {
                                acc = tw.q2_mul(acc, base);
                            }
                            base = tw.q2_mul(base, base);
                            k >>= 1;
                        }
                        acc
                    };
                    -(lambda_q2(tw, j, lam) + lambda_q2(tw, j, lam_q))
                }
            },
        }
    };
    for j in 0..(q - 1) as u32 {
        rows.push(FqIrrep { kind: FqRowKind::Det { j }, theta: ClassFunction::zero(&cls) });
        rows.push(FqIrrep { kind: FqRowKind::Steinberg { j }, theta: ClassFunction::zero(&cls) });
    }
    for j1 in 0..(q - 1) as u32 {
        for j2 in (j1 + 1)..(q - 1) as u32 {
            rows.push(FqIrrep {
                kind: FqRowKind::Principal { j1, j2 },
                theta: ClassFunction::zero(&cls),
            });
        }
    }
    let ord2 = (q * q - 1) as u32;
    for j in 1..ord2 {
        let jq = (j as u64 * q % ord2 as u64) as u32;
        if jq == j || jq < j {
            continue; // not regular, or already listed as the conjugate
        }
        rows.push(FqIrrep { kind: FqRowKind::Cuspidal { j }, theta: ClassFunction::zero(&cls) });
    }
    for row in rows.iter_mut() {
        let kind = row.kind;
        row.theta = ClassFunction::from_fn(&cls, |rep| value(kind, rep));
    }
    // Certify.
    if rows.len() != cls.class_count() {
        return Err(Error::Check(format!(
            "GL2(F_q) table has {} rows for {} classes",
            rows.len(),
            cls.class_count()
        )));
    }
    let thetas: Vec<ClassFunction> = rows.iter().map(|r| r.theta.clone()).collect();
    assert_orthonormal(&cls, &thetas)?;
    Ok((cls, rows))
}

// ---- Characters of o2^x. ----

/// All characters of the unit group of o2, deterministically ordered, as
/// maps from ring indices to values.
pub fn unit_characters(tw: &Tower) -> Result<Vec<AbelianChar>> {
    let r = &tw.o2;
    let units: Vec<u32> = (0..r.size).filter(|&x| r.is_unit(x as u16)).collect();
    let mut trivial = AbelianChar::new();
    trivial.insert(1, Cx::new(1.0, 0.0));
    all_extensions(&units, &trivial, |a, b| r.mul(a as u16, b as u16) as u32)
}

// ---- The GL2(o2) table. ----

#[derive(Debug, Clone, Serialize)]
pub enum RowKind {
    /// Induced from an extension of phi_B on its inertia group; ext_index is
    /// the position in the deterministic extension enumeration.
    Regular { b_rep: M2, btype: BType, ext_index: usize },
    /// Inflation of a GL2(F_q) irreducible twisted by a unit character
    /// through det.
    Inflated { fq_kind: FqRowKind, unit_char: usize },
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub kind: RowKind,
    pub theta: ClassFunction,
    pub dim: i64,
}

pub struct CharacterTable {
    pub classes: ConjClasses,
    pub rows: Vec<TableRow>,
}

impl CharacterTable {
    pub fn build(tw: &Tower) -> Result<CharacterTable> {
        let r = &tw.o2;
        let fq = &r.fq;
        let cls = gl2_o2_classes(tw)?;
        let mut rows: Vec<TableRow> = Vec::new();

        // Regular characters: one family per regular class of M2(F_q).
        let m2cls = crate::groups::m2_fq_classes(fq)?;
        for &brep in &m2cls.reps {
            let b = unpack2(fq, brep);
            let Some(btype) = regular_type(fq, b) else { continue };
            let cset = algebra_units(tw, b);
            let seed = phi_b_on_algebra_kernel(tw, b);
            let exts = all_extensions(&cset, &seed, |x, y| {
                pack2(r, m2_mul(r, unpack2(r, x), unpack2(r, y)))
            })?;
            if exts.len() as u64 != centralizer_unit_order(fq, b) {
                return Err(Error::Check("unexpected extension count".into()));
            }
            let inertia = Gl2Subgroup::Inertia(b).elements(tw)?;
            for (ext_index, chi_c) in exts.iter().enumerate() {
                // chi-tilde on the inertia group, then induce.
                let mut vals: HashMap<u32, Cx> = HashMap::with_capacity(inertia.len());
                for &h in &inertia {
                    vals.insert(h, inertia_char_value(tw, b, chi_c, unpack2(r, h))?);
                }
                let theta = induce_from(&cls, &inertia, |h| vals[&h])?;
                let norm = inner_product_int(&cls, &theta, &theta)?;
                if norm != 1 {
                    return Err(Error::Check(format!(
                        "induced regular character is not irreducible (norm {norm})"
                    )));
                }
                let dim = crate::num::round_int(theta.at(&cls, pack2(r, m2_id(r))))?;
                rows.push(TableRow {
                    kind: RowKind::Regular { b_rep: b, btype, ext_index },
                    theta,
                    dim,
                });
            }
        }

        // Inflated characters, deduplicated by class-value signature.
        let (fq_cls, fq_rows) = gl2_fq_char_table(tw)?;
        let uchars = unit_characters(tw)?;
        let mut seen: std::collections::HashSet<Vec<(i64, i64)>> = std::collections::HashSet::new();
        for frow in &fq_rows {
            for (uidx, uchar) in uchars.iter().enumerate() {
                let theta = ClassFunction::from_fn(&cls, |rep| {
                    let m = unpack2(r, rep);
                    let mbar = m2_reduce(tw, m);
                    let rho = frow.theta.at(&fq_cls, pack2(fq, mbar));
                    let det = m2_det(r, m);
                    rho * uchar[&(det as u32)]
                });
                let sig: Vec<(i64, i64)> = theta
                    .values
                    .iter()
                    .map(|v| ((v.re * 1e6).round() as i64, (v.im * 1e6).round() as i64))
                    .collect();
                if seen.insert(sig) {
                    let dim = crate::num::round_int(theta.at(&cls, pack2(r, m2_id(r))))?;
                    rows.push(TableRow {
                        kind: RowKind::Inflated { fq_kind: frow.kind, unit_char: uidx },
                        theta,
                        dim,
                    });
                }
            }
        }

        let table = CharacterTable { classes: cls, rows };
        table.certify()?;
        Ok(table)
    }

    /// Orthonormality, completeness by count, and the sum-of-squares
    /// identity.
    pub fn certify(&self) -> Result<()> {
        if self.rows.len() != self.classes.class_count() {
            return Err(Error::Check(format!(
                "{} rows for {} classes",
                self.rows.len(),
                self.classes.class_count()
            )));
        }
        let sum_sq: i64 = self.rows.iter().map(|r| r.dim * r.dim).sum();
        if sum_sq as u64 != self.classes.group_order {
            return Err(Error::Check(format!(
                "sum of squared dimensions {sum_sq} != group order {}",
                self.classes.group_order
            )));
        }
        let thetas: Vec<ClassFunction> = self.rows.iter().map(|r| r.theta.clone()).collect();
        assert_orthonormal(&self.classes, &thetas)
    }

    pub fn thetas(&self) -> Vec<ClassFunction> {
        self.rows.iter().map(|r| r.theta.clone()).collect()
    }

    /// Multiplicity vector of an arbitrary character in this basis.
    pub fn decompose(&self, v: &ClassFunction) -> Result<Vec<i64>> {
        crate::classfn::decompose(&self.classes, v, &self.thetas())
    }

    /// Census of regular rows by (type, dimension).
    pub fn regular_census(&self) -> Vec<(BType, i64, usize)> {
        let mut counts: Vec<(BType, i64, usize)> = Vec::new();
        for row in &self.rows {
            if let RowKind::Regular { btype, .. } = row.kind {
                if let Some(entry) =
                    counts.iter_mut().find(|(t, d, _)| *t == btype && *d == row.dim)
                {
                    entry.2 += 1;
                } else {
                    counts.push((btype, row.dim, 1));
                }
            }
        }
        counts.sort_by_key(|&(_, d, _)| d);
        counts
    }

    /// Central character value of a row at a unit scalar z.
    pub fn central_value(&self, tw: &Tower, row: usize, z: u16) -> Cx {
        let r = &tw.o2;
        let zid = pack2(r, m2_scalar(r, z));
        self.rows[row].theta.at(&self.classes, zid) / self.rows[row].dim as f64
    }

    /// JSON export of the table.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "class_count": self.classes.class_count(),
            "group_order": self.classes.group_order,
            "class_reps": self.classes.reps,
            "class_sizes": self.classes.sizes,
            "rows": self.rows.iter().map(|row| {
                serde_json::json!({
                    "kind": serde_json::to_value(&row.kind).unwrap(),
                    "dim": row.dim,
                    "values": row.theta.values.iter()
                        .map(|v| vec![v.re, v.im]).collect::<Vec<_>>(),
                })
            }).collect::<Vec<_>>(),
        })
    }

    /// CSV export: one row per irreducible, one column per class.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("kind,dim");
        for rep in &self.classes.reps {
            out.push_str(&format!(",c{rep}"));
        }
        out.push('\n');
        for row in &self.rows {
            let kind = match &row.kind {
                RowKind::Regular { btype, ext_index, .. } => {
                    format!("regular:{btype:?}:{ext_index}")
                }
                RowKind::Inflated { fq_kind, unit_char } => {
                    format!("inflated:{fq_kind:?}:{unit_char}").replace(',', ";")
                }
            };
            out.push_str(&format!("{kind},{}", row.dim));
            for v in &row.theta.values {
                out.push_str(&format!(",{:.6}{:+.6}i", v.re, v.im));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::RingFlavor;

    fn tower(flavor: RingFlavor) -> Tower {
        Tower::build(Fq::new(3, 1).unwrap(), flavor).unwrap()
    }

    #[test]
    fn classical_table_is_complete_and_orthonormal() {
        let tw = tower(RingFlavor::EqualChar);
        let (cls, rows) = gl2_fq_char_table(&tw).unwrap();
        assert_eq!(rows.len(), 8); // q^2 - 1
        let q = 3i64;
        let dims: i64 = rows
            .iter()
            .map(|r| {
                let d = crate::num::round_int(r.theta.values[cls.class_id(
                    pack2(&tw.o2.fq, m2_id(&tw.o2.fq)),
                ) as usize])
                .unwrap();
                d * d
            })
            .sum();
        assert_eq!(dims, q.pow(4) - q.pow(3) - q.pow(2) + q); // |GL2(F_q)|
    }

    #[test]
    fn unit_characters_are_complete() {
        for flavor in [RingFlavor::EqualChar, RingFlavor::MixedChar] {
            let tw = tower(flavor);
            let chars = unit_characters(&tw).unwrap();
            assert_eq!(chars.len(), 6); // q(q-1)
            // Orthogonality.
            let units: Vec<u32> =
                (0..tw.o2.size).filter(|&x| tw.o2.is_unit(x as u16)).collect();
            for i in 0..chars.len() {
                for j in 0..chars.len() {
                    let dot: Cx = units.iter().map(|u| chars[i][u] * chars[j][u].conj()).sum();
                    let want = if i == j { units.len() as f64 } else { 0.0 };
                    assert!((dot - Cx::new(want, 0.0)).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn phi_b_is_a_character_of_the_kernel_subgroup() {
        let tw = tower(RingFlavor::MixedChar);
        let r = &tw.o2;
        let kernel = Gl2Subgroup::KernelOne.elements(&tw).unwrap();
        let b: M2 = [0, tw.n_fq, 1, tw.s_fq]; // companion matrix, elliptic
        for &x in &kernel {
            for &y in &kernel {
                let xm = unpack2(r, x);
                let ym = unpack2(r, y);
                let lhs = phi_b_value(&tw, b, m2_mul(r, xm, ym));
                let rhs = phi_b_value(&tw, b, xm) * phi_b_value(&tw, b, ym);
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn inertia_of_phi_b_matches_the_brute_stabilizer() {
        let tw = tower(RingFlavor::EqualChar);
        let r = &tw.o2;
        let kernel = Gl2Subgroup::KernelOne.elements(&tw).unwrap();
        for b in [[0u16, 2, 1, 2], [1, 1, 0, 1], [1, 0, 0, 2]] {
            let sub = Gl2Subgroup::Inertia(b);
            let named: std::collections::HashSet<u32> =
                sub.elements(&tw).unwrap().into_iter().collect();
            // Brute stabilizer of phi_B under conjugation.
            let mut brute = std::collections::HashSet::new();
            for &gid in &crate::groups::gl2_o2_elements(&tw) {
                let g = unpack2(r, gid);
                let gi = crate::groups::m2_inv(r, g).unwrap();
                let fixed = kernel.iter().all(|&kid| {
                    let k = unpack2(r, kid);
                    let conj = m2_mul(r, m2_mul(r, gi, k), g);
                    (phi_b_value(&tw, b, conj) - phi_b_value(&tw, b, k)).norm() < 1e-9
                });
                if fixed {
                    brute.insert(gid);
                }
            }
            assert_eq!(named, brute, "inertia mismatch for {b:?}");
        }
    }

    #[test]
    fn full_table_builds_and_certifies_at_q3() {
        for flavor in [RingFlavor::EqualChar, RingFlavor::MixedChar] {
            let tw = tower(flavor);
            let table = CharacterTable::build(&tw).unwrap();
            assert_eq!(table.rows.len(), 78);
            let census = table.regular_census();
            // (type, dim, count): 24 of dim q(q-1), 18 of dim q^2-1,
            // 12 of dim q(q+1).
            assert_eq!(
                census,
                vec![
                    (BType::Elliptic, 6, 24),
                    (BType::NonSemisimple, 8, 18),
                    (BType::SplitSemisimple, 12, 12),
                ]
            );
            let inflated = table
                .rows
                .iter()
                .filter(|r| matches!(r.kind, RowKind::Inflated { .. }))
                .count();
            assert_eq!(inflated, 24);
        }
    }

    #[test]
    fn regular_rows_restrict_to_their_phi_b_orbit() {
        let tw = tower(RingFlavor::EqualChar);
        let table = CharacterTable::build(&tw).unwrap();
        let fq = &tw.o2.fq;
        let m2cls = crate::groups::m2_fq_classes(fq).unwrap();
        let kernel = Gl2Subgroup::KernelOne.elements(&tw).unwrap();
        let r = &tw.o2;
        for row in table.rows.iter().take(30) {
            let RowKind::Regular { b_rep, .. } = &row.kind else { continue };
            let bcls = m2cls.class_id(pack2(fq, *b_rep));
            for bid in 0..81u32 {
                let bb = unpack2(fq, bid);
                let ip = crate::classfn::restricted_inner_product(
                    &table.classes,
                    &row.theta,
                    &kernel,
                    |h| phi_b_value(&tw, bb, unpack2(r, h)),
                );
                let mult = crate::num::round_int(ip).unwrap();
                if m2cls.class_id(bid) == bcls {
                    assert!(mult > 0, "phi_B missing from its own row");
                } else {
                    assert_eq!(mult, 0, "foreign phi_B appears in restriction");
                }
            }
        }
    }

    #[test]
    fn census_totals_match_the_paper_counts_at_q5() {
        let tw = Tower::build(Fq::new(5, 1).unwrap(), RingFlavor::EqualChar).unwrap();
        let table = CharacterTable::build(&tw).unwrap();
        let regular: usize = table
            .rows
            .iter()
            .filter(|r| matches!(r.kind, RowKind::Regular { .. }))
            .count();
        assert_eq!(regular, 500);
        assert_eq!(table.rows.len() - regular, 120);
    }
}
