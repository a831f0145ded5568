//! Named verification checklist over the whole construction.
//!
//! Every closed form in the library is replayed here against an independent
//! computation, and every structural claim about the decomposition of the
//! degenerate Whittaker character is checked exactly: coset geometry, the
//! determinant formula and its unique vanishing coset, per-coset dimensions
//! and characters, kernel-character content, conjugacy-invariant censuses,
//! the Mackey multiplicity machinery, and the final equality with the
//! character induced from the embedded quadratic units.
//!
//! Checks never panic on a mathematical failure; each produces a named
//! pass/fail line with a detail string, so a run reports honestly even when
//! something breaks.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classfn::{
    all_extensions, induce_from, inner_product_int, restricted_inner_product, AbelianChar,
    ClassFunction,
};
use crate::cosets::{
    build_omega0, coset_pairing, gamma0, gamma1, gamma2, gamma_all,
    gamma_double_coset_partition_brute, gamma_invariant, CosetRep, GrassmannOracle,
};
use crate::error::{Error, Result};
use crate::field::{Fq, FqEl};
use crate::gl2table::{
    centralizer_unit_order, phi_b_value, regular_type, BType, CharacterTable, RowKind,
};
use crate::groups::{
    col0_2, embed2_o2, embed2_res, embed4_o2, gl2_fq_elements, gl2_fq_order, gl2_o2_elements, m2_add, m2_fq_classes, m2_id, m2_inv, m2_is_invertible, m2_lift, m2_mul,
    m2_reduce, m2_scalar, m2_scale, m2_sub, m2_tr, m4_mul, pack2, unpack2, ConjClasses,
    Gl2Subgroup, M2,
};
use crate::num::{round_int, Cx, INT_TOL};
use crate::oracle::MackeyOracle;
use crate::tower::{RingFlavor, Tower, O4, Q4};
use crate::whittaker::{assemble, diag4, CuspidalDatum, WhittakerReport};

const ZERO: Cx = Cx::new(0.0, 0.0);

/// One named pass/fail line of the checklist.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

pub fn all_passed(checks: &[CheckResult]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn run_check(out: &mut Vec<CheckResult>, name: &str, f: impl FnOnce() -> Result<String>) {
    let t0 = Instant::now();
    let (passed, detail) = match f() {
        Ok(d) => (true, d),
        Err(e) => (false, e.to_string()),
    };
    out.push(CheckResult { name: name.to_string(), passed, detail, millis: t0.elapsed().as_millis() });
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Check(msg()))
    }
}

fn close(a: Cx, b: Cx) -> bool {
    (a - b).norm() <= INT_TOL
}

/// Knobs for the expensive sampled checks; zero disables a family.
#[derive(Debug, Clone, Copy)]
pub struct HeavyChecks {
    /// Character values compared against the raw double-coset evaluator,
    /// per non-vanishing coset.
    pub oracle_values: usize,
    /// Support cases for the quadratic pair sum.
    pub pair_sum_cases: usize,
    /// Samples for the kernel pairing sums.
    pub kernel_samples: usize,
}

impl HeavyChecks {
    pub fn none() -> Self {
        HeavyChecks { oracle_values: 0, pair_sum_cases: 0, kernel_samples: 0 }
    }

    pub fn standard() -> Self {
        HeavyChecks { oracle_values: 6, pair_sum_cases: 4, kernel_samples: 24 }
    }
}

/// Shared fixtures for one base ring: the tower, the coset transversal, the
/// conjugacy classes, the certified character table, and the packed element
/// lists of every subgroup the checks quantify over.
pub struct Workbench {
    pub tw: Tower,
    pub omega0: Vec<CosetRep>,
    pub grassmann: GrassmannOracle,
    pub cls: ConjClasses,
    pub m2cls: ConjClasses,
    pub table: CharacterTable,
    /// Embedded quadratic units, packed.
    pub quad_units: Vec<u32>,
    /// Residue-level embedded quadratic units, packed over F_q.
    pub quad_res_units: Vec<u32>,
    /// Quadratic units times the congruence kernel.
    pub h_elements: Vec<u32>,
    pub h_set: HashSet<u32>,
    /// The congruence kernel I + pi M2.
    pub j1_elements: Vec<u32>,
    /// Unit scalars of the base ring.
    pub z_scalars: Vec<u16>,
    /// Products of unit scalars with 1 + pi * (quadratic element), sorted.
    pub zk_set: Vec<u32>,
    pub normalizer: Vec<u32>,
    pub norm_set: HashSet<u32>,
}

fn factor_prime_power(q: u32) -> Result<(u32, u32)> {
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if q % p != 0 {
        p = q; // q itself is prime
    }
    let mut f = 0;
    let mut m = q;
    while m > 1 {
        if m % p != 0 {
            return Err(Error::InvalidParam(format!("{q} is not a prime power")));
        }
        m /= p;
        f += 1;
    }
    if p == 2 {
        return Err(Error::InvalidParam("the residue field must be odd".into()));
    }
    Ok((p, f))
}

impl Workbench {
    pub fn new(q: u32, flavor: RingFlavor) -> Result<Workbench> {
        let (p, f) = factor_prime_power(q)?;
        let fq = Fq::new(p, f)?;
        let tw = Tower::build(fq, flavor)?;
        Workbench::from_tower(tw)
    }

    pub fn from_tower(tw: Tower) -> Result<Workbench> {
        let r = &tw.o2;
        let omega0 = build_omega0(&tw);
        let grassmann = GrassmannOracle::build(&tw)?;
        let m2cls = m2_fq_classes(&r.fq)?;
        let table = CharacterTable::build(&tw)?;
        // The table already enumerated the classes; reuse them.
        let cls = table.classes.clone();
        let mut quad_units = Vec::new();
        for u0 in 0..r.size as u16 {
            for u1 in 0..r.size as u16 {
                let m = embed2_o2(&tw, u0, u1);
                if m2_is_invertible(r, m) {
                    quad_units.push(pack2(r, m));
                }
            }
        }
        quad_units.sort_unstable();
        let fq = &r.fq;
        let mut quad_res_units = Vec::new();
        for c0 in 0..fq.q as u16 {
            for c1 in 0..fq.q as u16 {
                let m = embed2_res(&tw, c0, c1);
                if m2_is_invertible(fq, m) {
                    quad_res_units.push(pack2(fq, m));
                }
            }
        }
        let h_elements = Gl2Subgroup::QuadUnitsTimesK1.elements(&tw)?;
        let h_set: HashSet<u32> = h_elements.iter().copied().collect();
        let j1_elements = Gl2Subgroup::KernelOne.elements(&tw)?;
        let z_scalars: Vec<u16> = (0..r.size as u16).filter(|&z| r.is_unit(z)).collect();
        let mut zk_set = Vec::new();
        for &z in &z_scalars {
            for c0 in 0..fq.q as u16 {
                for c1 in 0..fq.q as u16 {
                    let k = embed2_o2(&tw, r.add(1, r.pi_mul(r.lift(c0))), r.pi_mul(r.lift(c1)));
                    zk_set.push(pack2(r, m2_scale(r, z, k)));
                }
            }
        }
        zk_set.sort_unstable();
        zk_set.dedup();
        let normalizer = crate::groups::normalizer_of_quad_units(&tw);
        let norm_set: HashSet<u32> = normalizer.iter().copied().collect();
        Ok(Workbench {
            tw,
            omega0,
            grassmann,
            cls,
            m2cls,
            table,
            quad_units,
            quad_res_units,
            h_elements,
            h_set,
            j1_elements,
            z_scalars,
            zk_set,
            normalizer,
            norm_set,
        })
    }

    fn mul_packed(&self, a: u32, b: u32) -> u32 {
        let r = &self.tw.o2;
        pack2(r, m2_mul(r, unpack2(r, a), unpack2(r, b)))
    }
}

/// Flavor-independent integer invariants of the base-ring fixtures.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct TowerSummary {
    pub q: u32,
    pub group_order: u64,
    pub class_count: usize,
    pub table_rows: usize,
    pub regular_census: Vec<(String, i64, usize)>,
    pub inflated_rows: usize,
    pub coset_count: usize,
    pub grassmann_orbits: usize,
    pub gamma_classes: usize,
    pub quad_unit_count: usize,
    pub normalizer_order: usize,
    pub zk_count: usize,
}

/// Checks that depend only on the base ring, not on a cuspidal datum.
pub fn tower_checks(wb: &Workbench) -> (Vec<CheckResult>, TowerSummary) {
    let mut out = Vec::new();
    let tw = &wb.tw;
    let fq = &tw.o2.fq;
    let q = fq.q;

    run_check(&mut out, "coset-transversal-and-pairing", || {
        check(wb.omega0.len() == (q + 1) as usize, || {
            format!("transversal has {} cosets, expected q+1 = {}", wb.omega0.len(), q + 1)
        })?;
        check(wb.grassmann.orbit_count() == (q + 1) as usize, || {
            format!("{} projective-line orbits, expected {}", wb.grassmann.orbit_count(), q + 1)
        })?;
        let rep_orbits: Vec<u32> =
            wb.omega0.iter().map(|&d| wb.grassmann.orbit_of_auv(tw, d)).collect();
        let distinct: HashSet<u32> = rep_orbits.iter().copied().collect();
        check(distinct.len() == wb.omega0.len(), || "transversal reps share an orbit".into())?;
        // The pairing invariant vanishes exactly on pairs in the same orbit,
        // over the full (u, v) grid.
        for u in 0..q as u16 {
            for v in 0..q as u16 {
                let d = CosetRep { u, v };
                let od = wb.grassmann.orbit_of_auv(tw, d);
                for u2 in 0..q as u16 {
                    for v2 in 0..q as u16 {
                        let e = CosetRep { u: u2, v: v2 };
                        let oe = wb.grassmann.orbit_of_auv(tw, e);
                        let zero = coset_pairing(tw, d, e) == 0;
                        check(zero == (od == oe), || {
                            format!(
                                "pairing of ({u},{v}) with ({u2},{v2}) disagrees with the orbit partition"
                            )
                        })?;
                    }
                }
            }
        }
        // Every antidiagonal representative lands in some (u, v) orbit.
        let rep_set: HashSet<u32> = rep_orbits.iter().copied().collect();
        for w in 0..q as u16 {
            let ow = wb.grassmann.orbit_of_aw(tw, w);
            check(rep_set.contains(&ow), || format!("A_{w} misses the (u,v) transversal"))?;
        }
        Ok(format!(
            "{} cosets; pairing partition matches the orbit partition on all {} pairs",
            q + 1,
            (q * q) * (q * q)
        ))
    });

    run_check(&mut out, "gamma-double-cosets", || {
        let gammas = gamma_all(fq);
        check(gammas.len() == (q * (q - 1)) as usize, || "wrong gamma count".into())?;
        let brute = gamma_double_coset_partition_brute(tw);
        for (i, gi) in gammas.iter().enumerate() {
            for (j, gj) in gammas.iter().enumerate() {
                let same_inv = gamma_invariant(tw, gi[1], gi[3]) == gamma_invariant(tw, gj[1], gj[3]);
                check(same_inv == (brute[i] == brute[j]), || {
                    format!("scalar invariant disagrees with the brute partition at ({i},{j})")
                })?;
            }
        }
        let reps = gamma0(tw);
        let class_count = brute.iter().collect::<HashSet<_>>().len();
        check(reps.len() == class_count, || "gamma transversal has wrong size".into())?;
        check(reps.contains(&m2_id(fq)), || "gamma transversal misses the identity".into())?;
        // Exactly one non-identity representative normalizes the embedded
        // quadratic units.
        let in_norm: Vec<&M2> = reps
            .iter()
            .filter(|g| wb.norm_set.contains(&pack2(&tw.o2, m2_lift(tw, **g))))
            .collect();
        check(in_norm.len() == 2, || {
            format!("{} transversal reps normalize the quadratic units, expected 2", in_norm.len())
        })?;

        // Sub-transversals against the diagonal torus and the non-semisimple
        // centralizer: brute double-coset counts match.
        let quad_res: Vec<M2> = wb.quad_res_units.iter().map(|&p| unpack2(fq, p)).collect();
        let count_cosets = |side: &[M2]| -> usize {
            let mut seen = HashSet::new();
            let mut count = 0;
            for gid in gl2_fq_elements(fq) {
                if seen.contains(&gid) {
                    continue;
                }
                count += 1;
                let g = unpack2(fq, gid);
                for t in &quad_res {
                    for s in side {
                        seen.insert(pack2(fq, m2_mul(fq, m2_mul(fq, *t, g), *s)));
                    }
                }
            }
            count
        };
        let diag: Vec<M2> = {
            let mut v = Vec::new();
            for a in 1..q as u16 {
                for d in 1..q as u16 {
                    v.push([a, 0, 0, d]);
                }
            }
            v
        };
        let nonss_cent: Vec<M2> = {
            let mut v = Vec::new();
            for m in 1..q as u16 {
                for n in 0..q as u16 {
                    v.push([m, n, 0, m]);
                }
            }
            v
        };
        check(count_cosets(&diag) == gamma1(fq).len(), || {
            "diagonal-torus double cosets miss the y-line transversal".into()
        })?;
        check(count_cosets(&nonss_cent) == gamma2(fq).len(), || {
            "non-semisimple-centralizer double cosets miss the z-line transversal".into()
        })?;
        Ok(format!(
            "{} double cosets separated by the scalar invariant; sub-transversals sized {} and {}",
            class_count,
            gamma1(fq).len(),
            gamma2(fq).len()
        ))
    });

    run_check(&mut out, "quad-normalizer-structure", || {
        let h_order = Gl2Subgroup::QuadUnitsTimesK1.order(tw) as usize;
        check(wb.normalizer.len() == 2 * h_order, || {
            format!("normalizer order {} is not 2|H| = {}", wb.normalizer.len(), 2 * h_order)
        })?;
        let inside = wb.normalizer.iter().filter(|p| wb.h_set.contains(p)).count();
        check(inside == h_order, || "subgroup is not inside its normalizer".into())?;
        Ok(format!("normalizer order {} = 2 * {}", wb.normalizer.len(), h_order))
    });

    run_check(&mut out, "conjugate-intersection-subgroups", || {
        // For every group element, the quadratic units meeting the conjugated
        // subgroup are either all of them (normalizing case) or exactly the
        // central units times 1 + pi * (quadratic element).
        let r = &tw.o2;
        let elements = gl2_o2_elements(tw);
        let sample: Vec<u32> = if elements.len() > 20_000 {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            (0..2000).map(|_| elements[rng.gen_range(0..elements.len())]).collect()
        } else {
            elements
        };
        let full: Vec<u32> = wb.quad_units.clone();
        let mut norm_hits = 0usize;
        for &gid in &sample {
            let g = unpack2(r, gid);
            let gi = m2_inv(r, g)?;
            let mut meet: Vec<u32> = Vec::new();
            for &up in &wb.quad_units {
                let w = m2_mul(r, m2_mul(r, gi, unpack2(r, up)), g);
                if wb.h_set.contains(&pack2(r, w)) {
                    meet.push(up);
                }
            }
            if wb.norm_set.contains(&gid) {
                norm_hits += 1;
                check(meet == full, || "normalizing element does not keep all quadratic units".into())?;
            } else {
                check(meet == wb.zk_set, || {
                    "non-normalizing intersection differs from the central-kernel subgroup".into()
                })?;
            }
        }
        Ok(format!(
            "checked {} elements ({} normalizing); non-normalizing intersections all equal the {}-element central-kernel subgroup",
            sample.len(),
            norm_hits,
            wb.zk_set.len()
        ))
    });

    run_check(&mut out, "character-table", || {
        wb.table.certify()?;
        let ql = q as i64;
        let qu = q as usize;
        let want = vec![
            (BType::Elliptic, ql * (ql - 1), (qu * qu - qu) / 2 * (qu * qu - 1)),
            (BType::NonSemisimple, ql * ql - 1, qu * qu * (qu - 1)),
            (BType::SplitSemisimple, ql * (ql + 1), qu * (qu - 1) / 2 * (qu - 1) * (qu - 1)),
        ];
        let census = wb.table.regular_census();
        check(census == want, || format!("regular census {census:?}, expected {want:?}"))?;
        let inflated =
            wb.table.rows.iter().filter(|r| matches!(r.kind, RowKind::Inflated { .. })).count();
        check(inflated == (qu * qu - 1) * qu, || {
            format!("{} inflated rows, expected {}", inflated, (qu * qu - 1) * qu)
        })?;
        Ok(format!(
            "{} rows orthonormal, squared dimensions sum to {}",
            wb.table.rows.len(),
            wb.cls.group_order
        ))
    });

    let summary = TowerSummary {
        q,
        group_order: wb.cls.group_order,
        class_count: wb.cls.class_count(),
        table_rows: wb.table.rows.len(),
        regular_census: wb
            .table
            .regular_census()
            .into_iter()
            .map(|(t, d, n)| (format!("{t:?}"), d, n))
            .collect(),
        inflated_rows: wb
            .table
            .rows
            .iter()
            .filter(|r| matches!(r.kind, RowKind::Inflated { .. }))
            .count(),
        coset_count: wb.omega0.len(),
        grassmann_orbits: wb.grassmann.orbit_count(),
        gamma_classes: gamma0(&wb.tw).len(),
        quad_unit_count: wb.quad_units.len(),
        normalizer_order: wb.normalizer.len(),
        zk_count: wb.zk_set.len(),
    };
    (out, summary)
}

/// Flavor-independent integer invariants of one verified datum.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct DatumSummary {
    pub x: [u16; 4],
    pub c: u32,
    pub coset_dims: Vec<u64>,
    pub dim_total: u64,
    pub mult_free: bool,
    pub main_equality: bool,
    pub identity_inner: i64,
    pub constituent_count: usize,
    /// (kind label, dimension) of each constituent, sorted.
    pub constituents: Vec<(String, i64)>,
    /// (kernel-character multiplicity, how many B realize it), sorted.
    pub j1_profile: Vec<(i64, usize)>,
}

/// Everything derived from one cuspidal datum that the checks share.
pub struct DatumArtifacts {
    pub datum: CuspidalDatum,
    pub report: WhittakerReport,
    /// Character induced from the quartic character restricted to the
    /// embedded quadratic units.
    pub target: ClassFunction,
    pub theta_on_quad: HashMap<u32, Cx>,
    pub omega_on_z: HashMap<u16, Cx>,
    pub mults_total: Vec<i64>,
    pub mults_target: Vec<i64>,
    pub piece_mults: Vec<Vec<i64>>,
    pub j1_mults_total: Vec<i64>,
}

fn build_artifacts(wb: &Workbench, x: Q4, c: u32) -> Result<DatumArtifacts> {
    let tw = &wb.tw;
    let r = &tw.o2;
    let datum = CuspidalDatum::new(tw, x, c)?;
    let report = assemble(tw, &datum, &wb.omega0, &wb.cls)?;
    let mut theta_on_quad = HashMap::new();
    for &p in &wb.quad_units {
        let (u0, u1) = col0_2(unpack2(r, p));
        theta_on_quad.insert(p, datum.theta(tw, [u0, u1, 0, 0])?);
    }
    let mut omega_on_z = HashMap::new();
    for &z in &wb.z_scalars {
        omega_on_z.insert(z, datum.omega(tw, z)?);
    }
    let target = induce_from(&wb.cls, &wb.quad_units, |h| theta_on_quad[&h])?;
    let mults_total = wb.table.decompose(&report.total)?;
    let mults_target = wb.table.decompose(&target)?;
    let mut piece_mults = Vec::with_capacity(report.pieces.len());
    for piece in &report.pieces {
        piece_mults.push(wb.table.decompose(&piece.theta)?);
    }
    let fq = &r.fq;
    let q4 = (fq.q as usize).pow(4);
    let mut j1_mults_total = Vec::with_capacity(q4);
    for bid in 0..q4 as u32 {
        let b = unpack2(fq, bid);
        let ip = restricted_inner_product(&wb.cls, &report.total, &wb.j1_elements, |h| {
            phi_b_value(tw, b, unpack2(r, h))
        });
        j1_mults_total.push(round_int(ip)?);
    }
    Ok(DatumArtifacts {
        datum,
        report,
        target,
        theta_on_quad,
        omega_on_z,
        mults_total,
        mults_target,
        piece_mults,
        j1_mults_total,
    })
}

/// The trace-orthogonal family of kernel characters that the induced
/// character is supported on: B(m, n) = 2 X1 - [[m, n*nrm + s*m], [n, -m]],
/// where s and nrm are the trace and norm constants of the quadratic
/// generator.
fn kernel_family_member(tw: &Tower, two_x1: M2, m: FqEl, n: FqEl) -> M2 {
    let f = &tw.o2.fq;
    let fam = [m, f.add(f.mul(n, tw.n_fq), f.mul(tw.s_fq, m)), n, f.neg(m)];
    m2_sub(f, two_x1, fam)
}

/// Discriminant-style invariant of the pair (m, n) from the closed
/// characteristic polynomial of the family members.
fn kernel_family_disc(tw: &Tower, a1: FqEl, m: FqEl, n: FqEl) -> FqEl {
    let f = &tw.o2.fq;
    let b2al = f.mul(f.mul(tw.b, tw.b), tw.alpha);
    let four = f.from_residue(4);
    let t1 = f.mul(four, f.mul(f.mul(a1, a1), b2al));
    let mn = f.add(m, f.mul(tw.a, n));
    let t2 = f.mul(mn, mn);
    let t3 = f.mul(b2al, f.mul(n, n));
    f.sub(f.add(t1, t2), t3)
}

pub struct DatumOutcome {
    pub checks: Vec<CheckResult>,
    pub summary: Option<DatumSummary>,
}

/// Full checklist for one cuspidal datum on a prepared workbench.
pub fn verify_datum(wb: &Workbench, x: Q4, c: u32, heavy: HeavyChecks) -> DatumOutcome {
    let mut checks = Vec::new();
    let t0 = Instant::now();
    let art = match build_artifacts(wb, x, c) {
        Ok(a) => {
            checks.push(CheckResult {
                name: "construction".into(),
                passed: true,
                detail: format!(
                    "assembled {} coset pieces and decomposed them in the {}-row table",
                    wb.omega0.len(),
                    wb.table.rows.len()
                ),
                millis: t0.elapsed().as_millis(),
            });
            a
        }
        Err(e) => {
            checks.push(CheckResult {
                name: "construction".into(),
                passed: false,
                detail: e.to_string(),
                millis: t0.elapsed().as_millis(),
            });
            return DatumOutcome { checks, summary: None };
        }
    };

    datum_checks(wb, &art, heavy, &mut checks);
    let summary = Some(datum_summary(wb, &art));
    DatumOutcome { checks, summary }
}

fn datum_summary(wb: &Workbench, art: &DatumArtifacts) -> DatumSummary {
    let mut coset_dims: Vec<u64> = art.report.pieces.iter().map(|p| p.dim).collect();
    coset_dims.sort_unstable();
    let mult1: Vec<usize> = (0..art.mults_total.len()).filter(|&i| art.mults_total[i] != 0).collect();
    let mut constituents: Vec<(String, i64)> = mult1
        .iter()
        .map(|&i| {
            let row = &wb.table.rows[i];
            let label = match &row.kind {
                RowKind::Regular { btype, .. } => format!("{btype:?}"),
                RowKind::Inflated { .. } => "Inflated".to_string(),
            };
            (label, row.dim)
        })
        .collect();
    constituents.sort();
    let mut profile: HashMap<i64, usize> = HashMap::new();
    for &m in &art.j1_mults_total {
        if m != 0 {
            *profile.entry(m).or_insert(0) += 1;
        }
    }
    let mut j1_profile: Vec<(i64, usize)> = profile.into_iter().collect();
    j1_profile.sort_unstable();
    let identity_inner = art
        .report
        .pieces
        .iter()
        .position(|p| p.rep.is_identity())
        .map(|i| {
            inner_product_int(&wb.cls, &art.report.pieces[i].theta, &art.report.pieces[i].theta)
                .unwrap_or(-1)
        })
        .unwrap_or(-1);
    DatumSummary {
        x: art.datum.x,
        c: art.datum.c,
        coset_dims,
        dim_total: art.report.dim_total,
        mult_free: art.mults_total.iter().all(|&m| m == 0 || m == 1),
        main_equality: art.report.total.max_abs_diff(&art.target) <= INT_TOL,
        identity_inner,
        constituent_count: mult1.len(),
        constituents,
        j1_profile,
    }
}

fn datum_checks(
    wb: &Workbench,
    art: &DatumArtifacts,
    heavy: HeavyChecks,
    checks: &mut Vec<CheckResult>,
) {
    let tw = &wb.tw;
    let r = &tw.o2;
    let fq = &r.fq;
    let q = fq.q;
    let datum = &art.datum;
    let a1_zero = datum.x[1] == 0;
    let trace_t = m2_tr(fq, datum.two_x1);

    let nonvanishing: Vec<CosetRep> = wb
        .omega0
        .iter()
        .copied()
        .filter(|&rep| datum.det_l_closed(tw, rep) != 0)
        .collect();
    let vanishing: Vec<CosetRep> = wb
        .omega0
        .iter()
        .copied()
        .filter(|&rep| datum.det_l_closed(tw, rep) == 0)
        .collect();

    run_check(checks, "det-l-closed-form", || {
        let mut zeros = Vec::new();
        for u in 0..q as u16 {
            for v in 0..q as u16 {
                let rep = CosetRep { u, v };
                let closed = datum.det_l_closed(tw, rep);
                let direct = crate::groups::m2_det(fq, datum.l_delta(tw, rep));
                check(closed == direct, || {
                    format!("closed determinant {closed} != direct {direct} at ({u},{v})")
                })?;
                if closed == 0 {
                    zeros.push(rep);
                }
            }
        }
        // All vanishing pairs lie in the single vanishing double coset.
        check(vanishing.len() == 1, || {
            format!("{} vanishing transversal cosets, expected exactly 1", vanishing.len())
        })?;
        let want_orbit = wb.grassmann.orbit_of_auv(tw, vanishing[0]);
        for rep in &zeros {
            check(wb.grassmann.orbit_of_auv(tw, *rep) == want_orbit, || {
                format!("vanishing pair ({},{}) lies outside the vanishing coset", rep.u, rep.v)
            })?;
        }
        Ok(format!(
            "closed form exact on all {} pairs; {} vanishing pairs, all in coset ({},{})",
            q * q,
            zeros.len(),
            vanishing[0].u,
            vanishing[0].v
        ))
    });

    run_check(checks, "coset-dimensions", || {
        let ql = q as u64;
        for piece in &art.report.pieces {
            let want = if piece.rep.is_identity() {
                ql * (ql - 1)
            } else if datum.det_l_closed(tw, piece.rep) == 0 {
                0
            } else {
                ql * (ql * ql - 1)
            };
            check(piece.dim == want, || {
                format!("coset ({},{}) has dim {}, expected {want}", piece.rep.u, piece.rep.v, piece.dim)
            })?;
        }
        check(art.report.dim_total == ql * ql * ql * (ql - 1), || "total dimension off".into())?;
        let dims: Vec<u64> = art.report.pieces.iter().map(|p| p.dim).collect();
        Ok(format!("dims {:?} sum to {}", dims, art.report.dim_total))
    });

    run_check(checks, "conjugated-block-identity", || {
        for &rep in &wb.omega0 {
            let (ba, bb, bc, bd) = datum.conjugated_blocks(tw, rep)?;
            let u = rep.u_block();
            let want_a = m2_add(fq, datum.x1, m2_mul(fq, datum.x2, u));
            let want_d = m2_sub(fq, datum.x1, m2_mul(fq, u, datum.x2));
            check(ba == want_a && bb == datum.x2 && bd == want_d, || {
                format!("conjugated outer blocks differ at ({},{})", rep.u, rep.v)
            })?;
            check(bc == datum.l_delta(tw, rep), || {
                format!("conjugated kernel block differs at ({},{})", rep.u, rep.v)
            })?;
        }
        Ok(format!("block formula exact on all {} transversal cosets", wb.omega0.len()))
    });

    run_check(checks, "b-matrix-nonscalar", || {
        for &rep in &nonvanishing {
            if rep.is_identity() {
                continue;
            }
            let b = datum.b_delta(tw, rep)?;
            check(regular_type(fq, b).is_some(), || {
                format!("conjugacy invariant at ({},{}) degenerates to a scalar", rep.u, rep.v)
            })?;
        }
        Ok("no non-identity coset carries a scalar invariant".into())
    });

    run_check(checks, "b-class-census", || {
        // One invariant per non-vanishing coset: pairwise non-conjugate,
        // determinants exhaust the field, traces all agree, and the type
        // census is the predicted one.
        let mut class_ids = Vec::new();
        let mut dets = HashSet::new();
        let mut census: HashMap<Option<BType>, usize> = HashMap::new();
        for &rep in &nonvanishing {
            let b = if rep.is_identity() { datum.two_x1 } else { datum.b_delta(tw, rep)? };
            check(m2_tr(fq, b) == trace_t, || {
                format!("trace of the invariant at ({},{}) differs", rep.u, rep.v)
            })?;
            class_ids.push(wb.m2cls.class_id(pack2(fq, b)));
            dets.insert(crate::groups::m2_det(fq, b));
            *census.entry(regular_type(fq, b)).or_insert(0) += 1;
        }
        let distinct: HashSet<u32> = class_ids.iter().copied().collect();
        check(distinct.len() == class_ids.len(), || "two cosets share a conjugacy invariant".into())?;
        check(dets.len() == q as usize, || {
            format!("{} distinct determinants, expected q = {q}", dets.len())
        })?;
        let half = ((q - 1) / 2) as usize;
        let want: HashMap<Option<BType>, usize> = if a1_zero {
            [(None, 1), (Some(BType::Elliptic), half), (Some(BType::SplitSemisimple), half)]
                .into_iter()
                .collect()
        } else {
            [
                (Some(BType::NonSemisimple), 1),
                (Some(BType::Elliptic), half),
                (Some(BType::SplitSemisimple), half),
            ]
            .into_iter()
            .collect()
        };
        check(census == want, || format!("type census {census:?}, expected {want:?}"))?;
        Ok(format!(
            "{} pairwise non-conjugate invariants of trace {trace_t}; determinants cover the field",
            nonvanishing.len()
        ))
    });

    run_check(checks, "coset-separating-discriminant", || {
        // The separating polynomial M(w) = 4 b^2 alpha w^2 - 4 P w + S^2 in
        // w = a1^2 has non-square discriminant 16 (a^2 - b^2 alpha)
        // ((a2 + a*a3)^2 - a3^2 b^2 alpha)^2, hence never vanishes.
        let a = tw.a;
        let b2al = fq.mul(fq.mul(tw.b, tw.b), tw.alpha);
        let four = fq.from_residue(4);
        let sixteen = fq.mul(four, four);
        let three = fq.from_residue(3);
        let mut nonzero_all = true;
        for a2 in 0..q as u16 {
            for a3 in 0..q as u16 {
                if (a2, a3) == (0, 0) {
                    continue;
                }
                let p_term = {
                    let c1 = fq.mul(fq.mul(fq.mul(a, a), a), fq.mul(a3, a3));
                    let c2 = fq.mul(fq.mul(fq.from_residue(2), fq.mul(a, a)), fq.mul(a2, a3));
                    let c3 = fq.mul(a, fq.mul(a2, a2));
                    let c4 = fq.mul(fq.mul(three, a), fq.mul(fq.mul(a3, a3), b2al));
                    let c5 = fq.mul(fq.from_residue(2), fq.mul(fq.mul(a2, a3), b2al));
                    fq.add(fq.add(fq.add(c1, c2), c3), fq.add(c4, c5))
                };
                let s_term = {
                    let c1 = fq.mul(a2, a2);
                    let c2 = fq.mul(
                        fq.mul(a3, a3),
                        fq.add(fq.mul(three, fq.mul(a, a)), b2al),
                    );
                    let c3 = fq.mul(fq.mul(four, a), fq.mul(a2, a3));
                    fq.add(fq.add(c1, c2), c3)
                };
                let disc = fq.mul(
                    sixteen,
                    fq.sub(fq.mul(p_term, p_term), fq.mul(b2al, fq.mul(s_term, s_term))),
                );
                let inner = {
                    let u = fq.add(a2, fq.mul(a, a3));
                    fq.sub(fq.mul(u, u), fq.mul(fq.mul(a3, a3), b2al))
                };
                let closed = fq.mul(sixteen, fq.mul(tw.n_fq, fq.mul(inner, inner)));
                check(disc == closed, || {
                    format!("discriminant factorization fails at (a2,a3)=({a2},{a3})")
                })?;
                check(!fq.is_square(closed), || {
                    format!("separating discriminant is a square at (a2,a3)=({a2},{a3})")
                })?;
                for a1 in 0..q as u16 {
                    let w = fq.mul(a1, a1);
                    let m_val = {
                        let t1 = fq.mul(four, fq.mul(b2al, fq.mul(w, w)));
                        let t2 = fq.mul(four, fq.mul(p_term, w));
                        let t3 = fq.mul(s_term, s_term);
                        fq.add(fq.sub(t1, t2), t3)
                    };
                    if m_val == 0 {
                        nonzero_all = false;
                    }
                }
            }
        }
        check(nonzero_all, || "the separating polynomial vanishes somewhere".into())?;
        Ok("separating polynomial nonzero for every datum over this ring".into())
    });

    run_check(checks, "theta-multiplicative", || {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut random_unit = || -> O4 {
            loop {
                let u: O4 = [
                    rng.gen_range(0..r.size) as u16,
                    rng.gen_range(0..r.size) as u16,
                    rng.gen_range(0..r.size) as u16,
                    rng.gen_range(0..r.size) as u16,
                ];
                if tw.o4_is_unit(u) {
                    return u;
                }
            }
        };
        for _ in 0..300 {
            let u = random_unit();
            let v = random_unit();
            let lhs = datum.theta(tw, u)? * datum.theta(tw, v)?;
            let rhs = datum.theta(tw, tw.o4_mul(u, v))?;
            check(close(lhs, rhs), || "character fails multiplicativity".into())?;
        }
        check(datum.theta(tw, [0, 0, 0, 0]).is_err(), || "zero accepted as a unit".into())?;
        check(datum.theta(tw, [r.pi_mul(1), 0, 0, 0]).is_err(), || {
            "non-unit accepted by the character".into()
        })?;
        Ok("300 random unit pairs multiply correctly; non-units rejected".into())
    });

    run_check(checks, "theta-factorization", || {
        // On the big torus, phi~ = theta times the kernel character, and on
        // the embedded quadratic units phi~ of the doubled matrix is theta.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..150 {
            let &up = &wb.quad_units[rng.gen_range(0..wb.quad_units.len())];
            let (u0, u1) = col0_2(unpack2(r, up));
            let quart: O4 = [u0, u1, 0, 0];
            let emb = embed4_o2(tw, quart);
            let mut k = crate::groups::m4_id(r);
            for e in k.iter_mut() {
                *e = r.add(*e, r.pi_mul(r.lift(rng.gen_range(0..q) as u16)));
            }
            let w = m4_mul(r, &emb, &k);
            let lhs = datum.phi_tilde(tw, &w)?;
            let rhs = datum.theta(tw, quart)? * datum.phi_x(tw, &k)?;
            check(close(lhs, rhs), || "torus character does not factor".into())?;
        }
        for &p in &wb.quad_units {
            let m = unpack2(r, p);
            let lhs = datum.phi_tilde(tw, &diag4(m, m))?;
            check(close(lhs, art.theta_on_quad[&p]), || {
                "doubled quadratic unit disagrees with theta".into()
            })?;
        }
        Ok(format!(
            "factorization holds on 150 samples and on all {} doubled quadratic units",
            wb.quad_units.len()
        ))
    });

    run_check(checks, "central-twist", || {
        for k in 0..wb.cls.class_count() {
            let g = unpack2(r, wb.cls.reps[k]);
            for &z in &wb.z_scalars {
                let zg = pack2(r, m2_scale(r, z, g));
                let om = art.omega_on_z[&z];
                check(close(art.report.total.at(&wb.cls, zg), om * art.report.total.values[k]), || {
                    format!("total character fails the central twist at class {k}, z = {z}")
                })?;
                for piece in &art.report.pieces {
                    check(close(piece.theta.at(&wb.cls, zg), om * piece.theta.values[k]), || {
                        format!(
                            "coset ({},{}) fails the central twist at class {k}, z = {z}",
                            piece.rep.u, piece.rep.v
                        )
                    })?;
                }
            }
        }
        Ok(format!(
            "central twist exact on {} classes x {} scalars for every piece",
            wb.cls.class_count(),
            wb.z_scalars.len()
        ))
    });

    run_check(checks, "kernel-content-per-coset", || {
        // Restriction of each coset piece to the congruence kernel: the
        // non-identity pieces carry exactly the conjugates of their invariant
        // with multiplicity |centralizer units| / (q - 1); the identity piece
        // carries multiplicity one on the conjugates of 2 X1 (or q(q-1) on
        // the scalar itself when the invariant is central).
        let q4 = (q as usize).pow(4);
        for piece in &art.report.pieces {
            let is_id = piece.rep.is_identity();
            if datum.det_l_closed(tw, piece.rep) == 0 {
                continue;
            }
            let b_inv = if is_id { datum.two_x1 } else { datum.b_delta(tw, piece.rep)? };
            let b_class = wb.m2cls.class_id(pack2(fq, b_inv));
            for bid in 0..q4 as u32 {
                let b = unpack2(fq, bid);
                let ip = restricted_inner_product(&wb.cls, &piece.theta, &wb.j1_elements, |h| {
                    phi_b_value(tw, b, unpack2(r, h))
                });
                let mult = round_int(ip)?;
                let same = wb.m2cls.class_id(bid) == b_class;
                let want = if !same {
                    0
                } else if !is_id {
                    (centralizer_unit_order(fq, b_inv) / (q as u64 - 1)) as i64
                } else if a1_zero {
                    (q as i64) * (q as i64 - 1)
                } else {
                    1
                };
                check(mult == want, || {
                    format!(
                        "kernel multiplicity {mult} at B id {bid} on coset ({},{}), expected {want}",
                        piece.rep.u, piece.rep.v
                    )
                })?;
            }
        }
        Ok(format!("kernel content exact over all {} residue matrices per coset", q4))
    });

    run_check(checks, "kernel-support-family", || {
        // The kernel characters appearing in the induced character are
        // exactly the conjugates of the two-parameter family orthogonal to
        // the embedded quadratic units under the trace form.
        let mut family_classes = HashSet::new();
        for m in 0..q as u16 {
            for n in 0..q as u16 {
                let b = kernel_family_member(tw, datum.two_x1, m, n);
                family_classes.insert(wb.m2cls.class_id(pack2(fq, b)));
            }
        }
        let q4 = (q as usize).pow(4);
        let mut support_classes = HashSet::new();
        let mut support_dim = 0i64;
        for bid in 0..q4 as u32 {
            let b = unpack2(fq, bid);
            let ip = restricted_inner_product(&wb.cls, &art.target, &wb.j1_elements, |h| {
                phi_b_value(tw, b, unpack2(r, h))
            });
            let mult = round_int(ip)?;
            let total_mult = art.j1_mults_total[bid as usize];
            check(mult == total_mult, || {
                format!("kernel content of the induced character differs from the total at B {bid}")
            })?;
            if mult != 0 {
                support_classes.insert(wb.m2cls.class_id(bid));
                support_dim += mult;
            }
        }
        check(support_classes == family_classes, || {
            format!(
                "support covers {} classes, family covers {}",
                support_classes.len(),
                family_classes.len()
            )
        })?;
        check(support_dim == (q as i64).pow(3) * (q as i64 - 1), || {
            "kernel multiplicities do not sum to the dimension".into()
        })?;
        Ok(format!(
            "support = family closure ({} conjugacy classes), multiplicities sum to {}",
            family_classes.len(),
            support_dim
        ))
    });

    run_check(checks, "scalar-kernel-multiplicity", || {
        let bid = pack2(fq, datum.two_x1);
        let mult = art.j1_mults_total[bid as usize];
        if a1_zero {
            check(mult == (q as i64) * (q as i64 - 1), || {
                format!("central-invariant multiplicity {mult}")
            })?;
            Ok(format!("central invariant carries multiplicity {mult} = q(q-1)"))
        } else {
            check(mult == 1, || format!("invariant kernel character has multiplicity {mult}, expected 1"))?;
            Ok("the invariant kernel character appears exactly once".into())
        }
    });

    run_check(checks, "family-characteristic-polynomial", || {
        let half_t = fq.mul(trace_t, fq.inv(fq.from_residue(2)));
        let mut saw_zero_disc = false;
        for m in 0..q as u16 {
            for n in 0..q as u16 {
                let b = kernel_family_member(tw, datum.two_x1, m, n);
                let d = kernel_family_disc(tw, datum.x[1], m, n);
                check(m2_tr(fq, b) == trace_t, || "family member trace off".into())?;
                let want_det = fq.sub(fq.mul(half_t, half_t), d);
                check(crate::groups::m2_det(fq, b) == want_det, || {
                    format!("family determinant off at ({m},{n})")
                })?;
                let ty = regular_type(fq, b);
                if a1_zero {
                    check((d == 0) == ((m, n) == (0, 0)), || {
                        "discriminant zero locus wrong for a central invariant".into()
                    })?;
                    if (m, n) == (0, 0) {
                        check(b == datum.two_x1 && ty.is_none(), || "origin is not the scalar".into())?;
                    }
                } else {
                    check(ty.is_some(), || format!("family member ({m},{n}) is scalar"))?;
                }
                if let Some(ty) = ty {
                    let want = if d == 0 {
                        BType::NonSemisimple
                    } else if fq.is_square(d) {
                        BType::SplitSemisimple
                    } else {
                        BType::Elliptic
                    };
                    check(ty == want, || format!("family member type off at ({m},{n})"))?;
                }
                if d == 0 {
                    saw_zero_disc = true;
                }
            }
        }
        if !a1_zero {
            let m0 = fq.neg(fq.mul(tw.s_fq, datum.x[1]));
            let n0 = fq.mul(fq.from_residue(2), datum.x[1]);
            check(kernel_family_disc(tw, datum.x[1], m0, n0) == 0, || {
                "predicted non-semisimple slot has nonzero discriminant".into()
            })?;
        }
        check(saw_zero_disc, || "no family member with vanishing discriminant".into())?;
        Ok(format!("characteristic polynomial closed form exact on all {} family members", q * q))
    });

    run_check(checks, "identity-irreducibility-dichotomy", || {
        let idx = art
            .report
            .pieces
            .iter()
            .position(|p| p.rep.is_identity())
            .ok_or_else(|| Error::Check("no identity piece".into()))?;
        let piece = &art.report.pieces[idx];
        let norm = inner_product_int(&wb.cls, &piece.theta, &piece.theta)?;
        if a1_zero {
            check(norm > 1, || "identity piece unexpectedly irreducible".into())?;
        } else {
            check(norm == 1, || format!("identity piece has norm {norm}, expected 1"))?;
        }
        for &m in &art.piece_mults[idx] {
            check(m == 0 || m == 1, || "identity piece is not multiplicity-free".into())?;
        }
        Ok(format!("identity piece norm {norm} (invariant {}central)", if a1_zero { "" } else { "non-" }))
    });

    run_check(checks, "per-coset-constituents", || {
        let glq = gl2_fq_order(q as u64);
        for (i, piece) in art.report.pieces.iter().enumerate() {
            let mults = &art.piece_mults[i];
            for &m in mults {
                check(m == 0 || m == 1, || {
                    format!("coset ({},{}) is not multiplicity-free", piece.rep.u, piece.rep.v)
                })?;
            }
            if piece.rep.is_identity() || piece.dim == 0 {
                continue;
            }
            let b = datum.b_delta(tw, piece.rep)?;
            let b_class = wb.m2cls.class_id(pack2(fq, b));
            let stab = centralizer_unit_order(fq, b);
            let want_count = (stab / (q as u64 - 1)) as usize;
            let want_dim = (glq / stab) as i64;
            let rows: Vec<usize> = (0..mults.len()).filter(|&k| mults[k] == 1).collect();
            check(rows.len() == want_count, || {
                format!(
                    "coset ({},{}) has {} constituents, expected {want_count}",
                    piece.rep.u, piece.rep.v, rows.len()
                )
            })?;
            for &k in &rows {
                let row = &wb.table.rows[k];
                let RowKind::Regular { b_rep, .. } = &row.kind else {
                    return Err(Error::Check("non-regular constituent in a non-identity coset".into()));
                };
                check(wb.m2cls.class_id(pack2(fq, *b_rep)) == b_class, || {
                    "constituent carries the wrong conjugacy invariant".into()
                })?;
                check(row.dim == want_dim, || {
                    format!("constituent dim {} expected {want_dim}", row.dim)
                })?;
            }
        }
        // Distinct cosets share no constituent, and the multiplicities add.
        for i in 0..art.report.pieces.len() {
            for j in (i + 1)..art.report.pieces.len() {
                let dot: i64 = art.piece_mults[i]
                    .iter()
                    .zip(&art.piece_mults[j])
                    .map(|(a, b)| a * b)
                    .sum();
                check(dot == 0, || format!("cosets {i} and {j} share a constituent"))?;
            }
        }
        let summed: Vec<i64> = (0..art.mults_total.len())
            .map(|k| art.piece_mults.iter().map(|m| m[k]).sum())
            .collect();
        check(summed == art.mults_total, || "piece multiplicities do not add to the total".into())?;
        Ok("constituent counts, dimensions and disjointness all match".into())
    });

    run_check(checks, "main-equality", || {
        let residual = art.report.total.max_abs_diff(&art.target);
        check(residual <= INT_TOL, || {
            format!("assembled character differs from the induced one by {residual:.3e}")
        })?;
        Ok(format!(
            "assembled character equals the one induced from the quadratic units (residual {residual:.1e})"
        ))
    });

    run_check(checks, "multiplicity-vectors", || {
        check(art.mults_total == art.mults_target, || {
            "multiplicity vectors of the two characters differ".into()
        })?;
        for &m in &art.mults_total {
            check(m == 0 || m == 1, || format!("multiplicity {m} outside {{0,1}}"))?;
        }
        let count = art.mults_total.iter().filter(|&&m| m == 1).count();
        let dim: i64 = (0..art.mults_total.len())
            .map(|k| art.mults_total[k] * wb.table.rows[k].dim)
            .sum();
        check(dim == (q as i64).pow(3) * (q as i64 - 1), || "constituent dimensions do not sum".into())?;
        // Both characters are multiplicity-free, so their self inner
        // products count the constituents.
        let n1 = inner_product_int(&wb.cls, &art.report.total, &art.report.total)?;
        let n2 = inner_product_int(&wb.cls, &art.target, &art.target)?;
        check(n1 == count as i64 && n2 == count as i64, || {
            format!("self inner products {n1}, {n2} differ from the constituent count {count}")
        })?;
        Ok(format!("identical multiplicity-free vectors with {count} constituents of total dim {dim}"))
    });

    run_check(checks, "conjugated-embedding-invariance", || {
        // Inducing from a conjugated copy of the quadratic units with the
        // transported character gives the same class function; checked with
        // a non-normalizing conjugator rather than assumed.
        let gid = *gl2_o2_elements(tw)
            .iter()
            .find(|p| !wb.norm_set.contains(p))
            .ok_or_else(|| Error::Check("no non-normalizing element".into()))?;
        let g = unpack2(r, gid);
        let gi = m2_inv(r, g)?;
        let conj_units: Vec<u32> = wb
            .quad_units
            .iter()
            .map(|&u| pack2(r, m2_mul(r, m2_mul(r, g, unpack2(r, u)), gi)))
            .collect();
        let transported = induce_from(&wb.cls, &conj_units, |h| {
            let back = pack2(r, m2_mul(r, m2_mul(r, gi, unpack2(r, h)), g));
            art.theta_on_quad[&back]
        })?;
        let residual = transported.max_abs_diff(&art.target);
        check(residual <= INT_TOL, || {
            format!("conjugated embedding changes the induced character by {residual:.3e}")
        })?;
        Ok(format!(
            "induced character invariant under a conjugated embedding (residual {residual:.1e})"
        ))
    });

    run_check(checks, "constituent-structure", || {
        let rows: Vec<usize> =
            (0..art.mults_total.len()).filter(|&k| art.mults_total[k] == 1).collect();
        // Central character of every constituent matches the datum.
        for &k in &rows {
            for &z in &wb.z_scalars {
                check(close(wb.table.central_value(tw, k, z), art.omega_on_z[&z]), || {
                    format!("constituent {k} has the wrong central character")
                })?;
            }
        }
        let mut class_counts: HashMap<u32, usize> = HashMap::new();
        let mut inflated_dim = 0i64;
        for &k in &rows {
            match &wb.table.rows[k].kind {
                RowKind::Regular { b_rep, .. } => {
                    check(m2_tr(fq, *b_rep) == trace_t, || {
                        format!("constituent {k} has invariant trace != {trace_t}")
                    })?;
                    *class_counts.entry(wb.m2cls.class_id(pack2(fq, *b_rep))).or_insert(0) += 1;
                }
                RowKind::Inflated { .. } => {
                    check(a1_zero, || {
                        format!("inflated constituent {k} although the invariant is non-central")
                    })?;
                    inflated_dim += wb.table.rows[k].dim;
                }
            }
        }
        // Expected regular classes: the invariants of the non-vanishing
        // cosets (without the identity when its invariant is central).
        let mut want: HashMap<u32, usize> = HashMap::new();
        for &rep in &nonvanishing {
            if rep.is_identity() {
                if !a1_zero {
                    want.insert(wb.m2cls.class_id(pack2(fq, datum.two_x1)), 1);
                }
                continue;
            }
            let b = datum.b_delta(tw, rep)?;
            let count = (centralizer_unit_order(fq, b) / (q as u64 - 1)) as usize;
            want.insert(wb.m2cls.class_id(pack2(fq, b)), count);
        }
        check(class_counts == want, || {
            format!("regular constituent census {class_counts:?}, expected {want:?}")
        })?;
        if a1_zero {
            check(inflated_dim == (q as i64) * (q as i64 - 1), || {
                format!("inflated constituents have total dim {inflated_dim}, expected q(q-1)")
            })?;
            Ok(format!(
                "central case: inflated block of dim {inflated_dim} plus regular classes {:?}",
                want.values().collect::<Vec<_>>()
            ))
        } else {
            check(inflated_dim == 0, || "unexpected inflated constituent".into())?;
            Ok(format!(
                "non-central case: all constituents regular with trace {trace_t}, counts {:?}",
                want.values().collect::<Vec<_>>()
            ))
        }
    });

    run_check(checks, "mackey-multiplicity-cross-check", || {
        mackey_cross_check(wb, art, a1_zero, trace_t)
    });

    if heavy.kernel_samples > 0 {
        heavy_kernel_checks(wb, art, &nonvanishing, heavy.kernel_samples, checks);
    }
    if heavy.pair_sum_cases > 0 {
        heavy_pair_checks(wb, art, heavy.pair_sum_cases, checks);
    }
    if heavy.oracle_values > 0 {
        run_check(checks, "oracle-vs-closed-form", || {
            oracle_check(wb, art, &nonvanishing, heavy.oracle_values)
        });
    }
}

/// Multiplicities of induced extensions, computed two independent ways: as
/// inner products against the decomposed character, and by the double-coset
/// sum over conjugates of the quadratic units. Covers one invariant of each
/// factorization type with the trace of the datum.
fn mackey_cross_check(
    wb: &Workbench,
    art: &DatumArtifacts,
    a1_zero: bool,
    trace_t: FqEl,
) -> Result<String> {
    let tw = &wb.tw;
    let r = &tw.o2;
    let fq = &r.fq;
    let q = fq.q;
    let datum = &art.datum;
    let half_t = fq.mul(trace_t, fq.inv(fq.from_residue(2)));

    let mut b_list: Vec<M2> = Vec::new();
    if a1_zero {
        // An embedded non-split invariant with the right trace.
        let b0 = fq.mul(fq.sub(trace_t, tw.s_fq), fq.inv(fq.from_residue(2)));
        b_list.push(embed2_res(tw, b0, 1));
    } else {
        b_list.push(datum.two_x1);
    }
    for m1 in 0..q as u16 {
        if m1 == half_t {
            continue;
        }
        let m2 = fq.sub(trace_t, m1);
        if m1 < m2 {
            b_list.push([m1, 0, 0, m2]);
        }
    }
    b_list.push([half_t, 1, 0, half_t]);

    let mut lines = Vec::new();
    for b in b_list {
        let btype = regular_type(fq, b).ok_or_else(|| Error::Check("scalar invariant".into()))?;
        let stab = centralizer_unit_order(fq, b);
        let inertia = Gl2Subgroup::Inertia(b).elements(tw)?;
        let inertia_set: HashSet<u32> = inertia.iter().copied().collect();

        // Seed character: the datum's central character on unit scalars glued
        // with the kernel character of b.
        let mut seed: AbelianChar = HashMap::new();
        for &z in &wb.z_scalars {
            for &j in &wb.j1_elements {
                let jm = unpack2(r, j);
                let m = pack2(r, m2_scale(r, z, jm));
                let val = art.omega_on_z[&z] * phi_b_value(tw, b, jm);
                if let Some(prev) = seed.get(&m) {
                    check(close(*prev, val), || "seed character inconsistent".into())?;
                } else {
                    seed.insert(m, val);
                }
            }
        }
        let exts = all_extensions(&inertia, &seed, |a, c| wb.mul_packed(a, c))?;
        let want_exts = (stab / (q as u64 - 1)) as usize;
        check(exts.len() == want_exts, || {
            format!("{} extensions of the seed, expected {want_exts}", exts.len())
        })?;

        // Double cosets of (quadratic units, centralizer of b) at residue
        // level; both subgroups contain the congruence kernel.
        let cent_res: Vec<M2> = gl2_fq_elements(fq)
            .into_iter()
            .map(|p| unpack2(fq, p))
            .filter(|m| m2_mul(fq, *m, b) == m2_mul(fq, b, *m))
            .collect();
        let quad_res: Vec<M2> = wb.quad_res_units.iter().map(|&p| unpack2(fq, p)).collect();
        let mut seen: HashSet<u32> = HashSet::new();
        let mut dcoset_reps: Vec<M2> = Vec::new();
        for gid in gl2_fq_elements(fq) {
            if seen.contains(&gid) {
                continue;
            }
            let g = unpack2(fq, gid);
            dcoset_reps.push(g);
            for t in &quad_res {
                for s in &cent_res {
                    seen.insert(pack2(fq, m2_mul(fq, m2_mul(fq, *t, g), *s)));
                }
            }
        }

        let dim_want = (wb.cls.group_order / (stab * (q as u64).pow(4))) as i64;
        let id_packed = pack2(r, m2_id(r));
        let mut mults: Vec<i64> = Vec::new();
        for ext in &exts {
            let sigma = induce_from(&wb.cls, &inertia, |h| ext[&h])?;
            check(round_int(sigma.at(&wb.cls, id_packed))? == dim_want, || {
                "induced extension has unexpected dimension".into()
            })?;
            let lhs = inner_product_int(&wb.cls, &art.target, &sigma)?;
            let lhs_direct = inner_product_int(&wb.cls, &art.report.total, &sigma)?;
            check(lhs == lhs_direct, || "the two induced characters pair differently".into())?;

            let mut rhs = ZERO;
            for gbar in &dcoset_reps {
                let g = m2_lift(tw, *gbar);
                let gi = m2_inv(r, g)?;
                let mut acc = ZERO;
                let mut count = 0usize;
                for &up in &wb.quad_units {
                    let w = pack2(r, m2_mul(r, m2_mul(r, gi, unpack2(r, up)), g));
                    if inertia_set.contains(&w) {
                        acc += art.theta_on_quad[&up] * ext[&w].conj();
                        count += 1;
                    }
                }
                rhs += acc / count as f64;
            }
            check((Cx::new(lhs as f64, 0.0) - rhs).norm() <= 1e-6, || {
                format!("double-coset sum {rhs} differs from the inner product {lhs}")
            })?;
            mults.push(lhs);
        }

        // Expected multiplicities by factorization type.
        match (btype, a1_zero) {
            (BType::SplitSemisimple, _) | (BType::NonSemisimple, false) | (BType::Elliptic, true) => {
                check(mults.iter().all(|&m| m == 1), || {
                    format!("{btype:?} extensions have multiplicities {mults:?}, expected all 1")
                })?;
            }
            (BType::NonSemisimple, true) => {
                check(mults.iter().all(|&m| m == 0), || {
                    format!("central-invariant case admits a non-semisimple constituent {mults:?}")
                })?;
            }
            (BType::Elliptic, false) => {
                let total: i64 = mults.iter().sum();
                check(total == 1 && mults.iter().all(|&m| m == 0 || m == 1), || {
                    format!("invariant-class extensions have multiplicities {mults:?}, expected one 1")
                })?;
                // The surviving extension restricts to theta on the
                // quadratic units.
                let winner = mults.iter().position(|&m| m == 1).unwrap();
                let t1 = wb
                    .quad_units
                    .iter()
                    .map(|&u| art.theta_on_quad[&u] * exts[winner][&u].conj())
                    .sum::<Cx>()
                    / wb.quad_units.len() as f64;
                check(round_int(t1)? == 1, || {
                    "the surviving extension is not the theta extension".into()
                })?;
            }
        }

        // The multiset agrees with the decomposition against table rows
        // carrying the same invariant and central character.
        let b_class = wb.m2cls.class_id(pack2(fq, b));
        let mut table_mults: Vec<i64> = Vec::new();
        for (k, row) in wb.table.rows.iter().enumerate() {
            let RowKind::Regular { b_rep, .. } = &row.kind else { continue };
            if wb.m2cls.class_id(pack2(fq, *b_rep)) != b_class {
                continue;
            }
            let central_match = wb
                .z_scalars
                .iter()
                .all(|&z| close(wb.table.central_value(tw, k, z), art.omega_on_z[&z]));
            if central_match {
                table_mults.push(art.mults_target[k]);
            }
        }
        let mut a_sorted = mults.clone();
        a_sorted.sort_unstable();
        table_mults.sort_unstable();
        check(a_sorted == table_mults, || {
            format!("extension multiplicities {a_sorted:?} differ from table rows {table_mults:?}")
        })?;

        lines.push(format!("{btype:?}:{mults:?}"));
    }
    Ok(format!("inner products match double-coset sums; {}", lines.join(" ")))
}

fn heavy_kernel_checks(
    wb: &Workbench,
    art: &DatumArtifacts,
    nonvanishing: &[CosetRep],
    samples: usize,
    checks: &mut Vec<CheckResult>,
) {
    let tw = &wb.tw;
    let r = &tw.o2;
    let fq = &r.fq;
    let q = fq.q;
    let datum = &art.datum;
    let elements = gl2_o2_elements(tw);

    run_check(checks, "kernel-pairing-vanishing", || {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let q4 = (q as f64).powi(4);
        let mut positives = 0usize;
        let mut negatives = 0usize;
        for i in 0..samples {
            let rep = nonvanishing[rng.gen_range(0..nonvanishing.len())];
            let rm = unpack2(r, elements[rng.gen_range(0..elements.len())]);
            let s = if i % 2 == 0 {
                // Engineered to satisfy the vanishing criterion.
                let rl = m2_mul(fq, m2_reduce(tw, rm), datum.l_delta(tw, rep));
                let mut k = m2_id(r);
                for e in k.iter_mut().take(3) {
                    *e = r.add(*e, r.pi_mul(r.lift(rng.gen_range(0..q) as u16)));
                }
                m2_mul(r, m2_lift(tw, rl), k)
            } else {
                unpack2(r, elements[rng.gen_range(0..elements.len())])
            };
            let (val, crit) = datum.kernel_x_sum(tw, rep, s, rm)?;
            let want = if crit { Cx::new(q4, 0.0) } else { ZERO };
            check((val - want).norm() <= 1e-6, || {
                format!("kernel sum {val} with criterion {crit}")
            })?;
            if crit {
                positives += 1;
            } else {
                negatives += 1;
            }
        }
        check(positives >= 5 && negatives >= 5, || {
            format!("unbalanced sampling: {positives} positives, {negatives} negatives")
        })?;
        Ok(format!("{samples} samples ({positives} vanishing-criterion positives)"))
    });

    run_check(checks, "kernel-average", || {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let q8 = (q as f64).powi(8);
        for _ in 0..2 {
            let rep = nonvanishing[rng.gen_range(0..nonvanishing.len())];
            let rm = unpack2(r, elements[rng.gen_range(0..elements.len())]);
            let a: M2 = [
                rng.gen_range(0..r.size) as u16,
                rng.gen_range(0..r.size) as u16,
                rng.gen_range(0..r.size) as u16,
                rng.gen_range(0..r.size) as u16,
            ];
            let val = datum.kernel_q_sum(tw, rep, rm, a)?;
            check((val - Cx::new(q8, 0.0)).norm() <= 1e-3, || {
                format!("kernel average {val}, expected q^8")
            })?;
        }
        Ok("full kernel sums collapse to q^8 on 2 samples".into())
    });

    run_check(checks, "diagonal-closed-form", || {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..8 {
            let rep = nonvanishing[rng.gen_range(0..nonvanishing.len())];
            let rm = unpack2(r, elements[rng.gen_range(0..elements.len())]);
            let a: M2 = [
                rng.gen_range(0..r.size) as u16,
                rng.gen_range(0..r.size) as u16,
                rng.gen_range(0..r.size) as u16,
                rng.gen_range(0..r.size) as u16,
            ];
            let (direct, closed) = datum.diagonal_value_pair(tw, rep, rm, a)?;
            check(close(direct, closed), || "diagonal value differs from its closed form".into())?;
        }
        Ok("diagonal torus values match the conjugated kernel character on 8 samples".into())
    });
}

fn heavy_pair_checks(
    wb: &Workbench,
    art: &DatumArtifacts,
    cases: usize,
    checks: &mut Vec<CheckResult>,
) {
    let tw = &wb.tw;
    let r = &tw.o2;
    let fq = &r.fq;
    let q = fq.q;
    let datum = &art.datum;

    run_check(checks, "pair-sum-support", || {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let nonscalar_h = |rng: &mut ChaCha8Rng| -> M2 {
            loop {
                let p = wb.h_elements[rng.gen_range(0..wb.h_elements.len())];
                let m = unpack2(r, p);
                let mb = m2_reduce(tw, m);
                if !(mb[1] == 0 && mb[2] == 0 && mb[0] == mb[3]) {
                    return m;
                }
            }
        };
        let g = nonscalar_h(&mut rng);
        let s = unpack2(r, wb.normalizer[rng.gen_range(0..wb.normalizer.len())]);
        let q12 = (q as f64).powi(12);
        let mut kernel_mult = m2_id(r);
        kernel_mult[1] = r.add(kernel_mult[1], r.pi_mul(1));
        let z_nontriv = *wb
            .z_scalars
            .iter()
            .find(|&&z| r.reduce(z) != 1)
            .ok_or_else(|| Error::Check("no non-trivial scalar".into()))?;
        let mut case_list: Vec<(&str, M2, f64)> = vec![
            ("equal", s, q12),
            ("kernel multiple", m2_mul(r, kernel_mult, s), q12),
            ("central multiple", m2_mul(r, m2_scalar(r, z_nontriv), s), 0.0),
            ("quadratic multiple", m2_mul(r, nonscalar_h(&mut rng), s), 0.0),
        ];
        case_list.truncate(cases);
        let mut seen = Vec::new();
        for (label, rm, want) in case_list {
            let val = datum.pair_sum_identity(tw, g, s, rm)?;
            check((val - Cx::new(want, 0.0)).norm() <= 1e-3, || {
                format!("pair sum for the {label} case is {val}, expected {want}")
            })?;
            seen.push(label);
        }
        Ok(format!(
            "pair sum is q^12 on the congruence-kernel cases and 0 otherwise ({})",
            seen.join(", ")
        ))
    });

    run_check(checks, "diagonal-independence", || {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..6 {
            let g = unpack2(r, wb.h_elements[rng.gen_range(0..wb.h_elements.len())]);
            let rm = unpack2(r, wb.normalizer[rng.gen_range(0..wb.normalizer.len())]);
            let h = unpack2(r, wb.h_elements[rng.gen_range(0..wb.h_elements.len())]);
            let s = m2_mul(r, h, rm);
            let (lhs, rhs) = datum.diagonal_independence_pair(tw, g, s, rm)?;
            check(close(lhs, rhs), || "doubled value depends on the first conjugator".into())?;
        }
        Ok("doubled torus values independent of the conjugator on 6 samples".into())
    });

    run_check(checks, "normalizer-average-spot", || {
        let idx = art
            .report
            .pieces
            .iter()
            .position(|p| p.rep.is_identity())
            .ok_or_else(|| Error::Check("no identity piece".into()))?;
        let piece = &art.report.pieces[idx];
        let g0 = embed2_o2(tw, r.lift(tw.q2_g0.0), r.lift(tw.q2_g0.1));
        let mut g1 = g0;
        g1[1] = r.add(g1[1], r.pi_mul(1));
        let g2 = m2_scale(r, wb.z_scalars[wb.z_scalars.len() - 1], g0);
        for g in [g0, g1, g2] {
            let direct = datum.normalizer_average(tw, g)?;
            let closed = piece.theta.at(&wb.cls, pack2(r, g));
            check(close(direct, closed), || {
                "identity-coset value differs from the normalizer average".into()
            })?;
        }
        Ok("normalizer average reproduces the identity-coset character on 3 points".into())
    });
}

fn oracle_check(
    wb: &Workbench,
    art: &DatumArtifacts,
    nonvanishing: &[CosetRep],
    values: usize,
) -> Result<String> {
    let tw = &wb.tw;
    let r = &tw.o2;
    let datum = &art.datum;
    // Probe points: central region (scalar residue), the quadratic region,
    // and a split-residue point where the closed forms vanish.
    let z = *wb
        .z_scalars
        .iter()
        .find(|&&z| r.reduce(z) != 1)
        .ok_or_else(|| Error::Check("no non-trivial scalar".into()))?;
    let mut unip = m2_id(r);
    unip[1] = r.add(unip[1], r.pi_mul(1));
    let mut lower = m2_id(r);
    lower[2] = r.add(lower[2], r.pi_mul(1));
    let quad = embed2_o2(tw, r.lift(tw.q2_g0.0), r.lift(tw.q2_g0.1));
    let split: M2 = [1, 0, 0, z];
    let probes: Vec<M2> = vec![
        m2_id(r),
        m2_scalar(r, z),
        unip,
        m2_scale(r, z, lower),
        quad,
        split,
    ];
    let mut compared = 0usize;
    for &rep in nonvanishing {
        let piece = art
            .report
            .pieces
            .iter()
            .find(|p| p.rep == rep)
            .ok_or_else(|| Error::Check("missing piece".into()))?;
        let oracle = MackeyOracle::build(tw, rep)?;
        for g in probes.iter().take(values) {
            let direct = oracle.whittaker_value(tw, datum, *g)?;
            let closed = piece.theta.at(&wb.cls, pack2(r, *g));
            check((direct - closed).norm() <= 1e-6, || {
                format!(
                    "oracle value {direct} differs from the closed form {closed} on coset ({},{})",
                    rep.u, rep.v
                )
            })?;
            compared += 1;
        }
    }
    Ok(format!(
        "raw double-coset evaluation matches the closed forms at {compared} points across {} cosets",
        nonvanishing.len()
    ))
}

/// Report for one datum: the checklist plus the integer summary.
#[derive(Debug, Clone, Serialize)]
pub struct DatumReport {
    pub x: [u16; 4],
    pub c: u32,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub summary: Option<DatumSummary>,
}

/// Full verification report; `verdict` is the conjunction of every check.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema_version: String,
    pub q: u32,
    pub flavor: RingFlavor,
    /// Scan-selected ring constants (alpha, a, b) as residue indices.
    pub ring_constants: (u16, u16, u16),
    pub tower_checks: Vec<CheckResult>,
    pub tower_summary: TowerSummary,
    pub data: Vec<DatumReport>,
    pub verdict: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// The default verification sweep: both invariant kinds crossed with five
/// extension indices.
pub fn default_sweep() -> Vec<(Q4, u32)> {
    let mut out = Vec::new();
    for x in [[0, 1, 1, 0], [0, 0, 1, 0]] {
        for c in 0..5 {
            out.push((x, c));
        }
    }
    out
}

/// Run the checklist for a list of data on one base ring. Heavy sampled
/// checks run on the first datum only.
pub fn run_verification(
    q: u32,
    flavor: RingFlavor,
    data: &[(Q4, u32)],
    mut heavy: HeavyChecks,
) -> Result<VerificationReport> {
    if q != 3 {
        // The raw double-coset evaluator and the quadratic pair sums are
        // budgeted for the smallest ring only.
        heavy.oracle_values = 0;
        heavy.pair_sum_cases = 0;
    }
    let wb = Workbench::new(q, flavor)?;
    let (tower_checks_out, tower_summary) = tower_checks(&wb);
    let mut reports = Vec::new();
    for (i, &(x, c)) in data.iter().enumerate() {
        let h = if i == 0 { heavy } else { HeavyChecks::none() };
        let outcome = verify_datum(&wb, x, c, h);
        reports.push(DatumReport {
            x,
            c,
            passed: all_passed(&outcome.checks),
            checks: outcome.checks,
            summary: outcome.summary,
        });
    }
    let verdict = all_passed(&tower_checks_out) && reports.iter().all(|r| r.passed);
    Ok(VerificationReport {
        schema_version: "1".to_string(),
        q,
        flavor,
        ring_constants: (wb.tw.alpha, wb.tw.a, wb.tw.b),
        tower_checks: tower_checks_out,
        tower_summary,
        data: reports,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn bench(flavor: RingFlavor) -> &'static Workbench {
        static EQ: OnceLock<Workbench> = OnceLock::new();
        static WITT: OnceLock<Workbench> = OnceLock::new();
        let cell = match flavor {
            RingFlavor::EqualChar => &EQ,
            RingFlavor::MixedChar => &WITT,
        };
        cell.get_or_init(|| Workbench::new(3, flavor).unwrap())
    }

    fn assert_all(checks: &[CheckResult]) {
        for c in checks {
            assert!(c.passed, "{} failed: {}", c.name, c.detail);
        }
    }

    #[test]
    fn tower_checks_pass_at_q3() {
        let wb = bench(RingFlavor::EqualChar);
        let (checks, summary) = tower_checks(wb);
        assert_all(&checks);
        assert_eq!(summary.coset_count, 4);
        assert_eq!(summary.table_rows, 78);
    }

    #[test]
    fn noncentral_datum_passes_light_checklist() {
        let wb = bench(RingFlavor::EqualChar);
        let outcome = verify_datum(wb, [0, 1, 1, 0], 1, HeavyChecks::none());
        assert_all(&outcome.checks);
        let s = outcome.summary.unwrap();
        assert!(s.mult_free && s.main_equality);
        assert_eq!(s.identity_inner, 1);
        assert_eq!(s.dim_total, 54);
        assert_eq!(s.constituent_count, 6);
    }

    #[test]
    fn central_datum_passes_light_checklist() {
        let wb = bench(RingFlavor::EqualChar);
        let outcome = verify_datum(wb, [0, 0, 1, 0], 1, HeavyChecks::none());
        assert_all(&outcome.checks);
        let s = outcome.summary.unwrap();
        assert!(s.mult_free && s.main_equality);
        assert!(s.identity_inner > 1);
        assert_eq!(s.dim_total, 54);
    }

    #[test]
    #[ignore = "sampled pair sums plus the raw double-coset evaluator; minutes"]
    fn heavy_checks_pass_on_one_datum() {
        let wb = bench(RingFlavor::EqualChar);
        let outcome = verify_datum(wb, [0, 1, 1, 0], 0, HeavyChecks::standard());
        assert_all(&outcome.checks);
    }

    #[test]
    #[ignore = "q=5 pipeline; minutes"]
    fn q5_pipeline_passes() {
        let wb = Workbench::new(5, RingFlavor::EqualChar).unwrap();
        let (checks, summary) = tower_checks(&wb);
        assert_all(&checks);
        assert_eq!(summary.coset_count, 6);
        assert_eq!(summary.table_rows, 620);
        let outcome = verify_datum(&wb, [0, 1, 1, 0], 1, HeavyChecks::none());
        assert_all(&outcome.checks);
        let s = outcome.summary.unwrap();
        assert!(s.mult_free && s.main_equality);
        assert_eq!(s.dim_total, 500);
    }

    #[test]
    fn flavors_agree_on_integer_summaries() {
        let eq = bench(RingFlavor::EqualChar);
        let witt = bench(RingFlavor::MixedChar);
        let (eq_checks, eq_summary) = tower_checks(eq);
        let (witt_checks, witt_summary) = tower_checks(witt);
        assert_all(&eq_checks);
        assert_all(&witt_checks);
        assert_eq!(eq_summary, witt_summary);
        for (x, c) in [([0u16, 1, 1, 0], 2u32), ([0, 0, 1, 0], 3)] {
            let a = verify_datum(eq, x, c, HeavyChecks::none());
            let b = verify_datum(witt, x, c, HeavyChecks::none());
            assert_all(&a.checks);
            assert_all(&b.checks);
            assert_eq!(a.summary.unwrap(), b.summary.unwrap(), "x={x:?} c={c}");
        }
    }
}
