//! State sums over triangulated 4-manifolds.
//!
//! A `+` pentachoron carries `Q`, a `−` one carries `Q̄` with every slot
//! variance flipped, so slot `i` of any pentachoron has variance
//! `sign·(−1)^i`. Glued tetrahedra pair a slot with the matching slot of the
//! neighbour; unglued ones stay open as boundary slots, ordered by their
//! vertex labels.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::simplicial::{apply_move, distinguished_splitting, find_move_sites, SimplicialError, Triangulation};
use crate::solutions::{SolutionSpec, Q_VARIANCES};
use crate::tensor::{GroupTensor, Side, TensorError, Variance};
use crate::verify::{relative_error, Backend};

/// Largest intermediate arity a contraction may create.
pub const MAX_ARITY: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateSumError {
    #[error("state sums need a 4-dimensional triangulation, got dimension {0}")]
    WrongDimension(usize),
    #[error("tetrahedron {face:?} is seen with {variance:?} variance from both sides")]
    VarianceClash { face: Vec<u32>, variance: Variance },
    #[error("contraction would create a tensor with {0} slots (limit {MAX_ARITY})")]
    TooLarge(usize),
    #[error("the solution carries no symmetry kernels")]
    NoKernels,
    #[error("solution tensor does not have variances (up,down,up,down,up)")]
    NotSolutionShaped,
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

/// How a clashing tetrahedron is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingRule {
    /// Clashes are errors.
    #[default]
    Componentwise,
    /// Experimental: one side of a clash goes through `S` and has its
    /// variance flipped. Not certified.
    KernelBridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SlotRef {
    pub simplex: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    pub a: SlotRef,
    pub b: SlotRef,
    pub face: Vec<u32>,
    pub bridged: bool,
}

#[derive(Debug, Clone)]
pub struct StateSumAssignment {
    pub triangulation: Triangulation,
    pub label: String,
    pub tensors: Vec<GroupTensor>,
    pub pairings: Vec<Pairing>,
    /// Open slots with their tetrahedra, sorted by labels.
    pub boundary: Vec<(SlotRef, Vec<u32>)>,
}

pub fn slot_variance(sign: i8, slot: usize) -> Variance {
    if (sign > 0) == slot.is_multiple_of(2) {
        Variance::Up
    } else {
        Variance::Down
    }
}

pub fn build_assignment(t: &Triangulation, sol: &SolutionSpec) -> Result<StateSumAssignment, StateSumError> {
    build_assignment_with(t, sol, PairingRule::Componentwise)
}

pub fn build_assignment_with(
    t: &Triangulation,
    sol: &SolutionSpec,
    rule: PairingRule,
) -> Result<StateSumAssignment, StateSumError> {
    if t.dim() != 4 {
        return Err(StateSumError::WrongDimension(t.dim()));
    }
    if sol.q.variances() != Q_VARIANCES {
        return Err(StateSumError::NotSolutionShaped);
    }
    let qbar = sol.q.conj();
    let mut tensors: Vec<GroupTensor> = t
        .simplexes()
        .iter()
        .map(|s| if s.sign > 0 { sol.q.clone() } else { qbar.clone() })
        .collect();
    let mut pairings = Vec::new();
    let mut boundary = Vec::new();
    for s in 0..t.len() {
        for f in 0..5 {
            let here = SlotRef { simplex: s, slot: f };
            let face = t.facet_labels(s, f);
            match t.gluing(s, f) {
                None => boundary.push((here, face)),
                Some((s2, f2)) if (s2, f2) > (s, f) => {
                    let v1 = slot_variance(t.simplexes()[s].sign, f);
                    let v2 = slot_variance(t.simplexes()[s2].sign, f2);
                    let mut bridged = false;
                    if v1 == v2 {
                        match rule {
                            PairingRule::Componentwise => {
                                return Err(StateSumError::VarianceClash { face, variance: v1 })
                            }
                            PairingRule::KernelBridge => {
                                let k = sol.kernels.as_ref().ok_or(StateSumError::NoKernels)?;
                                let bent = tensors[s2].apply_kernel(f2, &k.s, Side::Left)?;
                                let mut vars = bent.variances().to_vec();
                                vars[f2] = vars[f2].flip();
                                tensors[s2] = bent.with_variances(vars)?;
                                bridged = true;
                            }
                        }
                    }
                    pairings.push(Pairing {
                        a: here,
                        b: SlotRef { simplex: s2, slot: f2 },
                        face,
                        bridged,
                    });
                }
                Some(_) => {}
            }
        }
    }
    boundary.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(StateSumAssignment {
        triangulation: t.clone(),
        label: sol.label.clone(),
        tensors,
        pairings,
        boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContractionOrder {
    /// Repeatedly merge the connected pair giving the smallest result.
    #[default]
    Greedy,
    /// Fold the pentachora in index order.
    Sequential,
}

/// A contracted state sum: boundary slots follow `faces`.
#[derive(Debug, Clone)]
pub struct StateSumValue {
    pub tensor: GroupTensor,
    pub faces: Vec<Vec<u32>>,
}

impl StateSumValue {
    pub fn is_closed(&self) -> bool {
        self.faces.is_empty()
    }

    /// The scalar of a closed state sum.
    pub fn scalar(&self) -> Option<Scalar> {
        self.is_closed().then(|| self.tensor.scalar_value())
    }
}

struct Group {
    tensor: GroupTensor,
    slots: Vec<SlotRef>,
}

pub fn partition(a: &StateSumAssignment) -> Result<StateSumValue, StateSumError> {
    partition_with(a, ContractionOrder::Greedy)
}

pub fn partition_with(a: &StateSumAssignment, order: ContractionOrder) -> Result<StateSumValue, StateSumError> {
    let mut partner: BTreeMap<SlotRef, SlotRef> = BTreeMap::new();
    for p in &a.pairings {
        partner.insert(p.a, p.b);
        partner.insert(p.b, p.a);
    }
    let mut groups: Vec<Option<Group>> = Vec::new();
    for (s, t) in a.tensors.iter().enumerate() {
        let slots: Vec<SlotRef> = (0..5).map(|f| SlotRef { simplex: s, slot: f }).collect();
        let g = self_trace(
            Group {
                tensor: t.clone(),
                slots,
            },
            &partner,
        )?;
        groups.push(Some(g));
    }
    let owner = |groups: &[Option<Group>], r: &SlotRef| groups.iter().position(|g| g.as_ref().is_some_and(|g| g.slots.contains(r)));
    loop {
        let live: Vec<usize> = (0..groups.len()).filter(|&i| groups[i].is_some()).collect();
        if live.len() <= 1 {
            break;
        }
        // candidate merges: (resulting arity, a, b)
        let mut cands: Vec<(usize, usize, usize)> = Vec::new();
        for &i in &live {
            let gi = groups[i].as_ref().expect("live");
            let mut seen = Vec::new();
            for r in &gi.slots {
                if let Some(p) = partner.get(r) {
                    if let Some(j) = owner(&groups, p) {
                        if j > i && !seen.contains(&j) {
                            seen.push(j);
                            let gj = groups[j].as_ref().expect("live");
                            let shared = gi.slots.iter().filter(|r| partner.get(r).is_some_and(|p| gj.slots.contains(p))).count();
                            cands.push((gi.slots.len() + gj.slots.len() - 2 * shared, i, j));
                        }
                    }
                }
            }
        }
        let pick = match order {
            ContractionOrder::Greedy => cands.iter().min().copied(),
            ContractionOrder::Sequential => {
                let first = live[0];
                cands
                    .iter()
                    .filter(|c| c.1 == first)
                    .min_by_key(|c| c.2)
                    .copied()
                    .or_else(|| cands.iter().min_by_key(|c| (c.1, c.2)).copied())
            }
        };
        let (i, j) = match pick {
            Some((arity, i, j)) => {
                if arity > MAX_ARITY {
                    return Err(StateSumError::TooLarge(arity));
                }
                (i, j)
            }
            // disconnected pieces: outer product of the first two
            None => {
                let arity = live[..2].iter().map(|&k| groups[k].as_ref().expect("live").slots.len()).sum();
                if arity > MAX_ARITY {
                    return Err(StateSumError::TooLarge(arity));
                }
                (live[0], live[1])
            }
        };
        let gi = groups[i].take().expect("live");
        let gj = groups[j].take().expect("live");
        let mut pairs = Vec::new();
        for (x, r) in gi.slots.iter().enumerate() {
            if let Some(p) = partner.get(r) {
                if let Some(y) = gj.slots.iter().position(|s| s == p) {
                    pairs.push((x, y));
                }
            }
        }
        let tensor = gi.tensor.contract_pairs(&gj.tensor, &pairs)?;
        let slots: Vec<SlotRef> = gi
            .slots
            .iter()
            .enumerate()
            .filter(|(x, _)| !pairs.iter().any(|p| p.0 == *x))
            .map(|(_, r)| *r)
            .chain(gj.slots.iter().enumerate().filter(|(y, _)| !pairs.iter().any(|p| p.1 == *y)).map(|(_, r)| *r))
            .collect();
        groups[i] = Some(Group { tensor, slots });
    }
    let last = groups.into_iter().flatten().next().expect("at least one pentachoron");
    let perm: Vec<usize> = a
        .boundary
        .iter()
        .map(|(r, _)| last.slots.iter().position(|s| s == r).expect("open slot survives"))
        .collect();
    Ok(StateSumValue {
        tensor: last.tensor.permute(&perm)?,
        faces: a.boundary.iter().map(|(_, f)| f.clone()).collect(),
    })
}

fn self_trace(g: Group, partner: &BTreeMap<SlotRef, SlotRef>) -> Result<Group, StateSumError> {
    let mut pairs = Vec::new();
    for (x, r) in g.slots.iter().enumerate() {
        if let Some(p) = partner.get(r) {
            if let Some(y) = g.slots.iter().position(|s| s == p) {
                if x < y {
                    pairs.push((x, y));
                }
            }
        }
    }
    if pairs.is_empty() {
        return Ok(g);
    }
    let tensor = g.tensor.trace(&pairs)?;
    let slots = g
        .slots
        .iter()
        .enumerate()
        .filter(|(x, _)| !pairs.iter().any(|p| p.0 == *x || p.1 == *x))
        .map(|(_, r)| *r)
        .collect();
    Ok(Group { tensor, slots })
}

/// Closed state sum of `t` for `sol`.
pub fn partition_value(t: &Triangulation, sol: &SolutionSpec) -> Result<Scalar, StateSumError> {
    let v = partition(&build_assignment(t, sol)?)?;
    Ok(v.tensor.scalar_value())
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub backend: Backend,
    pub moves_requested: usize,
    pub moves_applied: usize,
    /// Steps at which no (3,3) site was available.
    pub no_site_steps: Vec<usize>,
    /// Value before any move, then after each applied move.
    pub values: Vec<Scalar>,
    /// Exact: every value equals the first. Float: within 1e-9 relative.
    pub all_equal: bool,
    pub max_relative_error: f64,
    pub first_divergence: Option<usize>,
    pub final_triangulation: Triangulation,
}

/// `k` seeded random (3,3) moves, recomputing the state sum after each.
///
/// Even steps try `(I₀,J₀)`, odd steps `(J₀,I₀)`, falling back to the other
/// direction when no site exists.
pub fn invariance_run(
    t: &Triangulation,
    sol: &SolutionSpec,
    k: usize,
    seed: u64,
    backend: Backend,
) -> Result<InvarianceReport, StateSumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (i0, j0) = distinguished_splitting(5);
    let mut cur = t.clone();
    let first = partition_value(&cur, sol)?;
    let mut values = vec![first.clone()];
    let mut no_site_steps = Vec::new();
    let mut all_equal = true;
    let mut max_err: f64 = 0.0;
    let mut first_divergence = None;
    for step in 0..k {
        let dirs = if step % 2 == 0 { [(&i0, &j0), (&j0, &i0)] } else { [(&j0, &i0), (&i0, &j0)] };
        let mut sites = find_move_sites(&cur, dirs[0].0, dirs[0].1)?;
        if sites.is_empty() {
            sites = find_move_sites(&cur, dirs[1].0, dirs[1].1)?;
        }
        if sites.is_empty() {
            no_site_steps.push(step);
            continue;
        }
        let site = &sites[rng.random_range(0..sites.len())];
        cur = apply_move(&cur, site)?;
        let v = partition_value(&cur, sol)?;
        let err = relative_error(&v, &first);
        max_err = max_err.max(err);
        let equal = match backend {
            Backend::Exact => v == first,
            Backend::Float => err <= crate::verify::FLOAT_TOL,
        };
        if !equal && first_divergence.is_none() {
            first_divergence = Some(values.len() - 1);
            all_equal = false;
        }
        values.push(v);
    }
    Ok(InvarianceReport {
        backend,
        moves_requested: k,
        moves_applied: values.len() - 1,
        no_site_steps,
        values,
        all_equal,
        max_relative_error: max_err,
        first_divergence,
        final_triangulation: cur,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FinAbGroup;
    use crate::simplicial::{pachner_sides, CombSimplex, TopSimplex};
    use crate::solutions::standard_bicharacter_solution;

    fn z(n: u32) -> SolutionSpec {
        standard_bicharacter_solution(&FinAbGroup::cyclic(n).unwrap())
    }

    #[test]
    fn single_pentachoron_is_q() {
        let t = Triangulation::from_labels(
            4,
            vec![TopSimplex {
                simplex: CombSimplex::standard(4),
                sign: 1,
            }],
        )
        .unwrap();
        let sol = z(2);
        let a = build_assignment(&t, &sol).unwrap();
        assert!(a.pairings.is_empty());
        assert_eq!(a.boundary.len(), 5);
        let v = partition(&a).unwrap();
        // faces sort as ∂4 < ∂3 < … < ∂0
        let back = v.tensor.permute(&[4, 3, 2, 1, 0]).unwrap();
        assert!(back.compare(&sol.q, 0.0).unwrap().is_equal());
    }

    #[test]
    fn two_pentachora() {
        // [0,1,2,3,4] and [0,1,2,3,5] share [0,1,2,3], facet 4 of both
        let s = |v: Vec<u32>, sign| TopSimplex {
            simplex: CombSimplex::new(v).unwrap(),
            sign,
        };
        let t = Triangulation::from_labels(4, vec![s(vec![0, 1, 2, 3, 4], 1), s(vec![0, 1, 2, 3, 5], -1)]).unwrap();
        let a = build_assignment(&t, &z(2)).unwrap();
        assert_eq!(a.pairings.len(), 1);
        assert_eq!(a.boundary.len(), 8);
        let clash = Triangulation::from_labels(4, vec![s(vec![0, 1, 2, 3, 4], 1), s(vec![0, 1, 2, 3, 5], 1)]).unwrap();
        assert!(matches!(
            build_assignment(&clash, &z(2)),
            Err(StateSumError::VarianceClash { face, .. }) if face == vec![0, 1, 2, 3]
        ));
        let bridged = build_assignment_with(&clash, &z(2), PairingRule::KernelBridge).unwrap();
        assert!(bridged.pairings[0].bridged);
        assert!(partition(&bridged).is_ok());
    }

    #[test]
    fn ball_sides_agree() {
        let (i0, j0) = distinguished_splitting(5);
        let (l, r) = pachner_sides(5, &i0, &j0, &[0, 1, 2, 3, 4, 5]).unwrap();
        for n in [2, 3] {
            let sol = z(n);
            let la = build_assignment(&l, &sol).unwrap();
            let ra = build_assignment(&r, &sol).unwrap();
            assert_eq!((la.pairings.len(), la.boundary.len()), (3, 9));
            assert_eq!((ra.pairings.len(), ra.boundary.len()), (3, 9));
            let lv = partition(&la).unwrap();
            let rv = partition(&ra).unwrap();
            assert_eq!(lv.faces, rv.faces);
            assert!(lv.tensor.compare(&rv.tensor, 0.0).unwrap().is_equal(), "Z{n}");
        }
    }

    #[test]
    fn orders_agree_and_moves_keep_value() {
        let t = Triangulation::sphere_boundary(4);
        let sol = z(2);
        let a = build_assignment(&t, &sol).unwrap();
        let g = partition_with(&a, ContractionOrder::Greedy).unwrap();
        let s = partition_with(&a, ContractionOrder::Sequential).unwrap();
        assert!(g.is_closed());
        assert_eq!(g.scalar(), s.scalar());
        let rep = invariance_run(&t, &sol, 6, 7, Backend::Exact).unwrap();
        assert_eq!(rep.moves_applied, 6);
        assert!(rep.all_equal, "{:?}", rep.values);
        let none = invariance_run(&t, &sol, 0, 7, Backend::Exact).unwrap();
        assert!(none.all_equal && none.values.len() == 1);
    }
}
