//! Exact and floating checks of the relations.
//!
//! Both sides of each relation are built from the operator expressions in
//! the order they are printed, through [`Circuit`] programs or kernel
//! applications, and compared entrywise over the union of their supports.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagram::{run_program, Circuit, Gate, LinearMap, WireOp, P33_LHS, P33_RHS};
use crate::group::{Bicharacter, FinAbGroup};
use crate::scalar::{FloatScalar, Scalar};
use crate::solutions::{q_from_bicharacter, set_q, SymmetryKernels, Q_VARIANCES};
use crate::tensor::{Coefficient, GroupTensor, Kernel, Measure, Side, TensorDiff, TensorError};

/// Relative tolerance of float comparisons.
pub const FLOAT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("expected a 5-slot tensor with variances (up,down,up,down,up)")]
    NotSolutionShaped,
    #[error("expected a 4-slot tensor with variances (up,up,down,down)")]
    NotEndomorphism,
    #[error("kernel {0} is not symmetric")]
    NotSymmetric(&'static str),
    #[error("kernel {0} is not inverted by the given inverse")]
    NotInvertible(&'static str),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    /// Exact up to `|A| = 4`, float above.
    pub fn auto(group_size: u32) -> Backend {
        if group_size <= 4 {
            Backend::Exact
        } else {
            Backend::Float
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        })
    }
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Backend, String> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            _ => Err(format!("unknown backend {s:?} (exact|float)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Sides agree numerically but not as graded exact expressions.
    Indeterminate,
}

impl Verdict {
    /// Process exit code: 0, 1 or 2.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Indeterminate => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Which sub-check failed, e.g. `case2` or `ybe`.
    pub context: String,
    pub index: Vec<u32>,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub relation: String,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    /// Support points (or sample points) compared.
    pub compared: usize,
    pub backend: Backend,
    /// Extra `key=value` facts, in insertion order.
    pub details: Vec<(String, String)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn from_diff(relation: &str, context: &str, diff: TensorDiff, compared: usize, backend: Backend) -> VerifyReport {
        let (verdict, counterexample) = match diff {
            TensorDiff::Equal => (Verdict::Pass, None),
            TensorDiff::Differ { index, left, right } => (
                Verdict::Fail,
                Some(Counterexample {
                    context: context.into(),
                    index,
                    left,
                    right,
                }),
            ),
            TensorDiff::Indeterminate { index } => (
                Verdict::Indeterminate,
                Some(Counterexample {
                    context: context.into(),
                    index,
                    left: "graded".into(),
                    right: "graded".into(),
                }),
            ),
        };
        VerifyReport {
            relation: relation.into(),
            verdict,
            counterexample,
            compared,
            backend,
            details: vec![],
        }
    }

    /// Combines sub-checks: any failure fails (first one reported), else any
    /// indeterminate, else pass.
    pub fn merge(relation: &str, backend: Backend, parts: Vec<VerifyReport>) -> VerifyReport {
        let compared = parts.iter().map(|p| p.compared).sum();
        let pick = |v: Verdict| parts.iter().find(|p| p.verdict == v);
        let (verdict, counterexample) = match pick(Verdict::Fail).or_else(|| pick(Verdict::Indeterminate)) {
            Some(p) => (p.verdict, p.counterexample.clone()),
            None => (Verdict::Pass, None),
        };
        let mut details = Vec::new();
        for p in &parts {
            details.push((p.relation.clone(), p.verdict.to_string()));
            details.extend(p.details.iter().cloned());
        }
        VerifyReport {
            relation: relation.into(),
            verdict,
            counterexample,
            compared,
            backend,
            details,
        }
    }

    /// Flat `key=value` lines.
    pub fn to_kv(&self) -> String {
        let mut out = format!(
            "relation={}\nverdict={}\nbackend={}\ncompared={}\n",
            self.relation, self.verdict, self.backend, self.compared
        );
        for (k, v) in &self.details {
            out.push_str(&format!("{k}={v}\n"));
        }
        if let Some(c) = &self.counterexample {
            let idx: Vec<String> = c.index.iter().map(u32::to_string).collect();
            out.push_str(&format!(
                "counterexample.context={}\ncounterexample.index={}\ncounterexample.left={}\ncounterexample.right={}\n",
                c.context,
                idx.join(","),
                c.left,
                c.right
            ));
        }
        out
    }
}

fn union_support<S: Coefficient>(a: &GroupTensor<S>, b: &GroupTensor<S>) -> usize {
    let keys: BTreeSet<&Vec<u32>> = a.entries().map(|e| e.0).chain(b.entries().map(|e| e.0)).collect();
    keys.len()
}

fn tol_for(backend: Backend) -> f64 {
    match backend {
        Backend::Exact => 0.0,
        Backend::Float => FLOAT_TOL,
    }
}

fn check_q_shape<S: Coefficient>(q: &GroupTensor<S>) -> Result<(), VerifyError> {
    if q.variances() != Q_VARIANCES {
        return Err(VerifyError::NotSolutionShaped);
    }
    Ok(())
}

/// Both sides of the (3,3)-relation as maps `V^{⊗3} → V^{⊗6}`, slots
/// `(i,l,m,j,n,k; p,q,r)`.
pub fn p33_sides<S: Coefficient>(q: &GroupTensor<S>) -> Result<(LinearMap<S>, LinearMap<S>), VerifyError> {
    check_q_shape(q)?;
    Ok((run_program(q, &P33_LHS)?, run_program(q, &P33_RHS)?))
}

fn compare_maps<S: Coefficient>(
    relation: &str,
    l: &LinearMap<S>,
    r: &LinearMap<S>,
    backend: Backend,
) -> Result<VerifyReport, VerifyError> {
    let diff = l.compare(r, tol_for(backend))?;
    Ok(VerifyReport::from_diff(relation, relation, diff, union_support(&l.tensor, &r.tensor), backend))
}

/// The (3,3)-relation for a 5-slot tensor.
pub fn verify_p33(q: &GroupTensor, backend: Backend) -> Result<VerifyReport, VerifyError> {
    match backend {
        Backend::Exact => {
            let (l, r) = p33_sides(q)?;
            compare_maps("p33", &l, &r, backend)
        }
        Backend::Float => {
            let qf = q.to_float();
            let (l, r) = p33_sides(&qf)?;
            compare_maps("p33", &l, &r, backend)
        }
    }
}

/// The coordinate form, summed directly over supports:
/// `Σ Q^{i,l,m}_{s,t}Q^{s,j,n}_{p,u}Q^{t,u,k}_{q,r}` and
/// `Σ Q^{m,n,k}_{s,t}Q^{l,j,t}_{u,r}Q^{i,u,s}_{p,q}`, slots `(i,l,m,j,n,k,p,q,r)`.
pub fn p33_coordinate_form<S: Coefficient>(q: &GroupTensor<S>) -> Result<(GroupTensor<S>, GroupTensor<S>), VerifyError> {
    check_q_shape(q)?;
    let d = q.domain();
    let mut vars = vec![crate::tensor::Variance::Up; 6];
    vars.extend([crate::tensor::Variance::Down; 3]);
    let mut lhs = GroupTensor::new(d, vars.clone());
    let mut rhs = GroupTensor::new(d, vars);
    let c = S::from_scalar(&d.weight());
    let c3 = c.mul(&c).mul(&c);
    let entries: Vec<(&Vec<u32>, &S)> = q.entries().collect();
    // Q[x,u,y,v,z] = Q^{x,y,z}_{u,v}
    for (a, va) in &entries {
        let (i, s, l, t, m) = (a[0], a[1], a[2], a[3], a[4]);
        for (b, vb) in entries.iter().filter(|(b, _)| b[0] == s) {
            let (p, j, u, n) = (b[1], b[2], b[3], b[4]);
            for (e, ve) in entries.iter().filter(|(e, _)| e[0] == t && e[2] == u) {
                let (qq, r, k) = (e[1], e[3], e[4]);
                lhs.accumulate(&[i, l, m, j, n, k, p, qq, r], va.mul(vb).mul(ve).mul(&c3))?;
            }
        }
    }
    for (a, va) in &entries {
        let (m, s, n, t, k) = (a[0], a[1], a[2], a[3], a[4]);
        for (b, vb) in entries.iter().filter(|(b, _)| b[4] == t) {
            let (l, u, j, r) = (b[0], b[1], b[2], b[3]);
            for (e, ve) in entries.iter().filter(|(e, _)| e[2] == u && e[4] == s) {
                let (i, p, qq) = (e[0], e[1], e[3]);
                rhs.accumulate(&[i, l, m, j, n, k, p, qq, r], va.mul(vb).mul(ve).mul(&c3))?;
            }
        }
    }
    Ok((lhs, rhs))
}

/// The (3,3)-relation through the coordinate form.
pub fn verify_p33_coordinates(q: &GroupTensor, backend: Backend) -> Result<VerifyReport, VerifyError> {
    let run = |l: GroupTensor<_>, r: GroupTensor<_>| -> Result<VerifyReport, VerifyError> {
        let diff = l.compare(&r, tol_for(backend))?;
        Ok(VerifyReport::from_diff("p33_coordinates", "p33_coordinates", diff, union_support(&l, &r), backend))
    };
    match backend {
        Backend::Exact => {
            let (l, r) = p33_coordinate_form(q)?;
            run(l, r)
        }
        Backend::Float => {
            let (l, r) = p33_coordinate_form(&q.to_float())?;
            let diff = l.compare(&r, FLOAT_TOL)?;
            Ok(VerifyReport::from_diff("p33_coordinates", "p33_coordinates", diff, union_support(&l, &r), backend))
        }
    }
}

/// Runs a (3,3) program on points of `I³`, `I = (0,1)`.
pub fn run_set_program(program: &[WireOp], point: &[BigRational; 3]) -> Result<Vec<BigRational>, VerifyError> {
    let mut st: Vec<BigRational> = point.to_vec();
    for op in program {
        match *op {
            WireOp::Q { at, swapped } => {
                let (mut a, mut b) = (st[at].clone(), st[at + 1].clone());
                if swapped {
                    std::mem::swap(&mut a, &mut b);
                }
                let out = set_q(&a, &b).map_err(|e| VerifyError::Other(e.to_string()))?;
                st.splice(at..at + 2, out);
            }
            WireOp::Swap(at) => st.swap(at, at + 1),
        }
    }
    Ok(st)
}

/// A random rational in `(0,1)` with denominator at most 1000.
pub fn random_unit_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let den: i64 = rng.random_range(2..=1000);
    let num: i64 = rng.random_range(1..den);
    BigRational::new(num.into(), den.into())
}

/// Set-theoretic (3,3)-relation at `samples` seeded random points.
pub fn verify_p33_set(samples: usize, seed: u64) -> Result<VerifyReport, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (zero, one) = (BigRational::zero(), BigRational::one());
    let mut report = VerifyReport {
        relation: "p33_set".into(),
        verdict: Verdict::Pass,
        counterexample: None,
        compared: 0,
        backend: Backend::Exact,
        details: vec![],
    };
    for n in 0..samples {
        let p = [
            random_unit_rational(&mut rng),
            random_unit_rational(&mut rng),
            random_unit_rational(&mut rng),
        ];
        let l = run_set_program(&P33_LHS, &p)?;
        let r = run_set_program(&P33_RHS, &p)?;
        report.compared += 1;
        let in_range = l.iter().chain(&r).all(|v| *v > zero && *v < one);
        if l != r || !in_range {
            let show = |v: &[BigRational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            report.verdict = Verdict::Fail;
            report.counterexample = Some(Counterexample {
                context: format!("sample{n} at ({})", show(&p)),
                index: vec![n as u32],
                left: show(&l),
                right: show(&r),
            });
            break;
        }
    }
    report.details.push(("samples".into(), samples.to_string()));
    report.details.push(("seed".into(), seed.to_string()));
    Ok(report)
}

/// `S₁₂S₁₃S₂₃ = S₂₃S₁₂` on `V^{⊗3}`.
pub fn verify_pentagon<S: Coefficient>(s: &GroupTensor<S>, backend: Backend) -> Result<VerifyReport, VerifyError> {
    use crate::tensor::Variance::{Down, Up};
    if s.variances() != [Up, Up, Down, Down] {
        return Err(VerifyError::NotEndomorphism);
    }
    let gate = Gate::end2(s)?;
    let mut l = Circuit::new(s.domain(), 3);
    l.apply(&gate, &[1, 2])?;
    l.apply(&gate, &[0, 2])?;
    l.apply(&gate, &[0, 1])?;
    let mut r = Circuit::new(s.domain(), 3);
    r.apply(&gate, &[0, 1])?;
    r.apply(&gate, &[1, 2])?;
    compare_maps("pentagon", &l.finish()?, &r.finish()?, backend)
}

/// `X^a, Y^a, Z^a ∈ End(V⊗V)`: `Q` with slot 0, 2 or 4 fixed to `a`, as
/// `(out₀,out₁,in₀,in₁)` tensors.
#[derive(Debug, Clone)]
pub struct Families<S: Coefficient> {
    pub x: Vec<GroupTensor<S>>,
    pub y: Vec<GroupTensor<S>>,
    pub z: Vec<GroupTensor<S>>,
}

pub fn build_families<S: Coefficient>(q: &GroupTensor<S>) -> Result<Families<S>, VerifyError> {
    check_q_shape(q)?;
    let n = q.domain().size();
    let fam = |slot: usize, perm: [usize; 4]| -> Result<Vec<GroupTensor<S>>, TensorError> {
        (0..n).map(|a| q.pin(slot, a)?.permute(&perm)).collect()
    };
    Ok(Families {
        // (u,y,v,z) -> (y,z,u,v)
        x: fam(0, [1, 3, 0, 2])?,
        // (x,u,v,z) -> (x,z,u,v)
        y: fam(2, [0, 3, 1, 2])?,
        // (x,u,y,v) -> (x,y,u,v)
        z: fam(4, [0, 2, 1, 3])?,
    })
}

/// Family member as a gate whose label slot stays open as `name`.
fn family_gate<S: Coefficient>(q: &GroupTensor<S>, pinned: usize, name: &str) -> Result<Gate<S>, TensorError> {
    let outs = match pinned {
        0 => vec![2, 4],
        2 => vec![0, 4],
        _ => vec![0, 2],
    };
    Gate::new(q.clone(), vec![1, 3], outs, vec![(pinned, name.to_string())])
}

/// Label triples (the trailing three slots) on which two maps differ.
fn failing_triples<S: Coefficient>(l: &LinearMap<S>, r: &LinearMap<S>, tol: f64) -> Result<BTreeSet<Vec<u32>>, VerifyError> {
    let scale = l.tensor.max_abs().max(r.tensor.max_abs()).max(1.0);
    let mut bad = BTreeSet::new();
    let keys: BTreeSet<&Vec<u32>> = l.tensor.entries().map(|e| e.0).chain(r.tensor.entries().map(|e| e.0)).collect();
    for k in keys {
        let a = l.tensor.get(k);
        let b = r.tensor.get(k);
        if a.compare(&b, tol * scale) != crate::scalar::Comparison::Equal {
            bad.insert(k[k.len() - 3..].to_vec());
        }
    }
    Ok(bad)
}

fn family_sides<S: Coefficient>(q: &GroupTensor<S>, which: &str) -> Result<(LinearMap<S>, LinearMap<S>), VerifyError> {
    let d = q.domain();
    match which {
        // Σ_{s,t} Q^{i,l,m}_{s,t} X^s_{12} X^t_{23} = X^m_{23} X^l_{13} X^i_{12}
        "pe1" => {
            let mut l = Circuit::new(d, 3);
            l.apply(&family_gate(q, 0, "t")?, &[1, 2])?;
            l.apply(&family_gate(q, 0, "s")?, &[0, 1])?;
            let l = l.finish()?;
            // extras (s,t) at slots 6,7 against Q's (u,v) slots
            let tensor = l.tensor.contract_pairs(q, &[(6, 1), (7, 3)])?;
            let l = LinearMap {
                tensor,
                n_out: 3,
                n_in: 3,
                extras: vec!["a".into(), "b".into(), "c".into()],
            };
            let mut r = Circuit::new(d, 3);
            r.apply(&family_gate(q, 0, "a")?, &[0, 1])?;
            r.apply(&family_gate(q, 0, "b")?, &[0, 2])?;
            r.apply(&family_gate(q, 0, "c")?, &[1, 2])?;
            Ok((l, r.finish()?))
        }
        // Z^m_{12} Z^n_{13} Z^k_{23} = Σ_{s,t} Q^{m,n,k}_{s,t} Z^t_{23} Z^s_{12}
        "pe2" => {
            let mut l = Circuit::new(d, 3);
            l.apply(&family_gate(q, 4, "c")?, &[1, 2])?;
            l.apply(&family_gate(q, 4, "b")?, &[0, 2])?;
            l.apply(&family_gate(q, 4, "a")?, &[0, 1])?;
            let mut r = Circuit::new(d, 3);
            r.apply(&family_gate(q, 4, "s")?, &[0, 1])?;
            r.apply(&family_gate(q, 4, "t")?, &[1, 2])?;
            let r = r.finish()?;
            let tensor = r.tensor.contract_pairs(q, &[(6, 1), (7, 3)])?;
            let r = LinearMap {
                tensor,
                n_out: 3,
                n_in: 3,
                extras: vec!["a".into(), "b".into(), "c".into()],
            };
            Ok((l.finish()?, r))
        }
        // X^i_{12} Y^j_{13} Z^k_{23} = Z^k_{23} Y^j_{13} X^i_{12}
        _ => {
            let mut l = Circuit::new(d, 3);
            l.apply(&family_gate(q, 4, "c")?, &[1, 2])?;
            l.apply(&family_gate(q, 2, "b")?, &[0, 2])?;
            l.apply(&family_gate(q, 0, "a")?, &[0, 1])?;
            let mut r = Circuit::new(d, 3);
            r.apply(&family_gate(q, 0, "a")?, &[0, 1])?;
            r.apply(&family_gate(q, 2, "b")?, &[0, 2])?;
            r.apply(&family_gate(q, 4, "c")?, &[1, 2])?;
            Ok((l.finish()?, r.finish()?))
        }
    }
}

fn verify_family_generic<S: Coefficient>(q: &GroupTensor<S>, backend: Backend) -> Result<VerifyReport, VerifyError> {
    check_q_shape(q)?;
    let n = q.domain().size() as usize;
    let total = n * n * n;
    let tol = tol_for(backend);
    let mut parts = Vec::new();
    for which in ["pe1", "pe2", "ybe"] {
        let (l, r) = family_sides(q, which)?;
        let mut rep = compare_maps(which, &l, &r, backend)?;
        let bad = if rep.passed() { BTreeSet::new() } else { failing_triples(&l, &r, tol)? };
        rep.details.push((format!("{which}.triples_passed"), format!("{}/{}", total - bad.len(), total)));
        if let (Some(c), Some(first)) = (rep.counterexample.as_mut(), bad.iter().next()) {
            c.context = format!("{which} at labels {first:?}");
        }
        parts.push(rep);
    }
    Ok(VerifyReport::merge("yb_family", backend, parts))
}

/// The categorified pentagon forms and the Yang–Baxter family, for all label triples.
pub fn verify_yb_family(q: &GroupTensor, backend: Backend) -> Result<VerifyReport, VerifyError> {
    match backend {
        Backend::Exact => verify_family_generic(q, backend),
        Backend::Float => verify_family_generic(&q.to_float(), backend),
    }
}

/// The Yang–Baxter family for one triple, literally with pinned members.
pub fn ybe_for_triple<S: Coefficient>(f: &Families<S>, i: u32, j: u32, k: u32, backend: Backend) -> Result<bool, VerifyError> {
    let d = f.x[0].domain();
    let (x, y, z) = (Gate::end2(&f.x[i as usize])?, Gate::end2(&f.y[j as usize])?, Gate::end2(&f.z[k as usize])?);
    let mut l = Circuit::new(d, 3);
    l.apply(&z, &[1, 2])?;
    l.apply(&y, &[0, 2])?;
    l.apply(&x, &[0, 1])?;
    let mut r = Circuit::new(d, 3);
    r.apply(&x, &[0, 1])?;
    r.apply(&y, &[0, 2])?;
    r.apply(&z, &[1, 2])?;
    Ok(l.finish()?.compare(&r.finish()?, tol_for(backend))?.is_equal())
}

/// A kernel and its claimed inverse.
#[derive(Debug)]
pub struct KernelPair<'a, S: Coefficient> {
    pub k: &'a Kernel<S>,
    pub inv: &'a Kernel<S>,
}

impl<S: Coefficient> Clone for KernelPair<'_, S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S: Coefficient> Copy for KernelPair<'_, S> {}

impl<'a, S: Coefficient> KernelPair<'a, S> {
    pub fn new(k: &'a Kernel<S>, inv: &'a Kernel<S>) -> KernelPair<'a, S> {
        KernelPair { k, inv }
    }
}

#[derive(Clone, Copy)]
enum Factor {
    Sigma,
    K(usize),
    Inv(usize),
}

/// `(σ⊗L⊗L⁻¹⊗L)Q, (L⊗σ⊗M⁻¹⊗M)Q, (M⊗M⁻¹⊗σ⊗R)Q, (R⊗R⁻¹⊗R⊗σ)Q`.
pub fn psym_transforms<S: Coefficient>(
    q: &GroupTensor<S>,
    l: KernelPair<S>,
    m: KernelPair<S>,
    r: KernelPair<S>,
) -> Result<[GroupTensor<S>; 4], VerifyError> {
    use Factor::*;
    let pairs = [l, m, r];
    let (lk, mk, rk) = (0, 1, 2);
    let rows: [[Factor; 4]; 4] = [
        [Sigma, K(lk), Inv(lk), K(lk)],
        [K(lk), Sigma, Inv(mk), K(mk)],
        [K(mk), Inv(mk), Sigma, K(rk)],
        [K(rk), Inv(rk), K(rk), Sigma],
    ];
    let mut out = Vec::new();
    for row in rows {
        let at = row.iter().position(|f| matches!(f, Sigma)).expect("one σ");
        let mut t = q.swap(at, at + 1)?;
        let mut slot = 0;
        for f in row {
            match f {
                Sigma => {
                    slot += 2;
                    continue;
                }
                K(p) => t = t.apply_kernel(slot, pairs[p].k, Side::Left)?,
                Inv(p) => t = t.apply_kernel(slot, pairs[p].inv, Side::Left)?,
            }
            slot += 1;
        }
        out.push(t);
    }
    Ok(out.try_into().expect("four rows"))
}

fn check_kernels<S: Coefficient>(pairs: [(&'static str, KernelPair<S>); 3]) -> Result<(), VerifyError> {
    for (name, p) in pairs {
        if !p.k.is_symmetric() {
            return Err(VerifyError::NotSymmetric(name));
        }
        if !p.k.is_inverse(p.inv) {
            return Err(VerifyError::NotInvertible(name));
        }
    }
    Ok(())
}

/// P-symmetry: the four transforms coincide.
pub fn verify_psym<S: Coefficient>(
    q: &GroupTensor<S>,
    l: KernelPair<S>,
    m: KernelPair<S>,
    r: KernelPair<S>,
    backend: Backend,
) -> Result<VerifyReport, VerifyError> {
    check_q_shape(q)?;
    check_kernels([("L", l), ("M", m), ("R", r)])?;
    let t = psym_transforms(q, l, m, r)?;
    let mut parts = Vec::new();
    for k in 1..4 {
        let diff = t[0].compare(&t[k], tol_for(backend))?;
        let name = format!("case1_vs_case{}", k + 1);
        parts.push(VerifyReport::from_diff(&name, &name, diff, union_support(&t[0], &t[k]), backend));
    }
    Ok(VerifyReport::merge("psym", backend, parts))
}

/// Each of the four transforms of `D` by `L = R = T`, `M = S` equals `D̄`.
pub fn verify_theorem_with<S: Coefficient>(
    d: &GroupTensor<S>,
    t: KernelPair<S>,
    s: KernelPair<S>,
    backend: Backend,
) -> Result<VerifyReport, VerifyError> {
    check_q_shape(d)?;
    let transforms = psym_transforms(d, t, s, t)?;
    let target = d.conj();
    let mut parts = Vec::new();
    for (k, tk) in transforms.iter().enumerate() {
        let diff = tk.compare(&target, tol_for(backend))?;
        let name = format!("case{}", k + 1);
        parts.push(VerifyReport::from_diff(&name, &name, diff, union_support(tk, &target), backend));
    }
    Ok(VerifyReport::merge("theorem", backend, parts))
}

fn theorem_dispatch(d: &GroupTensor, k: &SymmetryKernels, backend: Backend) -> Result<VerifyReport, VerifyError> {
    match backend {
        Backend::Exact => verify_theorem_with(d, KernelPair::new(&k.t, &k.t_inv), KernelPair::new(&k.s, &k.s_inv), backend),
        Backend::Float => {
            let (t, ti, s, si) = (k.t.to_float(), k.t_inv.to_float(), k.s.to_float(), k.s_inv.to_float());
            verify_theorem_with(&d.to_float(), KernelPair::new(&t, &ti), KernelPair::new(&s, &si), backend)
        }
    }
}

/// The theorem for the shipped `(χ, g)` of `A`.
pub fn verify_theorem(group: &FinAbGroup, backend: Backend) -> Result<VerifyReport, VerifyError> {
    let sol = crate::solutions::standard_bicharacter_solution(group);
    let kernels = sol.kernels.as_ref().expect("bicharacter solutions carry kernels");
    let mut rep = theorem_dispatch(&sol.q, kernels, backend)?;
    rep.details.insert(0, ("group".into(), group.to_string()));
    Ok(rep)
}

/// The theorem's identities for `D` built from `chi`, with kernels from `kernels`.
pub fn verify_theorem_custom(chi: &Bicharacter, kernels: &SymmetryKernels, backend: Backend) -> Result<VerifyReport, VerifyError> {
    let d = q_from_bicharacter(chi, Measure::Haar).map_err(|e| VerifyError::Other(e.to_string()))?;
    theorem_dispatch(&d.q, kernels, backend)
}

/// A copy of `q` with one entry changed by a random root of unity or sign.
pub fn perturb(q: &GroupTensor, seed: u64) -> GroupTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = q.domain().size();
    let amb = q.domain().ambient().clone();
    let idx: Vec<u32> = (0..q.arity()).map(|_| rng.random_range(0..n)).collect();
    let k: i64 = rng.random_range(0..2 * amb.half_order() as i64);
    let bump = Scalar::root(&amb, k) + Scalar::one(&amb);
    let bump = if bump.is_zero() { Scalar::one(&amb) } else { bump };
    let mut out = q.clone();
    out.accumulate(&idx, bump).expect("index in range");
    out
}

/// Float relative error between two exact scalars (`0` when both vanish).
pub fn relative_error(a: &Scalar, b: &Scalar) -> f64 {
    let (x, y): (FloatScalar, FloatScalar) = (a.to_float(), b.to_float());
    let scale = x.norm().max(y.norm());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).norm() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::{pentagon_s, standard_bicharacter_solution, symmetry_kernels_with, FiniteGroup, TripleSpec};
    use crate::tensor::Domain;

    #[test]
    fn p33_bicharacter_small() {
        for lit in ["Z2", "Z3"] {
            let g: FinAbGroup = lit.parse().unwrap();
            let sol = standard_bicharacter_solution(&g);
            let rep = verify_p33(&sol.q, Backend::Exact).unwrap();
            assert!(rep.passed(), "{lit}: {rep:?}");
            assert!(verify_p33_coordinates(&sol.q, Backend::Exact).unwrap().passed());
            assert!(verify_p33(&sol.q, Backend::Float).unwrap().passed());
        }
    }

    #[test]
    fn wire_programs_match_coordinate_form() {
        let g = FinAbGroup::cyclic(2).unwrap();
        let q = perturb(&standard_bicharacter_solution(&g).q, 3);
        let (l, r) = p33_sides(&q).unwrap();
        let (cl, cr) = p33_coordinate_form(&q).unwrap();
        assert!(l.tensor.compare(&cl, 0.0).unwrap().is_equal());
        assert!(r.tensor.compare(&cr, 0.0).unwrap().is_equal());
    }

    #[test]
    fn p33_negative_and_zero() {
        let g = FinAbGroup::cyclic(2).unwrap();
        let mut q = standard_bicharacter_solution(&g).q;
        let v = q.get(&[1, 0, 1, 1, 0]);
        q.set(&[1, 0, 1, 1, 0], -v).unwrap();
        let rep = verify_p33(&q, Backend::Exact).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.counterexample.is_some());
        let zero = GroupTensor::new(q.domain(), Q_VARIANCES.to_vec());
        assert!(verify_p33(&zero, Backend::Exact).unwrap().passed());
        let wrong = GroupTensor::<Scalar>::new(q.domain(), vec![crate::tensor::Variance::Up; 5]);
        assert!(verify_p33(&wrong, Backend::Exact).is_err());
    }

    #[test]
    fn set_theoretic() {
        let rep = verify_p33_set(50, 1).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn pentagon_cases() {
        let g: FiniteGroup = "Z2".parse().unwrap();
        let s = pentagon_s(&TripleSpec::group_algebra(&g)).unwrap();
        assert!(verify_pentagon(&s, Backend::Exact).unwrap().passed());
        let d = Domain::basis(2, "V");
        let one = Scalar::one(d.ambient());
        let zero = Scalar::zero(d.ambient());
        use crate::tensor::Variance::{Down, Up};
        let id = GroupTensor::from_fn(&d, vec![Up, Up, Down, Down], |k| if k[0] == k[2] && k[1] == k[3] { one.clone() } else { zero.clone() });
        assert!(verify_pentagon(&id, Backend::Exact).unwrap().passed());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rnd = GroupTensor::from_fn(&d, vec![Up, Up, Down, Down], |_| Scalar::from_int(d.ambient(), rng.random_range(-3..4)));
        assert_eq!(verify_pentagon(&rnd, Backend::Exact).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn families() {
        let g = FinAbGroup::cyclic(2).unwrap();
        let sol = standard_bicharacter_solution(&g);
        let f = build_families(&sol.q).unwrap();
        let two = Scalar::from_int(g.ambient(), 2);
        // Z^k[(x,y),(u,v)] = χ(x,k) r² [u=x+y][v=y+k]
        for k in 0..2 {
            for (idx, v) in f.z[k as usize].entries() {
                let (x, y, u, vv) = (idx[0], idx[1], idx[2], idx[3]);
                assert_eq!(u, g.add_rank(x, y));
                assert_eq!(vv, g.add_rank(y, k));
                assert_eq!(*v, g.chi_rank(x, k) * &two);
            }
            assert_eq!(f.z[k as usize].nnz(), 4);
        }
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!(ybe_for_triple(&f, i, j, k, Backend::Exact).unwrap());
                }
            }
        }
        let rep = verify_yb_family(&sol.q, Backend::Exact).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let zero = GroupTensor::new(sol.q.domain(), Q_VARIANCES.to_vec());
        assert!(build_families(&zero).unwrap().x.iter().all(|t| t.is_zero()));
        assert!(verify_yb_family(&zero, Backend::Exact).unwrap().passed());
    }

    #[test]
    fn theorem_small() {
        for n in 2..=4 {
            let g = FinAbGroup::cyclic(n).unwrap();
            let rep = verify_theorem(&g, Backend::Exact).unwrap();
            assert!(rep.passed(), "Z{n}: {rep:?}");
        }
        let g = FinAbGroup::cyclic(3).unwrap();
        let k = symmetry_kernels_with(&g, |_| Scalar::one(g.ambient()));
        let rep = verify_theorem_custom(&Bicharacter::standard(&g), &k, Backend::Exact).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn psym_checks_kernels() {
        let g = FinAbGroup::cyclic(3).unwrap();
        let sol = standard_bicharacter_solution(&g);
        let k = sol.kernels.unwrap();
        let t = KernelPair::new(&k.t, &k.t_inv);
        let s = KernelPair::new(&k.s, &k.s_inv);
        assert!(verify_psym(&sol.q, t, s, t, Backend::Exact).unwrap().passed());
        let bad = KernelPair::new(&k.t, &k.t);
        assert!(matches!(verify_psym(&sol.q, bad, s, t, Backend::Exact), Err(VerifyError::NotInvertible("L"))));
    }
}
