//! Solutions of the (3,3)-relation: bicharacter tensors over finite abelian
//! groups, tensors built from compatible `(μ, λ, ρ)` triples, and the
//! set-theoretic map on the open unit interval. Also the symmetry kernels
//! `T(x,y) = δ(x+y)g(x)` and `S(x,y) = g(x−y)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::diagram::{Circuit, Gate, LinearMap};
use crate::group::{Bicharacter, FinAbGroup, GroupError};
use crate::scalar::Scalar;
use crate::tensor::{Domain, GroupTensor, Kernel, Measure, TensorError, Variance};

use Variance::{Down, Up};

/// Slot pattern `(x,u,y,v,z)` of a solution tensor.
pub const Q_VARIANCES: [Variance; 5] = [Up, Down, Up, Down, Up];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("incompatible triple: {0} fails")]
    Incompatible(String),
    #[error("set-theoretic map needs 0 < x, y < 1, got ({0}, {1})")]
    OutOfInterval(String, String),
    #[error("unknown solution descriptor {0:?}: expected bichar:<group>, triple:groupalg:<group> or set")]
    BadDescriptor(String),
    #[error("unknown finite group {0:?}: expected 1, Zn, Z2xZ2, …, or Sn (n ≤ 5)")]
    BadFiniteGroup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    Bicharacter,
    Triple,
    SetTheoretic,
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionKind::Bicharacter => "bicharacter",
            SolutionKind::Triple => "triple",
            SolutionKind::SetTheoretic => "set",
        })
    }
}

/// `T, T⁻¹, S, S⁻¹` as Haar-normalised kernels.
#[derive(Debug, Clone)]
pub struct SymmetryKernels {
    pub t: Kernel,
    pub t_inv: Kernel,
    pub s: Kernel,
    pub s_inv: Kernel,
}

/// A tensor solution with its provenance.
#[derive(Debug, Clone)]
pub struct SolutionSpec {
    pub kind: SolutionKind,
    pub label: String,
    pub group: Option<FinAbGroup>,
    pub q: GroupTensor,
    pub kernels: Option<SymmetryKernels>,
}

impl SolutionSpec {
    /// Same provenance with a different tensor (used for perturbed copies).
    pub fn with_q(&self, q: GroupTensor, label: impl Into<String>) -> SolutionSpec {
        SolutionSpec {
            kind: self.kind,
            label: label.into(),
            group: self.group.clone(),
            q,
            kernels: self.kernels.clone(),
        }
    }
}

/// `Q^{x,y,z}_{u,v} = χ(x,z) δ(x−u+y) δ(y−v+z)`.
///
/// Under the Haar measure each delta is `r` on its support, so entries are
/// `χ(x,z)·r²`; under counting they are `χ(x,z)`.
pub fn q_from_bicharacter(chi: &Bicharacter, measure: Measure) -> Result<SolutionSpec, SolutionError> {
    chi.validate()?;
    let g = chi.group();
    let domain = match measure {
        Measure::Haar => Domain::haar(g),
        Measure::Counting => Domain::counting(g),
    };
    let d0 = domain.identity_value();
    let scale = &d0 * &d0;
    let mut q = GroupTensor::new(&domain, Q_VARIANCES.to_vec());
    let n = g.size();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let idx = [x, g.add_rank(x, y), y, g.add_rank(y, z), z];
                q.set(&idx, chi.at(x, z) * &scale)?;
            }
        }
    }
    Ok(SolutionSpec {
        kind: SolutionKind::Bicharacter,
        label: format!("bichar:{g}"),
        group: Some(g.clone()),
        q,
        kernels: Some(symmetry_kernels(g)),
    })
}

/// The standard self-duality bicharacter of `g`, Haar normalised.
pub fn standard_bicharacter_solution(g: &FinAbGroup) -> SolutionSpec {
    q_from_bicharacter(&Bicharacter::standard(g), Measure::Haar).expect("standard pairing is a bicharacter")
}

/// `T(x,y) = δ(x+y)g(x)`, `S(x,y) = g(x−y)` and their conjugate inverses.
pub fn symmetry_kernels(g: &FinAbGroup) -> SymmetryKernels {
    symmetry_kernels_with(g, |x| g.gauss_rank(x))
}

/// As [`symmetry_kernels`] with a replacement for the Gauss function.
pub fn symmetry_kernels_with<F: Fn(u32) -> Scalar>(g: &FinAbGroup, gauss: F) -> SymmetryKernels {
    let d = Domain::haar(g);
    let zero = Scalar::zero(g.ambient());
    let t = Kernel::from_fn(&d, |x, y| {
        if g.add_rank(x, y) == 0 {
            g.delta_at_zero() * gauss(x)
        } else {
            zero.clone()
        }
    });
    let s = Kernel::from_fn(&d, |x, y| gauss(g.sub_rank(x, y)));
    SymmetryKernels {
        t_inv: t.conj(),
        s_inv: s.conj(),
        t,
        s,
    }
}

/// A finite (possibly non-abelian) group by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    mul: Vec<Vec<u32>>,
}

impl FiniteGroup {
    pub fn trivial() -> FiniteGroup {
        FiniteGroup {
            name: "1".into(),
            mul: vec![vec![0]],
        }
    }

    pub fn from_abelian(g: &FinAbGroup) -> FiniteGroup {
        let n = g.size();
        FiniteGroup {
            name: g.to_string(),
            mul: (0..n).map(|a| (0..n).map(|b| g.add_rank(a, b)).collect()).collect(),
        }
    }

    /// The symmetric group on `k` letters, elements in lexicographic order.
    pub fn symmetric(k: usize) -> FiniteGroup {
        let perms = permutations(k);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed") as u32;
        let mul = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index(&(0..k).map(|t| a[b[t]]).collect()))
                    .collect()
            })
            .collect();
        FiniteGroup {
            name: format!("S{k}"),
            mul,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> u32 {
        self.mul.len() as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize][b as usize]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// One representative of every group of order at most 6.
    pub fn all_up_to_order_six() -> Vec<FiniteGroup> {
        let mut out = vec![FiniteGroup::trivial()];
        for lit in ["Z2", "Z3", "Z4", "Z2xZ2", "Z5", "Z6"] {
            out.push(lit.parse().expect("valid literal"));
        }
        out.push(FiniteGroup::symmetric(3));
        out
    }
}

/// All permutations of `0..k` in lexicographic order.
fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for v in 0..k {
            if !prefix.contains(&v) {
                prefix.push(v);
                extend(prefix, k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), k, &mut out);
    out
}

impl FromStr for FiniteGroup {
    type Err = SolutionError;

    fn from_str(s: &str) -> Result<FiniteGroup, SolutionError> {
        if s == "1" {
            return Ok(FiniteGroup::trivial());
        }
        if let Some(k) = s.strip_prefix('S').and_then(|k| k.parse::<usize>().ok()) {
            if (1..=5).contains(&k) {
                return Ok(FiniteGroup::symmetric(k));
            }
        }
        s.parse::<FinAbGroup>()
            .map(|g| FiniteGroup::from_abelian(&g))
            .map_err(|_| SolutionError::BadFiniteGroup(s.to_string()))
    }
}

/// Structure constants `μ: V⊗V → V`, `λ, ρ: V → V⊗V` over a basis of size `m`.
///
/// `mu` has slots `(out, in₀, in₁)`; `lambda` and `rho` have `(out₀, out₁, in)`.
#[derive(Debug, Clone)]
pub struct TripleSpec {
    pub name: String,
    pub mu: GroupTensor,
    pub lambda: GroupTensor,
    pub rho: GroupTensor,
}

impl TripleSpec {
    pub fn new(name: impl Into<String>, mu: GroupTensor, lambda: GroupTensor, rho: GroupTensor) -> Result<TripleSpec, SolutionError> {
        let ok = mu.variances() == [Up, Down, Down]
            && lambda.variances() == [Up, Up, Down]
            && rho.variances() == [Up, Up, Down]
            && mu.domain() == lambda.domain()
            && mu.domain() == rho.domain();
        if !ok {
            return Err(TensorError::Shape("triple structure constants have the wrong shape".into()).into());
        }
        Ok(TripleSpec {
            name: name.into(),
            mu,
            lambda,
            rho,
        })
    }

    /// `μ(e_a⊗e_b) = e_{ab}`, `λ = ρ = Δ` with `Δ(e_g) = e_g⊗e_g`.
    pub fn group_algebra(g: &FiniteGroup) -> TripleSpec {
        let n = g.order();
        let d = Domain::basis(n, format!("k[{}]", g.name()));
        let one = Scalar::one(d.ambient());
        let zero = Scalar::zero(d.ambient());
        let pick = |b: bool| if b { one.clone() } else { zero.clone() };
        let mu = GroupTensor::from_fn(&d, vec![Up, Down, Down], |k| pick(k[0] == g.mul(k[1], k[2])));
        let delta = GroupTensor::from_fn(&d, vec![Up, Up, Down], |k| pick(k[0] == k[2] && k[1] == k[2]));
        TripleSpec {
            name: format!("groupalg:{}", g.name()),
            mu,
            lambda: delta.clone(),
            rho: delta,
        }
    }

    pub fn domain(&self) -> &Domain {
        self.mu.domain()
    }

    fn mu_gate(&self) -> Gate<Scalar> {
        Gate::new(self.mu.clone(), vec![1, 2], vec![0], vec![]).expect("shape checked")
    }

    fn lambda_gate(&self) -> Gate<Scalar> {
        Gate::new(self.lambda.clone(), vec![2], vec![0, 1], vec![]).expect("shape checked")
    }

    fn rho_gate(&self) -> Gate<Scalar> {
        Gate::new(self.rho.clone(), vec![2], vec![0, 1], vec![]).expect("shape checked")
    }
}

/// One composite map of a compatibility check, applied first step first.
#[derive(Clone, Copy)]
enum Op {
    Mu(usize),
    Lambda(usize),
    Rho(usize),
    Swap(usize),
}

fn build(t: &TripleSpec, inputs: usize, ops: &[Op]) -> Result<LinearMap<Scalar>, TensorError> {
    let (mu, la, rh) = (t.mu_gate(), t.lambda_gate(), t.rho_gate());
    let mut c = Circuit::new(t.domain(), inputs);
    for op in ops {
        match *op {
            Op::Mu(w) => c.apply(&mu, &[w, w + 1])?,
            Op::Lambda(w) => c.apply(&la, &[w])?,
            Op::Rho(w) => c.apply(&rh, &[w])?,
            Op::Swap(w) => c.swap(w)?,
        }
    }
    c.finish()
}

/// Outcome of one axiom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomResult {
    pub name: &'static str,
    pub pass: bool,
    /// Least differing index tuple (outputs, then inputs) when failing.
    pub counterexample: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityReport {
    pub axioms: Vec<AxiomResult>,
}

impl CompatibilityReport {
    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }

    pub fn first_failure(&self) -> Option<&AxiomResult> {
        self.axioms.iter().find(|a| !a.pass)
    }
}

impl fmt::Display for CompatibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axioms {
            writeln!(f, "{}={}", a.name, if a.pass { "pass" } else { "fail" })?;
        }
        Ok(())
    }
}

/// The seven compatibility axioms, each as an exact equality of composites.
pub fn check_compatibility(t: &TripleSpec) -> CompatibilityReport {
    use Op::*;
    let checks: [(&'static str, usize, Vec<Op>, Vec<Op>); 7] = [
        // μ(μ⊗id) = μ(id⊗μ)
        ("assoc_mu", 3, vec![Mu(0), Mu(0)], vec![Mu(1), Mu(0)]),
        // (id⊗λ)λ = (λ⊗id)λ
        ("coassoc_lambda", 1, vec![Lambda(0), Lambda(1)], vec![Lambda(0), Lambda(0)]),
        ("coassoc_rho", 1, vec![Rho(0), Rho(1)], vec![Rho(0), Rho(0)]),
        // λμ = (μ⊗μ)(id⊗σ⊗id)(λ⊗λ)
        (
            "morphism_lambda",
            2,
            vec![Mu(0), Lambda(0)],
            vec![Lambda(0), Lambda(2), Swap(1), Mu(0), Mu(1)],
        ),
        (
            "morphism_rho",
            2,
            vec![Mu(0), Rho(0)],
            vec![Rho(0), Rho(2), Swap(1), Mu(0), Mu(1)],
        ),
        // (ρ⊗ρ)λ = (id⊗σ⊗id)(λ⊗λ)ρ
        (
            "compat_lambda_rho",
            1,
            vec![Lambda(0), Rho(0), Rho(2)],
            vec![Rho(0), Lambda(0), Lambda(2), Swap(1)],
        ),
        // (λ⊗λ)ρ = (id⊗σ⊗id)(ρ⊗ρ)λ
        (
            "compat_rho_lambda",
            1,
            vec![Rho(0), Lambda(0), Lambda(2)],
            vec![Lambda(0), Rho(0), Rho(2), Swap(1)],
        ),
    ];
    let axioms = checks
        .iter()
        .map(|(name, inputs, lhs, rhs)| {
            let verdict = build(t, *inputs, lhs)
                .and_then(|l| build(t, *inputs, rhs).and_then(|r| l.compare(&r, 0.0)));
            match verdict {
                Ok(d) if d.is_equal() => AxiomResult {
                    name,
                    pass: true,
                    counterexample: None,
                },
                Ok(crate::tensor::TensorDiff::Differ { index, .. })
                | Ok(crate::tensor::TensorDiff::Indeterminate { index }) => AxiomResult {
                    name,
                    pass: false,
                    counterexample: Some(index),
                },
                _ => AxiomResult {
                    name,
                    pass: false,
                    counterexample: None,
                },
            }
        })
        .collect();
    CompatibilityReport { axioms }
}

/// `Q = (id⊗μ⊗id)(λ⊗ρ)`, slots `(i,l,j,m,k)` for `Q^{ijk}_{lm}`.
pub fn q_from_triple(t: &TripleSpec) -> Result<SolutionSpec, SolutionError> {
    let report = check_compatibility(t);
    if let Some(bad) = report.first_failure() {
        return Err(SolutionError::Incompatible(bad.name.to_string()));
    }
    Ok(q_from_triple_unchecked(t)?)
}

/// As [`q_from_triple`] without the compatibility gate.
pub fn q_from_triple_unchecked(t: &TripleSpec) -> Result<SolutionSpec, TensorError> {
    let m = build(t, 2, &[Op::Lambda(0), Op::Rho(2), Op::Mu(1)])?;
    // (i,j,k,l,m) -> (i,l,j,m,k)
    let q = m.tensor.permute(&[0, 3, 1, 4, 2])?;
    Ok(SolutionSpec {
        kind: SolutionKind::Triple,
        label: format!("triple:{}", t.name),
        group: None,
        q,
        kernels: None,
    })
}

/// `S = (id⊗μ)(λ⊗id)`, slots `(out₀,out₁,in₀,in₁)`; for a group algebra
/// `S(e_g⊗e_h) = e_g⊗e_{gh}`.
pub fn pentagon_s(t: &TripleSpec) -> Result<GroupTensor, TensorError> {
    Ok(build(t, 2, &[Op::Lambda(0), Op::Mu(1)])?.tensor)
}

/// `(x,y) ↦ ((x−xy)/(1−xy), xy, (y−xy)/(1−xy))` on `(0,1)²`.
pub fn set_q(x: &BigRational, y: &BigRational) -> Result<[BigRational; 3], SolutionError> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    let inside = |v: &BigRational| *v > zero && *v < one;
    if !inside(x) || !inside(y) {
        return Err(SolutionError::OutOfInterval(x.to_string(), y.to_string()));
    }
    let xy = x * y;
    let den = &one - &xy;
    Ok([(x - &xy) / &den, xy.clone(), (y - &xy) / &den])
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A parsed `--solution` argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionDescriptor {
    Bicharacter(FinAbGroup),
    GroupAlgebra(FiniteGroup),
    Set,
}

impl SolutionDescriptor {
    /// Builds the tensor solution; `None` for the set-theoretic map.
    pub fn build(&self) -> Result<Option<SolutionSpec>, SolutionError> {
        match self {
            SolutionDescriptor::Bicharacter(g) => Ok(Some(standard_bicharacter_solution(g))),
            SolutionDescriptor::GroupAlgebra(g) => q_from_triple(&TripleSpec::group_algebra(g)).map(Some),
            SolutionDescriptor::Set => Ok(None),
        }
    }
}

impl FromStr for SolutionDescriptor {
    type Err = SolutionError;

    fn from_str(s: &str) -> Result<SolutionDescriptor, SolutionError> {
        let bad = || SolutionError::BadDescriptor(s.to_string());
        if s == "set" {
            return Ok(SolutionDescriptor::Set);
        }
        if let Some(g) = s.strip_prefix("bichar:") {
            return g.parse().map(SolutionDescriptor::Bicharacter).map_err(|_| bad());
        }
        if let Some(g) = s.strip_prefix("triple:groupalg:") {
            return g.parse().map(SolutionDescriptor::GroupAlgebra);
        }
        Err(bad())
    }
}

impl fmt::Display for SolutionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionDescriptor::Bicharacter(g) => write!(f, "bichar:{g}"),
            SolutionDescriptor::GroupAlgebra(g) => write!(f, "triple:groupalg:{}", g.name()),
            SolutionDescriptor::Set => f.write_str("set"),
        }
    }
}
