//! Sparse tensors over a finite index set, with a variance per slot.
//!
//! An up slot carries `V`, a down slot its dual `V*`; only opposite slots may
//! be contracted. Every bound index contributes one measure weight of the
//! [`Domain`] (`c = r^{-1}` for the Haar convention, `1` for counting), so
//! `contract(id, f) = f` for the identity kernel `id[x,y] = δ(0)·[x=y]`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::group::FinAbGroup;
use crate::scalar::{Ambient, Comparison, FloatScalar, Scalar};

/// Float entries below this magnitude are dropped.
pub const FLOAT_ZERO: f64 = 1e-12;

/// Entry counts above which contraction is split across workers.
const PAR_THRESHOLD: usize = 2048;
const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Up,
    Down,
}

impl Variance {
    pub fn flip(self) -> Variance {
        match self {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        }
    }
}

impl fmt::Display for Variance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variance::Up => "up",
            Variance::Down => "down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// weight `r^{-1}` per sum, `δ(0) = r`
    Haar,
    /// plain sums, `δ(0) = 1`
    Counting,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexSet {
    Group(FinAbGroup),
    /// An abstract basis `{0, …, size−1}`.
    Basis { size: u32, name: String },
}

/// What a slot ranges over and how sums over it are weighted.
#[derive(Debug, Clone)]
pub struct Domain {
    index: IndexSet,
    measure: Measure,
    amb: Arc<Ambient>,
}

impl Domain {
    pub fn haar(group: &FinAbGroup) -> Domain {
        Domain {
            index: IndexSet::Group(group.clone()),
            measure: Measure::Haar,
            amb: group.ambient().clone(),
        }
    }

    pub fn counting(group: &FinAbGroup) -> Domain {
        Domain {
            index: IndexSet::Group(group.clone()),
            measure: Measure::Counting,
            amb: group.ambient().clone(),
        }
    }

    /// Abstract basis with integer-valued scalars and plain sums.
    pub fn basis(size: u32, name: impl Into<String>) -> Domain {
        Domain {
            index: IndexSet::Basis {
                size,
                name: name.into(),
            },
            measure: Measure::Counting,
            amb: Ambient::new(1, 1).expect("trivial ring"),
        }
    }

    pub fn size(&self) -> u32 {
        match &self.index {
            IndexSet::Group(g) => g.size(),
            IndexSet::Basis { size, .. } => *size,
        }
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index
    }

    pub fn group(&self) -> Option<&FinAbGroup> {
        match &self.index {
            IndexSet::Group(g) => Some(g),
            IndexSet::Basis { .. } => None,
        }
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.amb
    }

    /// Weight of one bound index.
    pub fn weight(&self) -> Scalar {
        match self.measure {
            Measure::Haar => Scalar::radical_pow(&self.amb, -1),
            Measure::Counting => Scalar::one(&self.amb),
        }
    }

    /// `δ(0)`: the diagonal value of the identity kernel.
    pub fn identity_value(&self) -> Scalar {
        match self.measure {
            Measure::Haar => Scalar::radical_pow(&self.amb, 1),
            Measure::Counting => Scalar::one(&self.amb),
        }
    }

    pub fn label(&self, i: u32) -> String {
        match &self.index {
            IndexSet::Group(g) => g.element(i).to_string(),
            IndexSet::Basis { .. } => i.to_string(),
        }
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Domain) -> bool {
        self.index == other.index && self.measure == other.measure
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.measure {
            Measure::Haar => "haar",
            Measure::Counting => "counting",
        };
        match &self.index {
            IndexSet::Group(g) => write!(f, "{g}/{m}"),
            IndexSet::Basis { size, name } => write!(f, "{name}[{size}]/{m}"),
        }
    }
}

/// Entry type of a tensor: exact [`Scalar`] or [`FloatScalar`].
pub trait Coefficient: Clone + fmt::Debug + Send + Sync + 'static {
    fn from_scalar(s: &Scalar) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_complex(&self) -> Complex64;
    /// `abs_tol` is ignored by exact coefficients.
    fn compare(&self, other: &Self, abs_tol: f64) -> Comparison;
    fn render(&self) -> String;
}

impl Coefficient for Scalar {
    fn from_scalar(s: &Scalar) -> Scalar {
        s.clone()
    }
    fn add(&self, other: &Scalar) -> Scalar {
        self + other
    }
    fn mul(&self, other: &Scalar) -> Scalar {
        self * other
    }
    fn neg(&self) -> Scalar {
        -self.clone()
    }
    fn conj(&self) -> Scalar {
        Scalar::conj(self)
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn to_complex(&self) -> Complex64 {
        self.to_float()
    }
    fn compare(&self, other: &Scalar, _abs_tol: f64) -> Comparison {
        Scalar::compare(self, other).expect("tensors over one domain share a ring")
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Coefficient for FloatScalar {
    fn from_scalar(s: &Scalar) -> FloatScalar {
        s.to_float()
    }
    fn add(&self, other: &FloatScalar) -> FloatScalar {
        self + other
    }
    fn mul(&self, other: &FloatScalar) -> FloatScalar {
        self * other
    }
    fn neg(&self) -> FloatScalar {
        -self
    }
    fn conj(&self) -> FloatScalar {
        Complex64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.norm() < FLOAT_ZERO
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn compare(&self, other: &FloatScalar, abs_tol: f64) -> Comparison {
        if (self - other).norm() <= abs_tol {
            Comparison::Equal
        } else {
            Comparison::Unequal
        }
    }
    fn render(&self) -> String {
        format!("{:.12}{:+.12}i", self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("slot {slot} out of range for a {arity}-slot tensor")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("variance clash: cannot contract {0} with {0}")]
    VarianceClash(Variance),
    #[error("domain mismatch: {0} vs {1}")]
    DomainMismatch(String, String),
    #[error("index tuple {0:?} does not fit the tensor")]
    BadIndex(Vec<u32>),
    #[error("not a permutation of {arity} slots: {perm:?}")]
    BadPermutation { perm: Vec<usize>, arity: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Sparse tensor; absent entries are zero.
#[derive(Clone, Debug)]
pub struct GroupTensor<S: Coefficient = Scalar> {
    domain: Domain,
    variances: Vec<Variance>,
    entries: BTreeMap<Vec<u32>, S>,
}

impl<S: Coefficient> GroupTensor<S> {
    pub fn new(domain: &Domain, variances: Vec<Variance>) -> GroupTensor<S> {
        GroupTensor {
            domain: domain.clone(),
            variances,
            entries: BTreeMap::new(),
        }
    }

    /// Tabulates `f` over the full index space.
    pub fn from_fn<F>(domain: &Domain, variances: Vec<Variance>, mut f: F) -> GroupTensor<S>
    where
        F: FnMut(&[u32]) -> S,
    {
        let mut t = GroupTensor::new(domain, variances);
        let n = domain.size();
        let arity = t.arity();
        let mut idx = vec![0u32; arity];
        loop {
            let v = f(&idx);
            if !v.is_zero() {
                t.entries.insert(idx.clone(), v);
            }
            if !advance(&mut idx, n) {
                break;
            }
        }
        t
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn variances(&self) -> &[Variance] {
        &self.variances
    }

    pub fn arity(&self) -> usize {
        self.variances.len()
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u32>, &S)> {
        self.entries.iter()
    }

    pub fn zero_coeff(&self) -> S {
        S::from_scalar(&Scalar::zero(self.domain.ambient()))
    }

    /// Entry at `idx` (zero when absent).
    pub fn get(&self, idx: &[u32]) -> S {
        self.entries
            .get(idx)
            .cloned()
            .unwrap_or_else(|| self.zero_coeff())
    }

    fn check_index(&self, idx: &[u32]) -> Result<(), TensorError> {
        if idx.len() != self.arity() || idx.iter().any(|&a| a >= self.domain.size()) {
            Err(TensorError::BadIndex(idx.to_vec()))
        } else {
            Ok(())
        }
    }

    /// Overwrites the entry at `idx`; zero values remove it.
    pub fn set(&mut self, idx: &[u32], value: S) -> Result<(), TensorError> {
        self.check_index(idx)?;
        if value.is_zero() {
            self.entries.remove(idx);
        } else {
            self.entries.insert(idx.to_vec(), value);
        }
        Ok(())
    }

    /// Adds `value` to the entry at `idx`.
    pub fn accumulate(&mut self, idx: &[u32], value: S) -> Result<(), TensorError> {
        self.check_index(idx)?;
        let sum = match self.entries.get(idx) {
            Some(old) => old.add(&value),
            None => value,
        };
        self.set(idx, sum)
    }

    fn check_slot(&self, slot: usize) -> Result<(), TensorError> {
        if slot < self.arity() {
            Ok(())
        } else {
            Err(TensorError::SlotOutOfRange {
                slot,
                arity: self.arity(),
            })
        }
    }

    fn check_domain(&self, other_domain: &Domain) -> Result<(), TensorError> {
        if self.domain == *other_domain {
            Ok(())
        } else {
            Err(TensorError::DomainMismatch(
                self.domain.to_string(),
                other_domain.to_string(),
            ))
        }
    }

    pub fn scale(&self, s: &S) -> GroupTensor<S> {
        let mut out = GroupTensor::new(&self.domain, self.variances.clone());
        for (k, v) in &self.entries {
            let p = v.mul(s);
            if !p.is_zero() {
                out.entries.insert(k.clone(), p);
            }
        }
        out
    }

    pub fn add(&self, other: &GroupTensor<S>) -> Result<GroupTensor<S>, TensorError> {
        self.check_domain(&other.domain)?;
        if self.variances != other.variances {
            return Err(TensorError::Shape("sum of tensors with different slot variances".into()));
        }
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.accumulate(k, v.clone())?;
        }
        Ok(out)
    }

    /// `c · Σ_a self[…,a,…] · other[…,a,…]`; result slots are self's remainder then other's.
    pub fn contract(
        &self,
        s1: usize,
        other: &GroupTensor<S>,
        s2: usize,
    ) -> Result<GroupTensor<S>, TensorError> {
        self.contract_pairs(other, &[(s1, s2)])
    }

    /// Tensor product (no bound slots, no weight).
    pub fn outer(&self, other: &GroupTensor<S>) -> Result<GroupTensor<S>, TensorError> {
        self.contract_pairs(other, &[])
    }

    /// Contracts several slot pairs at once, one weight per pair.
    pub fn contract_pairs(
        &self,
        other: &GroupTensor<S>,
        pairs: &[(usize, usize)],
    ) -> Result<GroupTensor<S>, TensorError> {
        self.check_domain(&other.domain)?;
        for &(a, b) in pairs {
            self.check_slot(a)?;
            other.check_slot(b)?;
            if self.variances[a] == other.variances[b] {
                return Err(TensorError::VarianceClash(self.variances[a]));
            }
        }
        let mine: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let theirs: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        if has_duplicates(&mine) || has_duplicates(&theirs) {
            return Err(TensorError::Shape("slot bound twice".into()));
        }
        let keep1: Vec<usize> = (0..self.arity()).filter(|s| !mine.contains(s)).collect();
        let keep2: Vec<usize> = (0..other.arity()).filter(|s| !theirs.contains(s)).collect();
        let variances: Vec<Variance> = keep1
            .iter()
            .map(|&s| self.variances[s])
            .chain(keep2.iter().map(|&s| other.variances[s]))
            .collect();

        let mut by_key: HashMap<Vec<u32>, Vec<(Vec<u32>, &S)>> = HashMap::new();
        for (k, v) in &other.entries {
            let bound: Vec<u32> = theirs.iter().map(|&s| k[s]).collect();
            let rest: Vec<u32> = keep2.iter().map(|&s| k[s]).collect();
            by_key.entry(bound).or_default().push((rest, v));
        }
        let mut weight = S::from_scalar(&Scalar::one(self.domain.ambient()));
        let w = S::from_scalar(&self.domain.weight());
        for _ in pairs {
            weight = weight.mul(&w);
        }

        let left: Vec<(&Vec<u32>, &S)> = self.entries.iter().collect();
        let work = |chunk: &[(&Vec<u32>, &S)]| {
            let mut acc: HashMap<Vec<u32>, S> = HashMap::new();
            for (k, v) in chunk {
                let bound: Vec<u32> = mine.iter().map(|&s| k[s]).collect();
                let Some(matches) = by_key.get(&bound) else {
                    continue;
                };
                let head: Vec<u32> = keep1.iter().map(|&s| k[s]).collect();
                for (rest, v2) in matches {
                    let mut key = head.clone();
                    key.extend_from_slice(rest);
                    let p = v.mul(v2);
                    match acc.get_mut(&key) {
                        Some(old) => *old = old.add(&p),
                        None => {
                            acc.insert(key, p);
                        }
                    }
                }
            }
            acc
        };
        let partials: Vec<HashMap<Vec<u32>, S>> = if left.len() > PAR_THRESHOLD {
            left.par_chunks(CHUNK).map(work).collect()
        } else {
            vec![work(&left)]
        };
        let mut total: BTreeMap<Vec<u32>, S> = BTreeMap::new();
        for part in partials {
            let mut keys: Vec<(Vec<u32>, S)> = part.into_iter().collect();
            keys.sort_by(|a, b| a.0.cmp(&b.0));
            for (k, v) in keys {
                match total.get_mut(&k) {
                    Some(old) => *old = old.add(&v),
                    None => {
                        total.insert(k, v);
                    }
                }
            }
        }
        let entries = total
            .into_iter()
            .filter_map(|(k, v)| {
                let v = v.mul(&weight);
                (!v.is_zero()).then_some((k, v))
            })
            .collect();
        Ok(GroupTensor {
            domain: self.domain.clone(),
            variances,
            entries,
        })
    }

    /// Contracts slot pairs within one tensor, one weight per pair.
    pub fn trace(&self, pairs: &[(usize, usize)]) -> Result<GroupTensor<S>, TensorError> {
        let mut bound = Vec::new();
        for &(a, b) in pairs {
            self.check_slot(a)?;
            self.check_slot(b)?;
            if self.variances[a] == self.variances[b] {
                return Err(TensorError::VarianceClash(self.variances[a]));
            }
            bound.push(a);
            bound.push(b);
        }
        if has_duplicates(&bound) {
            return Err(TensorError::Shape("slot bound twice".into()));
        }
        let keep: Vec<usize> = (0..self.arity()).filter(|s| !bound.contains(s)).collect();
        let mut w = S::from_scalar(&Scalar::one(self.domain.ambient()));
        let c = S::from_scalar(&self.domain.weight());
        for _ in pairs {
            w = w.mul(&c);
        }
        let mut out = GroupTensor::new(&self.domain, keep.iter().map(|&s| self.variances[s]).collect());
        for (k, v) in &self.entries {
            if pairs.iter().all(|&(a, b)| k[a] == k[b]) {
                let key: Vec<u32> = keep.iter().map(|&s| k[s]).collect();
                out.accumulate(&key, v.mul(&w))?;
            }
        }
        Ok(out)
    }

    /// New slot `i` is old slot `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<GroupTensor<S>, TensorError> {
        let mut seen = vec![false; self.arity()];
        let ok = perm.len() == self.arity()
            && perm.iter().all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true));
        if !ok {
            return Err(TensorError::BadPermutation {
                perm: perm.to_vec(),
                arity: self.arity(),
            });
        }
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (perm.iter().map(|&p| k[p]).collect(), v.clone()))
            .collect();
        Ok(GroupTensor {
            domain: self.domain.clone(),
            variances: perm.iter().map(|&p| self.variances[p]).collect(),
            entries,
        })
    }

    pub fn swap(&self, a: usize, b: usize) -> Result<GroupTensor<S>, TensorError> {
        self.check_slot(a)?;
        self.check_slot(b)?;
        let mut perm: Vec<usize> = (0..self.arity()).collect();
        perm.swap(a, b);
        self.permute(&perm)
    }

    /// Acts on one slot with an integral kernel; the slot keeps its variance.
    ///
    /// Left: `t′[…x…] = c Σ_y K(x,y) t[…y…]`; right: `t′[…x…] = c Σ_y t[…y…] K(y,x)`.
    pub fn apply_kernel(
        &self,
        slot: usize,
        kernel: &Kernel<S>,
        side: Side,
    ) -> Result<GroupTensor<S>, TensorError> {
        self.check_slot(slot)?;
        self.check_domain(kernel.domain())?;
        let n = self.domain.size();
        let c = S::from_scalar(&self.domain.weight());
        // column y of the kernel as (x, K·c) pairs
        let mut cols: Vec<Vec<(u32, S)>> = vec![Vec::new(); n as usize];
        for (k, v) in kernel.tensor().entries() {
            let (x, y) = match side {
                Side::Left => (k[0], k[1]),
                Side::Right => (k[1], k[0]),
            };
            cols[y as usize].push((x, v.mul(&c)));
        }
        let mut out = GroupTensor::new(&self.domain, self.variances.clone());
        for (k, v) in &self.entries {
            for (x, kv) in &cols[k[slot] as usize] {
                let mut key = k.clone();
                key[slot] = *x;
                out.accumulate(&key, kv.mul(v))?;
            }
        }
        Ok(out)
    }

    /// Entrywise conjugate with every variance flipped.
    pub fn conj(&self) -> GroupTensor<S> {
        GroupTensor {
            domain: self.domain.clone(),
            variances: self.variances.iter().map(|v| v.flip()).collect(),
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), v.conj()))
                .collect(),
        }
    }

    /// Entrywise conjugate keeping the variances.
    pub fn conj_entries(&self) -> GroupTensor<S> {
        let mut t = self.conj();
        t.variances = self.variances.clone();
        t
    }

    /// Fixes `slot` to the index `a` and drops it.
    pub fn pin(&self, slot: usize, a: u32) -> Result<GroupTensor<S>, TensorError> {
        self.check_slot(slot)?;
        let mut variances = self.variances.clone();
        variances.remove(slot);
        let entries = self
            .entries
            .iter()
            .filter(|(k, _)| k[slot] == a)
            .map(|(k, v)| {
                let mut k = k.clone();
                k.remove(slot);
                (k, v.clone())
            })
            .collect();
        Ok(GroupTensor {
            domain: self.domain.clone(),
            variances,
            entries,
        })
    }

    pub fn with_variances(&self, variances: Vec<Variance>) -> Result<GroupTensor<S>, TensorError> {
        if variances.len() != self.arity() {
            return Err(TensorError::Shape("variance list of wrong length".into()));
        }
        let mut t = self.clone();
        t.variances = variances;
        Ok(t)
    }

    pub fn map<T: Coefficient, F: Fn(&S) -> T>(&self, f: F) -> GroupTensor<T> {
        GroupTensor {
            domain: self.domain.clone(),
            variances: self.variances.clone(),
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), f(v)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn to_float(&self) -> GroupTensor<FloatScalar> {
        self.map(|v| v.to_complex())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .values()
            .map(|v| v.to_complex().norm())
            .fold(0.0, f64::max)
    }

    /// Weighted squared norm `Σ c^arity |entry|²`.
    pub fn weighted_norm_sqr(&self) -> f64 {
        let c = self.domain.weight().to_float().norm();
        let w = c.powi(self.arity() as i32);
        self.entries
            .values()
            .map(|v| v.to_complex().norm_sqr())
            .sum::<f64>()
            * w
    }

    /// Compares entries (not variances) over the union of supports.
    ///
    /// Float coefficients use `rel_tol` times the largest magnitude present.
    /// Any unequal entry wins over indeterminate ones; within a kind the
    /// lexicographically least index is reported.
    pub fn compare(&self, other: &GroupTensor<S>, rel_tol: f64) -> Result<TensorDiff, TensorError> {
        self.check_domain(&other.domain)?;
        if self.arity() != other.arity() {
            return Err(TensorError::Shape(format!(
                "comparing {}-slot with {}-slot tensor",
                self.arity(),
                other.arity()
            )));
        }
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        let tol = rel_tol * scale;
        let zero = self.zero_coeff();
        let mut keys: Vec<&Vec<u32>> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut indeterminate = None;
        for k in keys {
            let a = self.entries.get(k).unwrap_or(&zero);
            let b = other.entries.get(k).unwrap_or(&zero);
            match a.compare(b, tol) {
                Comparison::Equal => {}
                Comparison::Unequal => {
                    return Ok(TensorDiff::Differ {
                        index: k.clone(),
                        left: a.render(),
                        right: b.render(),
                    })
                }
                Comparison::Indeterminate => {
                    indeterminate.get_or_insert_with(|| k.clone());
                }
            }
        }
        Ok(match indeterminate {
            Some(index) => TensorDiff::Indeterminate { index },
            None => TensorDiff::Equal,
        })
    }

    /// One line per entry: `x,u,y,v,z -> scalar`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let idx: Vec<String> = k.iter().map(|&a| self.domain.label(a)).collect();
            out.push_str(&idx.join(","));
            out.push_str(" -> ");
            out.push_str(&v.render());
            out.push('\n');
        }
        out
    }
}

impl GroupTensor<Scalar> {
    /// A 0-slot tensor's value.
    pub fn scalar_value(&self) -> Scalar {
        self.get(&[])
    }
}

fn advance(idx: &mut [u32], n: u32) -> bool {
    for a in idx.iter_mut().rev() {
        *a += 1;
        if *a < n {
            return true;
        }
        *a = 0;
    }
    false
}

fn has_duplicates(xs: &[usize]) -> bool {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.windows(2).any(|w| w[0] == w[1])
}

/// Outcome of comparing two tensors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TensorDiff {
    Equal,
    Differ {
        index: Vec<u32>,
        left: String,
        right: String,
    },
    /// Entries agree numerically but not as graded expressions.
    Indeterminate { index: Vec<u32> },
}

impl TensorDiff {
    pub fn is_equal(&self) -> bool {
        matches!(self, TensorDiff::Equal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Integral kernel `K(x,y)`, stored as a 2-slot tensor with variances (up, down).
#[derive(Clone, Debug)]
pub struct Kernel<S: Coefficient = Scalar> {
    tensor: GroupTensor<S>,
}

impl<S: Coefficient> Kernel<S> {
    pub fn from_fn<F: FnMut(u32, u32) -> S>(domain: &Domain, mut f: F) -> Kernel<S> {
        Kernel {
            tensor: GroupTensor::from_fn(domain, vec![Variance::Up, Variance::Down], |k| {
                f(k[0], k[1])
            }),
        }
    }

    pub fn from_tensor(tensor: GroupTensor<S>) -> Result<Kernel<S>, TensorError> {
        if tensor.arity() != 2 {
            return Err(TensorError::Shape("a kernel has exactly two slots".into()));
        }
        let tensor = tensor.with_variances(vec![Variance::Up, Variance::Down])?;
        Ok(Kernel { tensor })
    }

    /// `δ(x−y)`.
    pub fn identity(domain: &Domain) -> Kernel<S> {
        let d = S::from_scalar(&domain.identity_value());
        let zero = S::from_scalar(&Scalar::zero(domain.ambient()));
        Kernel::from_fn(domain, |x, y| if x == y { d.clone() } else { zero.clone() })
    }

    pub fn domain(&self) -> &Domain {
        self.tensor.domain()
    }

    pub fn tensor(&self) -> &GroupTensor<S> {
        &self.tensor
    }

    pub fn at(&self, x: u32, y: u32) -> S {
        self.tensor.get(&[x, y])
    }

    /// `(K∘M)(x,z) = c Σ_y K(x,y) M(y,z)`.
    pub fn compose(&self, other: &Kernel<S>) -> Result<Kernel<S>, TensorError> {
        Kernel::from_tensor(self.tensor.contract(1, &other.tensor, 0)?)
    }

    /// Entrywise conjugate kernel.
    pub fn conj(&self) -> Kernel<S> {
        Kernel {
            tensor: self.tensor.conj_entries(),
        }
    }

    pub fn transpose(&self) -> Kernel<S> {
        Kernel {
            tensor: self
                .tensor
                .swap(0, 1)
                .expect("two slots")
                .with_variances(vec![Variance::Up, Variance::Down])
                .expect("two slots"),
        }
    }

    /// `K(x,y) = K(y,x)` as a bilinear form.
    pub fn is_symmetric(&self) -> bool {
        self.tensor
            .compare(&self.transpose().tensor, 1e-9)
            .map(|d| d.is_equal())
            .unwrap_or(false)
    }

    /// Whether `other` inverts `self` on both sides.
    pub fn is_inverse(&self, other: &Kernel<S>) -> bool {
        let id = Kernel::identity(self.domain());
        let check = |a: &Kernel<S>, b: &Kernel<S>| {
            a.compose(b)
                .and_then(|p| p.tensor.compare(&id.tensor, 1e-9))
                .map(|d| d.is_equal())
                .unwrap_or(false)
        };
        check(self, other) && check(other, self)
    }

    pub fn to_float(&self) -> Kernel<FloatScalar> {
        Kernel {
            tensor: self.tensor.to_float(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FinAbGroup;
    use Variance::{Down, Up};

    fn z(n: u32) -> FinAbGroup {
        FinAbGroup::cyclic(n).unwrap()
    }

    fn t_kernel(g: &FinAbGroup) -> Kernel {
        let d = Domain::haar(g);
        Kernel::from_fn(&d, |x, y| {
            if g.add_rank(x, y) == 0 {
                g.delta_at_zero() * g.gauss_rank(x)
            } else {
                Scalar::zero(g.ambient())
            }
        })
    }

    fn s_kernel(g: &FinAbGroup) -> Kernel {
        Kernel::from_fn(&Domain::haar(g), |x, y| g.gauss_rank(g.sub_rank(x, y)))
    }

    fn vector(g: &FinAbGroup, var: Variance) -> GroupTensor {
        GroupTensor::from_fn(&Domain::haar(g), vec![var], |k| {
            Scalar::from_int(g.ambient(), 3 * k[0] as i64 + 1) + Scalar::root(g.ambient(), k[0] as i64)
        })
    }

    #[test]
    fn identity_contraction() {
        let g = z(4);
        let d = Domain::haar(&g);
        let id = Kernel::<Scalar>::identity(&d);
        let f = vector(&g, Up);
        let out = id.tensor().contract(1, &f, 0).unwrap();
        assert!(out.compare(&f, 0.0).unwrap().is_equal());
        let chain = id.compose(&id).unwrap();
        assert!(chain.tensor().compare(id.tensor(), 0.0).unwrap().is_equal());
    }

    #[test]
    fn t_inverse_is_conjugate() {
        let g = z(3);
        let t = t_kernel(&g);
        let prod = t.compose(&t.conj()).unwrap();
        let id = Kernel::identity(&Domain::haar(&g));
        assert!(prod.tensor().compare(id.tensor(), 0.0).unwrap().is_equal());
        // brute force: c Σ_a T(x,a) conj T(a,y)
        let c = g.measure_weight();
        for x in 0..3 {
            for y in 0..3 {
                let mut s = Scalar::zero(g.ambient());
                for a in 0..3 {
                    s = s + t.at(x, a) * t.at(a, y).conj();
                }
                assert_eq!(s * &c, id.at(x, y));
            }
        }
    }

    #[test]
    fn apply_t_collapses_delta() {
        for n in 2..=6 {
            let g = z(n);
            let f = vector(&g, Up);
            let out = f.apply_kernel(0, &t_kernel(&g), Side::Left).unwrap();
            for x in 0..n {
                assert_eq!(out.get(&[x]), g.gauss_rank(x) * f.get(&[g.neg_rank(x)]));
            }
            let back = out.apply_kernel(0, &t_kernel(&g).conj(), Side::Left).unwrap();
            assert!(back.compare(&f, 0.0).unwrap().is_equal());
        }
    }

    #[test]
    fn identity_kernel_application_is_trivial() {
        let g = z(3);
        let d = Domain::haar(&g);
        let f = GroupTensor::from_fn(&d, vec![Up, Down, Up], |k| {
            Scalar::from_int(g.ambient(), (k[0] * 9 + k[1] * 3 + k[2]) as i64)
        });
        for slot in 0..3 {
            for side in [Side::Left, Side::Right] {
                let out = f.apply_kernel(slot, &Kernel::identity(&d), side).unwrap();
                assert!(out.compare(&f, 0.0).unwrap().is_equal());
            }
        }
    }

    #[test]
    fn s_is_symmetric_and_swap_invariant() {
        let g = z(5);
        let s = s_kernel(&g);
        assert!(s.is_symmetric());
        assert!(t_kernel(&g).is_symmetric());
        let swapped = s.tensor().swap(0, 1).unwrap();
        assert!(swapped.compare(s.tensor(), 0.0).unwrap().is_equal());
        assert!(s.is_inverse(&s.conj()));
    }

    #[test]
    fn permute_rekeys() {
        let g = z(3);
        let d = Domain::haar(&g);
        let q = GroupTensor::from_fn(&d, vec![Up, Down, Up, Down, Up], |k| {
            Scalar::from_int(g.ambient(), k.iter().fold(0i64, |a, &b| a * 3 + b as i64))
        });
        let p = q.swap(0, 1).unwrap();
        assert_eq!(p.variances(), &[Down, Up, Up, Down, Up]);
        assert_eq!(p.get(&[2, 1, 0, 1, 2]), q.get(&[1, 2, 0, 1, 2]));
        assert!(p.swap(0, 1).unwrap().compare(&q, 0.0).unwrap().is_equal());
        assert!(q.permute(&[0, 0, 1, 2, 3]).is_err());
        let cyc = q.permute(&[1, 2, 3, 4, 0]).unwrap();
        assert_eq!(cyc.get(&[0, 1, 2, 0, 1]), q.get(&[1, 0, 1, 2, 0]));
    }

    #[test]
    fn variance_and_domain_errors() {
        let g = z(3);
        let a = vector(&g, Up);
        assert_eq!(a.contract(0, &a, 0).unwrap_err(), TensorError::VarianceClash(Up));
        let b = vector(&z(2), Down);
        assert!(matches!(a.contract(0, &b, 0), Err(TensorError::DomainMismatch(..))));
        let c = GroupTensor::<Scalar>::new(&Domain::counting(&g), vec![Down]);
        assert!(a.contract(0, &c, 0).is_err());
        assert!(a.contract(1, &vector(&g, Down), 0).is_err());
    }

    #[test]
    fn contraction_order() {
        let g = z(2);
        let d = Domain::haar(&g);
        let a = GroupTensor::from_fn(&d, vec![Up, Down], |k| Scalar::from_int(g.ambient(), (k[0] + 2 * k[1] + 1) as i64));
        let b = GroupTensor::from_fn(&d, vec![Down, Up, Up], |k| {
            Scalar::root(g.ambient(), (k[0] + k[1] + 3 * k[2]) as i64)
        });
        let out = a.contract(0, &b, 0).unwrap();
        assert_eq!(out.variances(), &[Down, Up, Up]);
        let c = g.measure_weight();
        for x in 0..2 {
            for y in 0..2 {
                for w in 0..2 {
                    let s = (0..2).fold(Scalar::zero(g.ambient()), |acc, s| acc + a.get(&[s, x]) * b.get(&[s, y, w]));
                    assert_eq!(out.get(&[x, y, w]), s * &c);
                }
            }
        }
    }

    #[test]
    fn trace_matches_pair_contraction() {
        let g = z(3);
        let d = Domain::haar(&g);
        let a = GroupTensor::from_fn(&d, vec![Up, Down], |k| Scalar::root(g.ambient(), (k[0] * 2 + k[1]) as i64));
        let b = GroupTensor::from_fn(&d, vec![Up, Down], |k| Scalar::from_int(g.ambient(), (k[0] + k[1]) as i64 - 1));
        let two = a.contract_pairs(&b, &[(0, 1), (1, 0)]).unwrap();
        let via = a.outer(&b).unwrap().trace(&[(0, 3), (1, 2)]).unwrap();
        assert!(two.compare(&via, 0.0).unwrap().is_equal());
        assert_eq!(two.arity(), 0);
    }

    #[test]
    fn conj_examples() {
        let g = z(3);
        let f = vector(&g, Up);
        let cc = f.conj().conj();
        assert_eq!(cc.variances(), f.variances());
        assert!(cc.compare(&f, 0.0).unwrap().is_equal());
        let id = Kernel::<Scalar>::identity(&Domain::haar(&g));
        assert!(id.tensor().conj().compare(id.tensor(), 0.0).unwrap().is_equal());
    }

    #[test]
    fn compare_reports_least_difference() {
        let g = z(3);
        let f = vector(&g, Up);
        let mut h = f.clone();
        h.set(&[2], Scalar::zero(g.ambient())).unwrap();
        h.set(&[1], Scalar::one(g.ambient())).unwrap();
        match f.compare(&h, 0.0).unwrap() {
            TensorDiff::Differ { index, .. } => assert_eq!(index, vec![1]),
            other => panic!("{other:?}"),
        }
        let ff = f.to_float();
        let mut hf = ff.clone();
        hf.set(&[0], ff.get(&[0]) + Complex64::new(1e-13, 0.0)).unwrap();
        assert!(ff.compare(&hf, 1e-9).unwrap().is_equal());
    }

    #[test]
    fn radical_grading_mismatch_is_indeterminate() {
        // |A| = 4: the formal r and the integer 2 agree only numerically
        let g = FinAbGroup::new(&[2, 2]).unwrap();
        let d = Domain::haar(&g);
        let amb = g.ambient();
        let mut a = GroupTensor::<Scalar>::new(&d, vec![Up]);
        let mut b = a.clone();
        a.set(&[0], Scalar::radical_pow(amb, 1)).unwrap();
        b.set(&[0], Scalar::from_int(amb, 2)).unwrap();
        assert_eq!(a.compare(&b, 0.0).unwrap(), TensorDiff::Indeterminate { index: vec![0] });
        b.set(&[1], Scalar::one(amb)).unwrap();
        assert!(matches!(a.compare(&b, 0.0).unwrap(), TensorDiff::Differ { .. }));
    }

    #[test]
    fn dump_format() {
        let g = z(2);
        let d = Domain::haar(&g);
        let mut t = GroupTensor::<Scalar>::new(&d, vec![Up, Down, Up, Down, Up]);
        t.set(&[1, 0, 1, 1, 0], Scalar::from_int(g.ambient(), 2)).unwrap();
        assert_eq!(t.dump(), "1,0,1,1,0 -> 2\n");
    }

    #[test]
    fn basis_domain_uses_plain_sums() {
        let d = Domain::basis(3, "V");
        let id = Kernel::<Scalar>::identity(&d);
        assert_eq!(id.at(1, 1), Scalar::one(d.ambient()));
        let f = GroupTensor::from_fn(&d, vec![Up], |k| Scalar::from_int(d.ambient(), k[0] as i64 + 5));
        let out = id.tensor().contract(1, &f, 0).unwrap();
        assert!(out.compare(&f, 0.0).unwrap().is_equal());
    }
}
