//! Exact values in `Z[ζ]` extended by a formal square root `r` of the group order.
//!
//! Every tensor coefficient in this crate lives in the ring of integers of the
//! `2L`-th cyclotomic field, `ζ = e^{2πi/2L}`, adjoined with a formal radical `r`
//! satisfying `r² = N`. A [`Scalar`] is a finite sum `Σ_e r^e · v_e` where each
//! `v_e` is an integer coefficient vector in the power basis `1, ζ, …, ζ^{φ(2L)-1}`
//! reduced modulo the cyclotomic polynomial `Φ_{2L}`.
//!
//! The radical is graded rather than evaluated: terms with even and odd powers of
//! `r` are kept apart. Within one parity class the representation is canonical
//! (see [`Scalar::normalize`]), so equality is decided without any numerics.
//! When two values differ in *both* parity classes the difference might still be
//! zero (`√N` can lie in the cyclotomic field), and [`Scalar::compare`] reports
//! that situation as [`Comparison::Indeterminate`] unless a float evaluation
//! proves the values apart.

mod parse;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use parse::ParseScalarError;

/// Double-precision complex value used by the float backend.
pub type FloatScalar = Complex64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("scalars from different rings: (L={0}, N={1}) vs (L={2}, N={3})")]
    AmbientMismatch(u32, u64, u32, u64),
    #[error("root order parameter L must be positive")]
    ZeroOrder,
    #[error("radicand must be positive")]
    ZeroRadicand,
}

static FAULT: AtomicBool = AtomicBool::new(false);

/// Turns on a deliberate multiplication bug. Used by `selftest --inject-fault`
/// to show that the checks notice broken arithmetic.
#[doc(hidden)]
pub fn set_fault_injection(on: bool) {
    FAULT.store(on, Ordering::SeqCst);
}

#[doc(hidden)]
pub fn fault_injection() -> bool {
    FAULT.load(Ordering::Relaxed)
}

/// The ring `Z[ζ_{2L}][r]/(r² − N)` shared by a family of scalars.
#[derive(Debug)]
pub struct Ambient {
    half_order: u32,
    radicand: u64,
    /// Coefficients of `Φ_{2L}`, lowest degree first; monic.
    phi: Vec<i64>,
    /// `ζ^k` reduced, for `k` in `0..2L`.
    powers: Vec<Vec<i64>>,
}

impl Ambient {
    /// Ring for roots of order `2L` and radical `r² = N`.
    ///
    /// Rings are interned, so repeated calls hand out the same `Arc`.
    pub fn new(half_order: u32, radicand: u64) -> Result<Arc<Ambient>, ScalarError> {
        if half_order == 0 {
            return Err(ScalarError::ZeroOrder);
        }
        if radicand == 0 {
            return Err(ScalarError::ZeroRadicand);
        }
        type Cache = Mutex<HashMap<(u32, u64), Arc<Ambient>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("ambient cache poisoned");
        let amb = guard
            .entry((half_order, radicand))
            .or_insert_with(|| Arc::new(Ambient::build(half_order, radicand)));
        Ok(Arc::clone(amb))
    }

    fn build(half_order: u32, radicand: u64) -> Ambient {
        let order = 2 * half_order as usize;
        let phi = cyclotomic_polynomial(order);
        let degree = phi.len() - 1;
        let mut powers = Vec::with_capacity(order);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..order {
            powers.push(cur.clone());
            // multiply by x and reduce
            let top = cur[degree - 1];
            for k in (1..degree).rev() {
                cur[k] = cur[k - 1] - top * phi[k];
            }
            cur[0] = -top * phi[0];
        }
        Ambient {
            half_order,
            radicand,
            phi,
            powers,
        }
    }

    /// `L`, half the order of the primitive root `ζ`.
    pub fn half_order(&self) -> u32 {
        self.half_order
    }

    /// Order of the primitive root `ζ`, i.e. `2L`.
    pub fn root_order(&self) -> u32 {
        2 * self.half_order
    }

    /// `N` with `r² = N`.
    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    /// `φ(2L)`, the length of a coefficient vector.
    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    /// Coefficients of the reduction polynomial `Φ_{2L}`, lowest first.
    pub fn cyclotomic_coefficients(&self) -> &[i64] {
        &self.phi
    }

    fn same(&self, other: &Ambient) -> bool {
        self.half_order == other.half_order && self.radicand == other.radicand
    }
}

/// `Φ_m` by dividing `x^m − 1` by every `Φ_d` with `d | m`, `d < m`.
pub fn cyclotomic_polynomial(m: usize) -> Vec<i64> {
    assert!(m >= 1);
    let mut num = vec![0i64; m + 1];
    num[0] = -1;
    num[m] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

/// Quotient of `a / b` for monic `b` dividing `a` exactly.
fn poly_div_exact(a: &[i64], b: &[i64]) -> Vec<i64> {
    let db = b.len() - 1;
    let da = a.len() - 1;
    debug_assert_eq!(b[db], 1);
    let mut rem = a.to_vec();
    let mut quot = vec![0i64; da - db + 1];
    for k in (0..=da - db).rev() {
        let c = rem[k + db];
        quot[k] = c;
        for (j, bj) in b.iter().enumerate() {
            rem[k + j] -= c * bj;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "inexact cyclotomic division");
    quot
}

/// Integer coefficient vector of length `φ(2L)`.
type CycloVec = Vec<BigInt>;

fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Three-way result of comparing two exact values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    Unequal,
    /// Canonical forms differ in both radical parities and floats cannot
    /// separate them.
    Indeterminate,
}

/// An exact element of `Z[ζ_{2L}][r]` in canonical form.
#[derive(Clone)]
pub struct Scalar {
    amb: Arc<Ambient>,
    /// Sorted by exponent; at most one term per parity, none zero.
    terms: Vec<(i32, CycloVec)>,
}

impl Scalar {
    pub fn zero(amb: &Arc<Ambient>) -> Scalar {
        Scalar {
            amb: Arc::clone(amb),
            terms: Vec::new(),
        }
    }

    pub fn one(amb: &Arc<Ambient>) -> Scalar {
        Scalar::from_int(amb, 1)
    }

    pub fn from_int(amb: &Arc<Ambient>, value: i64) -> Scalar {
        Scalar::from_bigint(amb, BigInt::from(value))
    }

    pub fn from_bigint(amb: &Arc<Ambient>, value: BigInt) -> Scalar {
        let mut v = vec![BigInt::zero(); amb.degree()];
        v[0] = value;
        Scalar::from_terms(amb, vec![(0, v)])
    }

    /// `ζ^k = e^{2πik/2L}`.
    pub fn root(amb: &Arc<Ambient>, k: i64) -> Scalar {
        let order = amb.root_order() as i64;
        let idx = k.rem_euclid(order) as usize;
        let v = amb.powers[idx].iter().map(|&c| BigInt::from(c)).collect();
        Scalar::from_terms(amb, vec![(0, v)])
    }

    /// `r^e` for any integer `e` (negative powers allowed).
    pub fn radical_pow(amb: &Arc<Ambient>, e: i32) -> Scalar {
        let mut v = vec![BigInt::zero(); amb.degree()];
        v[0] = BigInt::one();
        Scalar::from_terms(amb, vec![(e, v)])
    }

    /// Sum of `r^e · Σ_k c_k ζ^k` over the given terms; `k` may exceed the degree.
    pub fn from_raw_terms(amb: &Arc<Ambient>, raw: &[(i32, Vec<(i64, BigInt)>)]) -> Scalar {
        let mut terms = Vec::new();
        for (e, monos) in raw {
            let mut v = vec![BigInt::zero(); amb.degree()];
            for (k, c) in monos {
                let idx = k.rem_euclid(amb.root_order() as i64) as usize;
                for (slot, p) in v.iter_mut().zip(&amb.powers[idx]) {
                    if *p != 0 {
                        *slot += c * p;
                    }
                }
            }
            terms.push((*e, v));
        }
        Scalar::from_terms(amb, terms)
    }

    fn from_terms(amb: &Arc<Ambient>, terms: Vec<(i32, CycloVec)>) -> Scalar {
        let mut s = Scalar {
            amb: Arc::clone(amb),
            terms,
        };
        s.normalize();
        s
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.amb
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Radical exponents present, ascending.
    pub fn radical_exponents(&self) -> Vec<i32> {
        self.terms.iter().map(|(e, _)| *e).collect()
    }

    /// Coefficient vector of the `r^e` term, if present.
    pub fn component(&self, e: i32) -> Option<&[BigInt]> {
        self.terms
            .iter()
            .find(|(k, _)| *k == e)
            .map(|(_, v)| v.as_slice())
    }

    /// Brings the terms into canonical form.
    ///
    /// Per parity class `p` the terms merge into one `(e, v)` with `e ≡ p (mod 2)`;
    /// then `e` is `p` itself, or negative with `v` not divisible by `N`.
    /// For `N = 1` the radical is the unit and every term folds into `e = 0`.
    fn normalize(&mut self) {
        let n = BigInt::from(self.amb.radicand);
        let unit_radical = self.amb.radicand == 1;
        let mut classes: [Option<(i32, CycloVec)>; 2] = [None, None];
        for (e, v) in std::mem::take(&mut self.terms) {
            if is_zero_vec(&v) {
                continue;
            }
            let (e, v) = if unit_radical { (0, v) } else { (e, v) };
            let p = e.rem_euclid(2) as usize;
            classes[p] = Some(match classes[p].take() {
                None => (e, v),
                Some((e0, v0)) => {
                    let (lo, mut vlo, hi, vhi) = if e0 <= e { (e0, v0, e, v) } else { (e, v, e0, v0) };
                    let scale = n.pow(((hi - lo) / 2) as u32);
                    for (a, b) in vlo.iter_mut().zip(vhi) {
                        *a += b * &scale;
                    }
                    (lo, vlo)
                }
            });
        }
        for (p, class) in classes.into_iter().enumerate() {
            let Some((mut e, mut v)) = class else { continue };
            if is_zero_vec(&v) {
                continue;
            }
            let p = p as i32;
            if e > p {
                let scale = n.pow(((e - p) / 2) as u32);
                for c in v.iter_mut() {
                    *c *= &scale;
                }
                e = p;
            }
            while e < p && !unit_radical && v.iter().all(|c| c.is_multiple_of(&n)) {
                for c in v.iter_mut() {
                    *c /= &n;
                }
                e += 2;
            }
            self.terms.push((e, v));
        }
        self.terms.sort_by_key(|(e, _)| *e);
    }

    fn check(&self, other: &Scalar) -> Result<(), ScalarError> {
        if Arc::ptr_eq(&self.amb, &other.amb) || self.amb.same(&other.amb) {
            Ok(())
        } else {
            Err(ScalarError::AmbientMismatch(
                self.amb.half_order,
                self.amb.radicand,
                other.amb.half_order,
                other.amb.radicand,
            ))
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Scalar::from_terms(&self.amb, terms))
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Scalar::zero(&self.amb));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, va) in &self.terms {
            for (eb, vb) in &other.terms {
                terms.push((ea + eb, self.poly_mul(va, vb)));
            }
        }
        Ok(Scalar::from_terms(&self.amb, terms))
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.try_add(&other.neg_ref())
    }

    fn poly_mul(&self, a: &[BigInt], b: &[BigInt]) -> CycloVec {
        let deg = self.amb.degree();
        let mut prod = vec![BigInt::zero(); 2 * deg - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        let phi = &self.amb.phi;
        for top in (deg..prod.len()).rev() {
            let c = std::mem::take(&mut prod[top]);
            if c.is_zero() {
                continue;
            }
            for (j, &pj) in phi.iter().enumerate().take(deg) {
                if pj != 0 {
                    prod[top - deg + j] -= &c * pj;
                }
            }
        }
        prod.truncate(deg);
        if fault_injection() && deg > 1 {
            prod[deg - 1] = BigInt::zero();
        }
        prod
    }

    fn neg_ref(&self) -> Scalar {
        Scalar {
            amb: Arc::clone(&self.amb),
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (*e, v.iter().map(|c| -c).collect()))
                .collect(),
        }
    }

    /// Complex conjugation: `ζ ↦ ζ^{2L−1}`, `r` fixed.
    pub fn conj(&self) -> Scalar {
        let order = self.amb.root_order() as usize;
        let deg = self.amb.degree();
        let terms = self
            .terms
            .iter()
            .map(|(e, v)| {
                let mut out = vec![BigInt::zero(); deg];
                for (k, c) in v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let p = &self.amb.powers[(order - k) % order];
                    for (slot, &pc) in out.iter_mut().zip(p) {
                        if pc != 0 {
                            *slot += c * pc;
                        }
                    }
                }
                (*e, out)
            })
            .collect();
        Scalar::from_terms(&self.amb, terms)
    }

    /// Numerical value.
    pub fn to_float(&self) -> FloatScalar {
        let order = self.amb.root_order() as f64;
        let r = (self.amb.radicand as f64).sqrt();
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, v) in &self.terms {
            let mut part = Complex64::new(0.0, 0.0);
            for (k, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let angle = 2.0 * std::f64::consts::PI * k as f64 / order;
                let cf = c.to_f64().unwrap_or(f64::NAN);
                part += Complex64::from_polar(cf, angle);
            }
            acc += part * r.powi(*e);
        }
        acc
    }

    /// Decides equality, falling back to floats only across radical parities.
    pub fn compare(&self, other: &Scalar) -> Result<Comparison, ScalarError> {
        self.check(other)?;
        if self.terms == other.terms {
            return Ok(Comparison::Equal);
        }
        let diff = self.try_sub(other)?;
        if diff.terms.len() < 2 {
            return Ok(Comparison::Unequal);
        }
        let d = diff.to_float().norm();
        let scale = self.to_float().norm().max(other.to_float().norm()).max(1.0);
        if d > 1e-9 * scale {
            Ok(Comparison::Unequal)
        } else {
            Ok(Comparison::Indeterminate)
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        self.amb.same(&other.amb) && self.terms == other.terms
    }
}

impl Eq for Scalar {}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Scalar[L={},N={}]({})",
            self.amb.half_order, self.amb.radicand, self
        )
    }
}

fn fmt_poly(v: &[BigInt], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut first = true;
    for (k, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if first {
            write!(f, "{c}")?;
        } else if c.is_negative() {
            write!(f, " - {}", -c)?;
        } else {
            write!(f, " + {c}")?;
        }
        if k > 0 {
            write!(f, "·z^{k}")?;
        }
        first = false;
    }
    Ok(())
}

/// Renders `a0 + a1·z^1 + …`, wrapping non-trivial radical parts as
/// `(…)·r^e`; parts are joined with ` + `.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if *e == 0 && i == 0 {
                fmt_poly(v, f)?;
            } else if *e == 0 {
                write!(f, "(")?;
                fmt_poly(v, f)?;
                write!(f, ")")?;
            } else {
                write!(f, "(")?;
                fmt_poly(v, f)?;
                write!(f, ")·r^{e}")?;
            }
        }
        Ok(())
    }
}

/// `e^{2πik/(2L)}` in the ring with trivial radical (`N = 1`).
pub fn cyclo_root(half_order: u32, k: i64) -> Result<Scalar, ScalarError> {
    let amb = Ambient::new(half_order, 1)?;
    Ok(Scalar::root(&amb, k))
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

// Operators panic on mixed rings; use the `try_*` forms where inputs are untrusted.
forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}
