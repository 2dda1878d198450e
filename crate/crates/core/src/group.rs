//! Finite abelian groups `Z/N₁ × … × Z/N_k` with their self-duality data.
//!
//! Each factor is paired with itself through `x ↦ (y ↦ e^{2πi(N+1)xy/N})`.
//! For odd `N` this is the usual `ω^{xy}`; the `(N+1)` twist makes the Gauss
//! function `g(x) = e^{−πi(N+1)x²/N}` well defined modulo `N` for even `N` as
//! well. With `ζ = e^{πi/L}`, `L = lcm(N_i)`, both are powers of `ζ`, so all
//! values are exact [`Scalar`]s over the group's [`Ambient`] ring (`r² = |A|`).
//!
//! The Haar measure is normalised so that `∫ χ(x,y) dy = δ(x)`, which forces
//! the weight `c = r^{-1}` per summed element and `δ(0) = r`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

use crate::scalar::{Ambient, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("cyclic factor orders must be at least 2, got {0}")]
    FactorTooSmall(u32),
    #[error("a group needs at least one cyclic factor")]
    Empty,
    #[error("group too large ({0} elements)")]
    TooLarge(u64),
    #[error("element {0:?} does not belong to {1}")]
    ElementMismatch(Vec<u32>, String),
    #[error("bad group literal {0:?}: expected forms like Z2, Z3, Z2xZ2, Z4xZ3")]
    BadLiteral(String),
    #[error("not a bicharacter: χ({x:?},{y:?}) fails multiplicativity in the {arg} argument")]
    NotBicharacter {
        x: Vec<u32>,
        y: Vec<u32>,
        arg: &'static str,
    },
}

/// A group element given by its residues per cyclic factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub coords: Vec<u32>,
}

impl GroupElement {
    pub fn new(coords: impl Into<Vec<u32>>) -> GroupElement {
        GroupElement {
            coords: coords.into(),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            write!(f, "{}", self.coords[0])
        } else {
            let parts: Vec<String> = self.coords.iter().map(u32::to_string).collect();
            write!(f, "({})", parts.join(" "))
        }
    }
}

#[derive(Debug)]
struct GroupInner {
    orders: Vec<u32>,
    size: u32,
    half_order: u32,
    amb: Arc<Ambient>,
    add: Vec<u32>,
    neg: Vec<u32>,
    /// `χ(x,y) = ζ^{chi_exp[x·n+y]}`
    chi_exp: Vec<u32>,
    /// `g(x) = ζ^{g_exp[x]}`
    g_exp: Vec<u32>,
}

/// `Z/N₁ × … × Z/N_k`; elements are ranked lexicographically (last factor fastest).
#[derive(Clone)]
pub struct FinAbGroup(Arc<GroupInner>);

impl FinAbGroup {
    pub fn new(orders: &[u32]) -> Result<FinAbGroup, GroupError> {
        if orders.is_empty() {
            return Err(GroupError::Empty);
        }
        if let Some(&bad) = orders.iter().find(|&&n| n < 2) {
            return Err(GroupError::FactorTooSmall(bad));
        }
        let size: u64 = orders.iter().map(|&n| n as u64).product();
        if size > 4096 {
            return Err(GroupError::TooLarge(size));
        }
        let size = size as u32;
        let half_order = orders.iter().fold(1u32, |acc, &n| acc.lcm(&n));
        let amb = Ambient::new(half_order, size as u64).expect("positive parameters");
        let mut inner = GroupInner {
            orders: orders.to_vec(),
            size,
            half_order,
            amb,
            add: Vec::new(),
            neg: Vec::new(),
            chi_exp: Vec::new(),
            g_exp: Vec::new(),
        };
        let n = size as usize;
        let two_l = 2 * half_order as u64;
        let coords: Vec<Vec<u32>> = (0..size).map(|r| inner.coords_of(r)).collect();
        inner.add = vec![0; n * n];
        inner.chi_exp = vec![0; n * n];
        for x in 0..n {
            for y in 0..n {
                let sum: Vec<u32> = coords[x]
                    .iter()
                    .zip(&coords[y])
                    .zip(orders)
                    .map(|((a, b), m)| (a + b) % m)
                    .collect();
                inner.add[x * n + y] = inner.rank_of(&sum);
                let mut e = 0u64;
                for ((&a, &b), &m) in coords[x].iter().zip(&coords[y]).zip(orders) {
                    let (a, b, m) = (a as u64, b as u64, m as u64);
                    e += 2 * (m + 1) * a * b * (half_order as u64 / m);
                }
                inner.chi_exp[x * n + y] = (e % two_l) as u32;
            }
        }
        inner.neg = (0..n)
            .map(|x| {
                let c: Vec<u32> = coords[x]
                    .iter()
                    .zip(orders)
                    .map(|(a, m)| (m - a) % m)
                    .collect();
                inner.rank_of(&c)
            })
            .collect();
        inner.g_exp = coords
            .iter()
            .map(|c| {
                let mut e = 0u64;
                for (&a, &m) in c.iter().zip(orders) {
                    let (a, m) = (a as u64, m as u64);
                    e += (m + 1) * a * a * (half_order as u64 / m);
                }
                ((two_l - e % two_l) % two_l) as u32
            })
            .collect();
        Ok(FinAbGroup(Arc::new(inner)))
    }

    pub fn cyclic(n: u32) -> Result<FinAbGroup, GroupError> {
        FinAbGroup::new(&[n])
    }

    pub fn orders(&self) -> &[u32] {
        &self.0.orders
    }

    /// `|A|`.
    pub fn size(&self) -> u32 {
        self.0.size
    }

    /// `L = lcm(N_i)`.
    pub fn half_order(&self) -> u32 {
        self.0.half_order
    }

    /// Ring of values: roots of order `2L`, radical `r² = |A|`.
    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.0.amb
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.size()).map(|r| self.element(r))
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement::new(vec![0; self.0.orders.len()])
    }

    /// Element with lexicographic rank `rank`.
    pub fn element(&self, rank: u32) -> GroupElement {
        assert!(rank < self.size(), "rank {rank} out of range");
        GroupElement::new(self.0.coords_of(rank))
    }

    /// Lexicographic rank of a member element.
    pub fn rank(&self, x: &GroupElement) -> Result<u32, GroupError> {
        self.check(x)?;
        Ok(self.0.rank_of(&x.coords))
    }

    fn check(&self, x: &GroupElement) -> Result<(), GroupError> {
        let ok = x.coords.len() == self.0.orders.len()
            && x.coords.iter().zip(&self.0.orders).all(|(a, m)| a < m);
        if ok {
            Ok(())
        } else {
            Err(GroupError::ElementMismatch(x.coords.clone(), self.to_string()))
        }
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, GroupError> {
        let (a, b) = (self.rank(x)?, self.rank(y)?);
        Ok(self.element(self.add_rank(a, b)))
    }

    pub fn neg(&self, x: &GroupElement) -> Result<GroupElement, GroupError> {
        Ok(self.element(self.neg_rank(self.rank(x)?)))
    }

    pub fn add_rank(&self, a: u32, b: u32) -> u32 {
        self.0.add[(a * self.size() + b) as usize]
    }

    pub fn neg_rank(&self, a: u32) -> u32 {
        self.0.neg[a as usize]
    }

    pub fn sub_rank(&self, a: u32, b: u32) -> u32 {
        self.add_rank(a, self.neg_rank(b))
    }

    /// `χ(x,y) = ∏ e^{2πi(N_i+1)x_i y_i/N_i}`.
    pub fn chi(&self, x: &GroupElement, y: &GroupElement) -> Result<Scalar, GroupError> {
        Ok(self.chi_rank(self.rank(x)?, self.rank(y)?))
    }

    pub fn chi_rank(&self, x: u32, y: u32) -> Scalar {
        let e = self.0.chi_exp[(x * self.size() + y) as usize];
        Scalar::root(self.ambient(), e as i64)
    }

    /// `g(x) = ∏ e^{−πi(N_i+1)x_i²/N_i}`, trivialising `χ`: `g(x)g(y) = χ(x,y)g(x+y)`.
    pub fn gauss_g(&self, x: &GroupElement) -> Result<Scalar, GroupError> {
        Ok(self.gauss_rank(self.rank(x)?))
    }

    pub fn gauss_rank(&self, x: u32) -> Scalar {
        Scalar::root(self.ambient(), self.0.g_exp[x as usize] as i64)
    }

    /// `δ(x)`: `r` at zero, else zero.
    pub fn delta(&self, x: &GroupElement) -> Result<Scalar, GroupError> {
        Ok(self.delta_rank(self.rank(x)?))
    }

    pub fn delta_rank(&self, x: u32) -> Scalar {
        if x == 0 {
            self.delta_at_zero()
        } else {
            Scalar::zero(self.ambient())
        }
    }

    /// `δ(0) = r = |A|^{1/2}`.
    pub fn delta_at_zero(&self) -> Scalar {
        Scalar::radical_pow(self.ambient(), 1)
    }

    /// Haar weight `c = |A|^{−1/2}` per summed element.
    pub fn measure_weight(&self) -> Scalar {
        Scalar::radical_pow(self.ambient(), -1)
    }

    /// `c · Σ_x f(x)`.
    pub fn integrate<F>(&self, mut f: F) -> Scalar
    where
        F: FnMut(&GroupElement) -> Scalar,
    {
        let sum = self
            .elements()
            .fold(Scalar::zero(self.ambient()), |acc, x| acc + f(&x));
        sum * self.measure_weight()
    }
}

impl GroupInner {
    fn coords_of(&self, mut rank: u32) -> Vec<u32> {
        let mut c = vec![0; self.orders.len()];
        for (slot, &m) in c.iter_mut().zip(&self.orders).rev() {
            *slot = rank % m;
            rank /= m;
        }
        c
    }

    fn rank_of(&self, coords: &[u32]) -> u32 {
        coords
            .iter()
            .zip(&self.orders)
            .fold(0, |acc, (&a, &m)| acc * m + a)
    }
}

impl PartialEq for FinAbGroup {
    fn eq(&self, other: &FinAbGroup) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.orders == other.0.orders
    }
}

impl Eq for FinAbGroup {}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.orders.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl fmt::Debug for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinAbGroup({self})")
    }
}

impl FromStr for FinAbGroup {
    type Err = GroupError;

    /// `Z2`, `Z2xZ2`, `Z4xZ3`, …
    fn from_str(s: &str) -> Result<FinAbGroup, GroupError> {
        let bad = || GroupError::BadLiteral(s.to_string());
        let orders = s
            .split('x')
            .map(|part| {
                part.strip_prefix('Z')
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(bad)
            })
            .collect::<Result<Vec<u32>, GroupError>>()?;
        FinAbGroup::new(&orders)
    }
}

/// A function `A × A → Scalar`, validated to be multiplicative in each argument.
#[derive(Clone, Debug)]
pub struct Bicharacter {
    group: FinAbGroup,
    table: Vec<Scalar>,
}

impl Bicharacter {
    /// The self-duality pairing `χ(x,y) = ⟨f(x);y⟩` of the group.
    pub fn standard(group: &FinAbGroup) -> Bicharacter {
        let n = group.size();
        let table = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .map(|(x, y)| group.chi_rank(x, y))
            .collect();
        Bicharacter {
            group: group.clone(),
            table,
        }
    }

    /// Tabulates `f` and checks multiplicativity exhaustively over `A × A × A`.
    pub fn from_fn<F>(group: &FinAbGroup, mut f: F) -> Result<Bicharacter, GroupError>
    where
        F: FnMut(u32, u32) -> Scalar,
    {
        let n = group.size();
        let table = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        let b = Bicharacter {
            group: group.clone(),
            table,
        };
        b.validate()?;
        Ok(b)
    }

    /// Checks `χ(x+x′,y) = χ(x,y)χ(x′,y)` and `χ(x,y+y′) = χ(x,y)χ(x,y′)`.
    pub fn validate(&self) -> Result<(), GroupError> {
        let g = &self.group;
        let n = g.size();
        for x in 0..n {
            for x2 in 0..n {
                for y in 0..n {
                    let s = g.add_rank(x, x2);
                    if *self.at(s, y) != self.at(x, y) * self.at(x2, y) {
                        return Err(GroupError::NotBicharacter {
                            x: g.element(x).coords,
                            y: g.element(y).coords,
                            arg: "first",
                        });
                    }
                    if *self.at(y, s) != self.at(y, x) * self.at(y, x2) {
                        return Err(GroupError::NotBicharacter {
                            x: g.element(y).coords,
                            y: g.element(x).coords,
                            arg: "second",
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn at(&self, x: u32, y: u32) -> &Scalar {
        &self.table[(x * self.group.size() + y) as usize]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.group.size();
        (0..n).all(|x| (0..n).all(|y| self.at(x, y) == self.at(y, x)))
    }
}
