//! Combinatorial simplexes, face maps and Pachner moves in any dimension.
//!
//! A [`Triangulation`] is a list of oriented top simplexes (sorted vertex
//! labels plus a sign) together with explicit facet gluings. Glued facets
//! always carry the same labels, so gluings read from a file are determined by
//! the labels; moves may produce several simplexes over one vertex set, which
//! only the explicit gluings tell apart.
//!
//! Orientation: simplex `s` with sign `ε` induces `ε·(−1)^f` on its facet `f`
//! (the facet dropping its `f`-th smallest vertex). A site's `I`-side simplex
//! for `i` has sign `ε(−1)^i`; the inserted `J`-side simplex for `j` gets
//! `−ε(−1)^j`, so both balls induce the same oriented boundary.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimplicialError {
    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },
    #[error("bad splitting of [{n}]: I={i:?}, J={j:?}")]
    BadSplitting {
        n: usize,
        i: Vec<usize>,
        j: Vec<usize>,
    },
    #[error("vertex labels must be strictly increasing: {0:?}")]
    Unordered(Vec<u32>),
    #[error("simplex {0:?} has the wrong number of vertices for dimension {1}")]
    WrongArity(Vec<u32>, usize),
    #[error("face {0:?} lies in more than two top simplexes")]
    NotPseudoManifold(Vec<u32>),
    #[error("inconsistent gluing at simplex {simplex}, facet {facet}")]
    BadGluing { simplex: usize, facet: usize },
    #[error("stale move site: {0}")]
    StaleSite(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Strictly increasing vertex labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CombSimplex {
    vertices: Vec<u32>,
}

impl CombSimplex {
    pub fn new(vertices: Vec<u32>) -> Result<CombSimplex, SimplicialError> {
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimplicialError::Unordered(vertices));
        }
        Ok(CombSimplex { vertices })
    }

    /// The standard simplex `Δⁿ = (0,…,n)`.
    pub fn standard(n: usize) -> CombSimplex {
        CombSimplex {
            vertices: (0..=n as u32).collect(),
        }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    /// `−1` for the empty simplex.
    pub fn dim(&self) -> isize {
        self.vertices.len() as isize - 1
    }

    /// `∂_i`: drops the `i`-th smallest vertex.
    pub fn boundary(&self, i: usize) -> Result<CombSimplex, SimplicialError> {
        if self.vertices.len() < 2 || i >= self.vertices.len() {
            return Err(SimplicialError::OutOfRange {
                index: i,
                limit: self.vertices.len().saturating_sub(1),
            });
        }
        let mut v = self.vertices.clone();
        v.remove(i);
        Ok(CombSimplex { vertices: v })
    }
}

impl fmt::Display for CombSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vertices.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `f_i : [n−1] → [n]`, the increasing injection missing `i`, as its image list.
pub fn face_map(i: usize, n: usize) -> Result<Vec<usize>, SimplicialError> {
    if n == 0 || i > n {
        return Err(SimplicialError::OutOfRange { index: i, limit: n });
    }
    Ok((0..n).map(|t| if t < i { t } else { t + 1 }).collect())
}

/// `(f ∘ g)(t) = f(g(t))` for maps given as image lists.
pub fn compose(f: &[usize], g: &[usize]) -> Vec<usize> {
    g.iter().map(|&t| f[t]).collect()
}

/// The even/odd splitting `I₀ = {0,2,…}`, `J₀ = {1,3,…}` of `[n]`.
pub fn distinguished_splitting(n: usize) -> (Vec<usize>, Vec<usize>) {
    ((0..=n).step_by(2).collect(), (1..=n).step_by(2).collect())
}

/// Checks `I ⊔ J = [n]` with both parts non-empty; returns sorted copies.
pub fn check_splitting(
    n: usize,
    i: &[usize],
    j: &[usize],
) -> Result<(Vec<usize>, Vec<usize>), SimplicialError> {
    let mut a = i.to_vec();
    let mut b = j.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
    all.sort_unstable();
    if a.is_empty() || b.is_empty() || all != (0..=n).collect::<Vec<_>>() {
        return Err(SimplicialError::BadSplitting {
            n,
            i: i.to_vec(),
            j: j.to_vec(),
        });
    }
    Ok((a, b))
}

/// All splittings of `[n]` into two non-empty parts, `I` listed first.
pub fn all_splittings(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let size = n + 1;
    (1..(1u32 << size) - 1)
        .map(|mask| {
            let (i, j): (Vec<usize>, Vec<usize>) = (0..size).partition(|&k| mask & (1 << k) != 0);
            (i, j)
        })
        .collect()
}

fn sign_pow(k: usize) -> i8 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign of the permutation sorting `v` (entries distinct).
fn sort_parity(v: &[u32]) -> i8 {
    let mut inversions = 0;
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            if v[a] > v[b] {
                inversions += 1;
            }
        }
    }
    sign_pow(inversions)
}

/// An oriented top simplex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopSimplex {
    pub simplex: CombSimplex,
    pub sign: i8,
}

impl TopSimplex {
    pub fn vertices(&self) -> &[u32] {
        self.simplex.vertices()
    }

    /// Position of label `v`, i.e. the facet index dropping it.
    pub fn facet_of(&self, v: u32) -> Option<usize> {
        self.simplex.vertices.binary_search(&v).ok()
    }
}

/// Facet `f` of simplex `s` glued to facet `f′` of simplex `s′`.
pub type Glue = Option<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    dim: usize,
    simplexes: Vec<TopSimplex>,
    glue: Vec<Vec<Glue>>,
}

impl Triangulation {
    /// Glues facets with equal label sets; a set shared by three or more is an error.
    pub fn from_labels(dim: usize, simplexes: Vec<TopSimplex>) -> Result<Triangulation, SimplicialError> {
        for s in &simplexes {
            if s.simplex.vertices.len() != dim + 1 {
                return Err(SimplicialError::WrongArity(s.simplex.vertices.clone(), dim));
            }
        }
        let mut glue = vec![vec![None; dim + 1]; simplexes.len()];
        if dim > 0 {
            let mut seen: HashMap<Vec<u32>, Vec<(usize, usize)>> = HashMap::new();
            for (si, s) in simplexes.iter().enumerate() {
                for f in 0..=dim {
                    let face = s.simplex.boundary(f)?.vertices;
                    seen.entry(face).or_default().push((si, f));
                }
            }
            let mut faces: Vec<_> = seen.into_iter().collect();
            faces.sort();
            for (face, owners) in faces {
                match owners.as_slice() {
                    [_] => {}
                    [(a, fa), (b, fb)] => {
                        glue[*a][*fa] = Some((*b, *fb));
                        glue[*b][*fb] = Some((*a, *fa));
                    }
                    _ => return Err(SimplicialError::NotPseudoManifold(face)),
                }
            }
        }
        Ok(Triangulation {
            dim,
            simplexes,
            glue,
        })
    }

    /// Explicit gluings; checked for symmetry and matching labels.
    pub fn from_gluings(
        dim: usize,
        simplexes: Vec<TopSimplex>,
        glue: Vec<Vec<Glue>>,
    ) -> Result<Triangulation, SimplicialError> {
        for s in &simplexes {
            if s.simplex.vertices.len() != dim + 1 {
                return Err(SimplicialError::WrongArity(s.simplex.vertices.clone(), dim));
            }
        }
        let t = Triangulation {
            dim,
            simplexes,
            glue,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), SimplicialError> {
        if self.glue.len() != self.simplexes.len() {
            return Err(SimplicialError::BadGluing {
                simplex: self.glue.len(),
                facet: 0,
            });
        }
        for (s, row) in self.glue.iter().enumerate() {
            if row.len() != self.dim + 1 {
                return Err(SimplicialError::BadGluing { simplex: s, facet: 0 });
            }
            for (f, g) in row.iter().enumerate() {
                let Some((s2, f2)) = *g else { continue };
                let bad = SimplicialError::BadGluing { simplex: s, facet: f };
                if s2 >= self.simplexes.len() || f2 > self.dim || (s2, f2) == (s, f) {
                    return Err(bad);
                }
                if self.glue[s2][f2] != Some((s, f)) || self.facet_labels(s, f) != self.facet_labels(s2, f2) {
                    return Err(bad);
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn simplexes(&self) -> &[TopSimplex] {
        &self.simplexes
    }

    pub fn len(&self) -> usize {
        self.simplexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplexes.is_empty()
    }

    pub fn gluing(&self, s: usize, f: usize) -> Glue {
        self.glue[s][f]
    }

    pub fn facet_labels(&self, s: usize, f: usize) -> Vec<u32> {
        let mut v = self.simplexes[s].simplex.vertices.clone();
        v.remove(f);
        v
    }

    /// Induced orientation of facet `f` of simplex `s`.
    pub fn facet_sign(&self, s: usize, f: usize) -> i8 {
        self.simplexes[s].sign * sign_pow(f)
    }

    pub fn is_closed(&self) -> bool {
        self.glue.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// Each glued pair of facets receives opposite induced orientations.
    pub fn is_coherent(&self) -> bool {
        self.incoherent_facet().is_none()
    }

    pub fn incoherent_facet(&self) -> Option<(usize, usize)> {
        for s in 0..self.len() {
            for f in 0..=self.dim {
                if let Some((s2, f2)) = self.glue[s][f] {
                    if self.facet_sign(s, f) == self.facet_sign(s2, f2) {
                        return Some((s, f));
                    }
                }
            }
        }
        None
    }

    /// Unglued facets with their induced orientation, sorted.
    pub fn boundary_faces(&self) -> Vec<(Vec<u32>, i8)> {
        let mut out = Vec::new();
        for s in 0..self.len() {
            for f in 0..=self.dim {
                if self.glue[s][f].is_none() {
                    out.push((self.facet_labels(s, f), self.facet_sign(s, f)));
                }
            }
        }
        out.sort();
        out
    }

    pub fn max_label(&self) -> Option<u32> {
        self.simplexes
            .iter()
            .filter_map(|s| s.simplex.vertices.last().copied())
            .max()
    }

    /// Sorted list of the top simplexes, ignoring gluings.
    pub fn simplex_multiset(&self) -> Vec<TopSimplex> {
        let mut v = self.simplexes.clone();
        v.sort();
        v
    }

    /// Face classes under the gluings.
    pub fn face_classes(&self) -> FaceClasses {
        FaceClasses::new(self)
    }

    /// `Σ_k (−1)^k · #(k-face classes)`.
    pub fn euler_characteristic(&self) -> i64 {
        self.face_classes().euler_characteristic()
    }

    /// Whether rewriting via [`Triangulation::from_labels`] reproduces the gluings.
    pub fn is_label_determined(&self) -> bool {
        Triangulation::from_labels(self.dim, self.simplexes.clone())
            .map(|t| t.glue == self.glue)
            .unwrap_or(false)
    }

    /// Relabels every vertex through `f` (must be strictly increasing on the labels used).
    pub fn relabel<F: Fn(u32) -> u32>(&self, f: F) -> Result<Triangulation, SimplicialError> {
        let simplexes = self
            .simplexes
            .iter()
            .map(|s| {
                Ok(TopSimplex {
                    simplex: CombSimplex::new(s.simplex.vertices.iter().map(|&v| f(v)).collect())?,
                    sign: s.sign,
                })
            })
            .collect::<Result<Vec<_>, SimplicialError>>()?;
        Triangulation::from_gluings(self.dim, simplexes, self.glue.clone())
    }

    /// `∂Δ^{d+1}`: the `d+2` facets of the standard simplex with signs `(−1)^i`.
    pub fn sphere_boundary(d: usize) -> Triangulation {
        let big = CombSimplex::standard(d + 1);
        let simplexes = (0..=d + 1)
            .map(|i| TopSimplex {
                simplex: big.boundary(i).expect("in range"),
                sign: sign_pow(i),
            })
            .collect();
        Triangulation::from_labels(d, simplexes).expect("boundary of a simplex")
    }

    /// Reads the line format: `dim d`, then one `pent v0 … v4 ±` line per
    /// simplex (`tri`, `tet`, `edge` or `simp` in other dimensions), `#` comments.
    pub fn parse(text: &str) -> Result<Triangulation, SimplicialError> {
        let mut dim: Option<usize> = None;
        let mut simplexes = Vec::new();
        let mut lines_of = Vec::new();
        let mut glues: Vec<(usize, [usize; 4])> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let err = |msg: String| SimplicialError::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let head = words.next().expect("non-empty line");
            let rest: Vec<&str> = words.collect();
            match (head, dim) {
                ("dim", None) => {
                    let [d] = rest.as_slice() else {
                        return Err(err("expected `dim <d>`".into()));
                    };
                    dim = Some(d.parse().map_err(|_| err(format!("bad dimension {d:?}")))?);
                }
                ("dim", Some(_)) => return Err(err("repeated header".into())),
                (_, None) => return Err(err("missing `dim` header".into())),
                ("glue", Some(_)) => {
                    let nums = rest
                        .iter()
                        .map(|w| w.parse::<usize>().map_err(|_| err(format!("bad index {w:?}"))))
                        .collect::<Result<Vec<usize>, _>>()?;
                    let [a, f, b, g] = nums.as_slice() else {
                        return Err(err("expected `glue <simplex> <facet> <simplex> <facet>`".into()));
                    };
                    glues.push((line_no, [*a, *f, *b, *g]));
                }
                (kw, Some(d)) => {
                    if kw != keyword(d) && kw != "simp" {
                        return Err(err(format!("expected `{}`, found {kw:?}", keyword(d))));
                    }
                    if rest.len() != d + 2 {
                        return Err(err(format!("expected {} labels and a sign", d + 1)));
                    }
                    let verts = rest[..=d]
                        .iter()
                        .map(|w| w.parse::<u32>().map_err(|_| err(format!("bad vertex label {w:?}"))))
                        .collect::<Result<Vec<u32>, _>>()?;
                    let simplex = CombSimplex::new(verts).map_err(|e| err(e.to_string()))?;
                    let sign = match rest[d + 1] {
                        "+" => 1,
                        "-" => -1,
                        s => return Err(err(format!("bad sign {s:?}"))),
                    };
                    simplexes.push(TopSimplex { simplex, sign });
                    lines_of.push(line_no);
                }
            }
        }
        let Some(d) = dim else {
            return Err(SimplicialError::Parse {
                line: 1,
                msg: "missing `dim` header".into(),
            });
        };
        if !glues.is_empty() {
            return Triangulation::parse_glued(d, simplexes, &glues);
        }
        Triangulation::from_labels(d, simplexes.clone()).map_err(|e| match e {
            SimplicialError::NotPseudoManifold(face) => {
                let third = simplexes
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| is_subset(&face, s.vertices()))
                    .nth(2)
                    .map_or(0, |(i, _)| lines_of[i]);
                SimplicialError::Parse {
                    line: third,
                    msg: format!("face {face:?} lies in more than two top simplexes"),
                }
            }
            other => other,
        })
    }

    /// Writes the line format. Gluings are listed as `glue s f s′ f′` lines
    /// only when the labels do not determine them.
    pub fn write(&self) -> Result<String, SimplicialError> {
        let mut out = format!("dim {}\n", self.dim);
        for s in &self.simplexes {
            out.push_str(keyword(self.dim));
            for v in s.vertices() {
                out.push_str(&format!(" {v}"));
            }
            out.push_str(if s.sign > 0 { " +\n" } else { " -\n" });
        }
        if !self.is_label_determined() {
            for (s, row) in self.glue.iter().enumerate() {
                for (f, g) in row.iter().enumerate() {
                    if let Some((s2, f2)) = *g {
                        if (s2, f2) > (s, f) {
                            out.push_str(&format!("glue {s} {f} {s2} {f2}\n"));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn parse_glued(
        d: usize,
        simplexes: Vec<TopSimplex>,
        glues: &[(usize, [usize; 4])],
    ) -> Result<Triangulation, SimplicialError> {
        let n = simplexes.len();
        let mut glue: Vec<Vec<Glue>> = vec![vec![None; d + 1]; n];
        for &(line, [a, f, b, g]) in glues {
            let err = |msg: String| SimplicialError::Parse { line, msg };
            if a >= n || b >= n || f > d || g > d {
                return Err(err("gluing index out of range".into()));
            }
            if (a, f) == (b, g) || glue[a][f].is_some() || glue[b][g].is_some() {
                return Err(err(format!("facet glued twice or to itself: {a} {f} {b} {g}")));
            }
            glue[a][f] = Some((b, g));
            glue[b][g] = Some((a, f));
        }
        Triangulation::from_gluings(d, simplexes, glue).map_err(|e| match e {
            SimplicialError::BadGluing { simplex, facet } => {
                let line = glues
                    .iter()
                    .find(|(_, [a, f, b, g])| (*a, *f) == (simplex, facet) || (*b, *g) == (simplex, facet))
                    .map_or(0, |(l, _)| *l);
                SimplicialError::Parse {
                    line,
                    msg: format!("facet {facet} of simplex {simplex} is glued to a facet with other labels"),
                }
            }
            other => other,
        })
    }
}

fn keyword(d: usize) -> &'static str {
    match d {
        1 => "edge",
        2 => "tri",
        3 => "tet",
        4 => "pent",
        _ => "simp",
    }
}

fn is_subset(a: &[u32], b: &[u32]) -> bool {
    a.iter().all(|x| b.contains(x))
}

impl FromStr for Triangulation {
    type Err = SimplicialError;
    fn from_str(s: &str) -> Result<Triangulation, SimplicialError> {
        Triangulation::parse(s)
    }
}

/// Union-find over `(simplex, vertex subset)` pairs identified by the gluings.
#[derive(Debug, Clone)]
pub struct FaceClasses {
    width: usize,
    parent: Vec<usize>,
}

impl FaceClasses {
    fn new(t: &Triangulation) -> FaceClasses {
        let width = 1usize << (t.dim + 1);
        let mut fc = FaceClasses {
            width,
            parent: (0..t.len() * width).collect(),
        };
        for s in 0..t.len() {
            for f in 0..=t.dim {
                let Some((s2, f2)) = t.glue[s][f] else { continue };
                if (s2, f2) < (s, f) {
                    continue;
                }
                // facet positions of s and s2, aligned by label order
                let p1: Vec<usize> = (0..=t.dim).filter(|&p| p != f).collect();
                let p2: Vec<usize> = (0..=t.dim).filter(|&p| p != f2).collect();
                for sub in 1..(1usize << t.dim) {
                    let (mut m1, mut m2) = (0, 0);
                    for k in 0..t.dim {
                        if sub & (1 << k) != 0 {
                            m1 |= 1 << p1[k];
                            m2 |= 1 << p2[k];
                        }
                    }
                    fc.union(s * width + m1, s2 * width + m2);
                }
            }
        }
        fc
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Class representative of the face of simplex `s` on positions `mask`.
    pub fn class_of(&mut self, s: usize, mask: usize) -> usize {
        self.find(s * self.width + mask)
    }

    /// Number of `(simplex, subset)` occurrences in the class of this face.
    pub fn class_size(&mut self, s: usize, mask: usize) -> usize {
        let root = self.class_of(s, mask);
        let width = self.width;
        (0..self.parent.len())
            .filter(|&x| x % width != 0)
            .filter(|&x| self.find(x) == root)
            .count()
    }

    pub fn euler_characteristic(&mut self) -> i64 {
        let mut seen = std::collections::HashSet::new();
        let mut chi = 0i64;
        for x in 0..self.parent.len() {
            let mask = x % self.width;
            if mask == 0 {
                continue;
            }
            if seen.insert(self.find(x)) {
                chi += if mask.count_ones() % 2 == 1 { 1 } else { -1 };
            }
        }
        chi
    }
}

/// A matched location for a `(|I|,|J|)` move.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MoveSite {
    /// `n = d + 1`.
    pub n: usize,
    pub i_side: Vec<usize>,
    pub j_side: Vec<usize>,
    /// Label of each vertex of `[n]`.
    pub assignment: Vec<u32>,
    /// Simplex index for each `i` in `i_side`, in order.
    pub simplexes: Vec<usize>,
    /// The `I`-side simplex for `i` has sign `ε·(−1)^i` (times the sorting parity).
    pub epsilon: i8,
}

impl MoveSite {
    /// `(p, q) = (|I|, |J|)`.
    pub fn move_type(&self) -> (usize, usize) {
        (self.i_side.len(), self.j_side.len())
    }

    fn face(&self, k: usize) -> (Vec<u32>, i8) {
        let mut labels = self.assignment.clone();
        labels.remove(k);
        let parity = sort_parity(&labels);
        labels.sort_unstable();
        (labels, parity)
    }
}

impl fmt::Display for MoveSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{}) I={:?} labels={:?} simplexes={:?}",
            self.i_side.len(),
            self.j_side.len(),
            self.i_side,
            self.assignment,
            self.simplexes
        )
    }
}

/// The two sides `∂_IΔⁿ` and `∂_JΔⁿ` over the given labels, as `(n−1)`-balls.
///
/// The `I`-side simplex for `i` gets sign `(−1)^i`, the `J`-side one
/// `−(−1)^j`, so both induce the same oriented outer boundary.
pub fn pachner_sides(
    n: usize,
    i: &[usize],
    j: &[usize],
    labels: &[u32],
) -> Result<(Triangulation, Triangulation), SimplicialError> {
    let (i, j) = check_splitting(n, i, j)?;
    let assignment = CombSimplex::new(labels.to_vec())?;
    if assignment.vertices.len() != n + 1 {
        return Err(SimplicialError::WrongArity(labels.to_vec(), n));
    }
    let side = |part: &[usize], eps: i8| {
        let simplexes = part
            .iter()
            .map(|&k| TopSimplex {
                simplex: assignment.boundary(k).expect("in range"),
                sign: eps * sign_pow(k),
            })
            .collect();
        Triangulation::from_labels(n - 1, simplexes)
    };
    Ok((side(&i, 1)?, side(&j, -1)?))
}

/// All sites of `(I,J)` in `t`, sorted by assignment then simplex indices.
///
/// For `|I| ≥ 2` the assignment is order-preserving and the simplexes must be
/// glued exactly as in `∂_IΔⁿ`; for `|I| = 1` every simplex is a site, with the
/// fresh label `max+1` at position `i`. In both cases the face spanned by the
/// `J` vertices must have no occurrences outside the site.
pub fn find_move_sites(
    t: &Triangulation,
    i_side: &[usize],
    j_side: &[usize],
) -> Result<Vec<MoveSite>, SimplicialError> {
    let n = t.dim + 1;
    let (i_side, j_side) = check_splitting(n, i_side, j_side)?;
    let mut sites = Vec::new();
    let i0 = i_side[0];
    if i_side.len() == 1 {
        let fresh = t.max_label().map_or(0, |m| m + 1);
        for (s, top) in t.simplexes.iter().enumerate() {
            let mut assignment = top.vertices().to_vec();
            assignment.insert(i0, fresh);
            let parity = sort_parity(&{
                let mut l = assignment.clone();
                l.remove(i0);
                l
            });
            sites.push(MoveSite {
                n,
                i_side: i_side.clone(),
                j_side: j_side.clone(),
                assignment,
                simplexes: vec![s],
                epsilon: top.sign * sign_pow(i0) * parity,
            });
        }
        return Ok(sites);
    }
    let i1 = i_side[1];
    let mut classes = t.face_classes();
    for (a, top) in t.simplexes.iter().enumerate() {
        // A = V∖{v_{i0}}; across its facet for v_{i1} lies the simplex missing v_{i1}
        let Some((b, fb)) = t.glue[a][i1 - 1] else { continue };
        let w = t.simplexes[b].vertices()[fb];
        let pos = top.vertices().partition_point(|&v| v < w);
        if pos != i0 || top.vertices().contains(&w) {
            continue;
        }
        let mut assignment = top.vertices().to_vec();
        assignment.insert(pos, w);
        let epsilon = top.sign * sign_pow(i0);
        let mut simplexes = vec![a];
        let mut ok = true;
        for &i in &i_side[1..] {
            match t.glue[a][i - 1] {
                Some((s, _)) if !simplexes.contains(&s) => simplexes.push(s),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let site = MoveSite {
            n,
            i_side: i_side.clone(),
            j_side: j_side.clone(),
            assignment,
            simplexes,
            epsilon,
        };
        if check_site(t, &site, &mut classes).is_ok() {
            sites.push(site);
        }
    }
    sites.sort();
    Ok(sites)
}

/// Verifies that `site` matches `t`: labels, signs, internal gluings and the
/// star of the `J`-face.
pub fn check_site(t: &Triangulation, site: &MoveSite, classes: &mut FaceClasses) -> Result<(), SimplicialError> {
    let stale = |msg: String| Err(SimplicialError::StaleSite(msg));
    let n = t.dim + 1;
    if site.n != n || site.assignment.len() != n + 1 || site.simplexes.len() != site.i_side.len() {
        return stale("shape does not fit the triangulation".into());
    }
    check_splitting(n, &site.i_side, &site.j_side)?;
    for (k, &i) in site.i_side.iter().enumerate() {
        let s = site.simplexes[k];
        if s >= t.len() || site.simplexes[..k].contains(&s) {
            return stale(format!("simplex index {s}"));
        }
        let (labels, parity) = site.face(i);
        let top = &t.simplexes[s];
        if top.vertices() != labels.as_slice() {
            return stale(format!("simplex {s} is not {labels:?}"));
        }
        if top.sign != site.epsilon * sign_pow(i) * parity {
            return stale(format!("simplex {s} has the wrong orientation"));
        }
    }
    for (a, &ia) in site.i_side.iter().enumerate() {
        for (b, &ib) in site.i_side.iter().enumerate() {
            if a == b {
                continue;
            }
            let (sa, sb) = (site.simplexes[a], site.simplexes[b]);
            let fa = t.simplexes[sa].facet_of(site.assignment[ib]).expect("label present");
            let fb = t.simplexes[sb].facet_of(site.assignment[ia]).expect("label present");
            if t.glue[sa][fa] != Some((sb, fb)) {
                return stale(format!("simplexes {sa} and {sb} are not glued"));
            }
        }
    }
    let a = site.simplexes[0];
    let top = &t.simplexes[a];
    let mask = site
        .j_side
        .iter()
        .map(|&j| 1usize << top.facet_of(site.assignment[j]).expect("label present"))
        .fold(0, |m, b| m | b);
    if classes.class_size(a, mask) != site.i_side.len() {
        return stale("the J-face is shared with simplexes outside the site".into());
    }
    Ok(())
}

/// Replaces the site's `I`-side by its `J`-side.
pub fn apply_move(t: &Triangulation, site: &MoveSite) -> Result<Triangulation, SimplicialError> {
    apply_move_tracked(t, site).map(|(t, _)| t)
}

/// As [`apply_move`], also returning the site of the inverse move.
pub fn apply_move_tracked(
    t: &Triangulation,
    site: &MoveSite,
) -> Result<(Triangulation, MoveSite), SimplicialError> {
    check_site(t, site, &mut t.face_classes())?;
    let kept: Vec<usize> = (0..t.len()).filter(|s| !site.simplexes.contains(s)).collect();
    let mut new_index: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, &s) in kept.iter().enumerate() {
        new_index.insert(s, k);
    }
    let base = kept.len();
    let mut simplexes: Vec<TopSimplex> = kept.iter().map(|&s| t.simplexes[s].clone()).collect();
    for &j in &site.j_side {
        let (labels, parity) = site.face(j);
        simplexes.push(TopSimplex {
            simplex: CombSimplex { vertices: labels },
            sign: -site.epsilon * sign_pow(j) * parity,
        });
    }
    let j_slot = |j: usize| base + site.j_side.iter().position(|&x| x == j).expect("j in J");
    let facet_for = |simplexes: &[TopSimplex], s: usize, label: u32| {
        simplexes[s].facet_of(label).expect("label present")
    };
    // where an old (simplex, facet) ends up
    let relocate = |s: usize, f: usize, simplexes: &[TopSimplex]| -> (usize, usize) {
        if let Some(&k) = new_index.get(&s) {
            return (k, f);
        }
        let pos = site.simplexes.iter().position(|&x| x == s).expect("site simplex");
        let i = site.i_side[pos];
        let dropped = t.simplexes[s].vertices()[f];
        let j = site
            .assignment
            .iter()
            .position(|&v| v == dropped)
            .expect("facet label in assignment");
        let target = j_slot(j);
        (target, facet_for(simplexes, target, site.assignment[i]))
    };
    let i_labels: Vec<u32> = site.i_side.iter().map(|&i| site.assignment[i]).collect();
    let is_internal = |s: usize, f: usize| {
        site.simplexes.contains(&s) && i_labels.contains(&t.simplexes[s].vertices()[f])
    };
    let mut glue = vec![vec![None; t.dim + 1]; simplexes.len()];
    for s in 0..t.len() {
        for f in 0..=t.dim {
            let Some((s2, f2)) = t.glue[s][f] else { continue };
            if is_internal(s, f) {
                continue;
            }
            let from = relocate(s, f, &simplexes);
            let to = relocate(s2, f2, &simplexes);
            glue[from.0][from.1] = Some(to);
        }
    }
    for &ja in &site.j_side {
        for &jb in &site.j_side {
            if ja != jb {
                let (sa, sb) = (j_slot(ja), j_slot(jb));
                let fa = facet_for(&simplexes, sa, site.assignment[jb]);
                let fb = facet_for(&simplexes, sb, site.assignment[ja]);
                glue[sa][fa] = Some((sb, fb));
            }
        }
    }
    let out = Triangulation::from_gluings(t.dim, simplexes, glue)?;
    let inverse = MoveSite {
        n: site.n,
        i_side: site.j_side.clone(),
        j_side: site.i_side.clone(),
        assignment: site.assignment.clone(),
        simplexes: site.j_side.iter().map(|&j| j_slot(j)).collect(),
        epsilon: -site.epsilon,
    };
    Ok((out, inverse))
}

/// Sites of every splitting whose type `(|I|,|J|)` is listed, or of all
/// splittings when `types` is empty.
pub fn all_sites(t: &Triangulation, types: &[(usize, usize)]) -> Result<Vec<MoveSite>, SimplicialError> {
    let mut out = Vec::new();
    for (i, j) in all_splittings(t.dim + 1) {
        if types.is_empty() || types.contains(&(i.len(), j.len())) {
            out.extend(find_move_sites(t, &i, &j)?);
        }
    }
    Ok(out)
}

/// Picks a move type uniformly among those with sites, then a site of that
/// type uniformly, and applies it. `None` when nothing applies.
pub fn random_move<R: Rng>(
    t: &Triangulation,
    types: &[(usize, usize)],
    rng: &mut R,
) -> Result<Option<(MoveSite, Triangulation)>, SimplicialError> {
    let mut by_type: BTreeMap<(usize, usize), Vec<MoveSite>> = BTreeMap::new();
    for site in all_sites(t, types)? {
        by_type.entry(site.move_type()).or_default().push(site);
    }
    if by_type.is_empty() {
        return Ok(None);
    }
    let kinds: Vec<&Vec<MoveSite>> = by_type.values().collect();
    let sites = kinds[rng.random_range(0..kinds.len())];
    let site = sites[rng.random_range(0..sites.len())].clone();
    let next = apply_move(t, &site)?;
    Ok(Some((site, next)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_maps() {
        assert_eq!(face_map(0, 1).unwrap(), vec![1]);
        assert!(face_map(3, 2).is_err());
        // the corner f2∘f1(Δ⁰) = f1∘f1(Δ⁰)
        let lhs = compose(&face_map(2, 2).unwrap(), &face_map(1, 1).unwrap());
        let rhs = compose(&face_map(1, 2).unwrap(), &face_map(1, 1).unwrap());
        assert_eq!(lhs, vec![0]);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn boundaries() {
        let s = CombSimplex::new(vec![0, 1, 2]).unwrap();
        assert_eq!(s.boundary(1).unwrap().vertices(), &[0, 2]);
        let a = s.boundary(0).unwrap().boundary(0).unwrap();
        let b = s.boundary(1).unwrap().boundary(0).unwrap();
        assert_eq!(a.vertices(), &[2]);
        assert_eq!(a, b);
        assert!(CombSimplex::new(vec![3]).unwrap().boundary(0).is_err());
        assert!(CombSimplex::new(vec![2, 1]).is_err());
    }

    #[test]
    fn splittings() {
        assert_eq!(distinguished_splitting(5), (vec![0, 2, 4], vec![1, 3, 5]));
        assert_eq!(distinguished_splitting(3), (vec![0, 2], vec![1, 3]));
        assert_eq!(distinguished_splitting(1), (vec![0], vec![1]));
        assert!(check_splitting(2, &[0, 1], &[1, 2]).is_err());
        assert!(check_splitting(2, &[0, 1, 2], &[]).is_err());
        assert_eq!(all_splittings(2).len(), 6);
    }

    #[test]
    fn sides_for_three_three() {
        let (i0, j0) = distinguished_splitting(5);
        let (a, b) = pachner_sides(5, &i0, &j0, &[0, 1, 2, 3, 4, 5]).unwrap();
        let verts: Vec<&[u32]> = a.simplexes().iter().map(|s| s.vertices()).collect();
        assert_eq!(verts, vec![&[1, 2, 3, 4, 5][..], &[0, 1, 3, 4, 5], &[0, 1, 2, 3, 5]]);
        assert_eq!(a.boundary_faces(), b.boundary_faces());
        assert!(a.is_coherent() && b.is_coherent());
        let (e, _) = pachner_sides(2, &[0], &[1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(e.simplexes()[0].vertices(), &[1, 2]);
    }

    #[test]
    fn sites_on_spheres() {
        let (i0, j0) = distinguished_splitting(5);
        let (ball, _) = pachner_sides(5, &i0, &j0, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(find_move_sites(&ball, &i0, &j0).unwrap().len(), 1);
        let sphere = Triangulation::sphere_boundary(4);
        assert!(!find_move_sites(&sphere, &i0, &j0).unwrap().is_empty());
        let single = Triangulation::from_labels(4, vec![ball.simplexes()[0].clone()]).unwrap();
        assert!(find_move_sites(&single, &i0, &j0).unwrap().is_empty());
    }

    #[test]
    fn three_three_on_ball() {
        let (i0, j0) = distinguished_splitting(5);
        let labels = [0, 1, 2, 3, 4, 5];
        let (ball, other) = pachner_sides(5, &i0, &j0, &labels).unwrap();
        let site = &find_move_sites(&ball, &i0, &j0).unwrap()[0];
        let (moved, inverse) = apply_move_tracked(&ball, site).unwrap();
        assert_eq!(moved.simplex_multiset(), other.simplex_multiset());
        assert_eq!(moved.boundary_faces(), ball.boundary_faces());
        let back = apply_move(&moved, &inverse).unwrap();
        assert_eq!(back.simplex_multiset(), ball.simplex_multiset());
        assert!(apply_move(&moved, site).is_err());
    }

    #[test]
    fn one_three_in_dimension_two() {
        let tri = Triangulation::from_labels(
            2,
            vec![TopSimplex {
                simplex: CombSimplex::new(vec![0, 1, 2]).unwrap(),
                sign: 1,
            }],
        )
        .unwrap();
        let sites = find_move_sites(&tri, &[3], &[0, 1, 2]).unwrap();
        assert_eq!(sites.len(), 1);
        let out = apply_move(&tri, &sites[0]).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.simplexes().iter().all(|s| s.vertices().contains(&3)));
        assert_eq!(out.boundary_faces(), tri.boundary_faces());
        assert!(out.is_coherent());
    }

    #[test]
    fn two_two_keeps_triangle_count() {
        let t = Triangulation::sphere_boundary(2);
        let sites = find_move_sites(&t, &[0, 2], &[1, 3]).unwrap();
        assert!(!sites.is_empty());
        let out = apply_move(&t, &sites[0]).unwrap();
        assert_eq!(out.len(), t.len());
        assert_eq!(out.euler_characteristic(), 2);
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(Triangulation::sphere_boundary(2).euler_characteristic(), 2);
        assert_eq!(Triangulation::sphere_boundary(3).euler_characteristic(), 0);
        assert_eq!(Triangulation::sphere_boundary(4).euler_characteristic(), 2);
        let (i0, j0) = distinguished_splitting(5);
        let (ball, _) = pachner_sides(5, &i0, &j0, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(ball.euler_characteristic(), 1);
    }

    #[test]
    fn walk_on_sphere_with_repeated_vertex_sets() {
        let (i0, j0) = distinguished_splitting(5);
        let mut t = Triangulation::sphere_boundary(4);
        for step in 0..6 {
            let (i, j) = if step % 2 == 0 { (&i0, &j0) } else { (&j0, &i0) };
            let sites = find_move_sites(&t, i, j).unwrap();
            assert!(!sites.is_empty(), "step {step}");
            t = apply_move(&t, &sites[sites.len() / 2]).unwrap();
            assert!(t.is_closed() && t.is_coherent());
            assert_eq!(t.euler_characteristic(), 2);
        }
    }

    #[test]
    fn random_walks_keep_euler_characteristic() {
        use rand::SeedableRng;
        for d in 2..=4 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(d as u64);
            let mut t = Triangulation::sphere_boundary(d);
            let chi = t.euler_characteristic();
            for _ in 0..100 {
                let (_, next) = random_move(&t, &[], &mut rng).unwrap().expect("a site");
                t = next;
                assert!(t.is_closed() && t.is_coherent());
                assert_eq!(t.euler_characteristic(), chi);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let t = Triangulation::sphere_boundary(4);
        let text = t.write().unwrap();
        assert!(text.starts_with("dim 4\npent 1 2 3 4 5 +\n"));
        let back: Triangulation = text.parse().unwrap();
        assert_eq!(back, t);
        let commented = format!("# sphere\n{}", text.replace("pent 0 1 2 3 4 -", "pent 0 1 2 3 4 -  # last"));
        assert_eq!(Triangulation::parse(&commented).unwrap(), t);
    }

    #[test]
    fn file_errors_carry_lines() {
        let e = Triangulation::parse("dim 2\ntri 0 1 2 +\ntri 0 2 1 +\n").unwrap_err();
        assert!(matches!(e, SimplicialError::Parse { line: 3, .. }), "{e}");
        let e = Triangulation::parse("tri 0 1 2 +\n").unwrap_err();
        assert!(matches!(e, SimplicialError::Parse { line: 1, .. }));
        let e = Triangulation::parse("dim 2\ntri 0 1 2 3 +\n").unwrap_err();
        assert!(matches!(e, SimplicialError::Parse { line: 2, .. }));
        let e = Triangulation::parse("dim 2\ntri 0 1 2 +\ntri 0 1 3 +\ntri 0 1 4 -\n").unwrap_err();
        assert!(matches!(e, SimplicialError::Parse { line: 4, .. }), "{e}");
        let e = Triangulation::parse("dim 2\ntri 0 1 2 x\n").unwrap_err();
        assert!(matches!(e, SimplicialError::Parse { line: 2, .. }));
    }

    #[test]
    fn repeated_vertex_sets_round_trip_with_glue_lines() {
        let (i0, j0) = distinguished_splitting(5);
        let t = Triangulation::sphere_boundary(4);
        let site = find_move_sites(&t, &i0, &j0).unwrap().remove(0);
        let moved = apply_move(&t, &site).unwrap();
        assert!(!moved.is_label_determined());
        let text = moved.write().unwrap();
        assert!(text.contains("\nglue "));
        assert_eq!(Triangulation::parse(&text).unwrap(), moved);
        let broken = text.replacen("glue 0 ", "glue 0 0 0 0\nglue 0 ", 1);
        assert!(matches!(Triangulation::parse(&broken), Err(SimplicialError::Parse { .. })));
        let e = Triangulation::parse("dim 2\ntri 0 1 2 +\ntri 0 1 3 -\nglue 0 0 1 0\n").unwrap_err();
        assert!(matches!(e, SimplicialError::Parse { line: 4, .. }), "{e}");
    }
}
