//! Brute-force oracles shared by the integration tests. They use plain
//! arrays of `Complex64` and none of the library's tensor code.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Printed form of the Z/2 state sum on the boundary of the 5-simplex.
pub const SPHERE_Z2_VALUE: &str = "(16)·r^1";

pub fn dense_q(n: usize) -> Vec<Complex64> {
    let r = (n as f64).sqrt();
    let mut q = vec![Complex64::new(0.0, 0.0); n.pow(5)];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let (u, v) = ((x + y) % n, (y + z) % n);
                let chi = Complex64::from_polar(1.0, 2.0 * PI * (x * z) as f64 / n as f64);
                q[(((x * n + u) * n + y) * n + v) * n + z] = chi * r * r;
            }
        }
    }
    q
}

pub fn at(q: &[Complex64], n: usize, i: [usize; 5]) -> Complex64 {
    q[(((i[0] * n + i[1]) * n + i[2]) * n + i[3]) * n + i[4]]
}

/// `aSbTc,SpdUe,TqUrf -> abcdefpqr` and `cSeTf,bUdrT,apUqS -> abcdefpqr`, times `c³`.
pub fn dense_p33(q: &[Complex64], n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let c3 = (n as f64).powf(-1.5);
    let total = n.pow(9);
    let mut lhs = vec![Complex64::new(0.0, 0.0); total];
    let mut rhs = lhs.clone();
    for flat in 0..total {
        let mut k = flat;
        let mut ix = [0usize; 9];
        for slot in (0..9).rev() {
            ix[slot] = k % n;
            k /= n;
        }
        let [a, b, c, d, e, f, p, qq, r] = ix;
        let (mut sl, mut sr) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for s in 0..n {
            for t in 0..n {
                for u in 0..n {
                    sl += at(q, n, [a, s, b, t, c]) * at(q, n, [s, p, d, u, e]) * at(q, n, [t, qq, u, r, f]);
                    sr += at(q, n, [c, s, e, t, f]) * at(q, n, [b, u, d, r, t]) * at(q, n, [a, p, u, qq, s]);
                }
            }
        }
        lhs[flat] = sl * c3;
        rhs[flat] = sr * c3;
    }
    (lhs, rhs)
}

pub fn flat_index(ix: &[u32], n: usize) -> usize {
    ix.iter().fold(0, |acc, &v| acc * n + v as usize)
}

/// Sum over all `N^15` tetrahedron states of `∂Δ⁵`, `∂_k` carrying sign `(−1)^k`.
pub fn brute_sphere(n: usize) -> Complex64 {
    let q = dense_q(n);
    let tets: Vec<Vec<usize>> = (0..6)
        .flat_map(|a| (a + 1..6).map(move |b| (0..6).filter(|v| *v != a && *v != b).collect()))
        .collect();
    assert_eq!(tets.len(), 15);
    // pentachoron k omits vertex k; its facet i omits its i-th vertex
    let slots: Vec<[usize; 5]> = (0..6)
        .map(|k| {
            let verts: Vec<usize> = (0..6).filter(|v| *v != k).collect();
            let mut s = [0; 5];
            for (i, slot) in s.iter_mut().enumerate() {
                let face: Vec<usize> = verts.iter().copied().filter(|v| *v != verts[i]).collect();
                *slot = tets.iter().position(|t| *t == face).unwrap();
            }
            s
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut state = [0usize; 15];
    for flat in 0..n.pow(15) {
        let mut k = flat;
        for v in state.iter_mut() {
            *v = k % n;
            k /= n;
        }
        let mut w = Complex64::new(1.0, 0.0);
        for (p, s) in slots.iter().enumerate() {
            let e = at(&q, n, s.map(|t| state[t]));
            w *= if p % 2 == 0 { e } else { e.conj() };
            if w.norm() == 0.0 {
                break;
            }
        }
        total += w;
    }
    total * (n as f64).powf(-7.5)
}

