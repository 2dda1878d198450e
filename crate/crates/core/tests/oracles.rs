//! Dense brute-force oracles, written without the library's tensor code.

use num_complex::Complex64;
use pachner::solutions::standard_bicharacter_solution;
use pachner::statesum::partition_value;
use pachner::verify::p33_sides;
use pachner::simplicial::Triangulation;
use pachner::FinAbGroup;

mod common;
use common::{brute_sphere, dense_p33, dense_q, flat_index, SPHERE_Z2_VALUE};

#[test]
fn dense_p33_agrees_with_wire_programs() {
    for n in [2usize, 3] {
        let q = dense_q(n);
        let (dl, dr) = dense_p33(&q, n);
        let scale = dl.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for (a, b) in dl.iter().zip(&dr) {
            assert!((a - b).norm() <= 1e-9 * scale);
        }
        let sol = standard_bicharacter_solution(&FinAbGroup::cyclic(n as u32).unwrap());
        let (l, r) = p33_sides(&sol.q.to_float()).unwrap();
        for (side, dense) in [(&l, &dl), (&r, &dr)] {
            let mut lib = vec![Complex64::new(0.0, 0.0); dense.len()];
            for (k, v) in side.tensor.entries() {
                lib[flat_index(k, n)] = *v;
            }
            for (a, b) in lib.iter().zip(dense.iter()) {
                assert!((a - b).norm() <= 1e-9 * scale, "N={n}");
            }
        }
    }
}

#[test]
fn sphere_z2_matches_brute_force() {
    let oracle = brute_sphere(2);
    let sol = standard_bicharacter_solution(&FinAbGroup::cyclic(2).unwrap());
    let value = partition_value(&Triangulation::sphere_boundary(4), &sol).unwrap();
    println!("exact={value} float={} oracle={oracle}", value.to_float());
    assert!((value.to_float() - oracle).norm() < 1e-9);
    assert_eq!(value.to_string(), SPHERE_Z2_VALUE);
}
