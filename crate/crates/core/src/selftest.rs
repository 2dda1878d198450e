//! Desk-scale acceptance checks, runnable from the command line.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::group::FinAbGroup;
use crate::simplicial::{
    all_splittings, compose, face_map, pachner_sides, random_move, CombSimplex, Triangulation,
};
use crate::solutions::{
    check_compatibility, pentagon_s, q_from_triple, standard_bicharacter_solution, symmetry_kernels_with, FiniteGroup,
    TripleSpec,
};
use crate::statesum::invariance_run;
use crate::verify::{
    perturb, verify_p33, verify_p33_coordinates, verify_p33_set, verify_pentagon, verify_theorem, verify_theorem_custom,
    verify_yb_family, Backend, Verdict,
};
use crate::{Bicharacter, Scalar};

/// Exact Z/2 state sum of the boundary of the 5-simplex, from a full
/// 2¹⁵-state summation.
pub const SPHERE_Z2_VALUE: &str = "(16)·r^1";

#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub budget: Duration,
}

pub const CRITERIA: [Criterion; 8] = [
    Criterion { id: 1, title: "(3,3)-relation for bicharacter solutions", budget: Duration::from_secs(10) },
    Criterion { id: 2, title: "D transforms to its conjugate under T and S", budget: Duration::from_secs(30) },
    Criterion { id: 3, title: "pentagon equation from group algebras", budget: Duration::from_secs(5) },
    Criterion { id: 4, title: "triples from group algebras of order <= 6", budget: Duration::from_secs(30) },
    Criterion { id: 5, title: "set-theoretic solution on rationals", budget: Duration::from_secs(5) },
    Criterion { id: 6, title: "Yang-Baxter family", budget: Duration::from_secs(60) },
    Criterion { id: 7, title: "simplicial identities and moves", budget: Duration::from_secs(30) },
    Criterion { id: 8, title: "state-sum invariance under (3,3) moves", budget: Duration::from_secs(60) },
];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub pass: bool,
    pub elapsed: Duration,
    pub detail: String,
}

type Check = Result<(), String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn group(lit: &str) -> FinAbGroup {
    lit.parse().expect("shipped literal")
}

fn pass_verdict(r: Result<crate::verify::VerifyReport, crate::verify::VerifyError>, what: &str) -> Check {
    match r {
        Ok(rep) if rep.passed() => Ok(()),
        Ok(rep) => Err(format!("{what}: {} {:?}", rep.verdict, rep.counterexample)),
        Err(e) => Err(format!("{what}: {e}")),
    }
}

fn c1() -> Check {
    for lit in ["Z2", "Z3", "Z4", "Z2xZ2"] {
        let sol = standard_bicharacter_solution(&group(lit));
        pass_verdict(verify_p33(&sol.q, Backend::Exact), lit)?;
    }
    for lit in ["Z5", "Z6"] {
        let sol = standard_bicharacter_solution(&group(lit));
        pass_verdict(verify_p33(&sol.q, Backend::Float), lit)?;
    }
    for lit in ["Z2", "Z3"] {
        let sol = standard_bicharacter_solution(&group(lit));
        pass_verdict(verify_p33_coordinates(&sol.q, Backend::Exact), &format!("{lit} coordinates"))?;
    }
    Ok(())
}

fn c2() -> Check {
    for lit in ["Z2", "Z3", "Z4", "Z5", "Z2xZ2"] {
        pass_verdict(verify_theorem(&group(lit), Backend::Exact), lit)?;
    }
    for n in 2..=5 {
        let g = FinAbGroup::cyclic(n).map_err(|e| e.to_string())?;
        let k = symmetry_kernels_with(&g, |_| Scalar::one(g.ambient()));
        let rep = verify_theorem_custom(&Bicharacter::standard(&g), &k, Backend::Exact).map_err(|e| e.to_string())?;
        ensure(rep.verdict == Verdict::Fail, || format!("g = 1 control passed for Z{n}"))?;
    }
    Ok(())
}

fn c3() -> Check {
    for lit in ["Z2", "Z3", "Z4", "S3"] {
        let g: FiniteGroup = lit.parse().map_err(|e: crate::solutions::SolutionError| e.to_string())?;
        let s = pentagon_s(&TripleSpec::group_algebra(&g)).map_err(|e| e.to_string())?;
        pass_verdict(verify_pentagon(&s, Backend::Exact), lit)?;
    }
    Ok(())
}

fn c4() -> Check {
    for g in FiniteGroup::all_up_to_order_six() {
        let t = TripleSpec::group_algebra(&g);
        let rep = check_compatibility(&t);
        ensure(rep.all_pass(), || format!("{}: {:?}", g.name(), rep.first_failure()))?;
        let sol = q_from_triple(&t).map_err(|e| e.to_string())?;
        pass_verdict(verify_p33(&sol.q, Backend::Exact), g.name())?;
    }
    Ok(())
}

fn c5() -> Check {
    pass_verdict(verify_p33_set(1000, 1), "set")
}

fn c6() -> Check {
    for lit in ["Z2", "Z3"] {
        let sol = standard_bicharacter_solution(&group(lit));
        pass_verdict(verify_yb_family(&sol.q, Backend::Exact), lit)?;
    }
    let base = standard_bicharacter_solution(&group("Z2"));
    for seed in 0..20 {
        let q = perturb(&base.q, seed);
        let a = verify_yb_family(&q, Backend::Exact).map_err(|e| e.to_string())?;
        let b = verify_p33(&q, Backend::Exact).map_err(|e| e.to_string())?;
        ensure(a.verdict == b.verdict, || format!("seed {seed}: family {} vs p33 {}", a.verdict, b.verdict))?;
    }
    Ok(())
}

fn c7() -> Check {
    // f_i ∘ f_j = f_{j+1} ∘ f_i for i ≤ j
    for n in 1..=6 {
        for j in 0..n {
            for i in 0..=j {
                let l = compose(&face_map(i, n + 1).map_err(|e| e.to_string())?, &face_map(j, n).map_err(|e| e.to_string())?);
                let r = compose(&face_map(j + 1, n + 1).map_err(|e| e.to_string())?, &face_map(i, n).map_err(|e| e.to_string())?);
                ensure(l == r, || format!("face maps i={i} j={j} n={n}"))?;
            }
        }
    }
    // ∂_j ∂_i = ∂_i ∂_{j+1} for i ≤ j
    for v in 3..=7u32 {
        let s = CombSimplex::new((0..v).collect()).map_err(|e| e.to_string())?;
        let top = v as usize - 2;
        for j in 0..top {
            for i in 0..=j {
                let l = s.boundary(i).and_then(|f| f.boundary(j)).map_err(|e| e.to_string())?;
                let r = s.boundary(j + 1).and_then(|f| f.boundary(i)).map_err(|e| e.to_string())?;
                ensure(l == r, || format!("boundaries i={i} j={j} on {v} vertices"))?;
            }
        }
    }
    for n in 1..=6 {
        let labels: Vec<u32> = (0..=n as u32).collect();
        for (i, j) in all_splittings(n) {
            let (l, r) = pachner_sides(n, &i, &j, &labels).map_err(|e| e.to_string())?;
            ensure(l.boundary_faces() == r.boundary_faces(), || format!("sides of {i:?}|{j:?} in [{n}]"))?;
        }
    }
    for d in 2..=4 {
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        let mut t = Triangulation::sphere_boundary(d);
        let chi = t.euler_characteristic();
        for step in 0..100 {
            let (_, next) = random_move(&t, &[], &mut rng)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("no site in d={d} at step {step}"))?;
            t = next;
            ensure(t.euler_characteristic() == chi, || format!("Euler characteristic changed in d={d} at step {step}"))?;
        }
    }
    Ok(())
}

fn c8() -> Check {
    let sphere = Triangulation::sphere_boundary(4);
    for lit in ["Z2", "Z3"] {
        let sol = standard_bicharacter_solution(&group(lit));
        let rep = invariance_run(&sphere, &sol, 20, 7, Backend::Exact).map_err(|e| e.to_string())?;
        ensure(rep.all_equal && rep.moves_applied == 20, || format!("{lit}: values {:?}", rep.values))?;
        if lit == "Z2" {
            let v = &rep.values[0];
            ensure(v.to_string() == SPHERE_Z2_VALUE, || format!("Z2 value {v} differs from {SPHERE_Z2_VALUE}"))?;
        }
    }
    let sol = standard_bicharacter_solution(&group("Z2"));
    let bad = sol.with_q(perturb(&sol.q, 11), "corrupted");
    let rep = invariance_run(&sphere, &bad, 20, 7, Backend::Exact).map_err(|e| e.to_string())?;
    ensure(!rep.all_equal, || "corrupted solution kept its value".into())?;
    Ok(())
}

pub fn run_criterion(id: usize) -> Outcome {
    let start = Instant::now();
    let body = || match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        _ => Err(format!("no criterion {id}")),
    };
    // a broken invariant may surface as a panic deep inside a constructor
    let res = std::panic::catch_unwind(body).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let budget = CRITERIA.iter().find(|c| c.id == id).map(|c| c.budget);
    let (pass, detail) = match res {
        Ok(()) => match budget {
            Some(b) if elapsed > b => (false, format!("over budget ({:.1}s > {}s)", elapsed.as_secs_f64(), b.as_secs())),
            _ => (true, String::new()),
        },
        Err(e) => (false, e),
    };
    Outcome { id, pass, elapsed, detail }
}

pub fn run_all() -> Vec<Outcome> {
    CRITERIA.iter().map(|c| run_criterion(c.id)).collect()
}
