use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pachner::scalar::set_fault_injection;
use pachner::selftest::{run_criterion, CRITERIA};
use pachner::simplicial::{all_sites, apply_move, random_move, Triangulation};
use pachner::solutions::{
    check_compatibility, pentagon_s, symmetry_kernels_with, FiniteGroup, SolutionDescriptor, SolutionSpec, TripleSpec,
};
use pachner::statesum::{build_assignment, invariance_run, partition_with, ContractionOrder};
use pachner::verify::{
    verify_p33, verify_p33_set, verify_pentagon, verify_psym, verify_theorem, verify_theorem_custom, verify_yb_family,
    Backend, KernelPair, Verdict, VerifyReport,
};
use pachner::{Bicharacter, FinAbGroup, Scalar};

const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "pachner", version, about = "Pachner moves, (3,3)-relation checks and state sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a relation for a solution.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Contract a solution over a triangulated 4-manifold.
    Statesum {
        #[arg(long)]
        tri: PathBuf,
        #[arg(long)]
        solution: String,
        #[command(flatten)]
        backend: BackendArg,
        #[arg(long, value_enum, default_value_t = Order::Greedy)]
        order: Order,
    },
    /// Find and apply Pachner moves.
    Moves {
        #[command(subcommand)]
        what: MovesCmd,
    },
    /// List the shipped solutions or describe one.
    Solutions {
        /// Describe this solution instead of listing.
        #[arg(long)]
        solution: Option<String>,
        /// Print every nonzero entry.
        #[arg(long)]
        dump: bool,
    },
    /// Run the acceptance checks.
    Selftest {
        #[arg(long)]
        list: bool,
        /// Break scalar multiplication first; the run should then fail.
        #[arg(long)]
        inject_fault: bool,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        /// Print elapsed times (makes output run-dependent).
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct BackendArg {
    /// exact or float; defaults to exact for groups of order at most 4.
    #[arg(long, value_parser = parse_backend)]
    backend: Option<Backend>,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Order {
    Greedy,
    Sequential,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// The (3,3)-relation.
    P33 {
        #[arg(long)]
        solution: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        backend: BackendArg,
    },
    /// The four identities `D^(i) = conj(D)`.
    Theorem {
        #[arg(long)]
        group: String,
        /// Use g = 1 instead of the Gauss function (should fail).
        #[arg(long)]
        constant_g: bool,
        #[command(flatten)]
        backend: BackendArg,
    },
    /// Both pentagon forms and the Yang-Baxter family.
    Yb {
        #[arg(long)]
        solution: String,
        #[command(flatten)]
        backend: BackendArg,
    },
    /// The pentagon equation for a group algebra.
    Pentagon {
        #[arg(long)]
        group: String,
    },
    /// P-symmetry with L = R = T and M = S.
    Psym {
        #[arg(long)]
        solution: String,
        #[command(flatten)]
        backend: BackendArg,
    },
}

#[derive(Subcommand, Debug)]
enum MovesCmd {
    /// List move sites.
    Sites {
        #[arg(long)]
        tri: PathBuf,
        #[arg(long = "type", value_parser = parse_type)]
        move_type: Option<(usize, usize)>,
    },
    /// Apply the k-th listed site.
    Apply {
        #[arg(long)]
        tri: PathBuf,
        #[arg(long = "type", value_parser = parse_type)]
        move_type: Option<(usize, usize)>,
        #[arg(long, default_value_t = 0)]
        site: usize,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random moves; with a solution, recompute the state sum after each.
    Walk {
        #[arg(long)]
        tri: PathBuf,
        #[arg(long = "type", value_parser = parse_type)]
        move_type: Option<(usize, usize)>,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        solution: Option<String>,
        #[command(flatten)]
        backend: BackendArg,
    },
}

fn parse_type(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected p,q, got {s:?}"))?;
    let p = a.trim().parse().map_err(|_| format!("bad move type {s:?}"))?;
    let q = b.trim().parse().map_err(|_| format!("bad move type {s:?}"))?;
    Ok((p, q))
}

/// An error and the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

fn internal(msg: impl ToString) -> Failure {
    Failure {
        code: 1,
        msg: msg.to_string(),
    }
}

/// Report text and the verdict behind the exit code.
struct Run {
    out: String,
    verdict: Verdict,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let workers = match std::env::var("PACHNER_WORKERS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                pachner::configure_workers(n);
                v
            }
            _ => {
                eprintln!("error: PACHNER_WORKERS must be a positive integer, got {v:?}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        Err(_) => "default".into(),
    };
    match dispatch(&cli.command, &workers) {
        Ok(run) => {
            print!("{}", run.out);
            ExitCode::from(run.verdict.exit_code() as u8)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn echo(out: &mut String, command: &str, pairs: &[(&str, String)], workers: &str) {
    let _ = writeln!(out, "config.command={command}");
    for (k, v) in pairs {
        let _ = writeln!(out, "config.{k}={v}");
    }
    let _ = writeln!(out, "config.workers={workers}");
}

fn read_tri(path: &Path) -> Result<Triangulation, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    Triangulation::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn solution(desc: &str) -> Result<(SolutionDescriptor, Option<SolutionSpec>), Failure> {
    let d: SolutionDescriptor = desc.parse().map_err(|e: pachner::solutions::SolutionError| usage(e.to_string()))?;
    let spec = d.build().map_err(internal)?;
    Ok((d, spec))
}

fn tensor_solution(desc: &str) -> Result<SolutionSpec, Failure> {
    match solution(desc)? {
        (_, Some(s)) => Ok(s),
        (_, None) => Err(usage(format!("{desc} has no tensor form"))),
    }
}

fn backend_for(arg: BackendArg, sol: &SolutionSpec) -> Backend {
    arg.backend.unwrap_or_else(|| Backend::auto(sol.q.domain().size()))
}

fn finish(mut out: String, rep: &VerifyReport) -> Run {
    out.push_str(&rep.to_kv());
    Run {
        out,
        verdict: rep.verdict,
    }
}

fn dispatch(cmd: &Command, workers: &str) -> Result<Run, Failure> {
    let mut out = String::new();
    match cmd {
        Command::Verify { what } => verify(what, workers),
        Command::Statesum {
            tri,
            solution: desc,
            backend,
            order,
        } => {
            let t = read_tri(tri)?;
            let sol = tensor_solution(desc)?;
            let backend = backend_for(*backend, &sol);
            let order_s = format!("{order:?}").to_lowercase();
            echo(
                &mut out,
                "statesum",
                &[
                    ("tri", tri.display().to_string()),
                    ("solution", desc.clone()),
                    ("backend", backend.to_string()),
                    ("order", order_s),
                ],
                workers,
            );
            let a = build_assignment(&t, &sol).map_err(internal)?;
            let order = match order {
                Order::Greedy => ContractionOrder::Greedy,
                Order::Sequential => ContractionOrder::Sequential,
            };
            let v = partition_with(&a, order).map_err(internal)?;
            let _ = writeln!(out, "simplexes={}", t.len());
            let _ = writeln!(out, "pairings={}", a.pairings.len());
            let _ = writeln!(out, "boundary_slots={}", v.faces.len());
            match v.scalar() {
                Some(z) => {
                    let f = z.to_float();
                    match backend {
                        Backend::Exact => {
                            let _ = writeln!(out, "Z = {z}");
                            let _ = writeln!(out, "value={z}");
                        }
                        Backend::Float => {
                            let _ = writeln!(out, "Z = {:.12} {:+.12}i", f.re, f.im);
                        }
                    }
                    let _ = writeln!(out, "value.re={:.12}\nvalue.im={:.12}", f.re, f.im);
                }
                None => {
                    let _ = writeln!(out, "boundary tensor with {} nonzero entries", v.tensor.nnz());
                    let _ = writeln!(out, "nnz={}", v.tensor.nnz());
                }
            }
            Ok(Run {
                out,
                verdict: Verdict::Pass,
            })
        }
        Command::Moves { what } => moves(what, workers),
        Command::Solutions { solution: desc, dump } => {
            echo(
                &mut out,
                "solutions",
                &[("solution", desc.clone().unwrap_or_else(|| "all".into()))],
                workers,
            );
            match desc {
                None => {
                    out.push_str("bichar:<group>        Q = chi(x,z) delta(x-u+y) delta(y-v+z), e.g. bichar:Z3, bichar:Z2xZ2\n");
                    out.push_str("triple:groupalg:<G>   from the group algebra of G (1, Z2..Z6, Z2xZ2, S3, S4, S5)\n");
                    out.push_str("set                   the set-theoretic map on (0,1)\n");
                }
                Some(d) => {
                    let (d, spec) = solution(d)?;
                    let _ = writeln!(out, "descriptor={d}");
                    if let Some(s) = spec {
                        let _ = writeln!(out, "kind={:?}", s.kind);
                        let _ = writeln!(out, "dimension={}", s.q.domain().size());
                        let _ = writeln!(out, "nnz={}", s.q.nnz());
                        if let SolutionDescriptor::GroupAlgebra(g) = &d {
                            let rep = check_compatibility(&TripleSpec::group_algebra(g));
                            for a in &rep.axioms {
                                let _ = writeln!(out, "axiom.{}={}", a.name, if a.pass { "pass" } else { "fail" });
                            }
                        }
                        if *dump {
                            out.push_str(&s.q.dump());
                        }
                    }
                }
            }
            Ok(Run {
                out,
                verdict: Verdict::Pass,
            })
        }
        Command::Selftest {
            list,
            inject_fault,
            only,
            timings,
        } => {
            if *list {
                for c in CRITERIA {
                    let _ = writeln!(out, "{}  {}  (budget {}s)", c.id, c.title, c.budget.as_secs());
                }
                return Ok(Run {
                    out,
                    verdict: Verdict::Pass,
                });
            }
            if let Some(bad) = only.iter().find(|i| !CRITERIA.iter().any(|c| c.id == **i)) {
                return Err(usage(format!("no criterion {bad}")));
            }
            echo(&mut out, "selftest", &[("inject_fault", inject_fault.to_string())], workers);
            set_fault_injection(*inject_fault);
            let mut all = true;
            for c in CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
                let o = run_criterion(c.id);
                all &= o.pass;
                let status = if o.pass { "PASS" } else { "FAIL" };
                let _ = write!(out, "{:>2}  {status}  {}", c.id, c.title);
                if *timings {
                    let _ = write!(out, "  {:.2}s", o.elapsed.as_secs_f64());
                }
                if !o.detail.is_empty() {
                    let _ = write!(out, "  [{}]", o.detail);
                }
                out.push('\n');
            }
            set_fault_injection(false);
            let _ = writeln!(out, "verdict={}", if all { "pass" } else { "fail" });
            Ok(Run {
                out,
                verdict: if all { Verdict::Pass } else { Verdict::Fail },
            })
        }
    }
}

fn group_arg(lit: &str) -> Result<FinAbGroup, Failure> {
    lit.parse().map_err(|e: pachner::GroupError| usage(e.to_string()))
}

fn verify(what: &VerifyCmd, workers: &str) -> Result<Run, Failure> {
    let mut out = String::new();
    match what {
        VerifyCmd::P33 {
            solution: desc,
            samples,
            seed,
            backend,
        } => match solution(desc)? {
            (_, None) => {
                echo(
                    &mut out,
                    "verify p33",
                    &[
                        ("solution", desc.clone()),
                        ("samples", samples.to_string()),
                        ("seed", seed.to_string()),
                        ("backend", "exact".into()),
                    ],
                    workers,
                );
                let rep = verify_p33_set(*samples, *seed).map_err(internal)?;
                Ok(finish(out, &rep))
            }
            (_, Some(sol)) => {
                let b = backend_for(*backend, &sol);
                echo(&mut out, "verify p33", &[("solution", desc.clone()), ("backend", b.to_string())], workers);
                let rep = verify_p33(&sol.q, b).map_err(internal)?;
                Ok(finish(out, &rep))
            }
        },
        VerifyCmd::Theorem {
            group,
            constant_g,
            backend,
        } => {
            let g = group_arg(group)?;
            let b = backend.backend.unwrap_or(Backend::Exact);
            echo(
                &mut out,
                "verify theorem",
                &[
                    ("group", g.to_string()),
                    ("gauss", if *constant_g { "constant" } else { "standard" }.into()),
                    ("backend", b.to_string()),
                ],
                workers,
            );
            let rep = if *constant_g {
                let k = symmetry_kernels_with(&g, |_| Scalar::one(g.ambient()));
                verify_theorem_custom(&Bicharacter::standard(&g), &k, b)
            } else {
                verify_theorem(&g, b)
            }
            .map_err(internal)?;
            Ok(finish(out, &rep))
        }
        VerifyCmd::Yb { solution: desc, backend } => {
            let sol = tensor_solution(desc)?;
            let b = backend_for(*backend, &sol);
            echo(&mut out, "verify yb", &[("solution", desc.clone()), ("backend", b.to_string())], workers);
            let rep = verify_yb_family(&sol.q, b).map_err(internal)?;
            Ok(finish(out, &rep))
        }
        VerifyCmd::Pentagon { group } => {
            let g: FiniteGroup = group.parse().map_err(|e: pachner::solutions::SolutionError| usage(e.to_string()))?;
            echo(&mut out, "verify pentagon", &[("group", g.name().to_string()), ("backend", "exact".into())], workers);
            let s = pentagon_s(&TripleSpec::group_algebra(&g)).map_err(internal)?;
            let rep = verify_pentagon(&s, Backend::Exact).map_err(internal)?;
            Ok(finish(out, &rep))
        }
        VerifyCmd::Psym { solution: desc, backend } => {
            let sol = tensor_solution(desc)?;
            let k = sol
                .kernels
                .as_ref()
                .ok_or_else(|| usage(format!("{desc} carries no symmetry kernels")))?;
            let b = backend_for(*backend, &sol);
            echo(&mut out, "verify psym", &[("solution", desc.clone()), ("backend", b.to_string())], workers);
            let rep = match b {
                Backend::Exact => {
                    let t = KernelPair::new(&k.t, &k.t_inv);
                    let s = KernelPair::new(&k.s, &k.s_inv);
                    verify_psym(&sol.q, t, s, t, b)
                }
                Backend::Float => {
                    let (t, ti, s, si) = (k.t.to_float(), k.t_inv.to_float(), k.s.to_float(), k.s_inv.to_float());
                    let t = KernelPair::new(&t, &ti);
                    let s = KernelPair::new(&s, &si);
                    verify_psym(&sol.q.to_float(), t, s, t, b)
                }
            }
            .map_err(internal)?;
            Ok(finish(out, &rep))
        }
    }
}

fn type_list(t: Option<(usize, usize)>) -> Vec<(usize, usize)> {
    t.into_iter().collect()
}

fn type_name(t: Option<(usize, usize)>) -> String {
    t.map(|(p, q)| format!("{p},{q}")).unwrap_or_else(|| "any".into())
}

fn moves(what: &MovesCmd, workers: &str) -> Result<Run, Failure> {
    let mut out = String::new();
    let pass = |out| Run {
        out,
        verdict: Verdict::Pass,
    };
    match what {
        MovesCmd::Sites { tri, move_type } => {
            let t = read_tri(tri)?;
            echo(
                &mut out,
                "moves sites",
                &[("tri", tri.display().to_string()), ("type", type_name(*move_type))],
                workers,
            );
            let sites = all_sites(&t, &type_list(*move_type)).map_err(internal)?;
            for (k, s) in sites.iter().enumerate() {
                let _ = writeln!(out, "{k}: {s}");
            }
            let _ = writeln!(out, "sites={}", sites.len());
            Ok(pass(out))
        }
        MovesCmd::Apply {
            tri,
            move_type,
            site,
            out: dest,
        } => {
            let t = read_tri(tri)?;
            let sites = all_sites(&t, &type_list(*move_type)).map_err(internal)?;
            let s = sites
                .get(*site)
                .ok_or_else(|| usage(format!("site {site} out of range ({} sites)", sites.len())))?;
            let next = apply_move(&t, s).map_err(internal)?;
            let text = next.write().map_err(internal)?;
            echo(
                &mut out,
                "moves apply",
                &[
                    ("tri", tri.display().to_string()),
                    ("type", type_name(*move_type)),
                    ("site", site.to_string()),
                ],
                workers,
            );
            let _ = writeln!(out, "applied={s}");
            let _ = writeln!(out, "simplexes={}", next.len());
            let _ = writeln!(out, "euler_characteristic={}", next.euler_characteristic());
            match dest {
                Some(p) => {
                    std::fs::write(p, text).map_err(|e| internal(format!("cannot write {}: {e}", p.display())))?;
                    let _ = writeln!(out, "written={}", p.display());
                }
                None => out.push_str(&text),
            }
            Ok(pass(out))
        }
        MovesCmd::Walk {
            tri,
            move_type,
            count,
            seed,
            solution: desc,
            backend,
        } => {
            let t = read_tri(tri)?;
            let mut cfg = vec![
                ("tri", tri.display().to_string()),
                ("type", type_name(*move_type)),
                ("count", count.to_string()),
                ("seed", seed.to_string()),
            ];
            match desc {
                Some(d) => {
                    if move_type.is_some_and(|m| m != (3, 3)) {
                        return Err(usage("state sums are only tracked along (3,3) moves"));
                    }
                    let sol = tensor_solution(d)?;
                    let b = backend_for(*backend, &sol);
                    cfg.push(("solution", d.clone()));
                    cfg.push(("backend", b.to_string()));
                    echo(&mut out, "moves walk", &cfg, workers);
                    let rep = invariance_run(&t, &sol, *count, *seed, b).map_err(internal)?;
                    let _ = writeln!(out, "Z = {}", rep.values[0]);
                    let _ = writeln!(out, "moves_applied={}", rep.moves_applied);
                    let _ = writeln!(out, "no_site_steps={}", rep.no_site_steps.len());
                    let _ = writeln!(out, "simplexes={}", rep.final_triangulation.len());
                    let _ = writeln!(out, "max_relative_error={:.3e}", rep.max_relative_error);
                    let _ = writeln!(out, "all_equal={}", rep.all_equal);
                    if let Some(k) = rep.first_divergence {
                        let _ = writeln!(out, "first_divergence={k}");
                    }
                    Ok(Run {
                        out,
                        verdict: if rep.all_equal { Verdict::Pass } else { Verdict::Fail },
                    })
                }
                None => {
                    echo(&mut out, "moves walk", &cfg, workers);
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    let chi = t.euler_characteristic();
                    let mut cur = t;
                    let mut applied = 0;
                    for _ in 0..*count {
                        match random_move(&cur, &type_list(*move_type), &mut rng).map_err(internal)? {
                            Some((site, next)) => {
                                let _ = writeln!(out, "move {applied}: {site}");
                                cur = next;
                                applied += 1;
                            }
                            None => break,
                        }
                    }
                    let kept = cur.euler_characteristic() == chi;
                    let _ = writeln!(out, "moves_applied={applied}");
                    let _ = writeln!(out, "simplexes={}", cur.len());
                    let _ = writeln!(out, "euler_characteristic={}", cur.euler_characteristic());
                    let _ = writeln!(out, "euler_preserved={kept}");
                    Ok(Run {
                        out,
                        verdict: if kept { Verdict::Pass } else { Verdict::Fail },
                    })
                }
            }
        }
    }
}
