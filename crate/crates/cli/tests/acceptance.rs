//! Acceptance gate: one pass/fail line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use projcalc_core::block::{BlockAlgebra, BlockElement, QuotientMap};
use projcalc_core::calculus::{pc_build, pc_projection_distance, pc_unitary_distance, ScalarFunction};
use projcalc_core::lifting::lift_projection_norm;
use projcalc_core::numeric::fixtures::{haar_unitary, seeded_rng, FixtureRng};
use projcalc_core::numeric::Vector;
use projcalc_core::states::{transitivity_units, MatrixUnitSystem};
use projcalc_core::verify::{run_selected, VerificationReport, VerifyConfig};
use projcalc_core::{OperatorMatrix, Result, Tolerances};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn config(trials: usize) -> VerifyConfig {
    VerifyConfig { seed: 42, trials, dim_max: 12, ..VerifyConfig::default() }
}

/// Runs the named checks and compares each residual with the criterion's own tolerance.
fn checks(ids: &[(&str, f64)], trials: usize) -> (bool, String, VerificationReport) {
    let report = run_selected(|id| ids.iter().any(|(x, _)| *x == id), &config(trials)).expect("valid config");
    let mut ok = report.checks.len() == ids.len();
    let mut worst = Vec::new();
    for (id, limit) in ids {
        match report.check(id) {
            Some(c) => {
                let good = c.pass && c.error.is_none() && c.residual <= *limit;
                ok &= good;
                if !good {
                    worst.push(format!(
                        "{id} residual {:.2e} > {limit:.0e} {}",
                        c.residual,
                        c.error.as_deref().unwrap_or("")
                    ));
                }
            }
            None => {
                ok = false;
                worst.push(format!("{id} missing"));
            }
        }
    }
    let max = report.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    let detail =
        if worst.is_empty() { format!("{} checks, max residual {max:.2e}", ids.len()) } else { worst.join("; ") };
    (ok, detail, report)
}

fn c1() -> Outcome {
    let start = Instant::now();
    let (ok, detail, _) = checks(&[("cor:2.3:sqrt", 1e-7), ("cor:2.3:square", 1e-7), ("cor:2.3:chi", 1e-7)], 300);
    let elapsed = start.elapsed();
    Outcome::new(ok && elapsed < Duration::from_secs(10), format!("{detail}, {:.2}s", elapsed.as_secs_f64()))
}

fn c2() -> Outcome {
    let (ok, detail, _) =
        checks(&[("qinv:laws", 1e-7), ("qinv:involution", 1e-7), ("eq:tinv-norm", 1e-7), ("eq:qinv", 1e-7)], 300);
    Outcome::new(ok, detail)
}

fn c3() -> Outcome {
    let ids = ["eq:q-minus-pq", "eq:idnorm", "eq:idPveeQ", "lem:2.8", "lem:2.9", "eq:pr-qr", "eq:split", "eq:bigeq"];
    let ids: Vec<(&str, f64)> = ids.iter().map(|&x| (x, 1e-7)).collect();
    let (ok, detail, _) = checks(&ids, 300);
    Outcome::new(ok, detail)
}

/// Closed-form family on `[0, 1]` with `f(0) = 0`.
#[derive(Clone, Copy)]
enum Family {
    Chi,
    Cap(f64),
    Const(f64),
    Id,
}

impl Family {
    fn random(rng: &mut FixtureRng) -> Self {
        match rng.random_range(0..4) {
            0 => Family::Chi,
            1 => Family::Cap(rng.random_range(0.05..0.95)),
            2 => Family::Const(rng.random_range(0.0..=1.0)),
            _ => Family::Id,
        }
    }

    fn at(self, s: f64) -> f64 {
        match self {
            Family::Chi => 1.0,
            Family::Cap(c) => s.min(c),
            Family::Const(t) => t,
            Family::Id => s,
        }
    }

    fn function(self) -> ScalarFunction {
        match self {
            Family::Chi => ScalarFunction::chi(),
            Family::Cap(c) => ScalarFunction::cap(c).unwrap(),
            Family::Const(t) => ScalarFunction::constant(t).unwrap(),
            Family::Id => ScalarFunction::identity(),
        }
    }
}

fn real(rows: &[&[f64]]) -> OperatorMatrix {
    OperatorMatrix::from_real_rows(rows).unwrap()
}

/// `Q`, `R` in normal form: per angle `Q = e₁e₁*`, `R = uu*` with `u = (cos θ, sin θ)`; then
/// `R`-only and `Q`-only summands. Hand oracles for `P_f`, `U_f` and `f(QRQ)` follow from
/// `U_f u = √f(s) e₁ + √(1 − f(s)) e₂`, `s = cos² θ`.
struct NormalForm {
    angles: Vec<f64>,
    r_only: usize,
    q_only: usize,
    w: OperatorMatrix,
}

impl NormalForm {
    fn random(rng: &mut FixtureRng) -> Self {
        let a = rng.random_range(1..=4);
        let angles = (0..a).map(|_| rng.random_range(0.15..1.42)).collect();
        let r_only = rng.random_range(0..=2);
        let q_only = rng.random_range(0..=2);
        let w = haar_unitary(2 * a + r_only + q_only, rng);
        NormalForm { angles, r_only, q_only, w }
    }

    fn assemble(&self, angle: impl Fn(f64) -> OperatorMatrix, r_only: f64, q_only: f64) -> OperatorMatrix {
        let mut blocks: Vec<OperatorMatrix> = self.angles.iter().map(|&t| angle(t)).collect();
        blocks.push(OperatorMatrix::from_real_diagonal(&vec![r_only; self.r_only]));
        blocks.push(OperatorMatrix::from_real_diagonal(&vec![q_only; self.q_only]));
        let blocks: Vec<OperatorMatrix> = blocks.into_iter().filter(|b| b.dim() > 0).collect();
        &self.w * OperatorMatrix::direct_sum(&blocks) * self.w.adjoint()
    }

    fn q(&self) -> OperatorMatrix {
        self.assemble(|_| real(&[&[1.0, 0.0], &[0.0, 0.0]]), 0.0, 1.0)
    }

    fn r(&self) -> OperatorMatrix {
        self.assemble(
            |t| {
                let (s, c) = t.sin_cos();
                real(&[&[c * c, c * s], &[c * s, s * s]])
            },
            1.0,
            0.0,
        )
    }

    fn image(f: Family, t: f64) -> [f64; 2] {
        let v = f.at(t.cos().powi(2));
        [v.sqrt(), (1.0 - v).sqrt()]
    }

    fn p(&self, f: Family) -> OperatorMatrix {
        self.assemble(
            |t| {
                let [a, b] = Self::image(f, t);
                real(&[&[a * a, a * b], &[a * b, b * b]])
            },
            1.0,
            0.0,
        )
    }

    fn u(&self, f: Family) -> OperatorMatrix {
        self.assemble(
            |t| {
                let [a, b] = Self::image(f, t);
                let (s, c) = t.sin_cos();
                real(&[&[a * c, a * s], &[b * c, b * s]])
            },
            1.0,
            0.0,
        )
    }

    fn f_qrq(&self, f: Family) -> OperatorMatrix {
        self.assemble(|t| real(&[&[f.at(t.cos().powi(2)), 0.0], &[0.0, 0.0]]), 0.0, 0.0)
    }

    /// `‖P_f − P_g‖ = max √(1 − ⟨w_f, w_g⟩²)` and `‖U_f − U_g‖ = max |w_f − w_g|` over the angles.
    fn distances(&self, f: Family, g: Family) -> (f64, f64) {
        self.angles.iter().fold((0.0, 0.0), |(dp, du), &t| {
            let (a, b) = (Self::image(f, t), Self::image(g, t));
            let dot = a[0] * b[0] + a[1] * b[1];
            let diff = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            (f64::max(dp, (1.0 - dot * dot).max(0.0).sqrt()), f64::max(du, diff))
        })
    }
}

fn calculus_trial(rng: &mut FixtureRng, tol: &Tolerances) -> Result<f64> {
    let x = NormalForm::random(rng);
    let (q, r) = (x.q(), x.r());
    let (f, g) = (Family::random(rng), Family::random(rng));
    let pf = pc_build(&q, &r, &f.function(), tol)?;
    let (dp, du) = x.distances(f, g);
    let res = [
        (&q * &pf.p * &q).distance(&x.f_qrq(f)),
        pf.p.distance(&x.p(f)),
        pf.u.distance(&x.u(f)),
        (pc_projection_distance(&q, &r, &f.function(), &g.function(), tol)? - dp).abs(),
        (pc_unitary_distance(&q, &r, &f.function(), &g.function(), tol)? - du).abs(),
    ];
    Ok(res.into_iter().fold(0.0, f64::max))
}

fn c4() -> Outcome {
    let ids = ["eq:QPQ", "eq:afg", "eq:cfg", "eq:bfg", "sec:3:initial"];
    let ids: Vec<(&str, f64)> = ids.iter().map(|&x| (x, 1e-7)).collect();
    let (ok, detail, _) = checks(&ids, 500);
    let tol = Tolerances::default();
    let mut rng = seeded_rng(4);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        worst = worst.max(calculus_trial(&mut rng, &tol).unwrap_or(f64::INFINITY));
    }
    Outcome::new(ok && worst <= 1e-7, format!("{detail}; hand normal-form oracle (χ, cap, const, id) max {worst:.2e}"))
}

fn c5() -> Outcome {
    let mut ids = Vec::new();
    for kind in ["thm:4.1", "thm:4.2:orthogonal", "thm:4.2"] {
        for part in ["endpoints", "projection", "mesh", "refine"] {
            ids.push((format!("{kind}:{part}"), 1e-7));
        }
    }
    let ids: Vec<(&str, f64)> = ids.iter().map(|(s, t)| (s.as_str(), *t)).collect();
    let (ok, detail, _) = checks(&ids, 50);
    Outcome::new(ok, detail)
}

fn line(theta: f64) -> OperatorMatrix {
    let (s, c) = theta.sin_cos();
    real(&[&[c * c, c * s], &[c * s, s * s]])
}

/// `M₂ ⊕ M₂` keeping block 2, `R` at π/6 and π/4 from `Q = e₁e₁*`: the cap at ½ pulls ¾ down to ½.
fn analytic_norm_lift() -> Result<f64> {
    let tol = Tolerances::default();
    let alg = BlockAlgebra::new(vec![2, 2])?;
    let pi = QuotientMap::new(&alg, vec![1])?;
    let e1 = real(&[&[1.0, 0.0], &[0.0, 0.0]]);
    let r = BlockElement::new(&alg, vec![line(FRAC_PI_6), line(FRAC_PI_4)])?;
    let q = BlockElement::new(&alg, vec![e1.clone(), e1])?;
    let p = lift_projection_norm(&pi, &r, &q, &tol)?;
    Ok(p.mul(&q)?.norm().powi(2))
}

fn c6() -> Outcome {
    let (ok, detail, _) = checks(&[("thm:5.3", 1e-7)], 200);
    match analytic_norm_lift() {
        Ok(v) => Outcome::new(ok && (v - 0.5).abs() <= 1e-7, format!("{detail}; analytic ‖PQ‖² = {v:.12}")),
        Err(e) => Outcome::new(false, format!("{detail}; analytic fixture failed: {e}")),
    }
}

fn c7() -> Outcome {
    let (ok, detail, report) = checks(&[("thm:5.4", 1e-4), ("thm:5.4:remark", 1e-4), ("thm:5.4:image", 1e-7)], 200);
    let stalled = report.checks.iter().filter(|c| c.error.as_deref().is_some_and(|e| e.contains("stalled"))).count();
    Outcome::new(ok && stalled == 0, format!("{detail}; stalled checks {stalled}"))
}

fn c8() -> Outcome {
    let (ok, detail, _) = checks(&[("thm:5.6", 1e-7), ("cor:5.7", 1e-4), ("cor:5.7:image", 1e-7)], 100);
    Outcome::new(ok, detail)
}

fn c9() -> Outcome {
    let (ok, detail, _) =
        checks(&[("thm:6.4", 1e-6), ("thm:6.4:state", 1e-7), ("thm:6.4:rank", 0.0), ("thm:AAP:7eps", 1e-7)], 200);
    Outcome::new(ok, detail)
}

fn e(n: usize, i: usize) -> Vector {
    Vector::from_fn(n, |r, _| Complex64::from(if r == i { 1.0 } else { 0.0 }))
}

fn hand_system() -> Result<f64> {
    let s: MatrixUnitSystem = transitivity_units(3, &[e(3, 0), e(3, 1)], false, &Tolerances::default())?;
    let u1 = OperatorMatrix::outer(&e(3, 0), &e(3, 1));
    let u2 = OperatorMatrix::outer(&e(3, 1), &e(3, 1));
    Ok(s.units[0].distance(&u1).max(s.units[1].distance(&u2)))
}

fn c10() -> Outcome {
    let (ok, detail, _) = checks(
        &[
            ("cor:6.7:laws", 1e-7),
            ("cor:6.7:basis", 1e-7),
            ("cor:6.7:initial", 1e-7),
            ("cor:6.7:excision", 1e-7),
            ("cor:6.7:faithful", 1e-7),
            ("cor:6.7:hand", 1e-9),
            ("cor:6.8", 1e-7),
        ],
        500,
    );
    match hand_system() {
        Ok(d) => Outcome::new(ok && d <= 1e-9, format!("{detail}; hand U₁ = e₁e₂*, U₂ = e₂e₂* off by {d:.2e}")),
        Err(err) => Outcome::new(false, format!("{detail}; hand system failed: {err}")),
    }
}

fn full_run() -> std::result::Result<(i32, serde_json::Value, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_projcalc"))
        .args(["verify", "--suite", "all", "--seed", "42", "--trials", "500", "--dim-max", "12"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut json: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    json.as_object_mut().ok_or("report is not an object")?.remove("wall_time");
    Ok((out.status.code().unwrap_or(-1), json, elapsed))
}

fn c11() -> Outcome {
    match (full_run(), full_run()) {
        (Ok((c1, a, t1)), Ok((c2, b, t2))) => {
            let limit = Duration::from_secs(300);
            let stable = serde_json::to_string(&a).unwrap() == serde_json::to_string(&b).unwrap();
            let ok = c1 == 0 && c2 == 0 && stable && t1 < limit && t2 < limit;
            Outcome::new(
                ok,
                format!(
                    "exit {c1}/{c2}, {} checks, byte-stable {stable}, {:.1}s/{:.1}s",
                    a["checks"].as_array().map_or(0, |c| c.len()),
                    t1.as_secs_f64(),
                    t2.as_secs_f64()
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => Outcome::new(false, e),
    }
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("intertwining", c1),
        ("quasi-inverse laws", c2),
        ("two-projection identities", c3),
        ("projection calculus", c4),
        ("homotopy", c5),
        ("norm lifting", c6),
        ("spectrum lifting", c7),
        ("partial isometry lifting", c8),
        ("excision", c9),
        ("transitivity", c10),
        ("full suite determinism", c11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!("criterion {:>2} {:<26} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
