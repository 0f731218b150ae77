//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use spintractor::clifford::{build_clifford_rep, CliffordRep, Signature, Spinor};
use spintractor::geodesic::{integrate_geodesic, propagate_spinor};
use spintractor::metric::{make_minkowski, make_pp_wave, make_static_product, rescale, Domain, MetricPatch, Profile, ProfileTerm, RescaleFunction, SpatialFactor};
use spintractor::sampling::{random_point, random_spinor, random_vec, rng};
use spintractor::spinor::{
    analyze, covariance_check, dphi_schouten_check, null_kernel_spinor, twistor_residual, ConstantSpinor, PositionClifford,
    SpinorField, Weighted,
};
use spintractor::squares::{dirac_current, CausalType};
use spintractor::tractor::{
    classify_orbit, cross_check_two_form, differential_components, fiber_wedge, flat, lift_to_twistor,
    parallel_twistor_residual, two_form_from_spinors, wedge_defect, FactorType, Tractor,
};
use spintractor::zero_set::{classify_zero_set, SearchConfig, Witness, ZeroSetKind, CONE_ANGLE_TOL};

const CLIFFORD_TOL: f64 = 1e-12;
const CLIFFORD_SECONDS: f64 = 1.0;
const CAUSALITY_SAMPLES: usize = 500;
const ANCHOR_TOL: f64 = 1e-10;
const ANCHOR_POINTS: usize = 200;
const ANCHOR_SECONDS: f64 = 5.0;
const COVARIANCE_TOL: f64 = 1e-8;
const SPLIT_TOL: f64 = 1e-9;
const INTEGRABILITY_TOL: f64 = 1e-8;
const TWO_FORM_TOL: f64 = 1e-8;
const TWO_FORM_POINTS: usize = 100;
const SIMPLICITY_TOL: f64 = 1e-9;
const ORBIT_POINTS: usize = 200;
const ZERO_SET_SECONDS: f64 = 60.0;
const WITNESS_TOL: f64 = 1e-9;
const LIGHT_CONE_TOL: f64 = 1e-10;
const PROPAGATION_TOL: f64 = 1e-8;
const PROPAGATION_STEP: f64 = 1e-3;
const PARALLEL_SPINOR_TOL: f64 = 1e-9;
const PARALLEL_CURRENT_TOL: f64 = 1e-8;

type Solution = (String, MetricPatch, CliffordRep, Box<dyn SpinorField>);
type RescaledSolution = (String, MetricPatch, CliffordRep, Box<dyn SpinorField>, RescaleFunction);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn lorentz(n: usize) -> CliffordRep {
    build_clifford_rep(Signature::lorentzian(n).unwrap()).unwrap()
}

fn spinor_with(rep: &CliffordRep, seed: u64, want: CausalType) -> Spinor {
    let mut r = rng(seed);
    loop {
        let mut s = random_spinor(&mut r, rep.spinor_dim());
        if want == CausalType::Null {
            let mut l = vec![0.0; rep.n()];
            l[0] = 1.0;
            l[1] = 1.0;
            s = null_kernel_spinor(rep, &l, &s).unwrap();
        }
        if dirac_current(rep, &s).unwrap().causal_type == want {
            return s;
        }
    }
}

fn c1_clifford() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (r, s) in [(1, 2), (1, 3), (1, 4), (1, 5), (2, 4), (2, 5), (2, 6)] {
        let rep = build_clifford_rep(Signature::new(r, s).unwrap()).unwrap();
        worst = worst.max(rep.relation_defect());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= CLIFFORD_TOL && secs < CLIFFORD_SECONDS,
        format!("max anticommutator defect {worst:.1e} (tol {CLIFFORD_TOL:.0e}), {secs:.3} s (< {CLIFFORD_SECONDS} s)"),
    )
}

fn c2_causality() -> Outcome {
    let mut violations = 0;
    let mut total = 0;
    for n in 3..=6 {
        let rep = lorentz(n);
        let mut r = rng(200 + n as u64);
        for _ in 0..CAUSALITY_SAMPLES {
            let cur = dirac_current(&rep, &random_spinor(&mut r, rep.spinor_dim())).unwrap();
            total += 1;
            if !matches!(cur.causal_type, CausalType::Timelike | CausalType::Null) || !cur.future_directed {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations in {total} spinors over signatures (1,2)..(1,5)"))
}

fn c3_anchor() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 3..=5 {
        let rep = lorentz(n);
        let p = make_minkowski(n).unwrap();
        let mut r = rng(300 + n as u64);
        let field = PositionClifford::new(&rep, random_spinor(&mut r, rep.spinor_dim())).unwrap();
        for _ in 0..ANCHOR_POINTS {
            let x = random_point(&mut r, &p.domain().bounds);
            worst = worst.max(twistor_residual(&p, &rep, &field, &x).unwrap().residual_norm);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= ANCHOR_TOL && secs < ANCHOR_SECONDS,
        format!("max Penrose residual {worst:.1e} (tol {ANCHOR_TOL:.0e}) at {ANCHOR_POINTS} points for n=3,4,5, {secs:.3} s (< {ANCHOR_SECONDS} s)"),
    )
}

fn c4_covariance() -> Outcome {
    let n = 4;
    let rep = lorentz(n);
    let p = make_minkowski(n).unwrap();
    let mut r = rng(400);
    let field = PositionClifford::new(&rep, random_spinor(&mut r, rep.spinor_dim())).unwrap();
    let pts: Vec<_> = (0..50).map(|_| random_point(&mut r, &p.domain().bounds)).collect();
    let fs = [
        ("zero", RescaleFunction::Zero),
        ("linear", RescaleFunction::Linear { constant: 0.2, coeffs: vec![0.3, -0.2, 0.1, 0.4] }),
        ("quadratic", RescaleFunction::Quadratic { amplitude: 0.3, center: vec![0.1, 0.0, -0.2, 0.3] }),
        ("gaussian bump", RescaleFunction::GaussianBump { amplitude: 0.5, center: vec![0.0; 4], width: 0.8 }),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (label, f) in fs {
        match covariance_check(&p, &rep, &field, &f, &pts, ANCHOR_TOL) {
            Ok(rep) => {
                worst = worst.max(rep.rescaled_residual);
                parts.push(format!("{label} {:.1e}", rep.rescaled_residual));
            }
            Err(e) => {
                worst = f64::INFINITY;
                parts.push(format!("{label} error: {e}"));
            }
        }
    }
    outcome(worst <= COVARIANCE_TOL, format!("rescaled residuals [{}] (tol {COVARIANCE_TOL:.0e})", parts.join(", ")))
}

/// Known twistor spinors of the metric zoo.
fn zoo() -> Vec<Solution> {
    let mut out: Vec<Solution> = Vec::new();
    let mut r = rng(500);
    for n in 3..=6 {
        let rep = lorentz(n);
        let m = make_minkowski(n).unwrap();
        let s = random_spinor(&mut r, rep.spinor_dim());
        out.push((format!("minkowski{n} p.S"), m.clone(), rep.clone(), Box::new(PositionClifford::new(&rep, s.clone()).unwrap())));
        out.push((format!("minkowski{n} const"), m, rep.clone(), Box::new(ConstantSpinor { n, value: s.clone() })));
        let torus = make_static_product(n, SpatialFactor::TorusBox).unwrap();
        out.push((format!("static{n} torus const"), torus, rep.clone(), Box::new(ConstantSpinor { n, value: s.clone() })));
        let coeffs: Vec<f64> = (0..n - 2).map(|a| 0.8 - 0.5 * a as f64).collect();
        let mut l = vec![0.0; n];
        l[0] = 1.0;
        l[1] = 1.0;
        let phi = null_kernel_spinor(&rep, &l, &s).unwrap();
        out.push((format!("pp-wave{n} quadratic"), make_pp_wave(n, Profile::quadratic(&coeffs)).unwrap(), rep.clone(), Box::new(ConstantSpinor { n, value: phi.clone() })));
        let mut powers = vec![0; n - 2];
        powers[0] = 3;
        let cubic = Profile::polynomial(vec![ProfileTerm { u_poly: vec![0.2, 0.5], powers }]).unwrap();
        out.push((format!("pp-wave{n} cubic"), make_pp_wave(n, cubic).unwrap(), rep.clone(), Box::new(ConstantSpinor { n, value: phi })));
    }
    out
}

fn rescaled_zoo() -> Vec<RescaledSolution> {
    let mut out: Vec<RescaledSolution> = Vec::new();
    let mut r = rng(501);
    for n in 3..=5 {
        let rep = lorentz(n);
        let f = RescaleFunction::GaussianBump { amplitude: 0.4, center: vec![0.1; n], width: 0.9 };
        let field = PositionClifford::new(&rep, random_spinor(&mut r, rep.spinor_dim())).unwrap();
        out.push((format!("rescaled minkowski{n} p.S"), rescale(&make_minkowski(n).unwrap(), f.clone()).unwrap(), rep, Box::new(field), f));
    }
    out
}

fn c5_parallel_twistor() -> Outcome {
    let mut split: f64 = 0.0;
    let mut integ: f64 = 0.0;
    let mut count = 0;
    let mut errors = Vec::new();
    let mut check = |label: &str, p: &MetricPatch, rep: &CliffordRep, field: &dyn SpinorField| {
        let mut r = rng(count as u64 + 550);
        let pts: Vec<_> = (0..25).map(|_| random_point(&mut r, &p.domain().bounds)).collect();
        count += 1;
        let tw = match lift_to_twistor(p, rep, field, &pts, ANCHOR_TOL * 100.0) {
            Ok(tw) => tw,
            Err(e) => {
                errors.push(format!("{label}: {e}"));
                return;
            }
        };
        for x in &pts {
            split = split.max(parallel_twistor_residual(p, rep, &tw, x).unwrap().max());
            integ = integ.max(dphi_schouten_check(p, rep, field, x).unwrap());
        }
    };
    for (label, p, rep, field) in zoo() {
        check(&label, &p, &rep, field.as_ref());
    }
    for (label, p, rep, field, f) in rescaled_zoo() {
        let w = Weighted { inner: field.as_ref(), f, weight: 0.5 };
        check(&label, &p, &rep, &w);
    }
    outcome(
        errors.is_empty() && split <= SPLIT_TOL && integ <= INTEGRABILITY_TOL,
        format!(
            "{count} zoo solutions: max split residual {split:.1e} (tol {SPLIT_TOL:.0e}), max |nabla D phi - (n/2)P.phi| {integ:.1e} (tol {INTEGRABILITY_TOL:.0e}){}",
            if errors.is_empty() { String::new() } else { format!(", errors: {}", errors.join("; ")) }
        ),
    )
}

fn c6_two_form() -> Outcome {
    let mut cross: f64 = 0.0;
    let mut simple: f64 = 0.0;
    for n in 3..=5 {
        let rep = lorentz(n);
        let p = make_minkowski(n).unwrap();
        let mut r = rng(600 + n as u64);
        let field = PositionClifford::new(&rep, random_spinor(&mut r, rep.spinor_dim())).unwrap();
        for _ in 0..TWO_FORM_POINTS {
            let x = random_point(&mut r, &p.domain().bounds);
            cross = cross.max(cross_check_two_form(&p, &rep, &field, &x).unwrap().max());
            let (_, at) = analyze(&p, &rep, &field, &x).unwrap();
            simple = simple.max(wedge_defect(&two_form_from_spinors(&rep, &at.phi.v, &at.dirac.v).to_fiber()).unwrap());
        }
    }
    outcome(
        cross <= TWO_FORM_TOL && simple <= SIMPLICITY_TOL,
        format!(
            "max |spinor - differential| {cross:.1e} (tol {TWO_FORM_TOL:.0e}), max wedge defect {simple:.1e} (tol {SIMPLICITY_TOL:.0e}), {TWO_FORM_POINTS} points for n=3,4,5"
        ),
    )
}

fn c7_orbits() -> Outcome {
    let n = 4;
    let rep = lorentz(n);
    let p = make_minkowski(n).unwrap();
    let tally = |s: Spinor, want: FactorType, seed: u64| -> usize {
        let field = PositionClifford::new(&rep, s).unwrap();
        let mut r = rng(seed);
        (0..ORBIT_POINTS)
            .filter(|_| {
                let x = random_point(&mut r, &p.domain().bounds);
                let (_, at) = analyze(&p, &rep, &field, &x).unwrap();
                let f = two_form_from_spinors(&rep, &at.phi.v, &at.dirac.v).to_fiber();
                classify_orbit(&f).map(|o| o.factor_type == want).unwrap_or(false)
            })
            .count()
    };
    let null_ok = tally(spinor_with(&rep, 70, CausalType::Null), FactorType::NullWedgeNull, 71);
    let time_ok = tally(spinor_with(&rep, 72, CausalType::Timelike), FactorType::NullWedgeTimelike, 73);
    let e = |k: usize| {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        flat(&Tractor { a: 0.0, v, b: 0.0 })
    };
    let synthetic = classify_orbit(&fiber_wedge(&e(1), &e(2))).map(|o| o.factor_type);
    let synth_ok = matches!(synthetic, Ok(FactorType::Other));
    outcome(
        null_ok == ORBIT_POINTS && time_ok == ORBIT_POINTS && synth_ok,
        format!(
            "null-square {null_ok}/{ORBIT_POINTS} null_wedge_null, timelike-square {time_ok}/{ORBIT_POINTS} null_wedge_timelike, spacelike wedge -> {synthetic:?}"
        ),
    )
}

fn c8_zero_set() -> Outcome {
    let n = 4;
    let rep = lorentz(n);
    let p = make_minkowski(n).unwrap();
    let cfg = SearchConfig::default();
    let mut notes = Vec::new();
    let mut ok = true;

    let s_null = spinor_with(&rep, 80, CausalType::Null);
    let vs = dirac_current(&rep, &s_null).unwrap().v;
    let start = Instant::now();
    let rep_null = classify_zero_set(&p, &rep, &PositionClifford::new(&rep, s_null).unwrap(), &cfg).unwrap();
    let t_null = start.elapsed().as_secs_f64();
    let line_ok = match rep_null.witnesses.as_slice() {
        [Witness::Line { point, direction, .. }] => {
            let nv = vs.iter().map(|a| a * a).sum::<f64>().sqrt();
            let dot: f64 = direction.iter().zip(&vs).map(|(a, b)| a * b).sum::<f64>() / nv;
            let along = 1.0 - dot.abs();
            let pd: f64 = point.iter().zip(direction).map(|(a, b)| a * b).sum();
            let off = point.iter().zip(direction).map(|(a, b)| (a - pd * b).powi(2)).sum::<f64>().sqrt();
            notes.push(format!("null: line along V_S (1-cos {along:.1e}, offset from 0 {off:.1e})"));
            along <= WITNESS_TOL && off <= WITNESS_TOL
        }
        w => {
            notes.push(format!("null: unexpected witnesses {w:?}"));
            false
        }
    };
    ok &= rep_null.kind == ZeroSetKind::NullGeodesicImages && rep_null.passed && line_ok && t_null < ZERO_SET_SECONDS;

    let s_time = spinor_with(&rep, 81, CausalType::Timelike);
    let start = Instant::now();
    let rep_time = classify_zero_set(&p, &rep, &PositionClifford::new(&rep, s_time).unwrap(), &cfg).unwrap();
    let t_time = start.elapsed().as_secs_f64();
    let origin_ok = matches!(rep_time.witnesses.as_slice(), [Witness::Point { x }] if x.iter().all(|v| v.abs() <= WITNESS_TOL));
    let cone = rep_time
        .singular_samples
        .iter()
        .map(|s| (-s.x[0] * s.x[0] + s.x[1..].iter().map(|a| a * a).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    let angle = rep_time.checks.max_cone_angle.unwrap_or(f64::INFINITY);
    notes.push(format!(
        "timelike: {} samples on the light cone of 0 (max |q(x)| {cone:.1e}), max angle to tangent {angle:.1e} rad",
        rep_time.singular_samples.len()
    ));
    ok &= rep_time.kind == ZeroSetKind::IsolatedPoints
        && rep_time.passed
        && origin_ok
        && !rep_time.singular_samples.is_empty()
        && cone <= LIGHT_CONE_TOL
        && angle <= CONE_ANGLE_TOL
        && t_time < ZERO_SET_SECONDS;
    outcome(
        ok,
        format!(
            "{:?} / {:?}; {}; {t_null:.2} s and {t_time:.2} s (< {ZERO_SET_SECONDS} s)",
            rep_null.kind,
            rep_time.kind,
            notes.join("; ")
        ),
    )
}

fn c9_propagation() -> Outcome {
    let n = 4;
    let rep = lorentz(n);
    let p = make_minkowski(n).unwrap().with_domain(Domain::cube(n, 8.0)).unwrap();
    let mut r = rng(90);
    let field = PositionClifford::new(&rep, random_spinor(&mut r, rep.spinor_dim())).unwrap();
    let mut worst: f64 = 0.0;
    let velocities = [vec![1.0, 0.2, -0.3, 0.1], vec![1.0, 0.6, 0.0, 0.8], vec![0.2, 0.9, -0.3, 0.1]];
    for v0 in &velocities {
        let x0: Vec<f64> = random_vec(&mut r, n).iter().map(|a| 0.5 * a).collect();
        let geo = integrate_geodesic(&p, &x0, v0, (-5.0, 5.0), PROPAGATION_STEP).unwrap();
        let (_, at) = analyze(&p, &rep, &field, &x0).unwrap();
        let prop = propagate_spinor(&p, &rep, &geo, &at.phi.v, &at.dirac.v).unwrap();
        if prop.t.first() != Some(&-5.0) || prop.t.last() != Some(&5.0) {
            worst = f64::INFINITY;
        }
        for (s, u) in prop.geodesic.states.iter().zip(&prop.u) {
            let d = field.value(&s.x) - u;
            worst = worst.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    outcome(
        worst <= PROPAGATION_TOL,
        format!("max |U(t) - gamma(t).S| {worst:.1e} (tol {PROPAGATION_TOL:.0e}) on timelike, null and spacelike geodesics, t in [-5, 5], step {PROPAGATION_STEP:.0e}"),
    )
}

fn c10_brinkmann() -> Outcome {
    let mut spin: f64 = 0.0;
    let mut nabla_v: f64 = 0.0;
    let mut align: f64 = 0.0;
    let mut r = rng(100);
    for n in 3..=6 {
        let rep = lorentz(n);
        let coeffs: Vec<f64> = (0..n - 2).map(|a| 1.0 - 0.7 * a as f64).collect();
        let mut powers = vec![0; n - 2];
        powers[n - 3] = 4;
        let quartic = Profile::polynomial(vec![ProfileTerm { u_poly: vec![0.3, -0.2, 0.4], powers }]).unwrap();
        for profile in [Profile::quadratic(&coeffs), quartic] {
            let p = make_pp_wave(n, profile).unwrap();
            let mut l = vec![0.0; n];
            l[0] = 1.0;
            l[1] = 1.0;
            let phi = null_kernel_spinor(&rep, &l, &random_spinor(&mut r, rep.spinor_dim())).unwrap();
            let field = ConstantSpinor { n, value: phi };
            let k = p.parallel_null_field().unwrap();
            for _ in 0..20 {
                let x = random_point(&mut r, &p.domain().bounds);
                let (conn, at) = analyze(&p, &rep, &field, &x).unwrap();
                spin = spin.max(at.nabla.iter().map(|s| s.v.norm()).fold(0.0, f64::max));
                let dc = differential_components(&p, &rep, &conn, &at).unwrap();
                nabla_v = nabla_v.max(dc.nabla_alpha.amax());
                let cur = dirac_current(&rep, &at.phi.v).unwrap();
                let e = conn.frame_values();
                let v: Vec<f64> = (0..n).map(|mu| (0..n).map(|a| cur.v[a] * e[a][mu]).sum()).collect();
                let scale = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                let kk = k.iter().map(|a| a * a).sum::<f64>().sqrt();
                let dot: f64 = v.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>() / (scale * kk);
                align = align.max(1.0 - dot.abs());
            }
        }
    }
    outcome(
        spin <= PARALLEL_SPINOR_TOL && nabla_v <= PARALLEL_CURRENT_TOL && align <= 1e-12,
        format!(
            "max |nabla phi| {spin:.1e} (tol {PARALLEL_SPINOR_TOL:.0e}), max |nabla V| {nabla_v:.1e} (tol {PARALLEL_CURRENT_TOL:.0e}), V parallel to d_v (1-cos {align:.1e})"
        ),
    )
}

fn strip_timing(s: &str) -> String {
    s.lines().filter(|l| !l.trim_start().starts_with("\"wall_time_seconds\"")).collect::<Vec<_>>().join("\n")
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{
  "family": {"family": "minkowski", "dim": 4},
  "spinor_seed": {"kind": "position_clifford", "components": [[1, 0], [0, 0.5], [0, 0], [0.2, 0]]},
  "rescale": {"kind": "gaussian_bump", "amplitude": 0.3, "center": [0, 0, 0, 0], "width": 0.8},
  "sampling": {"points": 40, "seed": 11},
  "zero_search": {"step": 0.01}
}"#,
    )
    .unwrap();
    let run = |threads: Option<&str>| -> (Option<i32>, String) {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_spintractor"));
        cmd.args(["all", "--config"]).arg(&cfg).args(["--seed", "5"]);
        if let Some(t) = threads {
            cmd.env("SPINTRACTOR_THREADS", t);
        }
        let out = cmd.output().unwrap();
        (out.status.code(), String::from_utf8(out.stdout).unwrap())
    };
    let runs = [run(None), run(None), run(Some("1")), run(Some("3"))];
    let first = strip_timing(&runs[0].1);
    let identical = runs.iter().all(|(_, s)| strip_timing(s) == first);
    let codes: Vec<_> = runs.iter().map(|(c, _)| *c).collect();
    outcome(
        identical && !first.is_empty() && codes.iter().all(|c| *c == Some(0)),
        format!("{} runs (default, default, 1 thread, 3 threads) byte-identical modulo timing: {identical}; exit codes {codes:?}", runs.len()),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("Clifford relations", c1_clifford),
        ("causality of squares", c2_causality),
        ("twistor-equation anchor", c3_anchor),
        ("conformal covariance", c4_covariance),
        ("parallel-twistor equivalence", c5_parallel_twistor),
        ("two-form consistency", c6_two_form),
        ("orbit dichotomy", c7_orbits),
        ("zero-set shape", c8_zero_set),
        ("ODE propagation", c9_propagation),
        ("Brinkmann branch", c10_brinkmann),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.passed {
            failed += 1;
        }
        println!("{} [PRIMARY] {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
