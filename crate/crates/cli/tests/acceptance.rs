//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gn3_core::autodiff::fd_crosscheck;
use gn3_core::constitutive::{Flux, ScalarField, StateSampler};
use gn3_core::entropy::{condition_lists, discrepancy, expansion_crosscheck, residuals};
use gn3_core::library;
use gn3_core::representation::{
    extract_iso_coeffs, half_turn_witness, lemma_extract, lemma_family, random_frame, try_isotropy_defect, Group,
    LemmaCoefficients,
};
use gn3_core::sim::{run, Scenario};
use gn3_core::{ConstitutiveModel, Ten2, ThermalState, Vec3};

const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

fn gn3(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_gn3")).args(args).output().expect("gn3 runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn states(model: &ConstitutiveModel, n: usize, seed: u64) -> Vec<ThermalState> {
    let sampler = StateSampler::non_degenerate(&model.domain).expect("non-empty domain");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}

/// Largest residual, condition entry and `‖h − λq‖` over `states`.
fn equality_worst(model: &ConstitutiveModel, states: &[ThermalState]) -> Result<(f64, f64, f64), String> {
    let (mut res, mut cond, mut prop) = (0.0f64, 0.0f64, 0.0f64);
    for s in states {
        let r = residuals(model, s).map_err(|e| e.to_string())?;
        res = res.max(r.max_equality());
        cond = cond.max(condition_lists(model, s).map_err(|e| e.to_string())?.max_abs());
        let h = model.eval_flux(Flux::H, s).map_err(|e| e.to_string())?;
        let q = model.eval_flux(Flux::Q, s).map_err(|e| e.to_string())?;
        let lambda = model.eval_scalar(ScalarField::Lambda, s).map_err(|e| e.to_string())?;
        prop = prop.max((h - q.scale(lambda)).norm());
    }
    Ok((res, cond, prop))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let models = library::proportional_isotropic_models();
    let (mut res, mut cond, mut prop) = (0.0f64, 0.0f64, 0.0f64);
    for (k, m) in models.iter().enumerate() {
        let (r, c, p) = equality_worst(m, &states(m, 10_000, SEED + k as u64))?;
        res = res.max(r);
        cond = cond.max(c);
        prop = prop.max(p);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        models.len() == 5 && res <= 1e-10 && cond <= 1e-10 && prop <= 1e-12 && secs <= 30.0,
        format!(
            "{} models x 1e4 states: residual {res:.2e}, conditions {cond:.2e}, |h - lam q| {prop:.2e}, {secs:.2}s",
            models.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let m = library::load("counterexample_transverse").expect("bundled");
    let sampled = states(&m, 1000, SEED);
    let (res, cond, _) = equality_worst(&m, &sampled)?;
    let c0 = 1.0;
    let (mut orth, mut axial_err) = (0.0f64, 0.0f64);
    for s in &sampled {
        let d = discrepancy(&m, s).map_err(|e| e.to_string())?;
        orth = orth.max(d.orthogonal_norm);
        axial_err = axial_err.max((d.axial.expect("axis") - c0 * s.alpha_dot).abs());
    }
    // axial spread over (u, v) at one fixed (a, da)
    let (a, da) = (0.3, 42.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &sampled {
        let s = ThermalState { alpha: a, alpha_dot: da, ..*s };
        let f = discrepancy(&m, &s).map_err(|e| e.to_string())?.axial.expect("axis");
        lo = lo.min(f);
        hi = hi.max(f);
    }
    let spread = hi - lo;
    let (code, _) = gn3(&["check", "--model", "builtin:counterexample_transverse", "--seed", "1"]);
    ensure(
        res <= 1e-10 && cond <= 1e-10 && orth <= 1e-10 && axial_err <= 1e-10 && spread <= 1e-10 && code == 3,
        format!(
            "residual {res:.2e}, conditions {cond:.2e}, off-axis {orth:.2e}, |f - c0 da| {axial_err:.2e}, \
             spread {spread:.2e}, exit {code}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let (code, out) = gn3(&["check", "--model", "builtin:lambda_gradient_violation", "--budget", "10000"]);
    let report: serde_json::Value = serde_json::from_slice(&out).map_err(|e| format!("bad report: {e}"))?;
    let magnitude = report["search"]["magnitude"].as_f64().unwrap_or(0.0);
    let evaluations = report["search"]["evaluations"].as_u64().unwrap_or(u64::MAX);
    ensure(
        code == 4 && magnitude >= 1e-4 && evaluations <= 10_000,
        format!("violation {magnitude:.3e} after {evaluations} evaluations, exit {code}"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for m in library::all_models() {
        for s in states(&m, 1000, SEED) {
            worst = worst.max(expansion_crosscheck(&m, &s).map_err(|e| e.to_string())?);
        }
    }
    ensure(worst <= 1e-9, format!("7 models x 1e3 states: max deviation {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let (mut worst, mut count) = (0.0f64, 0usize);
    for m in library::all_models() {
        let sampled = states(&m, 1000, SEED);
        for (_, coeff) in m.coefficients() {
            count += 1;
            for s in &sampled {
                let f = |st: &gn3_core::state::GState<gn3_core::Jet>| coeff.eval(&m.invariants(st));
                worst = worst.max(fd_crosscheck(f, s, 1e-5).map_err(|e| e.to_string())?);
            }
        }
    }
    ensure(worst <= 1e-6, format!("{count} coefficients x 1e3 states: max relative gap {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut recon = 0.0f64;
    let mut iso = 0.0f64;
    let isotropic: Vec<_> = library::all_models().into_iter().filter(|m| !m.is_transverse()).collect();
    for m in &isotropic {
        for s in states(m, 1000, SEED) {
            for flux in [Flux::H, Flux::Q] {
                let f = m.eval_flux(flux, &s).map_err(|e| e.to_string())?;
                let c = extract_iso_coeffs(&f, &s.u, &s.v).map_err(|e| e.to_string())?;
                recon = recon.max((f - s.u.scale(c.phi[0]) - s.v.scale(c.phi[1])).norm());
            }
        }
        for flux in [Flux::H, Flux::Q] {
            let f = |u: &Vec3, v: &Vec3| {
                let s = ThermalState::new(0.2, 40.0, *u, *v);
                m.eval_flux(flux, &s)
            };
            iso = iso.max(try_isotropy_defect(f, Group::Full, 200, SEED).map_err(|e| e.to_string())?);
        }
    }
    let e = Vec3::new(0.0, 0.0, 1.0);
    let moved = (half_turn_witness(&e).apply(&e) - e).norm();
    ensure(
        recon <= 1e-9 && iso <= 1e-10 && moved >= 1.9,
        format!(
            "{} isotropic models: reconstruction {recon:.2e}, isotropy defect {iso:.2e}, half-turn moves e by {moved:.3}",
            isotropic.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut round, mut zero) = (0.0f64, 0.0f64);
    for (transverse, len) in [(false, 4), (true, 7)] {
        for _ in 0..1000 {
            let frame = random_frame(&mut rng, transverse);
            let c: Vec<f64> = (0..len).map(|_| rng.random_range(-10.0..10.0)).collect();
            let c = LemmaCoefficients::from_slice(&c).expect("length");
            let got = lemma_extract(lemma_family(c, &frame), &frame).map_err(|e| e.to_string())?;
            round = round.max(got.distance(&c));
            let z = lemma_extract(|_, _| Ten2::ZERO, &frame).map_err(|e| e.to_string())?;
            zero = zero.max(z.norm_inf());
        }
    }
    ensure(
        round <= 1e-12 && zero <= 1e-12,
        format!("both lemmas x 1e3 frames: round trip {round:.2e}, zero tensor {zero:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let run_named = |name: &str| {
        let s = library::scenario(name).ok_or(format!("missing scenario {name}"))?;
        let p = s.prepare().map_err(|e| e.to_string())?;
        run(&p).map_err(|e| e.to_string())
    };
    let start = Instant::now();
    let pulse = run_named("type2_pulse")?;
    let secs = start.elapsed().as_secs_f64();
    let wave = pulse.summary.wave_speed.ok_or("no wave speed estimate")?;

    let fourier = run_named("fourier_gaussian")?;
    let l2 = fourier.summary.reference_l2.ok_or("no reference error")?;

    let mut entropy = f64::INFINITY;
    for b in library::SCENARIOS {
        let s = b.load();
        let k2 = s.material.map(|m| m.k2).into_iter().chain(s.materials.iter().flatten().map(|m| m.k2));
        if k2.fold(0.0f64, f64::max) > 0.0 {
            let out = run_named(b.name)?;
            entropy = entropy.min(out.summary.entropy.produced).min(out.summary.entropy.min_step_total);
        }
    }

    let same = r#"{"name": "identical_contact",
        "materials": [{"rho": 1, "c": 1, "k1": 0.5, "k2": 0.02, "theta0": 300},
                      {"rho": 1, "c": 1, "k1": 0.5, "k2": 0.02, "theta0": 300}],
        "interface_cell": 100, "N": 200, "L": 1, "dt": 5e-4, "T_end": 0.5,
        "initial": {"alpha": "0", "alpha_dot": "300 + 10*exp(-((x - 0.5)/0.1)^2)"}}"#;
    let s = Scenario::from_json(same).map_err(|e| e.to_string())?;
    let out = run(&s.prepare().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let c = out.summary.contact.ok_or("no contact summary")?;
    let jumps = c.max_abs_q_n.max(c.max_abs_h_n).max(c.max_abs_lambda);

    ensure(
        wave.relative_error <= 0.02 && secs <= 10.0 && l2 <= 1e-3 && entropy >= -1e-12 && jumps <= 1e-12,
        format!(
            "wave speed {:.4} vs {:.4} ({:.2}%, {secs:.2}s), Fourier L2 {l2:.2e}, min entropy {entropy:.2e}, \
             identical contact jumps {jumps:.2e}",
            wave.estimate,
            wave.expected,
            100.0 * wave.relative_error
        ),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: Vec<Vec<String>> = vec![
        vec!["check", "--model", "builtin:trigonometric", "--seed", "5"],
        vec!["check", "--model", "builtin:counterexample_transverse", "--seed", "5"],
        vec!["check", "--model", "builtin:lambda_gradient_violation", "--seed", "5"],
        vec!["lemmas", "--seed", "5", "--samples", "2000"],
        vec!["simulate", "--scenario", "builtin:type3_mixed"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    for args in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (a, b) = (gn3(&args), gn3(&args));
        if a != b || a.1.is_empty() {
            return Err(format!("`gn3 {}` differs between runs", args.join(" ")));
        }
    }
    let mut files = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let (code, _) = gn3(&["simulate", "--scenario", "builtin:contact_two_material", "--out", out.to_str().unwrap()]);
        if code != 0 {
            return Err(format!("simulate exited {code}"));
        }
        let read = |f: &str| std::fs::read(out.join(f)).map_err(|e| e.to_string());
        files.push((read("summary.json")?, read("series.csv")?));
    }
    ensure(
        files[0] == files[1],
        format!("{} commands plus written simulation outputs are byte-identical", commands.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("isotropic proportional models satisfy every restriction", criterion_1),
        ("transverse counterexample is consistent with an axial discrepancy", criterion_2),
        ("a coldness depending on |u| is caught", criterion_3),
        ("condition expansion matches direct differentiation", criterion_4),
        ("automatic derivatives match central differences", criterion_5),
        ("isotropic representation and half-turn witness", criterion_6),
        ("dyadic lemma round trips", criterion_7),
        ("simulator wave speed, heat kernel, entropy and contact", criterion_8),
        ("reports are byte-identical across runs", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {}: {name}: {detail}", k + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
