//! Oracle suite for the representation results, run by `gn3 lemmas`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;

use crate::constitutive::{Flux, StateSampler};
use crate::entropy::discrepancy;
use crate::error::{DomainError, RepresentationError};
use crate::library;
use crate::representation::{
    extract_iso_coeffs, extract_transiso_coeffs, half_turn_witness, isotropy_defect, lemma_extract, lemma_family,
    random_frame, Group, LemmaCoefficients,
};
use crate::tensor::{Ten2, Vec3};
use crate::tolerance::TOL;

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    /// Perturb every extraction by `1e-3`; exercises the failure path.
    pub corrupt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Bound {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub samples: usize,
    pub value: f64,
    pub bound: Bound,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<LemmaCheck>,
    pub passed: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error(transparent)]
    Search(#[from] crate::error::SearchError),
}

struct Suite {
    checks: Vec<LemmaCheck>,
    corruption: f64,
}

impl Suite {
    fn push(&mut self, name: impl Into<String>, samples: usize, value: f64, bound: Bound, tolerance: f64) {
        let passed = match bound {
            Bound::AtMost => value <= tolerance,
            Bound::AtLeast => value >= tolerance,
        };
        self.checks.push(LemmaCheck {
            name: name.into(),
            samples,
            value,
            bound,
            tolerance,
            passed,
        });
    }

    fn corrupt(&self, c: LemmaCoefficients) -> LemmaCoefficients {
        let mut v = c.to_vec();
        v[0] += self.corruption;
        LemmaCoefficients::from_slice(&v).expect("same length")
    }
}

/// Run every representation and lemma check with `samples` draws each.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    let n = cfg.samples.max(1);
    let mut suite = Suite {
        checks: Vec::new(),
        corruption: if cfg.corrupt { 1e-3 } else { 0.0 },
    };
    let seed = cfg.seed;

    let iso_forms: [(&str, fn(&Vec3, &Vec3) -> Vec3); 2] = [
        ("u (u.v)", |u, v| u.scale(u.dot(v))),
        ("|v| u - sin(u.v) v", |u, v| u.scale(v.norm()) - v.scale(u.dot(v).sin())),
    ];
    for (label, f) in iso_forms {
        let d = isotropy_defect(f, Group::Full, n, seed);
        suite.push(format!("isotropy defect of {label}"), n, d, Bound::AtMost, TOL.isotropy);
    }
    let e = Vec3::new(0.0, 0.6, 0.8);
    let w = half_turn_witness(&e);
    suite.push("fixed vector moved by half turn", 1, (w.apply(&e) - e).norm(), Bound::AtLeast, 1.9);
    let axial = isotropy_defect(|_, _| e, Group::About(e), n, seed);
    suite.push("fixed vector under rotations about itself", n, axial, Bound::AtMost, TOL.isotropy);

    // isotropic forms admit the two-term representation
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut coherence = 0.0f64;
    for _ in 0..n {
        let (u, v) = (Vec3::gaussian(&mut rng).scale(2.0), Vec3::gaussian(&mut rng).scale(2.0));
        if !crate::constitutive::is_non_degenerate(&crate::state::ThermalState::new(0.0, 0.0, u, v)) {
            continue;
        }
        for (_, f) in iso_forms {
            coherence = coherence.max(extract_iso_coeffs(&f(&u, &v), &u, &v)?.residual);
        }
    }
    suite.push("representation residual of isotropic forms", n, coherence, Bound::AtMost, 1e-8);

    for model in library::proportional_isotropic_models() {
        let sampler = StateSampler::non_degenerate(&model.domain)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..n {
            let s = sampler.sample(&mut rng);
            let ev = model.evaluate(&s.plain())?;
            for (flux, coeffs) in [(Flux::H, &ev.h_coeffs), (Flux::Q, &ev.q_coeffs)] {
                let f = Vec3(match flux {
                    Flux::H => ev.h,
                    Flux::Q => ev.q,
                });
                let c = extract_iso_coeffs(&f, &s.u, &s.v)?;
                let phi = [c.phi[0] + suite.corruption, c.phi[1]];
                let residual = (f - s.u.scale(phi[0]) - s.v.scale(phi[1])).norm();
                let coeff_err = (phi[0] - coeffs[0]).abs().max((phi[1] - coeffs[1]).abs());
                worst = worst.max(residual).max(coeff_err);
            }
        }
        suite.push(format!("reconstruction of {} fluxes", model.name), n, worst, Bound::AtMost, TOL.reconstruction);
    }

    let ce = library::load("counterexample_transverse").expect("bundled");
    let axis = ce.symmetry.axis().expect("transverse");
    let sampler = StateSampler::non_degenerate(&ce.domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut used) = (0.0f64, 0);
    for _ in 0..n {
        let s = sampler.sample(&mut rng);
        let gram = Ten2::from_fn(|i, j| [s.u, s.v, axis][i].dot(&[s.u, s.v, axis][j])).det();
        if gram < 1e-2 * s.u.dot(&s.u) * s.v.dot(&s.v) {
            continue;
        }
        let ev = ce.evaluate(&s.plain())?;
        let h = extract_transiso_coeffs(&Vec3(ev.h), &s.u, &s.v, &axis)?;
        let q = extract_transiso_coeffs(&Vec3(ev.q), &s.u, &s.v, &axis)?;
        let f = h.phi[2] + suite.corruption - ev.lambda * q.phi[2];
        let d = discrepancy(&ce, &s)?.axial.expect("transverse");
        worst = worst.max((f - d).abs());
        used += 1;
    }
    suite.push("axial coefficient equals influx discrepancy", used, worst, Bound::AtMost, TOL.discrepancy);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (label, transverse, len) in [("four-term", false, 4), ("seven-term", true, 7)] {
        let (mut round, mut injective) = (0.0f64, f64::INFINITY);
        for _ in 0..n {
            let frame = random_frame(&mut rng, transverse);
            let c: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
            let c = LemmaCoefficients::from_slice(&c).expect("length");
            let got = suite.corrupt(lemma_extract(lemma_family(c, &frame), &frame)?);
            round = round.max(got.distance(&c));
            if c.norm_inf() > 0.0 {
                injective = injective.min(got.norm_inf() / c.norm_inf());
            }
        }
        suite.push(format!("{label} dyadic round trip"), n, round, Bound::AtMost, TOL.algebraic);
        suite.push(format!("{label} dyadic injectivity ratio"), n, injective, Bound::AtLeast, 0.99);
        let frame = random_frame(&mut rng, transverse);
        let zero = suite.corrupt(lemma_extract(|_, _| Ten2::ZERO, &frame)?);
        suite.push(format!("{label} zero tensor"), 1, zero.norm_inf(), Bound::AtMost, TOL.algebraic);
    }

    let passed = suite.checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        seed,
        samples: n,
        checks: suite.checks,
        passed,
    })
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,samples,value,bound,tolerance,passed\n");
        for c in &self.checks {
            let bound = match c.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            let _ = writeln!(s, "\"{}\",{},{:e},{bound},{:e},{}", c.name, c.samples, c.value, c.tolerance, c.passed);
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let bound = match c.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            let _ = writeln!(
                s,
                "{} {:<52} {:e} {bound} {:e}",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            );
        }
        let _ = writeln!(s, "{}", if self.passed { "all checks passed" } else { "lemma suite FAILED" });
        s
    }
}
