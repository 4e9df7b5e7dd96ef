//! Models and scenarios shipped with the crate.

use crate::constitutive::ConstitutiveModel;
use crate::sim::Scenario;

/// Outcome a consistency check is expected to reach on a bundled model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Proportional,
    NonProportional,
    Violation,
}

#[derive(Debug, Clone, Copy)]
pub struct BundledModel {
    pub name: &'static str,
    pub json: &'static str,
    pub expected: Expected,
}

macro_rules! bundled {
    ($name:literal, $expected:ident) => {
        BundledModel {
            name: $name,
            json: include_str!(concat!("../models/", $name, ".json")),
            expected: Expected::$expected,
        }
    };
}

pub const MODELS: [BundledModel; 7] = [
    bundled!("fourier_linear", Proportional),
    bundled!("nonlinear_conductivity", Proportional),
    bundled!("coupled_invariants", Proportional),
    bundled!("trigonometric", Proportional),
    bundled!("radical_logarithmic", Proportional),
    bundled!("counterexample_transverse", NonProportional),
    bundled!("lambda_gradient_violation", Violation),
];

impl BundledModel {
    pub fn load(&self) -> ConstitutiveModel {
        ConstitutiveModel::from_json(self.json).unwrap_or_else(|e| panic!("bundled model {}: {e}", self.name))
    }
}

pub fn bundled(name: &str) -> Option<&'static BundledModel> {
    MODELS.iter().find(|m| m.name == name)
}

pub fn load(name: &str) -> Option<ConstitutiveModel> {
    bundled(name).map(BundledModel::load)
}

/// The isotropic models with `h = λ q`.
pub fn proportional_isotropic_models() -> Vec<ConstitutiveModel> {
    MODELS
        .iter()
        .filter(|m| m.expected == Expected::Proportional)
        .map(BundledModel::load)
        .collect()
}

pub fn all_models() -> Vec<ConstitutiveModel> {
    MODELS.iter().map(BundledModel::load).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct BundledScenario {
    pub name: &'static str,
    pub json: &'static str,
}

macro_rules! scenario {
    ($name:literal) => {
        BundledScenario {
            name: $name,
            json: include_str!(concat!("../scenarios/", $name, ".json")),
        }
    };
}

pub const SCENARIOS: [BundledScenario; 4] = [
    scenario!("type2_pulse"),
    scenario!("fourier_gaussian"),
    scenario!("type3_mixed"),
    scenario!("contact_two_material"),
];

impl BundledScenario {
    pub fn load(&self) -> Scenario {
        Scenario::from_json(self.json).unwrap_or_else(|e| panic!("bundled scenario {}: {e}", self.name))
    }
}

pub fn scenario(name: &str) -> Option<Scenario> {
    SCENARIOS.iter().find(|s| s.name == name).map(BundledScenario::load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{build_counterexample, Flux, ScalarField, StateSampler};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_load_with_matching_names() {
        for m in MODELS {
            assert_eq!(m.load().name, m.name);
        }
        assert_eq!(proportional_isotropic_models().len(), 5);
        assert!(load("missing").is_none());
    }

    #[test]
    fn bundled_scenarios_meet_their_targets() {
        for b in SCENARIOS {
            let s = b.load();
            assert_eq!(s.name, b.name);
            let out = crate::sim::run(&s.prepare().unwrap()).unwrap();
            let sum = &out.summary;
            if s.material.is_some_and(|m| m.k2 > 0.0) || s.materials.is_some() {
                assert!(sum.entropy.produced >= -1e-12, "{}", b.name);
                assert!(sum.entropy.min_step_total >= -1e-12, "{}", b.name);
            }
            match b.name {
                "type2_pulse" => assert!(sum.wave_speed.unwrap().relative_error <= 0.02),
                "fourier_gaussian" => assert!(sum.reference_l2.unwrap() <= 1e-3),
                "contact_two_material" => {
                    let c = sum.contact.as_ref().unwrap();
                    assert!(c.max_abs_q_n <= 1e-10);
                    let (first, last) = (c.series[0], *c.series.last().unwrap());
                    assert!(last.lambda.abs() < first.lambda.abs());
                }
                _ => {}
            }
        }
    }

    #[test]
    fn counterexample_file_matches_builder() {
        let file = load("counterexample_transverse").unwrap();
        let built = build_counterexample(300.0, 1.0, 0.5, 2.0, 1.0).unwrap();
        assert_eq!(file.domain, built.domain);
        assert_eq!(file.rho, built.rho);
        let sampler = StateSampler::covering(&file.domain);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let s = sampler.sample(&mut rng);
            for f in [Flux::H, Flux::Q] {
                let (a, b) = (file.eval_flux(f, &s).unwrap(), built.eval_flux(f, &s).unwrap());
                assert!((a - b).norm_inf() <= 1e-15);
            }
            for f in [ScalarField::Eps, ScalarField::Eta, ScalarField::Lambda] {
                assert_eq!(file.eval_scalar(f, &s).unwrap(), built.eval_scalar(f, &s).unwrap());
            }
        }
    }
}
