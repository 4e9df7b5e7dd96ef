//! Sampling-plus-search consistency report for one model.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constitutive::{ConstitutiveModel, StateSampler};
use crate::entropy::{
    condition_lists, discrepancy, expansion_crosscheck, residuals, violation_search, RESIDUAL_LABELS,
};
use crate::error::SearchError;
use crate::state::ThermalState;
use crate::tolerance::TOL;

/// States sharing one `(a, da)` pair when measuring the axial spread.
const SPREAD_GROUP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentProportional,
    ConsistentNonproportional,
    ViolationFound,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ConsistentProportional => "consistent_proportional",
            Verdict::ConsistentNonproportional => "consistent_nonproportional",
            Verdict::ViolationFound => "violation_found",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    pub seed: u64,
    pub samples: usize,
    pub budget: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            samples: 10_000,
            budget: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstEntry {
    pub magnitude: f64,
    pub state: ThermalState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancySummary {
    /// Largest `‖h − λq‖` component orthogonal to the axis (all of it without one).
    pub max_orthogonal: f64,
    /// Largest spread of `(h − λq)·e` over states sharing `(a, da)`; null without an axis.
    pub axial_spread: Option<f64>,
    pub max_norm: f64,
    pub min_axial_abs: Option<f64>,
    pub max_axial_abs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSummary {
    pub budget: usize,
    pub evaluations: usize,
    pub magnitude: f64,
    pub label: &'static str,
    pub state: ThermalState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedSummary {
    pub min: f64,
    pub negative_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub model: String,
    pub symmetry: &'static str,
    pub n_states: usize,
    pub seed: u64,
    /// Largest magnitude of every residual and scalar condition over the sampled states.
    pub worst: BTreeMap<String, WorstEntry>,
    pub max_equality_residual: f64,
    pub max_expansion_deviation: f64,
    pub search: SearchSummary,
    pub discrepancy: DiscrepancySummary,
    pub reduced_inequality: ReducedSummary,
    pub warnings: Vec<String>,
    pub verdict: Verdict,
}

fn bump(worst: &mut BTreeMap<String, WorstEntry>, key: &str, magnitude: f64, state: &ThermalState) {
    match worst.get_mut(key) {
        Some(w) if magnitude > w.magnitude => {
            *w = WorstEntry {
                magnitude,
                state: *state,
            }
        }
        Some(_) => {}
        None => {
            worst.insert(
                key.to_string(),
                WorstEntry {
                    magnitude,
                    state: *state,
                },
            );
        }
    }
}

/// Sample `samples` non-degenerate states, run the violation search with
/// `budget`, and classify the model.
pub fn run_check(model: &ConstitutiveModel, cfg: &CheckConfig) -> Result<CheckReport, SearchError> {
    let sampler = StateSampler::non_degenerate(&model.domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = BTreeMap::new();
    let mut max_expansion = 0.0f64;
    let mut max_orthogonal = 0.0f64;
    let mut max_norm = 0.0f64;
    let mut axial_range = (f64::INFINITY, 0.0f64);
    let mut spread = 0.0f64;
    let mut group = (f64::INFINITY, f64::NEG_INFINITY);
    let mut anchor = None;
    let mut reduced = ReducedSummary {
        min: f64::INFINITY,
        negative_count: 0,
    };

    for i in 0..cfg.samples {
        let mut state = sampler.sample(&mut rng);
        if i % SPREAD_GROUP == 0 {
            anchor = Some((state.alpha, state.alpha_dot));
            group = (f64::INFINITY, f64::NEG_INFINITY);
        } else if let Some((a, da)) = anchor {
            state.alpha = a;
            state.alpha_dot = da;
        }

        let r = residuals(model, &state)?;
        for (label, m) in RESIDUAL_LABELS.iter().zip(r.magnitudes()) {
            bump(&mut worst, label, m, &state);
        }
        reduced.min = reduced.min.min(r.reduced);
        if r.reduced < 0.0 {
            reduced.negative_count += 1;
        }
        for c in condition_lists(model, &state)?.entries {
            bump(&mut worst, &c.key(), c.value.abs(), &state);
        }
        max_expansion = max_expansion.max(expansion_crosscheck(model, &state)?);

        let d = discrepancy(model, &state)?;
        max_orthogonal = max_orthogonal.max(d.orthogonal_norm);
        max_norm = max_norm.max(d.d.norm());
        if let Some(ax) = d.axial {
            axial_range = (axial_range.0.min(ax.abs()), axial_range.1.max(ax.abs()));
            group = (group.0.min(ax), group.1.max(ax));
            spread = spread.max(group.1 - group.0);
        }
    }

    let v = violation_search(model, &model.domain, cfg.budget, cfg.seed)?;
    let sampled_max = worst.values().fold(0.0f64, |m, w| m.max(w.magnitude));
    let max_equality_residual = sampled_max.max(v.magnitude);
    let verdict = if max_equality_residual > TOL.violation {
        Verdict::ViolationFound
    } else if max_norm > TOL.nonproportional {
        Verdict::ConsistentNonproportional
    } else {
        Verdict::ConsistentProportional
    };

    let mut warnings = Vec::new();
    if reduced.negative_count > 0 {
        warnings.push(format!(
            "reduced dissipation inequality negative at {} of {} states (min {:e})",
            reduced.negative_count, cfg.samples, reduced.min
        ));
    }
    if verdict == Verdict::ConsistentNonproportional && model.is_transverse() && max_orthogonal > TOL.discrepancy {
        warnings.push(format!("entropy influx discrepancy has an off-axis part {max_orthogonal:e}"));
    }
    let transverse = model.is_transverse();
    let sampled = cfg.samples > 0;
    Ok(CheckReport {
        model: model.name.clone(),
        symmetry: if transverse { "transversely_isotropic" } else { "isotropic" },
        n_states: cfg.samples,
        seed: cfg.seed,
        worst,
        max_equality_residual,
        max_expansion_deviation: max_expansion,
        search: SearchSummary {
            budget: cfg.budget,
            evaluations: v.evaluations,
            magnitude: v.magnitude,
            label: v.label,
            state: v.state,
        },
        discrepancy: DiscrepancySummary {
            max_orthogonal,
            axial_spread: transverse.then_some(spread),
            max_norm,
            min_axial_abs: (transverse && sampled).then_some(axial_range.0),
            max_axial_abs: (transverse && sampled).then_some(axial_range.1),
        },
        reduced_inequality: ReducedSummary {
            min: if sampled { reduced.min } else { 0.0 },
            ..reduced
        },
        warnings,
        verdict,
    })
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per worst-case entry.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,magnitude,alpha,alpha_dot,u0,u1,u2,v0,v1,v2\n");
        let mut row = |label: &str, m: f64, st: &ThermalState| {
            let _ = writeln!(
                s,
                "\"{label}\",{m:e},{},{},{},{},{},{},{},{}",
                st.alpha, st.alpha_dot, st.u[0], st.u[1], st.u[2], st.v[0], st.v[1], st.v[2]
            );
        };
        for (k, w) in &self.worst {
            row(k, w.magnitude, &w.state);
        }
        row("search", self.search.magnitude, &self.search.state);
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model      {} ({})", self.model, self.symmetry);
        let _ = writeln!(s, "states     {} (seed {})", self.n_states, self.seed);
        let _ = writeln!(s, "residual   {:e} (sampled and searched)", self.max_equality_residual);
        let _ = writeln!(
            s,
            "search     {:e} at {} after {} evaluations",
            self.search.magnitude, self.search.label, self.search.evaluations
        );
        let _ = writeln!(s, "expansion  {:e}", self.max_expansion_deviation);
        let _ = writeln!(s, "|h - lam q| max {:e}", self.discrepancy.max_norm);
        if let Some(spread) = self.discrepancy.axial_spread {
            let _ = writeln!(
                s,
                "axial      |f| in [{:e}, {:e}], spread {:e}, off-axis {:e}",
                self.discrepancy.min_axial_abs.unwrap_or(0.0),
                self.discrepancy.max_axial_abs.unwrap_or(0.0),
                spread,
                self.discrepancy.max_orthogonal
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning    {w}");
        }
        let _ = writeln!(s, "verdict    {}", self.verdict.as_str());
        s
    }
}
