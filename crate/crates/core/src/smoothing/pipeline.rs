//! End-to-end smooth approximation `ℋ = Ψ ∘ h*` of a map `f: |K| → Y`, where `Y = Ψ(|L|)`.
//!
//! `F = Ψ⁻¹ ∘ f` is approximated by a weakly simplicial `F*` within `b(x)`, `F*` is smoothed to
//! `h*` within `b(x)`, and `Ψ` carries the `2b ≤ δ` error into `Y`. The budget is
//! `b = min(μ/4, δ/2)` with `δ = ε/Λ_Ψ`, and `μ = 1` because `|L|` is compact.

use std::sync::Arc;

use super::{smooth, Budget, SmoothMap, SmoothOptions};
use crate::complex::{Complex, Subcomplex};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::maps::{
    estimate_lipschitz, staged_weakly_simplicial, CarrierCertified, Compose, MapEvaluator, PlMap, StagedOptions,
    StagedOutput,
};
use crate::sample::rng_for;

/// `Ψ: |L| → Y` with its inverse on `Y`.
#[derive(Clone)]
pub struct TargetTriangulation {
    pub complex: Complex,
    pub psi: Arc<dyn MapEvaluator>,
    pub psi_inverse: Arc<dyn MapEvaluator>,
}

impl TargetTriangulation {
    /// `Y = |L|` and `Ψ` the inclusion.
    pub fn inclusion(l: &Complex) -> Self {
        let id: Arc<dyn MapEvaluator> = Arc::new(PlMap::identity(l));
        Self {
            complex: l.clone(),
            psi: id.clone(),
            psi_inverse: id,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineBudget {
    pub stage: usize,
    /// `ε_k`: sampled minimum of `ε` over the stage.
    pub epsilon: f64,
    /// `μ_k = min(1, dist(Q_k, Cl(Q) ∖ Q))`; 1 for compact targets.
    pub mu: f64,
    /// `δ_k = ε_k / Λ_Ψ`.
    pub delta: f64,
    /// `min(μ_k/4, δ_k/2)`.
    pub budget: f64,
}

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    pub staged: StagedOptions,
    pub smooth: SmoothOptions,
    /// Filtration of the source; `None` means the single stage `[K]`.
    pub filtration: Option<Vec<Subcomplex>>,
}

pub struct PipelineOutput {
    pub budgets: Vec<PipelineBudget>,
    /// Simplexwise Lipschitz bound of `Ψ`, and whether it is exact.
    pub psi_lipschitz: (f64, bool),
    pub staged: StagedOutput,
    /// `h*`, smooth into `|L|`.
    pub smooth: SmoothMap,
    /// `ℋ = Ψ ∘ h*`.
    pub map: Arc<dyn MapEvaluator>,
}

pub fn approximate(
    f: Arc<dyn MapEvaluator>,
    k: &Complex,
    target: &TargetTriangulation,
    epsilon: Budget,
    opts: &PipelineOptions,
) -> Result<PipelineOutput> {
    let l = &target.complex;
    let (lip_psi, exact) = match target.psi.simplexwise_lipschitz() {
        Some(v) => (v, true),
        None => {
            let ids: Vec<usize> = (0..l.num_simplices()).collect();
            (2.0 * estimate_lipschitz(target.psi.as_ref(), l, &ids, opts.smooth.lipschitz_pairs, opts.smooth.cover.seed)?, false)
        }
    };
    if !(lip_psi.is_finite()) {
        return Err(Error::Inconclusive("the Lipschitz estimate of Ψ is not finite".into()));
    }
    let lip_psi = lip_psi.max(f64::MIN_POSITIVE);
    let filtration = opts.filtration.clone().unwrap_or_else(|| vec![k.subcomplex_all()]);

    let mu: f64 = 1.0;
    let budget_at = {
        let epsilon = epsilon.clone();
        move |x: &Point| (mu / 4.0).min(epsilon(x) / lip_psi / 2.0)
    };
    let mut budgets = Vec::with_capacity(filtration.len());
    for (stage, km) in filtration.iter().enumerate() {
        let eps_k = sampled_min(k, km, &epsilon, opts.staged.epsilon_density, opts.staged.zeeman.seed);
        if !(eps_k > 0.0) {
            return Err(Error::NonPositiveWeight {
                point: Vec::new(),
                value: eps_k,
            });
        }
        let delta = eps_k / lip_psi;
        budgets.push(PipelineBudget {
            stage,
            epsilon: eps_k,
            mu,
            delta,
            budget: (mu / 4.0).min(delta / 2.0),
        });
    }

    let big_f: Arc<dyn MapEvaluator> = Arc::new(Compose {
        inner: f,
        outer: target.psi_inverse.clone(),
    });
    let staged = staged_weakly_simplicial(big_f, k, &Subcomplex::empty(), &filtration, l, &budget_at, &opts.staged)?;
    let g: Arc<dyn CarrierCertified> = Arc::new(staged.map.clone());
    let smooth_map = smooth(g, Arc::new(budget_at), &opts.smooth).map_err(|e| Error::Stage {
        stage: filtration.len(),
        source: Box::new(e),
    })?;
    let map: Arc<dyn MapEvaluator> = Arc::new(Compose {
        inner: Arc::new(smooth_map.clone()),
        outer: target.psi.clone(),
    });
    Ok(PipelineOutput {
        budgets,
        psi_lipschitz: (lip_psi, exact),
        staged,
        smooth: smooth_map,
        map,
    })
}

fn sampled_min(k: &Complex, sub: &Subcomplex, eps: &Budget, density: usize, seed: u64) -> f64 {
    let mut best = f64::INFINITY;
    for id in k.ids_in(sub) {
        let mut rng = rng_for(seed ^ 0xb0d6e7, id as u64);
        for v in k.points_of(id) {
            best = best.min(eps(v));
        }
        if k.simplex_dim(id) > 0 {
            for _ in 0..density {
                best = best.min(eps(&k.sample_in(id, &mut rng).0));
            }
        }
    }
    best
}
