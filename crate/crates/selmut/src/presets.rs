//! Bundled experiment scenarios with documented parameters.
//!
//! Default resolutions and epsilon values are chosen to run in minutes on a
//! desktop; `--epsilon/--hx/--htheta` overrides allow finer studies.

use crate::domain::SpatialDomain;
use crate::error::{Result, SelmutError};
use crate::model::{
    DetectionParams, GrowthSpec, KernelShape, KernelSpec, ScenarioConfig, SolverParams,
};

/// What a preset is meant to produce beyond a single equilibrium.
#[derive(Debug, Clone)]
pub enum PresetStudy {
    /// One equilibrium plus full diagnostics.
    Single,
    /// Equilibria for each epsilon (Hamilton-Jacobi/regularity ladder).
    EpsilonLadder { epsilons: Vec<f64> },
    /// 2-D principal eigenvalue ladder against the 1-D reference.
    MuLadder { epsilons: Vec<f64> },
    /// Eigenvalue monotonicity in the selection pressure.
    GScan { theta: f64, g_values: Vec<f64> },
    /// Equilibria on a family of two-component domains with gap distance d.
    FragmentationScan { a: f64, d_values: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub cfg: ScenarioConfig,
    pub study: PresetStudy,
}

pub const PRESET_NAMES: &[&str] = &[
    "fig1",
    "fig2",
    "fig3",
    "fig4-near",
    "fig4-far",
    "exampleA",
    "mu-ladder",
    "g-scan",
    "fragmentation-scan",
];

fn default_kernel() -> KernelSpec {
    KernelSpec::new(KernelShape::GaussianFloor { floor: 0.1, amplitude: 1.0, width: 1.0 })
}

fn base_cfg(
    domain: SpatialDomain,
    a: f64,
    epsilon: f64,
    growth: GrowthSpec,
    kernel: KernelSpec,
    h_x: f64,
    h_theta: f64,
) -> ScenarioConfig {
    ScenarioConfig {
        domain,
        trait_half_width: a,
        epsilon,
        growth,
        kernel,
        kappa: 1.0,
        sigma_x: 1.0,
        h_x,
        h_theta,
        solver: SolverParams::default(),
        detect: DetectionParams::default(),
    }
}

/// Build a named preset.
pub fn preset(name: &str) -> Result<Preset> {
    let p = match name {
        // Gradient-following monomorphic concentration: shallow selection on
        // a connected habitat; the population concentrates around trait 0.
        "fig1" => Preset {
            name: "fig1",
            description: "shallow selection (g=0.1) on (-2,2); monomorphic concentration at trait 0",
            cfg: base_cfg(
                SpatialDomain::interval(-2.0, 2.0)?,
                2.0,
                0.1,
                GrowthSpec::QuadraticSpace { r: 1.0, g: 0.1, b: 1.0 },
                default_kernel(),
                0.125,
                0.05,
            ),
            study: PresetStudy::EpsilonLadder { epsilons: vec![0.2, 0.1, 0.05] },
        },
        // Small selection pressure: one emergent trait.
        "fig2" => Preset {
            name: "fig2",
            description: "small selection (g=0.01) on (-2,2), A=3; monomorphic",
            cfg: base_cfg(
                SpatialDomain::interval(-2.0, 2.0)?,
                3.0,
                0.02,
                GrowthSpec::QuadraticSpace { r: 5.0, g: 0.01, b: 1.0 },
                default_kernel(),
                0.125,
                0.02,
            ),
            study: PresetStudy::Single,
        },
        // Strong selection pressure: several emergent traits.
        "fig3" => Preset {
            name: "fig3",
            description: "strong selection (g=5) on (-2,2), A=3; polymorphic",
            cfg: base_cfg(
                SpatialDomain::interval(-2.0, 2.0)?,
                3.0,
                0.02,
                GrowthSpec::QuadraticSpace { r: 5.0, g: 5.0, b: 1.0 },
                default_kernel(),
                0.125,
                0.02,
            ),
            study: PresetStudy::Single,
        },
        // Two nearby habitat patches: migration keeps the population
        // effectively monomorphic.
        "fig4-near" => Preset {
            name: "fig4-near",
            description: "fragmented habitat (-1.1,-0.1)u(0.1,1.1); close patches",
            cfg: base_cfg(
                SpatialDomain::new(vec![(-1.1, -0.1), (0.1, 1.1)])?,
                2.0,
                0.02,
                GrowthSpec::QuadraticSpace { r: 1.0, g: 1.0, b: 1.0 },
                default_kernel(),
                0.1,
                0.02,
            ),
            study: PresetStudy::Single,
        },
        // Distant patches: local adaptation wins and the population splits
        // into a symmetric trait pair excluding trait 0.
        "fig4-far" => Preset {
            name: "fig4-far",
            description: "fragmented habitat (-2.5,-1.5)u(1.5,2.5); distant patches, polymorphic",
            cfg: base_cfg(
                SpatialDomain::new(vec![(-2.5, -1.5), (1.5, 2.5)])?,
                2.0,
                0.02,
                GrowthSpec::QuadraticSpace { r: 1.0, g: 1.0, b: 1.0 },
                default_kernel(),
                0.1,
                0.02,
            ),
            study: PresetStudy::Single,
        },
        // Space-independent selection with a constant kernel: every
        // eigen-quantity has a closed form, so this doubles as a calibration
        // scenario.
        "exampleA" => Preset {
            name: "exampleA",
            description: "x-independent growth r - g theta^2 on (-1,1), constant kernel",
            cfg: base_cfg(
                SpatialDomain::interval(-1.0, 1.0)?,
                1.0,
                0.1,
                GrowthSpec::QuadraticTrait { r: 1.0, g: 1.0, theta0: 0.0 },
                KernelSpec::new(KernelShape::Constant { k0: 1.0 }),
                2.0 / 64.0,
                0.025,
            ),
            study: PresetStudy::Single,
        },
        // Convergence of the 2-D principal eigenvalue to the 1-D minimum.
        "mu-ladder" => {
            let mut p = preset("exampleA")?;
            p.name = "mu-ladder";
            p.description = "mu_eps -> min lambda(theta, 0) ladder on the exampleA scenario";
            p.study = PresetStudy::MuLadder { epsilons: vec![0.4, 0.2, 0.1, 0.05] };
            p
        }
        // Eigenvalue monotonicity in g at a fixed trait.
        "g-scan" => {
            let mut p = preset("fig2")?;
            p.name = "g-scan";
            p.description = "lambda(theta=1, 0) over g in {0.01, 0.1, 1, 5}";
            p.study = PresetStudy::GScan { theta: 1.0, g_values: vec![0.01, 0.1, 1.0, 5.0] };
            p
        }
        // Polymorphism onset as patch distance grows.
        "fragmentation-scan" => Preset {
            name: "fragmentation-scan",
            description: "two patches (-d-a,-d)u(d,d+a), a=1, d in {0.1, 1.5}",
            cfg: base_cfg(
                fragmented_domain(1.0, 0.1)?,
                2.0,
                0.02,
                GrowthSpec::QuadraticSpace { r: 1.0, g: 1.0, b: 1.0 },
                default_kernel(),
                0.1,
                0.02,
            ),
            study: PresetStudy::FragmentationScan { a: 1.0, d_values: vec![0.1, 1.5] },
        },
        other => {
            return Err(SelmutError::Usage(format!(
                "unknown preset `{other}`; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}

/// `(-d-a, -d) u (d, d+a)`.
pub fn fragmented_domain(a: f64, d: f64) -> Result<SpatialDomain> {
    SpatialDomain::new(vec![(-d - a, -d), (d, d + a)])
}
