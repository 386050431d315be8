//! Growth-rate fields, kernel specifications, and the scenario configuration.

use crate::domain::{
    build_spatial_grid, build_trait_grid, sample_kernel, Field1D, Field2D, Grid2D, KernelMatrix,
    SpatialDomain,
};
use crate::error::{Result, SelmutError};
use crate::spectral;

/// Growth rate `R(x, theta)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthSpec {
    /// `R(x, theta) = r - g (b x - theta)^2`; the optimal trait follows the
    /// environmental gradient `b`.
    QuadraticSpace { r: f64, g: f64, b: f64 },
    /// `R(x, theta) = r - g (theta - theta0)^2`; no spatial structure.
    QuadraticTrait { r: f64, g: f64, theta0: f64 },
    /// Values sampled on the scenario grid, x-major. The C1 regularity this
    /// model assumes cannot be verified for tabulated input; it is recorded
    /// as unchecked.
    Tabulated { values: Vec<f64> },
}

impl GrowthSpec {
    pub fn is_quadratic_space(&self) -> bool {
        matches!(self, GrowthSpec::QuadraticSpace { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelShape {
    Constant { k0: f64 },
    GaussianFloor { floor: f64, amplitude: f64, width: f64 },
}

/// Dispersal kernel: even, positive, with declared bounds `0 < c_K < K < C_K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub shape: KernelShape,
}

impl KernelSpec {
    pub fn new(shape: KernelShape) -> Self {
        Self { shape }
    }

    pub fn validate(&self) -> Result<()> {
        match self.shape {
            KernelShape::Constant { k0 } if k0 > 0.0 => Ok(()),
            KernelShape::Constant { k0 } => {
                Err(SelmutError::Model(format!("constant kernel must be positive, got {k0}")))
            }
            KernelShape::GaussianFloor { floor, amplitude, width }
                if floor > 0.0 && amplitude >= 0.0 && width > 0.0 =>
            {
                Ok(())
            }
            KernelShape::GaussianFloor { floor, amplitude, width } => Err(SelmutError::Model(
                format!("invalid gaussian-floor kernel: floor={floor}, amplitude={amplitude}, width={width}"),
            )),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self.shape {
            KernelShape::Constant { k0 } => k0,
            KernelShape::GaussianFloor { floor, amplitude, width } => {
                floor + amplitude * (-(z / width) * (z / width)).exp()
            }
        }
    }

    /// Declared lower bound `c_K`.
    pub fn lower_bound(&self) -> f64 {
        match self.shape {
            KernelShape::Constant { k0 } => k0,
            KernelShape::GaussianFloor { floor, .. } => floor,
        }
    }

    /// Declared upper bound `C_K`.
    pub fn upper_bound(&self) -> f64 {
        match self.shape {
            KernelShape::Constant { k0 } => k0,
            KernelShape::GaussianFloor { floor, amplitude, .. } => floor + amplitude,
        }
    }

    /// Bound on `|K'|`.
    pub fn derivative_bound(&self) -> f64 {
        match self.shape {
            KernelShape::Constant { .. } => 0.0,
            KernelShape::GaussianFloor { amplitude, width, .. } => {
                // max of |2z/w^2 e^{-(z/w)^2}| at z = w/sqrt(2)
                amplitude * (2.0f64 / std::f64::consts::E).sqrt() / width
            }
        }
    }
}

/// Time-stepper and eigensolver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub dt0: f64,
    pub dt_max: f64,
    pub dt_growth: f64,
    pub dt_growth_every: u64,
    pub steady_tol: f64,
    pub max_steps: u64,
    pub linear_tol: f64,
    pub eig_value_tol: f64,
    pub eig_residual_tol: f64,
    pub eig_max_iter: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            dt0: 0.1,
            dt_max: 10.0,
            dt_growth: 1.2,
            dt_growth_every: 50,
            steady_tol: 1e-9,
            max_steps: 200_000,
            linear_tol: 1e-11,
            eig_value_tol: 1e-12,
            eig_residual_tol: 1e-10,
            eig_max_iter: 50_000,
        }
    }
}

/// Thresholds for emergent-trait detection; concentration is only approximate
/// at finite epsilon, so these are exposed as configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionParams {
    pub peak_floor: f64,
    pub cluster_threshold: f64,
    /// Extinction threshold as a fraction of `|Omega| * 2A`.
    pub mass_floor_factor: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self { peak_floor: 1e-3, cluster_threshold: 0.01, mass_floor_factor: 1e-8 }
    }
}

/// Full model + discretization configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub domain: SpatialDomain,
    /// Trait half-width `A`.
    pub trait_half_width: f64,
    /// Mutation scale; the trait diffusivity is `epsilon^2`.
    pub epsilon: f64,
    pub growth: GrowthSpec,
    pub kernel: KernelSpec,
    /// Competition intensity; 1 in the normalized model.
    pub kappa: f64,
    /// Spatial diffusivity (also scales the nonlocal operator); 1 in the
    /// normalized model.
    pub sigma_x: f64,
    pub h_x: f64,
    pub h_theta: f64,
    pub solver: SolverParams,
    pub detect: DetectionParams,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(SelmutError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.kappa > 0.0) || !(self.sigma_x > 0.0) {
            return Err(SelmutError::Config(format!(
                "kappa and sigma_x must be positive, got {} and {}",
                self.kappa, self.sigma_x
            )));
        }
        if !(self.trait_half_width > 0.0) {
            return Err(SelmutError::Config(format!("A must be positive, got {}", self.trait_half_width)));
        }
        if !(self.h_x > 0.0) || !(self.h_theta > 0.0) {
            return Err(SelmutError::Config("grid targets must be positive".into()));
        }
        self.kernel.validate()
    }
}

/// A configuration resolved against its grids: kernel matrix and growth
/// fields sampled once, immutable afterwards.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub grid: Grid2D,
    pub kernel: KernelMatrix,
    /// `R` on the grid.
    pub growth: Field2D,
    /// `d/dtheta R` on the grid.
    pub growth_dtheta: Field2D,
    /// Recorded `W^{1,inf}`-type bound on `|R|` over the grid.
    pub growth_bound: f64,
}

impl Scenario {
    pub fn build(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let x = build_spatial_grid(&cfg.domain, cfg.h_x)?;
        let theta = build_trait_grid(cfg.trait_half_width, cfg.h_theta)?;
        let grid = Grid2D::new(x, theta);
        let kernel = sample_kernel(&grid.x, &cfg.kernel)?;
        let (growth, growth_dtheta) = growth_field(&cfg.growth, &grid)?;
        let growth_bound = growth.max_abs();
        Ok(Self { cfg, grid, kernel, growth, growth_dtheta, growth_bound })
    }

    /// `R(x, theta)` at continuous theta (not snapped to the grid).
    pub fn growth_at(&self, x: f64, theta: f64) -> f64 {
        match &self.cfg.growth {
            GrowthSpec::QuadraticSpace { r, g, b } => r - g * (b * x - theta) * (b * x - theta),
            GrowthSpec::QuadraticTrait { r, g, theta0 } => {
                r - g * (theta - theta0) * (theta - theta0)
            }
            GrowthSpec::Tabulated { .. } => self.tabulated_at(x, theta),
        }
    }

    /// `d/dtheta R(x, theta)` at continuous theta.
    pub fn growth_dtheta_at(&self, x: f64, theta: f64) -> f64 {
        match &self.cfg.growth {
            GrowthSpec::QuadraticSpace { g, b, .. } => 2.0 * g * (b * x - theta),
            GrowthSpec::QuadraticTrait { g, theta0, .. } => -2.0 * g * (theta - theta0),
            GrowthSpec::Tabulated { .. } => {
                let d = 1e-3 * 2.0 * self.cfg.trait_half_width;
                (self.tabulated_at(x, theta + d) - self.tabulated_at(x, theta - d)) / (2.0 * d)
            }
        }
    }

    /// Column `R(x_j, theta)` for all spatial nodes, at continuous theta.
    pub fn growth_column(&self, theta: f64) -> Vec<f64> {
        self.grid.x.nodes.iter().map(|&x| self.growth_at(x, theta)).collect()
    }

    pub fn growth_dtheta_column(&self, theta: f64) -> Vec<f64> {
        self.grid.x.nodes.iter().map(|&x| self.growth_dtheta_at(x, theta)).collect()
    }

    fn tabulated_at(&self, x: f64, theta: f64) -> f64 {
        // Nearest x node, linear interpolation in theta (x nodes are exact for
        // all internal callers; theta may fall between cells).
        let j = self
            .grid
            .x
            .nodes
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - x).abs().partial_cmp(&(*b - x).abs()).unwrap()
            })
            .map(|(j, _)| j)
            .unwrap();
        let tg = &self.grid.theta;
        let nt = tg.len();
        let t = ((theta - tg.nodes[0]) / tg.h).clamp(0.0, (nt - 1) as f64);
        let m0 = (t.floor() as usize).min(nt - 2);
        let frac = t - m0 as f64;
        (1.0 - frac) * self.growth.at(j, m0) + frac * self.growth.at(j, m0 + 1)
    }
}

/// Sample `R` and its analytic theta-derivative on the grid. Tabulated
/// variants use central differences for the derivative.
pub fn growth_field(spec: &GrowthSpec, grid: &Grid2D) -> Result<(Field2D, Field2D)> {
    let (nx, nt) = (grid.x.len(), grid.theta.len());
    let mut r_field = Field2D::constant(0.0, nx, nt);
    let mut d_field = Field2D::constant(0.0, nx, nt);
    match spec {
        GrowthSpec::QuadraticSpace { r, g, b } => {
            for j in 0..nx {
                let x = grid.x.nodes[j];
                for m in 0..nt {
                    let th = grid.theta.nodes[m];
                    *r_field.at_mut(j, m) = r - g * (b * x - th) * (b * x - th);
                    *d_field.at_mut(j, m) = 2.0 * g * (b * x - th);
                }
            }
        }
        GrowthSpec::QuadraticTrait { r, g, theta0 } => {
            for j in 0..nx {
                for m in 0..nt {
                    let th = grid.theta.nodes[m];
                    *r_field.at_mut(j, m) = r - g * (th - theta0) * (th - theta0);
                    *d_field.at_mut(j, m) = -2.0 * g * (th - theta0);
                }
            }
        }
        GrowthSpec::Tabulated { values } => {
            if values.len() != nx * nt {
                return Err(SelmutError::Model(format!(
                    "tabulated growth has {} values, grid needs {}",
                    values.len(),
                    nx * nt
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(SelmutError::Model("tabulated growth contains non-finite values".into()));
            }
            r_field.values.copy_from_slice(values);
            let h = grid.theta.h;
            for j in 0..nx {
                for m in 0..nt {
                    let lo = if m == 0 { m } else { m - 1 };
                    let hi = if m + 1 == nt { m } else { m + 1 };
                    *d_field.at_mut(j, m) =
                        (r_field.at(j, hi) - r_field.at(j, lo)) / ((hi - lo) as f64 * h);
                }
            }
        }
    }
    Ok((r_field, d_field))
}

/// Report on the survival assumption: does some trait have `lambda(theta, 0) < 0`?
#[derive(Debug, Clone)]
pub struct SurvivalReport {
    pub theta0_hat: f64,
    pub lambda_min: f64,
    pub satisfied: bool,
}

/// Scan `lambda(theta, 0)` over the trait grid (with quadratic refinement of
/// the minimizer) and report whether the minimum is negative.
pub fn validate_survival_assumption(scen: &Scenario) -> Result<SurvivalReport> {
    let zero = Field1D::zeros(scen.grid.x.len());
    let (theta0_hat, lambda_min) = spectral::refined_lambda_minimum(scen, &zero)?;
    Ok(SurvivalReport { theta0_hat, lambda_min, satisfied: lambda_min < 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_grid() -> Grid2D {
        let dom = SpatialDomain::interval(-2.0, 2.0).unwrap();
        let x = build_spatial_grid(&dom, 1.0).unwrap();
        let theta = build_trait_grid(2.0, 1.0).unwrap();
        Grid2D::new(x, theta)
    }

    #[test]
    fn growth_field_examples() {
        let grid = tiny_grid();
        let spec = GrowthSpec::QuadraticSpace { r: 1.0, g: 0.1, b: 1.0 };
        let (r, _) = growth_field(&spec, &grid).unwrap();
        // R(x=0, theta=0) = 1; the grid has no node at exactly (0,0), check the formula spot
        let cfg = base_cfg(spec);
        let scen = Scenario::build(cfg).unwrap();
        assert_eq!(scen.growth_at(0.0, 0.0), 1.0);
        assert_eq!(r.n_x * r.n_theta, grid.len());

        let spec = GrowthSpec::QuadraticTrait { r: 1.0, g: 1.0, theta0: 0.5 };
        let scen = Scenario::build(base_cfg(spec)).unwrap();
        assert_eq!(scen.growth_at(1.3, 0.5), 1.0);
        assert_eq!(scen.growth_dtheta_at(1.3, 0.5), 0.0);

        let spec = GrowthSpec::QuadraticSpace { r: 5.0, g: 5.0, b: 1.0 };
        let scen = Scenario::build(base_cfg(spec)).unwrap();
        assert_eq!(scen.growth_at(2.0, -2.0), 5.0 - 5.0 * 16.0);
    }

    fn base_cfg(growth: GrowthSpec) -> ScenarioConfig {
        ScenarioConfig {
            domain: SpatialDomain::interval(-2.0, 2.0).unwrap(),
            trait_half_width: 2.0,
            epsilon: 0.1,
            growth,
            kernel: KernelSpec::new(KernelShape::Constant { k0: 1.0 }),
            kappa: 1.0,
            sigma_x: 1.0,
            h_x: 1.0,
            h_theta: 1.0,
            solver: SolverParams::default(),
            detect: DetectionParams::default(),
        }
    }

    #[test]
    fn analytic_dtheta_matches_central_difference() {
        let spec = GrowthSpec::QuadraticSpace { r: 1.0, g: 0.7, b: 1.3 };
        let scen = Scenario::build(base_cfg(spec)).unwrap();
        let d = 1e-4;
        for &(x, th) in &[(0.3, -0.9), (-1.7, 1.1)] {
            let fd = (scen.growth_at(x, th + d) - scen.growth_at(x, th - d)) / (2.0 * d);
            // exact for quadratics up to roundoff
            assert!((fd - scen.growth_dtheta_at(x, th)).abs() < 1e-9);
        }
    }

    #[test]
    fn growth_bound_recorded() {
        let spec = GrowthSpec::QuadraticSpace { r: 1.0, g: 0.5, b: 1.0 };
        let scen = Scenario::build(base_cfg(spec)).unwrap();
        assert!(scen.growth.max_abs() <= scen.growth_bound);
    }

    #[test]
    fn tabulated_mismatch_rejected() {
        let grid = tiny_grid();
        let spec = GrowthSpec::Tabulated { values: vec![1.0; 3] };
        assert!(growth_field(&spec, &grid).is_err());
    }

    #[test]
    fn kernel_spec_bounds() {
        let k = KernelSpec::new(KernelShape::GaussianFloor { floor: 0.1, amplitude: 1.0, width: 1.0 });
        assert_eq!(k.lower_bound(), 0.1);
        assert_eq!(k.upper_bound(), 1.1);
        assert!(k.eval(0.0) > k.eval(1.0));
        assert_eq!(k.eval(0.5), k.eval(-0.5));
        assert!(KernelSpec::new(KernelShape::Constant { k0: -1.0 }).validate().is_err());
    }
}
