//! Steady states of the population model by semi-implicit time marching.
//!
//! Each step freezes the competition field `rho` and solves
//! `(I + dt * A) n_next = n` with
//! `A = sigma_x(-d_xx + L) + eps^2(-d_thth) + diag(kappa rho - R)`.
//! With the row-sum condition `1 + dt (kappa rho_j - R_jm) > margin` the
//! system matrix is a symmetric (in the weighted inner product) M-matrix, so
//! the scheme preserves positivity unconditionally in the continuous algebra;
//! a pointwise floor `n >= b / diag` makes that robust against the finite
//! tolerance of the inner conjugate-gradient solves.

use crate::domain::{Field1D, Field2D, Grid2D};
use crate::error::{Result, SelmutError};
use crate::linalg::{self, max_abs};
use crate::model::Scenario;
use crate::operators::{assemble_2d, LinOp2D, SelfAdjointOp};

/// Initial population density.
#[derive(Debug, Clone)]
pub enum InitSpec {
    /// Uniform density.
    Constant { value: f64 },
    /// `amplitude * exp(-((theta - center)/width)^2)`, uniform in space.
    Gaussian { center: f64, width: f64, amplitude: f64 },
    /// Explicit x-major field (e.g. from a checkpoint).
    Loaded { values: Vec<f64> },
}

impl InitSpec {
    pub fn sample(&self, grid: &Grid2D) -> Result<Field2D> {
        let (nx, nt) = (grid.x.len(), grid.theta.len());
        let mut n = Field2D::constant(0.0, nx, nt);
        match self {
            InitSpec::Constant { value } => {
                if !(*value > 0.0) {
                    return Err(SelmutError::Config(format!(
                        "initial density must be positive, got {value}"
                    )));
                }
                n.values.fill(*value);
            }
            InitSpec::Gaussian { center, width, amplitude } => {
                if !(*width > 0.0) || !(*amplitude > 0.0) {
                    return Err(SelmutError::Config(format!(
                        "gaussian init needs positive width and amplitude, got {width} and {amplitude}"
                    )));
                }
                for j in 0..nx {
                    for m in 0..nt {
                        let z = (grid.theta.nodes[m] - center) / width;
                        *n.at_mut(j, m) = amplitude * (-z * z).exp();
                    }
                }
            }
            InitSpec::Loaded { values } => {
                if values.len() != nx * nt {
                    return Err(SelmutError::Config(format!(
                        "loaded state has {} values, grid needs {}",
                        values.len(),
                        nx * nt
                    )));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(SelmutError::Config(
                        "loaded state must be finite and nonnegative".into(),
                    ));
                }
                n.values.copy_from_slice(values);
            }
        }
        Ok(n)
    }
}

/// Population density together with its marginal competition field.
#[derive(Debug, Clone)]
pub struct PopulationState {
    pub n: Field2D,
    pub rho: Field1D,
    pub time: f64,
    pub step_count: u64,
}

impl PopulationState {
    pub fn from_density(n: Field2D, grid: &Grid2D, time: f64, step_count: u64) -> Self {
        let rho = total_density(&n, grid);
        Self { n, rho, time, step_count }
    }
}

/// `rho(x_j) = int n(x_j, theta) dtheta` by midpoint quadrature.
pub fn total_density(n: &Field2D, grid: &Grid2D) -> Field1D {
    let (nx, nt) = (n.n_x, n.n_theta);
    let h = grid.theta.h;
    let mut rho = vec![0.0; nx];
    for (j, r) in rho.iter_mut().enumerate() {
        *r = (0..nt).map(|m| n.at(j, m)).sum::<f64>() * h;
    }
    Field1D(rho)
}

/// Total mass `int int n` together with pointwise min and max of the density.
pub fn mass_min_max(n: &Field2D, grid: &Grid2D) -> (f64, f64, f64) {
    let w = grid.weights();
    let mass = w.iter().zip(&n.values).map(|(&w, &v)| w * v).sum();
    (mass, n.min(), n.max())
}

/// Mass and `rho` bounds of a computed equilibrium, with the discrete
/// maximum-principle check `rho_max <= sup R + tol`.
#[derive(Debug, Clone, Copy)]
pub struct MassReport {
    pub mass: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub ok_upper: bool,
}

pub fn mass_and_bounds(result: &EquilibriumResult, scen: &Scenario) -> MassReport {
    let rho = &result.state.rho.0;
    let rho_min = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let rho_max = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sup_r = scen.growth.max();
    let tol = 1e-6 * scen.growth_bound;
    MassReport { mass: result.mass, rho_min, rho_max, ok_upper: rho_max <= sup_r + tol }
}

/// Residual of the stationary system itself: `max |A n - n (R - kappa rho)|`
/// scaled by `max |n|`, an independent validator of the steady-state detector.
pub fn elliptic_residual(scen: &Scenario, epsilon: f64, state: &PopulationState) -> Result<f64> {
    let op = assemble_2d(scen, epsilon, None)?;
    let (nx, nt) = (scen.grid.x.len(), scen.grid.theta.len());
    let mut out = vec![0.0; nx * nt];
    op.apply(&state.n.values, &mut out);
    // op has potential -R, so out = (diffusion)n - R n; the steady system
    // reads (diffusion)n = n (R - kappa rho), i.e. out + kappa rho n = 0.
    let kappa = scen.cfg.kappa;
    let mut res: f64 = 0.0;
    for j in 0..nx {
        let c = kappa * state.rho.0[j];
        for m in 0..nt {
            let i = j * nt + m;
            res = res.max((out[i] + c * state.n.values[i]).abs());
        }
    }
    Ok(res / state.n.max_abs().max(f64::MIN_POSITIVE))
}

/// One semi-implicit step of size `dt`. Returns the weighted-CG iteration
/// count. `op` must hold the potential `kappa rho - R` of the current state.
pub fn step(
    scen: &Scenario,
    op: &LinOp2D,
    n: &mut Field2D,
    dt: f64,
    work: &mut StepWork,
) -> Result<usize> {
    let sz = n.values.len();
    let margin = 1e-6;
    // Row sums of (I + dt A) equal 1 + dt q; all must stay positive for the
    // M-matrix/positivity argument (and for definiteness of the CG system).
    let q_min = op.potential.iter().fold(f64::INFINITY, |a, &q| a.min(q));
    if 1.0 + dt * q_min <= margin {
        return Err(SelmutError::DtTooLarge { dt });
    }
    let diag_a = op.diagonal();
    for i in 0..sz {
        work.diag[i] = 1.0 + dt * diag_a[i];
        work.inv_diag[i] = 1.0 / work.diag[i];
    }
    work.rhs.copy_from_slice(&n.values);
    let apply = |u: &[f64], out: &mut [f64]| {
        op.apply(u, out);
        for i in 0..u.len() {
            out[i] = u[i] + dt * out[i];
        }
    };
    let outcome = linalg::cg_weighted(
        apply,
        op.weights(),
        &work.inv_diag,
        &work.rhs,
        &mut n.values,
        scen.cfg.solver.linear_tol,
        500_000,
    )?;
    // (I + dt A)^{-1} dominates the inverse of its diagonal entrywise, so
    // this floor is a rigorous pointwise lower bound on the exact solution.
    for i in 0..sz {
        let lo = work.rhs[i] / work.diag[i];
        if n.values[i] < lo {
            n.values[i] = lo;
        }
    }
    Ok(outcome.iterations)
}

/// Scratch buffers reused across steps.
pub struct StepWork {
    pub diag: Vec<f64>,
    pub inv_diag: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl StepWork {
    pub fn new(sz: usize) -> Self {
        Self { diag: vec![0.0; sz], inv_diag: vec![0.0; sz], rhs: vec![0.0; sz] }
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub state: PopulationState,
    pub steps: u64,
    pub dt_final: f64,
    /// `max |n_next - n| / dt` at the accepted final step.
    pub residual: f64,
    pub mass: f64,
    pub converged: bool,
}

/// March the semi-implicit scheme to a steady state. `epsilon` overrides the
/// scenario's mutation scale (the same scenario is reused across a ladder of
/// epsilon values).
pub fn solve_equilibrium(scen: &Scenario, epsilon: f64, init: &InitSpec) -> Result<EquilibriumResult> {
    if !(epsilon > 0.0) {
        return Err(SelmutError::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    let grid = &scen.grid;
    let mut n = init.sample(grid)?;
    let sz = n.values.len();
    let mut op = assemble_2d(scen, epsilon, None)?;
    // keep -R; per-step potential is kappa rho - R
    let neg_growth = op.potential.clone();
    let (nx, nt) = (grid.x.len(), grid.theta.len());
    let kappa = scen.cfg.kappa;
    let p = &scen.cfg.solver;
    let mut dt = p.dt0;
    // tightened whenever a step is rejected, so dt growth does not cycle
    // through the same rejection forever
    let mut dt_ceiling = p.dt_max;
    let dt_floor = 1e-12 * p.dt0;
    let mut work = StepWork::new(sz);
    let mut prev = vec![0.0; sz];
    let mut potential = vec![0.0; sz];
    let mut residual = f64::INFINITY;
    let mut steps_at_dt: u64 = 0;
    let mut steps: u64 = 0;
    let mut time = 0.0;
    while steps < p.max_steps {
        let rho = total_density(&n, grid);
        for j in 0..nx {
            let c = kappa * rho.0[j];
            for m in 0..nt {
                let i = j * nt + m;
                potential[i] = neg_growth[i] + c;
            }
        }
        op.set_potential(&potential);
        prev.copy_from_slice(&n.values);
        match step(scen, &op, &mut n, dt, &mut work) {
            Ok(cg_iters) => {
                if steps % 200 == 0 && std::env::var_os("SELMUT_TRACE").is_some() {
                    eprintln!(
                        "trace: step {steps} dt {dt:.3} cg {cg_iters} residual {residual:.3e}"
                    );
                }
            }
            Err(SelmutError::DtTooLarge { .. }) => {
                dt *= 0.5;
                dt_ceiling = dt;
                steps_at_dt = 0;
                if dt < dt_floor {
                    return Err(SelmutError::DtTooLarge { dt });
                }
                continue;
            }
            Err(e) => return Err(e),
        }
        steps += 1;
        steps_at_dt += 1;
        time += dt;
        let mut delta: f64 = 0.0;
        for i in 0..sz {
            delta = delta.max((n.values[i] - prev[i]).abs());
        }
        residual = delta / (dt * max_abs(&prev).max(f64::MIN_POSITIVE));
        if residual <= p.steady_tol {
            return Ok(EquilibriumResult {
                mass: mass_min_max(&n, grid).0,
                state: PopulationState::from_density(n, grid, time, steps),
                steps,
                dt_final: dt,
                residual,
                converged: true,
            });
        }
        if steps_at_dt >= p.dt_growth_every && dt < dt_ceiling {
            dt = (dt * p.dt_growth).min(dt_ceiling);
            steps_at_dt = 0;
        }
    }
    Ok(EquilibriumResult {
        mass: mass_min_max(&n, grid).0,
        state: PopulationState::from_density(n, grid, time, steps),
        steps,
        dt_final: dt,
        residual,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SpatialDomain;
    use crate::model::{
        DetectionParams, GrowthSpec, KernelShape, KernelSpec, ScenarioConfig, SolverParams,
    };

    fn scenario(growth: GrowthSpec) -> Scenario {
        Scenario::build(ScenarioConfig {
            domain: SpatialDomain::interval(-1.0, 1.0).unwrap(),
            trait_half_width: 2.0,
            epsilon: 0.2,
            growth,
            kernel: KernelSpec::new(KernelShape::Constant { k0: 1.0 }),
            kappa: 1.0,
            sigma_x: 1.0,
            h_x: 0.25,
            h_theta: 0.25,
            solver: SolverParams::default(),
            detect: DetectionParams::default(),
        })
        .unwrap()
    }

    #[test]
    fn init_specs_validate() {
        let scen = scenario(GrowthSpec::QuadraticTrait { r: 1.0, g: 0.0, theta0: 0.0 });
        assert!(InitSpec::Constant { value: 0.0 }.sample(&scen.grid).is_err());
        assert!(InitSpec::Gaussian { center: 0.0, width: -1.0, amplitude: 1.0 }
            .sample(&scen.grid)
            .is_err());
        assert!(InitSpec::Loaded { values: vec![1.0; 3] }.sample(&scen.grid).is_err());
        let n = InitSpec::Gaussian { center: 0.5, width: 0.3, amplitude: 2.0 }
            .sample(&scen.grid)
            .unwrap();
        assert!(n.max() <= 2.0 && n.min() > 0.0);
    }

    #[test]
    fn total_density_constant_field() {
        let scen = scenario(GrowthSpec::QuadraticTrait { r: 1.0, g: 0.0, theta0: 0.0 });
        let n = Field2D::constant(0.5, scen.grid.x.len(), scen.grid.theta.len());
        let rho = total_density(&n, &scen.grid);
        // int over (-A, A): 0.5 * 4 = 2
        for &r in &rho.0 {
            assert!((r - 2.0).abs() < 1e-13);
        }
        let (mass, lo, hi) = mass_min_max(&n, &scen.grid);
        // |Omega| * 2A * 0.5 = 2 * 4 * 0.5
        assert!((mass - 4.0).abs() < 1e-12);
        assert_eq!((lo, hi), (0.5, 0.5));
    }

    #[test]
    fn single_step_matches_scalar_recursion() {
        // Flat growth and flat state: the operator reduces to the scalar
        // relation (1 + dt (kappa rho - r)) n_next = n.
        let scen = scenario(GrowthSpec::QuadraticTrait { r: 1.0, g: 0.0, theta0: 0.0 });
        let grid = &scen.grid;
        let n0 = 0.1;
        let mut n = Field2D::constant(n0, grid.x.len(), grid.theta.len());
        let rho0 = n0 * 4.0;
        let mut op = assemble_2d(&scen, 0.2, None).unwrap();
        let q: Vec<f64> = op.potential.iter().map(|&p| p + rho0).collect();
        op.set_potential(&q);
        let dt = 0.3;
        let mut work = StepWork::new(n.values.len());
        step(&scen, &op, &mut n, dt, &mut work).unwrap();
        let expect = n0 / (1.0 + dt * (rho0 - 1.0));
        for &v in &n.values {
            assert!((v - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn step_rejects_too_large_dt() {
        let scen = scenario(GrowthSpec::QuadraticTrait { r: 100.0, g: 0.0, theta0: 0.0 });
        let grid = &scen.grid;
        let mut n = Field2D::constant(0.1, grid.x.len(), grid.theta.len());
        let op = assemble_2d(&scen, 0.2, None).unwrap(); // potential -100 everywhere
        let mut work = StepWork::new(n.values.len());
        match step(&scen, &op, &mut n, 0.1, &mut work) {
            Err(SelmutError::DtTooLarge { .. }) => {}
            other => panic!("expected DtTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn homogeneous_equilibrium() {
        // Flat growth r = 1, kappa = 1: steady state has rho == 1, so
        // n == 1 / (2A) = 0.25 everywhere.
        let scen = scenario(GrowthSpec::QuadraticTrait { r: 1.0, g: 0.0, theta0: 0.0 });
        let res =
            solve_equilibrium(&scen, 0.2, &InitSpec::Constant { value: 0.05 }).unwrap();
        assert!(res.converged, "residual {}", res.residual);
        for &v in &res.state.n.values {
            assert!((v - 0.25).abs() < 1e-6, "n = {v}");
        }
        for &r in &res.state.rho.0 {
            assert!((r - 1.0).abs() < 1e-6);
        }
        // mass = |Omega| * rho = 2
        assert!((res.mass - 2.0).abs() < 1e-6);
    }

    #[test]
    fn decay_without_growth_preserves_positivity() {
        // R == 0: mass strictly decreases, density stays positive.
        let scen = scenario(GrowthSpec::QuadraticTrait { r: 0.0, g: 0.0, theta0: 0.0 });
        let grid = &scen.grid;
        let mut n = InitSpec::Gaussian { center: 0.0, width: 0.5, amplitude: 1.0 }
            .sample(grid)
            .unwrap();
        let mut op = assemble_2d(&scen, 0.2, None).unwrap();
        let mut work = StepWork::new(n.values.len());
        let (nx, nt) = (grid.x.len(), grid.theta.len());
        let mut mass_prev = mass_min_max(&n, grid).0;
        for _ in 0..20 {
            let rho = total_density(&n, grid);
            let mut q = vec![0.0; nx * nt];
            for j in 0..nx {
                for m in 0..nt {
                    q[j * nt + m] = rho.0[j];
                }
            }
            op.set_potential(&q);
            step(&scen, &op, &mut n, 0.5, &mut work).unwrap();
            let (mass, lo, _) = mass_min_max(&n, grid);
            assert!(lo > 0.0, "positivity lost: min = {lo}");
            assert!(mass < mass_prev);
            mass_prev = mass;
        }
    }

    #[test]
    fn equilibrium_concentrates_at_optimal_trait() {
        // Trait-selective growth: the steady density peaks near theta0.
        let scen = scenario(GrowthSpec::QuadraticTrait { r: 1.0, g: 1.0, theta0: 0.5 });
        let res =
            solve_equilibrium(&scen, 0.2, &InitSpec::Constant { value: 0.1 }).unwrap();
        assert!(res.converged);
        let n = &res.state.n;
        let (nx, nt) = (n.n_x, n.n_theta);
        for j in 0..nx {
            let m_star = (0..nt).max_by(|&a, &b| n.at(j, a).partial_cmp(&n.at(j, b)).unwrap()).unwrap();
            let peak = scen.grid.theta.nodes[m_star];
            assert!((peak - 0.5).abs() <= 2.0 * scen.grid.theta.h, "peak at {peak}");
        }
    }

    #[test]
    fn dt_recovery_from_aggressive_start() {
        // Large dt0 violates the row-sum condition at first; the driver halves
        // dt and still converges.
        let mut cfg = scenario(GrowthSpec::QuadraticTrait { r: 1.0, g: 0.0, theta0: 0.0 }).cfg;
        cfg.solver.dt0 = 50.0;
        let scen = Scenario::build(cfg).unwrap();
        let res =
            solve_equilibrium(&scen, 0.2, &InitSpec::Constant { value: 0.01 }).unwrap();
        assert!(res.converged);
        for &v in &res.state.n.values {
            assert!((v - 0.25).abs() < 1e-6);
        }
    }
}
