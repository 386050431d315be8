//! Small-mutation diagnostics on computed equilibria: the logarithmic
//! transform `u = eps ln n`, the Hamilton-Jacobi residual against the
//! eigenvalue curve, emergent-trait detection, Harnack and Lipschitz
//! regularity monitors, and the convergence study of the 2-D principal
//! eigenvalue toward the 1-D one.

use crate::domain::{Field1D, Field2D};
use crate::error::{Result, SelmutError};
use crate::model::{validate_survival_assumption, Scenario};
use crate::operators::{assemble_1d, SelfAdjointOp};
use crate::spectral::{self, principal_eigenvalue_2d};

/// `u = eps ln n`: concentration profiles become order-one fields.
#[derive(Debug, Clone)]
pub struct HopfColeField {
    pub u: Field2D,
    pub epsilon: f64,
}

pub fn hopf_cole(n: &Field2D, epsilon: f64) -> Result<HopfColeField> {
    if !(epsilon > 0.0) {
        return Err(SelmutError::Usage(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut u = n.clone();
    for v in &mut u.values {
        if !(*v > 0.0) {
            return Err(SelmutError::Model(format!(
                "log transform needs a strictly positive density; found {v}"
            )));
        }
        *v = epsilon * v.ln();
    }
    Ok(HopfColeField { u, epsilon })
}

/// The limiting profile satisfies `max u = 0`; the gap measures how far a
/// finite-eps equilibrium is from that constraint. `u_max` is the signed
/// maximum, monitored against the one-sided bound `limsup u <= 0`.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintGap {
    pub gap: f64,
    pub u_max: f64,
}

pub fn constraint_gap(u: &HopfColeField) -> ConstraintGap {
    let u_max = u.u.max();
    ConstraintGap { gap: u_max.abs(), u_max }
}

#[derive(Debug, Clone, Copy)]
pub struct HjRow {
    pub theta: f64,
    pub u_bar: f64,
    /// `|d u_bar / d theta|^2` by centered differences.
    pub grad_sq: f64,
    pub lambda: f64,
    /// `| grad_sq - lambda |`.
    pub residual: f64,
    pub on_support: bool,
}

#[derive(Debug, Clone)]
pub struct HjResidual {
    pub per_theta: Vec<HjRow>,
    /// Sup of the residual over the near-support set `{u_bar >= -sqrt(eps)}`.
    pub sup_on_support: f64,
}

/// Residual of `|d u_bar/d theta|^2 = lambda(theta, rho)` where
/// `u_bar(theta) = max_x u(x, theta)`, restricted to the near-support set.
pub fn hj_residual(scen: &Scenario, u: &HopfColeField, rho: &Field1D) -> Result<HjResidual> {
    let (nx, nt) = (u.u.n_x, u.u.n_theta);
    let mut u_bar = vec![f64::NEG_INFINITY; nt];
    for j in 0..nx {
        for m in 0..nt {
            u_bar[m] = u_bar[m].max(u.u.at(j, m));
        }
    }
    let h = scen.grid.theta.h;
    let grad = |m: usize| -> f64 {
        if m == 0 {
            (u_bar[1] - u_bar[0]) / h
        } else if m + 1 == nt {
            (u_bar[nt - 1] - u_bar[nt - 2]) / h
        } else {
            (u_bar[m + 1] - u_bar[m - 1]) / (2.0 * h)
        }
    };
    let curve = spectral::lambda_curve(scen, rho, &scen.grid.theta.nodes)?;
    let support_floor = -u.epsilon.sqrt();
    let mut per_theta = Vec::with_capacity(nt);
    let mut sup = 0.0f64;
    for m in 0..nt {
        let g = grad(m);
        let grad_sq = g * g;
        let lambda = curve[m].1;
        let residual = (grad_sq - lambda).abs();
        let on_support = u_bar[m] >= support_floor;
        if on_support {
            sup = sup.max(residual);
        }
        per_theta.push(HjRow {
            theta: scen.grid.theta.nodes[m],
            u_bar: u_bar[m],
            grad_sq,
            lambda,
            residual,
            on_support,
        });
    }
    Ok(HjResidual { per_theta, sup_on_support: sup })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Monomorphic,
    Polymorphic,
    Extinct,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Monomorphic => write!(f, "Monomorphic"),
            Classification::Polymorphic => write!(f, "Polymorphic"),
            Classification::Extinct => write!(f, "Extinct"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmergentTrait {
    /// Mass-weighted centroid of the cluster.
    pub theta_hat: f64,
    pub mass_fraction: f64,
    /// Spatial profile of the cluster mass.
    pub x_profile: Field1D,
    /// Width of the cluster in theta.
    pub width: f64,
    /// Set when the cluster is wider than `10 sqrt(eps) * 2A` - the density
    /// has not concentrated and the centroid is not a meaningful trait.
    pub unconcentrated: bool,
}

#[derive(Debug, Clone)]
pub struct EmergentTraitReport {
    pub traits: Vec<EmergentTrait>,
    pub classification: Classification,
    pub total_mass: f64,
    pub peak_floor: f64,
    pub cluster_threshold: f64,
}

/// Cluster the trait marginal `N(theta) = int n dx` into mass peaks.
pub fn detect_emergent_traits(scen: &Scenario, n: &Field2D, epsilon: f64) -> EmergentTraitReport {
    let (nx, nt) = (n.n_x, n.n_theta);
    let wx = &scen.grid.x.weights;
    let h = scen.grid.theta.h;
    let det = &scen.cfg.detect;
    let mut marginal = vec![0.0; nt];
    for m in 0..nt {
        marginal[m] = (0..nx).map(|j| n.at(j, m) * wx[j]).sum();
    }
    let total_mass: f64 = marginal.iter().sum::<f64>() * h;
    let a = scen.cfg.trait_half_width;
    let mass_floor = det.mass_floor_factor * scen.grid.x.total_length() * 2.0 * a;
    if total_mass < mass_floor {
        return EmergentTraitReport {
            traits: Vec::new(),
            classification: Classification::Extinct,
            total_mass,
            peak_floor: det.peak_floor,
            cluster_threshold: det.cluster_threshold,
        };
    }
    let peak = marginal.iter().cloned().fold(0.0f64, f64::max);
    let floor = det.peak_floor * peak;
    let mut traits = Vec::new();
    let mut m = 0;
    while m < nt {
        if marginal[m] < floor {
            m += 1;
            continue;
        }
        let start = m;
        while m < nt && marginal[m] >= floor {
            m += 1;
        }
        let end = m; // [start, end)
        let cluster_mass: f64 = marginal[start..end].iter().sum::<f64>() * h;
        let mass_fraction = cluster_mass / total_mass;
        if mass_fraction < det.cluster_threshold {
            continue;
        }
        let centroid = (start..end)
            .map(|i| scen.grid.theta.nodes[i] * marginal[i] * h)
            .sum::<f64>()
            / cluster_mass;
        let mut x_profile = vec![0.0; nx];
        for (j, p) in x_profile.iter_mut().enumerate() {
            *p = (start..end).map(|i| n.at(j, i)).sum::<f64>() * h;
        }
        let width = (end - start) as f64 * h;
        traits.push(EmergentTrait {
            theta_hat: centroid,
            mass_fraction,
            x_profile: Field1D(x_profile),
            width,
            unconcentrated: width > 10.0 * epsilon.sqrt() * 2.0 * a,
        });
    }
    let classification = match traits.len() {
        0 => Classification::Extinct,
        1 => Classification::Monomorphic,
        _ => Classification::Polymorphic,
    };
    EmergentTraitReport {
        traits,
        classification,
        total_mass,
        peak_floor: det.peak_floor,
        cluster_threshold: det.cluster_threshold,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HarnackStrip {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct HarnackReport {
    pub max_ratio: f64,
    pub per_strip: Vec<HarnackStrip>,
}

/// `sup n / inf n` over `Omega x I` for trait strips `I` of width `eps`,
/// tiled deterministically from `-A`; the last strip is anchored at the upper
/// boundary so no strip is narrower than `eps`.
pub fn harnack_ratio(scen: &Scenario, n: &Field2D, epsilon: f64) -> Result<HarnackReport> {
    let h = scen.grid.theta.h;
    if h > epsilon {
        return Err(SelmutError::Usage(format!(
            "Harnack strips need h_theta <= epsilon; got h_theta = {h}, epsilon = {epsilon}"
        )));
    }
    let a = scen.cfg.trait_half_width;
    let (nx, nt) = (n.n_x, n.n_theta);
    let mut strips = Vec::new();
    let n_full = ((2.0 * a) / epsilon).floor() as usize;
    for i in 0..n_full.max(1) {
        let lo = -a + i as f64 * epsilon;
        strips.push((lo, lo + epsilon));
    }
    if let Some(&(_, hi)) = strips.last() {
        if hi < a - 1e-12 * a.max(1.0) {
            strips.push((a - epsilon, a));
        }
    }
    let mut per_strip = Vec::with_capacity(strips.len());
    let mut max_ratio = 0.0f64;
    for (lo, hi) in strips {
        let mut s_max = f64::NEG_INFINITY;
        let mut s_min = f64::INFINITY;
        for m in 0..nt {
            let t = scen.grid.theta.nodes[m];
            if t < lo || t > hi {
                continue;
            }
            for j in 0..nx {
                let v = n.at(j, m);
                s_max = s_max.max(v);
                s_min = s_min.min(v);
            }
        }
        if !s_min.is_finite() {
            continue; // empty strip cannot occur when h <= eps, but stay safe
        }
        let ratio = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
        max_ratio = max_ratio.max(ratio);
        per_strip.push(HarnackStrip { theta_lo: lo, theta_hi: hi, ratio });
    }
    Ok(HarnackReport { max_ratio, per_strip })
}

#[derive(Debug, Clone, Copy)]
pub struct LipschitzNorms {
    /// `max |du/dx| / eps`; bounded along an eps-ladder when `|du/dx| = O(eps)`.
    pub lip_x_over_eps: f64,
    pub lip_theta: f64,
}

/// Gradient bounds of the transformed field: centered differences inside each
/// spatial component (one-sided at component edges) and along theta.
pub fn lipschitz_norms(scen: &Scenario, u: &HopfColeField) -> LipschitzNorms {
    let (nx, nt) = (u.u.n_x, u.u.n_theta);
    let mut lip_x = 0.0f64;
    for (c, &(s, e)) in scen.grid.x.comp_ranges.iter().enumerate() {
        let h = scen.grid.x.comp_h[c];
        for m in 0..nt {
            for j in s..e {
                let d = if j == s {
                    (u.u.at(j + 1, m) - u.u.at(j, m)) / h
                } else if j == e - 1 {
                    (u.u.at(j, m) - u.u.at(j - 1, m)) / h
                } else {
                    (u.u.at(j + 1, m) - u.u.at(j - 1, m)) / (2.0 * h)
                };
                lip_x = lip_x.max(d.abs());
            }
        }
    }
    let h = scen.grid.theta.h;
    let mut lip_theta = 0.0f64;
    for j in 0..nx {
        for m in 0..nt {
            let d = if m == 0 {
                (u.u.at(j, 1) - u.u.at(j, 0)) / h
            } else if m + 1 == nt {
                (u.u.at(j, nt - 1) - u.u.at(j, nt - 2)) / h
            } else {
                (u.u.at(j, m + 1) - u.u.at(j, m - 1)) / (2.0 * h)
            };
            lip_theta = lip_theta.max(d.abs());
        }
    }
    LipschitzNorms { lip_x_over_eps: lip_x / u.epsilon, lip_theta }
}

/// For a monomorphic equilibrium with trait `theta_bar`, `rho` itself should
/// satisfy the 1-D equation `sigma_x(-d_xx + L) rho = rho (R(., theta_bar) -
/// kappa rho)`; returns the sup-norm defect relative to `max rho`.
pub fn rho_eigen_residual(scen: &Scenario, rho: &Field1D, theta_bar: f64) -> Result<f64> {
    let op = assemble_1d(scen, theta_bar, rho)?;
    let n = op.len();
    let mut out = vec![0.0; n];
    // potential is kappa-free: -(R - rho); rebuild with kappa rho instead
    op.apply(&rho.0, &mut out);
    let kappa = scen.cfg.kappa;
    let mut res = 0.0f64;
    for j in 0..n {
        // op gives sigma(-dxx+L)rho - (R - rho)rho; correct the competition
        // term to kappa rho^2 so the defect matches the stationary equation.
        let defect = out[j] + (kappa - 1.0) * rho.0[j] * rho.0[j];
        res = res.max(defect.abs());
    }
    let scale = rho.0.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if scale == 0.0 {
        return Err(SelmutError::Usage("rho is identically zero".into()));
    }
    Ok(res / scale)
}

#[derive(Debug, Clone, Copy)]
pub struct MuRow {
    pub epsilon: f64,
    pub mu: f64,
    /// `|mu - lambda(theta0, 0)|`.
    pub gap: f64,
    /// `mu < lambda(theta0, 0) / 2` (meaningful when the reference is < 0).
    pub h5: bool,
}

#[derive(Debug, Clone)]
pub struct MuStudy {
    pub theta0_hat: f64,
    /// Reference value `lambda(theta0, 0)`.
    pub lambda_ref: f64,
    pub rows: Vec<MuRow>,
}

/// Ladder of 2-D principal eigenvalues against the refined minimum of
/// `lambda(., 0)`.
pub fn mu_convergence_study(scen: &Scenario, epsilons: &[f64]) -> Result<MuStudy> {
    let survival = validate_survival_assumption(scen)?;
    if !survival.satisfied {
        return Err(SelmutError::Model(format!(
            "survival assumption fails: min lambda(theta, 0) = {} >= 0",
            survival.lambda_min
        )));
    }
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let pair = principal_eigenvalue_2d(scen, eps)?;
        rows.push(MuRow {
            epsilon: eps,
            mu: pair.value,
            gap: (pair.value - survival.lambda_min).abs(),
            h5: pair.value < survival.lambda_min / 2.0,
        });
    }
    Ok(MuStudy { theta0_hat: survival.theta0_hat, lambda_ref: survival.lambda_min, rows })
}

#[derive(Debug, Clone, Copy)]
pub struct SupportInclusion {
    pub theta_hat: f64,
    /// `u_bar(theta_hat) >= max u_bar - sqrt(eps)`.
    pub near_max_u: bool,
    /// `lambda(theta_hat, rho) <= min lambda + tol`.
    pub near_min_lambda: bool,
    /// x-profile strictly positive at every spatial node.
    pub x_spread_positive: bool,
}

#[derive(Debug, Clone)]
pub struct AsymptoticsReport {
    pub constraint_gap: f64,
    pub u_max: f64,
    pub hj_sup_on_support: f64,
    pub harnack_max_ratio: f64,
    pub lipschitz_x_over_eps: f64,
    pub lipschitz_theta: f64,
    pub lambda_min_at_rho: f64,
    pub lambda_argmin: f64,
    pub inclusion: Vec<SupportInclusion>,
    pub traits: EmergentTraitReport,
}

/// Run the full diagnostic battery on one equilibrium.
pub fn analyze(scen: &Scenario, epsilon: f64, n: &Field2D, rho: &Field1D) -> Result<AsymptoticsReport> {
    let u = hopf_cole(n, epsilon)?;
    let gap = constraint_gap(&u);
    let hj = hj_residual(scen, &u, rho)?;
    let harnack = harnack_ratio(scen, n, epsilon)?;
    let lip = lipschitz_norms(scen, &u);
    let traits = detect_emergent_traits(scen, n, epsilon);
    let (lambda_argmin, lambda_min) = spectral::refined_lambda_minimum(scen, rho)?;
    let u_bar_max = hj.per_theta.iter().fold(f64::NEG_INFINITY, |a, r| a.max(r.u_bar));
    let tol_lambda = 10.0 * (scen.cfg.solver.eig_residual_tol + scen.cfg.h_x * scen.cfg.h_x);
    let mut inclusion = Vec::with_capacity(traits.traits.len());
    for t in &traits.traits {
        let m_near = hj
            .per_theta
            .iter()
            .min_by(|a, b| {
                (a.theta - t.theta_hat).abs().partial_cmp(&(b.theta - t.theta_hat).abs()).unwrap()
            })
            .unwrap();
        let lambda_at = spectral::principal_eigenpair_1d(scen, t.theta_hat, rho, None)?.value;
        inclusion.push(SupportInclusion {
            theta_hat: t.theta_hat,
            near_max_u: m_near.u_bar >= u_bar_max - epsilon.sqrt(),
            near_min_lambda: lambda_at <= lambda_min + tol_lambda,
            x_spread_positive: t.x_profile.0.iter().all(|&v| v > 0.0),
        });
    }
    Ok(AsymptoticsReport {
        constraint_gap: gap.gap,
        u_max: gap.u_max,
        hj_sup_on_support: hj.sup_on_support,
        harnack_max_ratio: harnack.max_ratio,
        lipschitz_x_over_eps: lip.lip_x_over_eps,
        lipschitz_theta: lip.lip_theta,
        lambda_min_at_rho: lambda_min,
        lambda_argmin,
        inclusion,
        traits,
    })
}
