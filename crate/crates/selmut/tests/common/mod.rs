//! Shared helpers for integration tests: dense eigen/linear oracles built on
//! nalgebra, and randomized small scenarios.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use selmut::domain::SpatialDomain;
use selmut::model::{
    DetectionParams, GrowthSpec, KernelShape, KernelSpec, ScenarioConfig, SolverParams,
};
use selmut::operators::SelfAdjointOp;

/// Smallest eigenpair of a weighted-self-adjoint operator given its dense
/// (unweighted) matrix, via symmetrization `S = D^{1/2} M D^{-1/2}` and a
/// dense symmetric eigendecomposition.
pub fn dense_smallest(dense: &[f64], w: &[f64]) -> (f64, Vec<f64>) {
    let n = w.len();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            s[(j, k)] = dense[j * n + k] * sw[j] / sw[k];
        }
    }
    let s = (s.clone() + s.transpose()) * 0.5;
    let eig = s.symmetric_eigen();
    let mut idx = 0;
    for i in 1..n {
        if eig.eigenvalues[i] < eig.eigenvalues[idx] {
            idx = i;
        }
    }
    let z = eig.eigenvectors.column(idx);
    let mut psi: Vec<f64> = (0..n).map(|j| z[j] / sw[j]).collect();
    let norm: f64 = (0..n).map(|j| w[j] * psi[j] * psi[j]).sum::<f64>().sqrt();
    let sign = if psi.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    psi.iter_mut().for_each(|x| *x *= sign / norm);
    (eig.eigenvalues[idx], psi)
}

/// Dense matrix of any operator, built column-by-column; for small grids only.
pub fn dense_of_op<O: SelfAdjointOp>(op: &O) -> Vec<f64> {
    let n = op.len();
    let mut m = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for k in 0..n {
        e[k] = 1.0;
        op.apply(&e, &mut col);
        e[k] = 0.0;
        for j in 0..n {
            m[j * n + k] = col[j];
        }
    }
    m
}

/// Weighted L2 distance after sign alignment against `reference`.
pub fn eigvec_error(w: &[f64], reference: &[f64], candidate: &[f64]) -> f64 {
    let dot: f64 = (0..w.len()).map(|j| w[j] * reference[j] * candidate[j]).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    (0..w.len())
        .map(|j| {
            let d = candidate[j] * sign - reference[j];
            w[j] * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// A small random scenario (total spatial nodes <= `max_nodes`).
pub fn random_cfg(rng: &mut ChaCha8Rng, max_nodes: usize) -> ScenarioConfig {
    let two_patches = rng.gen_bool(0.5);
    let domain = if two_patches {
        let a = rng.gen_range(0.5..1.5);
        let d = rng.gen_range(0.2..1.0);
        SpatialDomain::new(vec![(-d - a, -d), (d, d + a)]).unwrap()
    } else {
        let l = rng.gen_range(1.0..4.0);
        SpatialDomain::interval(-l / 2.0, l / 2.0).unwrap()
    };
    let h_x = (domain.total_length() / (max_nodes as f64 - 2.0)).max(0.05);
    let growth = if rng.gen_bool(0.5) {
        GrowthSpec::QuadraticSpace {
            r: rng.gen_range(0.5..3.0),
            g: rng.gen_range(0.01..2.0),
            b: rng.gen_range(0.2..1.5),
        }
    } else {
        GrowthSpec::QuadraticTrait {
            r: rng.gen_range(0.5..3.0),
            g: rng.gen_range(0.01..2.0),
            theta0: rng.gen_range(-0.5..0.5),
        }
    };
    let kernel = if rng.gen_bool(0.5) {
        KernelSpec::new(KernelShape::Constant { k0: rng.gen_range(0.1..1.5) })
    } else {
        KernelSpec::new(KernelShape::GaussianFloor {
            floor: rng.gen_range(0.05..0.3),
            amplitude: rng.gen_range(0.5..1.5),
            width: rng.gen_range(0.5..2.0),
        })
    };
    ScenarioConfig {
        domain,
        trait_half_width: rng.gen_range(0.5..2.0),
        epsilon: 0.1,
        growth,
        kernel,
        kappa: 1.0,
        sigma_x: rng.gen_range(0.5..2.0),
        h_x,
        h_theta: 0.1,
        solver: SolverParams::default(),
        detect: DetectionParams::default(),
    }
}
