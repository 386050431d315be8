//! Flat key-value scenario files.
//!
//! One `key = value` assignment per line, `#` comments. Example:
//!
//! ```text
//! domain.components = [-2,2]
//! trait.A = 2
//! grid.hx = 0.125
//! grid.htheta = 0.05
//! model.epsilon = 0.1
//! growth.variant = quadratic-space
//! growth.r = 1
//! growth.g = 0.1
//! growth.b = 1
//! kernel.variant = gaussian-floor
//! kernel.floor = 0.1
//! kernel.amplitude = 1
//! kernel.width = 1
//! ```

use std::collections::BTreeMap;

use crate::domain::SpatialDomain;
use crate::error::{Result, SelmutError};
use crate::model::{
    DetectionParams, GrowthSpec, KernelShape, KernelSpec, ScenarioConfig, SolverParams,
};

const KNOWN_KEYS: &[&str] = &[
    "domain.components",
    "trait.A",
    "grid.hx",
    "grid.htheta",
    "model.epsilon",
    "model.kappa",
    "model.sigma_x",
    "growth.variant",
    "growth.r",
    "growth.g",
    "growth.b",
    "growth.theta0",
    "kernel.variant",
    "kernel.k0",
    "kernel.floor",
    "kernel.amplitude",
    "kernel.width",
    "solver.dt0",
    "solver.dt_max",
    "solver.dt_growth",
    "solver.dt_growth_every",
    "solver.steady_tol",
    "solver.max_steps",
    "solver.linear_tol",
    "solver.eig_value_tol",
    "solver.eig_residual_tol",
    "solver.eig_max_iter",
    "detect.peak_floor",
    "detect.cluster_threshold",
    "detect.mass_floor_factor",
];

/// Parse a scenario file into raw key-value pairs, rejecting unknown keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let mut unknown = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            SelmutError::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            unknown.push(key.clone());
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(SelmutError::Config(format!("duplicate key `{key}`")));
        }
    }
    if !unknown.is_empty() {
        return Err(SelmutError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    Ok(map)
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<f64>()
            .map(Some)
            .map_err(|_| SelmutError::Config(format!("key `{key}`: `{v}` is not a number"))),
    }
}

fn require_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    get_f64(map, key)?.ok_or_else(|| SelmutError::Config(format!("missing required key `{key}`")))
}

fn get_u64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<u64>()
            .map(Some)
            .map_err(|_| SelmutError::Config(format!("key `{key}`: `{v}` is not an integer"))),
    }
}

/// Parse `[-2,2]` or `[-2.5,-1.5],[1.5,2.5]` into interval endpoints.
pub fn parse_components(value: &str) -> Result<Vec<(f64, f64)>> {
    let mut comps = Vec::new();
    let trimmed = value.trim();
    if trimmed.is_empty() {
        return Err(SelmutError::Config("domain.components is empty".into()));
    }
    let mut rest = trimmed;
    loop {
        let open = rest.find('[').ok_or_else(|| {
            SelmutError::Config(format!("domain.components: expected `[a,b]` in `{value}`"))
        })?;
        let close = rest[open..]
            .find(']')
            .map(|i| open + i)
            .ok_or_else(|| SelmutError::Config(format!("domain.components: unclosed `[` in `{value}`")))?;
        let inner = &rest[open + 1..close];
        let (a, b) = inner.split_once(',').ok_or_else(|| {
            SelmutError::Config(format!("domain.components: expected two endpoints in `[{inner}]`"))
        })?;
        let a: f64 = a.trim().parse().map_err(|_| {
            SelmutError::Config(format!("domain.components: `{a}` is not a number"))
        })?;
        let b: f64 = b.trim().parse().map_err(|_| {
            SelmutError::Config(format!("domain.components: `{b}` is not a number"))
        })?;
        comps.push((a, b));
        rest = rest[close + 1..].trim_start();
        if rest.is_empty() {
            break;
        }
        rest = rest
            .strip_prefix(',')
            .ok_or_else(|| {
                SelmutError::Config(format!("domain.components: expected `,` between intervals in `{value}`"))
            })?
            .trim_start();
    }
    Ok(comps)
}

/// Build a full [`ScenarioConfig`] from a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let map = parse_pairs(text)?;
    config_from_pairs(&map)
}

pub fn config_from_pairs(map: &BTreeMap<String, String>) -> Result<ScenarioConfig> {
    let comps_raw = map
        .get("domain.components")
        .ok_or_else(|| SelmutError::Config("missing required key `domain.components`".into()))?;
    let domain = SpatialDomain::new(parse_components(comps_raw)?)?;

    let growth = match map.get("growth.variant").map(String::as_str) {
        Some("quadratic-space") => GrowthSpec::QuadraticSpace {
            r: require_f64(map, "growth.r")?,
            g: require_f64(map, "growth.g")?,
            b: require_f64(map, "growth.b")?,
        },
        Some("quadratic-trait") => GrowthSpec::QuadraticTrait {
            r: require_f64(map, "growth.r")?,
            g: require_f64(map, "growth.g")?,
            theta0: require_f64(map, "growth.theta0")?,
        },
        Some(other) => {
            return Err(SelmutError::Config(format!(
                "growth.variant must be quadratic-space or quadratic-trait, got `{other}`"
            )))
        }
        None => return Err(SelmutError::Config("missing required key `growth.variant`".into())),
    };

    let kernel = match map.get("kernel.variant").map(String::as_str) {
        Some("constant") => {
            KernelSpec::new(KernelShape::Constant { k0: require_f64(map, "kernel.k0")? })
        }
        Some("gaussian-floor") => KernelSpec::new(KernelShape::GaussianFloor {
            floor: require_f64(map, "kernel.floor")?,
            amplitude: require_f64(map, "kernel.amplitude")?,
            width: require_f64(map, "kernel.width")?,
        }),
        Some(other) => {
            return Err(SelmutError::Config(format!(
                "kernel.variant must be constant or gaussian-floor, got `{other}`"
            )))
        }
        None => return Err(SelmutError::Config("missing required key `kernel.variant`".into())),
    };

    let d = SolverParams::default();
    let solver = SolverParams {
        dt0: get_f64(map, "solver.dt0")?.unwrap_or(d.dt0),
        dt_max: get_f64(map, "solver.dt_max")?.unwrap_or(d.dt_max),
        dt_growth: get_f64(map, "solver.dt_growth")?.unwrap_or(d.dt_growth),
        dt_growth_every: get_u64(map, "solver.dt_growth_every")?.unwrap_or(d.dt_growth_every),
        steady_tol: get_f64(map, "solver.steady_tol")?.unwrap_or(d.steady_tol),
        max_steps: get_u64(map, "solver.max_steps")?.unwrap_or(d.max_steps),
        linear_tol: get_f64(map, "solver.linear_tol")?.unwrap_or(d.linear_tol),
        eig_value_tol: get_f64(map, "solver.eig_value_tol")?.unwrap_or(d.eig_value_tol),
        eig_residual_tol: get_f64(map, "solver.eig_residual_tol")?.unwrap_or(d.eig_residual_tol),
        eig_max_iter: get_u64(map, "solver.eig_max_iter")?.unwrap_or(d.eig_max_iter as u64)
            as usize,
    };

    let dd = DetectionParams::default();
    let detect = DetectionParams {
        peak_floor: get_f64(map, "detect.peak_floor")?.unwrap_or(dd.peak_floor),
        cluster_threshold: get_f64(map, "detect.cluster_threshold")?.unwrap_or(dd.cluster_threshold),
        mass_floor_factor: get_f64(map, "detect.mass_floor_factor")?.unwrap_or(dd.mass_floor_factor),
    };

    let cfg = ScenarioConfig {
        domain,
        trait_half_width: require_f64(map, "trait.A")?,
        epsilon: require_f64(map, "model.epsilon")?,
        growth,
        kernel,
        kappa: get_f64(map, "model.kappa")?.unwrap_or(1.0),
        sigma_x: get_f64(map, "model.sigma_x")?.unwrap_or(1.0),
        h_x: require_f64(map, "grid.hx")?,
        h_theta: require_f64(map, "grid.htheta")?,
        solver,
        detect,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Render a config back to the flat key-value format (canonical form used
/// for hashing and manifests).
pub fn render_config(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let comps: Vec<String> =
        cfg.domain.components().iter().map(|(a, b)| format!("[{a},{b}]")).collect();
    out.push_str(&format!("domain.components = {}\n", comps.join(",")));
    out.push_str(&format!("trait.A = {}\n", cfg.trait_half_width));
    out.push_str(&format!("grid.hx = {}\n", cfg.h_x));
    out.push_str(&format!("grid.htheta = {}\n", cfg.h_theta));
    out.push_str(&format!("model.epsilon = {}\n", cfg.epsilon));
    out.push_str(&format!("model.kappa = {}\n", cfg.kappa));
    out.push_str(&format!("model.sigma_x = {}\n", cfg.sigma_x));
    match &cfg.growth {
        GrowthSpec::QuadraticSpace { r, g, b } => {
            out.push_str("growth.variant = quadratic-space\n");
            out.push_str(&format!("growth.r = {r}\ngrowth.g = {g}\ngrowth.b = {b}\n"));
        }
        GrowthSpec::QuadraticTrait { r, g, theta0 } => {
            out.push_str("growth.variant = quadratic-trait\n");
            out.push_str(&format!("growth.r = {r}\ngrowth.g = {g}\ngrowth.theta0 = {theta0}\n"));
        }
        GrowthSpec::Tabulated { values } => {
            out.push_str(&format!("# tabulated growth with {} values\n", values.len()));
        }
    }
    match cfg.kernel.shape {
        KernelShape::Constant { k0 } => {
            out.push_str(&format!("kernel.variant = constant\nkernel.k0 = {k0}\n"));
        }
        KernelShape::GaussianFloor { floor, amplitude, width } => {
            out.push_str("kernel.variant = gaussian-floor\n");
            out.push_str(&format!(
                "kernel.floor = {floor}\nkernel.amplitude = {amplitude}\nkernel.width = {width}\n"
            ));
        }
    }
    let s = &cfg.solver;
    out.push_str(&format!(
        "solver.dt0 = {}\nsolver.dt_max = {}\nsolver.dt_growth = {}\nsolver.dt_growth_every = {}\n",
        s.dt0, s.dt_max, s.dt_growth, s.dt_growth_every
    ));
    out.push_str(&format!(
        "solver.steady_tol = {}\nsolver.max_steps = {}\nsolver.linear_tol = {}\n",
        s.steady_tol, s.max_steps, s.linear_tol
    ));
    out.push_str(&format!(
        "solver.eig_value_tol = {}\nsolver.eig_residual_tol = {}\nsolver.eig_max_iter = {}\n",
        s.eig_value_tol, s.eig_residual_tol, s.eig_max_iter
    ));
    let det = &cfg.detect;
    out.push_str(&format!(
        "detect.peak_floor = {}\ndetect.cluster_threshold = {}\ndetect.mass_floor_factor = {}\n",
        det.peak_floor, det.cluster_threshold, det.mass_floor_factor
    ));
    out
}
