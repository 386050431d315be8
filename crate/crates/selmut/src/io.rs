//! File output: `key: value` reports, comma-separated tables with
//! `#`-prefixed headers, equilibrium checkpoints, and run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::render_config;
use crate::domain::Field2D;
use crate::error::{Result, SelmutError};
use crate::model::{Scenario, ScenarioConfig};

/// FNV-1a hash of the canonical config rendering; identifies a scenario in
/// checkpoints and manifests.
pub fn scenario_hash(cfg: &ScenarioConfig) -> u64 {
    let text = render_config(cfg);
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// `key: value` lines.
pub fn render_report(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}: {v}");
    }
    out
}

/// Comma-separated table with a `#`-prefixed header row.
pub fn render_table(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", columns.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Checkpoint: `#`-prefixed header (grid descriptors, epsilon, scenario hash)
/// followed by one comma-separated row of theta values per spatial node, in
/// x-major order.
pub fn render_checkpoint(scen: &Scenario, epsilon: f64, n: &Field2D) -> String {
    let mut out = String::new();
    let comps: Vec<String> = scen
        .cfg
        .domain
        .components()
        .iter()
        .map(|(a, b)| format!("[{a},{b}]"))
        .collect();
    let _ = writeln!(out, "# selmut checkpoint v1");
    let _ = writeln!(out, "# components: {}", comps.join(","));
    let _ = writeln!(out, "# n_x: {}", scen.grid.x.len());
    let _ = writeln!(out, "# n_theta: {}", scen.grid.theta.len());
    let _ = writeln!(out, "# trait_half_width: {}", scen.cfg.trait_half_width);
    let _ = writeln!(out, "# epsilon: {epsilon}");
    let _ = writeln!(out, "# scenario_hash: {:016x}", scenario_hash(&scen.cfg));
    let _ = writeln!(out, "# layout: x-major, one row per spatial node");
    let nt = scen.grid.theta.len();
    for j in 0..scen.grid.x.len() {
        let cells: Vec<String> = (0..nt).map(|m| format!("{:.17e}", n.at(j, m))).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub n_x: usize,
    pub n_theta: usize,
    pub epsilon: f64,
    pub scenario_hash: Option<u64>,
    pub values: Vec<f64>,
}

/// Parse a checkpoint; the caller validates the hash against its scenario.
pub fn parse_checkpoint(text: &str) -> Result<Checkpoint> {
    let mut n_x = None;
    let mut n_theta = None;
    let mut epsilon = None;
    let mut hash = None;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((k, v)) = rest.split_once(':') {
                let v = v.trim();
                match k.trim() {
                    "n_x" => n_x = v.parse::<usize>().ok(),
                    "n_theta" => n_theta = v.parse::<usize>().ok(),
                    "epsilon" => epsilon = v.parse::<f64>().ok(),
                    "scenario_hash" => hash = u64::from_str_radix(v, 16).ok(),
                    _ => {}
                }
            }
            continue;
        }
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                SelmutError::Config(format!("checkpoint: `{cell}` is not a number"))
            })?;
            values.push(v);
        }
    }
    let n_x = n_x.ok_or_else(|| SelmutError::Config("checkpoint missing n_x header".into()))?;
    let n_theta =
        n_theta.ok_or_else(|| SelmutError::Config("checkpoint missing n_theta header".into()))?;
    let epsilon =
        epsilon.ok_or_else(|| SelmutError::Config("checkpoint missing epsilon header".into()))?;
    if values.len() != n_x * n_theta {
        return Err(SelmutError::Config(format!(
            "checkpoint has {} values, header declares {}x{}",
            values.len(),
            n_x,
            n_theta
        )));
    }
    Ok(Checkpoint { n_x, n_theta, epsilon, scenario_hash: hash, values })
}

/// What a run produced, written next to its outputs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub scenario_hash: u64,
    pub subcommand: String,
    pub config_text: String,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_secs: f64,
    pub summary: Vec<(String, String)>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario_hash: {:016x}", self.scenario_hash);
        let _ = writeln!(out, "subcommand: {}", self.subcommand);
        let _ = writeln!(out, "wall_clock_secs: {:.3}", self.wall_clock_secs);
        for (k, v) in &self.summary {
            let _ = writeln!(out, "{k}: {v}");
        }
        for p in &self.outputs {
            let _ = writeln!(out, "output: {}", p.display());
        }
        out.push_str("config:\n");
        for line in self.config_text.lines() {
            let _ = writeln!(out, "  {line}");
        }
        out
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const MINIMAL: &str = "\
domain.components = [-2,2]
trait.A = 2
grid.hx = 0.5
grid.htheta = 0.5
model.epsilon = 0.1
growth.variant = quadratic-space
growth.r = 1
growth.g = 0.1
growth.b = 1
kernel.variant = constant
kernel.k0 = 1
";

    #[test]
    fn hash_is_stable_and_sensitive() {
        let cfg = parse_config(MINIMAL).unwrap();
        let h1 = scenario_hash(&cfg);
        let h2 = scenario_hash(&cfg);
        assert_eq!(h1, h2);
        let other = parse_config(&MINIMAL.replace("growth.g = 0.1", "growth.g = 0.2")).unwrap();
        assert_ne!(h1, scenario_hash(&other));
    }

    #[test]
    fn checkpoint_roundtrip() {
        let cfg = parse_config(MINIMAL).unwrap();
        let scen = Scenario::build(cfg).unwrap();
        let (nx, nt) = (scen.grid.x.len(), scen.grid.theta.len());
        let mut n = Field2D::constant(0.0, nx, nt);
        for (i, v) in n.values.iter_mut().enumerate() {
            *v = 0.25 + (i as f64) * 1e-3;
        }
        let text = render_checkpoint(&scen, 0.1, &n);
        let ck = parse_checkpoint(&text).unwrap();
        assert_eq!((ck.n_x, ck.n_theta), (nx, nt));
        assert_eq!(ck.epsilon, 0.1);
        assert_eq!(ck.scenario_hash, Some(scenario_hash(&scen.cfg)));
        assert_eq!(ck.values, n.values);
    }

    #[test]
    fn checkpoint_size_mismatch_rejected() {
        let text = "# n_x: 2\n# n_theta: 3\n# epsilon: 0.1\n1,2,3\n4,5\n";
        assert!(parse_checkpoint(text).is_err());
    }

    #[test]
    fn table_and_report_formats() {
        let t = render_table(&["theta", "lambda"], &[vec![0.5, -1.0]]);
        assert!(t.starts_with("# theta,lambda\n"));
        assert_eq!(t.lines().count(), 2);
        let r = render_report(&[("mass".into(), "2.0".into())]);
        assert_eq!(r, "mass: 2.0\n");
    }
}
