//! Structured-text configuration: model files, experiment parameter
//! files, pinned-environment fixtures, content digests, and run
//! manifests.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env::ExplicitEnvironment;
use crate::error::{DreError, Result};
use crate::fixed::{normalize_weights, Prob};
use crate::model::{Direction, EdgeSet, ModelSpec};

/// Lowercase hex digest used for provenance records.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

fn toml_err(e: toml::de::Error) -> DreError {
    DreError::Parse(e.to_string())
}

// ---------------------------------------------------------------------
// model configuration

/// Model file: either a named preset or explicit arrow-set lists with
/// weights. Directions are signed-axis tokens like "+1", "-2".
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: Option<String>,
    pub dimension: usize,
    /// Decimal in [0,1]; converted to exact fixed point.
    pub p: String,
    pub e_sets: Option<Vec<Vec<String>>>,
    pub f_sets: Option<Vec<Vec<String>>>,
    pub r: Option<Vec<String>>,
    pub q: Option<Vec<String>>,
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<ModelConfig> {
        toml::from_str(text).map_err(toml_err)
    }

    pub fn load(path: &Path) -> Result<ModelConfig> {
        let text = std::fs::read_to_string(path)?;
        ModelConfig::parse(&text)
    }

    pub fn build(&self) -> Result<ModelSpec> {
        let p = Prob::from_decimal_str(&self.p)?;
        if let Some(preset) = &self.preset {
            if self.e_sets.is_some()
                || self.f_sets.is_some()
                || self.r.is_some()
                || self.q.is_some()
            {
                return Err(DreError::Parse(
                    "a preset model takes no explicit sets or weights".into(),
                ));
            }
            return match preset.as_str() {
                "orthant" => Ok(ModelSpec::orthant(self.dimension, p)),
                "half-orthant" => Ok(ModelSpec::half_orthant(self.dimension, p)),
                other => Err(DreError::Parse(format!(
                    "unknown preset {other:?}; expected orthant or half-orthant"
                ))),
            };
        }
        let e_sets = self
            .e_sets
            .as_ref()
            .ok_or_else(|| DreError::Parse("model needs e_sets or a preset".into()))?;
        let f_sets = self
            .f_sets
            .as_ref()
            .ok_or_else(|| DreError::Parse("model needs f_sets or a preset".into()))?;
        let e_sets = parse_edge_sets(e_sets, self.dimension)?;
        let f_sets = parse_edge_sets(f_sets, self.dimension)?;
        let r = parse_weights(self.r.as_deref(), e_sets.len(), "r")?;
        let q = parse_weights(self.q.as_deref(), f_sets.len(), "q")?;
        ModelSpec::new(self.dimension, e_sets, f_sets, r, q, p)
    }
}

fn parse_edge_sets(lists: &[Vec<String>], dim: usize) -> Result<Vec<EdgeSet>> {
    lists
        .iter()
        .map(|tokens| {
            let mut set = EdgeSet::empty(dim);
            for t in tokens {
                set.insert(Direction::parse(t, dim)?);
            }
            Ok(set)
        })
        .collect()
}

fn parse_weights(ws: Option<&[String]>, arity: usize, name: &str) -> Result<Vec<Prob>> {
    match ws {
        Some(list) => {
            if list.len() != arity {
                return Err(DreError::Parse(format!(
                    "weight list {name} has {} entries for {arity} sets",
                    list.len()
                )));
            }
            normalize_weights(list)
        }
        None if arity == 1 => Ok(vec![Prob::ONE]),
        None => Err(DreError::Parse(format!(
            "weight list {name} required for {arity} sets"
        ))),
    }
}

// ---------------------------------------------------------------------
// experiment configuration

/// Parameter file shared by the experiment subcommands. Each subcommand
/// checks that the fields it needs are present.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Path to the model file, relative to this file's directory.
    pub model: String,
    /// Probability grid as decimals (scans only).
    pub grid: Option<Vec<String>>,
    /// Half-width of the centered transverse window.
    pub window_radius: Option<i64>,
    /// Increasing sweep depth schedule.
    pub depths: Option<Vec<i64>>,
    pub samples: usize,
    /// Fallback seed; a seed given on the command line wins.
    pub base_seed: Option<u64>,
    /// Box half-width for whole-box comparisons.
    pub box_radius: Option<i64>,
    /// Transverse direction for the slope table.
    pub direction: Option<Vec<i64>>,
    /// Line multiples for the slope table.
    pub n_list: Option<Vec<i64>>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(toml_err)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::parse(&text)
    }

    /// Resolve the model path against this config file's directory.
    pub fn model_path(&self, config_path: &Path) -> std::path::PathBuf {
        let model = Path::new(&self.model);
        if model.is_absolute() {
            model.to_path_buf()
        } else {
            config_path.parent().unwrap_or(Path::new(".")).join(model)
        }
    }

    pub fn grid_probs(&self) -> Result<Option<Vec<Prob>>> {
        match &self.grid {
            None => Ok(None),
            Some(list) => {
                let probs: Result<Vec<Prob>> =
                    list.iter().map(|s| Prob::from_decimal_str(s)).collect();
                Ok(Some(probs?))
            }
        }
    }

    /// Deterministic text hashed into the run digest: the resolved model,
    /// every parameter in fixed order, and the effective seed.
    pub fn canonical_string(&self, model: &ModelSpec, seed: u64) -> String {
        let mut out = String::new();
        out.push_str("model={");
        out.push_str(&model.canonical_string());
        out.push_str("}\n");
        let grid = self
            .grid
            .as_ref()
            .map(|g| {
                g.iter()
                    .map(|s| {
                        Prob::from_decimal_str(s)
                            .map(|p| p.canonical())
                            .unwrap_or_else(|_| format!("bad:{s}"))
                    })
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .unwrap_or_default();
        out.push_str(&format!("grid={grid}\n"));
        let ints = |v: &Option<Vec<i64>>| {
            v.as_ref()
                .map(|l| l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"))
                .unwrap_or_default()
        };
        out.push_str(&format!(
            "window_radius={}\n",
            self.window_radius.map(|x| x.to_string()).unwrap_or_default()
        ));
        out.push_str(&format!("depths={}\n", ints(&self.depths)));
        out.push_str(&format!("samples={}\n", self.samples));
        out.push_str(&format!(
            "box_radius={}\n",
            self.box_radius.map(|x| x.to_string()).unwrap_or_default()
        ));
        out.push_str(&format!("direction={}\n", ints(&self.direction)));
        out.push_str(&format!("n_list={}\n", ints(&self.n_list)));
        out.push_str(&format!("seed={seed}\n"));
        out
    }

    pub fn digest(&self, model: &ModelSpec, seed: u64) -> String {
        sha256_hex(self.canonical_string(model, seed).as_bytes())
    }
}

// ---------------------------------------------------------------------
// pinned-environment fixture

/// Fixture file: a two-valued model plus site lists pinned by side. The
/// sites the backward cluster must equal are listed both in their side
/// lists (`*_in_loop`) and once more in walk order.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopFixtureFile {
    model: ModelConfig,
    omega_plus_in_loop: Vec<Vec<i64>>,
    omega_plus: Vec<Vec<i64>>,
    omega_minus_in_loop: Vec<Vec<i64>>,
    omega_minus: Vec<Vec<i64>>,
    loop_order: Vec<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct LoopFixture {
    pub explicit: ExplicitEnvironment,
    /// Expected backward-cluster membership, in walk order.
    pub loop_order: Vec<Vec<i64>>,
}

pub fn parse_loop_fixture(text: &str) -> Result<LoopFixture> {
    let file: LoopFixtureFile = toml::from_str(text).map_err(toml_err)?;
    let spec = file.model.build()?;
    let mut omega_plus = file.omega_plus_in_loop.clone();
    omega_plus.extend(file.omega_plus.iter().cloned());
    let mut omega_minus = file.omega_minus_in_loop.clone();
    omega_minus.extend(file.omega_minus.iter().cloned());

    use std::collections::BTreeSet;
    let annotated: BTreeSet<&Vec<i64>> =
        file.omega_plus_in_loop.iter().chain(&file.omega_minus_in_loop).collect();
    let walk: BTreeSet<&Vec<i64>> = file.loop_order.iter().collect();
    if annotated != walk {
        return Err(DreError::Parse(
            "loop annotations and walk order list different sites".into(),
        ));
    }
    if walk.len() != file.loop_order.len() {
        return Err(DreError::Parse("walk order repeats a site".into()));
    }
    // the walk must close up through unit steps
    let n = file.loop_order.len();
    if n < 2 {
        return Err(DreError::Parse("walk order needs at least two sites".into()));
    }
    for i in 0..n {
        let a = &file.loop_order[i];
        let b = &file.loop_order[(i + 1) % n];
        let dist: i64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
        if dist != 1 {
            return Err(DreError::Parse(format!(
                "walk order jumps from {a:?} to {b:?}"
            )));
        }
    }
    let explicit = ExplicitEnvironment::new(spec, omega_plus, omega_minus)?;
    Ok(LoopFixture { explicit, loop_order: file.loop_order })
}

pub fn load_loop_fixture(path: &Path) -> Result<LoopFixture> {
    let text = std::fs::read_to_string(path)?;
    parse_loop_fixture(&text)
}

// ---------------------------------------------------------------------
// run manifests

/// Provenance record written once per batch run.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub config_digest: String,
    pub base_seed: Option<u64>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn to_toml(&self) -> String {
        // field order is fixed by the struct definition
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Append a digest → result-file line to the provenance index.
pub fn append_index(index_path: &Path, digest: &str, result_file: &str) -> Result<()> {
    use std::io::Write;
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(index_path)?;
    writeln!(f, "{digest}\t{result_file}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_model_builds() {
        let cfg = ModelConfig::parse("preset = \"orthant\"\ndimension = 2\np = \"0.7\"\n").unwrap();
        let spec = cfg.build().unwrap();
        assert_eq!(spec.dim(), 2);
        assert!(spec.check_condition1().pass());
        let half =
            ModelConfig::parse("preset = \"half-orthant\"\ndimension = 3\np = \"0.5\"\n").unwrap();
        assert!(half.build().unwrap().check_condition2().pass());
    }

    #[test]
    fn explicit_model_builds() {
        let text = r#"
dimension = 2
p = "0.5"
e_sets = [["+1"], ["+1", "+2"]]
f_sets = [["+2", "-1", "-2"], ["+1", "-1", "+2", "-2"]]
r = ["0.5", "0.5"]
q = ["0.3", "0.7"]
"#;
        let spec = ModelConfig::parse(text).unwrap().build().unwrap();
        assert_eq!(spec.e_sets().len(), 2);
        assert!(spec.check_condition1().pass());
    }

    #[test]
    fn single_set_weights_default_to_one() {
        let text = "dimension = 2\np = \"0.6\"\ne_sets = [[\"+1\", \"+2\"]]\nf_sets = [[\"-1\", \"-2\"]]\n";
        let spec = ModelConfig::parse(text).unwrap().build().unwrap();
        assert!(spec.is_two_valued());
    }

    #[test]
    fn config_errors_are_reported() {
        // preset plus explicit sets
        let both = "preset = \"orthant\"\ndimension = 2\np = \"0.5\"\ne_sets = [[\"+1\"]]\n";
        assert!(ModelConfig::parse(both).unwrap().build().is_err());
        // unknown field
        assert!(ModelConfig::parse("dimension = 2\np = \"0.5\"\nbogus = 1\n").is_err());
        // unknown preset
        let bad = "preset = \"diagonal\"\ndimension = 2\np = \"0.5\"\n";
        assert!(ModelConfig::parse(bad).unwrap().build().is_err());
        // missing weights for multi-set model
        let nw = "dimension = 2\np = \"0.5\"\ne_sets = [[\"+1\"], [\"+2\"]]\nf_sets = [[\"-1\"]]\n";
        assert!(ModelConfig::parse(nw).unwrap().build().is_err());
        // bad token
        let bt = "dimension = 2\np = \"0.5\"\ne_sets = [[\"+3\"]]\nf_sets = [[\"-1\"]]\n";
        assert!(ModelConfig::parse(bt).unwrap().build().is_err());
    }

    #[test]
    fn experiment_digest_tracks_inputs() {
        let text = r#"
model = "m.toml"
grid = ["0.3", "0.5"]
window_radius = 5
depths = [250, 400]
samples = 200
"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        let spec = ModelSpec::half_orthant(2, Prob::HALF);
        let d1 = cfg.digest(&spec, 7);
        assert_eq!(d1.len(), 64);
        assert_eq!(d1, cfg.digest(&spec, 7));
        assert_ne!(d1, cfg.digest(&spec, 8));
        let other = ModelSpec::half_orthant(3, Prob::HALF);
        assert_ne!(d1, cfg.digest(&other, 7));
    }

    #[test]
    fn fixture_validation_catches_breaks() {
        let good = r#"
omega_plus_in_loop = [[0, 0], [1, 0]]
omega_plus = [[3, 3]]
omega_minus_in_loop = [[0, 1], [1, 1]]
omega_minus = [[4, 4]]
loop_order = [[0, 0], [1, 0], [1, 1], [0, 1]]

[model]
preset = "orthant"
dimension = 2
p = "0.5"
"#;
        let fx = parse_loop_fixture(good).unwrap();
        assert_eq!(fx.loop_order.len(), 4);
        assert_eq!(fx.explicit.omega_plus().len(), 3);

        // walk order with a jump
        let jump = good.replace("[[0, 0], [1, 0], [1, 1], [0, 1]]", "[[0, 0], [1, 1], [1, 0], [0, 1]]");
        assert!(parse_loop_fixture(&jump).is_err());
        // annotation/walk mismatch
        let missing = good.replace("omega_plus_in_loop = [[0, 0], [1, 0]]", "omega_plus_in_loop = [[0, 0]]");
        assert!(parse_loop_fixture(&missing).is_err());
        // overlapping sides
        let overlap = good.replace("omega_minus = [[4, 4]]", "omega_minus = [[3, 3]]");
        assert!(parse_loop_fixture(&overlap).is_err());
    }

    #[test]
    fn shipped_fixture_pins_the_backward_loop() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/backward_loop_d3.toml");
        let fx = load_loop_fixture(&path).unwrap();
        assert_eq!(fx.loop_order.len(), 22);
        assert_eq!(fx.loop_order[0], vec![0, 0, 0]);
        let bbox = crate::lattice::LatticeBox::cube(3, -6, 6).unwrap();
        for seed in [0u64, 1, 2] {
            let field =
                crate::env::EnvironmentField::from_explicit(&fx.explicit, seed).unwrap();
            let c = crate::cluster::backward_cluster(&field, &[0, 0, 0], &bbox).unwrap();
            assert_eq!(c.member_count(), 22, "seed {seed}");
            for site in &fx.loop_order {
                assert!(c.contains(site), "seed {seed}: loop site {site:?} missing");
            }
            assert!(!c.touched_boundary());
        }
    }

    #[test]
    fn manifest_round_trips_through_toml() {
        let m = RunManifest {
            tool_version: "0.1.0".into(),
            subcommand: "pcscan".into(),
            config_digest: "ab".repeat(32),
            base_seed: Some(7),
            started_unix: 100,
            finished_unix: 101,
            outputs: vec!["scan.csv".into()],
        };
        let text = m.to_toml();
        assert!(text.contains("subcommand = \"pcscan\""));
        assert!(text.contains("base_seed = 7"));
        let parsed: toml::Value = toml::from_str(&text).unwrap();
        assert_eq!(parsed["outputs"][0].as_str(), Some("scan.csv"));
    }
}
