//! Run configuration: command-line flags layered over an optional TOML file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use gazekit::analysis::StrategyThresholds;
use gazekit::pupil::PupilGrid;
use gazekit::synth::{AlphaSchedule, SynthConfig};
use gazekit::FeatureMode;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{CliError, CliResult};

/// Flags shared by every subcommand. Each one may also be set in the
/// `--config` file under the same name with underscores.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with defaults for any of the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dataset directory or JSONL file
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Model file
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// head-only, head-eye, or both
    #[arg(long)]
    pub mode: Option<String>,
    /// Accept a decision when p1/p2 exceeds this (accepts `inf`)
    #[arg(long)]
    pub confidence_threshold: Option<f64>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// low,high
    #[arg(long)]
    pub owl_thresholds: Option<String>,
    /// Three CDF thresholds, three opening and three closing windows
    #[arg(long)]
    pub pupil_grid: Option<String>,
    #[arg(long)]
    pub subjects: Option<usize>,
    #[arg(long)]
    pub frames_per_region: Option<usize>,
    /// Minimum usable frames per subject and region
    #[arg(long)]
    pub min_frames_per_region: Option<usize>,
    /// uniform, linspace, or fixed:<alpha>
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub face_fail: Option<f64>,
    #[arg(long)]
    pub pupil_fail: Option<f64>,
    #[arg(long)]
    pub sigma_landmark: Option<f64>,
    #[arg(long)]
    pub sigma_image: Option<f64>,
    /// Turn on resting head pose, glance scatter, pupil flutter and head
    /// sway at their preset levels
    #[arg(long)]
    pub behavioral_noise: bool,
    #[arg(long)]
    pub head_rest_sigma: Option<f64>,
    #[arg(long)]
    pub gaze_jitter: Option<f64>,
    #[arg(long)]
    pub pupil_jitter: Option<f64>,
    #[arg(long)]
    pub head_sway: Option<f64>,
    /// Camera frame rate used for decision-rate reporting
    #[arg(long)]
    pub fps: Option<f64>,
    /// Subject excluded from training
    #[arg(long)]
    pub holdout: Option<String>,
    /// Also render SVG plots
    #[arg(long)]
    pub plots: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    out: Option<PathBuf>,
    data: Option<PathBuf>,
    model: Option<PathBuf>,
    mode: Option<String>,
    confidence_threshold: Option<f64>,
    trees: Option<usize>,
    depth: Option<usize>,
    seed: Option<u64>,
    repetitions: Option<usize>,
    owl_thresholds: Option<String>,
    pupil_grid: Option<String>,
    subjects: Option<usize>,
    frames_per_region: Option<usize>,
    min_frames_per_region: Option<usize>,
    alpha: Option<String>,
    face_fail: Option<f64>,
    pupil_fail: Option<f64>,
    sigma_landmark: Option<f64>,
    sigma_image: Option<f64>,
    behavioral_noise: Option<bool>,
    head_rest_sigma: Option<f64>,
    gaze_jitter: Option<f64>,
    pupil_jitter: Option<f64>,
    head_sway: Option<f64>,
    fps: Option<f64>,
    holdout: Option<String>,
    plots: Option<bool>,
}

fn real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&v.to_string())
    }
}

/// Fully resolved parameters of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub out: PathBuf,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub modes: Vec<FeatureMode>,
    #[serde(serialize_with = "real")]
    pub confidence_threshold: f64,
    pub trees: usize,
    pub depth: usize,
    pub seed: u64,
    pub repetitions: usize,
    pub owl_thresholds: (f64, f64),
    pub pupil_grid: String,
    pub subjects: usize,
    pub frames_per_region: usize,
    pub min_frames_per_region: usize,
    pub alpha: String,
    pub face_fail: f64,
    pub pupil_fail: f64,
    pub sigma_landmark: f64,
    pub sigma_image: f64,
    pub head_rest_sigma: f64,
    pub gaze_jitter: f64,
    pub pupil_jitter: f64,
    pub head_sway: f64,
    pub fps: f64,
    pub holdout: Option<String>,
    pub plots: bool,
}

pub const DEFAULT_PUPIL_GRID: &str = "0.03,0.05,0.10,1,3,5,1,3,5";

fn bad(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("invalid configuration `{key}`: {reason}"))
}

pub fn parse_modes(s: &str) -> CliResult<Vec<FeatureMode>> {
    match s {
        "head-only" => Ok(vec![FeatureMode::HeadOnly]),
        "head-eye" => Ok(vec![FeatureMode::HeadAndEye]),
        "both" => Ok(FeatureMode::BOTH.to_vec()),
        _ => Err(bad(
            "mode",
            format!("`{s}`: expected head-only, head-eye or both"),
        )),
    }
}

fn read_file(path: &Path) -> CliResult<FileConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {}", path.display(), e.message())))
}

impl RunConfig {
    /// Merges flags over the config file over built-in defaults, then
    /// validates every value. `default_mode` applies when neither sets one.
    pub fn resolve(args: &RunArgs, default_mode: &str) -> CliResult<RunConfig> {
        let file = match &args.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                args.$field
                    .clone()
                    .or(file.$field.clone())
                    .unwrap_or($default)
            };
        }
        let out = args
            .out
            .clone()
            .or(file.out.clone())
            .ok_or_else(|| CliError::usage("missing required option --out"))?;
        let mode = pick!(mode, default_mode.to_string());
        let owl = pick!(owl_thresholds, "0.45,0.55".to_string());
        let owl = StrategyThresholds::parse(&owl).map_err(|e| bad("owl_thresholds", e))?;
        let grid = pick!(pupil_grid, DEFAULT_PUPIL_GRID.to_string());
        PupilGrid::<f64>::parse(&grid).map_err(|e| bad("pupil_grid", e))?;
        let alpha = pick!(alpha, "uniform".to_string());
        AlphaSchedule::parse(&alpha).map_err(|e| bad("alpha", e))?;
        let noise = if args.behavioral_noise || file.behavioral_noise.unwrap_or(false) {
            SynthConfig::default().with_behavioral_noise()
        } else {
            SynthConfig::default()
        };

        let cfg = RunConfig {
            out,
            data: args.data.clone().or(file.data.clone()),
            model: args.model.clone().or(file.model.clone()),
            modes: parse_modes(&mode)?,
            confidence_threshold: pick!(
                confidence_threshold,
                gazekit::pipeline::DEFAULT_CONFIDENCE_THRESHOLD
            ),
            trees: pick!(trees, 2000),
            depth: pick!(depth, 25),
            seed: pick!(seed, 0),
            repetitions: pick!(repetitions, 100),
            owl_thresholds: (owl.low, owl.high),
            pupil_grid: grid,
            subjects: pick!(subjects, 40),
            frames_per_region: pick!(frames_per_region, 120),
            min_frames_per_region: pick!(
                min_frames_per_region,
                gazekit::analysis::MIN_FRAMES_PER_REGION
            ),
            alpha,
            face_fail: pick!(face_fail, 0.0),
            pupil_fail: pick!(pupil_fail, 0.0),
            sigma_landmark: pick!(sigma_landmark, 0.5),
            sigma_image: pick!(sigma_image, 8.0),
            head_rest_sigma: pick!(head_rest_sigma, noise.head_rest_sigma),
            gaze_jitter: pick!(gaze_jitter, noise.gaze_jitter),
            pupil_jitter: pick!(pupil_jitter, noise.pupil_jitter),
            head_sway: pick!(head_sway, noise.head_sway),
            fps: pick!(fps, 30.0),
            holdout: args.holdout.clone().or(file.holdout.clone()),
            plots: args.plots || file.plots.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        if !(self.confidence_threshold >= 1.0) {
            return Err(bad("confidence_threshold", "must be >= 1"));
        }
        for (key, v) in [
            ("trees", self.trees),
            ("depth", self.depth),
            ("repetitions", self.repetitions),
            ("subjects", self.subjects),
            ("frames_per_region", self.frames_per_region),
        ] {
            if v == 0 {
                return Err(bad(key, "must be >= 1"));
            }
        }
        for (key, p) in [
            ("face_fail", self.face_fail),
            ("pupil_fail", self.pupil_fail),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(bad(key, format!("{p} is not a probability")));
            }
        }
        for (key, v) in [
            ("sigma_landmark", self.sigma_landmark),
            ("sigma_image", self.sigma_image),
            ("head_rest_sigma", self.head_rest_sigma),
            ("gaze_jitter", self.gaze_jitter),
            ("pupil_jitter", self.pupil_jitter),
            ("head_sway", self.head_sway),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(bad(key, "must be finite and >= 0"));
            }
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(bad("fps", "must be positive"));
        }
        Ok(())
    }

    pub fn require_data(&self) -> CliResult<&Path> {
        self.data
            .as_deref()
            .ok_or_else(|| CliError::usage("missing required option --data"))
    }

    pub fn require_model(&self) -> CliResult<&Path> {
        self.model
            .as_deref()
            .ok_or_else(|| CliError::usage("missing required option --model"))
    }

    pub fn owl_thresholds(&self) -> StrategyThresholds {
        StrategyThresholds {
            low: self.owl_thresholds.0,
            high: self.owl_thresholds.1,
        }
    }

    pub fn pupil_grid(&self) -> PupilGrid<f64> {
        PupilGrid::parse(&self.pupil_grid).expect("validated in resolve")
    }

    pub fn alpha_schedule(&self) -> AlphaSchedule {
        AlphaSchedule::parse(&self.alpha).expect("validated in resolve")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> RunArgs {
        RunArgs {
            out: Some("o".into()),
            ..RunArgs::default()
        }
    }

    #[test]
    fn defaults() {
        let c = RunConfig::resolve(&args(), "both").unwrap();
        assert_eq!(c.modes, FeatureMode::BOTH.to_vec());
        assert_eq!(c.confidence_threshold, 10.0);
        assert_eq!((c.trees, c.depth, c.repetitions), (2000, 25, 100));
        assert_eq!(c.owl_thresholds, (0.45, 0.55));
    }

    #[test]
    fn missing_out_is_usage_error() {
        let e = RunConfig::resolve(&RunArgs::default(), "both").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "trees = 7\ndepth = 3\nconfidence_threshold = inf\n").unwrap();
        let mut a = args();
        a.config = Some(path);
        a.trees = Some(9);
        let c = RunConfig::resolve(&a, "both").unwrap();
        assert_eq!((c.trees, c.depth), (9, 3));
        assert!(c.confidence_threshold.is_infinite());
    }

    #[test]
    fn behavioral_noise_preset_and_override() {
        let mut a = args();
        assert_eq!(RunConfig::resolve(&a, "both").unwrap().head_sway, 0.0);
        a.behavioral_noise = true;
        a.gaze_jitter = Some(0.0);
        let c = RunConfig::resolve(&a, "both").unwrap();
        let preset = SynthConfig::default().with_behavioral_noise();
        assert_eq!((c.head_sway, c.gaze_jitter), (preset.head_sway, 0.0));
    }

    #[test]
    fn unknown_file_key_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "tres = 7\n").unwrap();
        let mut a = args();
        a.config = Some(path);
        let e = RunConfig::resolve(&a, "both").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.message.contains("tres"), "{}", e.message);
    }

    #[test]
    fn invalid_values_name_the_key() {
        let mut a = args();
        a.confidence_threshold = Some(0.5);
        assert!(RunConfig::resolve(&a, "both")
            .unwrap_err()
            .message
            .contains("confidence_threshold"));
        let mut a = args();
        a.pupil_grid = Some("0.1,0.2".into());
        assert!(RunConfig::resolve(&a, "both")
            .unwrap_err()
            .message
            .contains("pupil_grid"));
        let mut a = args();
        a.mode = Some("eyes".into());
        assert!(RunConfig::resolve(&a, "both")
            .unwrap_err()
            .message
            .contains("mode"));
    }
}
