//! Evaluation reports: CSV tables are the contract; `report.json` summarizes
//! and embeds the resolved configuration; SVG plots are optional.
//!
//! An `INCOMPLETE` marker is written before anything else and removed only
//! after every file is in place, so an interrupted run is recognizable.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gazekit::analysis::{ConfusionMatrix, DeltaReport, OwlnessReport, UserEvaluation};
use gazekit::{AttritionLedger, FeatureMode, GazeRegion};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";
pub const REPORT_FILE: &str = "report.json";

/// Everything `cmd_evaluate` produces.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub ledgers: Vec<(FeatureMode, AttritionLedger)>,
    pub owlness: Vec<OwlnessReport>,
    pub users: Vec<UserEvaluation<f64>>,
    pub delta: Option<DeltaReport>,
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        v.to_string()
    }
}

fn json_num(v: Option<f64>) -> Value {
    v.filter(|x| x.is_finite()).map_or(Value::Null, Value::from)
}

pub struct ReportWriter {
    dir: PathBuf,
    files: Vec<String>,
}

impl ReportWriter {
    pub fn start(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
        let w = ReportWriter {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        };
        w.raw(INCOMPLETE_MARKER, "evaluation did not finish\n")?;
        Ok(w)
    }

    fn raw(&self, name: &str, body: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }

    pub fn write(&mut self, name: &str, body: &str) -> CliResult<()> {
        self.raw(name, body)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(self) -> CliResult<Vec<String>> {
        let marker = self.dir.join(INCOMPLETE_MARKER);
        fs::remove_file(&marker)
            .map_err(|e| CliError::data(format!("{}: {e}", marker.display())))?;
        Ok(self.files)
    }
}

pub fn confusion_csv(m: &ConfusionMatrix) -> String {
    let mut s = String::from("truth");
    for r in GazeRegion::ALL {
        let _ = write!(s, ",{r}");
    }
    s.push_str(",total,accuracy\n");
    for truth in GazeRegion::ALL {
        let _ = write!(s, "{truth}");
        for predicted in GazeRegion::ALL {
            let _ = write!(s, ",{}", m.counts()[truth.index()][predicted.index()]);
        }
        let _ = writeln!(
            s,
            ",{},{}",
            m.row_total(truth),
            opt(m.region_accuracy(truth))
        );
    }
    s
}

fn mode_confusion(users: &[UserEvaluation<f64>], mode: FeatureMode) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for u in users {
        if let Some(e) = u.mode(mode) {
            m.merge(&e.confusion);
        }
    }
    m
}

pub fn per_region_csv(users: &[UserEvaluation<f64>], modes: &[FeatureMode]) -> String {
    let matrices: Vec<ConfusionMatrix> = modes.iter().map(|&m| mode_confusion(users, m)).collect();
    let both = modes.len() == 2;
    let mut s = String::from("region");
    for m in modes {
        let _ = write!(s, ",accuracy_{}", m.flag_name());
    }
    s.push_str(if both { ",delta\n" } else { "\n" });
    for region in GazeRegion::ALL {
        let accs: Vec<Option<f64>> = matrices.iter().map(|m| m.region_accuracy(region)).collect();
        let _ = write!(s, "{region}");
        for a in &accs {
            let _ = write!(s, ",{}", opt(*a));
        }
        if both {
            let d = accs[0].zip(accs[1]).map(|(a, b)| b - a);
            let _ = write!(s, ",{}", opt(d));
        }
        s.push('\n');
    }
    s
}

pub fn per_user_csv(report: &EvaluationReport) -> String {
    let modes = &report.config.modes;
    let mut s = String::from("subject_id,owlness,strategy");
    for m in modes {
        let n = m.flag_name();
        let _ = write!(s, ",mean_{n},std_{n},accepted_{n},evaluated_{n}");
    }
    s.push_str(if modes.len() == 2 { ",delta\n" } else { "\n" });
    for u in &report.users {
        let owl = report.owlness.iter().find(|o| o.subject_id == u.subject_id);
        let _ = write!(
            s,
            "{},{},{}",
            u.subject_id,
            opt(owl.map(|o| o.owlness)),
            owl.map(|o| o.strategy.name()).unwrap_or("")
        );
        let mut means = Vec::new();
        for &m in modes {
            let e = u.mode(m).expect("every configured mode is evaluated");
            means.push(e.mean_accuracy());
            let _ = write!(
                s,
                ",{},{},{},{}",
                opt(e.mean_accuracy()),
                opt(e.std_accuracy()),
                e.accepted,
                e.evaluated
            );
        }
        if modes.len() == 2 {
            let d = means[0].zip(means[1]).map(|(a, b)| b - a);
            let _ = write!(s, ",{}", opt(d));
        }
        s.push('\n');
    }
    s
}

pub fn owlness_csv(owlness: &[OwlnessReport]) -> String {
    let mut s =
        String::from("subject_id,owlness,mean_head_distance,mean_pupil_distance,frames,strategy\n");
    for o in owlness {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            o.subject_id,
            num(o.owlness),
            num(o.mean_head_distance),
            num(o.mean_pupil_distance),
            o.frame_count,
            o.strategy.name()
        );
    }
    s
}

pub fn ledger_csv(ledgers: &[(FeatureMode, AttritionLedger)]) -> String {
    let mut s = String::from(
        "mode,total_frames,faces_detected,pupils_detected,confident_decisions,faces_fraction,pupils_fraction,confident_fraction\n",
    );
    for (mode, l) in ledgers {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            mode.flag_name(),
            l.total_frames,
            l.faces_detected,
            l.pupils_detected,
            l.confident_decisions,
            num(l.fraction_of_total(l.faces_detected)),
            num(l.fraction_of_total(l.pupils_detected)),
            num(l.fraction_of_total(l.confident_decisions)),
        );
    }
    s
}

pub fn sweep_csv(users: &[UserEvaluation<f64>], modes: &[FeatureMode]) -> String {
    let mut s = String::from("mode,threshold,accepted,correct,accuracy\n");
    for &mode in modes {
        let mut points: Vec<gazekit::analysis::SweepPoint> = Vec::new();
        for u in users {
            let e = u.mode(mode).expect("every configured mode is evaluated");
            if points.is_empty() {
                points = e.sweep.clone();
            } else {
                for (p, q) in points.iter_mut().zip(&e.sweep) {
                    p.accepted += q.accepted;
                    p.correct += q.correct;
                }
            }
        }
        for p in points {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                mode.flag_name(),
                num(p.threshold),
                p.accepted,
                p.correct,
                opt(p.accuracy())
            );
        }
    }
    s
}

fn summary_json(report: &EvaluationReport, files: &[String]) -> CliResult<Value> {
    let modes: Vec<Value> = report
        .config
        .modes
        .iter()
        .map(|&m| {
            let c = mode_confusion(&report.users, m);
            json!({
                "mode": m.flag_name(),
                "accepted": c.total(),
                "evaluated": report.users.iter().filter_map(|u| u.mode(m)).map(|e| e.evaluated).sum::<u64>(),
                "accuracy": json_num(c.accuracy()),
            })
        })
        .collect();
    let ledgers: Vec<Value> = report
        .ledgers
        .iter()
        .map(|(m, l)| {
            let rates = l.decision_rates(report.config.fps).ok();
            json!({
                "mode": m.flag_name(),
                "total_frames": l.total_frames,
                "faces_detected": l.faces_detected,
                "pupils_detected": l.pupils_detected,
                "confident_decisions": l.confident_decisions,
                "decisions_per_second_of_pupil_frames": json_num(rates.map(|r| r.0)),
                "decisions_per_second_of_video": json_num(rates.map(|r| r.1)),
            })
        })
        .collect();
    let delta = report.delta.as_ref().map(|d| {
        use gazekit::analysis::Strategy;
        json!({
            "overall_head_only": json_num(d.overall_head_only),
            "overall_head_eye": json_num(d.overall_head_eye),
            "overall_delta": json_num(d.overall_delta),
            "owlness_correlation": json_num(Some(d.owlness_correlation)),
            "owlness_correlation_defined": d.correlation_defined,
            "mean_delta_lizard": json_num(d.strategy_mean_delta(Strategy::Lizard)),
            "mean_delta_mixed": json_num(d.strategy_mean_delta(Strategy::Mixed)),
            "mean_delta_owl": json_num(d.strategy_mean_delta(Strategy::Owl)),
        })
    });
    let config =
        serde_json::to_value(&report.config).map_err(|e| CliError::internal(e.to_string()))?;
    Ok(json!({
        "status": "complete",
        "config": config,
        "subjects": report.users.len(),
        "modes": modes,
        "ledger": ledgers,
        "delta": delta.unwrap_or(Value::Null),
        "tables": files,
    }))
}

/// Writes every table (and plots when configured) into `config.out`.
pub fn write_evaluation(report: &EvaluationReport) -> CliResult<Vec<String>> {
    let modes = &report.config.modes;
    let mut w = ReportWriter::start(&report.config.out)?;
    for &m in modes {
        w.write(
            &format!("confusion_{}.csv", m.flag_name()),
            &confusion_csv(&mode_confusion(&report.users, m)),
        )?;
    }
    w.write("per_region.csv", &per_region_csv(&report.users, modes))?;
    w.write("per_user.csv", &per_user_csv(report))?;
    w.write("owlness.csv", &owlness_csv(&report.owlness))?;
    w.write("ledger.csv", &ledger_csv(&report.ledgers))?;
    w.write("sweep.csv", &sweep_csv(&report.users, modes))?;
    if report.config.plots {
        w.write("per_user_accuracy.svg", &svg::per_user_accuracy(report))?;
        if let Some(d) = &report.delta {
            w.write("owlness_delta.svg", &svg::owlness_delta(d))?;
        }
    }
    let mut files = w.files.clone();
    files.push(REPORT_FILE.to_string());
    let summary = summary_json(report, &files)?;
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::internal(e.to_string()))?
        + "\n";
    w.write(REPORT_FILE, &text)?;
    w.finish()
}

mod svg {
    use std::fmt::Write as _;

    use gazekit::analysis::DeltaReport;

    use super::EvaluationReport;

    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const PAD: f64 = 40.0;

    fn frame(title: &str, body: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <text x=\"{PAD}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n\
             <line x1=\"{PAD}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
             <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{y0}\" stroke=\"black\"/>\n{body}</svg>\n",
            y0 = H - PAD,
            x1 = W - PAD,
        )
    }

    /// Bars of per-user accuracy in increasing order, one series per mode.
    pub fn per_user_accuracy(report: &EvaluationReport) -> String {
        let modes = &report.config.modes;
        let last = *modes.last().expect("at least one mode");
        let mut users: Vec<(&str, Vec<f64>)> = report
            .users
            .iter()
            .map(|u| {
                let accs = modes
                    .iter()
                    .map(|&m| u.mode(m).and_then(|e| e.mean_accuracy()).unwrap_or(0.0))
                    .collect();
                (u.subject_id.as_str(), accs)
            })
            .collect();
        let key = modes.iter().position(|&m| m == last).unwrap_or(0);
        users.sort_by(|a, b| a.1[key].total_cmp(&b.1[key]).then(a.0.cmp(b.0)));
        let slot = (W - 2.0 * PAD) / users.len().max(1) as f64;
        let bar = slot / (modes.len() as f64 + 1.0);
        let colors = ["#999999", "#1f77b4"];
        let mut body = String::new();
        for (i, (_, accs)) in users.iter().enumerate() {
            for (k, a) in accs.iter().enumerate() {
                let h = a * (H - 2.0 * PAD);
                let _ = writeln!(
                    body,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                    PAD + i as f64 * slot + k as f64 * bar,
                    H - PAD - h,
                    bar,
                    h,
                    colors[k % 2]
                );
            }
        }
        frame("Per-user accuracy, increasing order", &body)
    }

    /// Owlness against per-user accuracy gain.
    pub fn owlness_delta(d: &DeltaReport) -> String {
        let pts: Vec<(f64, f64)> = d
            .users
            .iter()
            .filter_map(|u| Some((u.owlness?, u.delta?)))
            .collect();
        let span = pts.iter().map(|p| p.1.abs()).fold(0.01, f64::max);
        let mut body = String::new();
        let zero = H / 2.0;
        let _ = writeln!(
            body,
            "<line x1=\"{PAD}\" y1=\"{zero}\" x2=\"{}\" y2=\"{zero}\" stroke=\"#cccccc\"/>",
            W - PAD
        );
        for (m, delta) in pts {
            let x = PAD + m * (W - 2.0 * PAD);
            let y = zero - delta / span * (H / 2.0 - PAD);
            let _ = writeln!(
                body,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"#d62728\"/>"
            );
        }
        frame("Owlness vs accuracy gain from eye features", &body)
    }
}
