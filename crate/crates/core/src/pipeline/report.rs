use std::fs;
use std::path::{Path, PathBuf};

use super::archive::METRICS_FILE;
use super::run::RunManifest;
use super::PipelineError;
use crate::estimators::{PredictionSet, Semantics};
use crate::eval::{calibration_curve, capped_slope, Metric, MetricReport, RETENTION_FRACTIONS};
use crate::stats::{comparison_matrix, Aggregation, ComparisonMatrix};

fn read_manifest(archive: &Path) -> Result<RunManifest, PipelineError> {
    let path = archive.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| PipelineError::Archive(format!("{}: {e}", path.display())))
}

/// All completed metric reports, ordered by dataset, split and roster as
/// listed in the run manifest.
pub fn load_reports(archive: &Path) -> Result<Vec<MetricReport>, PipelineError> {
    let manifest = read_manifest(archive)?;
    let mut out = Vec::new();
    for split in &manifest.splits {
        for est in &manifest.estimators {
            let path = archive
                .join(&split.dataset)
                .join(&split.id)
                .join(est)
                .join(METRICS_FILE);
            if !path.is_file() {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
            let r: MetricReport = serde_json::from_str(&text)
                .map_err(|e| PipelineError::Archive(format!("{}: {e}", path.display())))?;
            out.push(r);
        }
    }
    if out.is_empty() {
        return Err(PipelineError::EmptyArchive(archive.to_path_buf()));
    }
    Ok(out)
}

/// Min, lower quartile, median, upper quartile and max with linear
/// interpolation between order statistics.
pub fn quartiles(values: &[f64]) -> [f64; 5] {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (v.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    [at(0.0), at(0.25), at(0.5), at(0.75), at(1.0)]
}

fn write(path: &Path, text: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

fn is_random(split: &str) -> bool {
    split.starts_with("random")
}

fn summary_table(
    reports: &[MetricReport],
    metric: Metric,
    datasets: &[String],
    estimators: &[String],
) -> String {
    let mut s = String::from("dataset\testimator\tsplits\tn\tmin\tq1\tmedian\tq3\tmax\n");
    let fmt = |q: [f64; 5]| {
        q.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join("\t")
    };
    for ds in datasets {
        for est in estimators {
            let cells: Vec<&MetricReport> = reports
                .iter()
                .filter(|r| &r.dataset == ds && &r.estimator == est)
                .filter(|r| !(metric.needs_variance() && r.semantics == Semantics::Relative))
                .collect();
            let random: Vec<f64> = cells
                .iter()
                .filter(|r| is_random(&r.split))
                .filter_map(|r| r.get(metric))
                .collect();
            if !random.is_empty() {
                s += &format!(
                    "{ds}\t{est}\trandom\t{}\t{}\n",
                    random.len(),
                    fmt(quartiles(&random))
                );
            }
            for r in cells.iter().filter(|r| !is_random(&r.split)) {
                if let Some(v) = r.get(metric) {
                    s += &format!("{ds}\t{est}\t{}\t1\t{}\n", r.split, fmt([v; 5]));
                }
            }
        }
    }
    s
}

/// Write summary tables and plot-ready TSVs under `<archive>/report/`.
/// Returns the written paths.
pub fn report(archive: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let reports = load_reports(archive)?;
    let manifest = read_manifest(archive)?;
    let datasets: Vec<String> = manifest.datasets.iter().map(|d| d.name.clone()).collect();
    let dir = archive.join("report");
    let mut written = Vec::new();
    let mut emit = |name: String, text: String| -> Result<(), PipelineError> {
        let p = dir.join(name);
        write(&p, &text)?;
        written.push(p);
        Ok(())
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MetricReport::csv_header())
        .expect("in-memory write");
    for r in &reports {
        w.write_record(r.csv_row()).expect("in-memory write");
    }
    emit(
        "metrics.csv".into(),
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"),
    )?;

    for metric in Metric::ALL {
        emit(
            format!("{metric}.tsv"),
            summary_table(&reports, metric, &datasets, &manifest.estimators),
        )?;
    }

    let mut retention = String::from("dataset\testimator\tsplit\tfraction\trmse\n");
    let mut slopes = String::from("dataset\testimator\tsplit\ta\ta_capped\tb\n");
    let mut curves = String::from("dataset\testimator\tsplit\texpected\tobserved\n");
    for r in &reports {
        if let Some(rm) = r.retention_rmse {
            for (f, v) in RETENTION_FRACTIONS.iter().zip(rm) {
                retention += &format!("{}\t{}\t{}\t{f}\t{v}\n", r.dataset, r.estimator, r.split);
            }
        }
        if let Some(c) = r.calibration {
            slopes += &format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.dataset,
                r.estimator,
                r.split,
                c.a,
                capped_slope(c.a),
                c.b
            );
        }
        if r.semantics == Semantics::VarianceLike {
            let path = archive
                .join(&r.dataset)
                .join(&r.split)
                .join(&r.estimator)
                .join("predictions.csv");
            let ps = PredictionSet::read_csv(&path, &r.estimator, &r.split, r.semantics)
                .map_err(|e| PipelineError::Archive(e.to_string()))?;
            if let Ok(curve) = calibration_curve(&ps) {
                for (p, o) in curve {
                    curves += &format!("{}\t{}\t{}\t{p}\t{o}\n", r.dataset, r.estimator, r.split);
                }
            }
        }
    }
    emit("retention.tsv".into(), retention)?;
    emit("calibration_slopes.tsv".into(), slopes)?;
    emit("calibration_curves.tsv".into(), curves)?;
    Ok(written)
}

/// Build the comparison matrix for one metric and write it as CSV and
/// heatmap JSON under `<archive>/compare/`.
pub fn compare(
    archive: &Path,
    metric: Metric,
    aggregation: Aggregation,
) -> Result<(ComparisonMatrix, Vec<PathBuf>), PipelineError> {
    let reports = load_reports(archive)?;
    let m = comparison_matrix(&reports, metric, aggregation)?;
    let agg = match aggregation {
        Aggregation::PerSplit => "per-split",
        Aggregation::Median => "median",
    };
    let dir = archive.join("compare");
    let csv_path = dir.join(format!("{metric}-{agg}.csv"));
    let json_path = dir.join(format!("{metric}-{agg}.json"));
    write(&csv_path, &m.to_csv())?;
    write(&json_path, &m.to_heatmap_json())?;
    Ok((m, vec![csv_path, json_path]))
}
