use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use super::{write_file, RunConfig, SubjectMetrics, REPORT_TXT, SUBJECT_METRICS_HEADER};
use crate::condition::Condition;
use crate::cues::{normalization_deviation, CueTable};
use crate::error::{Error, Result};
use crate::stats::{anderson_darling, box_cox_shifted, ols_interaction, rank_sum, COEFFICIENT_NAMES};

/// Builds a plain-text report from a cue table and/or per-subject metrics
/// and writes it to `report.txt`. Either input may be absent; its sections
/// are then left out.
pub fn cmd_report(cfg: &RunConfig, cues: Option<&Path>, metrics: Option<&Path>) -> Result<String> {
    if cues.is_none() && metrics.is_none() {
        return Err(Error::invalid("report needs a cue table, a metrics file, or both"));
    }
    let table = cues
        .map(|p| {
            let f = File::open(p).map_err(|e| Error::io(p, e))?;
            CueTable::read_csv(f, &p.display().to_string())
        })
        .transpose()?;
    let subjects = metrics.map(read_subject_metrics).transpose()?;

    let mut out = String::new();
    out.push_str("bincue report\n=============\n");
    if let Some(t) = &table {
        cue_sections(&mut out, t, cfg.sweep.reference_distance_m);
    }
    if let Some(s) = &subjects {
        behavior_sections(&mut out, s);
    }
    write_file(&cfg.out_dir, REPORT_TXT, out.as_bytes())?;
    Ok(out)
}

fn read_subject_metrics(path: &Path) -> Result<Vec<SubjectMetrics>> {
    let file = path.display().to_string();
    let schema = |message: String| Error::Schema { file: file.clone(), message };
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(f);
    let headers = rdr.headers()?.clone();
    for (i, expected) in SUBJECT_METRICS_HEADER.iter().enumerate() {
        match headers.get(i) {
            Some(h) if h == *expected => {}
            Some(h) => return Err(schema(format!("column {}: expected {expected:?}, found {h:?}", i + 1))),
            None => return Err(schema(format!("column {}: missing {expected:?}", i + 1))),
        }
    }
    if headers.len() > SUBJECT_METRICS_HEADER.len() {
        return Err(schema(format!("unexpected column {:?}", &headers[SUBJECT_METRICS_HEADER.len()])));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<Option<f64>> {
            let raw = rec.get(i).unwrap_or("").trim();
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse::<f64>()
                .map(Some)
                .map_err(|_| schema(format!("line {line}, column {:?}: {raw:?} is not a number", SUBJECT_METRICS_HEADER[i])))
        };
        let count = |i: usize| -> Result<usize> {
            rec.get(i).unwrap_or("").trim().parse().map_err(|_| {
                schema(format!("line {line}, column {:?}: not a count", SUBJECT_METRICS_HEADER[i]))
            })
        };
        out.push(SubjectMetrics {
            subject_id: rec.get(0).unwrap_or("").to_string(),
            condition: rec
                .get(1)
                .unwrap_or("")
                .parse()
                .map_err(|e: Error| schema(format!("line {line}, column \"condition\": {e}")))?,
            n_trials: count(2)?,
            lateral_precision_deg: num(3)?,
            lateral_accuracy_deg: num(4)?,
            polar_precision_deg: num(5)?,
            polar_accuracy_deg: num(6)?,
            quadrant_error_rate_pct: num(7)?,
            rom_deg: num(8)?,
            mean_onset_s: num(9)?,
            n_onsets: count(10)?,
        });
    }
    Ok(out)
}

fn mean_sd(v: &[f64]) -> (f64, Option<f64>) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (m, crate::behavior::sample_sd(v))
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "-".into())
}

fn cue_sections(out: &mut String, t: &CueTable, reference_m: f64) {
    out.push_str("\nAcoustic cues\n-------------\n");
    let _ = writeln!(out, "{:<12} {:>8} {:>6} {:>10} {:>10} {:>8}", "condition", "dist_m", "n", "|ITD| us", "|ILD| dB", "IACC");
    for c in Condition::ALL {
        let mut distances: Vec<f64> = t.filter(c).map(|r| r.distance_m).collect();
        distances.sort_by(f64::total_cmp);
        distances.dedup();
        for d in distances {
            let rows: Vec<_> = t.filter(c).filter(|r| r.distance_m == d).collect();
            let n = rows.len() as f64;
            let itd = rows.iter().map(|r| r.cues.itd_us.abs()).sum::<f64>() / n;
            let ild = rows.iter().map(|r| r.cues.ild_db.abs()).sum::<f64>() / n;
            let iacc = rows.iter().map(|r| r.cues.iacc).sum::<f64>() / n;
            let _ = writeln!(out, "{:<12} {:>8.2} {:>6} {:>10.1} {:>10.2} {:>8.3}", c, d, rows.len(), itd, ild, iacc);
        }
    }
    out.push_str("(means over azimuth of absolute ITD, absolute ILD and IACC)\n");
    for c in Condition::ALL {
        if let Some(m) = t.mean_iacc(c) {
            let _ = writeln!(out, "mean IACC, {c}: {m:.3}");
        }
    }
    match normalization_deviation(t, reference_m) {
        Ok(devs) => {
            let _ = writeln!(
                out,
                "\nILD normalization (ILD / IACC), RMS deviation from the anechoic {reference_m} m curve:"
            );
            let _ = writeln!(out, "{:>8} {:>12} {:>16}", "dist_m", "raw dB", "normalized dB");
            for d in devs {
                let _ = writeln!(out, "{:>8.2} {:>12.2} {:>16.2}", d.distance_m, d.raw_rms_db, d.normalized_rms_db);
            }
        }
        Err(e) => {
            let _ = writeln!(out, "\nILD normalization: not computed ({e})");
        }
    }
}

type Pick = fn(&SubjectMetrics) -> Option<f64>;

const METRICS: [(&str, Pick); 7] = [
    ("lateral precision (deg)", |s| s.lateral_precision_deg),
    ("lateral accuracy (deg)", |s| s.lateral_accuracy_deg),
    ("polar precision (deg)", |s| s.polar_precision_deg),
    ("polar accuracy (deg)", |s| s.polar_accuracy_deg),
    ("quadrant errors (%)", |s| s.quadrant_error_rate_pct),
    ("ROM (deg)", |s| s.rom_deg),
    ("movement onset (s)", |s| s.mean_onset_s),
];

fn values(s: &[SubjectMetrics], c: Condition, pick: Pick) -> Vec<f64> {
    s.iter().filter(|m| m.condition == c).filter_map(pick).collect()
}

fn behavior_sections(out: &mut String, s: &[SubjectMetrics]) {
    out.push_str("\nBehaviour (one value per subject and condition)\n------------------------------------------------\n");
    let _ = writeln!(out, "{:<26} {:<12} {:>4} {:>10} {:>10}", "metric", "condition", "n", "mean", "sd");
    for (name, pick) in METRICS {
        for c in Condition::ALL {
            let v = values(s, c, pick);
            if v.is_empty() {
                continue;
            }
            let (m, sd) = mean_sd(&v);
            let _ = writeln!(out, "{:<26} {:<12} {:>4} {:>10.3} {:>10}", name, c, v.len(), m, fmt_opt(sd, 3));
        }
    }

    out.push_str("\nNormality: Anderson-Darling A2 (estimated mean and SD, D'Agostino-Stephens p);\n");
    out.push_str("Box-Cox lambda (grid -2..2, step 0.01) reported where p < 0.05\n");
    for (name, pick) in METRICS {
        for c in Condition::ALL {
            let v = values(s, c, pick);
            match anderson_darling(&v) {
                Ok(ad) => {
                    let bc = if ad.p_value < 0.05 {
                        box_cox_shifted(&v)
                            .map(|b| format!(", Box-Cox lambda {:.2} (shift {})", b.lambda, b.shift))
                            .unwrap_or_else(|e| format!(", Box-Cox not applicable ({e})"))
                    } else {
                        String::new()
                    };
                    let _ = writeln!(out, "  {name}, {c}: A2 {:.3}, p {:.3}{bc}", ad.a2, ad.p_value);
                }
                Err(_) if v.is_empty() => {}
                Err(e) => {
                    let _ = writeln!(out, "  {name}, {c}: not tested ({e})");
                }
            }
        }
    }

    out.push_str("\nCondition comparison: Wilcoxon rank-sum, two-sided\n");
    for (name, pick) in METRICS {
        let a = values(s, Condition::Anechoic, pick);
        let r = values(s, Condition::Reverberant, pick);
        if a.is_empty() || r.is_empty() {
            continue;
        }
        let t = rank_sum(&a, &r);
        let _ = writeln!(
            out,
            "  {name}: W {:.1}, p {:.4} ({}, n {} vs {})",
            t.statistic,
            t.p_value,
            t.method,
            a.len(),
            r.len()
        );
    }
    out.push_str("  Repeated-measures ANOVA is not computed; the comparisons above are descriptive.\n");

    out.push_str("\nQuadrant errors ~ ROM x condition (ordinary least squares, fixed effects only;\n");
    out.push_str("approximates a mixed model without random intercepts or slopes; condition 1 = reverberant)\n");
    let rows: Vec<(f64, f64, bool)> = s
        .iter()
        .filter_map(|m| Some((m.quadrant_error_rate_pct?, m.rom_deg?, m.condition == Condition::Reverberant)))
        .collect();
    let y: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rom: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let cond: Vec<bool> = rows.iter().map(|r| r.2).collect();
    match ols_interaction(&y, &rom, &cond) {
        Ok(fit) => {
            let _ = writeln!(out, "  {:<14} {:>10} {:>10} {:>8} {:>8}", "term", "estimate", "se", "t", "p");
            for j in 0..4 {
                let _ = writeln!(
                    out,
                    "  {:<14} {:>10.4} {:>10.4} {:>8.2} {:>8.4}",
                    COEFFICIENT_NAMES[j], fit.coefficients[j], fit.std_errors[j], fit.t_stats[j], fit.p_values[j]
                );
            }
            let _ = writeln!(out, "  n {}, R^2 {:.3}", rows.len(), fit.r_squared);
        }
        Err(e) => {
            let _ = writeln!(out, "  not fitted ({e}; {} usable rows)", rows.len());
        }
    }
}
