//! CSV emitters for norms, study tables and decay reports. Numeric-only
//! payloads, so no quoting is needed; values carry 17 significant digits.

use crate::diagnostics::{DecayReport, NormSample};
use crate::error::Error;
use crate::studies::{ErrorTable, RateReport, RateSequence};
use std::io::Write;
use std::path::Path;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// Per-step norm samples: t, l2, h1_semi, h1, linf, l4.
pub fn write_norms_csv(samples: &[NormSample], path: &Path) -> Result<(), Error> {
    let mut out = create(path)?;
    writeln!(out, "t,l2,h1_semi,h1,linf,l4")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt(s.t),
            fmt(s.l2),
            fmt(s.h1_semi),
            fmt(s.h1),
            fmt(s.linf),
            fmt(s.l4)
        )?;
    }
    out.flush()?;
    Ok(())
}

fn rate_at(seq: &RateSequence, idx: usize) -> String {
    // the first table row has no preceding level, hence no rate
    if idx == 0 {
        String::new()
    } else {
        seq.ratios.get(idx - 1).map(|r| fmt(*r)).unwrap_or_default()
    }
}

/// Study table: one row per level with the three error norms and the
/// observed order relative to the previous level.
pub fn write_error_table_csv(
    table: &ErrorTable,
    rates: &RateReport,
    path: &Path,
) -> Result<(), Error> {
    let mut out = create(path)?;
    writeln!(
        out,
        "{},err_l2,err_h1,err_linf,rate_l2,rate_h1,rate_linf",
        table.axis.label()
    )?;
    for (idx, level) in table.levels.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(level.param),
            fmt(level.l2),
            fmt(level.h1),
            fmt(level.linf),
            rate_at(&rates.l2, idx),
            rate_at(&rates.h1, idx),
            rate_at(&rates.linf, idx)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Decay margins: t, bound, value, margin.
pub fn write_decay_csv(report: &DecayReport, path: &Path) -> Result<(), Error> {
    let mut out = create(path)?;
    writeln!(out, "t,bound,value,margin")?;
    for m in &report.margins {
        writeln!(
            out,
            "{},{},{},{}",
            fmt(m.t),
            fmt(m.bound),
            fmt(m.value),
            fmt(m.margin)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Generic two-column time series (the L-infinity decay monitor).
pub fn write_monitor_csv(samples: &[(f64, f64)], header: &str, path: &Path) -> Result<(), Error> {
    let mut out = create(path)?;
    writeln!(out, "{header}")?;
    for (t, v) in samples {
        writeln!(out, "{},{}", fmt(*t), fmt(*v))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::studies::{compute_rate, LevelError, StudyAxis};

    #[test]
    fn empty_table_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let table = ErrorTable {
            axis: StudyAxis::H,
            levels: vec![],
        };
        let rates = RateReport {
            l2: RateSequence::default(),
            h1: RateSequence::default(),
            linf: RateSequence::default(),
        };
        write_error_table_csv(&table, &rates, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("h,err_l2"));
    }

    #[test]
    fn table_round_trips_and_rates_match_compute_rate() {
        let errors = [0.741, 0.393, 0.180, 0.0884];
        let table = ErrorTable {
            axis: StudyAxis::H,
            levels: errors
                .iter()
                .enumerate()
                .map(|(i, &e)| LevelError {
                    param: 2f64.sqrt() / (4 << i) as f64,
                    l2: e * 0.1,
                    h1: e,
                    linf: e * 0.05,
                })
                .collect(),
        };
        let rates = RateReport {
            l2: compute_rate(&errors.map(|e| e * 0.1)).unwrap(),
            h1: compute_rate(&errors).unwrap(),
            linf: compute_rate(&errors.map(|e| e * 0.05)).unwrap(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        write_error_table_csv(&table, &rates, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 5);
        // reread the h1 error column and the rate column
        for (i, row) in rows[1..].iter().enumerate() {
            let cols: Vec<&str> = row.split(',').collect();
            let h1: f64 = cols[2].parse().unwrap();
            assert_eq!(h1, table.levels[i].h1);
            if i > 0 {
                let rate: f64 = cols[5].parse().unwrap();
                assert_eq!(rate, rates.h1.ratios[i - 1]);
            } else {
                assert!(cols[5].is_empty());
            }
        }
    }

    #[test]
    fn norms_csv_shape() {
        use crate::diagnostics::NormSample;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("norms.csv");
        let samples = vec![NormSample {
            t: 0.0,
            l2: 1.0,
            h1_semi: 2.0,
            h1: (5.0f64).sqrt(),
            linf: 3.0,
            l4: 1.5,
        }];
        write_norms_csv(&samples, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("t,l2,h1_semi,h1,linf,l4"));
    }
}
