//! Results folders, CSV emission and the throughput CCDF.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use crate::config::RootConfig;
use crate::error::{Error, IoContext, Result};

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.json";
pub const EPISODES_FILE: &str = "episodes.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";
pub const CCDF_FILE: &str = "ccdf.csv";

/// Offset of the leading plotting point below the smallest sample.
pub const CCDF_LEAD_MARGIN: f64 = 1e-6;

pub fn throughput_file_name(episode: usize) -> String {
    format!("throughput_{episode:03}.csv")
}

pub fn steps_file_name(episode: usize) -> String {
    format!("steps_{episode:03}.csv")
}

/// Creates `<base>/<run_name>_<UTC timestamp>/` and stores the resolved
/// configuration in it. Same-second collisions get a `_<n>` suffix.
pub fn setup_results_dir(base: &Path, run_name: &str, config: &RootConfig) -> Result<PathBuf> {
    fs::create_dir_all(base).context(|| format!("creating results base {}", base.display()))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let stem = format!("{run_name}_{stamp}");
    let mut n = 0u32;
    let dir = loop {
        let name = if n == 0 {
            stem.clone()
        } else {
            format!("{stem}_{n}")
        };
        let candidate = base.join(name);
        match fs::create_dir(&candidate) {
            Ok(()) => break candidate,
            Err(e) if e.kind() == ErrorKind::AlreadyExists => n += 1,
            Err(e) => {
                return Err(Error::Io {
                    context: format!("creating results folder {}", candidate.display()),
                    source: e,
                })
            }
        }
    };
    write_file(&dir.join(RESOLVED_CONFIG_FILE), config.to_json().as_bytes())?;
    Ok(dir)
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).context(|| format!("writing {}", path.display()))
}

pub fn append_file(path: &Path, contents: &str) -> Result<()> {
    use std::io::Write;
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .context(|| format!("opening {}", path.display()))?;
    f.write_all(contents.as_bytes())
        .and_then(|_| f.flush())
        .context(|| format!("appending to {}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcdfPoint {
    pub value: f64,
    /// P(X > value).
    pub prob: f64,
}

/// Empirical CCDF: one point per distinct sample value, preceded by a
/// `(min − margin, 1.0)` point so plots start at probability one.
pub fn ccdf(samples: &[f64]) -> Result<Vec<CcdfPoint>> {
    if samples.is_empty() {
        return Err(Error::invalid("CCDF of an empty sample set"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("CCDF samples must be finite"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut points = vec![CcdfPoint {
        value: sorted[0] - CCDF_LEAD_MARGIN,
        prob: 1.0,
    }];
    let mut i = 0;
    while i < n {
        let v = sorted[i];
        let mut j = i;
        while j < n && sorted[j] == v {
            j += 1;
        }
        points.push(CcdfPoint {
            value: v,
            prob: (n - j) as f64 / n as f64,
        });
        i = j;
    }
    Ok(points)
}

pub fn ccdf_csv(points: &[CcdfPoint]) -> String {
    let mut out = String::from("throughput_mbps,ccdf\n");
    for p in points {
        out.push_str(&format!("{:.6},{:.6}\n", p.value, p.prob));
    }
    out
}

/// Throughput samples from every `throughput_*.csv` in `dir`, in file-name order.
pub fn read_throughput_samples(dir: &Path) -> Result<Vec<f64>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("throughput_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "no throughput_*.csv logs in {}",
            dir.display()
        )));
    }
    let mut samples = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).context(|| format!("reading {}", f.display()))?;
        for (lineno, line) in text.lines().enumerate().skip(1) {
            let value = line
                .split(',')
                .nth(3)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::invalid(format!("{}:{}: malformed row", f.display(), lineno + 1))
                })?;
            samples.push(value);
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ccdf_counting() {
        let pts = ccdf(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(pts[0].prob, 1.0);
        assert_eq!(pts[0].value, 1.0 - CCDF_LEAD_MARGIN);
        let body: Vec<(f64, f64)> = pts[1..].iter().map(|p| (p.value, p.prob)).collect();
        assert_eq!(body, vec![(1.0, 2.0 / 3.0), (2.0, 1.0 / 3.0), (3.0, 0.0)]);
    }

    #[test]
    fn ccdf_degenerate() {
        let pts = ccdf(&[4.0; 5]).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[1].value, pts[1].prob), (4.0, 0.0));
        assert!(ccdf(&[]).is_err());
        assert!(ccdf(&[f64::NAN]).is_err());
    }

    #[test]
    fn csv_format() {
        let pts = ccdf(&[1.0, 2.0]).unwrap();
        assert_eq!(
            ccdf_csv(&pts),
            "throughput_mbps,ccdf\n0.999999,1.000000\n1.000000,0.500000\n2.000000,0.000000\n"
        );
    }

    #[test]
    fn results_dirs_never_collide() {
        let base = tempfile::tempdir().unwrap();
        let cfg = RootConfig::default();
        let a = setup_results_dir(base.path(), "train", &cfg).unwrap();
        let b = setup_results_dir(base.path(), "train", &cfg).unwrap();
        assert_ne!(a, b);
        let copy = fs::read_to_string(a.join(RESOLVED_CONFIG_FILE)).unwrap();
        assert_eq!(copy, cfg.to_json());
    }

    proptest! {
        #[test]
        fn ccdf_is_non_increasing(samples in prop::collection::vec(0.0f64..100.0, 1..200)) {
            let pts = ccdf(&samples).unwrap();
            for w in pts.windows(2) {
                prop_assert!(w[1].prob <= w[0].prob);
                prop_assert!(w[1].value > w[0].value);
            }
            prop_assert!(pts.iter().all(|p| (0.0..=1.0).contains(&p.prob)));
            prop_assert_eq!(pts.last().unwrap().prob, 0.0);
        }
    }
}
