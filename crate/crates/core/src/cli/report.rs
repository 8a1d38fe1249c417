//! CSV report files with fixed columns and 17 significant digits.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::seqlab::{PointClass, Verdict};
use crate::spectra::SingularProfile;
use crate::identities::IdentityReport;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows collected by an experiment, in output order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Reports {
    /// `(n, k, sigma_k)`, `k` counted from the smallest singular value.
    pub profile: Vec<(usize, usize, f64)>,
    /// `(detector, key, value)`.
    pub verdicts: Vec<(String, String, String)>,
    /// `(lambda, epsilon, n, count, class)`.
    pub points: Vec<(f64, f64, usize, usize, String)>,
    /// `(name, n, residual, pass)`.
    pub identities: Vec<(String, usize, f64, bool)>,
    /// Two-column gnuplot data, keyed by file stem.
    pub plots: Vec<(String, Vec<(f64, f64)>)>,
}

impl Reports {
    pub fn add_profile(&mut self, p: &SingularProfile) {
        for row in &p.rows {
            for (k, &s) in row.sv.iter().enumerate() {
                self.profile.push((row.n, k + 1, s));
            }
        }
    }

    pub fn add_verdict(&mut self, v: &Verdict) {
        let d = v.detector.to_string();
        self.verdict(&d, "classification", v.classification.to_string());
        self.verdict(&d, "horizon.n_min", v.horizon.n_min.to_string());
        self.verdict(&d, "horizon.n_max", v.horizon.n_max.to_string());
        self.verdict(&d, "horizon.step", v.horizon.step.to_string());
        for (k, x) in &v.evidence {
            self.verdict(&d, k, num(*x));
        }
    }

    pub fn verdict(&mut self, detector: &str, key: &str, value: impl Into<String>) {
        self.verdicts
            .push((detector.to_string(), key.to_string(), value.into()));
    }

    pub fn add_point(&mut self, p: &PointClass) {
        for series in &p.counts {
            for &(n, c) in &series.counts {
                self.points
                    .push((p.lambda, series.epsilon, n, c, p.class.to_string()));
            }
        }
    }

    pub fn add_identity(&mut self, r: &IdentityReport) {
        for &(n, res) in &r.rows {
            self.identities
                .push((r.name.clone(), n, res, res <= r.bound));
        }
    }

    pub fn plot(&mut self, stem: impl Into<String>, data: Vec<(f64, f64)>) {
        self.plots.push((stem.into(), data));
    }

    /// Writes `verdict.csv` and every nonempty table into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();

        if !self.profile.is_empty() {
            let rows = self
                .profile
                .iter()
                .map(|&(n, k, s)| vec![n.to_string(), k.to_string(), num(s)]);
            written.push(write_csv(dir, "profile.csv", &["n", "k", "sigma_k"], rows)?);
        }
        let rows = self
            .verdicts
            .iter()
            .map(|(d, k, v)| vec![d.clone(), k.clone(), v.clone()]);
        written.push(write_csv(dir, "verdict.csv", &["detector", "key", "value"], rows)?);
        if !self.points.is_empty() {
            let rows = self.points.iter().map(|(l, e, n, c, class)| {
                vec![num(*l), num(*e), n.to_string(), c.to_string(), class.clone()]
            });
            written.push(write_csv(
                dir,
                "points.csv",
                &["lambda", "epsilon", "n", "count", "class"],
                rows,
            )?);
        }
        if !self.identities.is_empty() {
            let rows = self
                .identities
                .iter()
                .map(|(name, n, r, pass)| vec![name.clone(), n.to_string(), num(*r), pass.to_string()]);
            written.push(write_csv(
                dir,
                "identity.csv",
                &["name", "n", "residual", "pass"],
                rows,
            )?);
        }
        for (stem, data) in &self.plots {
            let path = dir.join(format!("{stem}.dat"));
            let body: String = data
                .iter()
                .map(|(x, y)| format!("{} {}\n", num(*x), num(*y)))
                .collect();
            fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> io::Result<PathBuf> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(3.0), "3.0000000000000000e0");
    }

    #[test]
    fn writes_headers_and_skips_empty_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Reports::default();
        r.verdict("d", "k", "v");
        r.identities.push(("x".into(), 3, 0.0, true));
        let files = r.write(dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let v = fs::read_to_string(dir.path().join("verdict.csv")).unwrap();
        assert_eq!(v, "detector,key,value\nd,k,v\n");
        let i = fs::read_to_string(dir.path().join("identity.csv")).unwrap();
        assert_eq!(i, "name,n,residual,pass\nx,3,0.0000000000000000e0,true\n");
        assert!(!dir.path().join("profile.csv").exists());
    }
}
