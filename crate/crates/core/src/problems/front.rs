use super::ProblemSpec;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontProvenance {
    Analytic,
    CachedEvolutionary,
}

/// Finite approximation of a problem's true Pareto front.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFront {
    pub points: Vec<Vec<f64>>,
    pub provenance: FrontProvenance,
}

impl ReferenceFront {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// CSV with header `f1,...,fm` and one point per row.
    pub fn to_csv(&self) -> String {
        let m = self.dim();
        let mut out = (1..=m).map(|i| format!("f{i}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for p in &self.points {
            for (i, v) in p.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str, provenance: FrontProvenance) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Data("empty front file".into()))?;
        let m = header.split(',').count();
        let expected: Vec<String> = (1..=m).map(|i| format!("f{i}")).collect();
        if header.split(',').map(str::trim).ne(expected.iter().map(String::as_str)) {
            return Err(Error::Data(format!("bad front header '{header}'")));
        }
        let mut points = Vec::new();
        for (row, line) in lines.enumerate() {
            let p: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Data(format!("front row {}: {e}", row + 1)))?;
            if p.len() != m || p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("front row {} malformed", row + 1)));
            }
            points.push(p);
        }
        if points.is_empty() {
            return Err(Error::Data("front file has no points".into()));
        }
        Ok(ReferenceFront { points, provenance })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::Unavailable(format!("{}: {e}", dir.display())))?;
        }
        fs::write(path, self.to_csv()).map_err(|e| Error::Unavailable(format!("{}: {e}", path.display())))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Unavailable(format!("{}: {e}", path.display())))?;
        Self::parse_csv(&text, FrontProvenance::CachedEvolutionary)
    }

    /// Points inside the preference box, for preference-mode metrics.
    pub fn clipped_to(&self, lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .filter(|p| p.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| v >= l && v <= u))
            .cloned()
            .collect()
    }
}

/// Location of a problem's cached front inside `dir`.
pub fn cache_path(dir: &Path, problem: &ProblemSpec) -> PathBuf {
    dir.join(format!("{}.csv", problem.name.to_ascii_lowercase()))
}

/// Reference front with about `n` points: the closed form when the problem
/// has one, otherwise the cached evolutionary front from `cache_dir`.
pub fn true_front(problem: &ProblemSpec, n: usize, cache_dir: Option<&Path>) -> Result<ReferenceFront> {
    if n < 2 {
        return Err(Error::Argument("a reference front needs at least 2 points".into()));
    }
    if let Some(points) = problem.analytic_front(n) {
        return Ok(ReferenceFront { points, provenance: FrontProvenance::Analytic });
    }
    match cache_dir {
        Some(dir) => ReferenceFront::read_csv(&cache_path(dir, problem)),
        None => Err(Error::Unavailable(format!(
            "{} has no analytic front and no cache directory was given",
            problem.name
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::dominates;
    use crate::problems::lookup;
    use approx::assert_abs_diff_eq;

    fn mutually_non_dominated(points: &[Vec<f64>]) -> bool {
        points
            .iter()
            .all(|a| points.iter().all(|b| !dominates(a, b)))
    }

    #[test]
    fn zdt1_three_points() {
        let f = true_front(&lookup("ZDT1").unwrap(), 3, None).unwrap();
        assert_eq!(f.provenance, FrontProvenance::Analytic);
        assert_eq!(f.points.len(), 3);
        assert_eq!(f.points[0], vec![0.0, -1.0]);
        assert_eq!(f.points[2], vec![-1.0, 0.0]);
        let mid = &f.points[1];
        assert_abs_diff_eq!(mid[1], -(1.0 - (-mid[0]).sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn zdt2_has_both_endpoints() {
        let f = true_front(&lookup("ZDT2").unwrap(), 11, None).unwrap();
        assert!(f.points.contains(&vec![0.0, -1.0]));
        assert!(f.points.contains(&vec![-1.0, 0.0]));
    }

    #[test]
    fn dtlz2_front_on_unit_sphere() {
        let f = true_front(&lookup("DTLZ2").unwrap(), 200, None).unwrap();
        for p in &f.points {
            assert_abs_diff_eq!(p.iter().map(|v| v * v).sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn analytic_fronts_are_non_dominated() {
        for name in ["ZDT1", "ZDT2", "ZDT3", "DTLZ2", "DTLZ7"] {
            let f = true_front(&lookup(name).unwrap(), 300, None).unwrap();
            assert!(f.points.len() >= 50, "{name}: {}", f.points.len());
            assert!(mutually_non_dominated(&f.points), "{name}");
        }
    }

    #[test]
    fn analytic_front_points_are_attainable() {
        // Each ZDT3 front point is reached with the tail variables at zero.
        let p = lookup("ZDT3").unwrap();
        let f = true_front(&p, 100, None).unwrap();
        for q in &f.points {
            let y = p.evaluate(&[-q[0], 0.0]).unwrap().y;
            assert_abs_diff_eq!(y[1], q[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn missing_cache_is_unavailable() {
        let mw7 = lookup("MW7").unwrap();
        assert!(matches!(true_front(&mw7, 10, None), Err(Error::Unavailable(_))));
        let dir = std::env::temp_dir().join("gapbo-front-test-missing");
        assert!(matches!(true_front(&mw7, 10, Some(&dir)), Err(Error::Unavailable(_))));
    }

    #[test]
    fn csv_round_trip() {
        let f = ReferenceFront {
            points: vec![vec![0.1, -2.5], vec![-1.0 / 3.0, 7.0]],
            provenance: FrontProvenance::CachedEvolutionary,
        };
        let text = f.to_csv();
        assert!(text.starts_with("f1,f2\n"));
        assert_eq!(ReferenceFront::parse_csv(&text, FrontProvenance::CachedEvolutionary).unwrap(), f);
        assert!(ReferenceFront::parse_csv("f1,f3\n1,2\n", FrontProvenance::Analytic).is_err());
        assert!(ReferenceFront::parse_csv("f1,f2\n1,x\n", FrontProvenance::Analytic).is_err());
    }
}
