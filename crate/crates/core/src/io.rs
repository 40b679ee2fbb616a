//! File formats: obstacle lists, spin expressions, OBJ meshes, PLY point
//! clouds and JSON reports.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framing::{HarmonicTerm, OddHarmonicSeries};
use crate::immersion::{
    spin, surface_normal, translate, FnImmersion, Immersion, ParametricImmersion,
};
use crate::sphere::UnitVector;
use crate::verify::{Grid, VerificationReport};

pub const REPORT_VERSION: u32 = 1;

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn numbers(path: &str, line: usize, fields: &str) -> Result<Vec<f64>> {
    fields
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(path, line, format!("not a finite number: {s:?}")))
        })
        .collect()
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses an obstacle list: one point per line, either three Cartesian
/// components (normalized here) or `lonlat: <lon_deg> <lat_deg>`.
/// `path` is only used in error messages.
pub fn parse_obstacles(text: &str, path: &str) -> Result<Vec<UnitVector>> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let p = if let Some(rest) = l.strip_prefix("lonlat:") {
            let v = numbers(path, line, rest)?;
            let [lon, lat] = v[..] else {
                return Err(parse_err(path, line, "lonlat needs two angles in degrees"));
            };
            if lat.abs() > 90.0 {
                return Err(parse_err(
                    path,
                    line,
                    format!("latitude {lat} out of range"),
                ));
            }
            let (lon, lat) = (lon.to_radians(), lat.to_radians());
            UnitVector::from_slice(&[lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()])
        } else {
            let v = numbers(path, line, l)?;
            if v.len() != 3 {
                return Err(parse_err(
                    path,
                    line,
                    format!("expected 3 coordinates, found {}", v.len()),
                ));
            }
            UnitVector::from_slice(&v)
        };
        out.push(p.map_err(|e| parse_err(path, line, e.to_string()))?);
    }
    Ok(out)
}

pub fn read_obstacles(path: &Path) -> Result<Vec<UnitVector>> {
    parse_obstacles(&std::fs::read_to_string(path)?, &path.display().to_string())
}

/// Parses a spin expression: a `point c…` or `circle r c…` seed followed by
/// any sequence of `translate v…` and `spin` lines.
pub fn parse_spin_expression(text: &str, path: &str) -> Result<ParametricImmersion> {
    let mut current: Option<ParametricImmersion> = None;
    for (line, l) in content_lines(text) {
        let (word, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let wrap = |e: Error| parse_err(path, line, e.to_string());
        current = Some(match (word, current.take()) {
            ("point", None) => {
                let v = numbers(path, line, rest)?;
                if v.is_empty() {
                    return Err(parse_err(path, line, "point needs coordinates"));
                }
                Arc::new(FnImmersion::point(&v))
            }
            ("circle", None) => {
                let v = numbers(path, line, rest)?;
                let Some((&r, center)) = v.split_first() else {
                    return Err(parse_err(path, line, "circle needs a radius and a center"));
                };
                Arc::new(FnImmersion::circle(r, center).map_err(wrap)?)
            }
            ("translate", Some(f)) => {
                Arc::new(translate(f, &numbers(path, line, rest)?).map_err(wrap)?)
            }
            ("spin", Some(f)) if rest.is_empty() => Arc::new(spin(f).map_err(wrap)?),
            ("point" | "circle", Some(_)) => {
                return Err(parse_err(path, line, "only one seed immersion is allowed"))
            }
            ("translate" | "spin", None) => {
                return Err(parse_err(
                    path,
                    line,
                    format!("{word} needs a preceding seed"),
                ))
            }
            _ => return Err(parse_err(path, line, format!("unknown instruction {l:?}"))),
        });
    }
    current.ok_or_else(|| parse_err(path, 0, "empty spin expression"))
}

/// Writes the quad mesh of a surface `T² → R³` sampled on `grid`, mapping
/// positions and normals through `to_output`. Both seams are welded: node
/// `(i, j)` is vertex `i·Nt + j + 1`.
pub fn write_obj<W: Write>(
    out: &mut W,
    f: &dyn Immersion,
    grid: &Grid,
    to_output: &Matrix3<f64>,
) -> Result<()> {
    let [a, b] = grid.axes() else {
        return Err(Error::InvalidParameter(
            "mesh export needs a 2-D grid".into(),
        ));
    };
    if !(a.is_periodic() && b.is_periodic()) || f.ambient_dim() != 3 || f.domain_dim() != 2 {
        return Err(Error::InvalidParameter(
            "mesh export needs a periodic surface in R³".into(),
        ));
    }
    let (n, m) = (a.count(), b.count());
    writeln!(out, "# {n} x {m} torus")?;
    let mut normals = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let u = [a.node(i), b.node(j)];
            let p = to_output * Vector3::from_iterator(f.eval(&u).iter().copied());
            writeln!(out, "v {} {} {}", p.x, p.y, p.z)?;
            let nrm = surface_normal(&f.jacobian(&u));
            let len = nrm.norm();
            normals.push(if len > 0.0 {
                to_output * (nrm / len)
            } else {
                nrm
            });
        }
    }
    for g in &normals {
        writeln!(out, "vn {} {} {}", g.x, g.y, g.z)?;
    }
    let idx = |i: usize, j: usize| (i % n) * m + (j % m) + 1;
    for i in 0..n {
        for j in 0..m {
            let q = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            writeln!(
                out,
                "f {0}//{0} {1}//{1} {2}//{2} {3}//{3}",
                q[0], q[1], q[2], q[3]
            )?;
        }
    }
    Ok(())
}

/// Unit normals of a surface on every grid node (first axis outermost),
/// mapped through `to_output`; rank-deficient nodes are skipped.
pub fn gauss_samples(
    f: &dyn Immersion,
    grid: &Grid,
    to_output: &Matrix3<f64>,
) -> Vec<Vector3<f64>> {
    let [a, b] = grid.axes() else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(a.count() * b.count());
    for i in 0..a.count() {
        for j in 0..b.count() {
            let n = surface_normal(&f.jacobian(&[a.node(i), b.node(j)]));
            let len = n.norm();
            if len > 0.0 {
                out.push(to_output * (n / len));
            }
        }
    }
    out
}

/// ASCII PLY with an `obstacle` flag column (0 for Gauss samples, 1 for
/// obstacles, which follow the samples).
pub fn write_ply<W: Write>(
    out: &mut W,
    samples: &[Vector3<f64>],
    obstacles: &[Vector3<f64>],
) -> Result<()> {
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(
        out,
        "comment unit normals of the torus followed by obstacle directions"
    )?;
    writeln!(out, "element vertex {}", samples.len() + obstacles.len())?;
    for c in ["x", "y", "z"] {
        writeln!(out, "property double {c}")?;
    }
    writeln!(out, "property uchar obstacle")?;
    writeln!(out, "end_header")?;
    for (set, flag) in [(samples, 0), (obstacles, 1)] {
        for p in set {
            writeln!(out, "{} {} {} {flag}", p.x, p.y, p.z)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportParams {
    pub epsilon: f64,
    pub delta: f64,
}

/// On-disk report. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportJson {
    pub v: u32,
    pub params: ReportParams,
    pub grid: [usize; 2],
    pub sigma_min: f64,
    pub avoidance_margin: f64,
    pub certified_radius: f64,
    pub alpha: f64,
    pub ell_delta: f64,
    pub degree: f64,
    pub lipschitz: f64,
    pub rank_failures: usize,
    pub pass: bool,
    /// `(k, a_k, b_k)` of the height function, in the rotated frame.
    pub series: Vec<(u32, f64, f64)>,
}

impl ReportJson {
    pub fn new(r: &VerificationReport, series: &OddHarmonicSeries) -> Self {
        ReportJson {
            v: REPORT_VERSION,
            params: ReportParams {
                epsilon: r.epsilon,
                delta: r.delta,
            },
            grid: [r.grid.0, r.grid.1],
            sigma_min: r.sigma_min,
            avoidance_margin: r.avoidance_margin,
            certified_radius: r.certified_radius,
            alpha: r.alpha,
            ell_delta: r.ell_delta,
            degree: r.degree_estimate,
            lipschitz: r.lipschitz_estimate,
            rank_failures: r.rank_failures,
            pass: r.pass,
            series: series
                .terms()
                .iter()
                .map(|&HarmonicTerm { k, a, b }| (k, a, b))
                .collect(),
        }
    }

    pub fn to_string_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn write_report(path: &Path, report: &ReportJson) -> Result<()> {
    std::fs::write(path, report.to_string_pretty())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::base_circle;
    use crate::verify::Axis;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn obstacles_both_syntaxes() {
        let text = "# tetrahedron\n0 0 2\n\nlonlat: 60 -19.47122063449069\n  1, 1, 1\n";
        let pts = parse_obstacles(text, "t").unwrap();
        assert_eq!(pts.len(), 3);
        assert_abs_diff_eq!(pts[0].vec3(), Vector3::z(), epsilon = 1e-15);
        let v = pts[1].vec3();
        assert_abs_diff_eq!(v.z, -1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y.atan2(v.x), PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[2].vec3().x, 3f64.sqrt().recip(), epsilon = 1e-15);
    }

    #[test]
    fn obstacle_errors_carry_line_numbers() {
        let err = parse_obstacles("# c\n1 0\n", "pts.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().starts_with("pts.txt:2:"));
        assert!(parse_obstacles("0 0 0\n", "p").is_err());
        assert!(parse_obstacles("lonlat: 0 91\n", "p").is_err());
        assert!(parse_obstacles("1 x 2\n", "p").is_err());
        assert!(parse_obstacles("", "p").unwrap().is_empty());
    }

    #[test]
    fn spin_expression_builds_t3() {
        let f = parse_spin_expression("circle 1 0 3\nspin\ntranslate 0 0 5\nspin\n", "s").unwrap();
        assert_eq!((f.domain_dim(), f.ambient_dim()), (3, 4));
        let p = parse_spin_expression("point 1\nspin\n", "s").unwrap();
        let v = p.eval(&[0.3]);
        assert_abs_diff_eq!(v[0], 0.3f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], -(0.3f64.sin()), epsilon = 1e-15);
    }

    #[test]
    fn spin_expression_errors() {
        assert!(parse_spin_expression("spin\n", "s").is_err());
        assert!(parse_spin_expression("point 1\npoint 2\n", "s").is_err());
        assert!(parse_spin_expression("circle 1 0 0\nspin\n", "s").is_err());
        assert!(parse_spin_expression("# nothing\n", "s").is_err());
        assert!(parse_spin_expression("point 1\nwobble\n", "s").is_err());
    }

    #[test]
    fn obj_counts_and_welding() {
        let torus =
            crate::immersion::spin(Arc::new(FnImmersion::circle(1.0, &[0.0, 3.0]).unwrap()))
                .unwrap();
        let grid = Grid::new(vec![Axis::periodic(6), Axis::periodic(5)]).unwrap();
        let mut buf = Vec::new();
        write_obj(&mut buf, &torus, &grid, &Matrix3::identity()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let count = |p: &str| text.lines().filter(|l| l.starts_with(p)).count();
        assert_eq!((count("v "), count("vn "), count("f ")), (30, 30, 30));
        let max_index = text
            .lines()
            .filter(|l| l.starts_with("f "))
            .flat_map(|l| {
                l.split_whitespace()
                    .skip(1)
                    .map(|t| t.split("//").next().unwrap().parse::<usize>().unwrap())
            })
            .max()
            .unwrap();
        assert_eq!(max_index, 30);
        assert!(write_obj(
            &mut Vec::new(),
            &base_circle(),
            &Grid::torus(&[4]),
            &Matrix3::identity()
        )
        .is_err());
    }

    #[test]
    fn ply_header_and_flags() {
        let mut buf = Vec::new();
        write_ply(&mut buf, &[Vector3::x(), Vector3::y()], &[Vector3::z()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("element vertex 3\n"));
        let body: Vec<&str> = text.split("end_header\n").nth(1).unwrap().lines().collect();
        assert_eq!(body, ["1 0 0 0", "0 1 0 0", "0 0 1 1"]);
    }

    #[test]
    fn report_keys() {
        let r = VerificationReport {
            epsilon: 0.125,
            delta: 0.125,
            grid: (16, 16),
            sigma_min: 0.1,
            rank_failures: 0,
            avoidance_margin: 0.2,
            alpha: 0.3,
            ell_delta: 3.6,
            degree_estimate: 0.0,
            lipschitz_estimate: 4.0,
            certified_radius: 0.05,
            pass: true,
        };
        let series = OddHarmonicSeries::new(vec![HarmonicTerm {
            k: 3,
            a: 1.0,
            b: 0.0,
        }])
        .unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&ReportJson::new(&r, &series).to_string_pretty()).unwrap();
        for key in [
            "v",
            "params",
            "grid",
            "sigma_min",
            "avoidance_margin",
            "certified_radius",
            "alpha",
            "ell_delta",
            "degree",
            "pass",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["v"], 1);
        assert_eq!(v["params"]["epsilon"], 0.125);
        assert_eq!(v["series"][0][0], 3);
    }
}
