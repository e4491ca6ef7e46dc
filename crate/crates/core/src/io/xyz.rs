//! Whitespace-separated `x y z` text, one point per line. Blank lines and
//! lines starting with `#` are skipped; columns after the third are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

pub fn read_xyz(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_xyz(&text, path)
}

/// Parses XYZ text; `origin` only labels errors.
pub fn parse_xyz(text: &str, origin: &Path) -> Result<PointCloud> {
    let err = |line: usize, reason: String| Error::Xyz {
        path: origin.to_path_buf(),
        line,
        reason,
    };
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut xyz = [0.0; 3];
        for (a, v) in xyz.iter_mut().enumerate() {
            let tok = fields
                .next()
                .ok_or_else(|| err(n + 1, format!("expected 3 coordinates, found {a}")))?;
            *v = tok
                .parse::<f64>()
                .map_err(|e| err(n + 1, format!("bad number '{tok}': {e}")))?;
            if !v.is_finite() {
                return Err(err(n + 1, format!("non-finite coordinate '{tok}'")));
            }
        }
        points.push(Point3::from(xyz));
    }
    PointCloud::new(points)
}

/// Writes the shortest decimal that round-trips each coordinate exactly.
pub fn write_xyz(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(cloud.len() * 48);
    for p in cloud.points() {
        writeln!(out, "{} {} {}", p.x, p.y, p.z).expect("writing to a String cannot fail");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points_and_skips_comments() {
        let text = "# header\n1.5 2.5 3.5\n\n   \n-1 0 1e3 255 17\n";
        let cloud = parse_xyz(text, Path::new("t.xyz")).unwrap();
        assert_eq!(cloud.points(), &[Point3::new(1.5, 2.5, 3.5), Point3::new(-1., 0., 1000.)]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse_xyz("1 2 3\n4 five 6\n", Path::new("bad.xyz")) {
            Err(Error::Xyz { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_xyz("1 2\n", Path::new("short.xyz")) {
            Err(Error::Xyz { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_xyz("1 2 nan\n", Path::new("nan.xyz")).is_err());
    }
}
