//! Where a cloud comes from: a file, or a synthetic spec string.
//!
//! Spec strings look like `kind:key=value,key=value`, for example
//! `uniform:n=100000,extent=100x100x50,seed=7`. Kinds and their keys:
//!
//! * `uniform`: `n`, `extent`, `seed`
//! * `void-ellipse`: plus `center=XxY`, `axes=AxB`
//! * `clusters`: plus `clusters`, `sigma`
//! * `towers`: plus `towers`, `ground`
//! * `lake`: `n`, `seed` (100 × 60 × 10 m box with a 30 × 18 m void)
//!
//! `extent` defaults to `100x100x50` and `seed` to 0.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cheesemap::io::{generate, read_cloud, SyntheticKind, SyntheticSpec};
use cheesemap::PointCloud;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    File(PathBuf),
    Synthetic { text: String, spec: SyntheticSpec },
}

impl Input {
    pub fn load(&self) -> CliResult<PointCloud> {
        Ok(match self {
            Input::File(p) => read_cloud(p)?,
            Input::Synthetic { spec, .. } => generate(spec)?,
        })
    }

    /// Dataset id used in reports: the file stem, or the spec string.
    pub fn id(&self) -> String {
        match self {
            Input::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            Input::Synthetic { text, .. } => text.clone(),
        }
    }

    pub fn from_args(input: Option<&Path>, synthetic: Option<&str>) -> CliResult<Self> {
        match (input, synthetic) {
            (Some(p), None) => Ok(Input::File(p.to_path_buf())),
            (None, Some(s)) => Ok(Input::Synthetic {
                text: s.to_string(),
                spec: parse_synthetic(s)?,
            }),
            _ => Err(CliError::Usage("give exactly one of --input or --synthetic".into())),
        }
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

pub fn parse_synthetic(text: &str) -> CliResult<SyntheticSpec> {
    let bad = |m: String| CliError::Usage(format!("synthetic spec '{text}': {m}"));
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let mut kv = BTreeMap::new();
    for pair in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got '{pair}'")))?;
        kv.insert(k.trim(), v.trim());
    }
    let mut take = |key: &str| kv.remove(key);

    let count: usize = num(take("n"), "n", &bad)?.ok_or_else(|| bad("missing n".into()))?;
    let seed: u64 = num(take("seed"), "seed", &bad)?.unwrap_or(0);
    let spec = if kind == "lake" {
        SyntheticSpec::lake(count, seed)
    } else {
        let extent = take("extent").map(|e| triple(e, &bad)).transpose()?.unwrap_or([100., 100., 50.]);
        let kind = match kind {
            "uniform" => SyntheticKind::UniformBox,
            "void-ellipse" => SyntheticKind::VoidEllipse {
                center: pair(take("center").ok_or_else(|| bad("missing center".into()))?, &bad)?,
                semi_axes: pair(take("axes").ok_or_else(|| bad("missing axes".into()))?, &bad)?,
            },
            "clusters" => SyntheticKind::GaussianClusters {
                clusters: num(take("clusters"), "clusters", &bad)?.unwrap_or(8),
                sigma: num(take("sigma"), "sigma", &bad)?.unwrap_or(2.0),
            },
            "towers" => SyntheticKind::Towers {
                towers: num(take("towers"), "towers", &bad)?.unwrap_or(4),
                ground_height: num(take("ground"), "ground", &bad)?.unwrap_or(1.5),
            },
            other => return Err(bad(format!("unknown kind '{other}'"))),
        };
        SyntheticSpec::sized(kind, extent, count, seed)
    };
    if let Some(k) = kv.keys().next() {
        return Err(bad(format!("unknown key '{k}'")));
    }
    spec.validate()?;
    Ok(spec)
}

fn num<T: FromStr>(v: Option<&str>, key: &str, bad: &impl Fn(String) -> CliError) -> CliResult<Option<T>> {
    v.map(|s| s.parse().map_err(|_| bad(format!("bad value '{s}' for {key}"))))
        .transpose()
}

fn floats(s: &str, n: usize, bad: &impl Fn(String) -> CliError) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = s
        .split('x')
        .map(|p| p.parse().map_err(|_| bad(format!("bad number '{p}'"))))
        .collect::<CliResult<_>>()?;
    if v.len() != n {
        return Err(bad(format!("'{s}' needs {n} components separated by 'x'")));
    }
    Ok(v)
}

fn pair(s: &str, bad: &impl Fn(String) -> CliError) -> CliResult<(f64, f64)> {
    let v = floats(s, 2, bad)?;
    Ok((v[0], v[1]))
}

fn triple(s: &str, bad: &impl Fn(String) -> CliError) -> CliResult<[f64; 3]> {
    let v = floats(s, 3, bad)?;
    Ok([v[0], v[1], v[2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        let u = parse_synthetic("uniform:n=10,seed=3,extent=4x5x6").unwrap();
        assert_eq!(u.kind, SyntheticKind::UniformBox);
        assert_eq!((u.count, u.seed), (10, 3));
        assert_eq!(u.extent.max.z, 6.0);
        let v = parse_synthetic("void-ellipse:n=10,extent=100x60x10,center=50x30,axes=20x10").unwrap();
        assert!(matches!(v.kind, SyntheticKind::VoidEllipse { .. }));
        let c = parse_synthetic("clusters:n=10,clusters=3,sigma=0.5").unwrap();
        assert_eq!(c.kind, SyntheticKind::GaussianClusters { clusters: 3, sigma: 0.5 });
        assert!(matches!(parse_synthetic("towers:n=10").unwrap().kind, SyntheticKind::Towers { .. }));
        assert_eq!(parse_synthetic("lake:n=50,seed=2").unwrap(), SyntheticSpec::lake(50, 2));
    }

    #[test]
    fn rejects_bad_specs() {
        for s in [
            "uniform",
            "uniform:n=x",
            "uniform:n=5,extent=1x2",
            "uniform:n=5,colour=red",
            "blob:n=5",
            "void-ellipse:n=5,center=1x1",
            "uniform:n=0",
        ] {
            assert!(parse_synthetic(s).is_err(), "{s}");
        }
    }
}
