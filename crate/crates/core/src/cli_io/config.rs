//! JSON run configuration.

use super::presets;
use crate::escape::Viewport;
use crate::map_core::PuncturedPolyMap;
use crate::symbolic::{parse_address, parse_itinerary, parse_tract_list};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("field `{field}`: {msg}")]
    Invariant { field: String, msg: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

fn invariant(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invariant { field: field.to_string(), msg: msg.into() }
}

/// Either explicit coefficients or a named preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMapSpec", into = "RawMapSpec")]
pub enum MapSpec {
    /// `p` holds a₀..a_p, `q` holds b₁..b_q, each as [re, im].
    Explicit { n: i64, p: Vec<[f64; 2]>, q: Vec<[f64; 2]> },
    Preset { name: String, params: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<i64>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    p: Option<Vec<[f64; 2]>>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    q: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<Vec<f64>>,
}

impl TryFrom<RawMapSpec> for MapSpec {
    type Error = String;
    fn try_from(r: RawMapSpec) -> Result<Self, String> {
        match (r.preset, r.n, r.p, r.q) {
            (Some(name), None, None, None) => Ok(MapSpec::Preset { name, params: r.params.unwrap_or_default() }),
            (None, Some(n), Some(p), Some(q)) if r.params.is_none() => Ok(MapSpec::Explicit { n, p, q }),
            (None, ..) if r.params.is_some() => Err("`params` requires `preset`".into()),
            (None, n, p, q) => {
                let missing: Vec<&str> = [("n", n.is_none()), ("P", p.is_none()), ("Q", q.is_none())]
                    .iter()
                    .filter(|x| x.1)
                    .map(|x| x.0)
                    .collect();
                Err(format!("explicit map is missing {}", missing.join(", ")))
            }
            (Some(_), ..) => Err("`preset` cannot be combined with `n`, `P` or `Q`".into()),
        }
    }
}

impl From<MapSpec> for RawMapSpec {
    fn from(m: MapSpec) -> Self {
        match m {
            MapSpec::Explicit { n, p, q } => RawMapSpec { n: Some(n), p: Some(p), q: Some(q), preset: None, params: None },
            MapSpec::Preset { name, params } => {
                RawMapSpec { n: None, p: None, q: None, preset: Some(name), params: Some(params) }
            }
        }
    }
}

fn to_complex(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|c| Complex64::new(c[0], c[1])).collect()
}

impl MapSpec {
    /// Explicit form; presets expand through the preset table.
    pub fn expand(&self) -> Result<MapSpec, ConfigError> {
        match self {
            MapSpec::Explicit { .. } => Ok(self.clone()),
            MapSpec::Preset { name, params } => presets::expand(name, params),
        }
    }

    pub fn build(&self) -> Result<PuncturedPolyMap, ConfigError> {
        match self.expand()? {
            MapSpec::Explicit { n, p, q } => {
                PuncturedPolyMap::new(n, &to_complex(&p), &to_complex(&q)).map_err(|e| {
                    let field = match e {
                        crate::map_core::MapError::DegenerateQ => "map.Q",
                        crate::map_core::MapError::NonFinite(ref s) if s.starts_with('Q') => "map.Q",
                        _ => "map.P",
                    };
                    invariant(field, e.to_string())
                })
            }
            MapSpec::Preset { .. } => unreachable!("expand yields explicit maps"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Itinerary,
    Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewportSpec {
    pub center: [f64; 2],
    pub half_width: f64,
    pub half_height: f64,
    pub width: usize,
    pub height: usize,
}

impl ViewportSpec {
    pub fn build(&self) -> Result<Viewport, ConfigError> {
        Viewport::new(Complex64::new(self.center[0], self.center[1]), self.half_width, self.half_height, self.width, self.height)
            .map_err(|e| invariant("viewport", e.to_string()))
    }
}

/// Map plus command parameters. Absent fields take command defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewport: Option<ViewportSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape_log_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<Style>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounded_color: Option<[u8; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_circle: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub itinerary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strips: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlay: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(map: MapSpec) -> Self {
        Self {
            map,
            viewport: None,
            max_iter: None,
            escape_log_radius: None,
            prefix_len: None,
            style: None,
            bounded_color: None,
            address: None,
            t_max: None,
            t_count: None,
            tol: None,
            period: None,
            seed: None,
            on_circle: None,
            samples: None,
            pairs: None,
            rng_seed: None,
            itinerary: None,
            symbols: None,
            max_period: None,
            strips: None,
            horizon: None,
            out: None,
            dump: None,
            overlay: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.map.build()?;
        if let Some(v) = &self.viewport {
            v.build()?;
        }
        let positive = |field: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(invariant(field, "must be positive and finite")),
            _ => Ok(()),
        };
        positive("escape_log_radius", self.escape_log_radius)?;
        positive("t_max", self.t_max)?;
        positive("tol", self.tol)?;
        let nonzero = |field: &str, v: Option<usize>| match v {
            Some(0) => Err(invariant(field, "must be at least 1")),
            _ => Ok(()),
        };
        nonzero("t_count", self.t_count)?;
        nonzero("period", self.period)?;
        nonzero("samples", self.samples)?;
        nonzero("pairs", self.pairs)?;
        nonzero("max_period", self.max_period)?;
        nonzero("threads", self.threads)?;
        nonzero("prefix_len", self.prefix_len)?;
        if matches!(self.prefix_len, Some(n) if n > crate::escape::MAX_PREFIX) {
            return Err(invariant("prefix_len", format!("must be at most {}", crate::escape::MAX_PREFIX)));
        }
        if let Some(s) = self.seed {
            if !(s[0].is_finite() && s[1].is_finite()) || (s[0] == 0.0 && s[1] == 0.0) {
                return Err(invariant("seed", "must be a finite nonzero point"));
            }
        }
        if let Some([a, b]) = self.strips {
            if a > b {
                return Err(invariant("strips", "first strip must not exceed the last"));
            }
        }
        if let Some(a) = &self.address {
            parse_address(a).map_err(|e| invariant("address", e.to_string()))?;
        }
        if let Some(e) = &self.itinerary {
            parse_itinerary(e).map_err(|e| invariant("itinerary", e.to_string()))?;
        }
        if let Some(s) = &self.symbols {
            parse_tract_list(s).map_err(|e| invariant("symbols", e.to_string()))?;
        }
        for (field, path) in [("out", &self.out), ("dump", &self.dump), ("overlay", &self.overlay)] {
            if let Some(p) = path {
                check_writable(field, p)?;
            }
        }
        Ok(())
    }
}

fn check_writable(field: &str, path: &str) -> Result<(), ConfigError> {
    if path.is_empty() {
        return Err(invariant(field, "path is empty"));
    }
    let p = Path::new(path);
    if p.is_dir() {
        return Err(invariant(field, format!("{path} is a directory")));
    }
    match p.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(invariant(field, format!("directory {} does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}

/// Parses and validates. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        msg: strip_position(&e.to_string()),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn serialize(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("configs always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = parse_config(r#"{"map":{"preset":"arnold","params":[0.19725,0.48348]}}"#).unwrap();
        let m = a.map.build().unwrap();
        assert_eq!(m.index(), 1);
        let f = parse_config(r#"{"map":{"n":0,"P":[[0,0],[0.3,0]],"Q":[[0.3,0]]}}"#).unwrap();
        let m = f.map.build().unwrap();
        assert!((m.eval(Complex64::new(1.0, 0.0)).unwrap().re - 0.6f64.exp()).abs() < 1e-15);
        let e = parse_config(r#"{"map":{"n":0,"P":[[0,0]],"Q":[[1,0]]}}"#).unwrap_err();
        assert!(matches!(e, ConfigError::Invariant { ref field, .. } if field == "map.P"), "{e}");
    }

    #[test]
    fn rejections() {
        let e = parse_config("{\n  \"map\": {\"preset\":\"broken\"},\n  \"colour\": 1\n}").unwrap_err();
        match e {
            ConfigError::Syntax { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains("colour"));
            }
            other => panic!("{other}"),
        }
        assert!(matches!(parse_config("{\"map\":"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(
            parse_config(r#"{"map":{"preset":"broken"},"tol":0}"#),
            Err(ConfigError::Invariant { ref field, .. }) if field == "tol"
        ));
        assert!(matches!(parse_config(r#"{"map":{"preset":"nope"}}"#), Err(ConfigError::UnknownPreset(_))));
        assert!(parse_config(r#"{"map":{"preset":"broken","n":1}}"#).is_err());
        assert!(parse_config(r#"{"map":{"n":0,"P":[[0,0],[1,0]]}}"#).is_err());
        assert!(matches!(
            parse_config(r#"{"map":{"preset":"broken"},"out":"/nonexistent-dir/x.ppm"}"#),
            Err(ConfigError::Invariant { ref field, .. }) if field == "out"
        ));
    }

    #[test]
    fn round_trip_example() {
        let mut c = RunConfig::new(MapSpec::Preset { name: "arnold".into(), params: vec![0.19725, 0.48348] });
        c.address = Some("[] ([(inf,0,0)])".into());
        c.viewport = Some(ViewportSpec { center: [0.0, 0.0], half_width: 2.0, half_height: 1.0, width: 20, height: 10 });
        c.style = Some(Style::Phase);
        assert_eq!(parse_config(&serialize(&c)).unwrap(), c);
    }
}
