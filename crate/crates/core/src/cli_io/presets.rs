//! Named maps.

use super::config::{ConfigError, MapSpec};

pub struct Preset {
    pub name: &'static str,
    pub params: &'static str,
    pub defaults: &'static [f64],
    pub formula: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset { name: "arnold", params: "alpha, beta", defaults: &[0.19725, 0.48348], formula: "z·e^{iα}·e^{β(z−1/z)/2}" },
    Preset { name: "disjoint", params: "c", defaults: &[0.3], formula: "exp(c(z+1/z))" },
    Preset { name: "broken", params: "", defaults: &[], formula: "exp(z+1/z)" },
    Preset { name: "landing", params: "", defaults: &[], formula: "exp(−z+1/z)" },
    Preset { name: "quadratic", params: "", defaults: &[], formula: "z·exp((0.2+0.1i)z² − 0.3z + 0.3/z²)" },
];

pub fn lookup(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

fn re(x: f64) -> [f64; 2] {
    [x, 0.0]
}

/// Explicit coefficients of a preset. Missing trailing parameters take defaults.
pub fn expand(name: &str, params: &[f64]) -> Result<MapSpec, ConfigError> {
    let preset = lookup(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
    if params.len() > preset.defaults.len() {
        return Err(ConfigError::Invariant {
            field: "map.params".into(),
            msg: format!("{name} takes at most {} parameters", preset.defaults.len()),
        });
    }
    if let Some(x) = params.iter().find(|x| !x.is_finite()) {
        return Err(ConfigError::Invariant { field: "map.params".into(), msg: format!("{x} is not finite") });
    }
    let arg = |i: usize| params.get(i).copied().unwrap_or(preset.defaults[i]);
    Ok(match name {
        "arnold" => {
            let (alpha, beta) = (arg(0), arg(1));
            MapSpec::Explicit { n: 1, p: vec![[0.0, alpha], re(beta / 2.0)], q: vec![re(-beta / 2.0)] }
        }
        "disjoint" => {
            let c = arg(0);
            MapSpec::Explicit { n: 0, p: vec![re(0.0), re(c)], q: vec![re(c)] }
        }
        "broken" => MapSpec::Explicit { n: 0, p: vec![re(0.0), re(1.0)], q: vec![re(1.0)] },
        "landing" => MapSpec::Explicit { n: 0, p: vec![re(0.0), re(-1.0)], q: vec![re(1.0)] },
        "quadratic" => MapSpec::Explicit { n: 1, p: vec![re(0.0), re(-0.3), [0.2, 0.1]], q: vec![re(0.0), re(0.3)] },
        _ => unreachable!("lookup succeeded"),
    })
}
