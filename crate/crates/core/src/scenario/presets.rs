//! Versioned preset configurations shipped with the crate.

use super::config::ScenarioConfig;
use crate::error::{Error, Result};

pub const PRESETS: &[(&str, &str)] = &[
    ("barrier", include_str!("../../presets/barrier.toml")),
    ("crossing", include_str!("../../presets/crossing.toml")),
    ("double_slit", include_str!("../../presets/double_slit.toml")),
    ("double_slit_2d", include_str!("../../presets/double_slit_2d.toml")),
    ("phase_pair", include_str!("../../presets/phase_pair.toml")),
    ("box", include_str!("../../presets/box.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).ok_or_else(|| {
        Error::InvalidArgument(format!("unknown preset `{name}` (known: {})", preset_names().join(", ")))
    })
}

pub fn preset(name: &str, overrides: &[String]) -> Result<ScenarioConfig> {
    ScenarioConfig::from_toml_with_overrides(preset_source(name)?, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse() {
        for name in preset_names() {
            let src = preset_source(name).unwrap();
            assert!(src.starts_with(&format!("# preset: {name}, version ")), "{name}");
            preset(name, &[]).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("nope", &[]).is_err());
    }
}
