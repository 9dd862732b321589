//! Experiment configurations shipped with the crate (`configs/*.toml`).

pub const CONFIGS: &[(&str, &str)] = &[
    ("static_300s", include_str!("../../../configs/static_300s.toml")),
    ("static_montecarlo_300s", include_str!("../../../configs/static_montecarlo_300s.toml")),
    ("updown_600s", include_str!("../../../configs/updown_600s.toml")),
    ("updown_wrong_init_600s", include_str!("../../../configs/updown_wrong_init_600s.toml")),
    ("updown_varying_600s", include_str!("../../../configs/updown_varying_600s.toml")),
    ("updown_varying_wrong_init_600s", include_str!("../../../configs/updown_varying_wrong_init_600s.toml")),
    ("northsouth_varying_600s", include_str!("../../../configs/northsouth_varying_600s.toml")),
    ("northsouth_3600s", include_str!("../../../configs/northsouth_3600s.toml")),
    ("northsouth_wrong_init_3600s", include_str!("../../../configs/northsouth_wrong_init_3600s.toml")),
    ("eastwest_7200s", include_str!("../../../configs/eastwest_7200s.toml")),
    ("three_axis_2400s", include_str!("../../../configs/three_axis_2400s.toml")),
    ("two_axis_escape_1500s", include_str!("../../../configs/two_axis_escape_1500s.toml")),
    ("multiposition_4pos", include_str!("../../../configs/multiposition_4pos.toml")),
];

/// Text of a shipped configuration.
pub fn get(name: &str) -> Option<&'static str> {
    CONFIGS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use crate::config::ExperimentConfig;

    #[test]
    fn every_shipped_config_parses_under_its_name() {
        for (name, text) in super::CONFIGS {
            let cfg = ExperimentConfig::from_toml(text, name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name, *name);
        }
    }
}
