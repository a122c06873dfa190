use std::path::PathBuf;

use cvgate::experiments::{preset, ExperimentConfig, PRESET_NAMES};

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_match_presets() {
    for name in PRESET_NAMES {
        let path = config_dir().join(format!("{name}.toml"));
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap();
        assert_eq!(Some(cfg), preset(name), "{name}");
    }
}

#[test]
fn every_shipped_config_is_a_preset() {
    for entry in std::fs::read_dir(config_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let stem = path.file_stem().unwrap().to_str().unwrap().to_owned();
            assert!(PRESET_NAMES.contains(&stem.as_str()), "{stem}");
        }
    }
}
