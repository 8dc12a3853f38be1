use std::path::PathBuf;

use distill_cli::config::{Config, ConfigError, FamilyName, MethodName, NoiseName, PreparationName};

fn err(text: &str) -> String {
    Config::parse_str(text).unwrap_err().to_string()
}

#[test]
fn minimal_config_gets_defaults() {
    let c = Config::parse_str("epsilon = 0.49\nt_v = 0.2401\n").unwrap();
    assert_eq!(c.epsilon, 0.49);
    assert_eq!(c.t_v, 0.2401);
    assert_eq!(c.lambda, 0.0);
    assert_eq!(c.theta, 0.0);
    assert_eq!(c.acquisition_scale, 10_000.0);
    assert_eq!(c.noise, NoiseName::None);
    assert_eq!(c.family, FamilyName::Phi);
    assert_eq!(c.preparation, PreparationName::Approx);
    assert_eq!(c.method, MethodName::Mle);
    assert_eq!(c.t_h, 1.0);
    let e = c.experiment();
    assert_eq!(e.epsilon, 0.49);
    assert_eq!(e.channel.t_v, 0.2401);
}

#[test]
fn range_error_names_the_key() {
    let m = err("epsilon = -0.1\nt_v = 0.5\n");
    assert!(m.starts_with("epsilon:"), "{m}");
    assert!(err("epsilon = 0.5\nt_v = 1.5\n").starts_with("t_v:"));
    assert!(err("epsilon = 0.5\nt_v = 0.5\nlambda = 2\n").starts_with("lambda:"));
    assert!(err("epsilon = 0.5\nt_v = 0.5\nmc_trials = 1\n").starts_with("mc_trials:"));
    assert!(err("epsilon = 0.5\nt_v = 0.5\n[qpt]\ntv_true = -1\n").starts_with("qpt.tv_true:"));
    assert!(err("epsilon = 0.5\nt_v = 0.5\n[sweep]\neps_list = [0.5, 0]\n").starts_with("sweep.eps_list[1]:"));
}

#[test]
fn missing_key_is_named() {
    assert!(err("epsilon = 0.5\n").contains("t_v"));
    assert!(err("t_v = 0.5\n").contains("epsilon"));
}

#[test]
fn unknown_keys_are_rejected_with_their_path() {
    let m = err("epsilon = 0.5\nt_v = 0.5\nepsilonn = 1\n");
    assert!(m.contains("epsilonn"), "{m}");
    let m = err("epsilon = 0.5\nt_v = 0.5\n[sweep]\ntv = [0.1]\n");
    assert!(m.contains("sweep") && m.contains("tv"), "{m}");
    let m = err("epsilon = 0.5\nt_v = 0.5\n[plot]\n");
    assert!(m.contains("plot"), "{m}");
}

#[test]
fn wrong_types_name_the_key() {
    let m = err("epsilon = \"half\"\nt_v = 0.5\n");
    assert!(m.starts_with("epsilon:"), "{m}");
    let m = err("epsilon = 0.5\nt_v = 0.5\nnoise = \"gaussian\"\n");
    assert!(m.starts_with("noise:"), "{m}");
}

#[test]
fn syntax_errors_are_reported() {
    assert!(matches!(
        Config::parse_str("epsilon = = 1"),
        Err(ConfigError::Syntax(_))
    ));
}

#[test]
fn table1_row1_config_round_trips() {
    let text = r#"
family = "phi"
epsilon = 0.59
lambda = 0.54
theta = 0.1
preparation = "exact"
depolarizing = 0.0
t_v = 0.378
t_h = 1.0
acquisition_scale = 4490
method = "linear"
noise = "poisson"
seed = 12345
mc_trials = 1000
fit_tv = true

[sweep]
tv_list = [0.11, 0.378]
eps_list = [0.59]

[qpt]
tv_true = 0.378
"#;
    let c = Config::parse_str(text).unwrap();
    let once = c.to_toml();
    let back = Config::parse_str(&once).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.to_toml(), once);
}

#[test]
fn defaults_round_trip() {
    let c = Config::minimal(0.49, 0.2401);
    let text = c.to_toml();
    assert_eq!(Config::parse_str(&text).unwrap(), c);
}

#[test]
fn example_configs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            Config::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert_eq!(n, 7);
}

#[test]
fn load_reports_missing_file() {
    let m = Config::load(std::path::Path::new("/nonexistent/x.toml"))
        .unwrap_err()
        .to_string();
    assert!(m.starts_with("cannot read /nonexistent/x.toml"), "{m}");
}
