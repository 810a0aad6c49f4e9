//! Small configurations shared by the integration tests.

#![allow(dead_code)]

use vlasov_lab::ExperimentConfig;

pub const TOY: &str = r#"
kind = "toy-coupled"
seed = 5
[toy]
n = 32
epsilon = 2.0
steps = 12
phi = [{ k = [1, 2], amplitude = 1.0 }]
stream = [{ k = [1, 0], amplitude = 0.05 }, { k = [0, 1], amplitude = 0.05, phase = 0.7 }]
initial = { kind = "modes", mean = 0.5, modes = [{ k = [1, 2], amplitude = 1.0 }, { k = [-1, 1], amplitude = 0.5, phase = 0.3 }] }
[[fits]]
model = "exponential"
window = [0.0, 12.0]
"#;

pub const LINEAR: &str = r#"
kind = "linear-mixing"
seed = 9
particles = 3000
t_end = 3.0
record_every = 0.25
initial = { r_band = [0.5, 2.0], speed = { kind = "fixed", r = 1.0 }, bumps = [
    { center = { re = 0.0, im = 0.0 }, direction = 0.0, spatial_width = 0.7, amplitude = 5.0 },
] }
observable = { bump = { center = { re = 0.0, im = 0.0 }, direction = 0.0, spatial_width = 0.7, amplitude = 1.0 } }
"#;

pub const NONLINEAR: &str = r#"
kind = "nonlinear-damping"
seed = 4
particles = 400
dt = 0.1
t_end = 1.0
record_every = 0.2
kernel = { amplitude = 1.0 }
initial = { r_band = [0.7, 1.4285714285714286], speed = { kind = "smooth" }, normalization = 0.1, bumps = [
    { center = { re = 0.0, im = 0.0 }, direction = 0.0, spatial_width = 0.5, angular_width = 0.5, amplitude = 4.0 },
] }
nonlinear = { bins = { lo = 0.7, hi = 1.4285714285714286, count = 4, ramp = 0.05 }, zero_mean_samples = 512 }
outputs = { checkpoint = true, phi_grid = true, surface = true }
"#;

pub fn config(text: &str) -> ExperimentConfig {
    let cfg = ExperimentConfig::from_toml(text).expect("test config parses");
    cfg.validate().expect("test config is valid");
    cfg
}

/// Every file of a run directory, sorted by name.
pub fn dir_contents(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}
