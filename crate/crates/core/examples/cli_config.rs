//! Runs a CLI command in-process on a config built in code.

use nonlocal_robin::cli::{run, Command};

const CONFIG: &str = r#"{
  "domain": {"omega": {"interval": [0.0, 1.0]}, "mesh_size": 0.0625},
  "family": {"kind": {"power_times_log": {"alpha": 1.0}}, "exponent": {"constant": 2.5}},
  "reaction": {"kind": "power_plus_log", "exponent": {"constant": 2.2}, "c1": 20.0, "c2": 1.0},
  "s": 0.4,
  "beta": {"affine": {"base": 1.0, "slope": 0.5}},
  "samples": {"green": 10}
}"#;

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("nlrobin-cli-example");
    std::fs::create_dir_all(&dir)?;
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, CONFIG)?;
    let code = run(Command::GreenCheck, &cfg, &dir.join("green"));
    println!("green-check exit code {code}");
    println!("{}", std::fs::read_to_string(dir.join("green").join("green.csv"))?);
    Ok(())
}
