use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use signal_analysis::los::DelayPolicy;
use signal_analysis::Config;

use crate::args::{Cli, Command, Format};
use crate::error::CliError;

pub const CONFIG_DIR_ENV: &str = "ANALYZER_CONFIG_DIR";
pub const CONFIG_FILE_NAME: &str = "analyzer.toml";

/// Everything a run needs, with every path checked up front.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: Command,
    pub cycles: PathBuf,
    pub approaches: Option<PathBuf>,
    pub config_path: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub intersections: Vec<String>,
    pub config: Config,
    /// Set only when given on the command line.
    pub policy: Option<DelayPolicy>,
}

fn existing_file(path: &Path) -> Result<PathBuf, CliError> {
    match fs::metadata(path) {
        Ok(m) if m.is_file() => Ok(path.to_path_buf()),
        Ok(_) => Err(CliError::io(
            path,
            io::Error::new(io::ErrorKind::InvalidInput, "not a file"),
        )),
        Err(e) => Err(CliError::io(path, e)),
    }
}

/// `--config`, else `$ANALYZER_CONFIG_DIR/analyzer.toml` if it exists.
fn config_source(
    explicit: Option<&Path>,
    env_dir: Option<&Path>,
) -> Result<Option<PathBuf>, CliError> {
    if let Some(p) = explicit {
        return existing_file(p).map(Some);
    }
    Ok(env_dir
        .map(|d| d.join(CONFIG_FILE_NAME))
        .filter(|p| p.is_file()))
}

/// Defaults, then the config file, then command-line flags.
pub fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Config::from_toml_str(&text).map_err(CliError::in_file(p))
        }
    }
}

impl RunManifest {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        Self::resolve(
            cli,
            std::env::var_os(CONFIG_DIR_ENV)
                .map(PathBuf::from)
                .as_deref(),
        )
    }

    pub fn resolve(cli: &Cli, env_dir: Option<&Path>) -> Result<Self, CliError> {
        let o = &cli.options;
        let name = cli.command.name();
        let cycles = o
            .cycles
            .as_deref()
            .ok_or(CliError::MissingArgument(name, "cycles"))?;
        let cycles = existing_file(cycles)?;
        let needs_approaches = !matches!(cli.command, Command::Validate | Command::PeakHours);
        let approaches = match &o.approaches {
            Some(p) => Some(existing_file(p)?),
            None if needs_approaches => return Err(CliError::MissingArgument(name, "approaches")),
            None => None,
        };
        if let Some(out) = &o.out {
            if out.exists() && !out.is_dir() {
                return Err(CliError::io(
                    out,
                    io::Error::new(
                        io::ErrorKind::AlreadyExists,
                        "output path exists and is not a directory",
                    ),
                ));
            }
        }
        let config_path = config_source(o.config.as_deref(), env_dir)?;

        let mut config = load_config(config_path.as_deref())?;
        if let Some(w) = o.window {
            config.peak.window_s = w;
        }
        if let Some(s) = o.span {
            config.peak.span = s;
        }
        if let Some(d) = o.days {
            config.peak.days = d.into();
        }
        let policy = o.policy.map(DelayPolicy::from);
        if let Some(p) = policy {
            config.delay.policy = p;
        }
        config.validate()?;

        Ok(RunManifest {
            command: cli.command,
            cycles,
            approaches,
            config_path,
            out: o.out.clone(),
            format: o.format,
            intersections: o.intersection.clone(),
            config,
            policy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;
    use std::io::Write;

    fn cli(args: &[&str]) -> Cli {
        Cli::parse_from(std::iter::once("analyze").chain(args.iter().copied()))
    }

    #[test]
    fn missing_cycle_file_is_io() {
        let err = RunManifest::resolve(&cli(&["validate", "--cycles", "/nonexistent/c.csv"]), None)
            .unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_IO);
    }

    #[test]
    fn approaches_required_for_pipeline_commands() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.csv");
        fs::write(&c, "approach_id,cycle_length_s,red_s,green_s\n").unwrap();
        let c = c.to_str().unwrap();
        assert!(RunManifest::resolve(&cli(&["validate", "--cycles", c]), None).is_ok());
        assert!(matches!(
            RunManifest::resolve(&cli(&["flow", "--cycles", c]), None),
            Err(CliError::MissingArgument("flow", "approaches"))
        ));
    }

    #[test]
    fn precedence_defaults_file_flags() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.csv");
        fs::write(&c, "approach_id,cycle_length_s,red_s,green_s\n").unwrap();
        let mut f = fs::File::create(dir.path().join(CONFIG_FILE_NAME)).unwrap();
        writeln!(f, "[peak]\nspan = 6\nwindow_s = 900").unwrap();
        let c = c.to_str().unwrap();

        let m = RunManifest::resolve(&cli(&["peak-hours", "--cycles", c]), None).unwrap();
        assert_eq!((m.config.peak.span, m.config.peak.window_s), (4, 1800));

        let m =
            RunManifest::resolve(&cli(&["peak-hours", "--cycles", c]), Some(dir.path())).unwrap();
        assert_eq!((m.config.peak.span, m.config.peak.window_s), (6, 900));

        let m = RunManifest::resolve(
            &cli(&["peak-hours", "--cycles", c, "--span", "2"]),
            Some(dir.path()),
        )
        .unwrap();
        assert_eq!((m.config.peak.span, m.config.peak.window_s), (2, 900));
    }

    #[test]
    fn bad_flag_values_are_input_errors() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.csv");
        fs::write(&c, "").unwrap();
        let err = RunManifest::resolve(
            &cli(&[
                "peak-hours",
                "--cycles",
                c.to_str().unwrap(),
                "--window",
                "0",
            ]),
            None,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_INPUT);
    }
}
