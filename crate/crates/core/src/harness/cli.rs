//! `twostage` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::complexity::{complexity_bicm, complexity_msd};
use super::config::{SimConfig, KEYS};
use super::output::{fmt_num, version, Table};
use super::sim::run_ber_sim;
use super::sweeps::{run_llr_check, run_mi_curve};
use super::HarnessError;

#[derive(Debug, Parser)]
#[command(name = "twostage", version, about = "Two-stage soft/hard coded modulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Capacity-loss curves (BICM and two-stage) over an SNR grid.
    MiCurve(Common),
    /// Monte Carlo BER/SER of a full coded chain.
    BerSim(Common),
    /// Exact versus Von Mises stage-1 likelihoods along an observation sweep.
    LlrCheck(Common),
    /// Decoder complexity per information bit.
    Complexity(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// INI-style configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Configuration overrides given as `--key value` pairs.
    #[arg(
        value_name = "--KEY VALUE",
        trailing_var_arg = true,
        allow_hyphen_values = true,
        num_args = 0..
    )]
    overrides: Vec<String>,
}

fn load(common: &Common) -> Result<SimConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(p) => SimConfig::from_file(p)?,
        None => SimConfig::default(),
    };
    let mut it = common.overrides.iter();
    while let Some(flag) = it.next() {
        let (key, inline) = match flag.strip_prefix("--") {
            Some(rest) => match rest.split_once('=') {
                Some((k, v)) => (k.to_string(), Some(v.to_string())),
                None => (rest.to_string(), None),
            },
            None => {
                return Err(HarnessError::Config(format!("expected --key, found `{flag}`")));
            }
        };
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(HarnessError::UnknownKey(key));
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .cloned()
                .ok_or_else(|| HarnessError::Config(format!("--{key} needs a value")))?,
        };
        cfg.set(&key, &value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn mi_curve<W: Write>(cfg: &SimConfig, out: W) -> Result<(), HarnessError> {
    let mut t = Table::new(
        out,
        &[
            "snr_db",
            "snr_db_complex",
            "scheme",
            "m",
            "m1",
            "mi_per_dim",
            "loss_per_dim",
            "std_err",
            "channel",
            "snr_convention",
            "version",
        ],
    )?;
    for p in run_mi_curve(cfg)? {
        t.row(&[
            fmt_num(p.snr_db),
            fmt_num(p.snr_db_complex),
            p.scheme.label().into(),
            p.m.to_string(),
            p.m1.to_string(),
            fmt_num(p.mi_per_dim),
            fmt_num(p.loss_per_dim),
            fmt_num(p.std_err),
            p.channel,
            cfg.convention.label().into(),
            version(),
        ])?;
    }
    t.finish()
}

fn ber_sim<W: Write>(cfg: &SimConfig, out: W) -> Result<(), HarnessError> {
    let mut t = Table::new(
        out,
        &[
            "snr_db",
            "scheme",
            "m",
            "m1",
            "rc",
            "ber_soft",
            "ber_soft_raw",
            "ber_hard",
            "ber_hard_raw",
            "ser_total",
            "frames",
            "error_events",
            "seed",
            "converged_fraction",
            "soft_code",
            "channel",
            "snr_convention",
            "version",
        ],
    )?;
    for r in run_ber_sim(cfg)? {
        if r.undersampled {
            eprintln!(
                "warning: {} dB: {} error events in {} frames, below the target of {}",
                fmt_num(r.snr_db),
                r.error_events,
                r.frames,
                cfg.target_errors
            );
        }
        t.row(&[
            fmt_num(r.snr_db),
            r.scheme.label().into(),
            r.m.to_string(),
            r.m1.to_string(),
            fmt_num(r.rc),
            fmt_num(r.ber_soft),
            fmt_num(r.ber_soft_raw),
            fmt_num(r.ber_hard),
            fmt_num(r.ber_hard_raw),
            fmt_num(r.ser_total),
            r.frames.to_string(),
            r.error_events.to_string(),
            r.seed.to_string(),
            fmt_num(r.converged_fraction),
            r.soft_code,
            cfg.channel.describe(),
            cfg.convention.label().into(),
            version(),
        ])?;
    }
    t.finish()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(" ")
}

fn llr_check<W: Write>(cfg: &SimConfig, out: W) -> Result<(), HarnessError> {
    let mut t = Table::new(
        out,
        &["snr_db", "y", "lambda_exact", "lambda_vonmises", "sup_err", "snr_convention", "version"],
    )?;
    for r in run_llr_check(cfg)? {
        t.row(&[
            fmt_num(r.snr_db),
            fmt_num(r.y),
            join(&r.exact),
            join(&r.vonmises),
            fmt_num(r.sup_err),
            cfg.convention.label().into(),
            version(),
        ])?;
    }
    t.finish()
}

fn complexity<W: Write>(cfg: &SimConfig, out: W) -> Result<(), HarnessError> {
    let mut t = Table::new(
        out,
        &["m", "m1", "r1", "r2", "rc", "x", "complexity_msd", "complexity_bicm", "version"],
    )?;
    let ms: Vec<u32> = if cfg.m_min > 0 && cfg.m_max >= cfg.m_min {
        (cfg.m_min..=cfg.m_max).collect()
    } else {
        vec![cfg.m]
    };
    for m in ms {
        let m1 = cfg.m1.min(m);
        let msd = complexity_msd(cfg.c_soft, cfg.c_hard, cfg.c_llr, cfg.c_hd, m, m1, cfg.r1, cfg.r2)?;
        let bicm = complexity_bicm(cfg.c_soft, cfg.c_llr, m, msd.rc)?;
        t.row(&[
            m.to_string(),
            m1.to_string(),
            fmt_num(cfg.r1),
            fmt_num(cfg.r2),
            fmt_num(msd.rc),
            fmt_num(msd.x),
            fmt_num(msd.value),
            fmt_num(bicm.value),
            version(),
        ])?;
    }
    t.finish()
}

fn run(command: &Command) -> Result<(), HarnessError> {
    let (common, f): (&Common, fn(&SimConfig, &mut Vec<u8>) -> Result<(), HarnessError>) =
        match command {
            Command::MiCurve(c) => (c, |cfg, out| mi_curve(cfg, out)),
            Command::BerSim(c) => (c, |cfg, out| ber_sim(cfg, out)),
            Command::LlrCheck(c) => (c, |cfg, out| llr_check(cfg, out)),
            Command::Complexity(c) => (c, |cfg, out| complexity(cfg, out)),
        };
    let cfg = load(common)?;
    let mut buf = Vec::new();
    f(&cfg, &mut buf)?;
    match &common.out {
        Some(path) => std::fs::write(path, buf)?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit status: 0 success, 1 runtime failure, 2 usage error.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 2 {
                eprintln!("accepted keys: {}", KEYS.join(", "));
            }
            e.exit_code()
        }
    }
}
