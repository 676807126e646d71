//! Flat key/value configuration shared by all subcommands.
//!
//! Files are INI-style; section headers are accepted and ignored, so every key
//! lives in one namespace and can be overridden from the command line with
//! `--key value`.

use std::fmt;
use std::path::Path;

use ini::Ini;

use super::HarnessError;
use crate::channel::{ChannelKind, SnrConvention, RAYLEIGH_K};
use crate::infotheory::{FadingMethod, MiMethod, Scheme, Stage2Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimScheme {
    /// Single binary LDPC over all bits of each dimension.
    Bicm,
    /// Binary LDPC soft stage on bit LLRs, RS hard stage.
    TwoStageBinary,
    /// Ring LDPC soft stage decoded by ADBP, RS hard stage.
    TwoStageAdbp,
}

impl SimScheme {
    pub fn label(self) -> &'static str {
        match self {
            SimScheme::Bicm => "bicm",
            SimScheme::TwoStageBinary => "2sd_sh_binary",
            SimScheme::TwoStageAdbp => "2sd_sh_adbp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bicm" => Some(SimScheme::Bicm),
            "2sd_sh_binary" => Some(SimScheme::TwoStageBinary),
            "2sd_sh_adbp" => Some(SimScheme::TwoStageAdbp),
            _ => None,
        }
    }
}

impl fmt::Display for SimScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Stage-1 likelihoods fed to the binary soft decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlrMode {
    Exact,
    VonMises,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: SimScheme,
    /// Bits per real dimension.
    pub m: u32,
    pub m1: u32,
    pub channel: ChannelKind,
    pub convention: SnrConvention,
    pub snr_db: Vec<f64>,
    /// Soft-stage code length: bits for binary codes, ring symbols for ADBP.
    pub n: usize,
    pub dv: usize,
    pub dc: usize,
    pub max_iter: usize,
    /// Correctable symbols per RS block.
    pub rs_t: usize,
    /// Frame budget per SNR point.
    pub frames: u64,
    pub min_frames: u64,
    /// Symbol errors after which a point stops early.
    pub target_errors: u64,
    pub seed: u64,
    /// Feed the true stage-1 indices to the hard detector.
    pub genie: bool,
    pub llr: LlrMode,
    pub mi_schemes: Vec<Scheme>,
    pub mi_m: Vec<u32>,
    pub mi_method: MiMethod,
    pub gh_nodes: usize,
    pub fading_samples: usize,
    pub fading_method: FadingMethod,
    pub stage2_method: Stage2Method,
    /// Observations per SNR point for `llr-check`.
    pub llr_points: usize,
    pub c_soft: f64,
    pub c_hard: f64,
    pub c_llr: f64,
    pub c_hd: f64,
    pub r1: f64,
    pub r2: f64,
    /// Range of `m` for the complexity table; empty range means only `m`.
    pub m_min: u32,
    pub m_max: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scheme: SimScheme::TwoStageBinary,
            m: 3,
            m1: 2,
            channel: ChannelKind::Awgn,
            convention: SnrConvention::PerDimension,
            snr_db: vec![10.0, 11.0, 12.0],
            n: 4800,
            dv: 3,
            dc: 9,
            max_iter: 50,
            rs_t: 2,
            frames: 200,
            min_frames: 10,
            target_errors: 200,
            seed: 1,
            genie: false,
            llr: LlrMode::Exact,
            mi_schemes: vec![Scheme::Bicm, Scheme::TwoStage],
            mi_m: vec![1, 2, 3, 4, 5],
            mi_method: MiMethod::Quadrature,
            gh_nodes: 64,
            fading_samples: 10_000,
            fading_method: FadingMethod::Tabulated,
            stage2_method: Stage2Method::Analytic,
            llr_points: 101,
            c_soft: 1.0,
            c_hard: 1.0,
            c_llr: 1.0,
            c_hd: 1.0,
            r1: 0.75,
            r2: 251.0 / 255.0,
            m_min: 0,
            m_max: 0,
        }
    }
}

/// Every key accepted by [`SimConfig::set`].
pub const KEYS: &[&str] = &[
    "scheme",
    "m",
    "m1",
    "channel",
    "k",
    "snr_convention",
    "snr_db",
    "n",
    "dv",
    "dc",
    "max_iter",
    "rs_t",
    "frames",
    "min_frames",
    "target_errors",
    "seed",
    "genie",
    "llr",
    "mi_schemes",
    "mi_m",
    "mi_method",
    "mc_samples",
    "gh_nodes",
    "fading_samples",
    "fading_method",
    "stage2_method",
    "llr_points",
    "c_soft",
    "c_hard",
    "c_llr",
    "c_hd",
    "r1",
    "r2",
    "m_min",
    "m_max",
];

fn bad(key: &str, value: &str, what: &str) -> HarnessError {
    HarnessError::Config(format!("{key} = {value:?}: expected {what}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str, what: &str) -> Result<T, HarnessError> {
    value.trim().parse().map_err(|_| bad(key, value, what))
}

fn list<T>(key: &str, value: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, HarnessError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).ok_or_else(|| bad(key, s, "a list item")))
        .collect()
}

/// Parses `a:step:b` (inclusive) or a comma-separated list of values.
pub fn parse_grid(value: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let (a, s, b): (f64, f64, f64) =
            (parts[0].parse().ok()?, parts[1].parse().ok()?, parts[2].parse().ok()?);
        if !(s > 0.0) || b < a {
            return None;
        }
        let count = ((b - a) / s + 1e-9).floor() as usize + 1;
        return Some((0..count).map(|i| a + i as f64 * s).collect());
    }
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().ok())
        .collect()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

impl SimConfig {
    /// Applies one key/value pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let v = value.trim();
        match key {
            "scheme" => {
                self.scheme =
                    SimScheme::parse(v).ok_or_else(|| bad(key, v, "bicm, 2sd_sh_binary or 2sd_sh_adbp"))?
            }
            "m" => self.m = num(key, v, "an integer")?,
            "m1" => self.m1 = num(key, v, "an integer")?,
            "channel" => {
                self.channel = match v {
                    "awgn" => ChannelKind::Awgn,
                    "rayleigh" => ChannelKind::Rician { k: RAYLEIGH_K },
                    "rician" => match self.channel {
                        ChannelKind::Rician { k } => ChannelKind::Rician { k },
                        ChannelKind::Awgn => ChannelKind::Rician { k: 1.0 },
                    },
                    _ => return Err(bad(key, v, "awgn, rician or rayleigh")),
                }
            }
            "k" => {
                let k: f64 = num(key, v, "a non-negative number")?;
                if !(k >= 0.0) {
                    return Err(bad(key, v, "a non-negative number"));
                }
                if let ChannelKind::Rician { k: kk } = &mut self.channel {
                    *kk = k;
                } else {
                    self.channel = ChannelKind::Rician { k };
                }
            }
            "snr_convention" => {
                self.convention = SnrConvention::parse(v)
                    .ok_or_else(|| bad(key, v, "esn0_per_dim or esn0_complex_sigma2_n0"))?
            }
            "snr_db" => {
                self.snr_db =
                    parse_grid(v).ok_or_else(|| bad(key, v, "a:step:b or a comma-separated list"))?
            }
            "n" => self.n = num(key, v, "an integer")?,
            "dv" => self.dv = num(key, v, "an integer")?,
            "dc" => self.dc = num(key, v, "an integer")?,
            "max_iter" => self.max_iter = num(key, v, "an integer")?,
            "rs_t" => self.rs_t = num(key, v, "an integer")?,
            "frames" => self.frames = num(key, v, "an integer")?,
            "min_frames" => self.min_frames = num(key, v, "an integer")?,
            "target_errors" => self.target_errors = num(key, v, "an integer")?,
            "seed" => self.seed = num(key, v, "an unsigned integer")?,
            "genie" => self.genie = parse_bool(v).ok_or_else(|| bad(key, v, "true or false"))?,
            "llr" => {
                self.llr = match v {
                    "exact" => LlrMode::Exact,
                    "vonmises" => LlrMode::VonMises,
                    _ => return Err(bad(key, v, "exact or vonmises")),
                }
            }
            "mi_schemes" => self.mi_schemes = list(key, v, Scheme::parse)?,
            "mi_m" => self.mi_m = list(key, v, |s| s.parse().ok())?,
            "mi_method" => {
                self.mi_method = match v {
                    "quadrature" => MiMethod::Quadrature,
                    "mc" => MiMethod::MonteCarlo { n_samples: 100_000 },
                    _ => return Err(bad(key, v, "quadrature or mc")),
                }
            }
            "mc_samples" => {
                let n: usize = num(key, v, "an integer")?;
                if let MiMethod::MonteCarlo { n_samples } = &mut self.mi_method {
                    *n_samples = n;
                }
                if let Stage2Method::MonteCarlo { n_samples } = &mut self.stage2_method {
                    *n_samples = n;
                }
            }
            "gh_nodes" => self.gh_nodes = num(key, v, "an integer")?,
            "fading_samples" => self.fading_samples = num(key, v, "an integer")?,
            "fading_method" => {
                self.fading_method = match v {
                    "tabulated" => FadingMethod::Tabulated,
                    "direct" => FadingMethod::Direct,
                    _ => return Err(bad(key, v, "tabulated or direct")),
                }
            }
            "stage2_method" => {
                self.stage2_method = match v {
                    "analytic" => Stage2Method::Analytic,
                    "mc" => Stage2Method::MonteCarlo { n_samples: 100_000 },
                    _ => return Err(bad(key, v, "analytic or mc")),
                }
            }
            "llr_points" => self.llr_points = num(key, v, "an integer")?,
            "c_soft" => self.c_soft = num(key, v, "a number")?,
            "c_hard" => self.c_hard = num(key, v, "a number")?,
            "c_llr" => self.c_llr = num(key, v, "a number")?,
            "c_hd" => self.c_hd = num(key, v, "a number")?,
            "r1" => self.r1 = num(key, v, "a number")?,
            "r2" => self.r2 = num(key, v, "a number")?,
            "m_min" => self.m_min = num(key, v, "an integer")?,
            "m_max" => self.m_max = num(key, v, "an integer")?,
            _ => return Err(HarnessError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies every key of an INI document, ignoring section names.
    pub fn apply_ini(&mut self, text: &str) -> Result<(), HarnessError> {
        let doc = Ini::load_from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        for (_, props) in doc.iter() {
            for (k, v) in props.iter() {
                self.set(k, v)?;
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = SimConfig::default();
        cfg.apply_ini(&text)?;
        Ok(cfg)
    }

    /// Checks the cross-field constraints.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |s: String| Err(HarnessError::Config(s));
        if self.m == 0 || self.m > crate::constellation::MAX_BITS_PER_DIM {
            return err(format!("m = {} outside 1..=14", self.m));
        }
        if self.scheme != SimScheme::Bicm && (self.m1 == 0 || self.m1 > self.m) {
            return err(format!("need 1 <= m1 <= m (m = {}, m1 = {})", self.m, self.m1));
        }
        if self.snr_db.is_empty() {
            return err("snr_db is empty".into());
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) || self.snr_db.iter().any(|v| !v.is_finite())
        {
            return err("snr_db must be finite and strictly increasing".into());
        }
        if self.frames == 0 || self.max_iter == 0 {
            return err("frames and max_iter must be positive".into());
        }
        if self.gh_nodes < 2 || self.fading_samples == 0 {
            return err("gh_nodes must be at least 2 and fading_samples positive".into());
        }
        Ok(())
    }

    /// Soft-stage bits per dimension (all `m` for BICM).
    pub fn soft_bits(&self) -> u32 {
        if self.scheme == SimScheme::Bicm {
            self.m
        } else {
            self.m1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:0.5:1.5").unwrap(), vec![0.0, 0.5, 1.0, 1.5]);
        assert_eq!(parse_grid("3, 1.5").unwrap(), vec![3.0, 1.5]);
        assert!(parse_grid("1:0:2").is_none());
        assert!(parse_grid("x").is_none());
    }

    #[test]
    fn ini_with_sections_and_overrides() {
        let mut c = SimConfig::default();
        c.apply_ini("[modulation]\nm = 4\nm1 = 2\n[channel]\nchannel = rician\nk = 2.5\nsnr_db = 1:1:3\n")
            .unwrap();
        assert_eq!((c.m, c.m1), (4, 2));
        assert_eq!(c.channel, ChannelKind::Rician { k: 2.5 });
        assert_eq!(c.snr_db, vec![1.0, 2.0, 3.0]);
        c.set("channel", "awgn").unwrap();
        assert_eq!(c.channel, ChannelKind::Awgn);
        assert!(matches!(c.set("nope", "1"), Err(HarnessError::UnknownKey(_))));
        assert!(c.set("m", "four").is_err());
        c.validate().unwrap();
        c.snr_db = vec![2.0, 1.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn every_key_is_accepted() {
        let sample = |k: &str| match k {
            "scheme" => "2sd_sh_adbp",
            "channel" => "rayleigh",
            "snr_convention" => "esn0_per_dim",
            "snr_db" => "1,2",
            "genie" => "true",
            "llr" => "vonmises",
            "mi_schemes" => "bicm,2sd_sh",
            "mi_m" => "2,3",
            "mi_method" => "mc",
            "fading_method" => "direct",
            "stage2_method" => "mc",
            _ => "2",
        };
        let mut c = SimConfig::default();
        for k in KEYS {
            c.set(k, sample(k)).unwrap_or_else(|e| panic!("{k}: {e}"));
        }
    }
}
