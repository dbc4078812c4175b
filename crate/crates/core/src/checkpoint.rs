//! Checkpoint container: a text header followed by little-endian `f64` samples.
//!
//! ```text
//! GSQG-CHECKPOINT 1
//! alpha <f64>
//! theta <f64>
//! n_points <usize>
//! length <f64>
//! time <f64>
//! sign_convention <flag>
//! beta_normalization <flag>
//! x_centering <flag>
//! config_hash <hex or ->
//! end_header
//! <n_points × 8 bytes>
//! ```

use std::fs;
use std::path::Path;

use crate::constants::Params;
use crate::error::{Error, Result};
use crate::spectral::{FrontState, Grid};

pub const MAGIC: &str = "GSQG-CHECKPOINT";
pub const FORMAT_VERSION: u32 = 1;
/// Sign convention of the linear term as written in every output.
pub const SIGN_CONVENTION: &str = "phi_t=-Theta*A*|d|^(1-alpha)*phi_x+N";
/// Area factor of the resonant cutoff in the scattering coefficient.
pub const BETA_NORMALIZATION: &str = "psi_integral_squared";
/// Origin of `x` in the scaling field `(2-α)tφ_t + xφ_x`.
pub const X_CENTERING: &str = "x_minus_half_length";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub alpha: f64,
    pub theta: f64,
    pub state: FrontState,
    /// Hash of the producing run configuration, `-` when there is none.
    pub config_hash: String,
}

impl Checkpoint {
    pub fn new(state: &FrontState, params: &Params) -> Self {
        Self {
            alpha: params.alpha,
            theta: params.theta,
            state: state.clone(),
            config_hash: "-".into(),
        }
    }

    pub fn with_config_hash(mut self, hash: &str) -> Self {
        self.config_hash = hash.to_string();
        self
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.alpha, self.theta)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.state.grid();
        let header = format!(
            "{MAGIC} {FORMAT_VERSION}\nalpha {:.16e}\ntheta {:.16e}\nn_points {}\nlength {:.16e}\ntime {:.16e}\nsign_convention {SIGN_CONVENTION}\nbeta_normalization {BETA_NORMALIZATION}\nx_centering {X_CENTERING}\nconfig_hash {}\nend_header\n",
            self.alpha,
            self.theta,
            g.n_points(),
            g.length(),
            self.state.time(),
            self.config_hash
        );
        let mut out = header.into_bytes();
        out.reserve(8 * g.n_points());
        for v in self.state.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let marker = b"end_header\n";
        let end = bytes
            .windows(marker.len())
            .position(|w| w == marker)
            .ok_or_else(|| Error::Format("missing end_header".into()))?;
        let header = std::str::from_utf8(&bytes[..end])
            .map_err(|_| Error::Format("header is not UTF-8".into()))?;
        let body = &bytes[end + marker.len()..];
        let mut lines = header.lines();
        let first = lines.next().unwrap_or_default();
        let version = first
            .strip_prefix(MAGIC)
            .map(str::trim)
            .ok_or_else(|| Error::Format(format!("bad magic line {first:?}")))?;
        if version != FORMAT_VERSION.to_string() {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("missing field {name}")))?;
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::Format(format!("malformed line {line:?}")))?;
            if key != name {
                return Err(Error::Format(format!("expected {name}, found {key}")));
            }
            Ok(value.to_string())
        };
        let num = |s: String, name: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Format(format!("{name}: not a number: {s}")))
        };
        let alpha = num(field("alpha")?, "alpha")?;
        let theta = num(field("theta")?, "theta")?;
        let n: usize = field("n_points")?
            .parse()
            .map_err(|_| Error::Format("n_points: not an integer".into()))?;
        let length = num(field("length")?, "length")?;
        let time = num(field("time")?, "time")?;
        let conv = field("sign_convention")?;
        if conv != SIGN_CONVENTION {
            return Err(Error::Format(format!("unknown sign convention {conv}")));
        }
        for (name, want) in [("beta_normalization", BETA_NORMALIZATION), ("x_centering", X_CENTERING)] {
            let got = field(name)?;
            if got != want {
                return Err(Error::Format(format!("unknown {name} {got}")));
            }
        }
        let config_hash = field("config_hash")?;
        if body.len() != 8 * n {
            return Err(Error::Format(format!(
                "expected {} data bytes, found {}",
                8 * n,
                body.len()
            )));
        }
        let values: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let grid = Grid::new(n, length)?;
        let state = FrontState::new(grid, time, values)?;
        Ok(Self {
            alpha,
            theta,
            state,
            config_hash,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}
