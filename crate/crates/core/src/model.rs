//! Network model: configuration, one random realization of all link SNRs,
//! relay paths and the end-to-end rate objective.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::error::{Error, Result};

/// Shape and SNR scale of the random relay network.
///
/// `snr_scale` is the mean link SNR `P·σ₁²/σ²` (linear). All links share it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    hops: usize,
    relays: usize,
    snr_scale: f64,
}

impl NetworkConfig {
    pub fn new(hops: usize, relays: usize, snr_scale: f64) -> Result<Self> {
        if hops < 2 {
            return Err(Error::Config(format!(
                "hops must be at least 2, got {hops}"
            )));
        }
        if relays < 1 {
            return Err(Error::Config("relays per hop must be at least 1".into()));
        }
        if !(snr_scale.is_finite() && snr_scale > 0.0) {
            return Err(Error::Config(format!(
                "snr scale must be positive and finite, got {snr_scale}"
            )));
        }
        Ok(Self {
            hops,
            relays,
            snr_scale,
        })
    }

    /// Builds a configuration from the mean link SNR in dB.
    pub fn from_db(hops: usize, relays: usize, snr_db: f64) -> Result<Self> {
        Self::new(hops, relays, db_to_linear(snr_db))
    }

    pub fn hops(&self) -> usize {
        self.hops
    }

    pub fn relays(&self) -> usize {
        self.relays
    }

    pub fn snr_scale(&self) -> f64 {
        self.snr_scale
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * libm::log10(self.snr_scale)
    }

    /// Number of source-to-destination paths, `M^(L-1)`, if it fits in a `u128`.
    pub fn path_count(&self) -> Option<u128> {
        (self.relays as u128).checked_pow(u32::try_from(self.hops - 1).ok()?)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// One realization of every link SNR in the network.
///
/// Hop `h` (0-based) connects layer `h` to layer `h + 1`. Layer 0 is the
/// source and layer `L` the destination; both hold a single node, every
/// other layer holds `M` relays.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrTrellis {
    hops: usize,
    relays: usize,
    first: Vec<f64>,
    // (L-2) row-major M×M matrices, hop by hop.
    mid: Vec<f64>,
    last: Vec<f64>,
}

impl SnrTrellis {
    /// Builds a trellis from explicit link SNRs: source→relay, one
    /// `mid[h][i][j]` matrix per relay-to-relay hop, relay→destination.
    pub fn new(first: Vec<f64>, mid: Vec<Vec<Vec<f64>>>, last: Vec<f64>) -> Result<Self> {
        let relays = first.len();
        if relays == 0 {
            return Err(Error::Config("trellis needs at least one relay".into()));
        }
        if last.len() != relays {
            return Err(Error::Config(format!(
                "last hop has {} links, expected {relays}",
                last.len()
            )));
        }
        let mut flat = Vec::with_capacity(mid.len() * relays * relays);
        for (h, matrix) in mid.iter().enumerate() {
            if matrix.len() != relays || matrix.iter().any(|row| row.len() != relays) {
                return Err(Error::Config(format!(
                    "relay hop {} is not a {relays}×{relays} matrix",
                    h + 1
                )));
            }
            flat.extend(matrix.iter().flatten().copied());
        }
        let trellis = Self {
            hops: mid.len() + 2,
            relays,
            first,
            mid: flat,
            last,
        };
        trellis.check_values()?;
        Ok(trellis)
    }

    fn check_values(&self) -> Result<()> {
        let all = self.first.iter().chain(&self.mid).chain(&self.last);
        for &v in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "link SNRs must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Draws every link SNR i.i.d. exponential with mean `snr_scale` by
    /// inverse-CDF transform.
    ///
    /// Draw order is fixed: source links by relay, then each relay hop in
    /// row-major order, then destination links.
    pub fn sample<R: RngCore + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Self {
        let m = config.relays;
        let scale = config.snr_scale;
        let mut draw = || exponential(rng, scale);
        let first = (0..m).map(|_| draw()).collect();
        let mid = (0..(config.hops - 2) * m * m).map(|_| draw()).collect();
        let last = (0..m).map(|_| draw()).collect();
        Self {
            hops: config.hops,
            relays: m,
            first,
            mid,
            last,
        }
    }

    pub fn hops(&self) -> usize {
        self.hops
    }

    pub fn relays(&self) -> usize {
        self.relays
    }

    /// Number of nodes in `layer` (0 = source, `hops` = destination).
    pub fn layer_size(&self, layer: usize) -> usize {
        if layer == 0 || layer == self.hops {
            1
        } else {
            self.relays
        }
    }

    /// SNR of the link in hop `hop` (0-based) from node `from` of layer
    /// `hop` to node `to` of layer `hop + 1`.
    #[inline]
    pub fn link(&self, hop: usize, from: usize, to: usize) -> f64 {
        debug_assert!(from < self.layer_size(hop) && to < self.layer_size(hop + 1));
        if hop == 0 {
            self.first[to]
        } else if hop == self.hops - 1 {
            self.last[from]
        } else {
            let m = self.relays;
            self.mid[(hop - 1) * m * m + from * m + to]
        }
    }

    pub fn first_hop(&self) -> &[f64] {
        &self.first
    }

    pub fn last_hop(&self) -> &[f64] {
        &self.last
    }

    /// Row-major `M×M` matrix of relay hop `hop` (1-based position in the
    /// route, i.e. `1..=L-2`).
    pub fn mid_hop(&self, hop: usize) -> &[f64] {
        let m2 = self.relays * self.relays;
        &self.mid[(hop - 1) * m2..hop * m2]
    }
}

/// Exponential variate with the given mean via `-mean·ln(1-U)`, `U ∈ [0,1)`.
pub fn exponential<R: RngCore + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    -mean * libm::log1p(-u)
}

/// Draws a trellis; see [`SnrTrellis::sample`].
pub fn sample_trellis<R: RngCore + ?Sized>(config: &NetworkConfig, rng: &mut R) -> SnrTrellis {
    SnrTrellis::sample(config, rng)
}

/// Relay chosen at each of the `L-1` intermediate stages, as 0-based
/// indices. Source and destination are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelayPath(Vec<usize>);

impl RelayPath {
    pub fn new(relays: Vec<usize>) -> Self {
        Self(relays)
    }

    /// Builds a path from 1-based relay labels `r(1), …, r(L-1)`.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        labels
            .iter()
            .map(|&r| {
                r.checked_sub(1)
                    .ok_or_else(|| Error::Parameter("relay labels start at 1".into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn relays(&self) -> &[usize] {
        &self.0
    }

    /// 1-based relay labels.
    pub fn labels(&self) -> Vec<usize> {
        self.0.iter().map(|r| r + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for RelayPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, r) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", r + 1)?;
        }
        f.write_str(")")
    }
}

/// Minimum link SNR along `path`, the end-to-end DF SNR.
pub fn path_bottleneck(trellis: &SnrTrellis, path: &RelayPath) -> Result<f64> {
    if path.len() != trellis.hops - 1 {
        return Err(Error::Config(format!(
            "path has {} relays, trellis needs {}",
            path.len(),
            trellis.hops - 1
        )));
    }
    if let Some(&bad) = path.0.iter().find(|&&r| r >= trellis.relays) {
        return Err(Error::Config(format!(
            "relay index {} out of range 1..={}",
            bad + 1,
            trellis.relays
        )));
    }
    Ok(bottleneck_unchecked(trellis, path.relays()))
}

pub(crate) fn bottleneck_unchecked(trellis: &SnrTrellis, relays: &[usize]) -> f64 {
    let mut from = 0;
    let mut worst = f64::INFINITY;
    for hop in 0..trellis.hops {
        // past the last relay is the destination
        let to = relays.get(hop).copied().unwrap_or(0);
        worst = worst.min(trellis.link(hop, from, to));
        from = to;
    }
    worst
}

/// `log2(1 + snr)` in bits/s/Hz.
pub fn rate_of_snr(snr: f64) -> Result<f64> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::Domain(format!("SNR must be nonnegative, got {snr}")));
    }
    Ok(libm::log1p(snr) / core::f64::consts::LN_2)
}
