use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::config::{Regime, ScenarioConfig};
use super::steering::{steering_vector, ArrayGeometry};
use crate::{CMatrix, Result, C64};

/// Element spacing of both arrays, in wavelengths.
pub const ELEMENT_SPACING: f64 = 0.5;
/// Relative powers of the BS→RIS paths (LOS first).
const BS_RIS_PATH_POWERS: [f64; 3] = [1.0, 0.5, 0.25];
/// Extra weak BS→RIS path added once four or more users share the channel.
const BS_RIS_EXTRA_PATH_POWER: f64 = 0.1;
/// Per-entry power of the direct BS→user channel.
pub const DIRECT_LINK_POWER: f64 = 0.01;
/// Minimum ratio between the strongest and second-strongest user path.
pub const MIN_LOS_DOMINANCE: f64 = 1.5;
/// Row pairs of G more correlated than this are redrawn.
pub const MAX_USER_CORRELATION: f64 = 0.9;
const MAX_REDRAWS: usize = 100;
/// Stream reserved for the scenario geometry; sample `i` uses stream `i`.
const SCENARIO_STREAM: u64 = u64::MAX;

/// One channel realization: `H` (RIS×BS), `G` (users×RIS), `D` (users×BS).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub h: CMatrix,
    pub g: CMatrix,
    pub d: CMatrix,
}

impl ChannelSample {
    pub fn users(&self) -> usize {
        self.g.nrows()
    }

    pub fn ris_elements(&self) -> usize {
        self.g.ncols()
    }

    pub fn bs_antennas(&self) -> usize {
        self.h.ncols()
    }

    pub fn is_finite(&self) -> bool {
        [&self.h, &self.g, &self.d]
            .iter()
            .all(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// A plane-wave path: arrival direction at the RIS and complex gain.
#[derive(Debug, Clone, PartialEq)]
pub struct PathComponent {
    pub direction: [f64; 3],
    pub gain: C64,
}

/// Deterministic path structure behind one row of `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPaths {
    /// Paths sorted by decreasing power, after row normalization.
    pub paths: Vec<PathComponent>,
}

impl UserPaths {
    pub fn powers(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.gain.norm_sqr()).collect()
    }
}

/// Independent generator for the `index`-th sample of a dataset.
///
/// The split is ChaCha20 keyed by `seed` with the stream id set to `index`,
/// so samples can be drawn in any order or in parallel.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A deployment with its fixed BS→RIS channel.
///
/// Base station and RIS are stationary, so `H` is drawn once from the
/// scenario seed and shared by every sample; `G` and `D` change with the
/// user positions.
#[derive(Debug, Clone)]
pub struct Scenario {
    config: ScenarioConfig,
    bs_ris: CMatrix,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = sample_rng(config.rng_seed, SCENARIO_STREAM);
        let bs_ris = draw_bs_ris(&config, &mut rng)?;
        Ok(Scenario { config, bs_ris })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn bs_ris(&self) -> &CMatrix {
        &self.bs_ris
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelSample {
        self.sample_with_paths(rng).0
    }

    /// Sample plus the deterministic path structure of each user (empty in
    /// the i.i.d. regime).
    pub fn sample_with_paths<R: Rng + ?Sized>(&self, rng: &mut R) -> (ChannelSample, Vec<UserPaths>) {
        let cfg = &self.config;
        let (u, n, m) = (cfg.users, cfg.ris_elements(), cfg.bs_antennas);
        let (g, paths) = match cfg.regime {
            Regime::Iid => (gaussian_matrix(rng, u, n, 1.0), Vec::new()),
            Regime::Deterministic => draw_deterministic_g(cfg, rng),
            Regime::DeterministicPlusIid => {
                let (det, paths) = draw_deterministic_g(cfg, rng);
                let iid = gaussian_matrix(rng, u, n, 1.0);
                (det + iid * C64::new(cfg.mix_power_ratio.sqrt(), 0.0), paths)
            }
        };
        let d = gaussian_matrix(rng, u, m, DIRECT_LINK_POWER);
        let sample = ChannelSample {
            h: self.bs_ris.clone(),
            g,
            d,
        };
        (sample, paths)
    }

    /// `count` samples, sample `i` drawn from [`sample_rng`]`(seed, i)`.
    pub fn dataset(&self, count: usize, seed: u64) -> Vec<ChannelSample> {
        (0..count as u64)
            .map(|i| self.sample(&mut sample_rng(seed, i)))
            .collect()
    }
}

/// Convenience wrapper: builds the scenario from `config` and draws one sample.
pub fn generate_sample<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<ChannelSample> {
    Ok(Scenario::new(config.clone())?.sample(rng))
}

fn ris_geometry(cfg: &ScenarioConfig) -> ArrayGeometry {
    ArrayGeometry::Planar {
        rows: cfg.ris_rows,
        cols: cfg.ris_cols,
    }
}

/// Uniform direction on the front (z > 0) hemisphere.
pub(crate) fn hemisphere_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random::<f64>().max(1e-12);
    let phi = 2.0 * PI * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let mut d = [r * phi.cos(), r * phi.sin(), z];
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    d.iter_mut().for_each(|x| *x /= norm);
    d
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * rng.random::<f64>())
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, power: f64) -> CMatrix {
    let sd = (power / 2.0).sqrt();
    // Row-major draw order keeps samples independent of nalgebra's layout.
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(C64::new(sd * re, sd * im));
    }
    CMatrix::from_row_slice(rows, cols, &entries)
}

fn draw_bs_ris<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<CMatrix> {
    let ris = ris_geometry(cfg);
    let bs = ArrayGeometry::Linear {
        elements: cfg.bs_antennas,
    };
    let mut powers = BS_RIS_PATH_POWERS.to_vec();
    if cfg.users >= 4 {
        powers.push(BS_RIS_EXTRA_PATH_POWER);
    }
    let mut h = CMatrix::zeros(cfg.ris_elements(), cfg.bs_antennas);
    for power in powers {
        let arrival = steering_vector(ris, hemisphere_direction(rng), ELEMENT_SPACING)?;
        let departure = steering_vector(bs, hemisphere_direction(rng), ELEMENT_SPACING)?;
        let gain = random_phase(rng) * (power * cfg.ris_link_gain).sqrt();
        h += (arrival * departure.adjoint()) * gain;
    }
    Ok(h)
}

fn draw_user_paths<R: Rng + ?Sized>(rng: &mut R) -> Vec<(f64, [f64; 3], C64)> {
    let count = rng.random_range(2..=4usize);
    let mut powers = vec![1.0];
    for _ in 1..count {
        powers.push(rng.random_range(0.1..1.0 / MIN_LOS_DOMINANCE));
    }
    powers[1..].sort_by(|a, b| b.total_cmp(a));
    powers
        .into_iter()
        .map(|p| (p, hemisphere_direction(rng), random_phase(rng)))
        .collect()
}

fn row_correlation(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm() / (a.norm() * b.norm())
}

fn draw_deterministic_g<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> (CMatrix, Vec<UserPaths>) {
    let ris = ris_geometry(cfg);
    let n = cfg.ris_elements();
    let mut rows: Vec<DVector<C64>> = Vec::with_capacity(cfg.users);
    let mut all_paths = Vec::with_capacity(cfg.users);
    for _ in 0..cfg.users {
        let mut attempt = 0;
        loop {
            attempt += 1;
            let drawn = draw_user_paths(rng);
            let mut row = DVector::<C64>::zeros(n);
            for (power, dir, phase) in &drawn {
                let a = steering_vector(ris, *dir, ELEMENT_SPACING).expect("unit direction");
                row += a * (phase * power.sqrt());
            }
            let mean_power = row.norm_squared() / n as f64;
            let scale = 1.0 / mean_power.sqrt();
            row *= C64::new(scale, 0.0);
            let diverse = rows
                .iter()
                .all(|prev| row_correlation(prev, &row) <= MAX_USER_CORRELATION);
            if diverse || attempt >= MAX_REDRAWS {
                all_paths.push(UserPaths {
                    paths: drawn
                        .into_iter()
                        .map(|(power, direction, phase)| PathComponent {
                            direction,
                            gain: phase * (power.sqrt() * scale),
                        })
                        .collect(),
                });
                rows.push(row);
                break;
            }
        }
    }
    let mut g = CMatrix::zeros(cfg.users, n);
    for (u, row) in rows.iter().enumerate() {
        g.set_row(u, &row.transpose());
    }
    (g, all_paths)
}
