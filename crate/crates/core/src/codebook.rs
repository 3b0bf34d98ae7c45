//! Helper codebooks on the power sphere and the per-message Haar rotations
//! that turn one base codebook into the family `C(m)`.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::capacity::{ChannelParams, HelperRate};
use crate::error::{Error, Result};
use crate::geometry::{dot, norm_sq, Angle};
use crate::seeds::{derive_seed, rng_from_seed, stream};
use crate::stats::{wilson_interval, Z95};

/// Largest helper description length, in bits, that a codebook may be built with.
pub const MAX_HELPER_BITS: u32 = 22;

/// Number of description bits `ceil(n * rate)` for a block of length `n`.
///
/// Products within 1e-9 of an integer are treated as that integer so that
/// e.g. `30 * 0.1` yields 3 rather than 4.
pub fn bits_for_rate(n: usize, rate: f64) -> u32 {
    let x = n as f64 * rate;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as u32
    } else {
        x.ceil() as u32
    }
}

/// An orthogonal `n x n` transform stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    dim: usize,
    rows: Vec<f64>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![0.0; dim * dim];
        for i in 0..dim {
            rows[i * dim + i] = 1.0;
        }
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.rows[row * self.dim + col]
    }

    /// `R v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        self.rows.chunks_exact(self.dim).map(|row| dot(row, v)).collect()
    }

    /// `R^T v`.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for (row, &vi) in self.rows.chunks_exact(self.dim).zip(v) {
            for (o, &r) in out.iter_mut().zip(row) {
                *o += r * vi;
            }
        }
        out
    }

    /// `<y, R b>` without forming `R b`.
    pub fn bilinear(&self, y: &[f64], b: &[f64]) -> f64 {
        self.rows
            .chunks_exact(self.dim)
            .zip(y)
            .map(|(row, &yi)| yi * dot(row, b))
            .sum()
    }

    /// Largest entrywise deviation of `R^T R` from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let g: f64 = (0..n).map(|k| self.entry(k, i) * self.entry(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

/// Haar-distributed orthogonal transform of `R^n`, a pure function of `seed`.
///
/// QR-factorizes a matrix of iid standard normals and multiplies each column of
/// `Q` by the sign of the matching diagonal entry of `R`, which makes the
/// factorization unique and the law of `Q` invariant.
pub fn haar_rotation(n: usize, seed: u64) -> Result<Rotation> {
    if n < 2 {
        return Err(Error::domain(format!("rotation dimension must be >= 2, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut rows = vec![0.0; n * n];
    for j in 0..n {
        let s = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            rows[i * n + j] = s * q[(i, j)];
        }
    }
    Ok(Rotation { dim: n, rows })
}

/// How the per-message transforms are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationMode {
    Haar,
    /// Every message uses the identity; for tests that need `C(m) = C`.
    Identity,
}

/// Base covering codebook plus the seed from which per-message rotations are
/// regenerated on demand.
#[derive(Debug, Clone)]
pub struct HelperCodebook {
    blocklength: usize,
    power: f64,
    helper_bits: u32,
    /// `help_size x blocklength`, row-major.
    base_points: Vec<f64>,
    seed: u64,
    rotation_seed_base: u64,
    rotation_mode: RotationMode,
}

impl HelperCodebook {
    /// Wraps explicit base points (each rescaled onto the power sphere).
    pub fn from_points(
        blocklength: usize,
        power: f64,
        points: &[Vec<f64>],
        seed: u64,
    ) -> Result<Self> {
        if blocklength < 2 {
            return Err(Error::domain("blocklength must be >= 2"));
        }
        if points.is_empty() || !points.len().is_power_of_two() {
            return Err(Error::usage(format!(
                "codebook size must be a positive power of two, got {}",
                points.len()
            )));
        }
        let radius = (blocklength as f64 * power).sqrt();
        let mut base_points = Vec::with_capacity(points.len() * blocklength);
        for p in points {
            if p.len() != blocklength {
                return Err(Error::usage("codeword dimension differs from blocklength"));
            }
            let norm = norm_sq(p).sqrt();
            if norm == 0.0 {
                return Err(Error::domain("zero vector cannot be placed on the sphere"));
            }
            base_points.extend(p.iter().map(|x| x * radius / norm));
        }
        Ok(Self {
            blocklength,
            power,
            helper_bits: points.len().trailing_zeros(),
            base_points,
            seed,
            rotation_seed_base: derive_seed(seed, stream::ROTATIONS),
            rotation_mode: RotationMode::Haar,
        })
    }

    pub fn with_rotation_mode(mut self, mode: RotationMode) -> Self {
        self.rotation_mode = mode;
        self
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn helper_bits(&self) -> u32 {
        self.helper_bits
    }

    pub fn help_size(&self) -> usize {
        1usize << self.helper_bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rotation_mode(&self) -> RotationMode {
        self.rotation_mode
    }

    pub fn base_point(&self, t: usize) -> &[f64] {
        &self.base_points[t * self.blocklength..(t + 1) * self.blocklength]
    }

    pub fn base_points(&self) -> impl Iterator<Item = &[f64]> {
        self.base_points.chunks_exact(self.blocklength)
    }

    /// The transform associated with message `m`.
    pub fn rotation(&self, m: u128) -> Rotation {
        match self.rotation_mode {
            RotationMode::Identity => Rotation::identity(self.blocklength),
            RotationMode::Haar => {
                haar_rotation(self.blocklength, derive_seed(self.rotation_seed_base, m))
                    .expect("blocklength >= 2 checked at construction")
            }
        }
    }

    /// `C(m)`: every base point rotated by message `m`'s transform.
    pub fn message_codebook(&self, m: u128, message_bits: u32) -> Result<Vec<Vec<f64>>> {
        check_message(m, message_bits)?;
        let rot = self.rotation(m);
        Ok(self.base_points().map(|b| rot.apply(b)).collect())
    }

    /// Single codeword `x(m, t)`.
    pub fn codeword(&self, m: u128, t: usize, message_bits: u32) -> Result<Vec<f64>> {
        check_message(m, message_bits)?;
        if t >= self.help_size() {
            return Err(Error::usage(format!(
                "help index {t} out of range for {} codewords",
                self.help_size()
            )));
        }
        Ok(self.rotation(m).apply(self.base_point(t)))
    }

    /// Writes the base codebook: little-endian header `n: u64, P: f64,
    /// help_size: u64, seed: u64`, then `help_size * n` row-major `f64`s.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.blocklength as u64).to_le_bytes())?;
        w.write_all(&self.power.to_le_bytes())?;
        w.write_all(&(self.help_size() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for x in &self.base_points {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a dump produced by [`HelperCodebook::write_dump`].
    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut buf)?;
            Ok(buf)
        };
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let power = f64::from_le_bytes(next(&mut r)?);
        let size = u64::from_le_bytes(next(&mut r)?) as usize;
        let seed = u64::from_le_bytes(next(&mut r)?);
        if n < 2 || !size.is_power_of_two() || size > 1 << MAX_HELPER_BITS {
            return Err(Error::usage("malformed codebook dump header"));
        }
        let mut base_points = Vec::with_capacity(n * size);
        for _ in 0..n * size {
            base_points.push(f64::from_le_bytes(next(&mut r)?));
        }
        Ok(Self {
            blocklength: n,
            power,
            helper_bits: size.trailing_zeros(),
            base_points,
            seed,
            rotation_seed_base: derive_seed(seed, stream::ROTATIONS),
            rotation_mode: RotationMode::Haar,
        })
    }
}

pub(crate) fn check_message(m: u128, message_bits: u32) -> Result<()> {
    if message_bits >= 128 || m >> message_bits != 0 {
        return Err(Error::usage(format!(
            "message {m} out of range for {message_bits} message bits"
        )));
    }
    Ok(())
}

/// A point drawn uniformly from the unit sphere in `R^n`.
pub(crate) fn uniform_unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm_sq(&v).sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Draws `2^{ceil(n R_h)}` points independently and uniformly on the sphere of
/// radius `sqrt(n P)`.
///
/// Covering is not guaranteed at finite `n`; see [`covering_deficiency`].
pub fn build_base_codebook(
    n: usize,
    ch: &ChannelParams,
    rh: HelperRate,
    eps: f64,
    seed: u64,
) -> Result<HelperCodebook> {
    if n < 2 {
        return Err(Error::domain(format!("blocklength must be >= 2, got {n}")));
    }
    if rh.bits() > 0.0 && !(eps > 0.0 && eps < rh.bits()) {
        return Err(Error::domain(format!(
            "slack must satisfy 0 < eps < R_h, got eps = {eps}, R_h = {}",
            rh.bits()
        )));
    }
    let helper_bits = bits_for_rate(n, rh.bits());
    if helper_bits > MAX_HELPER_BITS {
        return Err(Error::Capacity(format!(
            "helper codebook needs 2^{helper_bits} codewords; limit is 2^{MAX_HELPER_BITS}"
        )));
    }
    let size = 1usize << helper_bits;
    let radius = (n as f64 * ch.power()).sqrt();
    let mut rng = rng_from_seed(derive_seed(seed, stream::BASE_POINTS));
    let mut base_points = Vec::with_capacity(size * n);
    for _ in 0..size {
        base_points.extend(uniform_unit_vector(n, &mut rng).into_iter().map(|x| x * radius));
    }
    Ok(HelperCodebook {
        blocklength: n,
        power: ch.power(),
        helper_bits,
        base_points,
        seed,
        rotation_seed_base: derive_seed(seed, stream::ROTATIONS),
        rotation_mode: RotationMode::Haar,
    })
}

/// Monte Carlo estimate of the fraction of the sphere left uncovered by the
/// caps of half-angle `theta0` around the codewords.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringEstimate {
    pub uncovered: u64,
    pub probes: u64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Fraction of uniformly drawn probe directions whose smallest angle to the
/// codebook exceeds `theta0`, with a 95% Wilson interval.
pub fn covering_deficiency(
    cb: &HelperCodebook,
    theta0: Angle,
    probes: u64,
    seed: u64,
) -> Result<CoveringEstimate> {
    if probes == 0 {
        return Err(Error::usage("need at least one probe"));
    }
    let n = cb.blocklength();
    let radius = (n as f64 * cb.power()).sqrt();
    let mut rng = rng_from_seed(seed);
    let mut uncovered = 0u64;
    for _ in 0..probes {
        let u = uniform_unit_vector(n, &mut rng);
        let best = cb
            .base_points()
            .map(|b| dot(b, &u) / radius)
            .fold(f64::NEG_INFINITY, f64::max);
        if Angle::from_cos(best).radians() > theta0.radians() {
            uncovered += 1;
        }
    }
    let (ci_low, ci_high) = wilson_interval(uncovered, probes, Z95);
    Ok(CoveringEstimate {
        uncovered,
        probes,
        fraction: uncovered as f64 / probes as f64,
        ci_low,
        ci_high,
    })
}
