//! First-order and total-effect Sobol' indices of per-community
//! vulnerability with respect to the three weights.
//!
//! Pick-and-freeze with Jansen estimators. Two base matrices `A` and `B`
//! (`n` rows, one column per weight) come from a randomized Sobol'
//! sequence, so every cell depends only on `(seed, matrix, row, column)`
//! and row counts that are powers of two give balanced designs.
//! For each weight `i` the hybrid `AB_i` is `A` with column `i` taken from
//! `B`, giving `5n` model evaluations in total.
//!
//! With `V = mean((Y_A - Y_B)^2) / 2`:
//!
//! * `S_i  = 1 - mean((Y_B - Y_ABi)^2) / (2V)`
//! * `S_Ti =     mean((Y_A - Y_ABi)^2) / (2V)`
//!
//! When the output ignores weight `i`, `Y_ABi` equals `Y_A` bit for bit and
//! both indices come out as exactly zero.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vulnerability::{score, NormalizedFactors};

/// Rows per reduction block. Partial sums are formed per block and combined
/// in block order, so results do not depend on the worker count.
pub const BLOCK_ROWS: usize = 64;
pub const MIN_SAMPLES: usize = 64;
/// Variance below this is treated as a constant output.
pub const ZERO_VARIANCE: f64 = 1e-14;
const BOOTSTRAP_REPLICATES: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensitivityError {
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("weight range must satisfy finite lo < hi, got [{0}, {1}]")]
    InvalidRange(f64, f64),
    #[error("model returned no outputs")]
    EmptyOutput,
    #[error("model output length changed from {0} to {1}")]
    InconsistentOutput(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Alpha,
    Beta,
    Chi,
}

impl Parameter {
    pub const ALL: [Parameter; 3] = [Parameter::Alpha, Parameter::Beta, Parameter::Chi];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Alpha => "alpha",
            Parameter::Beta => "beta",
            Parameter::Chi => "chi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolConfig {
    /// Rows per base matrix.
    pub samples: usize,
    pub seed: u64,
    /// Each weight is drawn independently and uniformly from `[lo, hi)`.
    pub range: (f64, f64),
}

impl Default for SobolConfig {
    fn default() -> Self {
        SobolConfig {
            samples: 4096,
            seed: 42,
            range: (0.0, 2.0),
        }
    }
}

impl SobolConfig {
    fn validate(&self) -> Result<(), SensitivityError> {
        if self.samples < MIN_SAMPLES {
            return Err(SensitivityError::TooFewSamples(self.samples));
        }
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SensitivityError::InvalidRange(lo, hi));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputStatus {
    Ok,
    /// Output variance below [`ZERO_VARIANCE`]; all indices set to 0.
    ZeroVariance,
    /// Some model output was infinite or NaN; indices undefined.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterIndices {
    pub parameter: Parameter,
    /// Clipped to `[0, 1]`.
    pub first_order: f64,
    pub total_effect: f64,
    pub first_order_raw: f64,
    pub total_effect_raw: f64,
    /// Block-bootstrap standard errors.
    pub first_order_se: f64,
    pub total_effect_se: f64,
    /// Standard error of `first_order_raw - total_effect_raw`.
    pub difference_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySobol {
    pub community: usize,
    pub status: OutputStatus,
    pub variance: f64,
    pub indices: Vec<ParameterIndices>,
}

impl CommunitySobol {
    pub fn get(&self, p: Parameter) -> &ParameterIndices {
        &self.indices[p as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolResult {
    pub samples: usize,
    pub seed: u64,
    pub range: (f64, f64),
    pub distribution: String,
    pub evaluations: usize,
    pub communities: Vec<CommunitySobol>,
}

// Primitive polynomial degree, coefficient bits and initial direction
// numbers for Sobol' dimensions 2..=6 (dimension 1 is van der Corput).
const SOBOL_PARAMS: [(u32, u32, &[u32]); 5] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
];

const SOBOL_BITS: usize = 32;

fn direction_numbers() -> [[u32; SOBOL_BITS]; 6] {
    let mut v = [[0u32; SOBOL_BITS]; 6];
    for (k, slot) in v[0].iter_mut().enumerate() {
        *slot = 1 << (31 - k);
    }
    for (d, &(s, a, init)) in SOBOL_PARAMS.iter().enumerate() {
        let s = s as usize;
        let mut m = vec![0u64; SOBOL_BITS];
        m[..s].copy_from_slice(&init.iter().map(|&x| x as u64).collect::<Vec<_>>());
        for k in s..SOBOL_BITS {
            let mut next = m[k - s] ^ (m[k - s] << s);
            for i in 1..s {
                if (a >> (s - 1 - i)) & 1 == 1 {
                    next ^= m[k - i] << i;
                }
            }
            m[k] = next;
        }
        for k in 0..SOBOL_BITS {
            v[d + 1][k] = (m[k] << (31 - k)) as u32;
        }
    }
    v
}

/// Counter-addressed sample rows: a digitally shifted Sobol' sequence in six
/// dimensions, columns of `A` on dimensions 1-3 and of `B` on 4-6. The shift
/// of each dimension is drawn from ChaCha20 keyed by the seed, so a cell
/// depends only on `(seed, matrix, row, column)`.
struct Sampler {
    directions: [[u32; SOBOL_BITS]; 6],
    shift: [u32; 6],
    lo: f64,
    width: f64,
}

impl Sampler {
    fn new(seed: u64, (lo, hi): (f64, f64)) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Sampler {
            directions: direction_numbers(),
            shift: std::array::from_fn(|_| rng.next_u32()),
            lo,
            width: hi - lo,
        }
    }

    fn unit(&self, dim: usize, row: usize) -> f64 {
        let mut x = 0u32;
        let mut i = row;
        let mut k = 0;
        while i != 0 && k < SOBOL_BITS {
            if i & 1 == 1 {
                x ^= self.directions[dim][k];
            }
            i >>= 1;
            k += 1;
        }
        // centre of the 2^-32 cell keeps values strictly inside (0, 1)
        ((x ^ self.shift[dim]) as f64 + 0.5) / 4_294_967_296.0
    }

    fn row(&self, matrix: usize, row: usize) -> [f64; 3] {
        std::array::from_fn(|col| self.lo + self.width * self.unit(3 * matrix + col, row))
    }
}

#[derive(Debug, Clone, Default)]
struct Sums {
    // sum (Y_A - Y_B)^2
    base: f64,
    // sum (Y_B - Y_ABi)^2
    first: [f64; 3],
    // sum (Y_A - Y_ABi)^2
    total: [f64; 3],
    finite: bool,
}

impl Sums {
    fn add(&mut self, other: &Sums) {
        self.base += other.base;
        for i in 0..3 {
            self.first[i] += other.first[i];
            self.total[i] += other.total[i];
        }
        self.finite &= other.finite;
    }

    fn indices(&self) -> ([f64; 3], [f64; 3]) {
        (
            std::array::from_fn(|i| 1.0 - self.first[i] / self.base),
            std::array::from_fn(|i| self.total[i] / self.base),
        )
    }
}

struct Block {
    rows: usize,
    sums: Vec<Sums>,
}

fn run_block<F>(
    model: &F,
    sampler: &Sampler,
    start: usize,
    end: usize,
    width: usize,
) -> Result<Block, SensitivityError>
where
    F: Fn([f64; 3]) -> Vec<f64>,
{
    let mut sums = vec![
        Sums {
            finite: true,
            ..Sums::default()
        };
        width
    ];
    let check = |y: &Vec<f64>| {
        if y.len() != width {
            Err(SensitivityError::InconsistentOutput(width, y.len()))
        } else {
            Ok(())
        }
    };
    for row in start..end {
        let a = sampler.row(0, row);
        let b = sampler.row(1, row);
        let ya = model(a);
        let yb = model(b);
        check(&ya)?;
        check(&yb)?;
        let hybrids = (0..3)
            .map(|i| {
                let mut x = a;
                x[i] = b[i];
                let y = model(x);
                check(&y).map(|_| y)
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (c, s) in sums.iter_mut().enumerate() {
            let (ya, yb) = (ya[c], yb[c]);
            s.finite &= ya.is_finite() && yb.is_finite();
            s.base += (ya - yb) * (ya - yb);
            for (i, h) in hybrids.iter().enumerate() {
                let yh = h[c];
                s.finite &= yh.is_finite();
                s.first[i] += (yb - yh) * (yb - yh);
                s.total[i] += (ya - yh) * (ya - yh);
            }
        }
    }
    Ok(Block {
        rows: end - start,
        sums,
    })
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Block-bootstrap standard errors of `(S_i, S_Ti, S_i - S_Ti)` per weight.
fn bootstrap(blocks: &[Block], c: usize, seed: u64) -> [[f64; 3]; 3] {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(2 + c as u64);
    let mut draws: [[Vec<f64>; 3]; 3] = Default::default();
    for _ in 0..BOOTSTRAP_REPLICATES {
        let mut acc = Sums {
            finite: true,
            ..Sums::default()
        };
        for _ in 0..blocks.len() {
            acc.add(&blocks[rng.gen_range(0..blocks.len())].sums[c]);
        }
        if acc.base <= 0.0 {
            continue;
        }
        let (s, st) = acc.indices();
        for i in 0..3 {
            draws[i][0].push(s[i]);
            draws[i][1].push(st[i]);
            draws[i][2].push(s[i] - st[i]);
        }
    }
    std::array::from_fn(|i| {
        std::array::from_fn(|k| {
            if draws[i][k].len() < 2 {
                0.0
            } else {
                std_dev(&draws[i][k])
            }
        })
    })
}

/// Estimates Sobol' indices of every output of `model`, a deterministic map
/// from `[alpha, beta, chi]` to one value per community.
pub fn sobol_indices<F>(model: F, config: &SobolConfig) -> Result<SobolResult, SensitivityError>
where
    F: Fn([f64; 3]) -> Vec<f64> + Sync,
{
    config.validate()?;
    let sampler = Sampler::new(config.seed, config.range);
    let width = model(sampler.row(0, 0)).len();
    if width == 0 {
        return Err(SensitivityError::EmptyOutput);
    }
    let n = config.samples;
    let starts: Vec<usize> = (0..n).step_by(BLOCK_ROWS).collect();
    let blocks = starts
        .par_iter()
        .map(|&s| run_block(&model, &sampler, s, (s + BLOCK_ROWS).min(n), width))
        .collect::<Result<Vec<_>, _>>()?;
    debug_assert_eq!(blocks.iter().map(|b| b.rows).sum::<usize>(), n);

    let communities = (0..width)
        .map(|c| {
            let mut total = Sums {
                finite: true,
                ..Sums::default()
            };
            for b in &blocks {
                total.add(&b.sums[c]);
            }
            let variance = total.base / (2.0 * n as f64);
            let (status, first, tot, se) = if !total.finite {
                (
                    OutputStatus::NonFinite,
                    [f64::NAN; 3],
                    [f64::NAN; 3],
                    [[f64::NAN; 3]; 3],
                )
            } else if !(variance >= ZERO_VARIANCE) {
                (
                    OutputStatus::ZeroVariance,
                    [0.0; 3],
                    [0.0; 3],
                    [[0.0; 3]; 3],
                )
            } else {
                let (s, st) = total.indices();
                (OutputStatus::Ok, s, st, bootstrap(&blocks, c, config.seed))
            };
            let indices = Parameter::ALL
                .iter()
                .enumerate()
                .map(|(i, &parameter)| ParameterIndices {
                    parameter,
                    first_order: first[i].clamp(0.0, 1.0),
                    total_effect: tot[i].clamp(0.0, 1.0),
                    first_order_raw: first[i],
                    total_effect_raw: tot[i],
                    first_order_se: se[i][0],
                    total_effect_se: se[i][1],
                    difference_se: se[i][2],
                })
                .collect();
            CommunitySobol {
                community: c,
                status,
                variance: if total.finite { variance } else { f64::NAN },
                indices,
            }
        })
        .collect();

    Ok(SobolResult {
        samples: n,
        seed: config.seed,
        range: config.range,
        distribution: format!("uniform[{}, {})", config.range.0, config.range.1),
        evaluations: 5 * n,
        communities,
    })
}

/// The vulnerability map `[alpha, beta, chi] -> zeta` for fixed factors.
pub fn vulnerability_model(
    factors: &NormalizedFactors,
) -> impl Fn([f64; 3]) -> Vec<f64> + Sync + '_ {
    let inverses: Vec<[f64; 3]> = (0..factors.len()).map(|i| factors.inverses(i)).collect();
    move |w| inverses.iter().map(|&inv| score(inv, w)).collect()
}
