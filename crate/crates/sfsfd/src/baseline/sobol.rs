//! Sobol sequence generator with seeded randomization.
//!
//! Direction numbers come from a checked-in table of primitive
//! polynomials and initial values (one line per dimension: `d s a
//! m_1..m_s`). Dimension 1 is the base-2 van der Corput sequence and is
//! built in; the table supplies dimensions 2 and up.
//!
//! Points are emitted in Gray-code order starting at index 0, so the
//! unscrambled sequence includes the origin as its first point — no
//! skipping convention is applied. Randomization is a per-dimension
//! digital shift, optionally preceded by linear matrix scrambling of the
//! direction numbers.

use std::sync::OnceLock;

use rand::Rng;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::stream::StreamSeed;

/// Bit depth of the generator state.
const BITS: usize = 32;

/// Stream-derivation namespace for Sobol randomization draws.
const SOBOL_STREAM_TAG: u64 = 0x53;

/// One parsed line of the direction-number table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionEntry {
    pub dimension: usize,
    pub degree: usize,
    /// Encoded middle coefficients of the primitive polynomial.
    pub polynomial: u32,
    pub m_values: Vec<u32>,
}

/// Parses the whitespace-delimited table format `d s a m_1..m_s`, one
/// line per dimension starting at dimension 2. A header line is allowed.
pub fn parse_direction_table(text: &str) -> Result<Vec<DirectionEntry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || !line.starts_with(|c: char| c.is_ascii_digit()) {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(Error::DirectionTable {
                line: line_no,
                message: format!("expected at least 4 fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<u64> {
            s.parse::<u64>().map_err(|_| Error::DirectionTable {
                line: line_no,
                message: format!("invalid {what}: {s:?}"),
            })
        };
        let dimension = parse(fields[0], "dimension")? as usize;
        let degree = parse(fields[1], "degree")? as usize;
        let polynomial = parse(fields[2], "polynomial")? as u32;
        if degree == 0 || fields.len() != 3 + degree {
            return Err(Error::DirectionTable {
                line: line_no,
                message: format!(
                    "degree {degree} does not match {} initial values",
                    fields.len() - 3
                ),
            });
        }
        let expected_dim = entries.len() + 2;
        if dimension != expected_dim {
            return Err(Error::DirectionTable {
                line: line_no,
                message: format!("expected dimension {expected_dim}, got {dimension}"),
            });
        }
        let mut m_values = Vec::with_capacity(degree);
        for (i, field) in fields[3..].iter().enumerate() {
            let m = parse(field, "initial value")? as u32;
            if m.is_multiple_of(2) || u64::from(m) >= (1u64 << (i + 1)) {
                return Err(Error::DirectionTable {
                    line: line_no,
                    message: format!("m_{} = {m} must be odd and below 2^{}", i + 1, i + 1),
                });
            }
            m_values.push(m);
        }
        entries.push(DirectionEntry {
            dimension,
            degree,
            polynomial,
            m_values,
        });
    }
    if entries.is_empty() {
        return Err(Error::DirectionTable {
            line: 0,
            message: "table contains no entries".into(),
        });
    }
    Ok(entries)
}

fn builtin_table() -> &'static [DirectionEntry] {
    static TABLE: OnceLock<Vec<DirectionEntry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        parse_direction_table(include_str!("../../data/joe-kuo-d6.txt"))
            .expect("embedded direction-number table is valid")
    })
}

/// Highest dimension supported by the embedded table.
pub fn max_dimension() -> usize {
    builtin_table().len() + 1
}

/// Direction numbers for one dimension, most significant bit first.
fn direction_numbers(entry: Option<&DirectionEntry>) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    match entry {
        // Dimension 1: van der Corput, v_c = 2^(31-c).
        None => {
            for (c, slot) in v.iter_mut().enumerate() {
                *slot = 1 << (BITS - 1 - c);
            }
        }
        Some(entry) => {
            let s = entry.degree;
            let a = entry.polynomial;
            for (c, (slot, &m)) in v.iter_mut().zip(&entry.m_values).enumerate() {
                *slot = m << (BITS - 1 - c);
            }
            for c in s..BITS {
                let mut value = v[c - s] ^ (v[c - s] >> s);
                for k in 1..s {
                    if (a >> (s - 1 - k)) & 1 == 1 {
                        value ^= v[c - k];
                    }
                }
                v[c] = value;
            }
        }
    }
    v
}

/// How the sequence is randomized per seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SobolRandomization {
    /// Deterministic sequence, origin first; the seed is ignored.
    Unscrambled,
    /// Per-dimension random XOR applied to every point.
    #[default]
    Shift,
    /// Linear matrix scrambling of the direction numbers plus a shift.
    Scramble,
}

impl std::fmt::Display for SobolRandomization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SobolRandomization::Unscrambled => write!(f, "unscrambled"),
            SobolRandomization::Shift => write!(f, "shift"),
            SobolRandomization::Scramble => write!(f, "scramble"),
        }
    }
}

impl std::str::FromStr for SobolRandomization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "unscrambled" | "none" => Ok(SobolRandomization::Unscrambled),
            "shift" => Ok(SobolRandomization::Shift),
            "scramble" => Ok(SobolRandomization::Scramble),
            other => Err(format!(
                "unknown sobol mode {other:?} (expected \"unscrambled\", \"shift\" or \"scramble\")"
            )),
        }
    }
}

/// Owner-advanced generator state for one randomized Sobol stream.
#[derive(Debug, Clone)]
pub struct SobolState {
    directions: Vec<[u32; BITS]>,
    shift: Vec<u32>,
    state: Vec<u32>,
    index: u64,
    dimension: usize,
}

impl SobolState {
    /// Creates a generator for `d` dimensions randomized per `seed`.
    pub fn new(d: usize, mode: SobolRandomization, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyDimension);
        }
        let max = max_dimension();
        if d > max {
            return Err(Error::DimensionTooLarge {
                requested: d,
                max,
            });
        }
        let table = builtin_table();
        let mut directions: Vec<[u32; BITS]> = (0..d)
            .map(|k| direction_numbers(if k == 0 { None } else { Some(&table[k - 1]) }))
            .collect();

        let mut rng = StreamSeed::from_root(seed).child(SOBOL_STREAM_TAG).rng();
        if mode == SobolRandomization::Scramble {
            for dirs in directions.iter_mut() {
                let lower = random_lower_triangular(&mut rng);
                for v in dirs.iter_mut() {
                    *v = apply_lower_triangular(&lower, *v);
                }
            }
        }
        let shift: Vec<u32> = match mode {
            SobolRandomization::Unscrambled => vec![0; d],
            _ => (0..d).map(|_| rng.random()).collect(),
        };

        Ok(Self {
            directions,
            shift,
            state: vec![0; d],
            index: 0,
            dimension: d,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Index of the next point to be emitted.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Writes point `index()` into `out` and advances the state by one.
    pub fn next_point(&mut self, out: &mut [f64]) {
        assert_eq!(out.len(), self.dimension);
        const SCALE: f64 = 1.0 / (1u64 << BITS) as f64;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = f64::from(self.state[k] ^ self.shift[k]) * SCALE;
        }
        // Gray-code update: flip the direction number of the lowest zero
        // bit of the current index.
        let column = self.index.trailing_ones() as usize;
        assert!(column < BITS, "sequence exhausted the {BITS}-bit state");
        for (k, state) in self.state.iter_mut().enumerate() {
            *state ^= self.directions[k][column];
        }
        self.index += 1;
    }

    /// Emits the next `n` points as a design matrix.
    pub fn take_design(&mut self, n: usize) -> Result<DesignMatrix> {
        if n == 0 {
            return Err(Error::EmptyDesign);
        }
        let d = self.dimension;
        let mut data = vec![0.0; n * d];
        for row in data.chunks_exact_mut(d) {
            self.next_point(row);
        }
        DesignMatrix::new(data, n, d)
    }
}

/// Random nonsingular lower-triangular bit matrix, unit diagonal. Row `r`
/// acts on the top `r + 1` bits of a state word.
fn random_lower_triangular<R: Rng>(rng: &mut R) -> [u32; BITS] {
    let mut rows = [0u32; BITS];
    for (r, row) in rows.iter_mut().enumerate() {
        let diagonal = 1u32 << (BITS - 1 - r);
        let above = if r == 0 {
            0
        } else {
            (!0u32) << (BITS - r) // bit positions strictly above the diagonal
        };
        *row = (rng.random::<u32>() & above) | diagonal;
    }
    rows
}

fn apply_lower_triangular(rows: &[u32; BITS], value: u32) -> u32 {
    let mut out = 0u32;
    for (r, &row) in rows.iter().enumerate() {
        if (row & value).count_ones() % 2 == 1 {
            out |= 1 << (BITS - 1 - r);
        }
    }
    out
}

/// First `n` points of the digitally shifted Sobol sequence (the default
/// randomization).
pub fn sobol_design(n: usize, d: usize, seed: u64) -> Result<DesignMatrix> {
    sobol_design_with(n, d, seed, SobolRandomization::Shift)
}

/// First `n` points under an explicit randomization mode.
pub fn sobol_design_with(
    n: usize,
    d: usize,
    seed: u64,
    mode: SobolRandomization,
) -> Result<DesignMatrix> {
    SobolState::new(d, mode, seed)?.take_design(n)
}
