//! Construction and verification of weakly secure MDS encoding matrices.
//!
//! An encoding matrix assigns each relay a linear combination of the source
//! packets it is connected to: `g[i][j]` may be nonzero only where the
//! adjacency matrix has a link. Two executable criteria decide the quality
//! of a concrete matrix:
//!
//! - [`verify_mds_code`]: every set of `k` columns has rank `k`, i.e. the
//!   code meets the Singleton bound and the sink tolerates
//!   `floor((n - k + 1) / 2)` corrupted relays;
//! - [`verify_weak_security_code`]: no linear combination of any `k - 1`
//!   observed columns isolates a single source packet, tested as "no unit
//!   vector lies in the row space of the transposed column selection". This
//!   stays correct even when the selected columns are rank deficient.
//!
//! [`construct_code`] samples the supported entries uniformly from the
//! nonzero field elements and keeps the first sample passing both
//! verifiers. Correctness is certified per instance by the verifiers, so
//! any prime works; only the number of attempts is random, and the stream
//! is derived from a caller-supplied seed, so results are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{FieldElement, FieldMatrix, FieldPrime, GfError};
use crate::sman::{Sman, SmanError, Verdict, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("matrix shape {rows}x{cols} does not match network {k}x{n}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        k: usize,
        n: usize,
    },
    #[error("nonzero entry at ({row}, {col}) outside the network support")]
    SupportViolation { row: usize, col: usize },
    #[error("network does not satisfy the weak security condition")]
    NotWeaklySecure { witness: Witness },
    #[error("no verified matrix found in {attempts} attempts; try a larger prime")]
    AttemptsExhausted { attempts: u32 },
    #[error("prime {p} too small for a {k}x{n} Cauchy matrix (need p >= {required})")]
    PrimeTooSmall { p: u64, k: usize, n: usize, required: u64 },
    #[error("message space {space} exceeds enumeration budget {budget}")]
    BudgetExceeded { space: u128, budget: u64 },
    #[error("nearest-codeword decoding is ambiguous: {candidates} messages tie at distance {distance}")]
    AmbiguousDecode { distance: usize, candidates: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Network(#[from] SmanError),
}

/// A length-`k` vector of source packets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    field: FieldPrime,
    values: Vec<u64>,
}

impl Message {
    pub fn new(field: FieldPrime, values: &[u64]) -> Self {
        Self {
            field,
            values: values.iter().map(|&v| v % field.modulus()).collect(),
        }
    }

    pub fn field(&self) -> FieldPrime {
        self.field
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A length-`n` vector of coded relay packets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    field: FieldPrime,
    values: Vec<u64>,
}

impl Codeword {
    pub fn new(field: FieldPrime, values: &[u64]) -> Self {
        Self {
            field,
            values: values.iter().map(|&v| v % field.modulus()).collect(),
        }
    }

    pub fn field(&self) -> FieldPrime {
        self.field
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of positions where the two codewords differ.
    pub fn hamming_distance(&self, other: &Codeword) -> usize {
        assert_eq!(self.values.len(), other.values.len(), "length mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// A copy with one coordinate replaced.
    pub fn with_coordinate(&self, index: usize, value: u64) -> Codeword {
        let mut values = self.values.clone();
        values[index] = value % self.field.modulus();
        Codeword {
            field: self.field,
            values,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    k: usize,
    n: usize,
    p: u64,
    rows: Vec<Vec<u64>>,
}

/// A `k x n` encoding matrix over GF(p) tied to the network it serves.
///
/// Construction enforces the support constraint (entries vanish outside the
/// adjacency). Full rank and security are properties of the entries and are
/// certified by the verifiers; matrices produced by [`construct_code`] and
/// [`cauchy_code`] pass both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingMatrix {
    matrix: FieldMatrix,
    sman: Sman,
}

impl EncodingMatrix {
    pub fn new(matrix: FieldMatrix, sman: Sman) -> Result<Self, CodegenError> {
        if matrix.rows() != sman.k() || matrix.cols() != sman.n() {
            return Err(CodegenError::ShapeMismatch {
                rows: matrix.rows(),
                cols: matrix.cols(),
                k: sman.k(),
                n: sman.n(),
            });
        }
        for i in 0..sman.k() {
            for j in 0..sman.n() {
                if matrix.entry(i, j) != 0 && !sman.has_link(i, j) {
                    return Err(CodegenError::SupportViolation { row: i, col: j });
                }
            }
        }
        Ok(Self { matrix, sman })
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }

    pub fn network(&self) -> &Sman {
        &self.sman
    }

    pub fn k(&self) -> usize {
        self.sman.k()
    }

    pub fn n(&self) -> usize {
        self.sman.n()
    }

    pub fn field(&self) -> FieldPrime {
        self.matrix.field()
    }

    /// The 0/1 support pattern of the entries, as a network.
    pub fn support_network(&self) -> Result<Sman, SmanError> {
        let rows: Vec<Vec<u8>> = (0..self.k())
            .map(|i| {
                (0..self.n())
                    .map(|j| (self.matrix.entry(i, j) != 0) as u8)
                    .collect()
            })
            .collect();
        Sman::from_rows(&rows)
    }

    pub fn verify_mds(&self) -> bool {
        verify_mds_code(&self.matrix)
    }

    pub fn verify_weak_security(&self) -> bool {
        verify_weak_security_code(&self.matrix)
    }

    /// Relay outputs for a message: `y = x G`.
    /// Panics if the message is not a length-`k` vector over the same field.
    pub fn encode(&self, x: &Message) -> Codeword {
        assert_eq!(x.field(), self.field(), "field mismatch");
        encode_with(&self.matrix, x)
    }

    pub fn decode_nearest(&self, received: &Codeword, budget: u64) -> Result<Decoded, CodegenError> {
        decode_nearest(&self.matrix, received, budget)
    }

    pub fn min_distance(&self, budget: u64) -> Result<usize, CodegenError> {
        min_distance(&self.matrix, budget)
    }

    /// Canonical text format: line 1 `code <k> <n> <p>`, then `k` lines of
    /// `n` space-separated residues.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "code {} {} {}\n",
            self.k(),
            self.n(),
            self.field().modulus()
        );
        for i in 0..self.k() {
            let digits: Vec<String> = (0..self.n())
                .map(|j| self.matrix.entry(i, j).to_string())
                .collect();
            out.push_str(&digits.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, CodegenError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(CodegenError::Parse {
            line: 1,
            message: "empty input".to_string(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "code" {
            return Err(CodegenError::Parse {
                line: 1,
                message: "expected header `code <k> <n> <p>`".to_string(),
            });
        }
        let parse_num = |tok: &str, what: &str| -> Result<u64, CodegenError> {
            tok.parse().map_err(|_| CodegenError::Parse {
                line: 1,
                message: format!("invalid {what} `{tok}`"),
            })
        };
        let k = parse_num(parts[1], "source count")? as usize;
        let n = parse_num(parts[2], "relay count")? as usize;
        let p = parse_num(parts[3], "modulus")?;
        let field = FieldPrime::new(p)?;
        let mut rows = Vec::with_capacity(k);
        for i in 0..k {
            let (idx, line) = lines.next().ok_or(CodegenError::Parse {
                line: i + 2,
                message: format!("expected {k} rows, found {i}"),
            })?;
            let mut row = Vec::with_capacity(n);
            for tok in line.split_whitespace() {
                let v: u64 = tok.parse().map_err(|_| CodegenError::Parse {
                    line: idx + 1,
                    message: format!("invalid entry `{tok}`"),
                })?;
                if v >= p {
                    return Err(CodegenError::Parse {
                        line: idx + 1,
                        message: format!("entry {v} not reduced mod {p}"),
                    });
                }
                row.push(v);
            }
            if row.len() != n {
                return Err(CodegenError::Parse {
                    line: idx + 1,
                    message: format!("expected {n} entries, found {}", row.len()),
                });
            }
            rows.push(row);
        }
        for (idx, line) in lines {
            if !line.trim().is_empty() {
                return Err(CodegenError::Parse {
                    line: idx + 1,
                    message: "unexpected trailing content".to_string(),
                });
            }
        }
        Self::from_parsed(field, k, n, rows)
    }

    /// JSON format: `{"k":..,"n":..,"p":..,"rows":[[..],..]}`.
    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<u64>> = (0..self.k())
            .map(|i| (0..self.n()).map(|j| self.matrix.entry(i, j)).collect())
            .collect();
        serde_json::to_string(&CodeJson {
            k: self.k(),
            n: self.n(),
            p: self.field().modulus(),
            rows,
        })
        .expect("matrix serializes")
    }

    pub fn parse_json(text: &str) -> Result<Self, CodegenError> {
        let parsed: CodeJson = serde_json::from_str(text).map_err(|e| CodegenError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let field = FieldPrime::new(parsed.p)?;
        if parsed.rows.len() != parsed.k || parsed.rows.iter().any(|r| r.len() != parsed.n) {
            return Err(CodegenError::Parse {
                line: 1,
                message: "row shape does not match declared k and n".to_string(),
            });
        }
        for row in &parsed.rows {
            if let Some(&v) = row.iter().find(|&&v| v >= parsed.p) {
                return Err(CodegenError::Parse {
                    line: 1,
                    message: format!("entry {v} not reduced mod {}", parsed.p),
                });
            }
        }
        Self::from_parsed(field, parsed.k, parsed.n, parsed.rows)
    }

    pub fn parse(text: &str) -> Result<Self, CodegenError> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_text(text)
        }
    }

    fn from_parsed(
        field: FieldPrime,
        k: usize,
        n: usize,
        rows: Vec<Vec<u64>>,
    ) -> Result<Self, CodegenError> {
        if k < 1 || n < k {
            return Err(CodegenError::Parse {
                line: 1,
                message: format!("invalid dimensions k={k}, n={n}"),
            });
        }
        let matrix = FieldMatrix::from_rows(field, &rows);
        // A stored code file carries no separate adjacency matrix: its own
        // support is the topology it witnesses.
        let support: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| (v != 0) as u8).collect())
            .collect();
        let sman = Sman::from_rows(&support)?;
        Self::new(matrix, sman)
    }
}

/// True iff every `k`-subset of columns has rank `k`: the matrix generates
/// a code meeting the Singleton bound `d = n - k + 1`.
pub fn verify_mds_code(g: &FieldMatrix) -> bool {
    let k = g.rows();
    let n = g.cols();
    if n < k || g.rank() < k {
        return false;
    }
    subsets(n, k).all(|cols| g.column_submatrix(&cols).rank() == k)
}

/// True iff no eavesdropper observing `k - 1` relay packets can isolate a
/// source packet: for every column selection `E` of that size, no unit
/// vector lies in the row space of the transposed selection.
pub fn verify_weak_security_code(g: &FieldMatrix) -> bool {
    let k = g.rows();
    let n = g.cols();
    let field = g.field();
    // Observing more columns is strictly more informative, so the maximal
    // selection size decides all smaller ones.
    let observed = (k - 1).min(n);
    let units: Vec<Vec<FieldElement>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|c| if c == i { field.one() } else { field.zero() })
                .collect()
        })
        .collect();
    subsets(n, observed).all(|cols| {
        let transposed = g.column_submatrix(&cols).transpose();
        units.iter().all(|unit| !transposed.row_space_contains(unit))
    })
}

/// A freshly constructed code plus how many samples it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction {
    pub code: EncodingMatrix,
    pub attempts: u32,
}

/// Samples encoding matrices on the support of `s` until one passes both
/// verifiers.
///
/// Each attempt draws the supported entries independently and uniformly
/// from the nonzero elements of the field, in row-major order, from a
/// ChaCha stream: attempt `a` uses stream `a` of the seed, so the outcome
/// is a deterministic function of `(seed, field, s)`.
pub fn construct_code(
    s: &Sman,
    field: FieldPrime,
    seed: u64,
    max_attempts: u32,
) -> Result<Construction, CodegenError> {
    if let Verdict::Fails(witness) = s.check_weak_security_condition() {
        return Err(CodegenError::NotWeaklySecure { witness });
    }
    let p = field.modulus();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..max_attempts {
        rng.set_stream(attempt as u64);
        let mut matrix = FieldMatrix::zeros(s.k(), s.n(), field);
        for i in 0..s.k() {
            for j in 0..s.n() {
                if s.has_link(i, j) {
                    matrix.set(i, j, rng.gen_range(1..p));
                }
            }
        }
        if verify_mds_code(&matrix) && verify_weak_security_code(&matrix) {
            let code = EncodingMatrix::new(matrix, s.clone())?;
            return Ok(Construction {
                code,
                attempts: attempt + 1,
            });
        }
    }
    Err(CodegenError::AttemptsExhausted {
        attempts: max_attempts,
    })
}

/// The Cauchy matrix `g[i][j] = 1 / (x_i + y_j)` with points `x_i = i` and
/// `y_j = j + 1` (0-based), on the densest (all-ones) topology.
///
/// With `p >= n + k` the points are pairwise distinct and every sum
/// `i + j + 1` lies in `[1, n + k - 1]`, a nonzero residue, so every entry
/// is well defined and every square submatrix (itself Cauchy) is
/// invertible. Such a matrix is MDS and reaches block-security level
/// `k - strength` at every strength.
pub fn cauchy_code(k: usize, n: usize, field: FieldPrime) -> Result<EncodingMatrix, CodegenError> {
    let p = field.modulus();
    let required = (n + k) as u64;
    if p < required {
        return Err(CodegenError::PrimeTooSmall { p, k, n, required });
    }
    let mut matrix = FieldMatrix::zeros(k, n, field);
    for i in 0..k {
        for j in 0..n {
            // x_i = i, y_j = j + 1: pairwise-distinct point sets whose sums
            // i + j + 1 stay in [1, n + k - 1], nonzero mod p.
            let sum = field.element((i + j + 1) as u64);
            matrix.set(i, j, sum.inv().expect("sum is nonzero").value());
        }
    }
    let sman = Sman::all_ones(k, n)?;
    EncodingMatrix::new(matrix, sman)
}

/// Decoded message plus the number of corrected coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub message: Message,
    pub errors: usize,
}

fn encode_with(g: &FieldMatrix, x: &Message) -> Codeword {
    let field = g.field();
    assert_eq!(x.len(), g.rows(), "message length mismatch");
    assert_eq!(x.field(), field, "field mismatch");
    let elements: Vec<FieldElement> = x.values().iter().map(|&v| field.element(v)).collect();
    let values: Vec<u64> = g
        .left_multiply(&elements)
        .iter()
        .map(|e| e.value())
        .collect();
    Codeword {
        field,
        values,
    }
}

/// Exhaustive nearest-codeword decoding over all `q^k` messages.
///
/// Returns the unique message whose codeword is closest to `received` in
/// Hamming distance; a tie is an ambiguity error. If the matrix is MDS and
/// at most `floor((n - k + 1) / 2)` coordinates were corrupted, the result
/// is the transmitted message.
pub fn decode_nearest(
    g: &FieldMatrix,
    received: &Codeword,
    budget: u64,
) -> Result<Decoded, CodegenError> {
    let field = g.field();
    let (k, n) = (g.rows(), g.cols());
    assert_eq!(received.len(), n, "codeword length mismatch");
    assert_eq!(received.field(), field, "field mismatch");
    check_budget(field.modulus(), k, budget)?;
    let p = field.modulus();
    let y = received.values();
    let mut best_distance = usize::MAX;
    let mut best: Vec<u64> = Vec::new();
    let mut ties = 0usize;
    let mut x = vec![0u64; k];
    loop {
        // Distance of this candidate's codeword to y, bailing out as soon
        // as it exceeds the best seen.
        let mut distance = 0usize;
        for (j, &yj) in y.iter().enumerate() {
            let mut acc = 0u64;
            for (i, &xi) in x.iter().enumerate() {
                acc = (acc + xi * g.entry(i, j)) % p;
            }
            if acc != yj {
                distance += 1;
                if distance > best_distance {
                    break;
                }
            }
        }
        if distance < best_distance {
            best_distance = distance;
            best = x.clone();
            ties = 1;
        } else if distance == best_distance {
            ties += 1;
        }
        if !advance(&mut x, p) {
            break;
        }
    }
    if ties > 1 {
        return Err(CodegenError::AmbiguousDecode {
            distance: best_distance,
            candidates: ties,
        });
    }
    Ok(Decoded {
        message: Message {
            field,
            values: best,
        },
        errors: best_distance,
    })
}

/// Minimum Hamming weight over the codewords of all nonzero messages,
/// by exhaustive enumeration. Zero means the matrix is rank deficient.
pub fn min_distance(g: &FieldMatrix, budget: u64) -> Result<usize, CodegenError> {
    let field = g.field();
    let (k, n) = (g.rows(), g.cols());
    check_budget(field.modulus(), k, budget)?;
    let p = field.modulus();
    let mut best = n;
    let mut x = vec![0u64; k];
    while advance(&mut x, p) {
        let mut weight = 0usize;
        for j in 0..n {
            let mut acc = 0u64;
            for (i, &xi) in x.iter().enumerate() {
                acc = (acc + xi * g.entry(i, j)) % p;
            }
            if acc != 0 {
                weight += 1;
                if weight >= best {
                    break;
                }
            }
        }
        best = best.min(weight);
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

pub(crate) fn check_budget(q: u64, k: usize, budget: u64) -> Result<(), CodegenError> {
    let space = (q as u128)
        .checked_pow(k as u32)
        .unwrap_or(u128::MAX);
    if space > budget as u128 {
        return Err(CodegenError::BudgetExceeded { space, budget });
    }
    Ok(())
}

/// Odometer step through F_q^k; returns false after the last message.
pub(crate) fn advance(x: &mut [u64], q: u64) -> bool {
    for digit in x.iter_mut() {
        *digit += 1;
        if *digit < q {
            return true;
        }
        *digit = 0;
    }
    false
}

fn subsets(n: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    use itertools::Itertools;
    (0..n).combinations(size)
}
