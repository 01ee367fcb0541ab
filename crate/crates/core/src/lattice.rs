//! Weights, action chambers, and exact cone geometry.
//!
//! The chambers of the hyperplane arrangement cut out by a set of integral
//! weights are enumerated by incremental sign splitting, with feasibility of
//! each open sign region decided by a Fourier–Motzkin kernel over exact
//! integer rows.  Interior sample points are extracted by back-substitution
//! through the elimination stages, so every chamber carries an exact rational
//! witness.  Dual-cone membership is classified against the extreme rays of
//! the closed chamber whenever the arrangement spans full rank, with the
//! Fourier–Motzkin kernel as the fallback for degenerate arrangements.
//! No floating point enters any decision.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact integer scalar used for lattice pairings and multiplicities.
pub type Int = BigInt;
/// Exact rational scalar used for sample points and moment values.
pub type Rat = BigRational;

/// Largest torus rank accepted by default; sign-vector enumeration is
/// exponential in the number of hyperplanes, so the cap keeps runs at desk
/// scale.  Use [`enumerate_chambers_capped`] to override deliberately.
pub const DEFAULT_MAX_RANK: usize = 4;

/// Default max-norm bound for the reduction-vector search.
pub const DEFAULT_SEARCH_BUDGET: i64 = 32;

/// A weight of the torus: an integer vector in the dual lattice.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(pub Vec<Int>);

impl Weight {
    pub fn new(coords: Vec<Int>) -> Self {
        Weight(coords)
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        Weight(coords.iter().map(|&c| Int::from(c)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        Weight(vec![Int::zero(); rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    /// Exact lattice pairing `<self, other>`.
    pub fn dot(&self, other: &Weight) -> Int {
        debug_assert_eq!(self.rank(), other.rank());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b)
            .fold(Int::zero(), |acc, t| acc + t)
    }

    /// Pairing against a rational point.
    pub fn dot_rat(&self, point: &[Rat]) -> Rat {
        debug_assert_eq!(self.rank(), point.len());
        self.0
            .iter()
            .zip(point)
            .map(|(a, b)| Rat::from(a.clone()) * b)
            .fold(Rat::zero(), |acc, t| acc + t)
    }

    pub fn add(&self, other: &Weight) -> Weight {
        debug_assert_eq!(self.rank(), other.rank());
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        debug_assert_eq!(self.rank(), other.rank());
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Weight {
        Weight(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: &Int) -> Weight {
        Weight(self.0.iter().map(|a| a * k).collect())
    }

    /// Max-norm of the coordinate vector.
    pub fn max_norm(&self) -> Int {
        self.0
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Int::zero)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Errors from chamber geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    /// The zero weight appeared where an isotropy weight was required; the
    /// action is not effective on that normal direction.
    ZeroWeight { index: usize },
    /// Requested rank exceeds the enumeration cap.
    RankTooLarge { rank: usize, max: usize },
    /// Rank 0 has no chambers.
    ZeroRank,
    /// An arrangement needs at least one weight.
    EmptyArrangement,
    /// Mixed ranks between a chamber and its query data.
    RankMismatch { expected: usize, found: usize },
    /// A weight lies on a wall of the chamber, so it has no polarization.
    WeightOnWall { weight: Weight },
    /// The reduction-vector search hit its norm bound; the window is
    /// degenerate (this cannot happen for finite windows inside a chamber).
    SearchBudgetExceeded { budget: i64 },
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::ZeroWeight { index } => {
                write!(f, "weight #{index} is zero; the action is not effective there")
            }
            LatticeError::RankTooLarge { rank, max } => {
                write!(f, "rank {rank} exceeds the enumeration cap {max}")
            }
            LatticeError::ZeroRank => write!(f, "rank must be at least 1"),
            LatticeError::EmptyArrangement => write!(f, "arrangement needs at least one weight"),
            LatticeError::RankMismatch { expected, found } => {
                write!(f, "rank mismatch: expected {expected}, found {found}")
            }
            LatticeError::WeightOnWall { weight } => {
                write!(f, "weight {weight} lies on a wall of the chamber")
            }
            LatticeError::SearchBudgetExceeded { budget } => {
                write!(f, "reduction-vector search exceeded max-norm budget {budget}")
            }
        }
    }
}

impl std::error::Error for LatticeError {}

// ---------------------------------------------------------------------------
// Fourier–Motzkin kernel
// ---------------------------------------------------------------------------

/// One linear constraint `<a, x> + c > 0` (strict) or `>= 0`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Row {
    a: Vec<Int>,
    c: Int,
    strict: bool,
}

enum Reduced {
    Useful(Row),
    Tautology,
    Contradiction,
}

fn gcd_all<'a>(values: impl Iterator<Item = &'a Int>) -> Int {
    values.fold(Int::zero(), |g, v| g.gcd(v))
}

fn reduce_row(mut row: Row) -> Reduced {
    if row.a.iter().all(|x| x.is_zero()) {
        return if row.c.is_positive() || (row.c.is_zero() && !row.strict) {
            Reduced::Tautology
        } else {
            Reduced::Contradiction
        };
    }
    let g = gcd_all(row.a.iter().chain(std::iter::once(&row.c)));
    if g > Int::one() {
        for x in row.a.iter_mut() {
            *x = &*x / &g;
        }
        row.c = &row.c / &g;
    }
    Reduced::Useful(row)
}

/// Normalize and deduplicate rows; `None` signals an immediate contradiction.
/// When a strict and a non-strict copy of the same hyperplane side coexist,
/// the strict one (the stronger conjunct) is kept.
fn normalize_rows(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut dedup: BTreeMap<(Vec<Int>, Int), bool> = BTreeMap::new();
    for row in rows {
        match reduce_row(row) {
            Reduced::Contradiction => return None,
            Reduced::Tautology => {}
            Reduced::Useful(r) => {
                let strict = dedup.entry((r.a, r.c)).or_insert(false);
                *strict = *strict || r.strict;
            }
        }
    }
    Some(
        dedup
            .into_iter()
            .map(|((a, c), strict)| Row { a, c, strict })
            .collect(),
    )
}

const FM_ROW_CAP: usize = 1_000_000;

/// Eliminate variable `j`; `None` signals a contradiction.
fn eliminate(rows: &[Row], j: usize) -> Option<Vec<Row>> {
    let mut out: Vec<Row> = Vec::new();
    let mut lowers: Vec<&Row> = Vec::new();
    let mut uppers: Vec<&Row> = Vec::new();
    for r in rows {
        if r.a[j].is_zero() {
            out.push(r.clone());
        } else if r.a[j].is_positive() {
            lowers.push(r);
        } else {
            uppers.push(r);
        }
    }
    assert!(
        out.len() + lowers.len() * uppers.len() <= FM_ROW_CAP,
        "Fourier–Motzkin exceeded {FM_ROW_CAP} rows; arrangement beyond desk scale"
    );
    for lo in &lowers {
        for up in &uppers {
            // lo.a[j] > 0 and up.a[j] < 0, so this positive combination
            // cancels x_j exactly.
            let m_up = lo.a[j].clone();
            let m_lo = -up.a[j].clone();
            let a = lo
                .a
                .iter()
                .zip(&up.a)
                .map(|(la, ua)| &m_up * ua + &m_lo * la)
                .collect();
            let c = &m_up * &up.c + &m_lo * &lo.c;
            out.push(Row {
                a,
                c,
                strict: lo.strict || up.strict,
            });
        }
    }
    normalize_rows(out)
}

/// All elimination stages: `stages[k]` constrains variables `0..k` only.
fn stages(dim: usize, rows: Vec<Row>) -> Option<Vec<Vec<Row>>> {
    let mut st = vec![Vec::new(); dim + 1];
    st[dim] = normalize_rows(rows)?;
    for j in (0..dim).rev() {
        st[j] = eliminate(&st[j + 1], j)?;
    }
    Some(st)
}

fn feasible(dim: usize, rows: Vec<Row>) -> bool {
    stages(dim, rows).is_some()
}

/// Exact interior sample point of a feasible system, by back-substitution.
fn sample_point(dim: usize, rows: Vec<Row>) -> Option<Vec<Rat>> {
    let st = stages(dim, rows)?;
    let mut x: Vec<Rat> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut lo: Option<(Rat, bool)> = None;
        let mut hi: Option<(Rat, bool)> = None;
        for r in &st[j + 1] {
            if r.a[j].is_zero() {
                continue;
            }
            let mut rest = Rat::from(r.c.clone());
            for (i, xi) in x.iter().enumerate() {
                rest += Rat::from(r.a[i].clone()) * xi;
            }
            let bound = -rest / Rat::from(r.a[j].clone());
            if r.a[j].is_positive() {
                lo = Some(match lo {
                    None => (bound, r.strict),
                    Some((b, s)) => {
                        if bound > b {
                            (bound, r.strict)
                        } else if bound == b {
                            (b, s || r.strict)
                        } else {
                            (b, s)
                        }
                    }
                });
            } else {
                hi = Some(match hi {
                    None => (bound, r.strict),
                    Some((b, s)) => {
                        if bound < b {
                            (bound, r.strict)
                        } else if bound == b {
                            (b, s || r.strict)
                        } else {
                            (b, s)
                        }
                    }
                });
            }
        }
        let one = Rat::one();
        let value = match (&lo, &hi) {
            (None, None) => Rat::zero(),
            (Some((l, _)), None) => l + &one,
            (None, Some((u, _))) => u - &one,
            (Some((l, _)), Some((u, _))) => {
                if l < u {
                    (l + u) / (&one + &one)
                } else {
                    // Feasibility guarantees l == u with both bounds closed.
                    l.clone()
                }
            }
        };
        x.push(value);
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Exact linear algebra helpers
// ---------------------------------------------------------------------------

/// Rank of the integer matrix whose rows are the given weights.
pub(crate) fn matrix_rank(rows: &[Weight]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let dim = rows[0].rank();
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|w| w.0.iter().map(|c| Rat::from(c.clone())).collect())
        .collect();
    let mut rank = 0;
    for col in 0..dim {
        let Some(piv) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = m[rank][col].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let factor = &m[r][col] / &inv;
                for c in col..dim {
                    let t = &m[rank][c] * &factor;
                    m[r][c] = &m[r][c] - t;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Primitive integer vector positively proportional to a rational vector.
pub(crate) fn primitive_from_rats(v: &[Rat]) -> Weight {
    let lcm = v
        .iter()
        .map(|x| x.denom().clone())
        .fold(Int::one(), |acc, d| acc.lcm(&d));
    let ints: Vec<Int> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    primitive_from_ints(&ints)
}

/// Primitive integer vector positively proportional to an integer vector.
pub(crate) fn primitive_from_ints(v: &[Int]) -> Weight {
    let g = gcd_all(v.iter());
    if g.is_zero() {
        return Weight(v.to_vec());
    }
    Weight(v.iter().map(|x| x / &g).collect())
}

/// Primitive generators of the 1-dimensional nullspace of `rows`, if the
/// nullspace has dimension exactly 1.
fn line_generator(rows: &[&Weight], dim: usize) -> Option<Weight> {
    // Gaussian elimination to reduced row echelon form over the rationals.
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|w| w.0.iter().map(|c| Rat::from(c.clone())).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut lead = 0;
    for col in 0..dim {
        let Some(piv) = (lead..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(lead, piv);
        let inv = m[lead][col].clone();
        for c in col..dim {
            m[lead][c] = &m[lead][c] / &inv;
        }
        for r in 0..m.len() {
            if r != lead && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..dim {
                    let t = &m[lead][c] * &factor;
                    m[r][c] = &m[r][c] - t;
                }
            }
        }
        pivots.push(col);
        lead += 1;
        if lead == m.len() {
            break;
        }
    }
    if dim - pivots.len() != 1 {
        return None;
    }
    let free_col = (0..dim).find(|c| !pivots.contains(c))?;
    let mut x = vec![Rat::zero(); dim];
    x[free_col] = Rat::one();
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = -m[row][free_col].clone();
    }
    Some(primitive_from_rats(&x))
}

// ---------------------------------------------------------------------------
// Chambers
// ---------------------------------------------------------------------------

/// Cone data shared by window bookkeeping: the polarized defining weights
/// (each pairs strictly positively with the open chamber), a primitive
/// integer direction through the interior sample point, and — when the
/// arrangement spans full rank — the extreme rays of the closed chamber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChamberCone {
    rank: usize,
    gens: Vec<Weight>,
    sample_primitive: Weight,
    extreme_rays: Option<Vec<Weight>>,
}

impl ChamberCone {
    fn build(rank: usize, gens: Vec<Weight>, sample: &[Rat]) -> Self {
        let sample_primitive = primitive_from_rats(sample);
        let essential = matrix_rank(&gens) == rank;
        let extreme_rays = essential.then(|| Self::compute_rays(rank, &gens));
        ChamberCone {
            rank,
            gens,
            sample_primitive,
            extreme_rays,
        }
    }

    /// Extreme rays of the pointed closed chamber `{x : <g_i, x> >= 0}`:
    /// primitive solutions of rank-(d-1) subsets of the walls, oriented into
    /// the chamber, kept when their active set has rank exactly d-1.
    fn compute_rays(rank: usize, gens: &[Weight]) -> Vec<Weight> {
        let mut rays: Vec<Weight> = Vec::new();
        for subset in (0..gens.len()).combinations(rank - 1) {
            let rows: Vec<&Weight> = subset.iter().map(|&i| &gens[i]).collect();
            let Some(u) = line_generator(&rows, rank) else {
                continue;
            };
            for cand in [u.clone(), u.neg()] {
                if gens.iter().any(|g| g.dot(&cand).is_negative()) {
                    continue;
                }
                let active: Vec<Weight> = gens
                    .iter()
                    .filter(|g| g.dot(&cand).is_zero())
                    .cloned()
                    .collect();
                if matrix_rank(&active) == rank - 1 && !rays.contains(&cand) {
                    rays.push(cand);
                }
            }
        }
        rays.sort();
        rays
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The polarized defining weights `sigma_i * w_i`.
    pub fn generators(&self) -> &[Weight] {
        &self.gens
    }

    /// Primitive integer vector along the interior sample point; windows
    /// measure depth by pairing against it.
    pub fn sample_primitive(&self) -> &Weight {
        &self.sample_primitive
    }

    /// Whether the defining weights span full rank (pointed closed chamber).
    pub fn essential(&self) -> bool {
        self.extreme_rays.is_some()
    }

    /// Sum of the polarized generators: an interior point of the dual cone
    /// for essential arrangements.
    pub fn generator_sum(&self) -> Weight {
        let mut s = Weight::zero(self.rank);
        for g in &self.gens {
            s = s.add(g);
        }
        s
    }

    /// Is `v` strictly inside the open chamber?
    pub fn chamber_contains_strict(&self, v: &Weight) -> bool {
        self.gens.iter().all(|g| g.dot(v).is_positive())
    }

    /// Membership of `u` in the closed dual cone, i.e. the cone generated by
    /// the polarized defining weights.
    pub fn dual_contains(&self, u: &Weight) -> bool {
        if let Some(rays) = &self.extreme_rays {
            rays.iter().all(|r| !u.dot(r).is_negative())
        } else {
            // Farkas: u lies in cone(g_i) iff no x satisfies
            // <g_i, x> >= 0 for all i together with <u, x> <= -1.
            let mut rows: Vec<Row> = self
                .gens
                .iter()
                .map(|g| Row {
                    a: g.0.clone(),
                    c: Int::zero(),
                    strict: false,
                })
                .collect();
            rows.push(Row {
                a: u.neg().0,
                c: -Int::one(),
                strict: false,
            });
            !feasible(self.rank, rows)
        }
    }

    /// Membership of `u` in the topological interior of the dual cone.
    pub fn dual_contains_interior(&self, u: &Weight) -> bool {
        if let Some(rays) = &self.extreme_rays {
            rays.iter().all(|r| u.dot(r).is_positive())
        } else {
            // Interior iff <u, x> > 0 on the closed chamber minus the origin:
            // no x with max-coordinate +-1 may satisfy the walls together
            // with <u, x> <= 0.
            for j in 0..self.rank {
                for s in [1i64, -1] {
                    let mut rows: Vec<Row> = self
                        .gens
                        .iter()
                        .map(|g| Row {
                            a: g.0.clone(),
                            c: Int::zero(),
                            strict: false,
                        })
                        .collect();
                    rows.push(Row {
                        a: u.neg().0,
                        c: Int::zero(),
                        strict: false,
                    });
                    // x_j = s as two inequalities.
                    let mut e = vec![Int::zero(); self.rank];
                    e[j] = Int::one();
                    rows.push(Row {
                        a: e.clone(),
                        c: Int::from(-s),
                        strict: false,
                    });
                    rows.push(Row {
                        a: e.iter().map(|x| -x).collect(),
                        c: Int::from(s),
                        strict: false,
                    });
                    if feasible(self.rank, rows) {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// An open chamber of the arrangement, with its realizable sign vector and
/// an exact interior sample point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chamber {
    pub id: usize,
    /// Sign of `<w_i, x>` on the chamber, one entry per defining weight.
    pub signs: Vec<i8>,
    /// Exact interior point.
    pub sample: Vec<Rat>,
    pub cone: Arc<ChamberCone>,
}

impl Chamber {
    pub fn rank(&self) -> usize {
        self.cone.rank()
    }

    /// Signs of the opposite chamber `-C` (always realizable: the
    /// arrangement is central).
    pub fn opposite_signs(&self) -> Vec<i8> {
        self.signs.iter().map(|s| -s).collect()
    }
}

fn check_weights(weights: &[Weight], rank: usize) -> Result<(), LatticeError> {
    if rank == 0 {
        return Err(LatticeError::ZeroRank);
    }
    if weights.is_empty() {
        return Err(LatticeError::EmptyArrangement);
    }
    for (index, w) in weights.iter().enumerate() {
        if w.rank() != rank {
            return Err(LatticeError::RankMismatch {
                expected: rank,
                found: w.rank(),
            });
        }
        if w.is_zero() {
            return Err(LatticeError::ZeroWeight { index });
        }
    }
    Ok(())
}

/// Enumerate the open chambers of the central arrangement `{w_i^perp}`,
/// sorted by sign vector, with exact interior sample points.
pub fn enumerate_chambers(weights: &[Weight], rank: usize) -> Result<Vec<Chamber>, LatticeError> {
    enumerate_chambers_capped(weights, rank, DEFAULT_MAX_RANK)
}

/// [`enumerate_chambers`] with an explicit rank cap.
pub fn enumerate_chambers_capped(
    weights: &[Weight],
    rank: usize,
    max_rank: usize,
) -> Result<Vec<Chamber>, LatticeError> {
    check_weights(weights, rank)?;
    if rank > max_rank {
        return Err(LatticeError::RankTooLarge {
            rank,
            max: max_rank,
        });
    }

    // Incremental sign splitting: a partial sign vector survives iff its open
    // region is nonempty, so the live set never exceeds the chamber count.
    let mut live: Vec<(Vec<i8>, Vec<Row>)> = vec![(Vec::new(), Vec::new())];
    for w in weights {
        let mut next = Vec::with_capacity(live.len() * 2);
        for (signs, rows) in &live {
            for s in [1i8, -1] {
                let mut rows2 = rows.clone();
                let a = if s > 0 { w.0.clone() } else { w.neg().0 };
                rows2.push(Row {
                    a,
                    c: Int::zero(),
                    strict: true,
                });
                if feasible(rank, rows2.clone()) {
                    let mut signs2 = signs.clone();
                    signs2.push(s);
                    next.push((signs2, rows2));
                }
            }
        }
        live = next;
    }

    live.sort_by(|a, b| a.0.cmp(&b.0));
    let mut chambers = Vec::with_capacity(live.len());
    for (id, (signs, rows)) in live.into_iter().enumerate() {
        let sample = sample_point(rank, rows)
            .expect("sign region was feasible during enumeration; sampling must succeed");
        let gens: Vec<Weight> = weights
            .iter()
            .zip(&signs)
            .map(|(w, &s)| if s > 0 { w.clone() } else { w.neg() })
            .collect();
        let cone = Arc::new(ChamberCone::build(rank, gens, &sample));
        chambers.push(Chamber {
            id,
            signs,
            sample,
            cone,
        });
    }
    Ok(chambers)
}

/// Position of a weight relative to the closed dual cone of a chamber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConePosition {
    StrictlyInside,
    OnBoundary,
    Outside,
}

/// Classify `xi` against the closed dual cone `C*` of the chamber: strictly
/// inside (interior), on the boundary, or outside.  Decided exactly from the
/// chamber's defining inequalities.
pub fn dual_cone_contains(chamber: &Chamber, xi: &Weight) -> Result<ConePosition, LatticeError> {
    if xi.rank() != chamber.rank() {
        return Err(LatticeError::RankMismatch {
            expected: chamber.rank(),
            found: xi.rank(),
        });
    }
    let cone = &chamber.cone;
    Ok(if !cone.dual_contains(xi) {
        ConePosition::Outside
    } else if cone.dual_contains_interior(xi) {
        ConePosition::StrictlyInside
    } else {
        ConePosition::OnBoundary
    })
}

/// One weight together with its polarization across a chamber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarizedWeight {
    pub original: Weight,
    /// `original` or `-original`, whichever pairs positively with the chamber.
    pub polarized: Weight,
    pub flipped: bool,
}

/// The polarization of a weight list across one chamber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polarization {
    pub entries: Vec<PolarizedWeight>,
    /// The polarizing index: how many weights had to be flipped.
    pub index: usize,
}

/// Polarize every weight across the chamber: replace it by the sign multiple
/// pairing strictly positively with the chamber interior, and count flips.
pub fn polarize(chamber: &Chamber, weights: &[Weight]) -> Result<Polarization, LatticeError> {
    let p = chamber.cone.sample_primitive();
    let mut entries = Vec::with_capacity(weights.len());
    let mut index = 0;
    for (i, w) in weights.iter().enumerate() {
        if w.rank() != chamber.rank() {
            return Err(LatticeError::RankMismatch {
                expected: chamber.rank(),
                found: w.rank(),
            });
        }
        if w.is_zero() {
            return Err(LatticeError::ZeroWeight { index: i });
        }
        let pairing = w.dot(p);
        if pairing.is_zero() {
            return Err(LatticeError::WeightOnWall { weight: w.clone() });
        }
        let flipped = pairing.is_negative();
        if flipped {
            index += 1;
        }
        entries.push(PolarizedWeight {
            original: w.clone(),
            polarized: if flipped { w.neg() } else { w.clone() },
            flipped,
        });
    }
    Ok(Polarization { entries, index })
}

/// Iterate integer vectors of max-norm exactly `m` in ascending
/// lexicographic order, calling `f` until it returns `Some`.
fn scan_shell<T>(rank: usize, m: i64, mut f: impl FnMut(&[i64]) -> Option<T>) -> Option<T> {
    let mut v = vec![-m; rank];
    loop {
        if v.iter().any(|c| c.abs() == m) {
            if let Some(t) = f(&v) {
                return Some(t);
            }
        }
        // Odometer: last coordinate fastest, so the scan is lexicographic.
        let mut i = rank;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if v[i] < m {
                v[i] += 1;
                for c in v.iter_mut().skip(i + 1) {
                    *c = -m;
                }
                break;
            }
        }
    }
}

/// Find a lattice vector `v` strictly inside the chamber such that
/// `<lambda - xi, v> != 0` for every `lambda` in the window other than `xi`.
/// Candidates are scanned by increasing max-norm with lexicographic
/// tie-break, so the result is deterministic.
pub fn find_reduction_vector(
    chamber: &Chamber,
    xi: &Weight,
    window: &[Weight],
) -> Result<Weight, LatticeError> {
    find_reduction_vector_with_budget(chamber, xi, window, DEFAULT_SEARCH_BUDGET)
}

/// [`find_reduction_vector`] with an explicit max-norm budget.
pub fn find_reduction_vector_with_budget(
    chamber: &Chamber,
    xi: &Weight,
    window: &[Weight],
    budget: i64,
) -> Result<Weight, LatticeError> {
    let rank = chamber.rank();
    if xi.rank() != rank {
        return Err(LatticeError::RankMismatch {
            expected: rank,
            found: xi.rank(),
        });
    }
    for w in window {
        if w.rank() != rank {
            return Err(LatticeError::RankMismatch {
                expected: rank,
                found: w.rank(),
            });
        }
    }
    let diffs: Vec<Weight> = window
        .iter()
        .filter(|l| *l != xi)
        .map(|l| l.sub(xi))
        .collect();
    for m in 1..=budget {
        let hit = scan_shell(rank, m, |coords| {
            let v = Weight::from_i64s(coords);
            if !chamber.cone.chamber_contains_strict(&v) {
                return None;
            }
            if diffs.iter().all(|d| !d.dot(&v).is_zero()) {
                Some(v)
            } else {
                None
            }
        });
        if let Some(v) = hit {
            return Ok(v);
        }
    }
    Err(LatticeError::SearchBudgetExceeded { budget })
}

/// Integer points `u` of the closed dual cone with `0 <= <u, f> <= bound`,
/// in ascending lexicographic order.  `f` must pair strictly positively with
/// every generator (e.g. the chamber's sample direction, or any vector in the
/// open chamber).
pub fn dual_cone_slab(cone: &ChamberCone, f: &Weight, bound: &Int) -> Vec<Weight> {
    assert!(
        cone.generators().iter().all(|g| g.dot(f).is_positive()),
        "slab functional must be strictly positive on the dual cone's generators"
    );
    let mut out = Vec::new();
    if bound.is_negative() {
        return out;
    }
    // Every u = sum c_i g_i with c_i >= 0 and sum c_i <g_i, f> <= bound, so
    // each |u_j| is bounded by the largest vertex of that simplex.
    let rank = cone.rank();
    let mut box_bounds: Vec<i64> = Vec::with_capacity(rank);
    for j in 0..rank {
        let mut best = Int::zero();
        for g in cone.generators() {
            let h = g.dot(f);
            // ceil(bound * |g_j| / h) with all quantities non-negative.
            let num = bound * g.0[j].abs();
            let b = (&num + &h - Int::one()) / &h;
            if b > best {
                best = b;
            }
        }
        box_bounds.push(i64::try_from(&best).expect("slab box bound beyond i64; not desk scale"));
    }
    let mut v = box_bounds.iter().map(|b| -b).collect::<Vec<i64>>();
    loop {
        let u = Weight::from_i64s(&v);
        let pairing = u.dot(f);
        if !pairing.is_negative() && pairing <= *bound && cone.dual_contains(&u) {
            out.push(u);
        }
        let mut i = rank;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if v[i] < box_bounds[i] {
                v[i] += 1;
                for (k, c) in v.iter_mut().enumerate().skip(i + 1) {
                    *c = -box_bounds[k];
                }
                break;
            }
        }
    }
}
