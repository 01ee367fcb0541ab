//! Exact arithmetic in the formal character ring, with certified windows.
//!
//! A [`CharacterSeries`] is a finite multiplicity map `ξ ↦ q_ξ` supported in
//! a shifted dual cone `anchor − C̄*`, together with a window recording how
//! deep below the anchor the coefficients are certified.  Depth is measured
//! by pairing against the chamber's primitive interior direction, an exact
//! integer grading of the support cone.  Operations contract windows so a
//! reported multiplicity is always the true one; beyond the window a series
//! refuses to answer rather than report an uncertain zero.
//!
//! A [`MorsePolynomial`] is a polynomial in a formal variable `t` with
//! character-series coefficients — the objects the strong inequalities
//! compare — plus synthetic division by `(1+t)` to extract the certified
//! nonnegative part.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::lattice::{dual_cone_slab, ChamberCone, Int, Weight};

/// Errors from window bookkeeping and series arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesError {
    RankMismatch { expected: usize, found: usize },
    /// The two series live over different chamber cones.
    WindowMismatch,
    /// No common anchor found within the join budget (degenerate cone whose
    /// generators do not span; validated scenarios never hit this).
    JoinFailed,
    /// The weight lies inside the support cone but beyond the certified
    /// depth — the truth value there is unknown, not zero.
    OutsideWindow { weight: Weight },
    /// A constructed term falls outside the declared support cone.
    UnsupportedTerm { weight: Weight },
    /// Truncation depths must be non-negative.
    InvalidDepth,
    /// A closed-form cohomology ladder produced a negative dimension.
    NegativeLadder { step: Int },
    /// Numeric evaluation requires a globally exact finite series.
    NotFinite,
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::RankMismatch { expected, found } => {
                write!(f, "rank mismatch: expected {expected}, found {found}")
            }
            SeriesError::WindowMismatch => write!(f, "series live over different chamber cones"),
            SeriesError::JoinFailed => {
                write!(f, "no common window anchor found; cone generators do not span")
            }
            SeriesError::OutsideWindow { weight } => {
                write!(f, "weight {weight} is beyond the certified window")
            }
            SeriesError::UnsupportedTerm { weight } => {
                write!(f, "term {weight} lies outside the declared support cone")
            }
            SeriesError::InvalidDepth => write!(f, "window depth must be non-negative"),
            SeriesError::NegativeLadder { step } => {
                write!(f, "cohomology ladder is negative at step {step}")
            }
            SeriesError::NotFinite => {
                write!(f, "operation requires a globally exact finite series")
            }
        }
    }
}

impl std::error::Error for SeriesError {}

/// How far a window certifies the series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extent {
    /// Certified for all support heights `0..=depth` below the anchor.
    Truncated(Int),
    /// Every coefficient of the (finitely supported) series is known.
    Exact,
}

/// Certified region of a character series: all `ξ ∈ anchor − C̄*` whose
/// height `⟨anchor − ξ, p⟩` is within the extent, where `p` is the chamber's
/// primitive interior direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    anchor: Weight,
    cone: Arc<ChamberCone>,
    extent: Extent,
}

/// Position of a weight relative to a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Containment {
    /// Outside the support cone: the series is certified zero there.
    OutsideCone,
    /// Inside the certified region, at this height below the anchor.
    Certified(Int),
    /// Inside the support cone but deeper than the certificate reaches.
    BeyondDepth,
}

impl Window {
    pub fn truncated(cone: Arc<ChamberCone>, anchor: Weight, depth: Int) -> Result<Self, SeriesError> {
        if anchor.rank() != cone.rank() {
            return Err(SeriesError::RankMismatch {
                expected: cone.rank(),
                found: anchor.rank(),
            });
        }
        if depth.is_negative() {
            return Err(SeriesError::InvalidDepth);
        }
        Ok(Window {
            anchor,
            cone,
            extent: Extent::Truncated(depth),
        })
    }

    pub fn exact(cone: Arc<ChamberCone>, anchor: Weight) -> Self {
        Window {
            anchor,
            cone,
            extent: Extent::Exact,
        }
    }

    pub fn rank(&self) -> usize {
        self.cone.rank()
    }

    pub fn anchor(&self) -> &Weight {
        &self.anchor
    }

    pub fn cone(&self) -> &Arc<ChamberCone> {
        &self.cone
    }

    pub fn extent(&self) -> &Extent {
        &self.extent
    }

    pub fn certified_depth(&self) -> Option<&Int> {
        match &self.extent {
            Extent::Truncated(d) => Some(d),
            Extent::Exact => None,
        }
    }

    /// Height of a support-cone member below the anchor, if it is one.
    fn height_of(&self, xi: &Weight) -> Option<Int> {
        let u = self.anchor.sub(xi);
        if self.cone.dual_contains(&u) {
            Some(u.dot(self.cone.sample_primitive()))
        } else {
            None
        }
    }

    /// Classify a weight against the window.
    pub fn classify(&self, xi: &Weight) -> Result<Containment, SeriesError> {
        if xi.rank() != self.rank() {
            return Err(SeriesError::RankMismatch {
                expected: self.rank(),
                found: xi.rank(),
            });
        }
        Ok(match self.height_of(xi) {
            None => Containment::OutsideCone,
            Some(h) => match &self.extent {
                Extent::Exact => Containment::Certified(h),
                Extent::Truncated(d) => {
                    if h <= *d {
                        Containment::Certified(h)
                    } else {
                        Containment::BeyondDepth
                    }
                }
            },
        })
    }

    /// All lattice weights in the certified region of a truncated window, in
    /// descending-weight (ascending-offset) deterministic order.  `None` for
    /// exact windows (their certified region is the whole lattice).
    pub fn lattice_points(&self) -> Option<Vec<Weight>> {
        let depth = self.certified_depth()?;
        let pts = dual_cone_slab(&self.cone, self.cone.sample_primitive(), depth);
        Some(pts.into_iter().map(|u| self.anchor.sub(&u)).collect())
    }
}

/// Smallest-found anchor dominating both inputs in the dual-cone order:
/// `a` if `a − b ∈ C̄*`, `b` symmetrically, else `a + k·(sum of generators)`
/// for the first working `k`.  Over-shooting is lossless: extents are
/// shifted by exactly the anchor displacement.
fn join_anchor(cone: &ChamberCone, a: &Weight, b: &Weight) -> Result<Weight, SeriesError> {
    if cone.dual_contains(&a.sub(b)) {
        return Ok(a.clone());
    }
    if cone.dual_contains(&b.sub(a)) {
        return Ok(b.clone());
    }
    let gsum = cone.generator_sum();
    let mut candidate = a.clone();
    for _ in 0..JOIN_BUDGET {
        candidate = candidate.add(&gsum);
        if cone.dual_contains(&candidate.sub(b)) {
            return Ok(candidate);
        }
    }
    Err(SeriesError::JoinFailed)
}

const JOIN_BUDGET: usize = 256;

/// A finitely-stored character series with a certified window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterSeries {
    window: Window,
    /// Nonzero multiplicities only, every key inside the window.
    terms: BTreeMap<Weight, Int>,
}

impl CharacterSeries {
    /// The zero series, globally exact.
    pub fn zero(cone: &Arc<ChamberCone>) -> Self {
        CharacterSeries {
            window: Window::exact(Arc::clone(cone), Weight::zero(cone.rank())),
            terms: BTreeMap::new(),
        }
    }

    /// `mult · e^{xi}`, globally exact.
    pub fn monomial(cone: &Arc<ChamberCone>, xi: Weight, mult: Int) -> Result<Self, SeriesError> {
        if xi.rank() != cone.rank() {
            return Err(SeriesError::RankMismatch {
                expected: cone.rank(),
                found: xi.rank(),
            });
        }
        let mut terms = BTreeMap::new();
        if !mult.is_zero() {
            terms.insert(xi.clone(), mult);
        }
        Ok(CharacterSeries {
            window: Window::exact(Arc::clone(cone), xi),
            terms,
        })
    }

    /// Exact series from a finite multiplicity map; the anchor is the join
    /// of all term weights.
    pub fn exact_from_terms(
        cone: &Arc<ChamberCone>,
        terms: BTreeMap<Weight, Int>,
    ) -> Result<Self, SeriesError> {
        let mut anchor: Option<Weight> = None;
        for (xi, _) in terms.iter().filter(|(_, m)| !m.is_zero()) {
            if xi.rank() != cone.rank() {
                return Err(SeriesError::RankMismatch {
                    expected: cone.rank(),
                    found: xi.rank(),
                });
            }
            anchor = Some(match anchor {
                None => xi.clone(),
                Some(a) => join_anchor(cone, &a, xi)?,
            });
        }
        let anchor = anchor.unwrap_or_else(|| Weight::zero(cone.rank()));
        let series = CharacterSeries {
            window: Window::exact(Arc::clone(cone), anchor),
            terms: terms.into_iter().filter(|(_, m)| !m.is_zero()).collect(),
        };
        for xi in series.terms.keys() {
            if series.window.height_of(xi).is_none() {
                return Err(SeriesError::UnsupportedTerm { weight: xi.clone() });
            }
        }
        Ok(series)
    }

    /// Geometric ladder of one polarized weight: `Σ_{m≥0} e^{−mλ}` for an
    /// unflipped weight, `Σ_{m≥1} e^{−mλ}` for a flipped one (the leading
    /// factor of the top exterior power is folded in), truncated at `depth`.
    pub fn geometric(
        cone: &Arc<ChamberCone>,
        lambda: &Weight,
        flipped: bool,
        depth: &Int,
    ) -> Result<Self, SeriesError> {
        if depth.is_negative() {
            return Err(SeriesError::InvalidDepth);
        }
        let step = ladder_step(cone, lambda)?;
        let mut terms = BTreeMap::new();
        let mut m = if flipped { Int::one() } else { Int::zero() };
        while &m * &step <= *depth {
            terms.insert(lambda.scale(&m).neg(), Int::one());
            m += 1;
        }
        Ok(CharacterSeries {
            window: Window::truncated(
                Arc::clone(cone),
                Weight::zero(cone.rank()),
                depth.clone(),
            )?,
            terms,
        })
    }

    /// Closed-form cohomology ladder `Σ_{m≥0} h_m e^{base − m·ray}` with
    /// `h_m = init[m]` for small `m` and `h_m = slope·m + offset` beyond,
    /// truncated at `depth`.  All dimensions must be non-negative.
    #[allow(clippy::too_many_arguments)]
    pub fn ray_series(
        cone: &Arc<ChamberCone>,
        base: &Weight,
        ray: &Weight,
        init: &[Int],
        slope: &Int,
        offset: &Int,
        depth: &Int,
    ) -> Result<Self, SeriesError> {
        if depth.is_negative() {
            return Err(SeriesError::InvalidDepth);
        }
        if base.rank() != cone.rank() {
            return Err(SeriesError::RankMismatch {
                expected: cone.rank(),
                found: base.rank(),
            });
        }
        let step = ladder_step(cone, ray)?;
        let mut terms = BTreeMap::new();
        let mut m = Int::zero();
        while &m * &step <= *depth {
            let h = match m.to_usize().filter(|&i| i < init.len()) {
                Some(i) => init[i].clone(),
                None => slope * &m + offset,
            };
            if h.is_negative() {
                return Err(SeriesError::NegativeLadder { step: m });
            }
            if !h.is_zero() {
                terms.insert(base.sub(&ray.scale(&m)), h);
            }
            m += 1;
        }
        Ok(CharacterSeries {
            window: Window::truncated(Arc::clone(cone), base.clone(), depth.clone())?,
            terms,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn terms(&self) -> &BTreeMap<Weight, Int> {
        &self.terms
    }

    pub fn rank(&self) -> usize {
        self.window.rank()
    }

    /// The certified multiplicity of `xi`: zero outside the support cone,
    /// the stored value within the window, an error beyond it.
    pub fn mult_at(&self, xi: &Weight) -> Result<Int, SeriesError> {
        match self.window.classify(xi)? {
            Containment::OutsideCone => Ok(Int::zero()),
            Containment::Certified(_) => {
                Ok(self.terms.get(xi).cloned().unwrap_or_else(Int::zero))
            }
            Containment::BeyondDepth => Err(SeriesError::OutsideWindow { weight: xi.clone() }),
        }
    }

    fn check_compatible(&self, other: &CharacterSeries) -> Result<(), SeriesError> {
        if self.rank() != other.rank() {
            return Err(SeriesError::RankMismatch {
                expected: self.rank(),
                found: other.rank(),
            });
        }
        if self.window.cone != other.window.cone {
            return Err(SeriesError::WindowMismatch);
        }
        Ok(())
    }

    /// Drop zero multiplicities and terms beyond the certified depth.
    fn normalize(&mut self) {
        let window = self.window.clone();
        self.terms.retain(|xi, m| {
            !m.is_zero() && matches!(window.classify(xi), Ok(Containment::Certified(_)))
        });
    }

    fn combine_linear(
        &self,
        other: &CharacterSeries,
        subtract: bool,
    ) -> Result<CharacterSeries, SeriesError> {
        self.check_compatible(other)?;
        let cone = &self.window.cone;
        let anchor = join_anchor(cone, &self.window.anchor, &other.window.anchor)?;
        let p = cone.sample_primitive();
        let shift = |w: &Window| anchor.sub(&w.anchor).dot(p);
        let extent = match (&self.window.extent, &other.window.extent) {
            (Extent::Exact, Extent::Exact) => Extent::Exact,
            (Extent::Truncated(d), Extent::Exact) => Extent::Truncated(d + shift(&self.window)),
            (Extent::Exact, Extent::Truncated(d)) => Extent::Truncated(d + shift(&other.window)),
            (Extent::Truncated(da), Extent::Truncated(db)) => Extent::Truncated(
                (da + shift(&self.window)).min(db + shift(&other.window)),
            ),
        };
        let mut terms = self.terms.clone();
        for (xi, m) in &other.terms {
            let entry = terms.entry(xi.clone()).or_insert_with(Int::zero);
            if subtract {
                *entry -= m;
            } else {
                *entry += m;
            }
        }
        let mut out = CharacterSeries {
            window: Window {
                anchor,
                cone: Arc::clone(cone),
                extent,
            },
            terms,
        };
        out.normalize();
        Ok(out)
    }

    pub fn add(&self, other: &CharacterSeries) -> Result<CharacterSeries, SeriesError> {
        self.combine_linear(other, false)
    }

    pub fn sub(&self, other: &CharacterSeries) -> Result<CharacterSeries, SeriesError> {
        self.combine_linear(other, true)
    }

    pub fn neg(&self) -> CharacterSeries {
        CharacterSeries {
            window: self.window.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }

    pub fn scale(&self, factor: &Int) -> CharacterSeries {
        if factor.is_zero() {
            // Scaling by zero is exactly zero no matter how deep the input
            // was certified.
            return CharacterSeries {
                window: Window::exact(
                    Arc::clone(&self.window.cone),
                    self.window.anchor.clone(),
                ),
                terms: BTreeMap::new(),
            };
        }
        CharacterSeries {
            window: self.window.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
        }
    }

    /// Smallest stored height; for an empty truncated series everything up
    /// to the depth is certified absent, so the true minimum exceeds it.
    fn min_height(&self) -> Option<Int> {
        let heights = self
            .terms
            .keys()
            .map(|xi| self.window.height_of(xi).expect("stored term in window"));
        match heights.min() {
            Some(h) => Some(h),
            None => match &self.window.extent {
                Extent::Exact => None, // certified zero series
                Extent::Truncated(d) => Some(d + Int::one()),
            },
        }
    }

    /// Support convolution with the window contracted so every reported
    /// coefficient is exact: an unknown term of one factor (height beyond
    /// its depth) can only land at heights above `depth + min_height(other)`.
    pub fn mul(&self, other: &CharacterSeries) -> Result<CharacterSeries, SeriesError> {
        self.check_compatible(other)?;
        let cone = &self.window.cone;
        let anchor = self.window.anchor.add(&other.window.anchor);
        let extent = {
            let ma = self.min_height();
            let mb = other.min_height();
            match (&self.window.extent, &other.window.extent, ma, mb) {
                // A factor that is exactly zero annihilates the product.
                (_, _, None, _) | (_, _, _, None) => {
                    return Ok(CharacterSeries {
                        window: Window::exact(Arc::clone(cone), anchor),
                        terms: BTreeMap::new(),
                    });
                }
                (Extent::Exact, Extent::Exact, _, _) => Extent::Exact,
                (Extent::Truncated(da), Extent::Exact, _, Some(mb)) => {
                    Extent::Truncated(da + mb)
                }
                (Extent::Exact, Extent::Truncated(db), Some(ma), _) => {
                    Extent::Truncated(db + ma)
                }
                (Extent::Truncated(da), Extent::Truncated(db), Some(ma), Some(mb)) => {
                    Extent::Truncated((da + mb).min(db + ma))
                }
            }
        };
        let mut terms: BTreeMap<Weight, Int> = BTreeMap::new();
        for (xa, ma) in &self.terms {
            for (xb, mb) in &other.terms {
                let xi = xa.add(xb);
                let prod = ma * mb;
                let entry = terms.entry(xi).or_insert_with(Int::zero);
                *entry += prod;
            }
        }
        let mut out = CharacterSeries {
            window: Window {
                anchor,
                cone: Arc::clone(cone),
                extent,
            },
            terms,
        };
        out.normalize();
        Ok(out)
    }

    /// First stored negative multiplicity, if any (the series is certified
    /// nonnegative on its window iff this is `None`).
    pub fn first_negative(&self) -> Option<(Weight, Int)> {
        self.terms
            .iter()
            .find(|(_, m)| m.is_negative())
            .map(|(k, v)| (k.clone(), v.clone()))
    }

    pub fn is_nonneg(&self) -> bool {
        self.first_negative().is_none()
    }

    /// True iff the series vanishes identically on its certified window
    /// (and, for exact windows, everywhere).
    pub fn is_zero_certified(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.window.extent, Extent::Exact)
    }

    /// Numeric evaluation `Σ q_ξ e^{i⟨ξ,θ⟩}` of a globally exact series;
    /// for cross-checks only, never for decisions.
    pub fn evaluate_at_theta(&self, theta: &[f64]) -> Result<Complex64, SeriesError> {
        if !self.is_exact() {
            return Err(SeriesError::NotFinite);
        }
        if theta.len() != self.rank() {
            return Err(SeriesError::RankMismatch {
                expected: self.rank(),
                found: theta.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, m) in &self.terms {
            let phase: f64 = xi
                .0
                .iter()
                .zip(theta)
                .map(|(c, t)| c.to_f64().expect("desk-scale weight") * t)
                .sum();
            let mult = m.to_f64().expect("desk-scale multiplicity");
            acc += Complex64::new(0.0, phase).exp() * mult;
        }
        Ok(acc)
    }
}

fn ladder_step(cone: &ChamberCone, lambda: &Weight) -> Result<Int, SeriesError> {
    if lambda.rank() != cone.rank() {
        return Err(SeriesError::RankMismatch {
            expected: cone.rank(),
            found: lambda.rank(),
        });
    }
    let step = lambda.dot(cone.sample_primitive());
    if lambda.is_zero() || !cone.dual_contains(lambda) || !step.is_positive() {
        return Err(SeriesError::UnsupportedTerm {
            weight: lambda.clone(),
        });
    }
    Ok(step)
}

/// A polynomial in `t` with character-series coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorsePolynomial {
    cone: Arc<ChamberCone>,
    coeffs: Vec<CharacterSeries>,
}

impl MorsePolynomial {
    pub fn zero(cone: &Arc<ChamberCone>) -> Self {
        MorsePolynomial {
            cone: Arc::clone(cone),
            coeffs: Vec::new(),
        }
    }

    pub fn from_coeffs(
        cone: &Arc<ChamberCone>,
        coeffs: Vec<CharacterSeries>,
    ) -> Result<Self, SeriesError> {
        for c in &coeffs {
            if c.window().cone() != cone {
                return Err(SeriesError::WindowMismatch);
            }
        }
        Ok(MorsePolynomial {
            cone: Arc::clone(cone),
            coeffs,
        })
    }

    pub fn cone(&self) -> &Arc<ChamberCone> {
        &self.cone
    }

    /// Number of stored coefficients (degree bound, not trimmed).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[CharacterSeries] {
        &self.coeffs
    }

    /// Coefficient of `t^k`; zero series beyond the stored degree.
    pub fn coeff(&self, k: usize) -> CharacterSeries {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| CharacterSeries::zero(&self.cone))
    }

    /// Add a top-degree coefficient.
    pub fn push(&mut self, c: CharacterSeries) -> Result<(), SeriesError> {
        if c.window().cone() != &self.cone {
            return Err(SeriesError::WindowMismatch);
        }
        self.coeffs.push(c);
        Ok(())
    }

    /// Accumulate `series · t^degree`.
    pub fn add_term(&mut self, degree: usize, series: &CharacterSeries) -> Result<(), SeriesError> {
        while self.coeffs.len() <= degree {
            self.coeffs.push(CharacterSeries::zero(&self.cone));
        }
        self.coeffs[degree] = self.coeffs[degree].add(series)?;
        Ok(())
    }

    pub fn add(&self, other: &MorsePolynomial) -> Result<MorsePolynomial, SeriesError> {
        let n = self.len().max(other.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k).add(&other.coeff(k))?);
        }
        Ok(MorsePolynomial {
            cone: Arc::clone(&self.cone),
            coeffs,
        })
    }

    pub fn sub(&self, other: &MorsePolynomial) -> Result<MorsePolynomial, SeriesError> {
        let n = self.len().max(other.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k).sub(&other.coeff(k))?);
        }
        Ok(MorsePolynomial {
            cone: Arc::clone(&self.cone),
            coeffs,
        })
    }

    /// Multiply every coefficient by one series.
    pub fn mul_series(&self, s: &CharacterSeries) -> Result<MorsePolynomial, SeriesError> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c.mul(s)?);
        }
        Ok(MorsePolynomial {
            cone: Arc::clone(&self.cone),
            coeffs,
        })
    }

    /// Multiply by `t^k`.
    pub fn shift_t(&self, k: usize) -> MorsePolynomial {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + k);
        for _ in 0..k {
            coeffs.push(CharacterSeries::zero(&self.cone));
        }
        coeffs.extend(self.coeffs.iter().cloned());
        MorsePolynomial {
            cone: Arc::clone(&self.cone),
            coeffs,
        }
    }

    /// Substitute `t = value` (`+1` or `−1`), folding coefficients into one
    /// character series.
    pub fn specialize_t(&self, value: i8) -> Result<CharacterSeries, SeriesError> {
        assert!(value == 1 || value == -1, "t can only be specialized at +1 or -1");
        let mut acc = CharacterSeries::zero(&self.cone);
        for (k, c) in self.coeffs.iter().enumerate() {
            acc = if value == -1 && k % 2 == 1 {
                acc.sub(c)?
            } else {
                acc.add(c)?
            };
        }
        Ok(acc)
    }

    /// First stored negative multiplicity across degrees.
    pub fn first_negative(&self) -> Option<(usize, Weight, Int)> {
        for (k, c) in self.coeffs.iter().enumerate() {
            if let Some((w, m)) = c.first_negative() {
                return Some((k, w, m));
            }
        }
        None
    }

    pub fn is_nonneg(&self) -> bool {
        self.first_negative().is_none()
    }

    pub fn is_zero_certified(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_certified())
    }

    /// Shallowest certified depth across coefficients (`None` if all exact).
    pub fn min_certified_depth(&self) -> Option<Int> {
        self.coeffs
            .iter()
            .filter_map(|c| c.window().certified_depth().cloned())
            .min()
    }
}

/// Synthetic division by `(1 + t)`: returns `(quotient, remainder)` with
/// `quotient·(1+t) + remainder = p` exactly, coefficientwise within windows;
/// the remainder is the constant term.
pub fn poly_divide_one_plus_t(
    p: &MorsePolynomial,
) -> Result<(MorsePolynomial, CharacterSeries), SeriesError> {
    let n = p.len();
    if n == 0 {
        return Ok((MorsePolynomial::zero(p.cone()), CharacterSeries::zero(p.cone())));
    }
    if n == 1 {
        return Ok((MorsePolynomial::zero(p.cone()), p.coeff(0)));
    }
    // q_{d-1} = p_d, then q_{k-1} = p_k − q_k downward; remainder = p_0 − q_0.
    let d = n - 1;
    let mut q = vec![CharacterSeries::zero(p.cone()); d];
    q[d - 1] = p.coeff(d);
    for k in (1..d).rev() {
        q[k - 1] = p.coeff(k).sub(&q[k])?;
    }
    let remainder = p.coeff(0).sub(&q[0])?;
    Ok((MorsePolynomial::from_coeffs(p.cone(), q)?, remainder))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_chambers;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn w(coords: &[i64]) -> Weight {
        Weight::from_i64s(coords)
    }

    fn half_line() -> Arc<ChamberCone> {
        let chambers = enumerate_chambers(&[w(&[1])], 1).unwrap();
        let plus = chambers.iter().find(|c| c.signs == vec![1]).unwrap();
        Arc::clone(&plus.cone)
    }

    fn quadrant() -> Arc<ChamberCone> {
        let chambers = enumerate_chambers(&[w(&[1, 0]), w(&[0, 1])], 2).unwrap();
        let c = chambers.iter().find(|c| c.signs == vec![1, 1]).unwrap();
        Arc::clone(&c.cone)
    }

    fn series(cone: &Arc<ChamberCone>, entries: &[(&[i64], i64)]) -> CharacterSeries {
        let map: BTreeMap<Weight, Int> = entries
            .iter()
            .map(|(c, m)| (w(c), Int::from(*m)))
            .collect();
        CharacterSeries::exact_from_terms(cone, map).unwrap()
    }

    #[test]
    fn monomial_identity_keeps_full_depth() {
        let cone = half_line();
        let one = CharacterSeries::monomial(&cone, w(&[0]), Int::one()).unwrap();
        let prod = one.mul(&one).unwrap();
        assert!(prod.is_exact());
        assert_eq!(prod.mult_at(&w(&[0])).unwrap(), Int::one());
        assert_eq!(prod.terms().len(), 1);
    }

    #[test]
    fn telescoping_product_certifies_the_constant() {
        let cone = half_line();
        let geo = CharacterSeries::geometric(&cone, &w(&[1]), false, &Int::from(10)).unwrap();
        let factor = series(&cone, &[(&[0], 1), (&[-1], -1)]);
        let prod = geo.mul(&factor).unwrap();
        assert_eq!(prod.mult_at(&w(&[0])).unwrap(), Int::one());
        for k in 1..=9i64 {
            assert_eq!(prod.mult_at(&w(&[-k])).unwrap(), Int::zero(), "at -{k}");
        }
        let depth = prod.window().certified_depth().unwrap().clone();
        assert!(depth >= Int::from(9), "depth {depth} too shallow");
    }

    #[test]
    fn binomial_square() {
        let cone = half_line();
        let a = series(&cone, &[(&[0], 1), (&[-1], 1)]);
        let sq = a.mul(&a).unwrap();
        assert!(sq.is_exact());
        assert_eq!(sq.mult_at(&w(&[0])).unwrap(), Int::from(1));
        assert_eq!(sq.mult_at(&w(&[-1])).unwrap(), Int::from(2));
        assert_eq!(sq.mult_at(&w(&[-2])).unwrap(), Int::from(1));
    }

    #[test]
    fn mult_at_examples() {
        let cone = half_line();
        let tripled = CharacterSeries::monomial(&cone, w(&[-2]), Int::from(3)).unwrap();
        assert_eq!(tripled.mult_at(&w(&[-2])).unwrap(), Int::from(3));

        let geo = CharacterSeries::geometric(&cone, &w(&[1]), false, &Int::from(10)).unwrap();
        assert_eq!(geo.mult_at(&w(&[-7])).unwrap(), Int::one());
        assert_eq!(
            geo.mult_at(&w(&[-11])),
            Err(SeriesError::OutsideWindow { weight: w(&[-11]) })
        );
        // Outside the support cone the series is certified zero.
        assert_eq!(geo.mult_at(&w(&[5])).unwrap(), Int::zero());
    }

    #[test]
    fn flipped_ladder_starts_at_one() {
        let cone = half_line();
        let geo = CharacterSeries::geometric(&cone, &w(&[1]), true, &Int::from(5)).unwrap();
        assert_eq!(geo.mult_at(&w(&[0])).unwrap(), Int::zero());
        for k in 1..=5i64 {
            assert_eq!(geo.mult_at(&w(&[-k])).unwrap(), Int::one());
        }
    }

    #[test]
    fn ray_series_init_then_affine_tail() {
        let cone = half_line();
        // h = [1, 1], then 2m - 1: a genus-free h^0 ladder shape.
        let s = CharacterSeries::ray_series(
            &cone,
            &w(&[0]),
            &w(&[1]),
            &[Int::from(1), Int::from(1)],
            &Int::from(2),
            &Int::from(-1),
            &Int::from(6),
        )
        .unwrap();
        assert_eq!(s.mult_at(&w(&[0])).unwrap(), Int::from(1));
        assert_eq!(s.mult_at(&w(&[-1])).unwrap(), Int::from(1));
        assert_eq!(s.mult_at(&w(&[-2])).unwrap(), Int::from(3));
        assert_eq!(s.mult_at(&w(&[-6])).unwrap(), Int::from(11));
    }

    #[test]
    fn ray_series_rejects_negative_dimensions() {
        let cone = half_line();
        let err = CharacterSeries::ray_series(
            &cone,
            &w(&[0]),
            &w(&[1]),
            &[],
            &Int::from(-1),
            &Int::from(0),
            &Int::from(4),
        )
        .unwrap_err();
        assert_eq!(err, SeriesError::NegativeLadder { step: Int::from(1) });
    }

    #[test]
    fn incompatible_anchors_join_above_both() {
        let cone = quadrant();
        let a = series(&cone, &[(&[-1, 0], 1)]);
        let b = series(&cone, &[(&[0, -1], 1)]);
        let sum = a.add(&b).unwrap();
        assert_eq!(sum.mult_at(&w(&[-1, 0])).unwrap(), Int::one());
        assert_eq!(sum.mult_at(&w(&[0, -1])).unwrap(), Int::one());
        assert_eq!(sum.mult_at(&w(&[0, 0])).unwrap(), Int::zero());
        assert!(sum.is_exact());
    }

    #[test]
    fn division_examples() {
        let cone = half_line();
        let scalar = |n: i64| CharacterSeries::monomial(&cone, w(&[0]), Int::from(n)).unwrap();
        // 2 + 5t + 3t² = (1+t)(2+3t).
        let p = MorsePolynomial::from_coeffs(&cone, vec![scalar(2), scalar(5), scalar(3)]).unwrap();
        let (q, rem) = poly_divide_one_plus_t(&p).unwrap();
        assert!(rem.is_zero_certified());
        assert_eq!(q.coeff(0).mult_at(&w(&[0])).unwrap(), Int::from(2));
        assert_eq!(q.coeff(1).mult_at(&w(&[0])).unwrap(), Int::from(3));

        // 1 + t + t² = (1+t)·t + 1.
        let p = MorsePolynomial::from_coeffs(&cone, vec![scalar(1), scalar(1), scalar(1)]).unwrap();
        let (q, rem) = poly_divide_one_plus_t(&p).unwrap();
        assert_eq!(rem.mult_at(&w(&[0])).unwrap(), Int::one());
        assert!(q.coeff(0).is_zero_certified());
        assert_eq!(q.coeff(1).mult_at(&w(&[0])).unwrap(), Int::one());

        // Zero polynomial.
        let (q, rem) = poly_divide_one_plus_t(&MorsePolynomial::zero(&cone)).unwrap();
        assert!(q.is_zero_certified());
        assert!(rem.is_zero_certified());
    }

    #[test]
    fn division_round_trip_random() {
        let cone = half_line();
        let mut rng = StdRng::seed_from_u64(0x5eed_0001);
        for _ in 0..200 {
            let deg = rng.gen_range(0..5);
            let mut coeffs = Vec::new();
            for _ in 0..=deg {
                let mut terms = BTreeMap::new();
                for _ in 0..rng.gen_range(0..4) {
                    let xi = w(&[-rng.gen_range(0..6)]);
                    let m = Int::from(rng.gen_range(-5..=5i64));
                    if !m.is_zero() {
                        *terms.entry(xi).or_insert_with(Int::zero) += m;
                    }
                }
                coeffs.push(CharacterSeries::exact_from_terms(&cone, terms).unwrap());
            }
            let p = MorsePolynomial::from_coeffs(&cone, coeffs).unwrap();
            let (q, rem) = poly_divide_one_plus_t(&p).unwrap();
            // Reconstruct q·(1+t) + rem and compare.
            let mut rebuilt = q.shift_t(1).add(&q).unwrap();
            rebuilt.add_term(0, &rem).unwrap();
            let diff = rebuilt.sub(&p).unwrap();
            assert!(diff.is_zero_certified());
        }
    }

    #[test]
    fn nonneg_detection() {
        let cone = half_line();
        let pos = MorsePolynomial::from_coeffs(
            &cone,
            vec![
                CharacterSeries::monomial(&cone, w(&[0]), Int::one()).unwrap(),
                CharacterSeries::monomial(&cone, w(&[0]), Int::from(2)).unwrap(),
            ],
        )
        .unwrap();
        assert!(pos.is_nonneg());

        let bad = MorsePolynomial::from_coeffs(
            &cone,
            vec![
                CharacterSeries::monomial(&cone, w(&[0]), Int::one()).unwrap(),
                CharacterSeries::monomial(&cone, w(&[-1]), -Int::one()).unwrap(),
            ],
        )
        .unwrap();
        let (deg, weight, mult) = bad.first_negative().unwrap();
        assert_eq!(deg, 1);
        assert_eq!(weight, w(&[-1]));
        assert_eq!(mult, -Int::one());
    }

    #[test]
    fn specialization_examples() {
        let cone = half_line();
        let a = series(&cone, &[(&[0], 1), (&[-3], 4)]);
        let p = MorsePolynomial::from_coeffs(&cone, vec![a.clone(), a]).unwrap();
        assert!(p.specialize_t(-1).unwrap().is_zero_certified());

        let scalar = |n: i64| CharacterSeries::monomial(&cone, w(&[0]), Int::from(n)).unwrap();
        let p = MorsePolynomial::from_coeffs(&cone, vec![scalar(1), scalar(2), scalar(1)]).unwrap();
        assert!(p.specialize_t(-1).unwrap().is_zero_certified());

        let p = MorsePolynomial::from_coeffs(
            &cone,
            vec![
                scalar(1),
                CharacterSeries::monomial(&cone, w(&[-1]), Int::one()).unwrap(),
            ],
        )
        .unwrap();
        let sp = p.specialize_t(-1).unwrap();
        assert_eq!(sp.mult_at(&w(&[0])).unwrap(), Int::one());
        assert_eq!(sp.mult_at(&w(&[-1])).unwrap(), -Int::one());
    }

    #[test]
    fn alternating_specialization_matches_per_weight_sums() {
        let cone = quadrant();
        let mut rng = StdRng::seed_from_u64(0x5eed_0002);
        for _ in 0..50 {
            let mut coeffs = Vec::new();
            for _ in 0..rng.gen_range(1..4) {
                let mut terms = BTreeMap::new();
                for _ in 0..rng.gen_range(0..5) {
                    let xi = w(&[-rng.gen_range(0..4), -rng.gen_range(0..4)]);
                    let m = Int::from(rng.gen_range(-3..=3i64));
                    if !m.is_zero() {
                        *terms.entry(xi).or_insert_with(Int::zero) += m;
                    }
                }
                coeffs.push(CharacterSeries::exact_from_terms(&cone, terms).unwrap());
            }
            let p = MorsePolynomial::from_coeffs(&cone, coeffs.clone()).unwrap();
            let sp = p.specialize_t(-1).unwrap();
            // Independent per-weight alternating sum.
            let mut expect: BTreeMap<Weight, Int> = BTreeMap::new();
            for (k, c) in coeffs.iter().enumerate() {
                for (xi, m) in c.terms() {
                    let signed = if k % 2 == 1 { -m.clone() } else { m.clone() };
                    *expect.entry(xi.clone()).or_insert_with(Int::zero) += signed;
                }
            }
            expect.retain(|_, m| !m.is_zero());
            assert_eq!(sp.terms(), &expect);
        }
    }

    #[test]
    fn ring_axioms_on_random_series() {
        let cone = quadrant();
        let mut rng = StdRng::seed_from_u64(0x5eed_0003);
        let random_series = |rng: &mut StdRng| {
            let mut terms = BTreeMap::new();
            for _ in 0..rng.gen_range(1..5) {
                let xi = w(&[-rng.gen_range(0..3), -rng.gen_range(0..3)]);
                let m = Int::from(rng.gen_range(-4..=4i64));
                if !m.is_zero() {
                    *terms.entry(xi).or_insert_with(Int::zero) += m;
                }
            }
            CharacterSeries::exact_from_terms(&cone, terms).unwrap()
        };
        for _ in 0..40 {
            let a = random_series(&mut rng);
            let b = random_series(&mut rng);
            let c = random_series(&mut rng);
            let assoc = a.add(&b).unwrap().add(&c).unwrap();
            let assoc2 = a.add(&b.add(&c).unwrap()).unwrap();
            assert!(assoc.sub(&assoc2).unwrap().is_zero_certified());
            let comm = a.mul(&b).unwrap().sub(&b.mul(&a).unwrap()).unwrap();
            assert!(comm.is_zero_certified());
            let distrib = a
                .mul(&b.add(&c).unwrap())
                .unwrap()
                .sub(&a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap())
                .unwrap();
            assert!(distrib.is_zero_certified());
        }
    }

    #[test]
    fn deeper_windows_never_change_certified_coefficients() {
        let cone = quadrant();
        for depth in [6i64, 11] {
            let d = Int::from(depth);
            let a = CharacterSeries::geometric(&cone, &w(&[1, 0]), false, &d).unwrap();
            let b = CharacterSeries::geometric(&cone, &w(&[0, 1]), true, &d).unwrap();
            let e = CharacterSeries::geometric(&cone, &w(&[1, 1]), false, &d).unwrap();
            let prod = a.mul(&b).unwrap().mul(&e).unwrap();
            let shallow = CharacterSeries::geometric(&cone, &w(&[1, 0]), false, &Int::from(6))
                .unwrap()
                .mul(&CharacterSeries::geometric(&cone, &w(&[0, 1]), true, &Int::from(6)).unwrap())
                .unwrap()
                .mul(
                    &CharacterSeries::geometric(&cone, &w(&[1, 1]), false, &Int::from(6)).unwrap(),
                )
                .unwrap();
            for xi in shallow.window().lattice_points().unwrap() {
                assert_eq!(
                    prod.mult_at(&xi).unwrap(),
                    shallow.mult_at(&xi).unwrap(),
                    "coefficient changed at {xi} (depth {depth})"
                );
            }
        }
    }

    #[test]
    fn theta_evaluation() {
        let chambers = enumerate_chambers(&[w(&[1])], 1).unwrap();
        let cone = Arc::clone(&chambers[1].cone);
        let one = CharacterSeries::monomial(&cone, w(&[0]), Int::one()).unwrap();
        let v = one.evaluate_at_theta(&[1.234]).unwrap();
        assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);

        let cos2 = series(&cone, &[(&[1], 1), (&[-1], 1)]);
        let at_half_pi = cos2.evaluate_at_theta(&[std::f64::consts::FRAC_PI_2]).unwrap();
        assert!(at_half_pi.norm() < 1e-12);
        let at_zero = cos2.evaluate_at_theta(&[0.0]).unwrap();
        assert!((at_zero.re - 2.0).abs() < 1e-12);

        let geo = CharacterSeries::geometric(&cone, &w(&[1]), false, &Int::from(3)).unwrap();
        assert_eq!(geo.evaluate_at_theta(&[0.0]), Err(SeriesError::NotFinite));
    }

    #[test]
    fn theta_evaluation_is_multiplicative() {
        let cone = quadrant();
        let mut rng = StdRng::seed_from_u64(0x5eed_0004);
        for _ in 0..20 {
            let mut terms_a = BTreeMap::new();
            let mut terms_b = BTreeMap::new();
            for _ in 0..3 {
                terms_a.insert(
                    w(&[rng.gen_range(-3..=0), rng.gen_range(-3..=0)]),
                    Int::from(rng.gen_range(1..=3i64)),
                );
                terms_b.insert(
                    w(&[rng.gen_range(-3..=0), rng.gen_range(-3..=0)]),
                    Int::from(rng.gen_range(1..=3i64)),
                );
            }
            let a = CharacterSeries::exact_from_terms(&cone, terms_a).unwrap();
            let b = CharacterSeries::exact_from_terms(&cone, terms_b).unwrap();
            let theta = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let lhs = a.mul(&b).unwrap().evaluate_at_theta(&theta).unwrap();
            let rhs = a.evaluate_at_theta(&theta).unwrap() * b.evaluate_at_theta(&theta).unwrap();
            assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }
    }
}
