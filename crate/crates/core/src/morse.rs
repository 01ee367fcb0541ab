//! The equivariant holomorphic Morse checks: the strong identity with a
//! certified nonnegative quotient, per-degree weak domination, the
//! alternating-sum specialization, and circle reduction of torus data.
//!
//! For a chamber `C` the strong statement compares the fixed-point side
//! `Σ_r t^{ν_r} Σ_k t^k char H^k(F_r, twisted normal data)` against the
//! declared global cohomology `Σ_k t^k char H^k` and asserts that the
//! difference is `(1+t)·Q(t)` with `Q` coefficientwise nonnegative.  All
//! arithmetic happens inside certified windows: a pass is a proof for every
//! weight the window reaches, never a sampled approximation.

use std::fmt;

use num_traits::Zero;

use crate::character::{
    poly_divide_one_plus_t, CharacterSeries, Containment, MorsePolynomial, SeriesError,
};
use crate::lattice::{Chamber, Int, LatticeError, Weight};
use crate::scenario::{
    component_contribution, validate_scenario, CohomologyOverride, FixedComponent, OverrideEntry,
    RaySpec, Scenario, ScenarioError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorseError {
    Scenario(ScenarioError),
    Lattice(LatticeError),
    Series(SeriesError),
    /// The scenario declares no global cohomology to compare against.
    MissingGlobalCohomology,
    /// A declared global weight lies deeper than the certified window; the
    /// check would silently ignore it, so it refuses instead.
    WindowTooShallow { degree: usize, weight: Weight },
    /// Circle reduction keeps closed-form ladders out of scope.
    UnsupportedOverride { component: String },
}

impl fmt::Display for MorseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorseError::Scenario(e) => write!(f, "{e}"),
            MorseError::Lattice(e) => write!(f, "{e}"),
            MorseError::Series(e) => write!(f, "{e}"),
            MorseError::MissingGlobalCohomology => {
                write!(f, "scenario does not declare its global cohomology")
            }
            MorseError::WindowTooShallow { degree, weight } => write!(
                f,
                "window too shallow: global degree {degree} has a term at {weight} beyond the \
                 certified depth"
            ),
            MorseError::UnsupportedOverride { component } => write!(
                f,
                "component {component:?} carries a cohomology override; circle reduction \
                 supports flat components only"
            ),
        }
    }
}

impl std::error::Error for MorseError {}

impl From<ScenarioError> for MorseError {
    fn from(e: ScenarioError) -> Self {
        MorseError::Scenario(e)
    }
}

impl From<LatticeError> for MorseError {
    fn from(e: LatticeError) -> Self {
        MorseError::Lattice(e)
    }
}

impl From<SeriesError> for MorseError {
    fn from(e: SeriesError) -> Self {
        MorseError::Series(e)
    }
}

fn ensure_valid(scenario: &Scenario) -> Result<(), MorseError> {
    let problems = validate_scenario(scenario);
    if problems.is_empty() {
        Ok(())
    } else {
        Err(MorseError::Scenario(ScenarioError::Invalid { problems }))
    }
}

/// The fixed-point side of the strong identity in one chamber: every
/// component's contribution shifted by its polarizing index.
pub fn strong_lhs(
    scenario: &Scenario,
    chamber: &Chamber,
    depth: &Int,
) -> Result<MorsePolynomial, MorseError> {
    ensure_valid(scenario)?;
    let mut lhs = MorsePolynomial::zero(&chamber.cone);
    for comp in &scenario.components {
        let contribution = component_contribution(chamber, comp, depth)?;
        for (k, series) in contribution.by_degree.iter().enumerate() {
            lhs.add_term(contribution.nu + k, series)?;
        }
    }
    Ok(lhs)
}

/// The declared global cohomology as a polynomial in `t`.
pub fn global_cohomology_poly(
    scenario: &Scenario,
    chamber: &Chamber,
) -> Result<MorsePolynomial, MorseError> {
    let global = scenario
        .m_cohomology
        .as_ref()
        .ok_or(MorseError::MissingGlobalCohomology)?;
    let mut poly = MorsePolynomial::zero(&chamber.cone);
    for (k, chara) in global.iter().enumerate() {
        let series = CharacterSeries::exact_from_terms(&chamber.cone, chara.clone())?;
        poly.add_term(k, &series)?;
    }
    Ok(poly)
}

/// Refuse to certify when a declared global term lies beyond a window.
fn ensure_globals_visible(
    scenario: &Scenario,
    diff: &MorsePolynomial,
) -> Result<(), MorseError> {
    let Some(global) = &scenario.m_cohomology else {
        return Ok(());
    };
    for (degree, chara) in global.iter().enumerate() {
        let coeff = diff.coeff(degree);
        let window = coeff.window();
        for (weight, mult) in chara {
            if mult.is_zero() {
                continue;
            }
            if matches!(window.classify(weight)?, Containment::BeyondDepth) {
                return Err(MorseError::WindowTooShallow {
                    degree,
                    weight: weight.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Where a strong check first fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The difference is not divisible by `(1+t)`.
    RemainderNonzero { weight: Weight, value: Int },
    /// The quotient has a negative multiplicity.
    NegativeCoefficient { degree: usize, weight: Weight, value: Int },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RemainderNonzero { weight, value } => {
                write!(f, "remainder is {value} at {weight}")
            }
            Violation::NegativeCoefficient { degree, weight, value } => {
                write!(f, "quotient coefficient of t^{degree} is {value} at {weight}")
            }
        }
    }
}

/// Result of one strong check, satisfying `q_poly·(1+t) + remainder + rhs =
/// lhs` coefficientwise on the certified windows.
#[derive(Debug, Clone)]
pub struct MorseReport {
    pub scenario: String,
    pub chamber_id: usize,
    pub chamber_signs: Vec<i8>,
    pub depth: Int,
    pub lhs: MorsePolynomial,
    pub rhs: MorsePolynomial,
    pub q_poly: MorsePolynomial,
    pub remainder: CharacterSeries,
    pub remainder_zero: bool,
    pub nonneg: bool,
    pub first_violation: Option<Violation>,
}

impl MorseReport {
    pub fn passed(&self) -> bool {
        self.remainder_zero && self.nonneg
    }
}

/// Verify the strong identity in one chamber at one depth.
pub fn verify_strong(
    scenario: &Scenario,
    chamber: &Chamber,
    depth: &Int,
) -> Result<MorseReport, MorseError> {
    let lhs = strong_lhs(scenario, chamber, depth)?;
    let rhs = global_cohomology_poly(scenario, chamber)?;
    let diff = lhs.sub(&rhs)?;
    ensure_globals_visible(scenario, &diff)?;
    let (q_poly, remainder) = poly_divide_one_plus_t(&diff)?;
    let remainder_zero = remainder.is_zero_certified();
    let nonneg = q_poly.is_nonneg();
    let first_violation = if !remainder_zero {
        remainder
            .terms()
            .iter()
            .next()
            .map(|(weight, value)| Violation::RemainderNonzero {
                weight: weight.clone(),
                value: value.clone(),
            })
    } else {
        q_poly
            .first_negative()
            .map(|(degree, weight, value)| Violation::NegativeCoefficient {
                degree,
                weight,
                value,
            })
    };
    Ok(MorseReport {
        scenario: scenario.name.clone(),
        chamber_id: chamber.id,
        chamber_signs: chamber.signs.clone(),
        depth: depth.clone(),
        lhs,
        rhs,
        q_poly,
        remainder,
        remainder_zero,
        nonneg,
        first_violation,
    })
}

/// Result of a weak (per-degree domination) check.
#[derive(Debug, Clone)]
pub struct WeakReport {
    pub scenario: String,
    pub chamber_id: usize,
    pub chamber_signs: Vec<i8>,
    pub depth: Int,
    pub ok: bool,
    /// `(degree, weight, deficit)` of the first domination failure.
    pub first_violation: Option<(usize, Weight, Int)>,
}

/// Verify that each degree of the fixed-point side dominates the declared
/// global cohomology multiplicity by multiplicity.
pub fn verify_weak(
    scenario: &Scenario,
    chamber: &Chamber,
    depth: &Int,
) -> Result<WeakReport, MorseError> {
    let lhs = strong_lhs(scenario, chamber, depth)?;
    let rhs = global_cohomology_poly(scenario, chamber)?;
    let diff = lhs.sub(&rhs)?;
    ensure_globals_visible(scenario, &diff)?;
    let first_violation = diff.first_negative();
    Ok(WeakReport {
        scenario: scenario.name.clone(),
        chamber_id: chamber.id,
        chamber_signs: chamber.signs.clone(),
        depth: depth.clone(),
        ok: first_violation.is_none(),
        first_violation,
    })
}

/// Result of the alternating-sum check.
#[derive(Debug, Clone)]
pub struct LefschetzReport {
    pub scenario: String,
    pub chamber_id: usize,
    pub chamber_signs: Vec<i8>,
    pub depth: Int,
    /// The fixed-point side at `t = −1`.
    pub alternating_lhs: CharacterSeries,
    /// The declared Euler character `Σ_k (−1)^k char H^k`.
    pub euler: CharacterSeries,
    pub ok: bool,
}

/// Specialize the fixed-point side at `t = −1` and compare with the
/// declared Euler character; the slack cancels exactly, in every chamber.
pub fn lefschetz_check(
    scenario: &Scenario,
    chamber: &Chamber,
    depth: &Int,
) -> Result<LefschetzReport, MorseError> {
    let lhs = strong_lhs(scenario, chamber, depth)?;
    let rhs = global_cohomology_poly(scenario, chamber)?;
    let alternating_lhs = lhs.specialize_t(-1)?;
    let euler = rhs.specialize_t(-1)?;
    let diff = alternating_lhs.sub(&euler)?;
    ensure_globals_visible(
        scenario,
        &MorsePolynomial::from_coeffs(&chamber.cone, vec![diff.clone()])?,
    )
    .map_err(|e| match e {
        MorseError::WindowTooShallow { weight, .. } => {
            MorseError::WindowTooShallow { degree: 0, weight }
        }
        other => other,
    })?;
    Ok(LefschetzReport {
        scenario: scenario.name.clone(),
        chamber_id: chamber.id,
        chamber_signs: chamber.signs.clone(),
        depth: depth.clone(),
        ok: diff.is_zero_certified(),
        alternating_lhs,
        euler,
    })
}

fn reduce_weight(w: &Weight, direction: &Weight) -> Weight {
    Weight::new(vec![w.dot(direction)])
}

fn reduce_char_map(
    chara: &std::collections::BTreeMap<Weight, Int>,
    direction: &Weight,
) -> std::collections::BTreeMap<Weight, Int> {
    let mut out: std::collections::BTreeMap<Weight, Int> = std::collections::BTreeMap::new();
    for (w, m) in chara {
        *out.entry(reduce_weight(w, direction)).or_insert_with(Int::zero) += m;
    }
    out.retain(|_, m| !m.is_zero());
    out
}

/// Collapse a torus scenario to a circle scenario along one direction:
/// every weight is replaced by its pairing with `direction`.  The direction
/// must avoid all walls (no isotropy weight may collapse to zero).
pub fn circle_reduce(scenario: &Scenario, direction: &Weight) -> Result<Scenario, MorseError> {
    ensure_valid(scenario)?;
    let mut components = Vec::with_capacity(scenario.components.len());
    for comp in &scenario.components {
        if comp.cohomology_override.is_some() {
            return Err(MorseError::UnsupportedOverride {
                component: comp.name.clone(),
            });
        }
        let mut weights = Vec::with_capacity(comp.weights.len());
        for w in &comp.weights {
            let reduced = reduce_weight(w, direction);
            if reduced.is_zero() {
                return Err(MorseError::Lattice(LatticeError::WeightOnWall {
                    weight: w.clone(),
                }));
            }
            weights.push(reduced);
        }
        components.push(FixedComponent {
            name: comp.name.clone(),
            dim: comp.dim,
            weights,
            hodge: comp.hodge.clone(),
            e_char: reduce_char_map(&comp.e_char, direction),
            moment: comp.moment.clone(),
            cohomology_override: None,
        });
    }
    Ok(Scenario {
        name: format!("{}-circle", scenario.name),
        rank: 1,
        dim: scenario.dim,
        depth: scenario.depth.clone(),
        components,
        m_cohomology: scenario
            .m_cohomology
            .as_ref()
            .map(|global| global.iter().map(|c| reduce_char_map(c, direction)).collect()),
    })
}

/// Convenience: allow building scenarios with curve ladders in tests and
/// corpus code without repeating the struct spelling.
pub fn ladder(signs: &[i8], degree: usize, rays: Vec<RaySpec>) -> OverrideEntry {
    OverrideEntry {
        signs: signs.to_vec(),
        degree,
        rays,
    }
}

/// Convenience constructor for a single-ladder override ray.
pub fn ray(ray: Weight, base: Weight, init: Vec<Int>, slope: i64, offset: i64) -> RaySpec {
    RaySpec {
        ray,
        base,
        init,
        slope: Int::from(slope),
        offset: Int::from(offset),
    }
}

/// Convenience: overrides from entries.
pub fn override_from(entries: Vec<OverrideEntry>) -> CohomologyOverride {
    CohomologyOverride { entries }
}
