//! Sample-size and detection-probability math for random-sampling
//! inspection plans, plus the cost-envelope arithmetic used to compare an
//! inspection regime against the IAEA's historical verification effort.
//!
//! Everything in this module is a pure function of its arguments: no
//! simulation state, no RNG. The simulator uses these as its planning
//! formulas, and the test suites use the exact hypergeometric law as the
//! oracle the empirical machinery must match.
//!
//! Conventions: a *violation* involves `violation_size` noncompliant items
//! hidden in a *population* of `population` items; an examination draws
//! `sample_size` items and detects the violation if at least one
//! noncompliant item is drawn.

use serde::{Deserialize, Serialize};

use core::fmt;

/// Detection-probability target used throughout the baseline calculations.
pub const DETECTION_TARGET: f64 = 0.90;

/// The IAEA's stated goal band for detecting diversion of the most
/// sensitive materials.
pub const IAEA_DETECTION_GOAL_MIN: f64 = 0.90;
pub const IAEA_DETECTION_GOAL_MAX: f64 = 0.95;

/// Significant quantities: the amount of material whose diversion the IAEA
/// system is sized to detect. The chip analogue is a strategy's `goal_m`.
pub const PLUTONIUM_SIGNIFICANT_QUANTITY_KG: f64 = 8.0;
pub const HEU_U235_SIGNIFICANT_QUANTITY_KG: f64 = 25.0;
pub const LEU_U235_SIGNIFICANT_QUANTITY_KG: f64 = 75.0;
pub const NATURAL_URANIUM_SIGNIFICANT_QUANTITY_KG: f64 = 10_000.0;

/// Days per simulated year; outage costs are prorated over this.
pub const DAYS_PER_YEAR: f64 = 365.0;

/// Default bound on `violation_size / population` below which the
/// small-fraction scaling argument is considered valid.
pub const DEFAULT_SMALL_FRACTION_GUARD: f64 = 0.01;

/// Population size above which exact binomial ratios would overflow and the
/// computation switches to log-space.
const EXACT_BINOMIAL_LIMIT: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingError {
    /// Target probability not in the open interval (0, 1).
    ProbabilityOutOfRange,
    /// `violation_size > population`.
    ViolationExceedsPopulation,
    /// `population == 0`.
    EmptyPopulation,
    /// `violation_size == 0` where at least one violating item is required.
    ZeroViolationSize,
    /// Annual frequency not a positive finite number.
    NonPositiveFrequency,
    /// `sample_size > population` for sampling without replacement.
    SampleExceedsPopulation,
    /// Computed sample size too large to represent as a count.
    SampleSizeOverflow,
    /// `violation_size / population` too large for the small-fraction
    /// scaling approximation.
    OutsideSmallFractionRegime,
    /// Population multiplier below one.
    MultiplierBelowOne,
}

impl fmt::Display for SamplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingError::ProbabilityOutOfRange => {
                "target probability must lie strictly between 0 and 1"
            }
            SamplingError::ViolationExceedsPopulation => {
                "violation size exceeds population size"
            }
            SamplingError::EmptyPopulation => "population must be nonempty",
            SamplingError::ZeroViolationSize => "violation size must be at least 1",
            SamplingError::NonPositiveFrequency => {
                "annual frequency must be positive and finite"
            }
            SamplingError::SampleExceedsPopulation => {
                "sample size exceeds population for sampling without replacement"
            }
            SamplingError::SampleSizeOverflow => "computed sample size overflows a count",
            SamplingError::OutsideSmallFractionRegime => {
                "violation fraction too large for the small-fraction scaling argument"
            }
            SamplingError::MultiplierBelowOne => "population multiplier must be at least 1",
        })
    }
}

/// Annual number of items to examine so that, sampling independently and
/// with replacement, a violation of `violation_size` items among
/// `population` is detected with probability at least `target_probability`,
/// with examinations occurring `annual_frequency` times per year.
///
/// The fractional value `annual_frequency * ln(1 - target) / ln(1 - v/p)`
/// is kept in full precision and rounded up, with a floor of one sample, so
/// the target probability is always met.
pub fn required_sample_size(
    target_probability: f64,
    violation_size: u64,
    population: u64,
    annual_frequency: f64,
) -> Result<u64, SamplingError> {
    if !(target_probability > 0.0 && target_probability < 1.0) {
        return Err(SamplingError::ProbabilityOutOfRange);
    }
    if population == 0 {
        return Err(SamplingError::EmptyPopulation);
    }
    if violation_size == 0 {
        return Err(SamplingError::ZeroViolationSize);
    }
    if violation_size > population {
        return Err(SamplingError::ViolationExceedsPopulation);
    }
    if !annual_frequency.is_finite() || annual_frequency <= 0.0 {
        return Err(SamplingError::NonPositiveFrequency);
    }

    let violating_fraction = violation_size as f64 / population as f64;
    // violating_fraction == 1 gives log1p(-1) = -inf and a per-exam size of
    // +0, which the floor below lifts to the single draw that suffices.
    let per_exam = libm::log1p(-target_probability) / libm::log1p(-violating_fraction);
    let annual = annual_frequency * per_exam;
    if !annual.is_finite() || annual > 9.0e15 {
        return Err(SamplingError::SampleSizeOverflow);
    }
    Ok((libm::ceil(annual) as u64).max(1))
}

/// Probability that `sample_size` independent draws *with replacement* from
/// `population` items hit at least one of `violation_size` violating items:
/// `1 - (1 - v/p)^n`. Slightly conservative relative to the exact
/// without-replacement law.
pub fn detection_probability_with_replacement(
    sample_size: u64,
    violation_size: u64,
    population: u64,
) -> Result<f64, SamplingError> {
    if population == 0 {
        return Err(SamplingError::EmptyPopulation);
    }
    if violation_size > population {
        return Err(SamplingError::ViolationExceedsPopulation);
    }
    if sample_size == 0 || violation_size == 0 {
        return Ok(0.0);
    }
    let violating_fraction = violation_size as f64 / population as f64;
    Ok(-libm::expm1(
        sample_size as f64 * libm::log1p(-violating_fraction),
    ))
}

/// Exact probability that a size-`sample_size` draw *without replacement*
/// contains at least one of `violation_size` violating items:
/// `1 - C(p - v, n) / C(p, n)`.
///
/// Small populations use exact integer binomials; large ones (up to the
/// hundreds of billions) accumulate the miss probability in log space over
/// `min(sample_size, violation_size)` terms, so nothing overflows.
pub fn detection_probability_exact(
    sample_size: u64,
    violation_size: u64,
    population: u64,
) -> Result<f64, SamplingError> {
    if violation_size > population {
        return Err(SamplingError::ViolationExceedsPopulation);
    }
    if sample_size > population {
        return Err(SamplingError::SampleExceedsPopulation);
    }
    if sample_size == 0 || violation_size == 0 {
        return Ok(0.0);
    }
    if sample_size + violation_size > population {
        // Too few compliant items to fill the sample: a hit is guaranteed.
        return Ok(1.0);
    }

    if population <= EXACT_BINOMIAL_LIMIT {
        let misses = binomial_u128(population - violation_size, sample_size);
        let total = binomial_u128(population, sample_size);
        return Ok(1.0 - misses as f64 / total as f64);
    }

    // C(p-v, n)/C(p, n) telescopes either over the sample or over the
    // violating items; iterate over whichever is shorter.
    let pop = population as f64;
    let mut log_miss = 0.0;
    if sample_size <= violation_size {
        let gone = violation_size as f64;
        for i in 0..sample_size {
            log_miss += libm::log((pop - gone - i as f64) / (pop - i as f64));
        }
    } else {
        let drawn = sample_size as f64;
        for i in 0..violation_size {
            log_miss += libm::log((pop - drawn - i as f64) / (pop - i as f64));
        }
    }
    Ok(-libm::expm1(log_miss))
}

/// Exact binomial coefficient; callers keep `n` small enough that the
/// running product fits in `u128`.
fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Fraction of the population examined annually to hit the target at
/// `annual_frequency = 1`. For violations much smaller than the population
/// this is nearly independent of the population size.
pub fn examined_fraction(
    target_probability: f64,
    violation_size: u64,
    population: u64,
) -> Result<f64, SamplingError> {
    let n = required_sample_size(target_probability, violation_size, population, 1.0)?;
    Ok(n as f64 / population as f64)
}

/// Ratio of required sample sizes after multiplying the population by
/// `population_multiplier`, with the default small-fraction guard. In the
/// small-fraction regime the ratio equals the multiplier within 1%.
pub fn scaling_ratio(
    population_multiplier: f64,
    target_probability: f64,
    violation_size: u64,
    population: u64,
) -> Result<f64, SamplingError> {
    scaling_ratio_with_guard(
        population_multiplier,
        target_probability,
        violation_size,
        population,
        DEFAULT_SMALL_FRACTION_GUARD,
    )
}

/// [`scaling_ratio`] with an explicit guard on `violation_size/population`.
pub fn scaling_ratio_with_guard(
    population_multiplier: f64,
    target_probability: f64,
    violation_size: u64,
    population: u64,
    small_fraction_guard: f64,
) -> Result<f64, SamplingError> {
    if !population_multiplier.is_finite() || population_multiplier < 1.0 {
        return Err(SamplingError::MultiplierBelowOne);
    }
    if population == 0 {
        return Err(SamplingError::EmptyPopulation);
    }
    if violation_size as f64 / population as f64 >= small_fraction_guard {
        return Err(SamplingError::OutsideSmallFractionRegime);
    }
    let base = required_sample_size(target_probability, violation_size, population, 1.0)?;
    let scaled_population = population_multiplier * population as f64;
    if scaled_population > 9.0e17 {
        return Err(SamplingError::SampleSizeOverflow);
    }
    let scaled = required_sample_size(
        target_probability,
        violation_size,
        libm::round(scaled_population) as u64,
        1.0,
    )?;
    Ok(scaled as f64 / base as f64)
}

/// A fixed-size random-sampling examination plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Detection probability the plan is sized for, in (0, 1).
    pub target_probability: f64,
    /// Number of noncompliant items constituting a serious violation.
    pub violation_size: u64,
    /// Number of items sampled from.
    pub population: u64,
    /// Examinations per year.
    pub annual_frequency: f64,
    /// Computed annual sample size; never zero.
    pub sample_size: u64,
}

impl SamplingPlan {
    pub fn new(
        target_probability: f64,
        violation_size: u64,
        population: u64,
        annual_frequency: f64,
    ) -> Result<Self, SamplingError> {
        let sample_size = required_sample_size(
            target_probability,
            violation_size,
            population,
            annual_frequency,
        )?;
        Ok(Self {
            target_probability,
            violation_size,
            population,
            annual_frequency,
            sample_size,
        })
    }

    /// Detection probability per examination under the conservative
    /// with-replacement law, at the per-examination share of the sample.
    pub fn achieved_probability(&self) -> f64 {
        let per_exam = ((self.sample_size as f64 / self.annual_frequency) as u64).max(1);
        detection_probability_with_replacement(per_exam, self.violation_size, self.population)
            .unwrap_or(0.0)
    }
}

/// Inputs to the facility-interruption cost estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEnvelope {
    /// Fraction of the population examined per year.
    pub exam_fraction: f64,
    /// Items knocked out of use per item examined.
    pub knockout_ratio: f64,
    /// Days per year each knocked-out item is unavailable.
    pub outage_days: f64,
    /// Share of gross world product attributable to the examined asset class.
    pub gwp_share: f64,
}

impl CostEnvelope {
    /// Fraction of gross world product lost to examination interruptions:
    /// `exam_fraction * knockout_ratio * (outage_days / 365) * gwp_share`.
    pub fn interruption_fraction(&self) -> f64 {
        interruption_cost_fraction(self)
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        let fields = [
            (self.exam_fraction, "exam_fraction"),
            (self.knockout_ratio, "knockout_ratio"),
            (self.outage_days, "outage_days"),
            (self.gwp_share, "gwp_share"),
        ];
        for (value, name) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(name);
            }
        }
        if self.exam_fraction > 1.0 {
            return Err("exam_fraction");
        }
        if self.gwp_share > 1.0 {
            return Err("gwp_share");
        }
        Ok(())
    }
}

/// See [`CostEnvelope::interruption_fraction`].
pub fn interruption_cost_fraction(envelope: &CostEnvelope) -> f64 {
    envelope.exam_fraction
        * envelope.knockout_ratio
        * (envelope.outage_days / DAYS_PER_YEAR)
        * envelope.gwp_share
}

/// The IAEA's annual verification effort, used as the comparison baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IaeaBaseline {
    pub inspections_per_year: u64,
    pub seals_verified: u64,
    pub facilities: u64,
    /// Fraction of facilities receiving a physical inventory each year.
    pub coverage: f64,
    pub items_per_inventory: u64,
    /// Nuclear energy's share of gross world product.
    pub nuclear_gwp_share: f64,
    /// Production days lost per facility per year to inspections.
    pub outage_days: f64,
}

impl Default for IaeaBaseline {
    fn default() -> Self {
        Self {
            inspections_per_year: 2_900,
            seals_verified: 25_000,
            facilities: 700,
            coverage: 0.8,
            items_per_inventory: 250,
            nuclear_gwp_share: 0.004,
            outage_days: 2.0,
        }
    }
}

impl IaeaBaseline {
    pub fn items_examined(&self) -> IaeaExaminations {
        iaea_items_examined(self)
    }

    /// Interruption cost of inspecting the inventoried share of nuclear
    /// production, as a fraction of gross world product.
    pub fn interruption_fraction(&self) -> f64 {
        CostEnvelope {
            exam_fraction: 1.0,
            knockout_ratio: 1.0,
            outage_days: self.outage_days,
            gwp_share: self.nuclear_gwp_share,
        }
        .interruption_fraction()
    }
}

/// Annual examination counts implied by an [`IaeaBaseline`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IaeaExaminations {
    /// Items examined through physical inventories.
    pub inventory_items: u64,
    /// Inventory items plus verified seals.
    pub with_seals: u64,
}

/// Items the baseline examines per year: `facilities * coverage *
/// items_per_inventory` inventory items, and that plus verified seals.
pub fn iaea_items_examined(baseline: &IaeaBaseline) -> IaeaExaminations {
    let inventory = baseline.facilities as f64
        * baseline.coverage
        * baseline.items_per_inventory as f64;
    let inventory_items = libm::round(inventory) as u64;
    IaeaExaminations {
        inventory_items,
        with_seals: inventory_items + baseline.seals_verified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumeration oracle: counts size-`n` subsets of `N` items (the first
    /// `M` of which violate) that contain no violating item, by walking all
    /// bitmasks. Independent of the combinatorial implementation above.
    fn enumerated_detection(sample: u32, violating: u32, population: u32) -> f64 {
        assert!(population <= 20);
        let mut misses: u64 = 0;
        let mut total: u64 = 0;
        for mask in 0u32..(1 << population) {
            if mask.count_ones() != sample {
                continue;
            }
            total += 1;
            let low = mask & ((1u32 << violating) - 1);
            if low == 0 {
                misses += 1;
            }
        }
        1.0 - misses as f64 / total as f64
    }

    #[test]
    fn sample_size_matches_headline_calculations() {
        // 90% detection of 10,000 chips among 2.5 billion.
        assert_eq!(
            required_sample_size(0.9, 10_000, 2_500_000_000, 1.0).unwrap(),
            575_646
        );
        // Same target against a 100,000-chip violation.
        assert_eq!(
            required_sample_size(0.9, 100_000, 2_500_000_000, 1.0).unwrap(),
            57_564
        );
    }

    #[test]
    fn sample_size_limits() {
        // Vanishing target still requires one draw.
        assert_eq!(required_sample_size(1e-12, 5, 100, 1.0).unwrap(), 1);
        // Every item violating: one draw suffices.
        assert_eq!(required_sample_size(0.9, 100, 100, 1.0).unwrap(), 1);
    }

    #[test]
    fn sample_size_scales_with_frequency() {
        let yearly = required_sample_size(0.9, 100, 1_000_000, 1.0).unwrap();
        let quarterly = required_sample_size(0.9, 100, 1_000_000, 4.0).unwrap();
        // Ceiling is applied after the multiplication, so the quarterly
        // total is within one of four times the yearly fractional size.
        assert!(quarterly >= 4 * yearly - 4 && quarterly <= 4 * yearly);
    }

    #[test]
    fn sample_size_domain_errors() {
        assert_eq!(
            required_sample_size(0.0, 5, 100, 1.0),
            Err(SamplingError::ProbabilityOutOfRange)
        );
        assert_eq!(
            required_sample_size(1.0, 5, 100, 1.0),
            Err(SamplingError::ProbabilityOutOfRange)
        );
        assert_eq!(
            required_sample_size(f64::NAN, 5, 100, 1.0),
            Err(SamplingError::ProbabilityOutOfRange)
        );
        assert_eq!(
            required_sample_size(0.9, 101, 100, 1.0),
            Err(SamplingError::ViolationExceedsPopulation)
        );
        assert_eq!(
            required_sample_size(0.9, 0, 100, 1.0),
            Err(SamplingError::ZeroViolationSize)
        );
        assert_eq!(
            required_sample_size(0.9, 5, 0, 1.0),
            Err(SamplingError::EmptyPopulation)
        );
        assert_eq!(
            required_sample_size(0.9, 5, 100, 0.0),
            Err(SamplingError::NonPositiveFrequency)
        );
        assert_eq!(
            required_sample_size(0.9, 5, 100, -2.0),
            Err(SamplingError::NonPositiveFrequency)
        );
    }

    #[test]
    fn with_replacement_examples() {
        assert_eq!(
            detection_probability_with_replacement(0, 5, 100).unwrap(),
            0.0
        );
        assert_eq!(
            detection_probability_with_replacement(1, 10, 10).unwrap(),
            1.0
        );
        let p = detection_probability_with_replacement(2, 3, 10).unwrap();
        assert!((p - 0.51).abs() < 1e-12);
        assert_eq!(
            detection_probability_with_replacement(2, 11, 10),
            Err(SamplingError::ViolationExceedsPopulation)
        );
        assert_eq!(
            detection_probability_with_replacement(2, 0, 0),
            Err(SamplingError::EmptyPopulation)
        );
    }

    #[test]
    fn exact_matches_enumeration_on_small_cases() {
        // 1 - C(7,2)/C(10,2) = 24/45.
        let p = detection_probability_exact(2, 3, 10).unwrap();
        assert!((p - 24.0 / 45.0).abs() < 1e-15);
        assert_eq!(p, enumerated_detection(2, 3, 10));
        // Exhaustive draw always detects.
        assert_eq!(detection_probability_exact(10, 1, 10).unwrap(), 1.0);
        // Conservativeness on the worked example.
        let wr = detection_probability_with_replacement(2, 3, 10).unwrap();
        assert!(wr <= p);
    }

    #[test]
    fn exact_domain_errors() {
        assert_eq!(
            detection_probability_exact(11, 3, 10),
            Err(SamplingError::SampleExceedsPopulation)
        );
        assert_eq!(
            detection_probability_exact(2, 11, 10),
            Err(SamplingError::ViolationExceedsPopulation)
        );
    }

    #[test]
    fn exact_log_space_agrees_with_binomial_path_at_boundary() {
        // Same (n, M) straddling the exact/log-space switch; the laws differ
        // only through the population, so values must line up smoothly.
        let small = detection_probability_exact(7, 5, 100).unwrap();
        let large = detection_probability_exact(7, 5, 101).unwrap();
        assert!(small > large);
        assert!((small - large) / small < 0.02);

        // Direct cross-check on one side of the boundary.
        let log_space = detection_probability_exact(7, 5, 120).unwrap();
        let misses = (0..7).fold(1.0, |acc, i| {
            acc * (115.0 - i as f64) / (120.0 - i as f64)
        });
        assert!((log_space - (1.0 - misses)).abs() < 1e-12);
    }

    #[test]
    fn exact_handles_huge_populations() {
        let p = detection_probability_exact(575_646, 10_000, 2_500_000_000).unwrap();
        assert!(p >= 0.9 && p < 0.91, "p = {p}");
    }

    #[test]
    fn examined_fraction_reproduces_headline_share() {
        // ~0.023% across the whole population range.
        let low = examined_fraction(0.9, 10_000, 600_000_000).unwrap();
        assert!((low - 0.00023).abs() < 1e-5, "low = {low}");
        let high = examined_fraction(0.9, 10_000, 600_000_000_000).unwrap();
        assert!((high - 0.00023).abs() < 1e-5, "high = {high}");
        assert!((low - high).abs() / high < 0.01);
        // Single draw over the population when everything violates.
        let all = examined_fraction(0.9, 50, 50).unwrap();
        assert!((all - 1.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn interruption_cost_examples() {
        let chips = CostEnvelope {
            exam_fraction: 0.00023,
            knockout_ratio: 100.0,
            outage_days: 1.0,
            gwp_share: 1.0,
        };
        let f = chips.interruption_fraction();
        assert!((f - 0.000063).abs() < 2e-6, "f = {f}");

        let nuclear = CostEnvelope {
            exam_fraction: 1.0,
            knockout_ratio: 1.0,
            outage_days: 2.0,
            gwp_share: 0.004,
        };
        let g = nuclear.interruption_fraction();
        assert!((g - 0.0000219).abs() < 1e-7, "g = {g}");

        let idle = CostEnvelope {
            exam_fraction: 0.0,
            ..chips
        };
        assert_eq!(idle.interruption_fraction(), 0.0);
    }

    #[test]
    fn envelope_validation() {
        let good = CostEnvelope {
            exam_fraction: 0.1,
            knockout_ratio: 2.0,
            outage_days: 1.0,
            gwp_share: 0.5,
        };
        assert!(good.validate().is_ok());
        let bad = CostEnvelope {
            exam_fraction: 1.5,
            ..good
        };
        assert_eq!(bad.validate(), Err("exam_fraction"));
        let negative = CostEnvelope {
            outage_days: -1.0,
            ..good
        };
        assert_eq!(negative.validate(), Err("outage_days"));
    }

    #[test]
    fn iaea_baseline_numbers() {
        let baseline = IaeaBaseline::default();
        let items = baseline.items_examined();
        assert_eq!(items.inventory_items, 140_000);
        assert_eq!(items.with_seals, 165_000);
        let f = baseline.interruption_fraction();
        assert!((f - 0.0000219) < 1e-7, "f = {f}");

        let empty = IaeaBaseline {
            facilities: 0,
            ..baseline
        };
        assert_eq!(empty.items_examined().inventory_items, 0);
    }

    #[test]
    fn scaling_ratio_examples() {
        let doubled = scaling_ratio(2.0, 0.9, 10_000, 2_500_000_000).unwrap();
        assert!((doubled - 2.0).abs() < 0.01, "doubled = {doubled}");
        let identity = scaling_ratio(1.0, 0.9, 10_000, 2_500_000_000).unwrap();
        assert_eq!(identity, 1.0);
        let million = scaling_ratio(1_000_000.0, 0.9, 100, 600_000).unwrap();
        assert!(
            (million - 1_000_000.0).abs() / 1_000_000.0 < 0.01,
            "million = {million}"
        );
    }

    #[test]
    fn scaling_ratio_guard() {
        assert_eq!(
            scaling_ratio(2.0, 0.9, 10_000, 100_000),
            Err(SamplingError::OutsideSmallFractionRegime)
        );
        // The guard is configurable.
        assert!(scaling_ratio_with_guard(2.0, 0.9, 10_000, 100_000, 0.2).is_ok());
        assert_eq!(
            scaling_ratio(0.5, 0.9, 10, 100_000),
            Err(SamplingError::MultiplierBelowOne)
        );
    }

    #[test]
    fn plan_construction() {
        let plan = SamplingPlan::new(0.9, 100, 100_000, 1.0).unwrap();
        assert_eq!(plan.sample_size, 2_302);
        assert!(plan.achieved_probability() >= 0.9);
        assert!(SamplingPlan::new(0.9, 0, 100_000, 1.0).is_err());
    }
}
