//! Fuzzy sets over finite sort domains.
//!
//! A sort domain is a finite, ordered list of points: either symbolic labels
//! or an arithmetic progression of rationals. Membership functions are stored
//! densely, one [`Degree`] per domain point, which makes the necessity
//! measure between two fuzzy sets an exact finite minimum.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::degrees::{
    self, format_rational, min_all, reciprocal_implies, Degree, NumberError, Rational,
};

/// Upper bound on the number of points a single domain may hold.
pub const MAX_DOMAIN_SIZE: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuzzyError {
    #[error("fuzzy sets over different domains (`{left}` and `{right}`)")]
    DomainMismatch { left: String, right: String },
    #[error("domain `{0}` is empty")]
    EmptyDomain(String),
    #[error("domain `{domain}` lists `{element}` twice")]
    DuplicateElement { domain: String, element: String },
    #[error("domain `{0}` is not numeric")]
    NonNumericDomain(String),
    #[error("domain `{0}` has more than {MAX_DOMAIN_SIZE} elements")]
    DomainTooLarge(String),
    #[error("invalid range for domain `{domain}`: {reason}")]
    InvalidRange { domain: String, reason: String },
    #[error("trapezoid parameters must satisfy t1 <= t2 <= t3 <= t4, got {0}")]
    InvalidTrapezoid(String),
    #[error("fuzzy set over `{domain}` is not normalized: {reason}")]
    NotNormalized { domain: String, reason: String },
    #[error("expected {expected} membership values for `{domain}`, got {actual}")]
    WrongLength {
        domain: String,
        expected: usize,
        actual: usize,
    },
    #[error("`{element}` is not an element of domain `{domain}`")]
    UnknownElement { domain: String, element: String },
    #[error(transparent)]
    Number(#[from] NumberError),
}

/// A point of a sort domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Number(Rational),
    Label(String),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Number(n) => f.write_str(&format_rational(n)),
            Element::Label(l) => f.write_str(l),
        }
    }
}

/// How a domain was declared; kept so it can be printed back verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainShape {
    Range {
        lo: Rational,
        hi: Rational,
        step: Rational,
    },
    Labels,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDomain {
    name: String,
    elements: Vec<Element>,
    shape: DomainShape,
    unit: Option<String>,
}

impl SortDomain {
    /// The progression `lo, lo + step, ...` up to and including `hi` when it
    /// lands on the grid.
    pub fn range(
        name: impl Into<String>,
        lo: Rational,
        hi: Rational,
        step: Rational,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let invalid = |reason: &str| FuzzyError::InvalidRange {
            domain: name.clone(),
            reason: reason.to_string(),
        };
        if step <= Rational::zero() {
            return Err(invalid("step must be positive"));
        }
        if hi < lo {
            return Err(invalid("upper bound below lower bound"));
        }
        let span = degrees::checked_sub(&hi, &lo)?;
        let count = degrees::checked_div(&span, &step)?.floor();
        if count >= Rational::from_integer(MAX_DOMAIN_SIZE as i64) {
            return Err(FuzzyError::DomainTooLarge(name));
        }
        let count = count.to_integer() as usize + 1;
        let mut elements = Vec::with_capacity(count);
        let mut current = lo;
        for _ in 0..count {
            elements.push(Element::Number(current));
            current = degrees::checked_add(&current, &step)?;
        }
        Ok(SortDomain {
            name,
            elements,
            shape: DomainShape::Range { lo, hi, step },
            unit: None,
        })
    }

    pub fn labels<I, S>(name: impl Into<String>, labels: I) -> Result<Self, FuzzyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        let elements: Vec<Element> = labels
            .into_iter()
            .map(|l| Element::Label(l.into()))
            .collect();
        if elements.is_empty() {
            return Err(FuzzyError::EmptyDomain(name));
        }
        if elements.len() > MAX_DOMAIN_SIZE {
            return Err(FuzzyError::DomainTooLarge(name));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &elements {
            if !seen.insert(e) {
                return Err(FuzzyError::DuplicateElement {
                    domain: name,
                    element: e.to_string(),
                });
            }
        }
        Ok(SortDomain {
            name,
            elements,
            shape: DomainShape::Labels,
            unit: None,
        })
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = Some(unit.into());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    pub fn unit(&self) -> Option<&str> {
        self.unit.as_deref()
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.shape, DomainShape::Range { .. })
    }

    pub fn index_of(&self, element: &Element) -> Option<usize> {
        match (&self.shape, element) {
            (DomainShape::Range { lo, step, .. }, Element::Number(x)) => {
                let offset = degrees::checked_sub(x, lo)
                    .and_then(|d| degrees::checked_div(&d, step))
                    .ok()?;
                if !offset.is_integer() || offset < Rational::zero() {
                    return None;
                }
                let index = offset.to_integer() as usize;
                (index < self.elements.len()).then_some(index)
            }
            _ => self.elements.iter().position(|e| e == element),
        }
    }
}

/// Membership function over a finite domain, one degree per domain point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzySet {
    domain: Arc<SortDomain>,
    memberships: Vec<Degree>,
}

impl FuzzySet {
    pub fn new(domain: Arc<SortDomain>, memberships: Vec<Degree>) -> Result<Self, FuzzyError> {
        if memberships.len() != domain.len() {
            return Err(FuzzyError::WrongLength {
                domain: domain.name.clone(),
                expected: domain.len(),
                actual: memberships.len(),
            });
        }
        Ok(FuzzySet {
            domain,
            memberships,
        })
    }

    pub fn from_fn(domain: Arc<SortDomain>, mut f: impl FnMut(&Element) -> Degree) -> Self {
        let memberships = domain.elements.iter().map(&mut f).collect();
        FuzzySet {
            domain,
            memberships,
        }
    }

    /// Crisp set containing every point of the domain.
    pub fn universe(domain: Arc<SortDomain>) -> Self {
        let memberships = vec![Degree::ONE; domain.len()];
        FuzzySet {
            domain,
            memberships,
        }
    }

    pub fn domain(&self) -> &Arc<SortDomain> {
        &self.domain
    }

    pub fn memberships(&self) -> &[Degree] {
        &self.memberships
    }

    pub fn at(&self, index: usize) -> Degree {
        self.memberships[index]
    }

    pub fn membership(&self, element: &Element) -> Option<Degree> {
        self.domain.index_of(element).map(|i| self.memberships[i])
    }

    /// Some point has membership 0 and some point has membership 1.
    pub fn is_normalized(&self) -> bool {
        self.memberships.iter().any(|d| d.is_zero()) && self.memberships.iter().any(|d| d.is_one())
    }

    pub fn check_normalized(&self) -> Result<(), FuzzyError> {
        let reason = if !self.memberships.iter().any(|d| d.is_one()) {
            "no point has membership 1"
        } else if !self.memberships.iter().any(|d| d.is_zero()) {
            "no point has membership 0"
        } else {
            return Ok(());
        };
        Err(FuzzyError::NotNormalized {
            domain: self.domain.name.clone(),
            reason: reason.into(),
        })
    }

    fn same_domain(&self, other: &FuzzySet) -> Result<(), FuzzyError> {
        if Arc::ptr_eq(&self.domain, &other.domain) || self.domain == other.domain {
            Ok(())
        } else {
            Err(FuzzyError::DomainMismatch {
                left: self.domain.name.clone(),
                right: other.domain.name.clone(),
            })
        }
    }

    fn zip_with(
        &self,
        other: &FuzzySet,
        f: impl Fn(Degree, Degree) -> Degree,
    ) -> Result<FuzzySet, FuzzyError> {
        self.same_domain(other)?;
        let memberships = self
            .memberships
            .iter()
            .zip(&other.memberships)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(FuzzySet {
            domain: self.domain.clone(),
            memberships,
        })
    }

    /// Pointwise minimum. The result need not be normalized.
    pub fn pointwise_min(&self, other: &FuzzySet) -> Result<FuzzySet, FuzzyError> {
        self.zip_with(other, Degree::min)
    }

    pub fn pointwise_max(&self, other: &FuzzySet) -> Result<FuzzySet, FuzzyError> {
        self.zip_with(other, Degree::max)
    }

    /// `u ↦ max(floor, μ(u))`.
    pub fn raised_to(&self, floor: Degree) -> FuzzySet {
        let memberships = self.memberships.iter().map(|&m| m.max(floor)).collect();
        FuzzySet {
            domain: self.domain.clone(),
            memberships,
        }
    }

    /// `μ_self(u) >= μ_other(u)` at every point.
    pub fn dominates(&self, other: &FuzzySet) -> Result<bool, FuzzyError> {
        self.same_domain(other)?;
        Ok(self
            .memberships
            .iter()
            .zip(&other.memberships)
            .all(|(a, b)| a >= b))
    }
}

impl fmt::Display for FuzzySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (e, m)) in self
            .domain
            .elements
            .iter()
            .zip(&self.memberships)
            .enumerate()
        {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}: {m}")?;
        }
        f.write_str("}")
    }
}

/// Necessity of `b` given `a`: `min_u μ_a(u) ⇒ μ_b(u)` with the reciprocal
/// Gödel implication.
pub fn necessity_of_match(b: &FuzzySet, a: &FuzzySet) -> Result<Degree, FuzzyError> {
    b.same_domain(a)?;
    Ok(min_all(
        a.memberships
            .iter()
            .zip(&b.memberships)
            .map(|(&ma, &mb)| reciprocal_implies(ma, mb)),
    ))
}

/// Trapezoidal membership `[t1; t2; t3; t4]`: support `[t1, t4]`, core
/// `[t2, t3]`, linear in between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Trapezoid {
    t1: Rational,
    t2: Rational,
    t3: Rational,
    t4: Rational,
}

impl Trapezoid {
    pub fn new(t1: Rational, t2: Rational, t3: Rational, t4: Rational) -> Result<Self, FuzzyError> {
        let t = Trapezoid { t1, t2, t3, t4 };
        if t1 <= t2 && t2 <= t3 && t3 <= t4 {
            Ok(t)
        } else {
            Err(FuzzyError::InvalidTrapezoid(t.to_string()))
        }
    }

    /// Shorthand for integer breakpoints; panics on a malformed trapezoid.
    pub fn integers(t1: i64, t2: i64, t3: i64, t4: i64) -> Self {
        Trapezoid::new(
            Rational::from_integer(t1),
            Rational::from_integer(t2),
            Rational::from_integer(t3),
            Rational::from_integer(t4),
        )
        .expect("malformed trapezoid literal")
    }

    pub fn params(&self) -> [Rational; 4] {
        [self.t1, self.t2, self.t3, self.t4]
    }

    /// Vertical edges (`t1 = t2` or `t3 = t4`) take membership 1 at the edge.
    pub fn membership(&self, x: Rational) -> Result<Degree, NumberError> {
        let value = if self.t2 <= x && x <= self.t3 {
            Rational::one()
        } else if self.t1 < x && x < self.t2 {
            degrees::checked_div(
                &degrees::checked_sub(&x, &self.t1)?,
                &degrees::checked_sub(&self.t2, &self.t1)?,
            )?
        } else if self.t3 < x && x < self.t4 {
            degrees::checked_div(
                &degrees::checked_sub(&self.t4, &x)?,
                &degrees::checked_sub(&self.t4, &self.t3)?,
            )?
        } else {
            Rational::zero()
        };
        Degree::new(value)
    }

    /// Evaluates the trapezoid on every point of a numeric domain.
    pub fn to_fuzzy(&self, domain: &Arc<SortDomain>) -> Result<FuzzySet, FuzzyError> {
        let set = self.to_fuzzy_unchecked(domain)?;
        set.check_normalized()?;
        Ok(set)
    }

    /// As [`Trapezoid::to_fuzzy`] but without the normalization check.
    pub fn to_fuzzy_unchecked(&self, domain: &Arc<SortDomain>) -> Result<FuzzySet, FuzzyError> {
        if !domain.is_numeric() {
            return Err(FuzzyError::NonNumericDomain(domain.name.clone()));
        }
        let memberships = domain
            .elements
            .iter()
            .map(|e| match e {
                Element::Number(x) => self.membership(*x),
                Element::Label(_) => unreachable!("numeric domain holds numbers only"),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FuzzySet {
            domain: domain.clone(),
            memberships,
        })
    }
}

impl fmt::Display for Trapezoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{};{};{};{}]",
            format_rational(&self.t1),
            format_rational(&self.t2),
            format_rational(&self.t3),
            format_rational(&self.t4)
        )
    }
}

/// Free-function form of [`Trapezoid::to_fuzzy`].
pub fn trapezoid_to_fuzzy(t: &Trapezoid, domain: &Arc<SortDomain>) -> Result<FuzzySet, FuzzyError> {
    t.to_fuzzy(domain)
}
