//! Exactly known Laplacian spectra: energy levels and their multiplicities.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binom, exact_div, uint_le_f64, uint_le_rat};

/// Largest level index the library will enumerate. Keeps every `lambda` inside `u64`.
pub const MAX_LEVEL_INDEX: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Sphere,
    HemisphereDirichlet,
    HemisphereNeumann,
    Circle,
    RealProjective,
    ComplexProjective,
    QuaternionProjective,
    CayleyPlane,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Sphere,
        Family::HemisphereDirichlet,
        Family::HemisphereNeumann,
        Family::Circle,
        Family::RealProjective,
        Family::ComplexProjective,
        Family::QuaternionProjective,
        Family::CayleyPlane,
    ];

    /// Descriptor keyword used in `family:dim` strings.
    pub fn keyword(self) -> &'static str {
        match self {
            Family::Sphere => "sphere",
            Family::HemisphereDirichlet => "hemisphere-d",
            Family::HemisphereNeumann => "hemisphere-n",
            Family::Circle => "circle",
            Family::RealProjective => "rp",
            Family::ComplexProjective => "cp",
            Family::QuaternionProjective => "hp",
            Family::CayleyPlane => "cayley",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.keyword() == s)
    }

    /// Families without boundary.
    pub fn is_closed(self) -> bool {
        !matches!(self, Family::HemisphereDirichlet | Family::HemisphereNeumann)
    }

    /// Sphere-like families share `lambda_(l) = l(l+d-1)`.
    pub fn is_spherical(self) -> bool {
        matches!(
            self,
            Family::Sphere | Family::Circle | Family::HemisphereDirichlet | Family::HemisphereNeumann
        )
    }
}

/// A manifold with boundary condition and real dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Space {
    family: Family,
    dim: u32,
}

impl Space {
    pub fn new(family: Family, dim: u32) -> Result<Space> {
        let ok = match family {
            Family::Sphere => dim >= 1,
            Family::HemisphereDirichlet | Family::HemisphereNeumann => dim >= 2,
            Family::Circle => dim == 1,
            Family::RealProjective => dim >= 2,
            Family::ComplexProjective => dim >= 4 && dim.is_multiple_of(2),
            Family::QuaternionProjective => dim >= 8 && dim.is_multiple_of(4),
            Family::CayleyPlane => dim == 16,
        };
        if !ok {
            let rule = match family {
                Family::Sphere => "d >= 1",
                Family::HemisphereDirichlet | Family::HemisphereNeumann => "d >= 2",
                Family::Circle => "d = 1",
                Family::RealProjective => "d >= 2",
                Family::ComplexProjective => "d in {4, 6, 8, ...}",
                Family::QuaternionProjective => "d in {8, 12, 16, ...}",
                Family::CayleyPlane => "d = 16",
            };
            return Err(Error::Domain(format!(
                "dimension {dim} is not allowed for {}: requires {rule}",
                family.keyword()
            )));
        }
        Ok(Space { family, dim })
    }

    pub fn sphere(d: u32) -> Result<Space> {
        Space::new(Family::Sphere, d)
    }
    pub fn hemisphere_dirichlet(d: u32) -> Result<Space> {
        Space::new(Family::HemisphereDirichlet, d)
    }
    pub fn hemisphere_neumann(d: u32) -> Result<Space> {
        Space::new(Family::HemisphereNeumann, d)
    }
    pub fn circle() -> Space {
        Space {
            family: Family::Circle,
            dim: 1,
        }
    }
    pub fn real_projective(d: u32) -> Result<Space> {
        Space::new(Family::RealProjective, d)
    }
    pub fn complex_projective(d: u32) -> Result<Space> {
        Space::new(Family::ComplexProjective, d)
    }
    pub fn quaternion_projective(d: u32) -> Result<Space> {
        Space::new(Family::QuaternionProjective, d)
    }
    pub fn cayley_plane() -> Space {
        Space {
            family: Family::CayleyPlane,
            dim: 16,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn is_closed(&self) -> bool {
        self.family.is_closed()
    }

    /// Smallest admissible level index (1 for the Dirichlet hemisphere, 0 otherwise).
    pub fn first_level(&self) -> u64 {
        if self.family == Family::HemisphereDirichlet {
            1
        } else {
            0
        }
    }

    /// `lambda_(l)` evaluated at a real level parameter `t`; agrees with
    /// [`Space::lambda`] at integers and is increasing for `t >= 0`.
    pub fn lambda_real(&self, t: f64) -> f64 {
        let d = f64::from(self.dim);
        match self.family {
            Family::Sphere | Family::Circle | Family::HemisphereDirichlet | Family::HemisphereNeumann => t * (t + d - 1.0),
            Family::RealProjective => 2.0 * t * (2.0 * t + d - 1.0),
            Family::ComplexProjective => t * (2.0 * t + d) / 2.0,
            Family::QuaternionProjective => t * (2.0 * t + d + 2.0) / 2.0,
            Family::CayleyPlane => t * (2.0 * t + d + 6.0) / 2.0,
        }
    }

    /// `lambda_(l)` as an exact integer. Panics above [`MAX_LEVEL_INDEX`].
    pub fn lambda(&self, l: u64) -> u64 {
        assert!(l <= MAX_LEVEL_INDEX, "level index {l} above supported range");
        let l = u128::from(l);
        let d = u128::from(self.dim);
        let v = match self.family {
            Family::Sphere | Family::Circle | Family::HemisphereDirichlet | Family::HemisphereNeumann => l * (l + d - 1),
            Family::RealProjective => 2 * l * (2 * l + d - 1),
            Family::ComplexProjective => l * (2 * l + d) / 2,
            Family::QuaternionProjective => l * (2 * l + d + 2) / 2,
            Family::CayleyPlane => l * (2 * l + d + 6) / 2,
        };
        u64::try_from(v).expect("eigenvalue fits in u64 below MAX_LEVEL_INDEX")
    }

    /// First positive eigenvalue `lambda_(1)`.
    pub fn lambda_one(&self) -> u64 {
        self.lambda(1)
    }

    /// Multiplicity of level `l`; the caller guarantees `l >= first_level()`.
    pub fn multiplicity(&self, l: u64) -> BigUint {
        let d = u64::from(self.dim);
        let n = d / 2;
        match self.family {
            Family::Sphere | Family::Circle => {
                let lower = if l >= 2 { binom(d + l - 2, l - 2) } else { BigUint::default() };
                binom(d + l, l) - lower
            }
            Family::HemisphereDirichlet => binom(d + l - 2, d - 1),
            Family::HemisphereNeumann => binom(d + l - 1, d - 1),
            _ if l == 0 => BigUint::one(),
            Family::RealProjective => {
                let num = BigUint::from(4 * l + d - 1) * binom(d + 2 * l - 2, d - 1);
                exact_div(num, &BigUint::from(2 * l))
            }
            Family::ComplexProjective => {
                let c = binom(n + l - 1, n - 1);
                exact_div(BigUint::from(d + 4 * l) * &c * &c, &BigUint::from(d))
            }
            Family::QuaternionProjective => {
                let num = BigUint::from(4 * l + d + 2) * binom(n + l - 1, n - 1) * binom(n + l, n + 1);
                exact_div(num, &BigUint::from(2 * l * (l + 1)))
            }
            Family::CayleyPlane => {
                let num = BigUint::from(3 * (4 * l + d + 6)) * binom(n + l - 1, n - 1) * binom(n + l + 2, n + 3);
                exact_div(num, &BigUint::from(l * (l + 1) * (l + 2) * (l + 3)))
            }
        }
    }

    /// Descriptor string, e.g. `sphere:3`.
    pub fn descriptor(&self) -> String {
        format!("{}:{}", self.family.keyword(), self.dim)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl FromStr for Space {
    type Err = Error;

    /// Parses `family:dim`; `circle` and `cayley` may omit the dimension.
    fn from_str(s: &str) -> Result<Space> {
        let s = s.trim();
        let (fam, dim) = match s.split_once(':') {
            Some((f, d)) => (f, Some(d)),
            None => (s, None),
        };
        let family = Family::from_keyword(&fam.to_ascii_lowercase()).ok_or_else(|| {
            let valid: Vec<_> = Family::ALL.iter().map(|f| f.keyword()).collect();
            Error::Parse(format!("unknown space family `{fam}`; valid families: {}", valid.join(", ")))
        })?;
        let dim = match (dim, family) {
            (Some(d), _) => d
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad dimension `{d}` in `{s}`")))?,
            (None, Family::Circle) => 1,
            (None, Family::CayleyPlane) => 16,
            (None, _) => return Err(Error::Parse(format!("`{s}` needs a dimension, e.g. `{fam}:2`"))),
        };
        Space::new(family, dim)
    }
}

/// One energy level with its exact eigenvalue and multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyLevel {
    pub l: u64,
    pub lambda: u64,
    pub mult: BigUint,
}

pub fn energy_level(space: &Space, l: u64) -> Result<EnergyLevel> {
    if l < space.first_level() {
        return Err(Error::Domain(format!(
            "{} has no level l = {l}; levels start at l = {}",
            space,
            space.first_level()
        )));
    }
    if l > MAX_LEVEL_INDEX {
        return Err(Error::Domain(format!("level index {l} exceeds {MAX_LEVEL_INDEX}")));
    }
    Ok(EnergyLevel {
        l,
        lambda: space.lambda(l),
        mult: space.multiplicity(l),
    })
}

/// Largest `l` with `pred(lambda_(l))`, for a predicate that is monotone (true then false).
fn max_level_where(space: &Space, pred: impl Fn(u64) -> bool) -> Option<u64> {
    let lo0 = space.first_level();
    if !pred(space.lambda(lo0)) {
        return None;
    }
    let mut lo = lo0;
    let mut hi = lo0.max(1) * 2;
    while hi < MAX_LEVEL_INDEX && pred(space.lambda(hi)) {
        lo = hi;
        hi *= 2;
    }
    let mut hi = hi.min(MAX_LEVEL_INDEX);
    if pred(space.lambda(hi)) {
        return Some(hi);
    }
    // invariant: pred(lo) holds, pred(hi) fails
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(space.lambda(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Largest `L` with `lambda_(L) <= z`, compared exactly. `None` when no level qualifies.
pub fn max_level_index(space: &Space, z: f64) -> Option<u64> {
    max_level_where(space, |lam| uint_le_f64(&BigUint::from(lam), z))
}

/// Exact-rational counterpart of [`max_level_index`].
pub fn max_level_index_exact(space: &Space, z: &BigRational) -> Option<u64> {
    max_level_where(space, |lam| uint_le_rat(&BigUint::from(lam), z))
}

/// Nonnegative root of `w(w + d - 1) = z`, polished with one Newton step.
pub fn invert_w(d: u32, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let a = f64::from(d) - 1.0;
    let disc = (a * a + 4.0 * z).sqrt();
    // 2z / (a + disc) avoids cancellation when z is small against a^2.
    let mut w = 2.0 * z / (a + disc);
    let f = w * (w + a) - z;
    let fp = 2.0 * w + a;
    if fp > 0.0 {
        w -= f / fp;
    }
    w.max(0.0)
}

/// Fluctuation `psi(w) = w - floor(w) - 1/2`.
pub fn fluctuation(w: f64) -> f64 {
    w - w.floor() - 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(s: Space, l: u64) -> (u64, BigUint) {
        let e = energy_level(&s, l).unwrap();
        (e.lambda, e.mult)
    }

    #[test]
    fn spec_examples() {
        assert_eq!(lvl(Space::sphere(2).unwrap(), 3), (12, BigUint::from(7u32)));
        assert_eq!(lvl(Space::sphere(1).unwrap(), 2), (4, BigUint::from(2u32)));
        assert_eq!(lvl(Space::sphere(3).unwrap(), 2), (8, BigUint::from(9u32)));
        assert_eq!(lvl(Space::hemisphere_neumann(2).unwrap(), 1), (2, BigUint::from(2u32)));
        assert_eq!(lvl(Space::complex_projective(4).unwrap(), 1), (3, BigUint::from(8u32)));
        assert_eq!(lvl(Space::real_projective(2).unwrap(), 1), (6, BigUint::from(5u32)));
    }

    #[test]
    fn dirichlet_hemisphere_has_no_level_zero() {
        assert!(energy_level(&Space::hemisphere_dirichlet(2).unwrap(), 0).is_err());
    }

    #[test]
    fn dimension_constraints() {
        assert!(Space::sphere(0).is_err());
        assert!(Space::hemisphere_dirichlet(1).is_err());
        assert!(Space::complex_projective(5).is_err());
        assert!(Space::complex_projective(2).is_err());
        assert!(Space::quaternion_projective(10).is_err());
        assert!(Space::new(Family::CayleyPlane, 8).is_err());
        assert!(Space::new(Family::Circle, 2).is_err());
    }

    #[test]
    fn level_index_examples() {
        let s2 = Space::sphere(2).unwrap();
        assert_eq!(max_level_index(&s2, 6.0), Some(2));
        assert_eq!(max_level_index(&s2, 5.9), Some(1));
        assert_eq!(max_level_index(&s2, 0.0), Some(0));
        assert_eq!(max_level_index(&s2, -0.5), None);
        let hd3 = Space::hemisphere_dirichlet(3).unwrap();
        assert_eq!(max_level_index(&hd3, 2.5), None);
        assert_eq!(max_level_index(&hd3, 3.0), Some(1));
    }

    #[test]
    fn inversion_and_fluctuation() {
        assert_eq!(invert_w(2, 2.0), 1.0);
        assert_eq!(invert_w(3, 3.0), 1.0);
        assert_eq!(invert_w(2, 3.75), 1.5);
        assert_eq!(fluctuation(1.0), -0.5);
        assert_eq!(fluctuation(1.5), 0.0);
        assert_eq!(fluctuation(2.75), 0.25);
    }

    #[test]
    fn descriptors_round_trip() {
        for s in [
            "sphere:3",
            "hemisphere-d:2",
            "hemisphere-n:4",
            "circle:1",
            "rp:3",
            "cp:4",
            "hp:8",
            "cayley:16",
        ] {
            let sp: Space = s.parse().unwrap();
            assert_eq!(sp.descriptor(), s);
        }
        assert_eq!("circle".parse::<Space>().unwrap(), Space::circle());
        assert!("torus:2".parse::<Space>().is_err());
    }
}
