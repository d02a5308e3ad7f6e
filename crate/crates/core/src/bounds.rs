//! Catalog of sharp spectral bounds with point evaluation, equality-point metadata and
//! grid verification.
//!
//! Entries marked `expected_valid = false` describe inequalities that are known to fail;
//! verifying them succeeds only when a counterexample is found.
//!
//! Bounds for subdomains `Omega` cannot be compared with an actual spectrum because no
//! geometry is modelled. They are checked against the transplanted quantity obtained from the
//! whole space (the spectral sum of `S^2` or `S^d` scaled by `|Omega|/|M|`), which dominates or
//! is dominated by the domain quantity and is exactly what the bound is derived from.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{factorial, rat, rat_int, rat_pow};
use crate::riesz::{Quantity, Spectrum, SpectrumQuery, Variant, DEFAULT_LEVEL_CAP};
use crate::spaces::{invert_w, Family, Space};
use crate::weyl::{lclass, snapped_fluctuation, volumes, weyl_coefficient};

/// Default relative tolerance for slack signs and equality points.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Number of uniform points in the standard z-grid.
pub const STANDARD_GRID_POINTS: usize = 2000;
/// The standard z-grid ends at the eigenvalue of this level.
pub const STANDARD_GRID_LEVEL: u64 = 40;
/// The standard k-range for average bounds is `1..=STANDARD_K_MAX`.
pub const STANDARD_K_MAX: u64 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub fn keyword(self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        }
    }
}

/// Whether an entry is indexed by the spectral parameter `z` or by an eigenvalue count `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    Z,
    K,
}

/// Admissible range of the area parameter of a domain bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AreaRule {
    /// `0 <= |Omega| <= |S^2_+|`.
    UpperHemisphere,
    /// `0 <= |Omega| <= |S^2|`.
    WholeTwoSphere,
    /// `0 <= |Omega| <= |S^d|`.
    WholeSphere,
}

impl AreaRule {
    fn max_area(self, d: u32) -> f64 {
        match self {
            AreaRule::UpperHemisphere => 2.0 * PI,
            AreaRule::WholeTwoSphere => 4.0 * PI,
            AreaRule::WholeSphere => volumes(d).expect("d >= 1").sphere_f64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    S2R1Lower,
    S2R1Upper,
    S2R1LowerImp,
    S2R1UpperImp,
    Hemi2NdPolya,
    Hemi2NdTwoSided,
    Hemi2R1dLower,
    Hemi2R1dUpper,
    Hemi2R1nLower,
    Hemi2R1nUpper,
    DomS2pBly,
    DomS2pBlyImp,
    LemBlys1,
    LemBlys2,
    SdR1Lower,
    SdR1LowerShift,
    SdR1UpperShift,
    SdAvgTwoSided,
    DomSdBlyShift,
    DomSdKrogerImp,
    S1R1UpperShift,
    HemiDBly345,
    SdR1pTwoSided,
    SdR12Lower,
    Hemi2PolyBly,
    DomS2pPoly23,
    DomS2Buckling,
    DomSdNeuBihLower,
    FailHemiPolya,
    FailLiYau,
    FailR1pWeyl,
    FailS1Weyl,
    SdR2TwoSided,
    FailSdR1LowerShifted,
}

/// One catalog entry.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSpec {
    pub id: &'static str,
    pub kind: BoundKind,
    pub summary: &'static str,
    pub quantity: Quantity,
    pub sides: &'static [Side],
    pub families: &'static [Family],
    /// Inclusive range of admissible dimensions.
    pub dims: (u32, u32),
    /// Inclusive range of admissible operator powers.
    pub powers: (u32, u32),
    pub default_space: (Family, u32),
    pub default_power: u32,
    pub area: Option<AreaRule>,
    pub expected_valid: bool,
    pub variable: Variable,
    /// Parameter sets `(family, d, p)` exercised by `verify all` and the acceptance suite.
    pub sweep: &'static [(Family, u32, u32)],
}

const LO: &[Side] = &[Side::Lower];
const UP: &[Side] = &[Side::Upper];
const BOTH: &[Side] = &[Side::Lower, Side::Upper];
const SPHERE: &[Family] = &[Family::Sphere];
const SPHERE_OR_CIRCLE: &[Family] = &[Family::Sphere, Family::Circle];
const HD: &[Family] = &[Family::HemisphereDirichlet];
const HN: &[Family] = &[Family::HemisphereNeumann];
const CLOSED: &[Family] = &[
    Family::Sphere,
    Family::Circle,
    Family::RealProjective,
    Family::ComplexProjective,
    Family::QuaternionProjective,
    Family::CayleyPlane,
];
const MAX_D: u32 = 40;

use Family::{
    CayleyPlane as Cay, Circle as Cir, ComplexProjective as Cp, HemisphereDirichlet as Hd, HemisphereNeumann as Hn,
    QuaternionProjective as Hp, RealProjective as Rp, Sphere as Sph,
};

macro_rules! entry {
    ($id:expr, $kind:ident, $summary:expr, $q:ident, $sides:expr, $fams:expr, $dims:expr, $pows:expr,
     $def:expr, $defp:expr, $area:expr, $valid:expr, $var:ident, $sweep:expr) => {
        BoundSpec {
            id: $id,
            kind: BoundKind::$kind,
            summary: $summary,
            quantity: Quantity::$q,
            sides: $sides,
            families: $fams,
            dims: $dims,
            powers: $pows,
            default_space: $def,
            default_power: $defp,
            area: $area,
            expected_valid: $valid,
            variable: Variable::$var,
            sweep: $sweep,
        }
    };
}

static CATALOG: [BoundSpec; 34] = [
    entry!(
        "s2.r1.lower",
        S2R1Lower,
        "R1 >= z^2/2 on S^2",
        R1,
        LO,
        SPHERE,
        (2, 2),
        (1, 1),
        (Sph, 2),
        1,
        None,
        true,
        Z,
        &[(Sph, 2, 1)]
    ),
    entry!(
        "s2.r1.upper",
        S2R1Upper,
        "R1 <= (z+1/2)^2/2 on S^2",
        R1,
        UP,
        SPHERE,
        (2, 2),
        (1, 1),
        (Sph, 2),
        1,
        None,
        true,
        Z,
        &[(Sph, 2, 1)]
    ),
    entry!(
        "s2.r1.lower.imp",
        S2R1LowerImp,
        "R1 >= z^2/2 + 2(1/4-psi^2)(z - sqrt(z)/2) on S^2",
        R1,
        LO,
        SPHERE,
        (2, 2),
        (1, 1),
        (Sph, 2),
        1,
        None,
        true,
        Z,
        &[(Sph, 2, 1)]
    ),
    entry!(
        "s2.r1.upper.imp",
        S2R1UpperImp,
        "R1 <= z^2/2 + 2(1/4-psi^2)(z + sqrt(z)/2 + 1/2) on S^2",
        R1,
        UP,
        SPHERE,
        (2, 2),
        (1, 1),
        (Sph, 2),
        1,
        None,
        true,
        Z,
        &[(Sph, 2, 1)]
    ),
    entry!(
        "hemi2.nd.polya",
        Hemi2NdPolya,
        "N^D <= z/2 on S^2_+",
        N,
        UP,
        HD,
        (2, 2),
        (1, 1),
        (Hd, 2),
        1,
        None,
        true,
        Z,
        &[(Hd, 2, 1)]
    ),
    entry!(
        "hemi2.nd.twosided",
        Hemi2NdTwoSided,
        "three-term two-sided bounds for N^D on S^2_+",
        N,
        BOTH,
        HD,
        (2, 2),
        (1, 1),
        (Hd, 2),
        1,
        None,
        true,
        Z,
        &[(Hd, 2, 1)]
    ),
    entry!(
        "hemi2.r1d.lower",
        Hemi2R1dLower,
        "R1^D >= z^2/4 - z sqrt(z+1/4)/3 on S^2_+",
        R1,
        LO,
        HD,
        (2, 2),
        (1, 1),
        (Hd, 2),
        1,
        None,
        true,
        Z,
        &[(Hd, 2, 1)]
    ),
    entry!(
        "hemi2.r1d.upper",
        Hemi2R1dUpper,
        "R1^D <= z^2/4 - z sqrt(z+1/4)/3 + z/4 on S^2_+",
        R1,
        UP,
        HD,
        (2, 2),
        (1, 1),
        (Hd, 2),
        1,
        None,
        true,
        Z,
        &[(Hd, 2, 1)]
    ),
    entry!(
        "hemi2.r1n.lower",
        Hemi2R1nLower,
        "R1^N >= z^2/4 + z sqrt(z+1/4)/3 on S^2_+",
        R1,
        LO,
        HN,
        (2, 2),
        (1, 1),
        (Hn, 2),
        1,
        None,
        true,
        Z,
        &[(Hn, 2, 1)]
    ),
    entry!(
        "hemi2.r1n.upper",
        Hemi2R1nUpper,
        "R1^N <= z^2/4 + z sqrt(z+1/4)/3 + z on S^2_+",
        R1,
        UP,
        HN,
        (2, 2),
        (1, 1),
        (Hn, 2),
        1,
        None,
        true,
        Z,
        &[(Hn, 2, 1)]
    ),
    entry!(
        "dom.s2p.bly",
        DomS2pBly,
        "R1^D(Omega) <= |Omega| z^2/(8 pi) for Omega in S^2_+",
        R1,
        UP,
        HD,
        (2, 2),
        (1, 1),
        (Hd, 2),
        1,
        Some(AreaRule::UpperHemisphere),
        true,
        Z,
        &[(Hd, 2, 1)]
    ),
    entry!(
        "dom.s2p.bly.imp",
        DomS2pBlyImp,
        "R1^D(Omega) <= |Omega| (z-1/2)^2/(8 pi) for Omega in S^2_+",
        R1,
        UP,
        HD,
        (2, 2),
        (1, 1),
        (Hd, 2),
        1,
        Some(AreaRule::UpperHemisphere),
        true,
        Z,
        &[(Hd, 2, 1)]
    ),
    entry!(
        "lem.blys1",
        LemBlys1,
        "sum_{l>=1} (2l+1)(z-l(l+1))_+ <= z^2/2",
        R1,
        UP,
        SPHERE,
        (2, 2),
        (1, 1),
        (Sph, 2),
        1,
        None,
        true,
        Z,
        &[(Sph, 2, 1)]
    ),
    entry!(
        "lem.blys2",
        LemBlys2,
        "sum_{l>=1} (2l+1)(z-l(l+1))_+ <= (z-1/2)^2/2",
        R1,
        UP,
        SPHERE,
        (2, 2),
        (1, 1),
        (Sph, 2),
        1,
        None,
        true,
        Z,
        &[(Sph, 2, 1)]
    ),
    entry!(
        "sd.r1.lower",
        SdR1Lower,
        "R1 >= L_{1,d}|S^d| z^{1+d/2} on S^d",
        R1,
        LO,
        SPHERE,
        (2, MAX_D),
        (1, 1),
        (Sph, 3),
        1,
        None,
        true,
        Z,
        &[(Sph, 2, 1), (Sph, 3, 1), (Sph, 4, 1), (Sph, 5, 1), (Sph, 6, 1)]
    ),
    entry!(
        "sd.r1.lower.shift",
        SdR1LowerShift,
        "R1 >= L_{1,d}|S^d| z^{1+d/2} (1 + d(d-2)(d+2)/(12z)) on S^d",
        R1,
        LO,
        SPHERE,
        (2, MAX_D),
        (1, 1),
        (Sph, 3),
        1,
        None,
        true,
        Z,
        &[(Sph, 2, 1), (Sph, 3, 1), (Sph, 4, 1), (Sph, 5, 1), (Sph, 6, 1)]
    ),
    entry!(
        "sd.r1.upper.shift",
        SdR1UpperShift,
        "R1 <= L_{1,d}|S^d| (z+z_d)^{1+d/2}, z_d = d(2d-1)/12, on S^d",
        R1,
        UP,
        SPHERE_OR_CIRCLE,
        (1, MAX_D),
        (1, 1),
        (Sph, 3),
        1,
        None,
        true,
        Z,
        &[(Sph, 1, 1), (Sph, 2, 1), (Sph, 3, 1), (Sph, 4, 1), (Sph, 5, 1), (Sph, 6, 1)]
    ),
    entry!(
        "sd.avg.twosided",
        SdAvgTwoSided,
        "two-sided bounds on the average of the first k eigenvalues of S^d",
        Average,
        BOTH,
        SPHERE,
        (2, MAX_D),
        (1, 1),
        (Sph, 2),
        1,
        None,
        true,
        K,
        &[(Sph, 2, 1), (Sph, 3, 1), (Sph, 4, 1), (Sph, 5, 1)]
    ),
    entry!(
        "dom.sd.bly.shift",
        DomSdBlyShift,
        "R1^D(Omega) <= L_{1,d}|Omega| (z+z_d)^{1+d/2} for Omega in S^d",
        R1,
        UP,
        SPHERE,
        (2, MAX_D),
        (1, 1),
        (Sph, 3),
        1,
        Some(AreaRule::WholeSphere),
        true,
        Z,
        &[(Sph, 2, 1), (Sph, 3, 1), (Sph, 4, 1)]
    ),
    entry!(
        "dom.sd.kroger.imp",
        DomSdKrogerImp,
        "R1^N(Omega) >= L_{1,d}|Omega| z^{1+d/2}(1 + d(d-2)(d+2)/(12z)) for Omega in S^d",
        R1,
        LO,
        SPHERE,
        (2, MAX_D),
        (1, 1),
        (Sph, 3),
        1,
        Some(AreaRule::WholeSphere),
        true,
        Z,
        &[(Sph, 2, 1), (Sph, 3, 1), (Sph, 4, 1)]
    ),
    entry!(
        "s1.r1.upper.shift",
        S1R1UpperShift,
        "R1 <= 4/3 (z+1/12)^{3/2} on S^1",
        R1,
        UP,
        SPHERE_OR_CIRCLE,
        (1, 1),
        (1, 1),
        (Cir, 1),
        1,
        None,
        true,
        Z,
        &[(Cir, 1, 1)]
    ),
    entry!(
        "hemi.d.bly345",
        HemiDBly345,
        "R1^D <= L_{1,d}|S^d_+| z^{1+d/2} on S^d_+, d = 3, 4, 5",
        R1,
        UP,
        HD,
        (3, 5),
        (1, 1),
        (Hd, 3),
        1,
        None,
        true,
        Z,
        &[(Hd, 3, 1), (Hd, 4, 1), (Hd, 5, 1)]
    ),
    entry!(
        "sd.r1p.twosided",
        SdR1pTwoSided,
        "two-sided bounds for the first Riesz mean of (-Delta)^p on S^d",
        R1,
        BOTH,
        SPHERE,
        (2, MAX_D),
        (2, 8),
        (Sph, 2),
        2,
        None,
        true,
        Z,
        &[(Sph, 2, 2), (Sph, 2, 3), (Sph, 2, 4), (Sph, 3, 2), (Sph, 3, 3), (Sph, 4, 2)]
    ),
    entry!(
        "sd.r12.lower",
        SdR12Lower,
        "R1 of the bilaplacian >= 8/((d+4) d!) z^{1+d/4} on S^d, d >= 3",
        R1,
        LO,
        SPHERE,
        (3, MAX_D),
        (2, 2),
        (Sph, 3),
        2,
        None,
        true,
        Z,
        &[(Sph, 3, 2), (Sph, 4, 2), (Sph, 5, 2), (Sph, 6, 2)]
    ),
    entry!(
        "hemi2.poly.bly",
        Hemi2PolyBly,
        "R1 of Dirichlet (-Delta)^p on S^2_+ <= p/(2(p+1)) z^{1+1/p}",
        R1,
        UP,
        HD,
        (2, 2),
        (1, 8),
        (Hd, 2),
        2,
        None,
        true,
        Z,
        &[(Hd, 2, 1), (Hd, 2, 2), (Hd, 2, 3), (Hd, 2, 4)]
    ),
    entry!(
        "dom.s2p.poly23",
        DomS2pPoly23,
        "bi- and triharmonic Berezin-Li-Yau bounds for Omega in S^2_+",
        R1,
        UP,
        HD,
        (2, 2),
        (2, 3),
        (Hd, 2),
        2,
        Some(AreaRule::UpperHemisphere),
        true,
        Z,
        &[(Hd, 2, 2), (Hd, 2, 3)]
    ),
    entry!(
        "dom.s2.buckling",
        DomS2Buckling,
        "buckling R1(Omega) <= |Omega| min((z-1/2)^2, z^2)/(8 pi) for Omega in S^2",
        R1,
        UP,
        SPHERE,
        (2, 2),
        (1, 1),
        (Sph, 2),
        1,
        Some(AreaRule::WholeTwoSphere),
        true,
        Z,
        &[(Sph, 2, 1)]
    ),
    entry!(
        "dom.sd.neubih.lower",
        DomSdNeuBihLower,
        "Neumann bilaplacian R1(Omega) >= L_{1,d,2}|Omega| z^{1+d/4} for Omega in S^d, d >= 3",
        R1,
        LO,
        SPHERE,
        (3, MAX_D),
        (2, 2),
        (Sph, 3),
        2,
        Some(AreaRule::WholeSphere),
        true,
        Z,
        &[(Sph, 3, 2), (Sph, 4, 2), (Sph, 5, 2)]
    ),
    entry!(
        "fail.hemi.polya.d≥3",
        FailHemiPolya,
        "N^D <= z^{d/2}/d! on S^d_+ fails for d >= 3",
        N,
        UP,
        HD,
        (3, MAX_D),
        (1, 1),
        (Hd, 3),
        1,
        None,
        false,
        Z,
        &[(Hd, 3, 1), (Hd, 4, 1), (Hd, 5, 1)]
    ),
    entry!(
        "fail.liyau.d≥6",
        FailLiYau,
        "Li-Yau lower bound for Dirichlet averages on S^d_+ fails for d >= 6",
        Average,
        LO,
        HD,
        (6, MAX_D),
        (1, 1),
        (Hd, 6),
        1,
        None,
        false,
        K,
        &[(Hd, 6, 1), (Hd, 7, 1)]
    ),
    entry!(
        "fail.r1p.weyl",
        FailR1pWeyl,
        "the Weyl term of (-Delta)^2 on S^2 is neither a lower nor an upper bound",
        R1,
        BOTH,
        SPHERE,
        (2, 2),
        (2, 2),
        (Sph, 2),
        2,
        None,
        false,
        Z,
        &[(Sph, 2, 2)]
    ),
    entry!(
        "fail.s1.weyl",
        FailS1Weyl,
        "the Weyl term 4/3 z^{3/2} on S^1 is neither a lower nor an upper bound",
        R1,
        BOTH,
        SPHERE_OR_CIRCLE,
        (1, 1),
        (1, 1),
        (Cir, 1),
        1,
        None,
        false,
        Z,
        &[(Cir, 1, 1)]
    ),
    entry!(
        "sd.r2.twosided",
        SdR2TwoSided,
        "L_{2,d}|M| z^{2+d/2} <= R2 <= L_{2,d}|M| (z + d lambda_(1)/4)^{2+d/2}",
        R2,
        BOTH,
        CLOSED,
        (1, MAX_D),
        (1, 1),
        (Sph, 2),
        1,
        None,
        true,
        Z,
        &[
            (Sph, 2, 1),
            (Sph, 3, 1),
            (Sph, 4, 1),
            (Sph, 5, 1),
            (Rp, 3, 1),
            (Rp, 4, 1),
            (Cp, 4, 1),
            (Cp, 6, 1),
            (Hp, 8, 1),
            (Cay, 16, 1)
        ]
    ),
    entry!(
        "fail.sd.r1.lower.bd",
        FailSdR1LowerShifted,
        "R1 >= L_{1,d}|S^d| (z + d(d-2)/6)^{1+d/2} fails on S^3",
        R1,
        LO,
        SPHERE,
        (3, MAX_D),
        (1, 1),
        (Sph, 3),
        1,
        None,
        false,
        Z,
        &[(Sph, 3, 1)]
    ),
];

/// Every catalog entry, in catalog order.
pub fn catalog() -> &'static [BoundSpec] {
    &CATALOG
}

/// Looks up an entry; `>=` is accepted in place of `≥`.
pub fn lookup(id: &str) -> Result<&'static BoundSpec> {
    let normalized = id.replace(">=", "≥");
    CATALOG
        .iter()
        .find(|b| b.id == normalized)
        .ok_or_else(|| Error::UnknownBound(id.to_string()))
}

/// Parameters of a catalog evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub space: Space,
    pub p: u32,
    /// Area `|Omega|` for domain bounds.
    pub area: Option<f64>,
}

impl BoundSpec {
    pub fn has_side(&self, side: Side) -> bool {
        self.sides.contains(&side)
    }

    pub fn default_params(&self) -> BoundParams {
        let space = Space::new(self.default_space.0, self.default_space.1).expect("catalog defaults are valid");
        self.complete(space, self.default_power, None)
    }

    fn complete(&self, space: Space, p: u32, area: Option<f64>) -> BoundParams {
        let area = match (self.area, area) {
            (None, _) => None,
            (Some(_), Some(a)) => Some(a),
            (Some(rule), None) => Some(rule.max_area(space.dim())),
        };
        BoundParams { space, p, area }
    }

    /// Builds parameters from optional overrides and validates them.
    pub fn params(&self, space: Option<Space>, p: Option<u32>, area: Option<f64>) -> Result<BoundParams> {
        let base = self.default_params();
        let space = space.unwrap_or(base.space);
        let params = self.complete(space, p.unwrap_or(self.default_power), area);
        self.validate(&params)?;
        Ok(params)
    }

    pub fn validate(&self, params: &BoundParams) -> Result<()> {
        let s = params.space;
        if !self.families.contains(&s.family()) {
            let allowed: Vec<&str> = self.families.iter().map(|f| f.keyword()).collect();
            return Err(Error::OutOfRange(format!(
                "{} applies to {}, not to {s}",
                self.id,
                allowed.join(", ")
            )));
        }
        if s.dim() < self.dims.0 || s.dim() > self.dims.1 {
            return Err(Error::OutOfRange(format!(
                "{} is stated for dimensions {}..={}, got d = {}",
                self.id,
                self.dims.0,
                self.dims.1,
                s.dim()
            )));
        }
        if params.p < self.powers.0 || params.p > self.powers.1 {
            return Err(Error::OutOfRange(format!(
                "{} is stated for powers {}..={}, got p = {}",
                self.id, self.powers.0, self.powers.1, params.p
            )));
        }
        match (self.area, params.area) {
            (Some(rule), Some(a)) => {
                let max = rule.max_area(s.dim());
                if !(a >= 0.0 && a <= max * (1.0 + 1e-15)) {
                    return Err(Error::OutOfRange(format!("{} needs 0 <= |Omega| <= {max}, got {a}", self.id)));
                }
            }
            (Some(_), None) => return Err(Error::OutOfRange(format!("{} needs an area", self.id))),
            (None, Some(_)) => return Err(Error::OutOfRange(format!("{} does not take an area parameter", self.id))),
            (None, None) => {}
        }
        Ok(())
    }

    /// The parameter sets used by `verify all` and the acceptance suite.
    pub fn sweep_params(&self) -> Vec<BoundParams> {
        self.sweep
            .iter()
            .map(|&(f, d, p)| self.complete(Space::new(f, d).expect("catalog sweeps are valid"), p, None))
            .collect()
    }

    fn resolve_side(&self, side: Option<Side>) -> Result<Side> {
        match side {
            Some(s) if self.has_side(s) => Ok(s),
            Some(s) => Err(Error::OutOfRange(format!("{} has no {} side", self.id, s.keyword()))),
            None if self.sides.len() == 1 => Ok(self.sides[0]),
            None => Err(Error::OutOfRange(format!("{} is two-sided; choose lower or upper", self.id))),
        }
    }
}

fn z_d(d: f64) -> f64 {
    d * (2.0 * d - 1.0) / 12.0
}

fn psi_at(d: u32, z: f64) -> f64 {
    snapped_fluctuation(invert_w(d, z))
}

/// The transplanted spectral sum an entry is compared against: `factor * R_gamma` (or the
/// eigenvalue average) of `query`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub query: SpectrumQuery,
    /// Riesz order, or `None` for averages.
    pub gamma: Option<u32>,
    pub factor: f64,
}

/// The quantity each entry is verified against.
pub fn target(spec: &BoundSpec, params: &BoundParams) -> Result<Target> {
    use BoundKind::*;
    spec.validate(params)?;
    let s = params.space;
    let d = s.dim();
    let sphere_area = |d: u32| volumes(d).expect("d >= 1").sphere_f64();
    let area = params.area.unwrap_or(0.0);
    let gamma = spec.quantity.gamma();
    let (query, factor) = match spec.kind {
        DomS2pBly | DomS2pBlyImp | DomS2Buckling => (SpectrumQuery::buckling(Space::sphere(2)?)?, area / (4.0 * PI)),
        DomS2pPoly23 => (
            SpectrumQuery::new(Space::sphere(2)?, params.p, Variant::Buckling)?,
            area / (4.0 * PI),
        ),
        LemBlys1 | LemBlys2 => (SpectrumQuery::buckling(Space::sphere(2)?)?, 1.0),
        DomSdBlyShift | DomSdKrogerImp => (SpectrumQuery::laplacian(s), area / sphere_area(d)),
        DomSdNeuBihLower => (SpectrumQuery::polyharmonic(s, 2)?, area / sphere_area(d)),
        SdR1pTwoSided | SdR12Lower | Hemi2PolyBly | FailR1pWeyl => (SpectrumQuery::polyharmonic(s, params.p)?, 1.0),
        _ => (SpectrumQuery::laplacian(s), 1.0),
    };
    Ok(Target { query, gamma, factor })
}

/// Value of an entry's bound at `x` (`z`, or `k` for average entries).
/// `side` may be omitted for one-sided entries.
pub fn bound_value(id: &str, params: &BoundParams, side: Option<Side>, x: f64) -> Result<f64> {
    let spec = lookup(id)?;
    spec.validate(params)?;
    let side = spec.resolve_side(side)?;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!(
            "bounds are evaluated at nonnegative finite arguments, got {x}"
        )));
    }
    if spec.variable == Variable::K && x < 1.0 {
        return Err(Error::Domain("average bounds need k >= 1".into()));
    }
    Ok(eval_bound(spec, params, side, x))
}

/// Average bound `d/(d+2) 4 pi^2 / omega_d^{2/d} (k/|M|)^{2/d}` for a manifold of measure `vol`.
fn li_yau_average(d: u32, vol: f64, k: f64) -> f64 {
    let df = f64::from(d);
    let ball = volumes(d).expect("d >= 1").ball_f64();
    df / (df + 2.0) * 4.0 * PI * PI / ball.powf(2.0 / df) * (k / vol).powf(2.0 / df)
}

fn eval_bound(spec: &BoundSpec, params: &BoundParams, side: Side, x: f64) -> f64 {
    use BoundKind::*;
    let s = params.space;
    let dim = s.dim();
    let d = f64::from(dim);
    let p = f64::from(params.p);
    let z = x;
    let area = params.area.unwrap_or(0.0);
    let l1 = || lclass(1, dim, 1).expect("valid").value;
    let sphere_weyl = |gamma: u32, pw: u32| weyl_coefficient(&Space::sphere(dim).expect("valid"), gamma, pw).expect("valid");
    match spec.kind {
        S2R1Lower => 0.5 * z * z,
        S2R1Upper => 0.5 * (z + 0.5).powi(2),
        S2R1LowerImp => {
            let psi = psi_at(2, z);
            0.5 * z * z + 2.0 * (0.25 - psi * psi) * (z - z.sqrt() / 2.0)
        }
        S2R1UpperImp => {
            let psi = psi_at(2, z);
            0.5 * z * z + 2.0 * (0.25 - psi * psi) * (z + z.sqrt() / 2.0 + 0.5)
        }
        Hemi2NdPolya => z / 2.0,
        Hemi2NdTwoSided => {
            let a = if z > 0.0 { (psi_at(2, z) + 0.5) / z.sqrt() } else { 0.0 };
            let upper = z / 2.0 * (1.0 - a).powi(2);
            match side {
                Side::Upper => upper,
                Side::Lower => upper - a / 8.0,
            }
        }
        Hemi2R1dLower => z * z / 4.0 - z * (z + 0.25).sqrt() / 3.0,
        Hemi2R1dUpper => z * z / 4.0 - z * (z + 0.25).sqrt() / 3.0 + z / 4.0,
        Hemi2R1nLower => z * z / 4.0 + z * (z + 0.25).sqrt() / 3.0,
        Hemi2R1nUpper => z * z / 4.0 + z * (z + 0.25).sqrt() / 3.0 + z,
        DomS2pBly => area * z * z / (8.0 * PI),
        DomS2pBlyImp => area * (z - 0.5).powi(2) / (8.0 * PI),
        LemBlys1 => z * z / 2.0,
        LemBlys2 => (z - 0.5).powi(2) / 2.0,
        SdR1Lower => sphere_weyl(1, 1) * z.powf(1.0 + d / 2.0),
        SdR1LowerShift => sphere_weyl(1, 1) * (z.powf(1.0 + d / 2.0) + d * (d - 2.0) * (d + 2.0) / 12.0 * z.powf(d / 2.0)),
        SdR1UpperShift | S1R1UpperShift => sphere_weyl(1, 1) * (z + z_d(d)).powf(1.0 + d / 2.0),
        SdAvgTwoSided => {
            let c = li_yau_average(dim, volumes(dim).expect("valid").sphere_f64(), z);
            match side {
                Side::Upper => c,
                Side::Lower => c - z_d(d),
            }
        }
        DomSdBlyShift => l1() * area * (z + z_d(d)).powf(1.0 + d / 2.0),
        DomSdKrogerImp => l1() * area * (z.powf(1.0 + d / 2.0) + d * (d - 2.0) * (d + 2.0) / 12.0 * z.powf(d / 2.0)),
        HemiDBly345 => weyl_coefficient(&s, 1, 1).expect("valid") * z.powf(1.0 + d / 2.0),
        SdR1pTwoSided => {
            if dim == 2 {
                let lead = p / (p + 1.0) * z.powf(1.0 + 1.0 / p);
                let tail = p / 8.0 * z.powf(1.0 - 1.0 / p);
                match side {
                    Side::Lower => lead - (p - 1.0) / 2.0 * z - tail,
                    Side::Upper => lead + p / 2.0 * z + tail,
                }
            } else {
                let l = sphere_weyl(1, params.p);
                let u = z.powf(1.0 / p);
                let e = p + d / 2.0;
                let shifted = (u + z_d(d)).powf(e);
                let corr = 2.0 * (p - 1.0) / (d + 2.0) * l * (shifted - u.powf(e));
                match side {
                    Side::Lower => l * u.powf(e) - corr,
                    Side::Upper => l * shifted + corr,
                }
            }
        }
        SdR12Lower => sphere_weyl(1, 2) * z.powf(1.0 + d / 4.0),
        Hemi2PolyBly => p / (2.0 * (p + 1.0)) * z.powf(1.0 + 1.0 / p),
        DomS2pPoly23 => {
            if params.p == 2 {
                area * z.powf(1.5) / (6.0 * PI)
            } else {
                3.0 * area * z.powf(4.0 / 3.0) / (16.0 * PI)
            }
        }
        DomS2Buckling => area / (8.0 * PI) * (z - 0.5).powi(2).min(z * z),
        DomSdNeuBihLower => lclass(1, dim, 2).expect("valid").value * area * z.powf(1.0 + d / 4.0),
        FailHemiPolya => weyl_coefficient(&s, 0, 1).expect("valid") * z.powf(d / 2.0),
        FailLiYau => li_yau_average(dim, volumes(dim).expect("valid").hemisphere_f64().expect("d >= 2"), z),
        FailR1pWeyl => sphere_weyl(1, params.p) * z.powf(1.0 + d / (2.0 * p)),
        FailS1Weyl => 4.0 / 3.0 * z.powf(1.5),
        SdR2TwoSided => {
            let c = weyl_coefficient(&s, 2, 1).expect("valid");
            match side {
                Side::Lower => c * z.powf(2.0 + d / 2.0),
                Side::Upper => c * (z + d * s.lambda_one() as f64 / 4.0).powf(2.0 + d / 2.0),
            }
        }
        FailSdR1LowerShifted => sphere_weyl(1, 1) * (z + d * (d - 2.0) / 6.0).powf(1.0 + d / 2.0),
    }
}

/// Exact value of the bound for the entries whose closed form is a polynomial with rational
/// coefficients in `z` (or `k`); `None` for the others.
pub fn bound_value_exact(id: &str, params: &BoundParams, side: Option<Side>, z: &BigRational) -> Result<Option<BigRational>> {
    use BoundKind::*;
    let spec = lookup(id)?;
    spec.validate(params)?;
    let side = spec.resolve_side(side)?;
    let half = rat(1, 2);
    let dim = params.space.dim();
    let even = dim.is_multiple_of(2);
    let sphere_weyl = |gamma: u32| crate::weyl::weyl_coefficient_exact(&Space::sphere(dim).expect("valid"), gamma, 1).expect("valid");
    let d = rat_int(dim);
    let zd = &d * (rat_int(2) * &d - rat_int(1)) / rat_int(12);
    let v = match spec.kind {
        S2R1Lower => Some(&half * z * z),
        S2R1Upper => Some(&half * rat_pow(&(z + &half), 2)),
        Hemi2NdPolya => Some(z * &half),
        LemBlys1 => Some(&half * z * z),
        LemBlys2 => Some(&half * rat_pow(&(z - &half), 2)),
        SdR1Lower if even => Some(sphere_weyl(1) * rat_pow(z, 1 + dim / 2)),
        SdR1LowerShift if even => {
            let c = &d * (&d - rat_int(2)) * (&d + rat_int(2)) / rat_int(12);
            Some(sphere_weyl(1) * (rat_pow(z, 1 + dim / 2) + c * rat_pow(z, dim / 2)))
        }
        SdR1UpperShift if even => Some(sphere_weyl(1) * rat_pow(&(z + &zd), 1 + dim / 2)),
        SdR2TwoSided if even => {
            let c = crate::weyl::weyl_coefficient_exact(&params.space, 2, 1)?;
            let shift = &d * rat_int(params.space.lambda_one()) / rat_int(4);
            match side {
                Side::Lower => Some(c * rat_pow(z, 2 + dim / 2)),
                Side::Upper => Some(c * rat_pow(&(z + shift), 2 + dim / 2)),
            }
        }
        _ => None,
    };
    Ok(v)
}

/// A point where an entry is known to hold with equality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualityPoint {
    pub side: Side,
    pub x: f64,
}

/// The `l`-th point `z_l` in `(l^2, (l+1)^2)` where the `S^1` bound is attained: the root of
/// `psi(w) = w - sqrt(w^2 + 1/12)` with `w = sqrt(z)`, located by bisection.
pub fn s1_touching_point(l: u64) -> f64 {
    let lf = l as f64;
    let g = |w: f64| (w - lf - 0.5) - (w - (w * w + 1.0 / 12.0).sqrt());
    let (mut a, mut b) = (lf, lf + 1.0);
    // g is increasing on (l, l+1) with g(l) < 0 < g(l+1).
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * b.max(1.0) {
            break;
        }
    }
    let w = 0.5 * (a + b);
    w * w
}

/// Equality points of an entry, in increasing order, up to `x_max` (at most `limit` of them).
pub fn equality_points(id: &str, params: &BoundParams, x_max: f64, limit: usize) -> Result<Vec<EqualityPoint>> {
    let spec = lookup(id)?;
    spec.validate(params)?;
    equality_points_for(spec, params, x_max, limit)
        .ok_or_else(|| Error::Unsupported(format!("{} has no recorded equality points for {}", spec.id, params.space)))
}

fn equality_points_for(spec: &BoundSpec, params: &BoundParams, x_max: f64, limit: usize) -> Option<Vec<EqualityPoint>> {
    use BoundKind::*;
    let dim = params.space.dim();
    let gen = |side: Side, start: u64, f: &dyn Fn(u64) -> f64| -> Vec<EqualityPoint> {
        (start..)
            .map(|l| EqualityPoint { side, x: f(l) })
            .take_while(|e| e.x <= x_max)
            .take(limit)
            .collect()
    };
    let levels = |side: Side, start: u64| gen(side, start, &|l| (l * (l + 1)) as f64);
    let half_squares = |side: Side| gen(side, 0, &|l| ((l + 1) * (l + 1)) as f64 - 0.5);
    let origin = |side: Side| vec![EqualityPoint { side, x: 0.0 }];
    let pts = match spec.kind {
        S2R1Lower => levels(Side::Lower, 0),
        SdR1Lower | SdR1LowerShift | DomSdKrogerImp if dim == 2 => levels(Side::Lower, 0),
        S2R1LowerImp => levels(Side::Lower, 0),
        S2R1UpperImp => levels(Side::Upper, 0),
        S2R1Upper => half_squares(Side::Upper),
        SdR1UpperShift | DomSdBlyShift if dim == 2 => half_squares(Side::Upper),
        SdR1UpperShift | S1R1UpperShift if dim == 1 => gen(Side::Upper, 0, &s1_touching_point),
        Hemi2NdTwoSided => {
            let mut v = levels(Side::Lower, 0);
            v.extend(levels(Side::Upper, 0));
            v
        }
        Hemi2R1dLower => levels(Side::Lower, 1),
        Hemi2R1nLower => levels(Side::Lower, 0),
        LemBlys2 | DomS2pBlyImp | DomS2Buckling => half_squares(Side::Upper),
        LemBlys1 | DomS2pBly | DomS2pPoly23 | Hemi2PolyBly => origin(Side::Upper),
        SdR1Lower | SdR12Lower | DomSdNeuBihLower => origin(Side::Lower),
        SdR2TwoSided => origin(Side::Lower),
        SdAvgTwoSided if dim == 2 => gen(Side::Lower, 0, &|l| ((l + 1) * (l + 1)) as f64),
        _ => return None,
    };
    let mut pts = pts;
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.side.cmp(&b.side)));
    Some(pts)
}

/// Extra points where the documented counterexamples live.
fn witness_points(spec: &BoundSpec, params: &BoundParams, x_max: f64) -> Vec<f64> {
    use BoundKind::*;
    let d = f64::from(params.space.dim());
    let mut v = match spec.kind {
        FailHemiPolya => vec![d],
        FailR1pWeyl => (1..=60u64)
            .flat_map(|l| {
                let lf = l as f64;
                [lf * lf * (lf + 1.0).powi(2), (1.0 + lf).powi(2) * (2.0 + lf * (2.0 + lf))]
            })
            .collect(),
        FailS1Weyl => (0..=60u64)
            .flat_map(|l| {
                let c = l as f64 + 0.5;
                let r = 3f64.sqrt() / 6.0;
                [(c - r).powi(2), (c + r).powi(2)]
            })
            .collect(),
        FailSdR1LowerShifted => vec![d],
        _ => Vec::new(),
    };
    v.retain(|&x| x <= x_max);
    v
}

/// Optimal shift `b(l) = d/(d+2) (4^{-1/d} ((d+2l)(d+l-1)!/l!)^{2/d} - l(l+d))` on the gap
/// starting at level `l` of `S^d`; tends to `z_d` as `l` grows.
pub fn optimal_shift(d: u32, l: u64) -> f64 {
    let df = f64::from(d);
    let lf = l as f64;
    // ln((d+2l) (d+l-1)!/l!) = ln(d+2l) + sum_{j=l+1}^{l+d-1} ln j
    let log_num = (df + 2.0 * lf).ln() + ((l + 1)..(l + u64::from(d))).map(|j| (j as f64).ln()).sum::<f64>();
    let term = (-(2.0f64.ln() * 2.0) / df + 2.0 / df * log_num).exp();
    df / (df + 2.0) * (term - lf * (lf + df))
}

/// Shift `z_d = d(2d-1)/12`.
pub fn shift_zd(d: u32) -> f64 {
    z_d(f64::from(d))
}

/// How a caller picks the evaluation points of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridSpec {
    /// 2000 uniform points on `[0, lambda_(40)^p]` plus level endpoints, equality points and
    /// witness points (or `k = 1..=500` for averages).
    Standard,
    /// Explicit points (values of `z`, or of `k` for averages).
    Points(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub grid: GridSpec,
    pub tolerance: f64,
    /// Keep every evaluated point in the report.
    pub keep_points: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            grid: GridSpec::Standard,
            tolerance: DEFAULT_TOLERANCE,
            keep_points: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub side: Side,
    pub target: f64,
    pub bound: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideReport {
    pub side: Side,
    pub min_slack: Option<f64>,
    pub argmin: Option<f64>,
    pub violations: usize,
    pub first_violation: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityCheck {
    pub x: f64,
    pub side: Side,
    pub target: f64,
    pub bound: f64,
    pub slack: f64,
    pub ok: bool,
}

/// Smallest slack observed between two consecutive levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSlack {
    pub level: u64,
    pub side: Side,
    pub min_slack: f64,
    pub argmin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    pub target: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub id: String,
    pub space: String,
    pub p: u32,
    pub area: Option<f64>,
    pub quantity: Quantity,
    pub variable: Variable,
    pub expected_valid: bool,
    pub tolerance: f64,
    pub grid_points: usize,
    pub grid_max: f64,
    pub sides: Vec<SideReport>,
    pub equality_checks: Vec<EqualityCheck>,
    /// Grid points where a lower bound is negative (the bound is reported unclamped).
    pub negative_bound_points: usize,
    pub gap_minima: Vec<GapSlack>,
    /// The first violations in increasing `x` (at most 64).
    pub violations: Vec<Witness>,
    pub passed: bool,
    pub outcome: String,
    pub notes: Vec<String>,
    pub points: Option<Vec<ScanPoint>>,
}

fn standard_grid(spec: &BoundSpec, params: &BoundParams, tgt: &Target) -> Vec<f64> {
    if spec.variable == Variable::K {
        return (1..=STANDARD_K_MAX).map(|k| k as f64).collect();
    }
    let q = tgt.query;
    let top = BigUint::to_f64(&q.eigenvalue(STANDARD_GRID_LEVEL)).unwrap_or(f64::MAX);
    let n = STANDARD_GRID_POINTS;
    let mut v: Vec<f64> = (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect();
    v.extend((q.first_level()..=STANDARD_GRID_LEVEL).map(|l| BigUint::to_f64(&q.eigenvalue(l)).unwrap_or(f64::MAX)));
    if let Some(eq) = equality_points_for(spec, params, top, usize::MAX) {
        v.extend(eq.iter().map(|e| e.x));
    }
    v.extend(witness_points(spec, params, top));
    v
}

fn target_values(tgt: &Target, xs: &[f64], variable: Variable) -> Result<Vec<f64>> {
    let max = xs.iter().cloned().fold(0.0, f64::max);
    match (variable, tgt.gamma) {
        (Variable::K, _) | (_, None) => {
            let spec = Spectrum::until_count(tgt.query, &BigUint::from(max.max(1.0) as u64), DEFAULT_LEVEL_CAP)?;
            xs.iter()
                .map(|&k| {
                    let kb = BigUint::from(k as u64);
                    let ps = spec.prefix_sums(&kb).expect("table reaches k");
                    Ok(tgt.factor * crate::exact::uint_to_f64(&ps.sum1) / k)
                })
                .collect()
        }
        (Variable::Z, Some(gamma)) => {
            let spec = Spectrum::covering(tgt.query, max, DEFAULT_LEVEL_CAP)?;
            Ok(xs
                .par_iter()
                .map(|&z| if z < 0.0 { 0.0 } else { tgt.factor * spec.riesz(gamma, z) })
                .collect())
        }
    }
}

/// Checks an entry on a grid and reports slacks, violations and equality points.
pub fn verify(id: &str, params: &BoundParams, opts: &VerifyOptions) -> Result<ScanReport> {
    let spec = lookup(id)?;
    spec.validate(params)?;
    if !opts.tolerance.is_finite() || opts.tolerance <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let tgt = target(spec, params)?;
    let mut xs = match &opts.grid {
        GridSpec::Standard => standard_grid(spec, params, &tgt),
        GridSpec::Points(v) => v.clone(),
    };
    if xs.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Domain("grid points must be finite and nonnegative".into()));
    }
    if spec.variable == Variable::K && xs.iter().any(|&k| k < 1.0 || k.fract() != 0.0) {
        return Err(Error::Domain("average bounds need integer k >= 1".into()));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let grid_max = xs.last().copied().unwrap_or(0.0);
    let targets = target_values(&tgt, &xs, spec.variable)?;
    let tol = opts.tolerance;
    let lower: Vec<Option<f64>> = xs
        .par_iter()
        .map(|&x| spec.has_side(Side::Lower).then(|| eval_bound(spec, params, Side::Lower, x)))
        .collect();
    let upper: Vec<Option<f64>> = xs
        .par_iter()
        .map(|&x| spec.has_side(Side::Upper).then(|| eval_bound(spec, params, Side::Upper, x)))
        .collect();

    let level_of = |x: f64| -> u64 {
        match spec.variable {
            Variable::K => 0,
            Variable::Z => tgt.query.max_level(x).unwrap_or(0),
        }
    };
    let mut sides = Vec::new();
    let mut violations = Vec::new();
    let mut gap_minima: Vec<GapSlack> = Vec::new();
    let mut negative_bound_points = 0;
    for &side in spec.sides {
        let bounds = if side == Side::Lower { &lower } else { &upper };
        let mut rep = SideReport {
            side,
            min_slack: None,
            argmin: None,
            violations: 0,
            first_violation: None,
        };
        let mut gaps: Vec<GapSlack> = Vec::new();
        for (i, &x) in xs.iter().enumerate() {
            let b = bounds[i].expect("side evaluated");
            let t = targets[i];
            let slack = match side {
                Side::Lower => t - b,
                Side::Upper => b - t,
            };
            if side == Side::Lower && b < 0.0 {
                negative_bound_points += 1;
            }
            if rep.min_slack.is_none_or(|m| slack < m) {
                rep.min_slack = Some(slack);
                rep.argmin = Some(x);
            }
            if slack < -tol * b.abs().max(1.0) {
                rep.violations += 1;
                let w = Witness {
                    x,
                    side,
                    target: t,
                    bound: b,
                    slack,
                };
                if rep.first_violation.is_none() {
                    rep.first_violation = Some(w.clone());
                }
                violations.push(w);
            }
            let level = level_of(x);
            match gaps.last_mut() {
                Some(g) if g.level == level => {
                    if slack < g.min_slack {
                        g.min_slack = slack;
                        g.argmin = x;
                    }
                }
                _ => gaps.push(GapSlack {
                    level,
                    side,
                    min_slack: slack,
                    argmin: x,
                }),
            }
        }
        if spec.variable == Variable::Z {
            gap_minima.extend(gaps);
        }
        sides.push(rep);
    }
    violations.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.side.cmp(&b.side)));
    violations.truncate(64);

    let mut equality_checks = Vec::new();
    if spec.expected_valid {
        if let Some(eq) = equality_points_for(spec, params, grid_max, usize::MAX) {
            let ex: Vec<f64> = eq.iter().map(|e| e.x).collect();
            let et = target_values(&tgt, &ex, spec.variable)?;
            for (e, t) in eq.iter().zip(et) {
                let b = eval_bound(spec, params, e.side, e.x);
                let slack = match e.side {
                    Side::Lower => t - b,
                    Side::Upper => b - t,
                };
                let ok = slack.abs() <= tol * b.abs().max(1.0);
                equality_checks.push(EqualityCheck {
                    x: e.x,
                    side: e.side,
                    target: t,
                    bound: b,
                    slack,
                    ok,
                });
            }
        }
    }

    let mut notes = Vec::new();
    let (passed, outcome) = if spec.expected_valid {
        let total: usize = sides.iter().map(|s| s.violations).sum();
        let bad_eq = equality_checks.iter().filter(|e| !e.ok).count();
        if total == 0 && bad_eq == 0 {
            (true, "holds on the grid".to_string())
        } else {
            (false, format!("{total} violations and {bad_eq} failed equality points"))
        }
    } else {
        let missing: Vec<&str> = sides.iter().filter(|s| s.violations == 0).map(|s| s.side.keyword()).collect();
        if missing.is_empty() {
            (true, "counterexample found as expected".to_string())
        } else {
            (false, format!("no counterexample found on the {} side", missing.join(" and ")))
        }
    };
    if spec.kind == BoundKind::FailLiYau {
        let (lhs, rhs) = li_yau_numbers(params.space.dim());
        notes.push(format!("(d+2)^d = {lhs}, (d!)^2 = {rhs}"));
    }
    if negative_bound_points > 0 {
        notes.push(format!("lower bound negative at {negative_bound_points} grid points (not clamped)"));
    }
    if tgt.factor != 1.0 {
        notes.push(format!("compared against the whole-space quantity scaled by {}", tgt.factor));
    }
    let points = opts.keep_points.then(|| {
        xs.iter()
            .enumerate()
            .map(|(i, &x)| ScanPoint {
                x,
                target: targets[i],
                lower: lower[i],
                upper: upper[i],
            })
            .collect()
    });
    Ok(ScanReport {
        id: spec.id.to_string(),
        space: params.space.descriptor(),
        p: params.p,
        area: params.area,
        quantity: spec.quantity,
        variable: spec.variable,
        expected_valid: spec.expected_valid,
        tolerance: tol,
        grid_points: xs.len(),
        grid_max,
        sides,
        equality_checks,
        negative_bound_points,
        gap_minima,
        violations,
        passed,
        outcome,
        notes,
        points,
    })
}

/// `((d+2)^d, (d!)^2)`; the Li-Yau bound holds at `k = 1` on `S^d_+` iff the first is at least the second.
pub fn li_yau_numbers(d: u32) -> (BigUint, BigUint) {
    (BigUint::from(d + 2).pow(d), factorial(u64::from(d)).pow(2))
}

/// Average bound obtained from a Riesz-mean bound by Legendre duality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreBound {
    pub k: u64,
    /// Which side of the eigenvalue average the value bounds.
    pub average_side: Side,
    pub value: f64,
    pub z_star: f64,
    pub closed_form: bool,
}

/// Converts an `R_1` bound `B` into the bound `max_{z >= 0} (z - B(z)/k)` on the average of the
/// first `k` eigenvalues: a lower bound when `B` bounds `R_1` from above, an upper bound when
/// `B` bounds it from below.
pub fn legendre_average_bound(id: &str, params: &BoundParams, side: Option<Side>, k: u64) -> Result<LegendreBound> {
    use BoundKind::*;
    let spec = lookup(id)?;
    spec.validate(params)?;
    if spec.quantity != Quantity::R1 {
        return Err(Error::Unsupported(format!("{} does not bound R1", spec.id)));
    }
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let side = spec.resolve_side(side)?;
    let average_side = match side {
        Side::Upper => Side::Lower,
        Side::Lower => Side::Upper,
    };
    let kf = k as f64;
    let d = f64::from(params.space.dim());
    // Pure powers c (z + s)^a have a closed-form maximiser.
    let power_form = match spec.kind {
        S2R1Lower => Some((0.5, 0.0, 2.0)),
        S2R1Upper => Some((0.5, 0.5, 2.0)),
        SdR1Lower | HemiDBly345 => Some((eval_bound(spec, params, side, 1.0), 0.0, 1.0 + d / 2.0)),
        SdR1UpperShift | S1R1UpperShift => {
            let c = weyl_coefficient(&params.space, 1, 1)?;
            Some((c, z_d(d), 1.0 + d / 2.0))
        }
        LemBlys1 => Some((0.5, 0.0, 2.0)),
        DomSdBlyShift => Some((
            lclass(1, params.space.dim(), 1)?.value * params.area.unwrap_or(0.0),
            z_d(d),
            1.0 + d / 2.0,
        )),
        SdR12Lower => Some((eval_bound(spec, params, side, 1.0), 0.0, 1.0 + d / 4.0)),
        Hemi2PolyBly => {
            let p = f64::from(params.p);
            Some((p / (2.0 * (p + 1.0)), 0.0, 1.0 + 1.0 / p))
        }
        _ => None,
    };
    if let Some((c, s, a)) = power_form {
        if c > 0.0 && a > 1.0 {
            let u = (kf / (c * a)).powf(1.0 / (a - 1.0));
            let (value, z_star) = if u >= s {
                (u * (1.0 - 1.0 / a) - s, u - s)
            } else {
                (-c * s.powf(a) / kf, 0.0)
            };
            return Ok(LegendreBound {
                k,
                average_side,
                value,
                z_star,
                closed_form: true,
            });
        }
    }
    let f = |z: f64| z - eval_bound(spec, params, side, z) / kf;
    let mut hi = 1.0;
    while f(hi) > -hi && hi < 1e15 {
        hi *= 2.0;
    }
    let n = 4096;
    let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
    for i in 0..=n {
        let v = f(hi * i as f64 / n as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let step = hi / n as f64;
    let (mut a, mut b) = ((best_i as f64 - 1.0).max(0.0) * step, (best_i as f64 + 1.0) * step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    while (b - a) > 1e-10 * b.max(1.0) {
        if f(c) > f(e) {
            b = e;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        e = a + g * (b - a);
    }
    let z_star = 0.5 * (a + b);
    let value = f(z_star).max(best);
    Ok(LegendreBound {
        k,
        average_side,
        value,
        z_star,
        closed_form: false,
    })
}

/// Diagnostics of the per-gap maximum of `R_1^D / (L_{1,d}|S^d_+| z^{1+d/2})` on `S^d_+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bly345Gap {
    /// Gap `[lambda_(L), lambda_(L+1)]`.
    pub level: u64,
    /// Critical point `(L+d)(L + 1/(d+1))`.
    pub z_star: f64,
    /// `x_L`, the critical point in the shifted variable with `z = (x+L)(x+L+d-1)`.
    pub x_l: f64,
    /// Ratio at the critical point from the closed form.
    pub f_at_x: f64,
    /// Ratio at the left end of the gap from the closed form.
    pub f_at_0: f64,
    /// Ratio at the critical point evaluated by brute force.
    pub brute_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bly345Report {
    pub d: u32,
    pub gaps: Vec<Bly345Gap>,
    pub max_ratio: f64,
    pub first_failure: Option<u64>,
    pub holds: bool,
}

/// Gap-by-gap check of the Weyl upper bound for `R_1^D` on `S^d_+`, valid for any `d >= 2`.
pub fn bly345_check(d: u32, l_max: u64) -> Result<Bly345Report> {
    let space = Space::hemisphere_dirichlet(d)?;
    if l_max == 0 {
        return Err(Error::Domain("l_max must be at least 1".into()));
    }
    let df = f64::from(d);
    let coeff = weyl_coefficient(&space, 1, 1)?;
    let q = SpectrumQuery::laplacian(space);
    let top = (l_max + d as u64 + 1) as f64 * (l_max as f64 + 1.0);
    let spec = Spectrum::covering(q, top, DEFAULT_LEVEL_CAP)?;
    let mut gaps = Vec::new();
    for l in 1..=l_max {
        let lf = l as f64;
        let z_star = (lf + df) * (lf + 1.0 / (df + 1.0));
        let h = (df - 1.0) / 2.0;
        let x_l = -h - lf + (h * h + z_star).sqrt();
        let num: f64 = (0..d).map(|k| (lf + f64::from(k)).ln()).sum();
        let f_at_x = (num - df / 2.0 * ((lf + df) * (lf + 1.0 / (df + 1.0))).ln()).exp();
        let num0: f64 = (1..d.saturating_sub(1)).map(|k| (lf + f64::from(k)).ln()).sum::<f64>()
            + (lf - 1.0).ln()
            + (lf + df * df / (2.0 * (df + 1.0))).ln();
        let f_at_0 = (num0 - df / 2.0 * (lf * (lf + df - 1.0)).ln()).exp();
        let brute_ratio = spec.riesz(1, z_star) / (coeff * z_star.powf(1.0 + df / 2.0));
        gaps.push(Bly345Gap {
            level: l,
            z_star,
            x_l,
            f_at_x,
            f_at_0,
            brute_ratio,
        });
    }
    let max_ratio = gaps.iter().map(|g| g.brute_ratio.max(g.f_at_x)).fold(0.0, f64::max);
    let first_failure = gaps.iter().find(|g| g.f_at_x > 1.0 || g.brute_ratio > 1.0).map(|g| g.level);
    Ok(Bly345Report {
        d,
        gaps,
        max_ratio,
        first_failure,
        holds: first_failure.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(id: &str) -> BoundParams {
        lookup(id).unwrap().default_params()
    }

    #[test]
    fn catalog_ids_are_unique() {
        let mut ids: Vec<&str> = catalog().iter().map(|b| b.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), catalog().len());
        assert!(lookup("fail.hemi.polya.d>=3").is_ok());
        assert!(matches!(lookup("nope"), Err(Error::UnknownBound(_))));
    }

    #[test]
    fn value_examples() {
        let s2 = lookup("sd.r1.upper.shift")
            .unwrap()
            .params(Some(Space::sphere(2).unwrap()), None, None)
            .unwrap();
        assert!((bound_value("sd.r1.upper.shift", &s2, None, 2.0).unwrap() - 3.125).abs() < 1e-12);
        assert!(bound_value("hemi2.r1d.lower", &params("hemi2.r1d.lower"), None, 2.0).unwrap().abs() < 1e-12);
        let dom = lookup("dom.s2p.bly").unwrap().params(None, None, Some(2.0 * PI)).unwrap();
        assert!((bound_value("dom.s2p.bly", &dom, None, 4.0).unwrap() - 4.0).abs() < 1e-12);
        let avg = params("sd.avg.twosided");
        assert!(bound_value("sd.avg.twosided", &avg, Some(Side::Lower), 1.0).unwrap().abs() < 1e-12);
        assert!(bound_value("sd.avg.twosided", &avg, None, 1.0).is_err());
        let bly = lookup("hemi.d.bly345").unwrap();
        assert!(matches!(
            bly.params(Some(Space::hemisphere_dirichlet(6).unwrap()), None, None),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn exact_values() {
        let p = params("s2.r1.upper");
        assert_eq!(bound_value_exact("s2.r1.upper", &p, None, &rat_int(2)).unwrap(), Some(rat(25, 8)));
    }

    #[test]
    fn equality_examples() {
        let up = equality_points("s2.r1.upper", &params("s2.r1.upper"), 10.0, 10).unwrap();
        assert_eq!(up.iter().map(|e| e.x).collect::<Vec<_>>(), vec![0.5, 3.5, 8.5]);
        let lo = equality_points("s2.r1.lower", &params("s2.r1.lower"), 13.0, 10).unwrap();
        assert_eq!(lo.iter().map(|e| e.x).collect::<Vec<_>>(), vec![0.0, 2.0, 6.0, 12.0]);
        assert!(equality_points("hemi2.r1d.upper", &params("hemi2.r1d.upper"), 10.0, 10).is_err());
        for l in 0..20u64 {
            let lf = l as f64;
            assert!((s1_touching_point(l) - (lf * lf + lf + 1.0 / 6.0)).abs() < 1e-12 * (1.0 + lf * lf));
        }
    }

    #[test]
    fn optimal_shift_converges() {
        for d in 2..=6 {
            assert!((optimal_shift(d, 50) - shift_zd(d)).abs() < 0.05);
        }
        assert!((optimal_shift(2, 7) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn legendre_examples() {
        let s2 = lookup("sd.r1.upper.shift")
            .unwrap()
            .params(Some(Space::sphere(2).unwrap()), None, None)
            .unwrap();
        let b = legendre_average_bound("sd.r1.upper.shift", &s2, None, 1).unwrap();
        assert!(b.value.abs() < 1e-12 && b.average_side == Side::Lower);
        let s2l = lookup("sd.r1.lower")
            .unwrap()
            .params(Some(Space::sphere(2).unwrap()), None, None)
            .unwrap();
        let b = legendre_average_bound("sd.r1.lower", &s2l, None, 4).unwrap();
        assert!((b.value - 2.0).abs() < 1e-12 && b.average_side == Side::Upper);
        assert!(legendre_average_bound("sd.r1.lower", &s2l, None, 0).is_err());
        assert!(legendre_average_bound("hemi2.nd.polya", &params("hemi2.nd.polya"), None, 3).is_err());
        // the numerical path agrees with the closed form
        let lo = legendre_average_bound("s2.r1.lower.imp", &params("s2.r1.lower.imp"), None, 9).unwrap();
        assert!(!lo.closed_form && lo.value >= 2.0 * 9.0 / 9.0 - 1e-9);
    }

    #[test]
    fn li_yau_numbers_d6() {
        let (a, b) = li_yau_numbers(6);
        assert_eq!(a, BigUint::from(262_144u32));
        assert_eq!(b, BigUint::from(518_400u32));
    }
}
