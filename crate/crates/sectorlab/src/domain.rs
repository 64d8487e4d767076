//! Geometry of planar sector / annular-sector domains and the Cartesian
//! rectangle, boundary-piece classification, and the angular reflection.
//!
//! Angles are kept unwrapped on the real line (the flat manifold with
//! metric `dr^2 + r^2 dt^2`), so a reflection may produce angles outside
//! `[0, beta]` without any overlap ambiguity even for openings beyond pi.
//! Wrapping, when needed at all, is a presentation concern.

use crate::error::{Error, Result};

/// Sector `r in (r_inner, r_outer), theta in (0, beta)`.
///
/// `r_inner = 0` is the disc sector whose vertex is the coordinate
/// singularity; grids exclude it by staggering the first radial node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorDomain {
    pub r_inner: f64,
    pub r_outer: f64,
    pub beta: f64,
}

impl SectorDomain {
    pub fn new(r_inner: f64, r_outer: f64, beta: f64) -> Result<Self> {
        if !(r_inner.is_finite() && r_outer.is_finite() && beta.is_finite()) {
            return Err(Error::invalid("sector parameters must be finite"));
        }
        if r_inner < 0.0 || r_inner >= r_outer {
            return Err(Error::invalid(format!(
                "need 0 <= r_inner < r_outer, got r_inner={r_inner}, r_outer={r_outer}"
            )));
        }
        if !(beta > 0.0 && beta < 2.0 * std::f64::consts::PI) {
            return Err(Error::invalid(format!(
                "opening angle must lie in (0, 2*pi), got {beta}"
            )));
        }
        Ok(SectorDomain {
            r_inner,
            r_outer,
            beta,
        })
    }

    /// Disc sector: no inner arc, the vertex sits on the axis set.
    pub fn is_disc(&self) -> bool {
        self.r_inner == 0.0
    }
}

/// Rectangle `(0, beta) x (0, width)`: Neumann ends at `x1 = 0, beta`,
/// Dirichlet long sides at `x2 = 0, width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectDomain {
    /// Length in the translation-invariant direction (plays the role of the opening).
    pub beta: f64,
    /// Cross-section interval length.
    pub width: f64,
}

impl RectDomain {
    pub fn new(beta: f64, width: f64) -> Result<Self> {
        if !(beta > 0.0 && width > 0.0 && beta.is_finite() && width.is_finite()) {
            return Err(Error::invalid(format!(
                "rectangle sides must be positive, got beta={beta}, width={width}"
            )));
        }
        Ok(RectDomain { beta, width })
    }
}

/// Point in cylindrical coordinates with unwrapped angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylCoord {
    pub r: f64,
    pub theta: f64,
}

impl CylCoord {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite() && theta.is_finite()) {
            return Err(Error::invalid(format!(
                "cylindrical point needs r > 0 and finite theta, got r={r}, theta={theta}"
            )));
        }
        Ok(CylCoord { r, theta })
    }
}

/// Reflection about the ray `theta = alpha`: `(r, theta) -> (r, 2*alpha - theta)`.
///
/// An involution that preserves `r` exactly.
pub fn reflect(alpha: f64, p: CylCoord) -> CylCoord {
    CylCoord {
        r: p.r,
        theta: 2.0 * alpha - p.theta,
    }
}

/// Pieces of the boundary of a sector-like domain or rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPiece {
    /// Radial edge at the given angle (Neumann in the mixed problem).
    GammaTheta(f64),
    /// Outer circular arc (Dirichlet).
    ArcOuter,
    /// Inner circular arc (Dirichlet, absent for disc sectors).
    ArcInner,
    /// Long Dirichlet side of the rectangle.
    DirichletSide,
    /// Short Neumann end of the rectangle.
    NeumannEnd,
}

/// Where a point sits relative to a domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Boundary(BoundaryPiece),
    Interior,
    Exterior,
}

/// Classifies a point against the sector boundary with tolerance band `tol`.
///
/// Corner points (arc meets radial edge within `tol`) resolve to the
/// Dirichlet arc: ties go to the piece whose nodes get eliminated during
/// assembly, so classification and elimination agree.
pub fn classify_boundary(dom: &SectorDomain, p: &CylCoord, tol: f64) -> Result<Location> {
    if !(tol > 0.0) {
        return Err(Error::invalid("classification tolerance must be positive"));
    }
    let on_outer = (p.r - dom.r_outer).abs() <= tol;
    let on_inner = !dom.is_disc() && (p.r - dom.r_inner).abs() <= tol;
    let on_gamma0 = p.theta.abs() <= tol / p.r.max(tol);
    let on_gammab = (p.theta - dom.beta).abs() <= tol / p.r.max(tol);
    let in_r = p.r > dom.r_inner - tol && p.r < dom.r_outer + tol;
    let in_theta = p.theta > -tol && p.theta < dom.beta + tol;

    if !(in_r && in_theta) {
        return Ok(Location::Exterior);
    }
    // Dirichlet arcs win corner ties.
    if on_outer {
        return Ok(Location::Boundary(BoundaryPiece::ArcOuter));
    }
    if on_inner {
        return Ok(Location::Boundary(BoundaryPiece::ArcInner));
    }
    if on_gamma0 {
        return Ok(Location::Boundary(BoundaryPiece::GammaTheta(0.0)));
    }
    if on_gammab {
        return Ok(Location::Boundary(BoundaryPiece::GammaTheta(dom.beta)));
    }
    Ok(Location::Interior)
}
