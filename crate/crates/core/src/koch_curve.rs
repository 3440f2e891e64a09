//! Parametrisation of the von Koch curve on the unit base segment.
//!
//! The curve is the attractor of four similitudes. A parameter `u` in `[0, 1]`
//! is read as a quaternary address: each base-4 digit picks one of the four
//! maps, so equal parameter intervals carry equal mass. After `depth` digits
//! the remaining fraction is placed linearly along the deepest segment.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Largest supported construction depth (`4^12 + 1` vertices).
pub const MAX_DEPTH: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub const ORIGIN: PlanePoint = PlanePoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance_to(&self, other: &PlanePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn scaled(&self, factor: f64) -> PlanePoint {
        PlanePoint::new(self.x * factor, self.y * factor)
    }

    fn from_complex(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }
}

/// Generator of a four-map self-similar curve from `(0,0)` to `(1,0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// The von Koch curve, dimension `log 4 / log 3`.
    VonKoch,
    /// The unit segment cut into four equal pieces, dimension 1. Used as the
    /// Euclidean control case.
    StraightLine,
}

/// An affine map `z -> scale * z + shift` of the complex plane.
#[derive(Debug, Clone, Copy)]
struct Similitude {
    scale: Complex64,
    shift: Complex64,
}

impl CurveKind {
    /// Linear contraction ratio of each of the four maps.
    pub fn contraction(self) -> f64 {
        match self {
            CurveKind::VonKoch => 1.0 / 3.0,
            CurveKind::StraightLine => 0.25,
        }
    }

    /// Similarity dimension `log 4 / log(1/r)`.
    pub fn dimension(self) -> f64 {
        match self {
            CurveKind::VonKoch => 4f64.ln() / 3f64.ln(),
            CurveKind::StraightLine => 1.0,
        }
    }

    fn maps(self) -> [Similitude; 4] {
        match self {
            CurveKind::VonKoch => {
                let third = 1.0 / 3.0;
                let up = Complex64::from_polar(third, std::f64::consts::FRAC_PI_3);
                let down = Complex64::from_polar(third, -std::f64::consts::FRAC_PI_3);
                let apex = Complex64::new(0.5, 3f64.sqrt() / 6.0);
                [
                    Similitude {
                        scale: Complex64::new(third, 0.0),
                        shift: Complex64::new(0.0, 0.0),
                    },
                    Similitude {
                        scale: up,
                        shift: Complex64::new(third, 0.0),
                    },
                    Similitude {
                        scale: down,
                        shift: apex,
                    },
                    Similitude {
                        scale: Complex64::new(third, 0.0),
                        shift: Complex64::new(2.0 * third, 0.0),
                    },
                ]
            }
            CurveKind::StraightLine => {
                let quarter = Complex64::new(0.25, 0.0);
                [0.0, 0.25, 0.5, 0.75].map(|s| Similitude {
                    scale: quarter,
                    shift: Complex64::new(s, 0.0),
                })
            }
        }
    }
}

/// A depth-bounded parametrisation `u -> w(u)` of a self-similar curve on
/// `[0, 1]` with `w(0) = (0,0)` and `w(1) = (1,0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractalCurve {
    kind: CurveKind,
    depth: u32,
    alpha: f64,
}

/// The von Koch curve at the given construction depth.
pub fn build_curve(depth: u32) -> Result<FractalCurve> {
    FractalCurve::new(CurveKind::VonKoch, depth)
}

impl FractalCurve {
    pub fn new(kind: CurveKind, depth: u32) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::Capacity(format!(
                "curve depth {depth} exceeds the supported maximum {MAX_DEPTH}"
            )));
        }
        Ok(Self {
            kind,
            depth,
            alpha: kind.dimension(),
        })
    }

    /// The straight unit segment (α = 1) with a quaternary parametrisation.
    pub fn straight_line(depth: u32) -> Result<Self> {
        Self::new(CurveKind::StraightLine, depth)
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// γ-dimension of the curve.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn contraction(&self) -> f64 {
        self.kind.contraction()
    }

    pub fn origin(&self) -> PlanePoint {
        PlanePoint::ORIGIN
    }

    /// Number of deepest-level segments, `4^depth`.
    pub fn segment_count(&self) -> u64 {
        1u64 << (2 * self.depth)
    }

    pub fn vertex_count(&self) -> u64 {
        self.segment_count() + 1
    }

    /// `w(u)` by base-4 digit descent; `u` need not be grid aligned.
    pub fn point_at(&self, u: f64) -> Result<PlanePoint> {
        check_parameter(u)?;
        Ok(self.descend(u))
    }

    /// `|w(u)|`, the Euclidean distance from the start point `w(0)`.
    pub fn euclidean_distance(&self, u: f64) -> Result<f64> {
        Ok(self.point_at(u)?.norm())
    }

    pub(crate) fn descend(&self, u: f64) -> PlanePoint {
        let maps = self.kind.maps();
        let mut scale = Complex64::new(1.0, 0.0);
        let mut shift = Complex64::new(0.0, 0.0);
        let mut x = u;
        for _ in 0..self.depth {
            let digit = ((x * 4.0).floor() as usize).min(3);
            x = x * 4.0 - digit as f64;
            let map = maps[digit];
            shift += scale * map.shift;
            scale *= map.scale;
        }
        PlanePoint::from_complex(scale * x + shift)
    }

    /// The `4^depth + 1` vertices of the construction, built by repeatedly
    /// replacing every segment with its four images. Independent of
    /// [`FractalCurve::point_at`].
    pub fn vertices(&self) -> Vec<PlanePoint> {
        let maps = self.kind.maps();
        let mut chain = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        for _ in 0..self.depth {
            let mut next = Vec::with_capacity(4 * (chain.len() - 1) + 1);
            for pair in chain.windows(2) {
                let (p, q) = (pair[0], pair[1]);
                let d = q - p;
                next.push(p);
                // Interior vertices are images of (1,0) under the first three maps.
                for map in &maps[..3] {
                    next.push(p + d * (map.scale + map.shift));
                }
            }
            next.push(*chain.last().expect("chain is never empty"));
            chain = next;
        }
        chain.into_iter().map(PlanePoint::from_complex).collect()
    }
}

fn check_parameter(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        domain(format!("curve parameter u = {u} outside [0, 1]"))
    }
}
