use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Generalized bell `1 / (1 + |(x − r)/p|^(2q))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct BellMF {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl BellMF {
    pub const fn new(p: f64, q: f64, r: f64) -> Self {
        Self { p, q, r }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.p > 0.0 && self.q > 0.0 && self.r.is_finite() && self.p.is_finite() && self.q.is_finite(),
            || format!("bell MF needs p > 0, q > 0, finite r; got {self:?}"),
        )
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        bell(x, self)
    }
}

impl From<[f64; 3]> for BellMF {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<BellMF> for [f64; 3] {
    fn from(m: BellMF) -> Self {
        [m.p, m.q, m.r]
    }
}

#[inline]
pub fn bell(x: f64, mf: &BellMF) -> f64 {
    let z = ((x - mf.r) / mf.p).abs();
    1.0 / (1.0 + z.powf(2.0 * mf.q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "NMIN")]
    NMin,
    NL,
    NM,
    NS,
    Small,
    PS,
    PM,
    PL,
    #[serde(rename = "PMAX")]
    PMax,
}

impl Level {
    pub const ALL: [Level; 9] = [
        Level::NMin,
        Level::NL,
        Level::NM,
        Level::NS,
        Level::Small,
        Level::PS,
        Level::PM,
        Level::PL,
        Level::PMax,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(i: usize) -> Option<Level> {
        Self::ALL.get(i).copied()
    }

    /// Reflection about `Small`.
    pub fn mirror(self) -> Level {
        Self::ALL[8 - self.ordinal()]
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::NMin => "NMIN",
            Level::NL => "NL",
            Level::NM => "NM",
            Level::NS => "NS",
            Level::Small => "Small",
            Level::PS => "PS",
            Level::PM => "PM",
            Level::PL => "PL",
            Level::PMax => "PMAX",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Level> {
        let s = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown linguistic level {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyVariable {
    pub name: String,
    pub universe: (f64, f64),
    pub mfs: [BellMF; 9],
}

impl FuzzyVariable {
    /// Universe spans the outermost centers widened by their half-widths.
    pub fn new(name: impl Into<String>, mfs: [BellMF; 9]) -> Result<Self> {
        for m in &mfs {
            m.validate()?;
        }
        let lo = mfs.iter().min_by(|a, b| a.r.total_cmp(&b.r)).unwrap();
        let hi = mfs.iter().max_by(|a, b| a.r.total_cmp(&b.r)).unwrap();
        Ok(Self {
            name: name.into(),
            universe: (lo.r - lo.p, hi.r + hi.p),
            mfs,
        })
    }

    pub fn with_universe(name: impl Into<String>, mfs: [BellMF; 9], universe: (f64, f64)) -> Result<Self> {
        let mut v = Self::new(name, mfs)?;
        ensure(universe.0 < universe.1, || format!("empty universe {universe:?}"))?;
        v.universe = universe;
        Ok(v)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.universe.0, self.universe.1)
    }

    pub fn memberships(&self, x: f64) -> [f64; 9] {
        let x = self.clamp(x);
        std::array::from_fn(|i| bell(x, &self.mfs[i]))
    }

    pub fn mf(&self, l: Level) -> &BellMF {
        &self.mfs[l.ordinal()]
    }

    /// Position of a level's center inside the universe, mapped to `[-1, 1]`
    /// and taken in absolute value.
    pub fn center_magnitude(&self, l: Level) -> f64 {
        let (lo, hi) = self.universe;
        (2.0 * (self.mf(l).r - lo) / (hi - lo) - 1.0).abs()
    }
}

macro_rules! mfs {
    ($([$p:expr, $q:expr, $r:expr]),* $(,)?) => { [$(BellMF::new($p, $q, $r)),*] };
}

pub const VELOCITY_MFS: [BellMF; 9] = mfs![
    [0.1575, 2.5, -1.0],
    [0.1575, 2.5, 0.685],
    [0.1575, 2.5, -0.37],
    [0.1575, 2.5, -0.055],
    [0.1575, 2.5, 0.26],
    [0.1575, 2.5, 0.575],
    [0.1575, 2.5, 0.89],
    [0.1575, 2.5, 1.205],
    [0.1575, 2.5, 1.52],
];

pub const ACCELERATION_MFS: [BellMF; 9] = mfs![
    [1.188, 2.499, -9.0],
    [1.188, 2.5, 0.65],
    [1.188, 2.5, -4.25],
    [1.188, 2.5, -1.875],
    [1.188, 2.5, 0.5],
    [1.188, 2.5, 2.875],
    [1.188, 2.5, 5.25],
    [1.188, 2.5, 7.625],
    [1.188, 2.501, 10.0],
];

pub const DISTORTION_MFS: [BellMF; 9] = mfs![
    [0.0338, 2.5, 0.0193],
    [0.0376, 2.5, 0.0944],
    [0.0535, 2.2, 0.187],
    [0.0619, 2.5, 0.2803],
    [0.0528, 2.5, 0.3912],
    [0.0534, 2.5, 0.4995],
    [0.0493, 2.84, 0.6025],
    [0.0403, 2.5, 0.6972],
    [0.0458, 2.5, 0.7815],
];

pub const FORCE_MFS: [BellMF; 9] = mfs![
    [21.88, 2.5, 0.0],
    [21.88, 2.5, 43.75],
    [21.88, 2.5, 87.5],
    [21.88, 2.5, 131.3],
    [21.88, 2.5, 175.0],
    [21.88, 2.5, 218.8],
    [21.9, 2.5, 263.0],
    [21.88, 2.5, 306.3],
    [21.88, 2.5, 350.0],
];
