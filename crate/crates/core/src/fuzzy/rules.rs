use std::io::{BufRead, Write};

use super::membership::{FuzzyVariable, Level, ACCELERATION_MFS, DISTORTION_MFS, VELOCITY_MFS};
use crate::error::{Error, Result};

use Level::*;

/// The thirteen rules stated explicitly: `(velocity, acceleration, distortion) -> force`.
pub const PRINTED_RULES: [((Level, Level, Level), Level); 13] = [
    ((NL, NMin, PMax), PL),
    ((NM, NMin, PMax), PM),
    ((NS, NMin, NMin), PS),
    ((PS, NM, PL), PM),
    ((PM, NMin, PM), PS),
    ((PL, NL, NMin), PL),
    ((NMin, NMin, NMin), PMax),
    ((PL, NS, PL), NL),
    ((PL, Small, PS), NL),
    ((NMin, PS, NM), PL),
    ((Small, NMin, NMin), PS),
    ((PMax, NS, NMin), NL),
    ((PMax, PMax, PMax), NMin),
];

/// Dense 9×9×9 rule table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleBase {
    table: [Level; 729],
}

#[inline]
fn index(v: Level, a: Level, d: Level) -> usize {
    (v.ordinal() * 9 + a.ordinal()) * 9 + d.ordinal()
}

impl RuleBase {
    pub const LEN: usize = 729;

    pub fn uniform(out: Level) -> Self {
        Self { table: [out; 729] }
    }

    pub fn get(&self, v: Level, a: Level, d: Level) -> Level {
        self.table[index(v, a, d)]
    }

    pub fn set(&mut self, v: Level, a: Level, d: Level, out: Level) {
        self.table[index(v, a, d)] = out;
    }

    /// Consequent ordinals in `(v, a, d)` row-major order.
    pub fn ordinals(&self) -> [u8; 729] {
        std::array::from_fn(|i| self.table[i] as u8)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Level, Level, Level), Level)> + '_ {
        self.table.iter().enumerate().map(|(i, &o)| {
            let v = Level::ALL[i / 81];
            let a = Level::ALL[(i / 9) % 9];
            let d = Level::ALL[i % 9];
            ((v, a, d), o)
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "vel_level,acc_level,dist_level,out_level")?;
        for ((v, a, d), o) in self.iter() {
            writeln!(w, "{v},{a},{d},{o}")?;
        }
        Ok(())
    }

    /// Reads a complete table; every one of the 729 keys must appear exactly once.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Csv("empty rule file".into()))??;
        if header.trim() != "vel_level,acc_level,dist_level,out_level" {
            return Err(Error::Csv(format!("unexpected rule header {header:?}")));
        }
        let mut seen = [false; 729];
        let mut rb = RuleBase::uniform(Small);
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Csv(format!("row {}: expected 4 columns", n + 2)));
            }
            let lv = |s: &str| {
                s.parse::<Level>()
                    .map_err(|e| Error::Csv(format!("row {}: {e}", n + 2)))
            };
            let (v, a, d, o) = (lv(cols[0])?, lv(cols[1])?, lv(cols[2])?, lv(cols[3])?);
            let i = index(v, a, d);
            if seen[i] {
                return Err(Error::Csv(format!("row {}: duplicate rule ({v}, {a}, {d})", n + 2)));
            }
            seen[i] = true;
            rb.table[i] = o;
        }
        let missing = seen.iter().filter(|s| !**s).count();
        if missing > 0 {
            return Err(Error::Csv(format!(
                "rule table incomplete: {missing} of 729 keys missing"
            )));
        }
        Ok(rb)
    }
}

/// Rule base for the default membership functions.
pub fn build_rule_base() -> RuleBase {
    let v = FuzzyVariable::new("velocity", VELOCITY_MFS).expect("default velocity MFs");
    let a = FuzzyVariable::new("acceleration", ACCELERATION_MFS).expect("default acceleration MFs");
    let d = FuzzyVariable::new("distortion", DISTORTION_MFS).expect("default distortion MFs");
    build_rule_base_for(&v, &a, &d)
}

/// Fills the table from the acceleration-driven policy and then applies
/// [`PRINTED_RULES`].
///
/// An acceleration level is in the middle band when its center lies between
/// the NS and PS centers. Outside that band the force level mirrors the
/// acceleration level. Inside it the force mirrors whichever of velocity or
/// distortion sits further from the middle of its universe; ties go to
/// distortion.
pub fn build_rule_base_for(vel: &FuzzyVariable, acc: &FuzzyVariable, dist: &FuzzyVariable) -> RuleBase {
    let band = (acc.mf(NS).r, acc.mf(PS).r);
    let mut rb = RuleBase::uniform(Small);
    for a in Level::ALL {
        let ca = acc.mf(a).r;
        let middle = band.0 <= ca && ca <= band.1;
        for v in Level::ALL {
            for d in Level::ALL {
                let out = if !middle {
                    a.mirror()
                } else if vel.center_magnitude(v) > dist.center_magnitude(d) {
                    v.mirror()
                } else {
                    d.mirror()
                };
                rb.set(v, a, d, out);
            }
        }
    }
    for ((v, a, d), o) in PRINTED_RULES {
        rb.set(v, a, d, o);
    }
    rb
}
