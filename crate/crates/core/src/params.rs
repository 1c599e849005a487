//! Deformation parameters of a spec: the coefficients x_k, y_l that the
//! hierarchies use as times.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::epd::{SolutionSpec, SpecKind};
use crate::error::{EpdError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    MonomialX,
    MonomialY,
    InverseX,
    InverseY,
    DeltaX,
    DeltaY,
}

impl Family {
    fn prefix(self) -> &'static str {
        match self {
            Family::MonomialX => "monomial-x",
            Family::MonomialY => "monomial-y",
            Family::InverseX => "inverse-x",
            Family::InverseY => "inverse-y",
            Family::DeltaX => "delta-x",
            Family::DeltaY => "delta-y",
        }
    }

    fn is_x(self) -> bool {
        matches!(self, Family::MonomialX | Family::InverseX | Family::DeltaX)
    }
}

/// One coefficient of a spec. Monomial `x` indices start at 1 and `y` at 0;
/// inverse-power indices start at 1; delta indices count points from 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowLabel {
    pub family: Family,
    pub index: usize,
}

impl FlowLabel {
    pub fn new(family: Family, index: usize) -> Self {
        FlowLabel { family, index }
    }

    pub fn x(k: usize) -> Self {
        FlowLabel::new(Family::MonomialX, k)
    }

    pub fn y(k: usize) -> Self {
        FlowLabel::new(Family::MonomialY, k)
    }

    /// Parses either `family:index` or the short forms `x2`, `y0`, which are
    /// resolved against the variant of `spec`.
    pub fn parse_for(s: &str, spec: &SolutionSpec) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') {
            return s.parse();
        }
        let bad = || EpdError::Parse(format!("unrecognised flow label '{s}'"));
        let (head, rest) = s.split_at(1.min(s.len()));
        let index: usize = rest.parse().map_err(|_| bad())?;
        let x = match head {
            "x" => true,
            "y" => false,
            _ => return Err(bad()),
        };
        let family = match (&spec.kind, x) {
            (SpecKind::Monomial { .. }, true) => Family::MonomialX,
            (SpecKind::Monomial { .. }, false) => Family::MonomialY,
            (SpecKind::InversePower { .. }, true) => Family::InverseX,
            (SpecKind::InversePower { .. }, false) => Family::InverseY,
            (SpecKind::Delta { .. }, true) => Family::DeltaX,
            (SpecKind::Delta { .. }, false) => Family::DeltaY,
            (SpecKind::Sampled { .. }, _) => {
                return Err(EpdError::InvalidSpec("sampled specs have no flow parameters".into()))
            }
        };
        Ok(FlowLabel { family, index })
    }
}

impl fmt::Display for FlowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family.prefix(), self.index)
    }
}

impl FromStr for FlowLabel {
    type Err = EpdError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || EpdError::Parse(format!("unrecognised flow label '{s}'"));
        let (fam, idx) = s.split_once(':').ok_or_else(bad)?;
        let family = [
            Family::MonomialX,
            Family::MonomialY,
            Family::InverseX,
            Family::InverseY,
            Family::DeltaX,
            Family::DeltaY,
        ]
        .into_iter()
        .find(|f| f.prefix() == fam.trim())
        .ok_or_else(bad)?;
        let index = idx.trim().parse().map_err(|_| bad())?;
        Ok(FlowLabel { family, index })
    }
}

fn mismatch(label: FlowLabel) -> EpdError {
    EpdError::InvalidSpec(format!("flow label {label} does not apply to this spec variant"))
}

/// Position of the label's coefficient inside the spec's storage.
fn slot(label: FlowLabel) -> Result<usize> {
    let min = match label.family {
        Family::MonomialY | Family::DeltaX | Family::DeltaY => 0,
        _ => 1,
    };
    if label.index < min {
        return Err(EpdError::InvalidSpec(format!("flow label {label} is out of range")));
    }
    Ok(label.index - min)
}

impl SolutionSpec {
    /// Current value of a coefficient; absent polynomial terms read as 0.
    pub fn param(&self, label: FlowLabel) -> Result<f64> {
        let i = slot(label)?;
        match (&self.kind, label.family) {
            (SpecKind::Monomial { x, .. }, Family::MonomialX)
            | (SpecKind::Monomial { y: x, .. }, Family::MonomialY)
            | (SpecKind::InversePower { x, .. }, Family::InverseX)
            | (SpecKind::InversePower { y: x, .. }, Family::InverseY) => Ok(x.get(i).copied().unwrap_or(0.0)),
            (SpecKind::Delta { phi, .. }, Family::DeltaX) | (SpecKind::Delta { psi: phi, .. }, Family::DeltaY) => phi
                .get(i)
                .map(|p| p.0)
                .ok_or_else(|| EpdError::InvalidSpec(format!("no delta point for {label}"))),
            _ => Err(mismatch(label)),
        }
    }

    pub fn set_param(&mut self, label: FlowLabel, value: f64) -> Result<()> {
        let i = slot(label)?;
        match (&mut self.kind, label.family) {
            (SpecKind::Monomial { x, .. }, Family::MonomialX)
            | (SpecKind::Monomial { y: x, .. }, Family::MonomialY)
            | (SpecKind::InversePower { x, .. }, Family::InverseX)
            | (SpecKind::InversePower { y: x, .. }, Family::InverseY) => {
                if x.len() <= i {
                    x.resize(i + 1, 0.0);
                }
                x[i] = value;
                Ok(())
            }
            (SpecKind::Delta { phi, .. }, Family::DeltaX) | (SpecKind::Delta { psi: phi, .. }, Family::DeltaY) => {
                let p = phi
                    .get_mut(i)
                    .ok_or_else(|| EpdError::InvalidSpec(format!("no delta point for {label}")))?;
                p.0 = value;
                Ok(())
            }
            _ => Err(mismatch(label)),
        }
    }

    pub fn with_param(&self, label: FlowLabel, value: f64) -> Result<SolutionSpec> {
        let mut s = self.clone();
        s.set_param(label, value)?;
        Ok(s)
    }

    /// The basis solution multiplying the coefficient `label`.
    pub fn basis(&self, label: FlowLabel) -> Result<SolutionSpec> {
        let i = slot(label)?;
        let unit = |n: usize| {
            let mut v = vec![0.0; n + 1];
            v[n] = 1.0;
            v
        };
        let kind = match (&self.kind, label.family) {
            (SpecKind::Monomial { .. }, Family::MonomialX) => SpecKind::Monomial { x: unit(i), y: vec![] },
            (SpecKind::Monomial { .. }, Family::MonomialY) => SpecKind::Monomial { x: vec![], y: unit(i) },
            (SpecKind::InversePower { .. }, Family::InverseX) => SpecKind::InversePower { x: unit(i), y: vec![] },
            (SpecKind::InversePower { .. }, Family::InverseY) => SpecKind::InversePower { x: vec![], y: unit(i) },
            (SpecKind::Delta { phi, psi }, f) => {
                let pts = if f.is_x() { phi } else { psi };
                let node = pts
                    .get(i)
                    .ok_or_else(|| EpdError::InvalidSpec(format!("no delta point for {label}")))?
                    .1;
                match f {
                    Family::DeltaX => SpecKind::Delta {
                        phi: vec![(1.0, node)],
                        psi: vec![],
                    },
                    Family::DeltaY => SpecKind::Delta {
                        phi: vec![],
                        psi: vec![(1.0, node)],
                    },
                    _ => return Err(mismatch(label)),
                }
            }
            _ => return Err(mismatch(label)),
        };
        Ok(SolutionSpec {
            kind,
            log_norm: self.log_norm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_labels() {
        let m = SolutionSpec::monomial(vec![1.0], vec![1.0]);
        assert_eq!(FlowLabel::parse_for("x2", &m).unwrap(), FlowLabel::x(2));
        assert_eq!(FlowLabel::parse_for("y0", &m).unwrap(), FlowLabel::y(0));
        let d = SolutionSpec::delta(vec![(1.0, 0.0)], vec![]);
        assert_eq!(
            FlowLabel::parse_for("x0", &d).unwrap(),
            FlowLabel::new(Family::DeltaX, 0)
        );
        assert_eq!(
            FlowLabel::parse_for("inverse-y:3", &m).unwrap(),
            FlowLabel::new(Family::InverseY, 3)
        );
        assert!(FlowLabel::parse_for("z1", &m).is_err());
        assert_eq!(FlowLabel::x(2).to_string(), "monomial-x:2");
    }

    #[test]
    fn params_round_trip() {
        let s = SolutionSpec::monomial(vec![1.0], vec![2.0]);
        assert_eq!(s.param(FlowLabel::x(1)).unwrap(), 1.0);
        assert_eq!(s.param(FlowLabel::x(3)).unwrap(), 0.0);
        let t = s.with_param(FlowLabel::x(3), 5.0).unwrap();
        assert_eq!(t.param(FlowLabel::x(3)).unwrap(), 5.0);
        assert!(s.param(FlowLabel::x(0)).is_err());
        assert!(s.param(FlowLabel::new(Family::DeltaX, 0)).is_err());
        let b = s.basis(FlowLabel::y(0)).unwrap();
        assert_eq!(b.param(FlowLabel::y(0)).unwrap(), 1.0);
        assert_eq!(b.param(FlowLabel::x(1)).unwrap(), 0.0);
    }
}
