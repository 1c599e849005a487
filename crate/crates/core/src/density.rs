//! Real-axis densities for sampled solutions and Da Rios potentials.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EpdError, Result};

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    #[default]
    Zero,
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Piecewise-linear interpolation of samples; zero outside the table.
    Table { lambda: Vec<f64>, values: Vec<f64> },
    Sum { terms: Vec<Density> },
    #[serde(skip)]
    Custom(DensityFn),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Zero => write!(f, "Zero"),
            Density::Gaussian {
                amplitude,
                center,
                width,
            } => write!(f, "Gaussian({amplitude}, {center}, {width})"),
            Density::Table { lambda, .. } => write!(f, "Table({} samples)", lambda.len()),
            Density::Sum { terms } => f.debug_list().entries(terms).finish(),
            Density::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Density {
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Self {
        Density::Gaussian {
            amplitude,
            center,
            width,
        }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Density::Custom(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Density::Zero)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Density::Zero => 0.0,
            Density::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let s = (x - center) / width;
                amplitude * (-s * s).exp()
            }
            Density::Table { lambda, values } => interpolate(lambda, values, x),
            Density::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
            Density::Custom(f) => f(x),
        }
    }

    /// Points where the density is not smooth; quadrature panels break there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density::Table { lambda, .. } => lambda.clone(),
            Density::Sum { terms } => terms.iter().flat_map(|t| t.breakpoints()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Density::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !(amplitude.is_finite() && center.is_finite() && width.is_finite() && *width > 0.0) {
                    return Err(EpdError::InvalidSpec(
                        "gaussian density needs finite parameters and width > 0".into(),
                    ));
                }
            }
            Density::Table { lambda, values } => {
                if lambda.len() != values.len() || lambda.len() < 2 {
                    return Err(EpdError::InvalidSpec(
                        "density table needs matching lambda/values with at least 2 samples".into(),
                    ));
                }
                if lambda.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(EpdError::InvalidSpec(
                        "density table abscissae must be strictly increasing".into(),
                    ));
                }
                if lambda.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(EpdError::NonFinite("density table"));
                }
            }
            Density::Sum { terms } => {
                for t in terms {
                    t.validate()?;
                }
            }
            Density::Zero | Density::Custom(_) => {}
        }
        Ok(())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return ys[0];
    }
    if i >= xs.len() {
        return ys[xs.len() - 1];
    }
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

/// Reads `(λ, φ, ψ)` rows into a pair of table densities.
pub fn read_density_csv(path: &Path) -> Result<(Density, Density)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let (mut lam, mut phi, mut psi) = (Vec::new(), Vec::new(), Vec::new());
    for row in rdr.deserialize() {
        let (l, p, q): (f64, f64, f64) = row?;
        lam.push(l);
        phi.push(p);
        psi.push(q);
    }
    let phi = Density::Table {
        lambda: lam.clone(),
        values: phi,
    };
    let psi = Density::Table {
        lambda: lam,
        values: psi,
    };
    phi.validate()?;
    Ok((phi, psi))
}
