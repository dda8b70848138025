//! JSON model configs.
//!
//! ```json
//! {"kind": "abelian", "q": 11, "charpoly": [11, -1, 1]}
//! {"kind": "motive", "q": 4, "m": 1, "components": [{"weight": 1, "charpoly": [-4, 0, 1]}]}
//! {"kind": "lambda", "n": 2, "q": 3}
//! {"kind": "raw", "data": [{"eps": "1/2", "re": 0.2, "im": 0.0}], "power": 2}
//! {"kind": "variety", "p": 3, "ambient": {"projective": 2}, "equations": [[[1, [2, 0, 0]], ...]]}
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use zlog::continuation::{PrefixTerm, ZlogModel};
use zlog::motive_data::{WeilComponent, DEFAULT_K};
use zlog::point_counts::{count_naive, make_field, Ambient, CountSequence, CountSource, Polynomial, VarietySpec};
use zlog::{SpectralData, WeilNumberSet};

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
    pub weight: u32,
    #[serde(default = "one")]
    pub mult: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Eps {
    Int(i64),
    Ratio(String),
}

impl Eps {
    fn parts(&self) -> Result<(i64, i64), CliError> {
        match self {
            Eps::Int(n) => Ok((*n, 1)),
            Eps::Ratio(s) => {
                let bad = || CliError::Config(format!("bad eps {s:?}; expected \"n/d\""));
                let (n, d) = s.split_once('/').unwrap_or((s, "1"));
                Ok((n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?))
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDatum {
    pub eps: Eps,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Abelian {
        q: u64,
        charpoly: Vec<i64>,
        k: Option<f64>,
    },
    Motive {
        q: u64,
        m: u32,
        components: Option<Vec<WeilComponent>>,
        eigenvalues: Option<Vec<Eigenvalue>>,
        k: Option<f64>,
    },
    Lambda {
        n: u32,
        q: u64,
        k: Option<f64>,
    },
    Raw {
        data: Vec<RawDatum>,
        #[serde(default)]
        prefix: Vec<PrefixTerm>,
        #[serde(default = "one")]
        power: u32,
        base_q: Option<f64>,
        k: Option<f64>,
    },
    Variety {
        p: u64,
        /// Base field `F_{p^degree}`.
        #[serde(default = "one")]
        degree: u32,
        ambient: Ambient,
        #[serde(default)]
        equations: Vec<Polynomial>,
    },
}

fn one() -> u32 {
    1
}

pub fn load(path: &Path) -> Result<ModelConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl ModelConfig {
    fn weil(&self) -> Result<Option<(WeilNumberSet, Option<u32>)>, CliError> {
        Ok(match self {
            ModelConfig::Abelian { q, charpoly, .. } => {
                Some((WeilNumberSet::abelian(*q, charpoly.clone())?, None))
            }
            ModelConfig::Motive { q, m, components, eigenvalues, .. } => {
                let w = match (components, eigenvalues) {
                    (Some(c), None) => WeilNumberSet::motive(*q, c.clone())?,
                    (None, Some(e)) => WeilNumberSet::from_eigenvalues(
                        *q,
                        e.iter().map(|e| (Complex64::new(e.re, e.im), e.weight, e.mult)).collect(),
                    )?,
                    _ => {
                        return Err(CliError::Config(
                            "motive needs exactly one of \"components\" and \"eigenvalues\"".into(),
                        ))
                    }
                };
                Some((w, Some(*m)))
            }
            _ => None,
        })
    }

    /// The continuation model; `variety` configs have none.
    pub fn model(&self) -> Result<ZlogModel, CliError> {
        let model = match self {
            ModelConfig::Abelian { k, .. } => {
                let (w, _) = self.weil()?.expect("abelian");
                ZlogModel::abelian(w, k.unwrap_or(DEFAULT_K))?
            }
            ModelConfig::Motive { k, .. } => {
                let (w, m) = self.weil()?.expect("motive");
                ZlogModel::motive(w, m.expect("weight"), k.unwrap_or(DEFAULT_K))?
            }
            ModelConfig::Lambda { n, q, k } => ZlogModel::lambda_n(*n, *q, k.unwrap_or(DEFAULT_K))?,
            ModelConfig::Raw { data, prefix, power, base_q, k } => {
                let tuples = data
                    .iter()
                    .map(|d| d.eps.parts().map(|(n, den)| (n, den, d.re, d.im)))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut sd = SpectralData::from_tuples(&tuples)?;
                if let Some(q) = base_q {
                    sd = sd.with_base_q(*q);
                }
                ZlogModel::raw(sd, prefix.clone(), *power, k.unwrap_or(DEFAULT_K))?
            }
            ModelConfig::Variety { .. } => {
                return Err(CliError::Config(
                    "variety configs only support the coeffs and recurrence commands".into(),
                ))
            }
        };
        Ok(model)
    }

    /// Exact counts `N_1..N_len`, when the config determines them.
    pub fn counts(&self, len: usize) -> Result<Option<CountSequence>, CliError> {
        if let Some((w, _)) = self.weil()? {
            if w.exact() {
                return Ok(Some(CountSequence::from_weil(&w, len)?));
            }
            return Ok(None);
        }
        match self {
            ModelConfig::Lambda { n, q, .. } => {
                let big = num_bigint::BigUint::from(*q);
                let values = (1..=len)
                    .map(|r| big.pow(*n * r as u32) - 1u32)
                    .collect();
                Ok(Some(CountSequence::from_integers(*q, values, CountSource::Naive)?))
            }
            ModelConfig::Variety { p, degree, ambient, equations } => {
                let spec = VarietySpec { ambient: *ambient, equations: equations.clone() };
                spec.validate()?;
                let values = (1..=len as u32)
                    .map(|r| {
                        let field = make_field(*p, degree * r)?;
                        count_naive(&spec, &field).map(num_bigint::BigUint::from)
                    })
                    .collect::<zlog::Result<Vec<_>>>()?;
                Ok(Some(CountSequence::from_integers(p.pow(*degree), values, CountSource::Naive)?))
            }
            _ => Ok(None),
        }
    }
}
