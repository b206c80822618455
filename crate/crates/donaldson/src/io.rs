//! On-disk formats: polynomial JSON, solution bundles, and grid files
//! (JSON header line + CSV payload, row-major with t slowest).

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use num::rational::BigRational;
use num::BigInt;
use serde::{Deserialize, Serialize};

use crate::builder::EntireSolution;
use crate::error::{Error, Result};
use crate::{ExactPoly, GridField, Rational};

#[derive(Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl RationalJson {
    pub fn from_rational(r: &Rational) -> Self {
        RationalJson {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }

    pub fn to_rational(&self) -> Result<Rational> {
        let num = BigInt::from_str(&self.num)
            .map_err(|e| Error::Parse(format!("bad numerator '{}': {e}", self.num)))?;
        let den = BigInt::from_str(&self.den)
            .map_err(|e| Error::Parse(format!("bad denominator '{}': {e}", self.den)))?;
        if den == BigInt::from(0) {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(BigRational::new(num, den))
    }
}

#[derive(Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub num: String,
    pub den: String,
}

#[derive(Serialize, Deserialize)]
pub struct PolyJson {
    pub nvars: usize,
    pub terms: Vec<TermJson>,
}

impl PolyJson {
    /// Terms in graded-lex order, coefficients as decimal strings.
    pub fn from_poly(p: &ExactPoly) -> Self {
        PolyJson {
            nvars: p.nvars(),
            terms: p
                .terms_graded()
                .into_iter()
                .map(|(e, c)| TermJson {
                    exp: e.clone(),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }

    pub fn to_poly(&self) -> Result<ExactPoly> {
        let mut p = ExactPoly::zero(self.nvars);
        for t in &self.terms {
            if t.exp.len() != self.nvars {
                return Err(Error::InvalidInput(
                    "exponent vector length does not match nvars".into(),
                ));
            }
            let r = RationalJson { num: t.num.clone(), den: t.den.clone() }.to_rational()?;
            p.add_term(t.exp.clone(), r);
        }
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
pub struct BundleJson {
    pub n: usize,
    pub a: RationalJson,
    pub b: PolyJson,
    pub g: PolyJson,
    pub u: PolyJson,
}

impl BundleJson {
    pub fn from_solution(sol: &EntireSolution) -> Self {
        BundleJson {
            n: sol.n,
            a: RationalJson::from_rational(&sol.a),
            b: PolyJson::from_poly(&sol.b),
            g: PolyJson::from_poly(&sol.g),
            u: PolyJson::from_poly(&sol.u),
        }
    }

    /// Rebuild and exactly re-validate the solution identities.
    pub fn to_solution(&self) -> Result<EntireSolution> {
        let sol = EntireSolution {
            n: self.n,
            a: self.a.to_rational()?,
            b: self.b.to_poly()?,
            g: self.g.to_poly()?,
            u: self.u.to_poly()?,
        };
        sol.validate()?;
        Ok(sol)
    }

    /// Parse without validation (for tamper-detection flows the caller
    /// validates separately).
    pub fn to_solution_unchecked(&self) -> Result<EntireSolution> {
        Ok(EntireSolution {
            n: self.n,
            a: self.a.to_rational()?,
            b: self.b.to_poly()?,
            g: self.g.to_poly()?,
            u: self.u.to_poly()?,
        })
    }
}

pub fn write_bundle(path: &Path, sol: &EntireSolution) -> Result<()> {
    let json = serde_json::to_string_pretty(&BundleJson::from_solution(sol))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_bundle(path: &Path) -> Result<BundleJson> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    bounds: Vec<(f64, f64)>,
    shape: Vec<usize>,
    format: String,
}

/// Grid file: one JSON header line, then CSV rows (last axis contiguous).
pub fn write_grid(path: &Path, g: &GridField) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = GridHeader {
        bounds: g.bounds().to_vec(),
        shape: g.shape().to_vec(),
        format: "csv".into(),
    };
    writeln!(f, "{}", serde_json::to_string(&header)?)?;
    let row_len = *g.shape().last().unwrap();
    for chunk in g.values().chunks(row_len) {
        let row: Vec<String> = chunk.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<GridField> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty grid file".into()))??;
    let header: GridHeader = serde_json::from_str(&header_line)?;
    if header.format != "csv" {
        return Err(Error::InvalidInput(format!(
            "unsupported grid payload format '{}'",
            header.format
        )));
    }
    let mut values = Vec::with_capacity(header.shape.iter().product());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad grid value '{field}': {e}")))?;
            values.push(v);
        }
    }
    GridField::new(header.bounds, header.shape, values)
}

/// Round-trip stable JSON for a polynomial alone.
pub fn poly_to_json_string(p: &ExactPoly) -> Result<String> {
    Ok(serde_json::to_string(&PolyJson::from_poly(p))?)
}

pub fn poly_from_json_str(s: &str) -> Result<ExactPoly> {
    let pj: PolyJson = serde_json::from_str(s)?;
    pj.to_poly()
}
