//! Loader for spherical-harmonic core-field coefficient files.
//!
//! Data lines are `n m g h [ġ ḣ]` with Schmidt semi-normalized
//! coefficients in nT; secular-variation columns are ignored. Header lines
//! before the first data line are skipped, a line of `9`s ends the table,
//! and `radius <metres>` overrides the reference radius. Degrees above
//! the supported maximum are dropped with a warning, so WMM-style `.COF`
//! files load directly.

use std::fs;
use std::path::Path;

use gfk_core::synth::{CoreField, GaussCoefficients, EARTH_RADIUS, GAUSS_MAX_DEGREE};

use crate::error::{Error, Result};

type Term = (usize, usize, f64, f64);

fn data_line(fields: &[&str]) -> Option<Term> {
    if fields.len() < 4 {
        return None;
    }
    Some((
        fields[0].parse().ok()?,
        fields[1].parse().ok()?,
        fields[2].parse().ok()?,
        fields[3].parse().ok()?,
    ))
}

pub fn parse_gauss(text: &str) -> Result<GaussCoefficients> {
    let mut radius = EARTH_RADIUS;
    let mut terms = Vec::new();
    let mut dropped = 0usize;
    let mut started = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "radius" && fields.len() == 2 {
            radius = fields[1]
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad radius", n + 1)))?;
            continue;
        }
        if fields.len() == 1 && fields[0].len() > 1 && fields[0].bytes().all(|b| b == b'9') {
            break;
        }
        match data_line(&fields) {
            Some((deg, ord, g, h)) => {
                started = true;
                if deg == 0 || ord > deg {
                    return Err(Error::Format(format!(
                        "line {}: invalid degree/order ({deg}, {ord})",
                        n + 1
                    )));
                }
                if deg > GAUSS_MAX_DEGREE {
                    dropped += 1;
                } else {
                    terms.push((deg, ord, g, h));
                }
            }
            None if !started => continue,
            None => return Err(Error::Format(format!("line {}: expected `n m g h`", n + 1))),
        }
    }
    if terms.is_empty() {
        return Err(Error::Format("no coefficients found".into()));
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} coefficients above degree {GAUSS_MAX_DEGREE}");
    }
    GaussCoefficients::new(radius, terms).map_err(|e| Error::Format(e.to_string()))
}

pub fn load_core(path: &Path) -> Result<CoreField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gauss(&text)
        .map(CoreField::Gauss)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const COF: &str = "    2020.0            WMM-2020        12/10/2019
  1  0  -29404.5       0.0        6.7        0.0
  1  1   -1450.7    4652.9        7.7      -25.1
  2  0   -2500.0       0.0      -11.5        0.0
  5  0     -95.0       0.0        0.0        0.0
999999999999999999999999999999999999999999999999
999999999999999999999999999999999999999999999999
";

    #[test]
    fn cof_layout_loads_and_truncates() {
        let g = parse_gauss(COF).unwrap();
        assert_eq!(g.radius(), EARTH_RADIUS);
        assert_eq!(g.terms().len(), 3);
        assert_eq!(g.terms()[1], (1, 1, -1450.7, 4652.9));
    }

    #[test]
    fn axial_dipole_matches_closed_form() {
        // g10 alone: B at the north pole is 2·g10 radially at r = a
        let g = parse_gauss("radius 6371200\n1 0 -30000 0\n").unwrap();
        let b = g.field([0.0, 0.0, 6_371_200.0]);
        assert!((b[2] - 2.0 * -30000.0).abs() < 1e-6 * 30000.0, "{b:?}");
        assert!(b[0].abs() < 1e-9 && b[1].abs() < 1e-9);
    }

    #[test]
    fn malformed_tables_fail() {
        assert!(parse_gauss("").is_err());
        assert!(parse_gauss("1 0 1 0\nnot a row\n").is_err());
        assert!(parse_gauss("1 2 1 0\n").is_err());
    }
}
