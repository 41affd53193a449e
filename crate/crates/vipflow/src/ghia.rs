//! Published cavity centerline reference profiles.
//!
//! The file format holds two blocks, each opened by its own header
//! line: `y,u` rows give the u-velocity along the vertical centerline
//! x = 0.5, then `x,v` rows give the v-velocity along the horizontal
//! centerline y = 0.5.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::FlowField;

/// Centerline profiles from a reference table on the unit cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterlineReference {
    /// (y, u) stations along the vertical centerline.
    pub vertical_u: Vec<(f64, f64)>,
    /// (x, v) stations along the horizontal centerline.
    pub horizontal_v: Vec<(f64, f64)>,
}

pub fn load_reference(path: &Path) -> Result<CenterlineReference> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_reference(&text)
}

pub fn parse_reference(text: &str) -> Result<CenterlineReference> {
    let mut vertical_u = Vec::new();
    let mut horizontal_v = Vec::new();
    // 0 = before any block, 1 = inside y,u, 2 = inside x,v
    let mut block = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "y,u" => {
                if block != 0 {
                    return Err(Error::Parse(format!(
                        "line {}: unexpected second y,u header",
                        lineno + 1
                    )));
                }
                block = 1;
                continue;
            }
            "x,v" => {
                if block != 1 {
                    return Err(Error::Parse(format!(
                        "line {}: x,v header must follow the y,u block",
                        lineno + 1
                    )));
                }
                block = 2;
                continue;
            }
            _ => {}
        }
        let (a, b) = line.split_once(',').ok_or_else(|| {
            Error::Parse(format!("line {}: expected coord,value", lineno + 1))
        })?;
        let coord: f64 = a
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad coordinate {a:?}", lineno + 1)))?;
        let value: f64 = b
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad value {b:?}", lineno + 1)))?;
        if !(0.0..=1.0).contains(&coord) {
            return Err(Error::Parse(format!(
                "line {}: station {coord} outside the unit cavity",
                lineno + 1
            )));
        }
        match block {
            1 => vertical_u.push((coord, value)),
            2 => horizontal_v.push((coord, value)),
            _ => {
                return Err(Error::Parse(format!(
                    "line {}: data before the y,u header",
                    lineno + 1
                )))
            }
        }
    }
    if vertical_u.len() < 2 || horizontal_v.len() < 2 {
        return Err(Error::Parse(format!(
            "reference needs both blocks populated, got {} and {} rows",
            vertical_u.len(),
            horizontal_v.len()
        )));
    }
    for w in vertical_u.windows(2).chain(horizontal_v.windows(2)) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Parse(format!(
                "stations must increase strictly: {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    Ok(CenterlineReference {
        vertical_u,
        horizontal_v,
    })
}

/// Largest absolute gap between the field's vertical-centerline u and
/// the reference stations.
pub fn max_deviation_u(field: &FlowField, reference: &CenterlineReference) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(y, u_ref) in &reference.vertical_u {
        let u = field.velocity_at([0.5, y])?[0];
        worst = worst.max((u - u_ref).abs());
    }
    Ok(worst)
}

/// Largest absolute gap between the field's horizontal-centerline v and
/// the reference stations.
pub fn max_deviation_v(field: &FlowField, reference: &CenterlineReference) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(x, v_ref) in &reference.horizontal_v {
        let v = field.velocity_at([x, 0.5])?[1];
        worst = worst.max((v - v_ref).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "y,u\n0.0,0.0\n0.5,-0.2\n1.0,1.0\nx,v\n0.0,0.0\n0.5,0.05\n1.0,0.0\n";

    #[test]
    fn parses_two_block_table() {
        let r = parse_reference(SAMPLE).unwrap();
        assert_eq!(r.vertical_u.len(), 3);
        assert_eq!(r.horizontal_v[1], (0.5, 0.05));
    }

    #[test]
    fn rejects_missing_or_misordered_headers() {
        assert!(parse_reference("0.0,0.0\n").is_err());
        assert!(parse_reference("x,v\n0.0,0.0\ny,u\n0.0,0.0\n").is_err());
        assert!(parse_reference("y,u\n0.0,0.0\n0.5\nx,v\n").is_err());
    }

    #[test]
    fn rejects_non_monotone_stations() {
        let bad = "y,u\n0.0,0.0\n0.5,-0.2\n0.5,-0.2\nx,v\n0.0,0.0\n1.0,0.0\n";
        assert!(parse_reference(bad).is_err());
    }

    #[test]
    fn shipped_tables_parse_with_seventeen_stations() {
        for name in ["ghia_re100.csv", "ghia_re400.csv"] {
            let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("../../data")
                .join(name);
            let r = load_reference(&path).unwrap();
            assert_eq!(r.vertical_u.len(), 17);
            assert_eq!(r.horizontal_v.len(), 17);
            assert_eq!(r.vertical_u[0], (0.0, 0.0));
            assert_eq!(r.vertical_u[16], (1.0, 1.0));
            assert_eq!(r.horizontal_v[16], (1.0, 0.0));
        }
    }

    #[test]
    fn deviation_of_matching_constant_field_is_zero() {
        use crate::domain::Domain;
        use crate::nodes::NodeSet;
        use crate::shape::KernelConfig;

        let h = 0.25;
        let domain = Domain::unit_square([false, false]);
        let nodes = NodeSet::generate_regular(&domain, h).unwrap();
        let kernel = KernelConfig::quadratic(h);
        let n = nodes.len();
        let field = FlowField::new(
            nodes,
            kernel,
            h,
            vec![0.25; n],
            vec![-0.5; n],
            vec![0.0; n],
        )
        .unwrap();
        let r = parse_reference(
            "y,u\n0.1,0.25\n0.9,0.25\nx,v\n0.1,-0.5\n0.9,-0.5\n",
        )
        .unwrap();
        assert!(max_deviation_u(&field, &r).unwrap() < 1e-9);
        assert!(max_deviation_v(&field, &r).unwrap() < 1e-9);
    }
}
