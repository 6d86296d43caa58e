//! Long-format CSV for sampled fields and supports.

use std::io::{self, Write};

use super::{ChiField, EpsSupport};

/// Fixed scientific notation with 16 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.15e}")
}

/// `re,im,chi2,h_0,...,h_{N-1}`, one row per node, real index fastest.
pub fn write_field_csv<W: Write>(field: &ChiField, mut out: W) -> io::Result<()> {
    let mut header = String::from("re,im,chi2");
    for g in 0..field.levels() {
        header.push_str(&format!(",h_{g}"));
    }
    writeln!(out, "{header}")?;
    for k in 0..field.grid.len() {
        let node = field.grid.node(k);
        let mut line = format!("{},{},{}", fmt_num(node.re), fmt_num(node.im), fmt_num(field.chi2[k]));
        for h in &field.h {
            line.push(',');
            line.push_str(&fmt_num(h[k]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// `gamma,re,im`, one row per support node.
pub fn write_supports_csv<W: Write>(
    field: &ChiField,
    supports: &[EpsSupport],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "gamma,re,im")?;
    for s in supports {
        for &k in &s.cells {
            let node = field.grid.node(k);
            writeln!(out, "{},{},{}", s.gamma, fmt_num(node.re), fmt_num(node.im))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, PrincipalAmplitudes};
    use crate::precs::{eps_supports, evaluate_field, Grid, DEFAULT_EPS};

    #[test]
    fn field_csv_layout() {
        let p = ModelParams::qubit_boson(2.0, 1.0).unwrap();
        let c = PrincipalAmplitudes::from_weights(&[0.25, 0.75]).unwrap();
        let grid = Grid::auto(&p, 1.0);
        let field = evaluate_field(&p, &c, 0.5, &grid).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&field, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("re,im,chi2,h_0,h_1"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first[0], -9.0);
        assert_eq!(first[1], -7.0);
        let second: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(second[0], -8.875);
        assert_eq!(text.lines().count(), grid.len() + 1);
        assert!(!text.contains('\r'));

        let mut buf = Vec::new();
        let s = eps_supports(&field, DEFAULT_EPS).unwrap();
        write_supports_csv(&field, &s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + s[0].len() + s[1].len());
    }

    #[test]
    fn numbers_keep_sixteen_digits() {
        assert_eq!(fmt_num(0.1), "1.000000000000000e-1");
        assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_num(-4.0), "-4.000000000000000e0");
    }
}
