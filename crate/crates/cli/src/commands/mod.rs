pub mod calibrate;
pub mod energy;
pub mod size;
pub mod upside;
pub mod verify;

use std::io::Write;

/// Aligned `label  value` lines.
pub(crate) fn print_report(out: &mut impl Write, rows: &[(String, String)]) -> std::io::Result<()> {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        writeln!(out, "{k:<width$}  {v}")?;
    }
    Ok(())
}

/// Shortest representation that parses back to the same `f64`, switching to
/// exponent form outside `[1e-4, 1e15)`.
pub(crate) fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub(crate) fn usd(x: f64) -> String {
    let sign = if x < 0.0 { "-" } else { "" };
    let cents = (x.abs() * 100.0).round() as u128;
    let (whole, frac) = (cents / 100, cents % 100);
    let digits = whole.to_string();
    let mut grouped = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(c);
    }
    format!("{sign}${grouped}.{frac:02}")
}

#[cfg(test)]
mod tests {
    use super::{num, usd};

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 0.05, 4.0761137170366274e-24, 9.81326890680576e25, 28289.0, 1e15, 1e-4] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x, "{}", num(x));
        }
        assert_eq!(num(4.0761137170366274e-24), "4.0761137170366274e-24");
        assert_eq!(num(0.05), "0.05");
    }

    #[test]
    fn formats_dollars() {
        assert_eq!(usd(3735.144), "$3,735.14");
        assert_eq!(usd(0.0), "$0.00");
        assert_eq!(usd(-1_582_083.5), "-$1,582,083.50");
        assert_eq!(usd(999.999), "$1,000.00");
    }
}
