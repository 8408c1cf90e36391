use std::io::Write;

use hill_core::collision::{bifurcation_scan, linspace, ScanRow};
use hill_core::Rational;

use crate::error::CliError;

pub fn cmd_scan(
    alpha: Rational,
    beta: Rational,
    c_min: f64,
    c_max: f64,
    steps: usize,
) -> Result<Vec<ScanRow>, CliError> {
    if steps < 2 {
        return Err(CliError::Usage(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    if !(c_min.is_finite() && c_max.is_finite()) {
        return Err(CliError::Usage("scan bounds must be finite".into()));
    }
    Ok(bifurcation_scan(
        alpha,
        beta,
        &linspace(c_min, c_max, steps),
    )?)
}

/// Columns `c, count, kinds, points`; kinds and `name:v:w` points are
/// joined with `;`.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["c", "count", "kinds", "points"])?;
    for row in rows {
        let kinds: Vec<&str> = row.kinds.iter().map(|k| k.as_str()).collect();
        let points: Vec<String> = row
            .points
            .iter()
            .map(|p| format!("{}:{:?}:{:?}", p.name.as_str(), p.v, p.w))
            .collect();
        w.write_record([
            format!("{:?}", row.c),
            row.count.to_string(),
            kinds.join(";"),
            points.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hill_core::rational::{int, rational};

    #[test]
    fn counts_across_the_bifurcation() {
        let rows = cmd_scan(int(3), rational(3, 2), -1.0, 1.0, 5).unwrap();
        let counts: Vec<usize> = rows.iter().map(|r| r.count).collect();
        assert_eq!(counts, [0, 0, 1, 4, 4]);
    }

    #[test]
    fn equilibrium_norms_scale_with_root_c() {
        let rows = cmd_scan(int(3), rational(3, 2), 0.01, 0.04, 2).unwrap();
        let ratio = rows[1].max_pairwise_distance() / rows[0].max_pairwise_distance();
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_steps_is_a_usage_error() {
        assert!(matches!(
            cmd_scan(int(3), rational(3, 2), 0.0, 1.0, 1),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn csv_round_trips_floats() {
        let rows = cmd_scan(int(3), rational(3, 2), 0.1, 0.7, 3).unwrap();
        let mut buf = Vec::new();
        write_scan_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("c,count,kinds,points"));
        let second: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
        assert_eq!(second[0].parse::<f64>().unwrap(), rows[1].c);
        assert_eq!(second[2], "saddle;saddle;source;sink");
        let v: f64 = second[3]
            .split(';')
            .nth(2)
            .unwrap()
            .split(':')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(v, rows[1].points[2].v);
    }
}
