use crate::sweep::SWEEP_HEADER;
use crate::{exit, Failure};
use std::fmt::Write as _;
use std::path::Path;
use thinfilm::regularity::{fit_decay, RegularityError};

/// `(t, [(r, excess)])` in file order.
fn read_groups(text: &str) -> Result<Vec<(String, Vec<(f64, f64)>)>, String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(SWEEP_HEADER) {
        return Err(format!("expected the header {SWEEP_HEADER:?}"));
    }
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 5 {
            return Err(format!("line {}: expected 5 cells, found {}", i + 2, cells.len()));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("line {}: {s:?} is not a number", i + 2));
        let t = num(cells[0])?;
        let point = (num(cells[2])?, num(cells[3])?);
        match groups.last_mut() {
            Some((last, pts)) if last.parse::<f64>().ok() == Some(t) => pts.push(point),
            _ => groups.push((cells[0].to_string(), vec![point])),
        }
    }
    if groups.is_empty() {
        return Err("no data rows".into());
    }
    Ok(groups)
}

/// One report line per snapshot time of the sweep.
pub fn fit(csv: &Path, p: Option<f64>) -> Result<String, Failure> {
    if let Some(p) = p {
        if !(p.is_finite() && p > 0.0) {
            return Err(Failure::new(exit::USAGE, format!("--p {p} must be positive")));
        }
    }
    let text = std::fs::read_to_string(csv)
        .map_err(|e| Failure::new(exit::FAILED, format!("cannot read {}: {e}", csv.display())))?;
    let groups = read_groups(&text).map_err(|e| Failure::new(exit::FAILED, format!("{}: {e}", csv.display())))?;

    let mut out = String::new();
    let mut insufficient = Vec::new();
    for (t, points) in &groups {
        match fit_decay(points) {
            Ok(fit) => {
                let fit = match p {
                    Some(p) => fit.with_initial_p(p),
                    None => fit,
                };
                let _ = write!(
                    out,
                    "t = {t}: beta = {:.6}, residual_rms = {:.6}, sigma_x = {:.6}",
                    fit.beta,
                    fit.residual_rms,
                    fit.beta / 2.0
                );
                if let Some(g) = fit.gamma {
                    let _ = write!(out, ", gamma = {g:.6}, min(beta, gamma) / 2 = {:.6}", fit.sigma_x());
                }
                out.push('\n');
            }
            Err(RegularityError::AllZeroExcess) => {
                let _ = writeln!(out, "t = {t}: super-polynomial decay (zero excess on every level)");
            }
            Err(e @ RegularityError::InsufficientPoints { .. }) => {
                let _ = writeln!(out, "t = {t}: {e}");
                insufficient.push(t.clone());
            }
            Err(e) => return Err(Failure::new(exit::FAILED, e.to_string()).with_report(out)),
        }
    }
    if !insufficient.is_empty() {
        return Err(Failure::new(
            exit::INSUFFICIENT_POINTS,
            format!("fewer than 3 positive-excess levels at t = {}", insufficient.join(", ")),
        )
        .with_report(out));
    }
    Ok(out)
}
