//! The per-snapshot diagnostics table and its CSV form.

use super::IoError;
use crate::diagnostics::cutoff::CutoffProfile;
use crate::diagnostics::{
    bernis_gruen_sides, default_entropy_alpha, dissipation, energy, entropy, entropy_dissipation_rhs, l3_gradient_norm,
    DiagnosticsError, TimeLabel,
};
use crate::grid::{Field, Region};
use crate::regularity::{excess_sweep_field, RadiusSchedule, RegularityError};
use crate::solver::mass;
use std::fmt::Write as _;
use std::path::Path;

pub const FIXED_COLUMNS: [&str; 10] = [
    "t",
    "mass",
    "energy",
    "dissipation",
    "entropy_a1",
    "entropy_rhs_a1",
    "bg_lhs",
    "bg_rhs_diss",
    "bg_rhs_cut",
    "l3_gradnorm",
];

/// Seventeen significant digits, which round-trips every `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    /// Values of [`FIXED_COLUMNS`], in order.
    pub fixed: [f64; 10],
    pub classes: Vec<TimeLabel>,
    pub excess: Vec<f64>,
}

impl DiagnosticsRow {
    /// Whole-domain functionals, the weighted Bernis–Grün sides on the ball
    /// cutoff of the largest schedule radius, and one class/excess pair per
    /// schedule level around `center`. Without a schedule the cutoff radius
    /// is `L/8`, and the Bernis–Grün cells are NaN when that is unresolved.
    pub fn compute(
        u: &Field,
        n: f64,
        center: [f64; 2],
        sched: Option<&RadiusSchedule>,
    ) -> Result<Self, RegularityError> {
        let whole = Region::Whole;
        let alpha = default_entropy_alpha(n);
        let r_top = match sched {
            Some(s) => *s.radii().last().expect("schedules have at least one level"),
            None => u.grid().length() / 8.0,
        };
        let (bg_lhs, bg_diss, bg_cut) = match bernis_gruen_sides(u, n, &CutoffProfile::ball(r_top, center)) {
            Ok(bg) => (
                bg.lhs,
                bg.rhs_component("dissipation_term").unwrap_or(0.0),
                bg.rhs_component("cutoff_term").unwrap_or(0.0),
            ),
            Err(DiagnosticsError::RampUnresolved { .. }) if sched.is_none() => (f64::NAN, f64::NAN, f64::NAN),
            Err(e) => return Err(e.into()),
        };
        let levels = match sched {
            Some(s) => excess_sweep_field(u, center, s)?,
            None => Vec::new(),
        };
        Ok(Self {
            fixed: [
                u.time(),
                mass(u),
                energy(u, &whole)?,
                dissipation(u, n, &whole)?,
                entropy(u, alpha)?,
                entropy_dissipation_rhs(u, n, alpha)?,
                bg_lhs,
                bg_diss,
                bg_cut,
                l3_gradient_norm(u),
            ],
            classes: levels.iter().map(|l| l.class.label).collect(),
            excess: levels.iter().map(|l| l.excess.value).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsTable {
    levels: usize,
    rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsTable {
    pub fn new(levels: usize) -> Self {
        Self { levels, rows: Vec::new() }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn rows(&self) -> &[DiagnosticsRow] {
        &self.rows
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
        h.extend((0..self.levels).map(|k| format!("class_r{k}")));
        h.extend((0..self.levels).map(|k| format!("excess_r{k}")));
        h
    }

    pub fn append_row(&mut self, row: DiagnosticsRow) -> Result<(), IoError> {
        if row.classes.len() != self.levels || row.excess.len() != self.levels {
            return Err(IoError::SchemaMismatch(format!(
                "row has {} classes and {} excess values, table has {} levels",
                row.classes.len(),
                row.excess.len(),
                self.levels
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            let cells = row
                .fixed
                .iter()
                .map(|&v| format_float(v))
                .chain(row.classes.iter().map(|c| c.to_string()))
                .chain(row.excess.iter().map(|&v| format_float(v)));
            let line: Vec<String> = cells.collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, IoError> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
        let extra = header.len().saturating_sub(FIXED_COLUMNS.len());
        if header.len() < FIXED_COLUMNS.len() || extra % 2 != 0 {
            return Err(IoError::SchemaMismatch(format!("unexpected header with {} columns", header.len())));
        }
        let table = Self::new(extra / 2);
        if header != table.header() {
            return Err(IoError::SchemaMismatch(format!("header {header:?} does not match {:?}", table.header())));
        }
        let mut table = table;
        let num = |s: &str| {
            s.parse::<f64>().map_err(|_| IoError::SchemaMismatch(format!("{s:?} is not a number")))
        };
        for line in lines.filter(|l| !l.is_empty()) {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(IoError::SchemaMismatch(format!("row has {} cells, header {}", cells.len(), header.len())));
            }
            let mut fixed = [0.0; 10];
            for (slot, c) in fixed.iter_mut().zip(&cells) {
                *slot = num(c)?;
            }
            let levels = table.levels;
            let classes = cells[10..10 + levels]
                .iter()
                .map(|c| match *c {
                    "Good" => Ok(TimeLabel::Good),
                    "Bad" => Ok(TimeLabel::Bad),
                    other => Err(IoError::SchemaMismatch(format!("{other:?} is not Good or Bad"))),
                })
                .collect::<Result<_, _>>()?;
            let excess = cells[10 + levels..].iter().map(|c| num(c)).collect::<Result<_, _>>()?;
            table.append_row(DiagnosticsRow { fixed, classes, excess })?;
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        std::fs::write(path, self.to_csv()).map_err(|e| IoError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        Self::parse_csv(&text)
    }
}
