//! Gaussian cube volumetric files.
//!
//! Layout: two comment lines; `natoms ox oy oz`; three axis records
//! `n vx vy vz`; `natoms` atom records `Z charge x y z`; then `n1·n2·n3`
//! values with the third axis fastest. Lengths are in Bohr; a negative axis
//! count marks Ångström lengths, which are converted.

use std::path::Path;

use lobound::density::{DensityField, GridDensity};

use crate::error::CliError;

pub const BOHR_PER_ANGSTROM: f64 = 1.0 / 0.529_177_210_903;
/// Off-diagonal step components above this (relative) are rejected.
const AXIS_ALIGNMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub number: i64,
    pub charge: f64,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeVolume {
    pub comments: [String; 2],
    pub origin: [f64; 3],
    pub counts: [usize; 3],
    /// Step vector of each axis, in Bohr.
    pub axes: [[f64; 3]; 3],
    pub atoms: Vec<Atom>,
    pub values: Vec<f64>,
    /// Number of negative values replaced by zero.
    pub clamped: usize,
}

/// What to do with negative density values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeValues {
    Reject,
    Clamp,
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str), CliError> {
        self.iter
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| CliError::Parse(format!("unexpected end of file while reading {what}")))
    }
}

fn fields<const N: usize>(line: usize, text: &str, what: &str) -> Result<[f64; N], CliError> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    if toks.len() < N {
        return Err(CliError::Parse(format!(
            "line {line}: {what} needs {N} fields, found {}",
            toks.len()
        )));
    }
    let mut out = [0.0; N];
    for (o, t) in out.iter_mut().zip(&toks) {
        *o = t
            .parse()
            .map_err(|_| CliError::Parse(format!("line {line}: cannot parse '{t}' in {what}")))?;
    }
    Ok(out)
}

fn integer(line: usize, v: f64, what: &str) -> Result<i64, CliError> {
    if v.fract() != 0.0 {
        return Err(CliError::Parse(format!("line {line}: {what} must be an integer, got {v}")));
    }
    Ok(v as i64)
}

pub fn parse_cube_str(text: &str, negatives: NegativeValues) -> Result<CubeVolume, CliError> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
    };
    let c1 = lines.next_line("the first comment line")?.1.to_string();
    let c2 = lines.next_line("the second comment line")?.1.to_string();
    let (ln, l) = lines.next_line("the atom count and origin")?;
    let [na, ox, oy, oz] = fields::<4>(ln, l, "atom count and origin")?;
    let natoms = integer(ln, na, "atom count")?;
    if natoms < 0 {
        return Err(CliError::Parse(format!(
            "line {ln}: negative atom count {natoms} marks an orbital file, not a density"
        )));
    }
    let mut counts = [0usize; 3];
    let mut axes = [[0.0; 3]; 3];
    let mut angstrom = [false; 3];
    for a in 0..3 {
        let (ln, l) = lines.next_line("an axis record")?;
        let [n, vx, vy, vz] = fields::<4>(ln, l, "axis record")?;
        let n = integer(ln, n, "axis count")?;
        if n == 0 {
            return Err(CliError::Parse(format!("line {ln}: axis {a} has no points")));
        }
        angstrom[a] = n < 0;
        counts[a] = n.unsigned_abs() as usize;
        axes[a] = [vx, vy, vz];
    }
    if angstrom.iter().any(|&a| a != angstrom[0]) {
        return Err(CliError::Parse("axis records mix Bohr and Ångström units".into()));
    }
    let scale = if angstrom[0] { BOHR_PER_ANGSTROM } else { 1.0 };
    for (a, ax) in axes.iter_mut().enumerate() {
        for v in ax.iter_mut() {
            *v *= scale;
        }
        let diag = ax[a].abs();
        if diag.is_nan() || diag <= 0.0 {
            return Err(CliError::Parse(format!("axis {a} has zero step along its own direction")));
        }
        for (b, v) in ax.iter().enumerate() {
            if b != a && v.abs() > AXIS_ALIGNMENT_TOL * diag {
                return Err(CliError::Parse(format!(
                    "axis {a} is not aligned with a Cartesian direction; only orthogonal grids are supported"
                )));
            }
        }
    }
    let origin = [ox * scale, oy * scale, oz * scale];
    let mut atoms = Vec::with_capacity(natoms as usize);
    for _ in 0..natoms {
        let (ln, l) = lines.next_line("an atom record")?;
        let [z, q, x, y, w] = fields::<5>(ln, l, "atom record")?;
        atoms.push(Atom {
            number: integer(ln, z, "atomic number")?,
            charge: q,
            position: [x * scale, y * scale, w * scale],
        });
    }
    let expected = counts[0] * counts[1] * counts[2];
    let mut values = Vec::with_capacity(expected);
    let mut last_line = ln;
    for (i, l) in lines.iter.by_ref() {
        last_line = i + 1;
        for t in l.split_whitespace() {
            if values.len() == expected {
                return Err(CliError::Parse(format!(
                    "line {}: more values than the {expected} declared by the axis counts",
                    i + 1
                )));
            }
            let v: f64 = t
                .parse()
                .map_err(|_| CliError::Parse(format!("line {}: cannot parse value '{t}'", i + 1)))?;
            values.push(v);
        }
    }
    if values.len() != expected {
        return Err(CliError::Parse(format!(
            "line {last_line}: value stream ends after {} values, axis counts declare {expected}",
            values.len()
        )));
    }
    let mut clamped = 0;
    for (i, v) in values.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(CliError::Parse(format!("value {i} is not finite")));
        }
        if *v < 0.0 {
            match negatives {
                NegativeValues::Reject => {
                    return Err(CliError::Parse(format!(
                        "value {i} is negative ({v}); densities must be non-negative (use --clamp-negative to zero them)"
                    )))
                }
                NegativeValues::Clamp => {
                    *v = 0.0;
                    clamped += 1;
                }
            }
        }
    }
    Ok(CubeVolume {
        comments: [c1, c2],
        origin,
        counts,
        axes,
        atoms,
        values,
        clamped,
    })
}

pub fn parse_cube(path: &Path, negatives: NegativeValues) -> Result<CubeVolume, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_cube_str(&text, negatives)
}

impl CubeVolume {
    /// Axis-aligned grid with spacing `|step|` per axis; a negative step
    /// reverses the axis, which the functionals do not depend on.
    pub fn into_density(self) -> Result<DensityField, CliError> {
        let spacing = [self.axes[0][0].abs(), self.axes[1][1].abs(), self.axes[2][2].abs()];
        let grid = GridDensity::new(self.counts, spacing, self.origin, self.values)?;
        Ok(DensityField::CartesianGrid(grid))
    }

    /// Cube text with every value written in shortest round-trip form.
    #[cfg(test)]
    pub fn to_cube_string(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.comments[0]);
        let _ = writeln!(s, "{}", self.comments[1]);
        let o = self.origin;
        let _ = writeln!(s, "{} {:e} {:e} {:e}", self.atoms.len(), o[0], o[1], o[2]);
        for (n, ax) in self.counts.iter().zip(&self.axes) {
            let _ = writeln!(s, "{n} {:e} {:e} {:e}", ax[0], ax[1], ax[2]);
        }
        for a in &self.atoms {
            let p = a.position;
            let _ = writeln!(s, "{} {:e} {:e} {:e} {:e}", a.number, a.charge, p[0], p[1], p[2]);
        }
        for row in self.values.chunks(6) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    #[cfg(test)]
    pub fn from_grid(g: &GridDensity, comment: &str) -> Self {
        Self {
            comments: [comment.to_string(), "density".to_string()],
            origin: g.origin,
            counts: g.dims,
            axes: [
                [g.spacing[0], 0.0, 0.0],
                [0.0, g.spacing[1], 0.0],
                [0.0, 0.0, g.spacing[2]],
            ],
            atoms: Vec::new(),
            values: g.values.clone(),
            clamped: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lobound::functionals::f_grad_l1;

    const MINIMAL: &str = "test\ncube\n1 0.0 0.0 0.0\n2 0.5 0 0\n2 0 0.5 0\n2 0 0 0.5\n1 1.0 0 0 0\n1 2 3 4 5\n6 7 8\n";

    #[test]
    fn minimal_cube_round_trips() {
        let c = parse_cube_str(MINIMAL, NegativeValues::Reject).unwrap();
        assert_eq!(c.values, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(c.atoms.len(), 1);
        let again = parse_cube_str(&c.to_cube_string(), NegativeValues::Reject).unwrap();
        assert_eq!(again, c);
        match c.into_density().unwrap() {
            DensityField::CartesianGrid(g) => {
                assert_eq!(g.dims, [2, 2, 2]);
                assert_eq!(g.spacing, [0.5; 3]);
                // third axis fastest
                assert_eq!(g.values[g.index(0, 0, 1)], 2.0);
                assert_eq!(g.values[g.index(1, 0, 0)], 5.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn value_count_mismatch_names_a_line() {
        let short = MINIMAL.replace("6 7 8\n", "6 7\n");
        let e = parse_cube_str(&short, NegativeValues::Reject).unwrap_err().to_string();
        assert!(e.contains("line 9") && e.contains("7 values"), "{e}");
        let long = MINIMAL.replace("6 7 8\n", "6 7 8\n9\n");
        let e = parse_cube_str(&long, NegativeValues::Reject).unwrap_err().to_string();
        assert!(e.contains("line 10"), "{e}");
    }

    #[test]
    fn rejects_orbital_files_and_skewed_axes() {
        let orbital = MINIMAL.replace("1 0.0 0.0 0.0", "-1 0.0 0.0 0.0");
        let e = parse_cube_str(&orbital, NegativeValues::Reject).unwrap_err().to_string();
        assert!(e.contains("orbital"), "{e}");
        let skew = MINIMAL.replace("2 0 0.5 0", "2 0.1 0.5 0");
        assert!(parse_cube_str(&skew, NegativeValues::Reject).is_err());
    }

    #[test]
    fn negative_values_rejected_or_clamped() {
        let neg = MINIMAL.replace("6 7 8", "6 -7 8");
        assert!(parse_cube_str(&neg, NegativeValues::Reject).is_err());
        let c = parse_cube_str(&neg, NegativeValues::Clamp).unwrap();
        assert_eq!(c.clamped, 1);
        assert_eq!(c.values[6], 0.0);
    }

    #[test]
    fn angstrom_axes_are_converted() {
        let ang = MINIMAL
            .replace("2 0.5 0 0", "-2 0.5 0 0")
            .replace("2 0 0.5 0", "-2 0 0.5 0")
            .replace("2 0 0 0.5", "-2 0 0 0.5");
        let c = parse_cube_str(&ang, NegativeValues::Reject).unwrap();
        assert!((c.axes[0][0] - 0.5 * BOHR_PER_ANGSTROM).abs() < 1e-15);
        let mixed = MINIMAL.replace("2 0.5 0 0", "-2 0.5 0 0");
        assert!(parse_cube_str(&mixed, NegativeValues::Reject).is_err());
    }

    #[test]
    fn anisotropic_grid_is_read_exactly() {
        let g = GridDensity::sample(
            [30, 26, 34],
            [6.0 / 29.0, 6.0 / 25.0, 6.0 / 33.0],
            [-3.0; 3],
            |x| (-std::f64::consts::PI * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(),
        )
        .unwrap();
        let text = CubeVolume::from_grid(&g, "gaussian").to_cube_string();
        let parsed = parse_cube_str(&text, NegativeValues::Reject).unwrap().into_density().unwrap();
        let direct = DensityField::CartesianGrid(g);
        assert_eq!(f_grad_l1(&parsed).unwrap(), f_grad_l1(&direct).unwrap());
    }
}
