//! Line-oriented text formats for value functions, learner checkpoints and
//! transition datasets.
//!
//! Floats are written in shortest round-trip exponent form, so every file
//! reparses to bit-identical values.
//!
//! ```text
//! 2 3 gaussian 2e-1 1.56e-2          p M kernel params
//! -5e-1 0e0 -1.25e0                  center coordinates, then weight
//! ...
//! state -3.1e-1 2000                 checkpoint trailer: z t
//! ```

use std::io::{BufRead, Write};

use pkgtd_core::{Dictionary, KernelSpec, LearnerState, RkhsFunction, Transition};
use pkgtd_core::mountaincar::Dataset;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] pkgtd_core::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, FormatError> {
    tok.parse().map_err(|_| parse_err(line, format!("bad number {tok:?}")))
}

fn parse_int<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, FormatError> {
    tok.parse().map_err(|_| parse_err(line, format!("bad integer {tok:?}")))
}

/// Reads lines, tracking the one-based line number.
struct Lines<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn new(inner: R) -> Self {
        Lines { inner, line: 0, buf: String::new() }
    }

    fn next(&mut self) -> Result<Option<&str>, FormatError> {
        self.buf.clear();
        if self.inner.read_line(&mut self.buf)? == 0 {
            return Ok(None);
        }
        self.line += 1;
        Ok(Some(self.buf.trim_end_matches(['\n', '\r'])))
    }

    fn expect(&mut self, what: &str) -> Result<&str, FormatError> {
        let line = self.line + 1;
        self.next()?.ok_or_else(|| parse_err(line, format!("unexpected end of file, expected {what}")))
    }
}

pub fn write_rkhs<W: Write>(f: &RkhsFunction, mut w: W) -> Result<(), FormatError> {
    write!(w, "{} {}", f.dim(), f.model_order())?;
    match f.spec() {
        KernelSpec::Gaussian { bandwidths } => {
            write!(w, " gaussian")?;
            for s in bandwidths {
                write!(w, " {s:e}")?;
            }
        }
        KernelSpec::Polynomial { offset, degree } => write!(w, " polynomial {offset:e} {degree}")?,
    }
    writeln!(w)?;
    for (x, c) in f.dictionary().points().zip(f.coeffs()) {
        for v in x {
            write!(w, "{v:e} ")?;
        }
        writeln!(w, "{c:e}")?;
    }
    Ok(())
}

fn read_rkhs_from<R: BufRead>(lines: &mut Lines<R>) -> Result<RkhsFunction, FormatError> {
    let header = lines.expect("header")?.to_owned();
    let n = lines.line;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() < 3 {
        return Err(parse_err(n, "header needs: p M kernel params"));
    }
    let p: usize = parse_int(toks[0], n)?;
    let m: usize = parse_int(toks[1], n)?;
    let spec = match (toks[2], &toks[3..]) {
        ("gaussian", params) => {
            let bw = params.iter().map(|t| parse_f64(t, n)).collect::<Result<Vec<_>, _>>()?;
            KernelSpec::gaussian(bw)?
        }
        ("polynomial", [b, c]) => KernelSpec::polynomial(parse_f64(b, n)?, parse_int(c, n)?)?,
        ("polynomial", _) => return Err(parse_err(n, "polynomial kernel takes: offset degree")),
        (other, _) => return Err(parse_err(n, format!("unknown kernel {other:?}"))),
    };
    let mut dict = Dictionary::with_capacity(p, m);
    let mut coeffs = Vec::with_capacity(m);
    let mut point = Vec::with_capacity(p);
    for _ in 0..m {
        let row = lines.expect("center line")?.to_owned();
        let n = lines.line;
        point.clear();
        for tok in row.split_whitespace() {
            point.push(parse_f64(tok, n)?);
        }
        if point.len() != p + 1 {
            return Err(parse_err(n, format!("expected {} fields, found {}", p + 1, point.len())));
        }
        coeffs.push(point[p]);
        dict.push(&point[..p])?;
    }
    Ok(RkhsFunction::new(spec, dict, coeffs)?)
}

pub fn read_rkhs<R: BufRead>(r: R) -> Result<RkhsFunction, FormatError> {
    read_rkhs_from(&mut Lines::new(r))
}

pub fn write_checkpoint<W: Write>(state: &LearnerState, mut w: W) -> Result<(), FormatError> {
    write_rkhs(&state.value, &mut w)?;
    writeln!(w, "state {:e} {}", state.z, state.t)?;
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(r: R) -> Result<LearnerState, FormatError> {
    let mut lines = Lines::new(r);
    let value = read_rkhs_from(&mut lines)?;
    let trailer = lines.expect("state trailer")?.to_owned();
    let n = lines.line;
    match trailer.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["state", z, t] => Ok(LearnerState { value, z: parse_f64(z, n)?, t: parse_int(t, n)? }),
        _ => Err(parse_err(n, "expected trailer: state <z> <t>")),
    }
}

/// Writes the header, then per trajectory a `# trajectory <i>` line followed
/// by `pos,vel,action,next_pos,next_vel,reward,terminal` rows.
pub fn write_dataset<W: Write>(data: &Dataset, mut w: W) -> Result<(), FormatError> {
    writeln!(
        w,
        "# seed={} policy={} n_traj={} steps={}",
        data.seed,
        data.policy,
        data.trajectories.len(),
        data.steps_per_trajectory
    )?;
    for (i, traj) in data.trajectories.iter().enumerate() {
        writeln!(w, "# trajectory {i}")?;
        for s in traj {
            writeln!(
                w,
                "{:e},{:e},{},{:e},{:e},{:e},{}",
                s.x[0], s.x[1], s.action, s.y[0], s.y[1], s.reward, s.terminal as u8
            )?;
        }
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(r: R) -> Result<Dataset, FormatError> {
    let mut lines = Lines::new(r);
    let header = lines.expect("dataset header")?.to_owned();
    let fields = header
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "dataset header must start with '#'"))?;
    let (mut seed, mut policy, mut n_traj, mut steps) = (None, None, None, None);
    for kv in fields.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| parse_err(1, format!("bad header field {kv:?}")))?;
        match k {
            "seed" => seed = Some(parse_int::<u64>(v, 1)?),
            "policy" => policy = Some(v.to_owned()),
            "n_traj" => n_traj = Some(parse_int::<usize>(v, 1)?),
            "steps" => steps = Some(parse_int::<usize>(v, 1)?),
            _ => return Err(parse_err(1, format!("unknown header field {k:?}"))),
        }
    }
    let (Some(seed), Some(policy), Some(n_traj), Some(steps)) = (seed, policy, n_traj, steps) else {
        return Err(parse_err(1, "header needs seed, policy, n_traj and steps"));
    };
    let mut trajectories: Vec<Vec<Transition>> = Vec::with_capacity(n_traj);
    while let Some(row) = lines.next()? {
        let row = row.trim().to_owned();
        let n = lines.line;
        if row.is_empty() {
            continue;
        }
        if let Some(rest) = row.strip_prefix('#') {
            if rest.trim().starts_with("trajectory") {
                trajectories.push(Vec::with_capacity(steps));
                continue;
            }
            return Err(parse_err(n, "unexpected comment line"));
        }
        let traj = trajectories.last_mut().ok_or_else(|| parse_err(n, "transition before first trajectory marker"))?;
        let f: Vec<&str> = row.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(parse_err(n, format!("expected 7 fields, found {}", f.len())));
        }
        let terminal = match f[6] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(n, format!("bad terminal flag {other:?}"))),
        };
        traj.push(Transition {
            x: vec![parse_f64(f[0], n)?, parse_f64(f[1], n)?],
            action: parse_int(f[2], n)?,
            y: vec![parse_f64(f[3], n)?, parse_f64(f[4], n)?],
            reward: parse_f64(f[5], n)?,
            terminal,
        });
    }
    if trajectories.len() != n_traj {
        return Err(parse_err(lines.line, format!("header says {n_traj} trajectories, found {}", trajectories.len())));
    }
    if let Some((i, t)) = trajectories.iter().enumerate().find(|(_, t)| t.len() != steps) {
        return Err(parse_err(lines.line, format!("trajectory {i} has {} transitions, header says {steps}", t.len())));
    }
    Ok(Dataset { trajectories, seed, policy, steps_per_trajectory: steps })
}
