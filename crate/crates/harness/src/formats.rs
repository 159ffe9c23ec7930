//! Little-endian binary containers: `SIE2` snapshots, `SIEW` noise tables and `SIET`
//! trajectories.

use std::io::{self, Read, Write};

use sie_core::spectral::Modes;
use sie_core::{BrownianTable, ModeIndex, SpectralField, Trajectory};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"SIE2";
pub const NOISE_MAGIC: [u8; 4] = *b"SIEW";
pub const TRAJECTORY_MAGIC: [u8; 4] = *b"SIET";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic {found:?}, expected {expected:?}")]
    Magic { found: [u8; 4], expected: [u8; 4] },
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("corrupt container: {0}")]
    Corrupt(String),
}

fn put_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_i32(w: &mut impl Write, v: i32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn take<const L: usize>(r: &mut impl Read) -> io::Result<[u8; L]> {
    let mut buf = [0u8; L];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn get_u32(r: &mut impl Read) -> io::Result<u32> {
    take(r).map(u32::from_le_bytes)
}

fn get_u64(r: &mut impl Read) -> io::Result<u64> {
    take(r).map(u64::from_le_bytes)
}

fn get_i32(r: &mut impl Read) -> io::Result<i32> {
    take(r).map(i32::from_le_bytes)
}

fn get_f64(r: &mut impl Read) -> io::Result<f64> {
    take(r).map(f64::from_le_bytes)
}

/// Reads magic and version and returns `(N, count)`.
fn read_frame(r: &mut impl Read, magic: [u8; 4]) -> Result<(usize, u64), FormatError> {
    let found = take::<4>(r)?;
    if found != magic {
        return Err(FormatError::Magic {
            found,
            expected: magic,
        });
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(FormatError::Version(version));
    }
    let n = get_u32(r)? as usize;
    let count = get_u64(r)?;
    if n == 0 {
        return Err(FormatError::Corrupt("truncation radius is zero".into()));
    }
    Ok((n, count))
}

fn write_frame(w: &mut impl Write, magic: [u8; 4], n: usize, count: usize) -> io::Result<()> {
    w.write_all(&magic)?;
    put_u32(w, VERSION)?;
    put_u32(w, n as u32)?;
    put_u64(w, count as u64)
}

fn expect_mode(r: &mut impl Read, expected: ModeIndex) -> Result<(), FormatError> {
    let k = ModeIndex::new(get_i32(r)?, get_i32(r)?);
    if k != expected {
        return Err(FormatError::Corrupt(format!(
            "found mode {k} where {expected} was expected"
        )));
    }
    Ok(())
}

pub fn write_snapshot(w: &mut impl Write, field: &SpectralField) -> io::Result<()> {
    write_frame(w, SNAPSHOT_MAGIC, field.truncation(), field.dimension())?;
    for (k, c) in field.iter() {
        put_i32(w, k.k1)?;
        put_i32(w, k.k2)?;
        put_f64(w, c)?;
    }
    Ok(())
}

/// Reads a snapshot holding every mode of `Λ_N` in lexicographic order.
pub fn read_snapshot(r: &mut impl Read) -> Result<SpectralField, FormatError> {
    let (n, count) = read_frame(r, SNAPSHOT_MAGIC)?;
    let modes = Modes::new(n);
    if count != modes.len() as u64 {
        return Err(FormatError::Corrupt(format!(
            "{count} records for a truncation with {} modes",
            modes.len()
        )));
    }
    let mut coeffs = Vec::with_capacity(modes.len());
    for k in modes.iter() {
        expect_mode(r, k)?;
        coeffs.push(get_f64(r)?);
    }
    SpectralField::from_coefficients(n, coeffs).map_err(|e| FormatError::Corrupt(e.to_string()))
}

/// Dumps every mode's finest increments. The final time is not part of the container.
pub fn write_noise_table(w: &mut impl Write, table: &BrownianTable) -> io::Result<()> {
    let modes = Modes::new(table.truncation());
    write_frame(w, NOISE_MAGIC, table.truncation(), modes.len())?;
    for k in modes.iter() {
        put_i32(w, k.k1)?;
        put_i32(w, k.k2)?;
        put_u64(w, table.n_fine() as u64)?;
        for &v in table.mode_increments(k).expect("mode of the table") {
            put_f64(w, v)?;
        }
    }
    Ok(())
}

pub fn read_noise_table(r: &mut impl Read, t_end: f64) -> Result<BrownianTable, FormatError> {
    let (n, count) = read_frame(r, NOISE_MAGIC)?;
    let modes = Modes::new(n);
    if count != modes.len() as u64 {
        return Err(FormatError::Corrupt(format!("{count} modes for N = {n}")));
    }
    let mut n_fine = None;
    let mut increments = Vec::new();
    for k in modes.iter() {
        expect_mode(r, k)?;
        let len = get_u64(r)? as usize;
        if *n_fine.get_or_insert(len) != len {
            return Err(FormatError::Corrupt(format!(
                "mode {k} has {len} increments"
            )));
        }
        for _ in 0..len {
            increments.push(get_f64(r)?);
        }
    }
    BrownianTable::from_increments(n, n_fine.unwrap_or(0), t_end, increments)
        .map_err(|e| FormatError::Corrupt(e.to_string()))
}

/// Metadata written ahead of the states of a trajectory file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryHeader {
    pub t_end: f64,
    pub steps: u64,
    pub level: u32,
    pub seed: u64,
    pub path_id: u64,
    pub c0: f64,
    pub r: f64,
    pub tau: f64,
}

/// `SIET`, version, then the header fields in declaration order, then `steps + 1`
/// complete `SIE2` snapshots.
pub fn write_trajectory(
    w: &mut impl Write,
    header: &TrajectoryHeader,
    trajectory: &Trajectory,
) -> io::Result<()> {
    w.write_all(&TRAJECTORY_MAGIC)?;
    put_u32(w, VERSION)?;
    put_f64(w, header.t_end)?;
    put_u64(w, header.steps)?;
    put_u32(w, header.level)?;
    put_u64(w, header.seed)?;
    put_u64(w, header.path_id)?;
    put_f64(w, header.c0)?;
    put_f64(w, header.r)?;
    put_f64(w, header.tau)?;
    for state in &trajectory.states {
        write_snapshot(w, state)?;
    }
    Ok(())
}

pub fn read_trajectory(
    r: &mut impl Read,
) -> Result<(TrajectoryHeader, Vec<SpectralField>), FormatError> {
    let found = take::<4>(r)?;
    if found != TRAJECTORY_MAGIC {
        return Err(FormatError::Magic {
            found,
            expected: TRAJECTORY_MAGIC,
        });
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(FormatError::Version(version));
    }
    let header = TrajectoryHeader {
        t_end: get_f64(r)?,
        steps: get_u64(r)?,
        level: get_u32(r)?,
        seed: get_u64(r)?,
        path_id: get_u64(r)?,
        c0: get_f64(r)?,
        r: get_f64(r)?,
        tau: get_f64(r)?,
    };
    let states = (0..=header.steps)
        .map(|_| read_snapshot(r))
        .collect::<Result<_, _>>()?;
    Ok((header, states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sie_core::{build_spectrum, sample_brownian_table, InitialCondition};

    #[test]
    fn snapshot_layout_is_byte_exact() {
        let field = sie_core::field_from_modes(&[(ModeIndex::new(1, 0), 2.5)], 1).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &field).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 4 + 8 + 8 * 16);
        assert_eq!(&buf[..4], b"SIE2");
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(&buf[8..12], &1u32.to_le_bytes());
        assert_eq!(&buf[12..20], &8u64.to_le_bytes());
        // First record is (-1, -1).
        assert_eq!(&buf[20..24], &(-1i32).to_le_bytes());
        assert_eq!(&buf[24..28], &(-1i32).to_le_bytes());
        // (1, 0) is the seventh record.
        let rec = 20 + 6 * 16;
        assert_eq!(&buf[rec..rec + 8], &[1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&buf[rec + 8..rec + 16], &2.5f64.to_le_bytes());
    }

    #[test]
    fn snapshot_round_trip() {
        let field = InitialCondition::RandomSmooth {
            decay: 1.0,
            seed: 3,
        }
        .build(5)
        .unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &field).unwrap();
        assert_eq!(read_snapshot(&mut buf.as_slice()).unwrap(), field);
        buf[0] = b'X';
        assert!(matches!(
            read_snapshot(&mut buf.as_slice()),
            Err(FormatError::Magic { .. })
        ));
    }

    #[test]
    fn truncated_snapshot_is_an_error() {
        let field = SpectralField::zeros(2).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &field).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(
            read_snapshot(&mut buf.as_slice()),
            Err(FormatError::Io(_))
        ));
    }

    #[test]
    fn noise_table_round_trip() {
        let spectrum = build_spectrum(2, 0.1, 6.0).unwrap();
        let table = sample_brownian_table(&spectrum, 16, 0.5, 1, 2).unwrap();
        let mut buf = Vec::new();
        write_noise_table(&mut buf, &table).unwrap();
        assert_eq!(&buf[..4], b"SIEW");
        let back = read_noise_table(&mut buf.as_slice(), 0.5).unwrap();
        let k = ModeIndex::new(-2, 1);
        assert_eq!(back.mode_increments(k), table.mode_increments(k));
        assert_eq!(back.n_fine(), 16);
    }
}
