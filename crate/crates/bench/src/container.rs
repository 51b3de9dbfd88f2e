//! Binary container for synthetic compressed-sensing instances.
//!
//! All fields little-endian, no padding:
//!
//! | offset | type         | field                                   |
//! |--------|--------------|-----------------------------------------|
//! | 0      | `[u8; 8]`    | magic `MINIEGCS`                        |
//! | 8      | `u32`        | format version (1)                      |
//! | 12     | `u64`        | `n` signal dimension                    |
//! | 20     | `u64`        | `m` measurements                        |
//! | 28     | `u64`        | `k` sparsity                            |
//! | 36     | `u64`        | seed                                    |
//! | 44     | `f64`        | SNR in dB, `+inf` for noiseless         |
//! | 52     | `f64`        | `τ`                                     |
//! | 60     | `f64 × m·n`  | `A`, row-major                          |
//! |        | `f64 × m`    | `b`                                     |
//! |        | `f64 × n`    | planted signal                          |

use std::io::{self, Read, Write};

use minieg::linalg::DenseMatrix;
use minieg::problems::{CsProblem, SyntheticCsSpec};
use minieg::{Point, ProblemError};

pub const MAGIC: &[u8; 8] = b"MINIEGCS";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a synthetic CS container (bad magic)")]
    Magic,
    #[error("unsupported container version {0}")]
    Version(u32),
    #[error("container header is inconsistent: {0}")]
    Header(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsInstance {
    pub spec: SyntheticCsSpec,
    pub tau: f64,
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
}

impl CsInstance {
    pub fn generate(spec: &SyntheticCsSpec) -> Result<Self, ProblemError> {
        let (p, x) = CsProblem::synthetic(spec)?;
        Ok(CsInstance {
            spec: *spec,
            tau: p.tau(),
            a: p.sensing().clone(),
            b: p.measurements().to_vec(),
            x_true: x.into_vec(),
        })
    }

    pub fn to_problem(&self) -> Result<CsProblem, ProblemError> {
        CsProblem::with_tau(self.a.clone(), self.b.clone(), self.tau)
    }

    pub fn ground_truth(&self) -> Point {
        Point::new(self.x_true.clone()).expect("finite by construction")
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for v in [self.spec.n, self.spec.m, self.spec.k] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        w.write_all(&self.spec.seed.to_le_bytes())?;
        w.write_all(&self.spec.snr_db.unwrap_or(f64::INFINITY).to_le_bytes())?;
        w.write_all(&self.tau.to_le_bytes())?;
        for v in self.a.data().iter().chain(&self.b).chain(&self.x_true) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, ContainerError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(ContainerError::Magic);
        }
        let version = u32::from_le_bytes(read_array(&mut r)?);
        if version != VERSION {
            return Err(ContainerError::Version(version));
        }
        let n = read_u64(&mut r)? as usize;
        let m = read_u64(&mut r)? as usize;
        let k = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        let snr = read_f64(&mut r)?;
        let tau = read_f64(&mut r)?;
        let spec = SyntheticCsSpec {
            n,
            m,
            k,
            snr_db: if snr == f64::INFINITY {
                None
            } else {
                Some(snr)
            },
            seed,
        };
        spec.validate()
            .map_err(|e| ContainerError::Header(e.to_string()))?;
        let data = read_f64s(&mut r, m * n)?;
        let b = read_f64s(&mut r, m)?;
        let x_true = read_f64s(&mut r, n)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(ContainerError::Header("trailing bytes".into()));
        }
        Ok(CsInstance {
            spec,
            tau,
            a: DenseMatrix::from_row_major(m, n, data),
            b,
            x_true,
        })
    }
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

fn read_f64s<R: Read>(r: &mut R, len: usize) -> io::Result<Vec<f64>> {
    (0..len).map(|_| read_f64(r)).collect()
}
