//! Writers shared by the subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use xormmap::BitVec;

/// Buffered standard output or a freshly created file.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Bit `i` of the vector is character `i`.
pub fn bits(v: &BitVec) -> String {
    v.iter().map(|b| if b { '1' } else { '0' }).collect()
}

/// `log10 2^e`.
pub fn pow2_log10(e: usize) -> f64 {
    e as f64 * std::f64::consts::LOG10_2
}
