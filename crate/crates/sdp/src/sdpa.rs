use std::io::{self, Write};

use crate::BlockSdp;

/// Writes `problem` in SDPA sparse format (`.dat-s`).
///
/// SDPA minimizes `sum_i c_i x_i` subject to `sum_i F_i x_i - F_0 >= 0`, so
/// the objective is negated and `F_0 = -C0`. Indices are 1-based and only
/// the upper triangle is written.
pub fn write_sdpa<W: Write>(problem: &BlockSdp, comment: &str, mut out: W) -> io::Result<()> {
    for line in comment.lines() {
        writeln!(out, "\"{line}")?;
    }
    writeln!(out, "{}", problem.num_vars())?;
    writeln!(out, "{}", problem.block_sizes.len())?;
    let sizes: Vec<String> = problem.block_sizes.iter().map(|s| s.to_string()).collect();
    writeln!(out, "{}", sizes.join(" "))?;
    let costs: Vec<String> = problem.objective.iter().map(|c| format!("{}", -c)).collect();
    writeln!(out, "{}", costs.join(" "))?;
    for e in &problem.constant.entries {
        if e.value != 0.0 {
            writeln!(out, "0 {} {} {} {}", e.block + 1, e.row + 1, e.col + 1, -e.value)?;
        }
    }
    for (k, a) in problem.coefficients.iter().enumerate() {
        for e in &a.entries {
            writeln!(out, "{} {} {} {} {}", k + 1, e.block + 1, e.row + 1, e.col + 1, e.value)?;
        }
    }
    Ok(())
}
