use std::io::{self, Write};

use super::solver::WaveformSample;

/// Writes `t_s,v_source,v_out,i_load,v_c1..v_cn`.
pub fn write_waveform_csv<W: Write>(out: &mut W, stages: usize, samples: &[WaveformSample]) -> io::Result<()> {
    write!(out, "t_s,v_source,v_out,i_load")?;
    for k in 1..=stages {
        write!(out, ",v_c{k}")?;
    }
    writeln!(out)?;
    for s in samples {
        write!(out, "{},{},{},{}", s.t, s.v_source, s.v_out, s.i_load)?;
        for v in &s.v_caps {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
