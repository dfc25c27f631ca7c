//! CSV export and import of traces and spectra.
//!
//! Reals are written with Rust's shortest round-trip formatting, so reading a
//! file back gives bit-identical values. Booleans are `1`/`0`, and a missing
//! transition offset is `NaN`.

use std::io::{Read, Write};
use std::path::Path;

use crate::analysis::SpectrumEstimate;
use crate::model::CycleRecord;
use crate::{Error, Result};

pub const TRACE_HEADER: [&str; 8] = ["cycle", "t_s", "v_c_V", "f_Hz", "fll_code", "fll_engaged", "dv_pd_V", "tx_off_s"];
pub const SPECTRUM_HEADER: [&str; 2] = ["f_Hz", "L_dBcHz"];

pub fn write_trace<W: Write>(out: W, trace: &[CycleRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for c in trace {
        w.write_record([
            c.cycle_index.to_string(),
            c.t.to_string(),
            c.v_c.to_string(),
            c.f_inst.to_string(),
            c.fll_code.to_string(),
            u8::from(c.fll_engaged).to_string(),
            c.delta_v_pd.to_string(),
            c.t_x_offset.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trace(path: &Path, trace: &[CycleRecord]) -> Result<()> {
    write_trace(std::io::BufWriter::new(std::fs::File::create(path)?), trace)
}

fn check_header(r: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let h = r.headers()?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, got `{}`", expected.join(","), h.iter().collect::<Vec<_>>().join(",")),
        });
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line() as usize);
    let s = rec.get(i).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column `{name}`"),
    })?;
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad `{name}` value `{s}`"),
    })
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<CycleRecord>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &TRACE_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let engaged: u8 = field(&rec, 5, "fll_engaged")?;
        out.push(CycleRecord {
            cycle_index: field(&rec, 0, "cycle")?,
            t: field(&rec, 1, "t_s")?,
            v_c: field(&rec, 2, "v_c_V")?,
            f_inst: field(&rec, 3, "f_Hz")?,
            fll_code: field(&rec, 4, "fll_code")?,
            fll_engaged: engaged != 0,
            delta_v_pd: field(&rec, 6, "dv_pd_V")?,
            t_x_offset: field(&rec, 7, "tx_off_s")?,
        });
    }
    Ok(out)
}

pub fn load_trace(path: &Path) -> Result<Vec<CycleRecord>> {
    read_trace(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write_spectrum<W: Write>(out: W, spec: &SpectrumEstimate) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SPECTRUM_HEADER)?;
    for (f, l) in spec.freqs.iter().zip(&spec.l_dbchz) {
        w.write_record([f.to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_spectrum(path: &Path, spec: &SpectrumEstimate) -> Result<()> {
    write_spectrum(std::io::BufWriter::new(std::fs::File::create(path)?), spec)
}

/// Reads `f_Hz,L_dBcHz` rows. The averaging count is not stored and comes back as 0.
pub fn read_spectrum<R: Read>(input: R) -> Result<SpectrumEstimate> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &SPECTRUM_HEADER)?;
    let (mut freqs, mut l_dbchz) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        freqs.push(field::<f64>(&rec, 0, "f_Hz")?);
        l_dbchz.push(field::<f64>(&rec, 1, "L_dBcHz")?);
    }
    let resolution_bw = if freqs.len() >= 2 { freqs[1] - freqs[0] } else { f64::NAN };
    Ok(SpectrumEstimate {
        freqs,
        l_dbchz,
        resolution_bw,
        n_averages: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<CycleRecord> {
        vec![
            CycleRecord {
                cycle_index: 0,
                t: 0.0,
                v_c: 0.6,
                f_inst: 263e6,
                fll_code: 63,
                fll_engaged: true,
                delta_v_pd: 0.0,
                t_x_offset: f64::NAN,
            },
            CycleRecord {
                cycle_index: 1,
                t: 4e-8,
                v_c: 0.6000000000000001,
                f_inst: 249_999_999.99999997,
                fll_code: 43,
                fll_engaged: false,
                delta_v_pd: -1.234567890123e-7,
                t_x_offset: 1.0000000000000002e-9,
            },
        ]
    }

    #[test]
    fn trace_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_trace(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("cycle,t_s,v_c_V,f_Hz,fll_code,fll_engaged,dv_pd_V,tx_off_s\n"));
        assert!(text.contains(",1,0,NaN\n"));
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back[0].t_x_offset.is_nan());
        assert_eq!(back[1], sample()[1]);
        assert_eq!(back[0].f_inst.to_bits(), 263e6f64.to_bits());
    }

    #[test]
    fn bad_rows_are_located() {
        let text = "cycle,t_s,v_c_V,f_Hz,fll_code,fll_engaged,dv_pd_V,tx_off_s\n0,0,0.6,1,2,0,0,NaN\n1,x,0.6,1,2,0,0,NaN\n";
        match read_trace(text.as_bytes()) {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(read_trace("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn spectrum_round_trip() {
        let spec = SpectrumEstimate {
            freqs: vec![0.0, 381.4697265625, 762.939453125],
            l_dbchz: vec![-400.0, -93.25, -101.0000001],
            resolution_bw: 381.4697265625,
            n_averages: 3,
        };
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &spec).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("f_Hz,L_dBcHz\n"));
        let back = read_spectrum(buf.as_slice()).unwrap();
        assert_eq!((back.freqs, back.l_dbchz), (spec.freqs, spec.l_dbchz));
    }
}
