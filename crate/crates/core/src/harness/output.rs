//! CSV emission: a header row, one row per record, numbers with 9
//! significant digits, plus the SNR convention and tool version.

use std::io::Write;

use super::HarnessError;

/// Version string written to every row.
pub fn version() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// `%.9g`-style formatting.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..9).contains(&exp) {
        let s = format!("{v:.8e}");
        let (mant, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mant = trim_zeros(mant);
        let e: i32 = e.parse().unwrap_or(0);
        let sign = if e < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", e.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table with a fixed header.
pub struct Table<W: Write> {
    writer: csv::Writer<W>,
    width: usize,
}

impl<W: Write> Table<W> {
    pub fn new(out: W, header: &[&str]) -> Result<Self, HarnessError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(header)?;
        Ok(Table {
            writer,
            width: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), HarnessError> {
        debug_assert_eq!(fields.len(), self.width);
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), HarnessError> {
        self.writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_num(0.925_735_294_117_647), "0.925735294");
        assert_eq!(fmt_num(12.5), "12.5");
        assert_eq!(fmt_num(-3.0), "-3");
        assert_eq!(fmt_num(1.234_567_891_23e-7), "1.23456789e-07");
        assert_eq!(fmt_num(123_456_789_012.0), "1.23456789e+11");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(100.0), "100");
    }

    #[test]
    fn table_writes_header_and_rows() {
        let mut buf = Vec::new();
        let mut t = Table::new(&mut buf, &["a", "b"]).unwrap();
        t.row(&["1".into(), fmt_num(0.5)]).unwrap();
        t.finish().unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,0.5\n");
    }
}
