//! CSV encodings for slot traces and node-state snapshots.
//!
//! Trace rows are `t,num_transmitters,sender,jammed,outcome,cumulative_p`.
//! `sender` and `cumulative_p` are empty when absent; probabilities are
//! written with 17 significant digits so they parse back bit-exact.

use std::io::{Read, Write};

use crate::antijam::NodeState;
use crate::engine::SlotRecord;
use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 6] = [
    "t",
    "num_transmitters",
    "sender",
    "jammed",
    "outcome",
    "cumulative_p",
];
pub const SNAPSHOT_HEADER: [&str; 5] = ["t", "node_id", "p_v", "c_v", "T_v"];

/// Scientific notation with 17 significant digits.
pub fn format_prob(p: f64) -> String {
    format!("{p:.16e}")
}

pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(TRACE_HEADER)?;
        Ok(TraceWriter { inner })
    }

    pub fn write(&mut self, r: &SlotRecord) -> Result<()> {
        let sender = r.sender.map(|s| s.to_string()).unwrap_or_default();
        let p = r.cumulative_p.map(format_prob).unwrap_or_default();
        self.inner.write_record([
            r.t.to_string().as_str(),
            r.num_transmitters.to_string().as_str(),
            sender.as_str(),
            if r.jammed { "true" } else { "false" },
            r.outcome.as_str(),
            p.as_str(),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))
    }
}

pub fn write_trace<W: Write>(records: &[SlotRecord], writer: W) -> Result<W> {
    let mut w = TraceWriter::new(writer)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

fn field(row: &csv::StringRecord, i: usize) -> Result<&str> {
    row.get(i)
        .ok_or_else(|| Error::Trace(format!("row {:?} has no column {i}", row.position())))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Trace(format!("cannot parse {what} from `{s}`")))
}

pub fn read_trace<R: Read>(reader: R) -> Result<Vec<SlotRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Trace(format!("unexpected header {header:?}")));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let sender = field(&row, 2)?;
        let p = field(&row, 5)?;
        records.push(SlotRecord {
            t: parse(field(&row, 0)?, "t")?,
            num_transmitters: parse(field(&row, 1)?, "num_transmitters")?,
            sender: if sender.is_empty() {
                None
            } else {
                Some(parse(sender, "sender")?)
            },
            jammed: parse(field(&row, 3)?, "jammed")?,
            outcome: field(&row, 4)?.parse()?,
            cumulative_p: if p.is_empty() {
                None
            } else {
                Some(parse(p, "cumulative_p")?)
            },
        });
    }
    Ok(records)
}

/// Writes `t,node_id,p_v,c_v,T_v` rows for one slot's node states.
pub struct SnapshotWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> SnapshotWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(SNAPSHOT_HEADER)?;
        Ok(SnapshotWriter { inner })
    }

    pub fn write_slot(&mut self, t: u64, nodes: &[NodeState]) -> Result<()> {
        for (id, s) in nodes.iter().enumerate() {
            self.inner.write_record([
                t.to_string(),
                id.to_string(),
                format_prob(s.p),
                s.counter.to_string(),
                s.threshold.to_string(),
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Outcome;

    #[test]
    fn writes_literal_columns() {
        let records = [
            SlotRecord {
                t: 0,
                num_transmitters: 1,
                sender: Some(4),
                jammed: false,
                outcome: Outcome::Success,
                cumulative_p: Some(0.125),
            },
            SlotRecord {
                t: 1,
                num_transmitters: 0,
                sender: None,
                jammed: true,
                outcome: Outcome::Jammed,
                cumulative_p: None,
            },
        ];
        let bytes = write_trace(&records, Vec::new()).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(
            text,
            "t,num_transmitters,sender,jammed,outcome,cumulative_p\n\
             0,1,4,false,Success,1.2500000000000000e-1\n\
             1,0,,true,Jammed,\n"
        );
        assert_eq!(read_trace(bytes.as_slice()).unwrap(), records);
    }

    #[test]
    fn probabilities_keep_enough_digits() {
        let p = 1.0 / 24.0 * 1000.0 / 1.1f64.powi(7);
        let s = format_prob(p);
        let mantissa = s.split('e').next().unwrap();
        let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
        assert!(digits >= 12);
        assert_eq!(s.parse::<f64>().unwrap(), p);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_trace("a,b\n1,2\n".as_bytes()).is_err());
        let bad = "t,num_transmitters,sender,jammed,outcome,cumulative_p\n0,0,,false,Quiet,\n";
        assert!(read_trace(bad.as_bytes()).is_err());
    }

    #[test]
    fn snapshot_rows() {
        let nodes = [
            NodeState {
                p: 0.5,
                counter: 2,
                threshold: 3,
                last_idle: None,
            },
            NodeState {
                p: 0.25,
                counter: 1,
                threshold: 1,
                last_idle: Some(0),
            },
        ];
        let mut buf = Vec::new();
        let mut w = SnapshotWriter::new(&mut buf).unwrap();
        w.write_slot(9, &nodes).unwrap();
        w.finish().unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "t,node_id,p_v,c_v,T_v\n9,0,5.0000000000000000e-1,2,3\n9,1,2.5000000000000000e-1,1,1\n"
        );
    }
}
