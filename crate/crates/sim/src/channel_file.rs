//! Imported per-receiver channels.
//!
//! The CSV starts with one of two headers:
//!
//! ```text
//! rx_id,gain_db
//! rx_id,h00_re,h00_im,h01_re,...,h33_im
//! ```
//!
//! In the first form each receiver sees a real scalar gain of `gain_db`
//! (power). In the second each row holds a row-major 4x4 complex matrix whose
//! singular values become equal-power eigen-stream gains.

use std::io::Read;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use swsc_core::channel::{svd_subchannels, BlockChannel, BlockGain, MIMO_STREAMS};
use swsc_core::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ReceiverChannel {
    GainDb(f64),
    /// Singular values of the receiver's MIMO matrix, non-increasing.
    Mimo([f64; MIMO_STREAMS]),
}

impl ReceiverChannel {
    pub fn block_channel(&self, noise_var: f64) -> BlockChannel {
        match *self {
            ReceiverChannel::GainDb(db) => BlockChannel {
                gain: BlockGain::Scalar(Complex64::new(10f64.powf(db / 20.0), 0.0)),
                noise_var,
            },
            ReceiverChannel::Mimo(sv) => BlockChannel::from_singular_values(sv, noise_var),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Receiver {
    pub id: String,
    pub channel: ReceiverChannel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFile {
    pub receivers: Vec<Receiver>,
}

fn mimo_header() -> Vec<String> {
    let mut h = vec!["rx_id".to_string()];
    for r in 0..MIMO_STREAMS {
        for c in 0..MIMO_STREAMS {
            h.push(format!("h{r}{c}_re"));
            h.push(format!("h{r}{c}_im"));
        }
    }
    h
}

fn parse_err(line: u64, msg: impl Into<String>) -> Error {
    Error::ChannelFile { line, msg: msg.into() }
}

pub fn load_channel_file(path: &Path) -> Result<ChannelFile> {
    let file = std::fs::File::open(path)?;
    parse_channel_csv(file)
}

pub fn parse_channel_csv(input: impl Read) -> Result<ChannelFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(parse_err(1, "empty file, expected a header line")),
        Some(r) => r.map_err(|e| parse_err(1, e.to_string()))?,
    };
    let fields: Vec<&str> = header.iter().collect();
    let mimo = if fields == ["rx_id", "gain_db"] {
        false
    } else if fields == mimo_header() {
        true
    } else {
        return Err(parse_err(
            1,
            "header must be `rx_id,gain_db` or `rx_id,h00_re,h00_im,...,h33_im`",
        ));
    };
    let want = if mimo { 1 + 2 * MIMO_STREAMS * MIMO_STREAMS } else { 2 };

    let mut receivers = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != want {
            return Err(parse_err(line, format!("expected {want} fields, found {}", rec.len())));
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(parse_err(line, "empty rx_id"));
        }
        let mut values = Vec::with_capacity(want - 1);
        for (col, field) in rec.iter().enumerate().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("column {}: `{field}` is not a number", col + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column {}: value must be finite", col + 1)));
            }
            values.push(v);
        }
        let channel = if mimo {
            let mut h = [[Complex64::new(0.0, 0.0); MIMO_STREAMS]; MIMO_STREAMS];
            for (i, pair) in values.chunks_exact(2).enumerate() {
                h[i / MIMO_STREAMS][i % MIMO_STREAMS] = Complex64::new(pair[0], pair[1]);
            }
            ReceiverChannel::Mimo(svd_subchannels(&h).map_err(|e| parse_err(line, e.to_string()))?)
        } else {
            ReceiverChannel::GainDb(values[0])
        };
        receivers.push(Receiver { id, channel });
    }
    if receivers.is_empty() {
        return Err(parse_err(1, "no receiver rows"));
    }
    Ok(ChannelFile { receivers })
}

impl ChannelFile {
    pub fn len(&self) -> usize {
        self.receivers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.receivers.is_empty()
    }

    /// Picks `n` distinct receivers uniformly at random.
    pub fn draw(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
        if n > self.receivers.len() {
            return Err(Error::Config(format!(
                "{n} packets need {n} receivers but the channel file has {}",
                self.receivers.len()
            )));
        }
        Ok(index::sample(rng, self.receivers.len(), n).into_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_rows() {
        let f = parse_channel_csv("rx_id,gain_db\na,0\nb,-6.5\n".as_bytes()).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.receivers[1].channel, ReceiverChannel::GainDb(-6.5));
        let ch = f.receivers[1].channel.block_channel(0.1);
        match ch.gain {
            BlockGain::Scalar(g) => assert!((g.norm_sqr() - 10f64.powf(-0.65)).abs() < 1e-12),
            _ => panic!("scalar gain expected"),
        }
    }

    #[test]
    fn mimo_rows() {
        let mut text = mimo_header().join(",");
        text.push('\n');
        let mut row = vec!["rx7".to_string()];
        for r in 0..4 {
            for c in 0..4 {
                row.push(if r == c { format!("{}", 4 - r) } else { "0".into() });
                row.push("0".into());
            }
        }
        text.push_str(&row.join(","));
        let f = parse_channel_csv(text.as_bytes()).unwrap();
        assert_eq!(f.receivers[0].channel, ReceiverChannel::Mimo([4.0, 3.0, 2.0, 1.0]));
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_channel_csv("".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::ChannelFile { line: 1, .. }), "{e}");
        let e = parse_channel_csv("rx_id,gain_db\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::ChannelFile { .. }));
        let e = parse_channel_csv("rx_id,gain_db\na,1\nb,x\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::ChannelFile { line: 3, .. }), "{e}");
        let e = parse_channel_csv("rx_id,gain\na,1\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::ChannelFile { line: 1, .. }));

        let mut text = mimo_header().join(",");
        text.push('\n');
        text.push_str(&format!("r0,{}\n", vec!["1"; 31].join(",")));
        let e = parse_channel_csv(text.as_bytes()).unwrap_err();
        assert!(matches!(e, Error::ChannelFile { line: 2, .. }), "{e}");
        assert!(e.to_string().contains("expected 33 fields, found 32"), "{e}");
    }

    #[test]
    fn draw_without_replacement() {
        let text: String = std::iter::once("rx_id,gain_db\n".to_string())
            .chain((0..100).map(|i| format!("{i},0\n")))
            .collect();
        let f = parse_channel_csv(text.as_bytes()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut picked = f.draw(50, &mut rng).unwrap();
        picked.sort_unstable();
        picked.dedup();
        assert_eq!(picked.len(), 50);
        assert!(f.draw(101, &mut rng).is_err());
    }
}
