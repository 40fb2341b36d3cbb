//! Text-header + binary-payload container shared by the HRTF, SH RIR and
//! filter files.
//!
//! ```text
//! <MAGIC> <version>\n
//! <key> <value>\n        (any number of lines)
//! end\n
//! <payload: little-endian f32 values>
//! ```

use crate::error::{Error, Result};

pub(crate) struct Header {
    pub entries: Vec<(String, String, usize)>,
    /// Byte offset of the first payload byte.
    pub payload_offset: usize,
}

impl Header {
    fn find(&self, key: &str) -> Result<(&str, usize)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, off)| (v.as_str(), *off))
            .ok_or_else(|| Error::Parse {
                offset: self.payload_offset,
                message: format!("missing header field `{key}`"),
            })
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        self.find(key).map(|(v, _)| v)
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (v, offset) = self.find(key)?;
        v.parse().map_err(|_| Error::Parse {
            offset,
            message: format!("invalid value `{v}` for `{key}`"),
        })
    }
}

pub(crate) fn write_header(out: &mut Vec<u8>, magic: &str, entries: &[(&str, String)]) {
    out.extend_from_slice(format!("{magic} 1\n").as_bytes());
    for (k, v) in entries {
        out.extend_from_slice(format!("{k} {v}\n").as_bytes());
    }
    out.extend_from_slice(b"end\n");
}

/// Reads header lines until `end`. Lines that are not `key value` pairs are
/// handed to `on_other` (used for the HRTF direction table).
pub(crate) fn read_header(
    bytes: &[u8],
    magic: &str,
    mut on_other: impl FnMut(&str, usize) -> Result<()>,
) -> Result<Header> {
    let mut pos = 0;
    let mut first = true;
    let mut entries = Vec::new();
    loop {
        let Some(nl) = bytes[pos..].iter().position(|b| *b == b'\n') else {
            return Err(Error::Parse {
                offset: bytes.len(),
                message: "unterminated header".into(),
            });
        };
        let line = std::str::from_utf8(&bytes[pos..pos + nl]).map_err(|_| Error::Parse {
            offset: pos,
            message: "header is not UTF-8".into(),
        })?;
        let line_start = pos;
        pos += nl + 1;
        if first {
            let expected = format!("{magic} 1");
            if line != expected {
                return Err(Error::Parse {
                    offset: 0,
                    message: format!("expected `{expected}`, found `{line}`"),
                });
            }
            first = false;
            continue;
        }
        if line == "end" {
            break;
        }
        let mut parts = line.splitn(2, ' ');
        let key = parts.next().unwrap_or_default();
        match parts.next() {
            Some(v) if key.chars().all(|c| c.is_ascii_lowercase() || c == '_') && !key.is_empty() => {
                entries.push((key.to_string(), v.to_string(), line_start + key.len() + 1));
            }
            _ => on_other(line, line_start)?,
        }
    }
    Ok(Header {
        entries,
        payload_offset: pos,
    })
}

pub(crate) fn push_f32(out: &mut Vec<u8>, v: f32) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Reads exactly `count` f32 values starting at `offset`.
pub(crate) fn read_f32s(bytes: &[u8], offset: usize, count: usize) -> Result<Vec<f32>> {
    let need = count * 4;
    let avail = bytes.len().saturating_sub(offset);
    if avail != need {
        return Err(Error::Parse {
            offset: offset + avail.min(need),
            message: format!("payload holds {avail} bytes, header implies {need}"),
        });
    }
    Ok(bytes[offset..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
