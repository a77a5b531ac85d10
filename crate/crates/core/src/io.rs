//! Mask serialization.
//!
//! # Binary layout (`SRNM`, version 1)
//!
//! All integers little-endian.
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0 | 4 | magic `b"SRNM"` |
//! | 4 | 4 | version (`1`) |
//! | 8 | 4 | rows |
//! | 12 | 4 | cols |
//! | 16 | 4 | flags (bit 0: labels present; other bits zero) |
//! | 20 | 4 | seed, low 32 bits |
//! | 24 | 4 | seed, high 32 bits |
//! | 28 | 4 | density numerator (reduced) |
//! | 32 | 4 | density denominator (reduced) |
//! | 36 | 4·rows | row permutation |
//! | … | 4·cols | column permutation |
//! | … | rows·⌈cols/8⌉ | payload: effective mask, row-major, each row padded to whole bytes, column `j` at bit `j % 8` (LSB first) of byte `j / 8` |
//! | … | 4 | label count (only when flag bit 0 is set) |
//! | … | 12·count | labels: row u32, col u32, pass u16, diagonal u16, row-major |
//!
//! The payload is the *effective* (already permuted) mask. The unpermuted
//! construction is recovered as `base[row_perm[i]][col_perm[j]] = payload[i][j]`.
//! The density fields must equal `popcount / (rows·cols)` exactly.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compose::PermutedMask;
use crate::error::{Error, Result};
use crate::mask::{BinaryMask, EdgeLabel};
use crate::rational::Rational;
use crate::verify::RegularityReport;

pub const MAGIC: &[u8; 4] = b"SRNM";
pub const VERSION: u32 = 1;
const FLAG_LABELS: u32 = 1;
const HEADER_LEN: usize = 36;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    Binary,
    EdgeCsv,
    DenseText,
    StructuredText,
}

impl Format {
    /// Whether import recovers everything export wrote.
    pub fn is_lossless(self) -> bool {
        true
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Binary => "srnm",
            Format::EdgeCsv => "csv",
            Format::DenseText => "txt",
            Format::StructuredText => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Format::Binary),
            "edge-csv" => Ok(Format::EdgeCsv),
            "dense-text" => Ok(Format::DenseText),
            "structured-text" => Ok(Format::StructuredText),
            other => Err(Error::arg(format!(
                "unknown format {other:?} (expected binary, edge-csv, dense-text or structured-text)"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Binary => "binary",
            Format::EdgeCsv => "edge-csv",
            Format::DenseText => "dense-text",
            Format::StructuredText => "structured-text",
        })
    }
}

/// Serializes a permuted mask. Edge-csv and dense-text carry only the
/// effective bits.
pub fn export_mask(mask: &PermutedMask, format: Format) -> Vec<u8> {
    export_with_report(mask, format, None)
}

/// As [`export_mask`]; the structured-text document also embeds `report`.
pub fn export_with_report(mask: &PermutedMask, format: Format, report: Option<&RegularityReport>) -> Vec<u8> {
    let eff = mask.effective();
    match format {
        Format::Binary => encode_binary(mask, &eff),
        Format::EdgeCsv => {
            let mut out = String::new();
            for (i, j) in eff.edges() {
                out.push_str(&format!("{i},{j}\n"));
            }
            out.into_bytes()
        }
        Format::DenseText => {
            let mut out = String::with_capacity(eff.rows() * (eff.cols() + 1));
            for i in 0..eff.rows() {
                out.extend((0..eff.cols()).map(|j| if eff.get(i, j) { '1' } else { '0' }));
                out.push('\n');
            }
            out.into_bytes()
        }
        Format::StructuredText => {
            let doc = StructuredDoc::new(mask, &eff, report);
            let mut bytes = serde_json::to_vec_pretty(&doc).expect("document serializes");
            bytes.push(b'\n');
            bytes
        }
    }
}

pub fn export_plain(mask: &BinaryMask, format: Format) -> Vec<u8> {
    export_mask(&PermutedMask::identity(mask.clone()), format)
}

fn encode_binary(mask: &PermutedMask, eff: &BinaryMask) -> Vec<u8> {
    let (rows, cols) = (eff.rows(), eff.cols());
    let row_bytes = cols.div_ceil(8);
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * (rows + cols) + rows * row_bytes);
    let put = |out: &mut Vec<u8>, v: u32| out.extend_from_slice(&v.to_le_bytes());
    out.extend_from_slice(MAGIC);
    put(&mut out, VERSION);
    put(&mut out, rows as u32);
    put(&mut out, cols as u32);
    put(&mut out, if eff.has_labels() { FLAG_LABELS } else { 0 });
    put(&mut out, mask.seed as u32);
    put(&mut out, (mask.seed >> 32) as u32);
    let d = eff.density();
    put(&mut out, *d.numer() as u32);
    put(&mut out, *d.denom() as u32);
    for &p in &mask.row_perm {
        put(&mut out, p as u32);
    }
    for &p in &mask.col_perm {
        put(&mut out, p as u32);
    }
    for i in 0..rows {
        let start = out.len();
        out.resize(start + row_bytes, 0);
        for j in 0..cols {
            if eff.get(i, j) {
                out[start + j / 8] |= 1 << (j % 8);
            }
        }
    }
    if eff.has_labels() {
        let labels: Vec<_> = eff.labels().collect();
        put(&mut out, labels.len() as u32);
        for ((i, j), l) in labels {
            put(&mut out, i as u32);
            put(&mut out, j as u32);
            out.extend_from_slice(&l.pass.to_le_bytes());
            out.extend_from_slice(&l.diagonal.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Integrity(format!("file truncated while reading {what} at byte {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }
}

fn decode_binary(bytes: &[u8]) -> Result<PermutedMask> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic: not an SRNM mask file".into()));
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported mask file version {version}")));
    }
    let rows = r.u32("rows")? as usize;
    let cols = r.u32("cols")? as usize;
    let flags = r.u32("flags")?;
    if flags & !FLAG_LABELS != 0 {
        return Err(Error::Format(format!("unknown flag bits {flags:#x}")));
    }
    let seed = r.u32("seed")? as u64 | (r.u32("seed")? as u64) << 32;
    let num = r.u32("density numerator")? as i64;
    let den = r.u32("density denominator")? as i64;
    if rows == 0 || cols == 0 {
        return Err(Error::Integrity(format!("mask shape {rows}x{cols} has an empty side")));
    }
    if den == 0 {
        return Err(Error::Integrity("zero density denominator".into()));
    }
    let needed = (rows + cols) * 4 + rows * cols.div_ceil(8);
    if bytes.len() - r.pos < needed {
        return Err(Error::Integrity(format!(
            "file truncated: {} bytes after the header, {needed} needed",
            bytes.len() - r.pos
        )));
    }
    let row_perm = (0..rows).map(|_| r.u32("row permutation").map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let col_perm = (0..cols).map(|_| r.u32("column permutation").map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let mut eff = BinaryMask::try_zeros(rows, cols)?;
    let row_bytes = cols.div_ceil(8);
    for i in 0..rows {
        let row = r.take(row_bytes, "payload")?;
        for j in 0..cols {
            if row[j / 8] >> (j % 8) & 1 == 1 {
                eff.set(i, j, true);
            }
        }
        if !cols.is_multiple_of(8) && row[row_bytes - 1] >> (cols % 8) != 0 {
            return Err(Error::Integrity(format!("padding bits set in row {i}")));
        }
    }
    let popcount = eff.edge_count() as i64;
    if num * (rows * cols) as i64 != popcount * den {
        return Err(Error::Integrity(format!(
            "header density {num}/{den} does not match payload popcount {popcount} of {}",
            rows * cols
        )));
    }
    if flags & FLAG_LABELS != 0 {
        let count = r.u32("label count")? as usize;
        eff.enable_labels();
        for _ in 0..count {
            let i = r.u32("label row")? as usize;
            let j = r.u32("label column")? as usize;
            let pass = r.u16("label pass")?;
            let diagonal = r.u16("label diagonal")?;
            if i >= rows || j >= cols || !eff.get(i, j) {
                return Err(Error::Integrity(format!("label on ({i}, {j}) which is not an edge")));
            }
            eff.set_labeled(i, j, EdgeLabel::new(pass, diagonal));
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Integrity(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    from_effective(eff, row_perm, col_perm, seed)
}

/// Rebuilds the unpermuted base from the effective mask.
fn from_effective(eff: BinaryMask, row_perm: Vec<usize>, col_perm: Vec<usize>, seed: u64) -> Result<PermutedMask> {
    let probe = PermutedMask { base: BinaryMask::zeros(eff.rows(), eff.cols()), row_perm, col_perm, seed };
    probe.validate().map_err(|e| Error::Integrity(e.to_string()))?;
    let mut base = BinaryMask::zeros(eff.rows(), eff.cols());
    if eff.has_labels() {
        base.enable_labels();
    }
    for (i, j) in eff.edges() {
        let (r, c) = (probe.row_perm[i], probe.col_perm[j]);
        match eff.label(i, j) {
            Some(l) => base.set_labeled(r, c, l),
            None => base.set(r, c, true),
        }
    }
    Ok(PermutedMask { base, ..probe })
}

#[derive(Serialize, Deserialize)]
struct StructuredDoc {
    format: String,
    version: u32,
    rows: usize,
    cols: usize,
    seed: u64,
    edges: usize,
    #[serde(with = "crate::rational::serde_str")]
    density: Rational,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    /// Effective mask, one string of `0`/`1` per row.
    bits: Vec<String>,
    /// `[row, col, pass, diagonal]`
    labels: Option<Vec<[u32; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<RegularityReport>,
}

impl StructuredDoc {
    fn new(mask: &PermutedMask, eff: &BinaryMask, report: Option<&RegularityReport>) -> Self {
        StructuredDoc {
            format: "srn-mask".into(),
            version: VERSION,
            rows: eff.rows(),
            cols: eff.cols(),
            seed: mask.seed,
            edges: eff.edge_count(),
            density: eff.density(),
            row_perm: mask.row_perm.clone(),
            col_perm: mask.col_perm.clone(),
            bits: (0..eff.rows())
                .map(|i| (0..eff.cols()).map(|j| if eff.get(i, j) { '1' } else { '0' }).collect())
                .collect(),
            labels: eff.has_labels().then(|| {
                eff.labels()
                    .map(|((i, j), l)| [i as u32, j as u32, l.pass as u32, l.diagonal as u32])
                    .collect()
            }),
            report: report.cloned(),
        }
    }
}

fn decode_structured(bytes: &[u8]) -> Result<PermutedMask> {
    let doc: StructuredDoc =
        serde_json::from_slice(bytes).map_err(|e| Error::Format(format!("structured-text: {e}")))?;
    if doc.format != "srn-mask" {
        return Err(Error::Format(format!("unexpected document type {:?}", doc.format)));
    }
    if doc.bits.len() != doc.rows {
        return Err(Error::Integrity(format!("{} bit rows for {} rows", doc.bits.len(), doc.rows)));
    }
    let mut eff = BinaryMask::try_zeros(doc.rows, doc.cols)?;
    for (i, line) in doc.bits.iter().enumerate() {
        if line.len() != doc.cols {
            return Err(Error::Integrity(format!("row {i} has {} columns, expected {}", line.len(), doc.cols)));
        }
        for (j, ch) in line.chars().enumerate() {
            match ch {
                '1' => eff.set(i, j, true),
                '0' => {}
                _ => return Err(Error::Format(format!("unexpected character {ch:?} in row {i}"))),
            }
        }
    }
    if eff.edge_count() != doc.edges || eff.density() != doc.density {
        return Err(Error::Integrity("edge count or density does not match the bit rows".into()));
    }
    if let Some(labels) = &doc.labels {
        eff.enable_labels();
        for &[i, j, pass, diagonal] in labels {
            let (i, j) = (i as usize, j as usize);
            if i >= doc.rows || j >= doc.cols || !eff.get(i, j) {
                return Err(Error::Integrity(format!("label on ({i}, {j}) which is not an edge")));
            }
            eff.set_labeled(i, j, EdgeLabel::new(pass as u16, diagonal as u16));
        }
    }
    from_effective(eff, doc.row_perm, doc.col_perm, doc.seed)
}

fn decode_dense(bytes: &[u8]) -> Result<BinaryMask> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Format("dense-text is not UTF-8".into()))?;
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).filter(|l| !l.is_empty()).collect();
    let cols = lines.first().map(|l| l.len()).unwrap_or(0);
    let mut m = BinaryMask::try_zeros(lines.len(), cols).map_err(|e| Error::Format(e.to_string()))?;
    for (i, line) in lines.iter().enumerate() {
        if line.len() != cols {
            return Err(Error::Format(format!("row {i} has {} columns, expected {cols}", line.len())));
        }
        for (j, ch) in line.bytes().enumerate() {
            match ch {
                b'1' => m.set(i, j, true),
                b'0' => {}
                _ => return Err(Error::Format(format!("unexpected character {:?} in row {i}", ch as char))),
            }
        }
    }
    Ok(m)
}

fn decode_edge_csv(bytes: &[u8], rows: usize, cols: usize) -> Result<BinaryMask> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Format("edge-csv is not UTF-8".into()))?;
    let mut m = BinaryMask::try_zeros(rows, cols)?;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = |s: Option<&str>| s.and_then(|s| s.trim().parse::<usize>().ok());
        let mut parts = line.split(',');
        let (Some(i), Some(j), None) = (parse(parts.next()), parse(parts.next()), parts.next()) else {
            return Err(Error::Format(format!("line {}: expected \"row,col\", got {line:?}", n + 1)));
        };
        if i >= rows || j >= cols {
            return Err(Error::Integrity(format!("edge ({i}, {j}) outside {rows}x{cols}")));
        }
        m.set(i, j, true);
    }
    Ok(m)
}

/// Parses a mask. Edge-csv needs `shape`; the other formats describe their
/// own shape and ignore it.
pub fn import_mask(bytes: &[u8], format: Format, shape: Option<(usize, usize)>) -> Result<PermutedMask> {
    match format {
        Format::Binary => decode_binary(bytes),
        Format::StructuredText => decode_structured(bytes),
        Format::DenseText => Ok(PermutedMask::identity(decode_dense(bytes)?)),
        Format::EdgeCsv => {
            let (rows, cols) = shape.ok_or_else(|| Error::arg("edge-csv import needs the mask shape"))?;
            Ok(PermutedMask::identity(decode_edge_csv(bytes, rows, cols)?))
        }
    }
}

/// Best guess at the format of `bytes`: binary by magic, structured-text by a
/// leading `{`, dense-text when only `0`, `1` and line breaks occur, edge-csv
/// otherwise.
pub fn detect_format(bytes: &[u8]) -> Format {
    if bytes.starts_with(MAGIC) {
        Format::Binary
    } else if bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{') {
        Format::StructuredText
    } else if !bytes.is_empty() && bytes.iter().all(|b| matches!(b, b'0' | b'1' | b'\n' | b'\r')) {
        Format::DenseText
    } else {
        Format::EdgeCsv
    }
}

pub fn read_mask(path: &Path, format: Option<Format>, shape: Option<(usize, usize)>) -> Result<PermutedMask> {
    let bytes = std::fs::read(path)?;
    import_mask(&bytes, format.unwrap_or_else(|| detect_format(&bytes)), shape)
}

pub fn write_mask(path: &Path, mask: &PermutedMask, format: Format, report: Option<&RegularityReport>) -> Result<()> {
    std::fs::write(path, export_with_report(mask, format, report))?;
    Ok(())
}
