//! The pair-stream data model and its text representation.
//!
//! A stream file is UTF-8 text: a header line `#corrstream n=<n> N=<N>`
//! (the `N=` field may be absent) followed by one record per line,
//! `<i><TAB><j>`, with 1-based decimal symbol indices in `[1, n]`. Readers
//! also accept spaces between the two indices; writers always emit a tab.
//!
//! Sources are single-pass: consuming a [`StreamSource`] exhausts it, and
//! re-reading a file means reopening it. All consumers in this crate process
//! a source in one pass with memory independent of the stream length (the
//! exact oracle's table is O(n^2) by design, but its ingestion is still one
//! pass).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Largest supported alphabet size; keeps every symbol strictly below the
/// fixed hash prime 2^31 - 1.
pub const MAX_ALPHABET: u32 = (1 << 31) - 2;

/// One stream element: a pair of 1-based symbol indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SamplePair {
    pub i: u32,
    pub j: u32,
}

impl SamplePair {
    pub fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }

    pub fn in_bounds(&self, n: u32) -> bool {
        (1..=n).contains(&self.i) && (1..=n).contains(&self.j)
    }
}

/// Stream metadata: alphabet size and, when known, the record count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub n: u32,
    pub declared_len: Option<u64>,
}

impl StreamHeader {
    pub fn new(n: u32, declared_len: Option<u64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "alphabet size must be at least 2, got {n}"
            )));
        }
        if n > MAX_ALPHABET {
            return Err(Error::InvalidParameter(format!(
                "alphabet size {n} exceeds the maximum {MAX_ALPHABET}"
            )));
        }
        Ok(Self { n, declared_len })
    }
}

enum SourceKind {
    File {
        reader: BufReader<File>,
        line: u64,
        buf: String,
    },
    Memory {
        pairs: std::vec::IntoIter<SamplePair>,
    },
}

/// A one-pass source of sample pairs with a validated header.
///
/// Iteration yields `Result<SamplePair>`; record-level problems (bad syntax,
/// out-of-bounds symbols, a record count disagreeing with the header) surface
/// as errors at the offending position. After an error the source yields
/// nothing further.
pub struct StreamSource {
    header: StreamHeader,
    seen: u64,
    failed: bool,
    kind: SourceKind,
}

impl StreamSource {
    /// Wrap an in-memory pair list; the declared length is the list length.
    /// Bounds are checked up front, with the 1-based record ordinal standing
    /// in for the line number.
    pub fn from_pairs(n: u32, pairs: Vec<SamplePair>) -> Result<Self> {
        let header = StreamHeader::new(n, Some(pairs.len() as u64))?;
        for (index, pair) in pairs.iter().enumerate() {
            if !pair.in_bounds(n) {
                let symbol = if (1..=n).contains(&pair.i) {
                    pair.j
                } else {
                    pair.i
                };
                return Err(Error::OutOfBounds {
                    line: index as u64 + 1,
                    symbol: symbol as u64,
                    n,
                });
            }
        }
        Ok(Self {
            header,
            seen: 0,
            failed: false,
            kind: SourceKind::Memory {
                pairs: pairs.into_iter(),
            },
        })
    }

    pub fn header(&self) -> StreamHeader {
        self.header
    }

    /// Drain the source, returning all pairs or the first error.
    pub fn read_all(self) -> Result<(StreamHeader, Vec<SamplePair>)> {
        let header = self.header;
        let mut pairs = match header.declared_len {
            Some(len) => Vec::with_capacity(len.min(1 << 24) as usize),
            None => Vec::new(),
        };
        for pair in self {
            pairs.push(pair?);
        }
        Ok((header, pairs))
    }

    fn next_file_record(&mut self) -> Option<Result<SamplePair>> {
        let SourceKind::File { reader, line, buf } = &mut self.kind else {
            unreachable!()
        };
        loop {
            buf.clear();
            match reader.read_line(buf) {
                Ok(0) => {
                    // End of file: enforce the declared record count.
                    if let Some(declared) = self.header.declared_len {
                        if self.seen != declared {
                            self.failed = true;
                            return Some(Err(Error::LengthMismatch {
                                declared,
                                found: self.seen,
                            }));
                        }
                    }
                    return None;
                }
                Ok(_) => {
                    *line += 1;
                    let text = buf.trim_end_matches(['\n', '\r']);
                    if text.is_empty() {
                        // Tolerate blank trailing lines, nothing else.
                        continue;
                    }
                    let current = *line;
                    let parsed = parse_record(text, current, self.header.n);
                    if parsed.is_err() {
                        self.failed = true;
                    } else {
                        self.seen += 1;
                        if let Some(declared) = self.header.declared_len {
                            if self.seen > declared {
                                self.failed = true;
                                return Some(Err(Error::LengthMismatch {
                                    declared,
                                    found: self.seen,
                                }));
                            }
                        }
                    }
                    return Some(parsed);
                }
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::Io(e)));
                }
            }
        }
    }
}

impl Iterator for StreamSource {
    type Item = Result<SamplePair>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match &mut self.kind {
            SourceKind::File { .. } => self.next_file_record(),
            SourceKind::Memory { pairs } => pairs.next().map(Ok),
        }
    }
}

/// Open a stream file, validating the header line eagerly.
pub fn open_stream<P: AsRef<Path>>(path: P) -> Result<StreamSource> {
    let file = File::open(path.as_ref())?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    if reader.read_line(&mut first)? == 0 {
        return Err(Error::Format {
            line: 1,
            message: "empty file, expected `#corrstream` header".into(),
        });
    }
    let header = parse_header(first.trim_end_matches(['\n', '\r']))?;
    Ok(StreamSource {
        header,
        seen: 0,
        failed: false,
        kind: SourceKind::File {
            reader,
            line: 1,
            buf: String::new(),
        },
    })
}

/// Write a stream file that round-trips through [`open_stream`] to an
/// identical header and pair sequence.
///
/// If the header declares a length it must match the number of pairs; every
/// pair must be in bounds for `header.n`.
pub fn write_stream<P, I>(path: P, header: StreamHeader, pairs: I) -> Result<()>
where
    P: AsRef<Path>,
    I: IntoIterator<Item = SamplePair>,
{
    let file = File::create(path.as_ref())?;
    let mut out = BufWriter::new(file);
    match header.declared_len {
        Some(len) => writeln!(out, "#corrstream n={} N={}", header.n, len)?,
        None => writeln!(out, "#corrstream n={}", header.n)?,
    }
    let mut written = 0u64;
    for pair in pairs {
        if !pair.in_bounds(header.n) {
            let symbol = if (1..=header.n).contains(&pair.i) {
                pair.j
            } else {
                pair.i
            };
            return Err(Error::OutOfBounds {
                line: written + 2,
                symbol: symbol as u64,
                n: header.n,
            });
        }
        writeln!(out, "{}\t{}", pair.i, pair.j)?;
        written += 1;
    }
    if let Some(declared) = header.declared_len {
        if written != declared {
            return Err(Error::LengthMismatch {
                declared,
                found: written,
            });
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_header(line: &str) -> Result<StreamHeader> {
    let bad = |message: String| Error::Format { line: 1, message };
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("#corrstream") {
        return Err(bad("header must start with `#corrstream`".into()));
    }
    let mut n: Option<u32> = None;
    let mut declared: Option<u64> = None;
    for token in tokens {
        if let Some(value) = token.strip_prefix("n=") {
            let parsed = value
                .parse::<u32>()
                .map_err(|_| bad(format!("invalid alphabet size `{value}`")))?;
            n = Some(parsed);
        } else if let Some(value) = token.strip_prefix("N=") {
            let parsed = value
                .parse::<u64>()
                .map_err(|_| bad(format!("invalid stream length `{value}`")))?;
            declared = Some(parsed);
        } else {
            return Err(bad(format!("unexpected header token `{token}`")));
        }
    }
    let n = n.ok_or_else(|| bad("header missing `n=`".into()))?;
    StreamHeader::new(n, declared)
}

fn parse_record(text: &str, line: u64, n: u32) -> Result<SamplePair> {
    let mut fields = text.split_whitespace();
    let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(Error::Format {
            line,
            message: format!("expected two symbol indices, got `{text}`"),
        });
    };
    let parse_symbol = |field: &str| -> Result<u32> {
        let value = field.parse::<u64>().map_err(|_| Error::Format {
            line,
            message: format!("invalid symbol `{field}`"),
        })?;
        if value < 1 || value > n as u64 {
            return Err(Error::OutOfBounds {
                line,
                symbol: value,
                n,
            });
        }
        Ok(value as u32)
    };
    Ok(SamplePair::new(parse_symbol(a)?, parse_symbol(b)?))
}
