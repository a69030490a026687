//! `x,y` dataset CSV.

use std::io::{BufRead, Write};

use crate::boundary::{Dataset, Design, Sample};
use crate::error::{Error, Result};

/// Formats a float with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_dataset_csv<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    writeln!(out, "x,y")?;
    for s in data.samples() {
        writeln!(out, "{},{}", fmt17(s.x), fmt17(s.y))?;
    }
    Ok(())
}

pub fn dataset_to_csv_string(data: &Dataset) -> String {
    let mut buf = Vec::new();
    write_dataset_csv(data, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

/// Reads an `x,y` CSV. Line numbers in errors are 1-based and count the header.
pub fn read_dataset_csv<R: BufRead>(input: R, design: Design) -> Result<Dataset> {
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, header)) => {
            let header = header?;
            let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
            if cols != ["x", "y"] {
                return Err(Error::Parse {
                    line: 1,
                    reason: format!("expected header `x,y`, got `{}`", header.trim()),
                });
            }
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                reason: "empty input".into(),
            })
        }
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected 2 fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str, name: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("{name} `{s}` is not a number"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    line: line_no,
                    reason: format!("{name} is not finite"),
                })
            }
        };
        let x = parse(fields[0], "x")?;
        let y = parse(fields[1], "y")?;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("x = {x} outside [0, 1]"),
            });
        }
        samples.push(Sample { x, y });
    }
    if samples.is_empty() {
        return Err(Error::Parse {
            line: 2,
            reason: "no data rows".into(),
        });
    }
    Dataset::new(samples, design).map_err(|e| Error::Parse {
        line: 0,
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn errors_name_the_line() {
        let bad = "x,y\n0.1,1\n0.2,NaN\n";
        match read_dataset_csv(bad.as_bytes(), Design::Random) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad = "x,y\n0.1,1\n\n1.5,2\n";
        match read_dataset_csv(bad.as_bytes(), Design::Random) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(read_dataset_csv("a,b\n".as_bytes(), Design::Random).is_err());
        assert!(read_dataset_csv("x,y\n".as_bytes(), Design::Random).is_err());
    }

    #[test]
    fn unsorted_rows_are_sorted() {
        let d = read_dataset_csv("x,y\n0.9,1\n0.1,2\n".as_bytes(), Design::Random).unwrap();
        assert_eq!(d.xs(), &[0.1, 0.9]);
        assert_eq!(d.ys(), &[2.0, 1.0]);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(pts in prop::collection::vec((0.0f64..=1.0, -1e6f64..1e6), 1..20)) {
            let samples = pts.iter().map(|&(x, y)| Sample { x, y }).collect();
            let d = Dataset::new(samples, Design::Random).unwrap();
            let text = dataset_to_csv_string(&d);
            let back = read_dataset_csv(text.as_bytes(), Design::Random).unwrap();
            prop_assert_eq!(d, back);
        }
    }
}
