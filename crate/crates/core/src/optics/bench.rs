//! Bench layouts: an ordered list of elements evaluated on the
//! path⊗polarization space, plus the line-oriented text format used by the
//! `pipeline` command.
//!
//! # Text format
//!
//! ```text
//! file      := { line '\n' }
//! line      := [ statement ] [ '#' comment ]
//! statement := 'PBS'
//!            | 'BD'
//!            | 'ANALYZER'
//!            | 'DETECTOR' name
//!            | ('HWP' | 'QWP') arm angle_deg
//!            | 'DISPLACEMENT' millimetres
//! arm       := 'upper' | 'lower' | 'both'
//! ```
//!
//! Tokens are separated by ASCII whitespace; keywords are upper case and arm
//! names lower case. `angle_deg` is the fast-axis angle in degrees, any real
//! number. `ANALYZER` marks the pointer-analysis slot (Q1, H5 and a PBS); its
//! settings are chosen per intensity reading, not by the file. `DISPLACEMENT`
//! records the beam-displacer offset as metadata only (default 4 mm).
//!
//! Evaluation starts from a single horizontally polarized beam in the lower
//! position, |D⟩⊗|H⟩. Every `PBS` except the last keeps the transmitted (H)
//! component. The last `PBS` splits into a transmitted and a reflected port,
//! which feed the first and second `DETECTOR` lines that follow it.

use std::fmt::Write as _;

use crate::algebra::{labels, Basis, Label, LinearOp, StateVector};
use crate::optics::{beam_displacer, on_arm, polarization_filter, Arm, ElementPlacement};
use crate::optics::{PlateKind, PointerOutcome, WavePlate};
use crate::{Error, Result};

pub const DEFAULT_DISPLACEMENT_MM: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub enum BenchElement {
    Pbs,
    Bd,
    Plate(ElementPlacement),
    Analyzer,
    Detector(String),
}

/// Detector readings for one pointer-analysis setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub ports: Vec<(String, f64)>,
}

impl Detection {
    pub fn intensity(&self, detector: &str) -> Option<f64> {
        self.ports
            .iter()
            .find(|(name, _)| name == detector)
            .map(|(_, i)| *i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchLayout {
    elements: Vec<BenchElement>,
    displacement_mm: f64,
}

impl BenchLayout {
    pub fn new(elements: Vec<BenchElement>, displacement_mm: f64) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidConfig("bench layout has no elements".into()));
        }
        if !displacement_mm.is_finite() {
            return Err(Error::NonFinite("displacement"));
        }
        Ok(BenchLayout {
            elements,
            displacement_mm,
        })
    }

    pub fn elements(&self) -> &[BenchElement] {
        &self.elements
    }

    pub fn displacement_mm(&self) -> f64 {
        self.displacement_mm
    }

    /// |D⟩⊗|H⟩: one horizontally polarized beam entering the lower position.
    pub fn source_state() -> StateVector {
        StateVector::basis_state(
            Basis::path_polarization(),
            Label::pair(Label::sym(labels::D), Label::sym(labels::H)),
        )
        .expect("static label")
    }

    fn final_pbs_index(&self) -> Result<usize> {
        let idx = self
            .elements
            .iter()
            .rposition(|e| *e == BenchElement::Pbs)
            .ok_or_else(|| Error::InvalidConfig("layout has no beam splitter".into()))?;
        let tail = &self.elements[idx + 1..];
        if tail.is_empty() || tail.len() > 2 {
            return Err(Error::InvalidConfig(
                "the last PBS must be followed by one or two DETECTOR lines".into(),
            ));
        }
        if !tail.iter().all(|e| matches!(e, BenchElement::Detector(_))) {
            return Err(Error::InvalidConfig(
                "only DETECTOR lines may follow the last PBS".into(),
            ));
        }
        if self.elements[..idx]
            .iter()
            .any(|e| matches!(e, BenchElement::Detector(_)))
        {
            return Err(Error::InvalidConfig(
                "DETECTOR lines must come after the last PBS".into(),
            ));
        }
        Ok(idx)
    }

    /// Composite operator of one element. `None` for detectors.
    pub fn element_operator(element: &BenchElement, outcome: PointerOutcome) -> Option<LinearOp> {
        match element {
            BenchElement::Pbs => Some(polarization_filter(labels::H).unwrap()),
            BenchElement::Bd => Some(beam_displacer()),
            BenchElement::Plate(p) => Some(p.operator()),
            BenchElement::Analyzer => {
                let optics = on_arm(&outcome.analyzer_operator(), Arm::Both).unwrap();
                Some(
                    polarization_filter(labels::H)
                        .unwrap()
                        .compose(&optics)
                        .unwrap(),
                )
            }
            BenchElement::Detector(_) => None,
        }
    }

    /// Field after the first `count` elements, beam splitters transmitting.
    pub fn state_after(&self, count: usize, outcome: PointerOutcome) -> StateVector {
        self.elements[..count.min(self.elements.len())]
            .iter()
            .filter_map(|e| Self::element_operator(e, outcome))
            .fold(Self::source_state(), |s, op| op.apply(&s).unwrap())
    }

    /// Port intensities at the detectors for one pointer-analysis setting.
    pub fn detect(&self, outcome: PointerOutcome) -> Result<Detection> {
        let last = self.final_pbs_index()?;
        let field = self.state_after(last, outcome);
        let (mut transmitted, mut reflected) = (0.0, 0.0);
        for (label, amp) in field.basis().labels().iter().zip(field.amplitudes()) {
            match label.leaves().last().copied() {
                Some(labels::H) => transmitted += amp.norm_sqr(),
                _ => reflected += amp.norm_sqr(),
            }
        }
        let ports = self.elements[last + 1..]
            .iter()
            .zip([transmitted, reflected])
            .filter_map(|(e, i)| match e {
                BenchElement::Detector(name) => Some((name.clone(), i)),
                _ => None,
            })
            .collect();
        Ok(Detection { ports })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut elements = Vec::new();
        let mut displacement = DEFAULT_DISPLACEMENT_MM;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("");
            let tokens = tokenize(line);
            let Some(&(col, keyword)) = tokens.first() else {
                continue;
            };
            let err = |column: usize, message: String| Error::Parse {
                line: line_no,
                column,
                message,
            };
            let end_col = line.trim_end().chars().count() + 1;
            let arg = |i: usize, what: &str| {
                tokens
                    .get(i)
                    .copied()
                    .ok_or_else(|| err(end_col, format!("missing {what}")))
            };
            let expected_len;
            match keyword {
                "PBS" => {
                    elements.push(BenchElement::Pbs);
                    expected_len = 1;
                }
                "BD" => {
                    elements.push(BenchElement::Bd);
                    expected_len = 1;
                }
                "ANALYZER" => {
                    elements.push(BenchElement::Analyzer);
                    expected_len = 1;
                }
                "DETECTOR" => {
                    let (_, name) = arg(1, "detector name")?;
                    elements.push(BenchElement::Detector(name.to_string()));
                    expected_len = 2;
                }
                "DISPLACEMENT" => {
                    let (c, value) = arg(1, "displacement in mm")?;
                    displacement = parse_real(value)
                        .ok_or_else(|| err(c, format!("invalid displacement `{value}`")))?;
                    expected_len = 2;
                }
                "HWP" | "QWP" => {
                    let (c, arm) = arg(1, "arm (upper|lower|both)")?;
                    let arm = match arm {
                        "upper" => Arm::Upper,
                        "lower" => Arm::Lower,
                        "both" => Arm::Both,
                        other => return Err(err(c, format!("unknown arm `{other}`"))),
                    };
                    let (c, angle) = arg(2, "angle in degrees")?;
                    let angle = parse_real(angle)
                        .ok_or_else(|| err(c, format!("invalid angle `{angle}`")))?;
                    let kind = if keyword == "HWP" {
                        PlateKind::Half
                    } else {
                        PlateKind::Quarter
                    };
                    elements.push(BenchElement::Plate(ElementPlacement::new(
                        WavePlate::new(kind, angle.to_radians()),
                        arm,
                    )));
                    expected_len = 3;
                }
                other => return Err(err(col, format!("unknown element `{other}`"))),
            }
            if let Some(&(c, extra)) = tokens.get(expected_len) {
                return Err(err(c, format!("unexpected token `{extra}`")));
            }
        }
        if elements.is_empty() {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "bench description contains no elements".into(),
            });
        }
        BenchLayout::new(elements, displacement)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "DISPLACEMENT {}", self.displacement_mm).unwrap();
        for e in &self.elements {
            match e {
                BenchElement::Pbs => out.push_str("PBS\n"),
                BenchElement::Bd => out.push_str("BD\n"),
                BenchElement::Analyzer => out.push_str("ANALYZER\n"),
                BenchElement::Detector(name) => writeln!(out, "DETECTOR {name}").unwrap(),
                BenchElement::Plate(p) => {
                    let kw = match p.plate.kind() {
                        PlateKind::Half => "HWP",
                        PlateKind::Quarter => "QWP",
                    };
                    // fold into (−90°, 90°] and drop round-off below 1e-9°
                    let mut deg = p.plate.axis_angle().to_degrees();
                    if deg > 90.0 {
                        deg -= 180.0;
                    }
                    let deg = (deg * 1e9).round() / 1e9 + 0.0;
                    writeln!(out, "{kw} {} {deg}", p.arm.keyword()).unwrap();
                }
            }
        }
        out
    }
}

fn parse_real(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Whitespace-separated tokens with their 1-based character columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((col + 1, byte)),
            (true, Some((c, b))) => {
                out.push((c, &line[b..byte]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((c, b)) = start {
        out.push((c, &line[b..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# prepare
PBS
HWP both 7.5      # H1
BD
HWP lower 45
HWP upper 6.0
HWP lower -6.0
ANALYZER
HWP upper 45
BD
HWP both 22.5
PBS
DETECTOR D2
DETECTOR D3
";

    #[test]
    fn parses_sample() {
        let layout = BenchLayout::parse(SAMPLE).unwrap();
        assert_eq!(layout.elements().len(), 13);
        assert_eq!(layout.displacement_mm(), 4.0);
        assert_eq!(layout.elements()[0], BenchElement::Pbs);
        assert_eq!(layout.elements()[12], BenchElement::Detector("D3".into()));
        match &layout.elements()[5] {
            BenchElement::Plate(p) => {
                assert_eq!(p.arm, Arm::Lower);
                assert!(
                    (p.plate.axis_angle() - (-6f64).to_radians().rem_euclid(std::f64::consts::PI))
                        .abs()
                        < 1e-15
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn text_round_trip() {
        let layout = BenchLayout::parse(SAMPLE).unwrap();
        let again = BenchLayout::parse(&layout.to_text()).unwrap();
        assert_eq!(layout.elements().len(), again.elements().len());
        for (a, b) in layout.elements().iter().zip(again.elements()) {
            match (a, b) {
                (BenchElement::Plate(x), BenchElement::Plate(y)) => {
                    assert_eq!(x.arm, y.arm);
                    assert!(x.plate.operator().distance(&y.plate.operator()) < 1e-12);
                }
                _ => assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn unknown_keyword_reports_line_and_column() {
        let err = BenchLayout::parse("PBS\n\n  LASER upper 3\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                column: 3,
                message: "unknown element `LASER`".into()
            }
        );
        assert!(err.to_string().starts_with("line 3: unknown element"));
    }

    #[test]
    fn argument_errors() {
        let cases = [
            ("HWP", 1, "missing arm"),
            ("HWP middle 3", 5, "unknown arm `middle`"),
            ("QWP upper x", 11, "invalid angle `x`"),
            ("HWP upper 3 4", 13, "unexpected token `4`"),
            ("DETECTOR", 9, "missing detector name"),
            ("BD extra", 4, "unexpected token `extra`"),
            ("HWP upper NaN", 11, "invalid angle `NaN`"),
        ];
        for (text, column, msg) in cases {
            match BenchLayout::parse(text).unwrap_err() {
                Error::Parse {
                    line,
                    column: c,
                    message,
                } => {
                    assert_eq!(line, 1, "{text}");
                    assert!(message.starts_with(msg), "{text}: {message}");
                    if !msg.starts_with("missing") {
                        assert_eq!(c, column, "{text}");
                    }
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn empty_description_is_rejected() {
        assert!(matches!(
            BenchLayout::parse("# nothing\n\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn displacement_is_metadata_only() {
        let a = BenchLayout::parse(SAMPLE).unwrap();
        let b = BenchLayout::parse(&format!("DISPLACEMENT 2.5\n{SAMPLE}")).unwrap();
        assert_eq!(b.displacement_mm(), 2.5);
        for o in PointerOutcome::ALL {
            assert_eq!(a.detect(o).unwrap(), b.detect(o).unwrap());
        }
    }

    #[test]
    fn detection_requires_terminal_detectors() {
        let no_det = BenchLayout::parse("PBS\nBD\nPBS\n").unwrap();
        assert!(no_det.detect(PointerOutcome::Plus).is_err());
        let stray = BenchLayout::parse("PBS\nDETECTOR A\nBD\nPBS\nDETECTOR B\n").unwrap();
        assert!(stray.detect(PointerOutcome::Plus).is_err());
        let single = BenchLayout::parse("PBS\nHWP both 22.5\nPBS\nDETECTOR only\n").unwrap();
        let d = single.detect(PointerOutcome::Plus).unwrap();
        assert_eq!(d.ports.len(), 1);
        assert!((d.intensity("only").unwrap() - 0.5).abs() < 1e-15);
    }
}
