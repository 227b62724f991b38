//! Plain-text, line-oriented net description format.
//!
//! Four sections, each introduced by an uppercase header on its own line:
//!
//! ```text
//! # comment lines and blank lines are ignored
//! PLACES
//! i P1 P2 O1
//!
//! TRANSITIONS
//! 1 in Access C B receive_access_request
//! 2 out Cap B C send_capacity_check
//! 3 inner wait_for_capacity
//!
//! ARCS
//! i -> t1
//! t1 -> P1
//!
//! INIT
//! mark i
//! msg Access C B
//! ```
//!
//! Transition lines are `<id> in|out <msg> <sender> <receiver> <label> [<weight>]`
//! or `<id> inner <label> [<weight>]`. Arc endpoints are place names or
//! `t<id>` transition references; place names of that shape are rejected at
//! build time. Unknown section headers are an error. The full grammar is
//! documented in `docs/net-format.md`.

use super::{LabeledNet, Message, NetDescription, NetError, Transition, TransitionKind};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: unknown section `{name}`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: duplicate section `{name}`")]
    DuplicateSection { line: usize, name: String },
    #[error("line {line}: content before any section header")]
    ContentBeforeSection { line: usize },
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("net validation failed: {0}")]
    Invalid(#[from] NetError),
}

fn malformed(line: usize, detail: impl Into<String>) -> ParseError {
    ParseError::Malformed {
        line,
        detail: detail.into(),
    }
}

const SECTIONS: [&str; 4] = ["PLACES", "TRANSITIONS", "ARCS", "INIT"];

/// Parses the text format and builds the validated net.
pub fn parse_net(text: &str) -> Result<LabeledNet, ParseError> {
    let mut desc = NetDescription::default();
    let mut seen: Vec<&str> = Vec::new();
    let mut section: Option<&str> = None;

    for (ix, raw) in text.lines().enumerate() {
        let line_no = ix + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();

        // A single all-uppercase-alphabetic token is a section header.
        if tokens.len() == 1
            && tokens[0].len() > 1
            && tokens[0].bytes().all(|b| b.is_ascii_uppercase())
        {
            let name = tokens[0];
            match SECTIONS.iter().find(|s| **s == name) {
                Some(&known) => {
                    if seen.contains(&known) {
                        return Err(ParseError::DuplicateSection {
                            line: line_no,
                            name: name.to_string(),
                        });
                    }
                    seen.push(known);
                    section = Some(known);
                }
                None => {
                    return Err(ParseError::UnknownSection {
                        line: line_no,
                        name: name.to_string(),
                    })
                }
            }
            continue;
        }

        match section {
            None => return Err(ParseError::ContentBeforeSection { line: line_no }),
            Some("PLACES") => {
                desc.places.extend(tokens.iter().map(|t| t.to_string()));
            }
            Some("TRANSITIONS") => {
                desc.transitions.push(parse_transition(line_no, &tokens)?);
            }
            Some("ARCS") => {
                if tokens.len() != 3 || tokens[1] != "->" {
                    return Err(malformed(line_no, "expected `<src> -> <dst>`"));
                }
                desc.arcs
                    .push((tokens[0].to_string(), tokens[2].to_string()));
            }
            Some("INIT") => match tokens[0] {
                "mark" if tokens.len() >= 2 => {
                    desc.initial_marking
                        .extend(tokens[1..].iter().map(|t| t.to_string()));
                }
                "msg" if tokens.len() == 4 => {
                    desc.initial_messages
                        .push(parse_message(line_no, tokens[1], tokens[2], tokens[3])?);
                }
                _ => {
                    return Err(malformed(
                        line_no,
                        "expected `mark <place>...` or `msg <name> <sender> <receiver>`",
                    ))
                }
            },
            Some(_) => unreachable!(),
        }
    }

    Ok(LabeledNet::build(desc)?)
}

fn parse_transition(line: usize, tokens: &[&str]) -> Result<Transition, ParseError> {
    if tokens.len() < 3 {
        return Err(malformed(
            line,
            "transition line needs at least id, kind, label",
        ));
    }
    let id: usize = tokens[0]
        .parse()
        .map_err(|_| malformed(line, format!("bad transition id `{}`", tokens[0])))?;
    let kind = match tokens[1].to_ascii_lowercase().as_str() {
        "in" => TransitionKind::In,
        "out" => TransitionKind::Out,
        "inner" => TransitionKind::Inner,
        other => return Err(malformed(line, format!("unknown kind `{other}`"))),
    };
    let (message, label_ix) = match kind {
        TransitionKind::Inner => (None, 2),
        _ => {
            if tokens.len() < 6 {
                return Err(malformed(
                    line,
                    "in/out transition needs `<id> <kind> <msg> <sender> <receiver> <label>`",
                ));
            }
            (
                Some(parse_message(line, tokens[2], tokens[3], tokens[4])?),
                5,
            )
        }
    };
    let label = tokens[label_ix].to_string();
    let weight = match tokens.len() - label_ix {
        1 => 1.0,
        2 => tokens[label_ix + 1]
            .parse()
            .map_err(|_| malformed(line, format!("bad weight `{}`", tokens[label_ix + 1])))?,
        _ => return Err(malformed(line, "trailing tokens after weight")),
    };
    Ok(Transition {
        id,
        kind,
        message,
        label,
        weight,
    })
}

fn parse_message(
    line: usize,
    name: &str,
    sender: &str,
    receiver: &str,
) -> Result<Message, ParseError> {
    let sender = sender
        .parse()
        .map_err(|e| malformed(line, format!("{e}")))?;
    let receiver = receiver
        .parse()
        .map_err(|e| malformed(line, format!("{e}")))?;
    Ok(Message::new(name, sender, receiver))
}

/// Serializes a net back to the text format in canonical order; parsing the
/// result rebuilds an identical net.
pub fn write_net(net: &LabeledNet) -> String {
    let mut out = String::new();
    out.push_str("PLACES\n");
    let names: Vec<&str> = net.places().iter().map(|p| p.name.as_str()).collect();
    out.push_str(&names.join(" "));
    out.push_str("\n\nTRANSITIONS\n");
    for t in net.transitions() {
        match &t.message {
            Some(m) => {
                let _ = write!(
                    out,
                    "{} {} {} {} {} {}",
                    t.id, t.kind, m.msg, m.sender, m.receiver, t.label
                );
            }
            None => {
                let _ = write!(out, "{} {} {}", t.id, t.kind, t.label);
            }
        }
        if t.weight != 1.0 {
            let _ = write!(out, " {}", t.weight);
        }
        out.push('\n');
    }
    out.push_str("\nARCS\n");
    for arc in net.arcs() {
        match arc {
            super::Arc::PlaceToTransition { place, transition } => {
                let _ = writeln!(out, "{} -> t{}", net.place_name(*place), transition);
            }
            super::Arc::TransitionToPlace { transition, place } => {
                let _ = writeln!(out, "t{} -> {}", transition, net.place_name(*place));
            }
        }
    }
    out.push_str("\nINIT\n");
    let marked: Vec<&str> = net
        .initial_marking()
        .marked_places()
        .map(|p| net.place_name(p))
        .collect();
    if !marked.is_empty() {
        let _ = writeln!(out, "mark {}", marked.join(" "));
    }
    for (m, n) in net.initial_messages().iter() {
        for _ in 0..n {
            let _ = writeln!(out, "msg {} {} {}", m.msg, m.sender, m.receiver);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
# a two-step net with one exchange
PLACES
start mid done

TRANSITIONS
1 in Access C B accept
2 inner finish

ARCS
start -> t1
t1 -> mid
mid -> t2
t2 -> done

INIT
mark start
msg Access C B
";

    #[test]
    fn parses_a_small_net() {
        let net = parse_net(SMALL).unwrap();
        assert_eq!(net.places().len(), 3);
        assert_eq!(net.transitions().len(), 2);
        assert_eq!(net.arcs().len(), 4);
        assert_eq!(net.initial_messages().total(), 1);
        assert_eq!(net.enabled(&net.initial_state()), vec![1]);
    }

    #[test]
    fn rejects_unknown_section() {
        let err = parse_net("WIDGETS\nfoo\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownSection {
                line: 1,
                name: "WIDGETS".into()
            }
        );
    }

    #[test]
    fn rejects_content_before_sections() {
        let err = parse_net("foo bar\nPLACES\n").unwrap_err();
        assert_eq!(err, ParseError::ContentBeforeSection { line: 1 });
    }

    #[test]
    fn rejects_duplicate_section() {
        let err = parse_net("PLACES\na\nPLACES\nb\n").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateSection { .. }));
    }

    #[test]
    fn rejects_bad_role_player() {
        let err = parse_net("PLACES\na b\nTRANSITIONS\n1 in Access C XX t\n").unwrap_err();
        assert!(matches!(err, ParseError::Malformed { .. }));
    }

    #[test]
    fn validation_errors_surface_through_parse() {
        let err = parse_net("PLACES\na a\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::Invalid(NetError::DuplicatePlaceName("a".into()))
        );
    }

    #[test]
    fn round_trips_canonical_form() {
        let net = parse_net(SMALL).unwrap();
        let text = write_net(&net);
        let reparsed = parse_net(&text).unwrap();
        assert_eq!(write_net(&reparsed), text);
        assert_eq!(reparsed.places(), net.places());
        assert_eq!(reparsed.transitions(), net.transitions());
        assert_eq!(reparsed.arcs(), net.arcs());
    }
}
