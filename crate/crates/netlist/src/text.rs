//! Line-oriented netlist interchange format.
//!
//! ```text
//! tcv1 <num_inputs> <num_outputs>
//! in <id>
//! g <id> <KIND>[:k] <input ids...>
//! out <id>
//! ```
//!
//! Ids are decimal and strictly ascending from 0; a gate may only reference
//! earlier ids. Serialization of a parsed file is byte-identical to its
//! source; parsing never dedupes or reorders.

use crate::{Circuit, GateId, GateKind, NetlistError, NetResult};

pub fn serialize(c: &Circuit) -> String {
    let mut out = String::with_capacity(c.size() * 16 + 64);
    out.push_str(&format!(
        "tcv1 {} {}\n",
        c.inputs().len(),
        c.outputs().len()
    ));
    for (id, kind, ins) in c.iter_gates() {
        match kind {
            GateKind::Input => {
                out.push_str(&format!("in {id}\n"));
            }
            _ => {
                out.push_str("g ");
                out.push_str(&id.0.to_string());
                out.push(' ');
                out.push_str(&kind_name(kind));
                for i in ins {
                    out.push(' ');
                    out.push_str(&i.to_string());
                }
                out.push('\n');
            }
        }
    }
    for o in c.outputs() {
        out.push_str(&format!("out {o}\n"));
    }
    out
}

fn kind_name(kind: GateKind) -> String {
    match kind {
        GateKind::Input => "IN".into(),
        GateKind::Const0 => "CONST0".into(),
        GateKind::Const1 => "CONST1".into(),
        GateKind::And => "AND".into(),
        GateKind::Or => "OR".into(),
        GateKind::Not => "NOT".into(),
        GateKind::Majority => "MAJORITY".into(),
        GateKind::Threshold(k) => format!("THRESHOLD:{k}"),
    }
}

fn parse_kind(s: &str, line: usize) -> NetResult<GateKind> {
    if let Some(k) = s.strip_prefix("THRESHOLD:") {
        let k = k.parse::<u32>().map_err(|_| NetlistError::ParseError {
            line,
            msg: format!("bad threshold constant in {s:?}"),
        })?;
        return Ok(GateKind::Threshold(k));
    }
    Ok(match s {
        "CONST0" => GateKind::Const0,
        "CONST1" => GateKind::Const1,
        "AND" => GateKind::And,
        "OR" => GateKind::Or,
        "NOT" => GateKind::Not,
        "MAJORITY" => GateKind::Majority,
        _ => {
            return Err(NetlistError::ParseError {
                line,
                msg: format!("unknown gate kind {s:?}"),
            })
        }
    })
}

fn parse_id(tok: Option<&str>, line: usize, what: &str) -> NetResult<u32> {
    tok.ok_or_else(|| NetlistError::ParseError {
        line,
        msg: format!("missing {what}"),
    })?
    .parse::<u32>()
    .map_err(|_| NetlistError::ParseError {
        line,
        msg: format!("bad {what}"),
    })
}

pub fn deserialize(text: &str) -> NetResult<Circuit> {
    let mut c = Circuit::new_raw();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(NetlistError::ParseError {
        line: 1,
        msg: "empty file".into(),
    })?;
    let mut h = header.split_ascii_whitespace();
    if h.next() != Some("tcv1") {
        return Err(NetlistError::ParseError {
            line: 1,
            msg: "missing tcv1 header".into(),
        });
    }
    let want_inputs = parse_id(h.next(), 1, "input count")? as usize;
    let want_outputs = parse_id(h.next(), 1, "output count")? as usize;

    let mut outputs = Vec::new();
    for (ix, raw) in lines {
        let line = ix + 1;
        let mut toks = raw.split_ascii_whitespace();
        let Some(head) = toks.next() else { continue };
        match head {
            "in" => {
                let id = parse_id(toks.next(), line, "gate id")?;
                expect_id(&c, id, line)?;
                c.add_gate(GateKind::Input, &[]).map_err(at(line))?;
            }
            "g" => {
                let id = parse_id(toks.next(), line, "gate id")?;
                expect_id(&c, id, line)?;
                let kind = parse_kind(
                    toks.next().ok_or(NetlistError::ParseError {
                        line,
                        msg: "missing gate kind".into(),
                    })?,
                    line,
                )?;
                let mut ins = Vec::new();
                for t in toks {
                    let ref_id = t.parse::<u32>().map_err(|_| NetlistError::ParseError {
                        line,
                        msg: format!("bad input id {t:?}"),
                    })?;
                    if ref_id >= id {
                        return Err(NetlistError::ParseError {
                            line,
                            msg: format!("gate {id} references future id {ref_id}"),
                        });
                    }
                    ins.push(GateId(ref_id));
                }
                c.add_gate(kind, &ins).map_err(at(line))?;
            }
            "out" => {
                let id = parse_id(toks.next(), line, "output id")?;
                if id as usize >= c.size() {
                    return Err(NetlistError::ParseError {
                        line,
                        msg: format!("output references missing gate {id}"),
                    });
                }
                outputs.push(GateId(id));
            }
            _ => {
                return Err(NetlistError::ParseError {
                    line,
                    msg: format!("unknown record {head:?}"),
                })
            }
        }
    }
    if c.inputs().len() != want_inputs || outputs.len() != want_outputs {
        return Err(NetlistError::ParseError {
            line: 1,
            msg: format!(
                "header promises {want_inputs} inputs / {want_outputs} outputs, \
                 found {} / {}",
                c.inputs().len(),
                outputs.len()
            ),
        });
    }
    c.set_outputs(outputs);
    Ok(c)
}

fn expect_id(c: &Circuit, id: u32, line: usize) -> NetResult<()> {
    if id as usize != c.size() {
        return Err(NetlistError::ParseError {
            line,
            msg: format!("expected id {} (ascending), got {id}", c.size()),
        });
    }
    Ok(())
}

fn at(line: usize) -> impl Fn(NetlistError) -> NetlistError {
    move |e| match e {
        NetlistError::ParseError { .. } => e,
        other => NetlistError::ParseError {
            line,
            msg: other.to_string(),
        },
    }
}
