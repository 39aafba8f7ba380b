//! Frame label grammar:
//!
//! ```text
//! frame := atom ('*' atom)*
//! atom  := 'I' | 'Rx' | 'Ry' | 'Rz'
//!        | 'rot(' ax ',' ay ',' az ';' angle ')'
//!        | 'boost(' bx ',' by ',' bz ';' chi ')'
//!        | ('dir' | 'dir1' | 'dir2') '(' theta ',' phi ')'
//! ```

use super::{DirectionChannel, LorentzFrame};
use crate::error::{Error, Result};

pub(super) fn parse(label: &str) -> Result<LorentzFrame> {
    let mut atoms = label.split('*').map(str::trim);
    let first = parse_atom(atoms.next().unwrap_or(""), label)?;
    atoms.try_fold(first, |acc, a| Ok(acc.compose(&parse_atom(a, label)?)))
}

fn numbers(body: &str, whole: &str) -> Result<Vec<f64>> {
    body.split([',', ';'])
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::BadLabel(whole.into())))
        .collect()
}

fn parse_atom(atom: &str, whole: &str) -> Result<LorentzFrame> {
    let bad = || Error::BadLabel(whole.into());
    match atom {
        "I" => return Ok(LorentzFrame::identity()),
        "Rx" => return Ok(LorentzFrame::rx()),
        "Ry" => return Ok(LorentzFrame::ry()),
        "Rz" => return Ok(LorentzFrame::rz()),
        _ => {}
    }
    let open = atom.find('(').ok_or_else(bad)?;
    let body = atom[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    let head = &atom[..open];
    match head {
        "rot" | "boost" => {
            let (axis, param) = body.split_once(';').ok_or_else(bad)?;
            let a = numbers(axis, whole)?;
            let p = numbers(param, whole)?;
            if a.len() != 3 || p.len() != 1 {
                return Err(bad());
            }
            let axis = [a[0], a[1], a[2]];
            if head == "rot" {
                LorentzFrame::rotation(axis, p[0])
            } else {
                LorentzFrame::boost(axis, p[0])
            }
        }
        "dir" | "dir1" | "dir2" => {
            if body.contains(';') {
                return Err(bad());
            }
            let v = numbers(body, whole)?;
            if v.len() != 2 {
                return Err(bad());
            }
            let channel = DirectionChannel::ALL
                .into_iter()
                .find(|c| c.label_head() == head)
                .expect("head matched above");
            Ok(LorentzFrame::direction(v[0], v[1], channel))
        }
        _ => Err(bad()),
    }
}
