use std::cmp::Ordering;

use super::{CmpOp, Cond, Literal, ResmError};
use crate::olap::{DimensionInstance, Olap, Value, ValueKind};
use crate::smgraph::StopEvent;

/// Checks that every attribute and time reference in `c` resolves against
/// the bottom level of `dim`, and that literals fit the attribute kinds.
pub(super) fn bind(c: &Cond, dim: &DimensionInstance, olap: &Olap) -> Result<(), ResmError> {
    match c {
        Cond::Cmp { attr, op, value } => {
            let kind = dim
                .schema()
                .attribute_kind(dim.schema().bottom(), attr)
                .ok_or_else(|| ResmError::UnknownAttribute { dim: dim.name().to_owned(), attr: attr.clone() })?;
            let fits = match (kind, value) {
                (ValueKind::Number, Literal::Number(_)) => true,
                (ValueKind::Text, Literal::Text(_)) => !op.is_ordering(),
                _ => false,
            };
            if !fits {
                return Err(ResmError::TypeMismatch {
                    dim: dim.name().to_owned(),
                    attr: attr.clone(),
                    kind: kind.to_string(),
                    op: *op,
                    literal: value.clone(),
                });
            }
            Ok(())
        }
        Cond::Time { category, label } => {
            let cat = olap
                .time()
                .category(category)
                .map_err(|_| ResmError::UnknownCategory(category.clone()))?;
            if !cat.has_label(label) {
                return Err(ResmError::UnknownLabel { category: category.clone(), label: label.clone() });
            }
            Ok(())
        }
        Cond::Not(a) => bind(a, dim, olap),
        Cond::And(a, b) | Cond::Or(a, b) => {
            bind(a, dim, olap)?;
            bind(b, dim, olap)
        }
    }
}

/// Evaluates `c` on a single stop. Attribute atoms read the stop's PoI
/// member; time atoms ask whether some instant strictly inside the stop
/// interval carries the label.
pub fn eval_cond(c: &Cond, stop: &StopEvent, olap: &Olap) -> Result<bool, ResmError> {
    match c {
        Cond::Cmp { attr, op, value } => {
            let dim = olap.dimension(&stop.dimension)?;
            let stored = dim.attribute(dim.schema().bottom(), attr, &stop.extent)?;
            let ordering = match (stored, value) {
                (Value::Number(a), Literal::Number(b)) => a.partial_cmp(b),
                (Value::Text(a), Literal::Text(b)) if !op.is_ordering() => Some(a.as_str().cmp(b.as_str())),
                _ => {
                    return Err(ResmError::TypeMismatch {
                        dim: dim.name().to_owned(),
                        attr: attr.clone(),
                        kind: stored.kind().to_string(),
                        op: *op,
                        literal: value.clone(),
                    })
                }
            };
            Ok(match ordering {
                None => *op == CmpOp::Ne,
                Some(o) => match op {
                    CmpOp::Eq => o == Ordering::Equal,
                    CmpOp::Ne => o != Ordering::Equal,
                    CmpOp::Lt => o == Ordering::Less,
                    CmpOp::Le => o != Ordering::Greater,
                    CmpOp::Gt => o == Ordering::Greater,
                    CmpOp::Ge => o != Ordering::Less,
                },
            })
        }
        Cond::Time { category, label } => {
            // pieces have positive length and lie within the stop interval,
            // so any piece contains interior instants
            let pieces = olap
                .time()
                .label_instant_set(category, label, &stop.interval)
                .map_err(|_| ResmError::UnknownLabel { category: category.clone(), label: label.clone() })?;
            Ok(!pieces.is_empty())
        }
        Cond::Not(a) => Ok(!eval_cond(a, stop, olap)?),
        Cond::And(a, b) => Ok(eval_cond(a, stop, olap)? && eval_cond(b, stop, olap)?),
        Cond::Or(a, b) => Ok(eval_cond(a, stop, olap)? || eval_cond(b, stop, olap)?),
    }
}
