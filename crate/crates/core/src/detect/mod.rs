//! Client code impacted by breaking changes.

pub mod rules;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use rules::{rule_for, Clause, Condition, ImpactRule, PessimisticRule, Target, RULES};

use crate::apimodel::{ElementRef, Visibility};
use crate::delta::{BcKind, BreakingChange, Delta};
use crate::usage::{UsageModel, Use, UseKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Certain,
    Pessimistic,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Detection {
    pub client: ElementRef,
    /// The changed element, as reported in the delta.
    pub library: ElementRef,
    pub use_kind: UseKind,
    pub bc_kind: BcKind,
    pub confidence: Confidence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<PessimisticRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DetectError {
    #[error("usage was resolved against `{usage}` but the delta starts from `{delta}`")]
    DeltaUsageMismatch { delta: String, usage: String },
}

fn package_of(type_name: &str) -> &str {
    type_name.rsplit_once('.').map_or("", |(p, _)| p)
}

/// Access check of `client_type` against an element of `owner` that now
/// has access level `vis`.
fn admitted(vis: Visibility, client_type: &str, owner: &str, usage: &UsageModel) -> bool {
    let same_package = package_of(client_type) == package_of(owner);
    match vis {
        Visibility::Public => true,
        Visibility::Protected => same_package || usage.is_subtype_of(client_type, owner),
        Visibility::Package => same_package,
        Visibility::Private => false,
    }
}

/// Owner whose subtypes may use protected access to `change.element`.
fn protection_owner(change: &BreakingChange) -> &str {
    let t = change.element.type_name();
    if change.element.is_type() {
        // a protected member type is accessible from subclasses of its outer type
        t.rsplit_once('$').map_or(t, |(outer, _)| outer)
    } else {
        t
    }
}

fn new_visibility(change: &BreakingChange) -> Option<Visibility> {
    change.detail.after.as_deref()?.parse().ok()
}

fn required_signatures(change: &BreakingChange) -> Vec<String> {
    if !change.detail.missing.is_empty() {
        return change.detail.missing.clone();
    }
    match &change.element {
        ElementRef::Method { name, descriptor, .. } => vec![format!("{name}{descriptor}")],
        _ => Vec::new(),
    }
}

fn target_matches(target: Target, change: &BreakingChange, kind: UseKind, u: &Use, usage: &UsageModel) -> bool {
    let t = change.affected_type();
    match target {
        Target::Element => u.library == change.element,
        Target::TypeOrMembers => u.library.type_name() == t || u.via.as_deref() == Some(t),
        Target::ViaRelated => {
            change.detail.related.iter().any(|r| r == u.library.type_name()) && usage.is_subtype_of(u.entry_type(), t)
        }
        Target::Subtypes => {
            matches!(kind, UseKind::Extends | UseKind::Implements) && usage.is_subtype_of(u.library.type_name(), t)
        }
    }
}

fn condition_holds(condition: Condition, change: &BreakingChange, u: &Use, usage: &UsageModel) -> bool {
    let client_type = u.client.type_name();
    let owner = change.element.type_name();
    match condition {
        Condition::Always => true,
        Condition::Write => u.write,
        Condition::NotAdmitted => match new_visibility(change) {
            Some(v) => !admitted(v, client_type, protection_owner(change), usage),
            None => true,
        },
        Condition::ProtectedFromSubclass => {
            new_visibility(change) == Some(Visibility::Protected)
                && package_of(client_type) != package_of(owner)
                && usage.is_subtype_of(client_type, owner)
        }
        Condition::ClientNotSubtype => !usage.is_subtype_of(client_type, owner),
        Condition::ClientSubtype => usage.is_subtype_of(client_type, owner),
        Condition::Unimplemented => {
            required_signatures(change).iter().any(|s| !usage.client_implements(client_type, s))
        }
    }
}

/// Detections for one change, using only the clauses `keep` accepts.
fn detect_change(
    change: &BreakingChange,
    usage: &UsageModel,
    keep: &dyn Fn(&Clause) -> bool,
    out: &mut BTreeSet<Detection>,
) {
    for clause in rule_for(change.kind).clauses.iter().filter(|c| keep(c)) {
        for &kind in clause.uses {
            for u in usage.uses(kind) {
                if target_matches(clause.target, change, kind, u, usage)
                    && condition_holds(clause.condition, change, u, usage)
                {
                    out.insert(Detection {
                        client: u.client.clone(),
                        library: change.element.clone(),
                        use_kind: kind,
                        bc_kind: change.kind,
                        confidence: if clause.rule.is_some() { Confidence::Pessimistic } else { Confidence::Certain },
                        rule: clause.rule,
                    });
                }
            }
        }
    }
}

/// Joins `delta` with `usage`. The usage model must have been extracted
/// against the delta's old version.
pub fn compute_detections(delta: &Delta, usage: &UsageModel) -> Result<Vec<Detection>, DetectError> {
    compute_detections_filtered(delta, usage, &|_| true)
}

/// As [`compute_detections`] with some pessimistic rules switched off.
pub fn compute_detections_without(
    delta: &Delta,
    usage: &UsageModel,
    disabled: &[PessimisticRule],
) -> Result<Vec<Detection>, DetectError> {
    compute_detections_filtered(delta, usage, &|c| c.rule.is_none_or(|r| !disabled.contains(&r)))
}

fn compute_detections_filtered(
    delta: &Delta,
    usage: &UsageModel,
    keep: &dyn Fn(&Clause) -> bool,
) -> Result<Vec<Detection>, DetectError> {
    if usage.library_id != delta.old {
        return Err(DetectError::DeltaUsageMismatch { delta: delta.old.clone(), usage: usage.library_id.clone() });
    }
    let mut out = BTreeSet::new();
    for change in &delta.changes {
        detect_change(change, usage, keep, &mut out);
    }
    Ok(out.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpactClass {
    Unused,
    NonBreakingUse,
    BreakingUse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeImpact {
    pub kind: BcKind,
    pub element: ElementRef,
    pub stable: bool,
    pub class: ImpactClass,
    pub detections: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactSummary {
    pub changes: Vec<ChangeImpact>,
    /// At least one change has a breaking use.
    pub broken: bool,
    /// At least one change to a stable declaration has a breaking use.
    pub broken_stable: bool,
    pub detections: usize,
    pub certain: usize,
    pub pessimistic: usize,
}

/// Whether any use of the client refers to the declaration a change affects.
pub fn touches(change: &BreakingChange, usage: &UsageModel) -> bool {
    let type_level = change.element.is_type() || change.kind.is_additive();
    usage.all_uses().any(|(kind, u)| {
        u.library == change.element
            || (type_level
                && (target_matches(Target::TypeOrMembers, change, kind, u, usage)
                    || target_matches(Target::Subtypes, change, kind, u, usage)))
            || (!change.detail.related.is_empty() && target_matches(Target::ViaRelated, change, kind, u, usage))
    })
}

pub fn classify_impact(delta: &Delta, usage: &UsageModel, detections: &[Detection]) -> ImpactSummary {
    let mut summary = ImpactSummary {
        detections: detections.len(),
        certain: detections.iter().filter(|d| d.confidence == Confidence::Certain).count(),
        pessimistic: detections.iter().filter(|d| d.confidence == Confidence::Pessimistic).count(),
        ..Default::default()
    };
    for change in &delta.changes {
        let n = detections.iter().filter(|d| d.library == change.element && d.bc_kind == change.kind).count();
        let class = if n > 0 {
            ImpactClass::BreakingUse
        } else if touches(change, usage) {
            ImpactClass::NonBreakingUse
        } else {
            ImpactClass::Unused
        };
        let stable = change.stability.is_stable();
        if class == ImpactClass::BreakingUse {
            summary.broken = true;
            summary.broken_stable |= stable;
        }
        summary.changes.push(ChangeImpact {
            kind: change.kind,
            element: change.element.clone(),
            stable,
            class,
            detections: n,
        });
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apimodel::{ApiModel, StabilityConfig};
    use crate::classfile::{AccessFlags, ClassSpec, FieldOp, FieldSpec, InvokeKind, MethodSpec, RawClass};
    use crate::delta::compute_delta;
    use crate::usage::extract_usage_from;

    fn model(id: &str, specs: Vec<ClassSpec>) -> ApiModel {
        let raws: Vec<RawClass> = specs.into_iter().map(ClassSpec::build).collect();
        ApiModel::from_classes(id, &raws, &StabilityConfig::default())
    }

    fn run(old: &ApiModel, new: &ApiModel, client: Vec<ClassSpec>) -> (Delta, UsageModel, Vec<Detection>) {
        let raws: Vec<RawClass> = client.into_iter().map(ClassSpec::build).collect();
        let delta = compute_delta(old, new);
        let usage = extract_usage_from(&raws, old);
        let d = compute_detections(&delta, &usage).unwrap();
        (delta, usage, d)
    }

    #[test]
    fn empty_delta_no_detections() {
        let m = model("v1", vec![ClassSpec::class("lib.A").method(MethodSpec::new("m", "()V"))]);
        let (_, _, d) = run(
            &m,
            &m,
            vec![ClassSpec::class("app.C").method(MethodSpec::new("x", "()V").invoke(
                InvokeKind::Virtual,
                "lib.A",
                "m",
                "()V",
            ))],
        );
        assert!(d.is_empty());
    }

    #[test]
    fn removed_method_only_hits_callers() {
        let old = model(
            "v1",
            vec![ClassSpec::class("lib.A").method(MethodSpec::new("m", "()V")).method(MethodSpec::new("k", "()V"))],
        );
        let new = model("v2", vec![ClassSpec::class("lib.A").method(MethodSpec::new("k", "()V"))]);
        let (delta, usage, d) = run(
            &old,
            &new,
            vec![ClassSpec::class("app.C").method(MethodSpec::new("x", "()V").invoke(
                InvokeKind::Virtual,
                "lib.A",
                "k",
                "()V",
            ))],
        );
        assert!(d.is_empty());
        let s = classify_impact(&delta, &usage, &d);
        assert_eq!(s.changes[0].class, ImpactClass::Unused);
        assert!(!s.broken);
    }

    #[test]
    fn field_now_final_only_writes() {
        let old = model("v1", vec![ClassSpec::class("lib.A").field(FieldSpec::new("f", "I"))]);
        let new = model("v2", vec![ClassSpec::class("lib.A").field(FieldSpec::new("f", "I").final_())]);
        let (delta, usage, d) = run(
            &old,
            &new,
            vec![ClassSpec::class("app.C")
                .method(MethodSpec::new("read", "()V").field_op(FieldOp::GetField, "lib.A", "f", "I"))
                .method(MethodSpec::new("write", "()V").field_op(FieldOp::PutField, "lib.A", "f", "I"))],
        );
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].client.to_string(), "app.C#write()V");
        assert_eq!(classify_impact(&delta, &usage, &d).changes[0].class, ImpactClass::BreakingUse);
    }

    #[test]
    fn protected_constructor_from_subclass_is_pessimistic() {
        let old = model("v1", vec![ClassSpec::class("lib.A").method(MethodSpec::constructor("()V"))]);
        let new = model(
            "v2",
            vec![ClassSpec::class("lib.A").method(MethodSpec::constructor("()V").flags(AccessFlags::PROTECTED))],
        );
        let (_, _, d) = run(
            &old,
            &new,
            vec![
                ClassSpec::class("app.Sub").extends("lib.A").method(MethodSpec::constructor("()V").invoke(
                    InvokeKind::Special,
                    "lib.A",
                    "<init>",
                    "()V",
                )),
                ClassSpec::class("app.User").method(MethodSpec::new("make", "()V").instantiate("lib.A", "()V")),
            ],
        );
        let got: Vec<(String, Confidence)> = d.iter().map(|x| (x.client.to_string(), x.confidence)).collect();
        assert_eq!(
            got,
            vec![
                ("app.Sub#<init>()V".to_string(), Confidence::Pessimistic),
                ("app.User#make()V".to_string(), Confidence::Certain),
            ]
        );
        assert_eq!(d[0].rule, Some(PessimisticRule::SuperKeyword));
    }

    #[test]
    fn mismatched_usage_is_rejected() {
        let old = model("v1", vec![ClassSpec::class("lib.A")]);
        let other = model("zzz", vec![ClassSpec::class("lib.A")]);
        let delta = compute_delta(&old, &old);
        let usage = extract_usage_from(std::iter::empty(), &other);
        assert!(matches!(compute_detections(&delta, &usage), Err(DetectError::DeltaUsageMismatch { .. })));
    }

    #[test]
    fn implemented_method_is_not_reported() {
        let old = model("v1", vec![ClassSpec::interface("lib.I")]);
        let new = model("v2", vec![ClassSpec::interface("lib.I").method(MethodSpec::new("m", "()V").abstract_())]);
        let (_, _, d) = run(
            &old,
            &new,
            vec![
                ClassSpec::class("app.Has").implements("lib.I").method(MethodSpec::new("m", "()V")),
                ClassSpec::class("app.Lacks").implements("lib.I"),
            ],
        );
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].client.to_string(), "app.Lacks");
        assert_eq!(d[0].use_kind, UseKind::Implements);
    }
}
