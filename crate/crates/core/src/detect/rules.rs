//! Which client uses each kind of breaking change impacts.
//!
//! One entry per change kind. A clause matches a use when the use kind is
//! listed, the target selects the use, and the condition holds. Clauses with
//! a pessimistic rule over-approximate: bytecode alone cannot tell whether
//! the use actually breaks.

use serde::{Deserialize, Serialize};

use crate::delta::BcKind;
use crate::usage::UseKind;

/// Static-analysis blind spots that force an over-approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PessimisticRule {
    /// Overrides are not visible in the usage model.
    MethodOverriding,
    /// Exception handlers are not part of the usage model.
    ExceptionHandling,
    /// A type change may be a generalization or specialization that the
    /// library's own hierarchy cannot decide.
    InheritanceHierarchy,
    /// `super(...)` calls and `new` look alike as constructor invocations.
    SuperKeyword,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// The use resolves to the changed element.
    Element,
    /// The use names the changed type, one of its members, or reaches a
    /// member through it.
    TypeOrMembers,
    /// Members declared in the removed supertypes (`detail.related`),
    /// reached through the changed type or one of its subtypes.
    ViaRelated,
    /// An `extends`/`implements` edge to the affected type or a library
    /// subtype of it.
    Subtypes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Always,
    /// Field writes only.
    Write,
    /// The new access level no longer admits the client.
    NotAdmitted,
    /// Protected access from a client subtype in another package.
    ProtectedFromSubclass,
    ClientNotSubtype,
    ClientSubtype,
    /// The client type lacks a concrete implementation of a newly required
    /// method.
    Unimplemented,
}

#[derive(Debug, Clone, Copy)]
pub struct Clause {
    pub uses: &'static [UseKind],
    pub target: Target,
    pub condition: Condition,
    /// `None` for certain detections.
    pub rule: Option<PessimisticRule>,
}

pub struct ImpactRule {
    pub kind: BcKind,
    pub clauses: &'static [Clause],
}

use Condition as C;
use PessimisticRule as P;
use Target as T;
use UseKind::*;

const fn certain(uses: &'static [UseKind], target: Target, condition: Condition) -> Clause {
    Clause { uses, target, condition, rule: None }
}

const fn pessimistic(uses: &'static [UseKind], target: Target, condition: Condition, rule: PessimisticRule) -> Clause {
    Clause { uses, target, condition, rule: Some(rule) }
}

const ANY_LINKED: &[UseKind] =
    &[MethodInvocation, FieldAccess, Extends, Implements, TypeDependency, ConstructorInvocation];
const MEMBER_USE: &[UseKind] = &[MethodInvocation, FieldAccess];
const SUBTYPING: &[UseKind] = &[Extends, Implements];

pub static RULES: [ImpactRule; 31] = [
    ImpactRule { kind: BcKind::ClassRemoved, clauses: &[certain(ANY_LINKED, T::TypeOrMembers, C::Always)] },
    ImpactRule { kind: BcKind::ClassNowFinal, clauses: &[certain(&[Extends], T::Element, C::Always)] },
    ImpactRule {
        kind: BcKind::ClassNowAbstract,
        clauses: &[
            certain(&[ConstructorInvocation], T::TypeOrMembers, C::ClientNotSubtype),
            pessimistic(&[ConstructorInvocation], T::TypeOrMembers, C::ClientSubtype, P::SuperKeyword),
        ],
    },
    ImpactRule { kind: BcKind::ClassLessAccessible, clauses: &[certain(ANY_LINKED, T::TypeOrMembers, C::NotAdmitted)] },
    ImpactRule {
        kind: BcKind::ClassTypeChanged,
        clauses: &[certain(
            &[MethodInvocation, FieldAccess, Extends, Implements, ConstructorInvocation],
            T::TypeOrMembers,
            C::Always,
        )],
    },
    ImpactRule {
        kind: BcKind::SuperclassRemoved,
        clauses: &[
            certain(MEMBER_USE, T::ViaRelated, C::Always),
            pessimistic(&[Extends], T::Subtypes, C::Always, P::InheritanceHierarchy),
        ],
    },
    ImpactRule { kind: BcKind::SuperclassAdded, clauses: &[certain(&[Extends], T::Subtypes, C::Unimplemented)] },
    ImpactRule { kind: BcKind::InterfaceAdded, clauses: &[certain(SUBTYPING, T::Subtypes, C::Unimplemented)] },
    ImpactRule {
        kind: BcKind::InterfaceRemoved,
        clauses: &[
            certain(MEMBER_USE, T::ViaRelated, C::Always),
            pessimistic(SUBTYPING, T::Subtypes, C::Always, P::InheritanceHierarchy),
        ],
    },
    ImpactRule { kind: BcKind::MethodRemoved, clauses: &[certain(&[MethodInvocation], T::Element, C::Always)] },
    ImpactRule { kind: BcKind::MethodNowAbstract, clauses: &[certain(&[MethodInvocation], T::Element, C::Always)] },
    ImpactRule {
        kind: BcKind::MethodNowFinal,
        clauses: &[pessimistic(&[Extends], T::Subtypes, C::Always, P::MethodOverriding)],
    },
    ImpactRule { kind: BcKind::MethodNowStatic, clauses: &[certain(&[MethodInvocation], T::Element, C::Always)] },
    ImpactRule { kind: BcKind::MethodNoLongerStatic, clauses: &[certain(&[MethodInvocation], T::Element, C::Always)] },
    ImpactRule {
        kind: BcKind::MethodLessAccessible,
        clauses: &[certain(&[MethodInvocation], T::Element, C::NotAdmitted)],
    },
    ImpactRule {
        kind: BcKind::MethodReturnTypeChanged,
        clauses: &[pessimistic(&[MethodInvocation], T::Element, C::Always, P::InheritanceHierarchy)],
    },
    ImpactRule { kind: BcKind::MethodAddedToInterface, clauses: &[certain(SUBTYPING, T::Subtypes, C::Unimplemented)] },
    ImpactRule {
        kind: BcKind::MethodNewDefault,
        clauses: &[pessimistic(SUBTYPING, T::Subtypes, C::Unimplemented, P::MethodOverriding)],
    },
    ImpactRule {
        kind: BcKind::MethodAbstractNowDefault,
        clauses: &[pessimistic(SUBTYPING, T::Subtypes, C::Unimplemented, P::MethodOverriding)],
    },
    ImpactRule {
        kind: BcKind::MethodNowThrowsCheckedException,
        clauses: &[pessimistic(
            &[MethodInvocation, ConstructorInvocation],
            T::Element,
            C::Always,
            P::ExceptionHandling,
        )],
    },
    ImpactRule {
        kind: BcKind::MethodAbstractAddedToClass,
        clauses: &[certain(&[Extends], T::Subtypes, C::Unimplemented)],
    },
    ImpactRule {
        kind: BcKind::MethodAddedToPublicClass,
        clauses: &[certain(&[Extends], T::Subtypes, C::Unimplemented)],
    },
    ImpactRule {
        kind: BcKind::ConstructorRemoved,
        clauses: &[certain(&[ConstructorInvocation], T::Element, C::Always)],
    },
    ImpactRule {
        kind: BcKind::ConstructorLessAccessible,
        clauses: &[
            certain(&[ConstructorInvocation], T::Element, C::NotAdmitted),
            pessimistic(&[ConstructorInvocation], T::Element, C::ProtectedFromSubclass, P::SuperKeyword),
        ],
    },
    ImpactRule { kind: BcKind::FieldRemoved, clauses: &[certain(&[FieldAccess], T::Element, C::Always)] },
    ImpactRule { kind: BcKind::FieldNowFinal, clauses: &[certain(&[FieldAccess], T::Element, C::Write)] },
    ImpactRule { kind: BcKind::FieldLessAccessible, clauses: &[certain(&[FieldAccess], T::Element, C::NotAdmitted)] },
    ImpactRule {
        kind: BcKind::FieldTypeChanged,
        clauses: &[pessimistic(&[FieldAccess], T::Element, C::Always, P::InheritanceHierarchy)],
    },
    ImpactRule { kind: BcKind::FieldNowStatic, clauses: &[certain(&[FieldAccess], T::Element, C::Always)] },
    ImpactRule { kind: BcKind::FieldNoLongerStatic, clauses: &[certain(&[FieldAccess], T::Element, C::Always)] },
    // inlined by the compiler: no reference survives in client bytecode
    ImpactRule { kind: BcKind::FieldConstantValueChanged, clauses: &[] },
];

pub fn rule_for(kind: BcKind) -> &'static ImpactRule {
    RULES.iter().find(|r| r.kind == kind).expect("every kind has a rule")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_covers_catalog_once() {
        for k in BcKind::ALL {
            assert_eq!(RULES.iter().filter(|r| r.kind == k).count(), 1, "{k}");
        }
    }
}
