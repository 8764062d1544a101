//! Breaking changes between two versions of a library.
//!
//! Only elements a client could reach in the old version are compared.
//! Generic signatures are ignored: everything is compared on erased JVM
//! descriptors.

mod catalog;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use catalog::{BcKind, KindInfo};

use crate::apimodel::{ApiModel, ElementRef, MemberDecl, MemberKind, StabilityLabel, TypeDecl, TypeKind, Visibility};
use crate::classfile::descriptor::MethodDescriptor;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detail {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub before: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<String>,
    /// Exported type that inherits an additive change declared elsewhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affected_type: Option<String>,
    /// Supertypes involved in hierarchy changes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<String>,
    /// Abstract methods (`name` + descriptor) that subtypes must now implement.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
}

impl Detail {
    pub fn is_empty(&self) -> bool {
        *self == Detail::default()
    }

    fn change(before: impl ToString, after: impl ToString) -> Detail {
        Detail { before: Some(before.to_string()), after: Some(after.to_string()), ..Default::default() }
    }

    fn related(names: Vec<String>) -> Detail {
        Detail { related: names, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakingChange {
    pub kind: BcKind,
    pub element: ElementRef,
    pub stability: StabilityLabel,
    #[serde(default, skip_serializing_if = "Detail::is_empty")]
    pub detail: Detail,
}

impl BreakingChange {
    /// The type whose clients are affected: the element's own type, or the
    /// inheriting type for changes declared in a hidden superclass.
    pub fn affected_type(&self) -> &str {
        self.detail.affected_type.as_deref().unwrap_or(self.element.type_name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaCounts {
    pub by_kind: BTreeMap<BcKind, usize>,
    pub by_stability: BTreeMap<String, usize>,
    pub total: usize,
}

impl DeltaCounts {
    fn tally(changes: &[BreakingChange]) -> DeltaCounts {
        let mut counts = DeltaCounts { total: changes.len(), ..Default::default() };
        for c in changes {
            *counts.by_kind.entry(c.kind).or_default() += 1;
            let key = if c.stability.is_stable() { "stable" } else { "unstable" };
            *counts.by_stability.entry(key.to_string()).or_default() += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta {
    pub schema_version: u32,
    pub old: String,
    pub new: String,
    pub changes: Vec<BreakingChange>,
    pub counts: DeltaCounts,
}

impl Delta {
    pub fn new(old: &str, new: &str, mut changes: Vec<BreakingChange>) -> Delta {
        changes.sort_by(|a, b| {
            (&a.element, a.kind, &a.detail.affected_type).cmp(&(&b.element, b.kind, &b.detail.affected_type))
        });
        changes.dedup_by(|a, b| a.element == b.element && a.kind == b.kind && a.detail == b.detail);
        Delta {
            schema_version: SCHEMA_VERSION,
            old: old.to_string(),
            new: new.to_string(),
            counts: DeltaCounts::tally(&changes),
            changes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("delta serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Delta> {
        serde_json::from_str(text)
    }

    pub fn stable_changes(&self) -> impl Iterator<Item = &BreakingChange> {
        self.changes.iter().filter(|c| c.stability.is_stable())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    StableOnly,
    All,
}

pub fn is_breaking(delta: &Delta, scope: Scope) -> bool {
    match scope {
        Scope::All => !delta.changes.is_empty(),
        Scope::StableOnly => delta.stable_changes().next().is_some(),
    }
}

pub fn bc_histogram<'a>(deltas: impl IntoIterator<Item = &'a Delta>) -> BTreeMap<BcKind, usize> {
    let mut out = BTreeMap::new();
    for d in deltas {
        for c in &d.changes {
            *out.entry(c.kind).or_default() += 1;
        }
    }
    out
}

/// Methods every class inherits from `java.lang.Object` and may override.
const OBJECT_METHODS: [(&str, &str); 5] = [
    ("equals", "(Ljava/lang/Object;)Z"),
    ("hashCode", "()I"),
    ("toString", "()Ljava/lang/String;"),
    ("clone", "()Ljava/lang/Object;"),
    ("finalize", "()V"),
];

const UNCHECKED_EXCEPTIONS: [&str; 33] = [
    "java.lang.RuntimeException",
    "java.lang.Error",
    "java.lang.IllegalArgumentException",
    "java.lang.IllegalStateException",
    "java.lang.NullPointerException",
    "java.lang.UnsupportedOperationException",
    "java.lang.IndexOutOfBoundsException",
    "java.lang.ArrayIndexOutOfBoundsException",
    "java.lang.StringIndexOutOfBoundsException",
    "java.lang.ClassCastException",
    "java.lang.ArithmeticException",
    "java.lang.NumberFormatException",
    "java.lang.SecurityException",
    "java.lang.NegativeArraySizeException",
    "java.lang.ArrayStoreException",
    "java.lang.IllegalMonitorStateException",
    "java.lang.TypeNotPresentException",
    "java.lang.EnumConstantNotPresentException",
    "java.lang.AssertionError",
    "java.lang.OutOfMemoryError",
    "java.lang.StackOverflowError",
    "java.lang.LinkageError",
    "java.lang.ExceptionInInitializerError",
    "java.lang.VirtualMachineError",
    "java.util.ConcurrentModificationException",
    "java.util.NoSuchElementException",
    "java.util.MissingResourceException",
    "java.util.EmptyStackException",
    "java.util.concurrent.RejectedExecutionException",
    "java.util.concurrent.CancellationException",
    "java.io.UncheckedIOException",
    "java.time.DateTimeException",
    "java.lang.reflect.UndeclaredThrowableException",
];

/// Whether `exception` is a checked exception as far as `model` can tell.
/// Exceptions whose hierarchy leaves the model without reaching a known
/// unchecked type are assumed checked.
pub fn is_checked_exception(model: &ApiModel, exception: &str) -> bool {
    let mut chain = vec![exception.to_string()];
    chain.extend(model.superclass_chain(exception));
    !chain.iter().any(|c| UNCHECKED_EXCEPTIONS.contains(&c.as_str()))
}

fn is_object_method(name: &str, descriptor: &str) -> bool {
    OBJECT_METHODS.iter().any(|(n, d)| *n == name && *d == descriptor)
}

fn return_part(descriptor: &str) -> &str {
    descriptor.rsplit_once(')').map_or("", |(_, r)| r)
}

struct Differ<'a> {
    old: &'a ApiModel,
    new: &'a ApiModel,
    changes: Vec<BreakingChange>,
}

impl<'a> Differ<'a> {
    fn push(&mut self, kind: BcKind, element: ElementRef, detail: Detail) {
        let model = if kind.is_additive() { self.new } else { self.old };
        let stability = model.element_stability(&element);
        self.changes.push(BreakingChange { kind, element, stability, detail });
    }

    fn compare_type(&mut self, o: &TypeDecl) {
        let name = &o.name;
        let Some(n) = self.new.types.get(name) else {
            self.push(BcKind::ClassRemoved, o.element(), Detail::default());
            return;
        };
        if o.kind != n.kind {
            self.push(BcKind::ClassTypeChanged, o.element(), Detail::change(o.kind, n.kind));
            return;
        }
        if n.visibility < o.visibility {
            self.push(BcKind::ClassLessAccessible, o.element(), Detail::change(o.visibility, n.visibility));
            return;
        }
        if !self.new.is_type_accessible(name) {
            // hidden by its enclosing type, which is reported on its own
            return;
        }
        if o.kind == TypeKind::Class {
            if !o.is_final && n.is_final {
                self.push(BcKind::ClassNowFinal, o.element(), Detail::default());
            }
            if !o.is_abstract && n.is_abstract {
                self.push(BcKind::ClassNowAbstract, o.element(), Detail::default());
            }
        }
        self.compare_hierarchy(o, n);
        for m in &o.members {
            if !self.old.is_member_accessible(o, m) {
                continue;
            }
            match m.kind {
                MemberKind::Field => self.compare_field(n, m),
                MemberKind::Method | MemberKind::Constructor => self.compare_method(o, n, m),
            }
        }
        self.added_methods(o, n);
    }

    fn compare_hierarchy(&mut self, o: &TypeDecl, n: &TypeDecl) {
        let name = &o.name;
        let old_chain = self.old.superclass_chain(name);
        let new_chain = self.new.superclass_chain(name);
        let removed: Vec<String> = old_chain.iter().filter(|s| !new_chain.contains(s)).cloned().collect();
        if !removed.is_empty() {
            self.push(BcKind::SuperclassRemoved, o.element(), Detail::related(removed));
        }
        let subclassable_abstract = n.kind == TypeKind::Class && n.is_abstract && !n.is_final;
        if subclassable_abstract {
            let added: Vec<&String> = new_chain.iter().filter(|s| !old_chain.contains(s)).collect();
            self.push_added_supertypes(BcKind::SuperclassAdded, o, n, added);
        }

        let old_ifs = self.old.all_interfaces(name);
        let new_ifs = self.new.all_interfaces(name);
        let removed: Vec<String> = old_ifs.difference(&new_ifs).cloned().collect();
        if !removed.is_empty() {
            self.push(BcKind::InterfaceRemoved, o.element(), Detail::related(removed));
        }
        if n.is_interface_like() || subclassable_abstract {
            let added: Vec<&String> = new_ifs.difference(&old_ifs).collect();
            self.push_added_supertypes(BcKind::InterfaceAdded, o, n, added);
        }

        if subclassable_abstract {
            // abstract methods appearing in a superclass clients cannot see
            for s in old_chain.iter().filter(|s| new_chain.contains(s) && !self.old.is_type_accessible(s)) {
                let (Some(so), Some(sn)) = (self.old.types.get(s), self.new.types.get(s)) else {
                    continue;
                };
                for m in &sn.members {
                    let fresh = m.kind == MemberKind::Method
                        && m.is_abstract
                        && m.visibility >= Visibility::Protected
                        && so.find_method(&m.name, &m.descriptor).is_none();
                    if fresh && !self.has_concrete(n, &m.name, &m.descriptor) {
                        let detail = Detail { affected_type: Some(name.clone()), ..Default::default() };
                        self.push(BcKind::MethodAddedToPublicClass, m.element(), detail);
                    }
                }
            }
        }
    }

    /// Reports added supertypes that bring abstract methods `n` lacks.
    /// Supertypes outside the new model cannot be inspected and are skipped.
    fn push_added_supertypes(&mut self, kind: BcKind, o: &TypeDecl, n: &TypeDecl, added: Vec<&String>) {
        let mut related = Vec::new();
        let mut missing = BTreeSet::new();
        for sup in added {
            let found = self.unimplemented_abstract(n, sup);
            if !found.is_empty() {
                related.push(sup.clone());
                missing.extend(found);
            }
        }
        if !related.is_empty() {
            let detail = Detail { related, missing: missing.into_iter().collect(), ..Default::default() };
            self.push(kind, o.element(), detail);
        }
    }

    /// Abstract methods declared by supertype `sup` (new model) that `t`
    /// does not implement.
    fn unimplemented_abstract(&self, t: &TypeDecl, sup: &str) -> Vec<String> {
        let Some(s) = self.new.types.get(sup) else {
            return Vec::new();
        };
        s.members
            .iter()
            .filter(|m| {
                m.kind == MemberKind::Method
                    && m.is_abstract
                    && !is_object_method(&m.name, &m.descriptor)
                    && !self.has_concrete(t, &m.name, &m.descriptor)
            })
            .map(|m| format!("{}{}", m.name, m.descriptor))
            .collect()
    }

    /// Concrete implementation of a method in `t`, its superclasses, or a
    /// default method of its interfaces (new model).
    fn has_concrete(&self, t: &TypeDecl, name: &str, descriptor: &str) -> bool {
        let concrete = |ty: &TypeDecl| ty.find_method(name, descriptor).is_some_and(|m| !m.is_abstract && !m.is_static);
        if concrete(t) {
            return true;
        }
        if self.new.superclass_chain(&t.name).iter().filter_map(|s| self.new.types.get(s)).any(concrete) {
            return true;
        }
        self.new
            .all_interfaces(&t.name)
            .iter()
            .filter_map(|i| self.new.types.get(i))
            .any(|i| i.find_method(name, descriptor).is_some_and(|m| m.is_default))
    }

    /// Method still resolvable from `n` through its supertypes (new model).
    fn inherited_method(&self, n: &TypeDecl, m: &MemberDecl) -> bool {
        if is_object_method(&m.name, &m.descriptor) {
            return true;
        }
        let found = |ty: &TypeDecl| {
            ty.find_method(&m.name, &m.descriptor)
                .is_some_and(|x| x.is_static == m.is_static && x.visibility >= m.visibility.min(Visibility::Protected))
        };
        self.new.superclass_chain(&n.name).iter().filter_map(|s| self.new.types.get(s)).any(found)
            || (!m.is_static
                && self.new.all_interfaces(&n.name).iter().filter_map(|i| self.new.types.get(i)).any(found))
    }

    fn inherited_field(&self, n: &TypeDecl, f: &MemberDecl) -> bool {
        let found = |ty: &TypeDecl| {
            ty.find_field(&f.name).is_some_and(|x| x.descriptor == f.descriptor && x.is_static == f.is_static)
        };
        self.new.superclass_chain(&n.name).iter().filter_map(|s| self.new.types.get(s)).any(found)
            || self.new.all_interfaces(&n.name).iter().filter_map(|i| self.new.types.get(i)).any(found)
    }

    fn compare_method(&mut self, o: &TypeDecl, n: &TypeDecl, m: &MemberDecl) {
        let Some(nm) = n.find_method(&m.name, &m.descriptor) else {
            if m.kind == MemberKind::Constructor {
                self.push(BcKind::ConstructorRemoved, m.element(), Detail::default());
                return;
            }
            if self.inherited_method(n, m) {
                return;
            }
            let params = MethodDescriptor::params_part(&m.descriptor);
            let replacement = n.members.iter().find(|x| {
                x.kind == MemberKind::Method
                    && x.name == m.name
                    && MethodDescriptor::params_part(&x.descriptor) == params
                    && self.new.is_member_accessible(n, x)
            });
            match replacement {
                Some(x) => self.push(
                    BcKind::MethodReturnTypeChanged,
                    m.element(),
                    Detail::change(return_part(&m.descriptor), return_part(&x.descriptor)),
                ),
                None => self.push(BcKind::MethodRemoved, m.element(), Detail::default()),
            }
            return;
        };
        let e = m.element();
        if nm.visibility < m.visibility {
            let kind = if m.kind == MemberKind::Constructor {
                BcKind::ConstructorLessAccessible
            } else {
                BcKind::MethodLessAccessible
            };
            self.push(kind, e.clone(), Detail::change(m.visibility, nm.visibility));
        }
        if m.kind == MemberKind::Method {
            if !m.is_abstract && nm.is_abstract {
                self.push(BcKind::MethodNowAbstract, e.clone(), Detail::default());
            }
            // static methods are hidden, not overridden
            if !m.is_final && nm.is_final && !m.is_static && !o.is_final && !n.is_final {
                self.push(BcKind::MethodNowFinal, e.clone(), Detail::default());
            }
            if !m.is_static && nm.is_static {
                self.push(BcKind::MethodNowStatic, e.clone(), Detail::default());
            } else if m.is_static && !nm.is_static {
                self.push(BcKind::MethodNoLongerStatic, e.clone(), Detail::default());
            }
            if m.is_abstract && nm.is_default {
                self.push(BcKind::MethodAbstractNowDefault, e.clone(), Detail::default());
            }
        }
        let fresh: Vec<String> = nm
            .declared_exceptions
            .iter()
            .filter(|x| !m.declared_exceptions.iter().any(|old| self.new.is_subtype(x, old)))
            .filter(|x| is_checked_exception(self.new, x))
            .cloned()
            .collect();
        if !fresh.is_empty() {
            let detail = Detail {
                before: Some(m.declared_exceptions.join(",")),
                after: Some(nm.declared_exceptions.join(",")),
                related: fresh,
                ..Default::default()
            };
            self.push(BcKind::MethodNowThrowsCheckedException, e, detail);
        }
    }

    fn compare_field(&mut self, n: &TypeDecl, f: &MemberDecl) {
        let e = f.element();
        let Some(nf) = n.find_field(&f.name) else {
            if !self.inherited_field(n, f) {
                self.push(BcKind::FieldRemoved, e, Detail::default());
            }
            return;
        };
        if nf.descriptor != f.descriptor {
            self.push(BcKind::FieldTypeChanged, e.clone(), Detail::change(&f.descriptor, &nf.descriptor));
        }
        if nf.visibility < f.visibility {
            self.push(BcKind::FieldLessAccessible, e.clone(), Detail::change(f.visibility, nf.visibility));
        }
        if !f.is_final && nf.is_final {
            self.push(BcKind::FieldNowFinal, e.clone(), Detail::default());
        }
        if !f.is_static && nf.is_static {
            self.push(BcKind::FieldNowStatic, e.clone(), Detail::default());
        } else if f.is_static && !nf.is_static {
            self.push(BcKind::FieldNoLongerStatic, e.clone(), Detail::default());
        }
        if let (Some(a), Some(b)) = (&f.constant_value, &nf.constant_value) {
            if a != b && nf.descriptor == f.descriptor {
                self.push(BcKind::FieldConstantValueChanged, e, Detail::change(a, b));
            }
        }
    }

    /// Abstract and default methods new in `n` that implementors or
    /// subclasses must now provide or may now conflict with.
    fn added_methods(&mut self, o: &TypeDecl, n: &TypeDecl) {
        let old_inherited = |name: &str, desc: &str| {
            self.old
                .superclass_chain(&o.name)
                .iter()
                .chain(self.old.all_interfaces(&o.name).iter())
                .filter_map(|s| self.old.types.get(s))
                .any(|s| s.find_method(name, desc).is_some())
        };
        let mut found = Vec::new();
        for m in &n.members {
            if m.kind != MemberKind::Method || m.is_static || o.find_method(&m.name, &m.descriptor).is_some() {
                continue;
            }
            if is_object_method(&m.name, &m.descriptor) || old_inherited(&m.name, &m.descriptor) {
                continue;
            }
            if n.is_interface_like() && m.visibility == Visibility::Public {
                if m.is_abstract {
                    found.push((BcKind::MethodAddedToInterface, m.element()));
                } else if m.is_default {
                    found.push((BcKind::MethodNewDefault, m.element()));
                }
            } else if n.kind == TypeKind::Class && !n.is_final && m.is_abstract && m.visibility >= Visibility::Protected
            {
                found.push((BcKind::MethodAbstractAddedToClass, m.element()));
            }
        }
        for (kind, e) in found {
            self.push(kind, e, Detail::default());
        }
    }
}

/// Compares two versions. Only elements on the old version's API surface
/// produce changes; additive kinds additionally look at the new version.
pub fn compute_delta(old: &ApiModel, new: &ApiModel) -> Delta {
    let mut differ = Differ { old, new, changes: Vec::new() };
    for (name, o) in &old.types {
        if old.is_type_accessible(name) {
            differ.compare_type(o);
        }
    }
    Delta::new(&old.id, &new.id, differ.changes)
}

/// Distinct (element, kind) pairs reported in `delta`.
pub fn kinds_of(delta: &Delta) -> BTreeSet<(ElementRef, BcKind)> {
    delta.changes.iter().map(|c| (c.element.clone(), c.kind)).collect()
}
