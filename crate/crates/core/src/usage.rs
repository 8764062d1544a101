//! How a client's bytecode uses a library's declarations.
//!
//! References are resolved by name and descriptor only, against the old
//! version of the library and the client's own classes. Overriding is not
//! visible at this level.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::apimodel::{ApiModel, ElementRef, TypeDecl};
use crate::classfile::descriptor::{class_of_constant, referenced_classes};
use crate::classfile::{AccessFlags, CodeRef, InvokeKind, JarContent, RawClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum UseKind {
    MethodInvocation,
    FieldAccess,
    Extends,
    Implements,
    Annotation,
    TypeDependency,
    ConstructorInvocation,
    /// Never populated: handler types are not part of the extracted model.
    ThrownOrCaught,
}

impl UseKind {
    pub const ALL: [UseKind; 8] = [
        UseKind::MethodInvocation,
        UseKind::FieldAccess,
        UseKind::Extends,
        UseKind::Implements,
        UseKind::Annotation,
        UseKind::TypeDependency,
        UseKind::ConstructorInvocation,
        UseKind::ThrownOrCaught,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UseKind::MethodInvocation => "methodInvocation",
            UseKind::FieldAccess => "fieldAccess",
            UseKind::Extends => "extends",
            UseKind::Implements => "implements",
            UseKind::Annotation => "annotation",
            UseKind::TypeDependency => "typeDependency",
            UseKind::ConstructorInvocation => "constructorInvocation",
            UseKind::ThrownOrCaught => "thrownOrCaught",
        }
    }
}

impl fmt::Display for UseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One client-to-library reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Use {
    /// Enclosing client method, field or type.
    pub client: ElementRef,
    /// Declaration the reference resolves to.
    pub library: ElementRef,
    /// First library type on the resolution path when it differs from the
    /// declaring type (`B` for a call to `B.m()` inherited from `A`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via: Option<String>,
    /// Field writes (`putfield`, `putstatic`).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub write: bool,
    /// `invokespecial` of a non-constructor method (`super.m()`).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub special: bool,
}

impl Use {
    /// The library type through which the client reached the element.
    pub fn entry_type(&self) -> &str {
        self.via.as_deref().unwrap_or(self.library.type_name())
    }
}

/// Shape of a client type, kept for hierarchy reasoning during detection.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientType {
    pub super_name: Option<String>,
    pub interfaces: Vec<String>,
    pub is_interface: bool,
    pub is_abstract: bool,
    pub package: String,
    /// Non-abstract, non-static methods as `name + descriptor`.
    pub concrete_methods: BTreeSet<String>,
    /// Every method declared, as `name + descriptor`.
    pub methods: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UsageModel {
    /// Identifier of the library model the client was resolved against.
    pub library_id: String,
    pub relations: BTreeMap<UseKind, BTreeSet<Use>>,
    pub client_elements: BTreeSet<ElementRef>,
    /// References that resolve neither in the library nor in the client.
    pub external: BTreeMap<UseKind, BTreeSet<(ElementRef, String)>>,
    pub client_types: BTreeMap<String, ClientType>,
    /// Direct supertypes of every library type.
    pub library_supertypes: BTreeMap<String, Vec<String>>,
}

impl UsageModel {
    pub fn uses(&self, kind: UseKind) -> impl Iterator<Item = &Use> {
        self.relations.get(&kind).into_iter().flatten()
    }

    pub fn all_uses(&self) -> impl Iterator<Item = (UseKind, &Use)> {
        self.relations.iter().flat_map(|(k, set)| set.iter().map(move |u| (*k, u)))
    }

    pub fn is_empty(&self) -> bool {
        self.relations.values().all(BTreeSet::is_empty)
    }

    pub fn pair_count(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }

    /// Every supertype of a client or library type, transitively, through
    /// both hierarchies. The type itself is not included.
    pub fn supertypes(&self, type_name: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = self.direct_supertypes(type_name);
        while let Some(t) = stack.pop() {
            if t != type_name && out.insert(t.clone()) {
                stack.extend(self.direct_supertypes(&t));
            }
        }
        out
    }

    fn direct_supertypes(&self, type_name: &str) -> Vec<String> {
        if let Some(c) = self.client_types.get(type_name) {
            return c.super_name.iter().chain(c.interfaces.iter()).cloned().collect();
        }
        self.library_supertypes.get(type_name).cloned().unwrap_or_default()
    }

    pub fn is_subtype_of(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.supertypes(sub).contains(sup)
    }

    /// Whether client type `client` or one of its client superclasses
    /// declares a concrete `name + descriptor`.
    pub fn client_implements(&self, client: &str, signature: &str) -> bool {
        let mut current = Some(client.to_string());
        let mut guard = 0;
        while let Some(t) = current {
            guard += 1;
            let Some(c) = self.client_types.get(&t) else { break };
            if c.concrete_methods.contains(signature) || guard > 64 {
                return true;
            }
            current = c.super_name.clone();
        }
        false
    }

    /// `{useKind: [[client, library], ...]}` for debugging.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .relations
            .iter()
            .map(|(k, set)| {
                let pairs =
                    set.iter().map(|u| serde_json::json!([u.client.to_string(), u.library.to_string()])).collect();
                (k.as_str().to_string(), serde_json::Value::Array(pairs))
            })
            .collect();
        serde_json::Value::Object(map)
    }

    fn add(&mut self, kind: UseKind, u: Use) {
        self.relations.entry(kind).or_default().insert(u);
    }

    fn add_external(&mut self, kind: UseKind, client: &ElementRef, target: String) {
        self.external.entry(kind).or_default().insert((client.clone(), target));
    }
}

enum Resolution {
    Library { declaring: String, via: Option<String> },
    Client,
    External,
}

struct Extractor<'a> {
    library: &'a ApiModel,
    clients: BTreeMap<&'a str, &'a RawClass>,
    out: UsageModel,
}

impl<'a> Extractor<'a> {
    fn type_ref(&mut self, kind: UseKind, client: &ElementRef, name: &str) {
        let Some(name) = class_of_constant(name) else { return };
        if self.clients.contains_key(name.as_str()) {
            return;
        }
        if self.library.types.contains_key(&name) {
            let u = Use {
                client: client.clone(),
                library: ElementRef::Type(name),
                via: None,
                write: false,
                special: false,
            };
            self.out.add(kind, u);
        } else if !name.starts_with("java.") {
            self.out.add_external(kind, client, name);
        }
    }

    fn descriptor_refs(&mut self, client: &ElementRef, descriptor: &str) {
        for c in referenced_classes(descriptor) {
            self.type_ref(UseKind::TypeDependency, client, &c);
        }
    }

    /// Walks client types up to the first library type, then the library
    /// hierarchy to the declaring type.
    fn resolve_member(&self, owner: &str, name: &str, descriptor: Option<&str>) -> Resolution {
        let declares = |t: &TypeDecl| match descriptor {
            Some(d) => t.find_method(name, d).is_some(),
            None => t.find_field(name).is_some(),
        };
        let raw_declares = |c: &RawClass| match descriptor {
            Some(d) => c.methods.iter().any(|m| m.name == name && m.descriptor == d),
            None => c.fields.iter().any(|f| f.name == name),
        };
        // client side: breadth-first over supertypes until a library type
        let mut queue = std::collections::VecDeque::from([owner.to_string()]);
        let mut seen = BTreeSet::new();
        let mut entries = Vec::new();
        while let Some(t) = queue.pop_front() {
            if !seen.insert(t.clone()) {
                continue;
            }
            if let Some(c) = self.clients.get(t.as_str()) {
                if raw_declares(c) {
                    return Resolution::Client;
                }
                queue.extend(c.super_name.iter().cloned());
                queue.extend(c.interfaces.iter().cloned());
            } else if self.library.types.contains_key(&t) {
                entries.push(t);
            }
        }
        for entry in entries {
            if let Some(declaring) = self.library_declaring(&entry, &declares) {
                let via = (declaring != entry).then_some(entry);
                return Resolution::Library { declaring, via };
            }
        }
        Resolution::External
    }

    fn library_declaring(&self, start: &str, declares: &dyn Fn(&TypeDecl) -> bool) -> Option<String> {
        let lib = self.library;
        let mut order = vec![start.to_string()];
        order.extend(lib.superclass_chain(start));
        order.extend(lib.all_interfaces(start));
        order.into_iter().find(|t| lib.types.get(t).is_some_and(declares))
    }

    #[allow(clippy::too_many_arguments)]
    fn member_ref(
        &mut self,
        kind: UseKind,
        client: &ElementRef,
        owner: &str,
        name: &str,
        descriptor: &str,
        write: bool,
        special: bool,
    ) {
        if owner.starts_with('[') {
            return;
        }
        let is_method = kind != UseKind::FieldAccess;
        let res = self.resolve_member(owner, name, is_method.then_some(descriptor));
        match res {
            Resolution::Client => {}
            Resolution::Library { declaring, via } => {
                let library = if is_method {
                    ElementRef::method(&declaring, name, descriptor)
                } else {
                    ElementRef::field(&declaring, name)
                };
                self.out.add(kind, Use { client: client.clone(), library, via, write, special });
            }
            Resolution::External => {
                if !owner.starts_with("java.") {
                    let target =
                        if is_method { format!("{owner}#{name}{descriptor}") } else { format!("{owner}#{name}") };
                    self.out.add_external(kind, client, target);
                }
            }
        }
    }

    fn class(&mut self, c: &RawClass) {
        let me = ElementRef::Type(c.this_name.clone());
        self.out.client_elements.insert(me.clone());
        let mut shape = ClientType {
            super_name: c.super_name.clone(),
            interfaces: c.interfaces.clone(),
            is_interface: c.is_interface(),
            is_abstract: c.access_flags.contains(AccessFlags::ABSTRACT),
            package: c.this_name.rsplit_once('.').map(|(p, _)| p.to_string()).unwrap_or_default(),
            ..Default::default()
        };
        if let Some(s) = &c.super_name {
            self.type_ref(UseKind::Extends, &me, s);
        }
        for i in &c.interfaces {
            self.type_ref(UseKind::Implements, &me, i);
        }
        for a in &c.annotations {
            self.type_ref(UseKind::Annotation, &me, a);
        }
        for f in &c.fields {
            let fe = ElementRef::field(&c.this_name, &f.name);
            self.out.client_elements.insert(fe.clone());
            self.descriptor_refs(&fe, &f.descriptor);
            for a in &f.annotations {
                self.type_ref(UseKind::Annotation, &fe, a);
            }
        }
        for m in &c.methods {
            let me = ElementRef::method(&c.this_name, &m.name, &m.descriptor);
            let signature = format!("{}{}", m.name, m.descriptor);
            if !m.access_flags.intersects(AccessFlags::ABSTRACT | AccessFlags::STATIC) {
                shape.concrete_methods.insert(signature.clone());
            }
            shape.methods.insert(signature);
            self.out.client_elements.insert(me.clone());
            self.descriptor_refs(&me, &m.descriptor);
            for x in &m.exceptions {
                self.type_ref(UseKind::TypeDependency, &me, x);
            }
            for a in &m.annotations {
                self.type_ref(UseKind::Annotation, &me, a);
            }
            for r in &m.code_refs {
                match r {
                    CodeRef::Invoke { kind, owner, name, descriptor, .. } => {
                        if name == "<init>" {
                            self.member_ref(UseKind::ConstructorInvocation, &me, owner, name, descriptor, false, false);
                        } else {
                            let special = *kind == InvokeKind::Special;
                            self.member_ref(UseKind::MethodInvocation, &me, owner, name, descriptor, false, special);
                        }
                    }
                    CodeRef::Field { op, owner, name, descriptor } => {
                        self.member_ref(UseKind::FieldAccess, &me, owner, name, descriptor, op.is_write(), false);
                    }
                    CodeRef::Type { name, .. } => self.type_ref(UseKind::TypeDependency, &me, name),
                }
            }
        }
        self.out.client_types.insert(c.this_name.clone(), shape);
    }
}

/// Extracts the relations between `client` and `library`.
pub fn extract_usage(client: &JarContent, library: &ApiModel) -> UsageModel {
    extract_usage_from(client.classes(), library)
}

pub fn extract_usage_from<'a>(classes: impl IntoIterator<Item = &'a RawClass>, library: &ApiModel) -> UsageModel {
    let classes: Vec<&RawClass> = classes.into_iter().collect();
    let mut ex = Extractor {
        library,
        clients: classes.iter().map(|c| (c.this_name.as_str(), *c)).collect(),
        out: UsageModel {
            library_id: library.id.clone(),
            library_supertypes: library
                .types
                .values()
                .map(|t| (t.name.clone(), t.super_name.iter().chain(t.interface_names.iter()).cloned().collect()))
                .collect(),
            ..Default::default()
        },
    };
    for c in &classes {
        ex.class(c);
    }
    ex.out
}
