//! Semantic API model of one library version.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classfile::{AccessFlags, ConstantValue, JarContent, RawClass, RawMember};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    Class,
    Interface,
    Enum,
    Annotation,
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeKind::Class => "class",
            TypeKind::Interface => "interface",
            TypeKind::Enum => "enum",
            TypeKind::Annotation => "annotation",
        })
    }
}

/// Java access level, ordered from least to most accessible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Private,
    Package,
    Protected,
    Public,
}

impl Visibility {
    pub fn from_flags(flags: AccessFlags) -> Visibility {
        if flags.contains(AccessFlags::PUBLIC) {
            Visibility::Public
        } else if flags.contains(AccessFlags::PROTECTED) {
            Visibility::Protected
        } else if flags.contains(AccessFlags::PRIVATE) {
            Visibility::Private
        } else {
            Visibility::Package
        }
    }
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Visibility::Private => "private",
            Visibility::Package => "package",
            Visibility::Protected => "protected",
            Visibility::Public => "public",
        })
    }
}

impl FromStr for Visibility {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "private" => Visibility::Private,
            "package" => Visibility::Package,
            "protected" => Visibility::Protected,
            "public" => Visibility::Public,
            _ => return Err(format!("unknown visibility `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemberKind {
    Method,
    Constructor,
    Field,
}

/// Reference to a type, method or field.
///
/// The string form is `a.b.C` for types, `a.b.C#m(I)V` for methods and
/// constructors, and `a.b.C#f` for fields. Ordering groups members under
/// their owner type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ElementRef {
    Type(String),
    Method { owner: String, name: String, descriptor: String },
    Field { owner: String, name: String },
}

impl ElementRef {
    pub fn method(owner: &str, name: &str, descriptor: &str) -> Self {
        ElementRef::Method { owner: owner.into(), name: name.into(), descriptor: descriptor.into() }
    }

    pub fn field(owner: &str, name: &str) -> Self {
        ElementRef::Field { owner: owner.into(), name: name.into() }
    }

    /// The type itself, or the owner of a member.
    pub fn type_name(&self) -> &str {
        match self {
            ElementRef::Type(t) => t,
            ElementRef::Method { owner, .. } | ElementRef::Field { owner, .. } => owner,
        }
    }

    pub fn is_type(&self) -> bool {
        matches!(self, ElementRef::Type(_))
    }

    fn sort_key(&self) -> (&str, u8, &str, &str) {
        match self {
            ElementRef::Type(t) => (t, 0, "", ""),
            ElementRef::Field { owner, name } => (owner, 1, name, ""),
            ElementRef::Method { owner, name, descriptor } => (owner, 2, name, descriptor),
        }
    }
}

impl Ord for ElementRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for ElementRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementRef::Type(t) => f.write_str(t),
            ElementRef::Method { owner, name, descriptor } => write!(f, "{owner}#{name}{descriptor}"),
            ElementRef::Field { owner, name } => write!(f, "{owner}#{name}"),
        }
    }
}

impl FromStr for ElementRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('#') {
            None if !s.is_empty() => Ok(ElementRef::Type(s.to_string())),
            Some((owner, member)) if !owner.is_empty() && !member.is_empty() => match member.find('(') {
                Some(p) if p > 0 => Ok(ElementRef::method(owner, &member[..p], &member[p..])),
                Some(_) => Err(format!("malformed element `{s}`")),
                None => Ok(ElementRef::field(owner, member)),
            },
            _ => Err(format!("malformed element `{s}`")),
        }
    }
}

impl Serialize for ElementRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ElementRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberDecl {
    pub owner: String,
    pub kind: MemberKind,
    pub name: String,
    pub descriptor: String,
    pub visibility: Visibility,
    pub is_abstract: bool,
    pub is_final: bool,
    pub is_static: bool,
    pub is_default: bool,
    pub is_synthetic: bool,
    pub is_native: bool,
    pub is_strictfp: bool,
    pub declared_exceptions: Vec<String>,
    pub annotations: Vec<String>,
    pub constant_value: Option<ConstantValue>,
}

impl MemberDecl {
    pub fn element(&self) -> ElementRef {
        match self.kind {
            MemberKind::Field => ElementRef::field(&self.owner, &self.name),
            _ => ElementRef::method(&self.owner, &self.name, &self.descriptor),
        }
    }

    fn from_raw(owner: &str, raw: &RawMember, kind: MemberKind) -> Self {
        let f = raw.access_flags;
        MemberDecl {
            owner: owner.to_string(),
            kind,
            name: raw.name.clone(),
            descriptor: raw.descriptor.clone(),
            visibility: Visibility::from_flags(f),
            is_abstract: f.contains(AccessFlags::ABSTRACT),
            is_final: f.contains(AccessFlags::FINAL),
            is_static: f.contains(AccessFlags::STATIC),
            is_default: raw.is_default_method,
            is_synthetic: f.contains(AccessFlags::SYNTHETIC)
                || (kind != MemberKind::Field && f.contains(AccessFlags::BRIDGE)),
            is_native: kind != MemberKind::Field && f.contains(AccessFlags::NATIVE),
            is_strictfp: kind != MemberKind::Field && f.contains(AccessFlags::STRICT),
            declared_exceptions: raw.exceptions.clone(),
            annotations: raw.annotations.clone(),
            constant_value: raw.constant_value.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDecl {
    pub name: String,
    pub kind: TypeKind,
    pub visibility: Visibility,
    pub is_abstract: bool,
    pub is_final: bool,
    pub is_static: bool,
    pub is_synthetic: bool,
    pub super_name: Option<String>,
    pub interface_names: Vec<String>,
    pub annotations: Vec<String>,
    pub members: Vec<MemberDecl>,
    pub package: String,
    /// Declaring type of a member class.
    pub enclosing: Option<String>,
    /// Local and anonymous classes.
    pub is_local: bool,
}

impl TypeDecl {
    pub fn from_raw(raw: &RawClass) -> TypeDecl {
        let name = raw.this_name.clone();
        let record = raw.own_inner_record();
        // member classes carry their real modifiers in InnerClasses
        let flags = record.map(|r| r.access_flags).unwrap_or(raw.access_flags);
        let class_flags = raw.access_flags;
        let kind = if class_flags.contains(AccessFlags::ANNOTATION) {
            TypeKind::Annotation
        } else if class_flags.contains(AccessFlags::INTERFACE) {
            TypeKind::Interface
        } else if class_flags.contains(AccessFlags::ENUM) {
            TypeKind::Enum
        } else {
            TypeKind::Class
        };
        let members = raw
            .fields
            .iter()
            .map(|f| MemberDecl::from_raw(&name, f, MemberKind::Field))
            .chain(raw.methods.iter().filter(|m| m.name != "<clinit>").map(|m| {
                let kind = if m.name == "<init>" { MemberKind::Constructor } else { MemberKind::Method };
                MemberDecl::from_raw(&name, m, kind)
            }))
            .collect();
        TypeDecl {
            package: name.rsplit_once('.').map(|(p, _)| p.to_string()).unwrap_or_default(),
            kind,
            visibility: Visibility::from_flags(flags),
            is_abstract: class_flags.contains(AccessFlags::ABSTRACT) || flags.contains(AccessFlags::ABSTRACT),
            is_final: class_flags.contains(AccessFlags::FINAL) || flags.contains(AccessFlags::FINAL),
            is_static: flags.contains(AccessFlags::STATIC),
            is_synthetic: class_flags.contains(AccessFlags::SYNTHETIC),
            super_name: raw.super_name.clone(),
            interface_names: raw.interfaces.clone(),
            annotations: raw.annotations.clone(),
            members,
            enclosing: record.and_then(|r| r.outer.clone()),
            is_local: record.is_some_and(|r| r.outer.is_none()),
            name,
        }
    }

    pub fn element(&self) -> ElementRef {
        ElementRef::Type(self.name.clone())
    }

    pub fn is_interface_like(&self) -> bool {
        matches!(self.kind, TypeKind::Interface | TypeKind::Annotation)
    }

    pub fn find_method(&self, name: &str, descriptor: &str) -> Option<&MemberDecl> {
        self.members.iter().find(|m| m.kind != MemberKind::Field && m.name == name && m.descriptor == descriptor)
    }

    pub fn find_field(&self, name: &str) -> Option<&MemberDecl> {
        self.members.iter().find(|m| m.kind == MemberKind::Field && m.name == name)
    }

    pub fn find_member(&self, element: &ElementRef) -> Option<&MemberDecl> {
        match element {
            ElementRef::Type(_) => None,
            ElementRef::Method { name, descriptor, .. } => self.find_method(name, descriptor),
            ElementRef::Field { name, .. } => self.find_field(name),
        }
    }
}

/// Why a declaration is exempt from compatibility guarantees.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnstableReason {
    Annotation(String),
    PackageConvention(String),
    Enclosing(ElementRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum StabilityLabel {
    Stable,
    Unstable(UnstableReason),
}

impl StabilityLabel {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityLabel::Stable)
    }
}

/// Keywords and annotation names that mark unstable API.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityConfig {
    /// Matched case-insensitively as substrings of annotation simple names and
    /// exactly against package segments.
    pub keywords: Vec<String>,
    /// Annotation names (simple or fully qualified) that always mark
    /// instability.
    pub annotations: Vec<String>,
}

pub const DEFAULT_KEYWORDS: [&str; 10] =
    ["api", "alpha", "beta", "internal", "protected", "private", "restricted", "experimental", "dev", "access"];

pub const DEFAULT_ANNOTATIONS: [&str; 5] = ["Beta", "InterfaceAudience", "InternalApi", "Internal", "SdkInternalApi"];

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            keywords: DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            annotations: DEFAULT_ANNOTATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl StabilityConfig {
    /// Parses the line-oriented config format:
    ///
    /// ```text
    /// # comment
    /// [keywords]
    /// internal
    /// [annotations]
    /// com.google.common.annotations.Beta
    /// ```
    ///
    /// A section that appears replaces the corresponding default list; a
    /// missing section keeps the defaults.
    pub fn parse(text: &str) -> Result<StabilityConfig, ConfigError> {
        let mut keywords: Option<Vec<String>> = None;
        let mut annotations: Option<Vec<String>> = None;
        let mut section: Option<&str> = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                match name.trim() {
                    "keywords" => {
                        keywords.get_or_insert_with(Vec::new);
                        section = Some("keywords");
                    }
                    "annotations" => {
                        annotations.get_or_insert_with(Vec::new);
                        section = Some("annotations");
                    }
                    other => {
                        return Err(ConfigError::Syntax { line: i + 1, message: format!("unknown section [{other}]") })
                    }
                }
                continue;
            }
            match section {
                Some("keywords") => keywords.get_or_insert_with(Vec::new).push(line.to_lowercase()),
                Some(_) => annotations.get_or_insert_with(Vec::new).push(line.to_string()),
                None => return Err(ConfigError::Syntax { line: i + 1, message: "entry outside of a section".into() }),
            }
        }
        let defaults = StabilityConfig::default();
        Ok(StabilityConfig {
            keywords: keywords.unwrap_or(defaults.keywords),
            annotations: annotations.unwrap_or(defaults.annotations),
        })
    }

    pub fn load(path: &Path) -> Result<StabilityConfig, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Returns the offending annotation's simple name, if any.
    fn unstable_annotation(&self, annotations: &[String]) -> Option<String> {
        annotations.iter().find_map(|qualified| {
            let simple = qualified.rsplit('.').next().unwrap_or(qualified).replace('$', ".");
            let lower = simple.to_lowercase();
            let listed = self.annotations.iter().any(|a| a == qualified || *a == simple);
            let keyword = self.keywords.iter().any(|k| lower.contains(k.as_str()));
            (listed || keyword).then_some(simple)
        })
    }

    fn package_keyword(&self, package: &str) -> Option<String> {
        package.split('.').map(str::to_lowercase).find(|segment| self.keywords.iter().any(|k| k == segment))
    }
}

/// Labels `element` using `types` to look up annotations, packages and
/// enclosing types.
pub fn classify_stability(
    types: &BTreeMap<String, TypeDecl>,
    element: &ElementRef,
    config: &StabilityConfig,
) -> StabilityLabel {
    let Some(ty) = types.get(element.type_name()) else {
        // unknown owner: only the package convention can be judged
        return match config.package_keyword(element.type_name().rsplit_once('.').map_or("", |(p, _)| p)) {
            Some(k) => StabilityLabel::Unstable(UnstableReason::PackageConvention(k)),
            None => StabilityLabel::Stable,
        };
    };
    if let Some(member) = ty.find_member(element) {
        if let Some(a) = config.unstable_annotation(&member.annotations) {
            return StabilityLabel::Unstable(UnstableReason::Annotation(a));
        }
        if let Some(k) = config.package_keyword(&ty.package) {
            return StabilityLabel::Unstable(UnstableReason::PackageConvention(k));
        }
        return match classify_stability(types, &ty.element(), config) {
            StabilityLabel::Stable => StabilityLabel::Stable,
            StabilityLabel::Unstable(_) => StabilityLabel::Unstable(UnstableReason::Enclosing(ty.element())),
        };
    }
    if let Some(a) = config.unstable_annotation(&ty.annotations) {
        return StabilityLabel::Unstable(UnstableReason::Annotation(a));
    }
    if let Some(k) = config.package_keyword(&ty.package) {
        return StabilityLabel::Unstable(UnstableReason::PackageConvention(k));
    }
    if let Some(outer) = ty.enclosing.as_deref().filter(|o| *o != ty.name) {
        let outer_ref = ElementRef::Type(outer.to_string());
        if !classify_stability(types, &outer_ref, config).is_stable() {
            return StabilityLabel::Unstable(UnstableReason::Enclosing(outer_ref));
        }
    }
    StabilityLabel::Stable
}

#[derive(Debug, Clone, Default)]
pub struct ApiModel {
    /// Identifier of the library version (usually the JAR path).
    pub id: String,
    pub types: BTreeMap<String, TypeDecl>,
    pub stability: BTreeMap<ElementRef, StabilityLabel>,
    pub diagnostics: Vec<String>,
}

impl ApiModel {
    pub fn from_classes<'a>(
        id: &str,
        classes: impl IntoIterator<Item = &'a RawClass>,
        config: &StabilityConfig,
    ) -> ApiModel {
        let mut model = ApiModel { id: id.to_string(), ..Default::default() };
        for raw in classes {
            if model.types.contains_key(&raw.this_name) {
                let msg = format!("duplicate type {} in {id}; keeping the first", raw.this_name);
                warn!("{msg}");
                model.diagnostics.push(msg);
                continue;
            }
            model.types.insert(raw.this_name.clone(), TypeDecl::from_raw(raw));
        }
        let mut stability = BTreeMap::new();
        for ty in model.types.values() {
            let e = ty.element();
            stability.insert(e.clone(), classify_stability(&model.types, &e, config));
            for m in &ty.members {
                let e = m.element();
                stability.insert(e.clone(), classify_stability(&model.types, &e, config));
            }
        }
        model.stability = stability;
        model
    }

    pub fn element_stability(&self, element: &ElementRef) -> StabilityLabel {
        self.stability.get(element).cloned().unwrap_or(StabilityLabel::Stable)
    }

    pub fn member(&self, element: &ElementRef) -> Option<&MemberDecl> {
        self.types.get(element.type_name())?.find_member(element)
    }

    pub fn contains(&self, element: &ElementRef) -> bool {
        match element {
            ElementRef::Type(t) => self.types.contains_key(t),
            other => self.member(other).is_some(),
        }
    }

    /// Whether a client outside the library can name `type_name`: it must be
    /// public (or protected inside a subclassable type) along its whole
    /// nesting chain.
    pub fn is_type_accessible(&self, type_name: &str) -> bool {
        let mut current = type_name;
        for _ in 0..64 {
            let Some(ty) = self.types.get(current) else {
                return false;
            };
            if ty.is_local || ty.is_synthetic {
                return false;
            }
            match ty.enclosing.as_deref() {
                None => return ty.visibility == Visibility::Public,
                Some(outer) => {
                    let outer_final = self.types.get(outer).is_none_or(|o| o.is_final);
                    let ok =
                        ty.visibility == Visibility::Public || (ty.visibility == Visibility::Protected && !outer_final);
                    if !ok {
                        return false;
                    }
                    current = outer;
                }
            }
        }
        false
    }

    pub fn is_member_accessible(&self, ty: &TypeDecl, member: &MemberDecl) -> bool {
        if member.is_synthetic {
            return false;
        }
        match member.visibility {
            Visibility::Public => true,
            Visibility::Protected => !ty.is_final,
            _ => false,
        }
    }

    /// Superclass chain of `type_name` within this model, nearest first. The
    /// first superclass outside the model ends the chain and is included.
    pub fn superclass_chain(&self, type_name: &str) -> Vec<String> {
        let mut chain = Vec::new();
        let mut current = self.types.get(type_name).and_then(|t| t.super_name.clone());
        while let Some(s) = current {
            if chain.contains(&s) || s == type_name {
                break;
            }
            current = self.types.get(&s).and_then(|t| t.super_name.clone());
            chain.push(s);
        }
        chain
    }

    /// All superinterfaces of `type_name`, direct or inherited through
    /// superclasses and other interfaces.
    pub fn all_interfaces(&self, type_name: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<String> = Vec::new();
        let mut owners = vec![type_name.to_string()];
        owners.extend(self.superclass_chain(type_name));
        for owner in owners {
            if let Some(t) = self.types.get(&owner) {
                stack.extend(t.interface_names.iter().cloned());
            }
        }
        while let Some(i) = stack.pop() {
            if out.insert(i.clone()) {
                if let Some(t) = self.types.get(&i) {
                    stack.extend(t.interface_names.iter().cloned());
                }
            }
        }
        out
    }

    /// Whether `sub` is `sup` or inherits from it within this model.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.superclass_chain(sub).iter().any(|s| s == sup) || self.all_interfaces(sub).contains(sup)
    }
}

/// Builds the model of one library version.
pub fn build_model(jar: &JarContent, config: &StabilityConfig) -> ApiModel {
    ApiModel::from_classes(&jar.id, jar.classes(), config)
}

/// Elements a client outside the library can reach.
pub fn api_surface(model: &ApiModel) -> BTreeSet<ElementRef> {
    let mut out = BTreeSet::new();
    for ty in model.types.values() {
        if !model.is_type_accessible(&ty.name) {
            continue;
        }
        out.insert(ty.element());
        for m in &ty.members {
            if model.is_member_accessible(ty, m) {
                out.insert(m.element());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classfile::{ClassSpec, FieldSpec, MethodSpec};

    fn model(specs: Vec<ClassSpec>) -> ApiModel {
        let raws: Vec<RawClass> = specs.into_iter().map(ClassSpec::build).collect();
        ApiModel::from_classes("test", &raws, &StabilityConfig::default())
    }

    #[test]
    fn element_ref_round_trip() {
        for s in ["a.b.C", "a.b.C#m(I)V", "a.b.C#<init>()V", "a.b.C$D#f"] {
            assert_eq!(s.parse::<ElementRef>().unwrap().to_string(), s);
        }
        assert!("".parse::<ElementRef>().is_err());
        assert!("a#".parse::<ElementRef>().is_err());
        assert!("a#(I)V".parse::<ElementRef>().is_err());
    }

    #[test]
    fn beta_method_is_unstable() {
        let m = model(vec![ClassSpec::class("org.example.A")
            .method(MethodSpec::new("m", "()V").annotated("com.google.common.annotations.Beta"))
            .method(MethodSpec::new("n", "()V"))]);
        assert_eq!(
            m.element_stability(&ElementRef::method("org.example.A", "m", "()V")),
            StabilityLabel::Unstable(UnstableReason::Annotation("Beta".into()))
        );
        assert_eq!(m.element_stability(&ElementRef::method("org.example.A", "n", "()V")), StabilityLabel::Stable);
    }

    #[test]
    fn internal_package() {
        let m = model(vec![
            ClassSpec::class("com.google.common.base.internal.Finalizer").method(MethodSpec::new("m", "()V"))
        ]);
        let label = StabilityLabel::Unstable(UnstableReason::PackageConvention("internal".into()));
        assert_eq!(m.element_stability(&ElementRef::Type("com.google.common.base.internal.Finalizer".into())), label);
        assert_eq!(
            m.element_stability(&ElementRef::method("com.google.common.base.internal.Finalizer", "m", "()V")),
            label
        );
    }

    #[test]
    fn package_match_is_exact_segment() {
        let m = model(vec![ClassSpec::class("io.apiserver.Client")]);
        assert_eq!(m.element_stability(&ElementRef::Type("io.apiserver.Client".into())), StabilityLabel::Stable);
    }

    #[test]
    fn deprecated_is_stable() {
        let m = model(vec![ClassSpec::class("a.A").annotated("java.lang.Deprecated")]);
        assert_eq!(m.element_stability(&ElementRef::Type("a.A".into())), StabilityLabel::Stable);
    }

    #[test]
    fn nesting_inherits_instability() {
        let m = model(vec![
            ClassSpec::class("a.Outer").annotated("a.Experimental"),
            ClassSpec::class("a.Outer$Inner")
                .nested_in("a.Outer", AccessFlags::PUBLIC | AccessFlags::STATIC)
                .method(MethodSpec::new("m", "()V")),
        ]);
        assert_eq!(
            m.element_stability(&ElementRef::Type("a.Outer$Inner".into())),
            StabilityLabel::Unstable(UnstableReason::Enclosing(ElementRef::Type("a.Outer".into())))
        );
        assert!(!m.element_stability(&ElementRef::method("a.Outer$Inner", "m", "()V")).is_stable());
    }

    #[test]
    fn surface_follows_access_rules() {
        let m = model(vec![
            ClassSpec::class("a.Pub")
                .method(MethodSpec::new("priv", "()V").flags(AccessFlags::PRIVATE))
                .field(FieldSpec::new("prot", "I").flags(AccessFlags::PROTECTED)),
            ClassSpec::class("a.Fin").final_().field(FieldSpec::new("prot", "I").flags(AccessFlags::PROTECTED)),
            ClassSpec::class("a.Hidden").package_private().method(MethodSpec::new("m", "()V")),
        ]);
        let s = api_surface(&m);
        assert!(!s.contains(&ElementRef::method("a.Pub", "priv", "()V")));
        assert!(s.contains(&ElementRef::field("a.Pub", "prot")));
        assert!(!s.contains(&ElementRef::field("a.Fin", "prot")));
        assert!(!s.contains(&ElementRef::Type("a.Hidden".into())));
        assert!(!s.contains(&ElementRef::method("a.Hidden", "m", "()V")));
    }

    #[test]
    fn nested_type_needs_accessible_chain() {
        let m = model(vec![
            ClassSpec::class("a.Hidden").package_private(),
            ClassSpec::class("a.Hidden$In").nested_in("a.Hidden", AccessFlags::PUBLIC | AccessFlags::STATIC),
            ClassSpec::class("a.Open"),
            ClassSpec::class("a.Open$In").nested_in("a.Open", AccessFlags::PROTECTED | AccessFlags::STATIC),
            ClassSpec::class("a.Open$Priv").nested_in("a.Open", AccessFlags::PRIVATE),
        ]);
        assert!(!m.is_type_accessible("a.Hidden$In"));
        assert!(m.is_type_accessible("a.Open$In"));
        assert!(!m.is_type_accessible("a.Open$Priv"));
    }

    #[test]
    fn config_file() {
        let cfg = StabilityConfig::parse("# test\n[keywords]\nincubating\n[annotations]\nx.y.Unstable\n").unwrap();
        assert_eq!(cfg.keywords, vec!["incubating"]);
        assert_eq!(cfg.annotations, vec!["x.y.Unstable"]);
        let only_annotations = StabilityConfig::parse("[annotations]\nFoo\n").unwrap();
        assert_eq!(only_annotations.keywords.len(), 10);
        assert!(StabilityConfig::parse("stray\n").is_err());
        assert!(StabilityConfig::parse("[nope]\n").is_err());
    }

    #[test]
    fn duplicate_type_keeps_first() {
        let a1 = ClassSpec::class("a.A").method(MethodSpec::new("one", "()V")).build();
        let a2 = ClassSpec::class("a.A").build();
        let m = ApiModel::from_classes("dup", [&a1, &a2], &StabilityConfig::default());
        assert_eq!(m.types["a.A"].members.len(), 1);
        assert_eq!(m.diagnostics.len(), 1);
    }
}
