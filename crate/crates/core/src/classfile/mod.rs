//! Reading JAR archives and Java class files.
//!
//! The constant pool is resolved while parsing and then thrown away: every
//! record produced here carries symbolic names (dotted binary names such as
//! `a.b.Outer$Inner`) and raw JVM descriptors, never pool indices.
//!
//! [`write_class`] goes the other way for a restricted subset of the format.
//! It exists to build test fixtures without a Java compiler.

pub mod descriptor;
mod jar;
mod reader;
mod writer;

use std::fmt;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

pub use jar::{jar_bytes, open_jar, read_jar, write_jar, EntryFailure, JarContent, JarError};
pub use reader::parse_class;
pub use writer::{write_class, ClassSpec, FieldSpec, MethodSpec};

pub const MAGIC: u32 = 0xCAFE_BABE;

/// Highest class-file major version emitted by a Java 8 compiler.
pub const JAVA_8_MAJOR: u16 = 52;

bitflags! {
    /// `access_flags` of classes, fields, methods and inner-class records.
    ///
    /// Several bits are shared between contexts (`SUPER`/`SYNCHRONIZED`,
    /// `VOLATILE`/`BRIDGE`, `TRANSIENT`/`VARARGS`).
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
    pub struct AccessFlags: u16 {
        const PUBLIC = 0x0001;
        const PRIVATE = 0x0002;
        const PROTECTED = 0x0004;
        const STATIC = 0x0008;
        const FINAL = 0x0010;
        const SUPER = 0x0020;
        const VOLATILE = 0x0040;
        const TRANSIENT = 0x0080;
        const NATIVE = 0x0100;
        const INTERFACE = 0x0200;
        const ABSTRACT = 0x0400;
        const STRICT = 0x0800;
        const SYNTHETIC = 0x1000;
        const ANNOTATION = 0x2000;
        const ENUM = 0x4000;
        const MODULE = 0x8000;
    }
}

impl AccessFlags {
    pub const SYNCHRONIZED: AccessFlags = AccessFlags::SUPER;
    pub const BRIDGE: AccessFlags = AccessFlags::VOLATILE;
    pub const VARARGS: AccessFlags = AccessFlags::TRANSIENT;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawClass {
    pub magic: u32,
    pub minor_version: u16,
    pub major_version: u16,
    pub access_flags: AccessFlags,
    pub this_name: String,
    /// `None` only for `java.lang.Object` and `module-info`.
    pub super_name: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<RawMember>,
    pub methods: Vec<RawMember>,
    pub source_file: Option<String>,
    /// Runtime-visible and runtime-invisible annotation types, in that order.
    pub annotations: Vec<String>,
    pub inner_classes: Vec<InnerClassRecord>,
}

impl RawClass {
    pub fn is_interface(&self) -> bool {
        self.access_flags.contains(AccessFlags::INTERFACE)
    }

    /// The `InnerClasses` entry describing this class itself, if it is nested.
    pub fn own_inner_record(&self) -> Option<&InnerClassRecord> {
        self.inner_classes.iter().find(|r| r.inner == self.this_name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawMember {
    pub name: String,
    pub descriptor: String,
    pub access_flags: AccessFlags,
    pub annotations: Vec<String>,
    /// Non-abstract, non-static method declared on an interface.
    pub is_default_method: bool,
    /// `ConstantValue` attribute; fields only.
    pub constant_value: Option<ConstantValue>,
    /// `Exceptions` attribute; methods only.
    pub exceptions: Vec<String>,
    /// Symbolic references made by the method body, in bytecode order.
    pub code_refs: Vec<CodeRef>,
}

impl RawMember {
    pub fn new(name: impl Into<String>, descriptor: impl Into<String>, access_flags: AccessFlags) -> Self {
        RawMember {
            name: name.into(),
            descriptor: descriptor.into(),
            access_flags,
            annotations: Vec::new(),
            is_default_method: false,
            constant_value: None,
            exceptions: Vec::new(),
            code_refs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerClassRecord {
    pub inner: String,
    /// `None` for local and anonymous classes.
    pub outer: Option<String>,
    /// `None` for anonymous classes.
    pub simple_name: Option<String>,
    pub access_flags: AccessFlags,
}

/// Value of a `ConstantValue` attribute. Floating-point values are kept as
/// IEEE-754 bit patterns so that equality is exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstantValue {
    Int(i32),
    Long(i64),
    Float(u32),
    Double(u64),
    String(String),
}

impl fmt::Display for ConstantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantValue::Int(v) => write!(f, "{v}"),
            ConstantValue::Long(v) => write!(f, "{v}L"),
            ConstantValue::Float(bits) => write!(f, "{}f", f32::from_bits(*bits)),
            ConstantValue::Double(bits) => write!(f, "{}d", f64::from_bits(*bits)),
            ConstantValue::String(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvokeKind {
    Virtual,
    Special,
    Static,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldOp {
    GetField,
    PutField,
    GetStatic,
    PutStatic,
}

impl FieldOp {
    pub fn is_write(self) -> bool {
        matches!(self, FieldOp::PutField | FieldOp::PutStatic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeOp {
    New,
    CheckCast,
    InstanceOf,
    ANewArray,
    MultiANewArray,
    /// `ldc` of a class literal.
    Ldc,
}

/// A symbolic reference found in a method body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CodeRef {
    Invoke {
        kind: InvokeKind,
        owner: String,
        name: String,
        descriptor: String,
        /// The reference is an `InterfaceMethodref`.
        on_interface: bool,
    },
    Field {
        op: FieldOp,
        owner: String,
        name: String,
        descriptor: String,
    },
    Type {
        op: TypeOp,
        name: String,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum ClassError {
    #[error("bad magic number {0:#010x}")]
    BadMagic(u32),
    #[error("class file truncated at offset {0}")]
    TruncatedClass(usize),
    #[error("malformed constant pool: {0}")]
    MalformedConstantPool(String),
    #[error("malformed class file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Descriptor(#[from] descriptor::DescriptorError),
    #[error("unsupported construct for class writer: {0}")]
    UnsupportedConstruct(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown class-file major version {0}")]
pub struct UnknownVersion(pub u16);

/// Java release that introduced a class-file major version: 45 is 1.1
/// (reported as `1`), 52 is 8, 53 is 9 and so on.
pub fn java_release_of(major_version: u16) -> Result<u16, UnknownVersion> {
    if major_version < 45 {
        return Err(UnknownVersion(major_version));
    }
    Ok(major_version - 44)
}

/// Source language inferred from the `SourceFile` attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    Scala,
    Kotlin,
    Groovy,
    Clojure,
    /// No `SourceFile` attribute.
    Unknown,
    /// Some other extension, kept verbatim.
    Other(String),
}

impl Language {
    pub fn from_source_file(source_file: Option<&str>) -> Language {
        let Some(file) = source_file else {
            return Language::Unknown;
        };
        let ext = file.rsplit_once('.').map(|(_, e)| e).unwrap_or("");
        match ext {
            "java" => Language::Java,
            "scala" => Language::Scala,
            "kt" => Language::Kotlin,
            "groovy" => Language::Groovy,
            "clj" => Language::Clojure,
            other => Language::Other(other.to_string()),
        }
    }

    /// Classes without a `SourceFile` attribute count as Java: only positive
    /// evidence of another language rejects a JAR.
    pub fn is_java_compatible(&self) -> bool {
        matches!(self, Language::Java | Language::Unknown)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::Java => f.write_str("java"),
            Language::Scala => f.write_str("scala"),
            Language::Kotlin => f.write_str("kotlin"),
            Language::Groovy => f.write_str("groovy"),
            Language::Clojure => f.write_str("clojure"),
            Language::Unknown => f.write_str("unknown"),
            Language::Other(ext) => write!(f, "other({ext})"),
        }
    }
}
