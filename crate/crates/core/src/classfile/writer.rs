use std::collections::HashMap;

use super::descriptor::{parse_field_descriptor, parse_method_descriptor, FieldType};
use super::{
    AccessFlags, ClassError, CodeRef, ConstantValue, FieldOp, InnerClassRecord, InvokeKind, RawClass, RawMember,
    TypeOp, JAVA_8_MAJOR, MAGIC,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Utf8(String),
    Int(i32),
    Float(u32),
    Long(i64),
    Double(u64),
    Class(String),
    String(String),
    NameAndType(String, String),
    MemberRef(u8, String, String, String),
}

#[derive(Default)]
struct PoolBuilder {
    bytes: Vec<u8>,
    next: u16,
    index: HashMap<Key, u16>,
}

fn encode_modified_utf8(s: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(s.len());
    for unit in s.encode_utf16() {
        match unit {
            0x0001..=0x007F => out.push(unit as u8),
            0x0000 | 0x0080..=0x07FF => {
                out.push(0xC0 | (unit >> 6) as u8);
                out.push(0x80 | (unit & 0x3F) as u8);
            }
            _ => {
                out.push(0xE0 | (unit >> 12) as u8);
                out.push(0x80 | ((unit >> 6) & 0x3F) as u8);
                out.push(0x80 | (unit & 0x3F) as u8);
            }
        }
    }
    out
}

impl PoolBuilder {
    fn new() -> Self {
        PoolBuilder { next: 1, ..Default::default() }
    }

    fn intern(&mut self, key: Key) -> Result<u16, ClassError> {
        if let Some(&idx) = self.index.get(&key) {
            return Ok(idx);
        }
        let mut entry = Vec::new();
        let slots = match &key {
            Key::Utf8(s) => {
                let enc = encode_modified_utf8(s);
                let len = u16::try_from(enc.len())
                    .map_err(|_| ClassError::UnsupportedConstruct("string constant over 65535 bytes".into()))?;
                entry.push(1);
                entry.extend_from_slice(&len.to_be_bytes());
                entry.extend_from_slice(&enc);
                1
            }
            Key::Int(v) => {
                entry.push(3);
                entry.extend_from_slice(&v.to_be_bytes());
                1
            }
            Key::Float(v) => {
                entry.push(4);
                entry.extend_from_slice(&v.to_be_bytes());
                1
            }
            Key::Long(v) => {
                entry.push(5);
                entry.extend_from_slice(&v.to_be_bytes());
                2
            }
            Key::Double(v) => {
                entry.push(6);
                entry.extend_from_slice(&v.to_be_bytes());
                2
            }
            Key::Class(name) => {
                let n = self.utf8(&name.replace('.', "/"))?;
                entry.push(7);
                entry.extend_from_slice(&n.to_be_bytes());
                1
            }
            Key::String(s) => {
                let n = self.utf8(s)?;
                entry.push(8);
                entry.extend_from_slice(&n.to_be_bytes());
                1
            }
            Key::NameAndType(name, desc) => {
                let n = self.utf8(name)?;
                let d = self.utf8(desc)?;
                entry.push(12);
                entry.extend_from_slice(&n.to_be_bytes());
                entry.extend_from_slice(&d.to_be_bytes());
                1
            }
            Key::MemberRef(tag, owner, name, desc) => {
                let c = self.intern(Key::Class(owner.clone()))?;
                let nt = self.intern(Key::NameAndType(name.clone(), desc.clone()))?;
                entry.push(*tag);
                entry.extend_from_slice(&c.to_be_bytes());
                entry.extend_from_slice(&nt.to_be_bytes());
                1
            }
        };
        let idx = self.next;
        self.next = self
            .next
            .checked_add(slots)
            .filter(|n| *n < u16::MAX)
            .ok_or_else(|| ClassError::UnsupportedConstruct("constant pool overflow".into()))?;
        self.bytes.extend_from_slice(&entry);
        self.index.insert(key, idx);
        Ok(idx)
    }

    fn utf8(&mut self, s: &str) -> Result<u16, ClassError> {
        self.intern(Key::Utf8(s.to_string()))
    }

    fn class(&mut self, name: &str) -> Result<u16, ClassError> {
        self.intern(Key::Class(name.to_string()))
    }
}

fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_be_bytes());
}

fn put_attr(out: &mut Vec<u8>, pool: &mut PoolBuilder, name: &str, body: &[u8]) -> Result<(), ClassError> {
    put_u16(out, pool.utf8(name)?);
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(body);
    Ok(())
}

fn count(n: usize, what: &str) -> Result<u16, ClassError> {
    u16::try_from(n).map_err(|_| ClassError::UnsupportedConstruct(format!("too many {what}")))
}

fn annotations_attr(
    out: &mut Vec<u8>,
    pool: &mut PoolBuilder,
    annotations: &[String],
    attr_count: &mut u16,
) -> Result<(), ClassError> {
    if annotations.is_empty() {
        return Ok(());
    }
    let mut body = Vec::new();
    put_u16(&mut body, count(annotations.len(), "annotations")?);
    for a in annotations {
        put_u16(&mut body, pool.utf8(&FieldType::Object(a.clone()).to_string())?);
        put_u16(&mut body, 0);
    }
    put_attr(out, pool, "RuntimeVisibleAnnotations", &body)?;
    *attr_count += 1;
    Ok(())
}

fn code_attr(pool: &mut PoolBuilder, member: &RawMember) -> Result<Vec<u8>, ClassError> {
    let md = parse_method_descriptor(&member.descriptor)?;
    let mut code = Vec::new();
    for r in &member.code_refs {
        match r {
            CodeRef::Invoke { kind, owner, name, descriptor, on_interface } => {
                let tag = if *on_interface { 11 } else { 10 };
                let idx = pool.intern(Key::MemberRef(tag, owner.clone(), name.clone(), descriptor.clone()))?;
                let op = match kind {
                    InvokeKind::Virtual => 0xb6,
                    InvokeKind::Special => 0xb7,
                    InvokeKind::Static => 0xb8,
                    InvokeKind::Interface => 0xb9,
                };
                code.push(op);
                put_u16(&mut code, idx);
                if *kind == InvokeKind::Interface {
                    let args = parse_method_descriptor(descriptor)?.param_slots() + 1;
                    code.push(u8::try_from(args).map_err(|_| {
                        ClassError::UnsupportedConstruct(format!("too many arguments in {descriptor}"))
                    })?);
                    code.push(0);
                }
            }
            CodeRef::Field { op, owner, name, descriptor } => {
                let idx = pool.intern(Key::MemberRef(9, owner.clone(), name.clone(), descriptor.clone()))?;
                code.push(match op {
                    FieldOp::GetStatic => 0xb2,
                    FieldOp::PutStatic => 0xb3,
                    FieldOp::GetField => 0xb4,
                    FieldOp::PutField => 0xb5,
                });
                put_u16(&mut code, idx);
            }
            CodeRef::Type { op, name } => {
                let idx = pool.class(name)?;
                match op {
                    TypeOp::Ldc => {
                        if idx <= u8::MAX as u16 {
                            code.push(0x12);
                            code.push(idx as u8);
                        } else {
                            code.push(0x13);
                            put_u16(&mut code, idx);
                        }
                    }
                    TypeOp::MultiANewArray => {
                        code.push(0xc5);
                        put_u16(&mut code, idx);
                        code.push(1);
                    }
                    other => {
                        code.push(match other {
                            TypeOp::New => 0xbb,
                            TypeOp::CheckCast => 0xc0,
                            TypeOp::InstanceOf => 0xc1,
                            _ => 0xbd,
                        });
                        put_u16(&mut code, idx);
                    }
                }
            }
        }
    }
    // `return`; the body is a reference carrier, not verifiable code
    code.push(0xb1);
    let mut body = Vec::new();
    put_u16(&mut body, 255);
    let is_static = member.access_flags.contains(AccessFlags::STATIC);
    put_u16(&mut body, md.param_slots() + if is_static { 0 } else { 1 });
    body.extend_from_slice(&(code.len() as u32).to_be_bytes());
    body.extend_from_slice(&code);
    put_u16(&mut body, 0);
    put_u16(&mut body, 0);
    Ok(body)
}

fn check_constant(member: &RawMember) -> Result<(), ClassError> {
    let Some(cv) = &member.constant_value else {
        return Ok(());
    };
    let ty = parse_field_descriptor(&member.descriptor)?;
    let ok = match (&ty, cv) {
        (FieldType::Base('J'), ConstantValue::Long(_)) => true,
        (FieldType::Base('F'), ConstantValue::Float(_)) => true,
        (FieldType::Base('D'), ConstantValue::Double(_)) => true,
        (FieldType::Base('I' | 'S' | 'C' | 'B' | 'Z'), ConstantValue::Int(_)) => true,
        (FieldType::Object(n), ConstantValue::String(_)) => n == "java.lang.String",
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(ClassError::UnsupportedConstruct(format!(
            "constant {cv} does not fit field {} {}",
            member.name, member.descriptor
        )))
    }
}

fn write_member(
    out: &mut Vec<u8>,
    pool: &mut PoolBuilder,
    member: &RawMember,
    is_method: bool,
) -> Result<(), ClassError> {
    put_u16(out, member.access_flags.bits());
    put_u16(out, pool.utf8(&member.name)?);
    put_u16(out, pool.utf8(&member.descriptor)?);
    let mut attrs = Vec::new();
    let mut n = 0u16;
    if is_method {
        parse_method_descriptor(&member.descriptor)?;
        if member.constant_value.is_some() {
            return Err(ClassError::UnsupportedConstruct(format!("constant value on method {}", member.name)));
        }
        let bodyless = member.access_flags.intersects(AccessFlags::ABSTRACT | AccessFlags::NATIVE);
        if bodyless && !member.code_refs.is_empty() {
            return Err(ClassError::UnsupportedConstruct(format!("body on abstract/native method {}", member.name)));
        }
        if !bodyless {
            let body = code_attr(pool, member)?;
            put_attr(&mut attrs, pool, "Code", &body)?;
            n += 1;
        }
        if !member.exceptions.is_empty() {
            let mut body = Vec::new();
            put_u16(&mut body, count(member.exceptions.len(), "exceptions")?);
            for e in &member.exceptions {
                put_u16(&mut body, pool.class(e)?);
            }
            put_attr(&mut attrs, pool, "Exceptions", &body)?;
            n += 1;
        }
    } else {
        parse_field_descriptor(&member.descriptor)?;
        if !member.code_refs.is_empty() || !member.exceptions.is_empty() {
            return Err(ClassError::UnsupportedConstruct(format!("code or throws on field {}", member.name)));
        }
        check_constant(member)?;
        if let Some(cv) = &member.constant_value {
            let idx = pool.intern(match cv {
                ConstantValue::Int(v) => Key::Int(*v),
                ConstantValue::Long(v) => Key::Long(*v),
                ConstantValue::Float(v) => Key::Float(*v),
                ConstantValue::Double(v) => Key::Double(*v),
                ConstantValue::String(s) => Key::String(s.clone()),
            })?;
            let mut body = Vec::new();
            put_u16(&mut body, idx);
            put_attr(&mut attrs, pool, "ConstantValue", &body)?;
            n += 1;
        }
    }
    annotations_attr(&mut attrs, pool, &member.annotations, &mut n)?;
    put_u16(out, n);
    out.extend_from_slice(&attrs);
    Ok(())
}

/// Serialises a class description into class-file bytes such that
/// `parse_class(write_class(c)) == c`.
///
/// Method bodies are emitted as the bare sequence of referencing
/// instructions followed by `return`; they are not verifiable bytecode.
pub fn write_class(class: &RawClass) -> Result<Vec<u8>, ClassError> {
    if class.magic != MAGIC {
        return Err(ClassError::UnsupportedConstruct(format!("magic {:#x}", class.magic)));
    }
    let is_interface = class.is_interface();
    for m in &class.methods {
        let expected = is_interface
            && !m.access_flags.intersects(AccessFlags::ABSTRACT | AccessFlags::STATIC)
            && m.name != "<clinit>";
        if m.is_default_method != expected {
            return Err(ClassError::UnsupportedConstruct(format!(
                "is_default_method inconsistent with flags on {}",
                m.name
            )));
        }
    }
    let mut pool = PoolBuilder::new();
    let mut body = Vec::new();
    put_u16(&mut body, class.access_flags.bits());
    put_u16(&mut body, pool.class(&class.this_name)?);
    put_u16(
        &mut body,
        match &class.super_name {
            Some(s) => pool.class(s)?,
            None => 0,
        },
    );
    put_u16(&mut body, count(class.interfaces.len(), "interfaces")?);
    for i in &class.interfaces {
        put_u16(&mut body, pool.class(i)?);
    }
    put_u16(&mut body, count(class.fields.len(), "fields")?);
    for f in &class.fields {
        if f.is_default_method {
            return Err(ClassError::UnsupportedConstruct(format!("field {} marked default", f.name)));
        }
        write_member(&mut body, &mut pool, f, false)?;
    }
    put_u16(&mut body, count(class.methods.len(), "methods")?);
    for m in &class.methods {
        write_member(&mut body, &mut pool, m, true)?;
    }
    let mut attrs = Vec::new();
    let mut n = 0u16;
    if let Some(src) = &class.source_file {
        let mut b = Vec::new();
        put_u16(&mut b, pool.utf8(src)?);
        put_attr(&mut attrs, &mut pool, "SourceFile", &b)?;
        n += 1;
    }
    annotations_attr(&mut attrs, &mut pool, &class.annotations, &mut n)?;
    if !class.inner_classes.is_empty() {
        let mut b = Vec::new();
        put_u16(&mut b, count(class.inner_classes.len(), "inner classes")?);
        for r in &class.inner_classes {
            put_u16(&mut b, pool.class(&r.inner)?);
            put_u16(
                &mut b,
                match &r.outer {
                    Some(o) => pool.class(o)?,
                    None => 0,
                },
            );
            put_u16(
                &mut b,
                match &r.simple_name {
                    Some(s) => pool.utf8(s)?,
                    None => 0,
                },
            );
            put_u16(&mut b, r.access_flags.bits());
        }
        put_attr(&mut attrs, &mut pool, "InnerClasses", &b)?;
        n += 1;
    }
    put_u16(&mut body, n);
    body.extend_from_slice(&attrs);

    let mut out = Vec::with_capacity(body.len() + pool.bytes.len() + 10);
    out.extend_from_slice(&class.magic.to_be_bytes());
    put_u16(&mut out, class.minor_version);
    put_u16(&mut out, class.major_version);
    put_u16(&mut out, pool.next);
    out.extend_from_slice(&pool.bytes);
    out.extend_from_slice(&body);
    Ok(out)
}

/// Declarative builder for fixture classes.
///
/// ```
/// use breakscope_core::classfile::{ClassSpec, MethodSpec};
/// let iface = ClassSpec::interface("lib.I").method(MethodSpec::new("m", "()V").abstract_()).build();
/// assert!(iface.is_interface());
/// ```
#[derive(Debug, Clone)]
pub struct ClassSpec {
    raw: RawClass,
}

impl ClassSpec {
    fn base(name: &str, flags: AccessFlags, super_name: &str) -> Self {
        let simple = name.rsplit('.').next().unwrap_or(name);
        let top = simple.split('$').next().unwrap_or(simple);
        ClassSpec {
            raw: RawClass {
                magic: MAGIC,
                minor_version: 0,
                major_version: JAVA_8_MAJOR,
                access_flags: flags,
                this_name: name.to_string(),
                super_name: Some(super_name.to_string()),
                interfaces: Vec::new(),
                fields: Vec::new(),
                methods: Vec::new(),
                source_file: Some(format!("{top}.java")),
                annotations: Vec::new(),
                inner_classes: Vec::new(),
            },
        }
    }

    /// A public class extending `java.lang.Object`.
    pub fn class(name: &str) -> Self {
        Self::base(name, AccessFlags::PUBLIC | AccessFlags::SUPER, "java.lang.Object")
    }

    pub fn interface(name: &str) -> Self {
        Self::base(name, AccessFlags::PUBLIC | AccessFlags::INTERFACE | AccessFlags::ABSTRACT, "java.lang.Object")
    }

    pub fn enumeration(name: &str) -> Self {
        Self::base(
            name,
            AccessFlags::PUBLIC | AccessFlags::FINAL | AccessFlags::SUPER | AccessFlags::ENUM,
            "java.lang.Enum",
        )
    }

    pub fn annotation_type(name: &str) -> Self {
        let mut spec = Self::base(
            name,
            AccessFlags::PUBLIC | AccessFlags::INTERFACE | AccessFlags::ABSTRACT | AccessFlags::ANNOTATION,
            "java.lang.Object",
        );
        spec.raw.interfaces.push("java.lang.annotation.Annotation".into());
        spec
    }

    pub fn flags(mut self, flags: AccessFlags) -> Self {
        self.raw.access_flags = flags;
        self
    }

    pub fn with_flag(mut self, flag: AccessFlags) -> Self {
        self.raw.access_flags |= flag;
        self
    }

    pub fn without_flag(mut self, flag: AccessFlags) -> Self {
        self.raw.access_flags.remove(flag);
        self
    }

    pub fn package_private(self) -> Self {
        self.without_flag(AccessFlags::PUBLIC)
    }

    pub fn final_(self) -> Self {
        self.with_flag(AccessFlags::FINAL)
    }

    pub fn abstract_(self) -> Self {
        self.with_flag(AccessFlags::ABSTRACT)
    }

    pub fn extends(mut self, super_name: &str) -> Self {
        self.raw.super_name = Some(super_name.to_string());
        self
    }

    pub fn implements(mut self, iface: &str) -> Self {
        self.raw.interfaces.push(iface.to_string());
        self
    }

    pub fn source(mut self, file: Option<&str>) -> Self {
        self.raw.source_file = file.map(str::to_string);
        self
    }

    pub fn major_version(mut self, major: u16) -> Self {
        self.raw.major_version = major;
        self
    }

    pub fn annotated(mut self, annotation: &str) -> Self {
        self.raw.annotations.push(annotation.to_string());
        self
    }

    /// Records this class as a member of `outer` with the given inner flags.
    pub fn nested_in(mut self, outer: &str, flags: AccessFlags) -> Self {
        let simple = self.raw.this_name.rsplit('$').next().unwrap_or_default().to_string();
        self.raw.inner_classes.push(InnerClassRecord {
            inner: self.raw.this_name.clone(),
            outer: Some(outer.to_string()),
            simple_name: Some(simple),
            access_flags: flags,
        });
        self
    }

    pub fn inner_record(mut self, record: InnerClassRecord) -> Self {
        self.raw.inner_classes.push(record);
        self
    }

    pub fn field(mut self, field: FieldSpec) -> Self {
        self.raw.fields.push(field.0);
        self
    }

    pub fn method(mut self, method: MethodSpec) -> Self {
        let mut m = method.0;
        m.is_default_method = self.raw.is_interface()
            && !m.access_flags.intersects(AccessFlags::ABSTRACT | AccessFlags::STATIC)
            && m.name != "<clinit>";
        self.raw.methods.push(m);
        self
    }

    pub fn build(self) -> RawClass {
        self.raw
    }

    pub fn bytes(&self) -> Result<Vec<u8>, ClassError> {
        write_class(&self.raw)
    }
}

#[derive(Debug, Clone)]
pub struct FieldSpec(RawMember);

impl FieldSpec {
    /// A public instance field.
    pub fn new(name: &str, descriptor: &str) -> Self {
        FieldSpec(RawMember::new(name, descriptor, AccessFlags::PUBLIC))
    }

    pub fn flags(mut self, flags: AccessFlags) -> Self {
        self.0.access_flags = flags;
        self
    }

    pub fn with_flag(mut self, flag: AccessFlags) -> Self {
        self.0.access_flags |= flag;
        self
    }

    pub fn static_(self) -> Self {
        self.with_flag(AccessFlags::STATIC)
    }

    pub fn final_(self) -> Self {
        self.with_flag(AccessFlags::FINAL)
    }

    pub fn constant(mut self, value: ConstantValue) -> Self {
        self.0.constant_value = Some(value);
        self
    }

    pub fn annotated(mut self, annotation: &str) -> Self {
        self.0.annotations.push(annotation.to_string());
        self
    }
}

#[derive(Debug, Clone)]
pub struct MethodSpec(RawMember);

impl MethodSpec {
    /// A public, concrete instance method with an empty body.
    pub fn new(name: &str, descriptor: &str) -> Self {
        MethodSpec(RawMember::new(name, descriptor, AccessFlags::PUBLIC))
    }

    pub fn constructor(descriptor: &str) -> Self {
        Self::new("<init>", descriptor)
    }

    pub fn flags(mut self, flags: AccessFlags) -> Self {
        self.0.access_flags = flags;
        self
    }

    pub fn with_flag(mut self, flag: AccessFlags) -> Self {
        self.0.access_flags |= flag;
        self
    }

    pub fn abstract_(self) -> Self {
        self.with_flag(AccessFlags::ABSTRACT)
    }

    pub fn static_(self) -> Self {
        self.with_flag(AccessFlags::STATIC)
    }

    pub fn final_(self) -> Self {
        self.with_flag(AccessFlags::FINAL)
    }

    pub fn throws(mut self, exception: &str) -> Self {
        self.0.exceptions.push(exception.to_string());
        self
    }

    pub fn annotated(mut self, annotation: &str) -> Self {
        self.0.annotations.push(annotation.to_string());
        self
    }

    pub fn code(mut self, r: CodeRef) -> Self {
        self.0.code_refs.push(r);
        self
    }

    pub fn invoke(self, kind: InvokeKind, owner: &str, name: &str, descriptor: &str) -> Self {
        self.code(CodeRef::Invoke {
            kind,
            owner: owner.to_string(),
            name: name.to_string(),
            descriptor: descriptor.to_string(),
            on_interface: kind == InvokeKind::Interface,
        })
    }

    pub fn field_op(self, op: FieldOp, owner: &str, name: &str, descriptor: &str) -> Self {
        self.code(CodeRef::Field {
            op,
            owner: owner.to_string(),
            name: name.to_string(),
            descriptor: descriptor.to_string(),
        })
    }

    pub fn type_op(self, op: TypeOp, name: &str) -> Self {
        self.code(CodeRef::Type { op, name: name.to_string() })
    }

    /// `new owner` followed by `invokespecial owner.<init>(descriptor)`.
    pub fn instantiate(self, owner: &str, ctor_descriptor: &str) -> Self {
        self.type_op(TypeOp::New, owner).invoke(InvokeKind::Special, owner, "<init>", ctor_descriptor)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_class;
    use super::*;

    #[test]
    fn interface_round_trip() {
        let spec = ClassSpec::interface("javax.servlet.http.HttpServletRequest")
            .implements("javax.servlet.ServletRequest")
            .method(MethodSpec::new("getAuthType", "()Ljava/lang/String;").abstract_());
        let raw = spec.clone().build();
        let parsed = parse_class(&spec.bytes().unwrap()).unwrap();
        assert!(parsed.access_flags.contains(AccessFlags::INTERFACE));
        assert_eq!(parsed.methods.len(), 1);
        assert_eq!(parsed, raw);
    }

    #[test]
    fn public_final_class() {
        let spec = ClassSpec::class("a.A").final_();
        let parsed = parse_class(&spec.bytes().unwrap()).unwrap();
        assert!(parsed.access_flags.contains(AccessFlags::PUBLIC | AccessFlags::FINAL));
    }

    #[test]
    fn body_and_constants_round_trip() {
        let spec = ClassSpec::class("b.B")
            .source(Some("HttpServletRequest.java"))
            .annotated("com.google.common.annotations.Beta")
            .field(FieldSpec::new("K", "J").static_().final_().constant(ConstantValue::Long(-7)))
            .field(
                FieldSpec::new("S", "Ljava/lang/String;")
                    .static_()
                    .final_()
                    .constant(ConstantValue::String("x\0y".into())),
            )
            .field(FieldSpec::new("D", "D").static_().final_().constant(ConstantValue::Double(2.5f64.to_bits())))
            .method(
                MethodSpec::new("run", "(JI)V")
                    .throws("java.io.IOException")
                    .invoke(InvokeKind::Virtual, "a.A", "m", "()V")
                    .invoke(InvokeKind::Interface, "a.I", "n", "(JI)V")
                    .field_op(FieldOp::GetStatic, "a.A", "f", "I")
                    .type_op(TypeOp::CheckCast, "[La.A;")
                    .type_op(TypeOp::Ldc, "a.A")
                    .instantiate("a.A", "()V"),
            )
            .nested_in("b.Outer", AccessFlags::PUBLIC | AccessFlags::STATIC);
        let raw = spec.clone().build();
        let parsed = parse_class(&spec.bytes().unwrap()).unwrap();
        assert_eq!(parsed, raw);
        assert_eq!(parsed.source_file.as_deref(), Some("HttpServletRequest.java"));
    }

    #[test]
    fn rejects_mismatched_constant() {
        let spec = ClassSpec::class("a.A").field(FieldSpec::new("f", "I").constant(ConstantValue::Long(1)));
        assert!(matches!(spec.bytes(), Err(ClassError::UnsupportedConstruct(_))));
    }

    #[test]
    fn rejects_body_on_abstract() {
        let spec = ClassSpec::class("a.A").abstract_().method(MethodSpec::new("m", "()V").abstract_().invoke(
            InvokeKind::Static,
            "a.B",
            "x",
            "()V",
        ));
        assert!(matches!(spec.bytes(), Err(ClassError::UnsupportedConstruct(_))));
    }
}
