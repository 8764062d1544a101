use super::descriptor::{parse_field_descriptor, parse_method_descriptor};
use super::{
    AccessFlags, ClassError, CodeRef, ConstantValue, FieldOp, InnerClassRecord, InvokeKind, RawClass, RawMember,
    TypeOp, MAGIC,
};

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ClassError> {
        let end = self.pos.checked_add(n).ok_or(ClassError::TruncatedClass(self.pos))?;
        let slice = self.bytes.get(self.pos..end).ok_or(ClassError::TruncatedClass(self.pos))?;
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, ClassError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, ClassError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, ClassError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, ClassError> {
        let hi = self.u32()? as u64;
        let lo = self.u32()? as u64;
        Ok(hi << 32 | lo)
    }
}

#[derive(Debug, Clone)]
enum Entry {
    /// Index 0 and the slot after a long or double.
    Unusable,
    Utf8(String),
    Int(i32),
    Float(u32),
    Long(i64),
    Double(u64),
    Class(u16),
    String(u16),
    MemberRef {
        tag: u8,
        class: u16,
        name_and_type: u16,
    },
    NameAndType {
        name: u16,
        descriptor: u16,
    },
    Other,
}

struct Pool(Vec<Entry>);

fn bad_pool(msg: impl Into<String>) -> ClassError {
    ClassError::MalformedConstantPool(msg.into())
}

impl Pool {
    fn get(&self, idx: u16) -> Result<&Entry, ClassError> {
        match self.0.get(idx as usize) {
            Some(Entry::Unusable) | None => Err(bad_pool(format!("index {idx} is not a usable entry"))),
            Some(e) => Ok(e),
        }
    }

    fn utf8(&self, idx: u16) -> Result<&str, ClassError> {
        match self.get(idx)? {
            Entry::Utf8(s) => Ok(s),
            other => Err(bad_pool(format!("index {idx} should be Utf8, found {other:?}"))),
        }
    }

    /// Dotted binary name of a `CONSTANT_Class`.
    fn class_name(&self, idx: u16) -> Result<String, ClassError> {
        match self.get(idx)? {
            Entry::Class(name) => Ok(self.utf8(*name)?.replace('/', ".")),
            other => Err(bad_pool(format!("index {idx} should be Class, found {other:?}"))),
        }
    }

    fn opt_class_name(&self, idx: u16) -> Result<Option<String>, ClassError> {
        if idx == 0 {
            Ok(None)
        } else {
            self.class_name(idx).map(Some)
        }
    }

    fn name_and_type(&self, idx: u16) -> Result<(String, String), ClassError> {
        match self.get(idx)? {
            Entry::NameAndType { name, descriptor } => {
                Ok((self.utf8(*name)?.to_string(), self.utf8(*descriptor)?.to_string()))
            }
            other => Err(bad_pool(format!("index {idx} should be NameAndType, found {other:?}"))),
        }
    }

    /// (tag, owner, name, descriptor) of a field or method reference.
    fn member_ref(&self, idx: u16) -> Result<(u8, String, String, String), ClassError> {
        match self.get(idx)? {
            Entry::MemberRef { tag, class, name_and_type } => {
                let owner = self.class_name(*class)?;
                let (name, desc) = self.name_and_type(*name_and_type)?;
                Ok((*tag, owner, name, desc))
            }
            other => Err(bad_pool(format!("index {idx} should be a member ref, found {other:?}"))),
        }
    }

    fn constant_value(&self, idx: u16) -> Result<ConstantValue, ClassError> {
        Ok(match self.get(idx)? {
            Entry::Int(v) => ConstantValue::Int(*v),
            Entry::Long(v) => ConstantValue::Long(*v),
            Entry::Float(v) => ConstantValue::Float(*v),
            Entry::Double(v) => ConstantValue::Double(*v),
            Entry::String(s) => ConstantValue::String(self.utf8(*s)?.to_string()),
            other => return Err(bad_pool(format!("index {idx} is not a constant value: {other:?}"))),
        })
    }
}

/// Decodes the JVM's modified UTF-8 (two-byte NUL, surrogate pairs encoded
/// as two three-byte sequences).
pub(crate) fn decode_modified_utf8(bytes: &[u8]) -> Result<String, ClassError> {
    let bad = || bad_pool("invalid modified UTF-8");
    let mut units: Vec<u16> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b & 0x80 == 0 {
            if b == 0 {
                return Err(bad());
            }
            units.push(b as u16);
            i += 1;
        } else if b & 0xE0 == 0xC0 {
            let b2 = *bytes.get(i + 1).ok_or_else(bad)?;
            if b2 & 0xC0 != 0x80 {
                return Err(bad());
            }
            units.push(((b as u16 & 0x1F) << 6) | (b2 as u16 & 0x3F));
            i += 2;
        } else if b & 0xF0 == 0xE0 {
            let b2 = *bytes.get(i + 1).ok_or_else(bad)?;
            let b3 = *bytes.get(i + 2).ok_or_else(bad)?;
            if b2 & 0xC0 != 0x80 || b3 & 0xC0 != 0x80 {
                return Err(bad());
            }
            units.push(((b as u16 & 0x0F) << 12) | ((b2 as u16 & 0x3F) << 6) | (b3 as u16 & 0x3F));
            i += 3;
        } else {
            return Err(bad());
        }
    }
    String::from_utf16(&units).map_err(|_| bad())
}

fn read_pool(cur: &mut Cursor<'_>) -> Result<Pool, ClassError> {
    let count = cur.u16()?;
    if count == 0 {
        return Err(bad_pool("constant_pool_count is zero"));
    }
    let mut entries = Vec::with_capacity(count as usize);
    entries.push(Entry::Unusable);
    while entries.len() < count as usize {
        let tag = cur.u8()?;
        let entry = match tag {
            1 => {
                let len = cur.u16()? as usize;
                Entry::Utf8(decode_modified_utf8(cur.take(len)?)?)
            }
            3 => Entry::Int(cur.u32()? as i32),
            4 => Entry::Float(cur.u32()?),
            5 => Entry::Long(cur.u64()? as i64),
            6 => Entry::Double(cur.u64()?),
            7 => Entry::Class(cur.u16()?),
            8 => Entry::String(cur.u16()?),
            9..=11 => Entry::MemberRef { tag, class: cur.u16()?, name_and_type: cur.u16()? },
            12 => Entry::NameAndType { name: cur.u16()?, descriptor: cur.u16()? },
            15 => {
                cur.take(3)?;
                Entry::Other
            }
            16 | 19 | 20 => {
                cur.u16()?;
                Entry::Other
            }
            17 | 18 => {
                cur.take(4)?;
                Entry::Other
            }
            _ => return Err(bad_pool(format!("unknown tag {tag} at entry {}", entries.len()))),
        };
        let wide = matches!(entry, Entry::Long(_) | Entry::Double(_));
        entries.push(entry);
        if wide {
            if entries.len() >= count as usize {
                return Err(bad_pool("long/double occupies the last slot"));
            }
            entries.push(Entry::Unusable);
        }
    }
    Ok(Pool(entries))
}

struct Attr<'p, 'b> {
    name: &'p str,
    body: &'b [u8],
}

fn read_attributes<'p, 'b>(cur: &mut Cursor<'b>, pool: &'p Pool) -> Result<Vec<Attr<'p, 'b>>, ClassError> {
    let count = cur.u16()?;
    let mut attrs = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let name = pool.utf8(cur.u16()?)?;
        let len = cur.u32()? as usize;
        attrs.push(Attr { name, body: cur.take(len)? });
    }
    Ok(attrs)
}

fn skip_element_value(cur: &mut Cursor<'_>, depth: u32) -> Result<(), ClassError> {
    if depth > 64 {
        return Err(ClassError::Malformed("annotation nesting too deep".into()));
    }
    match cur.u8()? {
        b'B' | b'C' | b'D' | b'F' | b'I' | b'J' | b'S' | b'Z' | b's' | b'c' => {
            cur.u16()?;
        }
        b'e' => {
            cur.u16()?;
            cur.u16()?;
        }
        b'@' => skip_annotation(cur, depth + 1)?,
        b'[' => {
            for _ in 0..cur.u16()? {
                skip_element_value(cur, depth + 1)?;
            }
        }
        t => return Err(ClassError::Malformed(format!("bad element_value tag {t:#x}"))),
    }
    Ok(())
}

fn skip_annotation(cur: &mut Cursor<'_>, depth: u32) -> Result<(), ClassError> {
    cur.u16()?;
    for _ in 0..cur.u16()? {
        cur.u16()?;
        skip_element_value(cur, depth)?;
    }
    Ok(())
}

fn read_annotations(body: &[u8], pool: &Pool, out: &mut Vec<String>) -> Result<(), ClassError> {
    let mut cur = Cursor::new(body);
    for _ in 0..cur.u16()? {
        let type_desc = pool.utf8(cur.u16()?)?;
        let ty = parse_field_descriptor(type_desc)?;
        let name = ty.class_name().ok_or_else(|| ClassError::Malformed(format!("annotation type `{type_desc}`")))?;
        out.push(name.to_string());
        for _ in 0..cur.u16()? {
            cur.u16()?;
            skip_element_value(&mut cur, 0)?;
        }
    }
    Ok(())
}

fn collect_annotations(attrs: &[Attr<'_, '_>], pool: &Pool) -> Result<Vec<String>, ClassError> {
    let mut out = Vec::new();
    for name in ["RuntimeVisibleAnnotations", "RuntimeInvisibleAnnotations"] {
        for attr in attrs.iter().filter(|a| a.name == name) {
            read_annotations(attr.body, pool, &mut out)?;
        }
    }
    Ok(out)
}

/// Walks a `Code` attribute and returns the symbolic references it makes.
fn read_code(body: &[u8], pool: &Pool) -> Result<Vec<CodeRef>, ClassError> {
    let mut cur = Cursor::new(body);
    cur.u16()?; // max_stack
    cur.u16()?; // max_locals
    let len = cur.u32()? as usize;
    let code = cur.take(len)?;
    let mut refs = Vec::new();
    let mut c = Cursor::new(code);
    while c.pos < code.len() {
        let at = c.pos;
        let op = c.u8()?;
        match op {
            0x12 => {
                let idx = c.u8()? as u16;
                push_ldc(pool, idx, &mut refs)?;
            }
            0x13 => {
                let idx = c.u16()?;
                push_ldc(pool, idx, &mut refs)?;
            }
            0xb2..=0xb5 => {
                let (tag, owner, name, descriptor) = pool.member_ref(c.u16()?)?;
                if tag != 9 {
                    return Err(bad_pool(format!("field instruction at {at} references tag {tag}")));
                }
                let op = match op {
                    0xb2 => FieldOp::GetStatic,
                    0xb3 => FieldOp::PutStatic,
                    0xb4 => FieldOp::GetField,
                    _ => FieldOp::PutField,
                };
                refs.push(CodeRef::Field { op, owner, name, descriptor });
            }
            0xb6..=0xb9 => {
                let (tag, owner, name, descriptor) = pool.member_ref(c.u16()?)?;
                if tag == 9 {
                    return Err(bad_pool(format!("invoke at {at} references a field")));
                }
                let kind = match op {
                    0xb6 => InvokeKind::Virtual,
                    0xb7 => InvokeKind::Special,
                    0xb8 => InvokeKind::Static,
                    _ => {
                        c.take(2)?;
                        InvokeKind::Interface
                    }
                };
                refs.push(CodeRef::Invoke { kind, owner, name, descriptor, on_interface: tag == 11 });
            }
            0xba => {
                c.take(4)?;
            }
            0xbb | 0xbd | 0xc0 | 0xc1 | 0xc5 => {
                let name = pool.class_name(c.u16()?)?;
                let op = match op {
                    0xbb => TypeOp::New,
                    0xbd => TypeOp::ANewArray,
                    0xc0 => TypeOp::CheckCast,
                    0xc1 => TypeOp::InstanceOf,
                    _ => {
                        c.u8()?;
                        TypeOp::MultiANewArray
                    }
                };
                refs.push(CodeRef::Type { op, name });
            }
            0xaa => {
                let pad = (4 - (c.pos % 4)) % 4;
                c.take(pad)?;
                c.u32()?;
                let low = c.u32()? as i32;
                let high = c.u32()? as i32;
                if high < low {
                    return Err(ClassError::Malformed(format!("tableswitch at {at} has high < low")));
                }
                let n = (high as i64 - low as i64 + 1) as usize;
                c.take(n.checked_mul(4).ok_or(ClassError::TruncatedClass(at))?)?;
            }
            0xab => {
                let pad = (4 - (c.pos % 4)) % 4;
                c.take(pad)?;
                c.u32()?;
                let npairs = c.u32()? as usize;
                c.take(npairs.checked_mul(8).ok_or(ClassError::TruncatedClass(at))?)?;
            }
            0xc4 => {
                let inner = c.u8()?;
                c.take(if inner == 0x84 { 4 } else { 2 })?;
            }
            _ => {
                let operands =
                    operand_len(op).ok_or_else(|| ClassError::Malformed(format!("unknown opcode {op:#x} at {at}")))?;
                c.take(operands)?;
            }
        }
    }
    // exception table, then nested attributes (ignored)
    let handlers = cur.u16()? as usize;
    cur.take(handlers * 8)?;
    Ok(refs)
}

fn push_ldc(pool: &Pool, idx: u16, refs: &mut Vec<CodeRef>) -> Result<(), ClassError> {
    if let Entry::Class(_) = pool.get(idx)? {
        refs.push(CodeRef::Type { op: TypeOp::Ldc, name: pool.class_name(idx)? });
    }
    Ok(())
}

/// Operand byte count for fixed-length opcodes.
fn operand_len(op: u8) -> Option<usize> {
    Some(match op {
        0x00..=0x0f => 0,
        0x10 => 1,
        0x11 => 2,
        0x14 => 2,
        0x15..=0x19 => 1,
        0x1a..=0x35 => 0,
        0x36..=0x3a => 1,
        0x3b..=0x83 => 0,
        0x84 => 2,
        0x85..=0x98 => 0,
        0x99..=0xa8 => 2,
        0xa9 => 1,
        0xac..=0xb1 => 0,
        0xbc => 1,
        0xbe | 0xbf | 0xc2 | 0xc3 => 0,
        0xc6 | 0xc7 => 2,
        0xc8 | 0xc9 => 4,
        0xca | 0xfe | 0xff => 0,
        _ => return None,
    })
}

fn read_member(
    cur: &mut Cursor<'_>,
    pool: &Pool,
    owner_is_interface: bool,
    is_method: bool,
) -> Result<RawMember, ClassError> {
    let access_flags = AccessFlags::from_bits_retain(cur.u16()?);
    let name = pool.utf8(cur.u16()?)?.to_string();
    let descriptor = pool.utf8(cur.u16()?)?.to_string();
    if is_method {
        parse_method_descriptor(&descriptor)?;
    } else {
        parse_field_descriptor(&descriptor)?;
    }
    let attrs = read_attributes(cur, pool)?;
    let mut member = RawMember::new(name, descriptor, access_flags);
    member.annotations = collect_annotations(&attrs, pool)?;
    for attr in &attrs {
        match (attr.name, is_method) {
            ("ConstantValue", false) => {
                let mut c = Cursor::new(attr.body);
                member.constant_value = Some(pool.constant_value(c.u16()?)?);
            }
            ("Exceptions", true) => {
                let mut c = Cursor::new(attr.body);
                for _ in 0..c.u16()? {
                    member.exceptions.push(pool.class_name(c.u16()?)?);
                }
            }
            ("Code", true) => member.code_refs = read_code(attr.body, pool)?,
            _ => {}
        }
    }
    member.is_default_method = is_method
        && owner_is_interface
        && !access_flags.intersects(AccessFlags::ABSTRACT | AccessFlags::STATIC)
        && member.name != "<clinit>";
    Ok(member)
}

/// Parses one class file. Never panics on malformed input.
pub fn parse_class(bytes: &[u8]) -> Result<RawClass, ClassError> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.u32()?;
    if magic != MAGIC {
        return Err(ClassError::BadMagic(magic));
    }
    let minor_version = cur.u16()?;
    let major_version = cur.u16()?;
    if major_version < 45 {
        return Err(ClassError::Malformed(format!("major version {major_version} below 45")));
    }
    let pool = read_pool(&mut cur)?;
    let access_flags = AccessFlags::from_bits_retain(cur.u16()?);
    let this_name = pool.class_name(cur.u16()?)?;
    let super_name = pool.opt_class_name(cur.u16()?)?;
    let mut interfaces = Vec::new();
    for _ in 0..cur.u16()? {
        interfaces.push(pool.class_name(cur.u16()?)?);
    }
    let is_interface = access_flags.contains(AccessFlags::INTERFACE);
    let mut fields = Vec::new();
    for _ in 0..cur.u16()? {
        fields.push(read_member(&mut cur, &pool, is_interface, false)?);
    }
    let mut methods = Vec::new();
    for _ in 0..cur.u16()? {
        methods.push(read_member(&mut cur, &pool, is_interface, true)?);
    }
    let attrs = read_attributes(&mut cur, &pool)?;
    let annotations = collect_annotations(&attrs, &pool)?;
    let mut source_file = None;
    let mut inner_classes = Vec::new();
    for attr in &attrs {
        match attr.name {
            "SourceFile" => {
                let mut c = Cursor::new(attr.body);
                source_file = Some(pool.utf8(c.u16()?)?.to_string());
            }
            "InnerClasses" => {
                let mut c = Cursor::new(attr.body);
                for _ in 0..c.u16()? {
                    let inner = pool.class_name(c.u16()?)?;
                    let outer = pool.opt_class_name(c.u16()?)?;
                    let name_idx = c.u16()?;
                    let simple_name = if name_idx == 0 { None } else { Some(pool.utf8(name_idx)?.to_string()) };
                    let access_flags = AccessFlags::from_bits_retain(c.u16()?);
                    inner_classes.push(InnerClassRecord { inner, outer, simple_name, access_flags });
                }
            }
            _ => {}
        }
    }
    if cur.pos != bytes.len() {
        return Err(ClassError::Malformed(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    Ok(RawClass {
        magic,
        minor_version,
        major_version,
        access_flags,
        this_name,
        super_name,
        interfaces,
        fields,
        methods,
        source_file,
        annotations,
        inner_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_magic() {
        assert!(matches!(parse_class(&[0, 0, 0, 0, 0, 0]), Err(ClassError::BadMagic(0))));
    }

    #[test]
    fn truncated() {
        assert!(matches!(parse_class(&[0xCA, 0xFE]), Err(ClassError::TruncatedClass(_))));
        assert!(matches!(parse_class(&[0xCA, 0xFE, 0xBA, 0xBE, 0, 0, 0, 52]), Err(ClassError::TruncatedClass(_))));
    }

    #[test]
    fn zero_pool_count_is_malformed() {
        let bytes = [0xCA, 0xFE, 0xBA, 0xBE, 0, 0, 0, 52, 0, 0];
        assert!(matches!(parse_class(&bytes), Err(ClassError::MalformedConstantPool(_))));
    }

    #[test]
    fn modified_utf8() {
        assert_eq!(decode_modified_utf8(&[0xC0, 0x80]).unwrap(), "\0");
        // U+1F600 as a CESU-8 surrogate pair
        let smile = [0xED, 0xA0, 0xBD, 0xED, 0xB8, 0x80];
        assert_eq!(decode_modified_utf8(&smile).unwrap(), "\u{1F600}");
        assert!(decode_modified_utf8(&[0x00]).is_err());
    }
}
