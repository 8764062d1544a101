//! JVM field and method descriptors.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldType {
    /// One of `B C D F I J S Z`.
    Base(char),
    /// Binary class name in dotted form, e.g. `java.lang.String`.
    Object(String),
    Array(Box<FieldType>),
}

impl FieldType {
    /// The class named by this type, looking through array dimensions.
    pub fn class_name(&self) -> Option<&str> {
        match self {
            FieldType::Base(_) => None,
            FieldType::Object(name) => Some(name),
            FieldType::Array(inner) => inner.class_name(),
        }
    }

    /// Number of local-variable slots a value of this type occupies.
    pub fn slots(&self) -> u16 {
        match self {
            FieldType::Base('J') | FieldType::Base('D') => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldType::Base(c) => write!(f, "{c}"),
            FieldType::Object(name) => write!(f, "L{};", name.replace('.', "/")),
            FieldType::Array(inner) => write!(f, "[{inner}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDescriptor {
    pub params: Vec<FieldType>,
    /// `None` for `void`.
    pub ret: Option<FieldType>,
}

impl MethodDescriptor {
    pub fn param_slots(&self) -> u16 {
        self.params.iter().map(FieldType::slots).sum()
    }

    /// The parenthesised parameter part, e.g. `(ILjava/lang/String;)`.
    pub fn params_part(desc: &str) -> &str {
        match desc.find(')') {
            Some(end) => &desc[..=end],
            None => desc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid descriptor `{0}`")]
pub struct DescriptorError(pub String);

fn parse_one(bytes: &[u8], pos: &mut usize, whole: &str) -> Result<FieldType, DescriptorError> {
    let err = || DescriptorError(whole.to_string());
    let c = *bytes.get(*pos).ok_or_else(err)?;
    *pos += 1;
    match c {
        b'B' | b'C' | b'D' | b'F' | b'I' | b'J' | b'S' | b'Z' => Ok(FieldType::Base(c as char)),
        b'L' => {
            let start = *pos;
            while *bytes.get(*pos).ok_or_else(err)? != b';' {
                *pos += 1;
            }
            let name = &whole[start..*pos];
            *pos += 1;
            if name.is_empty() {
                return Err(err());
            }
            Ok(FieldType::Object(name.replace('/', ".")))
        }
        b'[' => {
            // the JVM caps arrays at 255 dimensions
            let mut dims = 1;
            while bytes.get(*pos) == Some(&b'[') {
                dims += 1;
                *pos += 1;
            }
            if dims > 255 {
                return Err(err());
            }
            let mut ty = parse_one(bytes, pos, whole)?;
            for _ in 0..dims {
                ty = FieldType::Array(Box::new(ty));
            }
            Ok(ty)
        }
        _ => Err(err()),
    }
}

pub fn parse_field_descriptor(desc: &str) -> Result<FieldType, DescriptorError> {
    let mut pos = 0;
    let ty = parse_one(desc.as_bytes(), &mut pos, desc)?;
    if pos != desc.len() {
        return Err(DescriptorError(desc.to_string()));
    }
    Ok(ty)
}

pub fn parse_method_descriptor(desc: &str) -> Result<MethodDescriptor, DescriptorError> {
    let bytes = desc.as_bytes();
    let err = || DescriptorError(desc.to_string());
    if bytes.first() != Some(&b'(') {
        return Err(err());
    }
    let mut pos = 1;
    let mut params = Vec::new();
    while *bytes.get(pos).ok_or_else(err)? != b')' {
        params.push(parse_one(bytes, &mut pos, desc)?);
    }
    pos += 1;
    let ret = if bytes.get(pos) == Some(&b'V') {
        pos += 1;
        None
    } else {
        Some(parse_one(bytes, &mut pos, desc)?)
    };
    if pos != desc.len() {
        return Err(err());
    }
    Ok(MethodDescriptor { params, ret })
}

/// Class names mentioned anywhere in a field or method descriptor.
pub fn referenced_classes(desc: &str) -> Vec<String> {
    if desc.starts_with('(') {
        match parse_method_descriptor(desc) {
            Ok(md) => {
                md.params.iter().chain(md.ret.iter()).filter_map(|t| t.class_name().map(str::to_string)).collect()
            }
            Err(_) => Vec::new(),
        }
    } else {
        parse_field_descriptor(desc).ok().and_then(|t| t.class_name().map(str::to_string)).into_iter().collect()
    }
}

/// Element class of a `CONSTANT_Class` name, which may be an array descriptor
/// such as `[Ljava.lang.String;`.
pub fn class_of_constant(name: &str) -> Option<String> {
    if name.starts_with('[') {
        parse_field_descriptor(&name.replace('.', "/")).ok().and_then(|t| t.class_name().map(str::to_string))
    } else {
        Some(name.to_string())
    }
}
