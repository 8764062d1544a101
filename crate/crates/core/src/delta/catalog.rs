use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Binary-incompatible change kinds, following JLS chapter 13.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BcKind {
    ClassRemoved,
    ClassNowFinal,
    ClassNowAbstract,
    ClassLessAccessible,
    ClassTypeChanged,
    SuperclassRemoved,
    SuperclassAdded,
    InterfaceAdded,
    InterfaceRemoved,
    MethodRemoved,
    MethodNowAbstract,
    MethodNowFinal,
    MethodNowStatic,
    MethodNoLongerStatic,
    MethodLessAccessible,
    MethodReturnTypeChanged,
    MethodAddedToInterface,
    MethodNewDefault,
    MethodAbstractNowDefault,
    MethodNowThrowsCheckedException,
    MethodAbstractAddedToClass,
    MethodAddedToPublicClass,
    ConstructorRemoved,
    ConstructorLessAccessible,
    FieldRemoved,
    FieldNowFinal,
    FieldLessAccessible,
    FieldTypeChanged,
    FieldNowStatic,
    FieldNoLongerStatic,
    FieldConstantValueChanged,
}

pub struct KindInfo {
    pub name: &'static str,
    pub jls: &'static str,
    pub description: &'static str,
    /// The change element is a declaration that exists only in the new
    /// version, or a type whose inherited contract grew.
    pub additive: bool,
}

const fn info(name: &'static str, jls: &'static str, description: &'static str, additive: bool) -> KindInfo {
    KindInfo { name, jls, description, additive }
}

impl BcKind {
    pub const ALL: [BcKind; 31] = [
        BcKind::ClassRemoved,
        BcKind::ClassNowFinal,
        BcKind::ClassNowAbstract,
        BcKind::ClassLessAccessible,
        BcKind::ClassTypeChanged,
        BcKind::SuperclassRemoved,
        BcKind::SuperclassAdded,
        BcKind::InterfaceAdded,
        BcKind::InterfaceRemoved,
        BcKind::MethodRemoved,
        BcKind::MethodNowAbstract,
        BcKind::MethodNowFinal,
        BcKind::MethodNowStatic,
        BcKind::MethodNoLongerStatic,
        BcKind::MethodLessAccessible,
        BcKind::MethodReturnTypeChanged,
        BcKind::MethodAddedToInterface,
        BcKind::MethodNewDefault,
        BcKind::MethodAbstractNowDefault,
        BcKind::MethodNowThrowsCheckedException,
        BcKind::MethodAbstractAddedToClass,
        BcKind::MethodAddedToPublicClass,
        BcKind::ConstructorRemoved,
        BcKind::ConstructorLessAccessible,
        BcKind::FieldRemoved,
        BcKind::FieldNowFinal,
        BcKind::FieldLessAccessible,
        BcKind::FieldTypeChanged,
        BcKind::FieldNowStatic,
        BcKind::FieldNoLongerStatic,
        BcKind::FieldConstantValueChanged,
    ];

    pub fn info(self) -> KindInfo {
        use BcKind::*;
        match self {
            ClassRemoved => info("classRemoved", "13.4.1", "A type was deleted.", false),
            ClassNowFinal => info("classNowFinal", "13.4.2.3", "A non-final class became final.", false),
            ClassNowAbstract => info("classNowAbstract", "13.4.1", "A concrete class became abstract.", false),
            ClassLessAccessible => info("classLessAccessible", "13.4.3", "A type's access was narrowed.", false),
            ClassTypeChanged => info(
                "classTypeChanged",
                "13.4.1, 13.5.1",
                "A type changed between class, interface, enum and annotation.",
                false,
            ),
            SuperclassRemoved => info(
                "superclassRemoved",
                "13.4.4",
                "A class no longer inherits from one of its former superclasses.",
                false,
            ),
            SuperclassAdded => info(
                "superclassAdded",
                "13.4.4, 13.4.16",
                "An abstract class gained a superclass with unimplemented abstract methods.",
                true,
            ),
            InterfaceAdded => info(
                "interfaceAdded",
                "13.4.4, 13.5.3",
                "An interface or abstract class gained a superinterface with unimplemented abstract methods.",
                true,
            ),
            InterfaceRemoved => info(
                "interfaceRemoved",
                "13.4.4, 13.5.3",
                "A type no longer implements or extends one of its former superinterfaces.",
                false,
            ),
            MethodRemoved => info("methodRemoved", "13.4.12", "A method was deleted.", false),
            MethodNowAbstract => {
                info("methodNowAbstract", "13.4.16, 13.5.6", "A concrete or default method became abstract.", false)
            }
            MethodNowFinal => info("methodNowFinal", "13.4.17", "A non-final method became final.", false),
            MethodNowStatic => info("methodNowStatic", "13.4.19", "An instance method became static.", false),
            MethodNoLongerStatic => {
                info("methodNoLongerStatic", "13.4.19", "A static method became an instance method.", false)
            }
            MethodLessAccessible => info("methodLessAccessible", "13.4.7", "A method's access was narrowed.", false),
            MethodReturnTypeChanged => info(
                "methodReturnTypeChanged",
                "13.4.15",
                "A method's return type changed; the old descriptor is gone.",
                false,
            ),
            MethodAddedToInterface => {
                info("methodAddedToInterface", "13.5.3", "An abstract method was added to an interface.", true)
            }
            MethodNewDefault => info("methodNewDefault", "13.5.6", "A default method was added to an interface.", true),
            MethodAbstractNowDefault => {
                info("methodAbstractNowDefault", "13.5.6", "An abstract interface method gained a default body.", false)
            }
            MethodNowThrowsCheckedException => info(
                "methodNowThrowsCheckedException",
                "13.4.21, 11.2",
                "A method or constructor declares a new checked exception.",
                false,
            ),
            MethodAbstractAddedToClass => {
                info("methodAbstractAddedToClass", "13.4.16", "An abstract method was added to a class.", true)
            }
            MethodAddedToPublicClass => info(
                "methodAddedToPublicClass",
                "13.4.16, 13.4.4",
                "An abstract method added to a non-exported superclass is inherited by an exported class.",
                true,
            ),
            ConstructorRemoved => info("constructorRemoved", "13.4.12", "A constructor was deleted.", false),
            ConstructorLessAccessible => {
                info("constructorLessAccessible", "13.4.7", "A constructor's access was narrowed.", false)
            }
            FieldRemoved => info("fieldRemoved", "13.4.8", "A field was deleted.", false),
            FieldNowFinal => info("fieldNowFinal", "13.4.9", "A non-final field became final.", false),
            FieldLessAccessible => info("fieldLessAccessible", "13.4.7", "A field's access was narrowed.", false),
            FieldTypeChanged => info("fieldTypeChanged", "13.4.8", "A field's type changed.", false),
            FieldNowStatic => info("fieldNowStatic", "13.4.10", "An instance field became static.", false),
            FieldNoLongerStatic => {
                info("fieldNoLongerStatic", "13.4.10", "A static field became an instance field.", false)
            }
            FieldConstantValueChanged => info(
                "fieldConstantValueChanged",
                "13.4.9",
                "The value of a compile-time constant changed; clients keep the inlined old value.",
                false,
            ),
        }
    }

    pub fn name(self) -> &'static str {
        self.info().name
    }

    pub fn jls_clause(self) -> &'static str {
        self.info().jls
    }

    pub fn is_additive(self) -> bool {
        self.info().additive
    }
}

impl fmt::Display for BcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BcKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BcKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown change kind `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_serde() {
        let mut seen = std::collections::BTreeSet::new();
        for k in BcKind::ALL {
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
            assert_eq!(k.name().parse::<BcKind>(), Ok(k));
            assert!(!k.jls_clause().is_empty());
            assert!(seen.insert(k));
        }
        assert_eq!(seen.len(), 31);
    }
}
