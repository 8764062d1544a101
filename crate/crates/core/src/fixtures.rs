//! Hand-built library versions, clients and corpora used by tests, the
//! benchmark suite, the CLI examples and the criterion benches.
//!
//! Every expected delta and every linker-error oracle below is written by
//! hand from the binary-compatibility rules of the Java language, never
//! computed by this crate.

use std::path::{Path, PathBuf};

use chrono::{NaiveDate, TimeZone, Utc};

use crate::apimodel::ElementRef;
use crate::benchmark::{BenchCase, Gap, OracleRecord};
use crate::classfile::{
    jar_bytes, read_jar, write_jar, AccessFlags, ClassSpec, ConstantValue, FieldOp, FieldSpec, InvokeKind, JarContent,
    MethodSpec,
};
use crate::corpus::{write_graph, ArtifactRecord, Coordinates, DepScope, EdgeKind, GraphEdge};
use crate::delta::BcKind;

/// Classes of one JAR.
#[derive(Debug, Clone, Default)]
pub struct JarFixture {
    pub classes: Vec<ClassSpec>,
}

impl JarFixture {
    pub fn new(classes: Vec<ClassSpec>) -> Self {
        JarFixture { classes }
    }

    pub fn entries(&self) -> Vec<(String, Vec<u8>)> {
        self.classes
            .iter()
            .map(|c| {
                let raw = c.clone().build();
                (format!("{}.class", raw.this_name.replace('.', "/")), c.bytes().expect("fixture class encodes"))
            })
            .collect()
    }

    pub fn bytes(&self) -> Vec<u8> {
        jar_bytes(&self.entries()).expect("in-memory zip")
    }

    pub fn content(&self, id: &str) -> JarContent {
        read_jar(&self.bytes(), id).expect("fixture jar parses")
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        write_jar(path, &self.entries())
    }
}

fn el(s: &str) -> ElementRef {
    s.parse().expect("fixture element")
}

const V: &str = "()V";

fn class_with_ctor(name: &str) -> ClassSpec {
    ClassSpec::class(name).method(MethodSpec::constructor(V))
}

fn other() -> ClassSpec {
    class_with_ctor("lib.Other").method(MethodSpec::new("help", V))
}

// ---------------------------------------------------------------------------
// Servlet example: an interface gains an abstract method that an external
// implementation does not provide.

pub const SERVLET_REQUEST: &str = "javax.servlet.ServletRequest";
pub const HTTP_SERVLET_REQUEST: &str = "javax.servlet.http.HttpServletRequest";
pub const MOCK_REQUEST: &str = "org.springframework.mock.web.MockHttpServletRequest";
const STRING_GETTER: &str = "()Ljava/lang/String;";

fn servlet(with_session_id: bool, with_auth_type: bool) -> JarFixture {
    let mut http = ClassSpec::interface(HTTP_SERVLET_REQUEST).implements(SERVLET_REQUEST);
    if with_auth_type {
        http = http.method(MethodSpec::new("getAuthType", STRING_GETTER).abstract_());
    }
    http = http.method(MethodSpec::new("getMethod", STRING_GETTER).abstract_());
    if with_session_id {
        http = http.method(MethodSpec::new("changeSessionId", STRING_GETTER).abstract_());
    }
    let request = ClassSpec::interface(SERVLET_REQUEST)
        .method(MethodSpec::new("getCharacterEncoding", STRING_GETTER).abstract_());
    JarFixture::new(vec![request, http])
}

/// `HttpServletRequest` as of 3.0.1.
pub fn servlet_3_0_1() -> JarFixture {
    servlet(false, true)
}

/// `HttpServletRequest` as of 3.1.0, with `changeSessionId()`.
pub fn servlet_3_1_0() -> JarFixture {
    servlet(true, true)
}

/// A 4.0.0 without `getAuthType()`.
pub fn servlet_4_0_0() -> JarFixture {
    servlet(true, false)
}

/// 4.0.1 adds a helper class only.
pub fn servlet_4_0_1() -> JarFixture {
    let mut jar = servlet_4_0_0();
    jar.classes.push(class_with_ctor("javax.servlet.http.Cookie").method(MethodSpec::new("getName", STRING_GETTER)));
    jar
}

/// The mock request of the Spring test framework, implementing the 3.0.1
/// interface.
pub fn mock_request_client() -> JarFixture {
    let mock = class_with_ctor(MOCK_REQUEST)
        .implements(HTTP_SERVLET_REQUEST)
        .field(FieldSpec::new("authType", "Ljava/lang/String;").flags(AccessFlags::PRIVATE))
        .field(FieldSpec::new("method", "Ljava/lang/String;").flags(AccessFlags::PRIVATE))
        .method(MethodSpec::new("getAuthType", STRING_GETTER).field_op(
            FieldOp::GetField,
            MOCK_REQUEST,
            "authType",
            "Ljava/lang/String;",
        ))
        .method(MethodSpec::new("getMethod", STRING_GETTER).field_op(
            FieldOp::GetField,
            MOCK_REQUEST,
            "method",
            "Ljava/lang/String;",
        ))
        .method(MethodSpec::new("getCharacterEncoding", STRING_GETTER));
    JarFixture::new(vec![mock])
}

/// A web application calling `getAuthType()` through the interface.
pub fn auth_type_client() -> JarFixture {
    let filter = class_with_ctor("com.acme.web.AuthFilter").method(
        MethodSpec::new("check", &format!("(L{};)V", HTTP_SERVLET_REQUEST.replace('.', "/"))).invoke(
            InvokeKind::Interface,
            HTTP_SERVLET_REQUEST,
            "getAuthType",
            STRING_GETTER,
        ),
    );
    JarFixture::new(vec![filter])
}

/// A client that only references an unrelated JDK type.
pub fn unrelated_client() -> JarFixture {
    JarFixture::new(vec![class_with_ctor("net.demo.Tool").method(MethodSpec::new("run", V).invoke(
        InvokeKind::Virtual,
        "java.lang.Object",
        "hashCode",
        "()I",
    ))])
}

// ---------------------------------------------------------------------------
// One library pair per catalog kind.

#[derive(Debug, Clone)]
pub struct CatalogCase {
    pub kind: BcKind,
    pub old: JarFixture,
    pub new: JarFixture,
    /// The complete expected delta.
    pub expected: Vec<(BcKind, ElementRef)>,
}

fn case(kind: BcKind, old: Vec<ClassSpec>, new: Vec<ClassSpec>, expected: &[(BcKind, &str)]) -> CatalogCase {
    let mut old = old;
    let mut new = new;
    old.push(other());
    new.push(other());
    CatalogCase {
        kind,
        old: JarFixture::new(old),
        new: JarFixture::new(new),
        expected: expected.iter().map(|(k, e)| (*k, el(e))).collect(),
    }
}

fn abstract_with_ctor(name: &str) -> ClassSpec {
    class_with_ctor(name).abstract_()
}

pub fn catalog_case(kind: BcKind) -> CatalogCase {
    use BcKind::*;
    let a = || class_with_ctor("lib.A");
    let m = || MethodSpec::new("m", V);
    let f = || FieldSpec::new("f", "I");
    let iface = || ClassSpec::interface("lib.I");
    match kind {
        ClassRemoved => case(kind, vec![a().method(m())], vec![], &[(kind, "lib.A")]),
        ClassNowFinal => case(kind, vec![a()], vec![a().final_()], &[(kind, "lib.A")]),
        ClassNowAbstract => case(kind, vec![a()], vec![a().abstract_()], &[(kind, "lib.A")]),
        ClassLessAccessible => case(kind, vec![a()], vec![a().package_private()], &[(kind, "lib.A")]),
        ClassTypeChanged => case(
            kind,
            vec![a().method(MethodSpec::new("s", V).static_())],
            vec![ClassSpec::interface("lib.A").method(MethodSpec::new("s", V).static_())],
            &[(kind, "lib.A")],
        ),
        SuperclassRemoved => {
            let s = class_with_ctor("lib.S").method(MethodSpec::new("foo", V));
            case(
                kind,
                vec![s.clone(), class_with_ctor("lib.B").extends("lib.S")],
                vec![s, class_with_ctor("lib.B")],
                &[(kind, "lib.B")],
            )
        }
        SuperclassAdded => {
            let s = abstract_with_ctor("lib.S").method(m().abstract_());
            case(
                kind,
                vec![s.clone(), abstract_with_ctor("lib.B")],
                vec![s, abstract_with_ctor("lib.B").extends("lib.S")],
                &[(kind, "lib.B")],
            )
        }
        InterfaceAdded => {
            let i = iface().method(m().abstract_());
            case(
                kind,
                vec![i.clone(), abstract_with_ctor("lib.B")],
                vec![i, abstract_with_ctor("lib.B").implements("lib.I")],
                &[(kind, "lib.B")],
            )
        }
        InterfaceRemoved => {
            let i = iface().method(MethodSpec::new("d", V));
            case(
                kind,
                vec![i.clone(), class_with_ctor("lib.B").implements("lib.I")],
                vec![i, class_with_ctor("lib.B")],
                &[(kind, "lib.B")],
            )
        }
        MethodRemoved => case(kind, vec![a().method(m())], vec![a()], &[(kind, "lib.A#m()V")]),
        MethodNowAbstract => case(
            kind,
            vec![abstract_with_ctor("lib.A").method(m())],
            vec![abstract_with_ctor("lib.A").method(m().abstract_())],
            &[(kind, "lib.A#m()V")],
        ),
        MethodNowFinal => case(kind, vec![a().method(m())], vec![a().method(m().final_())], &[(kind, "lib.A#m()V")]),
        MethodNowStatic => case(kind, vec![a().method(m())], vec![a().method(m().static_())], &[(kind, "lib.A#m()V")]),
        MethodNoLongerStatic => {
            case(kind, vec![a().method(m().static_())], vec![a().method(m())], &[(kind, "lib.A#m()V")])
        }
        MethodLessAccessible => case(
            kind,
            vec![a().method(m())],
            vec![a().method(m().flags(AccessFlags::empty()))],
            &[(kind, "lib.A#m()V")],
        ),
        MethodReturnTypeChanged => case(
            kind,
            vec![a().method(MethodSpec::new("m", "()I"))],
            vec![a().method(MethodSpec::new("m", "()J"))],
            &[(kind, "lib.A#m()I")],
        ),
        MethodAddedToInterface => case(
            kind,
            vec![iface().method(MethodSpec::new("a", V).abstract_())],
            vec![iface().method(MethodSpec::new("a", V).abstract_()).method(MethodSpec::new("n", V).abstract_())],
            &[(kind, "lib.I#n()V")],
        ),
        MethodNewDefault => case(
            kind,
            vec![iface().method(MethodSpec::new("a", V).abstract_())],
            vec![iface().method(MethodSpec::new("a", V).abstract_()).method(MethodSpec::new("n", V))],
            &[(kind, "lib.I#n()V")],
        ),
        MethodAbstractNowDefault => {
            case(kind, vec![iface().method(m().abstract_())], vec![iface().method(m())], &[(kind, "lib.I#m()V")])
        }
        MethodNowThrowsCheckedException => case(
            kind,
            vec![a().method(m())],
            vec![a().method(m().throws("java.io.IOException"))],
            &[(kind, "lib.A#m()V")],
        ),
        MethodAbstractAddedToClass => case(
            kind,
            vec![abstract_with_ctor("lib.A")],
            vec![abstract_with_ctor("lib.A").method(MethodSpec::new("n", V).abstract_())],
            &[(kind, "lib.A#n()V")],
        ),
        MethodAddedToPublicClass => {
            let hidden = || {
                ClassSpec::class("lib.S")
                    .package_private()
                    .abstract_()
                    .method(MethodSpec::constructor(V).flags(AccessFlags::empty()))
            };
            let public = || abstract_with_ctor("lib.A").extends("lib.S");
            case(
                kind,
                vec![hidden(), public()],
                vec![hidden().method(MethodSpec::new("n", V).abstract_()), public()],
                &[(kind, "lib.S#n()V")],
            )
        }
        ConstructorRemoved => {
            case(kind, vec![a().method(MethodSpec::constructor("(I)V"))], vec![a()], &[(kind, "lib.A#<init>(I)V")])
        }
        ConstructorLessAccessible => case(
            kind,
            vec![a()],
            vec![ClassSpec::class("lib.A").method(MethodSpec::constructor(V).flags(AccessFlags::PROTECTED))],
            &[(kind, "lib.A#<init>()V")],
        ),
        FieldRemoved => case(kind, vec![a().field(f())], vec![a()], &[(kind, "lib.A#f")]),
        FieldNowFinal => case(kind, vec![a().field(f())], vec![a().field(f().final_())], &[(kind, "lib.A#f")]),
        FieldLessAccessible => {
            case(kind, vec![a().field(f())], vec![a().field(f().flags(AccessFlags::empty()))], &[(kind, "lib.A#f")])
        }
        FieldTypeChanged => {
            case(kind, vec![a().field(f())], vec![a().field(FieldSpec::new("f", "J"))], &[(kind, "lib.A#f")])
        }
        FieldNowStatic => case(kind, vec![a().field(f())], vec![a().field(f().static_())], &[(kind, "lib.A#f")]),
        FieldNoLongerStatic => case(kind, vec![a().field(f().static_())], vec![a().field(f())], &[(kind, "lib.A#f")]),
        FieldConstantValueChanged => {
            let k = |v: i32| FieldSpec::new("K", "I").static_().final_().constant(ConstantValue::Int(v));
            case(kind, vec![a().field(k(1))], vec![a().field(k(2))], &[(kind, "lib.A#K")])
        }
    }
}

pub fn catalog_cases() -> Vec<CatalogCase> {
    BcKind::ALL.into_iter().map(catalog_case).collect()
}

// ---------------------------------------------------------------------------
// Benchmark suite: one client per case, each exercising a single v1
// declaration, with the linker error a JVM raises (if any).

pub const CLIENT: &str = "app.Client";
pub const ENTRY: &str = "app.Client#run()V";

#[derive(Debug, Clone)]
pub struct BenchFixture {
    pub id: String,
    pub expected_kind: Option<BcKind>,
    pub old: JarFixture,
    pub new: JarFixture,
    pub client: JarFixture,
    pub oracle: Option<OracleRecord>,
    pub gap: Option<Gap>,
}

/// Client whose entry point `run()` holds the given body.
fn entry_client(run: MethodSpec) -> JarFixture {
    JarFixture::new(vec![class_with_ctor(CLIENT).method(run)])
}

fn run() -> MethodSpec {
    MethodSpec::new("run", V)
}

/// Client subclassing `sup`, with an empty entry point.
fn subclass_client(sup: &str, extra: Vec<MethodSpec>) -> JarFixture {
    let mut c = ClassSpec::class(CLIENT)
        .extends(sup)
        .method(MethodSpec::constructor(V).invoke(InvokeKind::Special, sup, "<init>", V))
        .method(run());
    for m in extra {
        c = c.method(m);
    }
    JarFixture::new(vec![c])
}

fn implementing_client(iface: &str, methods: &[&str]) -> JarFixture {
    let mut c = class_with_ctor(CLIENT).implements(iface).method(run());
    for m in methods {
        c = c.method(MethodSpec::new(m, V));
    }
    JarFixture::new(vec![c])
}

fn oracle(error: &str, client: &str, library: &str) -> Option<OracleRecord> {
    Some(OracleRecord {
        error_class: format!("java.lang.{error}"),
        client_element: el(client),
        library_element: el(library),
    })
}

fn bench(
    id: &str,
    kind: Option<BcKind>,
    pair: CatalogCase,
    client: JarFixture,
    oracle: Option<OracleRecord>,
) -> BenchFixture {
    BenchFixture { id: id.to_string(), expected_kind: kind, old: pair.old, new: pair.new, client, oracle, gap: None }
}

pub fn bench_fixtures() -> Vec<BenchFixture> {
    use BcKind::*;
    let c = catalog_case;
    let invoke = |kind, name: &str, desc: &str| run().invoke(kind, "lib.A", name, desc);
    let field = |op| run().field_op(op, "lib.A", "f", "I");
    let mut out = vec![
        bench(
            "class-removed",
            Some(ClassRemoved),
            c(ClassRemoved),
            entry_client(run().instantiate("lib.A", V)),
            oracle("NoClassDefFoundError", ENTRY, "lib.A"),
        ),
        bench(
            "class-now-final",
            Some(ClassNowFinal),
            c(ClassNowFinal),
            subclass_client("lib.A", vec![]),
            oracle("VerifyError", CLIENT, "lib.A"),
        ),
        bench(
            "class-now-abstract",
            Some(ClassNowAbstract),
            c(ClassNowAbstract),
            entry_client(run().instantiate("lib.A", V)),
            oracle("InstantiationError", ENTRY, "lib.A"),
        ),
        bench(
            "class-now-abstract-super-call",
            Some(ClassNowAbstract),
            c(ClassNowAbstract),
            subclass_client("lib.A", vec![]),
            None,
        ),
        bench(
            "class-less-accessible",
            Some(ClassLessAccessible),
            c(ClassLessAccessible),
            entry_client(run().instantiate("lib.A", V)),
            oracle("IllegalAccessError", ENTRY, "lib.A"),
        ),
        bench(
            "class-type-changed",
            Some(ClassTypeChanged),
            c(ClassTypeChanged),
            entry_client(invoke(InvokeKind::Static, "s", V)),
            oracle("IncompatibleClassChangeError", ENTRY, "lib.A"),
        ),
        bench(
            "superclass-removed",
            Some(SuperclassRemoved),
            c(SuperclassRemoved),
            entry_client(run().invoke(InvokeKind::Virtual, "lib.B", "foo", V)),
            oracle("NoSuchMethodError", ENTRY, "lib.B"),
        ),
        bench(
            "superclass-removed-subclass",
            Some(SuperclassRemoved),
            c(SuperclassRemoved),
            subclass_client("lib.B", vec![]),
            None,
        ),
        bench(
            "superclass-added",
            Some(SuperclassAdded),
            c(SuperclassAdded),
            subclass_client("lib.B", vec![]),
            oracle("AbstractMethodError", CLIENT, "lib.B"),
        ),
        bench(
            "interface-added",
            Some(InterfaceAdded),
            c(InterfaceAdded),
            subclass_client("lib.B", vec![]),
            oracle("AbstractMethodError", CLIENT, "lib.B"),
        ),
        bench(
            "interface-removed",
            Some(InterfaceRemoved),
            c(InterfaceRemoved),
            entry_client(run().invoke(InvokeKind::Virtual, "lib.B", "d", V)),
            oracle("NoSuchMethodError", ENTRY, "lib.B"),
        ),
        bench(
            "method-removed",
            Some(MethodRemoved),
            c(MethodRemoved),
            entry_client(invoke(InvokeKind::Virtual, "m", V)),
            oracle("NoSuchMethodError", ENTRY, "lib.A#m()V"),
        ),
        bench(
            "method-now-abstract",
            Some(MethodNowAbstract),
            c(MethodNowAbstract),
            entry_client(invoke(InvokeKind::Virtual, "m", V)),
            oracle("AbstractMethodError", ENTRY, "lib.A#m()V"),
        ),
        bench(
            "method-now-final",
            Some(MethodNowFinal),
            c(MethodNowFinal),
            subclass_client("lib.A", vec![MethodSpec::new("m", V)]),
            oracle("VerifyError", CLIENT, "lib.A#m()V"),
        ),
        bench(
            "method-now-final-no-override",
            Some(MethodNowFinal),
            c(MethodNowFinal),
            subclass_client("lib.A", vec![]),
            None,
        ),
        bench(
            "method-now-static",
            Some(MethodNowStatic),
            c(MethodNowStatic),
            entry_client(invoke(InvokeKind::Virtual, "m", V)),
            oracle("IncompatibleClassChangeError", ENTRY, "lib.A#m()V"),
        ),
        bench(
            "method-no-longer-static",
            Some(MethodNoLongerStatic),
            c(MethodNoLongerStatic),
            entry_client(invoke(InvokeKind::Static, "m", V)),
            oracle("IncompatibleClassChangeError", ENTRY, "lib.A#m()V"),
        ),
        bench(
            "method-less-accessible",
            Some(MethodLessAccessible),
            c(MethodLessAccessible),
            entry_client(invoke(InvokeKind::Virtual, "m", V)),
            oracle("IllegalAccessError", ENTRY, "lib.A#m()V"),
        ),
        bench(
            "method-return-type-changed",
            Some(MethodReturnTypeChanged),
            c(MethodReturnTypeChanged),
            entry_client(invoke(InvokeKind::Virtual, "m", "()I")),
            oracle("NoSuchMethodError", ENTRY, "lib.A#m()I"),
        ),
        bench(
            "method-added-to-interface",
            Some(MethodAddedToInterface),
            c(MethodAddedToInterface),
            implementing_client("lib.I", &["a"]),
            oracle("AbstractMethodError", CLIENT, "lib.I#n()V"),
        ),
        bench(
            "method-new-default",
            Some(MethodNewDefault),
            c(MethodNewDefault),
            implementing_client("lib.I", &["a"]),
            None,
        ),
        bench(
            "method-abstract-now-default",
            Some(MethodAbstractNowDefault),
            c(MethodAbstractNowDefault),
            implementing_client("lib.I", &["m"]),
            None,
        ),
        bench(
            "method-now-throws-checked",
            Some(MethodNowThrowsCheckedException),
            c(MethodNowThrowsCheckedException),
            entry_client(invoke(InvokeKind::Virtual, "m", V)),
            None,
        ),
        bench(
            "method-abstract-added-to-class",
            Some(MethodAbstractAddedToClass),
            c(MethodAbstractAddedToClass),
            subclass_client("lib.A", vec![]),
            oracle("AbstractMethodError", CLIENT, "lib.A#n()V"),
        ),
        bench(
            "method-added-to-public-class",
            Some(MethodAddedToPublicClass),
            c(MethodAddedToPublicClass),
            subclass_client("lib.A", vec![]),
            oracle("AbstractMethodError", CLIENT, "lib.S#n()V"),
        ),
        bench(
            "constructor-removed",
            Some(ConstructorRemoved),
            c(ConstructorRemoved),
            entry_client(run().instantiate("lib.A", "(I)V")),
            oracle("NoSuchMethodError", ENTRY, "lib.A#<init>(I)V"),
        ),
        bench(
            "constructor-less-accessible",
            Some(ConstructorLessAccessible),
            c(ConstructorLessAccessible),
            entry_client(run().instantiate("lib.A", V)),
            oracle("IllegalAccessError", ENTRY, "lib.A#<init>()V"),
        ),
        bench(
            "constructor-less-accessible-super-call",
            Some(ConstructorLessAccessible),
            c(ConstructorLessAccessible),
            subclass_client("lib.A", vec![]),
            None,
        ),
        bench(
            "field-removed",
            Some(FieldRemoved),
            c(FieldRemoved),
            entry_client(field(FieldOp::GetField)),
            oracle("NoSuchFieldError", ENTRY, "lib.A#f"),
        ),
        bench(
            "field-now-final",
            Some(FieldNowFinal),
            c(FieldNowFinal),
            entry_client(field(FieldOp::PutField)),
            oracle("IllegalAccessError", ENTRY, "lib.A#f"),
        ),
        bench(
            "field-now-final-read",
            Some(FieldNowFinal),
            c(FieldNowFinal),
            entry_client(field(FieldOp::GetField)),
            None,
        ),
        bench(
            "field-less-accessible",
            Some(FieldLessAccessible),
            c(FieldLessAccessible),
            entry_client(field(FieldOp::GetField)),
            oracle("IllegalAccessError", ENTRY, "lib.A#f"),
        ),
        bench(
            "field-type-changed",
            Some(FieldTypeChanged),
            c(FieldTypeChanged),
            entry_client(field(FieldOp::GetField)),
            oracle("NoSuchFieldError", ENTRY, "lib.A#f"),
        ),
        bench(
            "field-now-static",
            Some(FieldNowStatic),
            c(FieldNowStatic),
            entry_client(field(FieldOp::GetField)),
            oracle("IncompatibleClassChangeError", ENTRY, "lib.A#f"),
        ),
        bench(
            "field-no-longer-static",
            Some(FieldNoLongerStatic),
            c(FieldNoLongerStatic),
            entry_client(run().field_op(FieldOp::GetStatic, "lib.A", "f", "I")),
            oracle("IncompatibleClassChangeError", ENTRY, "lib.A#f"),
        ),
        // the constant is inlined into the client, so nothing links against it
        bench(
            "field-constant-value-changed",
            Some(FieldConstantValueChanged),
            c(FieldConstantValueChanged),
            entry_client(run()),
            None,
        ),
    ];

    let native_pair = CatalogCase {
        kind: MethodRemoved,
        old: JarFixture::new(vec![class_with_ctor("lib.A").method(MethodSpec::new("m", V)), other()]),
        new: JarFixture::new(vec![
            class_with_ctor("lib.A").method(MethodSpec::new("m", V).with_flag(AccessFlags::NATIVE)),
            other(),
        ]),
        expected: Vec::new(),
    };
    let mut native = bench(
        "method-now-native",
        None,
        native_pair,
        entry_client(run().invoke(InvokeKind::Virtual, "lib.A", "m", V)),
        oracle("UnsatisfiedLinkError", ENTRY, "lib.A#m()V"),
    );
    native.gap = Some(Gap::Native);
    out.push(native);

    let strict_pair = CatalogCase {
        kind: MethodRemoved,
        old: JarFixture::new(vec![class_with_ctor("lib.A").method(MethodSpec::new("m", "()D")), other()]),
        new: JarFixture::new(vec![
            class_with_ctor("lib.A").method(MethodSpec::new("m", "()D").with_flag(AccessFlags::STRICT)),
            other(),
        ]),
        expected: Vec::new(),
    };
    let mut strict = bench(
        "method-now-strictfp",
        None,
        strict_pair,
        entry_client(run().invoke(InvokeKind::Virtual, "lib.A", "m", "()D")),
        oracle("VerifyError", ENTRY, "lib.A#m()D"),
    );
    strict.gap = Some(Gap::Strictfp);
    out.push(strict);
    out
}

/// Writes every bench fixture's JARs and a `manifest.json` into `dir`.
pub fn write_bench_suite(dir: &Path) -> std::io::Result<PathBuf> {
    let mut cases = Vec::new();
    for f in bench_fixtures() {
        let base = dir.join(&f.id);
        f.old.write(&base.join("v1.jar"))?;
        f.new.write(&base.join("v2.jar"))?;
        f.client.write(&base.join("client.jar"))?;
        cases.push(BenchCase {
            id: f.id.clone(),
            v1: PathBuf::from(&f.id).join("v1.jar"),
            v2: PathBuf::from(&f.id).join("v2.jar"),
            client: PathBuf::from(&f.id).join("client.jar"),
            entry: el(ENTRY),
            oracle: f.oracle,
            expected_kind: f.expected_kind,
            gap: f.gap,
        });
    }
    let manifest = dir.join("manifest.json");
    std::fs::write(&manifest, serde_json::to_string_pretty(&cases).expect("manifest serializes") + "\n")?;
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// Dependency-graph corpus around the seven servlet versions, plus small
// libraries that trip each selection filter.

pub const SERVLET_GROUP: &str = "javax.servlet";
pub const SERVLET_ARTIFACT: &str = "javax.servlet-api";
pub const SERVLET_VERSIONS: [&str; 7] = ["3.0.1", "3.1-b01", "3.1.0", "4.0.0-b01", "4.0.0-b02", "4.0.0", "4.0.1"];

fn date(y: i32, m: u32, d: u32) -> chrono::DateTime<Utc> {
    Utc.from_utc_datetime(
        &NaiveDate::from_ymd_opt(y, m, d).expect("valid date").and_hms_opt(0, 0, 0).expect("midnight"),
    )
}

struct CorpusBuilder {
    artifacts: Vec<ArtifactRecord>,
    edges: Vec<GraphEdge>,
    jars: Vec<(PathBuf, JarFixture)>,
}

impl CorpusBuilder {
    fn artifact(&mut self, coords: &str, when: (i32, u32, u32), packaging: &str, jar: Option<JarFixture>) {
        let coords: Coordinates = coords.parse().expect("fixture coordinates");
        let jar_path = jar.map(|j| {
            let p = PathBuf::from(format!("{}/{}/{}.jar", coords.group, coords.artifact, coords.version));
            self.jars.push((p.clone(), j));
            p
        });
        self.artifacts.push(ArtifactRecord {
            coords,
            release_date: date(when.0, when.1, when.2),
            packaging: packaging.to_string(),
            jar_path,
        });
    }

    fn edge(&mut self, kind: EdgeKind, from: &str, to: &str) {
        self.edges.push(GraphEdge { kind, from: from.parse().expect("from"), to: to.parse().expect("to") });
    }

    fn chain(&mut self, lib: &str, versions: &[&str]) {
        for w in versions.windows(2) {
            self.edge(EdgeKind::Next, &format!("{lib}:{}", w[0]), &format!("{lib}:{}", w[1]));
        }
    }

    /// Two-version library with one external client of `v1`.
    fn small_library(
        &mut self,
        lib: &str,
        versions: [(&str, (i32, u32, u32)); 2],
        packaging: &str,
        jars: [Option<JarFixture>; 2],
    ) {
        let [j1, j2] = jars;
        self.artifact(&format!("{lib}:{}", versions[0].0), versions[0].1, packaging, j1);
        self.artifact(&format!("{lib}:{}", versions[1].0), versions[1].1, packaging, j2);
        self.chain(lib, &[versions[0].0, versions[1].0]);
        let client = format!("org.user{}:app:1.0", self.artifacts.len());
        self.artifact(&client, (2021, 1, 1), "jar", Some(unrelated_client()));
        self.edge(EdgeKind::Depends(DepScope::Compile), &client, &format!("{lib}:{}", versions[0].0));
    }

    fn write(self, dir: &Path) -> std::io::Result<Corpus> {
        let graph_dir = dir.join("graph");
        let jar_dir = dir.join("jars");
        write_graph(&graph_dir, &self.artifacts, &self.edges).map_err(std::io::Error::other)?;
        for (p, j) in &self.jars {
            j.write(&jar_dir.join(p))?;
        }
        Ok(Corpus { graph_dir, jar_dir })
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub graph_dir: PathBuf,
    pub jar_dir: PathBuf,
}

fn servlet_corpus() -> CorpusBuilder {
    let mut b = CorpusBuilder { artifacts: Vec::new(), edges: Vec::new(), jars: Vec::new() };
    let lib = format!("{SERVLET_GROUP}:{SERVLET_ARTIFACT}");
    let jars = [
        servlet_3_0_1(),
        servlet_3_1_0(),
        servlet_3_1_0(),
        servlet_3_1_0(),
        servlet_4_0_0(),
        servlet_4_0_0(),
        servlet_4_0_1(),
    ];
    let dates =
        [(2011, 7, 12), (2012, 12, 4), (2013, 4, 25), (2015, 10, 6), (2016, 9, 14), (2017, 8, 25), (2018, 4, 20)];
    for ((v, jar), when) in SERVLET_VERSIONS.iter().zip(jars).zip(dates) {
        b.artifact(&format!("{lib}:{v}"), when, "jar", Some(jar));
    }
    b.chain(&lib, &SERVLET_VERSIONS);
    b.artifact("org.springframework:spring-test:4.2.5.RELEASE", (2016, 2, 25), "jar", Some(mock_request_client()));
    b.edge(
        EdgeKind::Depends(DepScope::Compile),
        "org.springframework:spring-test:4.2.5.RELEASE",
        &format!("{lib}:3.0.1"),
    );
    b.artifact("com.acme:web-filter:1.0", (2014, 1, 10), "jar", Some(auth_type_client()));
    b.edge(EdgeKind::Depends(DepScope::Compile), "com.acme:web-filter:1.0", &format!("{lib}:3.1.0"));
    b.artifact("net.demo:tool:2.0", (2018, 1, 5), "jar", Some(unrelated_client()));
    b.edge(EdgeKind::Depends(DepScope::Test), "net.demo:tool:2.0", &format!("{lib}:4.0.0"));
    b
}

/// The seven servlet versions chained by NEXT edges with one external
/// client per compliant `v1`.
pub fn write_servlet_corpus(dir: &Path) -> std::io::Result<Corpus> {
    servlet_corpus().write(dir)
}

/// The servlet corpus plus one library per selection filter.
pub fn write_filter_corpus(dir: &Path) -> std::io::Result<Corpus> {
    let mut b = servlet_corpus();
    let plain = || JarFixture::new(vec![other()]);
    b.small_library(
        "org.dates:calendar",
        [("2.5.20110712", (2011, 7, 12)), ("2.5.20110801", (2011, 8, 1))],
        "jar",
        [Some(plain()), Some(plain())],
    );
    b.small_library(
        "org.inverted:lib",
        [("1.0", (2020, 5, 1)), ("1.1", (2020, 1, 1))],
        "jar",
        [Some(plain()), Some(plain())],
    );
    let scala = || JarFixture::new(vec![other().source(Some("Other.scala"))]);
    b.small_library(
        "org.scala:lib",
        [("1.0", (2019, 1, 1)), ("1.1", (2019, 2, 1))],
        "jar",
        [Some(scala()), Some(scala())],
    );
    let modern = || JarFixture::new(vec![other().major_version(55)]);
    b.small_library(
        "org.modern:lib",
        [("1.0", (2019, 1, 1)), ("1.1", (2019, 2, 1))],
        "jar",
        [Some(modern()), Some(plain())],
    );
    b.small_library("org.missing:lib", [("1.0", (2019, 1, 1)), ("1.1", (2019, 2, 1))], "jar", [Some(plain()), None]);
    b.small_library("org.parent:bom", [("1.0", (2019, 1, 1)), ("1.1", (2019, 2, 1))], "pom", [None, None]);
    // only an internal client
    b.artifact("org.lonely:lib:1.0", (2019, 1, 1), "jar", Some(plain()));
    b.artifact("org.lonely:lib:2.0", (2019, 6, 1), "jar", Some(plain()));
    b.chain("org.lonely:lib", &["1.0", "2.0"]);
    b.artifact("org.lonely:app:1.0", (2019, 7, 1), "jar", Some(unrelated_client()));
    b.edge(EdgeKind::Depends(DepScope::Compile), "org.lonely:app:1.0", "org.lonely:lib:1.0");
    // only a runtime-scope client
    b.artifact("org.rt:lib:1.0", (2019, 1, 1), "jar", Some(plain()));
    b.artifact("org.rt:lib:1.1", (2019, 6, 1), "jar", Some(plain()));
    b.chain("org.rt:lib", &["1.0", "1.1"]);
    b.artifact("com.other:runner:1.0", (2019, 7, 1), "jar", Some(unrelated_client()));
    b.edge(EdgeKind::Depends(DepScope::Runtime), "com.other:runner:1.0", "org.rt:lib:1.0");
    // a version that goes backwards
    b.small_library(
        "org.backport:lib",
        [("2.0", (2019, 1, 1)), ("1.9", (2019, 2, 1))],
        "jar",
        [Some(plain()), Some(plain())],
    );
    b.write(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apimodel::{build_model, StabilityConfig};
    use crate::delta::compute_delta;
    use std::collections::BTreeSet;

    #[test]
    fn every_catalog_pair_yields_exactly_its_expected_delta() {
        let config = StabilityConfig::default();
        for case in catalog_cases() {
            let old = build_model(&case.old.content("v1"), &config);
            let new = build_model(&case.new.content("v2"), &config);
            let got: BTreeSet<(BcKind, ElementRef)> =
                compute_delta(&old, &new).changes.iter().map(|c| (c.kind, c.element.clone())).collect();
            let want: BTreeSet<(BcKind, ElementRef)> = case.expected.iter().cloned().collect();
            assert_eq!(got, want, "{}", case.kind.name());
        }
    }

    #[test]
    fn bench_ids_are_unique() {
        let ids: BTreeSet<String> = bench_fixtures().into_iter().map(|f| f.id).collect();
        assert_eq!(ids.len(), bench_fixtures().len());
    }
}
