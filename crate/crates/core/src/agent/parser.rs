//! Declaration-level Java parser.
//!
//! Recognizes package and import declarations, class / abstract class /
//! interface / enum declarations with nesting, `extends` / `implements`
//! clauses, and method and constructor signatures. Method bodies, field
//! initializers and annotations are skipped. Anything outside that subset is
//! reported as a warning and parsing recovers with whatever type names were
//! recognized up to that point.

use std::collections::BTreeSet;

use super::lexer::{tokenize, Token, TokenKind};
use super::loc::{classify_lines, range_loc, LineClass};
use crate::model::{ClassKind, ClassUnit, LocMetrics, MethodDecl, CONSTRUCTOR_NAME};

/// Parsed form of one source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilationUnit {
    pub path: String,
    pub package_path: String,
    pub imports: Vec<String>,
    pub top_level_types: Vec<ClassUnit>,
    /// Type names that could not be resolved to a known fqn. Filled by the
    /// snapshot builder.
    pub unresolved_type_names: BTreeSet<String>,
    pub loc: LocMetrics,
    /// Reasons this file was not fully analyzed. Empty on success.
    pub warnings: Vec<String>,
}

impl CompilationUnit {
    pub fn fully_analyzed(&self) -> bool {
        self.warnings.is_empty()
    }
}

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "transient",
    "volatile",
    "strictfp",
    "default",
    "sealed",
];

#[derive(Debug)]
struct SyntaxError {
    line: u32,
    message: String,
}

type PResult<T> = Result<T, SyntaxError>;

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    lines: &'a [LineClass],
    path: &'a str,
    package: String,
    warnings: Vec<String>,
}

/// Parses one file. Never fails: problems degrade to warnings on the unit.
pub fn parse_compilation_unit(file_text: &str, path: &str) -> CompilationUnit {
    let lines = classify_lines(file_text);
    let mut unit = CompilationUnit {
        path: path.to_string(),
        package_path: String::new(),
        imports: Vec::new(),
        top_level_types: Vec::new(),
        unresolved_type_names: BTreeSet::new(),
        loc: super::loc::tally(&lines),
        warnings: Vec::new(),
    };
    let toks = match tokenize(file_text) {
        Ok(t) => t,
        Err(e) => {
            unit.warnings.push(format!("line {}: {}", e.line, e.message));
            // fall back to a scan for declared type names
            unit.top_level_types = salvage_type_names(file_text, path);
            return unit;
        }
    };
    if toks.is_empty() {
        unit.warnings.push("empty compilation unit".into());
        return unit;
    }
    let mut p = Parser { toks: &toks, pos: 0, lines: &lines, path, package: String::new(), warnings: Vec::new() };
    let mut types = Vec::new();
    if let Err(e) = p.compilation_unit(&mut unit.imports, &mut types) {
        p.warnings.push(format!("line {}: {}", e.line, e.message));
    }
    unit.package_path = p.package.clone();
    unit.warnings.extend(p.warnings);
    unit.top_level_types = types;
    unit
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, off: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + off)
    }

    fn line(&self) -> u32 {
        self.peek().or_else(|| self.toks.last()).map_or(1, |t| t.line)
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(SyntaxError { line: self.line(), message: message.into() })
    }

    fn bump(&mut self) -> PResult<&'a Token> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => self.err("unexpected end of file"),
        }
    }

    fn at_sym(&self, c: char) -> bool {
        self.peek().is_some_and(|t| t.is_sym(c))
    }

    fn at_word(&self, w: &str) -> bool {
        self.peek().is_some_and(|t| t.is_word(w))
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.at_sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of file".to_string(), Token::text);
            self.err(format!("expected '{c}', found '{found}'"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => {
                let found = self.peek().map_or("end of file".to_string(), Token::text);
                self.err(format!("expected identifier, found '{found}'"))
            }
        }
    }

    fn qualified_name(&mut self) -> PResult<String> {
        let mut name = self.ident()?;
        while self.at_sym('.') && self.peek_at(1).is_some_and(|t| t.ident().is_some()) {
            self.pos += 1;
            name.push('.');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    /// Skips a balanced `open ... close` group starting at the current token.
    fn skip_balanced(&mut self, open: char, close: char) -> PResult<u32> {
        self.expect_sym(open)?;
        let mut depth = 1usize;
        while depth > 0 {
            let t = self.bump()?;
            if t.is_sym(open) {
                depth += 1;
            } else if t.is_sym(close) {
                depth -= 1;
                if depth == 0 {
                    return Ok(t.line);
                }
            }
        }
        unreachable!()
    }

    fn skip_annotation(&mut self) -> PResult<()> {
        self.expect_sym('@')?;
        self.qualified_name()?;
        if self.at_sym('(') {
            self.skip_balanced('(', ')')?;
        }
        Ok(())
    }

    fn at_annotation(&self) -> bool {
        self.at_sym('@') && !self.peek_at(1).is_some_and(|t| t.is_word("interface"))
    }

    /// Consumes modifiers and annotations, returning the modifier words.
    fn modifiers(&mut self) -> PResult<BTreeSet<String>> {
        let mut mods = BTreeSet::new();
        loop {
            if self.at_annotation() {
                self.skip_annotation()?;
                continue;
            }
            // non-sealed
            if self.at_word("non")
                && self.peek_at(1).is_some_and(|t| t.is_sym('-'))
                && self.peek_at(2).is_some_and(|t| t.is_word("sealed"))
            {
                self.pos += 3;
                mods.insert("non-sealed".to_string());
                continue;
            }
            match self.peek().and_then(Token::ident) {
                Some(w) if MODIFIERS.contains(&w) => {
                    // `default` inside a switch never reaches here; in an
                    // interface body it is a method modifier.
                    mods.insert(w.to_string());
                    self.pos += 1;
                }
                _ => return Ok(mods),
            }
        }
    }

    fn compilation_unit(&mut self, imports: &mut Vec<String>, types: &mut Vec<ClassUnit>) -> PResult<()> {
        // package annotations
        while self.at_annotation() {
            self.skip_annotation()?;
        }
        if self.eat_word("package") {
            self.package = self.qualified_name()?;
            self.expect_sym(';')?;
        }
        while self.at_word("import") {
            self.pos += 1;
            let is_static = self.eat_word("static");
            let mut name = self.qualified_name()?;
            if self.eat_sym('.') {
                self.expect_sym('*')?;
                name.push_str(".*");
            }
            self.expect_sym(';')?;
            imports.push(if is_static { format!("static {name}") } else { name });
        }
        while self.peek().is_some() {
            if self.eat_sym(';') {
                continue;
            }
            if self.at_word("module") || self.at_word("open") {
                return self.err("module declarations are not supported");
            }
            let start = self.line();
            let mods = self.modifiers()?;
            let ty = self.type_declaration(mods, start, &[])?;
            types.push(ty);
        }
        Ok(())
    }

    fn type_declaration(&mut self, mods: BTreeSet<String>, start_line: u32, enclosing: &[String]) -> PResult<ClassUnit> {
        let (kind, keyword) = if self.eat_word("class") {
            (if mods.contains("abstract") { ClassKind::Abstract } else { ClassKind::Class }, "class")
        } else if self.eat_word("interface") {
            (ClassKind::Interface, "interface")
        } else if self.eat_word("enum") {
            (ClassKind::Enum, "enum")
        } else if self.at_word("record") && self.peek_at(1).is_some_and(|t| t.ident().is_some()) {
            self.pos += 1;
            (ClassKind::Class, "record")
        } else if self.at_sym('@') && self.peek_at(1).is_some_and(|t| t.is_word("interface")) {
            self.pos += 2;
            (ClassKind::Interface, "@interface")
        } else {
            let found = self.peek().map_or("end of file".to_string(), Token::text);
            return self.err(format!("expected type declaration, found '{found}'"));
        };
        let name = self.ident()?;
        let mut unit = ClassUnit {
            fqn: fqn_of(&self.package, enclosing, &name),
            name,
            kind,
            super_class: None,
            interfaces: Vec::new(),
            methods: Vec::new(),
            nested_classes: Vec::new(),
            file_path: self.path.to_string(),
            loc: LocMetrics::default(),
        };
        match self.type_declaration_rest(&mut unit, keyword, enclosing) {
            Ok(end_line) => {
                unit.loc = self.loc(start_line, end_line);
                Ok(unit)
            }
            Err(e) => {
                // keep what was recognized; the caller stops at this error
                self.warnings.push(format!("line {}: {} (in {})", e.line, e.message, unit.fqn));
                unit.loc = self.loc(start_line, self.line());
                self.pos = self.toks.len();
                Ok(unit)
            }
        }
    }

    fn type_declaration_rest(&mut self, unit: &mut ClassUnit, keyword: &str, enclosing: &[String]) -> PResult<u32> {
        if self.at_sym('<') {
            self.skip_balanced('<', '>')?;
        }
        match keyword {
            "record" => {
                self.warnings.push(format!("record declaration {} is outside the supported subset", unit.fqn));
                self.skip_balanced('(', ')')?;
            }
            "@interface" => {
                self.warnings
                    .push(format!("annotation type {} is outside the supported subset", unit.fqn));
            }
            _ => {}
        }
        loop {
            if self.eat_word("extends") {
                let names = self.type_list()?;
                if unit.kind == ClassKind::Interface {
                    let mut it = names.into_iter();
                    unit.super_class = it.next();
                    unit.interfaces.extend(it);
                } else {
                    let mut it = names.into_iter();
                    unit.super_class = it.next();
                    if it.next().is_some() {
                        return self.err("a class can extend only one type");
                    }
                }
            } else if self.eat_word("implements") {
                unit.interfaces.extend(self.type_list()?);
            } else if self.eat_word("permits") {
                self.type_list()?;
            } else {
                break;
            }
        }
        if keyword == "@interface" {
            return self.skip_balanced('{', '}');
        }
        self.expect_sym('{')?;
        let mut inner: Vec<String> = enclosing.to_vec();
        inner.push(unit.name.clone());
        if unit.kind == ClassKind::Enum {
            self.enum_constants()?;
        }
        loop {
            if let Some(t) = self.peek() {
                if t.is_sym('}') {
                    self.pos += 1;
                    return Ok(t.line);
                }
            }
            self.member(unit, &inner)?;
        }
    }

    fn type_list(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![erase(&self.type_ref()?)];
        while self.eat_sym(',') {
            out.push(erase(&self.type_ref()?));
        }
        Ok(out)
    }

    /// Skips enum constants up to the `;` or `}` that ends them.
    fn enum_constants(&mut self) -> PResult<()> {
        loop {
            match self.peek() {
                None => return self.err("unexpected end of file in enum body"),
                Some(t) if t.is_sym(';') => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(t) if t.is_sym('}') => return Ok(()),
                Some(t) if t.is_sym('(') => {
                    self.skip_balanced('(', ')')?;
                }
                Some(t) if t.is_sym('{') => {
                    self.skip_balanced('{', '}')?;
                }
                Some(t) if t.is_sym('@') => self.skip_annotation()?,
                Some(_) => self.pos += 1,
            }
        }
    }

    fn member(&mut self, owner: &mut ClassUnit, enclosing: &[String]) -> PResult<()> {
        if self.eat_sym(';') {
            return Ok(());
        }
        if self.at_sym('{') {
            self.skip_balanced('{', '}')?;
            return Ok(());
        }
        if self.at_word("static") && self.peek_at(1).is_some_and(|t| t.is_sym('{')) {
            self.pos += 1;
            self.skip_balanced('{', '}')?;
            return Ok(());
        }
        let start = self.line();
        let mut mods = self.modifiers()?;
        if self.at_word("class")
            || self.at_word("interface")
            || self.at_word("enum")
            || (self.at_word("record") && self.peek_at(1).is_some_and(|t| t.ident().is_some()) && self.peek_at(2).is_some_and(|t| t.is_sym('(') || t.is_sym('<')))
            || (self.at_sym('@') && self.peek_at(1).is_some_and(|t| t.is_word("interface")))
        {
            let nested = self.type_declaration(mods, start, enclosing)?;
            owner.nested_classes.push(nested);
            return Ok(());
        }
        if self.at_sym('<') {
            self.skip_balanced('<', '>')?;
        }
        // constructor: Name (
        if self.peek().and_then(Token::ident) == Some(owner.name.as_str()) && self.peek_at(1).is_some_and(|t| t.is_sym('(')) {
            self.pos += 1;
            let params = self.parameters()?;
            let end = self.method_tail()?;
            owner.methods.push(MethodDecl {
                name: CONSTRUCTOR_NAME.to_string(),
                param_types: params,
                return_type: "void".to_string(),
                modifiers: mods,
                loc: self.loc(start, end),
            });
            return Ok(());
        }
        let ty = self.type_ref()?;
        let name = self.ident()?;
        if self.at_sym('(') {
            let params = self.parameters()?;
            let mut return_type = ty;
            // legacy `int f()[]`
            while self.at_sym('[') && self.peek_at(1).is_some_and(|t| t.is_sym(']')) {
                self.pos += 2;
                return_type.push_str("[]");
            }
            let end = self.method_tail()?;
            if owner.kind == ClassKind::Interface && !mods.contains("default") && !mods.contains("static") && !mods.contains("private") {
                mods.insert("abstract".to_string());
            }
            owner.methods.push(MethodDecl {
                name,
                param_types: params,
                return_type,
                modifiers: mods,
                loc: self.loc(start, end),
            });
            return Ok(());
        }
        // field declaration: skip to the terminating `;`
        self.skip_to_semicolon()
    }

    fn skip_to_semicolon(&mut self) -> PResult<()> {
        loop {
            match self.peek() {
                None => return self.err("unexpected end of file in field declaration"),
                Some(t) if t.is_sym(';') => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(t) if t.is_sym('{') => {
                    self.skip_balanced('{', '}')?;
                }
                Some(t) if t.is_sym('(') => {
                    self.skip_balanced('(', ')')?;
                }
                Some(t) if t.is_sym('}') => return self.err("unexpected '}' in field declaration"),
                Some(_) => self.pos += 1,
            }
        }
    }

    /// After the parameter list: `throws`, annotation defaults, then a body
    /// or `;`. Returns the last line of the declaration.
    fn method_tail(&mut self) -> PResult<u32> {
        if self.eat_word("throws") {
            self.type_list()?;
        }
        if self.eat_word("default") {
            // annotation member default value
            while !self.at_sym(';') {
                if self.at_sym('{') {
                    self.skip_balanced('{', '}')?;
                } else {
                    self.bump()?;
                }
            }
        }
        if let Some(t) = self.peek() {
            if t.is_sym(';') {
                self.pos += 1;
                return Ok(t.line);
            }
        }
        self.skip_balanced('{', '}')
    }

    fn parameters(&mut self) -> PResult<Vec<String>> {
        self.expect_sym('(')?;
        let mut params = Vec::new();
        if self.eat_sym(')') {
            return Ok(params);
        }
        loop {
            self.modifiers()?;
            let mut ty = self.type_ref()?;
            if self.at_word("this") {
                // receiver parameter
                self.pos += 1;
            } else {
                self.ident()?;
                while self.at_sym('[') && self.peek_at(1).is_some_and(|t| t.is_sym(']')) {
                    self.pos += 2;
                    ty.push_str("[]");
                }
                params.push(ty);
            }
            if self.eat_sym(')') {
                return Ok(params);
            }
            self.expect_sym(',')?;
        }
    }

    /// A type reference rendered without whitespace, generics kept verbatim.
    fn type_ref(&mut self) -> PResult<String> {
        while self.at_annotation() {
            self.skip_annotation()?;
        }
        let mut out = self.ident()?;
        loop {
            if self.at_sym('<') {
                out.push_str(&self.type_args()?);
            }
            if self.at_sym('.') && self.peek_at(1).is_some_and(|t| t.ident().is_some() || t.is_sym('@')) {
                self.pos += 1;
                while self.at_annotation() {
                    self.skip_annotation()?;
                }
                out.push('.');
                out.push_str(&self.ident()?);
                continue;
            }
            break;
        }
        loop {
            while self.at_annotation() {
                self.skip_annotation()?;
            }
            if self.at_sym('[') && self.peek_at(1).is_some_and(|t| t.is_sym(']')) {
                self.pos += 2;
                out.push_str("[]");
            } else {
                break;
            }
        }
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Ellipsis {
                self.pos += 1;
                out.push_str("...");
            }
        }
        Ok(out)
    }

    fn type_args(&mut self) -> PResult<String> {
        self.expect_sym('<')?;
        let mut out = String::from("<");
        if self.eat_sym('>') {
            out.push('>');
            return Ok(out);
        }
        loop {
            while self.at_annotation() {
                self.skip_annotation()?;
            }
            if self.eat_sym('?') {
                out.push('?');
                if self.eat_word("extends") {
                    out.push_str(" extends ");
                    out.push_str(&self.type_ref()?);
                } else if self.eat_word("super") {
                    out.push_str(" super ");
                    out.push_str(&self.type_ref()?);
                }
            } else {
                out.push_str(&self.type_ref()?);
            }
            if self.eat_sym(',') {
                out.push(',');
                continue;
            }
            self.expect_sym('>')?;
            out.push('>');
            return Ok(out);
        }
    }

    fn loc(&self, start: u32, end: u32) -> LocMetrics {
        range_loc(self.lines, start, end.max(start)).unwrap_or_default()
    }
}

fn fqn_of(package: &str, enclosing: &[String], name: &str) -> String {
    let mut parts: Vec<&str> = Vec::new();
    if !package.is_empty() {
        parts.push(package);
    }
    parts.extend(enclosing.iter().map(String::as_str));
    parts.push(name);
    parts.join(".")
}

/// Drops type arguments: `Comparable<Pet>` becomes `Comparable`.
pub fn erase(ty: &str) -> String {
    let mut out = String::with_capacity(ty.len());
    let mut depth = 0usize;
    for c in ty.chars() {
        match c {
            '<' => depth += 1,
            '>' => depth = depth.saturating_sub(1),
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

/// Last-resort recovery when the file cannot even be tokenized: find
/// `class|interface|enum Name` pairs at the start of declarations.
fn salvage_type_names(text: &str, path: &str) -> Vec<ClassUnit> {
    let mut package = String::new();
    let mut out = Vec::new();
    for line in text.lines() {
        let words: Vec<&str> = line
            .split(|c: char| !(c.is_alphanumeric() || c == '_' || c == '$' || c == '.'))
            .filter(|w| !w.is_empty())
            .collect();
        if words.first() == Some(&"package") {
            if let Some(p) = words.get(1) {
                package = p.to_string();
            }
        }
        for w in words.windows(2) {
            let kind = match w[0] {
                "class" => ClassKind::Class,
                "interface" => ClassKind::Interface,
                "enum" => ClassKind::Enum,
                _ => continue,
            };
            if !crate::model::is_identifier(w[1]) || out.iter().any(|c: &ClassUnit| c.name == w[1]) {
                continue;
            }
            out.push(ClassUnit {
                name: w[1].to_string(),
                fqn: fqn_of(&package, &[], w[1]),
                kind,
                super_class: None,
                interfaces: Vec::new(),
                methods: Vec::new(),
                nested_classes: Vec::new(),
                file_path: path.to_string(),
                loc: LocMetrics::default(),
            });
            break;
        }
    }
    out
}
