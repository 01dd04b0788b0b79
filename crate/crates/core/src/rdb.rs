//! UML class model ⇄ relational schema and SQL DDL.
//!
//! Plain classifiers become tables with an integer surrogate `id` and a
//! `name` column; stereotyped classifiers become tables with one non-null
//! `<role>_id` foreign key per association. Instances become seed rows.
//!
//! Information DDL cannot carry is kept in line-comment markers written
//! directly above a `CREATE TABLE`:
//!
//! ```sql
//! -- name:MANAGER                 original classifier name
//! -- kind:function                predicate kind
//! -- fold:salary object - Salary  folded attribute: column, role, result table, name
//! ```
//!
//! Other comments are ignored.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use crate::frame::{Model, PredicateKind, Role};
use crate::uml::{
    from_uml, Association, Attribute, Classifier, FoldedCharacteristic, Instance, UmlError,
    UmlModel, DEFAULT_ATTRIBUTE_TYPE,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnType {
    Ident,
    Text,
}

impl ColumnType {
    pub fn sql(self) -> &'static str {
        match self {
            Self::Ident => "INTEGER",
            Self::Text => "VARCHAR(255)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub column_type: ColumnType,
    pub nullable: bool,
}

impl Column {
    fn new(name: impl Into<String>, column_type: ColumnType, nullable: bool) -> Self {
        Self {
            name: name.into(),
            column_type,
            nullable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForeignKey {
    pub column: String,
    pub references: String,
}

/// A folded characteristic stored as a text column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldMarker {
    pub column: String,
    pub role: Role,
    /// Table of the result concept, if the characteristic has a result.
    pub result: Option<String>,
    /// Original attribute name.
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    /// Original classifier name when it differs from `name`.
    pub label: Option<String>,
    /// Set for tables that came from predicates.
    pub kind: Option<PredicateKind>,
    pub columns: Vec<Column>,
    pub primary_key: String,
    pub foreign_keys: Vec<ForeignKey>,
    pub folds: Vec<FoldMarker>,
}

impl Table {
    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    Integer(i64),
    Text(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Integer(n) => write!(f, "{n}"),
            Self::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedRow {
    pub table: String,
    pub columns: Vec<String>,
    pub values: Vec<Literal>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationalSchema {
    pub tables: Vec<Table>,
    pub seed_rows: Vec<SeedRow>,
}

impl RelationalSchema {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RdbError {
    #[error(transparent)]
    Uml(#[from] UmlError),
    #[error("{predicate:?} takes predicate {target:?} as an argument; only concepts can be referenced")]
    UnsupportedNesting { predicate: String, target: String },
    #[error("{predicate:?} has several {role} associations; a role maps to one foreign key")]
    AmbiguousRole { predicate: String, role: Role },
    #[error("{0:?} cannot be turned into a table or column name")]
    InvalidName(String),
    #[error("{name:?} maps to {identifier:?}, which is already taken")]
    NameCollision { name: String, identifier: String },
    #[error("foreign keys form a cycle through {0:?}")]
    CyclicDependency(Vec<String>),
    #[error("table {0:?} does not exist")]
    UnknownTable(String),
    #[error("foreign key column {0:?} is not <role>_id for one of agent, object, source, destination, result")]
    UnknownRole(String),
    #[error(transparent)]
    Parse(#[from] DdlParseError),
}

/// Lowercase snake_case identifier for a model name.
pub fn identifier(name: &str) -> Result<String, RdbError> {
    if name.contains(['\n', '\r']) {
        return Err(RdbError::InvalidName(name.to_owned()));
    }
    let mut out = String::with_capacity(name.len());
    let mut prev_lower = false;
    for c in name.chars() {
        if c.is_alphanumeric() {
            if c.is_uppercase() && prev_lower {
                out.push('_');
            }
            prev_lower = c.is_lowercase() || c.is_numeric();
            out.extend(c.to_lowercase());
        } else {
            prev_lower = false;
            if !out.ends_with('_') {
                out.push('_');
            }
        }
    }
    let trimmed = out.trim_matches('_');
    if trimmed.is_empty() {
        return Err(RdbError::InvalidName(name.to_owned()));
    }
    if trimmed.starts_with(|c: char| c.is_numeric()) {
        Ok(format!("t_{trimmed}"))
    } else {
        Ok(trimmed.to_owned())
    }
}

fn fk_column(role: Role) -> String {
    format!("{}_id", role.long())
}

/// Compiles a UML class model into a relational schema.
pub fn to_schema(u: &UmlModel) -> Result<RelationalSchema, RdbError> {
    u.check()?;
    let mut tables_by_classifier: HashMap<&str, String> = HashMap::new();
    let mut taken: HashSet<String> = HashSet::new();
    for c in &u.classifiers {
        let ident = identifier(&c.name)?;
        if !taken.insert(ident.clone()) {
            return Err(RdbError::NameCollision {
                name: c.name.clone(),
                identifier: ident,
            });
        }
        tables_by_classifier.insert(&c.name, ident);
    }
    let label_for = |c: &Classifier, table: &str| (c.name != table).then(|| c.name.clone());

    let mut schema = RelationalSchema::default();
    for c in u.classifiers.iter().filter(|c| c.stereotype.is_none()) {
        let name = tables_by_classifier[c.name.as_str()].clone();
        let mut table = Table {
            label: label_for(c, &name),
            name,
            kind: None,
            columns: vec![
                Column::new("id", ColumnType::Ident, false),
                Column::new("name", ColumnType::Text, false),
            ],
            primary_key: "id".into(),
            foreign_keys: Vec::new(),
            folds: Vec::new(),
        };
        for a in &c.attributes {
            let column = identifier(&a.name)?;
            if table.column(&column).is_some() {
                return Err(RdbError::NameCollision {
                    name: a.name.clone(),
                    identifier: column,
                });
            }
            table.columns.push(Column::new(&column, ColumnType::Text, true));
            if let Some(fold) = a.folded {
                let result = if fold.has_result {
                    let target = tables_by_classifier
                        .get(a.type_name.as_str())
                        .ok_or_else(|| UmlError::UnknownClassifier(a.type_name.clone()))?;
                    Some(target.clone())
                } else {
                    None
                };
                table.folds.push(FoldMarker {
                    column,
                    role: fold.role,
                    result,
                    label: a.name.clone(),
                });
            }
        }
        schema.tables.push(table);
    }

    for c in u.classifiers.iter() {
        let Some(kind) = c.stereotype else { continue };
        let name = tables_by_classifier[c.name.as_str()].clone();
        let mut by_role: BTreeMap<Role, &Association> = BTreeMap::new();
        for a in u.associations.iter().filter(|a| a.source == c.name) {
            let role = Role::from_long(&a.role).ok_or_else(|| UmlError::UnknownRole(a.role.clone()))?;
            let target = u
                .classifier(&a.target)
                .ok_or_else(|| UmlError::UnknownClassifier(a.target.clone()))?;
            if target.stereotype.is_some() {
                return Err(RdbError::UnsupportedNesting {
                    predicate: c.name.clone(),
                    target: a.target.clone(),
                });
            }
            if by_role.insert(role, a).is_some() {
                return Err(RdbError::AmbiguousRole {
                    predicate: c.name.clone(),
                    role,
                });
            }
        }
        let mut table = Table {
            label: label_for(c, &name),
            name,
            kind: Some(kind),
            columns: vec![Column::new("id", ColumnType::Ident, false)],
            primary_key: "id".into(),
            foreign_keys: Vec::new(),
            folds: Vec::new(),
        };
        for (role, a) in by_role {
            let column = fk_column(role);
            table.columns.push(Column::new(&column, ColumnType::Ident, false));
            table.foreign_keys.push(ForeignKey {
                column,
                references: tables_by_classifier[a.target.as_str()].clone(),
            });
        }
        schema.tables.push(table);
    }

    let mut next_id: HashMap<&str, i64> = HashMap::new();
    for i in &u.instances {
        let classifier = u
            .classifier(&i.classifier)
            .ok_or_else(|| UmlError::UnknownClassifier(i.classifier.clone()))?;
        if classifier.stereotype.is_some() {
            return Err(RdbError::UnsupportedNesting {
                predicate: i.classifier.clone(),
                target: i.name.clone(),
            });
        }
        let table = tables_by_classifier[i.classifier.as_str()].as_str();
        let n = next_id.entry(table).or_insert(0);
        *n += 1;
        schema.seed_rows.push(SeedRow {
            table: table.to_owned(),
            columns: vec!["id".into(), "name".into()],
            values: vec![Literal::Integer(*n), Literal::Text(i.name.clone())],
        });
    }
    Ok(schema)
}

/// Tables in dependency order: referenced tables before referencing ones,
/// otherwise schema order. Self-references do not constrain the order.
fn dependency_order(s: &RelationalSchema) -> Result<Vec<&Table>, RdbError> {
    let index: HashMap<&str, usize> = s
        .tables
        .iter()
        .enumerate()
        .map(|(i, t)| (t.name.as_str(), i))
        .collect();
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); s.tables.len()];
    for (i, t) in s.tables.iter().enumerate() {
        for fk in &t.foreign_keys {
            let j = *index
                .get(fk.references.as_str())
                .ok_or_else(|| RdbError::UnknownTable(fk.references.clone()))?;
            if j != i {
                deps[i].insert(j);
            }
        }
    }
    let mut done = vec![false; s.tables.len()];
    let mut order = Vec::with_capacity(s.tables.len());
    while order.len() < s.tables.len() {
        let ready = (0..s.tables.len()).find(|&i| !done[i] && deps[i].iter().all(|&d| done[d]));
        match ready {
            Some(i) => {
                done[i] = true;
                order.push(&s.tables[i]);
            }
            None => {
                let stuck = (0..s.tables.len())
                    .filter(|&i| !done[i])
                    .map(|i| s.tables[i].name.clone())
                    .collect();
                return Err(RdbError::CyclicDependency(stuck));
            }
        }
    }
    Ok(order)
}

/// Renders the schema as DDL followed by seed `INSERT`s.
pub fn render_sql(s: &RelationalSchema) -> Result<String, RdbError> {
    let mut out = String::new();
    for t in dependency_order(s)? {
        if !out.is_empty() {
            out.push('\n');
        }
        if let Some(label) = &t.label {
            let _ = writeln!(out, "-- name:{label}");
        }
        if let Some(kind) = t.kind {
            let _ = writeln!(out, "-- kind:{kind}");
        }
        for f in &t.folds {
            let _ = writeln!(
                out,
                "-- fold:{} {} {} {}",
                f.column,
                f.role,
                f.result.as_deref().unwrap_or("-"),
                f.label
            );
        }
        let _ = writeln!(out, "CREATE TABLE {} (", t.name);
        let mut lines: Vec<String> = t
            .columns
            .iter()
            .map(|c| {
                let null = if c.nullable { "" } else { " NOT NULL" };
                format!("  {} {}{null}", c.name, c.column_type.sql())
            })
            .collect();
        lines.push(format!("  PRIMARY KEY ({})", t.primary_key));
        for fk in &t.foreign_keys {
            lines.push(format!(
                "  FOREIGN KEY ({}) REFERENCES {}(id)",
                fk.column, fk.references
            ));
        }
        out.push_str(&lines.join(",\n"));
        out.push_str("\n);\n");
    }
    if !s.seed_rows.is_empty() {
        if !out.is_empty() {
            out.push('\n');
        }
        for row in &s.seed_rows {
            let values: Vec<String> = row.values.iter().map(Literal::to_string).collect();
            let _ = writeln!(
                out,
                "INSERT INTO {} ({}) VALUES ({});",
                row.table,
                row.columns.join(", "),
                values.join(", ")
            );
        }
    }
    Ok(out)
}

/// Error raised by [`parse_ddl`], located at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DdlParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for DdlParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match self.expected.as_slice() {
            [] => write!(f, "{}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(f, "expected one of {}, found {}", many.join(", "), self.found),
        }
    }
}

impl std::error::Error for DdlParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Keyword(&'static str),
    Ident(String),
    Int(i64),
    Str(String),
    Punct(char),
    /// A `-- key:value` marker comment.
    Marker(String, String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Keyword(k) => write!(f, "{k}"),
            Self::Ident(s) => write!(f, "identifier `{s}`"),
            Self::Int(n) => write!(f, "integer {n}"),
            Self::Str(_) => write!(f, "string literal"),
            Self::Punct(c) => write!(f, "`{c}`"),
            Self::Marker(k, _) => write!(f, "`-- {k}:` marker"),
            Self::Eof => write!(f, "end of input"),
        }
    }
}

const KEYWORDS: [&str; 13] = [
    "CREATE", "TABLE", "INTEGER", "VARCHAR", "NOT", "NULL", "PRIMARY", "KEY", "FOREIGN",
    "REFERENCES", "INSERT", "INTO", "VALUES",
];
const MARKER_KEYS: [&str; 3] = ["name", "kind", "fold"];

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, DdlParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, found: String| DdlParseError {
        line,
        column,
        expected: Vec::new(),
        found,
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            let start = i + 2;
            let mut end = start;
            while end < chars.len() && chars[end] != '\n' {
                end += 1;
            }
            let body: String = chars[start..end].iter().collect();
            col += end - i;
            i = end;
            if let Some((key, value)) = body.split_once(':') {
                let key = key.trim_start();
                if MARKER_KEYS.contains(&key) && body.starts_with(' ') {
                    toks.push(Spanned {
                        tok: Tok::Marker(key.to_owned(), value.to_owned()),
                        line: tl,
                        column: tc,
                    });
                }
            }
            continue;
        }
        if c == '\'' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err(tl, tc, "unterminated string literal".into())),
                    Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                        s.push('\'');
                        i += 2;
                        col += 2;
                    }
                    Some('\'') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        if ch == '\n' {
                            line += 1;
                            col = 1;
                        } else {
                            col += 1;
                        }
                    }
                }
            }
            toks.push(Spanned { tok: Tok::Str(s), line: tl, column: tc });
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            let n = digits
                .parse()
                .map_err(|_| err(tl, tc, format!("integer {digits} out of range")))?;
            toks.push(Spanned { tok: Tok::Int(n), line: tl, column: tc });
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word),
            };
            toks.push(Spanned { tok, line: tl, column: tc });
            continue;
        }
        if "(),;".contains(c) {
            toks.push(Spanned { tok: Tok::Punct(c), line: tl, column: tc });
            i += 1;
            col += 1;
            continue;
        }
        return Err(err(tl, tc, format!("unexpected character {c:?}")));
    }
    toks.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, DdlParseError> {
        let (line, column) = self.here();
        Err(DdlParseError {
            line,
            column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn fail_at<T>(&self, at: (usize, usize), message: String) -> Result<T, DdlParseError> {
        Err(DdlParseError {
            line: at.0,
            column: at.1,
            expected: Vec::new(),
            found: message,
        })
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn keyword(&mut self, k: &'static str) -> Result<(), DdlParseError> {
        if *self.peek() == Tok::Keyword(k) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[k])
        }
    }

    fn punct(&mut self, c: char) -> Result<(), DdlParseError> {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&format!("`{c}`")])
        }
    }

    fn ident(&mut self) -> Result<String, DdlParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !s.chars().any(char::is_uppercase) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail(&["lowercase identifier"]),
        }
    }

    fn column_type(&mut self) -> Result<ColumnType, DdlParseError> {
        match self.peek() {
            Tok::Keyword("INTEGER") => {
                self.bump();
                Ok(ColumnType::Ident)
            }
            Tok::Keyword("VARCHAR") => {
                self.bump();
                self.punct('(')?;
                if *self.peek() != Tok::Int(255) {
                    return self.fail(&["255"]);
                }
                self.bump();
                self.punct(')')?;
                Ok(ColumnType::Text)
            }
            _ => self.fail(&["INTEGER", "VARCHAR"]),
        }
    }

    fn literal(&mut self) -> Result<Literal, DdlParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Literal::Integer(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Literal::Text(s))
            }
            _ => self.fail(&["integer", "string literal"]),
        }
    }
}

/// Pending markers for the next `CREATE TABLE`.
#[derive(Default)]
struct Markers {
    label: Option<String>,
    kind: Option<PredicateKind>,
    folds: Vec<FoldMarker>,
    first: Option<(usize, usize)>,
}

fn parse_fold(value: &str) -> Option<FoldMarker> {
    let mut parts = value.splitn(4, ' ');
    let column = parts.next()?.to_owned();
    let role = Role::from_long(parts.next()?)?;
    let result = match parts.next()? {
        "-" => None,
        t => Some(t.to_owned()),
    };
    let label = parts.next()?.to_owned();
    Some(FoldMarker {
        column,
        role,
        result,
        label,
    })
}

/// Parses DDL in the subset written by [`render_sql`]:
///
/// ```text
/// script     = { create | insert }
/// create     = "CREATE" "TABLE" ident "(" column_def { "," column_def }
///              "," "PRIMARY" "KEY" "(" ident ")"
///              { "," "FOREIGN" "KEY" "(" ident ")" "REFERENCES" ident "(" ident ")" }
///              ")" ";"
/// column_def = ident ( "INTEGER" | "VARCHAR" "(" "255" ")" ) [ "NOT" "NULL" ]
/// insert     = "INSERT" "INTO" ident "(" ident { "," ident } ")"
///              "VALUES" "(" literal { "," literal } ")" ";"
/// literal    = integer | "'" { char | "''" } "'"
/// ```
///
/// Identifiers are lowercase; keywords are uppercase. `--` comments are
/// skipped except for `name:`, `kind:` and `fold:` markers, which attach
/// to the following `CREATE TABLE`.
pub fn parse_ddl(text: &str) -> Result<RelationalSchema, DdlParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut schema = RelationalSchema::default();
    let mut markers = Markers::default();
    loop {
        match p.peek().clone() {
            Tok::Eof => {
                if let Some(at) = markers.first {
                    return p.fail_at(at, "marker comment not followed by CREATE TABLE".into());
                }
                return Ok(schema);
            }
            Tok::Marker(key, value) => {
                let at = p.here();
                markers.first.get_or_insert(at);
                match key.as_str() {
                    "name" => markers.label = Some(value),
                    "kind" => {
                        let kind = value
                            .parse()
                            .or_else(|_| p.fail_at(at, format!("unknown predicate kind {value:?}")))?;
                        markers.kind = Some(kind);
                    }
                    _ => {
                        let fold = parse_fold(&value)
                            .map_or_else(|| p.fail_at(at, format!("malformed fold marker {value:?}")), Ok)?;
                        markers.folds.push(fold);
                    }
                }
                p.bump();
            }
            Tok::Keyword("CREATE") => {
                let table = parse_create(&mut p, std::mem::take(&mut markers), &schema)?;
                schema.tables.push(table);
            }
            Tok::Keyword("INSERT") => {
                if let Some(at) = markers.first {
                    return p.fail_at(at, "marker comment not followed by CREATE TABLE".into());
                }
                let row = parse_insert(&mut p, &schema)?;
                schema.seed_rows.push(row);
            }
            _ => return p.fail(&["CREATE", "INSERT"]),
        }
    }
}

fn parse_create(
    p: &mut Parser,
    markers: Markers,
    schema: &RelationalSchema,
) -> Result<Table, DdlParseError> {
    p.keyword("CREATE")?;
    p.keyword("TABLE")?;
    let at = p.here();
    let name = p.ident()?;
    if schema.table(&name).is_some() {
        return p.fail_at(at, format!("table {name} defined twice"));
    }
    p.punct('(')?;
    let mut columns: Vec<Column> = Vec::new();
    loop {
        let at = p.here();
        let col = p.ident()?;
        if columns.iter().any(|c| c.name == col) {
            return p.fail_at(at, format!("column {col} defined twice"));
        }
        let column_type = p.column_type()?;
        let nullable = if *p.peek() == Tok::Keyword("NOT") {
            p.bump();
            p.keyword("NULL")?;
            false
        } else {
            true
        };
        columns.push(Column::new(col, column_type, nullable));
        p.punct(',')?;
        if *p.peek() == Tok::Keyword("PRIMARY") {
            break;
        }
        if !matches!(p.peek(), Tok::Ident(_)) {
            return p.fail(&["lowercase identifier", "PRIMARY"]);
        }
    }
    p.keyword("PRIMARY")?;
    p.keyword("KEY")?;
    p.punct('(')?;
    let at = p.here();
    let primary_key = p.ident()?;
    if !columns.iter().any(|c| c.name == primary_key) {
        return p.fail_at(at, format!("primary key column {primary_key} is not defined"));
    }
    p.punct(')')?;
    let mut foreign_keys = Vec::new();
    while *p.peek() == Tok::Punct(',') {
        p.bump();
        p.keyword("FOREIGN")?;
        p.keyword("KEY")?;
        p.punct('(')?;
        let at = p.here();
        let column = p.ident()?;
        if !columns.iter().any(|c| c.name == column) {
            return p.fail_at(at, format!("foreign key column {column} is not defined"));
        }
        p.punct(')')?;
        p.keyword("REFERENCES")?;
        let at = p.here();
        let references = p.ident()?;
        p.punct('(')?;
        let key_at = p.here();
        let key = p.ident()?;
        p.punct(')')?;
        let target_key = if references == name {
            Some(primary_key.as_str())
        } else {
            schema.table(&references).map(|t| t.primary_key.as_str())
        };
        match target_key {
            None => return p.fail_at(at, format!("table {references} is not defined before use")),
            Some(pk) if pk != key => {
                return p.fail_at(key_at, format!("{references}({key}) is not its primary key"))
            }
            Some(_) => {}
        }
        foreign_keys.push(ForeignKey { column, references });
    }
    p.punct(')')?;
    p.punct(';')?;
    for fold in &markers.folds {
        if !columns.iter().any(|c| c.name == fold.column) {
            return p.fail_at(
                markers.first.unwrap_or(at),
                format!("fold marker names unknown column {}", fold.column),
            );
        }
    }
    Ok(Table {
        name,
        label: markers.label,
        kind: markers.kind,
        columns,
        primary_key,
        foreign_keys,
        folds: markers.folds,
    })
}

fn parse_insert(p: &mut Parser, schema: &RelationalSchema) -> Result<SeedRow, DdlParseError> {
    p.keyword("INSERT")?;
    p.keyword("INTO")?;
    let at = p.here();
    let table = p.ident()?;
    let Some(def) = schema.table(&table) else {
        return p.fail_at(at, format!("table {table} is not defined"));
    };
    p.punct('(')?;
    let mut columns = Vec::new();
    loop {
        let at = p.here();
        let col = p.ident()?;
        if def.column(&col).is_none() {
            return p.fail_at(at, format!("table {table} has no column {col}"));
        }
        columns.push(col);
        if *p.peek() != Tok::Punct(',') {
            break;
        }
        p.bump();
    }
    p.punct(')')?;
    p.keyword("VALUES")?;
    p.punct('(')?;
    let at = p.here();
    let mut values = Vec::new();
    loop {
        values.push(p.literal()?);
        if *p.peek() != Tok::Punct(',') {
            break;
        }
        p.bump();
    }
    p.punct(')')?;
    if values.len() != columns.len() {
        return p.fail_at(
            at,
            format!("{} values for {} columns", values.len(), columns.len()),
        );
    }
    p.punct(';')?;
    Ok(SeedRow {
        table,
        columns,
        values,
    })
}

/// Reads a schema of the forward mapping's shape back into a UML model.
pub fn schema_to_uml(s: &RelationalSchema) -> Result<UmlModel, RdbError> {
    let mut u = UmlModel::default();
    let label = |table: &str| -> Result<String, RdbError> {
        s.table(table)
            .map(|t| t.display_name().to_owned())
            .ok_or_else(|| RdbError::UnknownTable(table.to_owned()))
    };
    for t in &s.tables {
        let is_predicate = t.kind.is_some() || !t.foreign_keys.is_empty();
        if !is_predicate {
            let mut attributes = Vec::new();
            for c in &t.columns {
                if c.name == t.primary_key || c.name == "name" {
                    continue;
                }
                let attribute = match t.folds.iter().find(|f| f.column == c.name) {
                    Some(f) => Attribute {
                        name: f.label.clone(),
                        type_name: match &f.result {
                            Some(r) => label(r)?,
                            None => DEFAULT_ATTRIBUTE_TYPE.to_owned(),
                        },
                        folded: Some(FoldedCharacteristic {
                            role: f.role,
                            has_result: f.result.is_some(),
                        }),
                    },
                    None => Attribute {
                        name: c.name.clone(),
                        type_name: DEFAULT_ATTRIBUTE_TYPE.to_owned(),
                        folded: None,
                    },
                };
                attributes.push(attribute);
            }
            u.classifiers.push(Classifier {
                name: t.display_name().to_owned(),
                stereotype: None,
                attributes,
            });
            continue;
        }
        u.classifiers.push(Classifier {
            name: t.display_name().to_owned(),
            stereotype: Some(t.kind.unwrap_or(PredicateKind::Event)),
            attributes: Vec::new(),
        });
        for fk in &t.foreign_keys {
            let role = fk
                .column
                .strip_suffix("_id")
                .and_then(Role::from_long)
                .ok_or_else(|| RdbError::UnknownRole(fk.column.clone()))?;
            u.associations.push(Association {
                source: t.display_name().to_owned(),
                target: label(&fk.references)?,
                role: role.long().to_owned(),
            });
        }
    }
    for row in &s.seed_rows {
        let name = row
            .columns
            .iter()
            .zip(&row.values)
            .find_map(|(c, v)| match v {
                Literal::Text(s) if c == "name" => Some(s.clone()),
                _ => None,
            });
        if let Some(name) = name {
            u.instances.push(Instance {
                name,
                classifier: label(&row.table)?,
            });
        }
    }
    Ok(u)
}

/// Rebuilds a frame model from a relational schema.
pub fn schema_to_frames(s: &RelationalSchema) -> Result<Model, RdbError> {
    Ok(from_uml(&schema_to_uml(s)?)?)
}
