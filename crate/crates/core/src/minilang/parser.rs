//! Recursive-descent parser producing [`AstNode`] trees.
//!
//! Node `text` is built by joining the node's own tokens with single
//! spaces, which is the normalization rule the whole crate relies on:
//! artefact values, hashes, and the canonical printer all see this form.
//!
//! Beyond the grammar itself the parser enforces three well-formedness
//! rules that keep identification unambiguous: a compilation unit must not
//! repeat an identical import, a class must not repeat a member with an
//! identical signature-and-initializer text, and a method must not repeat a
//! parameter name. Statements are exempt — repeating a statement is
//! ordinary code and is handled by twin numbering downstream.

use super::lexer::{tokenize, Token, TokenKind};
use super::{AstNode, NodeKind, SourceFile};
use crate::{Result, SplError};

/// Parse one source file into a [`NodeKind::CompilationUnit`] tree.
pub fn parse(file: &SourceFile) -> Result<AstNode> {
    let tokens = tokenize(&file.path, &file.text)?;
    let mut cur = Cursor {
        path: &file.path,
        tokens: &tokens,
        pos: 0,
    };
    let mut unit = AstNode::new(NodeKind::CompilationUnit, "");

    let mut seen_imports: Vec<String> = Vec::new();
    while cur.peek_text() == Some("import") {
        let import = cur.parse_import()?;
        if seen_imports.contains(&import.text) {
            return Err(cur.err_prev(&format!("duplicate import: {}", import.text)));
        }
        seen_imports.push(import.text.clone());
        unit.children.push(import);
    }

    unit.children.push(cur.parse_class()?);
    if let Some(tok) = cur.current() {
        return Err(cur.err_at(tok, "expected end of file after class declaration"));
    }
    Ok(unit)
}

struct Cursor<'a> {
    path: &'a str,
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn current(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_text(&self) -> Option<&'a str> {
        self.current().map(|t| t.text.as_str())
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, tok: &Token, message: &str) -> SplError {
        SplError::Syntax {
            path: self.path.to_string(),
            line: tok.line,
            column: tok.column,
            message: message.to_string(),
        }
    }

    /// Error positioned at the current token, or just past the last one.
    fn err_here(&self, message: &str) -> SplError {
        match self.current() {
            Some(tok) => self.err_at(tok, message),
            None => {
                let (line, column) = self
                    .tokens
                    .last()
                    .map(|t| (t.line, t.column + t.text.chars().count()))
                    .unwrap_or((1, 1));
                SplError::Syntax {
                    path: self.path.to_string(),
                    line,
                    column,
                    message: format!("{message} (unexpected end of file)"),
                }
            }
        }
    }

    /// Error positioned at the most recently consumed token.
    fn err_prev(&self, message: &str) -> SplError {
        match self.tokens.get(self.pos.saturating_sub(1)) {
            Some(tok) => self.err_at(tok, message),
            None => self.err_here(message),
        }
    }

    fn expect(&mut self, text: &str) -> Result<&'a Token> {
        match self.current() {
            Some(tok) if tok.text == text => Ok(self.bump().unwrap()),
            _ => Err(self.err_here(&format!("expected {text:?}"))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<&'a Token> {
        match self.current() {
            Some(tok) if tok.kind == TokenKind::Ident && !is_keyword(&tok.text) => {
                Ok(self.bump().unwrap())
            }
            _ => Err(self.err_here(&format!("expected {what}"))),
        }
    }

    fn parse_import(&mut self) -> Result<AstNode> {
        let mut parts = vec![self.expect("import")?.text.clone()];
        parts.push(self.expect_ident("package name")?.text.clone());
        while self.peek_text() == Some(".") {
            parts.push(self.bump().unwrap().text.clone());
            if self.peek_text() == Some("*") {
                parts.push(self.bump().unwrap().text.clone());
                break;
            }
            parts.push(self.expect_ident("package segment")?.text.clone());
        }
        parts.push(self.expect(";")?.text.clone());
        Ok(AstNode::new(NodeKind::Import, parts.join(" ")))
    }

    fn parse_class(&mut self) -> Result<AstNode> {
        self.expect("class")?;
        let name = self.expect_ident("class name")?;
        let mut class = AstNode::new(NodeKind::ClassDecl, format!("class {}", name.text));
        self.expect("{")?;
        let mut seen_members: Vec<String> = Vec::new();
        while self.peek_text() != Some("}") {
            let member = self.parse_member()?;
            if seen_members.contains(&member.text) {
                return Err(self.err_prev(&format!("duplicate member: {}", member.text)));
            }
            seen_members.push(member.text.clone());
            class.children.push(member);
        }
        self.expect("}")?;
        Ok(class)
    }

    /// Dotted type name, e.g. `java . lang . String`, as a token list.
    fn parse_type(&mut self) -> Result<Vec<String>> {
        let mut parts = vec![self.expect_ident("type name")?.text.clone()];
        while self.peek_text() == Some(".") {
            parts.push(self.bump().unwrap().text.clone());
            parts.push(self.expect_ident("type segment")?.text.clone());
        }
        Ok(parts)
    }

    fn parse_member(&mut self) -> Result<AstNode> {
        let mut header = self.parse_type()?;
        header.push(self.expect_ident("member name")?.text.clone());
        match self.peek_text() {
            Some("(") => self.parse_method(header),
            Some("=") | Some(";") => self.parse_field(header),
            _ => Err(self.err_here("expected \"(\", \"=\" or \";\" after member name")),
        }
    }

    fn parse_field(&mut self, mut tokens: Vec<String>) -> Result<AstNode> {
        if self.peek_text() == Some("=") {
            tokens.push(self.bump().unwrap().text.clone());
            let init = self.expr_until_semicolon()?;
            if init.is_empty() {
                return Err(self.err_prev("expected initializer expression"));
            }
            tokens.extend(init);
        }
        tokens.push(self.expect(";")?.text.clone());
        Ok(AstNode::new(NodeKind::FieldDecl, tokens.join(" ")))
    }

    fn parse_method(&mut self, mut header: Vec<String>) -> Result<AstNode> {
        header.push(self.expect("(")?.text.clone());
        let mut params = Vec::new();
        if self.peek_text() != Some(")") {
            loop {
                let mut ptoks = self.parse_type()?;
                ptoks.push(self.expect_ident("parameter name")?.text.clone());
                let ptext = ptoks.join(" ");
                let pname = ptoks.last().unwrap().clone();
                if params
                    .iter()
                    .any(|p: &AstNode| p.text.rsplit(' ').next() == Some(pname.as_str()))
                {
                    return Err(self.err_prev(&format!("duplicate parameter name: {pname}")));
                }
                header.extend(ptoks.iter().cloned());
                params.push(AstNode::new(NodeKind::Param, ptext));
                if self.peek_text() == Some(",") {
                    header.push(self.bump().unwrap().text.clone());
                    continue;
                }
                break;
            }
        }
        header.push(self.expect(")")?.text.clone());
        let mut method = AstNode::new(NodeKind::MethodDecl, header.join(" "));
        method.children = params;
        method.children.push(self.parse_block("")?);
        Ok(method)
    }

    fn parse_block(&mut self, label: &str) -> Result<AstNode> {
        self.expect("{")?;
        let mut block = AstNode::new(NodeKind::Block, label);
        while self.peek_text() != Some("}") {
            if self.current().is_none() {
                return Err(self.err_here("expected \"}\""));
            }
            block.children.push(self.parse_stmt()?);
        }
        self.expect("}")?;
        Ok(block)
    }

    fn parse_stmt(&mut self) -> Result<AstNode> {
        match self.peek_text() {
            Some("if") => {
                let head = self.parse_paren_header("if")?;
                let mut node = AstNode::new(NodeKind::IfStmt, head);
                node.children.push(self.parse_block("")?);
                if self.peek_text() == Some("else") {
                    self.bump();
                    node.children.push(self.parse_block("else")?);
                }
                Ok(node)
            }
            Some("while") => {
                let head = self.parse_paren_header("while")?;
                let mut node = AstNode::new(NodeKind::WhileStmt, head);
                node.children.push(self.parse_block("")?);
                Ok(node)
            }
            Some("for") => {
                let head = self.parse_paren_header("for")?;
                let mut node = AstNode::new(NodeKind::ForStmt, head);
                node.children.push(self.parse_block("")?);
                Ok(node)
            }
            Some("return") => {
                let mut tokens = vec![self.bump().unwrap().text.clone()];
                tokens.extend(self.expr_until_semicolon()?);
                tokens.push(self.expect(";")?.text.clone());
                Ok(AstNode::new(NodeKind::ReturnStmt, tokens.join(" ")))
            }
            Some("else") => Err(self.err_here("\"else\" without a preceding \"if\"")),
            Some(_) => {
                // A bare `;` parses as an empty expression statement.
                let mut tokens = self.expr_until_semicolon()?;
                tokens.push(self.expect(";")?.text.clone());
                Ok(AstNode::new(NodeKind::ExprStmt, tokens.join(" ")))
            }
            None => Err(self.err_here("expected statement")),
        }
    }

    /// `if ( ... )`-style header: keyword plus a balanced parenthesized
    /// token run, returned as normalized text.
    fn parse_paren_header(&mut self, keyword: &str) -> Result<String> {
        let mut tokens = vec![self.expect(keyword)?.text.clone()];
        tokens.push(self.expect("(")?.text.clone());
        let mut depth = 1usize;
        loop {
            let tok = match self.current() {
                Some(t) => t,
                None => return Err(self.err_here("expected \")\"")),
            };
            match tok.text.as_str() {
                "(" => depth += 1,
                ")" => depth -= 1,
                "{" | "}" => {
                    return Err(self.err_at(tok, "braces are not allowed inside a header"))
                }
                t if is_statement_keyword(t) => {
                    return Err(self.err_at(tok, &format!("unexpected keyword {t:?} in header")))
                }
                _ => {}
            }
            tokens.push(tok.text.clone());
            self.bump();
            if depth == 0 {
                break;
            }
        }
        Ok(tokens.join(" "))
    }

    /// Balanced token run terminated by a top-level `;` (not consumed).
    fn expr_until_semicolon(&mut self) -> Result<Vec<String>> {
        let mut tokens = Vec::new();
        let mut depth = 0usize;
        loop {
            let tok = match self.current() {
                Some(t) => t,
                None => return Err(self.err_here("expected \";\"")),
            };
            match tok.text.as_str() {
                ";" if depth == 0 => return Ok(tokens),
                "(" | "[" => depth += 1,
                ")" | "]" => {
                    if depth == 0 {
                        return Err(self.err_at(tok, "unbalanced closing bracket in expression"));
                    }
                    depth -= 1;
                }
                "{" | "}" => {
                    return Err(self.err_at(tok, "braces are not allowed inside an expression"))
                }
                t if is_statement_keyword(t) => {
                    return Err(
                        self.err_at(tok, &format!("unexpected keyword {t:?} in expression"))
                    )
                }
                _ => {}
            }
            tokens.push(tok.text.clone());
            self.bump();
        }
    }
}

fn is_statement_keyword(text: &str) -> bool {
    matches!(text, "if" | "while" | "for" | "return" | "else")
}

fn is_keyword(text: &str) -> bool {
    matches!(
        text,
        "if" | "while" | "for" | "return" | "else" | "class" | "import"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_src(src: &str) -> Result<AstNode> {
        parse(&SourceFile::new("Welcome.java", src).unwrap())
    }

    #[test]
    fn minimal_class_produces_expected_shape() {
        let unit = parse_src("class Welcome { void sayHello(){ print(\"Hello\"); } }").unwrap();
        assert_eq!(unit.kind, NodeKind::CompilationUnit);
        assert_eq!(unit.text, "");
        let class = &unit.children[0];
        assert_eq!((class.kind, class.text.as_str()), (NodeKind::ClassDecl, "class Welcome"));
        let method = &class.children[0];
        assert_eq!(method.text, "void sayHello ( )");
        let block = &method.children[0];
        assert_eq!((block.kind, block.text.as_str()), (NodeKind::Block, ""));
        let stmt = &block.children[0];
        assert_eq!(
            (stmt.kind, stmt.text.as_str()),
            (NodeKind::ExprStmt, "print ( \"Hello\" ) ;")
        );
    }

    #[test]
    fn layout_and_comments_do_not_change_the_tree() {
        let a = parse_src("class A{int x=1;}").unwrap();
        let b = parse_src("class A {\n  // comment\n  int x = 1 ; /* more */\n}").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn repeated_statements_parse_as_distinct_nodes() {
        let unit = parse_src("class A { void m ( ) { x += 1; x += 1; } }").unwrap();
        let block = &unit.children[0].children[0].children[0];
        assert_eq!(block.children.len(), 2);
        assert_eq!(block.children[0], block.children[1]);
    }

    #[test]
    fn control_flow_headers_and_else_blocks() {
        let unit = parse_src(
            "class A { int m (int n) { if (n < 2) { return 1; } else { n--; } \
             while (n > 0) { n -= 1; } for (int i = 0; i < n; i++) { go(i); } return n; } }",
        )
        .unwrap();
        let body = unit.children[0].children[0].children.last().unwrap();
        let ifstmt = &body.children[0];
        assert_eq!(ifstmt.text, "if ( n < 2 )");
        assert_eq!(ifstmt.children.len(), 2);
        assert_eq!(ifstmt.children[0].text, "");
        assert_eq!(ifstmt.children[1].text, "else");
        assert_eq!(body.children[1].text, "while ( n > 0 )");
        assert_eq!(body.children[2].text, "for ( int i = 0 ; i < n ; i ++ )");
        assert_eq!(body.children[3].text, "return n ;");
    }

    #[test]
    fn params_become_children_and_join_the_header() {
        let unit = parse_src("class A { void m (String who, int n) { } }").unwrap();
        let method = &unit.children[0].children[0];
        assert_eq!(method.text, "void m ( String who , int n )");
        assert_eq!(method.children[0].text, "String who");
        assert_eq!(method.children[1].text, "int n");
        assert_eq!(method.children[2].kind, NodeKind::Block);
    }

    #[test]
    fn imports_with_wildcards() {
        let unit = parse_src("import java.util.*; import a.B; class A { }").unwrap();
        assert_eq!(unit.children[0].text, "import java . util . * ;");
        assert_eq!(unit.children[1].text, "import a . B ;");
    }

    #[test]
    fn empty_source_is_a_syntax_error() {
        assert!(matches!(parse_src(""), Err(SplError::Syntax { .. })));
    }

    #[test]
    fn duplicate_import_is_rejected() {
        assert!(parse_src("import a.B; import a.B; class A { }")
            .unwrap_err()
            .to_string()
            .contains("duplicate import"));
    }

    #[test]
    fn duplicate_member_is_rejected() {
        assert!(parse_src("class A { int x = 1 ; int x = 1 ; }")
            .unwrap_err()
            .to_string()
            .contains("duplicate member"));
        // Distinct initializers are fine grammatically; names may repeat.
        assert!(parse_src("class A { int x = 1 ; int x = 2 ; }").is_ok());
    }

    #[test]
    fn duplicate_parameter_name_is_rejected() {
        assert!(parse_src("class A { void m (int a, int a) { } }")
            .unwrap_err()
            .to_string()
            .contains("duplicate parameter"));
    }

    #[test]
    fn trailing_garbage_after_class_is_rejected() {
        assert!(parse_src("class A { } class B { }").is_err());
    }

    #[test]
    fn else_requires_braces() {
        assert!(parse_src("class A { void m ( ) { if (x) { a(); } else b(); } }").is_err());
    }

    #[test]
    fn error_positions_point_at_the_offender() {
        match parse_src("class A { void m ( ) {\n  oops(\n} }") {
            Err(SplError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }
}
