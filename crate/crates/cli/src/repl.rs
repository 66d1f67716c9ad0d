//! Line-oriented REPL. Errors are reported per line and never end the session.

use crate::session::{domain, CliError, Session, DEFAULT_FUEL};
use std::io::{self, BufRead, IsTerminal, Write};
use vecr::syntax::Context;
use vecr::typesys::synthesize;

const HELP: &str = "\
let NAME = EXPR   define NAME for later inputs
:t EXPR           synthesize a type
:r EXPR           normal form (also the default for a bare EXPR)
:w EXPR           weight of a closed term's normal form, or of a type
:trace EXPR       reduction trace
:h                this help
:q                quit";

enum Flow {
    Continue,
    Quit,
}

pub fn run(mut s: Session) {
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut lines = stdin.lock().lines();
    loop {
        if interactive {
            print!("vecr> ");
            let _ = io::stdout().flush();
        }
        let Some(Ok(line)) = lines.next() else { break };
        match eval_line(&mut s, &line) {
            Ok(Flow::Quit) => break,
            Ok(Flow::Continue) => {}
            Err(e) => eprintln!("error: {e}"),
        }
    }
}

fn split_command(line: &str) -> (&str, &str) {
    match line.split_once(char::is_whitespace) {
        Some((cmd, rest)) => (cmd, rest.trim()),
        None => (line, ""),
    }
}

fn eval_line(s: &mut Session, line: &str) -> Result<Flow, CliError> {
    let line = line.trim();
    if line.is_empty() || line.starts_with("--") {
        return Ok(Flow::Continue);
    }
    if let Some(def) = line.strip_prefix("let ") {
        let (name, body) = def
            .split_once('=')
            .ok_or_else(|| CliError::Usage("expected `let NAME = EXPR`".into()))?;
        let name = name.trim();
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
        if !valid {
            return Err(CliError::Usage(format!("invalid name {name:?}")));
        }
        s.define(name, body.trim())?;
        println!("{name} defined");
        return Ok(Flow::Continue);
    }
    let (cmd, arg) = if line.starts_with(':') { split_command(line) } else { (":r", line) };
    let need = |arg: &str| {
        if arg.is_empty() {
            Err(CliError::Usage(format!("{cmd} expects an expression")))
        } else {
            Ok(())
        }
    };
    match cmd {
        ":q" | ":quit" => return Ok(Flow::Quit),
        ":h" | ":help" => println!("{HELP}"),
        ":t" | ":type" => {
            need(arg)?;
            let t = s.closed_term("<input>", arg)?;
            let (ty, _) = synthesize(&Context::new(), &t).map_err(domain)?;
            println!("{}", s.show_type(&ty.to_type()));
        }
        ":r" | ":reduce" => {
            need(arg)?;
            let t = s.term("<input>", arg)?;
            println!("{}", s.show_term(s.reduce(&t, DEFAULT_FUEL)?.last()));
        }
        ":trace" => {
            need(arg)?;
            let t = s.term("<input>", arg)?;
            print!("{}", s.reduce(&t, DEFAULT_FUEL)?.render(&|t| s.show_term(t)));
        }
        ":w" | ":weight" => {
            need(arg)?;
            println!("{}", s.show_scalar(&s.weight("<input>", arg, DEFAULT_FUEL)?));
        }
        other => return Err(CliError::Usage(format!("unknown command {other}; :h lists commands"))),
    }
    Ok(Flow::Continue)
}
