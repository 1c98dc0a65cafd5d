//! `<relation>.facts` directories: UTF-8, LF, tab-separated, no header,
//! no quoting. The layout is the one off-the-shelf Datalog engines read.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::relations::Relation;
use super::store::FactStore;
use super::FactError;

pub const FACTS_EXTENSION: &str = "facts";

fn io_err(path: &Path, source: io::Error) -> FactError {
    FactError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Loads every `<relation>.facts` file found in `dir`. Missing files are
/// empty relations; unrelated files are ignored.
pub fn load_facts_dir(dir: &Path) -> Result<FactStore, FactError> {
    if !dir.is_dir() {
        return Err(io_err(
            dir,
            io::Error::new(io::ErrorKind::NotFound, "facts directory not found"),
        ));
    }
    let mut store = FactStore::new();
    for relation in Relation::ALL {
        let path = dir.join(format!("{}.{FACTS_EXTENSION}", relation.name()));
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => continue,
            Err(e) => return Err(io_err(&path, e)),
        };
        load_relation_text(&mut store, *relation, &text).map_err(|(line, source)| {
            FactError::Parse {
                path: path.clone(),
                line,
                source: Box::new(source),
            }
        })?;
    }
    Ok(store)
}

/// Parses one file's contents into `store`. On failure returns the 1-based
/// line number with the error.
pub fn load_relation_text(
    store: &mut FactStore,
    relation: Relation,
    text: &str,
) -> Result<(), (usize, FactError)> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Ok(());
    }
    let mut columns = Vec::with_capacity(relation.arity());
    for (n, line) in body.split('\n').enumerate() {
        columns.clear();
        columns.extend(line.split('\t'));
        store
            .insert_row(relation, &columns)
            .map_err(|e| (n + 1, e))?;
    }
    Ok(())
}

/// Writes one file per non-empty relation with rows sorted lexicographically.
/// Stale files for relations that are now empty are removed.
pub fn dump_facts_dir(store: &FactStore, dir: &Path) -> Result<(), FactError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for relation in Relation::ALL {
        let path = dir.join(format!("{}.{FACTS_EXTENSION}", relation.name()));
        let rows = store.sorted_rows(*relation);
        if rows.is_empty() {
            match fs::remove_file(&path) {
                Ok(()) => {}
                Err(e) if e.kind() == io::ErrorKind::NotFound => {}
                Err(e) => return Err(io_err(&path, e)),
            }
            continue;
        }
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut out = io::BufWriter::new(file);
        for row in rows {
            out.write_all(row.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| io_err(&path, e))?;
        }
        out.flush().map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}
