//! Tab-separated file formats.
//!
//! All files are UTF-8, tab separated, `\n` terminated, with the literal
//! `NA` for missing values.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::data::{GenotypeVector, Sex};
use crate::error::{JlsError, Result};
use crate::geneset::GeneSet;

pub const MISSING: &str = "NA";

pub const RESULTS_HEADER: [&str; 11] = [
    "variant_id",
    "chrom",
    "n_used",
    "p_loc",
    "p_scale",
    "w_fisher",
    "p_fisher",
    "w_minp",
    "p_minp",
    "p_lrt",
    "status",
];

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> JlsError {
    JlsError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| JlsError::io(path, e))
}

fn lines_of(path: &Path) -> Result<Vec<String>> {
    open(path)?
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| JlsError::io(path, e))
}

/// Phenotype file contents.
#[derive(Debug, Clone, PartialEq)]
pub struct PhenotypeTable {
    pub trait_name: String,
    pub sample_ids: Vec<String>,
    pub values: Vec<Option<f64>>,
    pub sexes: Vec<Sex>,
    pub has_sex: bool,
}

impl PhenotypeTable {
    pub fn sex_by_id(&self) -> HashMap<String, Sex> {
        self.sample_ids
            .iter()
            .cloned()
            .zip(self.sexes.iter().copied())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_ids.is_empty()
    }
}

fn parse_value(field: &str) -> Option<Option<f64>> {
    if field == MISSING {
        return Some(None);
    }
    field.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
}

/// Reads `sample_id<TAB>trait[<TAB>sex]`.
pub fn load_phenotypes(path: impl AsRef<Path>) -> Result<PhenotypeTable> {
    let path = path.as_ref();
    let lines = lines_of(path)?;
    let mut iter = lines.iter().enumerate();
    let header = match iter.next() {
        Some((_, h)) => h,
        None => return Err(parse_err(path, 1, "empty phenotype file")),
    };
    let cols: Vec<&str> = header.split('\t').collect();
    let has_sex = match cols.as_slice() {
        ["sample_id", _] => false,
        ["sample_id", _, "sex"] => true,
        _ => {
            return Err(parse_err(
                path,
                1,
                "header must be sample_id<TAB>phenotype with an optional <TAB>sex column",
            ))
        }
    };
    let mut table = PhenotypeTable {
        trait_name: cols[1].to_string(),
        sample_ids: Vec::new(),
        values: Vec::new(),
        sexes: Vec::new(),
        has_sex,
    };
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in iter {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != cols.len() {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {} fields, found {}", cols.len(), fields.len()),
            ));
        }
        let id = fields[0];
        if let Some(first) = seen.insert(id.to_string(), lineno) {
            return Err(parse_err(
                path,
                lineno,
                format!("duplicate sample id {id} (first seen on line {first})"),
            ));
        }
        let value = parse_value(fields[1])
            .ok_or_else(|| parse_err(path, lineno, format!("cannot parse phenotype value {:?}", fields[1])))?;
        table.sample_ids.push(id.to_string());
        table.values.push(value);
        table.sexes.push(if has_sex { Sex::from_code(fields[2]) } else { Sex::Unknown });
    }
    Ok(table)
}

/// Writes a phenotype table in the same format it is read.
pub fn write_phenotypes_to<W: Write>(table: &PhenotypeTable, mut w: W) -> std::io::Result<()> {
    let sex_code = |s: Sex| match s {
        Sex::Male => "1",
        Sex::Female => "2",
        Sex::Unknown => MISSING,
    };
    if table.has_sex {
        writeln!(w, "sample_id\t{}\tsex", table.trait_name)?;
    } else {
        writeln!(w, "sample_id\t{}", table.trait_name)?;
    }
    for i in 0..table.len() {
        let v = table.values[i].map_or_else(|| MISSING.to_string(), |v| format!("{v}"));
        if table.has_sex {
            writeln!(w, "{}\t{}\t{}", table.sample_ids[i], v, sex_code(table.sexes[i]))?;
        } else {
            writeln!(w, "{}\t{}", table.sample_ids[i], v)?;
        }
    }
    w.flush()
}

pub fn write_phenotypes(table: &PhenotypeTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_phenotypes_to(table, create(path)?).map_err(|e| JlsError::io(path, e))
}

/// Variants by samples, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct GenotypeMatrix {
    pub sample_ids: Vec<String>,
    pub variants: Vec<GenotypeVector>,
    index: HashMap<String, usize>,
}

impl GenotypeMatrix {
    pub fn new(sample_ids: Vec<String>, variants: Vec<GenotypeVector>) -> Result<Self> {
        let mut index = HashMap::with_capacity(variants.len());
        for (i, v) in variants.iter().enumerate() {
            if v.len() != sample_ids.len() {
                return Err(JlsError::Validation(format!(
                    "variant {} has {} genotypes for {} samples",
                    v.variant_id,
                    v.len(),
                    sample_ids.len()
                )));
            }
            if index.insert(v.variant_id.clone(), i).is_some() {
                return Err(JlsError::Validation(format!("duplicate variant id {}", v.variant_id)));
            }
        }
        Ok(GenotypeMatrix {
            sample_ids,
            variants,
            index,
        })
    }

    pub fn get(&self, variant_id: &str) -> Option<&GenotypeVector> {
        self.index.get(variant_id).map(|&i| &self.variants[i])
    }

    pub fn position(&self, variant_id: &str) -> Option<usize> {
        self.index.get(variant_id).copied()
    }
}

/// Reads `variant_id<TAB>chrom<TAB>g_1 ... g_n` rows under a header naming
/// the samples. With `sexes`, X-chromosome rows are checked for male
/// heterozygotes.
pub fn load_genotypes(path: impl AsRef<Path>, sexes: Option<&HashMap<String, Sex>>) -> Result<GenotypeMatrix> {
    let path = path.as_ref();
    let reader = open(path)?;
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, h)) => h.map_err(|e| JlsError::io(path, e))?,
        None => return Err(parse_err(path, 1, "empty genotype file")),
    };
    let cols: Vec<&str> = header.split('\t').collect();
    if cols.len() < 3 || cols[0] != "variant_id" || cols[1] != "chrom" {
        return Err(parse_err(
            path,
            1,
            "header must be variant_id<TAB>chrom<TAB>sample ids...",
        ));
    }
    let sample_ids: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
    let mut seen = HashSet::new();
    for id in &sample_ids {
        if !seen.insert(id.as_str()) {
            return Err(parse_err(path, 1, format!("duplicate sample id {id} in header")));
        }
    }
    let sample_sex: Vec<Sex> = sample_ids
        .iter()
        .map(|id| sexes.and_then(|m| m.get(id).copied()).unwrap_or_default())
        .collect();
    let mut variants: Vec<GenotypeVector> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| JlsError::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != sample_ids.len() + 2 {
            return Err(parse_err(
                path,
                lineno,
                format!(
                    "expected {} genotype columns to match the header, found {}",
                    sample_ids.len(),
                    fields.len().saturating_sub(2)
                ),
            ));
        }
        let mut codes = Vec::with_capacity(sample_ids.len());
        for (j, f) in fields[2..].iter().enumerate() {
            codes.push(match *f {
                "0" => Some(0u8),
                "1" => Some(1),
                "2" => Some(2),
                MISSING => None,
                other => {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!(
                            "variant {}: genotype {other:?} for sample {} is not 0, 1, 2 or NA",
                            fields[0], sample_ids[j]
                        ),
                    ))
                }
            });
        }
        let variant = GenotypeVector::new(fields[0], fields[1], codes)
            .map_err(|e| parse_err(path, lineno, e.to_string()))?;
        if sexes.is_some() {
            variant
                .check_hemizygous(&sample_sex, &sample_ids)
                .map_err(|e| parse_err(path, lineno, e.to_string()))?;
        }
        if let Some(prev) = index.insert(variant.variant_id.clone(), variants.len()) {
            return Err(parse_err(
                path,
                lineno,
                format!("duplicate variant id {} (also row {})", variant.variant_id, prev + 2),
            ));
        }
        variants.push(variant);
    }
    Ok(GenotypeMatrix {
        sample_ids,
        variants,
        index,
    })
}

/// Writes a genotype matrix in the format [`load_genotypes`] reads.
pub fn write_genotypes(matrix: &GenotypeMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| JlsError::io(path, e);
    write!(w, "variant_id\tchrom").map_err(io)?;
    for id in &matrix.sample_ids {
        write!(w, "\t{id}").map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for v in &matrix.variants {
        write!(w, "{}\t{}", v.variant_id, v.chrom).map_err(io)?;
        for c in v.codes() {
            match c {
                Some(g) => write!(w, "\t{g}"),
                None => write!(w, "\t{MISSING}"),
            }
            .map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads GMT-style `set_id<TAB>description<TAB>variant ids...` lines.
pub fn load_genesets(path: impl AsRef<Path>) -> Result<Vec<GeneSet>> {
    let path = path.as_ref();
    let mut sets: Vec<GeneSet> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in lines_of(path)?.iter().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err(parse_err(path, lineno, "expected set_id<TAB>description<TAB>variant ids"));
        }
        let ids: Vec<String> = fields[2..]
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| f.to_string())
            .collect();
        let set = GeneSet::new(fields[0], fields[1], ids).map_err(|e| parse_err(path, lineno, e.to_string()))?;
        if let Some(first) = seen.insert(set.set_id.clone(), lineno) {
            return Err(parse_err(
                path,
                lineno,
                format!("duplicate gene set id {} (first on line {first})", set.set_id),
            ));
        }
        sets.push(set);
    }
    Ok(sets)
}

/// A gene set matched against a genotype matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSet {
    pub set: GeneSet,
    /// Matrix rows of the resolvable variants, in set order.
    pub rows: Vec<usize>,
    pub unresolved: Vec<String>,
}

pub fn resolve_geneset(set: &GeneSet, matrix: &GenotypeMatrix) -> Result<ResolvedSet> {
    let mut rows = Vec::new();
    let mut unresolved = Vec::new();
    for id in &set.variant_ids {
        match matrix.position(id) {
            Some(r) => rows.push(r),
            None => unresolved.push(id.clone()),
        }
    }
    if rows.is_empty() {
        return Err(JlsError::Validation(format!(
            "gene set {}: none of its {} variants are in the genotype file",
            set.set_id,
            set.variant_ids.len()
        )));
    }
    Ok(ResolvedSet {
        set: set.clone(),
        rows,
        unresolved,
    })
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub variant_id: String,
    pub chrom: String,
    pub n_used: usize,
    pub p_loc: Option<f64>,
    pub p_scale: Option<f64>,
    pub w_fisher: Option<f64>,
    pub p_fisher: Option<f64>,
    pub w_minp: Option<f64>,
    pub p_minp: Option<f64>,
    pub p_lrt: Option<f64>,
    pub status: String,
}

/// Scientific notation with six digits after the decimal point.
pub fn format_real(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6e}"),
        None => MISSING.to_string(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| JlsError::io(path, e))
}

pub fn write_results_to<W: Write>(records: &[ResultRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", RESULTS_HEADER.join("\t"))?;
    for r in records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.variant_id,
            r.chrom,
            r.n_used,
            format_real(r.p_loc),
            format_real(r.p_scale),
            format_real(r.w_fisher),
            format_real(r.p_fisher),
            format_real(r.w_minp),
            format_real(r.p_minp),
            format_real(r.p_lrt),
            r.status
        )?;
    }
    w.flush()
}

pub fn write_results(records: &[ResultRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_results_to(records, create(path)?).map_err(|e| JlsError::io(path, e))
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let path = path.as_ref();
    let lines = lines_of(path)?;
    match lines.first() {
        Some(h) if h.split('\t').eq(RESULTS_HEADER.iter().copied()) => {}
        _ => return Err(parse_err(path, 1, "not a results file header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != RESULTS_HEADER.len() {
            return Err(parse_err(path, lineno, format!("expected 11 fields, found {}", f.len())));
        }
        let real = |s: &str| -> Result<Option<f64>> {
            parse_value(s).ok_or_else(|| parse_err(path, lineno, format!("cannot parse {s:?}")))
        };
        out.push(ResultRecord {
            variant_id: f[0].to_string(),
            chrom: f[1].to_string(),
            n_used: f[2]
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("cannot parse n_used {:?}", f[2])))?,
            p_loc: real(f[3])?,
            p_scale: real(f[4])?,
            w_fisher: real(f[5])?,
            p_fisher: real(f[6])?,
            w_minp: real(f[7])?,
            p_minp: real(f[8])?,
            p_lrt: real(f[9])?,
            status: f[10].to_string(),
        });
    }
    Ok(out)
}

/// Plain `key = value` configuration lines; `#` starts a comment.
pub fn load_config(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (i, raw) in lines_of(path)?.iter().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, i + 1, "expected key = value"))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(parse_err(path, i + 1, "empty key"));
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// `path` under `dir` when relative and a directory override is given.
pub fn resolve_output(path: &Path, dir: Option<&Path>) -> PathBuf {
    match dir {
        Some(d) if path.is_relative() => d.join(path),
        _ => path.to_path_buf(),
    }
}
