//! From a CSV of hypotheses to a CSV of decisions, without the command-line tool.

use epbh::procedures::{Procedure, ProcedureConfig};
use epbh::values::{format_real, validate_inputs, HypothesisRecord};

const INPUT: &str = "id,p,e
geneA,0.0004,3.2
geneB,0.011,
geneC,0.02,75
geneD,0.4,0.1
geneE,,250
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut reader = csv::Reader::from_reader(INPUT.as_bytes());
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let num = |s: &str| if s.is_empty() { None } else { s.parse::<f64>().ok() };
        records.push(HypothesisRecord::new(&row[0], num(&row[1]), num(&row[2])));
    }
    let inputs = validate_inputs(&records)?;

    // geneE has no p-value, so only e-value procedures apply to the full set
    let cfg = ProcedureConfig::new(0.1)?;
    let res = Procedure::EBh.run(None, &inputs.e, &cfg)?;
    let mut out = csv::Writer::from_writer(std::io::stdout());
    out.write_record(["id", "e", "rejected"])?;
    for (i, id) in inputs.ids.iter().enumerate() {
        out.write_record([id.as_str(), &format_real(inputs.e[i]), &res.is_rejected(i).to_string()])?;
    }
    out.flush()?;
    Ok(())
}
