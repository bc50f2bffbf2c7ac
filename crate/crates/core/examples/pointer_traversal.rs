use std::collections::BTreeMap;

use cognate::catalog::NormalizeOptions;
use cognate::cognate::RegressionWeights;
use cognate::grouping::Payload;
use cognate::pooling::{
    export_graph, record_cycle, traverse, DomainChannel, GraphFormat, LinearPointer, SearchCycleLog, VisitGraph,
};

fn main() {
    let opts = NormalizeOptions::default();
    let payloads: BTreeMap<&str, Payload> = [
        ("accidents.Accident_Date", "Accident_Date"),
        ("accidents.Road_Type", "Road_Type"),
        ("accidents.Speed_Limit", "Speed_Limit"),
        ("transport.Date", "Date"),
        ("transport.Road_Type", "Road_Type"),
    ]
    .into_iter()
    .map(|(id, name)| (id, Payload::from_text(name, &opts)))
    .collect();

    let target = DomainChannel {
        domain_label: "accidents".into(),
        center_ids: vec![
            "accidents.Accident_Date".into(),
            "accidents.Road_Type".into(),
            "accidents.Speed_Limit".into(),
        ],
    };

    let w = RegressionWeights::default();
    let mut log = SearchCycleLog::new();
    let mut graph = VisitGraph::default();
    for center in ["transport.Date", "transport.Road_Type"] {
        let pointer = LinearPointer {
            id: format!("{center}@accidents"),
            profile: payloads[center].clone(),
            bind_threshold: 80,
        };
        let visits = traverse(&pointer, &target, |profile, node| profile.score(&payloads[node], &w));
        for v in &visits {
            println!("{:<32} {:<24} {:>3} {:?}", v.pointer_id, v.visited_node_id, v.score, v.action);
        }
        let no = record_cycle(&mut log, &mut graph, "transport", "accidents", visits);
        println!("cycle {no}\n");
    }

    print!("{}", export_graph(&graph, GraphFormat::Dot));
}
