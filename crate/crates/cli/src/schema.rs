//! Structural validation of the emitted JSON documents against the shapes
//! documented in schemas/. Mirrors schemas/result.v1.schema.json,
//! schemas/checkpoint.v1.schema.json, and schemas/sweep_index.v1.schema.json;
//! change those files and this module together.

use serde_json::Value;

type Check = Result<(), Vec<String>>;

fn fail(problems: Vec<String>) -> Check {
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

fn check_keys(v: &Value, ctx: &str, required: &[&str], problems: &mut Vec<String>) {
    let Some(map) = v.as_object() else {
        problems.push(format!("{ctx}: expected an object"));
        return;
    };
    for key in required {
        if !map.contains_key(*key) {
            problems.push(format!("{ctx}: missing key `{key}`"));
        }
    }
    for key in map.keys() {
        if !required.contains(&key.as_str()) {
            problems.push(format!("{ctx}: unexpected key `{key}`"));
        }
    }
}

fn check_uint(v: &Value, ctx: &str, key: &str, problems: &mut Vec<String>) {
    if v.get(key).is_some_and(|x| x.as_u64().is_some()) {
    } else if v.get(key).is_some() {
        problems.push(format!("{ctx}.{key}: expected a non-negative integer"));
    }
}

fn check_num(v: &Value, ctx: &str, key: &str, problems: &mut Vec<String>) {
    if v.get(key).is_some_and(|x| x.as_f64().is_some()) {
    } else if v.get(key).is_some() {
        problems.push(format!("{ctx}.{key}: expected a number"));
    }
}

fn check_num_or_null(v: &Value, ctx: &str, key: &str, problems: &mut Vec<String>) {
    if v.get(key).is_some_and(|x| x.is_null() || x.as_f64().is_some()) {
    } else if v.get(key).is_some() {
        problems.push(format!("{ctx}.{key}: expected a number or null"));
    }
}

fn check_str(v: &Value, ctx: &str, key: &str, problems: &mut Vec<String>) {
    if v.get(key).is_some_and(|x| x.is_string()) {
    } else if v.get(key).is_some() {
        problems.push(format!("{ctx}.{key}: expected a string"));
    }
}

fn check_str_or_null(v: &Value, ctx: &str, key: &str, problems: &mut Vec<String>) {
    if v.get(key).is_some_and(|x| x.is_null() || x.is_string()) {
    } else if v.get(key).is_some() {
        problems.push(format!("{ctx}.{key}: expected a string or null"));
    }
}

fn check_num_array(v: &Value, ctx: &str, key: &str, problems: &mut Vec<String>) {
    match v.get(key) {
        Some(Value::Array(items)) => {
            if !items.iter().all(|x| x.as_f64().is_some()) {
                problems.push(format!("{ctx}.{key}: expected an array of numbers"));
            }
        }
        Some(_) => problems.push(format!("{ctx}.{key}: expected an array")),
        None => {}
    }
}

fn check_version(v: &Value, expected: u64, problems: &mut Vec<String>) {
    match v.get("schema_version").and_then(Value::as_u64) {
        Some(n) if n == expected => {}
        Some(n) => problems.push(format!("schema_version: {n}, expected {expected}")),
        None => problems.push("schema_version: missing or not an integer".into()),
    }
}

fn check_stats(v: &Value, ctx: &str, problems: &mut Vec<String>) {
    check_keys(v, ctx, &["mean", "std", "per_seed"], problems);
    check_num(v, ctx, "mean", problems);
    check_num(v, ctx, "std", problems);
    check_num_array(v, ctx, "per_seed", problems);
}

pub fn validate_result(v: &Value) -> Check {
    let mut problems = Vec::new();
    check_keys(
        v,
        "result",
        &[
            "schema_version",
            "dataset",
            "config",
            "per_seed",
            "summary",
            "warnings",
            "started_at_unix",
            "wall_time_s",
        ],
        &mut problems,
    );
    check_version(v, 1, &mut problems);
    if let Some(ds) = v.get("dataset") {
        check_keys(
            ds,
            "dataset",
            &["name", "path", "n_rows", "n_features", "n_anomalies"],
            &mut problems,
        );
        check_str(ds, "dataset", "name", &mut problems);
        check_str(ds, "dataset", "path", &mut problems);
        for key in ["n_rows", "n_features", "n_anomalies"] {
            check_uint(ds, "dataset", key, &mut problems);
        }
    }
    if let Some(cfg) = v.get("config") {
        if !cfg.is_object() {
            problems.push("config: expected an object".into());
        }
    }
    match v.get("per_seed") {
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                let ctx = format!("per_seed[{i}]");
                check_keys(
                    item,
                    &ctx,
                    &[
                        "seed",
                        "train_rows",
                        "eval_rows",
                        "final_loss",
                        "pr_auc",
                        "roc_auc",
                        "checkpoint",
                        "error",
                    ],
                    &mut problems,
                );
                check_uint(item, &ctx, "seed", &mut problems);
                check_uint(item, &ctx, "train_rows", &mut problems);
                check_uint(item, &ctx, "eval_rows", &mut problems);
                check_num(item, &ctx, "final_loss", &mut problems);
                check_num_or_null(item, &ctx, "pr_auc", &mut problems);
                check_num_or_null(item, &ctx, "roc_auc", &mut problems);
                check_str(item, &ctx, "checkpoint", &mut problems);
                check_str_or_null(item, &ctx, "error", &mut problems);
            }
        }
        Some(_) => problems.push("per_seed: expected an array".into()),
        None => {}
    }
    if let Some(summary) = v.get("summary") {
        check_keys(summary, "summary", &["pr_auc", "roc_auc"], &mut problems);
        if let Some(s) = summary.get("pr_auc") {
            check_stats(s, "summary.pr_auc", &mut problems);
        }
        if let Some(s) = summary.get("roc_auc") {
            check_stats(s, "summary.roc_auc", &mut problems);
        }
    }
    match v.get("warnings") {
        Some(Value::Array(items)) => {
            if !items.iter().all(Value::is_string) {
                problems.push("warnings: expected an array of strings".into());
            }
        }
        Some(_) => problems.push("warnings: expected an array".into()),
        None => {}
    }
    check_uint(v, "result", "started_at_unix", &mut problems);
    check_num(v, "result", "wall_time_s", &mut problems);
    fail(problems)
}

pub fn validate_checkpoint(v: &Value) -> Check {
    let mut problems = Vec::new();
    check_keys(
        v,
        "checkpoint",
        &["schema_version", "model", "schedule", "train", "loss_trace", "layers"],
        &mut problems,
    );
    check_version(v, 1, &mut problems);
    if let Some(model) = v.get("model") {
        check_keys(
            model,
            "model",
            &[
                "input_dim",
                "n_hidden_layers",
                "hidden_width",
                "latent_dim",
                "embed_dim",
                "leaky_slope",
            ],
            &mut problems,
        );
        for key in ["input_dim", "n_hidden_layers", "hidden_width", "latent_dim", "embed_dim"] {
            check_uint(model, "model", key, &mut problems);
        }
        check_num(model, "model", "leaky_slope", &mut problems);
    }
    if let Some(schedule) = v.get("schedule") {
        check_keys(
            schedule,
            "schedule",
            &["kind", "diffusion_steps", "beta_min", "beta_max", "cosine_offset"],
            &mut problems,
        );
        check_str(schedule, "schedule", "kind", &mut problems);
        check_uint(schedule, "schedule", "diffusion_steps", &mut problems);
        for key in ["beta_min", "beta_max", "cosine_offset"] {
            check_num(schedule, "schedule", key, &mut problems);
        }
    }
    if let Some(train) = v.get("train") {
        check_keys(
            train,
            "train",
            &["variant", "lr", "alpha", "epochs", "batch_size", "dae_sigma", "seed"],
            &mut problems,
        );
        check_str(train, "train", "variant", &mut problems);
        for key in ["lr", "alpha", "dae_sigma"] {
            check_num(train, "train", key, &mut problems);
        }
        for key in ["epochs", "batch_size", "seed"] {
            check_uint(train, "train", key, &mut problems);
        }
    }
    check_num_array(v, "checkpoint", "loss_trace", &mut problems);
    match v.get("layers") {
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                let ctx = format!("layers[{i}]");
                check_keys(item, &ctx, &["w", "b"], &mut problems);
                check_num_array(item, &ctx, "w", &mut problems);
                check_num_array(item, &ctx, "b", &mut problems);
            }
        }
        Some(_) => problems.push("layers: expected an array".into()),
        None => {}
    }
    fail(problems)
}

pub fn validate_sweep_index(v: &Value) -> Check {
    let mut problems = Vec::new();
    check_keys(v, "sweep_index", &["schema_version", "axes", "cells"], &mut problems);
    check_version(v, 1, &mut problems);
    if v.get("axes").is_some_and(|a| !a.is_object()) {
        problems.push("axes: expected an object".into());
    }
    match v.get("cells") {
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                let ctx = format!("cells[{i}]");
                check_keys(item, &ctx, &["id", "values", "result", "status", "error"], &mut problems);
                check_str(item, &ctx, "id", &mut problems);
                check_str(item, &ctx, "result", &mut problems);
                check_str_or_null(item, &ctx, "error", &mut problems);
                if item.get("values").is_some_and(|x| !x.is_object()) {
                    problems.push(format!("{ctx}.values: expected an object"));
                }
                match item.get("status").and_then(Value::as_str) {
                    Some("completed" | "skipped" | "failed") => {}
                    Some(other) => problems.push(format!("{ctx}.status: unknown value `{other}`")),
                    None => problems.push(format!("{ctx}.status: expected a string")),
                }
            }
        }
        Some(_) => problems.push("cells: expected an array".into()),
        None => {}
    }
    fail(problems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn minimal_valid_result_passes() {
        let v = json!({
            "schema_version": 1,
            "dataset": {"name": "x", "path": "d/x.csv", "n_rows": 3, "n_features": 2, "n_anomalies": 1},
            "config": {"dataset": "d/x.csv"},
            "per_seed": [{
                "seed": 0, "train_rows": 3, "eval_rows": 3, "final_loss": 0.5,
                "pr_auc": 0.9, "roc_auc": 0.8, "checkpoint": "c.json", "error": null
            }],
            "summary": {
                "pr_auc": {"mean": 0.9, "std": 0.0, "per_seed": [0.9]},
                "roc_auc": {"mean": 0.8, "std": 0.0, "per_seed": [0.8]}
            },
            "warnings": [],
            "started_at_unix": 1700000000u64,
            "wall_time_s": 1.5
        });
        validate_result(&v).unwrap();
    }

    #[test]
    fn result_problems_are_all_reported() {
        let v = json!({
            "schema_version": 2,
            "dataset": {"name": 5, "path": "p", "n_rows": 1, "n_features": 1, "n_anomalies": 0},
            "config": {},
            "per_seed": [],
            "summary": {"pr_auc": {"mean": 0.1, "std": 0.0, "per_seed": []}, "roc_auc": {"mean": 0.1, "std": 0.0, "per_seed": []}},
            "warnings": [],
            "started_at_unix": 0,
            "wall_time_s": 0.0,
            "extra": true
        });
        let problems = validate_result(&v).unwrap_err();
        let text = problems.join("\n");
        assert!(text.contains("schema_version"), "{text}");
        assert!(text.contains("unexpected key `extra`"), "{text}");
        assert!(text.contains("dataset.name"), "{text}");
    }

    #[test]
    fn sweep_index_statuses_are_constrained() {
        let v = json!({
            "schema_version": 1,
            "axes": {"diffusion_steps": [5, 100]},
            "cells": [
                {"id": "000", "values": {"diffusion_steps": 5}, "result": "cells/000/result.json", "status": "completed", "error": null},
                {"id": "001", "values": {"diffusion_steps": 100}, "result": "cells/001/result.json", "status": "later", "error": null}
            ]
        });
        let problems = validate_sweep_index(&v).unwrap_err();
        assert!(problems.iter().any(|p| p.contains("cells[1].status")), "{problems:?}");
    }
}
