use std::fmt::Write as _;

use super::{mean_std, Task};

/// Per-fold AUCs of one method on one task.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: Task,
    pub method: String,
    pub fold_aucs: Vec<f64>,
    /// Hyperparameters chosen per outer fold.
    pub chosen: Vec<String>,
    pub mean: f64,
    pub std: f64,
}

impl EvalReport {
    pub fn new(task: Task, method: &str, fold_aucs: Vec<f64>, chosen: Vec<String>) -> Self {
        let (mean, std) = mean_std(&fold_aucs);
        Self { task, method: method.to_string(), fold_aucs, chosen, mean, std }
    }

    pub fn cell(&self) -> String {
        format_cell(self.mean, self.std)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("task {}  method {}\n", self.task, self.method);
        for (f, (a, c)) in self.fold_aucs.iter().zip(&self.chosen).enumerate() {
            let _ = writeln!(s, "  fold {f}  auc {a:.4}  config {c}");
        }
        let _ = writeln!(s, "  mean {:.4}  std {:.4}  -> {}", self.mean, self.std, self.cell());
        s
    }

    /// Long-form rows `task,method,fold,auc`, then `mean` and `std` rows.
    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for (f, a) in self.fold_aucs.iter().enumerate() {
            let _ = writeln!(s, "{},{},{f},{a:.6}", self.task, self.method);
        }
        let _ = writeln!(s, "{},{},mean,{:.6}", self.task, self.method, self.mean);
        let _ = writeln!(s, "{},{},std,{:.6}", self.task, self.method, self.std);
        s
    }

    pub fn to_csv(&self) -> String {
        format!("task,method,fold,auc\n{}", self.csv_rows())
    }
}

/// Benchmark table cell: `mean (std)` with two decimals.
pub fn format_cell(mean: f64, std: f64) -> String {
    format!("{mean:.2} ({std:.2})")
}

/// Methods as rows, tasks as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkTable {
    pub methods: Vec<String>,
    pub tasks: Vec<Task>,
    /// `cells[m][t]`.
    pub reports: Vec<Vec<EvalReport>>,
}

impl BenchmarkTable {
    pub fn get(&self, method: &str, task: Task) -> Option<&EvalReport> {
        let m = self.methods.iter().position(|x| x == method)?;
        let t = self.tasks.iter().position(|&x| x == task)?;
        Some(&self.reports[m][t])
    }

    pub fn to_text(&self) -> String {
        let w0 = self.methods.iter().map(|m| m.len()).max().unwrap_or(0).max(6);
        let mut s = format!("{:w0$}", "method");
        for t in &self.tasks {
            let _ = write!(s, "  {:>12}", t.token());
        }
        s.push('\n');
        for (m, row) in self.methods.iter().zip(&self.reports) {
            let _ = write!(s, "{m:w0$}");
            for r in row {
                let _ = write!(s, "  {:>12}", r.cell());
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("task,method,fold,auc\n");
        for row in &self.reports {
            for r in row {
                s.push_str(&r.csv_rows());
            }
        }
        s
    }
}

/// Arranges reports into a table; methods and tasks keep first-seen order.
pub fn benchmark_table(reports: Vec<EvalReport>) -> BenchmarkTable {
    let mut methods: Vec<String> = Vec::new();
    let mut tasks: Vec<Task> = Vec::new();
    for r in &reports {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
        if !tasks.contains(&r.task) {
            tasks.push(r.task);
        }
    }
    let mut grid: Vec<Vec<Option<EvalReport>>> = vec![vec![None; tasks.len()]; methods.len()];
    for r in reports {
        let m = methods.iter().position(|x| *x == r.method).unwrap();
        let t = tasks.iter().position(|&x| x == r.task).unwrap();
        grid[m][t] = Some(r);
    }
    let reports = grid
        .into_iter()
        .map(|row| row.into_iter().map(|r| r.expect("every method runs every task")).collect())
        .collect();
    BenchmarkTable { methods, tasks, reports }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_format() {
        assert_eq!(format_cell(0.7321, 0.0812), "0.73 (0.08)");
    }

    #[test]
    fn single_task_table() {
        let r = EvalReport::new(Task::PdVsHc, "SLIM all", vec![0.8, 0.9], vec!["a".into(), "b".into()]);
        let t = benchmark_table(vec![r]);
        assert_eq!(t.tasks, vec![Task::PdVsHc]);
        let text = t.to_text();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("0.85 (0.05)"));
    }
}
