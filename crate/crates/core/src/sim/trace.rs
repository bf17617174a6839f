use super::SimError;

/// Uniform-grid record of one closed-loop run.
///
/// Columns: reference `r`, tracking error `e`, pump command `u` (model
/// units), its variation `delta_u` (see `DeltaUMode`), brain outflow
/// concentration `c_b` in ng/ml, drug effect `y`, plus one ng/ml column
/// per observer channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub step_h: f64,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub e: Vec<f64>,
    pub u: Vec<f64>,
    pub delta_u: Vec<f64>,
    pub c_b: Vec<f64>,
    pub y: Vec<f64>,
    pub observers: Vec<(String, Vec<f64>)>,
}

impl SimulationTrace {
    /// Empty trace ready for `push_sample`; also the entry point for
    /// synthetic traces in oracle tests.
    pub fn with_capacity(step_h: f64, n: usize) -> Self {
        SimulationTrace {
            step_h,
            t: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
            e: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
            delta_u: Vec::with_capacity(n),
            c_b: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            observers: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_sample(
        &mut self,
        t: f64,
        r: f64,
        e: f64,
        u: f64,
        delta_u: f64,
        c_b: f64,
        y: f64,
    ) {
        self.t.push(t);
        self.r.push(r);
        self.e.push(e);
        self.u.push(u);
        self.delta_u.push(delta_u);
        self.c_b.push(c_b);
        self.y.push(y);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.t.len();
        if n == 0 {
            return Err(SimError::MalformedTrace("no samples".to_string()));
        }
        if !self.step_h.is_finite() || self.step_h <= 0.0 {
            return Err(SimError::MalformedTrace(format!(
                "step_h must be positive, got {}",
                self.step_h
            )));
        }
        let cols = [&self.r, &self.e, &self.u, &self.delta_u, &self.c_b, &self.y];
        if cols.iter().any(|c| c.len() != n)
            || self.observers.iter().any(|(_, c)| c.len() != n)
        {
            return Err(SimError::LengthMismatch);
        }
        for col in cols.into_iter().chain(self.observers.iter().map(|(_, c)| c)) {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(SimError::MalformedTrace(
                    "non-finite sample value".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Serializes the trace as CSV with full-precision decimal floats
    /// (shortest representation that round-trips to the same bits).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("t,r,e,u,delta_u,c_b,y");
        for (name, _) in &self.observers {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for k in 0..self.len() {
            use std::fmt::Write;
            write!(
                out,
                "{},{},{},{},{},{},{}",
                self.t[k], self.r[k], self.e[k], self.u[k], self.delta_u[k], self.c_b[k], self.y[k]
            )
            .expect("string write");
            for (_, col) in &self.observers {
                write!(out, ",{}", col[k]).expect("string write");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the `to_csv` format back into a trace.
    pub fn from_csv(text: &str) -> Result<Self, SimError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| SimError::MalformedTrace("empty file".to_string()))?;
        let names: Vec<&str> = header.split(',').collect();
        const FIXED: [&str; 7] = ["t", "r", "e", "u", "delta_u", "c_b", "y"];
        if names.len() < FIXED.len() || names[..FIXED.len()] != FIXED {
            return Err(SimError::MalformedTrace(format!(
                "unexpected header: {header}"
            )));
        }
        let mut trace = SimulationTrace::with_capacity(0.0, 0);
        for name in &names[FIXED.len()..] {
            trace.observers.push((name.to_string(), Vec::new()));
        }
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut next = || -> Result<f64, SimError> {
                fields
                    .next()
                    .ok_or_else(|| {
                        SimError::MalformedTrace(format!("short row at line {}", lineno + 2))
                    })?
                    .parse::<f64>()
                    .map_err(|e| {
                        SimError::MalformedTrace(format!("line {}: {e}", lineno + 2))
                    })
            };
            let t = next()?;
            let r = next()?;
            let e = next()?;
            let u = next()?;
            let du = next()?;
            let c_b = next()?;
            let y = next()?;
            trace.push_sample(t, r, e, u, du, c_b, y);
            for i in 0..trace.observers.len() {
                let v = fields
                    .next()
                    .ok_or_else(|| {
                        SimError::MalformedTrace(format!("short row at line {}", lineno + 2))
                    })?
                    .parse::<f64>()
                    .map_err(|e| SimError::MalformedTrace(format!("line {}: {e}", lineno + 2)))?;
                trace.observers[i].1.push(v);
            }
        }
        if trace.len() >= 2 {
            trace.step_h = trace.t[1] - trace.t[0];
        }
        trace.validate()?;
        Ok(trace)
    }
}
