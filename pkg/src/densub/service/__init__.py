"""HTTP service wrapping the solver, generators, and certificate checks."""
