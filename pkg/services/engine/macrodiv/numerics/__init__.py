# Special functions, closed-form integrals and quadrature oracles
