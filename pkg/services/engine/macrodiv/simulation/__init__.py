# Monte Carlo oracle and power-profile scenarios
