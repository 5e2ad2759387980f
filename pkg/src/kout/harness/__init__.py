"""Monte Carlo experiment runner: configs, statistics, CSV and SVG output."""
