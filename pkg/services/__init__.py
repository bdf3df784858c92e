"""Services package: truth simulation, evaluation and fps sweeps."""
