"""Post-pulse molecular orientation by trains of sudden half-cycle kicks."""
