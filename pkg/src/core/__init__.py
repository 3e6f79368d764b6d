"""Domain types, phasespace generation and the cell grid."""
