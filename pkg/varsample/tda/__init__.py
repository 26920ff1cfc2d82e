from varsample.tda.diagram_io import emit_diagram, read_diagram_csv, write_diagram_csv, write_diagram_svg
from varsample.tda.inference import infer_betti, inference_corner
from varsample.tda.persistence import (Interval, PersistenceDiagram, betti_at, bottleneck_greedy,
                                       compute_persistence)
from varsample.tda.rips import FiltrationComplex, estimate_simplex_count, rips_filtration

__all__ = [
    "FiltrationComplex", "rips_filtration", "estimate_simplex_count",
    "Interval", "PersistenceDiagram", "compute_persistence", "betti_at", "bottleneck_greedy",
    "inference_corner", "infer_betti",
    "emit_diagram", "read_diagram_csv", "write_diagram_csv", "write_diagram_svg",
]
