"""
Bohm potential lab - data formats

CSV tables (fields, figures, trajectories) and JSON records (solution
headers, identity reports, sidecars).
"""

from .serialization import (
    Sidecar,
    SolutionHeader,
    read_field_csv,
    report_json,
    sidecar_path,
    write_field_csv,
    write_sidecar,
    write_solution,
    write_table_csv,
    write_trajectories_csv,
)

__all__ = [
    "Sidecar",
    "SolutionHeader",
    "read_field_csv",
    "report_json",
    "sidecar_path",
    "write_field_csv",
    "write_sidecar",
    "write_solution",
    "write_table_csv",
    "write_trajectories_csv",
]
