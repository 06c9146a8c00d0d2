"""Python bindings for the orbitfit C++ core."""

from ._orbitfit import (
    Mesh,
    OrbitfitError,
    Session,
    SpatialIndex,
    distance_histogram,
    heat_color,
    icp_rigid,
    landmark_rigid_align,
    load_mesh,
    reconstruct_orbit,
    save_mesh,
    write_sample_case,
)

__all__ = [
    "Mesh",
    "OrbitfitError",
    "Session",
    "SpatialIndex",
    "distance_histogram",
    "heat_color",
    "icp_rigid",
    "landmark_rigid_align",
    "load_mesh",
    "reconstruct_orbit",
    "save_mesh",
    "write_sample_case",
]
