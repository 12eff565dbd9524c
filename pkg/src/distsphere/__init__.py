"""Distance fields, distance spheres, and certified dyadic-cube analysis."""

from .canonical import canonical_dumps, write_report
from .dyadic import (
    CellSet,
    CubeCover,
    CubeStats,
    DensityAudit,
    DensityVerdict,
    DenseRegion,
    DyadicCube,
    SplitReport,
    StatsPyramid,
    band_region,
    c_d,
    covering_radius,
    cube_stats,
    decompose,
    dense_region,
    density_audit,
    h1_image_content,
    is_eps_dense,
    light_heavy_split,
    mapping_content,
)
from .errors import (
    CertificateError,
    ContentNotSmallError,
    DistsphereError,
    DomainError,
    EmptySampleError,
    EmptySetError,
    ReportKindError,
    ResolutionError,
    ResourceGuardError,
    SingularPointError,
    UnsupportedDimensionError,
    UsageError,
)
from .field import (
    DistanceField,
    dist_exact,
    edt_grid,
    grid_site_distances,
    lipschitz_audit,
    nearest_point,
    read_dsf,
    write_dsf,
)
from .porosity import (
    EmptyDenseCheck,
    PorosityEstimate,
    empty_ball_radius,
    empty_dense_check,
    porosity_estimate,
)
from .render import render_svg
from .sets import (
    SetSpec,
    SiteSet,
    cantor_dust,
    load_set,
    make_set,
    rasterize,
    save_set,
    sierpinski_carpet,
    site_set,
)
from .spheres import SpherePolylines, extract_sphere, iso_residuals
from .straighten import (
    StraighteningAudit,
    from_polar,
    in_annulus,
    polar_map,
    straightening_audit,
)

__version__ = "0.1.0"
