"""Declustering toolkit: digital nets, latin colorings, exact discrepancy.

Blocks of a d-dimensional grid are assigned to M disks so that any
axis-aligned range query is spread as evenly as possible. The package
builds such assignments from digital (0,m,d)-nets, verifies their
structural guarantees, and measures the worst-case imbalance exactly.
"""

from .coloring import (
    LatinColoring,
    Scheme,
    color_grid,
    coloring_from_net,
    export_map_csv,
    load_scheme,
    make_baseline,
    save_scheme,
    scheme_from_dict,
    scheme_to_dict,
    scheme_to_json_bytes,
    verify_latin,
)
from .discrepancy import (
    Box,
    DiscReport,
    GeoDisc,
    RangeCounter,
    ScaledValue,
    WitnessCertificate,
    complement_decompose,
    count_in_box,
    disc_report,
    find_positive_witness,
    fold_box_to_period,
    geometric_discrepancy,
    periodic_box_counts,
    report_to_dict,
    response_time,
    save_report,
)
from .errors import (
    BudgetExceededError,
    DeclusterError,
    InvalidNetError,
    NetConstructionError,
    ParameterError,
    SchemeFormatError,
)
from .gf import PrimePowerField, field_for, field_for_order, find_irreducible, is_prime
from .nets import (
    DigitalNet,
    ElementaryInterval,
    GeneratorSet,
    NetCheck,
    NetParams,
    crt_compose,
    enumerate_elementary_intervals,
    load_net,
    net_from_generators,
    pascal_power_generators,
    permutation_net,
    save_net,
    verify_net,
)
from .schemegen import (
    Factorization,
    SweepRow,
    build_net,
    factorize_canonical,
    generate_scheme,
    regenerate_scheme,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "Box",
    "DeclusterError",
    "DigitalNet",
    "DiscReport",
    "ElementaryInterval",
    "Factorization",
    "GeneratorSet",
    "GeoDisc",
    "InvalidNetError",
    "LatinColoring",
    "NetCheck",
    "NetConstructionError",
    "NetParams",
    "ParameterError",
    "PrimePowerField",
    "RangeCounter",
    "ScaledValue",
    "Scheme",
    "SchemeFormatError",
    "SweepRow",
    "WitnessCertificate",
    "build_net",
    "color_grid",
    "coloring_from_net",
    "complement_decompose",
    "count_in_box",
    "crt_compose",
    "disc_report",
    "enumerate_elementary_intervals",
    "export_map_csv",
    "factorize_canonical",
    "field_for",
    "field_for_order",
    "find_irreducible",
    "find_positive_witness",
    "fold_box_to_period",
    "generate_scheme",
    "geometric_discrepancy",
    "is_prime",
    "load_net",
    "load_scheme",
    "make_baseline",
    "net_from_generators",
    "pascal_power_generators",
    "periodic_box_counts",
    "permutation_net",
    "regenerate_scheme",
    "report_to_dict",
    "response_time",
    "save_net",
    "save_report",
    "save_scheme",
    "scheme_from_dict",
    "scheme_to_dict",
    "scheme_to_json_bytes",
    "sweep",
    "verify_latin",
    "verify_net",
]
