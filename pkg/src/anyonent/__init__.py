"""Entanglement measures for bipartite anyonic states.

Anyonic density matrices live on direct sums of total-charge sectors with
quantum-trace normalization.  The library computes the total entanglement,
its conventional part, and the anyonic charge entanglement that has no
tensor-product analogue, together with the channel and decoherence machinery
needed to check their resource-theoretic properties.
"""

from .channels import (
    KrausChannel,
    KrausOp,
    NotFree,
    adjoin_vacuum_ancilla,
    apply_channel,
    apply_D,
    map_F,
    map_G,
    measure_local_charge,
)
from .fibonacci import (
    IsotropicParams,
    build_isotropic,
    build_mes,
    e_ace_closed,
    e_ce_closed,
    sweep,
)
from .frankwolfe import FrankWolfeConfig, ree_frank_wolfe
from .measures import (
    ClosedFormUnavailable,
    MeasureResult,
    e_ace,
    e_ce,
    e_total,
    entropy,
    relative_entropy,
    s_ace,
)
from .model import (
    AnyonModel,
    Charge,
    FusionPath,
    FusionTable,
    builtin_model,
    enumerate_paths,
    parse_model,
    render_model,
    solve_qdims,
)
from .states import (
    AnyonicDensityMatrix,
    BipartiteSpace,
    PartyLayout,
    SectorKey,
    SingleSystemDensityMatrix,
    build_space,
    load_state,
    maximally_mixed,
    mix,
    partial_quantum_trace,
    product_state,
    quantum_trace,
    random_state,
    save_state,
    validate,
)

__version__ = "0.1.0"
