from .core import (
    Backend, Interpretation, MissingCapability, SemanticsError, denote, interpret, interpret_ctx,
    interpret_type,
)
from .measl1 import Kernel, MeasL1, Support, measure_norm
from .qchan import QChan, QDim
from .satisfy import AxiomCheck, AxiomReport, SatResult, check_axioms, check_satisfaction, first_order
from .vcat import VCat, metric_space, nat_trunc, poset
