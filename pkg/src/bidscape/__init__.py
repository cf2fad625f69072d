"""Budget optimization for advertisers bidding on keywords in position auctions."""
from .graph import Instance, MixedStrategy, Query, Solution, StructureError, evaluate, evaluate_mixed, validate
from .landscape import MICRO, Landscape, SlotTable, from_micro, to_micro

__all__ = [
    "Instance", "MixedStrategy", "Query", "Solution", "StructureError", "evaluate", "evaluate_mixed",
    "validate", "MICRO", "Landscape", "SlotTable", "from_micro", "to_micro",
]
__version__ = "0.1.0"
